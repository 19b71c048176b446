"""Synthetic corpus generation for experiments and end-to-end tests.

The two classes differ strongly in both feature families: residues are
drawn i.i.d. from near-disjoint class distributions (human sequences are
dominated by the first ten alphabet residues, others by the last ten), and
extracellular region lengths come from class-specific ranges. Every
sequence gets a canonical 7-helix topology. Ids carry species suffixes
('_HUMAN' vs. others) so the standard labeling rule applies end to end.
"""

import random
from dataclasses import dataclass

from .seqio import AMINO_ACIDS, SequenceRecord
from .topology import SegmentKind, TopologyMap, TopologySegment

OTHER_SPECIES = ("BOVIN", "MOUSE", "RAT", "PIG", "CANFA", "CHICK")

# Fraction of residue mass on each class's preferred alphabet half.
_HEAVY_MASS = 0.96


def _class_weights(human: bool) -> list[float]:
    heavy = _HEAVY_MASS / 10
    light = (1.0 - _HEAVY_MASS) / 10
    if human:
        return [heavy] * 10 + [light] * 10
    return [light] * 10 + [heavy] * 10


@dataclass(frozen=True)
class SyntheticCorpus:
    records: list[SequenceRecord]  # unlabeled; ids encode the species
    topologies: list[TopologyMap]


def _random_topology(rng: random.Random, seq_id: str, human: bool) -> TopologyMap:
    if human:
        ntl = rng.randint(25, 40)
        loop_range = (5, 12)
    else:
        ntl = rng.randint(60, 90)
        loop_range = (15, 30)
    lengths = [ntl]
    for i in range(7):
        lengths.append(rng.randint(19, 25))  # TM helix
        if i < 6:
            lengths.append(rng.randint(*loop_range))
    lengths.append(rng.randint(10, 30))  # C-terminal inside tail
    kinds = [SegmentKind.OUTSIDE]
    for i in range(7):
        kinds.append(SegmentKind.TMHELIX)
        kinds.append(SegmentKind.INSIDE if i % 2 == 0 else SegmentKind.OUTSIDE)
    segments = []
    start = 1
    for kind, length in zip(kinds, lengths):
        segments.append(TopologySegment(kind, start, start + length - 1))
        start += length
    return TopologyMap(seq_id, start - 1, tuple(segments))


def make_corpus(
    n_sequences: int = 100,
    seed: int = 42,
    human_fraction: float = 0.5,
) -> SyntheticCorpus:
    """Generate n_sequences records with matching 7TM topologies."""
    rng = random.Random(seed)
    n_human = round(n_sequences * human_fraction)
    records = []
    topologies = []
    for i in range(n_sequences):
        is_human = i < n_human
        species = "HUMAN" if is_human else rng.choice(OTHER_SPECIES)
        seq_id = f"SYN{i:04d}_{species}"
        tmap = _random_topology(rng, seq_id, is_human)
        weights = _class_weights(is_human)
        residues = "".join(rng.choices(AMINO_ACIDS, weights=weights, k=tmap.length))
        records.append(
            SequenceRecord(seq_id, f"synthetic {species.lower()} receptor", residues)
        )
        topologies.append(tmap)
    return SyntheticCorpus(records=records, topologies=topologies)
