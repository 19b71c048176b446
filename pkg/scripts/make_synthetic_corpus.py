#!/usr/bin/env python3
"""Generate a synthetic GPCR corpus (FASTA + TMHMM topology files)."""

import argparse
from pathlib import Path

from gpcrsvm import seqio, synthetic, topology


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--n", type=int, default=100, help="number of sequences")
    parser.add_argument("--seed", type=int, default=42)
    parser.add_argument("--human-fraction", type=float, default=0.5)
    parser.add_argument("--out-dir", type=Path, default=Path("data"))
    args = parser.parse_args()

    corpus = synthetic.make_corpus(
        n_sequences=args.n, seed=args.seed, human_fraction=args.human_fraction
    )
    args.out_dir.mkdir(parents=True, exist_ok=True)
    fasta = args.out_dir / "synthetic.fasta"
    topo = args.out_dir / "synthetic.tmhmm"
    fasta.write_text(seqio.format_fasta(corpus.records))
    topo.write_text(topology.format_topology(corpus.topologies))
    n_human = sum(1 for r in corpus.records if r.id.endswith("_HUMAN"))
    print(f"wrote {len(corpus.records)} sequences ({n_human} human) to {fasta}")
    print(f"wrote matching topologies to {topo}")


if __name__ == "__main__":
    main()
