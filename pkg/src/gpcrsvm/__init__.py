"""Human-vs-other GPCR sequence classification toolkit.

Pipeline: FASTA ingestion and species labeling (seqio), TMHMM topology
parsing and extracellular region extraction (topology), 24-dimensional
feature vectors with min-max normalization (features), an SMO-trained RBF
SVM (svm) with a Gaussian naive Bayes baseline (baseline), and a metrics /
cross-validation harness (evaluation). The cli module wires these into
scriptable subcommands.
"""

__version__ = "0.1.0"
