#!/usr/bin/env python3
"""End-to-end experiment on a synthetic corpus: extract features, then
compare the SVM against the naive Bayes baseline with a stratified holdout
split and k-fold cross-validation."""

import argparse

from gpcrsvm import evaluation, features, seqio, svm, synthetic
from gpcrsvm.baseline import nb_fit_dataset, nb_predict


def svm_fitter(config):
    def fit(train_ds):
        model = svm.fit_dataset(train_ds, config)
        return lambda x: svm.predict(model, x)
    return fit


def nb_fitter():
    def fit(train_ds):
        model = nb_fit_dataset(train_ds)
        return lambda x: nb_predict(model, x)
    return fit


def holdout_report(dataset, train_count, fit, seed):
    train_ds, test_ds = evaluation.holdout_split(dataset, train_count, seed)
    predictor = fit(train_ds)
    records = tuple(
        evaluation.PredictionRecord(v.source_id, v.label, predictor(v.values))
        for v in test_ds.vectors
    )
    return evaluation.evaluate_predictions(
        records, baseline_prior=train_ds.positive_fraction()
    )


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--n", type=int, default=224)
    parser.add_argument("--train-count", type=int, default=188)
    parser.add_argument("--cv", type=int, default=10)
    parser.add_argument("--seed", type=int, default=42)
    parser.add_argument("--gamma", type=float, default=10.0)
    parser.add_argument("--c", type=float, default=1.0)
    args = parser.parse_args()

    corpus = synthetic.make_corpus(n_sequences=args.n, seed=args.seed)
    labeled, _ = seqio.assign_labels(corpus.records)
    dataset = features.assemble_dataset(labeled, corpus.topologies)
    prov = dataset.provenance
    print(f"assembled {prov.retained}/{prov.ingested} sequences\n")

    config = svm.SvmConfig(gamma=args.gamma, c=args.c)
    fitters = [("SVM (RBF, SMO)", svm_fitter(config)), ("Naive Bayes", nb_fitter())]

    print(f"== holdout split {args.train_count}/{len(dataset) - args.train_count} ==")
    for name, fit in fitters:
        report = holdout_report(dataset, args.train_count, fit, args.seed)
        bm = (report.sensitivity, report.specificity, report.accuracy)
        print(f"{name:<18} sensitivity {bm[0]:.2f}  specificity {bm[1]:.2f}  "
              f"accuracy {bm[2]:.2f}")

    print(f"\n== {args.cv}-fold cross-validation ==")
    for name, fit in fitters:
        result = evaluation.cross_validate(dataset, args.cv, fit, args.seed)
        print(f"\n-- {name} --")
        print(evaluation.render_text(result.pooled), end="")


if __name__ == "__main__":
    main()
