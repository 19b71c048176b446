"""Gaussian naive Bayes baseline classifier."""

from dataclasses import dataclass

import numpy as np

from . import modelfile
from .errors import DegenerateDataError, ModelFormatError, ModelMismatchError
from .features import Dataset, Normalizer, apply_normalizer, fit_normalizer
from .seqio import Label

NB_SCHEMA = "gpcr-nb/1"

VARIANCE_FLOOR = 1e-9


@dataclass
class NbModel:
    prior_pos: float
    prior_neg: float
    mean_pos: np.ndarray
    mean_neg: np.ndarray
    var_pos: np.ndarray
    var_neg: np.ndarray
    normalizer: Normalizer | None = None
    positive_label: str = Label.HUMAN.value
    train_positive_prior: float | None = None

    @property
    def dim(self) -> int:
        return self.mean_pos.shape[0]


def nb_train(
    X: np.ndarray,
    y: np.ndarray,
    *,
    normalizer: Normalizer | None = None,
    train_positive_prior: float | None = None,
) -> NbModel:
    """Class priors from frequencies; per-class, per-feature mean and
    population variance, floored to avoid singular densities."""
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if X.ndim != 2 or X.shape[0] != y.shape[0] or X.shape[0] == 0:
        raise ValueError(f"bad training shapes: X {X.shape}, y {y.shape}")
    pos = y > 0
    if not pos.any() or pos.all():
        raise DegenerateDataError("training data contains a single class")
    n = len(y)
    return NbModel(
        prior_pos=pos.sum() / n,
        prior_neg=(~pos).sum() / n,
        mean_pos=X[pos].mean(axis=0),
        mean_neg=X[~pos].mean(axis=0),
        var_pos=np.maximum(X[pos].var(axis=0), VARIANCE_FLOOR),
        var_neg=np.maximum(X[~pos].var(axis=0), VARIANCE_FLOOR),
        normalizer=normalizer,
        train_positive_prior=train_positive_prior,
    )


def log_odds(model: NbModel, x: np.ndarray) -> float | np.ndarray:
    """log P(pos | x) - log P(neg | x) up to the shared evidence term."""
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    rows = np.atleast_2d(x)
    if rows.shape[1] != model.dim:
        raise ModelMismatchError(
            f"input has {rows.shape[1]} features, model expects {model.dim}"
        )
    if model.normalizer is not None:
        rows = np.stack([apply_normalizer(model.normalizer, row) for row in rows])

    def class_log_likelihood(mean, var):
        return -0.5 * np.sum(
            np.log(2.0 * np.pi * var) + (rows - mean) ** 2 / var, axis=1
        )

    scores = (
        np.log(model.prior_pos)
        - np.log(model.prior_neg)
        + class_log_likelihood(model.mean_pos, model.var_pos)
        - class_log_likelihood(model.mean_neg, model.var_neg)
    )
    return float(scores[0]) if single else scores


def nb_predict(model: NbModel, x: np.ndarray) -> Label | list[Label]:
    """Argmax of the class posteriors; ties go to the positive class."""
    scores = log_odds(model, x)
    if np.isscalar(scores):
        return Label.HUMAN if scores >= 0 else Label.OTHER
    return [Label.HUMAN if s >= 0 else Label.OTHER for s in scores]


def nb_fit_dataset(dataset: Dataset, normalize: str = "minmax") -> NbModel:
    """Pipeline fit mirroring the SVM path: normalizer fitted on the
    training vectors, then the Gaussian model."""
    if normalize not in ("minmax", "none"):
        raise ValueError(f"unknown normalization mode {normalize!r}")
    if not dataset.vectors:
        raise DegenerateDataError("cannot train on an empty dataset")
    X = dataset.matrix()
    normalizer = None
    if normalize == "minmax":
        normalizer = fit_normalizer(dataset.vectors)
        X = np.stack([apply_normalizer(normalizer, row) for row in X])
    return nb_train(
        X,
        dataset.signs(),
        normalizer=normalizer,
        train_positive_prior=dataset.positive_fraction(),
    )


def save_nb_model(model: NbModel, sink) -> None:
    payload = {
        "schema": NB_SCHEMA,
        "positive_label": model.positive_label,
        "priors": [model.prior_pos, model.prior_neg],
        "means": [model.mean_pos.tolist(), model.mean_neg.tolist()],
        "variances": [model.var_pos.tolist(), model.var_neg.tolist()],
        "normalizer": None
        if model.normalizer is None
        else {
            "min": model.normalizer.minimum.tolist(),
            "max": model.normalizer.maximum.tolist(),
        },
        "train_positive_prior": model.train_positive_prior,
    }
    modelfile.write_document(payload, sink)


def load_nb_model(source) -> NbModel:
    doc = modelfile.read_document(source, NB_SCHEMA)
    priors = modelfile.finite_vector(modelfile.require(doc, "priors"), "priors")
    if priors.shape[0] != 2 or priors.min() <= 0:
        raise ModelFormatError("field 'priors' must hold two positive numbers")
    means = modelfile.finite_matrix(modelfile.require(doc, "means"), "means")
    variances = modelfile.finite_matrix(
        modelfile.require(doc, "variances"), "variances"
    )
    if means.shape != variances.shape or means.shape[0] != 2:
        raise ModelFormatError("'means' and 'variances' must be 2 x d arrays")
    raw_norm = modelfile.require(doc, "normalizer")
    normalizer = None
    if raw_norm is not None:
        if not isinstance(raw_norm, dict):
            raise ModelFormatError("field 'normalizer' must be an object or null")
        minimum = modelfile.finite_vector(
            modelfile.require(raw_norm, "min"), "normalizer.min"
        )
        maximum = modelfile.finite_vector(
            modelfile.require(raw_norm, "max"), "normalizer.max"
        )
        if minimum.shape != maximum.shape or minimum.shape[0] != means.shape[1]:
            raise ModelMismatchError("normalizer arrays do not match model dimension")
        normalizer = Normalizer(minimum=minimum, maximum=maximum, fitted_on=0)
    prior = doc.get("train_positive_prior")
    if prior is not None:
        prior = modelfile.finite_scalar(prior, "train_positive_prior")
    return NbModel(
        prior_pos=float(priors[0]),
        prior_neg=float(priors[1]),
        mean_pos=means[0],
        mean_neg=means[1],
        var_pos=variances[0],
        var_neg=variances[1],
        normalizer=normalizer,
        positive_label=str(modelfile.require(doc, "positive_label")),
        train_positive_prior=prior,
    )
