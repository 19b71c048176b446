"""Soft-margin binary SVM with an RBF kernel, trained by sequential
minimal optimization.

The trainer solves the dual problem

    max  sum(alpha) - 0.5 * sum_ij alpha_i alpha_j y_i y_j K(x_i, x_j)
    s.t. 0 <= alpha_i <= C,   sum_i alpha_i y_i = 0

by repeatedly picking a pair of multipliers that violates the optimality
conditions and solving the two-variable subproblem analytically. Pair
selection is deterministic: the first multiplier is the worst violator
found on a scan (non-bound multipliers first, full scans as fallback), the
second maximizes the error difference |E1 - E2| with ties broken by lowest
index, falling back to the bias-free extreme pair and then an index-order
sweep if the preferred choice cannot move.
"""

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from . import modelfile
from .errors import DegenerateDataError, ModelFormatError, ModelMismatchError
from .features import Dataset, Normalizer, apply_normalizer, fit_normalizer
from .seqio import Label

SVM_SCHEMA = "gpcr-svm/1"

# Precompute the full Gram matrix up to this many points; above it, fall
# back to an LRU row cache.
FULL_GRAM_LIMIT = 2000

_ETA_EPS = 1e-12  # below this, treat the pair curvature as zero
_STEP_EPS = 1e-12  # relative alpha movement that counts as progress
_OBJ_SLACK = 1e-9  # tolerated per-update objective decrease (debug mode)


def rbf_kernel(x: np.ndarray, y: np.ndarray, gamma: float) -> float:
    """exp(-gamma * ||x - y||^2) for a single pair of vectors."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape:
        raise ValueError(f"kernel arguments differ in shape: {x.shape} vs {y.shape}")
    diff = x - y
    return float(np.exp(-gamma * np.dot(diff, diff)))


def rbf_gram(X: np.ndarray, Y: np.ndarray | None, gamma: float) -> np.ndarray:
    """Kernel matrix K[i, j] = exp(-gamma * ||X_i - Y_j||^2)."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    Y = X if Y is None else np.atleast_2d(np.asarray(Y, dtype=float))
    if X.shape[1] != Y.shape[1]:
        raise ValueError(
            f"kernel arguments differ in dimension: {X.shape[1]} vs {Y.shape[1]}"
        )
    sq = (
        np.sum(X * X, axis=1)[:, None]
        + np.sum(Y * Y, axis=1)[None, :]
        - 2.0 * X @ Y.T
    )
    np.maximum(sq, 0.0, out=sq)
    return np.exp(-gamma * sq)


@dataclass(frozen=True)
class SvmConfig:
    gamma: float = 10.0
    c: float = 1.0
    kkt_tolerance: float = 1e-3
    max_passes: int | None = None  # stall budget; None = 10 * n
    seed: int = 42  # reserved for randomized tie-breaking; solver is deterministic

    def __post_init__(self):
        if not self.gamma > 0:
            raise ValueError(f"gamma must be positive, got {self.gamma}")
        if not self.c > 0:
            raise ValueError(f"c must be positive, got {self.c}")
        if not self.kkt_tolerance > 0:
            raise ValueError(
                f"kkt_tolerance must be positive, got {self.kkt_tolerance}"
            )
        if self.max_passes is not None and self.max_passes < 1:
            raise ValueError(f"max_passes must be positive, got {self.max_passes}")


@dataclass
class TrainingDiagnostics:
    updates: int
    scans: int
    converged: bool
    objective: float
    max_kkt_violation: float
    balance: float  # sum(alpha * y) before pruning
    alphas_full: np.ndarray  # all multipliers, zero entries included
    objective_history: list[float] | None = None


@dataclass
class SvmModel:
    support_vectors: np.ndarray  # (m, d), in normalized feature space
    dual_coeffs: np.ndarray  # (m,), alpha_i * y_i
    bias: float
    config: SvmConfig
    normalizer: Normalizer | None = None
    positive_label: str = Label.HUMAN.value
    train_positive_prior: float | None = None
    diagnostics: TrainingDiagnostics | None = field(default=None, repr=False)

    @property
    def dim(self) -> int:
        return self.support_vectors.shape[1]


class _KernelCache:
    """Row access to the Gram matrix: dense up to FULL_GRAM_LIMIT points,
    LRU-cached rows beyond that."""

    def __init__(self, X: np.ndarray, gamma: float, full_limit: int):
        self.X = X
        self.gamma = gamma
        self.n = X.shape[0]
        if self.n <= full_limit:
            self._matrix = rbf_gram(X, None, gamma)
            self.row = lambda i: self._matrix[i]
        else:
            self._matrix = None
            self.row = lru_cache(maxsize=4096)(self._compute_row)

    def _compute_row(self, i: int) -> np.ndarray:
        return rbf_gram(self.X[i : i + 1], self.X, self.gamma)[0]

    def entry(self, i: int, j: int) -> float:
        return float(self.row(i)[j])

    def decision_without_bias(self, beta: np.ndarray) -> np.ndarray:
        if self._matrix is not None:
            return self._matrix @ beta
        out = np.empty(self.n)
        for start in range(0, self.n, 256):
            stop = min(start + 256, self.n)
            out[start:stop] = rbf_gram(self.X[start:stop], self.X, self.gamma) @ beta
        return out


def kkt_violations(
    alpha: np.ndarray, y: np.ndarray, decision: np.ndarray, c: float
) -> np.ndarray:
    """Per-point violation of the dual optimality conditions, in margin
    units, given the full decision values f(x_i) (bias included)."""
    r = y * (decision - y)
    bound_tol = 1e-8 * c
    viol = np.zeros_like(alpha)
    can_grow = alpha < c - bound_tol
    can_shrink = alpha > bound_tol
    viol[can_grow] = np.maximum(viol[can_grow], -r[can_grow])
    viol[can_shrink] = np.maximum(viol[can_shrink], r[can_shrink])
    return viol


class _SmoSolver:
    def __init__(self, X, y, config: SvmConfig, debug: bool):
        self.X = X
        self.y = y
        self.n = X.shape[0]
        self.c = config.c
        self.tol = config.kkt_tolerance
        self.stall_budget = (
            config.max_passes if config.max_passes is not None else 10 * self.n
        )
        self.kernel = _KernelCache(X, config.gamma, FULL_GRAM_LIMIT)
        self.alpha = np.zeros(self.n)
        self.bias = 0.0
        # Error cache: E_i = f(x_i) - y_i with the current alpha and bias.
        self.errors = self.bias - y.astype(float)
        self.bound_tol = 1e-8 * self.c
        self.debug = debug
        self.history: list[float] = [0.0] if debug else []
        self.updates = 0
        self.scans = 0

    # -- bias-free optimality bookkeeping ---------------------------------
    # Feasible biases satisfy b >= G_i on the "lower" set and b <= G_i on
    # the "upper" set, where G_i = y_i - sum_j alpha_j y_j K_ij = bias - E_i.
    # Optimality within tolerance <=> max(lower) - min(upper) <= 2 * tol.

    def _sets(self):
        at_zero = self.alpha <= self.bound_tol
        at_c = self.alpha >= self.c - self.bound_tol
        pos = self.y > 0
        lower = (pos & ~at_c) | (~pos & ~at_zero)
        upper = (pos & ~at_zero) | (~pos & ~at_c)
        return lower, upper

    def optimality_gap(self) -> float:
        g = self.bias - self.errors
        lower, upper = self._sets()
        return float(np.max(g[lower]) - np.min(g[upper]))

    def _extreme_pair(self) -> tuple[int, int]:
        g = self.bias - self.errors
        lower, upper = self._sets()
        lo = np.where(lower, g, -np.inf)
        up = np.where(upper, g, np.inf)
        return int(np.argmax(lo)), int(np.argmin(up))

    # -- pair updates ------------------------------------------------------

    def take_step(self, i1: int, i2: int) -> bool:
        if i1 == i2:
            return False
        a1, a2 = self.alpha[i1], self.alpha[i2]
        y1, y2 = self.y[i1], self.y[i2]
        e1, e2 = self.errors[i1], self.errors[i2]
        s = y1 * y2
        if s < 0:
            lo, hi = max(0.0, a2 - a1), min(self.c, self.c + a2 - a1)
        else:
            lo, hi = max(0.0, a1 + a2 - self.c), min(self.c, a1 + a2)
        if hi - lo <= 0:
            return False
        k11 = self.kernel.entry(i1, i1)
        k12 = self.kernel.entry(i1, i2)
        k22 = self.kernel.entry(i2, i2)
        eta = k11 + k22 - 2.0 * k12
        if eta > _ETA_EPS:
            a2_new = a2 + y2 * (e1 - e2) / eta
            a2_new = min(max(a2_new, lo), hi)
        else:
            # Zero curvature along the constraint line: the objective is
            # linear there, so compare the two endpoints directly.
            gain_lo = self._pair_gain(i1, i2, lo, k11, k12, k22)
            gain_hi = self._pair_gain(i1, i2, hi, k11, k12, k22)
            if max(gain_lo, gain_hi) <= _ETA_EPS:
                return False
            a2_new = lo if gain_lo > gain_hi else hi
        # Snap to the box so bound multipliers are exact.
        if a2_new < self.bound_tol:
            a2_new = 0.0
        elif a2_new > self.c - self.bound_tol:
            a2_new = self.c
        if abs(a2_new - a2) < _STEP_EPS * (a2_new + a2 + _STEP_EPS):
            return False
        # The equality constraint is preserved exactly: a1 absorbs the move.
        a1_new = a1 + s * (a2 - a2_new)
        d1 = y1 * (a1_new - a1)
        d2 = y2 * (a2_new - a2)
        b1 = self.bias - (e1 + d1 * k11 + d2 * k12)
        b2 = self.bias - (e2 + d1 * k12 + d2 * k22)
        if 0.0 < a1_new < self.c:
            new_bias = b1
        elif 0.0 < a2_new < self.c:
            new_bias = b2
        else:
            new_bias = 0.5 * (b1 + b2)
        self.errors += (
            d1 * self.kernel.row(i1) + d2 * self.kernel.row(i2)
            + (new_bias - self.bias)
        )
        self.alpha[i1] = a1_new
        self.alpha[i2] = a2_new
        self.bias = new_bias
        self.updates += 1
        if self.debug:
            obj = self.current_objective()
            prev = self.history[-1]
            if obj < prev - _OBJ_SLACK * max(1.0, abs(prev)):
                raise AssertionError(
                    f"dual objective decreased: {prev!r} -> {obj!r} "
                    f"on update {self.updates}"
                )
            self.history.append(obj)
        return True

    def _pair_gain(self, i1, i2, a2_end, k11, k12, k22) -> float:
        """Dual objective change when alpha_2 moves to a2_end along the
        equality constraint."""
        a1, a2 = self.alpha[i1], self.alpha[i2]
        y1, y2 = self.y[i1], self.y[i2]
        s = y1 * y2
        a1_end = a1 + s * (a2 - a2_end)
        d1 = y1 * (a1_end - a1)
        d2 = y2 * (a2_end - a2)
        u1 = self.errors[i1] + y1 - self.bias
        u2 = self.errors[i2] + y2 - self.bias
        return (
            (a1_end - a1)
            + (a2_end - a2)
            - d1 * u1
            - d2 * u2
            - 0.5 * (d1 * d1 * k11 + 2.0 * d1 * d2 * k12 + d2 * d2 * k22)
        )

    def examine(self, i1: int) -> bool:
        """Try second choices for i1 until one moves: the |E1 - E2|
        maximizer, the bias-free extreme pair partner, then everything."""
        diffs = np.abs(self.errors[i1] - self.errors)
        diffs[i1] = -1.0
        candidates = [int(np.argmax(diffs))]
        lo_idx, up_idx = self._extreme_pair()
        candidates.extend([up_idx if i1 == lo_idx else lo_idx, lo_idx, up_idx])
        seen = set()
        for i2 in candidates:
            if i2 != i1 and i2 not in seen:
                seen.add(i2)
                if self.take_step(i1, i2):
                    return True
        for i2 in range(self.n):
            if i2 != i1 and i2 not in seen:
                if self.take_step(i1, i2):
                    return True
        return False

    def scan(self, non_bound_only: bool) -> bool:
        """One selection pass: examine violators, worst first. Returns True
        as soon as any pair update succeeds."""
        self.scans += 1
        r = self.y * self.errors
        viol = np.zeros(self.n)
        can_grow = self.alpha < self.c - self.bound_tol
        can_shrink = self.alpha > self.bound_tol
        viol[can_grow] = np.maximum(viol[can_grow], -r[can_grow])
        viol[can_shrink] = np.maximum(viol[can_shrink], r[can_shrink])
        if non_bound_only:
            viol[~(can_grow & can_shrink)] = 0.0
        order = np.argsort(-viol, kind="stable")
        for i1 in order:
            if viol[i1] <= self.tol:
                break
            if self.examine(int(i1)):
                return True
        return False

    def current_objective(self) -> float:
        beta = self.alpha * self.y
        u = self.kernel.decision_without_bias(beta)
        return float(np.sum(self.alpha) - 0.5 * beta @ u)

    def solve(self) -> bool:
        """Run scans to convergence. Returns True when the optimality gap
        closed, False when the solver stalled or ran out of budget."""
        hard_cap = max(100_000, 200 * self.n)
        stalled = 0
        non_bound = False
        while self.updates < hard_cap:
            if self.optimality_gap() <= 2.0 * self.tol:
                return True
            if self.scan(non_bound):
                stalled = 0
                non_bound = True
                continue
            stalled += 1
            if stalled >= self.stall_budget:
                return False
            if non_bound:
                non_bound = False  # escalate to a full scan
                continue
            # A full scan tried every violator against every partner and
            # nothing moved; repeating it cannot help.
            return False
        return self.optimality_gap() <= 2.0 * self.tol


def train(
    X: np.ndarray,
    y: np.ndarray,
    config: SvmConfig | None = None,
    *,
    normalizer: Normalizer | None = None,
    train_positive_prior: float | None = None,
    debug: bool = False,
) -> SvmModel:
    """Train on normalized vectors X with labels y in {-1, +1}.

    Deterministic for a fixed input order. With debug=True the solver
    asserts that the dual objective never decreases across updates and
    keeps the per-update objective trace in the diagnostics.
    """
    config = config or SvmConfig()
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if X.ndim != 2 or X.shape[0] != y.shape[0]:
        raise ValueError(f"bad training shapes: X {X.shape}, y {y.shape}")
    if not np.all(np.isfinite(X)):
        raise ValueError("training vectors contain non-finite values")
    if not np.all(np.isin(y, (-1.0, 1.0))):
        raise ValueError("labels must be -1 or +1")
    if len(np.unique(y)) < 2:
        raise DegenerateDataError("training data contains a single class")

    solver = _SmoSolver(X, y, config, debug)
    converged = solver.solve()
    alpha = np.clip(solver.alpha, 0.0, config.c)

    # Equality constraint must survive training (checked before pruning).
    balance = float(np.dot(alpha, y))
    if abs(balance) > 1e-8:
        raise AssertionError(f"sum(alpha * y) = {balance!r} after training")

    # Recompute the bias from scratch as the midpoint of the feasible
    # interval; that choice minimizes the worst per-point KKT violation
    # (free support vectors belong to both bounding sets, so their margin
    # conditions are covered automatically).
    beta = alpha * y
    u = solver.kernel.decision_without_bias(beta)
    g = y - u
    lower, upper = solver._sets()
    bias = 0.5 * (float(np.max(g[lower])) + float(np.min(g[upper])))

    viol = kkt_violations(alpha, y, u + bias, config.c)
    diagnostics = TrainingDiagnostics(
        updates=solver.updates,
        scans=solver.scans,
        converged=converged,
        objective=float(np.sum(alpha) - 0.5 * beta @ u),
        max_kkt_violation=float(np.max(viol)),
        balance=balance,
        alphas_full=alpha.copy(),
        objective_history=solver.history if debug else None,
    )

    keep = alpha > 1e-10 * config.c
    return SvmModel(
        support_vectors=X[keep].copy(),
        dual_coeffs=beta[keep].copy(),
        bias=bias,
        config=config,
        normalizer=normalizer,
        train_positive_prior=train_positive_prior,
        diagnostics=diagnostics,
    )


def decision_function(model: SvmModel, x: np.ndarray) -> float | np.ndarray:
    """f(x) = sum_i dual_coeffs_i * K(sv_i, x) + bias, for normalized x
    (single vector or a batch of rows)."""
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    rows = np.atleast_2d(x)
    if rows.shape[1] != model.dim:
        raise ModelMismatchError(
            f"input has {rows.shape[1]} features, model expects {model.dim}"
        )
    k = rbf_gram(rows, model.support_vectors, model.config.gamma)
    values = k @ model.dual_coeffs + model.bias
    return float(values[0]) if single else values


def predict(model: SvmModel, x: np.ndarray) -> Label | list[Label]:
    """Classify raw feature vectors; the model's stored normalizer is
    applied first. Ties (f = 0) go to the positive class."""
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    rows = np.atleast_2d(x)
    if rows.shape[1] != model.dim:
        raise ModelMismatchError(
            f"input has {rows.shape[1]} features, model expects {model.dim}"
        )
    if model.normalizer is not None:
        rows = np.stack([apply_normalizer(model.normalizer, row) for row in rows])
    values = decision_function(model, rows)
    labels = [Label.HUMAN if v >= 0 else Label.OTHER for v in values]
    return labels[0] if single else labels


def fit_dataset(
    dataset: Dataset,
    config: SvmConfig | None = None,
    normalize: str = "minmax",
    debug: bool = False,
) -> SvmModel:
    """Fit the full pipeline on a labeled dataset: fit the normalizer on
    the training vectors (mode 'minmax' or 'none'), then train."""
    if normalize not in ("minmax", "none"):
        raise ValueError(f"unknown normalization mode {normalize!r}")
    if not dataset.vectors:
        raise DegenerateDataError("cannot train on an empty dataset")
    X = dataset.matrix()
    normalizer = None
    if normalize == "minmax":
        normalizer = fit_normalizer(dataset.vectors)
        X = np.stack([apply_normalizer(normalizer, row) for row in X])
    return train(
        X,
        dataset.signs(),
        config,
        normalizer=normalizer,
        train_positive_prior=dataset.positive_fraction(),
        debug=debug,
    )


def save_model(model: SvmModel, sink) -> None:
    """Persist to the gpcr-svm/1 JSON schema with round-trip precision."""
    payload = {
        "schema": SVM_SCHEMA,
        "gamma": model.config.gamma,
        "c": model.config.c,
        "bias": model.bias,
        "positive_label": model.positive_label,
        "normalizer": None
        if model.normalizer is None
        else {
            "min": model.normalizer.minimum.tolist(),
            "max": model.normalizer.maximum.tolist(),
        },
        "support_vectors": model.support_vectors.tolist(),
        "dual_coeffs": model.dual_coeffs.tolist(),
        "train_positive_prior": model.train_positive_prior,
    }
    modelfile.write_document(payload, sink)


def load_model(source) -> SvmModel:
    doc = modelfile.read_document(source, SVM_SCHEMA)
    gamma = modelfile.finite_scalar(modelfile.require(doc, "gamma"), "gamma")
    c = modelfile.finite_scalar(modelfile.require(doc, "c"), "c")
    bias = modelfile.finite_scalar(modelfile.require(doc, "bias"), "bias")
    positive = modelfile.require(doc, "positive_label")
    svs = modelfile.finite_matrix(
        modelfile.require(doc, "support_vectors"), "support_vectors"
    )
    coeffs = modelfile.finite_vector(
        modelfile.require(doc, "dual_coeffs"), "dual_coeffs"
    )
    if coeffs.shape[0] != svs.shape[0]:
        raise ModelMismatchError(
            f"{coeffs.shape[0]} dual coefficients for {svs.shape[0]} "
            "support vectors"
        )
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
        if minimum.shape != maximum.shape or minimum.shape[0] != svs.shape[1]:
            raise ModelMismatchError("normalizer arrays do not match model dimension")
        normalizer = Normalizer(minimum=minimum, maximum=maximum, fitted_on=0)
    prior = doc.get("train_positive_prior")
    if prior is not None:
        prior = modelfile.finite_scalar(prior, "train_positive_prior")
    return SvmModel(
        support_vectors=svs,
        dual_coeffs=coeffs,
        bias=bias,
        config=SvmConfig(gamma=gamma, c=c),
        normalizer=normalizer,
        positive_label=str(positive),
        train_positive_prior=prior,
    )
