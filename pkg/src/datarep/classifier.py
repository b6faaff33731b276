"""Domain classifier: L2-regularized logistic regression with group-aware
cross-validation.

The classifier is trained to tell training-domain samples (label 0) from
unseen-domain samples (label 1).  Its held-out error and held-out
probabilities are the raw material for the similarity measures.

Protocol choices, fixed here so results are reproducible:

* Balanced sampling: the larger domain is subsampled to the size of the
  smaller one with the run seed.  An error of 0.5 then always means
  indistinguishable.
* Features are standardized per column with statistics from the training
  folds only; regularization strength is scale dependent.
* The regularization strength is picked from a log grid by minimum mean
  held-out log-loss, with exact ties broken toward the larger strength.
  Log-loss is the proper scoring rule for the held-out probabilities the
  similarity analysis consumes: misclassification error cannot tell a
  calibrated probability vector from an over-shrunken one, and selecting
  on it lets a heavily regularized model win on noise, collapsing every
  probability to 0.5 and erasing the separability signal.  The reported
  cross-validation error is still the plain misclassification rate at the
  chosen strength.
* Fold assignment is group-aware (all samples of one group land in the same
  fold) and stratified by domain, and it is invariant under swapping the
  two domain tags: each domain's groups are shuffled by an independent
  generator seeded identically.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .core import Dataset, DomainTag, ProbabilitySet, validate_dataset
from .exceptions import (
    InvalidConfig,
    NonConvergenceWarning,
    SingleClassFold,
    SingleClassInput,
    TooFewSamplesForFolds,
    ValidationError,
)

DEFAULT_LAMBDA_GRID = tuple(float(x) for x in np.logspace(-4, 4, 9))
DEFAULT_FOLDS = 5

_GRAD_TOL = 1e-8
_MAX_ITER = 200
_MAX_FOLD_ATTEMPTS = 10


@dataclass(frozen=True)
class ClassifierModel:
    """Logistic regression parameters in the feature space they were fit in."""

    weights: np.ndarray
    intercept: float
    lam: float
    converged: bool = True
    grad_norm: float = 0.0

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=np.float64).ravel().copy()
        w.flags.writeable = False
        object.__setattr__(self, "weights", w)
        if not (np.all(np.isfinite(w)) and math.isfinite(self.intercept)):
            raise ValidationError("model weights and intercept must be finite")
        if not self.lam > 0.0:
            raise InvalidConfig(f"lambda must be positive, got {self.lam}")

    def decision_values(self, features) -> np.ndarray:
        X = np.asarray(features, dtype=np.float64)
        return X @ self.weights + self.intercept

    def predict_proba(self, features) -> np.ndarray:
        """Probability of the unseen domain (label 1) per sample."""
        return _sigmoid(self.decision_values(features))


@dataclass(frozen=True)
class DomainFitResult:
    """Cross-validation outcome: chosen model, held-out error, pooled
    held-out probabilities."""

    model: ClassifierModel
    cv_error: float
    probabilities: ProbabilitySet
    chosen_lambda: float
    fold_errors: tuple[float, ...] = ()


def _sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z, dtype=np.float64)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def train_logistic(features, labels, lam: float) -> ClassifierModel:
    """Minimize mean cross-entropy + (lam / 2) * ||w||^2 (intercept free).

    Damped Newton iteration from zero, with backtracking so the objective
    never increases.  Stops when the gradient max-norm drops below 1e-8;
    after 200 iterations a NonConvergenceWarning reports the final gradient
    norm and the current iterate is returned anyway.
    """
    X = np.asarray(features, dtype=np.float64)
    if X.ndim == 1:
        X = X.reshape(-1, 1)
    y = np.asarray(labels, dtype=np.float64).ravel()
    if X.shape[0] != y.size:
        raise ValidationError(f"{X.shape[0]} samples but {y.size} labels")
    classes = np.unique(y)
    if classes.size < 2:
        raise SingleClassInput(f"labels contain a single class: {classes}")
    if not (set(classes) <= {0.0, 1.0}):
        raise ValidationError(f"labels must be 0/1, got {classes}")
    if not (math.isfinite(lam) and lam > 0.0):
        raise InvalidConfig(f"lambda must be positive, got {lam}")

    n, d = X.shape
    w = np.zeros(d)
    b = 0.0

    def objective(wv: np.ndarray, bv: float) -> float:
        z = X @ wv + bv
        return float(np.mean(np.logaddexp(0.0, z) - y * z) + 0.5 * lam * (wv @ wv))

    obj = objective(w, b)
    grad_norm = math.inf
    converged = False
    for _ in range(_MAX_ITER):
        z = X @ w + b
        p = _sigmoid(z)
        resid = (p - y) / n
        g_w = X.T @ resid + lam * w
        g_b = float(np.sum(resid))
        grad_norm = max(float(np.max(np.abs(g_w))) if d else 0.0, abs(g_b))
        if grad_norm < _GRAD_TOL:
            converged = True
            break
        # symmetric form of p * (1 - p): identical under label swap
        wdiag = _sigmoid(z) * _sigmoid(-z)
        H = np.empty((d + 1, d + 1))
        Xw = X * wdiag[:, None]
        H[:d, :d] = (X.T @ Xw) / n + lam * np.eye(d)
        H[:d, d] = H[d, :d] = np.sum(Xw, axis=0) / n
        H[d, d] = float(np.sum(wdiag)) / n + 1e-12
        g = np.append(g_w, g_b)
        try:
            step = np.linalg.solve(H, -g)
        except np.linalg.LinAlgError:
            break
        slope = float(g @ step)
        t = 1.0
        accepted = False
        for _ in range(50):
            cand_w = w + t * step[:d]
            cand_b = b + t * step[d]
            cand_obj = objective(cand_w, cand_b)
            if math.isfinite(cand_obj) and cand_obj <= obj + 1e-4 * t * slope:
                accepted = True
                break
            t *= 0.5
        if not accepted:
            break
        w, b, obj = cand_w, float(cand_b), cand_obj

    if not converged:
        warnings.warn(
            f"logistic solver stopped before tolerance; final gradient "
            f"max-norm {grad_norm:.3e}",
            NonConvergenceWarning,
            stacklevel=2,
        )
    return ClassifierModel(w, float(b), float(lam), converged, float(grad_norm))


# ---------------------------------------------------------------------------
# Fold assignment
# ---------------------------------------------------------------------------


def _group_keys(ds: Dataset, prefix: str) -> list:
    if ds.group_ids is None:
        return [(prefix, i) for i in range(ds.n_samples)]
    return list(ds.group_ids)


def _ordered_unique(keys: list) -> list:
    seen = {}
    for k in keys:
        if k not in seen:
            seen[k] = None
    return list(seen)


def _round_robin(groups: list, k: int, rng: np.random.Generator) -> dict:
    order = rng.permutation(len(groups))
    return {groups[gi]: pos % k for pos, gi in enumerate(order)}


def _fold_ids(training: Dataset, unseen: Dataset, k: int, seed: int, attempt: int) -> np.ndarray:
    """Fold index per pooled sample (training rows first, then unseen).

    Groups unique to one domain are dealt round-robin per domain with
    independently instantiated, identically seeded generators, which makes
    the assignment invariant under swapping the two datasets.  Groups
    present in both domains are dealt from a third generator so their
    samples still share a fold.
    """
    keys_t = _group_keys(training, "t")
    keys_u = _group_keys(unseen, "u")
    set_t, set_u = set(keys_t), set(keys_u)
    shared = set_t & set_u

    only_t = _ordered_unique([g for g in keys_t if g not in shared])
    only_u = _ordered_unique([g for g in keys_u if g not in shared])
    shared_in_order = _ordered_unique([g for g in keys_t + keys_u if g in shared])

    assign: dict = {}
    assign.update(_round_robin(only_t, k, np.random.default_rng([seed, 1, attempt])))
    assign.update(_round_robin(only_u, k, np.random.default_rng([seed, 1, attempt])))
    assign.update(_round_robin(shared_in_order, k, np.random.default_rng([seed, 2, attempt])))

    return np.array([assign[g] for g in keys_t + keys_u], dtype=np.intp)


def _folds_usable(fold_ids: np.ndarray, labels: np.ndarray, k: int) -> bool:
    for f in range(k):
        held = fold_ids == f
        if not held.any():
            return False
        rest = labels[~held]
        if rest.size == 0 or np.unique(rest).size < 2:
            return False
    return True


def _subsample_to_balance(training: Dataset, unseen: Dataset, seed: int) -> tuple[Dataset, Dataset]:
    n_t, n_u = training.n_samples, unseen.n_samples
    if n_t == n_u:
        return training, unseen
    rng = np.random.default_rng([seed, 0])
    n = min(n_t, n_u)
    larger = training if n_t > n_u else unseen
    idx = np.sort(rng.choice(larger.n_samples, size=n, replace=False))
    groups = None
    if larger.group_ids is not None:
        groups = tuple(larger.group_ids[i] for i in idx)
    shrunk = Dataset(larger.features[idx], larger.domain_tag, groups)
    if n_t > n_u:
        return shrunk, unseen
    return training, shrunk


def cross_validate(
    training: Dataset,
    unseen: Dataset,
    k: int = DEFAULT_FOLDS,
    lambda_grid=None,
    seed: int = 0,
) -> DomainFitResult:
    """Group-aware k-fold domain classification over a regularization grid.

    Returns the model refit on all (balanced) data at the selected strength,
    the pooled held-out misclassification rate, and the held-out
    probabilities pooled per class (p and 1 - p per sample).  Deterministic
    for fixed inputs and seed.

    The fold count is capped by the per-domain group counts, since every
    group must land in one fold.
    """
    validate_dataset(training)
    validate_dataset(unseen)
    if training.domain_tag is not DomainTag.TRAINING:
        raise InvalidConfig("first dataset must be tagged TRAINING")
    if unseen.domain_tag is not DomainTag.UNSEEN:
        raise InvalidConfig("second dataset must be tagged UNSEEN")
    if training.n_features != unseen.n_features:
        raise ValidationError(
            f"feature count mismatch: {training.n_features} vs {unseen.n_features}"
        )
    if k < 2:
        raise InvalidConfig(f"fold count must be at least 2, got {k}")
    if lambda_grid is None:
        lambda_grid = DEFAULT_LAMBDA_GRID
    grid = sorted({float(l) for l in lambda_grid})
    if not grid or any(not (math.isfinite(l) and l > 0.0) for l in grid):
        raise InvalidConfig(f"lambda grid must contain positive values, got {lambda_grid}")

    training, unseen = _subsample_to_balance(training, unseen, seed)
    n_per_class = training.n_samples
    if n_per_class < k:
        raise TooFewSamplesForFolds(
            f"{n_per_class} samples per class cannot fill {k} folds"
        )

    # Group-aware folds can use at most as many folds as the smaller
    # domain's group count, else some fold stays empty.
    groups_t = len(set(_group_keys(training, "t")))
    groups_u = len(set(_group_keys(unseen, "u")))
    k_eff = min(k, groups_t, groups_u)
    if k_eff < 2:
        raise TooFewSamplesForFolds(
            f"need at least 2 groups per domain for group-aware folds, "
            f"got {groups_t} and {groups_u}"
        )
    k = k_eff

    X = np.vstack([training.features, unseen.features])
    y = np.concatenate([np.zeros(training.n_samples), np.ones(unseen.n_samples)])

    fold_ids = None
    for attempt in range(_MAX_FOLD_ATTEMPTS):
        cand = _fold_ids(training, unseen, k, seed, attempt)
        if _folds_usable(cand, y, k):
            fold_ids = cand
            break
    if fold_ids is None:
        raise SingleClassFold(
            f"no usable fold assignment after {_MAX_FOLD_ATTEMPTS} reshuffles"
        )

    # Held-out decision values and probabilities per lambda, plus per-fold
    # error rates and log-losses for the selection rule.
    n_total = X.shape[0]
    fold_err = np.empty((len(grid), k))
    fold_logloss = np.empty((len(grid), k))
    probs = np.empty((len(grid), n_total))
    miss = np.empty((len(grid), n_total), dtype=bool)

    for f in range(k):
        held = fold_ids == f
        X_tr, y_tr = X[~held], y[~held]
        mu = X_tr.mean(axis=0)
        sd = X_tr.std(axis=0)
        sd[sd < 1e-12] = 1.0
        Xs_tr = (X_tr - mu) / sd
        Xs_ho = (X[held] - mu) / sd
        y_ho = y[held]
        for li, lam in enumerate(grid):
            model = train_logistic(Xs_tr, y_tr, lam)
            z = model.decision_values(Xs_ho)
            p = _sigmoid(z)
            wrong = (z >= 0.0) != (y_ho == 1.0)
            fold_err[li, f] = float(np.mean(wrong))
            fold_logloss[li, f] = float(np.mean(np.logaddexp(0.0, z) - y_ho * z))
            probs[li, held] = p
            miss[li, held] = wrong

    mean_ll = fold_logloss.mean(axis=1)
    best = min(range(len(grid)), key=lambda i: (mean_ll[i], -grid[i]))
    chosen = grid[best]

    cv_error = float(np.mean(miss[best]))
    probabilities = ProbabilitySet.from_probabilities(probs[best])

    # Refit on everything at the chosen strength and fold the training-side
    # standardization back into raw feature space.
    mu = X.mean(axis=0)
    sd = X.std(axis=0)
    sd[sd < 1e-12] = 1.0
    refit = train_logistic((X - mu) / sd, y, chosen)
    w_raw = refit.weights / sd
    b_raw = float(refit.intercept - np.sum(refit.weights * mu / sd))
    model = ClassifierModel(w_raw, b_raw, chosen, refit.converged, refit.grad_norm)

    return DomainFitResult(
        model=model,
        cv_error=cv_error,
        probabilities=probabilities,
        chosen_lambda=chosen,
        fold_errors=tuple(float(e) for e in fold_err[best]),
    )
