"""Experiment harness: repeated domain classification across a condition
spectrum, benchmark-prior sweeps, and the two-arm downstream comparison
that exhibits the turning point.

Seeding: repetition r of condition c runs with derived seed
``seed + c * 1000 + r``, so condition/repetition cells are independent
jobs whose results do not depend on execution order.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace

import numpy as np
from sklearn.exceptions import ConvergenceWarning
from sklearn.linear_model import LogisticRegression

from .classifier import cross_validate
from .core import BetaParams, Dataset, DomainTag, DrcConfig, DrcOutcome
from .exceptions import (
    DegenerateVariance,
    InvalidConfig,
    MissingLabels,
    TooFewValues,
)
from .ingest import (
    PatchSpec,
    extract_patches,
    images_to_dataset,
    load_csv,
    load_image_dir,
    patch_center_labels,
)
from .similarity import drc_from_params, fit_beta_mle, proxy_a_distance
from .synthgen import GaussianPairSpec, PhantomPairSpec, gen_gaussian_pair, gen_phantom_pair

HISTOGRAM_BINS = 50


@dataclass(frozen=True)
class FilePairSpec:
    """A condition backed by files on disk.

    CSV pairs reload the same rows every repetition (only fold assignment
    varies); image pairs resample patches with the repetition seed.
    """

    training_path: str
    unseen_path: str
    modality: str = "csv"
    patch_spec: PatchSpec = PatchSpec(max_patches=300)

    def __post_init__(self):
        if self.modality not in ("csv", "images"):
            raise InvalidConfig(f"modality must be csv or images, got {self.modality}")


@dataclass(frozen=True)
class LabeledArraysSpec:
    """In-memory labeled data for the downstream two-arm comparison."""

    x_training: np.ndarray
    y_training: np.ndarray
    x_unseen: np.ndarray
    y_unseen: np.ndarray
    x_eval: np.ndarray
    y_eval: np.ndarray


@dataclass(frozen=True)
class Condition:
    """One point on the similarity spectrum."""

    name: str
    generator: object
    label: int = 0


@dataclass(frozen=True)
class RepRecord:
    """Metrics of one (condition, repetition) cell."""

    condition: str
    label: int
    rep: int
    seed: int
    cv_error: float
    proxy_a: float
    chosen_lambda: float
    fitted: BetaParams | None
    drc: dict  # bm1 key "a,b" -> DrcOutcome


@dataclass(frozen=True)
class ConditionSummary:
    name: str
    label: int
    n_reps: int
    cv_error_mean: float
    cv_error_sem: float
    proxy_a_mean: float
    proxy_a_sem: float
    drc: dict  # bm1 key -> {mean, sem, n_computed, n_undefined}
    probability_histogram: tuple[int, ...]


@dataclass(frozen=True)
class SweepResult:
    records: tuple[RepRecord, ...]
    summaries: tuple[ConditionSummary, ...]
    bm1_keys: tuple[str, ...]
    seed: int
    pooled_probabilities: tuple[np.ndarray, ...] = ()  # one array per condition


def bm1_key(p: BetaParams) -> str:
    return f"{p.alpha:g},{p.beta:g}"


def sem(values) -> float:
    """Standard error of the mean: sample stdev / sqrt(n)."""
    arr = np.asarray(values, dtype=np.float64)
    if arr.size < 2:
        raise InvalidConfig("SEM needs at least 2 repetitions")
    return float(np.std(arr, ddof=1) / math.sqrt(arr.size))


def derived_seed(seed: int, condition_index: int, rep: int) -> int:
    return seed + condition_index * 1000 + rep


def realize_condition(
    condition: Condition,
    rep_seed: int,
    patch_spec: PatchSpec | None = None,
) -> tuple[Dataset, Dataset]:
    """Produce the (training, unseen) dataset pair for one repetition.

    ``patch_spec`` overrides how image-backed conditions are decomposed
    into patches; its sampling seed is replaced by the repetition seed.
    """
    gen = condition.generator
    if isinstance(gen, GaussianPairSpec):
        return gen_gaussian_pair(replace(gen, seed=rep_seed))
    if isinstance(gen, PhantomPairSpec):
        t_imgs, u_imgs = gen_phantom_pair(replace(gen, seed=rep_seed))
        spec = replace(patch_spec or PatchSpec(max_patches=300), seed=rep_seed)
        return (
            images_to_dataset(t_imgs, spec, DomainTag.TRAINING),
            images_to_dataset(u_imgs, spec, DomainTag.UNSEEN),
        )
    if isinstance(gen, FilePairSpec):
        if gen.modality == "csv":
            return (
                load_csv(gen.training_path, DomainTag.TRAINING),
                load_csv(gen.unseen_path, DomainTag.UNSEEN),
            )
        spec = replace(patch_spec or gen.patch_spec, seed=rep_seed)
        return (
            images_to_dataset(load_image_dir(gen.training_path), spec, DomainTag.TRAINING),
            images_to_dataset(load_image_dir(gen.unseen_path), spec, DomainTag.UNSEEN),
        )
    raise InvalidConfig(f"cannot realize condition from {type(gen).__name__}")


def run_similarity_sweep(
    conditions: list[Condition],
    reps: int,
    bm1_list: list[BetaParams],
    config: DrcConfig,
    seed: int = 0,
    folds: int = 5,
    lambda_grid=None,
    patch_spec: PatchSpec | None = None,
) -> SweepResult:
    """Repeat domain classification per condition; aggregate proxy-A and
    the DRC under every benchmark prior 1 in ``bm1_list``.

    The Beta fit is shared across priors within a repetition.  DRC
    aggregates cover the repetitions where the criterion was computed;
    undefined outcomes are counted separately.
    """
    if reps < 2:
        raise InvalidConfig(f"reps must be at least 2 for the SEM, got {reps}")
    if not conditions:
        raise InvalidConfig("at least one condition is required")
    names = [c.name for c in conditions]
    if len(set(names)) != len(names):
        raise InvalidConfig(f"condition names must be unique, got {names}")
    if not bm1_list:
        raise InvalidConfig("bm1_list must not be empty")

    keys = tuple(bm1_key(b) for b in bm1_list)
    records: list[RepRecord] = []
    summaries: list[ConditionSummary] = []
    pooled_all: list[np.ndarray] = []

    for ci, cond in enumerate(conditions):
        cond_records: list[RepRecord] = []
        pooled_probs: list[np.ndarray] = []
        for rep in range(reps):
            rep_seed = derived_seed(seed, ci, rep)
            try:
                training, unseen = realize_condition(cond, rep_seed, patch_spec)
                fit = cross_validate(
                    training, unseen, k=folds, lambda_grid=lambda_grid, seed=rep_seed
                )
            except Exception as exc:
                message = f"condition {cond.name!r}, repetition {rep}: {exc}"
                try:
                    annotated = type(exc)(message)
                except TypeError:
                    raise
                raise annotated from exc
            try:
                fitted = fit_beta_mle(fit.probabilities)
            except (DegenerateVariance, TooFewValues):
                fitted = None
            outcomes = {
                key: drc_from_params(fitted, replace(config, bm1=bm))
                for key, bm in zip(keys, bm1_list)
            }
            pooled_probs.append(fit.probabilities.values)
            cond_records.append(
                RepRecord(
                    condition=cond.name,
                    label=cond.label,
                    rep=rep,
                    seed=rep_seed,
                    cv_error=fit.cv_error,
                    proxy_a=proxy_a_distance(fit.cv_error),
                    chosen_lambda=fit.chosen_lambda,
                    fitted=fitted,
                    drc=outcomes,
                )
            )
        pooled = np.concatenate(pooled_probs)
        pooled_all.append(pooled)
        summaries.append(_summarize(cond, cond_records, keys, pooled))
        records.extend(cond_records)

    return SweepResult(tuple(records), tuple(summaries), keys, seed, tuple(pooled_all))


def _summarize(cond, cond_records, keys, pooled) -> ConditionSummary:
    cv = [r.cv_error for r in cond_records]
    pa = [r.proxy_a for r in cond_records]
    drc_stats = {}
    for key in keys:
        outs: list[DrcOutcome] = [r.drc[key] for r in cond_records]
        computed = [o.value for o in outs if o.is_defined]
        drc_stats[key] = {
            "mean": float(np.mean(computed)) if computed else None,
            "sem": sem(computed) if len(computed) >= 2 else None,
            "n_computed": len(computed),
            "n_undefined": len(outs) - len(computed),
        }
    hist, _ = np.histogram(pooled, bins=HISTOGRAM_BINS, range=(0.0, 1.0))
    return ConditionSummary(
        name=cond.name,
        label=cond.label,
        n_reps=len(cond_records),
        cv_error_mean=float(np.mean(cv)),
        cv_error_sem=sem(cv),
        proxy_a_mean=float(np.mean(pa)),
        proxy_a_sem=sem(pa),
        drc=drc_stats,
        probability_histogram=tuple(int(c) for c in hist),
    )


# ---------------------------------------------------------------------------
# Turning point: training+unseen vs. unseen-only downstream comparison
# ---------------------------------------------------------------------------

TRAIN_PLUS_UNSEEN = "training_plus_unseen"
UNSEEN_ONLY = "unseen_only"


@dataclass(frozen=True)
class TurningPointResult:
    budgets: tuple[int, ...]
    rows: tuple[tuple, ...]  # (rep, budget, arm, error)
    summary: dict  # arm -> budget -> {mean, sem}


def _softmax_error(x_build, y_build, x_eval, y_eval) -> float:
    # the decision boundary stabilizes long before lbfgs's tight default
    # tolerance; cap iterations and silence the resulting benign warning
    model = LogisticRegression(max_iter=200, tol=1e-4)
    with warnings.catch_warnings():
        warnings.filterwarnings("ignore", category=ConvergenceWarning)
        model.fit(x_build, y_build)
    return float(np.mean(model.predict(x_eval) != y_eval))


def two_arm_errors(
    x_training,
    y_training,
    x_unseen,
    y_unseen,
    x_eval,
    y_eval,
    budget: int,
    rng: np.random.Generator,
) -> tuple[float, float]:
    """Errors of the training+unseen arm and the unseen-only arm on the
    held-out unseen evaluation data, with ``budget`` unseen samples drawn
    without replacement for building."""
    n = x_unseen.shape[0]
    take = min(budget, n)
    idx = rng.choice(n, size=take, replace=False)
    xb, yb = x_unseen[idx], y_unseen[idx]
    err_mix = _softmax_error(
        np.vstack([x_training, xb]), np.concatenate([y_training, yb]), x_eval, y_eval
    )
    err_unseen = _softmax_error(xb, yb, x_eval, y_eval)
    return err_mix, err_unseen


def _phantom_labeled_arrays(
    spec: PhantomPairSpec,
    rep_seed: int,
    patch_size: int,
    train_patches_per_image: int,
    eval_patches_per_image: int,
):
    """Patch features and center labels for build/eval pools.

    Twice the unseen images are generated; the first half is the building
    pool, the second half is held out for evaluation.
    """
    doubled = replace(spec, seed=rep_seed, n_images_per_domain=2 * spec.n_images_per_domain)
    t_imgs, u_imgs = gen_phantom_pair(doubled)
    n = spec.n_images_per_domain
    t_imgs = t_imgs[:n]
    u_build, u_eval = u_imgs[:n], u_imgs[n:]

    def pool(images, max_patches, seed_offset):
        feats, labels = [], []
        for i, img in enumerate(images):
            ps = PatchSpec(patch_size, max_patches, rep_seed + seed_offset + i)
            ds = extract_patches(img, ps)
            feats.append(ds.features)
            labels.append(patch_center_labels(img, ps))
        return np.vstack(feats), np.concatenate(labels)

    x_t, y_t = pool(t_imgs, train_patches_per_image, 0)
    x_u, y_u = pool(u_build, None, 0)  # all patches; budgets subsample later
    x_e, y_e = pool(u_eval, eval_patches_per_image, 10_000)
    return x_t, y_t, x_u, y_u, x_e, y_e


def run_turning_point(
    condition: Condition,
    unseen_budget_grid: list[int],
    reps: int = 10,
    seed: int = 0,
    patch_size: int = 15,
    train_patches_per_image: int = 400,
    eval_patches_per_image: int = 400,
) -> TurningPointResult:
    """Compare a downstream softmax classifier built on training+unseen
    data against one built on unseen data only, across unseen budgets.

    Budgets are per image for phantom conditions and total samples for
    in-memory labeled arrays.  Both arms are always evaluated on held-out
    unseen-domain data.
    """
    if reps < 2:
        raise InvalidConfig(f"reps must be at least 2 for the SEM, got {reps}")
    budgets = tuple(int(b) for b in unseen_budget_grid)
    if not budgets or any(b < 1 for b in budgets):
        raise InvalidConfig(f"budgets must be positive, got {unseen_budget_grid}")

    gen = condition.generator
    if not isinstance(gen, (PhantomPairSpec, LabeledArraysSpec)):
        raise MissingLabels(
            f"condition {condition.name!r} provides no downstream class labels"
        )

    rows = []
    errors: dict = {TRAIN_PLUS_UNSEEN: {b: [] for b in budgets}, UNSEEN_ONLY: {b: [] for b in budgets}}
    for rep in range(reps):
        rep_seed = derived_seed(seed, 0, rep)
        if isinstance(gen, PhantomPairSpec):
            x_t, y_t, x_u, y_u, x_e, y_e = _phantom_labeled_arrays(
                gen, rep_seed, patch_size, train_patches_per_image, eval_patches_per_image
            )
            per_image = gen.n_images_per_domain
        else:
            x_t, y_t = gen.x_training, gen.y_training
            x_u, y_u = gen.x_unseen, gen.y_unseen
            x_e, y_e = gen.x_eval, gen.y_eval
            per_image = 1
        rng = np.random.default_rng([rep_seed, 1])
        for b in budgets:
            err_mix, err_unseen = two_arm_errors(
                x_t, y_t, x_u, y_u, x_e, y_e, b * per_image, rng
            )
            errors[TRAIN_PLUS_UNSEEN][b].append(err_mix)
            errors[UNSEEN_ONLY][b].append(err_unseen)
            rows.append((rep, b, TRAIN_PLUS_UNSEEN, err_mix))
            rows.append((rep, b, UNSEEN_ONLY, err_unseen))

    summary = {
        arm: {
            b: {"mean": float(np.mean(v)), "sem": sem(v)}
            for b, v in per_budget.items()
        }
        for arm, per_budget in errors.items()
    }
    return TurningPointResult(budgets, tuple(rows), summary)
