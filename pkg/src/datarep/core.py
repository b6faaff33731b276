"""Shared domain types: datasets, pooled probabilities, Beta parameters,
analysis configuration, and the comparison report.

All types are immutable after construction and safe to share across threads.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .exceptions import (
    EmptyDataset,
    InvalidConfig,
    NonFiniteValue,
    NonPositiveShape,
    OutOfRangeError,
    RaggedRows,
    ValidationError,
)


class DomainTag(enum.Enum):
    """Which side of the comparison a dataset belongs to."""

    TRAINING = "training"
    UNSEEN = "unseen"


class Verdict(enum.Enum):
    """Qualitative representativeness call derived from the DRC."""

    REPRESENTATIVE = "representative"
    CAUTION = "caution"
    NOT_REPRESENTATIVE = "not_representative"
    SEPARABLE = "separable"


class DrcStatus(enum.Enum):
    """Whether the DRC could be computed, and if not, why."""

    COMPUTED = "computed"
    UNDEFINED_IMPROPER_FIT = "undefined_improper_fit"
    UNDEFINED_ZERO_DENOMINATOR = "undefined_zero_denominator"


def _as_feature_matrix(features) -> np.ndarray:
    """Convert to a read-only 2-D float64 matrix, rejecting ragged input."""
    try:
        arr = np.asarray(features, dtype=np.float64)
    except ValueError as exc:
        rows = list(features)
        if rows:
            want = np.size(rows[0])
            for i, row in enumerate(rows):
                if np.size(row) != want:
                    raise RaggedRows(
                        f"row {i} has {np.size(row)} values, expected {want}"
                    ) from exc
        raise RaggedRows(str(exc)) from exc
    if arr.ndim == 1:
        arr = arr.reshape(-1, 1)
    if arr.ndim != 2 or arr.dtype == object:
        raise RaggedRows(f"expected a 2-D numeric matrix, got shape {arr.shape}")
    arr = arr.copy()
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class Dataset:
    """A feature matrix with a domain tag and optional per-sample group ids.

    Groups identify the source of each sample (a scan, a file); group-aware
    cross-validation keeps samples of one group in the same fold.  When
    ``group_ids`` is None each sample is treated as its own group.
    """

    features: np.ndarray
    domain_tag: DomainTag
    group_ids: tuple[str, ...] | None = None

    def __post_init__(self):
        object.__setattr__(self, "features", _as_feature_matrix(self.features))
        if self.features.shape[0] < 1 or self.features.shape[1] < 1:
            raise EmptyDataset(
                f"dataset needs at least 1 sample and 1 feature, "
                f"got shape {self.features.shape}"
            )
        bad = np.argwhere(~np.isfinite(self.features))
        if bad.size:
            r, c = bad[0]
            raise NonFiniteValue(f"non-finite feature value at row {r}, column {c}")
        if self.group_ids is not None:
            object.__setattr__(self, "group_ids", tuple(str(g) for g in self.group_ids))
            if len(self.group_ids) != self.features.shape[0]:
                raise ValidationError(
                    f"{len(self.group_ids)} group ids for "
                    f"{self.features.shape[0]} samples"
                )

    @property
    def n_samples(self) -> int:
        return self.features.shape[0]

    @property
    def n_features(self) -> int:
        return self.features.shape[1]

    def with_domain(self, tag: DomainTag) -> "Dataset":
        """Same data under a different domain tag."""
        return Dataset(self.features, tag, self.group_ids)


def validate_dataset(d: Dataset) -> Dataset:
    """Check all Dataset invariants and return the dataset unchanged.

    Construction already rejects ragged and non-finite input; this adds the
    modeling floor of two samples.  Idempotent by construction.
    """
    if not isinstance(d, Dataset):
        raise ValidationError(f"expected Dataset, got {type(d).__name__}")
    if d.n_samples < 2:
        raise EmptyDataset(f"dataset needs at least 2 samples, got {d.n_samples}")
    bad = np.argwhere(~np.isfinite(d.features))
    if bad.size:
        r, c = bad[0]
        raise NonFiniteValue(f"non-finite feature value at row {r}, column {c}")
    return d


@dataclass(frozen=True)
class ProbabilitySet:
    """Pooled domain-classification probabilities from held-out samples.

    For every held-out sample both per-class probabilities (p and 1 - p) are
    pooled, so the multiset is invariant under v -> 1 - v and its mean is
    0.5.  Values are kept at full floating precision; no binning.
    """

    values: np.ndarray
    n_source_samples: int

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=np.float64).ravel().copy()
        vals.flags.writeable = False
        object.__setattr__(self, "values", vals)
        if vals.size != 2 * self.n_source_samples:
            raise ValidationError(
                f"{vals.size} values for {self.n_source_samples} source samples; "
                f"expected twice as many"
            )
        if vals.size == 0:
            raise ValidationError("probability set is empty")
        if np.any(~np.isfinite(vals)) or vals.min() < 0.0 or vals.max() > 1.0:
            bad = vals[(~np.isfinite(vals)) | (vals < 0.0) | (vals > 1.0)]
            raise OutOfRangeError(f"probabilities must lie in [0, 1], got {bad[:3]}")
        lo = np.sort(vals)
        hi = np.sort(1.0 - vals)
        if not np.allclose(lo, hi, atol=1e-9, rtol=0.0):
            raise ValidationError(
                "values do not form complementary pairs under v -> 1 - v"
            )

    @classmethod
    def from_probabilities(cls, p) -> "ProbabilitySet":
        """Pool one probability per sample together with its complement."""
        p = np.asarray(p, dtype=np.float64).ravel()
        return cls(np.concatenate([p, 1.0 - p]), int(p.size))

    def __len__(self) -> int:
        return int(self.values.size)


@dataclass(frozen=True)
class BetaParams:
    """Shape pair (alpha, beta) of a Beta distribution; both strictly positive."""

    alpha: float
    beta: float

    def __post_init__(self):
        a, b = float(self.alpha), float(self.beta)
        if not (math.isfinite(a) and math.isfinite(b) and a > 0.0 and b > 0.0):
            raise NonPositiveShape(f"shape parameters must be positive, got ({a}, {b})")
        object.__setattr__(self, "alpha", a)
        object.__setattr__(self, "beta", b)

    def as_tuple(self) -> tuple[float, float]:
        return (self.alpha, self.beta)


@dataclass(frozen=True)
class DrcConfig:
    """Benchmark priors and decision thresholds for the DRC.

    ``bm1`` is the similar-datasets reference, ``bm2`` the dissimilar-datasets
    reference (uniform by default).  A fitted shape at or below
    ``properness_threshold`` marks the fit improper: its density is unbounded
    at an endpoint, the regime where the criterion is undefined.
    """

    bm1: BetaParams = BetaParams(25.0, 25.0)
    bm2: BetaParams = BetaParams(1.0, 1.0)
    caution_band: float = 0.1
    properness_threshold: float = 1.0

    def __post_init__(self):
        if self.bm1 == self.bm2:
            raise InvalidConfig("benchmark priors 1 and 2 must differ")
        if not (math.isfinite(self.caution_band) and self.caution_band >= 0.0):
            raise InvalidConfig(f"caution_band must be >= 0, got {self.caution_band}")
        if not math.isfinite(self.properness_threshold):
            raise InvalidConfig("properness_threshold must be finite")


@dataclass(frozen=True)
class DrcOutcome:
    """Result of a DRC evaluation: a value, or the reason it is undefined."""

    value: float | None
    status: DrcStatus
    fitted: BetaParams | None = None

    def __post_init__(self):
        has_value = self.value is not None
        if has_value != (self.status is DrcStatus.COMPUTED):
            raise ValidationError(
                "DRC value must be present exactly when status is COMPUTED"
            )
        if has_value and not (math.isfinite(self.value) and self.value >= 0.0):
            raise ValidationError(f"DRC value must be finite and >= 0, got {self.value}")

    @property
    def is_defined(self) -> bool:
        return self.status is DrcStatus.COMPUTED


@dataclass(frozen=True)
class ComparisonReport:
    """Full outcome of one training-vs-unseen comparison."""

    cv_error: float
    proxy_a: float
    fitted: BetaParams | None
    drc: DrcOutcome
    verdict: Verdict
    chosen_lambda: float | None = None
    warnings: tuple[str, ...] = field(default=())

    def __post_init__(self):
        if not 0.0 <= self.cv_error <= 1.0:
            raise ValidationError(f"cv_error must lie in [0, 1], got {self.cv_error}")
        expected = max(0.0, 2.0 * (1.0 - 2.0 * self.cv_error))
        if abs(self.proxy_a - expected) > 1e-12:
            raise ValidationError(
                f"proxy_a={self.proxy_a} inconsistent with cv_error={self.cv_error}"
            )
        separable = self.verdict is Verdict.SEPARABLE
        if separable != (not self.drc.is_defined):
            raise ValidationError(
                "verdict must be SEPARABLE exactly when the DRC is undefined"
            )
        object.__setattr__(self, "warnings", tuple(self.warnings))
