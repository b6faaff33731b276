"""Domain type validation and invariants."""

import numpy as np
import pytest
from hypothesis import given, strategies as st

from datarep import (
    BetaParams,
    ComparisonReport,
    Dataset,
    DomainTag,
    DrcConfig,
    DrcOutcome,
    DrcStatus,
    ProbabilitySet,
    Verdict,
    validate_dataset,
)
from datarep.exceptions import (
    EmptyDataset,
    InvalidConfig,
    NonFiniteValue,
    NonPositiveShape,
    OutOfRangeError,
    RaggedRows,
    ValidationError,
)


class TestDataset:
    def test_valid_2x2_passes_unchanged(self):
        d = Dataset([[1.0, 2.0], [3.0, 4.0]], DomainTag.TRAINING)
        assert validate_dataset(d) is d
        assert d.n_samples == 2 and d.n_features == 2

    def test_nan_rejected_with_position(self):
        with pytest.raises(NonFiniteValue, match=r"row 1, column 0"):
            Dataset([[1.0, 2.0], [np.nan, 4.0]], DomainTag.TRAINING)

    def test_inf_rejected(self):
        with pytest.raises(NonFiniteValue):
            Dataset([[np.inf, 2.0], [3.0, 4.0]], DomainTag.UNSEEN)

    def test_zero_rows_rejected(self):
        with pytest.raises(EmptyDataset):
            Dataset(np.empty((0, 3)), DomainTag.TRAINING)

    def test_single_row_fails_modeling_floor(self):
        d = Dataset([[1.0, 2.0]], DomainTag.TRAINING)
        with pytest.raises(EmptyDataset):
            validate_dataset(d)

    def test_ragged_rows_rejected(self):
        with pytest.raises(RaggedRows):
            Dataset([[1.0, 2.0], [3.0]], DomainTag.TRAINING)

    def test_validation_idempotent(self):
        d = Dataset(np.random.default_rng(0).normal(size=(5, 3)), DomainTag.UNSEEN)
        assert validate_dataset(validate_dataset(d)) is d

    def test_features_immutable(self):
        d = Dataset([[1.0, 2.0], [3.0, 4.0]], DomainTag.TRAINING)
        with pytest.raises(ValueError):
            d.features[0, 0] = 9.0

    def test_group_length_mismatch(self):
        with pytest.raises(ValidationError):
            Dataset([[1.0], [2.0]], DomainTag.TRAINING, group_ids=("a",))

    def test_with_domain_retags(self):
        d = Dataset([[1.0], [2.0]], DomainTag.TRAINING, group_ids=("a", "b"))
        u = d.with_domain(DomainTag.UNSEEN)
        assert u.domain_tag is DomainTag.UNSEEN
        assert np.array_equal(u.features, d.features)
        assert u.group_ids == d.group_ids


class TestProbabilitySet:
    def test_from_probabilities_pools_complements(self):
        p = ProbabilitySet.from_probabilities([0.2, 0.9])
        assert len(p) == 4
        assert p.n_source_samples == 2
        assert np.isclose(p.values.mean(), 0.5)
        assert np.allclose(np.sort(p.values), np.sort(1.0 - p.values), atol=1e-15)

    @given(st.lists(st.floats(0.0, 1.0), min_size=1, max_size=200))
    def test_construction_invariant_holds_for_any_probs(self, probs):
        p = ProbabilitySet.from_probabilities(probs)
        assert len(p) == 2 * len(probs)
        lo = np.sort(p.values)
        hi = np.sort(1.0 - p.values)
        assert np.allclose(lo, hi, atol=1e-9)

    def test_out_of_range_rejected(self):
        with pytest.raises(OutOfRangeError):
            ProbabilitySet(np.array([-0.1, 1.1]), 1)

    def test_unpaired_values_rejected(self):
        with pytest.raises(ValidationError):
            ProbabilitySet(np.array([0.2, 0.3]), 1)

    def test_length_mismatch_rejected(self):
        with pytest.raises(ValidationError):
            ProbabilitySet(np.array([0.2, 0.8]), 2)


class TestBetaParamsAndConfig:
    @pytest.mark.parametrize("a,b", [(0.0, 1.0), (-1.0, 2.0), (1.0, 0.0), (np.nan, 1.0)])
    def test_non_positive_shapes_rejected(self, a, b):
        with pytest.raises(NonPositiveShape):
            BetaParams(a, b)

    def test_valid_shapes_kept_as_floats(self):
        p = BetaParams(2, 5)
        assert p.as_tuple() == (2.0, 5.0)

    def test_equal_benchmark_priors_rejected(self):
        with pytest.raises(InvalidConfig):
            DrcConfig(bm1=BetaParams(1, 1), bm2=BetaParams(1, 1))

    def test_negative_caution_band_rejected(self):
        with pytest.raises(InvalidConfig):
            DrcConfig(caution_band=-0.01)

    def test_defaults(self):
        c = DrcConfig()
        assert c.bm1 == BetaParams(25, 25)
        assert c.bm2 == BetaParams(1, 1)
        assert c.caution_band == 0.1
        assert c.properness_threshold == 1.0


class TestOutcomeAndReport:
    def test_value_requires_computed_status(self):
        with pytest.raises(ValidationError):
            DrcOutcome(1.5, DrcStatus.UNDEFINED_IMPROPER_FIT)
        with pytest.raises(ValidationError):
            DrcOutcome(None, DrcStatus.COMPUTED)

    def test_report_checks_proxy_consistency(self):
        out = DrcOutcome(0.5, DrcStatus.COMPUTED, BetaParams(30, 30))
        with pytest.raises(ValidationError):
            ComparisonReport(
                cv_error=0.25, proxy_a=1.5, fitted=out.fitted, drc=out,
                verdict=Verdict.REPRESENTATIVE,
            )

    def test_report_checks_separable_iff_undefined(self):
        out = DrcOutcome(None, DrcStatus.UNDEFINED_IMPROPER_FIT)
        with pytest.raises(ValidationError):
            ComparisonReport(
                cv_error=0.0, proxy_a=2.0, fitted=None, drc=out,
                verdict=Verdict.REPRESENTATIVE,
            )
        report = ComparisonReport(
            cv_error=0.0, proxy_a=2.0, fitted=None, drc=out,
            verdict=Verdict.SEPARABLE,
        )
        assert report.verdict is Verdict.SEPARABLE
