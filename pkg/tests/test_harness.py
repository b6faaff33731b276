"""Sweep and turning-point harness: structure, seeding, aggregation."""

import numpy as np
import pytest

from datarep import (
    BetaParams,
    Condition,
    DrcConfig,
    FilePairSpec,
    GaussianPairSpec,
    LabeledArraysSpec,
    PhantomPairSpec,
    run_similarity_sweep,
    run_turning_point,
)
from datarep.core import DrcStatus, Verdict
from datarep.exceptions import InvalidConfig, MissingLabels
from datarep.harness import (
    TRAIN_PLUS_UNSEEN,
    UNSEEN_ONLY,
    bm1_key,
    derived_seed,
    sem,
    realize_condition,
)
from datarep.ingest import PatchSpec
from datarep.similarity import verdict as drc_verdict


def gaussian_conditions(shifts, n=300):
    return [
        Condition(f"shift_{s:g}", GaussianPairSpec(dim=2, shift=s, n_per_domain=n), i)
        for i, s in enumerate(shifts)
    ]


BM1S = [BetaParams(25, 25), BetaParams(100, 100)]


class TestSweepStructure:
    def test_records_and_summaries(self):
        result = run_similarity_sweep(
            gaussian_conditions([0.0, 2.0]), reps=2, bm1_list=BM1S,
            config=DrcConfig(), seed=5,
        )
        assert len(result.records) == 4
        assert len(result.summaries) == 2
        assert result.bm1_keys == ("25,25", "100,100")
        for record in result.records:
            assert set(record.drc) == {"25,25", "100,100"}
            assert 0.0 <= record.cv_error <= 1.0
        for summary, pooled in zip(result.summaries, result.pooled_probabilities):
            assert sum(summary.probability_histogram) == pooled.size
            assert len(summary.probability_histogram) == 50

    def test_derived_seed_scheme(self):
        result = run_similarity_sweep(
            gaussian_conditions([0.0, 1.0]), reps=3, bm1_list=BM1S[:1],
            config=DrcConfig(), seed=40,
        )
        seeds = [(r.condition, r.rep, r.seed) for r in result.records]
        assert ("shift_0", 0, 40) in seeds
        assert ("shift_0", 2, 42) in seeds
        assert ("shift_1", 0, 1040) in seeds
        assert derived_seed(40, 1, 2) == 1042

    def test_reproducible(self):
        conditions = gaussian_conditions([0.5])
        a = run_similarity_sweep(conditions, 2, BM1S, DrcConfig(), seed=1)
        b = run_similarity_sweep(conditions, 2, BM1S, DrcConfig(), seed=1)
        assert a.records == b.records
        assert a.summaries == b.summaries

    def test_reps_below_two_rejected(self):
        with pytest.raises(InvalidConfig):
            run_similarity_sweep(gaussian_conditions([0.0]), 1, BM1S, DrcConfig())

    def test_duplicate_condition_names_rejected(self):
        conds = gaussian_conditions([0.0]) + gaussian_conditions([0.0])
        with pytest.raises(InvalidConfig):
            run_similarity_sweep(conds, 2, BM1S, DrcConfig())

    def test_forced_identical_reps_give_zero_sem(self, monkeypatch):
        monkeypatch.setattr("datarep.harness.derived_seed", lambda s, c, r: s)
        result = run_similarity_sweep(
            gaussian_conditions([1.0]), reps=2, bm1_list=BM1S[:1],
            config=DrcConfig(), seed=3,
        )
        summary = result.summaries[0]
        assert summary.cv_error_sem == 0.0
        assert summary.proxy_a_sem == 0.0

    def test_sem_definition(self):
        assert sem([1.0, 3.0]) == pytest.approx(np.std([1, 3], ddof=1) / np.sqrt(2))
        with pytest.raises(InvalidConfig):
            sem([1.0])

    def test_error_annotated_with_condition(self):
        bad = [Condition("broken", FilePairSpec("/nope/a.csv", "/nope/b.csv"), 0)]
        with pytest.raises(Exception, match="broken"):
            run_similarity_sweep(bad, 2, BM1S, DrcConfig())


class TestRealizeCondition:
    def test_gaussian_reseeded_per_rep(self):
        cond = gaussian_conditions([1.0])[0]
        t0, _ = realize_condition(cond, 7)
        t1, _ = realize_condition(cond, 8)
        t0b, _ = realize_condition(cond, 7)
        assert not np.array_equal(t0.features, t1.features)
        np.testing.assert_array_equal(t0.features, t0b.features)

    def test_phantom_condition_realizes_patches(self):
        cond = Condition(
            "ph", PhantomPairSpec(image_size=32, n_images_per_domain=2), 0
        )
        t, u = realize_condition(cond, 3, PatchSpec(size=9, max_patches=20))
        assert t.n_features == 81
        assert t.n_samples == 40 and u.n_samples == 40
        assert len(set(t.group_ids)) == 2

    def test_csv_condition_roundtrips(self, tmp_path):
        from datarep.synthgen import write_gaussian_pair

        spec = GaussianPairSpec(dim=2, shift=0.5, n_per_domain=30, seed=2)
        tp, up = write_gaussian_pair(spec, tmp_path)
        cond = Condition("files", FilePairSpec(str(tp), str(up)), 0)
        t, u = realize_condition(cond, 99)
        assert t.n_samples == 30 and u.n_samples == 30


class TestDrcShiftResponse:
    """Verdict severity grows with shift; once the criterion crosses 1 it
    never drops back below before the fits turn improper."""

    def test_severity_ordering_and_single_crossing(self):
        config = DrcConfig()
        result = run_similarity_sweep(
            gaussian_conditions([0.0, 1.0, 2.0], n=600),
            reps=5, bm1_list=[config.bm1], config=config, seed=11,
        )
        severity = {
            Verdict.REPRESENTATIVE: 0, Verdict.CAUTION: 1,
            Verdict.NOT_REPRESENTATIVE: 1, Verdict.SEPARABLE: 2,
        }
        levels = []
        for summary in result.summaries:
            stats = summary.drc["25,25"]
            if stats["n_computed"] < summary.n_reps / 2:
                levels.append(2)
            elif stats["mean"] > 1.0:
                levels.append(1)
            else:
                levels.append(0)
        assert levels == sorted(levels), f"severity not monotone: {levels}"
        assert levels[0] == 0 and levels[-1] >= 1


class TestTurningPoint:
    def test_missing_labels_for_gaussian(self):
        cond = gaussian_conditions([1.0])[0]
        with pytest.raises(MissingLabels):
            run_turning_point(cond, [10, 20], reps=2)

    def test_labeled_arrays_two_arm_structure(self):
        rng = np.random.default_rng(0)
        n = 400
        x_t = rng.normal(0, 1, size=(n, 3))
        y_t = (x_t[:, 0] > 0).astype(int)
        x_u = rng.normal(0.2, 1, size=(n, 3))
        y_u = (x_u[:, 0] > 0.2).astype(int)
        x_e = rng.normal(0.2, 1, size=(n, 3))
        y_e = (x_e[:, 0] > 0.2).astype(int)
        cond = Condition("arrays", LabeledArraysSpec(x_t, y_t, x_u, y_u, x_e, y_e), 0)
        result = run_turning_point(cond, [50, 200], reps=3, seed=0)
        assert result.budgets == (50, 200)
        assert len(result.rows) == 3 * 2 * 2
        for arm in (TRAIN_PLUS_UNSEEN, UNSEEN_ONLY):
            for b in result.budgets:
                cell = result.summary[arm][b]
                assert 0.0 <= cell["mean"] <= 1.0
                assert cell["sem"] >= 0.0

    def test_phantom_smoke(self):
        cond = Condition(
            "ph",
            PhantomPairSpec(image_size=32, n_images_per_domain=2, base_noise_sigma=0.1),
            0,
        )
        result = run_turning_point(
            cond, [20, 60], reps=2, seed=1,
            patch_size=7, train_patches_per_image=50, eval_patches_per_image=50,
        )
        assert set(result.summary) == {TRAIN_PLUS_UNSEEN, UNSEEN_ONLY}
        assert all(len(result.summary[a]) == 2 for a in result.summary)

    def test_invalid_budgets_rejected(self):
        cond = Condition("ph", PhantomPairSpec(image_size=32, n_images_per_domain=2), 0)
        with pytest.raises(InvalidConfig):
            run_turning_point(cond, [], reps=2)
        with pytest.raises(InvalidConfig):
            run_turning_point(cond, [0], reps=2)
        with pytest.raises(InvalidConfig):
            run_turning_point(cond, [10], reps=1)


def test_bm1_key_format():
    assert bm1_key(BetaParams(25, 25)) == "25,25"
    assert bm1_key(BetaParams(0.5, 400)) == "0.5,400"
