"""Domain classifier: solver contract, cross-validation protocol,
label-swap symmetry, determinism."""

import warnings

import numpy as np
import pytest
from scipy.stats import norm
from sklearn.linear_model import LogisticRegression

from datarep import (
    Dataset,
    DomainTag,
    GaussianPairSpec,
    cross_validate,
    gen_gaussian_pair,
    train_logistic,
)
from datarep.classifier import _fold_ids, _sigmoid
from datarep.exceptions import (
    InvalidConfig,
    NonConvergenceWarning,
    SingleClassInput,
    TooFewSamplesForFolds,
    ValidationError,
)

BAYES_TWO_SIGMA = norm.cdf(-2.0)  # optimal error for unit Gaussians 4 apart


class TestTrainLogistic:
    def test_indistinguishable_single_points(self):
        model = train_logistic([[0.0], [0.0]], [0, 1], lam=1.0)
        assert abs(model.weights[0]) < 1e-8
        assert abs(model.intercept) < 1e-8
        assert model.predict_proba([[0.0]])[0] == pytest.approx(0.5, abs=1e-8)

    def test_symmetric_pair_puts_boundary_at_zero(self):
        model = train_logistic([[-1.0], [1.0]], [0, 1], lam=1.0)
        assert model.weights[0] > 0.0
        assert model.predict_proba([[0.0]])[0] == pytest.approx(0.5, abs=1e-9)

    def test_heldout_error_matches_analytic_bayes(self):
        # unit-variance classes 4 apart: optimal error is Phi(-2) ~ 0.0228
        rng = np.random.default_rng(10)
        x_tr = np.concatenate([rng.normal(0, 1, 500), rng.normal(4, 1, 500)])
        y_tr = np.concatenate([np.zeros(500), np.ones(500)])
        model = train_logistic(x_tr.reshape(-1, 1), y_tr, lam=0.01)
        x_te = np.concatenate([rng.normal(0, 1, 5000), rng.normal(4, 1, 5000)])
        y_te = np.concatenate([np.zeros(5000), np.ones(5000)])
        err = np.mean((model.decision_values(x_te.reshape(-1, 1)) >= 0) != (y_te == 1))
        assert err == pytest.approx(BAYES_TWO_SIGMA, abs=0.03)

    def test_agrees_with_reference_solver(self):
        rng = np.random.default_rng(4)
        X = rng.normal(size=(400, 3))
        y = (X @ [1.0, -2.0, 0.5] + 0.3 * rng.normal(size=400) > 0).astype(float)
        lam = 0.5
        mine = train_logistic(X, y, lam)
        ref = LogisticRegression(C=1.0 / (lam * 400), tol=1e-12, max_iter=2000)
        ref.fit(X, y)
        np.testing.assert_allclose(mine.weights, ref.coef_[0], atol=1e-5)
        assert mine.intercept == pytest.approx(ref.intercept_[0], abs=1e-5)

    def test_monotone_regularization_limit(self):
        rng = np.random.default_rng(1)
        X = np.concatenate([rng.normal(-2, 1, 200), rng.normal(2, 1, 200)]).reshape(-1, 1)
        y = np.concatenate([np.zeros(200), np.ones(200)])
        model = train_logistic(X, y, lam=1e6)
        probs = model.predict_proba(X)
        assert np.all(np.abs(probs - 0.5) < 0.01)

    def test_single_class_rejected(self):
        with pytest.raises(SingleClassInput):
            train_logistic([[1.0], [2.0]], [1, 1], lam=1.0)

    def test_nonpositive_lambda_rejected(self):
        with pytest.raises(InvalidConfig):
            train_logistic([[1.0], [2.0]], [0, 1], lam=0.0)

    def test_nonconvergence_is_reported_not_raised(self, monkeypatch):
        # one pass of the iteration cannot reach tolerance
        monkeypatch.setattr("datarep.classifier._MAX_ITER", 1)
        rng = np.random.default_rng(0)
        X = rng.normal(size=(50, 2))
        y = (X[:, 0] > 0).astype(float)
        with pytest.warns(NonConvergenceWarning, match="gradient"):
            model = train_logistic(X, y, lam=0.1)
        assert not model.converged
        assert model.grad_norm > 0


def pair(shift, n, seed, dim=2):
    return gen_gaussian_pair(GaussianPairSpec(dim=dim, shift=shift, n_per_domain=n, seed=seed))


class TestCrossValidate:
    def test_same_distribution_is_chance_level(self):
        t, u = pair(0.0, 1000, 21)
        fit = cross_validate(t, u, seed=21)
        assert fit.cv_error == pytest.approx(0.5, abs=0.05)
        # probabilities concentrated near 0.5
        assert np.quantile(np.abs(fit.probabilities.values - 0.5), 0.9) < 0.2

    def test_far_separated_domains(self):
        rng = np.random.default_rng(6)
        t = Dataset((rng.normal(-100, 1, 600)).reshape(-1, 1), DomainTag.TRAINING)
        u = Dataset((rng.normal(100, 1, 600)).reshape(-1, 1), DomainTag.UNSEEN)
        fit = cross_validate(t, u, seed=6)
        assert fit.cv_error <= 0.01
        vals = fit.probabilities.values
        assert np.quantile(vals, 0.1) < 0.05 and np.quantile(vals, 0.9) > 0.95

    def test_moderate_shift_matches_bayes(self):
        t, u = pair(2.0, 1500, 33)
        fit = cross_validate(t, u, seed=33)
        assert fit.cv_error == pytest.approx(norm.cdf(-1.0), abs=0.03)

    def test_label_swap_symmetry(self):
        t, u = pair(0.7, 600, 9, dim=3)
        forward = cross_validate(t, u, seed=5)
        swapped = cross_validate(
            u.with_domain(DomainTag.TRAINING), t.with_domain(DomainTag.UNSEEN), seed=5
        )
        assert forward.cv_error == swapped.cv_error
        assert forward.chosen_lambda == swapped.chosen_lambda
        assert np.allclose(
            np.sort(forward.probabilities.values),
            np.sort(swapped.probabilities.values),
            atol=1e-9,
        )

    def test_deterministic_for_fixed_seed(self):
        t, u = pair(1.0, 400, 14)
        a = cross_validate(t, u, seed=3)
        b = cross_validate(t, u, seed=3)
        assert a.cv_error == b.cv_error
        assert a.chosen_lambda == b.chosen_lambda
        assert np.array_equal(a.probabilities.values, b.probabilities.values)
        assert np.array_equal(a.model.weights, b.model.weights)
        assert a.model.intercept == b.model.intercept

    def test_indistinguishable_constant_data_scores_exactly_half(self):
        # balanced classes and a constant model: misclassification is 0.5
        t = Dataset(np.zeros((40, 2)) + 1.0, DomainTag.TRAINING)
        u = Dataset(np.zeros((40, 2)) + 1.0, DomainTag.UNSEEN)
        fit = cross_validate(t, u, seed=0)
        assert fit.cv_error == 0.5
        assert np.all(fit.probabilities.values == 0.5)

    def test_balanced_subsampling_of_larger_domain(self):
        rng = np.random.default_rng(17)
        t = Dataset(rng.normal(size=(900, 2)), DomainTag.TRAINING)
        u = Dataset(rng.normal(size=(300, 2)), DomainTag.UNSEEN)
        fit = cross_validate(t, u, seed=2)
        # 300 per class after balancing -> 600 held-out samples -> 1200 pooled
        assert len(fit.probabilities) == 1200
        assert fit.cv_error == pytest.approx(0.5, abs=0.08)

    def test_too_few_samples_for_folds(self):
        rng = np.random.default_rng(0)
        t = Dataset(rng.normal(size=(3, 2)), DomainTag.TRAINING)
        u = Dataset(rng.normal(size=(3, 2)), DomainTag.UNSEEN)
        with pytest.raises(TooFewSamplesForFolds):
            cross_validate(t, u, k=5, seed=0)

    def test_wrong_tags_rejected(self):
        t, u = pair(0.0, 50, 0)
        with pytest.raises(InvalidConfig):
            cross_validate(u.with_domain(DomainTag.UNSEEN), u, seed=0)

    def test_feature_mismatch_rejected(self):
        t, _ = pair(0.0, 50, 0, dim=2)
        _, u = pair(0.0, 50, 1, dim=3)
        with pytest.raises(ValidationError):
            cross_validate(t, u, seed=0)

    def test_fold_count_capped_by_group_count(self):
        # 3 groups per domain cannot fill 5 folds; the cap keeps it usable
        rng = np.random.default_rng(8)
        t = Dataset(
            rng.normal(size=(90, 2)), DomainTag.TRAINING,
            tuple(f"t{i % 3}" for i in range(90)),
        )
        u = Dataset(
            rng.normal(size=(90, 2)), DomainTag.UNSEEN,
            tuple(f"u{i % 3}" for i in range(90)),
        )
        fit = cross_validate(t, u, k=5, seed=1)
        assert len(fit.fold_errors) == 3

    def test_single_group_domain_rejected(self):
        rng = np.random.default_rng(8)
        t = Dataset(rng.normal(size=(40, 2)), DomainTag.TRAINING, ("only",) * 40)
        u = Dataset(rng.normal(size=(40, 2)), DomainTag.UNSEEN, tuple(f"u{i}" for i in range(40)))
        with pytest.raises(TooFewSamplesForFolds):
            cross_validate(t, u, seed=0)


class TestFoldAssignment:
    def test_groups_stay_together_and_stratified(self):
        rng = np.random.default_rng(3)
        t = Dataset(
            rng.normal(size=(100, 2)), DomainTag.TRAINING,
            tuple(f"t{i // 10}" for i in range(100)),
        )
        u = Dataset(
            rng.normal(size=(100, 2)), DomainTag.UNSEEN,
            tuple(f"u{i // 10}" for i in range(100)),
        )
        fold = _fold_ids(t, u, k=5, seed=0, attempt=0)
        groups = list(t.group_ids) + list(u.group_ids)
        seen = {}
        for g, f in zip(groups, fold):
            seen.setdefault(g, set()).add(f)
        assert all(len(folds) == 1 for folds in seen.values())
        # 10 groups per domain over 5 folds -> exactly 2 per fold per domain
        for f in range(5):
            t_count = sum(1 for g, ff in zip(groups[:100], fold[:100]) if ff == f)
            u_count = sum(1 for g, ff in zip(groups[100:], fold[100:]) if ff == f)
            assert t_count == 20 and u_count == 20

    def test_shared_group_ids_land_together(self):
        rng = np.random.default_rng(3)
        t = Dataset(rng.normal(size=(40, 2)), DomainTag.TRAINING,
                    tuple(f"g{i % 8}" for i in range(40)))
        u = Dataset(rng.normal(size=(40, 2)), DomainTag.UNSEEN,
                    tuple(f"g{i % 8}" for i in range(40)))
        fold = _fold_ids(t, u, k=4, seed=0, attempt=0)
        groups = list(t.group_ids) + list(u.group_ids)
        seen = {}
        for g, f in zip(groups, fold):
            seen.setdefault(g, set()).add(f)
        assert all(len(folds) == 1 for folds in seen.values())


def test_sigmoid_is_stable_and_symmetric():
    z = np.array([-800.0, -30.0, 0.0, 30.0, 800.0])
    p = _sigmoid(z)
    assert np.all(np.isfinite(p))
    assert p[2] == 0.5
    assert np.all(p[:2] < 1e-12) and np.all(p[3:] > 1 - 1e-12)
