import math

import numpy as np
import numpy.testing as npt
import pytest
from scipy.linalg import qr

from causalnet.controllers.lasso_controller import (LassoSettings, PostLassoSelector, SelectionStrategy,
                                                    logistic_refit, ols_refit, refit_sets, select_and_refit)
from causalnet.models.dataset import Dataset, Estimand
from causalnet.models.lasso import (Family, LambdaRule, MonomialBasis, cross_validated_lambda, expand_monomials,
                                    kkt_violation, lambda_max, lasso_fit, lasso_objective, plug_in_lambda,
                                    soft_threshold)
from causalnet.utils.errors import ConvergenceError, DomainError, StructuralError
from causalnet.utils.numeric import Rng


def standardized(X):
    return (X - X.mean(axis=0)) / X.std(axis=0)


@pytest.fixture
def sparse_problem():
    rng = Rng(10)
    X = standardized(rng.normal(0.0, 1.0, size=(400, 8)))
    y = 2.0 * X[:, 0] - X[:, 1] + rng.normal(0.0, 0.5, size=400)
    return X, y


class TestMonomials:

    @pytest.mark.parametrize("d", range(1, 11))
    def test_term_count(self, d):
        assert len(MonomialBasis.all_terms(d)) == math.comb(d + 3, 3) - 1 == MonomialBasis.n_terms_for(d)

    @pytest.mark.parametrize("d,columns", [(1, 3), (2, 9), (10, 285)])
    def test_expanded_width(self, d, columns):
        X = Rng(d).normal(0.0, 1.0, size=(60, d))
        Z = expand_monomials(X)
        assert Z.shape == (60, columns)
        npt.assert_allclose(Z.mean(axis=0), 0.0, atol=1e-10)
        npt.assert_allclose(Z.std(axis=0), 1.0, atol=1e-10)

    def test_constant_column_dropped(self):
        X = np.column_stack([Rng(0).normal(0.0, 1.0, size=50), np.full(50, 3.0)])
        basis = MonomialBasis.fit(X)
        assert len(basis.dropped) == 9 - basis.n_columns
        assert basis.n_columns == 3
        assert basis.notes

    def test_names(self):
        basis = MonomialBasis.fit(Rng(1).normal(0.0, 1.0, size=(30, 3)))
        names = basis.names(["a", "b", "c"])
        assert names[:3] == ["a", "b", "c"]
        assert "a^2*c" in names and "b^3" in names

    def test_transform_checks_width(self):
        basis = MonomialBasis.fit(Rng(1).normal(0.0, 1.0, size=(30, 3)))
        with pytest.raises(StructuralError):
            basis.transform(np.zeros((4, 2)))

    def test_requires_covariates(self):
        with pytest.raises(StructuralError):
            MonomialBasis.all_terms(0)


class TestLassoFit:

    def test_soft_threshold(self):
        assert soft_threshold(3.0, 1.0) == 2.0
        assert soft_threshold(-3.0, 1.0) == -2.0
        assert soft_threshold(0.5, 1.0) == 0.0

    def test_large_lambda_gives_empty_model(self, sparse_problem):
        X, y = sparse_problem
        for family, response in ((Family.GAUSSIAN, y), (Family.LOGISTIC, (y > 0).astype(float))):
            fit = lasso_fit(X, response, family, lambda_max(X, response) * 1.0001)
            assert fit.selected == []

    def test_zero_lambda_matches_least_squares(self):
        rng = Rng(3)
        X = standardized(rng.normal(0.0, 1.0, size=(40, 3)))
        y = X @ np.array([1.0, -2.0, 0.5]) + 0.3 + rng.normal(0.0, 0.2, size=40)
        fit = lasso_fit(X, y, Family.GAUSSIAN, 0.0, max_sweeps=20000, tol=1e-16, coef_tol=1e-12)
        design = np.column_stack([np.ones(40), X])
        beta = np.linalg.lstsq(design, y, rcond=None)[0]
        npt.assert_allclose(fit.intercept, beta[0], atol=1e-8)
        npt.assert_allclose(fit.coef, beta[1:], atol=1e-8)

    def test_orthonormal_design_soft_thresholds(self):
        n = 64
        q, _ = qr(Rng(4).normal(0.0, 1.0, size=(n, 4)), mode='economic')
        centered = q - q.mean(axis=0)
        q, _ = qr(centered, mode='economic')
        X = q * math.sqrt(n)
        y = X @ np.array([1.5, -0.2, 0.0, 0.8]) + Rng(5).normal(0.0, 0.3, size=n)
        lam = 0.3
        fit = lasso_fit(X, y, Family.GAUSSIAN, lam, tol=1e-15, coef_tol=1e-13)
        ols = X.T @ (y - y.mean()) / n
        expected = np.sign(ols) * np.maximum(np.abs(ols) - lam, 0.0)
        npt.assert_allclose(fit.coef, expected, atol=1e-8)

    @pytest.mark.parametrize("family", [Family.GAUSSIAN, Family.LOGISTIC])
    def test_objective_never_increases(self, sparse_problem, family):
        X, y = sparse_problem
        response = y if family == Family.GAUSSIAN else (y + Rng(6).normal(0.0, 1.0, size=len(y)) > 0).astype(float)
        fit = lasso_fit(X, response, family, 0.2 * lambda_max(X, response))
        history = np.array(fit.objective_history)
        assert np.all(np.diff(history) <= 1e-12)
        assert history[-1] == pytest.approx(lasso_objective(X, response, family, fit.lam, fit.intercept, fit.coef))

    @pytest.mark.parametrize("family", [Family.GAUSSIAN, Family.LOGISTIC])
    def test_kkt_conditions(self, sparse_problem, family):
        X, y = sparse_problem
        response = y if family == Family.GAUSSIAN else (y + Rng(6).normal(0.0, 1.0, size=len(y)) > 0).astype(float)
        fit = lasso_fit(X, response, family, 0.1 * lambda_max(X, response))
        assert kkt_violation(X, response, fit) <= 1e-6

    def test_recovers_sparse_support(self, sparse_problem):
        X, y = sparse_problem
        fit = lasso_fit(X, y, Family.GAUSSIAN, plug_in_lambda(y, X.shape[1]))
        assert {0, 1} <= set(fit.selected)

    def test_non_convergence_reports_diagnostics(self, sparse_problem):
        X, y = sparse_problem
        with pytest.raises(ConvergenceError) as info:
            lasso_fit(X, y, Family.GAUSSIAN, 0.01, max_sweeps=1)
        assert info.value.diagnostics["sweeps"] == 1

    def test_invalid_inputs(self, sparse_problem):
        X, y = sparse_problem
        with pytest.raises(DomainError):
            lasso_fit(X, y, Family.GAUSSIAN, -1.0)
        with pytest.raises(DomainError):
            lasso_fit(X, y, Family.LOGISTIC, 0.1)
        with pytest.raises(StructuralError):
            lasso_fit(X, y[:-1], Family.GAUSSIAN, 0.1)


class TestLambdaRules:

    def test_plug_in_formula(self):
        y = np.array([0.0, 2.0, 4.0, 6.0])
        expected = 1.1 * np.std(y) * math.sqrt(2 * math.log(2 * 10 / 0.05) / 4)
        assert plug_in_lambda(y, 10) == pytest.approx(expected)

    def test_plug_in_domain(self):
        with pytest.raises(DomainError):
            plug_in_lambda(np.ones(3), 0)

    def test_cross_validation_is_deterministic(self, sparse_problem):
        X, y = sparse_problem
        first = cross_validated_lambda(X, y, Family.GAUSSIAN, Rng(1))
        second = cross_validated_lambda(X, y, Family.GAUSSIAN, Rng(1))
        assert first == second
        assert 0 < first <= lambda_max(X, y)

    def test_cross_validation_folds(self, sparse_problem):
        X, y = sparse_problem
        with pytest.raises(DomainError):
            cross_validated_lambda(X, y, Family.GAUSSIAN, Rng(1), folds=1)


class TestRefits:

    def test_double_selection_uses_union(self):
        sets = refit_sets({"mu0": [1, 3], "p": [3, 5]}, SelectionStrategy.DOUBLE)
        assert sets == {"mu0": [1, 3, 5], "p": [1, 3, 5]}

    def test_single_selection_keeps_sets(self):
        sets = refit_sets({"mu0": [3, 1], "p": [5]}, "single")
        assert sets == {"mu0": [1, 3], "p": [5]}

    def test_ols_refit(self):
        rng = Rng(2)
        X = rng.normal(0.0, 1.0, size=(50, 4))
        y = 1.0 + 2.0 * X[:, 2] + rng.normal(0.0, 0.1, size=50)
        beta = ols_refit(X, y, [2])
        expected = np.linalg.lstsq(np.column_stack([np.ones(50), X[:, 2]]), y, rcond=None)[0]
        npt.assert_allclose(beta, expected, atol=1e-10)

    def test_singular_design_gets_ridge(self):
        rng = Rng(2)
        x = rng.normal(0.0, 1.0, size=30)
        X = np.column_stack([x, x])
        notes = []
        beta = ols_refit(X, 3.0 * x, [0, 1], notes)
        assert notes and "ridge" in notes[0]
        assert beta[1] + beta[2] == pytest.approx(3.0, abs=1e-4)

    def test_logistic_refit(self):
        rng = Rng(3)
        X = rng.normal(0.0, 1.0, size=(2000, 2))
        t = rng.bernoulli(1.0 / (1.0 + np.exp(-(0.5 + X[:, 0]))))
        beta = logistic_refit(X, t.astype(float), [0])
        npt.assert_allclose(beta, [0.5, 1.0], atol=0.2)

    def test_refit_beats_lasso_in_sample(self, sparse_problem):
        X, y = sparse_problem
        fit = lasso_fit(X, y, Family.GAUSSIAN, plug_in_lambda(y, X.shape[1]))
        beta = ols_refit(X, y, fit.selected)
        refit_rss = np.sum((y - np.column_stack([np.ones(len(y)), X[:, fit.selected]]) @ beta) ** 2)
        assert refit_rss <= np.sum((y - fit.predict(X)) ** 2)


class TestPostLassoSelector:

    @pytest.fixture
    def data(self):
        rng = Rng(8)
        n = 500
        x = rng.normal(0.0, 1.0, size=(n, 3))
        t = rng.bernoulli(1.0 / (1.0 + np.exp(-0.8 * x[:, 1])))
        y = 1.0 + 2.0 * x[:, 0] + 0.5 * t + rng.normal(0.0, 0.5, size=n)
        return Dataset(y=y, t=t, x=x)

    def test_double_selection(self, data):
        fit = select_and_refit(data, SelectionStrategy.DOUBLE, LambdaRule.PLUG_IN, Estimand.ACET, Rng(0))
        sets = fit.models["refit_sets"]
        assert sets["mu0"] == sets["p"]
        assert "mu1" not in sets and fit.mu1 is None
        assert "x1" in fit.models["names"]["mu0"]
        assert fit.p.min() >= 0.01 and fit.p.max() <= 0.99

    def test_single_selection_for_ace(self, data):
        fit = select_and_refit(data, "single", "plug-in", "ace", Rng(0))
        assert fit.mu1 is not None and len(fit.mu1) == data.n
        selected = fit.models["selected"]
        assert fit.models["refit_sets"] == {name: sorted(cols) for name, cols in selected.items()}

    def test_cross_validated_rule(self, data):
        selector = PostLassoSelector(LassoSettings(lambda_rule=LambdaRule.CROSS_VALIDATION, folds=3))
        fit = selector.select_and_refit(data, SelectionStrategy.DOUBLE, Estimand.ACET, Rng(4))
        assert fit.mu0.shape == (data.n,)

    def test_trimming_setting(self, data):
        selector = PostLassoSelector(LassoSettings(epsilon=0.2))
        fit = selector.select_and_refit(data, SelectionStrategy.SINGLE, Estimand.ACET, Rng(0))
        assert fit.p.min() >= 0.2 and fit.p.max() <= 0.8


@pytest.mark.slow
class TestSelectionProperties:

    def test_noise_covariates_rarely_selected(self):
        sparse = 0
        for seed in range(100):
            rng = Rng(seed)
            X = expand_monomials(rng.normal(0.0, 1.0, size=(500, 5)))
            y = rng.normal(0.0, 1.0, size=500)
            fit = lasso_fit(X, y, Family.GAUSSIAN, plug_in_lambda(y, X.shape[1]))
            sparse += len(fit.selected) <= 2
        assert sparse >= 90

    def test_support_recovery(self):
        hits = 0
        for seed in range(100):
            rng = Rng(seed)
            base = rng.normal(0.0, 1.0, size=(1000, 5))
            y = 2 * base[:, 0] - base[:, 1] + rng.normal(0.0, 0.1, size=1000)
            basis = MonomialBasis.fit(base)
            fit = lasso_fit(basis.transform(base), y, Family.GAUSSIAN, plug_in_lambda(y, basis.n_columns))
            hits += {0, 1} <= set(fit.selected)
        assert hits >= 95
