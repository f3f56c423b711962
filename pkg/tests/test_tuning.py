from __future__ import annotations

import math

import numpy as np
import pytest
from numpy.testing import assert_allclose, assert_array_equal

from penalized.classic import fit_ols
from penalized.core import DataError, Dataset, FoldTooSmall, make_fit, standardize
from penalized.methods import MethodOptions, fit_method
from penalized.shrinkage import PenaltySpec, RegularizationPath, fit_path
from penalized.tuning import (
    bic_score,
    convexity_diagnostic,
    cv_select,
    fit_nonconvex,
    fold_assignment,
    kfold_cv,
    path_bic,
    select_gamma,
)


def _near_duplicate_design(seed=4, n=100):
    '''Two columns with correlation about 0.98 that the response needs together.'''
    rng = np.random.default_rng(seed)
    u, v = rng.standard_normal(n), rng.standard_normal(n)
    x = np.column_stack([u, u + 0.2 * v, rng.standard_normal(n), rng.standard_normal(n)])
    y = 10.0 * (x[:, 1] - x[:, 0]) + 0.1 * rng.standard_normal(n)
    return standardize(Dataset(x, y))


class TestFolds:
    def test_balanced_and_deterministic(self):
        ids = fold_assignment(43, 10, seed=5)
        counts = np.bincount(ids)
        assert counts.size == 10 and counts.max() - counts.min() <= 1
        assert_array_equal(ids, fold_assignment(43, 10, seed=5))
        assert np.any(ids != fold_assignment(43, 10, seed=6))

    @pytest.mark.parametrize("n, folds", [(10, 1), (10, 11), (2, 2)])
    def test_too_small(self, n, folds):
        with pytest.raises(FoldTooSmall):
            fold_assignment(n, folds, seed=0)

    def test_fold_error_is_a_data_error(self):
        assert issubclass(FoldTooSmall, DataError)


class TestCrossValidation:
    def test_leave_one_out_matches_brute_force(self, rng):
        x = rng.standard_normal((10, 3))
        s = standardize(Dataset(x, x @ np.array([1.0, 0.0, -1.0]) + 0.5 * rng.standard_normal(10)))
        spec = PenaltySpec("lasso")
        cv = kfold_cv(s, spec, folds=10, seed=0, grid_size=12)

        errors = np.zeros((10, cv.lambdas.size))
        for i in range(10):
            keep = np.arange(10) != i
            train = standardize(Dataset(s.x[keep], s.y[keep]))
            path = fit_path(train, spec, lambdas=cv.lambdas)
            for k in range(cv.lambdas.size):
                errors[i, k] = (s.y[i] - path.fit_at(k, train).predict(s.x[[i]])[0]) ** 2
        assert_allclose(cv.cv_mean, errors.mean(axis=0), rtol=1e-9, atol=1e-12)
        assert_allclose(cv.cv_se, errors.std(axis=0, ddof=1) / math.sqrt(10), rtol=1e-9, atol=1e-12)

    def test_noiseless_duplicated_rows(self, rng):
        x = rng.standard_normal((20, 3))
        x = np.vstack([x, x])
        y = x @ np.array([1.0, -2.0, 0.5])
        s = standardize(Dataset(x, y))
        cv = kfold_cv(s, PenaltySpec("lasso"), folds=5, seed=1, grid_size=30)
        assert cv.cv_mean[-1] <= 1e-3 * np.var(y)

    def test_zero_fits_score_the_training_mean(self, case_design):
        s = case_design
        cv = kfold_cv(s, PenaltySpec("lasso"), folds=4, seed=2, lambdas=np.array([1e6, 1e5]))
        expected = []
        for k in range(4):
            test = cv.fold_ids == k
            expected.append(np.mean((s.y[test] - s.y[~test].mean()) ** 2))
        assert_allclose(cv.cv_mean, np.mean(expected), rtol=1e-12)

    def test_argmin_and_determinism(self, case_design):
        first = kfold_cv(case_design, PenaltySpec("lasso"), folds=5, seed=3, grid_size=25)
        again = kfold_cv(case_design, PenaltySpec("lasso"), folds=5, seed=3, grid_size=25)
        assert_array_equal(first.cv_mean, again.cv_mean)
        assert first.index_min == int(np.argmin(first.cv_mean))
        assert first.lambda_min == first.lambdas[first.index_min]
        assert np.all(first.cv_se >= 0.0)

    def test_cv_select_refits_on_full_data(self, case_design):
        fit = cv_select(case_design, PenaltySpec("lasso"), folds=5, seed=3, grid_size=25)
        cv, path = fit.details["cv"], fit.details["path"]
        assert fit.tuning["lambda"] == cv.lambda_min
        assert_array_equal(fit.beta, path.coefs[cv.index_min])

    @pytest.mark.parametrize("tag", ["lasso", "enet", "adalasso", "scad", "mcp"])
    def test_indicator_constant_on_a_training_fold(self, tag):
        # the single 1 lands in one held-out fold, leaving that training split constant
        rng = np.random.default_rng(8)
        flag = np.zeros(40)
        flag[3] = 1.0
        a = rng.standard_normal(40)
        y = 2.0 * a + 0.5 * rng.standard_normal(40)
        s = standardize(Dataset(np.column_stack([a, flag]), y, ("a", "flag")))
        fit = fit_method(tag, s, MethodOptions(folds=10, path_size=20, adalasso_fold_weights=True))
        assert np.all(np.isfinite(fit.coef.slopes))
        assert fit.beta[0] != 0.0

    def test_pinned_column_stays_out_of_the_fold_path(self):
        rng = np.random.default_rng(8)
        flag = np.zeros(20)
        flag[0] = 1.0
        y = rng.standard_normal(20) + 3.0 * flag
        s = standardize(Dataset(np.column_stack([rng.standard_normal(20), flag]), y))
        train = standardize(s.rows(np.arange(1, 20)), pin_constant=True)
        path = fit_path(train, PenaltySpec("lasso"), grid_size=10)
        assert_array_equal(path.coefs[:, 1], 0.0)
        cv = kfold_cv(s, PenaltySpec("mcp"), folds=5, seed=0, grid_size=10)
        assert np.all(np.isfinite(cv.cv_mean))


class TestBic:
    def test_zero_fit(self, case_design):
        s = case_design
        fit = make_fit("lasso", np.zeros(s.p), s)
        assert bic_score(s, fit) == pytest.approx(s.n * math.log(float(s.y @ s.y) / s.n))

    def test_formula_and_support_penalty(self, case_design):
        s = case_design
        beta = np.zeros(s.p)
        beta[[0, 1, 4]] = [3.0, 1.5, 2.0]
        fit = make_fit("lasso", beta, s)
        expected = s.n * math.log(s.rss(beta) / s.n) + 3 * math.log(s.n)
        assert bic_score(s, fit) == pytest.approx(expected)
        # two more nonzeros at the same residual sum of squares cost 2 log n
        wider = beta.copy()
        wider[[2, 3]] = 1e-300
        assert bic_score(s, make_fit("lasso", wider, s)) - bic_score(s, fit) == pytest.approx(2 * math.log(s.n))

    def test_rss_floor(self, rng):
        x = rng.standard_normal((30, 3))
        s = standardize(Dataset(x, x @ np.array([1.0, 2.0, -1.0])))
        assert bic_score(s, fit_ols(s)) == pytest.approx(30 * math.log(1e-12 / 30) + 3 * math.log(30))

    def test_path_bic_matches_pointwise(self, case_design):
        s = case_design
        path = fit_path(s, PenaltySpec("lasso"), 15)
        pointwise = [bic_score(s, path.fit_at(k, s)) for k in range(15)]
        assert_allclose(path_bic(path, s), pointwise, rtol=1e-10)


class TestConvexity:
    def _path(self, coefs, family="mcp"):
        coefs = np.asarray(coefs, dtype=float)
        k = coefs.shape[0]
        return RegularizationPath(
            lambdas=np.geomspace(1.0, 0.1, k),
            coefs=coefs,
            dfs=np.count_nonzero(coefs, axis=1),
            iterations=np.ones(k, dtype=int),
            converged=np.ones(k, dtype=bool),
            spec=PenaltySpec(family),
        )

    def test_empty_active_set_passes(self, case_design):
        path = self._path(np.zeros((3, case_design.p)))
        assert convexity_diagnostic(path, case_design).all()

    def test_orthogonal_design_passes(self, orthogonal_design):
        path = self._path(np.ones((2, orthogonal_design.p)), family="scad")
        spec = PenaltySpec("scad", gamma=2.1)
        assert convexity_diagnostic(path, orthogonal_design, spec).all()

    def test_duplicated_columns_fail(self, rng):
        x = rng.standard_normal((30, 2))
        s = standardize(Dataset(np.column_stack([x, x[:, 0]]), rng.standard_normal(30)))
        coefs = [[1.0, 0.0, 0.0], [1.0, 1.0, 0.0], [1.0, 0.0, 1.0]]
        flags = convexity_diagnostic(self._path(coefs), s, PenaltySpec("mcp", gamma=20.0))
        assert_array_equal(flags, [True, True, False])

    def test_monotone_in_gamma(self, case_design):
        path = fit_path(case_design, PenaltySpec("scad"), 40)
        previous = np.zeros(40, dtype=bool)
        for gamma in (2.1, 2.7, 3.7, 5.0, 10.0, 20.0):
            flags = convexity_diagnostic(path, case_design, PenaltySpec("scad", gamma=gamma))
            assert np.all(flags >= previous)
            previous = flags

    def test_convex_family_is_rejected(self, case_design):
        path = fit_path(case_design, PenaltySpec("lasso"), 5)
        with pytest.raises(ValueError):
            convexity_diagnostic(path, case_design)


class TestGammaSelection:
    def test_single_rung(self, case_design):
        selection = select_gamma(case_design, "scad", folds=5, seed=0, ladder=[4.0], grid_size=20)
        assert selection.gamma_star == 4.0
        assert selection.gamma_ladder == (4.0,)

    def test_orthogonal_design_takes_the_bic_minimum(self, orthogonal_design):
        selection = select_gamma(orthogonal_design, "mcp", folds=5, seed=0, grid_size=20)
        assert selection.convexity_flags.all()
        assert not selection.fallback
        assert selection.gamma_star == selection.gamma_ladder[int(np.argmin(selection.bic_values))]

    def test_chosen_rung_passes(self, case_design):
        selection = select_gamma(case_design, "scad", folds=5, seed=0, grid_size=20)
        if not selection.fallback:
            i = selection.gamma_ladder.index(selection.gamma_star)
            assert selection.convexity_flags[i]
            assert selection.bic_values[i] == selection.bic_values[selection.convexity_flags].min()
        assert selection.cv.lambdas.size == 20

    def test_fallback_to_largest_gamma(self):
        s = _near_duplicate_design()
        selection = select_gamma(s, "mcp", folds=5, seed=0, grid_size=30)
        assert selection.fallback
        assert not selection.convexity_flags.any()
        assert selection.gamma_star == 20.0

        fit = fit_nonconvex(s, "mcp", folds=5, seed=0, grid_size=30)
        assert fit.flags == ("no_convex_candidate",)
        assert fit.tuning["gamma"] == 20.0

    def test_default_gamma_without_selection(self, case_design):
        fit = fit_nonconvex(case_design, "mcp", folds=5, seed=0, grid_size=20, choose_gamma=False)
        assert fit.tuning["gamma"] == 3.0
        assert fit.details["gamma_selection"] is None
        assert fit.details["convexity"].shape == (20,)

    def test_bad_family(self, case_design):
        with pytest.raises(ValueError):
            select_gamma(case_design, "lasso")
