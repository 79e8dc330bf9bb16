"""Tests for the least-squares and L1 logistic fits."""

import math

import numpy as np
import pytest
import scipy.special

from mb_hybrid4x.analytics import regression
from mb_hybrid4x.analytics.regression import fit_logistic_l1, fit_ols, fit_polynomial
from mb_hybrid4x.core.errors import DivergedError, InvalidConfigError, NotBinaryError, RankDeficientError, UnderdeterminedError


@pytest.fixture
def linear_data() -> tuple[np.ndarray, np.ndarray]:
    rng = np.random.default_rng(5)
    x = np.column_stack([np.ones(60), rng.normal(size=60), rng.normal(size=60)])
    y = x @ np.array([1.0, 2.0, -0.5]) + rng.normal(scale=0.3, size=60)
    return x, y


@pytest.fixture
def logistic_data() -> tuple[np.ndarray, np.ndarray]:
    rng = np.random.default_rng(11)
    x = np.column_stack([np.ones(300), rng.normal(size=300)])
    y = (rng.random(300) < scipy.special.expit(0.4 + 1.2 * x[:, 1])).astype(float)
    return x, y


def _newton(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    beta = np.zeros(x.shape[1])
    for _ in range(50):
        mu = scipy.special.expit(x @ beta)
        beta += np.linalg.solve(x.T @ (x * (mu * (1 - mu))[:, None]), x.T @ (y - mu))
    return beta


class TestOls:
    """Tests for fit_ols."""

    def test_matches_normal_equations(self, linear_data: tuple[np.ndarray, np.ndarray]):
        """Coefficients and standard errors agree with the textbook formulas."""
        x, y = linear_data
        fit = fit_ols(x, y, ["1", "a", "b"])
        beta = np.linalg.solve(x.T @ x, x.T @ y)
        rss = float(np.sum((y - x @ beta) ** 2))
        se = np.sqrt(np.diag(np.linalg.inv(x.T @ x)) * rss / (60 - 3))
        assert fit.coefficients == pytest.approx(beta.tolist())
        assert fit.std_errors == pytest.approx(se.tolist())
        assert fit.residual_ss == pytest.approx(rss)
        assert fit.significant("a")
        assert 0 < fit.r_squared <= 1  # type: ignore[operator]

    def test_exact_fit_has_no_errors(self):
        """With no residual degrees of freedom the standard errors are NaN."""
        fit = fit_ols([[1, 0], [1, 1]], [3, 5])
        assert fit.coefficients == pytest.approx([3, 2])
        assert all(math.isnan(se) for se in fit.std_errors)
        assert not fit.significant("x1")

    def test_rank_deficient(self):
        """Dependent columns are named."""
        x = [[1, 1, 2], [1, 2, 4], [1, 3, 6], [1, 4, 8]]
        with pytest.raises(RankDeficientError) as exc:
            fit_ols(x, [1, 2, 3, 4], ["1", "a", "b"])
        assert exc.value.field in {"a", "b"}

    def test_underdetermined(self):
        """Fewer rows than columns is refused."""
        with pytest.raises(UnderdeterminedError):
            fit_ols([[1, 2, 3]], [1])

    def test_names_must_match(self):
        """One name per column."""
        with pytest.raises(InvalidConfigError):
            fit_ols([[1], [2]], [1, 2], ["a", "b"])


class TestPolynomial:
    """Tests for fit_polynomial."""

    def test_exact_quadratic(self):
        """A noiseless quadratic is recovered."""
        xs = np.arange(8.0)
        fit = fit_polynomial(xs, 1 + 2 * xs + 3 * xs**2, 2)
        assert fit.model == "polynomial2"
        assert fit.names == ["1", "x", "x^2"]
        assert fit.coefficients == pytest.approx([1, 2, 3])
        assert fit.r_squared == pytest.approx(1.0)

    @pytest.mark.parametrize(("xs", "degree"), [([1, 1, 2, 2], 2), ([1, 2, 3], 0)])
    def test_underdetermined(self, xs: list[int], degree: int):
        """Too few distinct x values or a degree below 1 is refused."""
        with pytest.raises(UnderdeterminedError):
            fit_polynomial(xs, [0] * len(xs), degree)


class TestLogisticL1:
    """Tests for fit_logistic_l1."""

    def test_no_penalty_is_maximum_likelihood(self, logistic_data: tuple[np.ndarray, np.ndarray]):
        """At penalty 0 the fit matches Newton's method."""
        x, y = logistic_data
        fit = fit_logistic_l1(x, y, 0.0, ["Intercept", "x"])
        assert fit.coefficients == pytest.approx(_newton(x, y).tolist(), abs=1e-4)
        assert fit.significant("x")

    def test_large_penalty_leaves_intercept(self, logistic_data: tuple[np.ndarray, np.ndarray]):
        """A strong penalty zeroes every penalized coefficient."""
        x, y = logistic_data
        fit = fit_logistic_l1(x, y, 10.0, ["Intercept", "x"])
        assert fit.coefficient("x") == 0.0
        assert fit.coefficient("Intercept") == pytest.approx(scipy.special.logit(y.mean()), abs=1e-4)
        assert fit.marginal_effects == {"x": 0.0}

    def test_marginal_effects(self, logistic_data: tuple[np.ndarray, np.ndarray]):
        """Average derivative of the probability, intercept excluded."""
        x, y = logistic_data
        fit = fit_logistic_l1(x, y, 0.01, ["Intercept", "x"])
        mu = scipy.special.expit(x @ np.array(fit.coefficients))
        assert set(fit.marginal_effects) == {"x"}
        assert fit.marginal_effects["x"] == pytest.approx(float(np.mean(mu * (1 - mu))) * fit.coefficient("x"))
        assert fit.penalty == 0.01

    def test_not_binary(self):
        """Responses other than 0/1 are refused."""
        with pytest.raises(NotBinaryError):
            fit_logistic_l1([[1], [1]], [0, 2], 0.1)

    def test_negative_penalty(self):
        """Penalties below zero are refused."""
        with pytest.raises(InvalidConfigError):
            fit_logistic_l1([[1], [1]], [0, 1], -1.0)

    def test_diverged(self, logistic_data: tuple[np.ndarray, np.ndarray], monkeypatch: pytest.MonkeyPatch):
        """Hitting the iteration cap is reported."""
        monkeypatch.setattr(regression, "L1_MAX_ITER", 1)
        x, y = logistic_data
        with pytest.raises(DivergedError):
            fit_logistic_l1(x, y, 0.0)
