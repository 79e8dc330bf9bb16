"""Least squares, polynomial and L1-penalized logistic fits."""

import logging
from collections.abc import Sequence

import numpy as np
import scipy.linalg
import scipy.special
import scipy.stats
from numpy.typing import ArrayLike, NDArray

from mb_hybrid4x.analytics.models import RegressionResult
from mb_hybrid4x.core.errors import (
    DivergedError,
    InvalidConfigError,
    NotBinaryError,
    RankDeficientError,
    UnderdeterminedError,
)

logger = logging.getLogger(__name__)

type Matrix = NDArray[np.float64]

L1_TOLERANCE = 1e-8
L1_MAX_ITER = 100_000
_NEWTON_MAX_ITER = 100


def _names(names: Sequence[str] | None, p: int) -> list[str]:
    if names is None:
        return [f"x{i}" for i in range(p)]
    if len(names) != p:
        raise InvalidConfigError(f"Got {len(names)} column names for {p} columns.", field="names")
    return list(names)


def _as_matrix(x: ArrayLike, y: ArrayLike) -> tuple[Matrix, Matrix]:
    xm = np.asarray(x, dtype=np.float64)
    ym = np.asarray(y, dtype=np.float64).ravel()
    if xm.ndim == 1:
        xm = xm.reshape(-1, 1)
    if xm.shape[0] != ym.shape[0]:
        raise InvalidConfigError(f"X has {xm.shape[0]} rows but y has {ym.shape[0]}.", field="y")
    return xm, ym


def fit_ols(x: ArrayLike, y: ArrayLike, names: Sequence[str] | None = None, target: str = "y") -> RegressionResult:
    """Ordinary least squares through a column-pivoted QR factorization.

    Args:
        x: Design matrix, rows are observations; include an intercept column if wanted.
        y: Response.
        names: Column names; defaults to x0, x1, ...
        target: Name of the response, for reports.

    Returns:
        Coefficients with t-test p-values. Standard errors are NaN when no residual degrees of freedom remain.

    Raises:
        UnderdeterminedError: If there are fewer rows than columns.
        RankDeficientError: If some columns are linear combinations of others; they are named.

    """
    xm, ym = _as_matrix(x, y)
    n, p = xm.shape
    labels = _names(names, p)
    if n < p:
        raise UnderdeterminedError(f"{n} observations cannot determine {p} coefficients.", field="x")

    q, r, perm = scipy.linalg.qr(xm, mode="economic", pivoting=True)
    diag = np.abs(np.diag(r))
    tol = (diag[0] if p else 0.0) * max(n, p) * np.finfo(np.float64).eps
    rank = int(np.sum(diag > tol))
    if rank < p:
        dependent = sorted(labels[i] for i in perm[rank:])
        message = f"Design matrix is rank deficient; dependent columns: {', '.join(dependent)}."
        raise RankDeficientError(message, field=dependent[0])

    beta = np.empty(p)
    beta[perm] = scipy.linalg.solve_triangular(r, q.T @ ym)
    residuals = ym - xm @ beta
    rss = float(residuals @ residuals)
    dof = n - p
    se = np.full(p, np.nan)
    pvalues = np.full(p, np.nan)
    if dof > 0:
        r_inv = scipy.linalg.solve_triangular(r, np.eye(p))
        se[perm] = np.sqrt(np.sum(r_inv**2, axis=1) * rss / dof)
        with np.errstate(divide="ignore", invalid="ignore"):
            t = np.where(se > 0, beta / se, np.where(beta == 0, 0.0, np.inf))
        pvalues = 2 * scipy.stats.t.sf(np.abs(t), dof)
    centered = ym - ym.mean()
    tss = float(centered @ centered)
    return RegressionResult(
        model="ols",
        target=target,
        names=labels,
        coefficients=beta.tolist(),
        std_errors=se.tolist(),
        p_values=pvalues.tolist(),
        n_obs=n,
        r_squared=1.0 - rss / tss if tss > 0 else 1.0,
        residual_ss=rss,
    )


def fit_polynomial(x: ArrayLike, y: ArrayLike, degree: int, target: str = "y") -> RegressionResult:
    """Least-squares polynomial in x; coefficients run from the constant term up.

    Raises:
        UnderdeterminedError: If the degree is below 1 or there are not more distinct x values than the degree.

    """
    xs = np.asarray(x, dtype=np.float64).ravel()
    if degree < 1:
        raise UnderdeterminedError(f"Polynomial degree must be at least 1, got {degree}.", field="degree")
    distinct = len(np.unique(xs))
    if distinct <= degree:
        raise UnderdeterminedError(f"Degree {degree} needs more than {degree} distinct x values, got {distinct}.", field="x")
    names = ["1", "x", *(f"x^{k}" for k in range(2, degree + 1))]
    result = fit_ols(np.vander(xs, degree + 1, increasing=True), y, names, target)
    return result.model_copy(update={"model": f"polynomial{degree}"})


def _sigmoid(z: Matrix) -> Matrix:
    return scipy.special.expit(z)


def _nll(xm: Matrix, ym: Matrix, beta: Matrix) -> float:
    """Mean negative log-likelihood."""
    z = xm @ beta
    return float(np.mean(np.logaddexp(0.0, z) - ym * z))


def _soft_threshold(v: Matrix, t: Matrix) -> Matrix:
    return np.sign(v) * np.maximum(np.abs(v) - t, 0.0)


def _refit(xm: Matrix, ym: Matrix, support: NDArray[np.intp]) -> tuple[Matrix, Matrix]:
    """Unpenalized Newton fit on the support; coefficients and standard errors (NaN if it fails)."""
    xs = xm[:, support]
    beta = np.zeros(len(support))
    for _ in range(_NEWTON_MAX_ITER):
        mu = _sigmoid(xs @ beta)
        hessian = xs.T @ (xs * (mu * (1 - mu))[:, None])
        try:
            step = scipy.linalg.solve(hessian, xs.T @ (ym - mu), assume_a="pos")
        except (scipy.linalg.LinAlgError, ValueError):
            return beta, np.full(len(support), np.nan)
        beta = beta + step
        if not np.all(np.isfinite(beta)):
            return beta, np.full(len(support), np.nan)
        if np.max(np.abs(step)) < L1_TOLERANCE:
            break
    mu = _sigmoid(xs @ beta)
    hessian = xs.T @ (xs * (mu * (1 - mu))[:, None])
    try:
        cov = scipy.linalg.inv(hessian)
    except (scipy.linalg.LinAlgError, ValueError):
        return beta, np.full(len(support), np.nan)
    return beta, np.sqrt(np.clip(np.diag(cov), 0.0, None))


def fit_logistic_l1(
    x: ArrayLike,
    y: ArrayLike,
    penalty: float,
    names: Sequence[str] | None = None,
    *,
    unpenalized: Sequence[int] = (0,),
    target: str = "y",
) -> RegressionResult:
    """Logistic regression with an L1 penalty, fitted by accelerated proximal gradient with restarts.

    Minimizes mean negative log-likelihood plus `penalty` times the L1 norm of the penalized
    coefficients. Iteration stops once no coefficient moves by more than 1e-8. Marginal effects are
    average derivatives of the predicted probability. p-values come from an unpenalized refit on
    the columns the penalty kept.

    Args:
        x: Design matrix, column 0 usually the intercept.
        y: Binary response.
        penalty: L1 strength, at least 0.
        names: Column names.
        unpenalized: Columns left out of the penalty.
        target: Name of the response, for reports.

    Raises:
        NotBinaryError: If y holds anything but 0 and 1.
        InvalidConfigError: If the penalty is negative.
        DivergedError: If the fit does not converge within the iteration cap or goes non-finite.

    """
    xm, ym = _as_matrix(x, y)
    n, p = xm.shape
    labels = _names(names, p)
    if not np.all(np.isin(ym, (0.0, 1.0))):
        raise NotBinaryError(f"Response {target} must contain only 0 and 1.", field=target)
    if penalty < 0:
        raise InvalidConfigError(f"L1 penalty must be at least 0, got {penalty}.", field="penalty")

    weights = np.full(p, penalty)
    weights[list(unpenalized)] = 0.0
    lipschitz = max(float(np.linalg.norm(xm, 2) ** 2) / (4 * n), 1e-12)
    step = 1.0 / lipschitz
    beta = np.zeros(p)
    momentum = beta.copy()
    t = 1.0
    iterations = 0
    converged = False
    while iterations < L1_MAX_ITER:
        iterations += 1
        grad = xm.T @ (_sigmoid(xm @ momentum) - ym) / n
        new = _soft_threshold(momentum - step * grad, step * weights)
        if not np.all(np.isfinite(new)):
            break
        if np.max(np.abs(new - beta)) < L1_TOLERANCE:
            beta = new
            converged = True
            break
        # Restart the momentum when it points uphill.
        if float((momentum - new) @ (new - beta)) > 0:
            t = 1.0
        t_next = (1 + np.sqrt(1 + 4 * t * t)) / 2
        momentum = new + ((t - 1) / t_next) * (new - beta)
        beta, t = new, t_next
    if not converged:
        raise DivergedError(f"L1 logistic fit of {target} did not converge in {iterations} iterations.", field=target)

    skipped = set(unpenalized)
    mu = _sigmoid(xm @ beta)
    slope = float(np.mean(mu * (1 - mu)))
    support = np.flatnonzero((beta != 0) | (weights == 0))
    se = np.full(p, np.nan)
    pvalues = np.full(p, np.nan)
    if len(support) and n > len(support):
        refit_beta, refit_se = _refit(xm, ym, support)
        with np.errstate(divide="ignore", invalid="ignore"):
            z = refit_beta / refit_se
        se[support] = refit_se
        pvalues[support] = 2 * scipy.stats.norm.sf(np.abs(z))
    logger.debug("L1 logistic fit target=%s penalty=%g iterations=%d support=%d", target, penalty, iterations, len(support))
    return RegressionResult(
        model="logistic_l1",
        target=target,
        names=labels,
        coefficients=beta.tolist(),
        std_errors=se.tolist(),
        p_values=pvalues.tolist(),
        marginal_effects={labels[i]: slope * float(beta[i]) for i in range(p) if i not in skipped},
        penalty=penalty,
        n_obs=n,
        iterations=iterations,
        log_likelihood=-_nll(xm, ym, beta) * n,
    )
