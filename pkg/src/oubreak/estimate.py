"""Drift MLE on an interval, diffusion estimates and the segment log-likelihood."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .basis import BasisSet
from .exceptions import NumericalError, ValidationError
from .quadrature import QuadStats, compute_stats, sse_of_segment
from .simulate import DriftParams, SamplePath

MAX_CONDITION = 1e12
SIGMA_METHODS = ("realized", "residual")


@dataclass(frozen=True)
class SegmentFit:
    """Drift MLE over the step interval ``interval = (i_lo, i_hi)``.

    ``gain`` is ``theta' R`` at the optimum, so the maximised segment
    log-likelihood is ``gain / (2 sigma^2)`` for any plug-in ``sigma``.
    """

    theta: DriftParams
    interval: tuple[int, int]
    cond: float
    gain: float
    stats: QuadStats
    loglik_part: float | None = None


def check_positive_definite(Q: np.ndarray) -> float:
    """Return ``cond(Q)``; raise :class:`NumericalError` if ``Q`` is unusable."""
    eig = np.linalg.eigvalsh(Q)
    if not eig[0] > 0:
        raise NumericalError(f"Q is not positive definite (smallest eigenvalue {eig[0]:.3g})")
    cond = float(eig[-1] / eig[0])
    if cond > MAX_CONDITION:
        raise NumericalError(f"Q is ill-conditioned (condition number {cond:.3g} > {MAX_CONDITION:.0e})")
    return cond


def fit_stats(stats: QuadStats, sigma: float | None = None) -> SegmentFit:
    """Solve ``Q theta = R`` for precomputed statistics."""
    if stats.steps < stats.p + 2:
        raise ValidationError(f"interval has {stats.steps} steps; need at least p+2={stats.p + 2}")
    cond = check_positive_definite(stats.Q)
    theta = np.linalg.solve(stats.Q, stats.Rtilde)
    gain = float(theta @ stats.Rtilde)
    drift = DriftParams.from_vector(theta)
    ll = None if sigma is None else loglik_stats(stats, drift, sigma)
    return SegmentFit(drift, (stats.i_lo, stats.i_hi), cond, gain, stats, ll)


def fit_mle(
    path: SamplePath,
    basis: BasisSet,
    i_lo: int = 0,
    i_hi: int | None = None,
    sigma: float | None = None,
) -> SegmentFit:
    """Maximum likelihood drift estimate over steps ``[i_lo, i_hi)``.

    Raises
    ------
    NumericalError
        If ``Q`` is not positive definite or its condition number exceeds
        ``MAX_CONDITION``.
    """
    return fit_stats(compute_stats(path, basis, i_lo, i_hi), sigma=sigma)


def estimate_sigma(path: SamplePath) -> float:
    """Realised volatility ``sqrt(sum Y_i^2 / T)``."""
    y = path.increments
    return math.sqrt(float(y @ y) / path.T)


def estimate_sigma_residual(path: SamplePath, basis: BasisSet) -> float:
    """Residual standard error of the no-break Euler regression over ``sqrt(dt)``."""
    fit = fit_mle(path, basis)
    dof = path.n - (basis.p + 1)
    sse = max(sse_of_segment(fit.stats, fit.theta), 0.0)
    return math.sqrt(sse / dof) / math.sqrt(path.dt)


def sigma_hat(path: SamplePath, basis: BasisSet, method: str = "realized") -> float:
    if method == "realized":
        return estimate_sigma(path)
    if method == "residual":
        return estimate_sigma_residual(path, basis)
    raise ValidationError(f"unknown sigma method {method!r}; expected one of {SIGMA_METHODS}")


def loglik_stats(stats: QuadStats, theta: DriftParams | np.ndarray, sigma: float) -> float:
    """``theta'R / sigma^2 - theta'Q theta / (2 sigma^2)``."""
    if not sigma > 0:
        raise ValidationError(f"sigma must be positive, got {sigma!r}")
    th = theta.as_vector() if isinstance(theta, DriftParams) else np.asarray(theta, dtype=float)
    if th.shape != stats.Rtilde.shape:
        raise ValidationError(f"theta has dimension {th.size}, stats expect {stats.Rtilde.size}")
    s2 = sigma * sigma
    return float((th @ stats.Rtilde) / s2 - (th @ stats.Q @ th) / (2.0 * s2))


def loglik_segment(
    path: SamplePath,
    basis: BasisSet,
    i_lo: int,
    i_hi: int,
    theta: DriftParams,
    sigma: float,
) -> float:
    """Discretised Girsanov log-likelihood of ``theta`` on steps ``[i_lo, i_hi)``."""
    if not sigma > 0:
        raise ValidationError(f"sigma must be positive, got {sigma!r}")
    return loglik_stats(compute_stats(path, basis, i_lo, i_hi), theta, sigma)


def asymptotic_covariance(fit: SegmentFit, sigma: float) -> np.ndarray:
    """``sigma^2 Q^{-1}``, the large-sample covariance of the drift MLE (diagnostic)."""
    return sigma * sigma * np.linalg.inv(fit.stats.Q)
