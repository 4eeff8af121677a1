"""Single change-point location by least squares (LSSE) and maximum likelihood (MLL).

Every admissible split index ``i`` gets a fresh drift fit on steps
``[0, i)`` and ``[i, n)``.  Both objectives are computed from the same
batched prefix statistics:

    SSE(i)    = sum Y^2 - dt * g(i)
    loglik(i) = g(i) / (2 sigma^2)

where ``g(i) = theta1'R1 + theta2'R2`` at the segment MLEs, so the two
argmin/argmax locations coincide whenever one ``sigma`` is shared.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .basis import BasisSet
from .estimate import MAX_CONDITION
from .exceptions import NumericalError, ValidationError
from .quadrature import PrefixStats
from .simulate import DriftParams, SamplePath

DEFAULT_MIN_FRAC = 0.05
METHODS = ("lsse", "mll")


@dataclass
class ChangePointFit:
    """Result of a single-break scan.

    ``candidates`` and ``objective_profile`` are aligned; profile entries
    are NaN where either segment fit was rejected (see ``skipped``).
    """

    method: str
    tau_index: int
    tau_time: float
    s_hat: float
    theta1: DriftParams
    theta2: DriftParams
    objective_at_opt: float
    candidates: np.ndarray
    objective_profile: np.ndarray
    window: tuple[int, int]
    n: int
    dt: float
    sigma: float | None = None
    skipped: list[int] = field(default_factory=list)

    def profile_rows(self, t0: float = 0.0):
        """Yield ``(index, time, objective)`` rows."""
        for i, obj in zip(self.candidates, self.objective_profile):
            yield int(i), t0 + int(i) * self.dt, float(obj)


def admissible_window(n: int, p: int, min_frac: float = DEFAULT_MIN_FRAC) -> tuple[int, int]:
    """Inclusive candidate range ``[i_min, n - i_min]``.

    Each side keeps at least ``ceil(min_frac * n)`` steps and never fewer
    than ``p + 2``.
    """
    if not (0.0 <= min_frac < 0.5):
        raise ValidationError(f"min_frac must lie in [0, 0.5), got {min_frac!r}")
    i_min = max(int(math.ceil(min_frac * n - 1e-9)), p + 2)
    if i_min > n - i_min:
        raise ValidationError(f"empty scan window: n={n} steps cannot hold two segments of {i_min}")
    return i_min, n - i_min


def _batched_fits(Q: np.ndarray, R: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Solve a stack of systems; returns ``(theta, ok)``."""
    eig = np.linalg.eigvalsh(Q)
    lo, hi = eig[:, 0], eig[:, -1]
    with np.errstate(divide="ignore", invalid="ignore"):
        ok = (lo > 0) & (hi / lo <= MAX_CONDITION)
    theta = np.full(R.shape, np.nan)
    if ok.any():
        theta[ok] = np.linalg.solve(Q[ok], R[ok][..., None])[..., 0]
    return theta, ok


@dataclass
class ScanProfile:
    """Shared intermediate of both scans."""

    path: SamplePath
    candidates: np.ndarray
    theta1: np.ndarray
    theta2: np.ndarray
    ok: np.ndarray
    sse: np.ndarray
    lin: np.ndarray
    quad: np.ndarray
    window: tuple[int, int]
    prefix: PrefixStats

    def loglik(self, sigma: float) -> np.ndarray:
        if not sigma > 0:
            raise ValidationError(f"sigma must be positive, got {sigma!r}")
        s2 = sigma * sigma
        return self.lin / s2 - self.quad / (2.0 * s2)

    @property
    def skipped(self) -> list[int]:
        return [int(i) for i in self.candidates[~self.ok]]


def scan_profile(path: SamplePath, basis: BasisSet, min_frac: float = DEFAULT_MIN_FRAC,
                 prefix: PrefixStats | None = None) -> ScanProfile:
    """Fit both segments at every admissible split."""
    p = basis.p
    window = admissible_window(path.n, p, min_frac)
    cand = np.arange(window[0], window[1] + 1)
    prefix = prefix if prefix is not None else PrefixStats(path, basis)
    QL, RL, QR, RR = prefix.split(cand)
    QL = 0.5 * (QL + np.swapaxes(QL, 1, 2))
    QR = 0.5 * (QR + np.swapaxes(QR, 1, 2))
    th1, ok1 = _batched_fits(QL, RL)
    th2, ok2 = _batched_fits(QR, RR)
    ok = ok1 & ok2
    if not ok.any():
        raise NumericalError("every candidate split produced a singular or ill-conditioned segment fit")
    lin = np.einsum("ij,ij->i", th1, RL) + np.einsum("ij,ij->i", th2, RR)
    quad = np.einsum("ij,ijk,ik->i", th1, QL, th1) + np.einsum("ij,ijk,ik->i", th2, QR, th2)
    lin[~ok] = np.nan
    quad[~ok] = np.nan
    dt = path.dt
    sse = prefix.Cyy[path.n] - 2.0 * dt * lin + dt * quad
    return ScanProfile(path, cand, th1, th2, ok, sse, lin, quad, window, prefix)


def _finish(prof: ScanProfile, method: str, objective: np.ndarray, pos: int, sigma: float | None) -> ChangePointFit:
    path = prof.path
    i = int(prof.candidates[pos])
    return ChangePointFit(
        method=method,
        tau_index=i,
        tau_time=path.t0 + i * path.dt,
        s_hat=i / path.n,
        theta1=DriftParams.from_vector(prof.theta1[pos]),
        theta2=DriftParams.from_vector(prof.theta2[pos]),
        objective_at_opt=float(objective[pos]),
        candidates=prof.candidates,
        objective_profile=objective,
        window=prof.window,
        n=path.n,
        dt=path.dt,
        sigma=sigma,
        skipped=prof.skipped,
    )


def lsse_from_profile(prof: ScanProfile) -> ChangePointFit:
    # nanargmin returns the first minimiser, i.e. the smallest index on ties
    return _finish(prof, "lsse", prof.sse, int(np.nanargmin(prof.sse)), None)


def mll_from_profile(prof: ScanProfile, sigma: float) -> ChangePointFit:
    ll = prof.loglik(sigma)
    return _finish(prof, "mll", ll, int(np.nanargmax(ll)), sigma)


def scan_lsse(path: SamplePath, basis: BasisSet, min_frac: float = DEFAULT_MIN_FRAC) -> ChangePointFit:
    """Break location minimising the total sum of squared Euler residuals."""
    return lsse_from_profile(scan_profile(path, basis, min_frac))


def scan_mll(path: SamplePath, basis: BasisSet, sigma: float, min_frac: float = DEFAULT_MIN_FRAC) -> ChangePointFit:
    """Break location maximising the two-segment log-likelihood at plug-in ``sigma``."""
    if not sigma > 0:
        raise ValidationError(f"sigma must be positive, got {sigma!r}")
    return mll_from_profile(scan_profile(path, basis, min_frac), sigma)
