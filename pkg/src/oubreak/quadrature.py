"""Sufficient statistics ``Q`` and ``R`` of the drift likelihood.

With ``V_i = (phi_1(t_i), ..., phi_p(t_i), -X_{t_i})`` and increments
``Y_i = X_{t_{i+1}} - X_{t_i}``, an interval of steps ``[lo, hi)`` has

    Q = sum_i V_i V_i' dt        R = sum_i V_i Y_i

(left-point Riemann and Ito sums).  The drift MLE solves ``Q theta = R``.
Per-step contributions are cumulated once so that any interval's
statistics cost one subtraction.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .basis import BasisSet
from .exceptions import ValidationError
from .simulate import DriftParams, SamplePath


@dataclass(frozen=True)
class QuadStats:
    """Statistics over the step interval ``[i_lo, i_hi)``.

    ``yy`` caches ``sum Y_i^2`` so residual sums of squares need no second
    pass over the path.
    """

    Q: np.ndarray
    Rtilde: np.ndarray
    yy: float
    dt: float
    i_lo: int
    i_hi: int

    @property
    def p(self) -> int:
        return self.Q.shape[0] - 1

    @property
    def steps(self) -> int:
        return self.i_hi - self.i_lo

    def __add__(self, other: QuadStats) -> QuadStats:
        if self.i_hi != other.i_lo:
            raise ValidationError("only adjacent intervals can be combined")
        return QuadStats(self.Q + other.Q, self.Rtilde + other.Rtilde, self.yy + other.yy,
                         self.dt, self.i_lo, other.i_hi)


def design(path: SamplePath, basis: BasisSet) -> np.ndarray:
    """The ``(n, p+1)`` matrix whose row ``i`` is ``V_i``."""
    phi = basis.evaluate(path.times[:-1])
    return np.column_stack([phi, -path.values[:-1]])


def _check_interval(n: int, i_lo: int, i_hi: int) -> None:
    if not (0 <= i_lo < i_hi <= n):
        raise ValidationError(f"interval [{i_lo}, {i_hi}) out of range for n={n}")
    if i_hi - i_lo < 2:
        raise ValidationError(f"interval [{i_lo}, {i_hi}) has fewer than 2 steps")


def compute_stats(path: SamplePath, basis: BasisSet, i_lo: int = 0, i_hi: int | None = None) -> QuadStats:
    """Direct summation of ``Q`` and ``R`` over steps ``[i_lo, i_hi)``."""
    if i_hi is None:
        i_hi = path.n
    _check_interval(path.n, i_lo, i_hi)
    V = design(path, basis)[i_lo:i_hi]
    Y = path.increments[i_lo:i_hi]
    Q = (V.T @ V) * path.dt
    Q = 0.5 * (Q + Q.T)
    return QuadStats(Q, V.T @ Y, float(Y @ Y), path.dt, i_lo, i_hi)


def sse_of_segment(stats: QuadStats, theta: DriftParams | np.ndarray) -> float:
    """``sum_i (Y_i - Z_i theta)^2`` with ``Z_i = V_i dt``.

    Expanded as ``sum Y^2 - 2 dt theta'R + dt theta'Q theta``.
    """
    th = theta.as_vector() if isinstance(theta, DriftParams) else np.asarray(theta, dtype=float)
    if th.shape != stats.Rtilde.shape:
        raise ValidationError(f"theta has dimension {th.size}, stats expect {stats.Rtilde.size}")
    dt = stats.dt
    return float(stats.yy - 2.0 * dt * (th @ stats.Rtilde) + dt * (th @ stats.Q @ th))


class PrefixStats:
    """Cumulative per-step contributions for O(p^2) interval queries.

    ``CQ[i]``, ``CR[i]`` and ``Cyy[i]`` hold the sums over steps ``[0, i)``.
    """

    def __init__(self, path: SamplePath, basis: BasisSet):
        V = design(path, basis)
        Y = path.increments
        n, d = V.shape
        self.path = path
        self.dt = path.dt
        self.n = n
        self.d = d
        self.CQ = np.zeros((n + 1, d, d))
        np.cumsum(V[:, :, None] * V[:, None, :] * path.dt, axis=0, out=self.CQ[1:])
        self.CR = np.zeros((n + 1, d))
        np.cumsum(V * Y[:, None], axis=0, out=self.CR[1:])
        self.Cyy = np.zeros(n + 1)
        np.cumsum(Y * Y, out=self.Cyy[1:])
        for arr in (self.CQ, self.CR, self.Cyy):
            arr.setflags(write=False)

    def stats(self, i_lo: int, i_hi: int) -> QuadStats:
        _check_interval(self.n, i_lo, i_hi)
        Q = self.CQ[i_hi] - self.CQ[i_lo]
        return QuadStats(0.5 * (Q + Q.T), self.CR[i_hi] - self.CR[i_lo],
                         float(self.Cyy[i_hi] - self.Cyy[i_lo]), self.dt, i_lo, i_hi)

    def split(self, idx: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        """Batched ``(Q_left, R_left, Q_right, R_right)`` for splits at each ``idx``."""
        idx = np.asarray(idx, dtype=int)
        QL = self.CQ[idx]
        RL = self.CR[idx]
        QR = self.CQ[self.n] - QL
        RR = self.CR[self.n] - RL
        return QL, RL, QR, RR
