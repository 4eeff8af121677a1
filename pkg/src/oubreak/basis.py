"""Periodic orthonormal basis functions for the time-varying mean level.

The mean level of the drift is ``L(t) = sum_i mu_i * phi_i(t)``.  A
:class:`BasisSet` bundles the ``phi_i`` with their common period.  Two
presets are shipped: a constant basis (classical OU) and a constant plus a
quarter-frequency cosine whose period is four grid steps.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .exceptions import BasisError, ValidationError

BasisFunction = Callable[[np.ndarray], np.ndarray]

PRESETS = ("constant", "cosine")

PERIODICITY_RTOL = 1e-9
ORTHONORMALITY_ATOL = 1e-6
QUADRATURE_NODES = 10_001


@dataclass(frozen=True)
class BasisSet:
    """A set of ``p`` periodic basis functions sharing one period.

    Parameters
    ----------
    functions : sequence of callables
        Each maps an array of times to an array of the same shape.
    period : float
        Common period ``v > 0``.
    name : str
        Label used in reports.
    """

    functions: tuple[BasisFunction, ...]
    period: float
    name: str = "custom"

    def __post_init__(self) -> None:
        object.__setattr__(self, "functions", tuple(self.functions))
        if len(self.functions) < 1:
            raise ValidationError("a basis needs at least one function")
        if not (self.period > 0 and math.isfinite(self.period)):
            raise ValidationError(f"period must be positive and finite, got {self.period!r}")

    @property
    def p(self) -> int:
        return len(self.functions)

    def evaluate(self, t) -> np.ndarray:
        """Evaluate all basis functions.

        A scalar ``t`` gives a vector of length ``p``; an array of shape
        ``(m,)`` gives a matrix of shape ``(m, p)``.
        """
        t_arr = np.asarray(t, dtype=float)
        if not np.all(np.isfinite(t_arr)):
            raise ValidationError("basis evaluation requires finite times")
        flat = np.atleast_1d(t_arr)
        cols = [np.broadcast_to(np.asarray(f(flat), dtype=float), flat.shape) for f in self.functions]
        out = np.stack(cols, axis=-1)
        return out[0] if t_arr.ndim == 0 else out


def evaluate(basis: BasisSet, t) -> np.ndarray:
    """Functional alias for :meth:`BasisSet.evaluate`."""
    return basis.evaluate(t)


def _ones(t: np.ndarray) -> np.ndarray:
    return np.ones_like(t, dtype=float)


def constant() -> BasisSet:
    """The one-function basis ``{1}``; any period works, 1 is used."""
    return BasisSet((_ones,), period=1.0, name="constant")


def cosine(dt: float) -> BasisSet:
    """``{1, sqrt(2) cos(pi t / (2 dt))}`` with period ``4 dt``."""
    if not (dt > 0 and math.isfinite(dt)):
        raise ValidationError(f"cosine basis needs a positive dt, got {dt!r}")
    scale = math.pi / (2.0 * dt)

    def _cos(t: np.ndarray) -> np.ndarray:
        return math.sqrt(2.0) * np.cos(scale * t)

    return BasisSet((_ones, _cos), period=4.0 * dt, name="cosine")


def from_name(name: str, dt: float | None = None) -> BasisSet:
    """Build a preset by name (``constant`` or ``cosine``)."""
    if name == "constant":
        return constant()
    if name == "cosine":
        if dt is None:
            raise ValidationError("the cosine basis requires dt")
        return cosine(dt)
    raise ValidationError(f"unknown basis preset {name!r}; expected one of {PRESETS}")


@dataclass
class BasisReport:
    """Residuals from :func:`validate`.

    ``gram_residuals`` is keyed by 1-based pairs ``(j, k)`` with ``j <= k``.
    """

    periodicity_residuals: dict[int, float] = field(default_factory=dict)
    gram_residuals: dict[tuple[int, int], float] = field(default_factory=dict)
    passed: bool = True
    failure: str | None = None
    worst_pair: tuple[int, int] | None = None
    worst_residual: float = 0.0


def validate(basis: BasisSet, *, raise_on_failure: bool = False, n_periods: int = 3) -> BasisReport:
    """Check periodicity and orthonormality over one period.

    Orthonormality uses the composite trapezoid rule on
    ``QUADRATURE_NODES`` nodes per period: ``(1/v) int_0^v phi_j phi_k dt``
    must equal the Kronecker delta within ``ORTHONORMALITY_ATOL``.
    Periodicity is checked on a grid spanning ``n_periods`` periods with
    relative tolerance ``PERIODICITY_RTOL``.
    """
    v = basis.period
    report = BasisReport()

    grid = np.linspace(0.0, n_periods * v, 997)
    here = basis.evaluate(grid)
    shifted = basis.evaluate(grid + v)
    for i in range(basis.p):
        scale = np.maximum(1.0, np.abs(here[:, i]))
        res = float(np.max(np.abs(shifted[:, i] - here[:, i]) / scale))
        report.periodicity_residuals[i + 1] = res
        if res > PERIODICITY_RTOL and report.passed:
            report.passed = False
            report.failure = f"phi_{i + 1} is not {v}-periodic (residual {res:.3g})"
            report.worst_pair = (i + 1, i + 1)
            report.worst_residual = res

    nodes = np.linspace(0.0, v, QUADRATURE_NODES)
    values = basis.evaluate(nodes)
    for j in range(basis.p):
        for k in range(j, basis.p):
            integral = np.trapezoid(values[:, j] * values[:, k], nodes) / v
            report.gram_residuals[(j + 1, k + 1)] = float(abs(integral - (1.0 if j == k else 0.0)))
    pair, res = max(report.gram_residuals.items(), key=lambda kv: kv[1])
    if res > ORTHONORMALITY_ATOL:
        # orthonormality failures take precedence in the summary
        report.passed = False
        report.worst_pair = pair
        report.worst_residual = res
        report.failure = f"pair ({pair[0]},{pair[1]}) is not orthonormal (residual {res:.3g})"

    if raise_on_failure and not report.passed:
        raise BasisError(report.failure, pair=report.worst_pair, residual=report.worst_residual)
    return report


def from_callables(functions: Sequence[BasisFunction], period: float, name: str = "custom") -> BasisSet:
    """Build and validate a user basis, raising :class:`BasisError` on failure."""
    basis = BasisSet(tuple(functions), period=period, name=name)
    validate(basis, raise_on_failure=True)
    return basis
