"""Sample paths of the (segmented) generalised OU process.

The SDE is ``dX = (sum_i mu_i phi_i(t) - a X) dt + sigma dW`` with the drift
parameters switching once, at the first grid point ``t_i >= s0 * T``.
Paths are generated by Euler-Maruyama; the classical constant-mean case
also has an exact Gaussian-transition sampler used as a reference.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import basis as basis_mod
from .basis import BasisSet
from .exceptions import ValidationError

DEFAULT_DT = 1.0 / 252.0
DEFAULT_X0 = 0.05
SCENARIO_SIGMA = 0.2
SCENARIO_BREAK = 0.5


@dataclass(frozen=True)
class DriftParams:
    """Drift ``sum_i mu_i phi_i(t) - a X``; ``a`` is stored with a positive sign."""

    mu: tuple[float, ...]
    a: float

    def __post_init__(self) -> None:
        mu = tuple(float(m) for m in np.atleast_1d(self.mu))
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "a", float(self.a))
        if not mu:
            raise ValidationError("DriftParams needs at least one mean coefficient")
        if not all(math.isfinite(m) for m in mu) or not math.isfinite(self.a):
            raise ValidationError("DriftParams entries must be finite")

    @property
    def p(self) -> int:
        return len(self.mu)

    def as_vector(self) -> np.ndarray:
        """``(mu_1, ..., mu_p, a)``, the solution layout of ``Q theta = R``."""
        return np.array([*self.mu, self.a])

    @classmethod
    def from_vector(cls, theta) -> DriftParams:
        theta = np.asarray(theta, dtype=float)
        return cls(mu=tuple(theta[:-1]), a=theta[-1])


@dataclass(frozen=True)
class SegmentedModel:
    """Drift before and after a single break, plus a constant diffusion.

    ``s0=None`` means no break; ``theta2`` is then ignored.
    """

    theta1: DriftParams
    theta2: DriftParams
    sigma: float
    s0: float | None = None

    def __post_init__(self) -> None:
        if not (self.sigma >= 0 and math.isfinite(self.sigma)):
            raise ValidationError(f"sigma must be non-negative, got {self.sigma!r}")
        if self.s0 is not None and not (0.0 < self.s0 < 1.0):
            raise ValidationError(f"break fraction must lie in (0, 1), got {self.s0!r}")
        if self.theta1.p != self.theta2.p:
            raise ValidationError("theta1 and theta2 must have the same basis dimension")

    @classmethod
    def no_break(cls, theta: DriftParams, sigma: float) -> SegmentedModel:
        return cls(theta1=theta, theta2=theta, sigma=sigma, s0=None)


@dataclass(frozen=True)
class SamplePath:
    """Uniformly sampled values ``X_{t_0}, ..., X_{t_n}``.

    ``labels`` optionally carries one source label (e.g. a date) per point;
    it is metadata only and never enters a computation.
    """

    values: np.ndarray
    dt: float
    t0: float = 0.0
    labels: tuple[str, ...] | None = field(default=None, compare=False)

    def __post_init__(self) -> None:
        values = np.array(self.values, dtype=float)
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        if values.ndim != 1 or values.size < 3:
            raise ValidationError("a sample path needs at least 3 points (n >= 2)")
        if not (self.dt > 0 and math.isfinite(self.dt)):
            raise ValidationError(f"dt must be positive, got {self.dt!r}")
        if not np.all(np.isfinite(values)):
            bad = int(np.flatnonzero(~np.isfinite(values))[0])
            raise ValidationError(f"non-finite value at index {bad}")
        if self.labels is not None and len(self.labels) != values.size:
            raise ValidationError("labels must match the number of points")

    @property
    def n(self) -> int:
        return self.values.size - 1

    @property
    def T(self) -> float:
        return self.n * self.dt

    @property
    def times(self) -> np.ndarray:
        return self.t0 + self.dt * np.arange(self.n + 1)

    @property
    def increments(self) -> np.ndarray:
        return np.diff(self.values)


def steps_for(T: float, dt: float) -> int:
    """Number of grid steps ``n = T / dt``; rejects non-integral ratios."""
    if not (T > 0 and dt > 0 and math.isfinite(T) and math.isfinite(dt)):
        raise ValidationError(f"T and dt must be positive (T={T!r}, dt={dt!r})")
    ratio = T / dt
    n = int(round(ratio))
    if n < 2 or abs(ratio - n) > 1e-9 * max(1.0, ratio):
        raise ValidationError(f"T/dt must be an integer >= 2, got {ratio!r}")
    return n


def break_index(s0: float | None, n: int) -> int:
    """First grid index ``i`` with ``t_i >= s0 T``; ``n`` when there is no break."""
    if s0 is None:
        return n
    return int(math.ceil(s0 * n - 1e-9))


def _generator(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.Generator(np.random.Philox(seed))


def simulate_euler(
    model: SegmentedModel,
    basis: BasisSet,
    T: float,
    dt: float,
    x0: float = DEFAULT_X0,
    seed=0,
) -> SamplePath:
    """Euler-Maruyama path of the segmented model.

    The step from ``t_i`` uses the regime of ``t_i``: ``theta1`` while
    ``t_i < s0 T`` and ``theta2`` afterwards.
    """
    n = steps_for(T, dt)
    if not math.isfinite(x0):
        raise ValidationError(f"x0 must be finite, got {x0!r}")
    if model.theta1.p != basis.p:
        raise ValidationError(f"model has p={model.theta1.p} but basis has p={basis.p}")

    t = dt * np.arange(n)
    phi = basis.evaluate(t)
    k = break_index(model.s0, n)
    mu = np.empty((n, basis.p))
    mu[:k] = model.theta1.mu
    mu[k:] = model.theta2.mu
    level = np.einsum("ij,ij->i", phi, mu) * dt
    decay = np.empty(n)
    decay[:k] = 1.0 - model.theta1.a * dt
    decay[k:] = 1.0 - model.theta2.a * dt
    noise = model.sigma * math.sqrt(dt) * _generator(seed).standard_normal(n)

    x = np.empty(n + 1)
    x[0] = x0
    shock = level + noise
    cur = float(x0)
    for i in range(n):
        cur = cur * decay[i] + shock[i]
        x[i + 1] = cur
    return SamplePath(x, dt)


def simulate_exact_classical(
    mu: float,
    a: float,
    sigma: float,
    T: float,
    dt: float,
    x0: float = DEFAULT_X0,
    seed=0,
) -> SamplePath:
    """Exact transition sampling of ``dX = (mu - a X) dt + sigma dW``."""
    if not a > 0:
        raise ValidationError(f"exact sampling requires a > 0, got {a!r}")
    n = steps_for(T, dt)
    if not math.isfinite(x0):
        raise ValidationError(f"x0 must be finite, got {x0!r}")
    rho = math.exp(-a * dt)
    mean_shift = (mu / a) * (1.0 - rho)
    sd = math.sqrt(sigma**2 * (1.0 - rho * rho) / (2.0 * a))
    shock = mean_shift + sd * _generator(seed).standard_normal(n)
    x = np.empty(n + 1)
    x[0] = x0
    cur = float(x0)
    for i in range(n):
        cur = cur * rho + shock[i]
        x[i + 1] = cur
    return SamplePath(x, dt)


# Simulation study presets: scenario 1 is the classical OU process,
# scenario 2 adds the quarter-frequency cosine to the mean level.
_SCENARIOS: dict[int, dict[str, Sequence[float] | float]] = {
    1: {"mu1": (0.08,), "a1": 0.1, "mu2": (2.5,), "a2": 1.0},
    2: {"mu1": (0.08, 0.02), "a1": 0.1, "mu2": (2.5, 1.2), "a2": 1.0},
}


def scenario_model(scenario: int, with_break: bool = True) -> SegmentedModel:
    """Parameter sets of the two simulation scenarios.

    Without a break the process runs with the post-break parameters
    throughout.
    """
    if scenario not in _SCENARIOS:
        raise ValidationError(f"scenario must be 1 or 2, got {scenario!r}")
    cfg = _SCENARIOS[scenario]
    before = DriftParams(cfg["mu1"], cfg["a1"])
    after = DriftParams(cfg["mu2"], cfg["a2"])
    if with_break:
        return SegmentedModel(before, after, sigma=SCENARIO_SIGMA, s0=SCENARIO_BREAK)
    return SegmentedModel.no_break(after, SCENARIO_SIGMA)


def scenario_basis(scenario: int, dt: float = DEFAULT_DT) -> BasisSet:
    if scenario == 1:
        return basis_mod.constant()
    if scenario == 2:
        return basis_mod.cosine(dt)
    raise ValidationError(f"scenario must be 1 or 2, got {scenario!r}")
