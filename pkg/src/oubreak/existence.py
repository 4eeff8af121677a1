"""Information-criterion test for the existence of a single break.

``IC(m) = -2 loglik_m + (m + 1) h(p) phi(T)`` for ``m in {0, 1}``; a break
is declared (``m_hat = 1``) when ``IC(0) >= IC(1)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .basis import BasisSet
from .changepoint import DEFAULT_MIN_FRAC, ChangePointFit, ScanProfile, mll_from_profile, scan_profile
from .estimate import SegmentFit, fit_stats, sigma_hat
from .exceptions import OUBreakError, ValidationError
from .simulate import SamplePath


@dataclass(frozen=True)
class Penalty:
    """``h(p) * phi(T)`` with ``h = p + extra`` and ``phi`` either ``log T`` or ``log(T/dt)``."""

    extra: int = 1
    phi: str = "logTdt"

    def __post_init__(self) -> None:
        if self.extra not in (1, 2):
            raise ValidationError(f"penalty h(p) must be p+1 or p+2, got p+{self.extra}")
        if self.phi not in ("logT", "logTdt"):
            raise ValidationError(f"penalty phi must be 'logT' or 'logTdt', got {self.phi!r}")

    @property
    def name(self) -> str:
        return f"p{self.extra}-{self.phi}"

    def value(self, p: int, T: float, dt: float) -> float:
        arg = T if self.phi == "logT" else T / dt
        if not arg > 1.0:
            raise ValidationError(f"penalty {self.name} is not positive for T={T}, dt={dt}")
        return (p + self.extra) * math.log(arg)


PENALTIES: dict[str, Penalty] = {
    pen.name: pen
    for pen in (Penalty(1, "logT"), Penalty(2, "logT"), Penalty(1, "logTdt"), Penalty(2, "logTdt"))
}
DEFAULT_PENALTY = PENALTIES["p1-logTdt"]


def parse_penalty(name: str | Penalty) -> Penalty:
    if isinstance(name, Penalty):
        return name
    try:
        return PENALTIES[name]
    except KeyError:
        raise ValidationError(f"unknown penalty {name!r}; expected one of {sorted(PENALTIES)}") from None


@dataclass
class ICResult:
    ic0: float
    ic1: float
    m_hat: int
    fit0: SegmentFit
    fit1: ChangePointFit
    loglik0: float
    loglik1: float
    penalty: Penalty
    sigma: float
    window: tuple[int, int]


def decide(loglik0: float, loglik1: float, p: int, T: float, dt: float, penalty: Penalty) -> tuple[float, float, int]:
    """``(IC(0), IC(1), m_hat)`` from the two maximised log-likelihoods."""
    pen = penalty.value(p, T, dt)
    ic0 = -2.0 * loglik0 + pen
    ic1 = -2.0 * loglik1 + 2.0 * pen
    return ic0, ic1, int(ic0 >= ic1)


def ic_from_profile(prof: ScanProfile, p: int, sigma: float, penalty: Penalty) -> ICResult:
    path = prof.path
    fit0 = fit_stats(prof.prefix.stats(0, path.n), sigma=sigma)
    fit1 = mll_from_profile(prof, sigma)
    ll0 = fit0.loglik_part
    ll1 = fit1.objective_at_opt
    ic0, ic1, m_hat = decide(ll0, ll1, p, path.T, path.dt, penalty)
    return ICResult(ic0, ic1, m_hat, fit0, fit1, ll0, ll1, penalty, sigma, prof.window)


def ic_test(
    path: SamplePath,
    basis: BasisSet,
    penalty: Penalty | str = DEFAULT_PENALTY,
    *,
    sigma: float | None = None,
    sigma_method: str = "realized",
    min_frac: float = DEFAULT_MIN_FRAC,
) -> ICResult:
    """Compare the no-break fit with the best single-break fit.

    ``sigma`` defaults to a full-path estimate, shared by both models.
    """
    penalty = parse_penalty(penalty)
    if sigma is None:
        sigma = sigma_hat(path, basis, sigma_method)
    prof = scan_profile(path, basis, min_frac)
    return ic_from_profile(prof, basis.p, sigma, penalty)


def empirical_power_and_level(config, penalty: Penalty | str, iterations: int, seed: int) -> dict:
    """Detection frequency of ``ic_test`` on freshly simulated scenario paths.

    ``config`` needs ``scenario``, ``with_break``, ``T``, ``dt``, ``x0`` and
    ``min_frac`` attributes (a :class:`~oubreak.montecarlo.ScenarioConfig`
    fits).  Returns the empirical power (break paths, ``PA(1)``) or level
    (no-break paths, ``1 - PA(0)``) in percent, plus the failure count.
    """
    from .montecarlo import derive_seed
    from .simulate import scenario_basis, scenario_model, simulate_euler

    if iterations < 1:
        raise ValidationError("iterations must be at least 1")
    penalty = parse_penalty(penalty)
    model = scenario_model(config.scenario, config.with_break)
    basis = scenario_basis(config.scenario, config.dt)
    detections = failures = 0
    for k in range(iterations):
        path = simulate_euler(model, basis, config.T, config.dt, config.x0, seed=derive_seed(seed, k))
        try:
            res = ic_test(path, basis, penalty, min_frac=config.min_frac)
        except OUBreakError:
            failures += 1
            continue
        detections += res.m_hat
    done = iterations - failures
    rate = 100.0 * detections / done if done else float("nan")
    return {
        "penalty": penalty.name,
        "power": rate if config.with_break else None,
        "level": None if config.with_break else rate,
        "iterations": iterations,
        "failures": failures,
    }
