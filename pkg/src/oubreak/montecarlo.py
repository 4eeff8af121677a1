"""Monte Carlo study of break location and existence on the two scenarios.

Each iteration ``k`` draws its noise from ``derive_seed(master_seed, k)``,
so any subset of iterations can be replayed alone and results do not
depend on how iterations are distributed over worker processes.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .changepoint import DEFAULT_MIN_FRAC, lsse_from_profile, mll_from_profile, scan_profile
from .estimate import fit_stats, sigma_hat
from .exceptions import OUBreakError, ValidationError
from .existence import DEFAULT_PENALTY, PENALTIES, Penalty, decide, parse_penalty
from .simulate import (
    DEFAULT_DT,
    DEFAULT_X0,
    SCENARIO_BREAK,
    SCENARIO_SIGMA,
    scenario_basis,
    scenario_model,
    simulate_euler,
    steps_for,
)

logger = logging.getLogger(__name__)

MAX_FAILURE_FRACTION = 0.01


def derive_seed(master_seed: int, k: int) -> int:
    """64-bit seed for iteration ``k``, mixed by numpy's ``SeedSequence``."""
    return int(np.random.SeedSequence([int(master_seed), int(k)]).generate_state(1, np.uint64)[0])


@dataclass(frozen=True)
class ScenarioConfig:
    scenario: int
    with_break: bool = True
    T: float = 5.0
    dt: float = DEFAULT_DT
    x0: float = DEFAULT_X0
    iterations: int = 200
    master_seed: int = 0
    penalty: Penalty = DEFAULT_PENALTY
    min_frac: float = DEFAULT_MIN_FRAC
    known_sigma: bool = False
    sigma_method: str = "realized"

    def __post_init__(self) -> None:
        if self.scenario not in (1, 2):
            raise ValidationError(f"scenario must be 1 or 2, got {self.scenario!r}")
        if self.iterations < 1:
            raise ValidationError("iterations must be at least 1")
        object.__setattr__(self, "penalty", parse_penalty(self.penalty))
        steps_for(self.T, self.dt)


@dataclass
class IterationRecord:
    index: int
    seed: int
    s_lsse: float | None = None
    s_mll: float | None = None
    tau_lsse: int | None = None
    tau_mll: int | None = None
    sigma: float | None = None
    loglik0: float | None = None
    loglik1: float | None = None
    m_hat: dict[str, int] = field(default_factory=dict)
    error: str | None = None


def run_iteration(config: ScenarioConfig, k: int) -> IterationRecord:
    seed = derive_seed(config.master_seed, k)
    rec = IterationRecord(index=k, seed=seed)
    model = scenario_model(config.scenario, config.with_break)
    basis = scenario_basis(config.scenario, config.dt)
    path = simulate_euler(model, basis, config.T, config.dt, config.x0, seed=seed)
    try:
        sigma = SCENARIO_SIGMA if config.known_sigma else sigma_hat(path, basis, config.sigma_method)
        prof = scan_profile(path, basis, config.min_frac)
        lsse = lsse_from_profile(prof)
        mll = mll_from_profile(prof, sigma)
        fit0 = fit_stats(prof.prefix.stats(0, path.n), sigma=sigma)
    except OUBreakError as exc:
        rec.error = f"{type(exc).__name__}: {exc}"
        return rec
    rec.s_lsse, rec.tau_lsse = lsse.s_hat, lsse.tau_index
    rec.s_mll, rec.tau_mll = mll.s_hat, mll.tau_index
    rec.sigma = sigma
    rec.loglik0 = fit0.loglik_part
    rec.loglik1 = mll.objective_at_opt
    for name, pen in PENALTIES.items():
        rec.m_hat[name] = decide(rec.loglik0, rec.loglik1, basis.p, path.T, path.dt, pen)[2]
    return rec


def _run_chunk(config: ScenarioConfig, ks: list[int]) -> list[IterationRecord]:
    return [run_iteration(config, k) for k in ks]


@dataclass
class MCSummary:
    """Aggregates over successful iterations.

    ``detection_rate`` is the percentage of ``m_hat = 1`` per penalty:
    empirical power on break paths and empirical level on no-break paths.
    ``pa`` is the percent accuracy ``PA(m0)`` against the true break count.
    """

    config: ScenarioConfig
    mean_s_lsse: float
    mse_s_lsse: float | None
    mean_s_mll: float
    mse_s_mll: float | None
    detection_rate: dict[str, float]
    pa: dict[str, float]
    failures: int
    iteration_records: list[IterationRecord]

    @property
    def pa_break(self) -> dict[str, float] | None:
        return self.pa if self.config.with_break else None

    @property
    def pa_nobreak(self) -> dict[str, float] | None:
        return None if self.config.with_break else self.pa

    def to_dict(self) -> dict:
        cfg = asdict(self.config)
        cfg["penalty"] = self.config.penalty.name
        return {
            "config": cfg,
            "mean_s_lsse": self.mean_s_lsse,
            "mse_s_lsse": self.mse_s_lsse,
            "mean_s_mll": self.mean_s_mll,
            "mse_s_mll": self.mse_s_mll,
            "detection_rate": self.detection_rate,
            "pa": self.pa,
            "pa_break": self.pa_break,
            "pa_nobreak": self.pa_nobreak,
            "failures": self.failures,
            "iteration_records": [asdict(r) for r in self.iteration_records],
        }


def summarise(config: ScenarioConfig, records: list[IterationRecord]) -> MCSummary:
    records = sorted(records, key=lambda r: r.index)
    ok = [r for r in records if r.error is None]
    failures = len(records) - len(ok)
    if failures > MAX_FAILURE_FRACTION * len(records):
        first = next(r.error for r in records if r.error is not None)
        raise OUBreakError(f"{failures} of {len(records)} iterations failed; first: {first}")
    if not ok:
        raise OUBreakError("no iteration completed")
    s_lsse = np.array([r.s_lsse for r in ok])
    s_mll = np.array([r.s_mll for r in ok])
    mse_lsse = mse_mll = None
    if config.with_break:
        mse_lsse = float(np.mean((s_lsse - SCENARIO_BREAK) ** 2))
        mse_mll = float(np.mean((s_mll - SCENARIO_BREAK) ** 2))
    truth = 1 if config.with_break else 0
    detection, pa = {}, {}
    for name in PENALTIES:
        hits = sum(r.m_hat[name] for r in ok)
        detection[name] = 100.0 * hits / len(ok)
        pa[name] = 100.0 * sum(r.m_hat[name] == truth for r in ok) / len(ok)
    return MCSummary(
        config=config,
        mean_s_lsse=float(np.mean(s_lsse)),
        mse_s_lsse=mse_lsse,
        mean_s_mll=float(np.mean(s_mll)),
        mse_s_mll=mse_mll,
        detection_rate=detection,
        pa=pa,
        failures=failures,
        iteration_records=records,
    )


def run_scenario(config: ScenarioConfig, workers: int = 1) -> MCSummary:
    """Run ``config.iterations`` independent iterations and aggregate them.

    With ``workers > 1`` iterations are spread over processes; the summary
    is identical to the serial one.
    """
    ks = list(range(config.iterations))
    if workers <= 1:
        records = _run_chunk(config, ks)
    else:
        chunks = [ks[i::workers] for i in range(workers)]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            records = [r for part in pool.map(_run_chunk, [config] * workers, chunks) for r in part]
    summary = summarise(config, records)
    if summary.failures:
        logger.warning("%d iteration(s) failed in scenario %d, T=%g", summary.failures, config.scenario, config.T)
    return summary


TABLE_COLUMNS = (
    "scenario", "with_break", "T", "iterations",
    "mean_s_lsse", "mse_s_lsse", "mean_s_mll", "mse_s_mll",
    *(f"rate_{name}" for name in PENALTIES),
    "failures",
)


def table_row(summary: MCSummary) -> dict:
    """One CSV row: location statistics and detection rates per penalty."""
    cfg = summary.config
    row = {
        "scenario": cfg.scenario,
        "with_break": int(cfg.with_break),
        "T": cfg.T,
        "iterations": cfg.iterations,
        "mean_s_lsse": summary.mean_s_lsse,
        "mse_s_lsse": summary.mse_s_lsse,
        "mean_s_mll": summary.mean_s_mll,
        "mse_s_mll": summary.mse_s_mll,
        "failures": summary.failures,
    }
    for name, rate in summary.detection_rate.items():
        row[f"rate_{name}"] = rate
    return row


def scaled_error_quantile(summary: MCSummary, q: float = 0.95, method: str = "lsse") -> float:
    """Quantile of ``T |s_hat - s0|`` over successful iterations."""
    key = "s_lsse" if method == "lsse" else "s_mll"
    errs = [summary.config.T * abs(getattr(r, key) - SCENARIO_BREAK) for r in summary.iteration_records if r.error is None]
    return float(np.quantile(errs, q)) if errs else math.nan
