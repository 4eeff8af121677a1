"""Single change-point estimation and testing for (periodic) Ornstein-Uhlenbeck drift."""

from .basis import BasisSet, constant, cosine, from_name, validate
from .changepoint import ChangePointFit, admissible_window, scan_lsse, scan_mll
from .dataio import load_csv, log_transform, report
from .estimate import SegmentFit, estimate_sigma, fit_mle, loglik_segment
from .exceptions import BasisError, NumericalError, OUBreakError, ValidationError
from .existence import ICResult, Penalty, PENALTIES, empirical_power_and_level, ic_test
from .montecarlo import MCSummary, ScenarioConfig, run_scenario
from .quadrature import QuadStats, compute_stats, sse_of_segment
from .simulate import DriftParams, SamplePath, SegmentedModel, simulate_euler, simulate_exact_classical

__version__ = "0.1.0"

__all__ = [
    "BasisError", "BasisSet", "ChangePointFit", "DriftParams", "ICResult", "MCSummary", "NumericalError",
    "OUBreakError", "PENALTIES", "Penalty", "QuadStats", "SamplePath", "ScenarioConfig", "SegmentFit",
    "SegmentedModel", "ValidationError", "admissible_window", "compute_stats", "constant", "cosine",
    "empirical_power_and_level", "estimate_sigma", "fit_mle", "from_name", "ic_test", "load_csv",
    "log_transform", "loglik_segment", "report", "run_scenario", "scan_lsse", "scan_mll",
    "simulate_euler", "simulate_exact_classical", "sse_of_segment", "validate",
]
