"""Command-line interface.

Exit codes: 0 on success, 1 on validation errors, 2 on numerical failures.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from . import basis as basis_mod
from . import dataio
from .changepoint import DEFAULT_MIN_FRAC, lsse_from_profile, mll_from_profile, scan_profile
from .estimate import SIGMA_METHODS, fit_mle, sigma_hat
from .exceptions import NumericalError, ValidationError
from .existence import PENALTIES, ic_from_profile, parse_penalty
from .montecarlo import TABLE_COLUMNS, ScenarioConfig, run_scenario, table_row
from .simulate import DEFAULT_DT, DEFAULT_X0, scenario_basis, scenario_model, simulate_euler

logger = logging.getLogger("oubreak")

WINDOW_HELP = (
    "fraction of the sample kept on each side of a candidate break "
    "(default %(default)s; never fewer than p+2 steps, so segment fits stay invertible)"
)


def _common() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="random seed / Monte Carlo master seed")
    common.add_argument("--basis", choices=basis_mod.PRESETS, default="constant", help="basis preset")
    common.add_argument("--dt", type=float, default=None, help="grid step (default 1/252 for simulation)")
    common.add_argument("--min-frac", type=float, default=DEFAULT_MIN_FRAC, help=WINDOW_HELP)
    common.add_argument("--penalty", default="p1-logTdt",
                        help=f"IC penalty: one of {', '.join(PENALTIES)} (or 'all' for montecarlo)")
    common.add_argument("-v", "--verbose", action="store_true")
    return common


def _csv_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--csv", required=True, type=Path, help="input CSV with header t,x or date,price")
    p.add_argument("--T", type=float, default=None, help="declared horizon; dt = T / (rows - 1)")
    p.add_argument("--log-transform", action="store_true", help="analyse log values")
    p.add_argument("--sigma-method", choices=SIGMA_METHODS, default="realized")
    p.add_argument("--out", type=Path, default=None, help="output file (default stdout)")


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = argparse.ArgumentParser(prog="oubreak", description="Single change point in (periodic) OU drift.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", parents=[common], help="simulate a scenario path to CSV")
    p.add_argument("--scenario", type=int, choices=(1, 2), required=True)
    brk = p.add_mutually_exclusive_group()
    brk.add_argument("--break", dest="with_break", action="store_true", default=True)
    brk.add_argument("--no-break", dest="with_break", action="store_false")
    p.add_argument("--T", type=float, required=True)
    p.add_argument("--x0", type=float, default=DEFAULT_X0)
    p.add_argument("--out", type=Path, required=True)

    p = sub.add_parser("fit", parents=[common], help="drift MLE on the whole series or a segment")
    _csv_args(p)
    p.add_argument("--segment", default=None, help="step range a,b (half-open)")

    p = sub.add_parser("detect", parents=[common], help="locate a single break")
    _csv_args(p)
    p.add_argument("--method", choices=("lsse", "mll", "both"), default="both")
    p.add_argument("--profile-csv", type=Path, default=None, help="dump (index, t, objective) rows")

    p = sub.add_parser("test-existence", parents=[common], help="information-criterion test for a break")
    _csv_args(p)

    p = sub.add_parser("report", parents=[common], help="detection plus existence under all penalties")
    _csv_args(p)

    p = sub.add_parser("montecarlo", parents=[common], help="simulation study")
    p.add_argument("--scenario", type=int, choices=(1, 2), required=True)
    brk = p.add_mutually_exclusive_group()
    brk.add_argument("--break", dest="with_break", action="store_true", default=True)
    brk.add_argument("--no-break", dest="with_break", action="store_false")
    p.add_argument("--T", type=float, nargs="+", default=[5.0])
    p.add_argument("--iters", type=int, default=200)
    p.add_argument("--x0", type=float, default=DEFAULT_X0)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--known-sigma", action="store_true", help="use the true sigma instead of estimating it")
    p.add_argument("--records", action="store_true", help="include per-iteration records in JSON output")
    p.add_argument("--out", type=Path, default=None, help=".json or .csv (default JSON on stdout)")
    return parser


def _emit(text: str, out: Path | None) -> None:
    if out is None:
        sys.stdout.write(text + "\n")
    else:
        out.write_text(text + "\n")


def _load(args):
    path = dataio.load_csv(args.csv, args.T, log_transform=args.log_transform)
    basis = basis_mod.from_name(args.basis, args.dt if args.dt is not None else path.dt)
    return path, basis


def cmd_simulate(args) -> None:
    dt = args.dt if args.dt is not None else DEFAULT_DT
    path = simulate_euler(scenario_model(args.scenario, args.with_break), scenario_basis(args.scenario, dt),
                          args.T, dt, args.x0, seed=args.seed)
    dataio.write_path_csv(path, args.out)


def cmd_fit(args) -> None:
    path, basis = _load(args)
    sigma = sigma_hat(path, basis, args.sigma_method)
    lo, hi = 0, path.n
    if args.segment:
        try:
            lo, hi = (int(v) for v in args.segment.split(","))
        except ValueError:
            raise ValidationError(f"--segment must be 'a,b', got {args.segment!r}") from None
    fit = fit_mle(path, basis, lo, hi, sigma=sigma)
    doc = {"mu": list(fit.theta.mu), "a": fit.theta.a, "sigma": sigma, "loglik": fit.loglik_part,
           "segment": [lo, hi], "cond": fit.cond}
    _emit(dataio.dumps(doc), args.out)


def cmd_detect(args) -> None:
    path, basis = _load(args)
    sigma = sigma_hat(path, basis, args.sigma_method)
    prof = scan_profile(path, basis, args.min_frac)
    fits = []
    if args.method in ("lsse", "both"):
        fits.append(lsse_from_profile(prof))
    if args.method in ("mll", "both"):
        fits.append(mll_from_profile(prof, sigma))
    doc = dataio.report(fits, path, timestamp=False)
    doc["sigma"] = sigma
    doc["profile"] = {
        "index": prof.candidates,
        "t": path.t0 + prof.candidates * path.dt,
        **{f.method: f.objective_profile for f in fits},
    }
    if args.profile_csv is not None:
        dataio.write_profile_csv(fits[-1], args.profile_csv, path.t0)
    _emit(dataio.dumps(doc), args.out)


def cmd_test_existence(args) -> None:
    path, basis = _load(args)
    sigma = sigma_hat(path, basis, args.sigma_method)
    prof = scan_profile(path, basis, args.min_frac)
    res = ic_from_profile(prof, basis.p, sigma, parse_penalty(args.penalty))
    doc = {
        "ic0": res.ic0,
        "ic1": res.ic1,
        "m_hat": res.m_hat,
        "tau_hat": res.fit1.tau_index,
        "s_hat": res.fit1.s_hat,
        "date_at_tau": dataio.label_at(path, res.fit1.tau_index),
        "loglik0": res.loglik0,
        "loglik1": res.loglik1,
        "sigma": sigma,
        "penalty": res.penalty.name,
    }
    _emit(dataio.dumps(doc), args.out)


def cmd_report(args) -> None:
    path, basis = _load(args)
    sigma = sigma_hat(path, basis, args.sigma_method)
    prof = scan_profile(path, basis, args.min_frac)
    results = [lsse_from_profile(prof), mll_from_profile(prof, sigma)]
    results += [ic_from_profile(prof, basis.p, sigma, pen) for pen in PENALTIES.values()]
    _emit(dataio.dumps(dataio.report(results, path)), args.out)


def cmd_montecarlo(args) -> None:
    dt = args.dt if args.dt is not None else DEFAULT_DT
    penalty = "p1-logTdt" if args.penalty == "all" else args.penalty
    summaries = []
    for T in args.T:
        cfg = ScenarioConfig(scenario=args.scenario, with_break=args.with_break, T=T, dt=dt, x0=args.x0,
                             iterations=args.iters, master_seed=args.seed, penalty=penalty,
                             min_frac=args.min_frac, known_sigma=args.known_sigma)
        logger.info("scenario %d, break=%s, T=%g: %d iterations", args.scenario, args.with_break, T, args.iters)
        summaries.append(run_scenario(cfg, workers=args.workers))
    if args.out is not None and args.out.suffix.lower() == ".csv":
        dataio.write_rows_csv([table_row(s) for s in summaries], TABLE_COLUMNS, args.out)
        return
    docs = []
    for s in summaries:
        d = s.to_dict()
        if not args.records:
            d.pop("iteration_records")
        if args.penalty != "all":
            d["detection_rate"] = {args.penalty: d["detection_rate"][args.penalty]}
            d["pa"] = {args.penalty: d["pa"][args.penalty]}
            for key in ("pa_break", "pa_nobreak"):
                if d[key] is not None:
                    d[key] = d["pa"]
        docs.append(d)
    _emit(dataio.dumps({"results": docs}), args.out)


COMMANDS = {
    "simulate": cmd_simulate,
    "fit": cmd_fit,
    "detect": cmd_detect,
    "test-existence": cmd_test_existence,
    "report": cmd_report,
    "montecarlo": cmd_montecarlo,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        if args.penalty != "all" or args.command != "montecarlo":
            parse_penalty(args.penalty)
        COMMANDS[args.command](args)
    except (NumericalError, np.linalg.LinAlgError) as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return 2
    except (ValidationError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
