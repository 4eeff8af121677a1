"""CSV ingestion, log transform and JSON reporting.

Two CSV layouts are accepted: ``t,x`` (numeric time and value) and
``date,price``.  Dates are metadata only; every computation runs on a
uniform index grid with ``dt = T / n``.
"""

from __future__ import annotations

import csv
import datetime as _dt
import json
import math
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .changepoint import ChangePointFit
from .existence import ICResult
from .exceptions import ValidationError
from .simulate import DEFAULT_DT, DriftParams, SamplePath

HEADERS = {("t", "x"), ("date", "price")}
SPACING_RTOL = 1e-9


def _parse_float(cell: str, line: int, column: str) -> float:
    try:
        value = float(cell)
    except ValueError:
        raise ValidationError(f"line {line}: non-numeric {column} value {cell!r}") from None
    if not math.isfinite(value):
        raise ValidationError(f"line {line}: non-finite {column} value {cell!r}")
    return value


def _parse_date(cell: str, line: int) -> _dt.datetime:
    try:
        return _dt.datetime.fromisoformat(cell.strip())
    except ValueError:
        raise ValidationError(f"line {line}: unparseable date {cell!r}") from None


def load_csv(file: str | Path, T: float | None = None, *, log_transform: bool = False) -> SamplePath:
    """Read a series into a :class:`SamplePath`.

    Parameters
    ----------
    file : path
        CSV with header ``t,x`` or ``date,price`` and at least 3 data rows.
    T : float, optional
        Declared horizon; ``dt = T / n`` for ``n + 1`` rows.  If omitted,
        ``dt`` is taken from the ``t`` column (which must be uniformly
        spaced) or, for dated files, one trading day ``1/252``.
    log_transform : bool
        Take natural logs of the values; non-positive values are rejected
        with their line number.
    """
    with open(file, newline="") as fh:
        rows = list(csv.reader(fh))
    rows = [r for r in rows if any(c.strip() for c in r)]
    if not rows:
        raise ValidationError(f"{file}: empty file")
    header = tuple(c.strip().lower() for c in rows[0])
    if header not in HEADERS:
        raise ValidationError(f"{file}: header must be 't,x' or 'date,price', got {','.join(header)!r}")
    body = rows[1:]
    if len(body) < 3:
        raise ValidationError(f"{file}: need at least 3 data rows, got {len(body)}")

    keys, values = [], []
    for offset, row in enumerate(body):
        line = offset + 2
        if len(row) != 2:
            raise ValidationError(f"line {line}: expected 2 columns, got {len(row)}")
        if header[0] == "t":
            keys.append(_parse_float(row[0], line, "t"))
        else:
            keys.append(_parse_date(row[0], line))
        values.append(_parse_float(row[1], line, header[1]))

    for offset in range(1, len(keys)):
        if not keys[offset] > keys[offset - 1]:
            raise ValidationError(f"line {offset + 2}: {header[0]} values must be strictly increasing")

    n = len(values) - 1
    labels = None  # only dated files carry labels
    t0 = 0.0
    if header[0] == "t":
        t = np.asarray(keys)
        steps = np.diff(t)
        if T is None:
            dt = (t[-1] - t[0]) / n
            if np.max(np.abs(steps - dt)) > SPACING_RTOL * max(abs(dt), 1.0):
                raise ValidationError(f"{file}: t column is not uniformly spaced; pass T to use the index grid")
            t0 = float(t[0])
        else:
            dt = T / n
    else:
        dt = DEFAULT_DT if T is None else T / n
        labels = tuple(row[0].strip() for row in body)
    if not dt > 0:
        raise ValidationError(f"declared horizon must be positive, got T={T!r}")

    arr = np.asarray(values)
    if log_transform:
        bad = np.flatnonzero(arr <= 0)
        if bad.size:
            raise ValidationError(f"line {int(bad[0]) + 2}: value {arr[bad[0]]!r} is not positive; cannot take logs")
        arr = np.log(arr)
    return SamplePath(arr, dt, t0=t0, labels=labels)


def log_transform(path: SamplePath) -> SamplePath:
    """Elementwise natural log on the same grid."""
    bad = np.flatnonzero(path.values <= 0)
    if bad.size:
        raise ValidationError(f"point {int(bad[0])}: value {path.values[bad[0]]!r} is not positive")
    return SamplePath(np.log(path.values), path.dt, path.t0, path.labels)


def write_path_csv(path: SamplePath, file: str | Path) -> None:
    with open(file, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t", "x"])
        for t, x in zip(path.times, path.values):
            w.writerow([repr(float(t)), repr(float(x))])


def write_profile_csv(fit: ChangePointFit, file: str | Path, t0: float = 0.0) -> None:
    with open(file, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["index", "t", "objective"])
        for i, t, obj in fit.profile_rows(t0):
            w.writerow([i, repr(t), repr(obj)])


def write_rows_csv(rows: Sequence[dict], columns: Sequence[str], file: str | Path) -> None:
    with open(file, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=list(columns))
        w.writeheader()
        for row in rows:
            w.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in row.items()})


def theta_dict(theta: DriftParams) -> dict:
    return {"mu": list(theta.mu), "a": theta.a}


def jsonable(obj):
    """Convert numpy scalars/arrays and non-finite floats for ``json.dumps``."""
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [jsonable(v) for v in obj.tolist()]
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        value = float(obj)
        return value if math.isfinite(value) else None
    return obj


def dumps(doc) -> str:
    # repr-based float formatting round-trips every double exactly
    return json.dumps(jsonable(doc), indent=2, allow_nan=False)


def label_at(path: SamplePath, index: int) -> str | None:
    if path.labels is None:
        return None
    return path.labels[index]


def fit_record(fit: ChangePointFit, path: SamplePath) -> dict:
    return {
        "method": fit.method,
        "tau_index": fit.tau_index,
        "tau_time": fit.tau_time,
        "s_hat": fit.s_hat,
        "date_at_tau": label_at(path, fit.tau_index),
        "theta1": theta_dict(fit.theta1),
        "theta2": theta_dict(fit.theta2),
        "sigma": fit.sigma,
        "objective": fit.objective_at_opt,
        "window": list(fit.window),
    }


def ic_record(res: ICResult, path: SamplePath) -> dict:
    rec = fit_record(res.fit1, path)
    rec.update(
        method="ic",
        sigma=res.sigma,
        loglik0=res.loglik0,
        loglik1=res.loglik1,
        ic0=res.ic0,
        ic1=res.ic1,
        m_hat=res.m_hat,
        penalty=res.penalty.name,
        theta0=theta_dict(res.fit0.theta),
    )
    return rec


REPORT_FIELDS = (
    "method", "tau_index", "tau_time", "s_hat", "date_at_tau", "theta1", "theta2", "sigma",
    "loglik0", "loglik1", "ic0", "ic1", "m_hat", "penalty", "window",
)


def report(results: Iterable[ChangePointFit | ICResult], path: SamplePath, *, timestamp: bool = True) -> dict:
    """Assemble a JSON-ready document with one record per analysis.

    Every record carries all ``REPORT_FIELDS`` (``None`` where a field does
    not apply).  ``generated_at`` is the only non-deterministic field.
    """
    records = []
    for res in results:
        if isinstance(res, ICResult):
            rec = ic_record(res, path)
        elif isinstance(res, ChangePointFit):
            rec = fit_record(res, path)
        else:
            raise ValidationError(f"cannot report object of type {type(res).__name__}")
        records.append({**{k: None for k in REPORT_FIELDS}, **rec})
    if not records:
        raise ValidationError("nothing to report: no completed analyses")
    doc = {
        "n": path.n,
        "dt": path.dt,
        "T": path.T,
        "analyses": records,
    }
    if timestamp:
        doc["generated_at"] = _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")
    return doc
