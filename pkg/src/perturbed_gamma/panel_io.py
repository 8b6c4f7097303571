"""Panel CSV files and estimation reports.

Panel files are long format with header ``item,time,value``: one row per
observation, ``value`` the cumulative degradation level at ``time``.  The
first increment of an item is measured from ``D(0) = 0`` unless a
``baseline`` column is present, in which case the baseline of the item's
first row is subtracted.  Pre-differenced files (``value`` already holds
increments) are read with ``increments=True``.
"""
from __future__ import annotations

import csv
import io
import json
import math
from collections import OrderedDict
from pathlib import Path
from typing import NamedTuple, TextIO

import numpy as np

from .asymptotics import design_constants
from .estimate import EstimateResult, EstimateStatus
from .inference import PARAM_NAMES, ci_ratio, confidence_intervals, plugin_cov, test_tau2_zero
from .model import IncrementPanel, ObservationGrid

REQUIRED_COLUMNS = ("item", "time", "value")


class PanelFormatError(ValueError):
    """Panel file cannot be turned into a grid and increments."""

    def __init__(self, message: str, row: int | None = None):
        self.row = row
        super().__init__(f"row {row}: {message}" if row is not None else message)


class MalformedRow(PanelFormatError):
    pass


class NonMonotoneTime(PanelFormatError):
    pass


class EmptyItem(PanelFormatError):
    pass


class PanelData(NamedTuple):
    grid: ObservationGrid
    panel: IncrementPanel
    item_ids: list[str]


def _number(text: str, column: str, row: int) -> float:
    try:
        value = float(text)
    except (TypeError, ValueError):
        raise MalformedRow(f"{column} {text!r} is not a number", row) from None
    if not math.isfinite(value):
        raise MalformedRow(f"{column} {text!r} is not finite", row)
    return value


def read_panel(handle: TextIO, increments: bool = False) -> PanelData:
    reader = csv.reader(handle)
    try:
        header = [h.strip() for h in next(reader)]
    except StopIteration:
        raise PanelFormatError("empty file; expected header item,time,value", 1) from None
    missing = [c for c in REQUIRED_COLUMNS if c not in header]
    if missing:
        raise MalformedRow(f"header lacks column(s) {', '.join(missing)}", 1)
    col = {name: header.index(name) for name in header}
    has_baseline = "baseline" in col and not increments

    rows: OrderedDict[str, list[tuple[float, float, float, int]]] = OrderedDict()
    for line_no, fields in enumerate(reader, start=2):
        if not fields or all(not f.strip() for f in fields):
            continue
        if len(fields) != len(header):
            raise MalformedRow(f"expected {len(header)} fields, found {len(fields)}", line_no)
        item = fields[col["item"]].strip()
        if not item:
            raise EmptyItem("item identifier is empty", line_no)
        t = _number(fields[col["time"]], "time", line_no)
        v = _number(fields[col["value"]], "value", line_no)
        b = _number(fields[col["baseline"]], "baseline", line_no) if has_baseline else 0.0
        rows.setdefault(item, []).append((t, v, b, line_no))
    if not rows:
        raise EmptyItem("file has a header but no observations", 1)

    times, incs = [], []
    for item, obs in rows.items():
        obs.sort(key=lambda o: (o[0], o[3]))
        t = np.array([o[0] for o in obs])
        if t[0] <= 0:
            raise NonMonotoneTime(f"item {item!r}: time {t[0]!r} must be > 0 (t = 0 is the origin)", obs[0][3])
        dup = np.flatnonzero(np.diff(t) <= 0)
        if dup.size:
            bad = obs[dup[0] + 1]
            raise NonMonotoneTime(f"item {item!r}: time {bad[0]!r} is repeated", bad[3])
        v = np.array([o[1] for o in obs])
        if not increments:
            v = np.diff(v, prepend=obs[0][2])
        times.append(t)
        incs.append(v)
    return PanelData(ObservationGrid(tuple(times)), IncrementPanel(tuple(incs)), list(rows))


def parse_panel_csv(path: str | Path, increments: bool = False) -> PanelData:
    """Read a panel file into ``(grid, panel, item_ids)``; items keep first-appearance order."""
    with open(path, newline="", encoding="utf-8") as fh:
        return read_panel(fh, increments=increments)


def format_panel(
    grid: ObservationGrid,
    panel: IncrementPanel,
    item_ids: list[str] | None = None,
    increments: bool = False,
) -> str:
    """Serialize with 17 significant digits so doubles survive the round trip."""
    panel.check_matches(grid)
    ids = item_ids or [str(i + 1) for i in range(grid.n_items)]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(REQUIRED_COLUMNS)
    for item, t, d in zip(ids, grid.times, panel.increments):
        values = d if increments else np.cumsum(d)
        for tj, vj in zip(t, values):
            w.writerow([item, f"{tj:.17g}", f"{vj:.17g}"])
    return buf.getvalue()


def write_panel_csv(path: str | Path, grid: ObservationGrid, panel: IncrementPanel, **kwargs) -> None:
    Path(path).write_text(format_panel(grid, panel, **kwargs), encoding="utf-8")


def estimation_report(
    est: EstimateResult,
    grid: ObservationGrid,
    level: float = 0.95,
    significance: float = 0.05,
) -> dict:
    """Estimates, standard errors, intervals and sub-model tests as a JSON-ready dict.

    ``std_errs`` carries both the asymptotic standard deviation (square root
    of the diagonal of ``M``) and the standard error of the estimate, which
    is that value divided by ``sqrt(sum N_i)``.
    """
    c = design_constants(grid)
    report: dict = {
        "status": est.status.value,
        "total_obs": est.total_obs,
        "n_items": grid.n_items,
        "moments": dict(zip(("m1", "cm2", "cm3"), map(float, est.m_hat))),
        "design_constants": c.as_dict(),
    }
    if est.status is EstimateStatus.NON_INVERTIBLE:
        return report
    cov = plugin_cov(est, c)
    intervals = confidence_intervals(est, c, level, cov=cov)
    ratio = ci_ratio(est, c, level, cov=cov)
    test = test_tau2_zero(est, c, significance, cov=cov)
    report["estimates"] = dict(zip(PARAM_NAMES, map(float, est.theta_hat)))
    report["estimates"]["tau2_raw"] = est.tau2_raw
    report["std_errs"] = {
        name: {"asymptotic_sd": iv.asymptotic_sd, "std_err": iv.std_err} for name, iv in intervals.items()
    }
    report["intervals"] = {name: iv.to_dict() for name, iv in intervals.items()}
    report["tests"] = {"tau2_zero": test.to_dict()}
    report["ratio"] = ratio.to_dict()
    return report


def report_text(report: dict) -> str:
    """Table with estimates, standard errors in brackets and interval rows."""
    lines = [f"status: {report['status']}   items: {report['n_items']}   observations: {report['total_obs']}"]
    if "estimates" not in report:
        lines.append("moments are outside the invertible region; no estimate")
        return "\n".join(lines)
    cols = ["xi", "alpha", "tau2", "alpha/xi^2"]
    ivs = [report["intervals"][p] for p in PARAM_NAMES] + [report["ratio"]]
    level = ivs[0]["level"]
    rows = {
        "estimate (std err)": ["%.4g (%.3g)" % (iv["point"], iv["std_err"]) for iv in ivs],
        "asymptotic sd": ["%.4g" % iv["asymptotic_sd"] for iv in ivs],
        "CI (%.0f%%)" % (100 * level): ["[%.4g; %.4g]" % (iv["lower"], iv["upper"]) for iv in ivs],
    }
    lines.append(" " * 20 + "".join(c.rjust(24) for c in cols))
    for label, cells in rows.items():
        lines.append(label.ljust(20) + "".join(cell.rjust(24) for cell in cells))
    t = report["tests"]["tau2_zero"]
    verdict = "reject" if t["reject"] else "do not reject"
    lines.append(
        f"test tau2 = 0: z = {t['statistic']:.4g}, p = {t['p_value']:.4g}, "
        f"{verdict} at {t['significance']:g}"
    )
    lines.append(f"note: {t['note']}")
    c = report["design_constants"]
    lines.append("design constants: " + ", ".join(f"{k}={v:.6g}" for k, v in c.items()))
    return "\n".join(lines)


def dumps(obj: dict) -> str:
    return json.dumps(obj, indent=2, sort_keys=False)
