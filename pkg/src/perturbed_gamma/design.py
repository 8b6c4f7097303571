"""Sampling-design families and finite-horizon checks of the design assumptions.

A family describes item ``i`` (1-based) by a run-length encoding of its
window lengths: ``(dt, count)`` pairs meaning ``count`` consecutive windows
of length ``dt``.  That keeps families such as ``N_i = 2**(i-1)`` usable out
to horizons of many thousand items; all sums below are taken on the log scale.

The checks are heuristics.  Each limit statement is replaced by the growth
of a partial sum (or running average, or running extreme) between item
``horizon // 10`` and item ``horizon``: growth above ``GROWTH_TOL`` is read
as divergence.
"""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.special import logsumexp

from .model import ModelError, ObservationGrid

GROWTH_TOL = 0.01

CONSISTENT_AND_NORMAL = "consistent + asymptotically normal"
CONSISTENT_ONLY = "consistent, normality not established"
NOT_ESTABLISHED = "not established"
INCONCLUSIVE = "inconclusive"

# Conclusions for the canonical families; compared against the numeric verdict.
CASE_CONCLUSIONS = {
    1: CONSISTENT_AND_NORMAL,
    2: CONSISTENT_AND_NORMAL,
    3: CONSISTENT_ONLY,
    4: CONSISTENT_AND_NORMAL,
    5: NOT_ESTABLISHED,
}


@dataclass(frozen=True)
class ItemDesign:
    """Run-length encoded windows of one item, stored as logs."""

    log_dt: np.ndarray
    log_count: np.ndarray

    @classmethod
    def of(cls, dt: Sequence[float], count: Sequence[float]) -> "ItemDesign":
        return cls(np.log(np.asarray(dt, dtype=float)), np.log(np.asarray(count, dtype=float)))

    def expanded(self) -> np.ndarray:
        return np.repeat(np.exp(self.log_dt), np.rint(np.exp(self.log_count)).astype(int))


@dataclass(frozen=True)
class DesignFamily:
    name: str
    item: Callable[[int], ItemDesign]

    def grid(self, n: int) -> ObservationGrid:
        """Materialize the first ``n`` items; only sensible for small counts."""
        return ObservationGrid.from_dt([self.item(i).expanded() for i in range(1, n + 1)])


_item = ItemDesign.of
_LOG2 = float(np.log(2.0))


def case_family(case: int, T: float = 1000.0, N: int = 3, instants: Sequence[float] | None = None) -> DesignFamily:
    """The five canonical designs.

    1. ``N`` regular instants on ``[0, T]``, shared by all items.
    2. Shared non-regular ``instants`` on ``[0, T]`` (default ``200, 500, T``).
    3. ``N_i = i`` regular instants on ``[0, T]``.
    4. ``N_i = i`` regular instants on ``[0, i T]``.
    5. ``N_i = 2**(i-1)`` regular instants on ``[0, T]``.
    """
    if case == 1:
        return DesignFamily("case 1", lambda i: _item([T / N], [N]))
    if case == 2:
        t = np.asarray(instants if instants is not None else (0.2 * T, 0.5 * T, T), dtype=float)
        d = np.diff(t, prepend=0.0)
        return DesignFamily("case 2", lambda i: _item(d, np.ones_like(d)))
    if case == 3:
        return DesignFamily("case 3", lambda i: _item([T / i], [i]))
    if case == 4:
        return DesignFamily("case 4", lambda i: _item([T], [i]))
    if case == 5:
        log_t = float(np.log(T))
        return DesignFamily(
            "case 5",
            lambda i: ItemDesign(np.array([log_t - (i - 1) * _LOG2]), np.array([(i - 1) * _LOG2])),
        )
    raise ModelError(f"case must be in 1..5, got {case}")


def grid_family(grid: ObservationGrid, name: str = "grid") -> DesignFamily:
    """Family that cycles through the items of a finite grid."""
    dts = grid.dt
    return DesignFamily(name, lambda i: _item(dts[(i - 1) % len(dts)], np.ones(dts[(i - 1) % len(dts)].size)))


@dataclass
class SeriesCheck:
    """Growth of one monitored quantity between item ``horizon // 10`` and the horizon.

    Values are natural logs so that exploding designs stay representable.
    """

    name: str
    verdict: str  # "converges", "diverges" or "inconclusive"
    log_at_decade: float
    log_at_horizon: float
    log_growth: float


@dataclass
class DiagnosticsReport:
    family: str
    horizon: int
    assumptions: dict[str, bool]
    checks: dict[str, SeriesCheck]
    conclusion: str
    matched_case: int | None
    case_conclusion: str | None
    heuristic_note: str = field(
        default="finite-horizon heuristic: a quantity is read as divergent if it "
        f"grows by more than {GROWTH_TOL:.0%} between item horizon//10 and the horizon"
    )

    @property
    def agrees_with_case(self) -> bool | None:
        if self.case_conclusion is None:
            return None
        return self.case_conclusion == self.conclusion

    def to_dict(self) -> dict:
        out = asdict(self)
        out["agrees_with_case"] = self.agrees_with_case
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    def to_text(self) -> str:
        lines = [f"design: {self.family} (horizon {self.horizon})"]
        lines.append("assumptions: " + ", ".join(f"{k}={'yes' if v else 'no'}" for k, v in self.assumptions.items()))
        for c in self.checks.values():
            lines.append(
                f"  {c.name:<12} {c.verdict:<12} log@decade={c.log_at_decade:<12.6g} "
                f"log@horizon={c.log_at_horizon:<12.6g} log-growth={c.log_growth:.3g}"
            )
        lines.append(f"conclusion: {self.conclusion}")
        if self.matched_case is not None:
            lines.append(f"matches case {self.matched_case}: {self.case_conclusion}")
        lines.append(self.heuristic_note)
        return "\n".join(lines)


_LOG_TOL = float(np.log1p(GROWTH_TOL))


def _growth_check(name: str, log_values: np.ndarray, decade: int, increasing_is_bad: bool = True) -> SeriesCheck:
    lo, hi = float(log_values[decade - 1]), float(log_values[-1])
    if not (np.isfinite(lo) and np.isfinite(hi)):
        return SeriesCheck(name, "inconclusive", lo, hi, float("nan"))
    growth = hi - lo if increasing_is_bad else lo - hi
    verdict = "diverges" if growth > _LOG_TOL else "converges"
    return SeriesCheck(name, verdict, lo, hi, growth)


def design_diagnostics(family: DesignFamily, horizon: int = 10_000) -> DiagnosticsReport:
    """Check assumptions A1-A5 and H1-H3 on the first ``horizon`` items of ``family``.

    H1 is the convergence of ``sum_n sum_j dt_nj**-1 / (sum_{i<=n} N_i)**2``,
    H2 boundedness of ``dt``, H3 finiteness of the design averages ``c_0,
    c_1, c_3``.  Consistency is reported when H1 and H2 hold, asymptotic
    normality when H3 holds as well.

    The default horizon is large because H1 series with terms of order
    ``1/n**2`` still move by about ``10/horizon`` over the last decade.
    """
    if horizon < 2:
        raise ModelError(f"horizon must be >= 2, got {horizon}")
    items = [family.item(i) for i in range(1, horizon + 1)]
    decade = max(1, horizon // 10)

    runs = {len(it.log_dt) for it in items}
    if len(runs) == 1:
        log_dt = np.stack([it.log_dt for it in items])
        log_count = np.stack([it.log_count for it in items])
        power_sum = lambda p: logsumexp(log_count + p * log_dt, axis=1)  # noqa: E731
        max_dt, min_dt = log_dt.max(axis=1), log_dt.min(axis=1)
    else:
        power_sum = lambda p: np.array(  # noqa: E731
            [logsumexp(it.log_count + p * it.log_dt) for it in items]
        )
        max_dt = np.array([it.log_dt.max() for it in items])
        min_dt = np.array([it.log_dt.min() for it in items])

    log_n = power_sum(0.0)
    log_cum_n = np.logaddexp.accumulate(log_n)

    checks: dict[str, SeriesCheck] = {}
    checks["H1"] = _growth_check("H1 series", np.logaddexp.accumulate(power_sum(-1.0) - 2.0 * log_cum_n), decade)
    checks["H2"] = _growth_check("H2 max dt", np.maximum.accumulate(max_dt), decade)
    for u in (0, 1, 3):
        log_avg = np.logaddexp.accumulate(power_sum(u - 2.0)) - log_cum_n
        checks[f"H3_c{u}"] = _growth_check(f"H3 c{u}", log_avg, decade)
    checks["A4"] = _growth_check("A4 end time", np.maximum.accumulate(power_sum(1.0)), decade)
    checks["A5"] = _growth_check(
        "A5 min dt", np.minimum.accumulate(min_dt), decade, increasing_is_bad=False
    )

    first = items[0]
    same_n = bool(np.allclose(log_n, log_n[0], rtol=0, atol=1e-12))
    same_instants = same_n and all(
        it.log_dt.shape == first.log_dt.shape
        and np.allclose(it.log_dt, first.log_dt, rtol=0, atol=1e-12)
        and np.allclose(it.log_count, first.log_count, rtol=0, atol=1e-12)
        for it in items
    )
    regular = all(np.allclose(it.log_dt, it.log_dt[0], rtol=0, atol=1e-12) for it in items)
    assumptions = {
        "A1": same_n,
        "A2": same_instants,
        "A3": regular,
        "A4": checks["A4"].verdict == "converges",
        "A5": checks["A5"].verdict == "converges",
    }

    h_checks = [checks[k].verdict for k in ("H1", "H2", "H3_c0", "H3_c1", "H3_c3")]
    if "inconclusive" in h_checks:
        conclusion = INCONCLUSIVE
    elif h_checks[0] == "converges" and h_checks[1] == "converges":
        conclusion = CONSISTENT_AND_NORMAL if all(v == "converges" for v in h_checks[2:]) else CONSISTENT_ONLY
    else:
        conclusion = NOT_ESTABLISHED

    idx = np.arange(1, horizon + 1)
    n_is_i = bool(np.allclose(log_n, np.log(idx), rtol=0, atol=1e-9))
    n_is_pow2 = bool(np.allclose(log_n, (idx - 1) * _LOG2, rtol=0, atol=1e-9))
    a = assumptions
    matched = None
    if a["A1"] and a["A2"] and a["A3"] and a["A4"]:
        matched = 1
    elif a["A1"] and a["A2"] and not a["A3"] and a["A4"]:
        matched = 2
    elif n_is_i and a["A3"] and a["A4"]:
        matched = 3
    elif n_is_i and a["A3"] and a["A5"] and not a["A4"]:
        matched = 4
    elif n_is_pow2 and a["A3"] and a["A4"]:
        matched = 5

    return DiagnosticsReport(
        family=family.name,
        horizon=horizon,
        assumptions=assumptions,
        checks=checks,
        conclusion=conclusion,
        matched_case=matched,
        case_conclusion=CASE_CONCLUSIONS.get(matched) if matched else None,
    )
