"""Seeded Monte Carlo experiments: bias/MSE/StD tables and interval coverage.

Repetition ``r`` at sample-size index ``k`` draws its whole panel from the
stream with spawn key ``(EXPERIMENT_DOMAIN, k, r)``.  Repetitions are
independent jobs; results land in per-repetition slots and are reduced in
repetition order, so tables are bit-identical for any number of workers.
"""
from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .asymptotics import design_constants, parameter_cov
from .estimate import (
    EstimateStatus,
    ValidityRule,
    estimate_from_moments,
    invert_batch,
    moments_batch,
)
from .inference import PARAM_NAMES, ci_ratio, confidence_intervals
from .model import ModelError, ModelParams, MomentVector, ObservationGrid
from .simulate import EXPERIMENT_DOMAIN, sample_increments, stream

GridSpec = Callable[[int], ObservationGrid] | Sequence[float]


@dataclass(frozen=True)
class ExperimentConfig:
    """``grid`` is either one window pattern shared by every item or a map ``n -> grid``."""

    theta: ModelParams
    grid: GridSpec
    sample_sizes: Sequence[int]
    repetitions: int = 1000
    master_seed: int = 0
    clamp_tau: bool = True
    validity: ValidityRule = ValidityRule.STRICT
    workers: int = 1

    def __post_init__(self) -> None:
        if self.repetitions < 1:
            raise ModelError("repetitions must be >= 1")
        sizes = list(self.sample_sizes)
        if not sizes or any(b <= a for a, b in zip(sizes, sizes[1:])) or sizes[0] < 1:
            raise ModelError("sample_sizes must be non-empty, positive and strictly increasing")
        if self.workers < 1:
            raise ModelError("workers must be >= 1")

    def grid_for(self, n: int) -> ObservationGrid:
        if callable(self.grid):
            return self.grid(n)
        return ObservationGrid.repeated(self.grid, n)


@dataclass
class CellStats:
    param: str
    n: int
    bias: float
    mse: float
    std: float
    valid_count: int


@dataclass
class ExperimentTable:
    theta: ModelParams
    sample_sizes: list[int]
    repetitions: int
    cells: dict[tuple[str, int], CellStats]
    estimates: dict[int, np.ndarray] = field(repr=False)
    valid: dict[int, np.ndarray] = field(repr=False)

    def valid_count(self, n: int) -> int:
        return self.cells[(PARAM_NAMES[0], n)].valid_count

    def get(self, param: str, n: int) -> CellStats:
        return self.cells[(param, n)]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["param", "n", "bias", "mse", "std", "valid_count"])
        for param in PARAM_NAMES:
            for n in self.sample_sizes:
                c = self.cells[(param, n)]
                w.writerow([param, n, repr(c.bias), repr(c.mse), repr(c.std), c.valid_count])
        return buf.getvalue()

    def to_text(self) -> str:
        """Three blocks (bias, MSE, StD) with parameters as rows and ``n`` as columns."""
        out = []
        header = "".join(f"{n:>12d}" for n in self.sample_sizes)
        for stat, label in (("bias", "Bias"), ("mse", "MSE"), ("std", "StD")):
            out.append(f"{label:<18}{header}")
            for param in PARAM_NAMES:
                row = "".join(f"{getattr(self.cells[(param, n)], stat):>12.3g}" for n in self.sample_sizes)
                out.append(f"{param:<18}{row}")
            counts = "".join(f"{self.valid_count(n):>12d}" for n in self.sample_sizes)
            out.append(f"{f'{self.repetitions} repetitions':<18}{counts}")
            out.append("")
        return "\n".join(out)


def _simulate_moments(theta: ModelParams, dt: np.ndarray, seed: int, k: int, r: int) -> np.ndarray:
    inc = sample_increments(theta, dt, stream(seed, EXPERIMENT_DOMAIN, k, r))
    return moments_batch(inc, dt)


def _moment_draws(config: ExperimentConfig, k: int, dt: np.ndarray) -> np.ndarray:
    """``(repetitions, 3)`` empirical moment vectors for sample-size index ``k``."""
    jobs = range(config.repetitions)
    run = lambda r: _simulate_moments(config.theta, dt, config.master_seed, k, r)  # noqa: E731
    if config.workers == 1:
        rows = [run(r) for r in jobs]
    else:
        with ThreadPoolExecutor(max_workers=config.workers) as pool:
            rows = list(pool.map(run, jobs))
    return np.stack(rows)


def _validity_mask(theta_raw: np.ndarray, ok: np.ndarray, rule: ValidityRule) -> np.ndarray:
    if rule is ValidityRule.STRICT:
        return ok & (np.nan_to_num(theta_raw[:, 2], nan=-1.0) >= 0)
    return ok.copy()


def summarize(estimates: np.ndarray, truth: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Bias, MSE and sample standard deviation (``ddof=1``; 0 for a single row) per column."""
    if estimates.shape[0] == 0:
        nan = np.full(truth.shape, np.nan)
        return nan, nan, nan
    err = estimates - truth
    bias = err.mean(axis=0)
    mse = (err * err).mean(axis=0)
    std = estimates.std(axis=0, ddof=1) if estimates.shape[0] > 1 else np.zeros(truth.shape)
    return bias, mse, std


def run_experiment(config: ExperimentConfig) -> ExperimentTable:
    """Bias, MSE and StD of the estimator over the valid repetitions, per sample size.

    Cells with no valid repetition are reported with NaN statistics and a
    zero count.
    """
    truth = config.theta.as_array()
    cells: dict[tuple[str, int], CellStats] = {}
    estimates: dict[int, np.ndarray] = {}
    valid: dict[int, np.ndarray] = {}
    for k, n in enumerate(config.sample_sizes):
        dt = config.grid_for(n).flat_dt
        theta_raw, ok = invert_batch(_moment_draws(config, k, dt))
        mask = _validity_mask(theta_raw, ok, config.validity)
        est = theta_raw.copy()
        if config.clamp_tau:
            est[:, 2] = np.where(est[:, 2] < 0, 0.0, est[:, 2])
        estimates[n], valid[n] = est, mask
        bias, mse, std = summarize(est[mask], truth)
        for j, name in enumerate(PARAM_NAMES):
            cells[(name, n)] = CellStats(name, n, float(bias[j]), float(mse[j]), float(std[j]), int(mask.sum()))
    return ExperimentTable(config.theta, list(config.sample_sizes), config.repetitions, cells, estimates, valid)


@dataclass
class CoverageTable:
    level: float
    sample_sizes: list[int]
    coverage: dict[tuple[str, int], float]
    valid_count: dict[int, int]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["param", "n", "level", "coverage", "valid_count"])
        for (param, n), cov in self.coverage.items():
            w.writerow([param, n, self.level, repr(cov), self.valid_count[n]])
        return buf.getvalue()


def run_coverage(config: ExperimentConfig, level: float = 0.95) -> CoverageTable:
    """Fraction of valid repetitions whose interval contains the true value.

    Covers ``xi``, ``alpha``, ``tau2`` and the ratio ``alpha/xi**2``.
    """
    if not 0 < level < 1:
        raise ModelError(f"level must lie in (0, 1), got {level!r}")
    truth = {**dict(zip(PARAM_NAMES, config.theta.as_array())), "ratio": config.theta.ratio}
    coverage: dict[tuple[str, int], float] = {}
    counts: dict[int, int] = {}
    for k, n in enumerate(config.sample_sizes):
        grid = config.grid_for(n)
        c = design_constants(grid)
        draws = _moment_draws(config, k, grid.flat_dt)
        theta_raw, ok = invert_batch(draws)
        mask = _validity_mask(theta_raw, ok, config.validity)
        hits = {name: 0 for name in truth}
        for r in np.flatnonzero(mask):
            est = estimate_from_moments(MomentVector(*draws[r]), grid.total, config.clamp_tau)
            assert est.status is not EstimateStatus.NON_INVERTIBLE
            cov = parameter_cov(est.params, c)
            intervals = confidence_intervals(est, c, level, cov=cov)
            intervals["ratio"] = ci_ratio(est, c, level, cov=cov)
            for name, iv in intervals.items():
                hits[name] += int(iv.contains(truth[name]))
        counts[n] = int(mask.sum())
        for name in truth:
            coverage[(name, n)] = float(hits[name] / counts[n]) if counts[n] else math.nan
    return CoverageTable(level, list(config.sample_sizes), coverage, counts)
