"""Empirical moments and the method-of-moments estimator."""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .model import (
    GridError,
    IncrementPanel,
    ModelParams,
    MomentVector,
    NonInvertibleError,
    ObservationGrid,
    RawParams,
    invert_moments,
)


class EstimateStatus(enum.Enum):
    VALID = "valid"
    NEGATIVE_TAU2 = "negative_tau2"
    NON_INVERTIBLE = "non_invertible"


class ValidityRule(enum.Enum):
    """Which repetitions count as usable in a Monte Carlo experiment.

    ``STRICT`` keeps a repetition only if the moments are invertible and the
    unclamped ``tau2`` estimate is non-negative; ``INVERTIBLE`` keeps every
    invertible repetition.
    """

    STRICT = "strict"
    INVERTIBLE = "invertible"


@dataclass(frozen=True)
class EstimateResult:
    theta_hat: RawParams | None
    m_hat: MomentVector
    status: EstimateStatus
    total_obs: int
    tau2_raw: float | None = None
    clamped: bool = False

    @property
    def params(self) -> ModelParams:
        """Estimate projected onto the parameter space (``tau2`` clamped at zero)."""
        if self.theta_hat is None:
            raise NonInvertibleError(f"no estimate: {self.m_hat}")
        return self.theta_hat.to_params()

    def is_valid(self, rule: ValidityRule = ValidityRule.STRICT) -> bool:
        if self.status is EstimateStatus.NON_INVERTIBLE:
            return False
        if rule is ValidityRule.STRICT:
            return self.status is EstimateStatus.VALID
        return True


def moments_batch(increments: np.ndarray, dt: np.ndarray) -> np.ndarray:
    """Empirical moment vectors for a stack of panels sharing one flat grid.

    ``increments`` has shape ``(..., K)`` and ``dt`` shape ``(K,)``; returns
    ``(..., 3)`` columns ``(m1, cm2, cm3)``.  The mean is computed over the
    whole panel first and then reused inside both centred sums.
    """
    inc = np.asarray(increments, dtype=float)
    dt = np.asarray(dt, dtype=float)
    m1 = np.mean(inc / dt, axis=-1)
    resid = inc - dt * m1[..., None]
    r2 = resid * resid
    cm2 = np.mean(r2 / dt, axis=-1)
    cm3 = np.mean(r2 * resid / dt, axis=-1)
    return np.stack([m1, cm2, cm3], axis=-1)


def invert_batch(m: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized inverse moment map; rows that are not invertible come back as NaN."""
    m = np.asarray(m, dtype=float)
    m1, cm2, cm3 = m[..., 0], m[..., 1], m[..., 2]
    ok = (m1 > 0) & (cm3 > 0)
    safe_m1 = np.where(ok, m1, 1.0)
    safe_cm3 = np.where(ok, cm3, 1.0)
    xi = np.sqrt(2.0 * safe_m1 / safe_cm3)
    theta = np.stack([xi, safe_m1 * xi, cm2 - np.sqrt(2.0 * safe_m1 * safe_cm3) / 2.0], axis=-1)
    theta[~ok] = np.nan
    return theta, ok


def empirical_moments(panel: IncrementPanel, grid: ObservationGrid) -> MomentVector:
    panel.check_matches(grid)
    if grid.total < 1:
        raise GridError("panel has no observations")
    m = moments_batch(panel.flat, grid.flat_dt)
    return MomentVector(*(float(v) for v in m))


def estimate_from_moments(m: MomentVector, total_obs: int, clamp_tau: bool = True) -> EstimateResult:
    try:
        raw = invert_moments(m)
    except NonInvertibleError:
        return EstimateResult(None, m, EstimateStatus.NON_INVERTIBLE, total_obs)
    if raw.tau2 >= 0:
        return EstimateResult(raw, m, EstimateStatus.VALID, total_obs, tau2_raw=raw.tau2)
    theta = raw._replace(tau2=0.0) if clamp_tau else raw
    return EstimateResult(
        theta, m, EstimateStatus.NEGATIVE_TAU2, total_obs, tau2_raw=raw.tau2, clamped=clamp_tau
    )


def estimate_params(panel: IncrementPanel, grid: ObservationGrid, clamp_tau: bool = True) -> EstimateResult:
    """Method-of-moments estimate ``f^{-1}(m_hat)``.

    A negative ``tau2`` estimate is reported as 0 with status
    ``NEGATIVE_TAU2`` when ``clamp_tau`` is set, otherwise it is kept raw
    under the same status.  Non-invertible moments give status
    ``NON_INVERTIBLE`` and no estimate.
    """
    return estimate_from_moments(empirical_moments(panel, grid), grid.total, clamp_tau)
