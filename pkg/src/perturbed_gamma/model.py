"""Parameterization and closed-form moments of the perturbed gamma process.

The degradation level is ``D_t = Y_t + tau * B_t`` where ``Y`` is a gamma
process whose increment over a window of length ``dt`` is Gamma(shape
``alpha * dt``, rate ``xi``) and ``B`` is an independent standard Brownian
motion.  Everything here is a pure function of its inputs.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np


class ModelError(ValueError):
    """Base class for domain errors raised by this package."""


class NonInvertibleError(ModelError):
    """Moment vector lies outside the image of the moment map."""


class GridError(ModelError):
    """Observation grid or panel violates its structural invariants."""


@dataclass(frozen=True)
class ModelParams:
    """Parameter triple ``(xi, alpha, tau2)``.

    ``xi`` is the gamma rate (per degradation unit), ``alpha`` the shape
    rate per unit time and ``tau2`` the Brownian variance per unit time.
    """

    xi: float
    alpha: float
    tau2: float = 0.0

    def __post_init__(self) -> None:
        for name in ("xi", "alpha", "tau2"):
            value = getattr(self, name)
            if not math.isfinite(value):
                raise ModelError(f"{name} must be finite, got {value!r}")
        if not self.xi > 0:
            raise ModelError(f"xi must be > 0, got {self.xi!r}")
        if not self.alpha > 0:
            raise ModelError(f"alpha must be > 0, got {self.alpha!r}")
        if not self.tau2 >= 0:
            raise ModelError(f"tau2 must be >= 0, got {self.tau2!r}")

    def as_array(self) -> np.ndarray:
        return np.array([self.xi, self.alpha, self.tau2])

    @classmethod
    def from_sequence(cls, values: Sequence[float]) -> "ModelParams":
        xi, alpha, tau2 = (float(v) for v in values)
        return cls(xi, alpha, tau2)

    @property
    def ratio(self) -> float:
        """``alpha / xi**2``, the gamma part of the per-unit-time variance."""
        return self.alpha / self.xi**2


class MomentVector(NamedTuple):
    """Per-unit-time mean and second/third central moments."""

    m1: float
    cm2: float
    cm3: float

    def as_array(self) -> np.ndarray:
        return np.array([self.m1, self.cm2, self.cm3])


class InversionStatus(enum.Enum):
    VALID = "valid"
    NEGATIVE_TAU2 = "negative_tau2"
    NON_INVERTIBLE = "non_invertible"


class RawParams(NamedTuple):
    """Algebraic output of the inverse moment map; ``tau2`` may be negative."""

    xi: float
    alpha: float
    tau2: float

    @property
    def status(self) -> InversionStatus:
        return InversionStatus.VALID if self.tau2 >= 0 else InversionStatus.NEGATIVE_TAU2

    def as_array(self) -> np.ndarray:
        return np.array([self.xi, self.alpha, self.tau2])

    def to_params(self) -> ModelParams:
        """Project onto the parameter space by clamping ``tau2`` at zero."""
        return ModelParams(self.xi, self.alpha, max(self.tau2, 0.0))


def forward_moments(theta: ModelParams) -> MomentVector:
    """Map parameters to ``(alpha/xi, alpha/xi**2 + tau2, 2*alpha/xi**3)``."""
    if not isinstance(theta, ModelParams):
        theta = ModelParams.from_sequence(theta)
    xi, alpha, tau2 = theta.xi, theta.alpha, theta.tau2
    return MomentVector(alpha / xi, alpha / xi**2 + tau2, 2.0 * alpha / xi**3)


def invert_moments(m: MomentVector | Sequence[float]) -> RawParams:
    """Inverse of :func:`forward_moments`.

    Raises
    ------
    NonInvertibleError
        If ``m1 <= 0`` or ``cm3 <= 0``.
    """
    m1, cm2, cm3 = (float(v) for v in m)
    if not (m1 > 0 and cm3 > 0):
        raise NonInvertibleError(
            f"moment vector not invertible: m1={m1!r}, cm3={cm3!r} (both must be > 0)"
        )
    xi = math.sqrt(2.0 * m1 / cm3)
    return RawParams(xi, m1 * xi, cm2 - math.sqrt(2.0 * m1 * cm3) / 2.0)


def raw_increment_moments(theta: ModelParams, dt: float, order: int) -> float:
    """Raw moment ``E[dD**order]`` of an increment over a window of length ``dt``."""
    if not dt > 0:
        raise ModelError(f"dt must be > 0, got {dt!r}")
    xi, alpha, tau2 = theta.xi, theta.alpha, theta.tau2
    mean = alpha * dt / xi
    if order == 1:
        return mean
    if order == 2:
        return alpha * dt / xi**2 + mean**2 + tau2 * dt
    if order == 3:
        return (
            2.0 * alpha * dt / xi**3
            + 3.0 * alpha**2 * dt**2 / xi**3
            + mean**3
            + 3.0 * alpha * tau2 * dt**2 / xi
        )
    raise ModelError(f"order must be 1, 2 or 3, got {order!r}")


def gamma_raw_moment(shape_a: float, xi: float, order: int) -> float:
    """``E[G**order]`` for ``G ~ Gamma(shape_a, rate xi)``: rising factorial over ``xi**order``."""
    if not (shape_a > 0 and xi > 0):
        raise ModelError(f"shape and rate must be > 0, got {shape_a!r}, {xi!r}")
    if order < 0 or int(order) != order:
        raise ModelError(f"order must be a non-negative integer, got {order!r}")
    out = 1.0
    for k in range(int(order)):
        out *= (shape_a + k) / xi
    return out


def _as_increments(values: Sequence[float], what: str) -> np.ndarray:
    arr = np.asarray(values, dtype=float)
    if arr.ndim != 1:
        raise GridError(f"{what} must be one-dimensional, got shape {arr.shape}")
    return arr


@dataclass(frozen=True, eq=False)
class ObservationGrid:
    """Per-item observation instants ``t_i1 < ... < t_iN`` with implicit ``t_i0 = 0``."""

    times: tuple[np.ndarray, ...]

    def __post_init__(self) -> None:
        if len(self.times) == 0:
            raise GridError("grid must contain at least one item")
        frozen = []
        for i, t in enumerate(self.times):
            t = _as_increments(t, f"instants of item {i}").copy()
            if t.size == 0:
                raise GridError(f"item {i} has no observations")
            if not np.all(np.isfinite(t)):
                raise GridError(f"item {i} has non-finite instants")
            if not np.all(np.diff(np.concatenate(([0.0], t))) > 0):
                raise GridError(f"instants of item {i} must be positive and strictly increasing")
            t.setflags(write=False)
            frozen.append(t)
        object.__setattr__(self, "times", tuple(frozen))

    @classmethod
    def from_dt(cls, dts: Sequence[Sequence[float]]) -> "ObservationGrid":
        """Build from per-item window lengths."""
        out = []
        for i, d in enumerate(dts):
            d = _as_increments(d, f"dt of item {i}")
            if not np.all(d > 0):
                raise GridError(f"dt of item {i} must be > 0")
            out.append(np.cumsum(d))
        return cls(tuple(out))

    @classmethod
    def repeated(cls, dt: Sequence[float], n: int) -> "ObservationGrid":
        """``n`` items sharing the window lengths ``dt``."""
        if n < 1:
            raise GridError(f"n must be >= 1, got {n}")
        return cls.from_dt([dt] * n)

    @property
    def n_items(self) -> int:
        return len(self.times)

    @property
    def counts(self) -> np.ndarray:
        return np.array([t.size for t in self.times])

    @property
    def total(self) -> int:
        """``sum_i N_i``."""
        return int(sum(t.size for t in self.times))

    @property
    def dt(self) -> list[np.ndarray]:
        return [np.diff(t, prepend=0.0) for t in self.times]

    @property
    def flat_dt(self) -> np.ndarray:
        return np.concatenate(self.dt)

    def permuted(self, order: Sequence[int]) -> "ObservationGrid":
        return ObservationGrid(tuple(self.times[i] for i in order))

    def __len__(self) -> int:
        return self.n_items

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ObservationGrid):
            return NotImplemented
        return len(self.times) == len(other.times) and all(
            np.array_equal(a, b) for a, b in zip(self.times, other.times)
        )


@dataclass(frozen=True, eq=False)
class IncrementPanel:
    """Observed increments, one array per item, aligned with an :class:`ObservationGrid`."""

    increments: tuple[np.ndarray, ...]

    def __post_init__(self) -> None:
        frozen = []
        for i, d in enumerate(self.increments):
            d = _as_increments(d, f"increments of item {i}").copy()
            d.setflags(write=False)
            frozen.append(d)
        object.__setattr__(self, "increments", tuple(frozen))

    @property
    def flat(self) -> np.ndarray:
        return np.concatenate(self.increments)

    def check_matches(self, grid: ObservationGrid) -> None:
        if len(self.increments) != grid.n_items:
            raise GridError(
                f"panel has {len(self.increments)} items but grid has {grid.n_items}"
            )
        for i, (d, t) in enumerate(zip(self.increments, grid.times)):
            if d.size != t.size:
                raise GridError(f"item {i}: {d.size} increments for {t.size} instants")

    def cumulative(self) -> list[np.ndarray]:
        """Degradation levels ``D(t_ij)`` assuming ``D(0) = 0``."""
        return [np.cumsum(d) for d in self.increments]

    def scaled(self, factor: float) -> "IncrementPanel":
        return IncrementPanel(tuple(d * factor for d in self.increments))

    def permuted(self, order: Sequence[int]) -> "IncrementPanel":
        return IncrementPanel(tuple(self.increments[i] for i in order))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, IncrementPanel):
            return NotImplemented
        return len(self.increments) == len(other.increments) and all(
            np.array_equal(a, b) for a, b in zip(self.increments, other.increments)
        )
