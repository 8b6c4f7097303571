"""Asymptotic covariance of the empirical moments and of the estimator.

Orderings are fixed throughout: parameter vectors are ``(xi, alpha, tau2)``
and moment vectors are ``(m1, cm2, cm3)``.  All covariances are for the
estimators scaled by ``sqrt(sum_i N_i)``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import (
    ModelParams,
    MomentVector,
    NonInvertibleError,
    ObservationGrid,
    forward_moments,
)


@dataclass(frozen=True)
class DesignConstants:
    """Design averages ``c_u = mean over all windows of dt**(u - 2)``."""

    c0: float
    c1: float
    c2: float
    c3: float

    def as_dict(self) -> dict[str, float]:
        return {"c0": self.c0, "c1": self.c1, "c2": self.c2, "c3": self.c3}


@dataclass(frozen=True)
class AsymptoticCov:
    sigma_inf: np.ndarray
    A: np.ndarray
    H: np.ndarray
    J: np.ndarray
    M: np.ndarray
    ratio_var: float
    constants: DesignConstants

    @property
    def sd(self) -> np.ndarray:
        """Asymptotic standard deviations of ``(xi, alpha, tau2)``."""
        return np.sqrt(np.clip(np.diag(self.M), 0.0, None))


def design_constants(grid: ObservationGrid | np.ndarray) -> DesignConstants:
    dt = grid.flat_dt if isinstance(grid, ObservationGrid) else np.asarray(grid, dtype=float)
    inv = 1.0 / dt
    return DesignConstants(
        c0=float(np.mean(inv * inv)),
        c1=float(np.mean(inv)),
        c2=1.0,
        c3=float(np.mean(dt)),
    )


def _symmetric(s11, s12, s13, s22, s23, s33) -> np.ndarray:
    return np.array([[s11, s12, s13], [s12, s22, s23], [s13, s23, s33]], dtype=float)


def per_increment_cov(theta: ModelParams, dt: float) -> np.ndarray:
    """Covariance of ``(X, X**2, X**3)`` for the centred increment ``X`` over ``dt``."""
    xi, a, t2 = theta.xi, theta.alpha, theta.tau2
    v = a / xi**2 + t2
    return _symmetric(
        v * dt,
        2 * a / xi**3 * dt,
        6 * a / xi**4 * dt + 3 * v**2 * dt**2,
        6 * a / xi**4 * dt + 2 * v**2 * dt**2,
        24 * a / xi**5 * dt + (18 * a**2 / xi**5 + 18 * a * t2 / xi**3) * dt**2,
        120 * a / xi**6 * dt
        + (126 * a**2 / xi**6 + 90 * a * t2 / xi**4) * dt**2
        + 15 * v**3 * dt**3,
    )


def sigma_infinity(theta: ModelParams, c: DesignConstants) -> np.ndarray:
    """Limit covariance of the moments centred at their true means.

    Equal to the design average of ``per_increment_cov(theta, dt) / dt**2``.
    """
    xi, a, t2 = theta.xi, theta.alpha, theta.tau2
    c1, c3 = c.c1, c.c3
    return _symmetric(
        (a / xi**2 + t2) * c1,
        2 * a / xi**3 * c1,
        6 * a / xi**4 * c1 + 3 * t2**2 + 6 * a * t2 / xi**2 + 3 * a**2 / xi**4,
        6 * a / xi**4 * c1 + 2 * t2**2 + 4 * a * t2 / xi**2 + 2 * a**2 / xi**4,
        24 * a / xi**5 * c1 + 18 * a**2 / xi**5 + 18 * a * t2 / xi**3,
        120 * a / xi**6 * c1
        + 126 * a**2 / xi**6
        + 90 * a * t2 / xi**4
        + (15 * a**3 / xi**6 + 45 * a**2 * t2 / xi**4 + 15 * t2**3 + 45 * a * t2**2 / xi**2) * c3,
    )


def drift_matrix(theta: ModelParams, c3: float) -> np.ndarray:
    """Linear correction for estimating the mean before centring the third moment."""
    A = np.eye(3)
    A[2, 0] = -3.0 * (theta.alpha / theta.xi**2 + theta.tau2) * c3
    return A


def jacobian(m: MomentVector) -> np.ndarray:
    """``d(xi, alpha, tau2) / d(m1, cm2, cm3)`` of the inverse moment map."""
    m1, _, m3 = (float(v) for v in m)
    if not (m1 > 0 and m3 > 0):
        raise NonInvertibleError(f"Jacobian undefined at m1={m1!r}, cm3={m3!r}")
    r = np.sqrt(m1 / (2.0 * m3))
    return np.array(
        [
            [1.0 / np.sqrt(2.0 * m1 * m3), 0.0, -r / m3],
            [np.sqrt(2.0 * m1 / m3) + r, 0.0, -(m1 / m3) * r],
            [-0.5 * np.sqrt(m3 / (2.0 * m1)), 1.0, -0.5 * r],
        ]
    )


def ratio_gradient(theta: ModelParams) -> np.ndarray:
    """Gradient of ``alpha / xi**2`` with respect to ``(xi, alpha)``."""
    return np.array([-2.0 * theta.alpha / theta.xi**3, 1.0 / theta.xi**2])


def parameter_cov(theta: ModelParams, design: ObservationGrid | DesignConstants) -> AsymptoticCov:
    """Chain ``c_u -> Sigma -> H = A Sigma A^T -> M = J H J^T`` at ``theta``.

    ``M`` is the asymptotic covariance of ``sqrt(sum N_i) (theta_hat - theta)``
    and ``ratio_var`` that of the plug-in ``alpha/xi**2``.
    """
    c = design if isinstance(design, DesignConstants) else design_constants(design)
    sigma = sigma_infinity(theta, c)
    A = drift_matrix(theta, c.c3)
    H = A @ sigma @ A.T
    J = jacobian(forward_moments(theta))
    M = J @ H @ J.T
    H = 0.5 * (H + H.T)
    M = 0.5 * (M + M.T)
    g = ratio_gradient(theta)
    ratio_var = float(g @ M[:2, :2] @ g)
    return AsymptoticCov(sigma, A, H, J, M, max(ratio_var, 0.0), c)


def is_psd(matrix: np.ndarray, rel_tol: float = 1e-8) -> bool:
    """Smallest eigenvalue above ``-rel_tol * ||matrix||``."""
    sym = 0.5 * (matrix + matrix.T)
    return bool(np.linalg.eigvalsh(sym).min() >= -rel_tol * np.linalg.norm(sym, 2))
