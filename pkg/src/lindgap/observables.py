"""Entanglement, purity and fidelity of two-qubit states, plus the estimators
that turn trajectories into scaling exponents and thresholds."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .errors import UsageError
from .lindblad import dephasing_model, evolve, lindblad_concurrence_rate
from .qcore import PAULI2, PLUS_PLUS, check_density_matrix, hermitian_eigensystem, psd_sqrt

__all__ = [
    "STATE_TOL",
    "PowerLawFit",
    "ThresholdResult",
    "concurrence",
    "wootters_values",
    "purity",
    "fidelity",
    "fit_power_law",
    "concurrence_growth_rate",
    "threshold_scan",
]

STATE_TOL = 1e-9
FIT_FLOOR = 1e-13
# concurrences below this are round-off from the SVD and reported as zero
CONCURRENCE_FLOOR = 16 * np.finfo(float).eps
_YY = PAULI2[2, 2]


def wootters_values(rho) -> np.ndarray:
    """Square roots of the eigenvalues of ``rho (Y Y) rho^* (Y Y)``, descending.

    They are obtained as singular values of ``sqrt(rho) (Y Y) sqrt(rho)^*``,
    whose Gram matrix is ``sqrt(rho) rho~ sqrt(rho)``.  Taking singular values
    directly avoids square roots of round-off-sized eigenvalues.
    """
    s = psd_sqrt(rho)
    return np.linalg.svd(s @ _YY @ s.conj(), compute_uv=False)


def concurrence(rho, tol=STATE_TOL) -> float:
    """Wootters concurrence ``max(0, l1 - l2 - l3 - l4)``."""
    rho = check_density_matrix(rho, tol)
    lam = wootters_values(rho)
    c = lam[0] - lam[1] - lam[2] - lam[3]
    return float(min(c, 1.0)) if c > CONCURRENCE_FLOOR else 0.0


def purity(rho) -> float:
    """``Tr(rho^2) = sum_ij |rho_ij|^2`` for Hermitian ``rho``."""
    rho = np.asarray(rho, dtype=complex)
    return float(np.sum(np.abs(rho) ** 2))


def fidelity(rho, sigma, tol=STATE_TOL) -> float:
    """Uhlmann fidelity ``(Tr sqrt(sqrt(rho) sigma sqrt(rho)))^2``.

    The trace norm is computed as the nuclear norm of ``sqrt(rho) sqrt(sigma)``.
    """
    rho = check_density_matrix(rho, tol)
    sigma = check_density_matrix(sigma, tol)
    sv = np.linalg.svd(psd_sqrt(rho) @ psd_sqrt(sigma), compute_uv=False)
    return float(min(np.sum(sv) ** 2, 1.0))


@dataclass(frozen=True)
class PowerLawFit:
    exponent: float
    prefactor: float
    r_squared: float
    window: tuple
    n_samples: int

    def __call__(self, t):
        return self.prefactor * np.asarray(t) ** self.exponent


def fit_power_law(t, y) -> PowerLawFit:
    """Least-squares fit of ``y = prefactor * t**exponent`` in log-log space.

    Samples with ``y < 1e-13`` are dropped as round-off.  At least five
    samples spanning a decade in ``t`` must remain.
    """
    t = np.asarray(t, dtype=float)
    y = np.asarray(y, dtype=float)
    if t.shape != y.shape or t.ndim != 1:
        raise UsageError("t and y must be 1-D arrays of equal length")
    if np.any(t <= 0) or np.any(y <= 0) or not np.all(np.isfinite(y)):
        raise UsageError("power-law fit needs strictly positive, finite samples")
    keep = y >= FIT_FLOOR
    t, y = t[keep], y[keep]
    if t.size < 5:
        raise UsageError(f"need at least 5 samples above {FIT_FLOOR}, got {t.size}")
    if t.max() / t.min() < 10 * (1 - 1e-9):
        raise UsageError("samples must span at least one decade in t")
    lx, ly = np.log(t), np.log(y)
    slope, intercept = np.polyfit(lx, ly, 1)
    resid = ly - (slope * lx + intercept)
    ss_tot = np.sum((ly - ly.mean()) ** 2)
    r2 = 1.0 - np.sum(resid**2) / ss_tot if ss_tot > 0 else 1.0
    return PowerLawFit(float(slope), float(np.exp(intercept)), float(r2),
                       (float(t.min()), float(t.max())), int(t.size))


def concurrence_growth_rate(omega, lam, t0=None, model=None) -> float:
    """Central-difference estimate of ``dC/dt`` at early time.

    Uses ``t0 = 1e-3 / |omega|`` and spacing ``t0 / 10`` on the dephasing model
    evolved from ``|++>`` (or on ``model`` if given).
    """
    if omega == 0:
        raise UsageError("growth rate needs omega != 0")
    if t0 is None:
        t0 = 1e-3 / abs(omega)
    h = t0 / 10
    if model is None:
        model = dephasing_model(omega, lam)
    method = "exponential" if model.schedule.is_constant else "stepped"
    c_plus = concurrence(evolve(model, PLUS_PLUS, t0 + h, method))
    c_minus = concurrence(evolve(model, PLUS_PLUS, t0 - h, method))
    return (c_plus - c_minus) / (2 * h)


@dataclass(frozen=True)
class ThresholdResult:
    lambda_star: float
    bracket: tuple
    scan_points: tuple
    mode: str = "numeric"


def threshold_scan(omega, lambda_range, resolution=1e-3, mode="numeric") -> ThresholdResult:
    """Locate the dephasing rate above which early-time entanglement stops growing.

    Parameters
    ----------
    lambda_range : (low, high)
        Must bracket a sign change: growth at ``low``, none at ``high``.
    mode : {"numeric", "analytic"}
        ``numeric`` bisects on :func:`concurrence_growth_rate`; ``analytic``
        finds the root of :func:`lindblad_concurrence_rate`.
    """
    low, high = map(float, lambda_range)
    if not 0 <= low < high:
        raise UsageError("lambda_range must satisfy 0 <= low < high")
    if resolution <= 0:
        raise UsageError("resolution must be positive")
    if mode == "numeric":
        def rate(lam):
            return concurrence_growth_rate(omega, lam)
    elif mode == "analytic":
        def rate(lam):
            return lindblad_concurrence_rate(omega, lam)
    else:
        raise UsageError(f"unknown mode {mode!r}")

    points = [(low, rate(low)), (high, rate(high))]
    if not (points[0][1] > 0 and points[1][1] <= 0):
        raise UsageError(f"range {lambda_range} does not bracket the threshold")
    if mode == "analytic":
        root = brentq(rate, low, high, xtol=resolution / 10)
        lo, hi = max(low, root - resolution / 2), min(high, root + resolution / 2)
        return ThresholdResult(float(root), (lo, hi), tuple(points), mode)
    lo, hi = low, high
    while hi - lo > resolution:
        mid = 0.5 * (lo + hi)
        g = rate(mid)
        points.append((mid, g))
        if g > 0:
            lo = mid
        else:
            hi = mid
    return ThresholdResult(0.5 * (lo + hi), (lo, hi), tuple(points), mode)


def local_z_rotation(theta_a, theta_b) -> np.ndarray:
    """``exp(-i (theta_a Z_A + theta_b Z_B) / 2)`` as a diagonal 4x4 unitary."""
    s = np.array([1.0, -1.0])
    phase = -0.5j * (theta_a * s[:, None] + theta_b * s[None, :])
    return np.diag(np.exp(phase).ravel())


def wootters_spectrum_nonhermitian(rho) -> np.ndarray:
    """Square roots of eigenvalues of the non-Hermitian ``rho rho~``; cross-check only."""
    rho = np.asarray(rho, dtype=complex)
    ev = np.linalg.eigvals(rho @ _YY @ rho.conj() @ _YY)
    return np.sort(np.sqrt(np.clip(ev.real, 0, None)))[::-1]


def wootters_spectrum_hermitian(rho) -> np.ndarray:
    """Square roots of eigenvalues of ``sqrt(rho) rho~ sqrt(rho)`` via Jacobi."""
    s = psd_sqrt(rho)
    R = s @ _YY @ np.asarray(rho).conj() @ _YY @ s
    w, _ = hermitian_eigensystem(0.5 * (R + R.conj().T))
    return np.sqrt(np.clip(w, 0, None))
