"""Small dense linear algebra for one- and two-qubit states.

Conventions used throughout the package:

* Computational basis ordering for two qubits is ``|a1 b1>, |a1 b2>, |a2 b1>,
  |a2 b2>`` with ``sigma^z |x1> = +|x1>``.
* Pauli index order is ``(0, x, y, z)``; two-qubit coefficients ``r[mu, nu]``
  carry the A-site index first.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "SIGMA",
    "PAULI2",
    "PLUS_PLUS",
    "DEFAULT_POSITIVITY_TOL",
    "ValidationReport",
    "as_matrix",
    "reduce_couplings",
    "couplings_hamiltonian",
    "pauli_decompose",
    "pauli_reconstruct",
    "hermitian_eigensystem",
    "psd_sqrt",
    "validate_density_matrix",
    "check_density_matrix",
    "commuting_state",
    "InvalidStateError",
]

SIGMA = np.array(
    [
        [[1, 0], [0, 1]],
        [[0, 1], [1, 0]],
        [[0, -1j], [1j, 0]],
        [[1, 0], [0, -1]],
    ],
    dtype=complex,
)

# PAULI2[mu, nu] = sigma^mu (x) sigma^nu
PAULI2 = np.einsum("aij,bkl->abikjl", SIGMA, SIGMA).reshape(4, 4, 4, 4)

# |++><++|
PLUS_PLUS = np.full((4, 4), 0.25, dtype=complex)

DEFAULT_POSITIVITY_TOL = 1e-10


class InvalidStateError(ValueError):
    """Raised when a matrix is not an acceptable density matrix."""


def as_matrix(m, dim=None) -> np.ndarray:
    """Coerce ``m`` to a finite square complex array."""
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    if dim is not None and a.shape[0] != dim:
        raise ValueError(f"expected a {dim}x{dim} matrix, got {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    return a


def reduce_couplings(g) -> tuple[float, float, float, float]:
    """Split a diagonal two-qubit coupling table into Pauli-z components.

    ``H = sum_ij g[i, j] |a_i b_j><a_i b_j|`` is rewritten as
    ``c0 I + cA Z_A + cB Z_B - omega Z_A Z_B``.

    Returns
    -------
    c0, cA, cB, omega : float
    """
    g = np.asarray(g, dtype=float)
    if g.shape != (2, 2) or not np.all(np.isfinite(g)):
        raise ValueError("coupling table must be a finite 2x2 real array")
    (g11, g12), (g21, g22) = g
    c0 = (g11 + g12 + g21 + g22) / 4
    ca = (g11 + g12 - g21 - g22) / 4
    cb = (g11 - g12 + g21 - g22) / 4
    omega = (g12 + g21 - g11 - g22) / 4
    return float(c0), float(ca), float(cb), float(omega)


def couplings_hamiltonian(c0, ca, cb, omega) -> np.ndarray:
    """Assemble ``c0 I + cA Z_A + cB Z_B - omega Z_A Z_B`` as a 4x4 matrix."""
    return (
        c0 * PAULI2[0, 0] + ca * PAULI2[3, 0] + cb * PAULI2[0, 3]
        - omega * PAULI2[3, 3]
    )


def commuting_state(omega, t, gamma_a, gamma_b, lambda_plus, lambda_minus) -> np.ndarray:
    """Two-qubit state with flat populations under ``-omega Z_A Z_B``.

    The coherences of ``|++><++|`` pick up the coherent phase ``exp(+/- 2i omega t)``
    on single flips and are multiplied by ``gamma_b`` (flip of B), ``gamma_a``
    (flip of A), ``lambda_plus`` (``|11><22|``) and ``lambda_minus``
    (``|12><21|``).
    """
    ph = np.exp(2j * omega * t)
    rho = np.empty((4, 4), dtype=complex)
    rho[0] = [1, ph * gamma_b, ph * gamma_a, lambda_plus]
    rho[1, 1:] = [1, lambda_minus, np.conj(ph) * gamma_a]
    rho[2, 2:] = [1, np.conj(ph) * gamma_b]
    rho[3, 3] = 1
    iu = np.triu_indices(4, 1)
    rho[iu[1], iu[0]] = np.conj(rho[iu])
    return rho / 4


def pauli_decompose(rho, trace_tol=1e-12) -> np.ndarray:
    """Pauli coefficients ``r[mu, nu] = Tr(rho sigma^mu (x) sigma^nu)``.

    Parameters
    ----------
    rho : (4, 4) array_like
        Unit-trace Hermitian matrix.
    trace_tol : float
        Allowed deviation of the trace from one.

    Returns
    -------
    r : (4, 4) ndarray of float
        ``r[0, 0] == 1`` for a valid state.
    """
    rho = as_matrix(rho, 4)
    tr = np.trace(rho)
    if abs(tr - 1) > trace_tol:
        raise InvalidStateError(f"trace {tr} differs from 1")
    # Tr(rho P) = sum_ij rho_ij P_ji
    r = np.einsum("ij,abji->ab", rho, PAULI2)
    return r.real.copy()


def pauli_reconstruct(r) -> np.ndarray:
    """Inverse of :func:`pauli_decompose`: ``(1/4) sum r[mu, nu] sigma^mu (x) sigma^nu``."""
    r = np.asarray(r, dtype=float).reshape(4, 4)
    if not np.all(np.isfinite(r)):
        raise ValueError("Pauli coefficients must be finite")
    return np.einsum("ab,abij->ij", r, PAULI2) / 4


def _jacobi_sweeps(a, tol, max_sweeps):
    n = a.shape[0]
    v = np.eye(n, dtype=complex)
    scale = max(np.linalg.norm(a), np.finfo(float).tiny)
    for _ in range(max_sweeps):
        off = np.sqrt(np.sum(np.abs(a - np.diag(np.diag(a))) ** 2))
        if off <= tol * scale:
            return a, v
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                r = abs(apq)
                if r <= 1e-300:
                    continue
                phase = apq / r
                theta = 0.5 * np.arctan2(2 * r, a[q, q].real - a[p, p].real)
                c, s = np.cos(theta), np.sin(theta)
                # J = diag(1, conj(phase)) @ [[c, s], [-s, c]] on the (p, q) plane
                jpp, jpq = c, s
                jqp, jqq = -s * np.conj(phase), c * np.conj(phase)
                cp, cq = a[:, p].copy(), a[:, q].copy()
                a[:, p] = cp * jpp + cq * jqp
                a[:, q] = cp * jpq + cq * jqq
                rp, rq = a[p, :].copy(), a[q, :].copy()
                a[p, :] = np.conj(jpp) * rp + np.conj(jqp) * rq
                a[q, :] = np.conj(jpq) * rp + np.conj(jqq) * rq
                a[p, q] = a[q, p] = 0.0
                a[p, p] = a[p, p].real
                a[q, q] = a[q, q].real
                vp, vq = v[:, p].copy(), v[:, q].copy()
                v[:, p] = vp * jpp + vq * jqp
                v[:, q] = vp * jpq + vq * jqq
    raise np.linalg.LinAlgError(f"Jacobi iteration did not converge in {max_sweeps} sweeps")


def hermitian_eigensystem(m, herm_tol=1e-10, tol=1e-14, max_sweeps=100):
    """Eigen-decomposition of a small Hermitian matrix by cyclic Jacobi rotations.

    Parameters
    ----------
    m : (n, n) array_like
        Hermitian matrix, ``max|M - M^H| <= herm_tol``.
    tol : float
        Stop once the off-diagonal Frobenius norm falls below ``tol * ||M||_F``.

    Returns
    -------
    eigenvalues : (n,) ndarray
        Real, sorted in descending order.
    eigenvectors : (n, n) ndarray
        Orthonormal columns, ``M @ v[:, i] == eigenvalues[i] * v[:, i]``.
    """
    a = as_matrix(m)
    defect = np.max(np.abs(a - a.conj().T)) if a.size else 0.0
    if defect > herm_tol:
        raise ValueError(f"matrix is not Hermitian (defect {defect:.3g})")
    a = 0.5 * (a + a.conj().T)
    d, v = _jacobi_sweeps(a.copy(), tol, max_sweeps)
    w = np.diag(d).real
    order = np.argsort(-w, kind="stable")
    return w[order], v[:, order]


def psd_sqrt(rho) -> np.ndarray:
    """Principal square root of a PSD matrix.

    Eigenvalues below ``64 eps * max eigenvalue`` are round-off and set to
    zero; otherwise their square roots (~1e-8) would leak into every
    functional built on this.
    """
    w, v = hermitian_eigensystem(rho)
    floor = 64 * np.finfo(float).eps * max(w[0], 0.0)
    w = np.where(w > floor, w, 0.0)
    return (v * np.sqrt(w)) @ v.conj().T


@dataclass(frozen=True)
class ValidationReport:
    hermiticity_defect: float
    trace_defect: float
    min_eigenvalue: float
    tol: float

    @property
    def ok(self) -> bool:
        return (
            self.hermiticity_defect <= self.tol
            and self.trace_defect <= self.tol
            and self.min_eigenvalue >= -self.tol
        )

    def failures(self) -> list[str]:
        out = []
        if self.hermiticity_defect > self.tol:
            out.append(f"hermiticity defect {self.hermiticity_defect:.3g}")
        if self.trace_defect > self.tol:
            out.append(f"trace defect {self.trace_defect:.3g}")
        if self.min_eigenvalue < -self.tol:
            out.append(f"negative eigenvalue {self.min_eigenvalue:.3g}")
        return out

    def __bool__(self) -> bool:
        return self.ok


def validate_density_matrix(m, tol=DEFAULT_POSITIVITY_TOL) -> ValidationReport:
    """Measure how far ``m`` is from a valid 4x4 density matrix.

    Defects are max-abs-entry norms; the report passes iff every defect is
    within ``tol``.
    """
    a = as_matrix(m, 4)
    herm = float(np.max(np.abs(a - a.conj().T)))
    tr = float(abs(np.trace(a) - 1))
    w, _ = hermitian_eigensystem(0.5 * (a + a.conj().T), herm_tol=np.inf)
    return ValidationReport(herm, tr, float(w[-1]), tol)


def check_density_matrix(m, tol=DEFAULT_POSITIVITY_TOL) -> np.ndarray:
    """Return ``m`` as an array, raising :class:`InvalidStateError` if invalid."""
    report = validate_density_matrix(m, tol)
    if not report:
        raise InvalidStateError("; ".join(report.failures()))
    return as_matrix(m, 4)
