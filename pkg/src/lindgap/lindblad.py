"""GKSL dynamics of two qubits with additive single-site dissipators.

States are propagated as Pauli coefficient vectors ``r[mu, nu]`` (16 reals,
A index first).  Each site's dissipator is a 4x4 real symmetric matrix ``D``
acting on that site's Pauli index, entering the equation of motion as

    dr/dt = G_coh r - 2 lambda(t) (D_A (x) 1 + 1 (x) D_B) r

with ``G_coh`` the commutator with ``H = -omega Z_A Z_B``.  With
``D = diag(0, 1, 1, 0)`` and constant ``lambda`` every single-site coherence
decays as ``exp(-2 lambda t)``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.linalg import expm

from .errors import IntegrityError, UsageError
from .qcore import (
    PAULI2,
    commuting_state,
    pauli_decompose,
    pauli_reconstruct,
    validate_density_matrix,
)

__all__ = [
    "DissipatorMatrix",
    "DissipatorCheck",
    "LambdaSchedule",
    "LindbladModel",
    "dephasing_model",
    "validate_dissipator",
    "gksl_generator",
    "evolve",
    "evolve_trajectory",
    "dephasing_closed_form",
    "dephasing_time_dependent",
    "lindblad_concurrence_rate",
    "STEP_SCALE",
]

STEP_SCALE = 1e-3
POSITIVITY_TOL = 1e-9


@dataclass(frozen=True)
class DissipatorMatrix:
    """Single-qubit dissipator in the Pauli basis ``(0, x, y, z)``."""

    Kx: float = 0.0
    Ky: float = 0.0
    Kz: float = 0.0
    fxy: float = 0.0
    fxz: float = 0.0
    fyz: float = 0.0

    @classmethod
    def dephasing(cls, rate=1.0) -> "DissipatorMatrix":
        return cls(Kx=rate, Ky=rate)

    @classmethod
    def from_matrix(cls, D) -> "DissipatorMatrix":
        D = np.asarray(D, dtype=float)
        if D.shape != (4, 4):
            raise UsageError("dissipator must be 4x4")
        if np.max(np.abs(D - D.T)) > 1e-14:
            raise UsageError("dissipator must be symmetric")
        if np.any(D[0] != 0) or np.any(D[:, 0] != 0):
            raise UsageError("first row and column of the dissipator must vanish")
        return cls(D[1, 1], D[2, 2], D[3, 3], D[1, 2], D[1, 3], D[2, 3])

    @property
    def matrix(self) -> np.ndarray:
        return np.array(
            [
                [0.0, 0.0, 0.0, 0.0],
                [0.0, self.Kx, self.fxy, self.fxz],
                [0.0, self.fxy, self.Ky, self.fyz],
                [0.0, self.fxz, self.fyz, self.Kz],
            ]
        )

    @property
    def max_rate(self) -> float:
        return float(np.max(np.abs(np.linalg.eigvalsh(self.matrix))))


@dataclass(frozen=True)
class LambdaSchedule:
    """Time profile ``lambda(t)`` multiplying both dissipators.

    ``kind`` is ``"constant"`` (``lam``), ``"linear"`` (``lam_tilde * t``) or
    ``"tabulated"`` (piecewise-linear through ``table`` rows ``(t, rate)``,
    held constant outside the table).
    """

    kind: str = "constant"
    lam: float = 1.0
    lam_tilde: float = 0.0
    table: tuple = ()

    def __post_init__(self):
        if self.kind not in ("constant", "linear", "tabulated"):
            raise UsageError(f"unknown schedule kind {self.kind!r}")
        if self.kind == "constant" and self.lam < 0:
            raise UsageError("lambda must be non-negative")
        if self.kind == "linear" and self.lam_tilde < 0:
            raise UsageError("lambda_tilde must be non-negative")
        if self.kind == "tabulated":
            tab = np.asarray(self.table, dtype=float)
            if tab.ndim != 2 or tab.shape[1] != 2 or len(tab) == 0:
                raise UsageError("tabulated schedule needs (time, rate) rows")
            if np.any(np.diff(tab[:, 0]) <= 0):
                raise UsageError("schedule times must be strictly increasing")
            if np.any(tab[:, 1] < 0):
                raise UsageError("rates must be non-negative")
            object.__setattr__(self, "table", tuple(map(tuple, tab)))

    @classmethod
    def constant(cls, lam) -> "LambdaSchedule":
        return cls("constant", lam=float(lam))

    @classmethod
    def linear(cls, lam_tilde) -> "LambdaSchedule":
        return cls("linear", lam_tilde=float(lam_tilde))

    @property
    def is_constant(self) -> bool:
        return self.kind == "constant"

    def rate(self, t) -> float:
        if self.kind == "constant":
            return self.lam
        if self.kind == "linear":
            return self.lam_tilde * t
        tab = np.asarray(self.table)
        return float(np.interp(t, tab[:, 0], tab[:, 1]))

    def max_rate(self, t_end) -> float:
        if self.kind == "constant":
            return self.lam
        if self.kind == "linear":
            return self.lam_tilde * abs(t_end)
        tab = np.asarray(self.table)
        inside = tab[tab[:, 0] <= t_end, 1]
        return float(max(np.max(inside, initial=0.0), self.rate(0.0), self.rate(t_end)))


@dataclass(frozen=True)
class LindbladModel:
    omega: float
    dissipatorA: DissipatorMatrix = field(default_factory=DissipatorMatrix)
    dissipatorB: DissipatorMatrix = field(default_factory=DissipatorMatrix)
    schedule: LambdaSchedule = field(default_factory=LambdaSchedule)
    local: tuple = (0.0, 0.0)

    def max_rate(self, t_end) -> float:
        d = max(self.dissipatorA.max_rate, self.dissipatorB.max_rate)
        return d * self.schedule.max_rate(t_end)


def dephasing_model(omega, lam=0.0, lam_tilde=None) -> LindbladModel:
    """Pure dephasing on both sites (``Kx = Ky``); linear schedule if ``lam_tilde`` is given."""
    sched = LambdaSchedule.constant(lam) if lam_tilde is None else LambdaSchedule.linear(lam_tilde)
    d = DissipatorMatrix.dephasing(1.0)
    return LindbladModel(omega, d, d, sched)


@dataclass(frozen=True)
class DissipatorCheck:
    violations: tuple

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self) -> bool:
        return self.ok


def _probe_states(rng, n_random=6):
    states = []
    one = [np.array([1, 0]), np.array([0, 1]), np.array([1, 1]) / np.sqrt(2),
           np.array([1, -1]) / np.sqrt(2), np.array([1, 1j]) / np.sqrt(2),
           np.array([1, -1j]) / np.sqrt(2)]
    for a in one:
        for b in one:
            states.append(np.kron(a, b))
    states.append(np.array([1, 0, 0, 1]) / np.sqrt(2))
    states.append(np.array([0, 1, 1, 0]) / np.sqrt(2))
    states.append(np.array([0, 1, -1, 0]) / np.sqrt(2))
    for _ in range(n_random):
        v = rng.normal(size=4) + 1j * rng.normal(size=4)
        states.append(v / np.linalg.norm(v))
    return [np.outer(s, s.conj()) for s in states]


def validate_dissipator(D: DissipatorMatrix, n_times=21) -> DissipatorCheck:
    """Check rate signs, pairwise minors and trajectory positivity.

    The probe evolves Pauli eigenstates, Bell states and a few random pure
    states under ``D`` on both sites (no coherent part) over
    ``[0, 5 / max rate]`` and flags any eigenvalue below ``-1e-9``.
    """
    if isinstance(D, np.ndarray):
        D = DissipatorMatrix.from_matrix(D)
    bad = []
    for name in ("Kx", "Ky", "Kz"):
        if getattr(D, name) < 0:
            bad.append(f"negative rate {name}={getattr(D, name)}")
    for f, a, b in (("fxy", "Kx", "Ky"), ("fxz", "Kx", "Kz"), ("fyz", "Ky", "Kz")):
        fv, av, bv = getattr(D, f), getattr(D, a), getattr(D, b)
        if fv**2 > av * bv:
            bad.append(f"{f}^2={fv**2:.6g} exceeds {a}*{b}={av * bv:.6g}")
    rate = D.max_rate
    if rate > 0:
        gen = _dissipative_generator(D, D)
        t_end = 5.0 / rate
        step = expm(gen * (t_end / (n_times - 1)))
        worst = np.inf
        for rho in _probe_states(np.random.default_rng(0)):
            r = pauli_decompose(rho).ravel()
            for _ in range(n_times - 1):
                r = step @ r
                worst = min(worst, np.linalg.eigvalsh(pauli_reconstruct(r))[0])
        if worst < -POSITIVITY_TOL:
            bad.append(f"positivity probe: eigenvalue {worst:.3g} along trajectory")
    return DissipatorCheck(tuple(bad))


def _coherent_generator(omega, local=(0.0, 0.0)):
    ca, cb = local
    H = -omega * PAULI2[3, 3] + ca * PAULI2[3, 0] + cb * PAULI2[0, 3]
    P = PAULI2.reshape(16, 4, 4)
    # G[p, q] = Tr(P_p (-i [H, P_q])) / 4
    comm = -1j * (np.einsum("ij,qjk->qik", H, P) - np.einsum("qij,jk->qik", P, H))
    G = np.einsum("pij,qji->pq", P, comm) / 4
    return G.real


def _dissipative_generator(DA, DB):
    eye = np.eye(4)
    return -2.0 * (np.kron(DA.matrix, eye) + np.kron(eye, DB.matrix))


@lru_cache(maxsize=256)
def _cached_check(D):
    return validate_dissipator(D)


def _require_valid(model):
    for D in (model.dissipatorA, model.dissipatorB):
        check = _cached_check(D)
        if not check:
            raise UsageError("invalid dissipator: " + "; ".join(check.violations))


def gksl_generator(model: LindbladModel, t=0.0) -> np.ndarray:
    """16x16 real matrix ``G(t)`` with ``d vec(r)/dt = G(t) vec(r)``.

    ``vec(r)[4 * mu + nu] = r[mu, nu]``; the ``r[0, 0]`` row is zero.
    """
    _require_valid(model)
    coh = _coherent_generator(model.omega, model.local)
    return coh + model.schedule.rate(t) * _dissipative_generator(model.dissipatorA, model.dissipatorB)


def _step_size(model, t_end):
    scale = max(abs(model.omega), model.max_rate(t_end), *map(abs, model.local))
    if scale == 0:
        return max(t_end, 1.0)
    return STEP_SCALE / scale


def _rk4(coh, diss, sched, r, t0, t1, h):
    n = max(1, int(np.ceil((t1 - t0) / h - 1e-12)))
    h = (t1 - t0) / n
    if sched.is_constant:
        # one RK4 step of a linear autonomous system is a fixed matrix
        hg = h * (coh + sched.rate(t0) * diss)
        step = np.eye(16) + hg @ (np.eye(16) + hg @ (np.eye(16) / 2 + hg @ (np.eye(16) / 6 + hg / 24)))
        for _ in range(n):
            r = step @ r
        return r
    t = t0
    for _ in range(n):
        g0 = coh + sched.rate(t) * diss
        gm = coh + sched.rate(t + h / 2) * diss
        g1 = coh + sched.rate(t + h) * diss
        k1 = g0 @ r
        k2 = gm @ (r + h / 2 * k1)
        k3 = gm @ (r + h / 2 * k2)
        k4 = g1 @ (r + h * k3)
        r = r + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        t += h
    return r


def _check(rho, tol, t):
    report = validate_density_matrix(rho, tol)
    if not report:
        raise IntegrityError(f"state at t={t:.6g} is unphysical: {'; '.join(report.failures())}")
    return rho


def evolve_trajectory(model: LindbladModel, rho0, times, method="exponential",
                      self_check=True, tol=POSITIVITY_TOL):
    """Evolve ``rho0`` and return the states at every time in ``times``.

    Parameters
    ----------
    method : {"exponential", "stepped"}
        ``exponential`` exponentiates the constant generator and is only valid
        for constant schedules.  ``stepped`` is fixed-step classical RK4 with
        ``h <= 1e-3 / max(|omega|, max rate)``; with ``self_check`` it is
        repeated at ``h / 2`` and the two runs must agree to 1e-9.
    tol : float
        Positivity/trace/Hermiticity tolerance for every returned state.

    Returns
    -------
    (len(times), 4, 4) ndarray
    """
    _require_valid(model)
    times = np.asarray(times, dtype=float)
    if times.ndim != 1 or np.any(times < 0) or np.any(np.diff(times) < 0):
        raise UsageError("times must be a non-decreasing sequence of non-negative values")
    r0 = pauli_decompose(rho0).ravel()
    if method == "exponential":
        if not model.schedule.is_constant:
            raise UsageError("exponential method requires a constant schedule")
        G = gksl_generator(model, 0.0)
        rs = [expm(G * t) @ r0 for t in times]
    elif method == "stepped":
        t_end = float(times[-1]) if times.size else 0.0
        h = _step_size(model, t_end)
        rs = _stepped(model, r0, times, h)
        if self_check and times.size:
            fine = _stepped(model, r0, times, h / 2)
            err = max(np.max(np.abs(pauli_reconstruct(a) - pauli_reconstruct(b)))
                      for a, b in zip(rs, fine))
            if err > 1e-9:
                raise IntegrityError(f"step-halving check failed: deviation {err:.3g}")
            rs = fine
    else:
        raise UsageError(f"unknown method {method!r}")
    out = np.array([pauli_reconstruct(r) for r in rs]).reshape(len(times), 4, 4)
    for t, rho in zip(times, out):
        _check(rho, tol, t)
    return out


def _stepped(model, r0, times, h):
    coh = _coherent_generator(model.omega, model.local)
    diss = _dissipative_generator(model.dissipatorA, model.dissipatorB)
    r, t_prev, out = r0, 0.0, []
    for t in times:
        if t > t_prev:
            r = _rk4(coh, diss, model.schedule, r, t_prev, t, h)
            t_prev = t
        out.append(r)
    return out


def evolve(model: LindbladModel, rho0, t, method="exponential", **kw) -> np.ndarray:
    """State at a single time ``t``; see :func:`evolve_trajectory`."""
    return evolve_trajectory(model, rho0, [t], method, **kw)[0]


def dephasing_closed_form(omega, lam, t) -> np.ndarray:
    """Exact state from ``|++>`` under dephasing ``Kx = Ky = lam`` on both sites."""
    if lam < 0:
        raise UsageError("lambda must be non-negative")
    single = np.exp(-2 * lam * t)
    double = np.exp(-4 * lam * t)
    return commuting_state(omega, t, single, single, double, double)


def dephasing_time_dependent(omega, lam_tilde, t) -> np.ndarray:
    """Exact state for ``lambda(t) = lam_tilde * t``.

    The accumulated dephasing ``2 * int_0^t lam_tilde s ds = lam_tilde t^2``
    replaces ``2 lam t``; the generators at different times commute.
    """
    if lam_tilde < 0:
        raise UsageError("lambda_tilde must be non-negative")
    single = np.exp(-lam_tilde * t**2)
    double = np.exp(-2 * lam_tilde * t**2)
    return commuting_state(omega, t, single, single, double, double)


def lindblad_concurrence_rate(omega, lam) -> float:
    """Coefficient of the term linear in ``t`` of the dephasing concurrence.

    ``sqrt(lam^2 + 2 w^2 + D) - sqrt(lam^2 + 2 w^2 - D) - 2 lam`` with
    ``D = 2 sqrt(w^2 (lam^2 + w^2))``.  Negative when ``lam > |omega|``; not
    clamped here.
    """
    if lam < 0:
        raise UsageError("lambda must be non-negative")
    w2 = omega * omega
    delta = 2.0 * np.sqrt(w2 * (lam * lam + w2))
    base = lam * lam + 2.0 * w2
    return float(np.sqrt(base + delta) - np.sqrt(max(base - delta, 0.0)) - 2.0 * lam)

