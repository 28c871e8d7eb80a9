"""Exact reduced dynamics of two qubits in a commuting many-body environment.

The full Hamiltonian is diagonal in the product basis ``|a_i b_j e_k>``:

    E(i, j, k) = -omega s_i s_j + hA[i, k] + hB[j, k] + eps[k],   s = (+1, -1)

so the joint AB state after tracing out the environment is fixed by the
weights ``|f_k|^2`` and the coupling differences ``chi_{alpha,k} = h^alpha_{1k}
- h^alpha_{2k}``.  Both qubits start in ``(|1> + |2>)/sqrt(2)``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ResourceError
from .qcore import commuting_state, reduce_couplings

__all__ = [
    "MAX_ENV_QUBITS",
    "ResourceError",
    "MicroModel",
    "EnvMoments",
    "GravitationalSpec",
    "random_micro_model",
    "gamma",
    "lambda_pm",
    "reduced_state",
    "isolated_state",
    "brute_force_reduced_state",
    "mixed_environment_reduced_state",
    "env_moments",
    "gaussian_offdiagonals",
    "micro_shorttime_purity",
    "gravitational_model",
    "predicted_gravitational_sigma2",
    "isolated_concurrence",
]

MAX_ENV_QUBITS = 12
_SIGNS = np.array([1.0, -1.0])


@dataclass(frozen=True)
class MicroModel:
    """Two qubits with diagonal couplings to an ``M``-level environment.

    Attributes
    ----------
    omega : float
        Entangling strength in ``-omega Z_A Z_B``.
    hA, hB : (2, M) ndarray
        ``hA[i, k]`` is the energy of ``|a_i e_k>`` in the A-environment term.
    weights : (M,) ndarray
        ``|f_k|^2``, summing to one.
    phases : (M,) ndarray
        ``arg f_k`` in radians.
    energies : (M,) ndarray
        Environment eigenvalues ``eps_k``. They never affect the AB state.
    """

    omega: float
    hA: np.ndarray
    hB: np.ndarray
    weights: np.ndarray
    phases: np.ndarray = None
    energies: np.ndarray = None
    seed: int | None = field(default=None, compare=False)

    def __post_init__(self):
        hA = np.array(self.hA, dtype=float, ndmin=2)
        hB = np.array(self.hB, dtype=float, ndmin=2)
        w = np.array(self.weights, dtype=float, ndmin=1)
        m = w.size
        if m < 1:
            raise ValueError("environment dimension must be at least 1")
        if hA.shape != (2, m) or hB.shape != (2, m):
            raise ValueError(f"coupling tables must have shape (2, {m})")
        ph = np.zeros(m) if self.phases is None else np.array(self.phases, dtype=float)
        en = np.zeros(m) if self.energies is None else np.array(self.energies, dtype=float)
        if ph.shape != (m,) or en.shape != (m,):
            raise ValueError(f"phases and energies must have shape ({m},)")
        for name, arr in (("hA", hA), ("hB", hB), ("weights", w), ("phases", ph), ("energies", en)):
            if not np.all(np.isfinite(arr)):
                raise ValueError(f"{name} has non-finite entries")
        if not np.isfinite(self.omega):
            raise ValueError("omega must be finite")
        if np.any(w < 0) or abs(w.sum() - 1) > 1e-12:
            raise ValueError("weights must be non-negative and sum to 1")
        for name, arr in (("hA", hA), ("hB", hB), ("weights", w), ("phases", ph), ("energies", en)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        object.__setattr__(self, "omega", float(self.omega))

    @property
    def M(self) -> int:
        return self.weights.size

    @property
    def chiA(self) -> np.ndarray:
        return self.hA[0] - self.hA[1]

    @property
    def chiB(self) -> np.ndarray:
        return self.hB[0] - self.hB[1]

    def amplitudes(self) -> np.ndarray:
        """Environment initial amplitudes ``f_k``."""
        return np.sqrt(self.weights) * np.exp(1j * self.phases)

    def replace(self, **changes) -> "MicroModel":
        kw = dict(omega=self.omega, hA=self.hA, hB=self.hB, weights=self.weights,
                  phases=self.phases, energies=self.energies, seed=self.seed)
        kw.update(changes)
        return MicroModel(**kw)

    @classmethod
    def decoupled(cls, omega, M=1) -> "MicroModel":
        return cls(omega, np.zeros((2, M)), np.zeros((2, M)), np.full(M, 1.0 / M))


def random_micro_model(n_env, omega=1.0, seed=None, coupling_scale=1.0) -> MicroModel:
    """Draw a model with ``M = 2**n_env`` environment levels.

    Couplings are i.i.d. uniform on ``[-coupling_scale, coupling_scale]``,
    weights flat on the simplex, phases uniform on ``[0, 2 pi)`` and
    environment energies uniform on ``[-1, 1]``.
    """
    if n_env > MAX_ENV_QUBITS:
        raise ResourceError(f"n_env={n_env} exceeds the limit of {MAX_ENV_QUBITS}")
    rng = np.random.default_rng(seed)
    m = 2 ** n_env
    hA = rng.uniform(-coupling_scale, coupling_scale, size=(2, m))
    hB = rng.uniform(-coupling_scale, coupling_scale, size=(2, m))
    w = rng.dirichlet(np.ones(m)) if m > 1 else np.ones(1)
    w = w / w.sum()
    phases = rng.uniform(0.0, 2 * np.pi, size=m)
    energies = rng.uniform(-1.0, 1.0, size=m)
    return MicroModel(omega, hA, hB, w, phases, energies, seed=seed)


def _site_chi(model, site):
    if site in ("A", "a"):
        return model.chiA
    if site in ("B", "b"):
        return model.chiB
    raise ValueError(f"site must be 'A' or 'B', got {site!r}")


def gamma(model: MicroModel, site, t) -> complex:
    """``Gamma_site(t) = sum_k |f_k|^2 exp(-i chi_{site,k} t)``."""
    chi = _site_chi(model, site)
    return complex(np.dot(model.weights, np.exp(-1j * chi * t)))


def lambda_pm(model: MicroModel, sign, t) -> complex:
    """``Lambda_pm(t) = sum_k |f_k|^2 exp(-i (chiA_k +/- chiB_k) t)``."""
    if sign in ("+", 1, +1):
        chi = model.chiA + model.chiB
    elif sign in ("-", -1):
        chi = model.chiA - model.chiB
    else:
        raise ValueError(f"sign must be '+' or '-', got {sign!r}")
    return complex(np.dot(model.weights, np.exp(-1j * chi * t)))


def reduced_state(model: MicroModel, t) -> np.ndarray:
    """Closed-form reduced density matrix of the AB pair at time ``t``.

    All populations stay at 1/4; coherences carry ``Gamma_A``, ``Gamma_B``
    (single flips) and ``Lambda_+`` (entry ``|11><22|``), ``Lambda_-``
    (entry ``|12><21|``).
    """
    return commuting_state(
        model.omega, t,
        gamma(model, "A", t), gamma(model, "B", t),
        lambda_pm(model, "+", t), lambda_pm(model, "-", t),
    )


def isolated_state(omega, t) -> np.ndarray:
    """State of the isolated pair, ``exp(i omega t Z Z)|++>``."""
    return commuting_state(omega, t, 1, 1, 1, 1)


def _evolve_full(model, t, env_state, local):
    m = model.M
    ca, cb = local
    zz = np.outer(_SIGNS, _SIGNS)
    e_ab = -model.omega * zz + ca * _SIGNS[:, None] + cb * _SIGNS[None, :]
    # energies indexed (i, j, k)
    energy = (
        e_ab[:, :, None]
        + model.hA[:, None, :]
        + model.hB[None, :, :]
        + model.energies[None, None, :]
    )
    psi0 = 0.5 * np.ones((2, 2, 1)) * env_state[None, None, :]
    psi = (psi0 * np.exp(-1j * energy * t)).reshape(4, m)
    return psi @ psi.conj().T


def brute_force_reduced_state(model: MicroModel, t, local=(0.0, 0.0), env_state=None) -> np.ndarray:
    """Reduced AB state from explicit evolution of the full ``4M``-dim vector.

    Parameters
    ----------
    local : (cA, cB)
        Optional local terms ``cA Z_A + cB Z_B`` added to the Hamiltonian.
    env_state : (M,) array_like, optional
        Initial environment amplitudes; defaults to ``model.amplitudes()``.
    """
    if model.M > 2 ** MAX_ENV_QUBITS:
        raise ResourceError(f"M={model.M} exceeds 2**{MAX_ENV_QUBITS}")
    f = model.amplitudes() if env_state is None else np.asarray(env_state, dtype=complex)
    if f.shape != (model.M,):
        raise ValueError("env_state has the wrong dimension")
    return _evolve_full(model, t, f, local)


def mixed_environment_reduced_state(model: MicroModel, t) -> np.ndarray:
    """Reduced state when the environment starts in ``sum_k |f_k|^2 |e_k><e_k|``."""
    if model.M > 2 ** MAX_ENV_QUBITS:
        raise ResourceError(f"M={model.M} exceeds 2**{MAX_ENV_QUBITS}")
    rho = np.zeros((4, 4), dtype=complex)
    basis = np.eye(model.M)
    for k in np.flatnonzero(model.weights):
        rho += model.weights[k] * _evolve_full(model, t, basis[k], (0.0, 0.0))
    return rho


@dataclass(frozen=True)
class EnvMoments:
    muA: float
    muB: float
    sigmaA2: float
    sigmaB2: float
    sigmaC2: float

    def __post_init__(self):
        if self.sigmaA2 < 0 or self.sigmaB2 < 0:
            raise ValueError("variances must be non-negative")
        bound = np.sqrt(self.sigmaA2 * self.sigmaB2)
        if abs(self.sigmaC2) > bound * (1 + 1e-12) + 1e-15:
            raise ValueError("cross-covariance violates Cauchy-Schwarz")


def env_moments(model: MicroModel) -> EnvMoments:
    """Weighted means, variances and cross-covariance of ``chi_A``, ``chi_B``."""
    w = model.weights
    xa, xb = model.chiA, model.chiB
    mua, mub = float(w @ xa), float(w @ xb)
    da, db = xa - mua, xb - mub
    return EnvMoments(mua, mub, float(w @ da**2), float(w @ db**2), float(w @ (da * db)))


def gaussian_offdiagonals(m: EnvMoments, t):
    """Short-time approximants of ``Gamma_A, Gamma_B, Lambda_+, Lambda_-``.

    Each is a pure phase from the mean plus a Gaussian correction from the
    variance; accurate through ``O(t^2)``.
    """
    ga = np.exp(-1j * m.muA * t) + np.expm1(-m.sigmaA2 * t**2 / 2)
    gb = np.exp(-1j * m.muB * t) + np.expm1(-m.sigmaB2 * t**2 / 2)
    s = m.sigmaA2 + m.sigmaB2
    lp = np.exp(-1j * (m.muA + m.muB) * t) + np.expm1(-(s + 2 * m.sigmaC2) * t**2 / 2)
    lm = np.exp(-1j * (m.muA - m.muB) * t) + np.expm1(-(s - 2 * m.sigmaC2) * t**2 / 2)
    return complex(ga), complex(gb), complex(lp), complex(lm)


def micro_shorttime_purity(m: EnvMoments, t) -> float:
    """Leading-order purity ``1 - (sigmaA2 + sigmaB2) t^2 / 2``.

    The cross-covariance drops out: it enters ``|Lambda_+|^2`` and
    ``|Lambda_-|^2`` with opposite signs.
    """
    return 1.0 - 0.5 * (m.sigmaA2 + m.sigmaB2) * t**2


@dataclass(frozen=True)
class GravitationalSpec:
    """Newtonian environment of ``N`` two-mass-state particles.

    ``dA[n]`` and ``dB[n]`` are the distances of environment particle ``n``
    from A and B; ``d_ab`` is the A-B separation, which sets ``omega``.
    """

    G: float
    m1: float
    m2: float
    dA: tuple
    dB: tuple
    d_ab: float = 1.0

    def __post_init__(self):
        dA = tuple(float(x) for x in self.dA)
        dB = tuple(float(x) for x in self.dB)
        if len(dA) != len(dB) or len(dA) == 0:
            raise ValueError("dA and dB must be non-empty and of equal length")
        if min(dA + dB + (self.d_ab,)) <= 0:
            raise ValueError("distances must be positive")
        object.__setattr__(self, "dA", dA)
        object.__setattr__(self, "dB", dB)

    @property
    def N(self) -> int:
        return len(self.dA)


def predicted_gravitational_sigma2(spec: GravitationalSpec):
    """``(G^2 / 4) (m1 - m2)^4 sum_n d_n^-2`` for each site."""
    pref = spec.G**2 / 4 * (spec.m1 - spec.m2) ** 4
    sa = pref * float(np.sum(1.0 / np.square(spec.dA)))
    sb = pref * float(np.sum(1.0 / np.square(spec.dB)))
    return sa, sb


def gravitational_model(spec: GravitationalSpec, uniform_weights=True, seed=None):
    """Enumerate all ``2**N`` environment mass configurations.

    Configuration ``k`` puts particle ``n`` in mass state ``m1`` if bit ``n``
    of ``k`` is 0 and ``m2`` otherwise.  Couplings are pairwise Newtonian
    energies ``h^alpha[i, k] = -G m_i sum_n m_{s_n(k)} / d_{n alpha}`` and
    ``omega`` follows from the A-B coupling table.

    Returns
    -------
    model : MicroModel
    sigmaA2, sigmaB2 : float
        Closed-form variance prediction (exact for uniform weights).
    """
    n = spec.N
    if n > MAX_ENV_QUBITS:
        raise ResourceError(f"N={n} exceeds the limit of {MAX_ENV_QUBITS}")
    m = 2**n
    k = np.arange(m)
    bits = (k[None, :] >> np.arange(n)[:, None]) & 1
    env_mass = np.where(bits == 0, spec.m1, spec.m2)  # (n, M)
    sys_mass = np.array([spec.m1, spec.m2])
    pot_a = (env_mass / np.asarray(spec.dA)[:, None]).sum(axis=0)
    pot_b = (env_mass / np.asarray(spec.dB)[:, None]).sum(axis=0)
    hA = -spec.G * sys_mass[:, None] * pot_a[None, :]
    hB = -spec.G * sys_mass[:, None] * pot_b[None, :]
    g = -spec.G * np.outer(sys_mass, sys_mass) / spec.d_ab
    *_, omega = reduce_couplings(g)
    if uniform_weights:
        w = np.full(m, 1.0 / m)
    else:
        w = np.random.default_rng(seed).dirichlet(np.ones(m))
    model = MicroModel(omega, hA, hB, w, seed=seed)
    sa, sb = predicted_gravitational_sigma2(spec)
    return model, sa, sb


def isolated_concurrence(omega, t) -> float:
    """Concurrence ``|sin(2 |omega| t)|`` of the isolated pair."""
    return float(min(1.0, abs(np.sin(2 * abs(omega) * t))))
