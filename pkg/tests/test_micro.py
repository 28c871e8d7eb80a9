import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from lindgap.errors import ResourceError
from lindgap.micro import (
    EnvMoments,
    GravitationalSpec,
    MicroModel,
    brute_force_reduced_state,
    env_moments,
    gamma,
    gaussian_offdiagonals,
    gravitational_model,
    isolated_concurrence,
    isolated_state,
    lambda_pm,
    micro_shorttime_purity,
    mixed_environment_reduced_state,
    random_micro_model,
    reduced_state,
)
from lindgap.observables import concurrence, purity
from lindgap.qcore import PLUS_PLUS, validate_density_matrix


def two_point(c, omega=1.0, chi_b=None):
    """Two equally weighted environment states with chi_A = (+c, -c)."""
    chi_b = (c, -c) if chi_b is None else chi_b
    hA = np.array([[c / 2, -c / 2], [-c / 2, c / 2]])
    hB = np.array([[chi_b[0], chi_b[1]], [0.0, 0.0]])
    return MicroModel(omega, hA, hB, [0.5, 0.5])


# ------------------------------------------------------------- model

def test_model_validation():
    with pytest.raises(ValueError):
        MicroModel(1.0, np.zeros((2, 2)), np.zeros((2, 2)), [0.5, 0.6])
    with pytest.raises(ValueError):
        MicroModel(1.0, np.zeros((2, 3)), np.zeros((2, 2)), [0.5, 0.5])
    with pytest.raises(ValueError):
        MicroModel(1.0, [[np.inf, 0], [0, 0]], np.zeros((2, 2)), [0.5, 0.5])


def test_random_model_reproducible():
    a = random_micro_model(4, seed=7)
    b = random_micro_model(4, seed=7)
    assert np.array_equal(a.hA, b.hA) and np.array_equal(a.weights, b.weights)
    assert a.M == 16 and abs(a.weights.sum() - 1) <= 1e-12
    assert np.all(np.abs(a.hA) <= 1) and np.all((0 <= a.phases) & (a.phases < 2 * np.pi))


# ------------------------------------------------------------- Gamma, Lambda

def test_gamma_identically_one_without_state_dependence(rng):
    h = rng.uniform(-1, 1, size=8)
    model = MicroModel(1.0, np.vstack([h, h]), np.vstack([h, h]), rng.dirichlet(np.ones(8)))
    for t in (0.0, 0.3, 7.0, 100.0):
        assert gamma(model, "A", t) == pytest.approx(1, abs=1e-15)
        assert gamma(model, "B", t) == pytest.approx(1, abs=1e-15)


def test_gamma_single_level():
    c = 0.7
    model = MicroModel(1.0, [[c], [0.0]], [[0.0], [0.0]], [1.0])
    for t in (0.1, 1.0, 5.0):
        g = gamma(model, "A", t)
        assert g == pytest.approx(np.exp(-1j * c * t), abs=1e-15)
        assert abs(g) == pytest.approx(1, abs=1e-15)


def test_gamma_two_point_is_cosine():
    c = 1.3
    model = two_point(c)
    for t in np.linspace(0, 5, 11):
        # (e^{-ict} + e^{ict}) / 2
        assert gamma(model, "A", t) == pytest.approx(np.cos(c * t), abs=1e-15)


def test_gamma_bounds_and_origin(rng):
    model = random_micro_model(5, seed=1)
    assert gamma(model, "A", 0.0) == pytest.approx(1)
    for t in rng.uniform(0, 20, size=20):
        assert abs(gamma(model, "A", t)) <= 1 + 1e-15
        assert abs(lambda_pm(model, "+", t)) <= 1 + 1e-15
    with pytest.raises(ValueError):
        gamma(model, "C", 1.0)


def test_lambda_examples():
    zero = MicroModel.decoupled(1.0, M=4)
    assert lambda_pm(zero, "+", 3.0) == pytest.approx(1)
    assert lambda_pm(zero, "-", 3.0) == pytest.approx(1)
    # chi_B = -chi_A cancels in Lambda_+
    model = two_point(0.9, chi_b=(-0.9, 0.9))
    for t in (0.5, 2.0, 9.0):
        assert lambda_pm(model, "+", t) == pytest.approx(1, abs=1e-15)
    c = 0.6
    model = two_point(c)
    for t in (0.5, 2.0, 9.0):
        assert lambda_pm(model, "+", t) == pytest.approx(np.cos(2 * c * t), abs=1e-15)
        assert lambda_pm(model, "-", t) == pytest.approx(1, abs=1e-15)


# ------------------------------------------------------------- reduced state

def test_reduced_state_at_zero_is_plus_plus():
    model = random_micro_model(3, seed=2)
    assert np.allclose(reduced_state(model, 0.0), PLUS_PLUS, atol=1e-15)
    assert np.allclose(brute_force_reduced_state(model, 0.0), PLUS_PLUS, atol=1e-15)
    assert np.allclose(mixed_environment_reduced_state(model, 0.0), PLUS_PLUS, atol=1e-15)


def test_decoupled_reproduces_isolated_concurrence():
    for omega in (0.3, -1.2):
        model = MicroModel.decoupled(omega, M=8)
        for t in np.linspace(0, np.pi / abs(omega), 25):
            rho = reduced_state(model, t)
            assert np.allclose(rho, isolated_state(omega, t), atol=1e-15)
            assert concurrence(rho) == pytest.approx(abs(np.sin(2 * abs(omega) * t)), abs=1e-10)


def test_isolated_state_is_explicit_unitary_evolution():
    omega, t = 0.8, 1.1
    zz = np.diag([1, -1, -1, 1])
    U = np.diag(np.exp(1j * omega * t * np.diag(zz)))  # exp(-i H t), H = -omega ZZ
    psi = U @ np.full(4, 0.5)
    assert np.allclose(isolated_state(omega, t), np.outer(psi, psi.conj()), atol=1e-15)


@pytest.mark.parametrize("seed", range(6))
def test_oracle_equivalence(seed):
    model = random_micro_model(2 + seed, omega=0.5 + 0.3 * seed, seed=seed)
    for t in np.linspace(0, 5 / abs(model.omega), 12):
        a = reduced_state(model, t)
        b = brute_force_reduced_state(model, t)
        assert np.max(np.abs(a - b)) <= 1e-10
        assert np.allclose(np.diag(a), 0.25, atol=1e-15)
        assert validate_density_matrix(a, 1e-9).ok


def test_lambda_slots_fixed_by_oracle():
    # Lambda_+ and Lambda_- must differ, so the slot assignment is visible
    model = two_point(0.6)
    t = 1.3
    rho = brute_force_reduced_state(model, t)
    assert 4 * rho[0, 3] == pytest.approx(lambda_pm(model, "+", t), abs=1e-14)
    assert 4 * rho[1, 2] == pytest.approx(lambda_pm(model, "-", t), abs=1e-14)


def test_brute_force_trivial_hamiltonian():
    model = MicroModel(0.0, np.zeros((2, 4)), np.zeros((2, 4)), np.full(4, 0.25),
                       energies=[0.3, -2.0, 5.0, 1.0])
    for t in (0.5, 3.0):
        assert np.allclose(brute_force_reduced_state(model, t), PLUS_PLUS, atol=1e-15)


def test_brute_force_independent_of_environment_energies(rng):
    model = random_micro_model(5, seed=3)
    other = model.replace(energies=rng.uniform(-10, 10, size=model.M))
    for t in (0.2, 1.0, 4.0):
        diff = brute_force_reduced_state(model, t) - brute_force_reduced_state(other, t)
        assert np.max(np.abs(diff)) <= 1e-12


def test_brute_force_resource_guard():
    m = 2**13
    model = MicroModel(1.0, np.zeros((2, m)), np.zeros((2, m)), np.full(m, 1.0 / m))
    with pytest.raises(ResourceError):
        brute_force_reduced_state(model, 1.0)
    with pytest.raises(ResourceError):
        random_micro_model(13)


def test_mixed_environment_matches_pure():
    model = random_micro_model(5, seed=4)
    assert np.max(np.abs(mixed_environment_reduced_state(model, 0.7) - reduced_state(model, 0.7))) <= 1e-12
    single = random_micro_model(0, seed=5)
    assert single.M == 1
    assert np.allclose(mixed_environment_reduced_state(single, 0.9),
                       brute_force_reduced_state(single, 0.9), atol=1e-15)


def test_local_terms_leave_concurrence_unchanged():
    model = random_micro_model(4, seed=6)
    for t in np.linspace(0.05, 3, 10):
        c0 = concurrence(brute_force_reduced_state(model, t))
        c1 = concurrence(brute_force_reduced_state(model, t, local=(0.7, -1.9)))
        assert abs(c1 - c0) <= 1e-10


# ------------------------------------------------------------- moments

def test_env_moments_examples():
    m = env_moments(MicroModel.decoupled(1.0, M=4))
    assert (m.muA, m.muB, m.sigmaA2, m.sigmaB2, m.sigmaC2) == (0, 0, 0, 0, 0)
    c = 0.8
    m = env_moments(two_point(c))
    assert m.muA == pytest.approx(0, abs=1e-16)
    assert m.sigmaA2 == pytest.approx(c * c, rel=1e-15)
    h = np.random.default_rng(0).uniform(-1, 1, size=(2, 8))
    model = MicroModel(1.0, h, h, np.full(8, 1 / 8))
    m = env_moments(model)
    assert m.sigmaC2 == pytest.approx(m.sigmaA2) == pytest.approx(m.sigmaB2)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**31 - 1), st.integers(1, 6))
def test_env_moments_cauchy_schwarz(seed, n):
    m = env_moments(random_micro_model(n, seed=seed))
    assert m.sigmaA2 >= 0 and m.sigmaB2 >= 0
    assert abs(m.sigmaC2) <= np.sqrt(m.sigmaA2 * m.sigmaB2) * (1 + 1e-12)


def test_env_moments_rejects_inconsistent():
    with pytest.raises(ValueError):
        EnvMoments(0, 0, 1.0, 1.0, 2.0)


def test_gaussian_offdiagonals_trivial():
    m = env_moments(random_micro_model(3, seed=8))
    assert np.allclose(gaussian_offdiagonals(m, 0.0), 1)
    zero = EnvMoments(0, 0, 0, 0, 0)
    assert np.allclose(gaussian_offdiagonals(zero, 3.3), 1)


def test_gaussian_offdiagonals_remainder_is_third_order():
    c = 1.0
    for model in (two_point(c), random_micro_model(4, seed=9)):
        m = env_moments(model)
        ratios = []
        for t in (1e-2, 1e-3, 1e-4):
            approx = gaussian_offdiagonals(m, t)
            exact = (gamma(model, "A", t), gamma(model, "B", t),
                     lambda_pm(model, "+", t), lambda_pm(model, "-", t))
            ratios.append(max(abs(a - e) for a, e in zip(approx, exact)) / t**3)
        # bounded and not growing as t shrinks
        assert ratios[1] <= ratios[0] * 1.01 + 1e-6
        assert ratios[2] <= ratios[0] * 1.01 + 1e-6
        assert ratios[0] < 10


def test_shorttime_purity_formula():
    assert micro_shorttime_purity(EnvMoments(0, 0, 0, 0, 0), 2.0) == 1.0
    s2 = 0.49
    assert micro_shorttime_purity(EnvMoments(0.1, 0.1, s2, s2, 0.2), 0.3) == pytest.approx(1 - s2 * 0.09)


@pytest.mark.parametrize("seed", range(4))
def test_shorttime_purity_against_exact(seed):
    model = random_micro_model(5, seed=seed)
    m = env_moments(model)
    ratios = []
    for t in (1e-1, 1e-2, 1e-3):
        exact = purity(reduced_state(model, t))
        ratios.append(abs(exact - micro_shorttime_purity(m, t)) / t**3)
    # the cross-covariance cancels: remainder is O(t^4), so the t^3 ratio shrinks
    assert ratios[1] < ratios[0] and ratios[2] < ratios[1]


@pytest.mark.parametrize("seed", range(5))
def test_shorttime_concurrence_and_purity_limits(seed):
    model = random_micro_model(4, omega=0.5 + seed * 0.4, seed=seed)
    m = env_moments(model)
    sigma = np.sqrt(max(m.sigmaA2, m.sigmaB2))
    t = 1e-3 / max(abs(model.omega), sigma)
    assert concurrence(reduced_state(model, t)) / (2 * abs(model.omega) * t) == pytest.approx(1, abs=0.05)
    t = 1e-3 / sigma
    deficit = (1 - purity(reduced_state(model, t))) / t**2
    assert deficit == pytest.approx((m.sigmaA2 + m.sigmaB2) / 2, rel=0.05)


# ------------------------------------------------------------- gravity

def enumerate_sigma2(G, m1, m2, d):
    """Brute-force variance of chi over all equally likely mass configurations."""
    chis = []
    for config in itertools.product((m1, m2), repeat=len(d)):
        pot = sum(mk / dk for mk, dk in zip(config, d))
        chis.append((-G * m1 * pot) - (-G * m2 * pot))
    chis = np.array(chis)
    return float(np.mean((chis - chis.mean()) ** 2))


def test_gravitational_example_n2():
    spec = GravitationalSpec(1.0, 2.0, 1.0, (1.0, 2.0), (1.0, 2.0))
    model, sa, sb = gravitational_model(spec)
    assert sa == pytest.approx(0.3125, abs=1e-15)  # (1/4) * 1 * (1 + 1/4)
    assert enumerate_sigma2(1.0, 2.0, 1.0, (1.0, 2.0)) == pytest.approx(0.3125, abs=1e-12)
    assert env_moments(model).sigmaA2 == pytest.approx(0.3125, abs=1e-12)
    assert model.M == 4


def test_gravitational_random_n8(rng):
    dA, dB = rng.uniform(1, 4, size=8), rng.uniform(1, 4, size=8)
    spec = GravitationalSpec(1.0, 1.5, 0.5, dA, dB)
    model, sa, sb = gravitational_model(spec)
    m = env_moments(model)
    assert abs(m.sigmaA2 - sa) <= 1e-12 and abs(m.sigmaB2 - sb) <= 1e-12
    assert abs(enumerate_sigma2(1.0, 1.5, 0.5, dA) - sa) <= 1e-12


def test_gravitational_equal_masses_decouple():
    spec = GravitationalSpec(1.0, 1.0, 1.0, (1.0, 2.0, 3.0), (2.0, 1.0, 1.5))
    model, sa, sb = gravitational_model(spec)
    m = env_moments(model)
    assert sa == sb == 0.0
    assert m.sigmaA2 == 0.0 and m.sigmaB2 == 0.0
    # only a global mean phase remains, which is local: concurrence matches the isolated pair
    for t in np.linspace(0.1, 2.0, 8):
        assert concurrence(reduced_state(model, t)) == pytest.approx(
            concurrence(isolated_state(model.omega, t)), abs=1e-10)


def test_gravitational_omega_from_coupling_table():
    spec = GravitationalSpec(2.0, 3.0, 1.0, (1.0,), (1.0,), d_ab=4.0)
    model, *_ = gravitational_model(spec)
    # g_ij = -G m_i m_j / d_ab; omega = (g12 + g21 - g11 - g22) / 4 = G (m1 - m2)^2 / (4 d_ab)
    assert model.omega == pytest.approx(2.0 * 4.0 / 16.0)


def test_gravitational_guards():
    with pytest.raises(ResourceError):
        gravitational_model(GravitationalSpec(1, 2, 1, [1.0] * 13, [1.0] * 13))
    with pytest.raises(ValueError):
        GravitationalSpec(1, 2, 1, (1.0, -1.0), (1.0, 1.0))


# ------------------------------------------------------------- isolated baseline

def test_isolated_concurrence_examples():
    assert isolated_concurrence(0.7, 0.0) == 0.0
    assert isolated_concurrence(0.25, np.pi) == pytest.approx(1.0, abs=1e-15)
    model = MicroModel.decoupled(1.3, M=2)
    for t in np.linspace(0, 4, 40):
        assert isolated_concurrence(1.3, t) == pytest.approx(concurrence(reduced_state(model, t)), abs=1e-10)
