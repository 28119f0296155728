import math

import numpy as np
import pytest
import scipy.linalg as sl
from hypothesis import given, strategies as st

from jcphase import acceptance, effective_model as em, master_equation as me
from jcphase import phasespace as ps
from jcphase.operators import annihilation, dag, dressed_state, make_space


@pytest.fixture(scope="module")
def p247():
    return em.effective_params(acceptance.resonant_params(0.247))


def test_reported_drive_parameters(p247):
    assert abs(p247.Omega - 4.54) < 0.01
    assert abs(abs(p247.eps_d) - 28.32) < 0.05
    assert abs(2 * math.pi / p247.nu - 0.006226) < 1e-6


def test_resonant_detuning(p247):
    params = acceptance.resonant_params(0.247)
    expected = -500 / math.sqrt(2) - math.sqrt(2) * p247.eps_d ** 2 / 500
    assert math.isclose(params.delta_omega_d, expected)
    assert abs(params.delta_omega_d + 355.82) < 0.01


@given(st.floats(1e-4, 0.2499))
def test_epsilon_round_trip(p3):
    eps = em.epsilon_from_p3(p3, 500.0)
    p = em.effective_params(me.SystemParams(g=500.0, eps_d=eps))
    assert math.isclose(p.p3, p3, rel_tol=1e-10)


def test_rejects_unequal_rates():
    with pytest.raises(ValueError):
        em.effective_params(me.SystemParams(g=500.0, kappa=1.0, gamma=1.0, eps_d=3.0))
    with pytest.raises(ValueError):
        em.epsilon_from_p3(0.25, 500.0)


def test_decay_rates():
    p = em.effective_params(me.SystemParams(g=100.0, eps_d=2.0))
    assert math.isclose(p.Gamma31 + p.Gamma32, 2.0)  # (1/4)[2 + 2 (sqrt2^2 + 1)] gamma
    assert math.isclose(p.Gamma, 1.0)


def _closed_vs_generator(p, start, taus):
    gen = em.effective_liouvillian(p)
    rho0 = start.matrix()
    consts = em.TransientConstants.from_initial(p, start.rho00, start.pop12, start.rho33, start.rho12)
    for tau in taus:
        ref = (sl.expm(gen * tau) @ rho0.ravel()).reshape(4, 4)
        got = em.four_level_state(consts, p, tau)
        assert abs(got.rho00 - ref[0, 0]) < 1e-10
        assert abs(got.rho33 - ref[3, 3]) < 1e-10
        assert abs(got.pop12 - (ref[1, 1] + ref[2, 2])) < 1e-10
        assert abs(got.rho12 - ref[1, 2]) < 1e-10
        assert abs(got.rho03 - ref[0, 3]) < 1e-10


def test_conditional_transient_matches_generator(p247):
    _closed_vs_generator(p247, em.conditional_state(), [0.0, 0.05, 0.3549, 0.5401, 2.0])


def test_conditional_constants(p247):
    c = em.conditional_constants(p247)
    assert c.C_prime == pytest.approx(0.0, abs=1e-15)
    assert np.trace(em.conditional_state().matrix()) == pytest.approx(1.0)


def test_long_time_limit_is_steady(p247):
    late = em.four_level_state(em.conditional_constants(p247), p247, 60.0)
    ss = em.steady_four_level(p247)
    assert abs(late.rho33 - ss.rho33) < 1e-12
    assert abs(late.rho03 - ss.rho03) < 1e-12
    assert ss.rho33 == pytest.approx(p247.p3)


def test_steady_state_is_generator_kernel(p247):
    gen = em.effective_liouvillian(p247)
    w, v = np.linalg.eig(gen)
    rho = v[:, np.argmin(np.abs(w))].reshape(4, 4)
    rho /= np.trace(rho)
    ss = em.steady_four_level(p247)
    assert abs(rho[3, 3] - ss.rho33) < 1e-12
    assert abs(rho[0, 3] - ss.rho03) < 1e-12


@pytest.mark.parametrize("p3", [0.0, 0.05, 0.2, 0.24, 0.249])
def test_steady_wigner_matches_density_matrix(p3, rng):
    p = em.effective_params(acceptance.resonant_params(p3))
    rho_c = em.cavity_density_matrix(em.steady_four_level(p), n_cav=5)
    pts = rng.uniform(-3, 3, 50) + 1j * rng.uniform(-3, 3, 50)
    assert np.max(np.abs(ps.wigner(rho_c, pts) - em.steady_state_wigner(p3, pts))) < 1e-12


def test_vacuum_limit():
    z = np.array([0.0, 0.3 + 0.2j])
    assert np.allclose(em.steady_state_wigner(0.0, z), 2 / np.pi * np.exp(-2 * np.abs(z) ** 2))


@pytest.mark.parametrize("p3", [0.005, 0.1, 0.247])
def test_g2_zero_delay_from_cavity_state(p3):
    p = em.effective_params(acceptance.resonant_params(p3))
    rho_c = em.cavity_density_matrix(em.steady_four_level(p), n_cav=4)
    a = annihilation(make_space(3))[::2, ::2]
    n = np.trace(dag(a) @ a @ rho_c).real
    direct = np.trace(dag(a) @ dag(a) @ a @ a @ rho_c).real / n ** 2
    assert em.g2_analytic(p, 0.0) == pytest.approx(direct, rel=1e-12)


def test_g2_matches_four_level_regression(p247):
    # propagate a rho_ss a^dag with the four-level generator
    sp = make_space(4)
    vecs = np.column_stack([dressed_state(sp, k) for k in range(4)])
    a = dag(vecs) @ annihilation(sp) @ vecs
    gen = em.effective_liouvillian(p247)
    w, v = np.linalg.eig(gen)
    rho = v[:, np.argmin(np.abs(w))].reshape(4, 4)
    rho /= np.trace(rho)
    n_op = dag(a) @ a
    n = np.trace(n_op @ rho).real
    start = (a @ rho @ dag(a)).ravel() / n
    for tau in (0.01, 0.1, 0.3549, 0.5401, 3.0):
        r = (sl.expm(gen * tau) @ start).reshape(4, 4)
        assert np.trace(n_op @ r).real / n == pytest.approx(em.g2_analytic(p247, tau), abs=1e-10)


def test_g2_landmarks_and_limits(p247):
    assert em.g2_analytic(p247, 0.0) == pytest.approx(0.65, abs=0.01)
    assert em.g2_analytic(p247, 10.0) == pytest.approx(1.0, abs=0.01)
    assert em.g2_analytic(p247, -0.3) == em.g2_analytic(p247, 0.3)
    low = em.effective_params(acceptance.resonant_params(0.005))
    assert em.g2_analytic(low, 0.0) == pytest.approx(4 / (25 * 0.005))


def test_beat_averaged_g2_has_a_cusp(p247):
    # one-sided slope at zero delay is -3/(25 p3), so the curvature test cannot succeed
    h = 1e-7
    slope = (em.g2_analytic(p247, h, include_beat=False) - em.g2_analytic(p247, 0.0, include_beat=False)) / h
    assert slope == pytest.approx(-3 / (25 * 0.247), rel=1e-4)


def test_split_required_for_matrix(p247):
    with pytest.raises(ValueError):
        em.steady_four_level(p247).matrix()
