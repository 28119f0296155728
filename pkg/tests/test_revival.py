import math

import numpy as np
import pytest

from jcphase import phasespace as ps
from jcphase import revival as rv
from jcphase.operators import MINUS, PLUS, dag, make_space

ALPHA = math.sqrt(3)


@pytest.fixture(scope="module")
def params():
    return rv.RevivalParams(ALPHA, 30)


def test_truncation_floor():
    assert rv.min_truncation(ALPHA) == pytest.approx(2 * ALPHA * (ALPHA + 1))
    with pytest.raises(ValueError):
        rv.RevivalParams(ALPHA, 9)
    with pytest.raises(ValueError):
        rv.RevivalParams(-1.0)


def test_branches_orthonormal(params):
    u = rv.branch_state(params, "U", 3.7)
    l = rv.branch_state(params, "L", 3.7)
    assert abs(np.vdot(u, u) - 1) < 1e-12
    assert abs(np.vdot(u, l)) < 1e-12
    with pytest.raises(ValueError):
        rv.branch_state(params, "X", 0.0)


def test_initial_transformed_state_is_displaced_vacuum(params):
    psi = rv.transformed_state(params, 0.0)
    c = rv.coherent_coefficients(ALPHA, params.n_trunc + 1)
    sp = params.space
    expected = np.zeros(sp.dim)
    for n, cn in enumerate(c):
        expected[sp.index(n, PLUS)] = cn
    assert np.allclose(psi, expected / np.linalg.norm(expected), atol=1e-12)
    assert rv.mean_photon_number(params, 0.0) == pytest.approx(0.0, abs=1e-10)


def test_lab_hamiltonian_is_hermitian():
    h = rv.lab_hamiltonian(1.3, make_space(6))
    assert np.allclose(h, dag(h))


def test_vacuum_rabi_limit():
    p = rv.RevivalParams(0.0, 4)
    t = np.linspace(0, 6, 13)
    assert np.allclose(rv.mean_photon_number(p, t), np.sin(t) ** 2, atol=1e-12)


def test_photon_number_matches_direct_evolution(params):
    times = [5.0, 40.0, 120.0]
    states = rv.schrodinger_oracle(params, times, n_max=60)
    sp = make_space(60)
    a = np.kron(np.diag(np.sqrt(np.arange(1, sp.n_cav)), 1), np.eye(2))
    for t, psi in zip(times, states):
        direct = np.vdot(a @ psi, a @ psi).real
        assert rv.mean_photon_number(params, t) == pytest.approx(direct, abs=1e-8)


def test_series_matches_direct_evolution(params):
    z = ps.PhaseGrid.square(4.0, 31).points()
    for t in (0.0, 17.0, 60.0):
        psi = rv.schrodinger_oracle(params, t, n_max=60)
        assert np.max(np.abs(rv.oracle_q(params, psi, z) - rv.revival_q(params, z, t))) < 1e-8


def test_series_equals_branch_sum(params):
    z = np.array([0.3 - 1.1j, -1.5 + 0.2j])
    t = 42.0
    psi = rv.transformed_state(params, t)
    sp = params.space
    rho_c = np.einsum("isjs->ij", np.outer(psi, psi.conj()).reshape(sp.n_cav, 2, sp.n_cav, 2))
    assert np.allclose(ps.husimi_q(rho_c, z), rv.revival_q(params, z, t), atol=1e-12)


def test_q_is_normalized_and_conjugation_symmetric(params):
    grid = ps.PhaseGrid.square(5.5, 221)
    q = rv.revival_q(params, grid.points(), 230.67)
    assert abs(ps.PhaseField(grid, q, "husimi").integral() - 1) < 1e-6
    z = np.array([0.4 + 1.2j, -1.0 - 0.3j])
    assert np.allclose(rv.revival_q(params, z, 249.3), rv.revival_q(params, z.conj(), 249.3))


def test_truncation_convergence():
    z = ps.PhaseGrid.square(4.0, 41).points()
    lo = rv.revival_q(rv.RevivalParams(ALPHA, 30), z, 230.67)
    hi = rv.revival_q(rv.RevivalParams(ALPHA, 60), z, 230.67)
    assert np.max(np.abs(lo - hi)) < 1e-12


def test_asymptotic_form():
    p = rv.RevivalParams(ALPHA, 30)
    z = np.array([0.0, 1.0 + 0.5j, -1.2j])
    assert np.allclose(rv.revival_q_asymptotic(p, z, 0.0), rv.revival_q(p, z, 0.0), atol=1e-14)
    # the sum-frequency terms are not negligible at small alpha0
    assert np.max(np.abs(rv.revival_q_asymptotic(p, z, 10.0) - rv.revival_q(p, z, 10.0))) > 1e-3


def test_asymptotic_discrepancy_shrinks_with_amplitude():
    rng = np.random.default_rng(0)
    ratios = []
    for a0, nt in ((4.0, 50), (8.0, 150)):
        p = rv.RevivalParams(a0, nt)
        z = rng.uniform(-a0 - 2, a0 + 2, 2000) + 1j * rng.uniform(-a0 - 2, a0 + 2, 2000)
        full = rv.revival_q(p, z, 10.0)
        ratios.append(np.max(np.abs(full - rv.revival_q_asymptotic(p, z, 10.0))) / full.max())
    assert ratios[1] < 0.5 * ratios[0]
