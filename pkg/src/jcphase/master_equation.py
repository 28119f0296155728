"""
Full driven, dissipative Jaynes-Cummings master equation.

Everything is written in the frame rotating at the drive frequency, where the
generator is time independent::

    H = -dw (s+s- + a^dag a) + g (a s+ + a^dag s-) + (eps^* a + eps a^dag)

with cavity field decay ``kappa`` (photon loss rate ``2 kappa``) and atomic
spontaneous emission ``gamma``. Density matrices are vectorized row-major
(``rho.ravel()``), for which ``vec(A rho B) = kron(A, B.T) vec(rho)``.
"""

import logging
import warnings
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from scipy.integrate import solve_ivp

from .operators import FockSpace, annihilation, atomic_lowering, dag, dressed_state

__all__ = [
    "SystemParams", "Liouvillian", "build_liouvillian", "hamiltonian",
    "steady_state", "evolve", "partial_trace_cavity", "g2_numeric",
    "embed_dressed", "check_density_matrix", "SteadyStateError",
    "StiffnessError",
]

logger = logging.getLogger(__name__)

DENSE_BELOW = 16


class SteadyStateError(RuntimeError):
    pass


class StiffnessError(RuntimeError):
    pass


@dataclass(frozen=True)
class SystemParams:
    """Rates of the driven JC model, all in the same (arbitrary) frequency unit.

    The defaults are the strong-coupling regime g/kappa = 1000 with
    gamma = 2 kappa, in units of gamma.
    """

    g: float = 500.0
    kappa: float = 0.5
    gamma: float = 1.0
    eps_d: complex = 0.0
    delta_omega_d: float = 0.0
    omega0: float = 0.0

    def __post_init__(self):
        for name in ("g", "kappa", "gamma"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")

    def replace(self, **changes) -> "SystemParams":
        from dataclasses import replace
        return replace(self, **changes)


@dataclass(frozen=True)
class Liouvillian:
    """Sparse generator acting on row-major vectorized density matrices."""

    matrix: sp.csr_matrix
    space: FockSpace
    params: SystemParams

    @property
    def dim(self) -> int:
        return self.space.dim

    def __call__(self, rho: np.ndarray) -> np.ndarray:
        d = self.dim
        return (self.matrix @ np.asarray(rho).reshape(d * d)).reshape(d, d)


def hamiltonian(params: SystemParams, space: FockSpace) -> np.ndarray:
    a = annihilation(space)
    sm = atomic_lowering(space)
    ad, sp_ = dag(a), dag(sm)
    eps = complex(params.eps_d)
    return (-params.delta_omega_d * (sp_ @ sm + ad @ a)
            + params.g * (a @ sp_ + ad @ sm)
            + np.conj(eps) * a + eps * ad)


def _lindblad_superop(h, c_ops):
    d = h.shape[0]
    eye = sp.identity(d, dtype=complex, format="csr")
    h = sp.csr_matrix(h)
    out = -1j * (sp.kron(h, eye) - sp.kron(eye, h.T))
    for c in c_ops:
        c = sp.csr_matrix(c)
        cdc = (c.conj().T @ c).tocsr()
        out = out + sp.kron(c, c.conj()) - 0.5 * sp.kron(cdc, eye) - 0.5 * sp.kron(eye, cdc.T)
    return out.tocsr()


def build_liouvillian(params: SystemParams, space: FockSpace) -> Liouvillian:
    a = annihilation(space)
    sm = atomic_lowering(space)
    c_ops = []
    if params.kappa > 0:
        c_ops.append(np.sqrt(2 * params.kappa) * a)
    if params.gamma > 0:
        c_ops.append(np.sqrt(params.gamma) * sm)
    mat = _lindblad_superop(hamiltonian(params, space), c_ops)
    mat.eliminate_zeros()
    return Liouvillian(mat, space, params)


def steady_state(liouvillian: Liouvillian, tol: float = 1e-9) -> np.ndarray:
    """Unit-trace kernel vector of the generator.

    The first row of the generator is replaced by the trace functional and
    the resulting square system is solved directly. Raises
    :class:`SteadyStateError` if the residual ``||L rho||`` exceeds ``tol``,
    which signals a degenerate or ill-conditioned kernel.
    """
    d = liouvillian.dim
    trace_row = np.zeros(d * d, dtype=complex)
    trace_row[:: d + 1] = 1.0
    rhs = np.zeros(d * d, dtype=complex)
    rhs[0] = 1.0

    try:
        with warnings.catch_warnings():
            warnings.simplefilter("error", spla.MatrixRankWarning)
            if d < DENSE_BELOW:
                m = liouvillian.matrix.toarray()
                m[0, :] = trace_row
                x = np.linalg.solve(m, rhs)
            else:
                m = liouvillian.matrix.tolil()
                m[0, :] = trace_row
                x = spla.spsolve(m.tocsc(), rhs)
    except (np.linalg.LinAlgError, spla.MatrixRankWarning) as exc:
        raise SteadyStateError(f"no unique steady state: {exc}") from exc

    rho = x.reshape(d, d)
    rho = 0.5 * (rho + dag(rho))
    rho /= np.trace(rho).real
    residual = np.linalg.norm(liouvillian.matrix @ rho.ravel())
    logger.debug("steady state residual %.3e", residual)
    if not np.isfinite(residual) or residual > tol:
        raise SteadyStateError(f"steady-state residual {residual:.3e} exceeds {tol:.1e}")
    return rho


def evolve(liouvillian: Liouvillian, rho0: np.ndarray, times, rtol: float = 1e-8,
           atol: float = 1e-10, method: str = "RK45") -> list[np.ndarray]:
    """Propagate ``rho0`` (given at t = 0) and return snapshots at ``times``.

    Uses an adaptive embedded Runge-Kutta pair on the vectorized state.
    """
    times = np.asarray(times, dtype=float)
    if times.ndim != 1 or len(times) == 0:
        raise ValueError("times must be a non-empty 1-d sequence")
    if times[0] < 0 or np.any(np.diff(times) < 0):
        raise ValueError("times must be ascending and non-negative")
    d = liouvillian.dim
    y0 = np.asarray(rho0, dtype=complex).reshape(d * d)
    if times[-1] == 0:
        return [y0.reshape(d, d).copy() for _ in times]

    mat = liouvillian.matrix
    sol = solve_ivp(lambda t, y: mat @ y, (0.0, times[-1]), y0, method=method,
                    t_eval=times, rtol=rtol, atol=atol)
    if sol.status != 0:
        raise StiffnessError(f"integration failed: {sol.message}")
    return [sol.y[:, k].reshape(d, d) for k in range(len(times))]


def partial_trace_cavity(rho: np.ndarray) -> np.ndarray:
    """rho_c = <+|rho|+> + <-|rho|-> in the Fock basis."""
    rho = np.asarray(rho)
    n_cav = rho.shape[0] // 2
    return np.einsum("isjs->ij", rho.reshape(n_cav, 2, n_cav, 2))


def embed_dressed(space: FockSpace, rho4: np.ndarray) -> np.ndarray:
    """Full-space density matrix from a 4x4 matrix over |xi_0>..|xi_3>."""
    basis = np.column_stack([dressed_state(space, k) for k in range(4)])
    return basis @ np.asarray(rho4) @ dag(basis)


def g2_numeric(liouvillian: Liouvillian, rho_ss: np.ndarray, taus, **kwargs) -> np.ndarray:
    """Intensity correlation of the cavity output via quantum regression.

    Propagates ``a rho_ss a^dag / <a^dag a>`` and reads out ``<a^dag a>``,
    normalized by the steady-state photon number.
    """
    a = annihilation(liouvillian.space)
    n_op = dag(a) @ a
    n_ss = np.trace(n_op @ rho_ss).real
    if n_ss <= 0:
        raise ValueError("steady-state photon number is zero; g2 undefined")
    taus = np.asarray(taus, dtype=float)
    order = np.argsort(taus)
    rho_c = a @ rho_ss @ dag(a) / n_ss
    snaps = evolve(liouvillian, rho_c, taus[order], **kwargs)
    out = np.empty(len(taus))
    out[order] = [np.trace(n_op @ r).real / n_ss for r in snaps]
    return out


def check_density_matrix(rho: np.ndarray, tol: float = 1e-10, pos_tol: float = 1e-8) -> None:
    """Raise ValueError unless ``rho`` is Hermitian, unit trace and positive."""
    rho = np.asarray(rho)
    herm = np.max(np.abs(rho - dag(rho)))
    if herm > tol:
        raise ValueError(f"not Hermitian: max |rho - rho^dag| = {herm:.2e}")
    tr = np.trace(rho)
    if abs(tr - 1) > tol:
        raise ValueError(f"trace {tr} differs from 1")
    lam = np.linalg.eigvalsh(0.5 * (rho + dag(rho)))[0]
    if lam < -pos_tol:
        raise ValueError(f"negative eigenvalue {lam:.2e}")
