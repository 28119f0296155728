"""
Truncated Fock (x) two-level Hilbert space, ladder operators and the special
states used throughout the package.

Basis ordering of the composite space is fixed: the state |n, s> sits at
index ``2*n + s`` with ``s = 0`` for the lower atomic level |-> and ``s = 1``
for the upper level |+>. Every partial trace in the package relies on it.
"""

import math
import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg
from scipy.special import gammaln

__all__ = [
    "FockSpace", "make_space", "basis", "annihilation", "creation",
    "atomic_lowering", "atomic_raising", "number", "cavity_annihilation",
    "cavity_displacement", "displacement", "dressed_state", "coherent_amplitudes",
    "coherent_state", "ket2dm", "dag", "expect", "commutator", "check_dims",
]

MINUS, PLUS = 0, 1


@dataclass(frozen=True)
class FockSpace:
    """Composite space of a cavity mode truncated at ``n_max`` photons and
    a two-level atom."""

    n_max: int

    def __post_init__(self):
        if int(self.n_max) != self.n_max or self.n_max < 2:
            raise ValueError(f"n_max must be an integer >= 2, got {self.n_max!r}")

    @property
    def n_cav(self) -> int:
        return self.n_max + 1

    @property
    def dim(self) -> int:
        return 2 * (self.n_max + 1)

    def index(self, n: int, s: int) -> int:
        if not 0 <= n <= self.n_max or s not in (MINUS, PLUS):
            raise IndexError(f"|{n}, {s}> outside the truncated space")
        return 2 * n + s


def make_space(n_max: int) -> FockSpace:
    return FockSpace(n_max)


def basis(space: FockSpace, n: int, s: int) -> np.ndarray:
    """Product basis ket |n> (x) |s> with ``s`` in {0 (lower), 1 (upper)}."""
    psi = np.zeros(space.dim, dtype=complex)
    psi[space.index(n, s)] = 1.0
    return psi


def cavity_annihilation(n_cav: int) -> np.ndarray:
    """Annihilation operator on the bare cavity factor of dimension ``n_cav``."""
    return np.diag(np.sqrt(np.arange(1, n_cav, dtype=float)), 1).astype(complex)


def annihilation(space: FockSpace) -> np.ndarray:
    return np.kron(cavity_annihilation(space.n_cav), np.eye(2))


def creation(space: FockSpace) -> np.ndarray:
    return dag(annihilation(space))


def atomic_lowering(space: FockSpace) -> np.ndarray:
    sm = np.zeros((2, 2), dtype=complex)
    sm[MINUS, PLUS] = 1.0
    return np.kron(np.eye(space.n_cav), sm)


def atomic_raising(space: FockSpace) -> np.ndarray:
    return dag(atomic_lowering(space))


def number(space: FockSpace) -> np.ndarray:
    a = annihilation(space)
    return dag(a) @ a


def cavity_displacement(n_cav: int, alpha0: float) -> np.ndarray:
    """exp[alpha0 (a - a^dag)] on a cavity factor of dimension ``n_cav``."""
    a = cavity_annihilation(n_cav)
    return scipy.linalg.expm(alpha0 * (a - dag(a)))


def displacement(space: FockSpace, alpha0: float) -> np.ndarray:
    """Displacement ``D(alpha0) = exp[alpha0 (a - a^dag)]`` on the composite space.

    Note the sign: with this definition ``D^dag a D = a - alpha0`` and
    ``D^dag |0> = |+alpha0>`` (coherent state of amplitude ``+alpha0``). The
    matrix exponential is taken in the truncated space, so the relations hold
    only on the block well below the cutoff.
    """
    return np.kron(cavity_displacement(space.n_cav, alpha0), np.eye(2))


def dressed_state(space: FockSpace, k: int) -> np.ndarray:
    """The lowest four Jaynes-Cummings dressed states.

    ``k = 0``: |0,->; ``k = 1``: (|1,-> - |0,+>)/sqrt2;
    ``k = 2``: (|1,-> + |0,+>)/sqrt2; ``k = 3``: (|2,-> - |1,+>)/sqrt2.
    """
    if k == 0:
        return basis(space, 0, MINUS)
    r = 1 / math.sqrt(2)
    if k == 1:
        return r * (basis(space, 1, MINUS) - basis(space, 0, PLUS))
    if k == 2:
        return r * (basis(space, 1, MINUS) + basis(space, 0, PLUS))
    if k == 3:
        return r * (basis(space, 2, MINUS) - basis(space, 1, PLUS))
    raise ValueError(f"dressed state index must be in 0..3, got {k!r}")


def coherent_amplitudes(n_cav: int, amplitude: complex) -> tuple[np.ndarray, float]:
    """Fock amplitudes ``exp(-|a|^2/2) a^n / sqrt(n!)`` for ``n < n_cav``.

    Returns the renormalized amplitudes and the norm of the truncated,
    unnormalized vector (one minus the leaked probability, square-rooted).
    """
    n = np.arange(n_cav)
    amplitude = complex(amplitude)
    if amplitude == 0:
        c = np.zeros(n_cav, dtype=complex)
        c[0] = 1.0
        return c, 1.0
    log_mag = -abs(amplitude) ** 2 / 2 + n * math.log(abs(amplitude)) - 0.5 * gammaln(n + 1)
    c = np.exp(log_mag) * np.exp(1j * n * np.angle(amplitude))
    norm = float(np.linalg.norm(c))
    return c / norm, norm


def coherent_state(space: FockSpace, amplitude: complex, atom: int = MINUS) -> np.ndarray:
    """Coherent cavity state |amplitude> (x) |atom>, renormalized after truncation."""
    if abs(amplitude) ** 2 > space.n_max / 4:
        warnings.warn(
            f"|amplitude|^2 = {abs(amplitude) ** 2:.3g} is not well below n_max = {space.n_max}",
            stacklevel=2,
        )
    c, _ = coherent_amplitudes(space.n_cav, amplitude)
    atom_ket = np.zeros(2)
    atom_ket[atom] = 1.0
    return np.kron(c, atom_ket)


def ket2dm(psi: np.ndarray) -> np.ndarray:
    psi = np.asarray(psi)
    return np.outer(psi, psi.conj())


def dag(op: np.ndarray) -> np.ndarray:
    return np.conj(np.transpose(op))


def check_dims(*arrays: np.ndarray) -> int:
    """Common leading dimension of the given operators/kets, or ValueError."""
    dims = {np.shape(x)[0] for x in arrays}
    for x in arrays:
        if np.ndim(x) == 2 and np.shape(x)[0] != np.shape(x)[1]:
            raise ValueError(f"operator is not square: shape {np.shape(x)}")
    if len(dims) != 1:
        raise ValueError(f"dimension mismatch: {sorted(dims)}")
    return dims.pop()


def expect(op: np.ndarray, state: np.ndarray) -> complex:
    """<psi|op|psi> for a ket, tr(op rho) for a density matrix."""
    check_dims(op, state)
    if np.ndim(state) == 1:
        return complex(np.vdot(state, op @ state))
    return complex(np.trace(op @ state))


def commutator(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    check_dims(a, b)
    return a @ b - b @ a

