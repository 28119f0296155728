"""
Closed JC system with a coherently driven atom: collapse and revival seen in
the cavity Husimi-Q function.

Time is measured in units of 1/g. The lab-frame Hamiltonian is::

    H = i (s+ a - s- a^dag) + i alpha0 (s+ - s-)

and ``D(alpha0) = exp[alpha0 (a - a^dag)]`` removes the drive term,
``D^dag H D = i (s+ a - s- a^dag)``. With this displacement ``D^dag a D =
a - alpha0``, so the lab-frame initial state |0,+> becomes the coherent
state |+alpha0> (x) |+> in the transformed frame, and the lab photon number
is ``<(a^dag - alpha0)(a - alpha0)>`` there. Both statements are checked
against direct integration of the lab-frame Schroedinger equation
(:func:`schrodinger_oracle`).

In the transformed frame, |u_n> = (|n-1,+> + i|n,->)/sqrt2 has energy
``-sqrt(n)`` and |l_n> = (|n-1,+> - i|n,->)/sqrt2 has ``+sqrt(n)``; the
branches therefore carry phases ``exp(+i sqrt(n) t)`` and ``exp(-i sqrt(n) t)``
respectively.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp
from scipy.special import gammaln

from .master_equation import StiffnessError, partial_trace_cavity
from .operators import (FockSpace, MINUS, PLUS, annihilation, atomic_lowering, basis,
                        dag, displacement, make_space)
from .phasespace import husimi_q

__all__ = [
    "RevivalParams", "coherent_coefficients", "fock_overlaps", "revival_q",
    "revival_q_asymptotic", "branch_state", "transformed_state",
    "mean_photon_number", "lab_hamiltonian", "schrodinger_oracle",
    "oracle_q", "min_truncation",
]


def min_truncation(alpha0: float) -> float:
    return 2 * alpha0 * (alpha0 + 1)


@dataclass(frozen=True)
class RevivalParams:
    """``alpha0 = eps'_d / g`` and the series truncation ``n_trunc`` (sums run 0..n_trunc)."""

    alpha0: float
    n_trunc: int = 40

    def __post_init__(self):
        if self.alpha0 < 0:
            raise ValueError("alpha0 must be non-negative")
        if not self.n_trunc > min_truncation(self.alpha0):
            raise ValueError(
                f"n_trunc = {self.n_trunc} must exceed 2 alpha0 (alpha0 + 1) = "
                f"{min_truncation(self.alpha0):.3f}")

    @property
    def space(self) -> FockSpace:
        # |n_trunc + 1, -> is the highest state the series touches
        return make_space(self.n_trunc + 1)


def coherent_coefficients(alpha0: float, n: int) -> np.ndarray:
    """``c_k = exp(-alpha0^2/2) alpha0^k / sqrt(k!)`` for k = 0..n-1 (alpha0 real)."""
    k = np.arange(n)
    if alpha0 == 0:
        return (k == 0).astype(float)
    return np.exp(-alpha0 ** 2 / 2 + k * math.log(alpha0) - 0.5 * gammaln(k + 1))


def fock_overlaps(z, n: int) -> np.ndarray:
    """``d_k = exp(-|z|^2/2) z^k / sqrt(k!)``, shape ``z.shape + (n,)``."""
    z = np.asarray(z, dtype=complex)[..., None]
    k = np.arange(n)
    r = np.abs(z)
    with np.errstate(divide="ignore", invalid="ignore"):
        mag = np.exp(-r ** 2 / 2 + k * np.log(r) - 0.5 * gammaln(k + 1))
    mag = np.where((r == 0) & (k == 0), 1.0, np.where(r == 0, 0.0, mag))
    return mag * np.exp(1j * k * np.angle(z))


def _quadratic_form(d, m):
    return np.einsum("...n,nm,...m->...", d, m, d.conj()).real


def revival_q(p: RevivalParams, z, t: float) -> np.ndarray:
    """Transformed-frame cavity Q function from the double Fock series.

    Evaluated as two real symmetric quadratic forms in ``d_n`` (the n and m
    sums of the series), vectorized over ``z``.
    """
    nt = p.n_trunc + 1
    c = coherent_coefficients(p.alpha0, nt)
    root = np.sqrt(np.arange(1, nt + 1))
    diff = np.cos(t * (root[:, None] - root[None, :]))
    summ = np.cos(t * (root[:, None] + root[None, :]))
    cc = np.outer(c, c)
    d = fock_overlaps(z, nt + 1)
    q = _quadratic_form(d[..., :nt], cc * (diff + summ)) + _quadratic_form(d[..., 1:], cc * (diff - summ))
    return q / (2 * np.pi)


def revival_q_asymptotic(p: RevivalParams, z, t: float) -> np.ndarray:
    """High-excitation form keeping only the difference-frequency terms."""
    nt = p.n_trunc + 1
    c = coherent_coefficients(p.alpha0, nt)
    root = np.sqrt(np.arange(nt))
    m = np.outer(c, c) * np.cos(t * (root[:, None] - root[None, :]))
    return _quadratic_form(fock_overlaps(z, nt), m) / np.pi


def branch_state(p: RevivalParams, branch: str, t: float) -> np.ndarray:
    """Normalized transformed-frame branch ``U`` or ``L`` at time ``t``."""
    if branch not in ("U", "L"):
        raise ValueError("branch must be 'U' or 'L'")
    space = p.space
    sign = 1 if branch == "U" else -1
    c = coherent_coefficients(p.alpha0, p.n_trunc + 1)
    psi = np.zeros(space.dim, dtype=complex)
    r = 1 / math.sqrt(2)
    for n in range(1, p.n_trunc + 2):
        amp = c[n - 1] * np.exp(sign * 1j * math.sqrt(n) * t) * r
        psi[space.index(n - 1, PLUS)] += amp
        psi[space.index(n, MINUS)] += sign * 1j * amp
    return psi / np.linalg.norm(psi)


def transformed_state(p: RevivalParams, t: float) -> np.ndarray:
    return (branch_state(p, "U", t) + branch_state(p, "L", t)) / math.sqrt(2)


def mean_photon_number(p: RevivalParams, t) -> np.ndarray:
    """Lab-frame ``<a^dag a>(t)`` starting from |0,+>."""
    a = annihilation(p.space)
    shifted = a - p.alpha0 * np.eye(p.space.dim)
    ts = np.atleast_1d(np.asarray(t, dtype=float))
    out = np.array([np.linalg.norm(shifted @ transformed_state(p, tk)) ** 2 for tk in ts])
    return out if np.ndim(t) else float(out[0])


def lab_hamiltonian(alpha0: float, space: FockSpace) -> np.ndarray:
    a = annihilation(space)
    sm = atomic_lowering(space)
    spl = dag(sm)
    return 1j * (spl @ a - sm @ dag(a)) + 1j * alpha0 * (spl - sm)


def schrodinger_oracle(p: RevivalParams, t, n_max: int = 60, rtol: float = 1e-12,
                       atol: float = 1e-13):
    """Lab-frame state(s) from |0,+> by adaptive integration (DOP853).

    ``t`` may be a scalar or an ascending sequence; a list of states is
    returned for a sequence.
    """
    if n_max < p.n_trunc:
        raise ValueError("n_max must be at least n_trunc")
    space = make_space(n_max)
    h = lab_hamiltonian(p.alpha0, space)
    psi0 = basis(space, 0, PLUS)
    ts = np.atleast_1d(np.asarray(t, dtype=float))
    if ts[-1] == 0:
        states = [psi0.copy() for _ in ts]
    else:
        sol = solve_ivp(lambda _, y: -1j * (h @ y), (0.0, ts[-1]), psi0, method="DOP853",
                        t_eval=ts, rtol=rtol, atol=atol)
        if sol.status != 0:
            raise StiffnessError(f"integration failed: {sol.message}")
        states = [sol.y[:, k] for k in range(len(ts))]
    return states if np.ndim(t) else states[0]


def oracle_q(p: RevivalParams, psi_lab: np.ndarray, z) -> np.ndarray:
    """Husimi Q of the transformed-frame cavity state ``D^dag psi_lab``."""
    n_max = psi_lab.shape[0] // 2 - 1
    space = make_space(n_max)
    psi_t = dag(displacement(space, p.alpha0)) @ psi_lab
    rho_c = partial_trace_cavity(np.outer(psi_t, psi_t.conj()))
    return husimi_q(rho_c, z)
