"""
Effective four-level description of the two-photon JC resonance.

Levels are the dressed states |xi_0>..|xi_3>. The ground state |xi_0> is
coupled to |xi_3> by the two-photon Rabi frequency ``Omega = 2 sqrt2 eps^2/g``;
|xi_3> decays to |xi_1>, |xi_2>, which in turn decay to |xi_0>. All closed
forms below hold for the case ``gamma = 2 kappa`` and assume the drive is
tuned to the shifted two-photon resonance.
"""

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .master_equation import SystemParams

__all__ = [
    "EffectiveModelParams", "TransientConstants", "FourLevelDensityMatrix",
    "effective_params", "two_photon_drive_detuning", "epsilon_from_p3",
    "four_level_state", "steady_four_level", "conditional_state",
    "conditional_constants", "cavity_density_matrix", "steady_state_wigner",
    "g2_analytic", "g2_coefficients", "effective_liouvillian",
    "sum_intermediate_antiderivative",
]

SQRT2 = math.sqrt(2.0)


@dataclass(frozen=True)
class EffectiveModelParams:
    gamma: float
    kappa: float
    g: float
    eps_d: float
    Omega: float
    p3: float
    Gamma31: float
    Gamma32: float
    Gamma: float
    nu: float
    delta: tuple
    E_tilde: tuple

    @property
    def D(self) -> float:
        """gamma^2 + 4 Omega^2, the denominator shared by most closed forms."""
        return self.gamma ** 2 + 4 * self.Omega ** 2


def effective_params(params: SystemParams, rtol: float = 1e-12) -> EffectiveModelParams:
    gamma, kappa, g = params.gamma, params.kappa, params.g
    if not math.isclose(gamma, 2 * kappa, rel_tol=rtol, abs_tol=0.0):
        raise ValueError(f"the four-level rates need gamma = 2 kappa (got {gamma}, {kappa})")
    if g <= 0:
        raise ValueError("g must be positive")
    e2 = abs(params.eps_d) ** 2 / g
    omega = 2 * SQRT2 * e2
    d0 = SQRT2 * e2
    d1 = -(20 + 19 * SQRT2) / 7 * e2
    d2 = (20 - 19 * SQRT2) / 7 * e2
    d3 = -SQRT2 * e2
    w0 = params.omega0
    energies = (d0, w0 - g + d1, w0 + g + d2, 2 * w0 - SQRT2 * g + d3)
    p3 = omega ** 2 / (gamma ** 2 + 4 * omega ** 2) if omega > 0 else 0.0
    return EffectiveModelParams(
        gamma=gamma, kappa=kappa, g=g, eps_d=abs(params.eps_d), Omega=omega, p3=p3,
        Gamma31=gamma / 4 * (1 + (SQRT2 + 1) ** 2),
        Gamma32=gamma / 4 * (1 + (SQRT2 - 1) ** 2),
        Gamma=gamma / 2 + kappa,
        nu=2 * g + d2 - d1,
        delta=(d0, d1, d2, d3),
        E_tilde=energies,
    )


def two_photon_drive_detuning(params: SystemParams) -> float:
    """Drive-cavity detuning placing the drive on the shifted two-photon resonance."""
    e2 = abs(params.eps_d) ** 2 / params.g
    d0, d3 = SQRT2 * e2, -SQRT2 * e2
    return -params.g / SQRT2 + (d3 - d0) / 2


def epsilon_from_p3(p3: float, g: float, gamma: float = 1.0) -> float:
    """Real drive amplitude giving upper-level population ``p3``."""
    if not 0 <= p3 < 0.25:
        raise ValueError(f"p3 must lie in [0, 1/4), got {p3}")
    omega = gamma * math.sqrt(p3 / (1 - 4 * p3))
    return math.sqrt(omega * g / (2 * SQRT2))


@dataclass(frozen=True)
class TransientConstants:
    Sigma: float
    C: float
    C_prime: float
    rho12_0: complex

    @classmethod
    def from_initial(cls, p: EffectiveModelParams, rho00: float, pop12: float,
                     rho33: float, rho12: complex = 0.0) -> "TransientConstants":
        """Constants for an initial state with ``rho03(0) = 0``.

        ``pop12`` is rho11 + rho22 at tau = 0.
        """
        sigma = rho33 - rho00
        c = rho33 - p.p3 * (1 + 2 * sigma)
        partial = cls(sigma, c, 0.0, complex(rho12))
        c_prime = pop12 - 2 * p.gamma * sum_intermediate_antiderivative(partial, p, 0.0)
        return cls(sigma, c, c_prime, complex(rho12))


@dataclass(frozen=True)
class FourLevelDensityMatrix:
    """Dressed-basis density matrix entries that enter the cavity state.

    ``pop12`` is rho11 + rho22; the individual populations are only stored
    when known (``split``).
    """

    rho00: float
    pop12: float
    rho33: float
    rho12: complex
    rho03: complex
    tau: float = 0.0
    split: Optional[tuple] = field(default=None)

    def matrix(self) -> np.ndarray:
        """Full 4x4 matrix; needs the rho11/rho22 split."""
        if self.split is None:
            raise ValueError("rho11 and rho22 are not resolved for this state")
        m = np.zeros((4, 4), dtype=complex)
        m[0, 0], m[3, 3] = self.rho00, self.rho33
        m[1, 1], m[2, 2] = self.split
        m[1, 2], m[2, 1] = self.rho12, np.conj(self.rho12)
        m[0, 3], m[3, 0] = self.rho03, np.conj(self.rho03)
        return m


def sum_intermediate_antiderivative(c: TransientConstants, p: EffectiveModelParams, tau):
    """Closed-form antiderivative of rho33(tau) exp(gamma tau) (no added constant)."""
    gam, om, p3, D = p.gamma, p.Omega, p.p3, p.D
    tau = np.asarray(tau, dtype=float)
    x = 2 * om * tau
    out = -c.C / gam * np.exp(-gam * tau) + p3 / gam * np.exp(gam * tau)
    # p3 / Omega^2 = 1 / D keeps the Omega -> 0 limit finite
    out = out + gam / (2 * D) * (1 + c.Sigma) * np.cos(x) + c.Sigma * om / D * np.sin(x)
    return out


def four_level_state(constants: TransientConstants, p: EffectiveModelParams, tau) -> FourLevelDensityMatrix:
    """Closed-form transient state at delay ``tau`` (scalar)."""
    if tau < 0:
        raise ValueError("tau must be non-negative")
    c = constants
    gam, om, p3, D = p.gamma, p.Omega, p.p3, p.D
    e1, e2 = math.exp(-gam * tau), math.exp(-2 * gam * tau)
    s, co = math.sin(2 * om * tau), math.cos(2 * om * tau)

    rho33 = (c.C * e2 + p3 - om * gam / D * e1 * s
             - c.Sigma * e1 * om / D * (gam * s - 2 * om * co))
    pop12 = c.C_prime * e1 + 2 * gam * e1 * float(sum_intermediate_antiderivative(c, p, tau))
    rho12 = c.rho12_0 * math.exp(-p.Gamma * tau) * np.exp(1j * p.nu * tau)
    rho03 = (1j * om * gam / D - 0.5j * c.Sigma * e1 * s
             - 0.5j * gam / D * e1 * (gam * s + 2 * om * co))
    rho00 = 1.0 - pop12 - rho33
    return FourLevelDensityMatrix(rho00=rho00, pop12=pop12, rho33=rho33,
                                  rho12=complex(rho12), rho03=complex(rho03), tau=tau)


def steady_four_level(p: EffectiveModelParams) -> FourLevelDensityMatrix:
    p3 = p.p3
    return FourLevelDensityMatrix(
        rho00=1 - 3 * p3, pop12=2 * p3, rho33=p3, rho12=0j,
        rho03=1j * p.Omega * p.gamma / p.D, tau=math.inf,
    )


def conditional_state() -> FourLevelDensityMatrix:
    """State left behind by a photon emission from the steady state.

    2/5 |xi_0><xi_0| + 3/5 |psi_b><psi_b| with
    |psi_b> = sqrt(2/3) [(sqrt2+1)/2 |xi_1> + (sqrt2-1)/2 |xi_2>].
    """
    b1 = math.sqrt(2 / 3) * (SQRT2 + 1) / 2
    b2 = math.sqrt(2 / 3) * (SQRT2 - 1) / 2
    r11, r22, r12 = 0.6 * b1 * b1, 0.6 * b2 * b2, 0.6 * b1 * b2
    return FourLevelDensityMatrix(rho00=0.4, pop12=r11 + r22, rho33=0.0, rho12=complex(r12),
                                  rho03=0j, tau=0.0, split=(r11, r22))


def conditional_constants(p: EffectiveModelParams) -> TransientConstants:
    s = conditional_state()
    return TransientConstants.from_initial(p, s.rho00, s.pop12, s.rho33, s.rho12)


def cavity_density_matrix(state: FourLevelDensityMatrix, n_cav: int = 3) -> np.ndarray:
    """Reduced cavity state in the Fock basis (padded with zeros to ``n_cav``)."""
    if n_cav < 3:
        raise ValueError("need at least three Fock levels")
    rho = np.zeros((n_cav, n_cav), dtype=complex)
    re12 = state.rho12.real
    rho[0, 0] = state.rho00 + 0.5 * state.pop12 - re12
    rho[1, 1] = 0.5 * (state.pop12 + state.rho33) + re12
    rho[2, 2] = 0.5 * state.rho33
    rho[0, 2] = state.rho03 / SQRT2
    rho[2, 0] = np.conj(state.rho03) / SQRT2
    return rho


def steady_state_wigner(p3: float, point) -> np.ndarray:
    """Analytic steady-state cavity Wigner function at complex ``point``(s)."""
    if not 0 <= p3 <= 0.25:
        raise ValueError(f"p3 must lie in [0, 1/4], got {p3}")
    alpha = np.asarray(point, dtype=complex)
    r2 = np.abs(alpha) ** 2
    brk = 2j * math.sqrt(p3 * (1 - 4 * p3)) * (alpha ** 2 - np.conj(alpha) ** 2)
    poly = 4 * p3 * r2 ** 2 + 2 * p3 * r2 + (1 - 3 * p3) + brk.real
    return 2 / np.pi * np.exp(-2 * r2) * poly


def g2_coefficients(p3: float) -> tuple[float, float, float, float]:
    if not 0 < p3 < 0.25 + 1e-15:
        raise ValueError(f"g2 coefficients need 0 < p3 <= 1/4, got {p3}")
    a1 = 3 * (1 - 8 * p3) / (25 * p3)
    a2 = -13 / 25 * math.sqrt(max(1 - 4 * p3, 0.0) / p3)
    a3 = -1 / 25
    a4 = 1 / (25 * p3)
    return a1, a2, a3, a4


def g2_analytic(p: EffectiveModelParams, tau, include_beat: bool = True):
    """Intensity correlation of the forwards-scattered light.

    With ``include_beat=False`` the fast quantum-beat term at ``nu`` is
    dropped, which is what a running average over the beat period leaves.
    """
    a1, a2, a3, a4 = g2_coefficients(p.p3)
    t = np.abs(np.asarray(tau, dtype=float))
    x = 2 * p.Omega * t
    e = np.exp(-p.gamma * t)
    bracket = a1 * np.cos(x) + a2 * np.sin(x) + a3 * e
    if include_beat:
        bracket = bracket + a4 * np.cos(p.nu * t)
    return 1 + e * bracket


def effective_liouvillian(p: EffectiveModelParams) -> np.ndarray:
    """Dense 16x16 generator of the four-level master equation.

    Written in the frame co-rotating with the two-photon drive, where |xi_0>
    and |xi_3> are degenerate and |xi_1>, |xi_2> are split by ``nu``.
    Row-major vectorization, same as :mod:`jcphase.master_equation`.
    """
    def proj(i, j):
        m = np.zeros((4, 4), dtype=complex)
        m[i, j] = 1.0
        return m

    h = np.diag([0.0, -p.nu / 2, p.nu / 2, 0.0]).astype(complex)
    h += p.Omega * (proj(0, 3) + proj(3, 0))
    jumps = [(p.Gamma32, proj(2, 3)), (p.Gamma31, proj(1, 3)),
             (p.Gamma, proj(0, 1)), (p.Gamma, proj(0, 2))]
    eye = np.eye(4)
    out = -1j * (np.kron(h, eye) - np.kron(eye, h.T))
    for rate, c in jumps:
        cdc = c.conj().T @ c
        out += rate * (np.kron(c, c.conj()) - 0.5 * np.kron(cdc, eye) - 0.5 * np.kron(eye, cdc.T))
    return out
