"""
Wigner and Husimi-Q distributions of a single cavity mode.

Phase-space points are complex, ``alpha = x + i y``. Grids are uniform and
field values are stored with shape ``(ny, nx)``, row index along y.
"""

import json
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.special import eval_genlaguerre, gammaln

__all__ = [
    "PhaseGrid", "PhaseField", "Extremum", "wigner", "wigner_from_characteristic",
    "husimi_q", "evaluate_grid", "field_from_function", "moment", "find_extrema",
    "negativity", "write_field", "read_field_csv", "ring_variance",
]


@dataclass(frozen=True)
class PhaseGrid:
    x_min: float
    x_max: float
    y_min: float
    y_max: float
    nx: int
    ny: int

    def __post_init__(self):
        if self.nx < 3 or self.ny < 3:
            raise ValueError("grid needs at least 3 samples per axis")
        if not (self.x_min < self.x_max and self.y_min < self.y_max):
            raise ValueError("grid bounds must be ordered")

    @classmethod
    def square(cls, half_width: float, n: int) -> "PhaseGrid":
        return cls(-half_width, half_width, -half_width, half_width, n, n)

    @classmethod
    def parse(cls, spec: str) -> "PhaseGrid":
        """From ``"xmin,xmax,ymin,ymax,nx,ny"``."""
        parts = [p.strip() for p in spec.split(",")]
        if len(parts) != 6:
            raise ValueError(f"grid spec needs 6 comma-separated fields, got {spec!r}")
        return cls(*map(float, parts[:4]), int(parts[4]), int(parts[5]))

    @property
    def x(self) -> np.ndarray:
        return np.linspace(self.x_min, self.x_max, self.nx)

    @property
    def y(self) -> np.ndarray:
        return np.linspace(self.y_min, self.y_max, self.ny)

    @property
    def dx(self) -> float:
        return (self.x_max - self.x_min) / (self.nx - 1)

    @property
    def dy(self) -> float:
        return (self.y_max - self.y_min) / (self.ny - 1)

    def points(self) -> np.ndarray:
        xx, yy = np.meshgrid(self.x, self.y)
        return xx + 1j * yy

    def weights(self) -> np.ndarray:
        """2-D trapezoid weights, shape (ny, nx)."""
        wx = np.full(self.nx, self.dx)
        wx[[0, -1]] *= 0.5
        wy = np.full(self.ny, self.dy)
        wy[[0, -1]] *= 0.5
        return np.outer(wy, wx)

    def as_dict(self) -> dict:
        return {"x_min": self.x_min, "x_max": self.x_max, "y_min": self.y_min,
                "y_max": self.y_max, "nx": self.nx, "ny": self.ny}


@dataclass(frozen=True)
class PhaseField:
    grid: PhaseGrid
    values: np.ndarray
    kind: str = "wigner"

    def integral(self) -> float:
        return float(np.sum(self.grid.weights() * self.values))

    @property
    def max(self) -> float:
        return float(self.values.max())


@dataclass(frozen=True)
class Extremum:
    position: complex
    value: float
    kind: str


def _as_points(point):
    return np.asarray(point, dtype=complex)


def _nonzero_pairs(rho, tol=0.0):
    n = rho.shape[0]
    for i in range(n):
        for j in range(i, n):
            if abs(rho[i, j]) > tol:
                yield i, j


def wigner(rho: np.ndarray, point) -> np.ndarray:
    """Wigner function of a cavity density matrix at complex ``point``(s).

    Displaced-parity form ``W = (2/pi) tr[rho D(alpha) P D^dag(alpha)]`` with
    ``D P D^dag = D(2 alpha) P``; the matrix elements of D(2 alpha) are taken
    in closed form (generalized Laguerre polynomials), so the sum is exact over
    the support of ``rho`` and needs no Fock-space margin.
    """
    rho = np.asarray(rho, dtype=complex)
    alpha = _as_points(point)
    beta = 2 * alpha
    b2 = np.abs(beta) ** 2
    with np.errstate(divide="ignore"):
        logb = np.log(np.abs(beta))
    phase = np.exp(1j * np.angle(beta))
    w = np.zeros(alpha.shape)
    for m, n in _nonzero_pairs(rho):
        k = n - m
        if k == 0:
            amp = np.exp(-b2 / 2)
        else:
            with np.errstate(invalid="ignore"):
                amp = np.exp(0.5 * (gammaln(m + 1) - gammaln(n + 1)) + k * logb - b2 / 2)
            amp = np.where(b2 == 0, 0.0, amp) * phase ** k
        term = (-1) ** m * rho[m, n] * amp * eval_genlaguerre(m, k, b2)
        w += term.real if k == 0 else 2 * term.real
    return 2 / np.pi * w


def wigner_from_characteristic(rho: np.ndarray, point: complex, extent: float = 7.0,
                               n: int = 141, dim: int = 200) -> float:
    """Slow reference path: Fourier transform of the symmetric characteristic function.

    ``chi(z) = tr[rho exp(i z^* a^dag + i z a)]`` with ``z = r e^{i phi}`` is
    ``tr[rho U V e^{i r q} V^dag U^dag]``, where ``a + a^dag = V diag(q) V^dag``
    in a ``dim``-level space and ``U = exp(-i phi a^dag a)``. The transform is
    a 2-D trapezoid rule over ``[-extent, extent]^2``; ``dim`` must comfortably
    exceed ``2 extent^2`` for the truncated exponential to be faithful.
    """
    rho = np.asarray(rho, dtype=complex)
    s = rho.shape[0]
    a = np.diag(np.sqrt(np.arange(1, dim, dtype=float)), 1)
    q, v = np.linalg.eigh(a + a.T)
    vs = v[:s]
    mu = np.linspace(-extent, extent, n)
    wts = np.full(n, mu[1] - mu[0])
    wts[[0, -1]] *= 0.5
    zz = mu[:, None] + 1j * mu[None, :]
    r, phi = np.abs(zz), np.angle(zz)
    k = np.arange(s)
    rot = rho[None, None] * np.exp(1j * phi[..., None, None] * (k[:, None] - k[None, :]))
    # diagonal of V^dag (U^dag rho U) V for every grid point
    diag = np.einsum("mk,ijmn,nk->ijk", vs.conj(), rot, vs)
    chi = np.einsum("ijk,ijk->ij", diag, np.exp(1j * r[..., None] * q))
    x, y = point.real, point.imag
    kernel = np.exp(-2j * (mu[:, None] * x - mu[None, :] * y))
    return float(np.einsum("i,j,ij->", wts, wts, (chi * kernel).real) / np.pi ** 2)


def husimi_q(rho: np.ndarray, point) -> np.ndarray:
    """``<alpha|rho|alpha> / pi`` at complex ``point``(s)."""
    rho = np.asarray(rho, dtype=complex)
    alpha = _as_points(point)
    nn = np.arange(rho.shape[0])
    flat = alpha.reshape(-1, 1)
    with np.errstate(divide="ignore", invalid="ignore"):
        logr = np.log(np.abs(flat))
        amps = np.exp(-np.abs(flat) ** 2 / 2 + nn * logr - 0.5 * gammaln(nn + 1))
    amps = amps * np.exp(1j * nn * np.angle(flat))
    amps[:, 0] = np.exp(-np.abs(flat[:, 0]) ** 2 / 2)
    q = np.einsum("pm,mn,pn->p", amps.conj(), rho, amps).real
    return (q / np.pi).reshape(alpha.shape)


def field_from_function(func, grid: PhaseGrid, kind: str = "wigner") -> PhaseField:
    """Tabulate a vectorized ``func(alpha)`` on the grid."""
    return PhaseField(grid, np.asarray(func(grid.points()), dtype=float), kind)


def evaluate_grid(rho: np.ndarray, grid: PhaseGrid, kind: str = "wigner") -> PhaseField:
    if kind == "wigner":
        return field_from_function(lambda z: wigner(rho, z), grid, kind)
    if kind == "husimi":
        return field_from_function(lambda z: husimi_q(rho, z), grid, kind)
    raise ValueError(f"unknown field kind {kind!r}")


def moment(field: PhaseField, k: int, l: int) -> complex:
    """Integral of ``W conj(alpha)^k alpha^l`` over the grid (trapezoid rule)."""
    v = field.values
    edge = np.concatenate([v[0], v[-1], v[:, 0], v[:, -1]])
    if np.max(np.abs(edge)) > 1e-8 * np.max(np.abs(v)):
        warnings.warn("field has not decayed at the grid boundary; moment is truncated",
                      stacklevel=2)
    a = field.grid.points()
    return complex(np.sum(field.grid.weights() * v * np.conj(a) ** k * a ** l))


def _refine(field, i, j):
    """Quadratic least-squares fit on the 3x3 patch around (i, j)."""
    g = field.grid
    patch = field.values[i - 1:i + 2, j - 1:j + 2]
    u, v = np.meshgrid([-1.0, 0.0, 1.0], [-1.0, 0.0, 1.0])
    u, v, f = u.ravel(), v.ravel(), patch.ravel()
    design = np.column_stack([np.ones(9), u, v, u * u, u * v, v * v])
    c = np.linalg.lstsq(design, f, rcond=None)[0]
    hess = np.array([[2 * c[3], c[4]], [c[4], 2 * c[5]]])
    try:
        du, dv = np.linalg.solve(hess, -c[1:3])
    except np.linalg.LinAlgError:
        du = dv = 0.0
    du, dv = float(np.clip(du, -1, 1)), float(np.clip(dv, -1, 1))
    val = c[0] + c[1] * du + c[2] * dv + c[3] * du * du + c[4] * du * dv + c[5] * dv * dv
    pos = complex(g.x[j] + du * g.dx, g.y[i] + dv * g.dy)
    return pos, float(val)


def find_extrema(field: PhaseField, rel_floor: float = 0.0) -> list[Extremum]:
    """Strict interior local maxima and minima, refined by a quadratic fit.

    Extrema with ``|value| < rel_floor * max|field|`` are dropped. The result
    is sorted by ``|value|`` in descending order.
    """
    v = field.values
    core = v[1:-1, 1:-1]
    ny, nx = v.shape
    neigh = [v[1 + di:ny - 1 + di, 1 + dj:nx - 1 + dj]
             for di in (-1, 0, 1) for dj in (-1, 0, 1) if (di, dj) != (0, 0)]
    is_max = np.all([core > nb for nb in neigh], axis=0)
    is_min = np.all([core < nb for nb in neigh], axis=0)
    floor = rel_floor * np.max(np.abs(v))
    out = []
    for mask, kind in ((is_max, "max"), (is_min, "min")):
        for i, j in zip(*np.nonzero(mask)):
            pos, val = _refine(field, i + 1, j + 1)
            if abs(val) >= floor:
                out.append(Extremum(pos, val, kind))
    out.sort(key=lambda e: -abs(e.value))
    return out


def negativity(field: PhaseField) -> tuple[float, float]:
    """Minimum value and quadrature area of the region where the field is negative."""
    neg = field.values < 0
    return float(field.values.min()), float(np.sum(field.grid.weights()[neg]))


def ring_variance(source, r_max: float = 2.0, n_rings: int = 20, n_angles: int = 64) -> float:
    """Largest variance of a distribution around circles centred on the origin.

    ``source`` is either a vectorized callable ``f(alpha)``, evaluated exactly
    on the rings, or a :class:`PhaseField`, resampled bilinearly (its grid
    must contain the disc of radius ``r_max``).
    """
    theta = np.linspace(0, 2 * np.pi, n_angles, endpoint=False)
    radii = np.linspace(r_max / n_rings, r_max, n_rings)
    pts = radii[:, None] * np.exp(1j * theta)[None, :]
    if isinstance(source, PhaseField):
        from scipy.interpolate import RegularGridInterpolator

        g = source.grid
        interp = RegularGridInterpolator((g.y, g.x), source.values)
        vals = interp(np.column_stack([pts.imag.ravel(), pts.real.ravel()])).reshape(pts.shape)
    else:
        vals = np.asarray(source(pts), dtype=float)
    return float(np.max(np.var(vals, axis=1)))


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def write_field(field: PhaseField, path, metadata: dict | None = None) -> tuple[Path, Path]:
    """CSV ``x,y,value`` (y outer, x inner, 17 significant digits) plus a JSON sidecar.

    ``metadata`` entries are written as ``# key: value`` comment lines ahead of
    the column header and repeated in the sidecar.
    """
    path = Path(path)
    meta = dict(metadata or {})
    lines = [f"# {k}: {json.dumps(meta[k], sort_keys=True)}" for k in sorted(meta)]
    lines.append("x,y,value")
    g = field.grid
    xs, ys = g.x, g.y
    for iy, y in enumerate(ys):
        row = field.values[iy]
        lines.extend(f"{_fmt(x)},{_fmt(y)},{_fmt(val)}" for x, val in zip(xs, row))
    path.write_text("\n".join(lines) + "\n")
    sidecar = path.with_suffix(".json")
    sidecar.write_text(json.dumps({"kind": field.kind, "grid": g.as_dict(),
                                   "layout": "row-major, y outer, x inner",
                                   "metadata": meta}, indent=2, sort_keys=True) + "\n")
    return path, sidecar


def read_field_csv(path) -> PhaseField:
    """Inverse of :func:`write_field` (grid is read from the JSON sidecar)."""
    path = Path(path)
    side = json.loads(path.with_suffix(".json").read_text())
    grid = PhaseGrid(**side["grid"])
    rows = [ln for ln in path.read_text().splitlines() if ln and not ln.startswith("#")]
    vals = np.array([float(r.split(",")[2]) for r in rows[1:]])
    return PhaseField(grid, vals.reshape(grid.ny, grid.nx), side["kind"])

