"""
Command-line data emitter: ``jcphase {steady,g2,transient,revival,verify}``.

Config files are flat ``key = value`` text; keys match the long flag names
with dashes replaced by underscores (``p3``, ``eps_d``, ``g_over_gamma``,
``grid``, ``times``, ``nmax``, ``seed``, ``drive_sign``, ``alpha0``,
``ntrunc``, ``insets``, ``numeric``). Flags given on the command line win over
file values. Time lists are either comma separated values or
``start:stop:count`` (inclusive linspace).

Every output file starts with ``# key: value`` metadata lines carrying the
resolved config, its sha256, truncations and solver tolerances, and no
timestamps, so identical configs produce byte-identical files.
"""

import argparse
import configparser
import hashlib
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from . import acceptance
from . import effective_model as em
from . import master_equation as me
from . import phasespace as ps
from . import revival as rv
from .operators import make_space

TOLERANCES = {"steady_residual": 1e-9, "ode_rtol": 1e-8, "ode_atol": 1e-10,
              "oracle_rtol": 1e-12, "oracle_atol": 1e-13}

DEFAULTS = {
    "steady": {"p3": "0.05,0.2,0.24,0.249", "grid": "-2,2,-2,2,201,201"},
    "g2": {"p3": "0.247", "times": "0:1.2:24001", "numeric": "false"},
    "transient": {"p3": "0.247", "times": "0,0.3549,0.5401", "grid": "-2,2,-2,2,201,201"},
    "revival": {"alpha0": str(math.sqrt(3)), "times": "0:260:26001", "insets": "230.67,249.3",
                "grid": "-4,4,-4,4,201,201"},
    "verify": {},
}
COMMON = {"g_over_gamma": "500", "nmax": "30", "seed": "0", "drive_sign": str(acceptance.DRIVE_SIGN)}
KNOWN_KEYS = {"p3", "eps_d", "g_over_gamma", "grid", "times", "nmax", "seed", "drive_sign",
              "alpha0", "ntrunc", "insets", "numeric"}


class ConfigError(ValueError):
    pass


def parse_times(text: str) -> np.ndarray:
    text = text.strip()
    try:
        if ":" in text:
            start, stop, count = text.split(":")
            return np.linspace(float(start), float(stop), int(count))
        return np.array([float(v) for v in text.split(",") if v.strip()])
    except ValueError as exc:
        raise ConfigError(f"bad time list {text!r}") from exc


def _floats(text: str) -> list[float]:
    try:
        return [float(v) for v in str(text).split(",") if v.strip()]
    except ValueError as exc:
        raise ConfigError(f"bad number list {text!r}") from exc


def read_config_file(path) -> dict:
    parser = configparser.ConfigParser(interpolation=None)
    try:
        parser.read_string("[run]\n" + Path(path).read_text())
    except (OSError, configparser.Error) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    values = dict(parser["run"])
    unknown = set(values) - KNOWN_KEYS
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
    return values


def resolve_config(command: str, args: argparse.Namespace) -> dict:
    """Merge subcommand defaults, config file and flags into a validated dict."""
    raw = {**COMMON, **DEFAULTS[command]}
    given = {}
    if getattr(args, "config", None):
        given.update(read_config_file(args.config))
    for key in KNOWN_KEYS:
        val = getattr(args, key, None)
        if val is not None:
            given[key] = str(val)
    if "p3" in given and "eps_d" in given:
        raise ConfigError("give exactly one of p3 and eps_d")
    if "eps_d" in given:
        raw.pop("p3", None)
    raw.update(given)

    cfg = {"command": command}
    cfg["g_over_gamma"] = float(raw["g_over_gamma"])
    cfg["nmax"] = int(raw["nmax"])
    cfg["seed"] = int(raw["seed"])
    cfg["drive_sign"] = int(raw["drive_sign"])
    if cfg["g_over_gamma"] <= 0:
        raise ConfigError("g_over_gamma must be positive")
    if cfg["nmax"] < 2:
        raise ConfigError("nmax must be at least 2")
    if cfg["drive_sign"] not in (-1, 1):
        raise ConfigError("drive_sign must be +1 or -1")
    if "grid" in raw:
        try:
            grid = ps.PhaseGrid.parse(raw["grid"])
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        cfg["grid"] = grid.as_dict()
    if "times" in raw:
        cfg["times"] = parse_times(raw["times"]).tolist()
        if not cfg["times"] or min(cfg["times"]) < 0:
            raise ConfigError("times must be a non-empty list of non-negative values")
    if "p3" in raw:
        cfg["p3"] = _floats(raw["p3"])
        if not cfg["p3"] or any(not 0 <= p < 0.25 for p in cfg["p3"]):
            raise ConfigError("p3 values must lie in [0, 1/4)")
    if "eps_d" in raw:
        cfg["eps_d"] = _floats(raw["eps_d"])
    if command == "revival":
        cfg["alpha0"] = float(raw["alpha0"])
        if cfg["alpha0"] < 0:
            raise ConfigError("alpha0 must be non-negative")
        floor = math.floor(rv.min_truncation(cfg["alpha0"])) + 2
        cfg["ntrunc"] = int(raw.get("ntrunc", max(40, floor)))
        if not cfg["ntrunc"] > rv.min_truncation(cfg["alpha0"]):
            raise ConfigError(f"ntrunc must exceed {rv.min_truncation(cfg['alpha0']):.3f}")
        cfg["insets"] = _floats(raw["insets"])
    if command == "g2":
        cfg["numeric"] = str(raw["numeric"]).lower() in ("1", "true", "yes", "on")
        if any(p == 0 for p in cfg.get("p3", [])):
            raise ConfigError("g2 needs p3 in (0, 1/4)")
    return cfg


def config_hash(cfg: dict) -> str:
    return hashlib.sha256(json.dumps(cfg, sort_keys=True).encode()).hexdigest()


def _metadata(cfg: dict, **extra) -> dict:
    meta = {"package": f"jcphase {__version__}", "config": cfg, "config_sha256": config_hash(cfg),
            "tolerances": TOLERANCES, "nmax": cfg["nmax"]}
    meta.update(extra)
    return meta


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def write_table(path: Path, columns: dict, metadata: dict) -> Path:
    names = list(columns)
    lines = [f"# {k}: {json.dumps(metadata[k], sort_keys=True)}" for k in sorted(metadata)]
    lines.append(",".join(names))
    lines.extend(",".join(_fmt(v) for v in row) for row in zip(*(columns[n] for n in names)))
    path.write_text("\n".join(lines) + "\n")
    return path


def write_json(path: Path, payload: dict) -> Path:
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    return path


def _drive_points(cfg: dict) -> list[tuple[str, me.SystemParams]]:
    """(label, resonant full-model params) for every requested p3 or eps_d."""
    g = cfg["g_over_gamma"]
    out = []
    if "p3" in cfg:
        for p3 in cfg["p3"]:
            out.append((f"p3_{p3:g}", acceptance.resonant_params(p3, g=g, sign=cfg["drive_sign"])))
    else:
        for eps in cfg["eps_d"]:
            base = me.SystemParams(g=g, kappa=0.5, gamma=1.0, eps_d=eps)
            out.append((f"eps_{eps:g}", base.replace(delta_omega_d=em.two_photon_drive_detuning(base))))
    return out


def _extrema_table(field: ps.PhaseField, rel_floor: float = 0.05) -> list[dict]:
    return [{"kind": e.kind, "x": e.position.real, "y": e.position.imag, "value": e.value}
            for e in ps.find_extrema(field, rel_floor)]


def cmd_steady(cfg: dict, out: Path) -> dict:
    grid = ps.PhaseGrid(**cfg["grid"])
    space = make_space(cfg["nmax"])
    report = {"config_sha256": config_hash(cfg), "points": []}
    for label, params in _drive_points(cfg):
        p = em.effective_params(params)
        analytic = ps.field_from_function(lambda z: em.steady_state_wigner(p.p3, z), grid)
        rho = me.steady_state(me.build_liouvillian(params, space), tol=TOLERANCES["steady_residual"])
        numeric = ps.evaluate_grid(me.partial_trace_cavity(rho), grid)
        meta = _metadata(cfg, p3=p.p3, eps_d=float(np.real(params.eps_d)),
                         delta_omega_d=params.delta_omega_d)
        ps.write_field(analytic, out / f"wigner_analytic_{label}.csv", {**meta, "source": "analytic"})
        ps.write_field(numeric, out / f"wigner_numeric_{label}.csv", {**meta, "source": "master equation"})
        report["points"].append({
            "label": label, "p3": p.p3, "eps_d": float(np.real(params.eps_d)),
            "delta_omega_d": params.delta_omega_d,
            "max_abs_discrepancy": float(np.max(np.abs(analytic.values - numeric.values))),
            "analytic_extrema": _extrema_table(analytic),
            "numeric_extrema": _extrema_table(numeric),
        })
    write_json(out / "steady_report.json", report)
    return report


def _first_crossing(taus, values, start):
    above = values[start:] - 1
    idx = np.nonzero(np.sign(above[1:]) != np.sign(above[:-1]))[0]
    if not len(idx):
        return None
    k = start + int(idx[0])
    t0, t1, v0, v1 = taus[k], taus[k + 1], values[k] - 1, values[k + 1] - 1
    return float(t0 - v0 * (t1 - t0) / (v1 - v0))


def cmd_g2(cfg: dict, out: Path) -> dict:
    taus = np.asarray(cfg["times"])
    report = {"config_sha256": config_hash(cfg), "points": []}
    for label, params in _drive_points(cfg):
        p = em.effective_params(params)
        if not p.p3 > 0:
            raise ConfigError("g2 needs a nonzero drive")
        beat = em.g2_analytic(p, taus)
        smooth = em.g2_analytic(p, taus, include_beat=False)
        cols = {"gamma_tau": taus, "g2_beat": beat, "g2_averaged": smooth}
        if cfg["numeric"]:
            liou = me.build_liouvillian(params, make_space(cfg["nmax"]))
            rho = me.steady_state(liou, tol=TOLERANCES["steady_residual"])
            cols["g2_numeric"] = me.g2_numeric(liou, rho, taus, rtol=TOLERANCES["ode_rtol"],
                                               atol=TOLERANCES["ode_atol"])
        write_table(out / f"g2_{label}.csv", cols, _metadata(cfg, p3=p.p3, nu=p.nu))
        k = int(np.argmax(beat))
        g0 = float(em.g2_analytic(p, 0.0))
        report["points"].append({
            "label": label, "p3": p.p3, "nu": p.nu, "beat_period": 2 * math.pi / p.nu,
            "g2_0": g0, "regime": "bunching" if g0 > 1 else "antibunching",
            "max_tau": float(taus[k]), "max_value": float(beat[k]),
            "first_crossing_of_1_after_max": _first_crossing(taus, smooth, k),
            "g2_at_tau_10": float(em.g2_analytic(p, 10.0)),
        })
    write_json(out / "g2_report.json", report)
    return report


def cmd_transient(cfg: dict, out: Path) -> dict:
    grid = ps.PhaseGrid(**cfg["grid"])
    report = {"config_sha256": config_hash(cfg), "points": []}
    for label, params in _drive_points(cfg):
        p = em.effective_params(params)
        constants = em.conditional_constants(p)
        for tau in cfg["times"]:
            rho_c = em.cavity_density_matrix(em.four_level_state(constants, p, tau))
            field = ps.evaluate_grid(rho_c, grid)
            wmin, area = ps.negativity(field)
            name = f"wigner_transient_{label}_tau_{tau:g}.csv"
            ps.write_field(field, out / name, _metadata(cfg, p3=p.p3, gamma_tau=tau))
            report["points"].append({
                "label": label, "p3": p.p3, "gamma_tau": tau, "file": name,
                "W_origin": float(ps.wigner(rho_c, 0.0)), "min": wmin, "negative_area": area,
                "ring_variance": ps.ring_variance(lambda z: ps.wigner(rho_c, z)),
            })
    write_json(out / "transient_report.json", report)
    return report


def cmd_revival(cfg: dict, out: Path) -> dict:
    p = rv.RevivalParams(cfg["alpha0"], cfg["ntrunc"])
    grid = ps.PhaseGrid(**cfg["grid"])
    times = np.asarray(cfg["times"])
    meta = _metadata(cfg, ntrunc=p.n_trunc)
    write_table(out / "revival_photon_number.csv",
                {"gt": times, "mean_photon_number": rv.mean_photon_number(p, times)}, meta)
    report = {"config_sha256": config_hash(cfg), "alpha0": p.alpha0, "ntrunc": p.n_trunc, "insets": []}
    insets = sorted(cfg["insets"])
    oracle_nmax = max(60, 2 * p.n_trunc)
    states = rv.schrodinger_oracle(p, insets, n_max=oracle_nmax, rtol=TOLERANCES["oracle_rtol"],
                                   atol=TOLERANCES["oracle_atol"]) if insets else []
    z = grid.points()
    for t, psi in zip(insets, states):
        q = rv.revival_q(p, z, t)
        field = ps.PhaseField(grid, q, "husimi")
        name = f"husimi_revival_gt_{t:g}.csv"
        ps.write_field(field, out / name, {**meta, "gt": t})
        report["insets"].append({
            "gt": t, "file": name, "extrema": _extrema_table(field),
            "oracle_max_abs_discrepancy": float(np.max(np.abs(rv.oracle_q(p, psi, z) - q))),
            "oracle_nmax": oracle_nmax,
        })
    write_json(out / "revival_report.json", report)
    return report


def cmd_verify(cfg: dict, out: Path | None = None) -> bool:
    return acceptance.run_all(seed=cfg["seed"])


COMMANDS = {"steady": cmd_steady, "g2": cmd_g2, "transient": cmd_transient,
            "revival": cmd_revival, "verify": cmd_verify}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key = value config file")
    common.add_argument("--out", default=".", help="output directory (default: .)")
    common.add_argument("--p3", help="comma-separated upper-level populations in [0, 1/4)")
    common.add_argument("--eps-d", dest="eps_d", help="comma-separated drive amplitudes in units of gamma")
    common.add_argument("--g-over-gamma", dest="g_over_gamma", type=float, help="coupling g/gamma (default 500)")
    common.add_argument("--grid", help='"xmin,xmax,ymin,ymax,nx,ny"')
    common.add_argument("--times", help="time list: v1,v2,... or start:stop:count")
    common.add_argument("--nmax", type=int, help="Fock cutoff of the full model (default 30)")
    common.add_argument("--seed", type=int, help="seed for randomized checks (default 0)")
    common.add_argument("--drive-sign", dest="drive_sign", type=int, choices=(-1, 1),
                        help="sign of the real drive amplitude derived from p3 (default +1)")
    common.add_argument("--alpha0", type=float, help="revival: eps'_d/g (default sqrt 3)")
    common.add_argument("--ntrunc", type=int, help="revival: series truncation")
    common.add_argument("--insets", help="revival: comma-separated gt values for Q fields")
    common.add_argument("--numeric", action="store_const", const="true",
                        help="g2: add the full master-equation curve")

    parser = argparse.ArgumentParser(prog="jcphase", description=__doc__.strip().splitlines()[0])
    parser.add_argument("--version", action="version", version=f"jcphase {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("steady", parents=[common], help="steady-state Wigner fields, analytic and numeric")
    sub.add_parser("g2", parents=[common], help="intensity correlation series")
    sub.add_parser("transient", parents=[common], help="transient Wigner fields after a photon count")
    sub.add_parser("revival", parents=[common], help="photon-number trace and revival Q fields")
    sub.add_parser("verify", parents=[common], help="run the acceptance suite")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = resolve_config(args.command, args)
        if args.command == "verify":
            return 0 if cmd_verify(cfg) else 1
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        report = COMMANDS[args.command](cfg, out)
    except (ConfigError, me.SteadyStateError, me.StiffnessError) as exc:
        print(f"jcphase: error: {exc}", file=sys.stderr)
        return 2
    print(json.dumps(report, indent=2, sort_keys=True))
    return 0


if __name__ == "__main__":
    sys.exit(main())
