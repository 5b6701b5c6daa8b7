"""Command-line front end: simulate, scan-band, trajectory, verify.

Exit codes: 0 ok, 1 config error, 2 compute error, 3 verify failure.
"""
from __future__ import annotations

import argparse
import configparser
import json
import math
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import List, Optional

import numpy as np

from . import __version__
from .billiard import BilliardMap
from .field_classical import ExtendedProfile, InitialProfile
from .field_quantum import QuantumProfile
from .parallel import max_workers
from .resonance import find_periodic_trajectories, scan_band
from .trajectory import TrajectoryError, load_trajectory_table, make_law_wu, make_sinusoidal, make_static

EXIT_OK, EXIT_CONFIG, EXIT_COMPUTE, EXIT_VERIFY = 0, 1, 2, 3


class ConfigError(ValueError):
    pass


# section -> keys accepted in the INI file; key names match RunConfig fields
_SECTIONS = {
    "trajectory": ("traj", "L0", "dL", "N", "domega"),
    "field": ("mode", "seed", "seed_value", "seed_center", "seed_width", "periods", "snapshot_periods", "nx"),
    "bounces": ("tau0", "n"),
    "band": ("omega_min", "omega_max", "samples"),
    "output": ("out", "plots"),
    "tolerances": ("quad_rel", "root_tol", "peak_grid"),
}


@dataclass
class RunConfig:
    traj: str = "sin"
    L0: float = 1.0
    dL: float = 0.01
    N: int = 1
    domega: float = 0.0
    mode: str = "classical"
    seed: str = ""  # uniform | gaussian | vacuum; empty picks by mode
    seed_value: float = 1.0
    seed_center: float = 0.0
    seed_width: float = 0.1
    periods: int = 10
    snapshot_periods: List[int] = field(default_factory=list)  # empty: last three periods
    nx: int = 1001
    tau0: Optional[float] = None  # None: L(0)
    n: int = 20
    omega_min: Optional[float] = None  # None: omega_N (1 -+ 0.03)
    omega_max: Optional[float] = None
    samples: int = 200
    out: str = "out"
    plots: bool = True
    quad_rel: float = 1e-8
    root_tol: Optional[float] = None
    peak_grid: int = 1024

    # -- construction ------------------------------------------------------
    @classmethod
    def from_ini(cls, path) -> "RunConfig":
        cp = configparser.ConfigParser()
        cp.optionxform = str  # keep L0, dL, N case
        try:
            with open(path) as fh:
                cp.read_file(fh)
        except (OSError, configparser.Error) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        cfg = cls()
        for section in cp.sections():
            if section not in _SECTIONS:
                raise ConfigError(f"unknown section [{section}]")
            for key, raw in cp.items(section):
                if key not in _SECTIONS[section]:
                    raise ConfigError(f"unknown key {section}.{key}")
                cfg.set(key, raw, where=f"{section}.{key}")
        return cfg

    def set(self, key, raw, where=None):
        where = where or key
        kinds = {f.name: f.type for f in fields(self)}
        kind = kinds[key]
        try:
            if raw is None:
                return
            if kind in ("float", "Optional[float]"):
                value = None if str(raw).strip().lower() in ("", "none") else float(raw)
            elif kind in ("int",):
                value = int(raw)
            elif kind == "bool":
                value = raw if isinstance(raw, bool) else str(raw).strip().lower() in ("1", "true", "yes", "on")
            elif kind == "List[int]":
                value = [int(v) for v in str(raw).replace(",", " ").split()] if isinstance(raw, str) else list(raw)
            else:
                value = str(raw).strip()
        except ValueError as exc:
            raise ConfigError(f"{where}: cannot parse {raw!r} as {kind}") from exc
        setattr(self, key, value)

    # -- validation ----------------------------------------------------------
    def validate(self):
        if not (self.traj in ("static", "sin", "lawwu") or self.traj.startswith("file:")):
            raise ConfigError(f"trajectory.traj: expected static|sin|lawwu|file:PATH, got {self.traj!r}")
        if self.mode not in ("classical", "quantum"):
            raise ConfigError(f"field.mode: expected classical|quantum, got {self.mode!r}")
        if self.seed not in ("", "uniform", "gaussian", "vacuum"):
            raise ConfigError(f"field.seed: expected uniform|gaussian|vacuum, got {self.seed!r}")
        if self.seed == "vacuum" and self.mode != "quantum":
            raise ConfigError("field.seed: the vacuum seed needs mode = quantum")
        if not self.L0 > 0:
            raise ConfigError("trajectory.L0: must be > 0")
        if self.N < 1:
            raise ConfigError("trajectory.N: must be >= 1")
        if self.traj == "lawwu" and self.domega != 0:
            raise ConfigError("trajectory.domega: the Law-Wu trajectory is always resonant")
        if self.periods < 1:
            raise ConfigError("field.periods: must be >= 1")
        if any(k < 1 or k > self.periods for k in self.snapshot_periods):
            raise ConfigError("field.snapshot_periods: entries must lie in 1..periods")
        if self.nx < 2:
            raise ConfigError("field.nx: must be >= 2")
        if self.n < 0:
            raise ConfigError("bounces.n: must be >= 0")
        if self.samples < 2:
            raise ConfigError("band.samples: must be >= 2")
        if self.seed_width <= 0:
            raise ConfigError("field.seed_width: must be > 0")
        if not 0 < self.quad_rel < 1:
            raise ConfigError("tolerances.quad_rel: must lie in (0, 1)")
        return self

    def echo(self) -> dict:
        return asdict(self)

    # -- builders ----------------------------------------------------------
    @property
    def omega(self) -> float:
        return self.N * math.pi / self.L0 + self.domega

    def trajectory(self):
        """Build the mirror worldline; its own checks surface as config errors."""
        try:
            if self.traj == "static":
                return make_static(self.L0)
            if self.traj == "sin":
                return make_sinusoidal(self.L0, self.dL, self.omega)
            if self.traj == "lawwu":
                return make_law_wu(self.L0, self.dL, self.N)
            return load_trajectory_table(self.traj[len("file:"):])
        except (TrajectoryError, OSError, ValueError) as exc:
            raise ConfigError(f"trajectory: {exc}") from exc

    def billiard(self, traj=None) -> BilliardMap:
        traj = self.trajectory() if traj is None else traj
        if self.root_tol is None:
            return BilliardMap(traj)
        return BilliardMap(traj, root_tolerance=self.root_tol)


# -- CSV / manifest --------------------------------------------------------
def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return "%.17g" % float(v)


def write_csv(path, columns, rows, comments=()):
    """Comma-separated, '#' header lines, 17 significant digits, '\\n' endings."""
    path = Path(path)
    with open(path, "w", newline="\n") as fh:
        for c in comments:
            fh.write(f"# {c}\n")
        fh.write("# " + ",".join(columns) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")
    return path


def read_csv(path) -> np.ndarray:
    """Data rows as a float array; ``(0, ncols)`` when only the header is present."""
    lines = Path(path).read_text().splitlines()
    header = [ln for ln in lines if ln.startswith("#")]
    ncols = len(header[-1][1:].split(",")) if header else 0
    rows = [[float(v) for v in ln.split(",")] for ln in lines if ln and not ln.startswith("#")]
    return np.array(rows, dtype=float).reshape(len(rows), ncols)


class Emitter:
    """Tracks emitted files; the manifest goes out last."""

    def __init__(self, out: Path, plots: bool):
        self.out = Path(out)
        self.out.mkdir(parents=True, exist_ok=True)
        self.plots = plots
        self.files = []

    def csv(self, name, columns, rows, comments=()):
        rows = list(rows)
        p = write_csv(self.out / name, columns, rows, comments)
        self.files.append({"name": name, "rows": len(rows)})
        return p

    def json(self, name, payload):
        p = self.out / name
        p.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
        self.files.append({"name": name, "rows": None})
        return p

    def figure(self, name, fn, *args, **kw):
        if not self.plots:
            return None
        p = fn(*args, path=self.out / name, **kw)
        self.files.append({"name": name, "rows": None})
        return p

    def manifest(self, command, cfg: RunConfig, started: float, metrics: dict):
        payload = {
            "command": command,
            "config": cfg.echo(),
            "engine_version": __version__,
            "wall_clock_s": round(time.perf_counter() - started, 3),
            "files": self.files,
            "metrics": metrics,
        }
        p = self.out / "manifest.json"
        p.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
        return payload


_UNITS = "units: c = hbar = 1; lengths and times in the same unit as L0"


# -- energy fit ------------------------------------------------------------
def fit_energy(n, E):
    """Pick ``quadratic`` (a + b n^2) or ``exponential`` (sign * exp(c0 + c1 n)).

    Fits use the upper half of the curve; the model with the smaller maximum
    relative residual wins; a quadratic exact to roundoff is always kept.
    """
    n = np.asarray(n, dtype=float)
    E = np.asarray(E, dtype=float)
    k0 = len(n) // 2
    n, E = n[k0:], E[k0:]
    scale = max(float(np.max(np.abs(E))), 1e-300)
    if len(n) < 2:
        return {"model": "quadratic", "params": {"a": float(E[0]), "b": 0.0}, "residual": 0.0}
    X = np.column_stack([np.ones_like(n), n * n])
    (a, b), *_ = np.linalg.lstsq(X, E, rcond=None)
    r_quad = float(np.max(np.abs(E - (a + b * n * n))) / scale)
    best = {"model": "quadratic", "params": {"a": float(a), "b": float(b)}, "residual": r_quad}
    if np.all(E > 0) or np.all(E < 0):
        sgn = 1.0 if E[0] > 0 else -1.0
        c1, c0 = np.polyfit(n, np.log(np.abs(E)), 1)
        r_exp = float(np.max(np.abs(E - sgn * np.exp(c0 + c1 * n))) / scale)
        if r_exp < r_quad and r_quad > 1e-12:
            best = {"model": "exponential", "params": {"sign": sgn, "log_amplitude": float(c0), "rate": float(c1)},
                    "residual": r_exp}
    return best


def _fit_curve(fit, n):
    n = np.asarray(n, dtype=float)
    p = fit["params"]
    if fit["model"] == "quadratic":
        return p["a"] + p["b"] * n * n
    return p["sign"] * np.exp(p["log_amplitude"] + p["rate"] * n)


# -- commands --------------------------------------------------------------
def _profile(cfg: RunConfig, billiard):
    L_start = float(billiard.trajectory.position(0.0))
    seed = cfg.seed or ("vacuum" if cfg.mode == "quantum" else "uniform")
    if seed == "uniform":
        init = InitialProfile.uniform(cfg.seed_value, L_start)
    elif seed == "gaussian":
        init = InitialProfile.gaussian(cfg.seed_center, cfg.seed_width, cfg.seed_value, L_start)
    else:
        init = None
    if cfg.mode == "quantum":
        return QuantumProfile(billiard, seed_rho=init, quad_rel=cfg.quad_rel)
    return ExtendedProfile(init, billiard, quad_rel=cfg.quad_rel)


def cmd_simulate(cfg: RunConfig) -> dict:
    started = time.perf_counter()
    traj = cfg.trajectory()
    billiard = cfg.billiard(traj)
    prof = _profile(cfg, billiard)
    em = Emitter(cfg.out, cfg.plots)
    L0 = traj.L0

    n, t, E = prof.energy_curve(cfg.periods)
    em.csv("energy.csv", ("n", "t", "E"), zip(n, t, E),
           (f"{cfg.mode} total energy at bounce midpoints T*_n(L(0))", _UNITS))

    snaps = cfg.snapshot_periods or list(range(max(1, cfg.periods - 2), cfg.periods + 1))
    times = [2.0 * L0 * k + 0.25 * L0 for k in snaps]

    def one(tk):
        x, y = prof.snapshot(tk, cfg.nx)
        return tk, x, y, prof.peak_metrics(tk, grid=cfg.peak_grid)

    with ThreadPoolExecutor(max_workers=max_workers()) as pool:
        results = list(pool.map(one, times))
    peak_rows = []
    for k, (tk, x, y, peaks) in zip(snaps, results):
        em.csv(f"density_p{k:04d}.csv", ("x", "T00"), zip(x, y),
               (f"energy density T00(t, x) at t = {_fmt(tk)}", _UNITS))
        peak_rows += [(k, tk, p.position, p.tau, p.height, p.width) for p in peaks]
    em.csv("peaks.csv", ("period", "t", "x", "tau", "height", "width"), peak_rows,
           ("local maxima of T00 with FWHM widths", _UNITS))

    summary = None
    if cfg.mode == "quantum":
        c = None
        try:
            pos = [p for p in find_periodic_trajectories(billiard) if p.sign == "positive"] \
                if traj.kind not in ("static", "tabulated") else []
            if pos:
                c = prof.growth_coefficient(pos[0], n_max=max(20, 2 * cfg.periods))
        except Exception:  # no clean resonance: leave it out of the summary
            c = None
        summary = {"N": cfg.N, "dL": cfg.dL, "L0": L0, "n_max": cfg.periods, "growth_coefficient": c}
    # metrics are recomputed from what was written, so they can be re-derived from the files
    metrics = _simulate_metrics(em.out, snaps)
    if summary is not None:
        summary["energy_fit"] = {"model": metrics["energy_fit"]["model"], "params": metrics["energy_fit"]["params"]}
        em.json("summary.json", summary)
        metrics["growth_coefficient"] = summary["growth_coefficient"]

    if cfg.plots:
        from . import plotting
        en = read_csv(em.out / "energy.csv")
        em.figure("energy.png", plotting.plot_energy, en[:, 0], en[:, 1], en[:, 2],
                  fit=_fit_curve(metrics["energy_fit"], en[:, 0]))
        em.figure("density.png", plotting.plot_density, [(tk, x, y) for tk, x, y, _ in results])
    return em.manifest("simulate", cfg, started, metrics)


def _simulate_metrics(out: Path, snaps) -> dict:
    en = read_csv(out / "energy.csv")
    pk = read_csv(out / "peaks.csv")
    last = snaps[-1]
    count = int(np.sum(pk[:, 0] == last)) if pk.size else 0
    fit = fit_energy(en[:, 0], en[:, 2])
    return {"energy_fit": fit, "peak_count": count, "E_final": float(en[-1, 2])}


def cmd_scan_band(cfg: RunConfig) -> dict:
    started = time.perf_counter()
    w_N = cfg.N * math.pi / cfg.L0
    lo = cfg.omega_min if cfg.omega_min is not None else w_N * 0.97
    hi = cfg.omega_max if cfg.omega_max is not None else w_N * 1.03
    if not 0 < lo < hi:
        raise ConfigError("band: need 0 < omega_min < omega_max")
    if cfg.dL < 0 or cfg.dL >= cfg.L0:
        raise ConfigError("trajectory.dL: need 0 <= dL < L0")
    res = scan_band(cfg.L0, cfg.dL, (lo, hi), cfg.samples, N=cfg.N)
    em = Emitter(cfg.out, cfg.plots)
    em.csv("band.csv", ("omega", "delta_omega_over_omega", "has_return_points", "growth_exponent"), res.rows(),
           (f"sinusoidal mirror L0 = {_fmt(cfg.L0)}, dL = {_fmt(cfg.dL)}, resonance N = {cfg.N}",
            "growth_exponent = log D_1 per period at the amplified periodic ray", _UNITS))
    metrics = _band_metrics(em.out, cfg)
    if cfg.plots:
        from . import plotting
        b = read_csv(em.out / "band.csv")
        em.figure("band.png", plotting.plot_band, b[:, 1], b[:, 3], b[:, 2] > 0, cfg.dL / cfg.L0)
    return em.manifest("scan-band", cfg, started, metrics)


def _band_metrics(out: Path, cfg: RunConfig) -> dict:
    b = read_csv(out / "band.csv")
    inside = b[:, 2] > 0
    half = float(np.max(np.abs(b[inside, 1]))) if np.any(inside) else 0.0
    return {"band_half_width_measured": half, "band_half_width_theory": cfg.dL / cfg.L0,
            "max_growth_exponent": float(np.max(b[:, 3]))}


def cmd_trajectory(cfg: RunConfig) -> dict:
    started = time.perf_counter()
    traj = cfg.trajectory()
    billiard = cfg.billiard(traj)
    tau0 = float(traj.position(0.0)) if cfg.tau0 is None else float(cfg.tau0)
    seq = billiard.iterate_bounces(tau0, cfg.n)
    A = seq.anomaly()
    rows = [(0, tau0, float("nan"), 1.0, 0.0)]
    rows += [(k + 1, seq.times[k + 1], seq.retarded[k], seq.dopplers[k], A[k]) for k in range(seq.n)]
    em = Emitter(cfg.out, cfg.plots)
    em.csv("bounces.csv", ("k", "T_k", "Tstar_k", "D_k", "A_k"), rows,
           (f"bounce sequence from tau0 = {_fmt(tau0)} ({traj.kind} trajectory)",
            "Tstar_k = (T_k + T_(k-1))/2 is the time of the k-th reflection off the moving mirror", _UNITS))
    b = read_csv(em.out / "bounces.csv")
    metrics = {"n": int(b[-1, 0]), "D_final": float(b[-1, 3]), "A_final": float(b[-1, 4]),
               "log_D_per_bounce": float(np.log(b[-1, 3]) / b[-1, 0]) if b[-1, 0] > 0 else 0.0}
    if cfg.plots:
        from . import plotting
        em.figure("bounces.png", plotting.plot_bounces, b[:, 0], b[:, 3], b[:, 4])
    return em.manifest("trajectory", cfg, started, metrics)


def cmd_verify(inject_error: Optional[str] = None, stream=None) -> int:
    from .verify import run_checks
    stream = stream or sys.stdout
    results = run_checks(inject_error=inject_error)
    failed = 0
    for r in results:
        status = "PASS" if r.ok else "FAIL"
        failed += not r.ok
        extra = f"  ({r.error})" if r.error else ""
        print(f"[{status}] {r.name}: residual={r.residual:.3e} tol={r.tol:.1e}{extra}", file=stream)
    print(f"{len(results) - failed}/{len(results)} checks passed", file=stream)
    return EXIT_OK if failed == 0 else EXIT_VERIFY


# -- argument parsing ------------------------------------------------------
def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="INI file; flags override it")
    common.add_argument("--out", help="output directory")
    common.add_argument("--mode", choices=("classical", "quantum"))
    common.add_argument("--traj", help="static | sin | lawwu | file:PATH (columns t, L)")
    common.add_argument("--L0", type=float)
    common.add_argument("--dL", type=float)
    common.add_argument("--N", type=int)
    common.add_argument("--domega", type=float)
    common.add_argument("--periods", type=int)
    common.add_argument("--tau0", type=float)
    common.add_argument("--n", type=int)
    common.add_argument("--no-plots", action="store_true", help="skip PNG figures")

    ap = argparse.ArgumentParser(prog="cavity-billiard",
                                 description="Parametric resonance in a 1D vibrating cavity (billiard method)")
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)
    sub.add_parser("simulate", parents=[common], help="field densities, energy curve and peaks")
    sb = sub.add_parser("scan-band", parents=[common], help="growth exponent across driving frequencies")
    sb.add_argument("--range", nargs=2, type=float, metavar=("OMEGA_MIN", "OMEGA_MAX"))
    sb.add_argument("--samples", type=int)
    sub.add_parser("trajectory", parents=[common], help="bounce table T_k, T*_k, D_k, A_k")
    v = sub.add_parser("verify", help="oracle-vs-engine cross-checks")
    v.add_argument("--inject-error", metavar="CHECK", help=argparse.SUPPRESS)
    return ap


def config_from_args(args) -> RunConfig:
    cfg = RunConfig.from_ini(args.config) if getattr(args, "config", None) else RunConfig()
    for key in ("out", "mode", "traj", "L0", "dL", "N", "domega", "periods", "tau0", "n", "samples"):
        val = getattr(args, key, None)
        if val is not None:
            cfg.set(key, val)
    if getattr(args, "range", None):
        cfg.omega_min, cfg.omega_max = args.range
    if getattr(args, "no_plots", False):
        cfg.plots = False
    return cfg.validate()


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "verify":
        return cmd_verify(args.inject_error)
    try:
        cfg = config_from_args(args)
        run = {"simulate": cmd_simulate, "scan-band": cmd_scan_band, "trajectory": cmd_trajectory}[args.command]
        manifest = run(cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:  # anything raised by the engine
        print(f"compute error ({type(exc).__name__}): {exc}", file=sys.stderr)
        return EXIT_COMPUTE
    print(json.dumps({"out": cfg.out, "files": [f["name"] for f in manifest["files"]],
                      "metrics": manifest["metrics"]}, indent=2, sort_keys=True))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
