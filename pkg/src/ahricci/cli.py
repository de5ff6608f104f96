"""Command-line front end: ``ahricci <command> --config PATH --out DIR``.

Commands: ``flow``, ``spectrum``, ``sector``, ``indicial``, ``experiment``
and ``gauge-check``.  Each run writes its CSV files, a ``summary.csv`` with
one ``experiment,verdict,key_metric`` record per verdict, a gnuplot script
``plot.gp`` over the CSVs and a ``manifest.json`` listing inputs, resolved
settings (defaults included), library versions and file checksums.

Exit status: 0 when every verdict passes, 1 when a verdict fails, 2 on
errors; errors also print a one-line JSON failure record to stderr.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import os
import platform
import sys
from pathlib import Path
from typing import Dict, List, Optional, Sequence

import numpy as np

from . import __version__
from . import io as rio
from .config import COMMANDS, EXPERIMENTS, ConfigError, RunConfig, parse_config
from .experiments import (PASS, ExperimentError, continuous_dependence_sweep, convergence_experiment,
                          curvature_condition_scan, gauge_consistency_check, stability_sweep)
from .flow import FlowConfig, FlowError, chained_rdtf, run_flow
from .geometry import (DegenerateMetricError, RadialGrid, WeightedNormParams, from_profile,
                       hyperbolic_metric)
from .profiles import BumpSpec, ProfileError, bump_perturbation, get_bump, get_profile
from .spectral import (SpectralError, assemble_linearized, empirical_indicial,
                       indicial_roots_scalar, scalar_laplacian, sector_check, spectrum_bound)

EXIT_PASS = 0
EXIT_FAIL = 1
EXIT_ERROR = 2

_PLOTS = {
    "trajectory": ("t", "norm_c0_mu", "set logscale y", "weighted C0 distance to g_h"),
    "spectrum": ("re", "im", "unset logscale", "eigenvalues"),
    "sector": ("re_lambda", "im_lambda", "unset logscale", "sector samples"),
    "indicial": ("lam", "gamma_plus", "unset logscale", "decaying indicial root"),
    "scan": ("amplitude", "distance_c0_mu", "unset logscale", "distance to g_h"),
    "gauge": ("h", "discrepancy", "set logscale xy", "gauge discrepancy"),
    "dependence": ("delta", "ratio", "set logscale x", "dependence ratio"),
}


class Outputs:
    """Single writer for one run directory; remembers every file for the manifest."""

    def __init__(self, root: Path, meta: Dict[str, object]):
        self.root = root
        self.root.mkdir(parents=True, exist_ok=True)
        probe = self.root / ".write-test"
        try:
            probe.write_text("")
            probe.unlink()
        except OSError as exc:
            raise ConfigError(f"output directory {root} is not writable ({exc})") from exc
        self.meta = meta
        self.files: List[str] = []
        self.plots: List[tuple] = []
        self.summary: List[dict] = []

    def csv(self, name: str, columns, rows, extra: Optional[dict] = None, plot: Optional[str] = None):
        meta = dict(self.meta)
        meta.update(extra or {})
        rio.write_csv(self.root / name, columns, rows, meta)
        self._add(name, plot)

    def trajectory(self, name: str, traj, extra: Optional[dict] = None):
        meta = dict(self.meta)
        meta.update(extra or {})
        rio.write_trajectory(self.root / name, traj, meta)
        self._add(name, "trajectory")

    def snapshot(self, name: str, g):
        rio.write_snapshot(self.root / name, g)
        self._add(name, None)

    def _add(self, name, plot):
        self.files.append(name)
        if plot is not None:
            self.plots.append((name, plot))

    def verdict(self, experiment: str, verdict: str, key_metric):
        self.summary.append({"experiment": experiment, "verdict": verdict, "key_metric": key_metric})

    def finish(self, cfg: RunConfig, config_text: str) -> int:
        rio.write_summary(self.root / "summary.csv", self.summary, self.meta)
        self._add("summary.csv", None)
        (self.root / "plot.gp").write_text(plot_script(self.plots), encoding="utf-8")
        self.files.append("plot.gp")
        status = EXIT_PASS if all(s["verdict"] in (PASS, "converge") for s in self.summary) else EXIT_FAIL
        manifest = {
            "command": cfg.command,
            "inputs": {"config_path": cfg.config_path,
                       "config_sha256": hashlib.sha256(config_text.encode()).hexdigest(),
                       "overrides": cfg.overrides, "seed": cfg.seed},
            "config": cfg.resolved(),
            "defaults": cfg.defaults_used(),
            "versions": versions(),
            "files": {f: rio.sha256_file(self.root / f) for f in sorted(self.files)},
            "verdicts": self.summary,
            "exit_status": status,
        }
        (self.root / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True, default=_json),
                                                 encoding="utf-8")
        return status


def _json(o):
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    if isinstance(o, tuple):
        return list(o)
    raise TypeError(f"not serializable: {type(o)}")


def versions() -> Dict[str, str]:
    import numba
    import scipy
    return {"ahricci": __version__, "python": platform.python_version(), "numpy": np.__version__,
            "scipy": scipy.__version__, "numba": numba.__version__}


def plot_script(plots: Sequence[tuple]) -> str:
    """gnuplot commands drawing every emitted CSV with a known plot layout."""
    out = ["# gnuplot script over the CSV files of this run",
           "set datafile separator ','",
           "set datafile commentschars '#'",
           "set key autotitle columnhead",
           "set terminal pngcairo size 900,600", ""]
    for name, kind in plots:
        x, y, scale, title = _PLOTS[kind]
        stem = name.rsplit(".", 1)[0]
        out += [f"set output '{stem}.png'", scale, f"set title '{title}'",
                f"set xlabel '{x}'", f"set ylabel '{y}'",
                f"plot '{name}' using (column('{x}')):(column('{y}')) with linespoints", ""]
    return "\n".join(out)


def config_hash(cfg: RunConfig) -> str:
    blob = json.dumps({"values": cfg.resolved(), "seed": cfg.seed, "command": cfg.command},
                      sort_keys=True, default=_json)
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


def _grid(cfg: RunConfig) -> RadialGrid:
    return RadialGrid.from_spacing(cfg["grid.n"], cfg["grid.r_max"], cfg["grid.h"])


def _norm(cfg: RunConfig, k: Optional[int] = None) -> WeightedNormParams:
    return WeightedNormParams(cfg["norm.mu"], cfg["norm.k"] if k is None else k)


# -- commands ----------------------------------------------------------------

def cmd_flow(cfg: RunConfig, out: Outputs):
    grid = _grid(cfg)
    f = cfg.section("flow")
    g0 = from_profile(grid, get_profile(f["profile"]), cfg["norm.mu"])
    fc = FlowConfig(normalized=f["normalized"], dt=f["dt"], t_end=f["t_end"], integrator=f["integrator"],
                    cfl_safety=f["cfl_safety"], record_every=f["record_every"], norm=_norm(cfg),
                    dissipation=f["dissipation"],
                    reference=hyperbolic_metric(grid) if f["gauge"] == "deturck" else None)
    if f["gauge"] == "chained":
        part = list(np.linspace(0.0, f["t_end"], f["segments"] + 1))
        traj = chained_rdtf(g0, part, fc)
    else:
        traj = run_flow(g0, fc)
    out.trajectory("trajectory.csv", traj, {"gauge": f["gauge"], "dt": traj.dt})
    for i, g in enumerate(traj.metrics):
        out.snapshot(f"snapshot_{i:04d}.csv", g)
    verdict = PASS if traj.status == "completed" else "fail"
    out.verdict(f"flow:{f['profile']}:{f['gauge']}", verdict,
                traj.norm_c0_mu[-1] if traj.norm_c0_mu else math.nan)


def _base(cfg: RunConfig, grid: RadialGrid):
    return from_profile(grid, get_profile(cfg["spectral.base"]), cfg["norm.mu"])


def cmd_spectrum(cfg: RunConfig, out: Outputs):
    grid = _grid(cfg)
    s = cfg.section("spectral")
    base = _base(cfg, grid)
    J = assemble_linearized(base, base)
    Jf = None
    if s["refine"]:
        fine = RadialGrid(grid.n_dim, grid.r_max, 2 * (grid.n_nodes - 1) + 1)
        bf = _base(cfg, fine)
        Jf = assemble_linearized(bf, bf)
    sb = spectrum_bound(J, Jf)
    bound = grid.n_dim - 2 - s["tolerance"]
    ok = sb.min_real >= bound and (not s["refine"] or sb.relative_change < 0.02)
    out.csv("spectrum.csv", rio.SPECTRUM_COLUMNS, ({"re": z.real, "im": z.imag} for z in sb.eigenvalues),
            {"min_real": sb.min_real, "refined_min_real": sb.refined_min_real, "sign": J.sign},
            plot="spectrum")
    out.verdict(f"spectrum:{s['base']}", PASS if ok else "fail", sb.min_real)


def cmd_sector(cfg: RunConfig, out: Outputs):
    grid = _grid(cfg)
    s = cfg.section("spectral")
    base = _base(cfg, grid)
    J = assemble_linearized(base, base)
    rep = sector_check(J, s["omega"], s["theta"], s["samples"], _norm(cfg, 0), workers=s["workers"],
                       rmax=s["rmax"])
    out.csv("sector.csv", rio.SECTOR_COLUMNS, rep.rows(),
            {"omega": rep.omega, "theta": rep.theta, "C": rep.C,
             "eigenvalues_inside": rep.eigenvalues_inside}, plot="sector")
    out.verdict(f"sector:omega={s['omega']:g}", PASS if rep.passed else "fail", rep.C)


INDICIAL_COLUMNS = ("lam", "gamma_plus", "gamma_plus_exact", "abs_error", "roots")


def cmd_indicial(cfg: RunConfig, out: Outputs):
    grid = _grid(cfg)
    s = cfg.section("spectral")
    J = scalar_laplacian(grid) if s["model"] == "scalar" else assemble_linearized(
        hyperbolic_metric(grid), hyperbolic_metric(grid))
    gammas = np.linspace(s["gamma_min"], s["gamma_max"], s["gamma_steps"])
    rows = []
    ok = True
    for lam in s["lam"]:
        est = empirical_indicial(J, gammas, lam)
        gp = est.decaying_root
        exact = math.nan
        if s["model"] == "scalar":
            pair = indicial_roots_scalar(grid.n_dim, lam)
            exact = float(np.real(pair.gamma_plus)) if pair.real else math.nan
        err = abs(gp - exact) if gp is not None and np.isfinite(exact) else math.nan
        if gp is None or (s["model"] == "scalar" and not err <= s["root_tolerance"]):
            ok = False
        rows.append({"lam": lam, "gamma_plus": gp if gp is not None else math.nan,
                     "gamma_plus_exact": exact, "abs_error": err,
                     "roots": ";".join(repr(r) for r in est.roots)})
    out.csv("indicial.csv", INDICIAL_COLUMNS, rows, {"model": s["model"]}, plot="indicial")
    worst = max((r["abs_error"] for r in rows if np.isfinite(r["abs_error"])), default=math.nan)
    out.verdict(f"indicial:{s['model']}", PASS if ok else "fail", worst)


STABILITY_COLUMNS = ("base_id", "perturbation_id", "delta", "omega_fit", "r_squared", "fit_start",
                     "fit_stop", "initial_distance", "final_distance", "entry_time",
                     "half_entry_time", "verdict", "reason")


def _stability_row(r) -> dict:
    fw = r.fit_window or (None, None)
    return {"base_id": r.base_id, "perturbation_id": r.perturbation_id, "delta": r.delta,
            "omega_fit": r.omega_fit, "r_squared": r.r_squared, "fit_start": fw[0], "fit_stop": fw[1],
            "initial_distance": r.initial_distance, "final_distance": r.final_distance,
            "entry_time": r.entry_time, "half_entry_time": r.half_entry_time,
            "verdict": r.verdict, "reason": r.reason}


def random_bumps(count: int, seed: int) -> List[BumpSpec]:
    rng = np.random.default_rng(seed)
    out = []
    for i in range(count):
        comp = ("rr", "sph", "both")[int(rng.integers(3))]
        out.append(BumpSpec(f"random-{i}", float(rng.uniform(1.5, 4.0)), float(rng.uniform(0.4, 1.0)),
                            comp, float(rng.choice([-1.0, 1.0]))))
    return out


def _bumps(cfg: RunConfig) -> Dict[str, BumpSpec]:
    specs = {name: get_bump(name) for name in cfg["experiment.perturbations"]}
    for b in random_bumps(cfg["experiment.random_bumps"], cfg.seed):
        specs[b.name] = b
    return specs


def cmd_experiment(cfg: RunConfig, out: Outputs):
    e = cfg.section("experiment")
    ecfg = cfg.experiment_config()
    name = e["name"]
    prof = get_profile(e["profile"])
    if name == "convergence":
        rep = convergence_experiment(prof, ecfg, e["profile"])
        out.trajectory("trajectory.csv", rep.trajectory)
        out.csv("convergence.csv", STABILITY_COLUMNS, [_stability_row(rep)])
        out.verdict(**rep.summary())
    elif name == "stability":
        mu = cfg["norm.mu"]
        perts = {k: (lambda b, s=spec: bump_perturbation(b, s, mu)) for k, spec in _bumps(cfg).items()}
        sweep = stability_sweep(prof, perts, e["deltas"], ecfg, e["profile"])
        for r in sweep.reports:
            if r.trajectory is not None:
                out.trajectory(f"trajectory_{r.perturbation_id}_{r.delta:g}.csv", r.trajectory)
            out.verdict(**r.summary())
        out.csv("stability.csv", STABILITY_COLUMNS, [_stability_row(r) for r in sweep.reports],
                {"threshold": sweep.threshold if sweep.threshold is not None else math.nan})
    elif name == "dependence":
        g0 = from_profile(ecfg.grid(), prof, ecfg.mu)
        spec = next(iter(_bumps(cfg).values()))
        rep = continuous_dependence_sweep(g0, bump_perturbation(g0, spec, ecfg.mu), e["deltas"], e["tau"], ecfg)
        out.csv("dependence.csv", ("delta", "ratio", "status"),
                [{"delta": d, "ratio": r, "status": s} for d, r, s in zip(rep.deltas, rep.ratios, rep.statuses)],
                {"tau": rep.tau, "verdict": rep.verdict}, plot="dependence")
        out.verdict(**rep.summary())
    elif name == "gauge":
        _gauge(cfg, out)
    elif name == "scan":
        rows = curvature_condition_scan(e["amplitudes"], ecfg)
        out.csv("scan.csv", ("amplitude", "min_secT", "distance_c0_mu", "hypothesis"),
                [{"amplitude": r.amplitude, "min_secT": r.min_sec_t, "distance_c0_mu": r.distance,
                  "hypothesis": r.hypothesis_nodewise} for r in rows], plot="scan")
        d = [r.distance for r in rows]
        increasing = all(b > a for a, b in zip(d, d[1:]))
        out.verdict("scan", PASS if increasing else "fail", max(d) if d else math.nan)
    else:  # pragma: no cover - names are validated by the config parser
        raise ExperimentError(f"unknown experiment {name!r}")


def _gauge(cfg: RunConfig, out: Outputs):
    e = cfg.section("experiment")
    rep = gauge_consistency_check(get_profile(e["profile"]), e["tau"], cfg.experiment_config(),
                                  e["levels"], e["segments"])
    out.csv("gauge.csv", ("h", "dt", "discrepancy", "chained_discrepancy", "status"),
            [{"h": lv.h, "dt": lv.dt, "discrepancy": lv.discrepancy,
              "chained_discrepancy": lv.chained_discrepancy, "status": lv.status} for lv in rep.levels],
            {"order": rep.order if rep.order is not None else math.nan}, plot="gauge")
    out.verdict(**rep.summary())


def cmd_gauge_check(cfg: RunConfig, out: Outputs):
    _gauge(cfg, out)


DISPATCH = {"flow": cmd_flow, "spectrum": cmd_spectrum, "sector": cmd_sector, "indicial": cmd_indicial,
            "experiment": cmd_experiment, "gauge-check": cmd_gauge_check}


# -- entry point -------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ahricci", description=__doc__.split("\n\n")[0])
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("name", nargs="?", choices=EXPERIMENTS,
                   help="experiment name (for the 'experiment' command)")
    p.add_argument("--config", metavar="PATH", help="configuration file")
    p.add_argument("--out", metavar="DIR", default="ricci_out",
                   help="output directory (the RICCI_OUT environment variable takes precedence)")
    p.add_argument("--set", metavar="KEY=VALUE", action="append", default=[], dest="overrides",
                   help="override a configuration key (repeatable)")
    p.add_argument("--seed", type=int, default=0, help="seed for randomized sampling")
    return p


def _failure(command: Optional[str], exc: BaseException) -> int:
    rec = {"status": "error", "command": command, "error": type(exc).__name__, "message": str(exc)}
    print(json.dumps(rec, sort_keys=True, ensure_ascii=False), file=sys.stderr)
    return EXIT_ERROR


def dispatch(cfg: RunConfig, config_text: str = "") -> int:
    """Run ``cfg.command`` and write its outputs; returns the exit status."""
    out = Outputs(Path(cfg.out_dir), {"command": cfg.command, "config_hash": config_hash(cfg),
                                      "seed": cfg.seed})
    DISPATCH[cfg.command](cfg, out)
    status = out.finish(cfg, config_text)
    for s in out.summary:
        print(f"{s['experiment']},{s['verdict']},{s['key_metric']}")
    return status


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        text = Path(args.config).read_text(encoding="utf-8") if args.config else ""
        overrides = list(args.overrides)
        if args.name is not None:
            if args.command != "experiment":
                raise ConfigError(f"positional name {args.name!r} only applies to 'experiment'")
            overrides.append(f"experiment.name={args.name}")
        cfg = parse_config(text, overrides)
        cfg.command = args.command
        cfg.config_path = args.config
        cfg.seed = args.seed
        cfg.out_dir = os.environ.get("RICCI_OUT") or args.out
        return dispatch(cfg, text)
    except (ConfigError, ProfileError, ExperimentError, FlowError, SpectralError,
            DegenerateMetricError, ValueError, OSError) as exc:
        return _failure(args.command, exc)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
