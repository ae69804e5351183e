"""Command-line entry point: ``isowaves <scenario> [options]``.

Exit status: 0 on success, 1 when a computation fails (a diagnostic file
``error.txt`` is written next to the manifest), 2 for usage or
configuration errors.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import os
import sys
import traceback
from pathlib import Path

import numpy as np

from . import __version__
from .config import ConfigError, RunConfig, describe_defaults, parse_config
from .core import DomainError, PowerLawSpectrum, WaveactionSpectrum, sample_power_law, spectrum_from_function
from .dispersion import omega

log = logging.getLogger("isowaves")

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2
SCENARIOS = ("dispersion", "triads dump", "collision scan", "exponent-scan", "locality",
             "evolve", "gm compare", "hamlab run")


def fmt(x) -> str:
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    if isinstance(x, str):
        return x
    return format(float(x), ".17g")


class Artifacts:
    """Writes files into one output directory and nowhere else."""

    def __init__(self, root):
        self.root = Path(root).resolve()
        self.root.mkdir(parents=True, exist_ok=True)
        self.files = []

    def path(self, name: str) -> Path:
        p = (self.root / name).resolve()
        if p.parent != self.root:
            raise ValueError(f"artifact {name!r} would leave the output directory")
        return p

    def csv(self, name, header, rows):
        with open(self.path(name), "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            for r in rows:
                w.writerow([fmt(v) for v in r])
        self.files.append(name)

    def text(self, name, content):
        self.path(name).write_text(content)
        if name not in self.files:
            self.files.append(name)


def _grid_text(axes_named, values2d) -> str:
    lines = [f"# {name}," + ",".join(fmt(v) for v in ax) for name, ax in axes_named]
    lines.append(f"# shape," + ",".join(str(s) for s in values2d.shape))
    for row in values2d.reshape(values2d.shape[0], -1) if values2d.ndim > 1 else values2d[None, :]:
        lines.append(",".join(fmt(v) for v in row))
    return "\n".join(lines) + "\n"


def _spectrum(cfg: RunConfig, grid) -> WaveactionSpectrum:
    s = cfg["spectrum"]
    params = cfg.params
    if s["kind"] == "power":
        return sample_power_law(grid, PowerLawSpectrum(s["amplitude"], s["x"], s["y"]))
    if s["kind"] == "equipartition":
        return spectrum_from_function(grid, lambda k, m: s["amplitude"] / omega(k, m, params))
    kc = math.sqrt(grid.bounds[0] * grid.bounds[1])
    mc = math.sqrt(grid.bounds[2] * grid.bounds[3])
    wdt = s["width"]
    return spectrum_from_function(grid, lambda k, m: s["amplitude"] * np.exp(
        -0.5 * (np.log(k / kc) ** 2 + np.log(np.abs(m) / mc) ** 2) / wdt ** 2))


def _threads(cfg: RunConfig, override):
    if cfg["run"]["deterministic"]:
        return 1
    if override:
        return override
    if cfg["run"]["threads"]:
        return cfg["run"]["threads"]
    from .kinetic import default_threads
    return default_threads()


# ---------------------------------------------------------------------------
# scenarios


def sc_dispersion(cfg, art, threads):
    grid = cfg.grid
    p = cfg.params
    rows = [(k, m, omega(k, m, p)) for k in grid.k_axis for m in grid.m_axis]
    art.csv("dispersion.csv", ["k", "m", "omega"], rows)


def sc_triads(cfg, art, threads):
    from .triads import Triad, I_term, J_term, abs_K_term, v_squared
    rng = np.random.default_rng(cfg["run"]["seed"])
    n = cfg["triads"]["count"]
    s = cfg["triads"]["scale"]
    k2 = s * rng.uniform(0.1, 1.0, n)[:, None] * np.stack(
        [np.cos(a := rng.uniform(0, 2 * np.pi, n)), np.sin(a)], axis=1)
    k3 = s * rng.uniform(0.1, 1.0, n)[:, None] * np.stack(
        [np.cos(b := rng.uniform(0, 2 * np.pi, n)), np.sin(b)], axis=1)
    m2 = s * rng.uniform(0.1, 1.0, n) * rng.choice([-1.0, 1.0], n)
    m3 = s * rng.uniform(0.1, 1.0, n) * rng.choice([-1.0, 1.0], n)
    bad = np.abs(m2 + m3) < 1e-3 * s
    m3 = np.where(bad, m3 + 0.5 * s, m3)
    t = Triad.from_vectors(k2, k3, m2, m3)
    p = cfg.params
    q = cfg["quadrature"]["k_prefactor_quarter"]
    I, J = I_term(t, p), J_term(t, p)
    K = abs_K_term(t, p, k_prefactor_quarter=q)
    V = v_squared(t, p, k_prefactor_quarter=q)
    rows = zip(t.k1, t.k2, t.k3, t.m1, t.m2, t.m3, I, J, K, V)
    art.csv("triads.csv", ["k1", "k2", "k3", "m1", "m2", "m3", "I", "J", "abs_K", "v_squared"], rows)


def sc_collision(cfg, art, threads):
    from .kinetic import collision_rates
    grid = cfg.grid
    spec = _spectrum(cfg, grid)
    res = collision_rates(spec, cfg.params, cfg.quad(), threads=threads)
    rows = [(r.node[0], r.node[1], r.rate, *r.branch_contributions, r.normalizer, r.n_points) for r in res]
    art.csv("collision.csv", ["k", "m", "rate", "R_k12", "R_1k2", "R_21k", "normalizer", "n_points"], rows)


def sc_exponent_scan(cfg, art, threads):
    from .kinetic import stationarity_scan
    s = cfg["scan"]
    xs = np.linspace(s["x_min"], s["x_max"], s["nx"])
    ys = np.linspace(s["y_min"], s["y_max"], s["ny"])
    quad = cfg.quad(truncation=s["truncation"], window=s["window"])
    grid = cfg.grid if s["truncation"] == "box" else None
    res = stationarity_scan(xs, ys, list(s["probes"]), cfg.params, quad, grid=grid, threads=threads)
    rows = [(x, y, res.residual[i, j]) for i, x in enumerate(xs) for j, y in enumerate(ys)]
    art.csv("exponent_scan.csv", ["x", "y", "residual_norm"], rows)
    x, y = res.argmin
    art.csv("exponent_scan_min.csv", ["x", "y", "residual_norm"], [(x, y, float(np.min(res.residual)))])
    print(f"minimum residual at x={x:g}, y={y:g}")


def sc_locality(cfg, art, threads):
    from .kinetic import locality_check
    s, loc = cfg["spectrum"], cfg["locality"]
    law = PowerLawSpectrum(s["amplitude"], s["x"], s["y"])
    table = locality_check(law, (loc["node_k"], loc["node_m"]), cfg.params, cfg.grid.bounds,
                           factors=loc["factors"], quad=cfg.quad(), mode=loc["mode"],
                           tolerance=loc["tolerance"], threads=threads)
    base = table.base.rate
    rows = [(r.label, *r.bounds, r.rate, (r.rate - base) / base + 0.0 if base else math.inf) for r in table.rows]
    art.csv("locality.csv", ["cutoff", "k_min", "k_max", "m_min", "m_max", "rate", "relative_change"], rows)
    print(f"converged: {table.converged}")


def sc_evolve(cfg, art, threads):
    from .kinetic import evolve
    grid = cfg.grid
    spec = _spectrum(cfg, grid)
    spec = WaveactionSpectrum(grid, spec.values)
    e = cfg["evolve"]
    tr = evolve(spec, cfg.params, cfg.quad(), dt=e["dt"], steps=e["steps"], cfl=e["cfl"],
                energy_tolerance=e["energy_tolerance"], threads=threads)
    art.csv("evolve.csv", ["t", "energy", "max_n"],
            [(t, en, float(np.max(s.values))) for t, en, s in zip(tr.times, tr.energy, tr.spectra)])
    if e["snapshot_every"]:
        for i, s in enumerate(tr.spectra):
            if i % e["snapshot_every"] == 0:
                art.text(f"snapshot_{i:05d}.txt",
                         _grid_text([("k_axis", grid.k_axis), ("m_axis", grid.m_axis)], s.values))
    if tr.clip_events:
        art.csv("clip_events.csv", ["t", "n_clipped"], [(t, len(idx)) for t, idx in tr.clip_events])


def sc_gm(cfg, art, threads):
    from .core import PhysicalParams
    from .gm_spectra import GMParams, gm_energy_density, slope_fit, wt_energy_density
    g = cfg["gm"]
    gm = GMParams(g["E"], g["m_star"], PhysicalParams(f=g["f"], N=g["N"], g=cfg.params.g, rho0=cfg.params.rho0))
    k = np.exp(np.linspace(math.log(g["k_min"]), math.log(g["k_max"]), g["n"]))
    m = np.exp(np.linspace(math.log(g["m_min"]), math.log(g["m_max"]), g["n"]))
    E = gm_energy_density(k[:, None], m[None, :], gm)
    W = wt_energy_density(k[:, None], m[None, :], g["wt_amplitude"])
    rows = [(k[i], m[j], E[i, j], W[i, j], E[i, j] / W[i, j]) for i in range(k.size) for j in range(m.size)]
    art.csv("gm_compare.csv", ["k", "m", "gm_density", "wt_density", "ratio"], rows)
    fg, fw = slope_fit(k, m, E), slope_fit(k, m, W)
    art.csv("gm_slopes.csv", ["spectrum", "x_slope", "y_slope", "fit_residual"],
            [("gm", fg.x_slope, fg.y_slope, fg.residual), ("wt", fw.x_slope, fw.y_slope, fw.residual)])
    print(f"GM slopes: k {fg.x_slope:.4f}, m {fg.y_slope:.4f}; WT slopes: k {fw.x_slope:.4f}, m {fw.y_slope:.4f}")


def sc_hamlab(cfg, art, threads):
    from .hamlab import (HamModel, ModelKind, PeriodicGrid, hamiltonian, integrate, plane_wave_state,
                         random_smooth_state)
    h = cfg["hamlab"]
    kind = ModelKind(h["model"])
    model = HamModel(kind, f=None if h["f"] == -1.0 else h["f"], g=h["g"], N=h["N"], rho0=h["rho0"])
    grid = PeriodicGrid(h["shape"], (h["length"],) * len(h["shape"]))
    if h["initial"] == "plane":
        state = plane_wave_state(grid, h["mode"], h["amplitude"])
    else:
        state = random_smooth_state(grid, h["amplitude"], np.random.default_rng(cfg["run"]["seed"]))
    tr = integrate(state, model, h["dt"], h["steps"], h["scheme"], snapshot_every=h["snapshot_every"])
    e0 = tr.energy[0]
    art.csv("energy.csv", ["t", "H", "relative_drift"],
            [(t, e, (e - e0) / abs(e0) if e0 else 0.0) for t, e in zip(tr.times, tr.energy)])
    if h["snapshot_every"]:
        for i, s in enumerate(tr.snapshots):
            names = [("x", grid.axes[0]), ("y", grid.axes[1])] + ([("rho", grid.axes[2])] if grid.ndim == 3 else [])
            step = i * h["snapshot_every"]
            art.text(f"eta_{step:06d}.txt", _grid_text(names, s.eta))
            art.text(f"phi_{step:06d}.txt", _grid_text(names, s.phi))
    print(f"max relative H drift: {tr.max_relative_drift:.3e}")


HANDLERS = {
    "dispersion": sc_dispersion,
    "triads dump": sc_triads,
    "collision scan": sc_collision,
    "exponent-scan": sc_exponent_scan,
    "locality": sc_locality,
    "evolve": sc_evolve,
    "gm compare": sc_gm,
    "hamlab run": sc_hamlab,
}


def run(cfg: RunConfig, scenario: str, outdir, threads=None) -> int:
    """Run one scenario, writing artifacts and ``manifest.json`` to ``outdir``."""
    if scenario not in HANDLERS:
        raise ConfigError(f"unknown scenario {scenario!r}")
    art = Artifacts(outdir)
    nthreads = _threads(cfg, threads)
    art.text("config.ini", cfg.to_text())
    status, code = "ok", EXIT_OK
    try:
        HANDLERS[scenario](cfg, art, nthreads)
    except Exception as exc:  # noqa: BLE001 - any computation failure maps to exit 1
        status, code = "failed", EXIT_FAIL
        art.text("error.txt", f"{type(exc).__name__}: {exc}\n\n{traceback.format_exc()}")
        print(f"isowaves: {scenario} failed: {exc}", file=sys.stderr)
    manifest = {
        "software": "isowaves",
        "version": __version__,
        "scenario": scenario,
        "status": status,
        "threads": nthreads,
        "seed": cfg["run"]["seed"],
        "config": cfg.to_text(),
        "artifacts": list(art.files),
    }
    art.text("manifest.json", json.dumps(manifest, indent=2) + "\n")
    return code


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="isowaves",
        description="Internal-wave Hamiltonian and kinetic-equation toolkit.",
        epilog="Configuration defaults (override with --config FILE or --set section.key=value):\n\n"
               + describe_defaults()
               + "\nThread count: --threads, else ISOWAVES_THREADS, else the CPU count.",
        formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("--version", action="version", version=f"isowaves {__version__}")
    sub = p.add_subparsers(dest="scenario", metavar="scenario")
    sub.required = True

    def common(sp):
        sp.add_argument("--config", help="configuration file (INI sections, see isowaves --help)")
        sp.add_argument("--set", action="append", default=[], metavar="SECTION.KEY=VALUE",
                        help="override one configuration value")
        sp.add_argument("--out", default=None, help="output directory (default ./isowaves-out/<scenario>)")
        sp.add_argument("--threads", type=int, default=None, help="worker threads")
        sp.add_argument("--seed", type=int, default=None, help="random seed")
        sp.add_argument("--deterministic", action="store_true", help="force serial evaluation")
        sp.add_argument("-v", "--verbose", action="store_true")

    common(sub.add_parser("dispersion", help="omega over the grid"))
    common(sub.add_parser("exponent-scan", help="stationarity residual over power-law exponents"))
    common(sub.add_parser("locality", help="collision rate as the cutoffs are extended"))
    common(sub.add_parser("evolve", help="integrate the kinetic equation"))
    for name, action, text in (("triads", "dump", "interaction coefficients of random triads"),
                               ("collision", "scan", "collision rate at every grid node"),
                               ("gm", "compare", "Garrett-Munk vs wave-turbulence spectrum"),
                               ("hamlab", "run", "pseudo-spectral Hamiltonian run")):
        sp = sub.add_parser(name, help=text)
        inner = sp.add_subparsers(dest="action", metavar="action")
        inner.required = True
        common(inner.add_parser(action, help=text))
    return p


def _load_config(args) -> RunConfig:
    text = ""
    if args.config:
        try:
            text = Path(args.config).read_text(encoding="utf-8")
        except OSError as e:
            raise ConfigError(f"cannot read {args.config}: {e.strerror}")
    cfg = parse_config(text)
    if args.set:
        extra = {}
        for item in args.set:
            if "=" not in item or "." not in item.split("=", 1)[0]:
                raise ConfigError(f"--set expects SECTION.KEY=VALUE, got {item!r}")
            lhs, val = item.split("=", 1)
            sec, key = lhs.split(".", 1)
            extra.setdefault(sec.strip(), []).append(f"{key.strip()} = {val.strip()}")
        over = "\n".join(f"[{s}]\n" + "\n".join(v) for s, v in extra.items())
        try:
            cfg = parse_config(over, base=cfg)
        except ConfigError as e:
            # line numbers would point into the synthesized override text
            raise ConfigError(f"--set: {str(e).split(': ', 1)[-1] if e.line else e}")
    if args.seed is not None:
        cfg = parse_config(f"[run]\nseed = {args.seed}", base=cfg)
    if args.deterministic:
        cfg = parse_config("[run]\ndeterministic = true", base=cfg)
    return cfg


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_USAGE if e.code not in (0, None) else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    scenario = args.scenario + (f" {args.action}" if getattr(args, "action", None) else "")
    try:
        cfg = _load_config(args)
        if args.threads is not None and args.threads < 1:
            raise ConfigError("--threads must be >= 1")
    except (ConfigError, DomainError) as e:
        print(f"isowaves: configuration error: {e}", file=sys.stderr)
        return EXIT_USAGE
    out = args.out or os.path.join("isowaves-out", scenario.replace(" ", "-"))
    return run(cfg, scenario, out, args.threads)


if __name__ == "__main__":
    sys.exit(main())
