"""Command-line entry point: ``bistable <command> [options]``.

Exit codes: 0 success or passing check, 1 usage/config/precondition error,
2 numerical failure (divergence, failed check, solver disagreement).
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import tempfile
from pathlib import Path

import numpy as np
import yaml

from . import __version__
from .boltzmann import build_model, stable_direction, t_star_monotone, tail_experiment
from .config import ConfigError, RunConfig
from .errors import BistableError, DivergenceError
from .estimates import (bochner_counterexample, decay_fit, default_tau_grid, haar_l4_bound,
                        l2_tail_series, linear_flow, phi, quadratic_form_series,
                        scale_invariant_data, shift_energy, sharpness_probe, techcor_check)
from .linear import BoundaryData, bvp_check, random_instance
from .nonlinear import (BilinearMap, NonlinearMap, h1_tail, linear_map, picard_solve,
                        random_symmetric_tensor, tensor_norm_bound, zero_map)
from .semigroup import loglog_slope, sharp_bound_scan
from .spectral import SpectrumSpec, abs_power_inv, from_config
from .trajectory import Trajectory, from_csv, geometric_grid, to_csv

CHECKS = ("quadform", "tails", "decay", "sharpness", "haar", "bochner", "techcor")


class UsageError(BistableError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


# --- output ---------------------------------------------------------------

def _finite_json(v):
    if isinstance(v, dict):
        return {str(k): _finite_json(u) for k, u in v.items()}
    if isinstance(v, (list, tuple)):
        return [_finite_json(u) for u in v]
    if isinstance(v, np.ndarray):
        return _finite_json(v.tolist())
    if isinstance(v, (np.bool_, bool)):
        return bool(v)
    if isinstance(v, (np.integer, int)):
        return int(v)
    if isinstance(v, (np.floating, float)):
        v = float(v)
        return v if math.isfinite(v) else str(v)
    return v


def write_atomic(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


class Output:
    def __init__(self, out_dir: str, cfg: RunConfig):
        self.dir = Path(out_dir)
        self.cfg = cfg
        self.written: list[str] = []

    def _header(self) -> list[str]:
        return [f"config_hash={self.cfg.digest}", f"version={__version__}"]

    def json(self, name: str, payload: dict) -> None:
        body = {**_finite_json(payload), "provenance": self.cfg.provenance()}
        write_atomic(self.dir / name, json.dumps(body, sort_keys=True, indent=2) + "\n")
        self.written.append(name)

    def trajectory(self, name: str, traj: Trajectory) -> None:
        write_atomic(self.dir / name, to_csv(traj, self._header()))
        self.written.append(name)

    def table(self, name: str, rows: list[dict]) -> None:
        cols: list[str] = []
        for r in rows:
            cols += [k for k in r if k not in cols]
        lines = [f"# {h}" for h in self._header()] + [",".join(cols)]
        for r in rows:
            lines.append(",".join(_fmt(r.get(c, "")) for c in cols))
        write_atomic(self.dir / name, "\n".join(lines) + "\n")
        self.written.append(name)


def _fmt(v) -> str:
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    if isinstance(v, (list, tuple)):
        return '"' + " ".join(_fmt(u) for u in v) + '"'
    return str(v)


# --- model construction from config ---------------------------------------

def build_spectrum(cfg: RunConfig) -> SpectrumSpec:
    return from_config(cfg.block("spectrum", required=True))


def build_nonlinear(cfg: RunConfig, spec: SpectrumSpec) -> NonlinearMap:
    block = cfg.block("nonlinear")
    kind = block.get("kind", "zero")
    if kind == "zero":
        return zero_map()
    if kind == "linear":
        return linear_map(float(block["c"]))
    if kind == "bilinear":
        rng = np.random.default_rng(int(block.get("seed", cfg.seed)))
        t = random_symmetric_tensor(spec.n, rng)
        t *= float(block["amplitude"]) / tensor_norm_bound(t)
        return BilinearMap(t, saturation_radius=float(block.get("rho", 1.0))).as_nonlinear()
    raise ConfigError(f"unknown nonlinear kind {kind!r}")


def build_g0(cfg: RunConfig, spec: SpectrumSpec) -> np.ndarray:
    block = cfg.block("g0", required=True)
    kind = block.get("kind", "values")
    if kind == "values":
        g0 = np.asarray(block["values"], dtype=float)
    elif kind == "mode":
        g0 = np.zeros(spec.n)
        g0[int(block["index"])] = float(block.get("value", 1.0))
    elif kind == "random":
        g0 = float(block.get("scale", 0.5)) * stable_direction(spec, int(block.get("seed", cfg.seed)))
    elif kind == "mixed":
        h = scale_invariant_data(spec) * float(block.get("scale", 1.0))
        g0 = np.sqrt(np.clip(spec.alphas, 0, None)) * h
    else:
        raise ConfigError(f"unknown g0 kind {kind!r}")
    if g0.shape != (spec.n,):
        raise ConfigError(f"g0 must have {spec.n} entries")
    return g0


def _grid(solver: dict) -> np.ndarray:
    return geometric_grid(solver["T"], solver["grid_theta"], solver["t_min"], solver["h_max"])


def _simulate(cfg: RunConfig):
    spec = build_spectrum(cfg)
    G = build_nonlinear(cfg, spec)
    g0 = build_g0(cfg, spec)
    s = cfg.solver()
    res = picard_solve(spec, G, g0, _grid(s), tol=s["tol"], gamma_max=s["gamma"],
                       max_iter=s["max_iter"])
    return spec, G, res


# --- commands ---------------------------------------------------------------

def cmd_simulate(args, cfg: RunConfig, out: Output) -> int:
    cfg.override("spectrum", None, _flow(args.spectrum))
    cfg.override("g0", None, _flow(args.g0))
    cfg.override("solver", "T", args.T)
    cfg.override("solver", "tol", args.tol)
    cfg.override("solver", "gamma", args.gamma)
    cfg.override("solver", "grid_theta", args.grid_theta)
    try:
        spec, G, res = _simulate(cfg)
    except DivergenceError as exc:
        out.json("report.json", {"command": "simulate", "converged": False, "error": str(exc),
                                 "iterations": exc.iterations, "rate_estimate": exc.rate})
        print(f"error: {exc}", file=sys.stderr)
        return 2
    x = res.trajectory
    out.trajectory("trajectory.csv", x)
    out.json("report.json", {"command": "simulate", "converged": True, **res.report(),
                             "distances": res.distances, "lip_bound": G.lip_bound,
                             "sup_norm": x.sup_norm(), "h1_norm": float(h1_tail(x)[0]),
                             "grid_points": int(x.times.size)})
    return 0


def _flow(text):
    if text is None:
        return None
    try:
        return yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"cannot parse flag value {text!r}: {exc}") from None


def _snap(times, pairs):
    idx = lambda t: float(times[int(np.argmin(np.abs(times - t)))])
    return [(idx(a), idx(b)) for a, b in pairs]


def _verify_decay(args, cfg, block):
    k_max = int(args.k if args.k is not None else block.get("k", 1))
    source = block.get("source", "simulate")
    t_small = tuple(block.get("t_small", (2.0 ** -12, 2.0 ** -4)))
    tol = float(block.get("slope_tol", 0.15))
    if source == "exact":
        spec = build_spectrum(cfg)
        if cfg.get("g0") is None:
            h = scale_invariant_data(spec)
        else:
            h = abs_power_inv(spec, build_g0(cfg, spec), 0.5)
        x = linear_flow(spec, h)
        t_large = tuple(block.get("t_large", (1.0, 10.0)))
        mode = block.get("mode", "two_sided")
    elif source == "simulate":
        spec, _, res = _simulate(cfg)
        x = res.trajectory
        t_large = tuple(block["t_large"]) if "t_large" in block else None
        mode = block.get("mode", "upper")
    else:
        raise ConfigError(f"unknown decay source {source!r}")
    reports = decay_fit(x, k_max, t_small=t_small, t_large=t_large)
    rate_min = float(block.get("rate_min", 0.4))
    margins = []
    for r in reports[1:]:
        dev = r.small_t_slope + r.k
        margins.append(tol - abs(dev) if mode == "two_sided" else tol + dev)
    margins.append(reports[0].large_t_rate - rate_min)
    margin = min(margins) if all(math.isfinite(m) for m in margins) else float("nan")
    rows = [{"k": r.k, "t": t, "norm": v} for r in reports
            for t, v in zip(r.samples["small_t"], r.samples["small_vals"])]
    verdict = {"check": "decay", "pass": bool(margin >= 0), "margin": margin,
               "params": {"k_max": k_max, "source": source, "mode": mode, "slope_tol": tol,
                          "rate_min": rate_min, "t_small": list(t_small)},
               "fits": [{"k": r.k, "small_t_slope": r.small_t_slope,
                         "large_t_rate": r.large_t_rate, **r.constants, **r.fit_residuals}
                        for r in reports]}
    return verdict, rows


def _verify_haar(cfg, block):
    source = block.get("source", "bump")
    if source == "bump":
        t = np.linspace(0.0, 1.0, int(block.get("m", 4001)))
        x = Trajectory(t, phi(2 * t - 1)[:, None])
    else:
        x = _simulate(cfg)[2].trajectory
    hb = haar_l4_bound(x)
    rows = [{"tau": tau, "c2_tau": shift_energy(x, tau) / tau} for tau in default_tau_grid(x)]
    verdict = {"check": "haar", "pass": hb.holds, "margin": hb.margin,
               "params": {"source": source}, "lhs": hb.lhs, "rhs": hb.rhs, "C1": hb.C1,
               "C2": hb.C2, "tau_star": hb.tau_star, "refined": hb.refined}
    return verdict, rows


def _verify_techcor(cfg, block):
    source = block.get("source", "exact")
    pairs = block.get("pairs", [[0.0, 1.0], [0.5, 2.0], [1.0, 4.0]])
    if source == "exact":
        t = np.linspace(0.0, 10.0, 10001)
        y = Trajectory(t, np.exp(-t)[:, None])
        h, f = y, np.zeros_like(t)
    else:
        spec, G, res = _simulate(cfg)
        y = res.trajectory
        h = Trajectory(y.times, 0.5 * y.values * spec.alphas[None, :])
        f = np.sum(G(y.values) * y.values, axis=1)
    chk = techcor_check(h, y, f, _snap(y.times, pairs))
    return {**chk.verdict(), "params": {"source": source}}, chk.table


def cmd_verify(args, cfg: RunConfig, out: Output) -> int:
    name = args.check
    block = cfg.block(name)
    if name in ("quadform", "tails"):
        spec, _, res = _simulate(cfg)
        chk = (quadratic_form_series(spec, res.trajectory) if name == "quadform"
               else l2_tail_series(res.trajectory))
        verdict, rows = chk.verdict(), chk.table
    elif name == "decay":
        verdict, rows = _verify_decay(args, cfg, block)
    elif name == "sharpness":
        spec = build_spectrum(cfg)
        ks = [args.k] if args.k is not None else list(block.get("k", [0, 1, 2]))
        verdict, rows = {"check": "sharpness", "params": {"k": ks}, "per_k": []}, []
        margins = []
        for k in ks:
            chk = sharpness_probe(spec, int(k))
            d = chk.details
            exact = k != 0 or (d["lower_ratio"] == math.exp(-1.0) and d["spread"] == 0.0)
            margins.append(min(d["lower_ratio"], 1e-9 - d["spread"]) if exact else -1.0)
            verdict["per_k"].append({"k": k, **d})
            rows += [{"k": k, **r} for r in chk.table]
        verdict["margin"] = min(margins)
        verdict["pass"] = bool(verdict["margin"] >= 0)
    elif name == "haar":
        verdict, rows = _verify_haar(cfg, block)
    elif name == "bochner":
        r = float(args.r if args.r is not None else block.get("r", 2.0))
        chk = bochner_counterexample(r)
        verdict, rows = chk.verdict(), chk.table
    elif name == "techcor":
        verdict, rows = _verify_techcor(cfg, block)
    else:  # pragma: no cover - argparse restricts choices
        raise UsageError(f"unknown check {name!r}")
    out.table(f"{name}.csv", rows)
    out.json(f"{name}.json", verdict)
    print(f"{name}: {'PASS' if verdict['pass'] else 'FAIL'} (margin {verdict['margin']})")
    return 0 if verdict["pass"] else 2


def _load_vector(path, n):
    try:
        v = np.loadtxt(path, delimiter=None if not str(path).endswith(".csv") else ",",
                       comments="#", ndmin=1).ravel()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from None
    if v.size != n:
        raise ConfigError(f"{path}: expected {n} entries, found {v.size}")
    return v


def cmd_bvp(args, cfg: RunConfig, out: Output) -> int:
    block = cfg.block("bvp", required=True)
    tol_cross = float(block.get("cross_tol", 1e-5))
    tol_res = float(block.get("residual_tol", 1e-6))
    if block.get("random"):
        spec, f, bd = random_instance(int(block.get("seed", cfg.seed)), int(block.get("n", 32)),
                                      int(block.get("m", 4000)), float(block.get("t0", 0.0)),
                                      float(block.get("t1", 1.0)))
    else:
        spec = build_spectrum(cfg)
        if "f_file" in block:
            try:
                f = from_csv(Path(block["f_file"]).read_text())
            except OSError as exc:
                raise ConfigError(f"cannot read f_file: {exc}") from None
            if f.n != spec.n:
                raise ConfigError("f_file columns do not match the spectrum")
        else:
            t = np.linspace(float(block["t0"]), float(block["t1"]), int(block.get("m", 1000)) + 1)
            f = Trajectory(t, np.zeros((t.size, spec.n)))
        g0 = _load_vector(block["g0_file"], spec.n) if "g0_file" in block else np.zeros(spec.n)
        g1 = _load_vector(block["g1_file"], spec.n) if "g1_file" in block else np.zeros(spec.n)
        bd = BoundaryData(g0, g1)
    bd.validate(spec)
    rep = bvp_check(spec, f, bd)
    out.trajectory("solution.csv", rep.pop("solution"))
    ok_cross = rep.get("cross_l2", 0.0) <= tol_cross
    ok_res = rep["residual"] <= tol_res
    out.json("report.json", {"command": "bvp", **rep, "cross_tol": tol_cross,
                             "residual_tol": tol_res, "pass": bool(ok_cross and ok_res)})
    if not ok_cross:
        print(f"error: Fourier and variation-of-constants solutions differ by "
              f"{rep['cross_l2']:.3g} > {tol_cross:g}", file=sys.stderr)
    return 0 if ok_cross and ok_res else 2


def cmd_boltzmann(args, cfg: RunConfig, out: Output) -> int:
    cfg.override("boltzmann", "K", args.K)
    cfg.override("boltzmann", "seed", args.model_seed)
    cfg.override("boltzmann", "amplitude", args.amplitude)
    cfg.override("boltzmann", "T", args.T)
    if args.g0_scale_sweep is not None:
        cfg.override("boltzmann", "scales", [float(s) for s in args.g0_scale_sweep.split(",")])
    b = cfg.block("boltzmann")
    seed = int(b.get("seed", cfg.seed))
    model = build_model(int(b.get("K", 16)), seed, float(b.get("amplitude", 0.03)),
                        float(b.get("radius", 3.0)), float(b.get("rho", 1.0)),
                        bool(b.get("conserve", False)))
    scales = [float(s) for s in b.get("scales", [0.9, 0.45, 0.225, 0.1125, 0.05625])]
    d = stable_direction(model.spec, seed)
    s = cfg.solver()
    reps = tail_experiment(model, [c * d for c in scales], T=float(b.get("T", s["T"])),
                           theta=s["grid_theta"], t_min=s["t_min"], h_max=s["h_max"],
                           tol=s["tol"], threshold=float(b.get("threshold", 1e-3)),
                           max_iter=s["max_iter"])
    for r, c in zip(reps, scales):
        r["scale"] = c
        out.json(f"member_{r['member']:02d}.json", r)
    out.table("summary.csv", [{k: r.get(k, "") for k in
                               ("member", "scale", "g0_norm", "converged", "iterations",
                                "t_star", "rate", "h1_rate", "slope_k1", "passed")} for r in reps])
    mono = t_star_monotone(reps)
    ok = all(r.get("converged") and r.get("passed") for r in reps) and mono
    out.json("summary.json", {"command": "boltzmann-tail", "pass": bool(ok),
                              "t_star_monotone": mono, "alphas": model.spec.alphas,
                              "lip_bound": model.G.lip_bound, "members": len(reps)})
    return 0 if ok else 2


def cmd_sharpness_scan(args, cfg: RunConfig, out: Output) -> int:
    spec = build_spectrum(cfg)
    b = cfg.block("scan")
    r = float(args.r if args.r is not None else b.get("r", 1.0))
    t = np.geomspace(float(b.get("t_min", 1e-4)), float(b.get("t_max", 1.0)),
                     int(b.get("points", 33)))
    rows = sharp_bound_scan(spec, r, t)
    ratios = np.array([row["ratio"] for row in rows])
    margin = 1.0 + 1e-12 - float(ratios.max())
    out.table("scan.csv", rows)
    out.json("scan.json", {"check": "sharpness-scan", "pass": bool(margin >= 0),
                           "margin": margin, "params": {"r": r},
                           "slope": loglog_slope(t, [row["sup_norm"] for row in rows]),
                           "max_ratio": float(ratios.max())})
    return 0 if margin >= 0 else 2


# --- parser -----------------------------------------------------------------

def _global_flags(p, suppress: bool):
    d = argparse.SUPPRESS if suppress else None
    p.add_argument("--config", default=d, help="config file (name = value lines)")
    p.add_argument("--out", default=argparse.SUPPRESS if suppress else "out",
                   help="output directory")
    p.add_argument("--seed", type=int, default=d)
    p.add_argument("--threads", type=int, default=d)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="bistable", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    _global_flags(parser, suppress=False)
    common = _Parser(add_help=False)
    _global_flags(common, suppress=True)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("simulate", parents=[common], help="Picard solve of the nonlinear problem")
    p.add_argument("--spectrum", help="spectrum mapping, e.g. '{kind: harmonic, n: 8}'")
    p.add_argument("--g0", help="g0 mapping, e.g. '{kind: mode, index: 7}'")
    p.add_argument("--T", type=float)
    p.add_argument("--tol", type=float)
    p.add_argument("--gamma", type=float)
    p.add_argument("--grid-theta", type=float)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("verify", parents=[common], help="run one estimate check")
    p.add_argument("check", choices=CHECKS)
    p.add_argument("--k", type=int)
    p.add_argument("--r", type=float)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("bvp", parents=[common], help="linear two-point problem")
    p.set_defaults(func=cmd_bvp)

    p = sub.add_parser("boltzmann-tail", parents=[common], help="velocity-model tail sweep")
    p.add_argument("--K", type=int)
    p.add_argument("--model-seed", type=int)
    p.add_argument("--amplitude", type=float)
    p.add_argument("--g0-scale-sweep", help="comma-separated scales")
    p.add_argument("--T", type=float)
    p.set_defaults(func=cmd_boltzmann)

    p = sub.add_parser("sharpness-scan", parents=[common], help="sup-norm smoothing scan")
    p.add_argument("--r", type=float)
    p.set_defaults(func=cmd_sharpness_scan)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = RunConfig.from_file(args.config) if args.config else RunConfig()
        if args.seed is not None:
            cfg.override("seed", None, args.seed)
        if args.threads is not None:
            import numba
            numba.set_num_threads(max(1, min(args.threads, numba.config.NUMBA_NUM_THREADS)))
        return args.func(args, cfg, Output(args.out, cfg))
    except DivergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (BistableError, KeyError, TypeError, ValueError) as exc:
        msg = f"missing config entry {exc}" if isinstance(exc, KeyError) else str(exc)
        print(f"error: {msg}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
