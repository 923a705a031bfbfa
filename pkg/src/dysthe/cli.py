"""Command-line front end: one subcommand per experiment.

Exit status is 0 on success, 1 when the experiment's acceptance check
fails and 2 on usage errors (bad flags, bad config, unwritable output).
Parameters come from defaults, then an optional JSON ``--config`` file,
then explicit flags, with later sources winning.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import dynamics, estimates, resonance

__all__ = ["main", "dumps", "emit_plotdata", "build_parser", "DEFAULTS"]

RATIO_COLUMNS = ["estimate_id", "size_param", "trial", "lhs", "rhs", "ratio"]
RESONANCE_COLUMNS = ["N", "n", "j", "count", "method", "runtime_ms"]
TRAJECTORY_COLUMNS = ["step", "time", "h2_norm", "I_value"]

RANDOMIZED = {"strichartz-l6", "strichartz-lr", "l4", "dyadic", "bilinear", "trilinear", "viscous"}

DEFAULTS: dict[str, dict] = {
    "resonance": {"N": 1, "n": 0, "j": -4, "method": "both"},
    "strichartz-l6": {"N": [4, 8, 16], "eps": 0.1, "trials": 50, "alpha": 0.0, "max_increase": 0.25},
    "strichartz-lr": {"N": [4, 8, 16], "r": 8, "eps": 0.1, "trials": 50, "alpha": 0.0, "max_increase": 0.25},
    "l4": {"N": [4, 8, 16], "spread": 4, "per_mode": 2, "trials": 50, "vary": "N", "max_increase": 0.25},
    "dyadic": {"N": 4, "j_max": 5, "k_max": 5, "trials": 20, "constant": 4.0},
    "bilinear": {"N": [4, 8], "s": 0.5, "spread": 4, "trials": 100, "variant": "mean-zero", "max_increase": 0.25},
    "trilinear": {"N": 4, "spread": 2, "s": 0.5, "T": [0.5, 0.25, 0.125], "component": "Z", "max_variation": 2.0},
    "picard": {"m": 16, "s": -0.5, "t_factor": 0.1, "K": None, "agreement": 1e-6},
    "illposed": {"m": [16], "s": -0.5, "t_factor": 0.1, "tolerance": 0.1, "slope_tolerance": 0.1},
    "viscous": {"N": 4, "amp": 0.5, "mu": 0.1, "dt": 0.001, "steps": 100, "bandlimit": None,
                "linear": False, "record_energy": False},
    "energy": {"n": [4], "f": [16]},
}
COMMON = {"seed": None, "format": "json", "output": None, "threads": 1, "plotdata": None}
TOLERANCES = ("max_increase", "constant", "max_variation", "agreement", "tolerance", "slope_tolerance")


class UsageError(Exception):
    pass


# --------------------------------------------------------------------------
# serialisation
# --------------------------------------------------------------------------


def _fmt_float(x: float) -> str:
    if math.isnan(x):
        return '"nan"'
    if math.isinf(x):
        return '"inf"' if x > 0 else '"-inf"'
    return format(x, ".17g")


def dumps(obj, indent: int = 2, _level: int = 0) -> str:
    """JSON with every float written to 17 significant digits.

    Complex numbers become ``[re, im]``; numpy scalars and arrays are
    converted to their Python equivalents; tuples become lists.
    """
    pad = " " * (indent * (_level + 1))
    end = " " * (indent * _level)
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if obj is None:
        return "null"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _fmt_float(float(obj))
    if isinstance(obj, (complex, np.complexfloating)):
        return dumps([obj.real, obj.imag], indent, _level)
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, np.ndarray):
        return dumps(obj.tolist(), indent, _level)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {dumps(v, indent, _level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(isinstance(v, (int, float, np.number, str)) or v is None for v in obj):
            return "[" + ", ".join(dumps(v, indent, _level + 1) for v in obj) + "]"
        return "[\n" + ",\n".join(pad + dumps(v, indent, _level + 1) for v in obj) + "\n" + end + "]"
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def _csv_text(columns, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([_csv_cell(row.get(c)) for c in columns])
    return buf.getvalue()


def _csv_cell(v):
    if v is None:
        return ""
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    return v


def _resolve(path: str | None) -> Path | None:
    if path is None:
        return None
    p = Path(path)
    base = os.environ.get("DYSTHE_OUTPUT_DIR")
    if base and not p.is_absolute():
        p = Path(base) / p
    return p


def _write(text: str, path: str | None):
    p = _resolve(path)
    if p is None:
        sys.stdout.write(text)
        return
    try:
        p.parent.mkdir(parents=True, exist_ok=True)
        p.write_text(text)
    except OSError as exc:
        raise UsageError(f"cannot write {p}: {exc}") from exc


def emit_plotdata(points, path) -> Path:
    """Write ``(x, y)`` pairs as a two-column CSV; no points gives a header-only file."""
    p = _resolve(str(path))
    try:
        p.parent.mkdir(parents=True, exist_ok=True)
        with open(p, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["x", "y"])
            for x, y in points:
                w.writerow([_csv_cell(float(x)), _csv_cell(float(y))])
    except OSError as exc:
        raise UsageError(f"cannot write {p}: {exc}") from exc
    return p


# --------------------------------------------------------------------------
# experiments: each returns (payload, csv columns, csv rows, plot points, ok)
# --------------------------------------------------------------------------


def _run_resonance(c):
    q = resonance.ResonanceQuery(int(c["N"]), int(c["n"]), int(c["j"]))
    methods = {"brute": [resonance.count_bruteforce], "divisor": [resonance.count_divisor],
               "both": [resonance.count_bruteforce, resonance.count_divisor]}[c["method"]]
    results = [fn(q) for fn in methods]
    rows = [{"N": q.N, "n": q.n, "j": q.j, "count": r.count, "method": r.method,
             "runtime_ms": r.runtime_ms} for r in results]
    # runtimes vary between runs, so JSON leaves them out
    payload = {"N": q.N, "n": q.n, "j": q.j,
               "results": [{k: v for k, v in r.as_dict().items() if k != "runtime_ms"} for r in results]}
    ok = len({(r.count, r.solutions) for r in results}) == 1
    return payload, RESONANCE_COLUMNS, rows, [(q.N, r.count) for r in results[:1]], ok


def _trend_ok(report, limit):
    return all(inc <= limit for inc in estimates.trend_increase(report))


def _ratio_output(report, ok, extra=None):
    payload = report.as_dict()
    payload["passed"] = ok
    if extra:
        payload.update(extra)
    return payload, RATIO_COLUMNS, report.rows, report.trend, ok


def _sizes(v):
    return [v] if isinstance(v, (int, float)) else list(v)


def _run_strichartz_l6(c):
    spec = estimates.RandomFieldSpec(1, alpha=c["alpha"], seed=c["seed"])
    rep = estimates.strichartz_l6_report(spec, c["eps"], c["trials"], _sizes(c["N"]), c["threads"])
    return _ratio_output(rep, _trend_ok(rep, c["max_increase"]))


def _run_strichartz_lr(c):
    spec = estimates.RandomFieldSpec(1, alpha=c["alpha"], seed=c["seed"])
    rep = estimates.lr_strichartz_report(spec, int(c["r"]), c["eps"], c["trials"], _sizes(c["N"]), c["threads"])
    return _ratio_output(rep, _trend_ok(rep, c["max_increase"]),
                         {"sobolev_exponent": estimates.lr_exponent(int(c["r"]), c["eps"])})


def _run_l4(c):
    Ns, spreads = [int(x) for x in _sizes(c["N"])], [int(x) for x in _sizes(c["spread"])]
    spec = estimates.RandomFieldSpec(Ns[0], spread=spreads[0], per_mode=int(c["per_mode"]), seed=c["seed"])
    sizes = Ns if c["vary"] == "N" else spreads
    rep = estimates.l4_ratio_report(spec, c["trials"], sizes, c["vary"], c["threads"])
    return _ratio_output(rep, _trend_ok(rep, c["max_increase"]))


def _run_dyadic(c):
    rep = estimates.dyadic_sweep(int(c["N"]), range(int(c["j_max"]) + 1), range(int(c["k_max"]) + 1),
                                 int(c["trials"]), c["seed"], c["threads"])
    return _ratio_output(rep, rep.max_ratio <= c["constant"])


def _run_bilinear(c):
    spec = estimates.RandomFieldSpec(1, spread=int(c["spread"]), seed=c["seed"])
    rep = estimates.bilinear_z_report(spec, c["s"], c["trials"], c["variant"], _sizes(c["N"]), c["threads"])
    return _ratio_output(rep, _trend_ok(rep, c["max_increase"]))


def _run_trilinear(c):
    u = estimates.RandomFieldSpec(int(c["N"]), spread=int(c["spread"]), seed=c["seed"]).spacetime(0)
    rep = estimates.trilinear_report(u, c["s"], _sizes(c["T"]), c["component"], c["seed"])
    vals = [r for _, r in rep.trend]
    variation = max(vals) / min(vals)
    return _ratio_output(rep, variation <= c["max_variation"], {"variation": variation})


def _run_picard(c):
    m, s = int(c["m"]), float(c["s"])
    t = c["t_factor"] / m
    u0 = dynamics.illposed_initial_data(m, s)
    exact = dynamics.third_picard_iterate(u0, t, "exact")
    quad = dynamics.third_picard_iterate(u0, t, "quadrature", K=c["K"])
    scale = float(np.max(np.abs(exact.coeffs)))
    diff = float(np.max(np.abs((exact - quad.with_bandlimit(exact.bandlimit)).coeffs))) / scale
    K = c["K"] if c["K"] is not None else dynamics.quadrature_nodes(u0, t)
    payload = {"m": m, "s": s, "t": t, "quadrature_nodes": K, "peak_exact": exact[m], "peak_quadrature": quad[m],
               "max_rel_diff": diff, "passed": diff <= c["agreement"]}
    rows = [{"mode": int(k), "re": v.real, "im": v.imag} for k, v in zip(exact.modes, exact.coeffs) if v != 0]
    points = [(r["mode"], abs(complex(r["re"], r["im"]))) for r in rows]
    return payload, ["mode", "re", "im"], rows, points, payload["passed"]


def _run_illposed(c):
    ms = [int(m) for m in _sizes(c["m"])]
    if len(ms) == 1:
        rep = dynamics.illposedness_experiment(ms[0], c["s"], c["t_factor"])
        ok = rep.rel_dev <= c["tolerance"]
        points = [(math.log(rep.m), math.log(rep.scaled_peak))]
    else:
        rep = dynamics.illposedness_sweep(ms, c["s"], c["t_factor"])
        ok = abs(rep.fitted_slope - 1.0) <= c["slope_tolerance"]
        points = [(math.log(r["m"]), math.log(r["scaled_peak"])) for r in rep.sweep]
    payload = rep.as_dict()
    payload["passed"] = ok
    rows = rep.sweep or [{"m": rep.m, "peak_abs": rep.peak_abs, "scaled_peak": rep.scaled_peak, "rel_dev": rep.rel_dev}]
    return payload, ["m", "peak_abs", "scaled_peak", "rel_dev"], rows, points, ok


def _run_viscous(c):
    spec = estimates.RandomFieldSpec(int(c["N"]), alpha=2.0, seed=c["seed"])
    u0 = spec.spatial(0) * float(c["amp"])
    p = dynamics.ViscousParams(c["mu"], c["dt"], int(c["steps"]), c["bandlimit"], nonlinear=not c["linear"])
    ok = True
    try:
        u, traj = dynamics.viscous_solve(u0, p, record_energy=c["record_energy"])
    except dynamics.BlowUpError as exc:
        ok, traj, u = False, exc.trajectory, None
    payload = {"mu": p.mu, "dt": p.dt, "steps": p.steps, "blew_up": not ok, "trajectory": traj,
               "final": None if u is None else {"modes": u.modes, "coeffs": u.coeffs}}
    points = [(r["time"], r["h2_norm"]) for r in traj]
    return payload, TRAJECTORY_COLUMNS, traj, points, ok


def _run_energy(c):
    ns, fs = [int(x) for x in _sizes(c["n"])], [int(x) for x in _sizes(c["f"])]
    if len(ns) != len(fs):
        raise UsageError("--n and --f need the same number of values")
    rows = []
    for n, f in zip(ns, fs):
        value = dynamics.energy_functional_I(dynamics.vn_family(n, f).field)
        rows.append({"n": n, "f": f, "I_value": value, "closed_form": dynamics.I_vn_closed_form(n, f),
                     "reference_polynomial": dynamics.reference_I_polynomial(n, f), "I_over_f": value / f})
    payload = {"rows": rows}
    return payload, ["n", "f", "I_value", "closed_form", "reference_polynomial", "I_over_f"], rows, \
        [(r["f"], r["I_value"]) for r in rows], True


RUNNERS = {
    "resonance": _run_resonance,
    "strichartz-l6": _run_strichartz_l6,
    "strichartz-lr": _run_strichartz_lr,
    "l4": _run_l4,
    "dyadic": _run_dyadic,
    "bilinear": _run_bilinear,
    "trilinear": _run_trilinear,
    "picard": _run_picard,
    "illposed": _run_illposed,
    "viscous": _run_viscous,
    "energy": _run_energy,
}


# --------------------------------------------------------------------------
# parsing
# --------------------------------------------------------------------------


def _add(sp, name, **kw):
    sp.add_argument(f"--{name.replace('_', '-')}", dest=name, default=argparse.SUPPRESS, **kw)


_SUBPARSERS: dict[str, argparse.ArgumentParser] = {}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dysthe", description="Numerical experiments for the periodic Dysthe equation.")
    sub = parser.add_subparsers(dest="command", required=True, metavar="SUBCOMMAND")
    for name in RUNNERS:
        sp = sub.add_parser(name, help=f"run the {name} experiment")
        _SUBPARSERS[name] = sp
        _add(sp, "seed", type=int, help="master seed (required for randomized experiments)")
        _add(sp, "format", choices=["csv", "json"], help="output format (default json)")
        _add(sp, "output", help="output file (default stdout); relative paths honour DYSTHE_OUTPUT_DIR")
        _add(sp, "config", help="JSON file of parameters; flags win")
        _add(sp, "threads", type=int, help="worker threads (default 1)")
        _add(sp, "plotdata", help="also write an x,y CSV for plotting")
        _SUBCOMMAND_ARGS[name](sp)
    return parser


def _args_resonance(sp):
    _add(sp, "N", type=int)
    _add(sp, "n", type=int)
    _add(sp, "j", type=int)
    _add(sp, "method", choices=["brute", "divisor", "both"])


def _args_ratio(sp, with_r=False):
    _add(sp, "N", type=int, nargs="+", help="bandlimit sweep")
    _add(sp, "eps", type=float)
    _add(sp, "trials", type=int)
    _add(sp, "alpha", type=float, help="coefficient decay exponent")
    _add(sp, "max_increase", type=float, help="allowed growth of the max ratio per doubling")
    if with_r:
        _add(sp, "r", type=int)


def _args_l4(sp):
    _add(sp, "N", type=int, nargs="+")
    _add(sp, "spread", type=int, nargs="+")
    _add(sp, "per_mode", type=int)
    _add(sp, "trials", type=int)
    _add(sp, "vary", choices=["N", "spread"])
    _add(sp, "max_increase", type=float)


def _args_dyadic(sp):
    _add(sp, "N", type=int)
    _add(sp, "j_max", type=int)
    _add(sp, "k_max", type=int)
    _add(sp, "trials", type=int)
    _add(sp, "constant", type=float)


def _args_bilinear(sp):
    _add(sp, "N", type=int, nargs="+")
    _add(sp, "s", type=float)
    _add(sp, "spread", type=int)
    _add(sp, "trials", type=int)
    _add(sp, "variant", choices=sorted(estimates.BILINEAR_VARIANTS))
    _add(sp, "max_increase", type=float)


def _args_trilinear(sp):
    _add(sp, "N", type=int)
    _add(sp, "spread", type=int)
    _add(sp, "s", type=float)
    _add(sp, "T", type=float, nargs="+")
    _add(sp, "component", choices=["X", "Z"])
    _add(sp, "max_variation", type=float)


def _args_picard(sp):
    _add(sp, "m", type=int)
    _add(sp, "s", type=float)
    _add(sp, "t_factor", type=float)
    _add(sp, "K", type=int, help="quadrature nodes (default: automatic)")
    _add(sp, "agreement", type=float, help="allowed exact-vs-quadrature relative difference")


def _args_illposed(sp):
    _add(sp, "m", type=int, nargs="+")
    _add(sp, "s", type=float)
    _add(sp, "t_factor", type=float)
    _add(sp, "tolerance", type=float, help="allowed deviation from the closed form (single m)")
    _add(sp, "slope_tolerance", type=float, help="allowed deviation of the fitted slope from 1 (m sweep)")


def _args_viscous(sp):
    _add(sp, "N", type=int, help="bandlimit of the random initial data")
    _add(sp, "amp", type=float)
    _add(sp, "mu", type=float)
    _add(sp, "dt", type=float)
    _add(sp, "steps", type=int)
    _add(sp, "bandlimit", type=int, help="working bandlimit (default: that of the data)")
    _add(sp, "linear", action="store_true", help="drop the nonlinearity")
    _add(sp, "record_energy", action="store_true", help="record I(u) along the trajectory")


def _args_energy(sp):
    _add(sp, "n", type=int, nargs="+")
    _add(sp, "f", type=int, nargs="+")


_SUBCOMMAND_ARGS = {
    "resonance": _args_resonance,
    "strichartz-l6": _args_ratio,
    "strichartz-lr": lambda sp: _args_ratio(sp, with_r=True),
    "l4": _args_l4,
    "dyadic": _args_dyadic,
    "bilinear": _args_bilinear,
    "trilinear": _args_trilinear,
    "picard": _args_picard,
    "illposed": _args_illposed,
    "viscous": _args_viscous,
    "energy": _args_energy,
}


def _load_config(path: str) -> dict:
    try:
        with open(path) as fh:
            cfg = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(cfg, dict):
        raise UsageError("config must be a JSON object")
    return {k.replace("-", "_"): v for k, v in cfg.items()}


def resolve_config(command: str, flags: dict) -> dict:
    """Merge defaults, the config file and explicit flags, then validate."""
    cfg = {**COMMON, **DEFAULTS[command]}
    if "config" in flags:
        extra = _load_config(flags["config"])
        unknown = set(extra) - set(cfg)
        if unknown:
            raise UsageError(f"unknown config keys for {command}: {sorted(unknown)}")
        cfg.update(extra)
    cfg.update({k: v for k, v in flags.items() if k not in ("config", "command")})
    if command in RANDOMIZED and cfg["seed"] is None:
        raise UsageError(f"{command} is randomized and needs --seed")
    if cfg["seed"] is not None and not 0 <= int(cfg["seed"]) < 2**64:
        raise UsageError("seed must be a 64-bit unsigned integer")
    if cfg["format"] not in ("csv", "json"):
        raise UsageError("format must be csv or json")
    if int(cfg["threads"]) < 1:
        raise UsageError("threads must be >= 1")
    for key in TOLERANCES:
        if key in cfg and not cfg[key] > 0:
            raise UsageError(f"{key} must be positive")
    return cfg


def run(command: str, cfg: dict) -> int:
    try:
        payload, columns, rows, points, ok = RUNNERS[command](cfg)
    except (ValueError, KeyError, TypeError) as exc:
        raise UsageError(f"{command}: {exc}") from exc
    if cfg["format"] == "json":
        text = dumps({"command": command, "config": {k: v for k, v in cfg.items() if k not in ("output", "plotdata", "threads")},
                      "report": payload}) + "\n"
    else:
        text = _csv_text(columns, rows)
    _write(text, cfg["output"])
    if cfg["plotdata"]:
        emit_plotdata(points, cfg["plotdata"])
    return 0 if ok else 1


def main(argv=None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    flags = vars(ns)
    command = flags["command"]
    try:
        cfg = resolve_config(command, flags)
        return run(command, cfg)
    except UsageError as exc:
        print(_SUBPARSERS[command].format_usage(), file=sys.stderr, end="")
        print(f"dysthe {command}: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
