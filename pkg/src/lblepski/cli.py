"""Command-line front end.

Every option can also come from a JSON file given with ``--config``; its keys
are the option names with dashes replaced by underscores.  Explicit flags
override the file, and the file overrides built-in defaults.  Environment
variables are never read.

Exit codes: 0 success, 2 configuration error, 3 no bandwidth jump found,
4 numeric failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import io
from .bandwidths import parse_grid, theoretical_grid
from .calibration import NoJumpError, calibrate_and_select, default_a_grid, selection_path
from .empirical_norms import monte_carlo_risk, oracle_bandwidth, sphere_family
from .kernel_estimator import CUTOFF_RADIUS, graph_laplacian_family, set_threads
from .lepski_select import LepskiSelector
from .manifold_lab import get_function, sample_uniform_sphere
from .theory_constants import TheoryConfig, constants_report

EXIT_OK, EXIT_CONFIG, EXIT_NO_JUMP, EXIT_NUMERIC = 0, 2, 3, 4

DEFAULT_GRID = "log:0.02:0.8:15"
DEFAULT_A_GRID = "geom:1e4:1e-6:101"


class ConfigError(ValueError):
    pass


# name -> (type, default, help); type "flag" is a boolean switch
OPTIONS = {
    "config": (str, None, "JSON file with option values"),
    "threads": (int, None, "worker threads (default: all cores)"),
    "single_thread": ("flag", False, "run on one thread"),
    "seed": (int, 0, "master seed"),
    "n": (int, 1000, "number of points"),
    "n1": (int, 50000, "estimation-sample size"),
    "n2": (int, 1000, "validation-sample size"),
    "replicates": (int, 5, "Monte-Carlo replicates"),
    "grid": (str, DEFAULT_GRID, "bandwidths: log:HMIN:HMAX:NUM, theoretical, or h1,h2,..."),
    "a_grid": (str, DEFAULT_A_GRID, "calibration constants: geom:AMAX:AMIN:NUM or a1,a2,... descending"),
    "a": (float, None, "Lepski constant a (fixed mode)"),
    "b": (float, None, "Lepski constant b (fixed mode)"),
    "mode": (str, "practical", "variance term: practical or theoretical"),
    "strict": ("flag", False, "drop inadmissible bandwidths instead of warning"),
    "convention": (str, "weighted", "risk target: weighted (p * Laplacian) or analytic"),
    "function": (str, "test", "function on the sphere: test, cos_phi, const:<c>"),
    "cutoff": (float, None, f"truncate kernel sums at CUTOFF * h (e.g. {CUTOFF_RADIUS:g})"),
    "input": (str, None, "estimation cloud CSV (x,y,z,f)"),
    "queries": (str, None, "query cloud CSV (x,y,z[,f]); defaults to --input"),
    "validation": (str, None, "validation cloud CSV (x,y,z,f) used with --input"),
    "d": (int, 2, "intrinsic dimension"),
    "m": (int, 3, "ambient dimension"),
    "C": (float, 0.0, "geometric constant C"),
    "C1": (float, 0.0, "geometric constant C1"),
    "rho": (float, 1.0, "reach / injectivity-radius constant rho(M)"),
    "mu": (float, 4 * np.pi, "volume mu(M)"),
    "p_inf": (float, 1 / (4 * np.pi), "sup of the density"),
    "p1_inf": (float, 0.0, "sup of first density derivatives"),
    "p2_inf": (float, 0.0, "sup of second density derivatives"),
    "C_F": (float, 1.0, "smoothness bound of f"),
    "out": (str, None, "output file"),
    "path_out": (str, None, "selection path CSV"),
    "out_dir": (str, None, "output directory"),
}

# per-command overrides of OPTIONS defaults
COMMAND_DEFAULTS = {"constants": {"n": None, "grid": None}}

COMMON = ["config", "threads", "single_thread"]
THEORY = ["d", "m", "C", "C1", "rho", "mu", "p_inf", "p1_inf", "p2_inf", "C_F"]
BENCH_DATA = ["grid", "n1", "n2", "seed", "function", "cutoff", "input", "validation"]
SELECT = ["a_grid", "mode", "strict"] + THEORY

COMMANDS = {
    "sample": (["n", "seed", "function", "out"], "sample the unit sphere and write x,y,z,f", ["out"]),
    "estimate": (["input", "queries", "grid", "d", "function", "cutoff", "out"],
                 "graph Laplacians of a point cloud, written as h,query_index,value", ["input", "out"]),
    "risk": (["grid", "n1", "n2", "replicates", "seed", "convention", "function", "cutoff", "out"],
             "Monte-Carlo risk of each bandwidth on the sphere bench", ["out"]),
    "lepski": (BENCH_DATA + ["a", "b"] + SELECT + ["out", "path_out"],
               "Lepski selection with fixed (a, b), or calibrated when both are omitted", ["out"]),
    "calibrate": (BENCH_DATA + SELECT + ["out", "path_out"],
                  "bandwidth-jump calibration and the selected h(a0, 2 a0)", ["out"]),
    "constants": (THEORY + ["grid", "n", "a", "out"], "theoretical constants as JSON", ["out"]),
    "bench": (["grid", "n1", "n2", "replicates", "seed", "convention", "function", "cutoff"]
              + SELECT + ["out_dir"], "full sphere experiment: risk curve and calibrated selection",
              ["out_dir"]),
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lblepski", description=__doc__.splitlines()[0],
                                     allow_abbrev=False)
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (opts, doc, _) in COMMANDS.items():
        p = sub.add_parser(name, help=doc, description=doc, allow_abbrev=False,
                           argument_default=argparse.SUPPRESS)
        for key in COMMON + opts:
            typ, default, hlp = OPTIONS[key]
            flag = "--" + key.replace("_", "-")
            text = hlp if default is None or typ == "flag" else f"{hlp} (default: {default})"
            if typ == "flag":
                p.add_argument(flag, dest=key, action="store_true", help=text)
            else:
                p.add_argument(flag, dest=key, type=typ, help=text)
    return parser


def resolve(ns: argparse.Namespace) -> dict:
    opts = COMMANDS[ns.command][0]
    allowed = set(COMMON + opts)
    given = {k: v for k, v in vars(ns).items() if k != "command"}
    values = {k: OPTIONS[k][1] for k in allowed}
    values.update(COMMAND_DEFAULTS.get(ns.command, {}))
    if given.get("config"):
        try:
            data = json.loads(Path(given["config"]).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config file: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError("config file must hold a JSON object")
        unknown = sorted(set(data) - allowed - {"command"})
        if unknown:
            raise ConfigError(f"unknown config keys for {ns.command}: {', '.join(unknown)}")
        for k, v in data.items():
            if k == "command":
                continue
            typ = OPTIONS[k][0]
            try:
                values[k] = bool(v) if typ == "flag" else (None if v is None else typ(v))
            except (TypeError, ValueError) as exc:
                raise ConfigError(f"config key {k}: {exc}") from exc
    values.update(given)
    for req in COMMANDS[ns.command][2]:
        if values.get(req) is None:
            raise ConfigError(f"--{req.replace('_', '-')} is required")
    values["command"] = ns.command
    return values


def parse_a_grid(spec: str) -> np.ndarray:
    spec = spec.strip()
    if spec.startswith("geom:"):
        parts = spec.split(":")
        if len(parts) != 4:
            raise ConfigError(f"bad a grid {spec!r}; expected geom:AMAX:AMIN:NUM")
        return default_a_grid(float(parts[1]), float(parts[2]), int(parts[3]))
    vals = np.array([float(v) for v in spec.split(",") if v.strip()])
    if vals.size == 0:
        raise ConfigError("empty a grid")
    return vals


def _theory(c) -> TheoryConfig:
    return TheoryConfig(**{k: c[k] for k in THEORY})


def _check_out(path, is_dir=False):
    p = Path(path)
    parent = p if is_dir else p.parent
    if is_dir:
        if p.exists() and not p.is_dir():
            raise ConfigError(f"{p} exists and is not a directory")
        if not p.parent.is_dir():
            raise ConfigError(f"directory {p.parent} does not exist")
    elif not parent.is_dir():
        raise ConfigError(f"directory {parent} does not exist")


def _positive(c, *keys):
    for k in keys:
        if c.get(k) is not None and not c[k] > 0:
            raise ConfigError(f"--{k.replace('_', '-')} must be positive")


def validate(c: dict) -> dict:
    """Check everything that can be checked before computing; returns parsed objects."""
    cmd = c["command"]
    parsed = {}
    try:
        if "function" in c:
            parsed["function"] = get_function(c["function"])
        if cmd == "sample" and c["n"] < 0:
            raise ConfigError("--n must be >= 0")
        _positive(c, "n1", "n2", "replicates", "cutoff", "threads")
        if c.get("convention") not in (None, "weighted", "analytic"):
            raise ConfigError("--convention must be weighted or analytic")
        if c.get("mode") not in (None, "practical", "theoretical"):
            raise ConfigError("--mode must be practical or theoretical")
        if cmd in ("lepski", "calibrate", "bench", "constants"):
            parsed["theory"] = _theory(c)
        if cmd in ("lepski", "calibrate", "bench"):
            parsed["a_grid"] = parse_a_grid(c["a_grid"])
            if np.any(parsed["a_grid"] <= 0) or np.any(np.diff(parsed["a_grid"]) >= 0):
                raise ConfigError("a grid must be positive and strictly descending")
        if cmd == "lepski":
            if (c["a"] is None) != (c["b"] is None):
                raise ConfigError("give both --a and --b, or neither for calibration")
            if c["a"] is not None and not (0 < c["a"] <= c["b"]):
                raise ConfigError("need 0 < a <= b")
        if cmd == "constants" and c.get("a") is not None and c.get("n") is None:
            raise ConfigError("--a needs --n")
        if c.get("input") and cmd in ("lepski", "calibrate"):
            if not c.get("validation"):
                raise ConfigError("--input needs --validation")
            parsed["est"] = io.read_cloud_csv(c["input"], c.get("d", 2))
            parsed["val"] = io.read_cloud_csv(c["validation"], c.get("d", 2))
            if parsed["est"].f is None or parsed["val"].f is None:
                raise ConfigError("estimation and validation CSVs need an f column")
        if cmd == "estimate":
            est = io.read_cloud_csv(c["input"], c["d"])
            if est.f is None:
                raise ConfigError("--input needs an f column")
            qry = io.read_cloud_csv(c["queries"], c["d"]) if c.get("queries") else est
            if qry.f is None:
                if c.get("function") is None:
                    raise ConfigError("query f values unknown; add an f column or --function")
                qry.f = parsed["function"].ambient(qry.points)
            parsed["est"], parsed["qry"] = est, qry
        if cmd == "constants":
            if c["grid"] is not None:
                parsed["grid"] = parse_grid(c["grid"], c["n"])
            elif c["n"] is not None:
                parsed["grid"] = theoretical_grid(c["n"])
            else:
                parsed["grid"] = None
        elif "grid" in c:
            n_for_grid = c.get("n1") or (parsed["est"].n if "est" in parsed else None)
            parsed["grid"] = parse_grid(c["grid"], n_for_grid)
        for key in ("out", "path_out"):
            if c.get(key):
                _check_out(c[key])
        if c.get("out_dir"):
            _check_out(c["out_dir"], is_dir=True)
    except ConfigError:
        raise
    except (ValueError, OSError, KeyError) as exc:
        raise ConfigError(str(exc)) from exc
    return parsed


def _family(c, p):
    if "est" in p:
        fam = graph_laplacian_family(p["est"], p["val"], p["grid"], cutoff=c["cutoff"])
    else:
        fam, _ = sphere_family(p["grid"], c["n1"], c["n2"], c["seed"], 0, p["function"], c["cutoff"])
    return fam


def cmd_sample(c, p):
    cloud = sample_uniform_sphere(c["n"], c["seed"])
    cloud.f = p["function"].ambient(cloud.points) if cloud.n else np.zeros(0)
    io.write_cloud_csv(c["out"], cloud)


def cmd_estimate(c, p):
    fam = graph_laplacian_family(p["est"], p["qry"], p["grid"], cutoff=c["cutoff"])
    io.write_family_csv(c["out"], fam)


def cmd_risk(c, p):
    table = monte_carlo_risk(p["grid"], c["n1"], c["n2"], c["replicates"], c["seed"],
                             c["convention"], p["function"], c["cutoff"])
    io.write_risk_csv(c["out"], table)
    print(f"oracle bandwidth: {oracle_bandwidth(table):.6g}")
    return table


def _run_calibration(c, p, fam):
    res = calibrate_and_select(fam, p["a_grid"], c["mode"], p["theory"], c["strict"])
    io.write_json(c["out"], res.to_dict())
    if c.get("path_out"):
        io.write_path_csv(c["path_out"], res.path)
    print(f"a0 = {res.a0:.6g}, selected bandwidth = {res.selection.h_hat:.6g}")
    return res


def cmd_lepski(c, p):
    fam = _family(c, p)
    if c["a"] is None:
        return _run_calibration(c, p, fam)
    sel = LepskiSelector(fam, c["mode"], p["theory"], c["strict"])
    result = sel.select(c["a"], c["b"])
    io.write_json(c["out"], result.to_dict())
    if c.get("path_out"):
        io.write_path_csv(c["path_out"], selection_path(fam, p["a_grid"], selector=sel))
    print(f"selected bandwidth = {result.h_hat:.6g}")
    return result


def cmd_calibrate(c, p):
    return _run_calibration(c, p, _family(c, p))


def cmd_constants(c, p):
    grid = () if p["grid"] is None else p["grid"].h
    rep = constants_report(p["theory"], grid, a=c["a"], n=c["n"] if c["a"] is not None else None)
    io.write_json(c["out"], rep.to_dict())
    return rep


def cmd_bench(c, p):
    out = Path(c["out_dir"])
    table = monte_carlo_risk(p["grid"], c["n1"], c["n2"], c["replicates"], c["seed"],
                             c["convention"], p["function"], c["cutoff"])
    fam, _ = sphere_family(p["grid"], c["n1"], c["n2"], c["seed"], 0, p["function"], c["cutoff"])
    res = calibrate_and_select(fam, p["a_grid"], c["mode"], p["theory"], c["strict"])
    out.mkdir(exist_ok=True)
    io.write_risk_csv(out / "risk.csv", table)
    io.write_path_csv(out / "path.csv", res.path)
    io.write_json(out / "selection.json", res.to_dict())
    h_star = oracle_bandwidth(table)
    h_hat = res.selection.h_hat
    summary = {"h_star": h_star, "h_hat": h_hat, "a0": res.a0,
               "risk_h_star": table.risk_at(h_star), "risk_h_hat": table.risk_at(h_hat),
               "risk_ratio": table.risk_at(h_hat) / table.risk_at(h_star),
               "n1": c["n1"], "n2": c["n2"], "replicates": c["replicates"], "seed": c["seed"]}
    io.write_json(out / "summary.json", summary)
    print(f"oracle h* = {h_star:.6g}, calibrated h = {h_hat:.6g} (a0 = {res.a0:.6g})")
    return summary


HANDLERS = {"sample": cmd_sample, "estimate": cmd_estimate, "risk": cmd_risk, "lepski": cmd_lepski,
            "calibrate": cmd_calibrate, "constants": cmd_constants, "bench": cmd_bench}


def main(argv=None) -> int:
    ns = build_parser().parse_args(argv)
    try:
        c = resolve(ns)
        p = validate(c)
    except ConfigError as exc:
        print(f"lblepski {ns.command}: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    set_threads(1 if c["single_thread"] else c["threads"])
    try:
        with np.errstate(over="raise", invalid="raise", divide="raise"):
            HANDLERS[c["command"]](c, p)
    except NoJumpError as exc:
        print(f"lblepski {c['command']}: no bandwidth jump: {exc}", file=sys.stderr)
        return EXIT_NO_JUMP
    except (FloatingPointError, ArithmeticError) as exc:
        print(f"lblepski {c['command']}: numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
