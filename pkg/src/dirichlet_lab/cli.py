"""Command-line front end.

Every invocation prints exactly one JSON run report (to stdout or --report).
Parameters come from defaults, then the --job file, then flags; later
sources win. Exit status: 0 on success, 1 on ComputeError, 2 on ParseError.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import math
import os
import sys
import time
import warnings

import jsonschema
import numpy as np

from . import __version__
from .errors import ComputeError, ParseError

COMMANDS = ("eval", "moments", "density", "scan", "random", "primes")
METHODS = ("direct", "smoothed", "afe", "em")

PRESETS = {
    "alternating-prime-zeta": {"frequency": {"kind": "primes", "poly": [0, 1]}, "coefficients": {"kind": "alternating"}},
    "prime-zeta": {"frequency": {"kind": "primes", "poly": [0, 1]}, "coefficients": {"kind": "poly-log", "params": {"Q": [1], "kappa": 0}}},
    "zeta-minus-one": {"frequency": {"kind": "integers", "poly": [0, 1]}, "coefficients": {"kind": "poly-log", "params": {"Q": [1], "kappa": 0}}},
}

_NUM = {"type": "number"}
_INT = {"type": "integer", "minimum": 1}
_PAIR = {"type": "array", "items": _NUM, "minItems": 2, "maxItems": 2}
_NUMS = {"anyOf": [_NUM, {"type": "array", "items": _NUM, "minItems": 1}]}

PARAM_SCHEMAS = {
    "eval": {
        "s": {"type": "array", "items": _PAIR, "minItems": 1},
        "method": {"enum": list(METHODS)},
        "N": _INT,
        "X": _NUM,
        "x": _NUM,
    },
    "moments": {"sigma": _NUM, "T": _NUMS, "method": {"enum": list(METHODS)}, "X": _NUM, "N": _INT, "x": _NUM},
    "density": {"alpha": _NUM, "beta": _NUM, "xmin": _NUM, "xmax": _NUM, "xstep": _NUM, "tolerance": _NUM},
    "scan": {
        "target": {"type": "object", "required": ["kind"], "properties": {"kind": {"type": "string"}, "params": {"type": "object"}}},
        "tau0": _NUM,
        "K": {
            "type": "object",
            "additionalProperties": False,
            "required": ["sigma", "t", "h"],
            "properties": {"sigma": _PAIR, "t": _PAIR, "h": _NUM},
        },
        "epsilon": _NUM,
        "T": _NUM,
        "dtau": _NUM,
        "X": _NUM,
        "method": {"enum": list(METHODS)},
        "windows": _INT,
    },
    "random": {
        "model": {"enum": ["steinhaus", "rademacher", "deterministic"]},
        "mode": {"enum": ["euler", "order", "identity"]},
        "N": _INT,
        "s": _PAIR,
        "sigma": _NUM,
        "t_min": _NUM,
        "t_max": _NUM,
        "t_points": _INT,
    },
    "primes": {"limit": {"type": "integer", "minimum": 0}},
}

JOB_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["command"],
    "properties": {
        "command": {"enum": list(COMMANDS)},
        "spec": {"anyOf": [{"type": "string"}, {"type": "object"}]},
        "params": {"type": "object"},
        "output": {"type": "string"},
        "seed": {"type": "integer", "minimum": 0},
        "threads": _INT,
    },
}

DEFAULTS = {
    "eval": {"s": [[2.0, 0.0]], "method": "direct"},
    "moments": {"sigma": 0.85, "T": [100.0, 300.0, 1000.0], "method": "smoothed"},
    "density": {"alpha": 1.0, "beta": 0.2, "xmin": 8.0, "xmax": 14.0, "xstep": 0.25, "tolerance": 0.0},
    "scan": {
        "tau0": 37.0,
        "K": {"sigma": [0.75, 0.9], "t": [0.0, 0.5], "h": 0.05},
        "epsilon": 0.05,
        "T": 50.0,
        "dtau": 0.0625,
        "X": 5000.0,
        "method": "smoothed",
        "windows": 10,
    },
    "random": {"model": "steinhaus", "mode": "identity", "N": 10_000, "s": [0.75, 5.0], "sigma": 0.75, "t_min": 10.0, "t_max": 1000.0, "t_points": 8},
    "primes": {"limit": 100},
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ParseError(f"command line: {message}")


def _pair(text: str) -> list:
    try:
        parts = [float(v) for v in text.split(",")]
    except ValueError as exc:
        raise ParseError(f"command line: bad complex value {text!r}") from exc
    if len(parts) == 1:
        parts.append(0.0)
    if len(parts) != 2:
        raise ParseError(f"command line: bad complex value {text!r}")
    return parts


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="dirichlet-lab", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command")

    def common(sp):
        sp.add_argument("--job", help="JSON job file; flags override its values")
        sp.add_argument("--spec", help="series spec: JSON file or preset name")
        sp.add_argument("--output", help="CSV output path")
        sp.add_argument("--report", help="write the run report here instead of stdout")
        sp.add_argument("--threads", type=int, help="worker cap")
        sp.add_argument("--seed", type=int)
        return sp

    common(sub.add_parser("run", help="run a job file (command taken from the file)"))
    sp = common(sub.add_parser("eval", help="evaluate D(s)"))
    sp.add_argument("--s", action="append", type=_pair, help="RE,IM (repeatable)")
    sp.add_argument("--method", choices=METHODS)
    sp.add_argument("--N", type=int)
    sp.add_argument("--X", type=float)
    sp.add_argument("--x", type=float)
    sp = common(sub.add_parser("moments", help="second moments on a vertical line"))
    sp.add_argument("--sigma", type=float)
    sp.add_argument("--T", type=float, action="append")
    sp.add_argument("--method", choices=METHODS)
    sp.add_argument("--X", type=float)
    sp = common(sub.add_parser("density", help="interval-sum density check"))
    for name in ("alpha", "beta", "xmin", "xmax", "xstep", "tolerance"):
        sp.add_argument(f"--{name}", type=float)
    sp = common(sub.add_parser("scan", help="universality tau scan"))
    for name in ("tau0", "epsilon", "T", "dtau", "X"):
        sp.add_argument(f"--{name}", type=float)
    sp = common(sub.add_parser("random", help="randomized Euler product / prime zeta"))
    sp.add_argument("--model", choices=("steinhaus", "rademacher", "deterministic"))
    sp.add_argument("--command", dest="mode", choices=("euler", "order", "identity"))
    sp.add_argument("--N", type=int)
    sp.add_argument("--s", type=_pair)
    sp.add_argument("--sigma", type=float)
    sp.add_argument("--t-max", dest="t_max", type=float)
    sp = common(sub.add_parser("primes", help="list primes"))
    sp.add_argument("--limit", type=int)
    return p


_NOT_PARAMS = {"command", "job", "spec", "output", "report", "threads", "seed"}


def _load_job(path: str) -> dict:
    try:
        with open(path) as fh:
            job = json.load(fh)
    except OSError as exc:
        raise ParseError(f"{path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc
    validate_job(job, where=path)
    return job


def _schema_error(exc: jsonschema.ValidationError, where: str) -> ParseError:
    loc = "/".join(str(v) for v in exc.absolute_path) or "<root>"
    return ParseError(f"{where}: at {loc}: {exc.message}")


def validate_job(job, where: str = "job") -> None:
    try:
        jsonschema.validate(job, JOB_SCHEMA)
        schema = {"type": "object", "additionalProperties": False, "properties": PARAM_SCHEMAS[job["command"]]}
        jsonschema.validate(job.get("params", {}), schema)
    except jsonschema.ValidationError as exc:
        raise _schema_error(exc, where) from exc


def merge_job(args: argparse.Namespace) -> dict:
    """defaults < job file < flags."""
    job = _load_job(args.job) if args.job else {}
    cmd = args.command if args.command != "run" else job.get("command")
    if cmd is None:
        raise ParseError("no command given")
    if job.get("command", cmd) != cmd:
        raise ParseError(f"job file command {job['command']!r} conflicts with {cmd!r}")
    params = dict(DEFAULTS[cmd])
    params.update(job.get("params", {}))
    for k, v in vars(args).items():
        if k not in _NOT_PARAMS and v is not None:
            params[k] = v
    merged = {"command": cmd, "params": params}
    for key in ("spec", "output", "seed", "threads"):
        v = getattr(args, key, None)
        if v is None:
            v = job.get(key)
        if v is not None:
            merged[key] = v
    validate_job(merged, where="merged job")
    return merged


def resolve_spec(desc):
    from .series import DirichletSeriesSpec, load_spec

    if desc is None:
        desc = "alternating-prime-zeta"
    if isinstance(desc, dict):
        return DirichletSeriesSpec.from_dict(desc)
    if desc in PRESETS:
        return DirichletSeriesSpec.from_dict(PRESETS[desc])
    if os.path.exists(desc):
        return load_spec(desc)
    raise ParseError(f"spec {desc!r} is neither a file nor a preset ({', '.join(PRESETS)})")


# ----------------------------------------------------------------------------
# commands: each returns (payload, csv_header, csv_rows)
# ----------------------------------------------------------------------------


def _cmd_eval(job, threads):
    from .series import CSV_HEADER, abscissas, evaluate_many

    spec = resolve_spec(job.get("spec"))
    p = job["params"]
    s_values = [complex(*v) for v in p["s"]]
    kw = {k: p[k] for k in ("N", "X", "x") if k in p}
    res = evaluate_many(spec, s_values, p["method"], threads=threads, **kw)
    rows = [r.csv_row() for r in res]
    payload = {
        "spec": spec.to_dict(),
        "spec_digest": spec.digest(),
        "abscissas": abscissas(spec).to_dict(),
        "results": [dict(zip(CSV_HEADER, row)) for row in rows],
    }
    return payload, CSV_HEADER, rows


def _cmd_moments(job, threads):
    from .estimates import moment_boundedness, moment_quadrature

    spec = resolve_spec(job.get("spec"))
    p = job["params"]
    Ts = p["T"] if isinstance(p["T"], list) else [p["T"]]
    kw = {k: p[k] for k in ("X", "N", "x") if k in p}
    reps = [moment_quadrature(spec, p["sigma"], float(T), p["method"], threads=threads, **kw) for T in Ts]
    header = ["sigma", "T", "value", "mv_main", "mv_error", "nodes", "refinement_change"]
    rows = [[r.sigma, r.T, r.quadrature_value, r.mv_main, r.mv_error, r.node_count, r.refinement_change] for r in reps]
    payload = {"spec_digest": spec.digest(), "reports": [r.to_dict() for r in reps]}
    if len(reps) > 1:
        payload["boundedness"] = moment_boundedness(reps)
    return payload, header, rows


def _cmd_density(job, threads):
    from .estimates import ddens_check

    spec = resolve_spec(job.get("spec"))
    p = job["params"]
    xs = np.arange(p["xmin"], p["xmax"] + 0.5 * p["xstep"], p["xstep"])
    rep = ddens_check(spec, p["alpha"], p["beta"], xs, p["tolerance"])
    rows = [[x, v, c] for x, v, c in zip(rep.x_grid, rep.interval_sums, rep.counts)]
    warn = [] if rep.passed else [f"fitted exponent {rep.fitted_exponent:.4g} below target {rep.target_exponent:.4g}"]
    return {"spec_digest": spec.digest(), "report": rep.to_dict(), "_warnings": warn}, ["x", "interval_sum", "count"], rows


def _cmd_scan(job, threads):
    from .universality import CompactGrid, Evaluator, TargetFunction, tau_scan

    spec = resolve_spec(job.get("spec"))
    p = job["params"]
    K = CompactGrid(p["K"]["sigma"][0], p["K"]["sigma"][1], p["K"]["t"][0], p["K"]["t"][1], p["K"]["h"])
    target = TargetFunction.from_dict(p["target"]) if "target" in p else TargetFunction("translate", {"tau0": p["tau0"]})
    ev = Evaluator(spec, p["method"], X=p["X"], threads=threads)
    rep = tau_scan(spec, target, K, p["epsilon"], p["T"], p["dtau"], ev, windows=p["windows"], threads=threads)
    rows = [[k * rep.dtau, v] for k, v in enumerate(rep.distances)]
    warn = ["no tau met epsilon: inconclusive"] if rep.inconclusive else []
    return {"spec_digest": spec.digest(), "target": target.to_dict(), "report": rep.to_dict(), "_warnings": warn}, ["tau", "sup_distance"], rows


def _cmd_random(job, threads):
    from . import randomized as rz

    p = job["params"]
    model = rz.RandomSignModel(p["model"], int(job.get("seed", 0)))
    inst = rz.RandomSeriesInstance.create(model, p["N"], threads=threads)
    payload = {"instance": inst.digest(), "mode": p["mode"]}
    s = complex(*p["s"])
    if p["mode"] == "identity":
        r = rz.identity_check(inst, s)
        payload.update(per_prime_max=r.per_prime_max, total_residual=r.total_residual)
        header = ["re_s", "im_s", "per_prime_max", "total_residual"]
        rows = [[s.real, s.imag, r.per_prime_max, r.total_residual]]
    elif p["mode"] == "euler":
        lz = rz.log_euler_product(inst, s)
        z = complex(np.exp(lz))
        payload.update(log_value=[lz.real, lz.imag], value=[z.real, z.imag])
        header = ["re_s", "im_s", "re_log", "im_log", "re_val", "im_val"]
        rows = [[s.real, s.imag, lz.real, lz.imag, z.real, z.imag]]
    else:
        grid = np.geomspace(p["t_min"], p["t_max"], p["t_points"])
        r = rz.order_fit(inst, p["sigma"], grid, threads=threads)
        payload.update(sigma=r.sigma, exponent=r.exponent, target=r.target, slack=r.slack, passed=r.passed)
        payload["_warnings"] = [r.note]
        header = ["t", "envelope", "residual"]
        rows = [list(v) for v in zip(r.t_grid, r.envelope, r.residuals)]
    return payload, header, rows


def _cmd_primes(job, threads):
    from .frequencies import cached_primes

    limit = int(job["params"]["limit"])
    table = cached_primes(max(limit, 2))
    pr = table.primes[table.primes <= limit]
    payload = {"limit": limit, "count": int(len(pr)), "largest": int(pr[-1]) if len(pr) else None}
    return payload, ["index", "prime"], [[i + 1, int(v)] for i, v in enumerate(pr)]


HANDLERS = {"eval": _cmd_eval, "moments": _cmd_moments, "density": _cmd_density, "scan": _cmd_scan, "random": _cmd_random, "primes": _cmd_primes}


# ----------------------------------------------------------------------------
# formatting
# ----------------------------------------------------------------------------


def fmt(v) -> str:
    """17 significant digits for floats; integers and strings verbatim."""
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    return str(v)


def write_csv(path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) for v in row])


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else str(v)
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    return obj


def job_digest(job: dict) -> str:
    return hashlib.sha256(json.dumps(_jsonable(job), sort_keys=True).encode()).hexdigest()


def payload_bytes(payload: dict) -> bytes:
    return json.dumps(_jsonable(payload), sort_keys=True).encode()


def run(job: dict, threads: int | None = None) -> dict:
    """Execute a merged job; returns the run report (never raises LabError)."""
    t0 = time.perf_counter()
    report = {"version": __version__, "job_digest": None, "warnings": []}
    try:
        validate_job(job)
        report["job_digest"] = job_digest(job)
        threads = int(threads or job.get("threads", 1))
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            payload, header, rows = HANDLERS[job["command"]](job, threads)
        report["warnings"] = [str(w.message) for w in caught] + payload.pop("_warnings", [])
        payload["rows"] = len(rows)
        if job.get("output"):
            write_csv(job["output"], header, rows)
            payload["output"] = job["output"]
        report["status"] = "ok"
        report["payload"] = _jsonable(payload)
        report["exit_code"] = 0
    except ParseError as exc:
        report.update(status="error", error={"type": type(exc).__name__, "message": str(exc)}, exit_code=2)
    except ComputeError as exc:
        report.update(status="error", error={"type": type(exc).__name__, "message": str(exc)}, exit_code=1)
    except (ValueError, KeyError, TypeError) as exc:
        # constructor-level validation of job contents
        report.update(status="error", error={"type": "ParseError", "message": f"{type(exc).__name__}: {exc}"}, exit_code=2)
    report["wall_time"] = time.perf_counter() - t0
    return report


def emit(report: dict, path: str | None) -> None:
    text = json.dumps(_jsonable(report), sort_keys=True, indent=2)
    if path:
        with open(path, "w") as fh:
            fh.write(text + "\n")
    else:
        sys.stdout.write(text + "\n")


def main(argv=None) -> int:
    t0 = time.perf_counter()
    report_path = None
    try:
        args = build_parser().parse_args(argv)
        if args.command is None:
            raise ParseError("command line: no command given")
        report_path = args.report
        job = merge_job(args)
    except ParseError as exc:
        report = {
            "version": __version__,
            "job_digest": None,
            "warnings": [],
            "status": "error",
            "error": {"type": "ParseError", "message": str(exc)},
            "exit_code": 2,
            "wall_time": time.perf_counter() - t0,
        }
        emit(report, report_path)
        return 2
    report = run(job, job.get("threads"))
    emit(report, report_path)
    return report["exit_code"]


if __name__ == "__main__":
    sys.exit(main())
