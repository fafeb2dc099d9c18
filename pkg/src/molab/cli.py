"""Command-line front end.

Exit codes: 0 success, 2 invalid input or failed precondition, 3 numeric
non-convergence, 4 I/O failure.  Failures print one JSON error record on
stderr; when the message names an input field, the record carries it.
"""

from __future__ import annotations

import argparse
import json
import os
import re
import sys
from pathlib import Path
from typing import Any

from . import __version__
from .csvio import TRACE_SCHEMA, emit_csv, render_csv
from .density import PreconditionError, approximate_indicator, witness_nondensity
from .experiments import RUNNERS, ConvergenceFailure, ExperimentConfig, default_config, run_experiment, singular_rows
from .families import family_from_json
from .functions import PiecewiseFunction
from .geometry import BoxSet
from .luxemburg import luxemburg_norm, membership_probe
from .modular import Accuracy, modular
from .singular import estimate_singular_set

EXIT_OK, EXIT_PRECONDITION, EXIT_NONCONVERGENCE, EXIT_IO = 0, 2, 3, 4
OUT_ENV = "MOLAB_OUT"


class InputError(ValueError):
    def __init__(self, message: str, field: str | None = None, path: str | None = None):
        super().__init__(message)
        self.field = field
        self.path = path


def _load_json(path: str, what: str) -> Any:
    text = Path(path).read_text(encoding="utf-8")
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{what} file is not valid JSON: {exc.msg} at line {exc.lineno}", field=None,
                         path=path) from None


def _wrap(loader, path: str, what: str):
    data = _load_json(path, what)
    try:
        return loader(data)
    except (ValueError, KeyError, TypeError) as exc:
        msg = str(exc.args[0]) if exc.args else type(exc).__name__
        raise InputError(f"{what} file: {msg}", field=_field_of(msg), path=path) from None


def _field_of(message: str) -> str | None:
    m = re.search(r"field '([^']+)'", message)
    return m.group(1) if m else None


def _accuracy(args) -> Accuracy:
    return Accuracy(abs_err=args.abs_err, budget=args.budget)


def _emit(payload: dict, out: str | None, name: str):
    text = json.dumps(payload, indent=2, sort_keys=True, default=str)
    print(text)
    if out:
        path = Path(out) / name
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text + "\n", encoding="utf-8")


def _out_dir(args) -> str | None:
    return args.out or os.environ.get(OUT_ENV)


# ---------------------------------------------------------------- subcommands


def cmd_norm(args) -> int:
    phi = _wrap(family_from_json, args.family, "family")
    f = _wrap(PiecewiseFunction.from_json, args.function, "function")
    res = luxemburg_norm(phi, f, tol=args.tol, acc=_accuracy(args))
    _emit({"value": res.value, "bracket": list(res.bracket), "membership": res.membership,
           "status": res.status}, _out_dir(args), "norm.json")
    return EXIT_NONCONVERGENCE if res.status != "ok" else EXIT_OK


def cmd_modular(args) -> int:
    phi = _wrap(family_from_json, args.family, "family")
    f = _wrap(PiecewiseFunction.from_json, args.function, "function")
    res = modular(phi, f, acc=_accuracy(args), scale=args.scale)
    _emit(res.to_json(), _out_dir(args), "modular.json")
    return EXIT_NONCONVERGENCE if res.is_inconclusive else EXIT_OK


def cmd_membership(args) -> int:
    phi = _wrap(family_from_json, args.family, "family")
    f = _wrap(PiecewiseFunction.from_json, args.function, "function")
    verdict = membership_probe(phi, f, acc=_accuracy(args))
    _emit({"membership": verdict}, _out_dir(args), "membership.json")
    return EXIT_NONCONVERGENCE if verdict == "undetermined" else EXIT_OK


def cmd_singular(args) -> int:
    phi = _wrap(family_from_json, args.family, "family")
    window = _wrap(BoxSet.from_json, args.window, "window")
    est = estimate_singular_set(phi, window, args.res, acc=_accuracy(args), seed=args.seed)
    rows = singular_rows(est)
    out = _out_dir(args)
    if out:
        emit_csv(rows, ("x", "flagged", "evidence_kind"), Path(out) / "singular.csv")
    else:
        sys.stdout.write(render_csv(rows, ("x", "flagged", "evidence_kind")))
    print(json.dumps({"measure_upper": est.measure_upper, "verdict": est.measure_verdict,
                      "flagged": len(est.flagged)}, sort_keys=True))
    return EXIT_NONCONVERGENCE if est.measure_verdict == "undetermined" else EXIT_OK


def cmd_approximate(args) -> int:
    phi = _wrap(family_from_json, args.family, "family")
    k = _wrap(BoxSet.from_json, args.compact, "compact")
    omega = _wrap(BoxSet.from_json, args.omega, "omega")
    if args.window:
        window = _wrap(BoxSet.from_json, args.window, "window")
    else:
        # singular points farther than 1 from k cannot enter the working set U
        window = k.inflate(1.0).intersect(omega)
    sing = estimate_singular_set(phi, window, args.res, seed=args.seed)
    trace = approximate_indicator(phi, k, omega, sing, n_max=args.nmax, tol=args.tol, seed=args.seed)
    rows = trace.rows()
    out = _out_dir(args)
    if out:
        emit_csv(rows, TRACE_SCHEMA, Path(out) / "trace.csv")
    else:
        sys.stdout.write(render_csv(rows, TRACE_SCHEMA))
    print(json.dumps({"converged": trace.converged, "converged_at": trace.converged_at,
                      "final_dist": trace.final_dist, "note": trace.note}, sort_keys=True))
    return EXIT_OK if trace.converged else EXIT_NONCONVERGENCE


def cmd_witness(args) -> int:
    phi = _wrap(family_from_json, args.family, "family")
    f = _wrap(PiecewiseFunction.from_json, args.candidate, "candidate")
    target = _wrap(BoxSet.from_json, args.target, "target")
    wit = witness_nondensity(phi, f, target)
    _emit(wit.to_json(), _out_dir(args), "witness.json")
    return EXIT_OK


def cmd_experiment(args) -> int:
    out = _out_dir(args)
    if args.config:
        cfg = _wrap(ExperimentConfig.from_json, args.config, "config")
        if out:
            cfg.output_dir = out
        if args.seed_given:
            cfg.seed = args.seed
    else:
        if args.name is None:
            raise InputError("experiment needs a name or --config", field="name")
        cfg = default_config(args.name, seed=args.seed, output_dir=out or str(Path("runs") / args.name))
    summary = run_experiment(cfg)
    print(json.dumps({"experiment": cfg.name, "output_dir": cfg.output_dir, "summary": summary},
                     sort_keys=True, default=str))
    return EXIT_OK


# ---------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--abs-err", type=float, default=1e-8, help="absolute error target of the modular")
    common.add_argument("--budget", type=int, default=1_000_000, help="integrand evaluation budget")
    common.add_argument("--seed", type=int, default=None, help="seed for every sampled choice")
    common.add_argument("--out", default=None, help=f"output directory (env {OUT_ENV} overrides the default)")

    parser = argparse.ArgumentParser(prog="molab", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"molab {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("norm", parents=[common], help="Luxemburg norm of a function")
    p.add_argument("--family", required=True)
    p.add_argument("--function", required=True)
    p.add_argument("--tol", type=float, default=1e-6)
    p.set_defaults(func=cmd_norm)

    p = sub.add_parser("modular", parents=[common], help="modular I(scale·f) with its verdict")
    p.add_argument("--family", required=True)
    p.add_argument("--function", required=True)
    p.add_argument("--scale", type=float, default=1.0)
    p.set_defaults(func=cmd_modular)

    p = sub.add_parser("membership", parents=[common], help="E/L membership over a λ schedule")
    p.add_argument("--family", required=True)
    p.add_argument("--function", required=True)
    p.set_defaults(func=cmd_membership)

    p = sub.add_parser("singular-set", parents=[common], help="grid estimate of the singular set")
    p.add_argument("--family", required=True)
    p.add_argument("--window", required=True)
    p.add_argument("--res", type=float, default=0.01)
    p.set_defaults(func=cmd_singular)

    p = sub.add_parser("approximate", parents=[common], help="smooth approximation of an indicator")
    p.add_argument("--family", required=True)
    p.add_argument("--compact", required=True)
    p.add_argument("--omega", required=True)
    p.add_argument("--window", default=None, help="window for the singular-set estimate")
    p.add_argument("--res", type=float, default=0.01)
    p.add_argument("--tol", type=float, default=0.05)
    p.add_argument("--nmax", type=int, default=32)
    p.set_defaults(func=cmd_approximate)

    p = sub.add_parser("witness", parents=[common], help="refute one candidate approximant")
    p.add_argument("--family", required=True)
    p.add_argument("--candidate", required=True)
    p.add_argument("--target", required=True)
    p.set_defaults(func=cmd_witness)

    p = sub.add_parser("experiment", parents=[common], help="run a named experiment")
    p.add_argument("name", nargs="?", choices=sorted(RUNNERS), default=None)
    p.add_argument("--config", default=None, help="experiment config (for example a manifest's config block)")
    p.set_defaults(func=cmd_experiment)
    return parser


def _error(kind: str, message: str, field: str | None = None, path: str | None = None) -> None:
    record = {"error": kind, "message": message}
    if field is not None:
        record["field"] = field
    if path is not None:
        record["file"] = path
    print(json.dumps(record, sort_keys=True), file=sys.stderr)


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    args.seed_given = args.seed is not None
    if args.seed is None:
        args.seed = 0
    try:
        return args.func(args)
    except InputError as exc:
        _error("invalid_input", str(exc), exc.field, exc.path)
        return EXIT_PRECONDITION
    except PreconditionError as exc:
        _error("precondition", str(exc), _field_of(str(exc)))
        return EXIT_PRECONDITION
    except ConvergenceFailure as exc:
        _error("not_converged", str(exc.args[0]))
        return EXIT_NONCONVERGENCE
    except OSError as exc:
        _error("io", f"{exc.strerror or exc}", path=getattr(exc, "filename", None))
        return EXIT_IO
    except ValueError as exc:
        _error("invalid_input", str(exc), _field_of(str(exc)))
        return EXIT_PRECONDITION


if __name__ == "__main__":
    sys.exit(main())
