"""Named, seeded experiments that write CSV tables plus a manifest.

Every randomised choice draws from ``numpy.random.default_rng(cfg.seed)``,
and CSV bodies never contain timings, so two runs of one config produce
identical CSV bytes.  The manifest echoes the config and is enough to re-run.
"""

from __future__ import annotations

import hashlib
import json
import math
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from .csvio import TRACE_SCHEMA, emit_csv
from .density import PreconditionError, approximate_indicator, measure_convergence_check, witness_nondensity
from .descriptors import Descriptor
from .families import MOFunction, check_double_phase_delta2, family_from_json, verify_delta2
from .functions import PiecewiseFunction
from .geometry import Box, BoxSet
from .luxemburg import norm_modular_convergence_check
from .modular import check_certificate
from .singular import estimate_singular_set

MANIFEST = "manifest.json"
LAMBDAS = (0.5, 1.0, 2.0, 10.0)


class ConvergenceFailure(RuntimeError):
    """A numeric stage finished without reaching its target."""


@dataclass
class ExperimentConfig:
    name: str
    family: dict | None = None
    window: dict | None = None
    compact: dict | None = None
    omega: dict | None = None
    params: dict = field(default_factory=dict)
    seed: int = 0
    output_dir: str = "out"

    def to_json(self) -> dict:
        return asdict(self)

    @classmethod
    def from_json(cls, data: dict) -> ExperimentConfig:
        """Parse a config, or the config block of a manifest."""
        if not isinstance(data, dict):
            raise ValueError("experiment config must be a JSON object")
        if "name" not in data and isinstance(data.get("config"), dict):
            data = data["config"]
        if "name" not in data:
            raise ValueError("experiment config is missing field 'name'")
        unknown = set(data) - {f for f in cls.__dataclass_fields__}
        if unknown:
            raise ValueError(f"experiment config has unknown field {sorted(unknown)[0]!r}")
        cfg = cls(**data)
        if not isinstance(cfg.seed, int):
            raise ValueError("experiment config field 'seed' must be an integer")
        return cfg


def _interval(a, b, closed):
    return BoxSet.interval(a, b, closed).to_json()


def default_config(name: str, seed: int = 0, output_dir: str = "out") -> ExperimentConfig:
    """The built-in configuration of a named experiment."""
    if name == "phi1-density":
        return ExperimentConfig(name, {"family": "phi1"}, _interval(-2, 2, False), _interval(1, 2, True),
                                _interval(-10, 10, False),
                                {"tol": 0.05, "n_max": 32, "res": 0.01, "norm_tol": 1e-7, "eps": 1e-3,
                                 "stop_on_converge": False},
                                seed, output_dir)
    if name == "varexp-density":
        fam = {"family": "variable_exponent", "p": {"kind": "sin", "c": 2, "a": 1, "w": 1},
               "domain": _interval(0, math.pi, False)}
        return ExperimentConfig(name, fam, _interval(0, math.pi, False), _interval(1, 2, True),
                                _interval(0, math.pi, False),
                                {"tol": 0.05, "n_max": 32, "res": 0.01, "norm_tol": 1e-7, "eps": 1e-3,
                                 "stop_on_converge": True},
                                seed, output_dir)
    if name == "phi2-nondensity":
        return ExperimentConfig(name, {"family": "phi2", "N": 8}, None, _interval(0.25, 0.5, True), None,
                                {"bumps": 50, "sub_threshold": 10, "heights": [0.3, 1.5],
                                 "widths": [0.02, 0.5], "scan_res": 1e-3},
                                seed, output_dir)
    if name == "doublephase-delta2":
        return ExperimentConfig(name, None, None, None, None, {"nx": 401, "nt": 61}, seed, output_dir)
    if name == "singular-dichotomy":
        return ExperimentConfig(name, None, _interval(-2, 2, False), None, None,
                                {"families": [{"family": "phi1"}, {"family": "phi2", "N": 8}], "res": 0.01},
                                seed, output_dir)
    raise ValueError(f"unknown experiment {name!r} in field 'name'")


# ---------------------------------------------------------------- stages


def singular_rows(est) -> list[dict]:
    flags = {fl.cell: fl for fl in est.flagged}
    rows = []
    for cell in est.cells:
        fl = flags.get(cell)
        rows.append({"x": cell.center[0] if cell.dim == 1 else json.dumps(list(cell.center)),
                     "flagged": fl is not None, "evidence_kind": fl.evidence if fl else ""})
    return rows


def _density(cfg: ExperimentConfig, out: Path) -> dict:
    p = cfg.params
    phi = family_from_json(cfg.family)
    k = BoxSet.from_json(cfg.compact)
    omega = BoxSet.from_json(cfg.omega)
    window = BoxSet.from_json(cfg.window)
    sing = estimate_singular_set(phi, window, float(p.get("res", 0.01)), seed=cfg.seed)
    trace = approximate_indicator(phi, k, omega, sing, n_max=int(p.get("n_max", 32)), tol=float(p.get("tol", 0.05)),
                                  norm_tol=float(p.get("norm_tol", 1e-7)), seed=cfg.seed,
                                  stop_on_converge=bool(p.get("stop_on_converge", False)))
    emit_csv(trace.rows(), TRACE_SCHEMA, out / "trace.csv")
    seq = [s.f_n for s in trace.steps]
    conv = norm_modular_convergence_check(phi, trace.target, seq, LAMBDAS, norms=trace.dists)
    meas = measure_convergence_check(seq, trace.target, omega, float(p.get("eps", 1e-3)))
    cols = ("n", "dist_n") + tuple(f"modular_{lam:g}" for lam in LAMBDAS) + ("measure",)
    rows = [{"n": r.n, "dist_n": r.norm, **{f"modular_{lam:g}": r.modulars[lam] for lam in LAMBDAS},
             "measure": v} for r, v in zip(conv.rows, meas.volumes)]
    emit_csv(rows, cols, out / "convergence.csv")
    summary = {"converged": trace.converged, "converged_at": trace.converged_at, "final_dist": trace.final_dist,
               "steps": len(trace.steps), "containment_ok": all(s.containment_ok for s in trace.steps),
               "convergence_violations": conv.violations, "note": trace.note}
    if not trace.converged:
        raise ConvergenceFailure(f"trace did not reach tol {trace.tol}: {trace.note or 'n_max exhausted'}", summary)
    return summary


def bump_candidates(rng: np.random.Generator, bumps: int, sub_threshold: int, heights, widths):
    """Smooth bump candidates whose plateaus sweep (0, 1), plus low ones and f = 0."""
    out = []
    for i in range(bumps):
        c = (i + 0.5) / bumps
        w = float(rng.uniform(*widths))
        h = float(rng.uniform(*heights))
        out.append(("bump", c, w, h))
    for _ in range(sub_threshold):
        c = float(rng.uniform(0.05, 0.95))
        w = float(rng.uniform(*widths))
        h = float(rng.uniform(0.05, 0.24))
        out.append(("sub_threshold", c, w, h))
    out.append(("zero", 0.5, 0.0, 0.0))
    return out


def candidate_function(c: float, w: float, h: float) -> PiecewiseFunction:
    if h == 0:
        return PiecewiseFunction.zero(1)
    inner = Box.interval(c - 0.5 * w, c + 0.5 * w)
    return PiecewiseFunction.bump(inner, inner.inflate(0.1 * w), h)


def _nondensity(cfg: ExperimentConfig, out: Path) -> dict:
    p = cfg.params
    phi = family_from_json(cfg.family)
    target = BoxSet.from_json(cfg.compact)
    rng = np.random.default_rng(cfg.seed)
    cands = bump_candidates(rng, int(p.get("bumps", 50)), int(p.get("sub_threshold", 10)),
                            p.get("heights", (0.3, 1.5)), p.get("widths", (0.02, 0.5)))
    rows = []
    counts = {"excluded": 0, "distance_bound": 0, "none_found": 0}
    for i, (kind, c, w, h) in enumerate(cands):
        f = candidate_function(c, w, h)
        wit = witness_nondensity(phi, f, target, scan_res=float(p.get("scan_res", 1e-3)))
        counts[wit.kind] += 1
        rows.append({
            "candidate": i, "kind": kind, "center": c, "width": w, "height": h, "verdict": wit.kind,
            "ball_lo": wit.ball.lo[0] if wit.ball else "", "ball_hi": wit.ball.hi[0] if wit.ball else "",
            "pole": wit.pole.location if wit.pole else "",
            "pole_index": str(wit.pole.term_index) if wit.pole else "",
            "certificate_valid": check_certificate(wit.certificate) if wit.certificate else "",
            "norm_lower_bound": wit.norm_lower_bound if wit.norm_lower_bound is not None else "",
        })
    schema = ("candidate", "kind", "center", "width", "height", "verdict", "ball_lo", "ball_hi", "pole",
              "pole_index", "certificate_valid", "norm_lower_bound")
    emit_csv(rows, schema, out / "witness.csv")
    return {"candidates": len(cands), **counts}


def delta2_cases() -> list[tuple[str, MOFunction | None, object]]:
    from .families import make_double_phase, make_phi1, make_phi2, make_variable_exponent
    unit = BoxSet.interval(0, 1, False)
    dom = BoxSet.interval(0, math.pi, False)
    p = Descriptor.sin(2, 1, 1)
    cases = [("phi1", make_phi1(), None), ("phi2", make_phi2(8), None),
             ("variable_exponent", make_variable_exponent(p, dom), None)]
    dp = make_double_phase(Descriptor.const(2), Descriptor.sin(3, 1, 1), Descriptor.sin(1, 0.5, 2), dom)
    cases.append(("double_phase_i", dp, None))
    # r is unbounded where a > 0, so neither clause applies
    bad = check_double_phase_delta2(Descriptor.const(2), Descriptor.reciprocal(3, 1, 0), Descriptor.const(1), unit)
    cases.append(("double_phase_unbounded", None, bad))
    return cases


def _delta2(cfg: ExperimentConfig, out: Path) -> dict:
    from .families import delta2_grid
    rows = []
    nx, nt = int(cfg.params.get("nx", 401)), int(cfg.params.get("nt", 61))
    for name, phi, verdict in delta2_cases():
        if phi is None:
            rows.append({"family": name, "clause": verdict.clause, "C": "", "passed": False, "samples": 0,
                         "worst_excess": "", "rejected": True})
            continue
        cert = phi.delta2
        rep = verify_delta2(phi, cert, grid=delta2_grid(phi, nx, nt))
        rows.append({"family": name, "clause": cert.clause or "", "C": cert.C, "passed": rep.passed,
                     "samples": rep.samples, "worst_excess": rep.worst_excess, "rejected": False})
    emit_csv(rows, ("family", "clause", "C", "passed", "samples", "worst_excess", "rejected"), out / "delta2.csv")
    return {"passed": sum(1 for r in rows if r["passed"]), "rejected": sum(1 for r in rows if r["rejected"])}


def _dichotomy(cfg: ExperimentConfig, out: Path) -> dict:
    window = BoxSet.from_json(cfg.window)
    res = float(cfg.params.get("res", 0.01))
    rows, summary = [], {}
    for desc in cfg.params.get("families", []):
        phi = family_from_json(desc)
        est = estimate_singular_set(phi, window, res, seed=cfg.seed)
        label = str(desc["family"])
        emit_csv(singular_rows(est), ("x", "flagged", "evidence_kind"), out / f"singular_{label}.csv")
        valid = all(check_certificate(fl.certificate) for fl in est.flagged)
        rows.append({"family": label, "flagged": len(est.flagged), "measure_upper": est.measure_upper,
                     "verdict": est.measure_verdict, "certificates_valid": valid})
        summary[label] = {"measure_upper": est.measure_upper, "verdict": est.measure_verdict}
    emit_csv(rows, ("family", "flagged", "measure_upper", "verdict", "certificates_valid"), out / "summary.csv")
    return summary


RUNNERS: dict[str, Callable[[ExperimentConfig, Path], dict]] = {
    "phi1-density": _density,
    "varexp-density": _density,
    "phi2-nondensity": _nondensity,
    "doublephase-delta2": _delta2,
    "singular-dichotomy": _dichotomy,
}


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def run_experiment(cfg: ExperimentConfig) -> dict:
    """Run one experiment, write its CSVs and manifest, and return the summary.

    Raises PreconditionError, ConvergenceFailure or OSError on stage failure;
    the manifest is written in every case that reaches the output directory.
    """
    from . import __version__
    runner = RUNNERS.get(cfg.name)
    if runner is None:
        raise ValueError(f"unknown experiment {cfg.name!r} in field 'name'")
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    start = time.perf_counter()
    status, summary, error = "ok", {}, None
    try:
        summary = runner(cfg, out)
    except ConvergenceFailure as exc:
        status, error = "not_converged", str(exc.args[0])
        summary = exc.args[1] if len(exc.args) > 1 else {}
        raise
    except PreconditionError as exc:
        status, error = "precondition", str(exc)
        raise
    finally:
        outputs = {p.name: _sha256(p) for p in sorted(out.glob("*.csv"))}
        manifest = {"config": cfg.to_json(), "version": __version__, "status": status, "error": error,
                    "wall_time_s": round(time.perf_counter() - start, 3), "outputs": outputs,
                    "summary": summary}
        (out / MANIFEST).write_text(json.dumps(manifest, indent=2, sort_keys=True, default=str) + "\n",
                                    encoding="utf-8")
    return summary


def config_from_manifest(path: str | Path) -> ExperimentConfig:
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    if "config" not in data:
        raise ValueError("manifest is missing field 'config'")
    return ExperimentConfig.from_json(data["config"])
