"""Luxemburg norm ‖f‖ = inf{λ > 0 : I_Φ(f/λ) <= 1} by bracketing and bisection.

λ ↦ I_Φ(f/λ) is nonincreasing, so the feasible set {λ : I_Φ(f/λ) <= 1} is a
half-line.  The solver brackets its endpoint geometrically from λ = 1 and
bisects; the reported value is the feasible end of the final bracket.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

from .families import MOFunction
from .functions import PiecewiseFunction, combine
from .geometry import BoxSet
from .modular import Accuracy, ModularResult, _finite, modular

LAMBDA_CAP_EXP = 60
DEFAULT_SCHEDULE = tuple(2.0 ** k for k in range(-10, 11))


class ModularCache:
    """Memoised I_Φ(s·f) keyed by the scale s."""

    def __init__(self, phi: MOFunction, f: PiecewiseFunction, region: BoxSet | None, acc: Accuracy):
        self.phi, self.f, self.region, self.acc = phi, f, region, acc
        self.store: dict[float, ModularResult] = {}

    def __call__(self, scale: float) -> ModularResult:
        res = self.store.get(scale)
        if res is None:
            res = modular(self.phi, self.f, self.region, self.acc, scale=scale)
            self.store[scale] = res
        return res


@dataclass
class NormResult:
    value: float
    bracket: tuple[float, float]
    modular_at_value: ModularResult | None
    membership: str
    status: str = "ok"  # ok | undetermined
    trace: list[tuple[float, float]] = field(default_factory=list)
    note: str = ""

    def to_json(self) -> dict:
        return {"value": self.value, "bracket": list(self.bracket), "membership": self.membership,
                "status": self.status, "note": self.note,
                "modular_at_value": self.modular_at_value.to_json() if self.modular_at_value else None}


def _classify(res: ModularResult) -> str:
    """feasible | infeasible | unknown for the test I(f/λ) <= 1."""
    if res.is_finite:
        return "feasible" if res.value <= 1.0 else "infeasible"
    if res.is_divergent:
        return "infeasible"
    return "infeasible" if res.value > 1.0 else "unknown"


def _check_monotone(trace: list[tuple[float, float]], rel: float = 1e-7):
    pts = sorted(trace)
    for (l1, v1), (l2, v2) in zip(pts, pts[1:]):
        if math.isfinite(v2) and v2 > v1 * (1 + rel) + rel:
            raise AssertionError(f"modular not monotone in λ: I(f/{l1})={v1} < I(f/{l2})={v2}")


def membership_probe(phi: MOFunction, f: PiecewiseFunction, schedule: Sequence[float] = DEFAULT_SCHEDULE,
                     cache: ModularCache | None = None, acc: Accuracy | None = None,
                     region: BoxSet | None = None) -> str:
    """Schedule-relative E/L membership from I_Φ(λf) at every λ in the schedule."""
    if f.is_zero:
        return "in_E"
    cache = cache or ModularCache(phi, f, region, acc or Accuracy())
    verdicts = [cache(float(lam)).verdict for lam in sorted(schedule)]
    if any(v == "inconclusive" for v in verdicts):
        return "undetermined"
    if all(v == "finite" for v in verdicts):
        return "in_E"
    if all(v == "divergent" for v in verdicts):
        return "not_in_L"
    first_div = verdicts.index("divergent")
    if all(v == "finite" for v in verdicts[:first_div]) and all(v == "divergent" for v in verdicts[first_div:]):
        return "in_L_only"
    return "undetermined"


def luxemburg_norm(phi: MOFunction, f: PiecewiseFunction, tol: float = 1e-6, acc: Accuracy | None = None,
                   region: BoxSet | None = None, probe: bool = True) -> NormResult:
    """Luxemburg norm to absolute bracket width ``tol``."""
    if not tol > 0:
        raise ValueError("tolerance must be positive")
    if not f.is_zero and not f.support.is_empty:
        hull = f.support.bounding_box()
        if not all(math.isfinite(v) for v in hull.lo + hull.hi):
            raise ValueError("function support must be bounded")
    if f.is_zero:
        return NormResult(0.0, (0.0, 0.0), _finite(0.0, 0.0), "in_E")
    acc = acc or Accuracy(abs_err=min(1e-8, tol * 1e-2))
    cache = ModularCache(phi, f, region, acc)
    trace: list[tuple[float, float]] = []

    def at(lam: float) -> tuple[str, ModularResult]:
        res = cache(1.0 / lam)
        trace.append((lam, res.value))
        return _classify(res), res

    def membership() -> str:
        if not probe:
            return "unchecked"
        if phi.homogeneity is not None:
            base = cache(1.0)
            if base.is_finite:
                return "in_E"
            if base.is_divergent:
                return "not_in_L"
        return membership_probe(phi, f, cache=cache)

    # homogeneous families: I(f/λ) = I(f)/λ^p, so the level crossing is explicit
    if phi.homogeneity is not None:
        base = cache(1.0)
        trace.append((1.0, base.value))
        if base.is_divergent:
            return NormResult(math.inf, (math.inf, math.inf), base, "not_in_L", trace=trace)
        if base.is_finite and base.value > 0:
            guess = base.value ** (1.0 / phi.homogeneity)
            lo, hi = guess - tol / 4, guess + tol / 4
            if lo > 0:
                c_lo, _ = at(lo)
                c_hi, r_hi = at(hi)
                if c_lo == "infeasible" and c_hi == "feasible":
                    _check_monotone(trace)
                    return NormResult(hi, (lo, hi), r_hi, membership(), trace=trace, note="scaling law")

    lam = 1.0
    c, res = at(lam)
    if c == "unknown":
        return NormResult(math.nan, (0.0, math.inf), res, "undetermined", "undetermined", trace,
                          note=res.note)
    if c == "feasible":
        hi, r_hi = lam, res
        lo = None
        for _ in range(LAMBDA_CAP_EXP):
            cand = hi / 2
            c, res = at(cand)
            if c == "unknown":
                return NormResult(math.nan, (0.0, hi), res, "undetermined", "undetermined", trace, res.note)
            if c == "infeasible":
                lo = cand
                break
            hi, r_hi = cand, res
        if lo is None:
            _check_monotone(trace)
            return NormResult(hi, (0.0, hi), r_hi, membership(), trace=trace, note="below 2^-60")
    else:
        lo = lam
        hi = None
        for _ in range(LAMBDA_CAP_EXP):
            cand = lo * 2
            c, res = at(cand)
            if c == "unknown":
                return NormResult(math.nan, (lo, math.inf), res, "undetermined", "undetermined", trace, res.note)
            if c == "feasible":
                hi, r_hi = cand, res
                break
            lo = cand
        if hi is None:
            _check_monotone(trace)
            return NormResult(math.inf, (lo, math.inf), res, membership(), trace=trace, note="above 2^60")
    while hi - lo > tol:
        mid = math.sqrt(lo * hi) if hi > 4 * lo else 0.5 * (lo + hi)
        if not lo < mid < hi:
            break
        c, res = at(mid)
        if c == "unknown":
            return NormResult(math.nan, (lo, hi), res, "undetermined", "undetermined", trace, res.note)
        if c == "feasible":
            hi, r_hi = mid, res
        else:
            lo = mid
    _check_monotone(trace)
    return NormResult(hi, (lo, hi), r_hi, membership(), trace=trace)


# ---------------------------------------------------------------- convergence report


@dataclass
class ConvergenceRow:
    n: int
    norm: float
    modulars: dict[float, float]


@dataclass
class ConvergenceReport:
    rows: list[ConvergenceRow]
    lambdas: tuple[float, ...]
    norm_vanishes: bool
    modular_vanishes: dict[float, bool]
    violations: list[str]

    @property
    def ok(self) -> bool:
        return not self.violations


def norm_modular_convergence_check(phi: MOFunction, f: PiecewiseFunction, seq: Sequence[PiecewiseFunction],
                                   lambdas: Sequence[float] = (0.5, 1.0, 2.0, 10.0), tol: float = 1e-7,
                                   vanish_tol: float = 1e-3, acc: Accuracy | None = None,
                                   region: BoxSet | None = None,
                                   norms: Sequence[float] | None = None) -> ConvergenceReport:
    """Pair ‖f - f_n‖ with I_Φ(λ(f - f_n)) and test their joint behaviour.

    A row is inconsistent when λ‖g‖ <= 1 but I(λg) > λ‖g‖ (convexity bound),
    or when I(λg) <= 1 but ‖g‖ > 1/λ.  The norm column vanishes when its last
    entry is at most ``vanish_tol``; the λ column vanishes when its last entry
    is at most ``vanish_tol·max(1, λ)``, the bound implied by a vanishing norm.
    Already computed norms can be passed in ``norms`` (one per element of seq).
    """
    if norms is not None and len(norms) != len(seq):
        raise ValueError("norms must match the sequence length")
    acc = acc or Accuracy(abs_err=1e-10)
    lambdas = tuple(float(l) for l in lambdas)
    rows: list[ConvergenceRow] = []
    violations: list[str] = []
    memo: dict[int, ConvergenceRow] = {}
    for n, fn in enumerate(seq, start=1):
        key = id(fn)
        if key in memo:
            prev = memo[key]
            rows.append(ConvergenceRow(n, prev.norm, dict(prev.modulars)))
            continue
        g = combine([(1.0, f), (-1.0, fn)])
        if norms is not None:
            norm = float(norms[n - 1])
        else:
            norm = luxemburg_norm(phi, g, tol=tol, acc=acc, region=region, probe=False).value
        mods = {}
        for lam in lambdas:
            r = modular(phi, g, region, acc, scale=lam)
            mods[lam] = r.value if not r.is_divergent else math.inf
            slack = 1e-6 + 10 * tol
            if math.isfinite(norm) and lam * norm <= 1 and mods[lam] > lam * norm * (1 + slack) + slack:
                violations.append(f"n={n}, λ={lam}: I(λg)={mods[lam]} exceeds λ‖g‖={lam * norm}")
            if mods[lam] <= 1 and norm > 1 / lam + tol:
                violations.append(f"n={n}, λ={lam}: I(λg)<=1 but ‖g‖={norm} > 1/λ")
        row = ConvergenceRow(n, norm, mods)
        memo[key] = row
        rows.append(row)
    if not rows:
        return ConvergenceReport([], lambdas, True, {l: True for l in lambdas}, [])
    norm_vanishes = rows[-1].norm <= vanish_tol
    mod_vanishes = {l: rows[-1].modulars[l] <= vanish_tol * max(1.0, l) for l in lambdas}
    if norm_vanishes and not all(mod_vanishes.values()):
        bad = [l for l, ok in mod_vanishes.items() if not ok]
        violations.append(f"norms vanish but modular columns {bad} do not")
    if all(mod_vanishes.values()) and rows[-1].norm > rows[0].norm + tol:
        violations.append("modular columns vanish but norms grow")
    return ConvergenceReport(rows, lambdas, norm_vanishes, mod_vanishes, violations)
