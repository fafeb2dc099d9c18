"""The modular I_Φ(f) = ∫ Φ(x, |f(x)|) dx with three honest outcomes.

``finite`` carries a value and an error estimate, ``divergent`` carries a
certificate that :func:`check_certificate` re-validates from its own fields,
and ``inconclusive`` reports the partial integral and the budget spent.

Declared poles of Φ never go through numerical growth detection: when the
integrand is bounded below by t·c·|x - s|^(-q) with q >= 1 on a window touching
the pole, the engine emits an ``analytic_pole`` certificate directly.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from typing import Any

import numpy as np

from .families import MOFunction, PoleInfo, rational_pole
from .functions import PiecewiseFunction, Singularity
from .geometry import VOLUME_SLACK, Box, BoxSet
from .quadrature import integrate_1d, integrate_2d
from .rationals import least_index_rational

D_MAX = 1e6
DECELERATION = 0.9
SHAVE_STEPS = 40
WINDOW_HALVINGS = 60


@dataclass(frozen=True)
class Accuracy:
    abs_err: float = 1e-8
    budget: int = 1_000_000
    rel_err: float = 1e-12

    def __post_init__(self):
        if not self.abs_err > 0:
            raise ValueError("absolute error target must be positive")
        if self.budget <= 0:
            raise ValueError("evaluation budget must be positive")


@dataclass(frozen=True)
class DivergenceCertificate:
    kind: str  # analytic_pole | growth
    pole: PoleInfo | None = None
    window: tuple[float, float] | None = None
    f_lower: float | None = None
    t_lower: float | None = None
    radii: tuple[float, ...] = ()
    partials: tuple[float, ...] = ()
    threshold: float = D_MAX
    rigorous: bool = True

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "pole": self.pole.to_json() if self.pole else None,
            "window": list(self.window) if self.window else None,
            "f_lower": self.f_lower, "t_lower": self.t_lower,
            "radii": list(self.radii), "partials": list(self.partials),
            "threshold": self.threshold, "rigorous": self.rigorous,
        }

    @classmethod
    def from_json(cls, data: dict) -> DivergenceCertificate:
        if "kind" not in data:
            raise ValueError("certificate record needs field 'kind'")
        return cls(
            kind=data["kind"],
            pole=PoleInfo.from_json(data["pole"]) if data.get("pole") else None,
            window=tuple(data["window"]) if data.get("window") else None,
            f_lower=data.get("f_lower"), t_lower=data.get("t_lower"),
            radii=tuple(data.get("radii", ())), partials=tuple(data.get("partials", ())),
            threshold=data.get("threshold", D_MAX), rigorous=data.get("rigorous", True),
        )


@dataclass(frozen=True)
class ModularResult:
    verdict: str  # finite | divergent | inconclusive
    value: float = 0.0
    err: float = 0.0
    certificate: DivergenceCertificate | None = None
    evaluations: int = 0
    note: str = ""

    @property
    def is_finite(self) -> bool:
        return self.verdict == "finite"

    @property
    def is_divergent(self) -> bool:
        return self.verdict == "divergent"

    @property
    def is_inconclusive(self) -> bool:
        return self.verdict == "inconclusive"

    @property
    def partial(self) -> float:
        return self.value

    def lower_bound(self) -> float:
        """A value the true modular is known (or estimated) to exceed."""
        if self.is_divergent:
            return math.inf
        return self.value - (self.err if self.is_finite else 0.0)

    def to_json(self) -> dict:
        return {"verdict": self.verdict, "value": self.value, "err": self.err,
                "certificate": self.certificate.to_json() if self.certificate else None,
                "evaluations": self.evaluations, "note": self.note}


def _finite(value, err, evals=0, note=""):
    return ModularResult("finite", float(value), float(err), None, int(evals), note)


def _divergent(cert, evals=0, note=""):
    return ModularResult("divergent", math.inf, 0.0, cert, int(evals), note)


def _inconclusive(partial, evals, note=""):
    return ModularResult("inconclusive", float(partial), math.inf, None, int(evals), note)


# ---------------------------------------------------------------- certificates


def _window_on_side(pole: PoleInfo, window: tuple[float, float]) -> bool:
    a, b = window
    s = pole.location
    right = a <= s < b
    left = a < s <= b
    if pole.side == "right":
        return right
    if pole.side == "left":
        return left
    return right or left


def check_certificate(cert: Any) -> bool:
    """Re-validate a divergence certificate from its own fields."""
    if isinstance(cert, dict):
        cert = DivergenceCertificate.from_json(cert)
    if not isinstance(cert, DivergenceCertificate):
        raise ValueError(f"not a divergence certificate: {type(cert).__name__}")
    if cert.kind == "analytic_pole":
        if cert.pole is None or cert.window is None or cert.t_lower is None:
            raise ValueError("analytic_pole certificate needs pole, window and t_lower")
        if len(cert.window) != 2:
            raise ValueError("certificate window must be [a, b]")
        a, b = map(float, cert.window)
        if not a < b:
            return False
        p = cert.pole
        # ∫ |x - s|^(-q) over a window touching s diverges iff q >= 1
        return (p.order >= 1 and p.coefficient_positive and cert.t_lower > 0
                and _window_on_side(p, (a, b)))
    if cert.kind == "growth":
        r, part = cert.radii, cert.partials
        if len(r) != len(part):
            raise ValueError("growth certificate needs one partial integral per radius")
        if len(part) < 3:
            return False
        if any(not (r[i + 1] < r[i]) for i in range(len(r) - 1)) or r[-1] <= 0:
            return False
        inc = np.diff(np.asarray(part, dtype=float))
        if np.any(inc <= 0):
            return False
        return (cert.threshold >= D_MAX and part[-1] > cert.threshold
                and inc[-1] >= DECELERATION * inc[-2])
    raise ValueError(f"unknown certificate kind {cert.kind!r}")


# ---------------------------------------------------------------- helpers


class _Budget:
    def __init__(self, total: int, rel: float = 0.0):
        self.total = total
        self.rel = rel
        self.used = 0

    @property
    def left(self) -> int:
        return max(0, self.total - self.used)


def _containing_box(E: BoxSet, s: float, side: str) -> Box | None:
    for b in E.boxes:
        lo, hi = b.lo[0], b.hi[0]
        if side == "right" and lo <= s < hi:
            return b
        if side == "left" and lo < s <= hi:
            return b
    return None


def _side_window(f: PiecewiseFunction, E: BoxSet, s: float, side: str):
    """Window (s, s+ε) or (s-ε, s) inside E on which |f| has a positive lower bound."""
    box = _containing_box(E, s, side)
    if box is None:
        return None
    extent = (box.hi[0] - s) if side == "right" else (s - box.lo[0])
    eps = 0.5 * extent
    for _ in range(WINDOW_HALVINGS):
        win = (s, s + eps) if side == "right" else (s - eps, s)
        lb, rigorous = f.lower_bound_abs(Box.interval(*win))
        if lb > 0:
            return win, lb, rigorous
        eps *= 0.5
    return None


def pole_certificate(f: PiecewiseFunction, E: BoxSet, pole: PoleInfo, scale: float) -> DivergenceCertificate | None:
    """Analytic certificate for a declared pole, if |f| stays positive next to it."""
    if pole.order < 1 or scale <= 0:
        return None
    for side in pole.sides():
        found = _side_window(f, E, pole.location, side)
        if found is not None:
            win, lb, rigorous = found
            return DivergenceCertificate("analytic_pole", pole, win, lb, scale * lb, rigorous=rigorous)
    return None


def dense_certificate(f: PiecewiseFunction, E: BoxSet, interval: tuple[float, float],
                      scale: float) -> DivergenceCertificate | None:
    """Certificate from a rational pole inside a piece of E ∩ S where |f| > 0."""
    S = BoxSet.interval(interval[0], interval[1], closed=False)
    for box in E.intersect(S).boxes:
        a, b = box.lo[0], box.hi[0]
        xs = np.linspace(a, b, 259)[1:-1]
        vals = np.abs(f(xs))
        top = vals.max()
        if top <= 0:
            continue
        # prefer wide windows: weight by distance to the ends
        score = np.minimum(vals / top, 1.0) * np.minimum(xs - a, b - xs)
        for j in np.argsort(-score, kind="stable")[:8]:
            if vals[j] <= 0:
                break
            x0 = float(xs[j])
            half = 0.5 * min(x0 - a, b - x0)
            for _ in range(WINDOW_HALVINGS):
                lb, rigorous = f.lower_bound_abs(Box.interval(x0 - half, x0 + half))
                if lb > 0:
                    try:
                        q, n = least_index_rational(x0 - half, x0 + half)
                    except OverflowError:
                        break
                    pole = rational_pole(q, n)
                    win = (float(q), x0 + half)
                    if not win[0] < win[1]:
                        break
                    return DivergenceCertificate("analytic_pole", pole, win, lb, scale * lb,
                                                 rigorous=rigorous)
                half *= 0.5
    return None


def composition_order(phi: MOFunction, sing: Singularity, scale: float) -> float | None:
    """Pole order of Φ(x, scale·|f|) produced by a declared singularity of f."""
    if phi.orlicz_kind == "exp" and sing.kind == "log":
        return scale * sing.coef
    if phi.orlicz_kind == "power" and sing.kind == "power":
        return sing.alpha * phi.orlicz_exponent
    if phi.homogeneity is not None and phi.weight is None and sing.kind == "power":
        return sing.alpha * phi.homogeneity
    return None


def _composition_certificate(phi, f, E, sing: Singularity, scale: float, q: float):
    sides = ("right", "left") if sing.side == "both" else (sing.side,)
    for side in sides:
        box = _containing_box(E, sing.location, side)
        if box is None:
            continue
        extent = (box.hi[0] - sing.location) if side == "right" else (sing.location - box.lo[0])
        eps = min(0.5 * extent, 0.5)
        s = sing.location
        win = (s, s + eps) if side == "right" else (s - eps, s)
        pole = PoleInfo(s, q, 1.0, side, "composition")
        return DivergenceCertificate("analytic_pole", pole, win, None, scale, rigorous=True)
    return None


# ---------------------------------------------------------------- integration


def _integrand(phi: MOFunction, f: PiecewiseFunction, scale: float, budget: _Budget):
    def g(x):
        budget.used += len(x)
        with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
            return phi(x, scale * np.abs(f(x)))
    return g


def _aitken(a0, a1, a2):
    d1, d2 = a1 - a0, a2 - a1
    den = d2 - d1
    if den == 0 or not abs(d2) < abs(d1):
        return None
    return a2 - d2 * d2 / den


def _shave(g, a: float, b: float, end: str, tol: float, budget: _Budget, growth: bool) -> ModularResult:
    """Integrate [a, b] with a singular endpoint by shrinking annuli around it."""
    L = b - a
    eps0 = 0.5 * L
    if end == "left":
        base = integrate_1d(g, a + eps0, b, tol / 3, budget.left, rel=budget.rel)
    else:
        base = integrate_1d(g, a, b - eps0, tol / 3, budget.left, rel=budget.rel)
    if base.status == "budget":
        return _inconclusive(base.value, budget.used, "budget exhausted")
    partials = [base.value]
    radii = [eps0]
    quad_err = base.err
    incs: list[float] = []
    ext: list[float] = []
    for k in range(1, SHAVE_STEPS + 1):
        e_prev, e_k = radii[-1], eps0 * 2.0 ** -k
        if end == "left":
            q = integrate_1d(g, a + e_k, a + e_prev, tol * 2.0 ** -(k + 2), budget.left, n0=2, rel=budget.rel)
        else:
            q = integrate_1d(g, b - e_prev, b - e_k, tol * 2.0 ** -(k + 2), budget.left, n0=2, rel=budget.rel)
        if q.status == "budget":
            return _inconclusive(partials[-1], budget.used, "budget exhausted")
        if not math.isfinite(q.value):
            break
        quad_err += q.err
        incs.append(q.value)
        partials.append(partials[-1] + q.value)
        radii.append(e_k)
        if len(incs) >= 2 and incs[-1] == 0 and incs[-2] == 0:
            return _finite(partials[-1], quad_err, budget.used, "shaved, increments vanish")
        if len(partials) >= 3:
            e = _aitken(*partials[-3:])
            ext.append(e if e is not None else math.nan)
            if len(ext) >= 3 and all(math.isfinite(v) for v in ext[-3:]):
                if abs(ext[-1] - ext[-2]) <= tol and abs(ext[-2] - ext[-3]) <= tol:
                    return _finite(ext[-1], abs(ext[-1] - ext[-2]) + quad_err, budget.used,
                                   "shaved, extrapolated")
        if growth and partials[-1] > D_MAX and len(incs) >= 2 and incs[-1] >= DECELERATION * incs[-2]:
            if all(np.diff(partials) > 0):
                cert = DivergenceCertificate("growth", radii=tuple(radii), partials=tuple(partials),
                                             rigorous=False)
                return _divergent(cert, budget.used, "growth heuristic")
    return _inconclusive(partials[-1], budget.used, "shaved integrals did not settle")


def _split_points(lo: float, hi: float, pts) -> list[float]:
    inner = sorted({p for p in pts if lo < p < hi})
    return [lo] + inner + [hi]


def _one_sided(g, a: float, b: float):
    """g with samples pulled one ulp inside [a, b], so cell ends see one-sided limits."""
    lo, hi = np.nextafter(a, b), np.nextafter(b, a)

    def inner(x):
        return g(np.clip(x, lo, hi))
    return inner


def _integrate_1d_region(g_raw, boxes, special: dict, tol: float, budget: _Budget) -> ModularResult:
    """Sum over cells; ``special`` maps points to the sides needing shaving."""
    total_len = sum(b - a for a, b in boxes)
    values, errs = [], 0.0
    for a, b in boxes:
        cell_tol = tol * (b - a) / total_len
        g = _one_sided(g_raw, a, b)
        left = "right" in special.get(a, ())
        right = "left" in special.get(b, ())
        if left and right:
            m = 0.5 * (a + b)
            parts = [(a, m, "left"), (m, b, "right")]
        elif left:
            parts = [(a, b, "left")]
        elif right:
            parts = [(a, b, "right")]
        else:
            parts = [(a, b, None)]
        for pa, pb, end in parts:
            share = cell_tol * (pb - pa) / (b - a)
            if end is not None:
                r = _shave(g, pa, pb, end, share, budget, growth=False)
            else:
                q = integrate_1d(g, pa, pb, share, budget.left, rel=budget.rel)
                if q.status == "ok":
                    values.append(q.value)
                    errs += q.err
                    continue
                if q.status == "budget" and budget.left <= 0:
                    return _inconclusive(math.fsum(values) + q.value, budget.used, "budget exhausted")
                s = q.suspect if q.suspect is not None else 0.5 * (pa + pb)
                width = pb - pa
                if s - pa < 1e-9 * width:
                    r = _shave(g, pa, pb, "left", share, budget, growth=True)
                elif pb - s < 1e-9 * width:
                    r = _shave(g, pa, pb, "right", share, budget, growth=True)
                else:
                    r1 = _shave(g, pa, s, "right", share / 2, budget, growth=True)
                    if not r1.is_finite:
                        return r1 if r1.is_divergent else _inconclusive(
                            math.fsum(values) + r1.value, budget.used, r1.note)
                    r = _shave(g, s, pb, "left", share / 2, budget, growth=True)
                    if r.is_finite:
                        r = _finite(r.value + r1.value, r.err + r1.err, budget.used, r.note)
            if r.is_divergent:
                return r
            if r.is_inconclusive:
                return _inconclusive(math.fsum(values) + r.value, budget.used, r.note)
            values.append(r.value)
            errs += r.err
    return _finite(math.fsum(values), errs, budget.used)


def _cells_1d(E: BoxSet, breaks) -> list[tuple[float, float]]:
    cells = []
    for box in E.boxes:
        pts = _split_points(box.lo[0], box.hi[0], breaks)
        cells.extend((pts[i], pts[i + 1]) for i in range(len(pts) - 1))
    return cells


def modular(phi: MOFunction, f: PiecewiseFunction, region: BoxSet | None = None,
            acc: Accuracy | None = None, scale: float = 1.0) -> ModularResult:
    """I_Φ(scale·f) over ``region`` (default: the domain of Φ)."""
    acc = acc or Accuracy()
    if region is None:
        region = phi.domain
    if region.dim != phi.dim or f.dim != phi.dim:
        raise ValueError("function, region and Φ must share a dimension")
    outside = region.closure().difference(phi.domain).volume
    if outside > VOLUME_SLACK * max(1.0, region.volume):
        raise ValueError("region is not contained in the domain of Φ")
    scale = abs(float(scale))
    if scale == 0 or f.is_zero:
        return _finite(0.0, 0.0)
    E = region.intersect(f.support).closure()
    if E.is_empty:
        return _finite(0.0, 0.0)
    budget = _Budget(acc.budget, acc.rel_err)
    g = _integrand(phi, f, scale, budget)

    if phi.dim == 2:
        values, errs = [], 0.0
        total = E.volume
        bx = list(f.breaks(0)) + list(phi.breaks)
        by = list(f.breaks(1))
        for box in E.boxes:
            xs = _split_points(box.lo[0], box.hi[0], bx)
            ys = _split_points(box.lo[1], box.hi[1], by)
            for i in range(len(xs) - 1):
                for j in range(len(ys) - 1):
                    vol = (xs[i + 1] - xs[i]) * (ys[j + 1] - ys[j])
                    q = integrate_2d(g, (xs[i], ys[j]), (xs[i + 1], ys[j + 1]),
                                     acc.abs_err * vol / total, budget.left, rel=acc.rel_err)
                    if q.status != "ok":
                        return _inconclusive(math.fsum(values) + q.value, budget.used,
                                             f"2-d quadrature {q.status} near {q.suspect}")
                    values.append(q.value)
                    errs += q.err
        return _finite(math.fsum(values), errs, budget.used)

    special: dict[float, set[str]] = {}
    for pole in phi.poles:
        cert = pole_certificate(f, E, pole, scale)
        if cert is not None:
            return _divergent(cert, budget.used, "declared pole")
        for side in pole.sides():
            if _containing_box(E, pole.location, side) is not None:
                special.setdefault(pole.location, set()).add(side)
    for sing in f.singularities:
        q = composition_order(phi, sing, scale)
        if q is not None and q >= 1:
            cert = _composition_certificate(phi, f, E, sing, scale, q)
            if cert is not None:
                return _divergent(cert, budget.used, "composition pole")
        sides = ("right", "left") if sing.side == "both" else (sing.side,)
        for side in sides:
            if _containing_box(E, sing.location, side) is not None:
                special.setdefault(sing.location, set()).add(side)
    if phi.dense_singular_interval is not None:
        cert = dense_certificate(f, E, phi.dense_singular_interval, scale)
        if cert is not None:
            return _divergent(cert, budget.used, "dense singular interval")

    breaks = set(f.breaks(0)) | set(phi.breaks) | set(special)
    cells = _cells_1d(E, breaks)
    return _integrate_1d_region(g, cells, special, acc.abs_err, budget)


def modular_oracle(phi: MOFunction, f: PiecewiseFunction, region: BoxSet | None = None,
                   scale: float = 1.0) -> ModularResult:
    """Exact modular of a simple function from Φ's per-box closed forms.

    Uses the closed form of the (possibly truncated) evaluator; the dense
    singular interval of the untruncated weight is not consulted.
    """
    if phi.box_integral is None:
        raise ValueError(f"family {phi.family!r} has no closed-form antiderivative hint")
    if f.kind != "simple":
        raise ValueError("the oracle needs a simple function")
    if region is None:
        region = phi.domain
    scale = abs(float(scale))
    terms = []
    for v, box in f.pieces:
        for rb in region.boxes:
            inter = box.intersect(rb)
            if inter is None:
                continue
            val = phi.box_integral(inter, scale * abs(v))
            if math.isinf(val):
                E = BoxSet.of([inter], True)
                for pole in phi.poles:
                    cert = pole_certificate(f, E, pole, scale)
                    if cert is not None:
                        return _divergent(cert, 0, "closed form diverges")
                return _divergent(None, 0, "closed form diverges")
            terms.append(val)
    return _finite(math.fsum(terms), 0.0, 0, "closed form")


def replace_accuracy(acc: Accuracy, **kw) -> Accuracy:
    return dataclasses.replace(acc, **kw)
