"""Smooth approximation of indicators, and witnesses against density.

:func:`approximate_indicator` runs the constructive density argument step
by step: shrinking covers U_n of the singular points, compacts K_n = K \\ U_n,
open shells V_n = U \\ cl(U_{n+1}), nested covers W'_m of K_n cut down to
W_m = W'_m ∩ V_n, and smooth Urysohn functions f_{m,n} for (K_n, W_m).  Step n
keeps the least m with ‖f_{m,n} - χ_{K_n}‖ < 1/n.

:func:`witness_nondensity` refutes a single smooth candidate for a weight
whose poles are dense in an interval S: either |f| >= ¼ on a ball inside S,
which contains a rational pole and makes every I(λf) infinite, or |f| < ¼
on the target K, which keeps ‖χ_K - f‖ above ‖¾χ_K‖.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .families import MOFunction, PoleInfo, rational_pole
from .functions import Bump, PiecewiseFunction, combine
from .geometry import Box, BoxSet, nested_open_covers
from .luxemburg import NormResult, luxemburg_norm, membership_probe
from .modular import Accuracy, DivergenceCertificate, check_certificate, pole_certificate
from .rationals import least_index_rational
from .singular import SingularSetEstimate

M_CAP = 512
QUARTER = 0.25
THREE_QUARTERS = 0.75


class PreconditionError(ValueError):
    """Inputs violate a hypothesis of the construction."""


def smooth_urysohn(k: BoxSet, u: BoxSet) -> PiecewiseFunction:
    """Smooth f with f = 1 on k, 0 <= f <= 1 and support strictly inside u."""
    if k.is_empty:
        raise ValueError("compact set is empty")
    gap = k.closure().separation(u)
    if not gap > 0:
        raise ValueError("compact set is not inside the open set with a positive gap")
    margin = 0.75 * gap / math.sqrt(k.dim)
    bumps = [Bump(b, b.inflate(margin)) for b in k.boxes]
    return PiecewiseFunction.smooth_composite([(1.0, bumps)])


# ---------------------------------------------------------------- traces


@dataclass
class TraceStep:
    n: int
    K_n: BoxSet
    U_n: BoxSet
    V_n: BoxSet
    W_m: BoxSet
    m_n: int | None
    f_n: PiecewiseFunction
    dist_n: NormResult
    approx_norm: float
    chain_norm: float
    vol_shell: float
    containment: dict[str, bool] = field(default_factory=dict)

    @property
    def containment_ok(self) -> bool:
        return all(self.containment.values())


@dataclass
class ApproximationTrace:
    steps: list[TraceStep]
    target: PiecewiseFunction
    tol: float
    converged: bool
    converged_at: int | None
    U: BoxSet | None = None
    singular_points: tuple = ()
    note: str = ""
    parts: list = field(default_factory=list)

    @property
    def final_dist(self) -> float:
        return self.steps[-1].dist_n.value if self.steps else math.inf

    @property
    def dists(self) -> list[float]:
        return [s.dist_n.value for s in self.steps]

    def rows(self) -> list[dict]:
        return [{"n": s.n, "m_n": s.m_n if s.m_n is not None else -1, "dist_n": s.dist_n.value,
                 "vol_shell": s.vol_shell} for s in self.steps]


def _singular_points(sing: SingularSetEstimate, dim: int) -> list[np.ndarray]:
    pts = {}
    for fl in sing.flagged:
        if fl.certificate is not None and fl.certificate.pole is not None and dim == 1:
            p = (float(fl.certificate.pole.location),)
        else:
            p = tuple(float(c) for c in fl.cell.center)
        pts[p] = None
    for p in sing.points:
        pts[(float(p),)] = None
    return [np.array(p) for p in pts]


def _sample_in(s: BoxSet, n: int, rng) -> np.ndarray:
    pts = s.sample(n, rng)
    return pts[:, 0] if s.dim == 1 else pts


class _Pipeline:
    """Caches for covers, Urysohn functions, norms and containment checks."""

    def __init__(self, phi: MOFunction, k: BoxSet, norm_tol: float, samples: int, seed: int):
        self.phi, self.k = phi, k
        self.norm_tol = norm_tol
        self.samples = samples
        self.seed = seed
        self.chi_k = PiecewiseFunction.indicator(k)
        self.covers: dict[str, list[BoxSet]] = {}
        self.funcs: dict[tuple, PiecewiseFunction] = {}
        self.norms: dict[tuple, NormResult] = {}
        self.checks: dict[tuple, dict] = {}
        self.cuts: dict[tuple, BoxSet] = {}
        self.acc = Accuracy(abs_err=min(1e-9, norm_tol * 1e-2))

    def nested(self, K_n: BoxSet) -> list[BoxSet]:
        key = K_n.dumps()
        if key not in self.covers:
            self.covers[key] = nested_open_covers(K_n, M_CAP)
        return self.covers[key]

    def urysohn(self, K_n: BoxSet, W: BoxSet) -> PiecewiseFunction:
        key = (K_n.dumps(), W.dumps())
        if key not in self.funcs:
            self.funcs[key] = smooth_urysohn(K_n, W)
        return self.funcs[key]

    def cover(self, K_n: BoxSet, V_n: BoxSet, m: int) -> BoxSet:
        key = (K_n.dumps(), V_n.dumps(), m)
        if key not in self.cuts:
            self.cuts[key] = self.nested(K_n)[m - 1].intersect(V_n)
        return self.cuts[key]

    def norm(self, f: PiecewiseFunction, minus: BoxSet, K_n: BoxSet, W: BoxSet | None = None,
             tag: str = "") -> NormResult:
        """‖f - χ_minus‖ where f is fixed by (K_n, W)."""
        key = (tag, minus.dumps(), K_n.dumps(), W.dumps() if W is not None else "")
        if key not in self.norms:
            g = combine([(1.0, f), (-1.0, PiecewiseFunction.indicator(minus))]) if not minus.is_empty else f
            self.norms[key] = luxemburg_norm(self.phi, g, tol=self.norm_tol, acc=self.acc, probe=False)
        return self.norms[key]


def approximate_indicator(phi: MOFunction, k: BoxSet, omega: BoxSet, sing: SingularSetEstimate,
                          n_max: int = 32, tol: float = 0.05, norm_tol: float = 1e-7,
                          samples: int = 1000, seed: int = 0, stop_on_converge: bool = False,
                          check_membership: bool = True) -> ApproximationTrace:
    """Smooth compactly supported f_n → χ_k in the Luxemburg norm."""
    if k.is_empty:
        raise PreconditionError("compact set k is empty")
    k = k.closure()
    if omega.closed:
        raise PreconditionError("omega must be open")
    if not k.separation(omega) > 0:
        raise PreconditionError("k must lie inside omega at positive distance from its boundary")
    if sing.measure_verdict != "zero":
        raise PreconditionError(f"singular set verdict is {sing.measure_verdict!r}, need 'zero'")
    chi_k = PiecewiseFunction.indicator(k)
    if check_membership:
        member = membership_probe(phi, chi_k)
        if member != "in_E":
            raise PreconditionError(f"membership of χ_k is {member!r}, need 'in_E'")

    dim = k.dim
    points = _singular_points(sing, dim)
    sep_omega = k.separation(omega)
    sep_sing = min((k.distance(p) for p in points), default=math.inf)
    if sep_sing <= 0:
        raise PreconditionError("k contains a singular point")
    infl = min(1.0, 0.5 * sep_omega, 0.5 * sep_sing)
    U = k.inflate(infl).intersect(omega)
    U_closed = U.closure()
    inside = [p for p in points if U_closed.distance(p) == 0]

    def sing_cover(n: int) -> BoxSet:
        if not inside:
            return BoxSet.empty(dim, closed=False)
        h = 0.5 * (1.0 / (2 * n * len(inside))) ** (1.0 / dim)
        return BoxSet.of([Box.around(p, h) for p in inside], False, dim).intersect(U)

    pipe = _Pipeline(phi, k, norm_tol, samples, seed)
    steps: list[TraceStep] = []
    converged_at = None
    note = ""
    prev_key, prev_m = None, 1
    for n in range(1, n_max + 1):
        U_n, U_n1 = sing_cover(n), sing_cover(n + 1)
        K_n = k.difference(U_n) if not U_n.is_empty else k
        V_n = U.difference(U_n1.closure()) if not U_n1.is_empty else U
        if K_n.is_empty:
            f_n = PiecewiseFunction.zero(dim)
            W, m_n, approx = BoxSet.empty(dim, False), 0, 0.0
        else:
            m_n = None
            # 1/n decreases, so with K_n and V_n unchanged the least m cannot move down
            start = prev_m if (K_n.dumps(), V_n.dumps()) == prev_key else 1
            for m in range(start, M_CAP + 1):
                W = pipe.cover(K_n, V_n, m)
                f = pipe.urysohn(K_n, W)
                nr = pipe.norm(f, K_n, K_n, W)
                if nr.value < 1.0 / n:
                    m_n, f_n, approx = m, f, nr.value
                    break
            prev_key, prev_m = (K_n.dumps(), V_n.dumps()), m_n or 1
            if m_n is None:
                note = f"m search capped at {M_CAP} for n={n}"
                break
        dist = pipe.norm(f_n, k, K_n, W)
        if K_n == k or K_n.dumps() == k.dumps():
            chain = 0.0
        else:
            chain = pipe.norm(PiecewiseFunction.indicator(k.difference(K_n.interior()).closure()),
                              BoxSet.empty(dim), K_n, tag="chain").value
        vol_shell = W.difference(K_n).volume if not W.is_empty else 0.0
        checks = _containment(pipe, n, K_n, W, V_n, U, omega, f_n, U_n)
        checks["distance_chain"] = dist.value <= approx + chain + 3 * norm_tol
        steps.append(TraceStep(n, K_n, U_n, V_n, W, m_n, f_n, dist, approx, chain, vol_shell, checks))
        if converged_at is None and dist.value <= tol:
            converged_at = n
            if stop_on_converge:
                break
    converged = converged_at is not None and not note
    return ApproximationTrace(steps, chi_k, tol, converged, converged_at, U,
                              tuple(tuple(p) for p in points), note)


def _containment(pipe: _Pipeline, n, K_n, W, V_n, U, omega, f_n, U_n) -> dict[str, bool]:
    key = (K_n.dumps(), W.dumps(), V_n.dumps())
    cached = pipe.checks.get(key)
    if cached is not None:
        return dict(cached)
    out = {}
    if K_n.is_empty:
        out = {"K_n_in_W": True, "W_in_V": True, "support_in_W": True, "f_one_on_K_n": True,
               "f_zero_off_W": True, "f_in_unit_interval": True}
    else:
        rng = np.random.default_rng(pipe.seed + n)
        out["K_n_in_W"] = K_n.separation(W) > 0
        out["W_in_V"] = W.is_subset(V_n)
        out["support_in_W"] = f_n.support.separation(W) > 0
        pk = _sample_in(K_n, pipe.samples, rng)
        out["f_one_on_K_n"] = bool(np.all(np.abs(f_n(pk) - 1.0) <= 1e-12))
        hull = U.bounding_box().inflate(0.1)
        pts = _sample_in(BoxSet.of([hull], False), pipe.samples, rng)
        vals = f_n(pts)
        off = ~W.contains_points(pts)
        out["f_zero_off_W"] = bool(np.all(vals[off] == 0))
        out["f_in_unit_interval"] = bool(np.all((vals >= 0) & (vals <= 1)))
    out["V_in_U"] = V_n.is_subset(U)
    out["U_in_omega"] = U.is_subset(omega)
    out["K_n_misses_U_n"] = K_n.intersect(U_n).volume == 0 if not U_n.is_empty else True
    pipe.checks[key] = dict(out)
    return out


def approximate_in_E(phi: MOFunction, f: PiecewiseFunction, omega: BoxSet, sing: SingularSetEstimate,
                     tol: float, n_max: int = 64, norm_tol: float = 1e-7) -> ApproximationTrace:
    """Smooth approximation of a simple function of E^Φ, term by term."""
    if f.kind != "simple":
        raise PreconditionError("approximate_in_E needs a simple function")
    if f.is_zero:
        zero = PiecewiseFunction.zero(f.dim)
        nr = NormResult(0.0, (0.0, 0.0), None, "in_E")
        empty = BoxSet.empty(f.dim, False)
        step = TraceStep(1, BoxSet.empty(f.dim), empty, empty, empty, 0, zero, nr, 0.0, 0.0, 0.0, {})
        return ApproximationTrace([step], f, tol, True, 1)
    groups: dict[float, list[Box]] = {}
    for v, b in f.pieces:
        groups.setdefault(v, []).append(b)
    count = len(groups)
    parts = []
    for idx, (c, boxes) in enumerate(sorted(groups.items())):
        A = BoxSet.of(boxes, False, f.dim)
        member = membership_probe(phi, PiecewiseFunction.indicator(A))
        if member != "in_E":
            raise PreconditionError(f"component {idx} (value {c}) has membership {member!r}, need 'in_E'")
        share = tol / (2 * count * abs(c))
        # inner approximation by shrinking every box until the removed shell is small in norm
        eta = 0.25 * min(min(b.widths) for b in A.boxes)
        gap_needed = True
        for _ in range(60):
            K = BoxSet.of([Box(tuple(l + eta for l in b.lo), tuple(h - eta for h in b.hi)) for b in A.boxes],
                          True, f.dim)
            shell = A.closure().difference(K.interior())
            shell_norm = luxemburg_norm(phi, PiecewiseFunction.indicator(shell), tol=norm_tol, probe=False).value
            gap_needed = not (K.separation(omega) > 0)
            if shell_norm <= share and not gap_needed:
                break
            eta *= 0.5
        trace = approximate_indicator(phi, K, omega, sing, n_max=n_max, tol=share, norm_tol=norm_tol,
                                      stop_on_converge=True, check_membership=False)
        if not trace.converged:
            raise PreconditionError(f"component {idx} (value {c}) did not converge: {trace.note}")
        parts.append((c, trace))
    length = max(len(t.steps) for _, t in parts)
    steps = []
    converged_at = None
    for i in range(length):
        terms = [(c, t.steps[min(i, len(t.steps) - 1)].f_n) for c, t in parts]
        fn = combine(terms)
        g = combine([(1.0, f), (-1.0, fn)])
        dist = luxemburg_norm(phi, g, tol=norm_tol, probe=False)
        empty = BoxSet.empty(f.dim, False)
        steps.append(TraceStep(i + 1, BoxSet.empty(f.dim), empty, empty, empty, None, fn, dist, 0.0, 0.0, 0.0, {}))
        if converged_at is None and dist.value <= tol:
            converged_at = i + 1
    out = ApproximationTrace(steps, f, tol, converged_at is not None, converged_at)
    out.parts = parts
    return out


# ---------------------------------------------------------------- witnesses


@dataclass
class NondensityWitness:
    kind: str  # excluded | distance_bound | none_found
    ball: Box | None = None
    pole: PoleInfo | None = None
    certificate: DivergenceCertificate | None = None
    region: BoxSet | None = None
    gap: float | None = None
    norm_lower_bound: float | None = None
    strip: tuple[float, float] | None = None
    verified_min: float | None = None
    note: str = ""

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "ball": self.ball.to_json() if self.ball else None,
            "pole": self.pole.to_json() if self.pole else None,
            "certificate": self.certificate.to_json() if self.certificate else None,
            "region": self.region.to_json() if self.region else None,
            "gap": self.gap, "norm_lower_bound": self.norm_lower_bound,
            "strip": list(self.strip) if self.strip else None,
            "verified_min": self.verified_min, "note": self.note,
        }


def _verify_ball(f: PiecewiseFunction, ball: Box, samples: int) -> tuple[bool, float]:
    xs = np.linspace(ball.lo[0], ball.hi[0], samples)
    vals = np.abs(f(xs))
    lb, rigorous = f.lower_bound_abs(ball)
    m = float(vals.min())
    ok = m >= QUARTER - 1e-9 and (not rigorous or lb >= QUARTER - 1e-9)
    return ok, min(m, lb) if rigorous else m


def _runs(mask: np.ndarray) -> list[tuple[int, int]]:
    runs = []
    i, n = 0, mask.size
    while i < n:
        if mask[i]:
            j = i
            while j + 1 < n and mask[j + 1]:
                j += 1
            runs.append((i, j))
            i = j + 1
        else:
            i += 1
    return runs


def witness_nondensity(phi: MOFunction, f: PiecewiseFunction, target: BoxSet,
                       singular=None, scan_res: float = 1e-3, samples: int = 1000) -> NondensityWitness:
    """Refute one candidate f as an approximant of χ_target."""
    if f.dim != 1:
        raise ValueError("witnesses are implemented in one dimension")
    S = phi.dense_singular_interval
    if S is not None:
        lo, hi = S
        count = int(round((hi - lo) / scan_res))
        xs = np.linspace(lo, hi, count + 1)[1:-1]
        vals = np.abs(f(xs))
        runs = sorted(_runs(vals >= QUARTER), key=lambda r: (xs[r[1]] - xs[r[0]], -r[0]), reverse=True)
        for i, j in runs:
            a = xs[i] if i > 0 else 0.5 * (lo + xs[0])
            b = xs[j] if j < xs.size - 1 else 0.5 * (hi + xs[-1])
            if b - a <= 0:
                a, b = xs[i] - 0.25 * scan_res, xs[j] + 0.25 * scan_res
            c, half = 0.5 * (a + b), 0.5 * (b - a)
            for _ in range(30):
                ball = Box.interval(max(c - half, lo + 1e-15), min(c + half, hi - 1e-15))
                ok, vmin = _verify_ball(f, ball, samples)
                if ok:
                    q, n = least_index_rational(ball.lo[0], ball.hi[0])
                    pole = rational_pole(q, n)
                    cert = DivergenceCertificate("analytic_pole", pole, (float(q), ball.hi[0]), vmin, QUARTER)
                    if check_certificate(cert):
                        return NondensityWitness("excluded", ball=ball, pole=pole, certificate=cert,
                                                 verified_min=vmin,
                                                 note="Φ is linear in t, so I(λf) = ∞ for every λ > 0")
                half *= 0.5
    elif singular is not None:
        pts = singular.points if isinstance(singular, SingularSetEstimate) else tuple(singular)
        for p in pts:
            p = float(np.atleast_1d(p)[0])
            for r in (scan_res * 2.0 ** -j for j in range(20)):
                ball = Box.interval(p - r, p + r)
                ok, vmin = _verify_ball(f, ball, samples)
                if ok:
                    pole = next((pl for pl in phi.poles if pl.location == p), None)
                    E = BoxSet.of([ball], True)
                    cert = pole_certificate(f, E, pole, 1.0) if pole is not None else None
                    if cert is not None and check_certificate(cert):
                        return NondensityWitness("excluded", ball=ball, pole=pole, certificate=cert,
                                                 verified_min=vmin)
    k = target.closure()
    if k.volume > 0:
        kmax = max(f.max_abs(b) for b in k.boxes)
        kx = np.concatenate([np.linspace(b.lo[0], b.hi[0], samples) for b in k.boxes])
        kmax = max(kmax, float(np.abs(f(kx)).max()))
        if kmax < QUARTER:
            sub = PiecewiseFunction.indicator(k, THREE_QUARTERS)
            nr = luxemburg_norm(phi.truncated(), sub, tol=1e-6, probe=False)
            lower = nr.bracket[0] if math.isfinite(nr.value) else math.inf
            return NondensityWitness("distance_bound", region=k, gap=THREE_QUARTERS, norm_lower_bound=lower,
                                     note="|χ_K - f| >= ¾ on K; truncated weight under-estimates the norm")
    strip = (float(k.bounding_box().lo[0]), float(k.bounding_box().hi[0])) if not k.is_empty else None
    return NondensityWitness("none_found", strip=strip,
                             note="no ball with |f| >= ¼ in the singular set and |f| reaches ¼ on K")


# ---------------------------------------------------------------- measure convergence


@dataclass
class MeasureReport:
    volumes: list[float]
    eps: float
    cell_volume: float

    @property
    def vanishes(self) -> bool:
        return bool(self.volumes) and self.volumes[-1] <= self.cell_volume * 0.5 + min(self.volumes)


def measure_convergence_check(f_seq, f: PiecewiseFunction, region: BoxSet, eps: float,
                              cells: int = 20000) -> MeasureReport:
    """Grid estimate of |{x in region : |f(x) - f_n(x)| > eps}| for each n."""
    if not math.isfinite(region.volume):
        raise ValueError("region must have finite volume")
    pts, vols = [], []
    for b in region.boxes:
        if b.dim == 1:
            m = max(1, int(round(cells * b.volume / region.volume)))
            e = np.linspace(b.lo[0], b.hi[0], m + 1)
            pts.append(0.5 * (e[1:] + e[:-1]))
            vols.append(np.full(m, b.volume / m))
        else:
            m = max(1, int(round(math.sqrt(cells * b.volume / region.volume))))
            ex = np.linspace(b.lo[0], b.hi[0], m + 1)
            ey = np.linspace(b.lo[1], b.hi[1], m + 1)
            gx, gy = np.meshgrid(0.5 * (ex[1:] + ex[:-1]), 0.5 * (ey[1:] + ey[:-1]), indexing="ij")
            pts.append(np.column_stack([gx.ravel(), gy.ravel()]))
            vols.append(np.full(m * m, b.volume / (m * m)))
    x = np.concatenate(pts)
    w = np.concatenate(vols)
    base = f(x)
    memo: dict[int, float] = {}
    out = []
    for fn in f_seq:
        key = id(fn)
        if key not in memo:
            memo[key] = float(np.sum(w[np.abs(base - fn(x)) > eps]))
        out.append(memo[key])
    return MeasureReport(out, eps, float(w.max()) if w.size else 0.0)
