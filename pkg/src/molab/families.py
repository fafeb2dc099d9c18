"""Catalog of Musielak-Orlicz functions Φ(x, t).

Each :class:`MOFunction` couples a vectorised evaluator with the analytic
metadata the rest of the library relies on: pole locations and orders,
a Δ₂ certificate, an exact per-box x-integral for fixed t (used by the
closed-form oracle) and, for the dense-pole weight, the interval on which
the untruncated function is singular everywhere.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional

import numpy as np

from .descriptors import Descriptor, as_descriptor
from .geometry import Box, BoxSet
from .rationals import enumerate_unit_rationals

DEFAULT_LINE = (-1e3, 1e3)
ORLICZ_KINDS = ("power", "exp")


@dataclass(frozen=True)
class PoleInfo:
    """Φ(x, t) >= t * coefficient * |x - location|^(-order) on the declared side.

    ``term_index`` records the series term the pole comes from; the
    coefficient 4^(-term_index) may underflow to 0.0 while staying positive.
    """

    location: float
    order: float
    coefficient: float
    side: str = "both"
    scale_in_t: str = "linear"
    term_index: int | None = None

    def __post_init__(self):
        if self.side not in ("left", "right", "both"):
            raise ValueError(f"pole side must be left, right or both, got {self.side!r}")

    @property
    def coefficient_positive(self) -> bool:
        return self.coefficient > 0 or (self.term_index is not None and self.term_index >= 1)

    def sides(self) -> tuple[str, ...]:
        return ("right", "left") if self.side == "both" else (self.side,)

    def to_json(self) -> dict:
        d = dataclasses.asdict(self)
        if self.term_index is not None and self.term_index.bit_length() > 60:
            d["term_index"] = hex(self.term_index)
        return d

    @classmethod
    def from_json(cls, data: dict) -> PoleInfo:
        data = dict(data)
        ti = data.get("term_index")
        if isinstance(ti, str):
            data["term_index"] = int(ti, 16)
        return cls(**data)


@dataclass(frozen=True)
class Delta2Certificate:
    """Φ(x, 2t) <= C Φ(x, t) + h(x), with h described in closed form."""

    C: float
    h: Descriptor = field(default_factory=lambda: Descriptor.const(0.0))
    h_integral: float = 0.0
    provenance: str = "analytic"
    clause: str | None = None

    def __post_init__(self):
        if not self.C >= 1:
            raise ValueError("Δ₂ constant must be at least 1")
        if self.h_integral < 0 or not math.isfinite(self.h_integral):
            raise ValueError("h must have a finite nonnegative integral")

    def to_json(self) -> dict:
        return {"C": self.C, "h": self.h.to_json(), "h_integral": self.h_integral,
                "provenance": self.provenance, "clause": self.clause}


@dataclass(frozen=True)
class Delta2Rejection:
    clause: str
    reason: str

    def to_json(self) -> dict:
        return {"rejected": True, "clause": self.clause, "reason": self.reason}


@dataclass(frozen=True)
class MOFunction:
    family: str
    params: dict
    domain: BoxSet
    evaluator: Callable[[np.ndarray, np.ndarray], np.ndarray] = field(repr=False)
    poles: tuple[PoleInfo, ...] = ()
    delta2: Delta2Certificate | None = None
    weight: Optional[Callable[[np.ndarray], np.ndarray]] = field(default=None, repr=False)
    box_integral: Optional[Callable[[Box, float], float]] = field(default=None, repr=False)
    breaks: tuple[float, ...] = ()
    dense_singular_interval: tuple[float, float] | None = None
    homogeneity: float | None = None
    zero_set: BoxSet | None = None
    orlicz_kind: str | None = None
    orlicz_exponent: float | None = None

    @property
    def dim(self) -> int:
        return self.domain.dim

    def __call__(self, x, t) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        t = np.asarray(t, dtype=float)
        n = x.shape[0] if x.ndim else 1
        t = np.broadcast_to(t, (n,)) if t.ndim == 0 else t
        return self.evaluator(x, t)

    def truncated(self) -> MOFunction:
        """Same evaluator, without the dense-singularity metadata."""
        return dataclasses.replace(self, dense_singular_interval=None)

    def poles_in(self, a: float, b: float) -> list[PoleInfo]:
        return [p for p in self.poles if a <= p.location <= b]

    def to_json(self) -> dict:
        return {"family": self.family, **self.params, "domain": self.domain.to_json()}


def _line_domain(domain: BoxSet | None) -> BoxSet:
    return domain if domain is not None else BoxSet.interval(*DEFAULT_LINE, closed=False)


def _check_open(domain: BoxSet):
    if domain.closed:
        raise ValueError("MO function domain must be an open box set")
    if domain.is_empty:
        raise ValueError("MO function domain must be nonempty")


def _piecewise_integral(box: Box, descs: list[Descriptor], f: Callable[[np.ndarray], float]) -> float:
    """Exact integral of a function of piecewise-constant descriptors over ``box``."""
    axes = []
    for k in range(box.dim):
        pts = {box.lo[k], box.hi[k]}
        for d in descs:
            pts.update(c for c in d.breaks(k) if box.lo[k] < c < box.hi[k])
        axes.append(np.array(sorted(pts)))
    total = 0.0
    if box.dim == 1:
        xs = axes[0]
        mids = 0.5 * (xs[1:] + xs[:-1])
        vals = f(mids)
        total = math.fsum(vals * np.diff(xs))
    else:
        xs, ys = axes
        gx, gy = np.meshgrid(0.5 * (xs[1:] + xs[:-1]), 0.5 * (ys[1:] + ys[:-1]), indexing="ij")
        area = np.outer(np.diff(xs), np.diff(ys))
        vals = f(np.column_stack([gx.ravel(), gy.ravel()])).reshape(gx.shape)
        total = math.fsum((vals * area).ravel())
    return total


# ---------------------------------------------------------------- Φ₁ and Φ₂


def make_phi1(domain: BoxSet | None = None) -> MOFunction:
    """Φ₁(x, t) = t/|x|, with Φ₁(0, t) = 0."""
    domain = _line_domain(domain)
    _check_open(domain)
    w = Descriptor.reciprocal(0.0, 1.0, 0.0, at_value=0.0)

    def weight(x):
        x = np.asarray(x, dtype=float)
        with np.errstate(divide="ignore"):
            return np.where(x == 0, 0.0, 1.0 / np.abs(x))

    def evaluator(x, t):
        return t * weight(x)

    def box_integral(box: Box, t: float) -> float:
        if t == 0:
            return 0.0
        return t * w.integrate(box)

    return MOFunction(
        family="weighted_linear", params={"w": w.to_json()}, domain=domain, evaluator=evaluator,
        poles=(PoleInfo(0.0, 1.0, 1.0, "both", "linear"),), delta2=Delta2Certificate(2.0),
        weight=weight, box_integral=box_integral, breaks=(0.0,), homogeneity=1.0,
        zero_set=None,
    )


def make_phi2(N: int = 8, enumeration: str = "calkin-wilf", domain: BoxSet | None = None) -> MOFunction:
    """Φ₂ with weight truncated to N terms: t·Σ 4^-n/(x - r_n)_+ on (0,1), t elsewhere."""
    if not isinstance(N, (int, np.integer)) or N <= 0:
        raise ValueError(f"truncation count N must be a positive integer, got {N!r}")
    if enumeration != "calkin-wilf":
        raise ValueError(f"unsupported rational enumeration {enumeration!r}")
    domain = _line_domain(domain)
    _check_open(domain)
    rs = enumerate_unit_rationals(int(N))
    r = np.array([float(q) for q in rs])
    coef = 4.0 ** -np.arange(1, N + 1)

    def weight_inside(x):
        x = np.asarray(x, dtype=float)
        d = x[:, None] - r[None, :]
        with np.errstate(divide="ignore"):
            terms = np.where(d > 0, coef[None, :] / np.where(d > 0, d, 1.0), 0.0)
        return terms.sum(axis=1)

    def weight(x):
        x = np.atleast_1d(np.asarray(x, dtype=float))
        inside = (x > 0) & (x < 1)
        return np.where(inside, weight_inside(x), 1.0)

    def evaluator(x, t):
        return t * weight(x)

    def box_integral(box: Box, t: float) -> float:
        if t == 0:
            return 0.0
        a, b = box.lo[0], box.hi[0]
        outside = max(0.0, min(b, 0.0) - a) + max(0.0, b - max(a, 1.0))
        total = outside
        ia, ib = max(a, 0.0), min(b, 1.0)
        if ia < ib:
            for rn, cn in zip(r, coef):
                if ia <= rn < ib:
                    return math.inf
                if rn < ia:
                    total += cn * math.log((ib - rn) / (ia - rn))
        return t * total

    poles = tuple(PoleInfo(float(q), 1.0, float(c), "right", "linear", n)
                  for n, (q, c) in enumerate(zip(rs, coef), start=1))
    zero_hi = float(min(rs))
    return MOFunction(
        family="series_weight", params={"N": int(N), "enumeration": enumeration},
        domain=domain, evaluator=evaluator, poles=poles, delta2=Delta2Certificate(2.0),
        weight=weight, box_integral=box_integral, breaks=(0.0, 1.0) + tuple(float(q) for q in rs),
        dense_singular_interval=(0.0, 1.0), homogeneity=1.0,
        zero_set=BoxSet.interval(0.0, zero_hi, closed=True),
    )


# ---------------------------------------------------------------- parametric families


def make_orlicz(kind: str = "power", p: float = 2.0, domain: BoxSet | None = None) -> MOFunction:
    """x-independent Φ: ``power`` is t^p (p >= 1), ``exp`` is e^t - 1."""
    if kind not in ORLICZ_KINDS:
        raise ValueError(f"orlicz kind must be one of {ORLICZ_KINDS}, got {kind!r}")
    domain = _line_domain(domain)
    _check_open(domain)
    if kind == "power":
        if not p >= 1:
            raise ValueError(f"power Orlicz function needs p >= 1, got {p}")

        def phi_t(t):
            return np.power(t, p)
        delta2 = Delta2Certificate(2.0 ** p)
        homog = float(p)
        params = {"kind": kind, "p": float(p)}
    else:
        def phi_t(t):
            with np.errstate(over="ignore"):
                return np.expm1(t)
        delta2 = None
        homog = None
        params = {"kind": kind}

    def evaluator(x, t):
        return phi_t(np.asarray(t, dtype=float))

    def box_integral(box: Box, t: float) -> float:
        return float(phi_t(np.array([t]))[0]) * box.volume

    return MOFunction(
        family="orlicz", params=params, domain=domain, evaluator=evaluator, delta2=delta2,
        box_integral=box_integral, homogeneity=homog, orlicz_kind=kind,
        orlicz_exponent=float(p) if kind == "power" else None,
    )


def make_weighted_linear(w, domain: BoxSet | None = None) -> MOFunction:
    """Φ(x, t) = t·w(x) for a nonnegative weight descriptor."""
    w = as_descriptor(w)
    domain = _line_domain(domain)
    _check_open(domain)
    if w.inf(domain) < 0:
        raise ValueError("weight must be nonnegative on the domain")
    poles = ()
    if w.kind == "reciprocal" and w.params["a"] > 0:
        if domain.dim != 1:
            raise ValueError("weights with poles are supported in one dimension only")
        poles = (PoleInfo(float(w.params["at"]), 1.0, float(w.params["a"]), "both", "linear"),)

    def weight(x):
        return w(x)

    def evaluator(x, t):
        return t * w(x)

    def box_integral(box: Box, t: float) -> float:
        return 0.0 if t == 0 else t * w.integrate(box)

    return MOFunction(
        family="weighted_linear", params={"w": w.to_json()}, domain=domain, evaluator=evaluator,
        poles=poles, delta2=Delta2Certificate(2.0), weight=weight, box_integral=box_integral,
        breaks=w.breaks(0), homogeneity=1.0,
    )


def _validation_points(domain: BoxSet, n: int = 257) -> np.ndarray:
    pts = []
    for b in domain.boxes:
        axes = [np.linspace(lo, hi, n)[1:-1] for lo, hi in zip(b.lo, b.hi)]
        if b.dim == 1:
            pts.append(axes[0])
        else:
            gx, gy = np.meshgrid(axes[0][::8], axes[1][::8], indexing="ij")
            pts.append(np.column_stack([gx.ravel(), gy.ravel()]))
    return np.concatenate(pts)


def make_variable_exponent(p, domain: BoxSet) -> MOFunction:
    """Φ(x, t) = t^p(x)/p(x) with 1 <= p < inf."""
    p = as_descriptor(p)
    _check_open(domain)
    pts = _validation_points(domain)
    if p.inf(domain) < 1 or np.any(p(pts) < 1):
        raise ValueError("variable exponent needs p(x) >= 1 on the domain")
    p_plus = p.sup(domain)
    delta2 = Delta2Certificate(2.0 ** p_plus) if math.isfinite(p_plus) else None

    def evaluator(x, t):
        px = p(x)
        return np.power(t, px) / px

    box_integral = None
    if p.is_piecewise_constant:
        def box_integral(box: Box, t: float) -> float:
            return _piecewise_integral(box, [p], lambda xs: t ** p(xs) / p(xs))

    homog = float(p.params["v"]) if p.kind == "const" else None
    return MOFunction(
        family="variable_exponent", params={"p": p.to_json()}, domain=domain, evaluator=evaluator,
        delta2=delta2, box_integral=box_integral, breaks=p.breaks(0), homogeneity=homog,
    )


def check_double_phase_delta2(p, r, a, domain: BoxSet) -> Delta2Certificate | Delta2Rejection:
    """Δ₂ via clause (i) r⁺ < inf, or clause (ii) p < r on supp a with p⁺, r⁺|supp a finite."""
    p, r, a = as_descriptor(p), as_descriptor(r), as_descriptor(a)
    p_plus = p.sup(domain)
    r_plus = r.sup(domain)
    if math.isfinite(r_plus):
        return Delta2Certificate(2.0 ** max(p_plus, r_plus), clause="i")
    omega1 = a.support(domain)
    if omega1.is_empty:
        if math.isfinite(p_plus):
            return Delta2Certificate(2.0 ** p_plus, clause="ii")
        return Delta2Rejection("ii", "p⁺ is infinite")
    r_plus1 = r.sup(omega1)
    if not math.isfinite(p_plus):
        return Delta2Rejection("ii", "clause (i) fails (r⁺ = inf) and clause (ii) fails: p⁺ is infinite")
    if not math.isfinite(r_plus1):
        return Delta2Rejection("ii", "clause (i) fails (r⁺ = inf) and clause (ii) fails: r⁺ on supp a is infinite")
    pts = _validation_points(omega1.interior())
    gap_ok = r.inf(omega1) > p.sup(omega1) or bool(np.all(r(pts) > p(pts)))
    if not gap_ok:
        return Delta2Rejection("ii", "clause (i) fails (r⁺ = inf) and clause (ii) fails: p < r does not hold on supp a")
    return Delta2Certificate(2.0 ** max(p_plus, r_plus1), clause="ii")


def make_double_phase(p, r, a, domain: BoxSet) -> MOFunction:
    """Φ(x, t) = t^p(x) + a(x) t^r(x) with a >= 0 bounded and 1 <= p <= r."""
    p, r, a = as_descriptor(p), as_descriptor(r), as_descriptor(a)
    _check_open(domain)
    pts = _validation_points(domain)
    if a.inf(domain) < 0 or np.any(a(pts) < 0):
        raise ValueError("double phase weight a must be nonnegative")
    if not math.isfinite(a.sup(domain)):
        raise ValueError("double phase weight a must be essentially bounded")
    pv, rv = p(pts), r(pts)
    if p.inf(domain) < 1 or np.any(pv < 1):
        raise ValueError("double phase needs p(x) >= 1")
    if np.any(rv < pv):
        raise ValueError("double phase needs p(x) <= r(x)")
    cert = check_double_phase_delta2(p, r, a, domain)

    def evaluator(x, t):
        ax = a(x)
        with np.errstate(over="ignore", invalid="ignore"):
            second = np.where(ax > 0, ax * np.power(t, np.where(ax > 0, r(x), 1.0)), 0.0)
        return np.power(t, p(x)) + second

    box_integral = None
    if p.is_piecewise_constant and r.is_piecewise_constant and a.is_piecewise_constant:
        def box_integral(box: Box, t: float) -> float:
            return _piecewise_integral(box, [p, r, a], lambda xs: evaluator(xs, np.full(len(xs), t)))

    homog = None
    if p.kind == "const" and (a.kind == "const" and a.params["v"] == 0):
        homog = float(p.params["v"])
    breaks = tuple(sorted(set(p.breaks(0) + r.breaks(0) + a.breaks(0))))
    return MOFunction(
        family="double_phase", params={"p": p.to_json(), "r": r.to_json(), "a": a.to_json()},
        domain=domain, evaluator=evaluator,
        delta2=cert if isinstance(cert, Delta2Certificate) else None,
        box_integral=box_integral, breaks=breaks, homogeneity=homog,
    )


# ---------------------------------------------------------------- checks


@dataclass
class Delta2Report:
    passed: bool
    samples: int
    worst_excess: float
    worst_x: float | tuple | None
    worst_t: float | None


def delta2_grid(phi: MOFunction, nx: int = 401, nt: int = 61, window: float = 10.0):
    """Default verification grid: x points in the domain and log-spaced t in [0, 1e3]."""
    xs = []
    for b in phi.domain.boxes:
        lo = [max(l, -window) for l in b.lo]
        hi = [min(h, window) for h in b.hi]
        if any(l >= h for l, h in zip(lo, hi)):
            lo, hi = list(b.lo), list(b.hi)
        axes = [np.linspace(l, h, nx)[1:-1] for l, h in zip(lo, hi)]
        if b.dim == 1:
            xs.append(axes[0])
        else:
            gx, gy = np.meshgrid(axes[0][::10], axes[1][::10], indexing="ij")
            xs.append(np.column_stack([gx.ravel(), gy.ravel()]))
    x = np.concatenate(xs)
    if phi.dim == 1:
        extra = []
        if phi.dense_singular_interval is not None:
            lo, hi = phi.dense_singular_interval
            extra.append(np.linspace(lo, hi, nx)[1:-1])
        for pole in phi.poles:
            off = np.logspace(-8, -1, 15)
            extra.extend([pole.location + off, pole.location - off])
        if extra:
            cand = np.concatenate(extra)
            x = np.concatenate([x, cand[phi.domain.contains_points(cand)]])
    t = np.concatenate([[0.0], np.logspace(-6, 3, nt)])
    return x, t


def verify_delta2(phi: MOFunction, cert: Delta2Certificate, grid=None, rel_slack: float = 1e-9) -> Delta2Report:
    """Check Φ(x,2t) <= C Φ(x,t) + h(x) on a grid of (x, t) samples."""
    x, t = grid if grid is not None else delta2_grid(phi)
    n = x.shape[0]
    worst = -math.inf
    worst_x = worst_t = None
    hx = cert.h(x)
    for tv in t:
        tt = np.full(n, tv)
        with np.errstate(over="ignore", invalid="ignore"):
            lhs = phi(x, 2 * tt)
            rhs = cert.C * phi(x, tt) + hx
            excess = np.where(np.isinf(lhs) & np.isinf(rhs), 0.0, lhs - rhs - rel_slack * np.abs(rhs))
        excess = np.nan_to_num(excess, nan=math.inf)
        i = int(np.argmax(excess))
        if excess[i] > worst:
            worst = float(excess[i])
            worst_x = x[i].tolist() if x.ndim > 1 else float(x[i])
            worst_t = float(tv)
    return Delta2Report(passed=worst <= 0, samples=n * len(t), worst_excess=worst, worst_x=worst_x, worst_t=worst_t)


@dataclass
class ValidationReport:
    zero_at_zero: bool
    convex: bool
    monotone: bool
    positive: bool
    failures: list[str]

    @property
    def ok(self) -> bool:
        return not self.failures


def validate_mo_function(phi: MOFunction, samples: int = 1000, seed: int = 0, window: float = 10.0) -> ValidationReport:
    """Sampled check of Φ(x,0)=0, midpoint convexity, monotonicity and positivity."""
    rng = np.random.default_rng(seed)
    bounded = phi.domain.intersect(BoxSet.of([Box((-window,) * phi.dim, (window,) * phi.dim)], False))
    region = bounded if not bounded.is_empty else phi.domain
    x = region.sample(samples, rng)
    x = x[:, 0] if phi.dim == 1 else x
    t1 = 10.0 ** rng.uniform(-3, 1.5, samples)
    t2 = t1 + 10.0 ** rng.uniform(-3, 1.5, samples)
    failures = []
    zero_ok = bool(np.all(phi(x, np.zeros(samples)) == 0))
    if not zero_ok:
        failures.append("Φ(x,0) != 0")
    f1, f2 = phi(x, t1), phi(x, t2)
    fm = phi(x, 0.5 * (t1 + t2))
    finite = np.isfinite(f1) & np.isfinite(f2)
    convex_ok = bool(np.all(fm[finite] <= 0.5 * (f1 + f2)[finite] * (1 + 1e-9) + 1e-300))
    if not convex_ok:
        failures.append("midpoint convexity")
    mono_ok = bool(np.all(f2 >= f1))
    if not mono_ok:
        failures.append("monotonicity in t")
    pos = f1 > 0
    if phi.zero_set is not None:
        pos |= phi.zero_set.contains_points(x)
    pos_ok = bool(np.all(pos))
    if not pos_ok:
        failures.append("Φ(x,t) > 0 for t > 0")
    return ValidationReport(zero_ok, convex_ok, mono_ok, pos_ok, failures)


@dataclass
class LevelSets:
    sets: list[BoxSet]
    straddling: BoxSet
    overflow: BoxSet


def level_set_decomposition(phi: MOFunction, a: BoxSet, n_max: int, res: float) -> LevelSets:
    """Split ``a`` into grid-cell sets A_n ~ {x : w(x) in [n-1, n)}."""
    if phi.weight is None:
        raise ValueError(f"family {phi.family!r} has no scalar weight")
    if res <= 0:
        raise ValueError("grid resolution must be positive")
    if a.is_empty:
        return LevelSets([], BoxSet.empty(a.dim, False), BoxSet.empty(a.dim, False))
    buckets: dict[int, list[Box]] = {}
    straddle: list[Box] = []
    overflow: list[Box] = []
    for box in a.boxes:
        counts = [max(1, int(math.ceil((h - l) / res - 1e-9))) for l, h in zip(box.lo, box.hi)]
        edges = [np.linspace(l, h, c + 1) for l, h, c in zip(box.lo, box.hi, counts)]
        if box.dim == 1:
            e = edges[0]
            cells = [Box((e[i],), (e[i + 1],)) for i in range(counts[0])]
        else:
            cells = [Box((edges[0][i], edges[1][j]), (edges[0][i + 1], edges[1][j + 1]))
                     for i in range(counts[0]) for j in range(counts[1])]
        centers = np.array([c.center for c in cells])
        centers = centers[:, 0] if box.dim == 1 else centers
        wm = phi.weight(centers)
        if box.dim == 1:
            corners = np.concatenate([[c.lo[0] for c in cells], [cells[-1].hi[0]]])
            wc = phi.weight(corners)
            wc_lo, wc_hi = wc[:-1], wc[1:]
        else:
            wc_lo = phi.weight(np.array([c.lo for c in cells]))
            wc_hi = phi.weight(np.array([c.hi for c in cells]))
        for c, m, u, v in zip(cells, wm, wc_lo, wc_hi):
            n = int(math.floor(m)) + 1 if math.isfinite(m) else n_max + 1
            if n > n_max:
                overflow.append(c)
                continue
            buckets.setdefault(n, []).append(c)
            ends = [val for val in (u, v)]
            if any(not math.isfinite(e) or int(math.floor(e)) + 1 != n for e in ends):
                straddle.append(c)
    top = max(buckets) if buckets else 0
    sets = [BoxSet.of(buckets.get(n, []), False, a.dim) for n in range(1, top + 1)]
    return LevelSets(sets, BoxSet.of(straddle, False, a.dim), BoxSet.of(overflow, False, a.dim))


# ---------------------------------------------------------------- descriptor files


def family_from_json(data: dict) -> MOFunction:
    """Build a family from its structured-text descriptor."""
    if not isinstance(data, dict) or "family" not in data:
        raise ValueError("family descriptor needs field 'family'")
    fam = data["family"]
    domain = BoxSet.from_json(data["domain"]) if "domain" in data else None
    try:
        if fam == "phi1":
            return make_phi1(domain)
        if fam in ("phi2", "series_weight"):
            return make_phi2(int(data.get("N", 8)), data.get("enumeration", "calkin-wilf"), domain)
        if fam == "orlicz":
            return make_orlicz(data.get("kind", "power"), float(data.get("p", 2.0)), domain)
        if fam == "weighted_linear":
            return make_weighted_linear(data["w"], domain)
        if fam == "variable_exponent":
            if domain is None:
                raise KeyError("domain")
            return make_variable_exponent(data["p"], domain)
        if fam == "double_phase":
            if domain is None:
                raise KeyError("domain")
            return make_double_phase(data["p"], data["r"], data["a"], domain)
    except KeyError as exc:
        raise ValueError(f"family descriptor is missing field {exc.args[0]!r}") from None
    raise ValueError(f"unknown family {fam!r} in field 'family'")


def rational_pole(q: Fraction, n: int) -> PoleInfo:
    """Pole of the n-th series term, located at the rational r_n = q."""
    coef = 4.0 ** -n if n < 1100 else 0.0
    return PoleInfo(float(q), 1.0, coef, "right", "linear", int(n))
