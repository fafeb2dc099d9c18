"""Real-valued functions on box domains.

Three representations share one interface:

* ``simple``: finitely many values, each on a box with disjoint interiors;
* ``smooth_composite``: sums ``Σ c_j (1 - Π_i (1 - b_ij))`` of smooth bumps,
  each bump a tensor product of smoothstep ramps between an inner box
  (where it equals 1) and an outer box (outside which it vanishes);
* ``opaque``: an arbitrary vectorised callable with a declared support,
  optional declared singular points and optional break points.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .geometry import Box, BoxSet

SAMPLES_1D = 257
SAMPLES_2D = 33


def smoothstep(tau: np.ndarray) -> np.ndarray:
    """s(τ) = e(τ)/(e(τ)+e(1-τ)) with e(τ) = exp(-1/τ); 0 for τ<=0 and 1 for τ>=1."""
    tau = np.asarray(tau, dtype=float)
    inner = (tau > 0) & (tau < 1)
    tc = np.where(inner, tau, 0.5)
    with np.errstate(over="ignore"):
        z = np.exp(np.clip(1.0 / tc - 1.0 / (1.0 - tc), -700, 700))
    val = 1.0 / (1.0 + z)
    return np.where(tau >= 1, 1.0, np.where(tau <= 0, 0.0, val))


@dataclass(frozen=True)
class Bump:
    """Smooth plateau: 1 on ``inner``, 0 outside ``outer``, in (0,1) between."""

    inner: Box
    outer: Box

    def __post_init__(self):
        if self.inner.dim != self.outer.dim:
            raise ValueError("bump boxes must share a dimension")
        for a, b, c, d in zip(self.outer.lo, self.inner.lo, self.inner.hi, self.outer.hi):
            if not (a < b and c < d):
                raise ValueError("bump outer box must strictly contain the inner box")

    @property
    def dim(self) -> int:
        return self.inner.dim

    def axis_profile(self, x: np.ndarray, k: int) -> np.ndarray:
        olo, ilo, ihi, ohi = self.outer.lo[k], self.inner.lo[k], self.inner.hi[k], self.outer.hi[k]
        left = smoothstep((x - olo) / (ilo - olo))
        right = smoothstep((ohi - x) / (ohi - ihi))
        return np.minimum(left, right)

    def __call__(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if self.dim == 1:
            return self.axis_profile(x.reshape(-1), 0)
        x = x.reshape(-1, 2)
        return self.axis_profile(x[:, 0], 0) * self.axis_profile(x[:, 1], 1)

    def min_over(self, box: Box) -> float:
        """Exact minimum on a box: each axis profile is unimodal, so a corner attains it."""
        m = 1.0
        for k in range(self.dim):
            ends = self.axis_profile(np.array([box.lo[k], box.hi[k]]), k)
            m *= float(ends.min())
        return m

    def to_json(self) -> dict:
        return {"inner": self.inner.to_json(), "outer": self.outer.to_json()}

    @classmethod
    def from_json(cls, data: dict) -> Bump:
        return cls(Box.from_json(data["inner"]), Box.from_json(data["outer"]))


@dataclass(frozen=True)
class Singularity:
    """Declared blow-up of |f| near ``location``.

    kind ``log``: |f(x)| >= coef * ln(1/|x - s|);  kind ``power``: |f(x)| >= coef * |x - s|^(-alpha).
    """

    location: float
    kind: str
    coef: float
    alpha: float = 0.0
    side: str = "both"

    def to_json(self) -> dict:
        return {"location": self.location, "kind": self.kind, "coef": self.coef,
                "alpha": self.alpha, "side": self.side}


@dataclass(frozen=True)
class PiecewiseFunction:
    kind: str
    dim: int
    support: BoxSet
    pieces: tuple[tuple[float, Box], ...] = ()
    terms: tuple[tuple[float, tuple[Bump, ...]], ...] = ()
    func: Callable[[np.ndarray], np.ndarray] | None = field(default=None, repr=False, compare=False)
    smooth: bool = False
    singularities: tuple[Singularity, ...] = ()
    extra_breaks: tuple[float, ...] = ()
    label: str = ""
    parts: tuple = field(default=(), repr=False, compare=False)

    # ------------------------------------------------------------ constructors
    @classmethod
    def simple(cls, pieces: Sequence[tuple[float, Box]], dim: int | None = None) -> PiecewiseFunction:
        pieces = tuple((float(v), b if isinstance(b, Box) else Box.from_json(b)) for v, b in pieces)
        if dim is None:
            dim = pieces[0][1].dim if pieces else 1
        pieces = tuple((v, b) for v, b in pieces if v != 0)
        boxes = [b for _, b in pieces]
        if any(b.dim != dim for b in boxes):
            raise ValueError("all pieces must share the function's dimension")
        union = BoxSet.of(boxes, True, dim) if boxes else BoxSet.empty(dim)
        if abs(union.volume - math.fsum(b.volume for b in boxes)) > 1e-12 * max(1.0, union.volume):
            raise ValueError("simple-function boxes must have disjoint interiors")
        return cls("simple", dim, union, pieces=pieces)

    @classmethod
    def indicator(cls, s: BoxSet | Box, value: float = 1.0) -> PiecewiseFunction:
        boxes = s.boxes if isinstance(s, BoxSet) else (s,)
        dim = s.dim
        return cls.simple([(value, b) for b in boxes], dim)

    @classmethod
    def zero(cls, dim: int = 1) -> PiecewiseFunction:
        return cls.simple([], dim)

    @classmethod
    def smooth_composite(cls, terms: Sequence[tuple[float, Sequence[Bump]]]) -> PiecewiseFunction:
        terms = tuple((float(c), tuple(bs)) for c, bs in terms if c != 0 and bs)
        if not terms:
            return cls.zero()
        dim = terms[0][1][0].dim
        outers = [b.outer for _, bs in terms for b in bs]
        return cls("smooth_composite", dim, BoxSet.of(outers, True, dim), terms=terms, smooth=True)

    @classmethod
    def bump(cls, inner: Box, outer: Box, height: float = 1.0) -> PiecewiseFunction:
        return cls.smooth_composite([(height, [Bump(inner, outer)])])

    @classmethod
    def opaque(cls, func: Callable[[np.ndarray], np.ndarray], support: BoxSet, smooth: bool = False,
               singularities: Sequence[Singularity] = (), breaks: Sequence[float] = (),
               label: str = "") -> PiecewiseFunction:
        return cls("opaque", support.dim, support.closure(), func=func, smooth=smooth,
                   singularities=tuple(singularities), extra_breaks=tuple(breaks), label=label)

    # ------------------------------------------------------------ evaluation
    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if self.dim == 1:
            x = x.reshape(-1)
            n = x.shape[0]
        else:
            x = x.reshape(-1, 2)
            n = x.shape[0]
        if self.kind == "simple":
            out = np.zeros(n)
            pts = x.reshape(n, -1)
            for v, b in self.pieces:
                inside = np.all((pts >= np.array(b.lo)) & (pts < np.array(b.hi)), axis=1)
                out = np.where(inside, v, out)
            return out
        if self.kind == "smooth_composite":
            out = np.zeros(n)
            for c, bumps in self.terms:
                prod = np.ones(n)
                for b in bumps:
                    prod = prod * (1.0 - b(x))
                out = out + c * (1.0 - prod)
            return out
        return np.asarray(self.func(x), dtype=float).reshape(n)

    @property
    def is_zero(self) -> bool:
        return self.support.is_empty

    def breaks(self, axis: int = 0) -> tuple[float, ...]:
        pts = set(self.extra_breaks) if axis == 0 else set()
        if self.kind == "simple":
            for _, b in self.pieces:
                pts.update((b.lo[axis], b.hi[axis]))
        elif self.kind == "smooth_composite":
            for _, bumps in self.terms:
                for b in bumps:
                    pts.update((b.outer.lo[axis], b.inner.lo[axis], b.inner.hi[axis], b.outer.hi[axis]))
        for _, f in self.parts:
            pts.update(f.breaks(axis))
        if axis == 0:
            pts.update(s.location for s in self.singularities)
        return tuple(sorted(pts))

    def sample_grid(self, box: Box) -> np.ndarray:
        if box.dim == 1:
            return np.linspace(box.lo[0], box.hi[0], SAMPLES_1D)
        gx, gy = np.meshgrid(np.linspace(box.lo[0], box.hi[0], SAMPLES_2D),
                             np.linspace(box.lo[1], box.hi[1], SAMPLES_2D), indexing="ij")
        return np.column_stack([gx.ravel(), gy.ravel()])

    def lower_bound_abs(self, box: Box) -> tuple[float, bool]:
        """(bound, rigorous): a lower bound of |f| on ``box``.

        Exact for simple functions and for single-term positive composites;
        otherwise the minimum over a sample grid (``rigorous`` False).
        """
        if self.kind == "simple":
            covered = 0.0
            m = math.inf
            for v, b in self.pieces:
                inter = b.intersect(box)
                if inter is not None:
                    covered += inter.volume
                    m = min(m, abs(v))
            if covered < box.volume * (1 - 1e-12):
                return 0.0, True
            return (m if math.isfinite(m) else 0.0), True
        if self.kind == "smooth_composite" and len(self.terms) == 1:
            c, bumps = self.terms[0]
            prod = 1.0
            for b in bumps:
                prod *= 1.0 - b.min_over(box)
            return abs(c) * (1.0 - prod), True
        vals = np.abs(self(self.sample_grid(box)))
        return float(vals.min()), False

    def max_abs(self, box: Box) -> float:
        if self.kind == "simple":
            vals = [abs(v) for v, b in self.pieces if b.intersect(box) is not None]
            return max(vals, default=0.0)
        return float(np.abs(self(self.sample_grid(box))).max())

    # ------------------------------------------------------------ serialization
    def to_json(self) -> dict:
        if self.kind == "simple":
            return {"kind": "simple", "dim": self.dim,
                    "pieces": [{"value": v, "box": b.to_json()} for v, b in self.pieces]}
        if self.kind == "smooth_composite":
            return {"kind": "smooth_composite", "dim": self.dim,
                    "terms": [{"coef": c, "bumps": [b.to_json() for b in bs]} for c, bs in self.terms]}
        raise ValueError("opaque functions cannot be serialised")

    @classmethod
    def from_json(cls, data: dict) -> PiecewiseFunction:
        kind = data.get("kind")
        if kind == "simple":
            pieces = [(float(p["value"]), Box.from_json(p["box"])) for p in data.get("pieces", [])]
            return cls.simple(pieces, int(data.get("dim", 1)))
        if kind == "smooth_composite":
            return cls.smooth_composite([(float(t["coef"]), [Bump.from_json(b) for b in t["bumps"]])
                                         for t in data.get("terms", [])])
        if kind == "bump":
            return cls.bump(Box.from_json(data["inner"]), Box.from_json(data["outer"]),
                            float(data.get("height", 1.0)))
        raise ValueError(f"unsupported function kind {kind!r} in field 'kind'")


def _refine_simple(terms: Sequence[tuple[float, PiecewiseFunction]]) -> PiecewiseFunction:
    dim = terms[0][1].dim
    boxes = [b for _, f in terms for _, b in f.pieces]
    if not boxes:
        return PiecewiseFunction.zero(dim)
    axes = []
    for k in range(dim):
        axes.append(np.unique(np.array([c for b in boxes for c in (b.lo[k], b.hi[k])])))
    if dim == 1:
        xs = axes[0]
        cells = [Box((xs[i],), (xs[i + 1],)) for i in range(len(xs) - 1)]
    else:
        xs, ys = axes
        cells = [Box((xs[i], ys[j]), (xs[i + 1], ys[j + 1]))
                 for i in range(len(xs) - 1) for j in range(len(ys) - 1)]
    centers = np.array([c.center for c in cells])
    centers = centers[:, 0] if dim == 1 else centers
    total = np.zeros(len(cells))
    for c, f in terms:
        total = total + c * f(centers)
    pieces = [(float(v), cell) for v, cell in zip(total, cells) if v != 0]
    return PiecewiseFunction.simple(pieces, dim)


def combine(terms: Sequence[tuple[float, PiecewiseFunction]]) -> PiecewiseFunction:
    """Linear combination Σ c_i f_i.

    Simple inputs give a simple result on the common refinement; anything
    else gives an opaque function carrying merged supports and breaks.
    """
    first_dim = terms[0][1].dim if terms else 1
    terms = [(float(c), f) for c, f in terms if c != 0 and not f.is_zero]
    if not terms:
        return PiecewiseFunction.zero(first_dim)
    dims = {f.dim for _, f in terms}
    if len(dims) != 1:
        raise ValueError("cannot combine functions of different dimensions")
    dim = dims.pop()
    if all(f.kind == "simple" for _, f in terms):
        return _refine_simple(terms)
    support = terms[0][1].support
    for _, f in terms[1:]:
        support = support.union(f.support)
    sings = [s for _, f in terms for s in f.singularities]
    funcs = [(c, f) for c, f in terms]

    def func(x):
        out = 0.0
        for c, f in funcs:
            out = out + c * f(x)
        return out

    smooth = all(f.smooth for _, f in terms)
    return PiecewiseFunction("opaque", dim, support.closure(), func=func, smooth=smooth,
                             singularities=tuple(sings), label="combination", parts=tuple(funcs))
