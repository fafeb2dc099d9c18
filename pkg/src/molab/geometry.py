"""Axis-aligned box sets in one and two dimensions.

A :class:`BoxSet` is a finite union of boxes together with a topology flag.
Open sets are stored as *regular open* sets (the interior of the closure of
the union) and closed sets as *regular closed* sets (the union of the closed
boxes).  Both are therefore determined by the set of elementary grid cells
they cover, which makes union, intersection and difference exact up to
lower-dimensional pieces that the regularisation removes.

Serialised form::

    {"dim": 1, "closed": true, "boxes": [[lo, hi], ...]}
    {"dim": 2, "closed": false, "boxes": [[[lo0, lo1], [hi0, hi1]], ...]}
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

VOLUME_SLACK = 1e-12
_SNAP = 1e-12


@dataclass(frozen=True)
class Box:
    """Product of open (or closed) intervals ``lo[i] .. hi[i]``."""

    lo: tuple[float, ...]
    hi: tuple[float, ...]

    def __post_init__(self):
        lo = tuple(float(v) for v in self.lo)
        hi = tuple(float(v) for v in self.hi)
        if len(lo) != len(hi) or len(lo) not in (1, 2):
            raise ValueError(f"box corners must have equal length 1 or 2, got {lo}, {hi}")
        for a, b in zip(lo, hi):
            if not (math.isfinite(a) and math.isfinite(b)):
                raise ValueError(f"box corners must be finite, got {lo}, {hi}")
            if not a < b:
                raise ValueError(f"box needs lo < hi on every axis, got {lo}, {hi}")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @classmethod
    def interval(cls, a: float, b: float) -> Box:
        return cls((a,), (b,))

    @classmethod
    def around(cls, center: Sequence[float], half_width: float) -> Box:
        c = tuple(float(v) for v in np.atleast_1d(center))
        return cls(tuple(v - half_width for v in c), tuple(v + half_width for v in c))

    @property
    def dim(self) -> int:
        return len(self.lo)

    @property
    def volume(self) -> float:
        return math.prod(b - a for a, b in zip(self.lo, self.hi))

    @property
    def center(self) -> tuple[float, ...]:
        return tuple(0.5 * (a + b) for a, b in zip(self.lo, self.hi))

    @property
    def widths(self) -> tuple[float, ...]:
        return tuple(b - a for a, b in zip(self.lo, self.hi))

    def contains(self, x: Sequence[float], closed: bool = True) -> bool:
        x = np.atleast_1d(np.asarray(x, dtype=float))
        if closed:
            return all(a <= v <= b for a, b, v in zip(self.lo, self.hi, x))
        return all(a < v < b for a, b, v in zip(self.lo, self.hi, x))

    def contains_box(self, other: Box) -> bool:
        return all(a <= c and d <= b for a, b, c, d in zip(self.lo, self.hi, other.lo, other.hi))

    def inflate(self, delta: float) -> Box:
        return Box(tuple(a - delta for a in self.lo), tuple(b + delta for b in self.hi))

    def intersect(self, other: Box) -> Box | None:
        lo = tuple(max(a, c) for a, c in zip(self.lo, other.lo))
        hi = tuple(min(b, d) for b, d in zip(self.hi, other.hi))
        if all(a < b for a, b in zip(lo, hi)):
            return Box(lo, hi)
        return None

    def distance_to_point(self, x: Sequence[float]) -> float:
        x = np.atleast_1d(np.asarray(x, dtype=float))
        gaps = [max(a - v, 0.0, v - b) for a, b, v in zip(self.lo, self.hi, x)]
        return math.hypot(*gaps)

    def distance_to_box(self, other: Box) -> float:
        gaps = [max(c - b, 0.0, a - d) for a, b, c, d in zip(self.lo, self.hi, other.lo, other.hi)]
        return math.hypot(*gaps)

    def to_json(self):
        if self.dim == 1:
            return [self.lo[0], self.hi[0]]
        return [list(self.lo), list(self.hi)]

    @classmethod
    def from_json(cls, data) -> Box:
        if len(data) != 2:
            raise ValueError(f"box must be [lo, hi], got {data!r}")
        lo, hi = data
        if isinstance(lo, (int, float)):
            return cls((lo,), (hi,))
        return cls(tuple(lo), tuple(hi))


def _snap_coords(values: Iterable[float]) -> np.ndarray:
    """Sorted unique coordinates with near-duplicates collapsed."""
    v = np.unique(np.asarray(list(values), dtype=float))
    if v.size == 0:
        return v
    keep = [v[0]]
    for c in v[1:]:
        if c - keep[-1] > _SNAP * max(1.0, abs(c)):
            keep.append(c)
    return np.asarray(keep)


def _covers(boxes: Sequence[Box], points: np.ndarray) -> np.ndarray:
    """Which points lie strictly inside some box (points are cell centres)."""
    if not boxes:
        return np.zeros(points.shape[0], dtype=bool)
    lo = np.array([b.lo for b in boxes])
    hi = np.array([b.hi for b in boxes])
    inside = np.all((points[:, None, :] > lo[None]) & (points[:, None, :] < hi[None]), axis=2)
    return inside.any(axis=1)


def _cells_to_boxes(axes: list[np.ndarray], covered: np.ndarray) -> tuple[Box, ...]:
    if len(axes) == 1:
        xs = axes[0]
        out = []
        i, n = 0, covered.size
        while i < n:
            if not covered[i]:
                i += 1
                continue
            j = i
            while j + 1 < n and covered[j + 1]:
                j += 1
            out.append(Box((xs[i],), (xs[j + 1],)))
            i = j + 1
        return tuple(out)

    xs, ys = axes
    nx, ny = covered.shape
    # horizontal runs per row, then stack identical runs vertically
    runs_by_row = []
    for j in range(ny):
        runs = []
        i = 0
        while i < nx:
            if not covered[i, j]:
                i += 1
                continue
            k = i
            while k + 1 < nx and covered[k + 1, j]:
                k += 1
            runs.append((i, k))
            i = k + 1
        runs_by_row.append(runs)
    out = []
    open_runs: dict[tuple[int, int], int] = {}
    for j in range(ny + 1):
        current = set(runs_by_row[j]) if j < ny else set()
        for run, start in list(open_runs.items()):
            if run not in current:
                i0, i1 = run
                out.append(Box((xs[i0], ys[start]), (xs[i1 + 1], ys[j])))
                del open_runs[run]
        for run in runs_by_row[j] if j < ny else ():
            open_runs.setdefault(run, j)
    out.sort(key=lambda b: (b.lo[1], b.lo[0]))
    return tuple(out)


def _regularize(dim: int, sources: Sequence[Sequence[Box]], combine) -> tuple[Box, ...]:
    """Normalise ``combine(*membership)`` evaluated on the common cell grid."""
    all_boxes = [b for group in sources for b in group]
    if not all_boxes:
        return ()
    axes = [_snap_coords(c for b in all_boxes for c in (b.lo[k], b.hi[k])) for k in range(dim)]
    mids = [0.5 * (a[1:] + a[:-1]) for a in axes]
    if dim == 1:
        centers = mids[0][:, None]
        shape = (mids[0].size,)
    else:
        gx, gy = np.meshgrid(mids[0], mids[1], indexing="ij")
        centers = np.column_stack([gx.ravel(), gy.ravel()])
        shape = gx.shape
    masks = [_covers(group, centers) for group in sources]
    covered = combine(*masks).reshape(shape)
    return _cells_to_boxes(axes, covered)


@dataclass(frozen=True)
class BoxSet:
    """Finite union of boxes, stored as pairwise-disjoint normalised boxes.

    Build instances with :meth:`of`; the raw constructor assumes its boxes
    are already normalised.
    """

    boxes: tuple[Box, ...]
    closed: bool
    dim: int

    @classmethod
    def of(cls, boxes: Iterable[Box | Sequence], closed: bool, dim: int | None = None) -> BoxSet:
        bs = [b if isinstance(b, Box) else Box.from_json(b) for b in boxes]
        if dim is None:
            if not bs:
                raise ValueError("dimension is required for an empty box set")
            dim = bs[0].dim
        if dim not in (1, 2):
            raise ValueError(f"only dimensions 1 and 2 are supported, got {dim}")
        if any(b.dim != dim for b in bs):
            raise ValueError("all boxes must share the set's dimension")
        return cls(_regularize(dim, [bs], lambda m: m), bool(closed), dim)

    @classmethod
    def interval(cls, a: float, b: float, closed: bool = True) -> BoxSet:
        return cls.of([Box.interval(a, b)], closed, 1)

    @classmethod
    def empty(cls, dim: int = 1, closed: bool = True) -> BoxSet:
        return cls((), closed, dim)

    @property
    def is_empty(self) -> bool:
        return not self.boxes

    @property
    def volume(self) -> float:
        return math.fsum(b.volume for b in self.boxes)

    def bounding_box(self) -> Box:
        if self.is_empty:
            raise ValueError("empty set has no bounding box")
        lo = tuple(min(b.lo[k] for b in self.boxes) for k in range(self.dim))
        hi = tuple(max(b.hi[k] for b in self.boxes) for k in range(self.dim))
        return Box(lo, hi)

    def with_topology(self, closed: bool) -> BoxSet:
        """Closure (``closed=True``) or interior of the same regular set."""
        return BoxSet(self.boxes, closed, self.dim)

    def closure(self) -> BoxSet:
        return self.with_topology(True)

    def interior(self) -> BoxSet:
        return self.with_topology(False)

    def _check(self, other: BoxSet):
        if self.dim != other.dim:
            raise ValueError(f"dimension mismatch: {self.dim} vs {other.dim}")

    def union(self, other: BoxSet) -> BoxSet:
        self._check(other)
        if self.closed != other.closed:
            raise ValueError("union of an open and a closed box set is not supported")
        boxes = _regularize(self.dim, [self.boxes, other.boxes], np.logical_or)
        return BoxSet(boxes, self.closed, self.dim)

    def intersect(self, other: BoxSet) -> BoxSet:
        """Intersection; the result keeps this set's topology."""
        self._check(other)
        boxes = _regularize(self.dim, [self.boxes, other.boxes], np.logical_and)
        return BoxSet(boxes, self.closed, self.dim)

    def difference(self, other: BoxSet) -> BoxSet:
        """``self`` minus ``other``; closed minus open is closed, open minus closed is open."""
        self._check(other)
        boxes = _regularize(self.dim, [self.boxes, other.boxes], lambda a, b: a & ~b)
        return BoxSet(boxes, self.closed, self.dim)

    __or__ = union
    __and__ = intersect
    __sub__ = difference

    def inflate(self, delta: float) -> BoxSet:
        """Union of every box grown by ``delta`` on all sides (open result)."""
        if delta <= 0:
            raise ValueError("inflation margin must be positive")
        return BoxSet.of([b.inflate(delta) for b in self.boxes], False, self.dim)

    def contains(self, x: Sequence[float]) -> bool:
        x = np.atleast_1d(np.asarray(x, dtype=float))
        if x.size != self.dim:
            raise ValueError(f"point of dimension {x.size} tested against {self.dim}-d set")
        if self.closed:
            return any(b.contains(x, True) for b in self.boxes)
        # interior of the union of closed boxes: every orthant at x is covered
        for signs in itertools.product((-1, 1), repeat=self.dim):
            hit = False
            for b in self.boxes:
                ok = True
                for k, s in enumerate(signs):
                    a, c, v = b.lo[k], b.hi[k], x[k]
                    if not ((a <= v < c) if s > 0 else (a < v <= c)):
                        ok = False
                        break
                if ok:
                    hit = True
                    break
            if not hit:
                return False
        return True

    def contains_points(self, pts: np.ndarray) -> np.ndarray:
        pts = np.asarray(pts, dtype=float).reshape(-1, self.dim)
        return np.array([self.contains(p) for p in pts], dtype=bool)

    def distance(self, x: Sequence[float]) -> float:
        """Euclidean distance from ``x`` to the closure of the set."""
        if self.is_empty:
            return math.inf
        x = np.atleast_1d(np.asarray(x, dtype=float))
        if x.size != self.dim:
            raise ValueError(f"point of dimension {x.size} tested against {self.dim}-d set")
        return min(b.distance_to_point(x) for b in self.boxes)

    def distance_to_set(self, other: BoxSet) -> float:
        self._check(other)
        if self.is_empty or other.is_empty:
            return math.inf
        return min(a.distance_to_box(b) for a in self.boxes for b in other.boxes)

    def complement_within(self, box: Box) -> BoxSet:
        """Closed complement of this set inside ``box``."""
        return BoxSet.of([box], True, self.dim).difference(self)

    def separation(self, outer: BoxSet) -> float:
        """Distance from this set to the complement of ``outer``.

        Positive iff the closure of ``self`` lies inside the open set ``outer``.
        """
        self._check(outer)
        if self.is_empty:
            return math.inf
        if outer.is_empty:
            return 0.0
        hull = outer.bounding_box()
        span = max(hull.widths) + max(self.bounding_box().widths) + 1.0
        big = Box(tuple(min(a, c) - span for a, c in zip(hull.lo, self.bounding_box().lo)),
                  tuple(max(b, d) + span for b, d in zip(hull.hi, self.bounding_box().hi)))
        comp = outer.with_topology(False).complement_within(big)
        d = self.distance_to_set(comp)
        return 0.0 if d <= 0 else d

    def is_subset(self, other: BoxSet) -> bool:
        """Measure-theoretic inclusion (volume of ``self - other`` vanishes)."""
        self._check(other)
        return self.with_topology(True).difference(other).volume <= VOLUME_SLACK * max(1.0, self.volume)

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        """``n`` uniform points from the set (rows are points)."""
        if self.is_empty:
            raise ValueError("cannot sample from an empty set")
        vols = np.array([b.volume for b in self.boxes])
        which = rng.choice(len(self.boxes), size=n, p=vols / vols.sum())
        lo = np.array([b.lo for b in self.boxes])[which]
        hi = np.array([b.hi for b in self.boxes])[which]
        return lo + rng.random((n, self.dim)) * (hi - lo)

    def to_json(self) -> dict:
        return {"dim": self.dim, "closed": self.closed, "boxes": [b.to_json() for b in self.boxes]}

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)

    @classmethod
    def from_json(cls, data: dict) -> BoxSet:
        for key in ("dim", "closed", "boxes"):
            if key not in data:
                raise ValueError(f"box set description is missing field {key!r}")
        return cls.of([Box.from_json(b) for b in data["boxes"]], bool(data["closed"]), int(data["dim"]))

    def __repr__(self):
        kind = "closed" if self.closed else "open"
        return f"BoxSet({kind}, dim={self.dim}, boxes={[b.to_json() for b in self.boxes]})"


def volume(s: BoxSet) -> float:
    return s.volume


def set_ops(a: BoxSet, b: BoxSet, op: str) -> BoxSet:
    ops = {"union": a.union, "intersect": a.intersect, "difference": a.difference}
    if op not in ops:
        raise ValueError(f"unknown set operation {op!r}")
    return ops[op](b)


def point_membership(x, s: BoxSet) -> bool:
    return s.contains(x)


def dist_to_set(x, s: BoxSet) -> float:
    return s.distance(x)


def _surface_constant(box: Box) -> float:
    # inflating by delta <= 1 adds at most c * delta of volume
    if box.dim == 1:
        return 2.0
    w, h = box.widths
    return 2.0 * (w + h + 2.0)


def cover_margins(k: BoxSet, n_max: int) -> list[float]:
    """Inflation margins used by :func:`nested_open_covers`."""
    count = len(k.boxes)
    c = max(_surface_constant(b) for b in k.boxes)
    gaps = [a.distance_to_box(b) for a, b in itertools.combinations(k.boxes, 2)]
    gaps = [g for g in gaps if g > 0]
    base = 1.0 / (4.0 * c * count)
    gamma = min([0.5 * min(gaps)] if gaps else [], default=base)
    # harmonic decay keeps margins well above float resolution for large n
    scale = min(gamma, base)
    return [scale / n for n in range(1, n_max + 1)]


def nested_open_covers(k: BoxSet, n_max: int) -> list[BoxSet]:
    """Open sets ``U_1 ⊃ U_2 ⊃ ...`` squeezing onto the compact set ``k``.

    Every ``U_n`` contains ``k``, has volume below ``|k| + 1/n`` and the
    closure of ``U_{n+1}`` sits inside ``U_n``.
    """
    if k.is_empty:
        raise ValueError("nested covers need a nonempty compact set")
    if not k.closed:
        raise ValueError("nested covers need a closed set")
    if n_max < 1:
        raise ValueError("n_max must be at least 1")
    covers = [k.inflate(d) for d in cover_margins(k, n_max)]
    vk = k.volume
    for n, u in enumerate(covers, start=1):
        assert k.separation(u) > 0
        assert u.volume < vk + 1.0 / n - VOLUME_SLACK
        if n > 1:
            prev = covers[n - 2]
            assert u.closure().separation(prev) > 0
            assert u.volume < prev.volume
    return covers
