"""Closed-form scalar functions of x with analytic bounds.

Exponents and weights (p, r, a, w) are described by a small grammar so that
suprema, infima and box integrals are exact rather than sampled:

    {"kind": "const", "v": 2}
    {"kind": "affine", "c0": 2, "c": [0.5]}                 c0 + c . x
    {"kind": "sin", "c": 2, "a": 1, "w": 1, "phase": 0, "axis": 0}
    {"kind": "piecewise", "pieces": [{"box": [0, 1], "v": 3}], "default": 0}
    {"kind": "reciprocal", "c": 3, "a": 1, "at": 0, "axis": 0}   c + a/|x - at|

Points are passed as arrays of shape (n,) in one dimension and (n, 2) in two.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .geometry import Box, BoxSet

KINDS = ("const", "affine", "sin", "piecewise", "reciprocal")


def coord(x: np.ndarray, axis: int) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.ndim <= 1:
        if axis != 0:
            raise ValueError("one-dimensional points only have axis 0")
        return x
    return x[:, axis]


def _sin_range(t0: float, t1: float) -> tuple[float, float]:
    """Exact (min, max) of sin on [t0, t1]."""
    lo = min(math.sin(t0), math.sin(t1))
    hi = max(math.sin(t0), math.sin(t1))
    if math.ceil((t0 - math.pi / 2) / (2 * math.pi)) <= math.floor((t1 - math.pi / 2) / (2 * math.pi)):
        hi = 1.0
    if math.ceil((t0 + math.pi / 2) / (2 * math.pi)) <= math.floor((t1 + math.pi / 2) / (2 * math.pi)):
        lo = -1.0
    return lo, hi


@dataclass(frozen=True)
class Descriptor:
    kind: str
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown descriptor kind {self.kind!r}; expected one of {KINDS}")
        p = dict(self.params)
        if self.kind == "const":
            p.setdefault("v", 0.0)
        elif self.kind == "affine":
            p.setdefault("c0", 0.0)
            p["c"] = list(p.get("c", [0.0]))
        elif self.kind == "sin":
            for key, val in (("c", 0.0), ("a", 1.0), ("w", 1.0), ("phase", 0.0), ("axis", 0)):
                p.setdefault(key, val)
        elif self.kind == "piecewise":
            pieces = []
            for piece in p.get("pieces", []):
                box = piece["box"] if isinstance(piece["box"], Box) else Box.from_json(piece["box"])
                pieces.append({"box": box, "v": float(piece["v"])})
            p["pieces"] = pieces
            p.setdefault("default", 0.0)
        elif self.kind == "reciprocal":
            for key, val in (("c", 0.0), ("a", 1.0), ("at", 0.0), ("axis", 0)):
                p.setdefault(key, val)
            if p["a"] < 0:
                raise ValueError("reciprocal descriptor needs a >= 0")
            p.setdefault("at_value", math.inf)
        object.__setattr__(self, "params", p)

    # construction helpers
    @classmethod
    def const(cls, v: float) -> Descriptor:
        return cls("const", {"v": float(v)})

    @classmethod
    def sin(cls, c: float, a: float = 1.0, w: float = 1.0, phase: float = 0.0, axis: int = 0) -> Descriptor:
        return cls("sin", {"c": c, "a": a, "w": w, "phase": phase, "axis": axis})

    @classmethod
    def piecewise(cls, pieces: list[tuple[Box, float]], default: float = 0.0) -> Descriptor:
        return cls("piecewise", {"pieces": [{"box": b, "v": v} for b, v in pieces], "default": default})

    @classmethod
    def reciprocal(cls, c: float, a: float, at: float, axis: int = 0, at_value: float = math.inf) -> Descriptor:
        return cls("reciprocal", {"c": c, "a": a, "at": at, "axis": axis, "at_value": at_value})

    # evaluation
    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        n = x.shape[0] if x.ndim else 1
        p = self.params
        k = self.kind
        if k == "const":
            return np.full(n, p["v"], dtype=float)
        if k == "affine":
            out = np.full(n, float(p["c0"]))
            for axis, ci in enumerate(p["c"]):
                if ci:
                    out = out + ci * coord(x, axis)
            return out
        if k == "sin":
            return p["c"] + p["a"] * np.sin(p["w"] * coord(x, p["axis"]) + p["phase"])
        if k == "piecewise":
            out = np.full(n, float(p["default"]))
            pts = x.reshape(n, -1)
            for piece in p["pieces"]:
                b = piece["box"]
                inside = np.all((pts >= np.array(b.lo)) & (pts < np.array(b.hi)), axis=1)
                out = np.where(inside, piece["v"], out)
            return out
        # reciprocal
        d = np.abs(coord(x, p["axis"]) - p["at"])
        with np.errstate(divide="ignore"):
            val = p["c"] + p["a"] / d
        return np.where(d == 0, p["at_value"], val)

    # analytic bounds
    def _range_box(self, box: Box) -> tuple[float, float]:
        p = self.params
        k = self.kind
        if k == "const":
            return p["v"], p["v"]
        if k == "affine":
            lo = hi = float(p["c0"])
            for axis, ci in enumerate(p["c"]):
                ends = (ci * box.lo[axis], ci * box.hi[axis])
                lo += min(ends)
                hi += max(ends)
            return lo, hi
        if k == "sin":
            ax = p["axis"]
            t0 = p["w"] * box.lo[ax] + p["phase"]
            t1 = p["w"] * box.hi[ax] + p["phase"]
            s_lo, s_hi = _sin_range(min(t0, t1), max(t0, t1))
            vals = (p["c"] + p["a"] * s_lo, p["c"] + p["a"] * s_hi)
            return min(vals), max(vals)
        if k == "piecewise":
            vals = []
            covered = 0.0
            for piece in p["pieces"]:
                inter = piece["box"].intersect(box)
                if inter is not None:
                    vals.append(piece["v"])
            cover = BoxSet.of([pc["box"] for pc in p["pieces"]], True, box.dim) if p["pieces"] else None
            if cover is not None:
                covered = BoxSet.of([box], True).intersect(cover).volume
            if covered < box.volume * (1 - 1e-12):
                vals.append(p["default"])
            return min(vals), max(vals)
        ax = p["axis"]
        a, b = box.lo[ax], box.hi[ax]
        at = p["at"]
        far = max(abs(a - at), abs(b - at))
        hi = math.inf if a <= at <= b else p["c"] + p["a"] / min(abs(a - at), abs(b - at))
        lo = p["c"] + p["a"] / far
        return lo, hi

    def sup(self, region: Box | BoxSet) -> float:
        boxes = region.boxes if isinstance(region, BoxSet) else (region,)
        if not boxes:
            return -math.inf
        return max(self._range_box(b)[1] for b in boxes)

    def inf(self, region: Box | BoxSet) -> float:
        boxes = region.boxes if isinstance(region, BoxSet) else (region,)
        if not boxes:
            return math.inf
        return min(self._range_box(b)[0] for b in boxes)

    @property
    def is_piecewise_constant(self) -> bool:
        if self.kind == "affine":
            return not any(self.params["c"])
        if self.kind == "sin":
            return self.params["a"] == 0 or self.params["w"] == 0
        return self.kind in ("const", "piecewise")

    def breaks(self, axis: int = 0) -> tuple[float, ...]:
        """Coordinates along ``axis`` where the descriptor is not smooth."""
        if self.kind == "piecewise":
            pts = set()
            for piece in self.params["pieces"]:
                pts.update((piece["box"].lo[axis], piece["box"].hi[axis]))
            return tuple(sorted(pts))
        if self.kind == "reciprocal" and self.params["axis"] == axis:
            return (self.params["at"],)
        return ()

    def integrate(self, box: Box) -> float:
        """Exact integral over ``box`` (may be +inf for reciprocal)."""
        p = self.params
        k = self.kind
        vol = box.volume
        if k == "const":
            return p["v"] * vol
        if k == "affine":
            return float(self(np.array([box.center]) if box.dim > 1 else np.array(box.center))[0]) * vol
        if k == "sin":
            ax = p["axis"]
            a, b = box.lo[ax], box.hi[ax]
            other = vol / (b - a)
            if p["w"] == 0:
                return (p["c"] + p["a"] * math.sin(p["phase"])) * vol
            osc = (math.cos(p["w"] * a + p["phase"]) - math.cos(p["w"] * b + p["phase"])) / p["w"]
            return p["c"] * vol + p["a"] * osc * other
        if k == "piecewise":
            total = 0.0
            covered = 0.0
            for piece in p["pieces"]:
                inter = piece["box"].intersect(box)
                if inter is not None:
                    total += piece["v"] * inter.volume
                    covered += inter.volume
            return total + p["default"] * (vol - covered)
        ax = p["axis"]
        a, b = box.lo[ax], box.hi[ax]
        other = vol / (b - a)
        at = p["at"]
        if p["a"] > 0 and a <= at <= b:
            return math.inf
        if a > at:
            log_part = math.log((b - at) / (a - at))
        else:
            log_part = math.log((at - a) / (at - b))
        return p["c"] * vol + p["a"] * log_part * other

    def support(self, domain: BoxSet) -> BoxSet:
        """Closed set outside which the descriptor vanishes (within ``domain``)."""
        if self.kind == "const":
            return domain.closure() if self.params["v"] != 0 else BoxSet.empty(domain.dim)
        if self.kind == "piecewise":
            nonzero = [pc["box"] for pc in self.params["pieces"] if pc["v"] != 0]
            if self.params["default"] != 0:
                zero = [pc["box"] for pc in self.params["pieces"] if pc["v"] == 0]
                if not zero:
                    return domain.closure()
                rest = domain.closure().difference(BoxSet.of(zero, False, domain.dim))
                return rest.union(BoxSet.of(nonzero, True, domain.dim)) if nonzero else rest
            if not nonzero:
                return BoxSet.empty(domain.dim)
            return BoxSet.of(nonzero, True, domain.dim).intersect(domain).closure()
        return domain.closure()

    def to_json(self) -> dict:
        out: dict[str, Any] = {"kind": self.kind}
        for key, val in self.params.items():
            if key == "pieces":
                out[key] = [{"box": pc["box"].to_json(), "v": pc["v"]} for pc in val]
            elif isinstance(val, float) and math.isinf(val):
                out[key] = "inf" if val > 0 else "-inf"
            else:
                out[key] = val
        return out

    @classmethod
    def from_json(cls, data: dict | float | int) -> Descriptor:
        if isinstance(data, (int, float)):
            return cls.const(float(data))
        if not isinstance(data, dict) or "kind" not in data:
            raise ValueError(f"descriptor needs a 'kind' field, got {data!r}")
        params = {k: v for k, v in data.items() if k != "kind"}
        for key, val in list(params.items()):
            if val in ("inf", "-inf"):
                params[key] = float(val)
        return cls(data["kind"], params)


def as_descriptor(d) -> Descriptor:
    if isinstance(d, Descriptor):
        return d
    return Descriptor.from_json(d)
