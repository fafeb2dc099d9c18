"""Grid estimate of the singular set Sing Φ.

A cell is flagged when, at the smallest radius of the schedule, the box
around the cell carries an infinite modular of t·χ for some t in the
schedule.  Φ is nondecreasing in t, so only the largest t needs testing,
and a window certified at the smallest radius lies inside every larger one.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .families import MOFunction
from .functions import PiecewiseFunction
from .geometry import Box, BoxSet
from .modular import Accuracy, DivergenceCertificate, check_certificate, dense_certificate, modular

SPOT_CHECKS = 16


@dataclass
class CellFlag:
    cell: Box
    evidence: str  # analytic_pole | growth | dense_interval
    certificate: DivergenceCertificate
    radius: float
    t: float
    exterior: bool = False


@dataclass
class SingularSetEstimate:
    window: BoxSet
    resolution: float
    cells: list[Box]
    flagged: list[CellFlag]
    measure_upper: float
    measure_verdict: str
    exterior_measure: float
    radii: tuple[float, ...]
    t_schedule: tuple[float, ...]
    points: tuple[float, ...] = ()
    spot_checks: list[tuple[float, bool]] = field(default_factory=list)
    inconclusive_cells: list[Box] = field(default_factory=list)

    @property
    def flagged_indices(self) -> set[int]:
        index = {c: i for i, c in enumerate(self.cells)}
        return {index[fl.cell] for fl in self.flagged}

    def summary(self) -> dict:
        return {"flagged": len(self.flagged), "measure_upper": self.measure_upper,
                "verdict": self.measure_verdict, "exterior_measure": self.exterior_measure,
                "points": list(self.points)}


def _grid_cells(window: BoxSet, res: float) -> list[Box]:
    cells = []
    for box in window.boxes:
        counts = [max(1, int(round((h - l) / res))) for l, h in zip(box.lo, box.hi)]
        edges = [np.round(np.linspace(l, h, c + 1), 12) for l, h, c in zip(box.lo, box.hi, counts)]
        if box.dim == 1:
            e = edges[0]
            cells.extend(Box((float(e[i]),), (float(e[i + 1]),)) for i in range(counts[0]))
        else:
            cells.extend(Box((float(edges[0][i]), float(edges[1][j])), (float(edges[0][i + 1]), float(edges[1][j + 1])))
                         for i in range(counts[0]) for j in range(counts[1]))
    return cells


def _probe(phi: MOFunction, box: Box, t: float, acc: Accuracy):
    """Modular of t·χ over box ∩ domain."""
    region = BoxSet.of([box], False).intersect(phi.domain)
    if region.is_empty:
        return None
    f = PiecewiseFunction.indicator(region.closure(), t)
    return modular(phi, f, region, acc)


def estimate_singular_set(phi: MOFunction, window: BoxSet, grid_res: float = 1e-2,
                          radii: tuple[float, ...] | None = None, t_schedule: tuple[float, ...] | None = None,
                          acc: Accuracy | None = None, seed: int = 0) -> SingularSetEstimate:
    """Flag grid cells that contain a singular point of Φ."""
    if grid_res <= 0:
        raise ValueError("grid resolution must be positive")
    radii = tuple(radii) if radii is not None else tuple(grid_res * 2.0 ** -j for j in range(9))
    t_schedule = tuple(t_schedule) if t_schedule is not None else tuple(2.0 ** i for i in range(9))
    if not radii or not t_schedule:
        raise ValueError("radius and t schedules must be nonempty")
    acc = acc or Accuracy(abs_err=1e-6, budget=200_000)
    r_min, t_max = min(radii), max(t_schedule)
    cells = _grid_cells(window, grid_res)
    dense = phi.dense_singular_interval
    dense_set = BoxSet.interval(dense[0], dense[1], closed=True) if dense is not None else None
    domain_closure = phi.domain.closure()
    flagged: list[CellFlag] = []
    inconclusive: list[Box] = []
    for cell in cells:
        probe_box = cell.inflate(r_min)
        cert = None
        evidence = None
        if dense_set is not None and phi.dim == 1 and cell.lo[0] <= dense[1] and cell.hi[0] >= dense[0]:
            inter = BoxSet.of([cell], True).intersect(dense_set)
            if not inter.is_empty:
                f = PiecewiseFunction.indicator(inter, t_max)
                cert = dense_certificate(f, inter, dense, 1.0)
                evidence = "dense_interval"
        if cert is None:
            res = _probe(phi, probe_box, t_max, acc)
            if res is None:
                continue
            if res.is_divergent:
                cert = res.certificate
                evidence = cert.kind if cert is not None else "analytic_pole"
            elif res.is_inconclusive:
                inconclusive.append(cell)
                continue
        if cert is None:
            continue
        if cert.window is not None:
            for r in radii:
                big = cell.inflate(r)
                assert big.lo[0] <= cert.window[0] and cert.window[1] <= big.hi[0] + 1e-12 or \
                    evidence == "dense_interval", "certificate window escapes a larger radius"
        exterior = BoxSet.of([cell], True).intersect(domain_closure).volume < cell.volume * (1 - 1e-12)
        flagged.append(CellFlag(cell, evidence, cert, r_min, t_max, exterior))

    spot = []
    dense_flags = [fl for fl in flagged if fl.evidence == "dense_interval"]
    if dense_flags:
        rng = np.random.default_rng(seed)
        pick = rng.choice(len(dense_flags), size=min(SPOT_CHECKS, len(dense_flags)), replace=False)
        for i in sorted(pick):
            fl = dense_flags[int(i)]
            res = _probe(phi, fl.cell.inflate(r_min), t_max, acc)
            ok = res is not None and res.is_divergent and check_certificate(res.certificate)
            spot.append((fl.cell.center[0], bool(ok)))

    cell_vol = window.volume / len(cells) if cells else 0.0
    interior_flags = [fl for fl in flagged if not fl.exterior]
    measure_upper = cell_vol * len(interior_flags)
    exterior_measure = cell_vol * (len(flagged) - len(interior_flags))
    points = sorted({fl.certificate.pole.location for fl in flagged
                     if fl.certificate.pole is not None and fl.evidence != "dense_interval"})
    verdict = _verdict(phi, flagged, r_min, inconclusive)
    return SingularSetEstimate(window, grid_res, cells, flagged, measure_upper, verdict, exterior_measure,
                               radii, t_schedule, tuple(points), spot, inconclusive)


def _verdict(phi: MOFunction, flagged: list[CellFlag], r_min: float, inconclusive: list[Box]) -> str:
    if inconclusive:
        return "undetermined"
    if not flagged:
        return "zero"
    isolated = [p.location for p in phi.poles]
    if phi.dense_singular_interval is None and phi.dim == 1 and isolated:
        near = all(any(fl.cell.lo[0] - r_min <= s <= fl.cell.hi[0] + r_min for s in isolated) for fl in flagged)
        if near:
            return "zero"
    analytic = [fl for fl in flagged if fl.evidence in ("analytic_pole", "dense_interval")
                and fl.certificate.rigorous]
    if len(analytic) >= 2 and (phi.dense_singular_interval is not None or len(analytic) > 2 * max(1, len(isolated))):
        return "positive"
    return "undetermined"


@dataclass
class ClosednessReport:
    violations: list[Box]
    checked: int

    @property
    def ok(self) -> bool:
        return not self.violations


def closedness_check(est: SingularSetEstimate, flagged: set[int] | None = None) -> ClosednessReport:
    """Cells whose neighbours are all flagged must be flagged themselves."""
    flagged = est.flagged_indices if flagged is None else set(flagged)
    cells = est.cells
    if not cells:
        return ClosednessReport([], 0)
    dim = cells[0].dim
    violations = []
    checked = 0
    if dim == 1:
        order = sorted(range(len(cells)), key=lambda i: cells[i].lo[0])
        for k in range(1, len(order) - 1):
            i = order[k]
            left, right = order[k - 1], order[k + 1]
            adjacent = (abs(cells[left].hi[0] - cells[i].lo[0]) < 1e-12 and abs(cells[i].hi[0] - cells[right].lo[0]) < 1e-12)
            if adjacent and left in flagged and right in flagged:
                checked += 1
                if i not in flagged:
                    violations.append(cells[i])
    else:
        index = {(round(c.lo[0], 10), round(c.lo[1], 10)): i for i, c in enumerate(cells)}
        for i, c in enumerate(cells):
            w, h = c.widths
            nbrs = [index.get((round(c.lo[0] + dx * w, 10), round(c.lo[1] + dy * h, 10)))
                    for dx, dy in ((-1, 0), (1, 0), (0, -1), (0, 1))]
            if all(n is not None and n in flagged for n in nbrs):
                checked += 1
                if i not in flagged:
                    violations.append(c)
    return ClosednessReport(violations, checked)


def local_integrability_probe(phi: MOFunction, x, r: float, t_schedule=None,
                              acc: Accuracy | None = None) -> tuple[str, DivergenceCertificate | None]:
    """locally_integrable | singular | undetermined for the ball of radius r at x."""
    t_schedule = tuple(t_schedule) if t_schedule is not None else tuple(2.0 ** i for i in range(9))
    acc = acc or Accuracy(abs_err=1e-6, budget=200_000)
    center = np.atleast_1d(np.asarray(x, dtype=float))
    box = Box.around(center, r)
    region = BoxSet.of([box], False).intersect(phi.domain)
    if region.is_empty:
        raise ValueError("ball does not meet the domain of Φ")
    verdicts = []
    for t in t_schedule:
        f = PiecewiseFunction.indicator(region.closure(), t)
        res = modular(phi, f, region, acc)
        if res.is_divergent:
            return "singular", res.certificate
        verdicts.append(res.verdict)
    if all(v == "finite" for v in verdicts):
        return "locally_integrable", None
    return "undetermined", None
