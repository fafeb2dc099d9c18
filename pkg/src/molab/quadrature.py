"""Vectorised adaptive Simpson quadrature on intervals and rectangles.

Each panel compares the 3-point Simpson rule with its two-panel composite;
the difference gives a Richardson error estimate and the corrected value
``S2 + (S2 - S1)/15``.  Panels are refined until their error falls below a
share of the tolerance proportional to their size.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

W3 = np.array([1.0, 4.0, 1.0]) / 6.0
W5 = np.array([1.0, 4.0, 2.0, 4.0, 1.0]) / 12.0


@dataclass
class QuadResult:
    value: float
    err: float
    evals: int
    status: str  # ok | budget | nonfinite | min_width
    suspect: float | tuple | None = None

    @property
    def ok(self) -> bool:
        return self.status == "ok"


def integrate_1d(g: Callable[[np.ndarray], np.ndarray], a: float, b: float, tol: float,
                 budget: int = 10**6, n0: int = 8, rel: float = 0.0) -> QuadResult:
    """Adaptive Simpson on [a, b] to absolute tolerance ``tol``.

    A panel is also accepted when its error is below ``rel`` times its value.
    """
    if not b > a:
        return QuadResult(0.0, 0.0, 0, "ok")
    x0 = np.linspace(a, b, 2 * n0 + 1)
    f0 = np.asarray(g(x0), dtype=float)
    evals = x0.size
    A, B = x0[0:-1:2], x0[2::2]
    FA, FM, FB = f0[0:-1:2], f0[1::2], f0[2::2]
    min_width = 1e-13 * max(1.0, abs(a), abs(b))
    TOL = np.full(A.size, tol / n0)
    values: list[float] = []
    err_total = 0.0
    status = "ok"
    worst = (-1.0, None)
    while A.size:
        H = B - A
        Q1, Q3 = A + 0.25 * H, A + 0.75 * H
        if evals + 2 * A.size > budget:
            status = "budget"
            values.append(float(np.sum(H * (FA + 4 * FM + FB) / 6.0)))
            j = int(np.argmin(H))
            worst = (math.inf, float(A[j] + 0.5 * H[j]))
            break
        fq = np.asarray(g(np.concatenate([Q1, Q3])), dtype=float)
        evals += 2 * A.size
        FQ1, FQ3 = fq[: A.size], fq[A.size:]
        S1 = H * (FA + 4 * FM + FB) / 6.0
        S2 = H * (FA + 4 * FQ1 + 2 * FM + 4 * FQ3 + FB) / 12.0
        finite = np.isfinite(S1) & np.isfinite(S2)
        with np.errstate(invalid="ignore"):
            err = np.where(finite, np.abs(S2 - S1) / 15.0, np.inf)
        tiny = H <= min_width
        with np.errstate(invalid="ignore"):
            local = np.maximum(TOL, rel * np.abs(S2))
        accept = (finite & (err <= local)) | tiny
        if np.any(accept):
            acc_fin = accept & finite
            values.append(float(np.sum(S2[acc_fin] + (S2[acc_fin] - S1[acc_fin]) / 15.0)))
            err_total += float(np.sum(err[acc_fin]))
            bad = accept & (~finite | (err > local))
            if np.any(bad):
                status = "nonfinite" if np.any(accept & ~finite) else "min_width"
                idx = np.flatnonzero(bad)
                j = idx[np.argmax(np.where(np.isfinite(err[idx]), err[idx], np.inf))]
                if err[j] >= worst[0]:
                    worst = (float(err[j]), float(A[j] + 0.5 * H[j]))
        keep = ~accept
        if not np.any(keep):
            break
        A, B, M = A[keep], B[keep], (A[keep] + B[keep]) * 0.5
        FA, FM, FB, FQ1, FQ3 = FA[keep], FM[keep], FB[keep], FQ1[keep], FQ3[keep]
        T = TOL[keep] * 0.5
        A, B = np.concatenate([A, M]), np.concatenate([M, B])
        FA, FM, FB = np.concatenate([FA, FM]), np.concatenate([FQ1, FQ3]), np.concatenate([FM, FB])
        TOL = np.concatenate([T, T])
    value = math.fsum(values)
    if status == "ok" and not math.isfinite(value):
        status = "nonfinite"
    return QuadResult(value, err_total, evals, status, worst[1])


def _grid5(ax, ay, bx, by):
    tx = np.linspace(0, 1, 5)
    X = ax[:, None] + (bx - ax)[:, None] * tx[None, :]
    Y = ay[:, None] + (by - ay)[:, None] * tx[None, :]
    PX = np.repeat(X[:, :, None], 5, axis=2)
    PY = np.repeat(Y[:, None, :], 5, axis=1)
    return PX, PY


def integrate_2d(g: Callable[[np.ndarray], np.ndarray], lo: tuple, hi: tuple, tol: float,
                 budget: int = 10**6, n0: int = 4, rel: float = 0.0) -> QuadResult:
    """Adaptive tensor Simpson on the rectangle lo..hi."""
    ex = np.linspace(lo[0], hi[0], n0 + 1)
    ey = np.linspace(lo[1], hi[1], n0 + 1)
    AX, AY = np.meshgrid(ex[:-1], ey[:-1], indexing="ij")
    BX, BY = np.meshgrid(ex[1:], ey[1:], indexing="ij")
    AX, AY, BX, BY = AX.ravel(), AY.ravel(), BX.ravel(), BY.ravel()
    TOL = np.full(AX.size, tol / AX.size)
    min_width = 1e-12 * max(1.0, *map(abs, lo), *map(abs, hi))
    values: list[float] = []
    err_total = 0.0
    evals = 0
    status = "ok"
    worst = (-1.0, None)
    w3 = np.outer(W3, W3)
    w5 = np.outer(W5, W5)
    while AX.size:
        n = AX.size
        if evals + 25 * n > budget:
            status = "budget"
            j = int(np.argmin((BX - AX) * (BY - AY)))
            worst = (math.inf, (float(0.5 * (AX[j] + BX[j])), float(0.5 * (AY[j] + BY[j]))))
            break
        PX, PY = _grid5(AX, AY, BX, BY)
        F = np.asarray(g(np.column_stack([PX.ravel(), PY.ravel()])), dtype=float).reshape(n, 5, 5)
        evals += 25 * n
        area = (BX - AX) * (BY - AY)
        S1 = area * np.einsum("nij,ij->n", F[:, ::2, ::2], w3)
        # composite of four sub-panels, each Simpson 3x3
        S2 = area * np.einsum("nij,ij->n", F, w5)
        finite = np.isfinite(S1) & np.isfinite(S2)
        with np.errstate(invalid="ignore"):
            err = np.where(finite, np.abs(S2 - S1) / 15.0, np.inf)
        tiny = np.minimum(BX - AX, BY - AY) <= min_width
        with np.errstate(invalid="ignore"):
            local = np.maximum(TOL, rel * np.abs(S2))
        accept = (finite & (err <= local)) | tiny
        if np.any(accept):
            acc_fin = accept & finite
            values.append(float(np.sum(S2[acc_fin] + (S2[acc_fin] - S1[acc_fin]) / 15.0)))
            err_total += float(np.sum(err[acc_fin]))
            bad = accept & (~finite | (err > local))
            if np.any(bad):
                status = "nonfinite" if np.any(accept & ~finite) else "min_width"
                j = int(np.flatnonzero(bad)[0])
                worst = (float(err[j]), (float(0.5 * (AX[j] + BX[j])), float(0.5 * (AY[j] + BY[j]))))
        keep = ~accept
        if not np.any(keep):
            break
        ax, ay, bx, by = AX[keep], AY[keep], BX[keep], BY[keep]
        mx, my = 0.5 * (ax + bx), 0.5 * (ay + by)
        T = TOL[keep] * 0.25
        AX = np.concatenate([ax, mx, ax, mx])
        AY = np.concatenate([ay, ay, my, my])
        BX = np.concatenate([mx, bx, mx, bx])
        BY = np.concatenate([my, my, by, by])
        TOL = np.concatenate([T, T, T, T])
    return QuadResult(math.fsum(values), err_total, evals, status, worst[1])
