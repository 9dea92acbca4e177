"""Connector curves and the repeller route to a semiconjugacy.

Connectors here are graphs x -> y(x) in lifted coordinates over a
sub-interval of (0,1); a graph connector is always inessential, so the
constructions below stay in the trivial class.  Boundary accumulation is
asserted only up to truncation margins.

For a free connector of a fiberwise-expanding skew product, nested
preimage components converge geometrically to the invariant repelling
connectors; assigning roots of unity to the repellers and refining along
preimage curve families codes a semiconjugacy with z -> z^d.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .annulus import AnnulusMapLift
from .errors import (BranchCollision, ImageNotGraph, NoExpansion, NotFree,
                     NotMonotoneBase, OutOfDomain)
from .numerics import circle_dist, frac
from .semiconj2d import BandField2D


@dataclass(eq=False)
class ConnectorCurve:
    """Graph connector: lifted heights over increasing base samples.

    reaches_lower / reaches_upper record whether the curve extends to the
    truncation margins of (0,1); the idealized boundary accumulation is
    asserted only in that sense.
    """

    xs: np.ndarray
    heights: np.ndarray
    margin: float = 1e-3
    value: float | None = None          # lifted semiconjugacy value, when coded
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        self.xs = np.asarray(self.xs, dtype=float)
        self.heights = np.asarray(self.heights, dtype=float)
        if len(self.xs) < 2 or np.any(np.diff(self.xs) <= 0):
            raise ValueError("curve needs strictly increasing base samples")

    @property
    def x_range(self) -> tuple[float, float]:
        return float(self.xs[0]), float(self.xs[-1])

    @property
    def reaches_lower(self) -> bool:
        return self.xs[0] <= 2.0 * self.margin

    @property
    def reaches_upper(self) -> bool:
        return self.xs[-1] >= 1.0 - 2.0 * self.margin

    def height_at(self, x):
        x = np.asarray(x, dtype=float)
        if np.any(x < self.xs[0] - 1e-12) or np.any(x > self.xs[-1] + 1e-12):
            raise OutOfDomain(f"x outside curve range {self.x_range}")
        v = np.interp(x, self.xs, self.heights)
        return v if v.ndim else float(v)

    def translate(self, t: int) -> "ConnectorCurve":
        return ConnectorCurve(self.xs.copy(), self.heights + t, self.margin,
                              None if self.value is None else self.value + t,
                              dict(self.metadata))


def constant_connector(height: float, margin: float = 1e-3,
                       n: int = 1024) -> ConnectorCurve:
    """Horizontal connector at a fixed lifted height."""
    xs = np.linspace(margin, 1.0 - margin, n)
    return ConnectorCurve(xs, np.full(n, float(height)), margin)


def preimage_connectors(m: AnnulusMapLift, c: ConnectorCurve,
                        n_samples: int | None = None,
                        margin: float | None = None) -> list[ConnectorCurve]:
    """The |d| preimage curves of a graph connector, sorted by height.

    Branch k solves g_x(w) = c(base(x)) + offset + k; fiber monotonicity
    separates the branches, which are continuous in x.  The new curves are
    sampled at the base preimages of the parent's own nodes, so the
    recursion never interpolates the parent (curves steepening toward the
    boundary keep their geometric node refinement).
    """
    margin = c.margin if margin is None else margin
    lo_img = float(np.asarray(m.base(margin)))
    hi_img = float(np.asarray(m.base(1.0 - margin)))
    mask = (c.xs >= lo_img - 1e-15) & (c.xs <= hi_img + 1e-15)
    if mask.sum() < 2:
        raise OutOfDomain("preimage range is empty inside the margins")
    base_pts = c.xs[mask]
    targets = c.heights[mask]
    if n_samples is not None and len(base_pts) < n_samples:
        extra = np.linspace(base_pts[0], base_pts[-1], n_samples)
        targets = np.interp(extra, base_pts, targets)
        base_pts = extra
    xs = np.asarray(m.base.inverse(base_pts))
    keep = (xs >= margin - 1e-15) & (xs <= 1.0 - margin + 1e-15)
    if keep.sum() < 2:
        raise OutOfDomain("preimage range is empty inside the margins")
    xs, targets = xs[keep], targets[keep]
    anchor = float(np.asarray(m.fiber(xs[0], 0.0)))
    ad = abs(m.degree)
    if m.degree > 0:
        start = int(np.ceil(anchor - targets[0]))
    else:
        start = int(np.floor(anchor - targets[0])) - ad + 1
    curves = []
    for k in range(ad):
        w = m.fiber.inverse(xs, targets + (start + k))
        curves.append(ConnectorCurve(xs.copy(), w, margin,
                                     metadata={"offset": start + k}))
    curves.sort(key=lambda cv: float(np.mean(cv.heights)))
    gaps = [float(np.min(b.heights - a.heights))
            for a, b in zip(curves, curves[1:])]
    if gaps and min(gaps) <= 1e-9:
        raise BranchCollision(f"branch separation {min(gaps)} below resolution")
    return curves


def connector_image(m: AnnulusMapLift, c: ConnectorCurve) -> ConnectorCurve:
    """Image curve of a graph connector; requires a monotone base on its range."""
    bx = np.asarray(m.base(c.xs))
    if np.any(np.diff(bx) <= 0):
        raise ImageNotGraph("base not strictly increasing on the curve range")
    return ConnectorCurve(bx, np.asarray(m.fiber(c.xs, c.heights)), c.margin)


def is_free(m: AnnulusMapLift, c: ConnectorCurve, tol: float = 1e-6) -> bool:
    """True iff the image stays off the curve over the overlapping range.

    Distances are measured on the circle fiber (mod 1) at equal base
    positions; an empty overlap counts as free.
    """
    img = connector_image(m, c)
    lo = max(c.x_range[0], img.x_range[0])
    hi = min(c.x_range[1], img.x_range[1])
    if hi <= lo:
        return True
    xs = np.linspace(lo, hi, max(len(c.xs), 256))
    gap = circle_dist(img.height_at(xs), c.height_at(xs))
    return float(np.min(gap)) > tol


def invariant_connector_from_arc(m: AnnulusMapLift, p: tuple[float, float],
                                 n_back: int = 6, n_fwd: int = 10,
                                 samples_per_arc: int = 200,
                                 margin: float = 1e-3) -> ConnectorCurve:
    """Invariant connector built from an arc joining p to F(p).

    The base coordinate must strictly increase along the orbit of p.  The
    arc is iterated forward n_fwd times; backward pieces are inverse
    lifts, each anchored at the shared endpoint with the previous piece.
    Pieces are clipped at the margins; the invariance residual
    sup |F(C) - C| over the overlap is stored in metadata.
    """
    x_p, y_p = float(p[0]), float(p[1])
    fx, fy = m(x_p, y_p)
    if fx <= x_p + 1e-12:
        raise NotMonotoneBase(f"base must move {x_p} strictly right, got {fx}")
    ts = np.linspace(0.0, 1.0, samples_per_arc)
    pieces = [(x_p + (fx - x_p) * ts, y_p + (fy - y_p) * ts)]

    cur = pieces[0]
    for _ in range(n_fwd):
        nxt_x, nxt_y = m(cur[0], cur[1])
        if nxt_x[-1] >= 1.0 - margin:
            keep = nxt_x <= 1.0 - margin
            if keep.sum() >= 2:
                pieces.append((nxt_x[keep], nxt_y[keep]))
            break
        pieces.append((nxt_x, nxt_y))
        cur = (nxt_x, nxt_y)

    # backward inverse lifts; each new piece ends at the previous piece's
    # left endpoint, which is an exact preimage of that piece's right one
    prev_x, prev_y = pieces[0]
    lo_img = float(np.asarray(m.base(margin)))
    for _ in range(n_back):
        ax, ay = prev_x[0], prev_y[0]
        c_off = round(float(np.asarray(m.fiber(ax, ay))) - float(prev_y[-1]))
        invertible = prev_x >= lo_img + 1e-15   # preimages below the margin are dropped
        clipped = invertible.sum() < len(prev_x)
        if invertible.sum() < 2:
            break
        sx, sy = prev_x[invertible], prev_y[invertible]
        if clipped:                             # refine toward the cut
            sx_fine = np.linspace(lo_img * (1 + 1e-12), sx[-1], len(prev_x))
            sy = np.interp(sx_fine, sx, sy)
            sx = sx_fine
        bx = np.asarray(m.base.inverse(sx))
        w = m.fiber.inverse(bx, sy + c_off)
        pieces.insert(0, (bx, w))
        if clipped:
            break
        prev_x, prev_y = bx, w

    xs = np.concatenate([px for px, _ in pieces])
    ys = np.concatenate([py for _, py in pieces])
    order = np.argsort(xs)
    xs, ys = xs[order], ys[order]
    keep = np.concatenate(([True], np.diff(xs) > 1e-14))
    curve = ConnectorCurve(xs[keep], ys[keep], margin)

    sample = curve.xs[:: max(1, len(curve.xs) // 512)]
    ix, iy = m(sample, curve.height_at(sample))
    ok = (ix >= curve.xs[0]) & (ix <= curve.xs[-1])
    residual = float(np.max(np.abs(iy[ok] - curve.height_at(ix[ok])))) if ok.any() else np.inf
    curve.metadata.update({"invariance_residual": residual,
                           "pieces": len(pieces),
                           "boundary_accumulating": curve.reaches_lower and curve.reaches_upper})
    return curve


# ---------------------------------------------------------------------------
# repelling connectors
# ---------------------------------------------------------------------------

def _require_window_invariant(m: AnnulusMapLift, margin: float):
    xs = np.linspace(margin, 1.0 - margin, 64)
    bx = np.asarray(m.base(xs))
    if bx.min() < margin - 1e-12 or bx.max() > 1.0 - margin + 1e-12:
        raise OutOfDomain("base must keep the margin window inside itself "
                          "for the nesting construction")


def _check_expansion(m: AnnulusMapLift, margin: float) -> float:
    lo, _ = m.fiber.slope_range(np.linspace(margin, 1.0 - margin, 64))
    if lo <= 1.0 + 1e-9:
        raise NoExpansion(f"min fiber slope {lo} <= 1; refusing unconvergent nesting")
    return lo


def _pullback_in_gap(m: AnnulusMapLift, height_fn, lower: np.ndarray,
                     upper: np.ndarray, xs: np.ndarray, bx: np.ndarray) -> np.ndarray:
    """Unique preimage heights of a curve inside the gap (lower, upper).

    Consecutive preimage curves of a connector differ by one full period
    in the fiber image, so the branch offset is read off the boundary.
    """
    targets = height_fn(bx)
    if m.degree > 0:
        c = np.ceil(np.asarray(m.fiber(xs, lower)) - targets)
    else:
        c = np.ceil(np.asarray(m.fiber(xs, upper)) - targets)
    return m.fiber.inverse(xs, targets + c)


def repelling_connectors(m: AnnulusMapLift, c: ConnectorCurve, depth: int = 10,
                         n_samples: int = 1024, tol: float = 1e-6) -> list[ConnectorCurve]:
    """|d-1| repelling connectors from a free connector, to finite depth.

    For d > 1: the |d| preimage curves of the free connector cut the
    annulus into |d| gaps; every gap not holding the connector nests to a
    repeller under repeated preimage-in-gap refinement, contracting by at
    least the inverse fiber expansion per level.  For d < -1 one repeller
    is produced first and the construction is repeated on its preimages,
    with one extra preimage level intersected before nesting on the two
    regions adjacent to it.  Successive-depth sup gaps are recorded in
    metadata["depth_gaps"].
    """
    margin = c.margin
    _require_window_invariant(m, margin)
    lam = _check_expansion(m, margin)
    if not is_free(m, c, tol):
        raise NotFree("connector meets its image")
    if m.degree > 0:
        reps = _nest_positive(m, c, depth, n_samples)
    else:
        reps = _nest_negative(m, c, depth, n_samples)
    for r in reps:
        r.metadata["fiber_expansion"] = lam
    return reps


def _gap_structure(m: AnnulusMapLift, c: ConnectorCurve, n_samples: int):
    """Preimage curves on the margin window plus the index of the gap holding c."""
    margin = c.margin
    pre = preimage_connectors(m, c, n_samples=n_samples, margin=margin)
    lo = max([margin, c.xs[0]] + [cv.xs[0] for cv in pre])
    hi = min([1.0 - margin, c.xs[-1]] + [cv.xs[-1] for cv in pre])
    xs = np.linspace(lo, hi, n_samples)
    heights = [cv.height_at(xs) for cv in pre]
    cc = c.height_at(xs)
    shift = np.ceil(heights[0] - cc)
    u = cc + shift                                 # representative inside the stack
    stack = np.stack(heights + [heights[0] + 1.0])
    idx = np.sum(stack <= u[None, :], axis=0) - 1
    k0 = int(np.median(idx))
    return xs, heights, k0


def _nest_positive(m: AnnulusMapLift, c: ConnectorCurve, depth: int,
                   n_samples: int, skip_gap: int | None = None,
                   extra_refine: set[int] | None = None) -> list[ConnectorCurve]:
    xs, heights, k0 = _gap_structure(m, c, n_samples)
    if skip_gap is not None:
        k0 = skip_gap
    bx = np.asarray(m.base(xs))
    d = abs(m.degree)
    out = []
    for k in range(d):
        if k == k0:
            continue
        lower = heights[k]
        upper = heights[k + 1] if k + 1 < d else heights[0] + 1.0
        cur = 0.5 * (lower + upper)
        if extra_refine and k in extra_refine:
            lo_fn = lambda t: np.interp(t, xs, lower)
            up_fn = lambda t: np.interp(t, xs, upper)
            l_star = _pullback_in_gap(m, lo_fn, lower, upper, xs, bx)
            u_star = _pullback_in_gap(m, up_fn, lower, upper, xs, bx)
            strip_lo = np.maximum(lower, np.minimum(l_star, u_star))
            strip_hi = np.minimum(upper, np.maximum(l_star, u_star))
            cur = 0.5 * (strip_lo + strip_hi)
        gaps = []
        for _ in range(depth):
            fn = lambda t: np.interp(t, xs, cur)
            new = _pullback_in_gap(m, fn, lower, upper, xs, bx)
            gaps.append(float(np.max(np.abs(new - cur))))
            cur = new
        curve = ConnectorCurve(xs.copy(), cur, c.margin,
                               metadata={"gap_index": k, "depth": depth,
                                         "depth_gaps": gaps})
        out.append(curve)
    return out


def _nest_negative(m: AnnulusMapLift, c: ConnectorCurve, depth: int,
                   n_samples: int) -> list[ConnectorCurve]:
    stage1 = _nest_positive(m, c, depth, n_samples)
    c_prime = stage1[0]
    # c_prime is invariant, so it coincides with one of its own preimage
    # curves; its two neighboring gaps need the extra refinement level
    pre = preimage_connectors(m, c_prime, n_samples=n_samples, margin=c.margin)
    lo = max([c_prime.xs[0]] + [cv.xs[0] for cv in pre])
    hi = min([c_prime.xs[-1]] + [cv.xs[-1] for cv in pre])
    xs_cmp = np.linspace(lo, hi, 257)
    ref = c_prime.height_at(xs_cmp)
    dists = [float(np.min([np.max(np.abs(cv.height_at(xs_cmp) - ref - t))
                           for t in (-1, 0, 1)])) for cv in pre]
    j_self = int(np.argmin(dists))
    d0 = abs(m.degree)
    adjacent = {j_self % d0, (j_self - 1) % d0}
    nested = _nest_positive(m, c_prime, depth, n_samples, skip_gap=-1,
                            extra_refine=adjacent)
    return [c_prime] + nested


# ---------------------------------------------------------------------------
# coded semiconjugacy
# ---------------------------------------------------------------------------

def semiconjugacy_from_repellers(m: AnnulusMapLift, repellers: list[ConnectorCurve],
                                 depth: int = 8, band: tuple[float, float] | None = None,
                                 nx: int = 65, ny: int = 128) -> BandField2D:
    """Semiconjugacy field coded by repellers and their preimage families.

    The |d-1| repellers receive the (d-1)-st roots of unity; every
    preimage curve of a curve with lifted value v and branch offset c
    receives (v + c)/d.  Grid points take the midpoint of the value
    interval of their enclosing pair of curves, so the field residual is
    bounded by the circle length d^{-depth+1}.
    """
    d = m.degree
    seeds = []
    for j, r in enumerate(sorted(repellers, key=lambda cv: float(np.mean(cv.heights)))):
        v = j / (d - 1) if abs(d - 1) > 0 else 0.0
        v = v + round(float(np.mean(r.heights)) - v)      # align the lift branch
        cv = ConnectorCurve(r.xs.copy(), r.heights.copy(), r.margin, value=float(v))
        seeds.append(cv)
    return semiconjugacy_from_connectors(m, seeds, depth, band, nx, ny)


def semiconjugacy_from_connectors(m: AnnulusMapLift, seeds: list[ConnectorCurve],
                                  depth: int = 8, band: tuple[float, float] | None = None,
                                  nx: int = 65, ny: int = 128) -> BandField2D:
    """Recursive preimage coding seeded by curves with fixed lifted values.

    Seeds must satisfy h(f(seed)) = m_d(h(seed)) for their declared values
    (repellers with roots of unity, or an invariant connector with a fixed
    value).  Works for bases that move the window, at the cost of curve
    ranges shrinking with depth.
    """
    if any(s.value is None for s in seeds):
        raise ValueError("seed curves need declared lifted values")
    d = m.degree
    families: list[ConnectorCurve] = list(seeds)
    frontier = list(seeds)
    for _ in range(depth):
        new = []
        for cv in frontier:
            try:
                pres = preimage_connectors(m, cv)
            except OutOfDomain:
                continue
            for p in pres:
                p.value = (cv.value + p.metadata["offset"]) / d
                new.append(p)
        if not new:
            break
        families.extend(new)
        frontier = new

    if band is None:
        band = (max(cv.x_range[0] for cv in frontier),
                min(cv.x_range[1] for cv in frontier))
    xs = np.linspace(band[0], band[1], nx)
    ys = np.linspace(0.0, 1.0, ny + 1)
    values = np.empty((nx, ny + 1))
    for i, x in enumerate(xs):
        hs, vs = [], []
        for cv in families:
            if cv.xs[0] - 1e-12 <= x <= cv.xs[-1] + 1e-12:
                hs.append(float(cv.height_at(x)))
                vs.append(cv.value)
        hs = np.asarray(hs)
        vs = np.asarray(vs)
        if len(hs) == 0:
            raise OutOfDomain(f"no coding curves over x = {x}; lower the depth "
                              "or shrink the band")
        below = hs[None, :] + np.floor(ys[:, None] - hs[None, :])
        vals_b = vs[None, :] + np.floor(ys[:, None] - hs[None, :])
        pick_b = np.argmax(below, axis=1)
        pick_a = np.argmin(below + 1.0, axis=1)
        v_lo = vals_b[np.arange(len(ys)), pick_b]
        v_hi = vals_b[np.arange(len(ys)), pick_a] + 1.0
        values[i] = 0.5 * (v_lo + v_hi)
    values[:, -1] = values[:, 0] + 1.0

    field = BandField2D(band, xs, values, 1, d,
                        metadata={"depth": depth, "curves": len(families),
                                  "coding": "repeller-preimage"})
    # residual measured where the image stays in the band
    xg, yg = np.meshgrid(xs, ys[:-1], indexing="ij")
    fx, fy = m(xg, yg)
    ok = (fx >= band[0]) & (fx <= band[1])
    if ok.any():
        hv = field(np.clip(fx, band[0], band[1]), fy)
        res = np.abs(frac(hv - d * field(xg, yg) + 0.5) - 0.5)
        field.residual = float(np.max(res[ok]))
    field.deviation_bound = float(np.max(np.abs(values - ys[None, :])))
    return field
