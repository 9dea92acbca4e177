"""Winding obstruction for semiconjugacies of annulus coverings.

When a semiconjugacy with z -> z^d exists, lifts of multiplied loops
through iterates cannot wind arbitrarily: with M the deviation bound of
the semiconjugacy lift on a compact band, every admissible lift winds at
most 2M+1 times across the reference connector.  The scanner measures
windings directly; the growth table certifies, at the bookkeeping level
of lifted endpoint heights, a family of glued coverings whose windings
grow without bound, so no single constant can work for them.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .annulus import AnnulusMapLift
from .errors import BranchAmbiguity, EndpointOutsideK, FiberNotMonotone, OutOfDomain
from .semiconj2d import BandField2D


@dataclass(frozen=True)
class FiberLoop:
    """Simple closed loop t -> (x, angle_0 + t), t in [0,1], in one fiber."""

    x: float
    base_angle: float = 0.0


@dataclass
class WindingRecord:
    n: int
    j: int
    start: tuple[float, float]
    end_height: float
    winding: int
    ambiguous_endpoint: bool = False
    path: tuple | None = None          # (ts, heights) when requested

    @property
    def height_gap(self) -> float:
        return abs(self.end_height - self.start[1])


@dataclass(eq=False)
class WindingReport:
    band: tuple[float, float]
    loop: FiberLoop
    records: list[WindingRecord]
    deviation_bound: float | None = None
    meta: dict = field(default_factory=dict)

    @property
    def max_winding(self) -> int:
        return max((r.winding for r in self.records), default=0)

    def max_per_n(self) -> dict[int, int]:
        out: dict[int, int] = {}
        for r in self.records:
            out[r.n] = max(out.get(r.n, 0), r.winding)
        return out

    @property
    def implied_bound(self) -> float | None:
        return None if self.deviation_bound is None else 2.0 * self.deviation_bound + 1.0

    @property
    def satisfied(self) -> bool | None:
        if self.implied_bound is None:
            return None
        return self.max_winding <= self.implied_bound


def _composite_fiber(m: AnnulusMapLift, x_start: float, n: int):
    """Chain of base points and the composed fiber lift over x_start."""
    xs_chain = [float(x_start)]
    for _ in range(n - 1):
        nxt = float(np.asarray(m.base(xs_chain[-1])))
        if not 0.0 < nxt < 1.0:
            raise OutOfDomain(f"base orbit left (0,1) at {nxt}")
        xs_chain.append(nxt)

    def forward(y):
        out = np.asarray(y, dtype=float)
        for xc in xs_chain:
            out = np.asarray(m.fiber(np.full_like(out, xc), out))
        return out

    def inverse(targets):
        t = np.asarray(targets, dtype=float)
        for xc in reversed(xs_chain):
            t = m.fiber.inverse(np.full_like(t, xc), t)
        return t

    return xs_chain, forward, inverse


def lift_loop_winding(m: AnnulusMapLift, loop: FiberLoop, n: int, j: int,
                      start: tuple[float, float], band: tuple[float, float],
                      tol: float = 1e-9, path_samples: int = 0) -> WindingRecord:
    """Lift the j-fold loop through n iterates from a preimage start point.

    For skew products the lift is the unique monotone fiber solution
    beta(t) with G_n(beta(t)) = G_n(start) + j*t, so no branch continuation
    ambiguity arises.  The winding against the reference connector at
    angle 0 is the count of integer heights crossed, reported as the floor
    difference of the endpoint heights.
    """
    lo_slope, _ = m.fiber.slope_range(np.array([start[0]]))
    if lo_slope <= 0:
        raise FiberNotMonotone("loop lifting needs a monotone fiber")
    a, b = band
    if not a - 1e-12 <= start[0] <= b + 1e-12:
        raise EndpointOutsideK(f"start {start} outside band [{a}, {b}]")
    if j < 1:
        raise ValueError("loop multiplicity j must be >= 1")
    xs_chain, forward, inverse = _composite_fiber(m, start[0], n)
    base_img = float(np.asarray(m.base(xs_chain[-1])))
    if abs(base_img - loop.x) > 1e-6:
        raise BranchAmbiguity(
            f"start is not an n-preimage of the loop fiber ({base_img} vs {loop.x})")
    y0 = float(start[1])
    g0 = float(forward(y0))
    end = float(inverse(g0 + j))
    winding = abs(int(np.floor(end)) - int(np.floor(y0)))
    amb = min(abs(end - round(end)), abs(y0 - round(y0))) < 10 * tol
    path = None
    if path_samples:
        ts = np.linspace(0.0, 1.0, path_samples)
        path = (ts, inverse(g0 + j * ts))
    return WindingRecord(n, j, (float(start[0]), y0), end, winding, amb, path)


def star_condition_scan(m: AnnulusMapLift, band: tuple[float, float], n_max: int,
                        base_angle: float = 0.25, x_anchor: float | None = None,
                        h_field: BandField2D | None = None,
                        tol: float = 1e-9) -> WindingReport:
    """Measure windings over n <= n_max, systematic j, all preimage branches.

    For each n the loop is taken in the fiber over the n-th base image of
    the anchor column, so every lift endpoint lies exactly on the anchor
    column inside the band.  j ranges over {1, ceil(d^(n-1)/2), d^(n-1)}.
    When a semiconjugacy field is supplied, its deviation bound M on the
    band is recorded together with the implied winding bound 2M+1.
    """
    a, b = band
    if x_anchor is None:
        x_anchor = 0.5 * (a + b)
    d = abs(m.degree)
    records: list[WindingRecord] = []
    for n in range(1, n_max + 1):
        xs_chain, forward, inverse = _composite_fiber(m, x_anchor, n)
        loop_x = float(np.asarray(m.base(xs_chain[-1])))
        g0 = float(forward(np.array([0.0]))[0])
        dn = d ** n
        # all d^n fiber preimages of the loop base point over the anchor;
        # any d^n consecutive target offsets cover the branches mod 1
        first = np.ceil(g0 - base_angle) + np.arange(dn)
        starts = inverse(base_angle + first)
        starts = np.sort(starts - np.floor(starts))
        js = sorted({1, max(1, int(np.ceil(d ** (n - 1) / 2))), max(1, d ** (n - 1))})
        loop = FiberLoop(loop_x, base_angle)
        for j in js:
            for y0 in starts:
                records.append(lift_loop_winding(
                    m, loop, n, j, (x_anchor, float(y0)), band, tol))
    report = WindingReport(band, FiberLoop(x_anchor, base_angle), records)
    if h_field is not None:
        report.deviation_bound = measure_deviation_bound(h_field, band)
    report.meta.update({"n_max": n_max, "x_anchor": x_anchor})
    return report


def measure_deviation_bound(h: BandField2D, band: tuple[float, float],
                            nx: int = 64, ny: int = 128) -> float:
    """Sup |H(x,y) - y| over the band, sampled on a grid."""
    a = max(band[0], h.band[0])
    b = min(band[1], h.band[1])
    if b <= a:
        raise OutOfDomain(f"band {band} does not meet field band {h.band}")
    xg, yg = np.meshgrid(np.linspace(a, b, nx), np.linspace(0.0, 1.0, ny),
                         indexing="ij")
    return float(np.max(np.abs(h(xg, yg) - h.orientation * yg)))


# ---------------------------------------------------------------------------
# unbounded-winding family: endpoint-height bookkeeping
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BandModel:
    """Lifted endpoint heights for the n-th glued covering of the family.

    The construction doubles angles band-to-band and re-glues one band so
    that an arc of winding n and a disjoint arc near angle 1/2 share an
    image point; tracking only the lifted heights of the relevant points
    is enough to bound the winding from below.
    """

    n: int
    radii: tuple[float, ...]              # a_0 < a_1 < ... inside (0,1)
    alpha_start_height: float             # lift of the spanning arc starts here
    alpha_end_height: float               # ... and ends at height n
    beta_prime_angle: float               # disjoint return arc sits at z = -1
    x_prime_height: float                 # marked point on the alpha lift
    y_prime_height: float                 # marked point on the alpha' lift
    j_max: int                            # loop multiplicities searched

    @property
    def winding_lower_bound(self) -> int:
        return self.n - 1

    def verify(self) -> None:
        if not all(0.0 < r < 1.0 for r in self.radii):
            raise ValueError("band radii must lie in (0,1)")
        if any(r2 <= r1 for r1, r2 in zip(self.radii, self.radii[1:])):
            raise ValueError("band radii must increase")
        if self.alpha_end_height != float(self.n):
            raise ValueError("the spanning arc lift must end at height n")
        if not self.x_prime_height < 0.5:
            raise ValueError("marked point on alpha must sit below height 1/2")
        if not self.y_prime_height > self.n:
            raise ValueError("marked point on alpha' must sit above height n")
        if not self.y_prime_height - self.x_prime_height > self.n - 1:
            raise ValueError("height separation must exceed n-1")
        if self.j_max != 2 ** (self.n - 1):
            raise ValueError("multiplicity range must be 2^(n-1)")


def band_model(n: int) -> BandModel:
    """The n-th member of the glued family, with verified invariants."""
    if n < 2:
        raise ValueError("band models start at n = 2")
    radii = tuple((k + 1) / (n + 3) for k in range(n + 2))
    t = 0.5 / 2 ** (n - 1)        # start angle of the chosen preimage of beta'
    model = BandModel(
        n=n,
        radii=radii,
        alpha_start_height=0.0,
        alpha_end_height=float(n),
        beta_prime_angle=0.5,
        x_prime_height=0.0,       # the start of the alpha lift already qualifies
        y_prime_height=float(n) + t,
        j_max=2 ** (n - 1),
    )
    model.verify()
    return model


def counterexample_growth_table(n_max: int) -> list[dict]:
    """Certified winding lower bounds n-1 for n = 2..n_max.

    Pure bookkeeping over the glued-family models: each row records the
    verified endpoint heights and the resulting lower bound on any
    would-be winding constant for the compact band of the first annulus.
    """
    if n_max < 2:
        raise ValueError("n_max must be at least 2")
    rows = []
    for n in range(2, n_max + 1):
        model = band_model(n)
        rows.append({
            "n": n,
            "lower_bound": model.winding_lower_bound,
            "x_prime_height": model.x_prime_height,
            "y_prime_height": model.y_prime_height,
            "height_separation": model.y_prime_height - model.x_prime_height,
            "j_max": model.j_max,
            "radii": list(model.radii),
            "invariants_verified": True,
        })
    return rows
