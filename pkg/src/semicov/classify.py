"""Classification data for circle coverings and blow-up test-map synthesis.

A degree-d covering collapses, under its semiconjugacy h with z -> z^d,
a countable family of plateau intervals.  The classification data consists
of the degree, the h-images of the plateaus, and, for periodic plateaus,
a finite signature of the first-return interval map.  Two data sets are
compared up to the self-conjugacy group of z -> z^d.

Test maps are synthesized by the inverse construction: pick orbits of the
model map, open an interval at every orbit point (and at preimages up to a
truncation depth, with geometrically shrinking lengths), and insert a
prescribed interval homeomorphism at the first return of a periodic orbit.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .circle import LiftedCircleMap, make_lift
from .errors import Clash, NotACovering, NotInvariant, Overfull, ValidationError
from .numerics import bisect_brackets, circle_dist, frac, sign_changes
from .semiconj1d import (SelfConjugacy, SemiconjugacyField1D, self_conjugacies,
                         solve_semiconjugacy)

# Piecewise-linear insert homeomorphisms of [0,1]: knots -> values.
INSERT_KINDS: dict[str, tuple[tuple[float, ...], tuple[float, ...]]] = {
    "identity": ((0.0, 1.0), (0.0, 1.0)),
    # interior fixed point at 1/2, attracting
    "north_south": ((0.0, 0.25, 0.5, 0.75, 1.0), (0.0, 0.4, 0.5, 0.6, 1.0)),
    # interior fixed point at 1/2, repelling
    "south_north": ((0.0, 0.25, 0.5, 0.75, 1.0), (0.0, 0.1, 0.5, 0.9, 1.0)),
    # no interior fixed point, pushes toward the right endpoint
    "advance": ((0.0, 0.5, 1.0), (0.0, 0.7, 1.0)),
    # no interior fixed point, pushes toward the left endpoint
    "retreat": ((0.0, 0.5, 1.0), (0.0, 0.3, 1.0)),
}


# ---------------------------------------------------------------------------
# point classification under the model map
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PointClass:
    kind: str                   # "periodic" | "preperiodic" | "wandering"
    period: int | None = None
    preperiod: int | None = None
    depth_limited: bool = False


def classify_circle_point(z, d: int, max_period: int = 16, max_depth: int = 24,
                          tol: float = 1e-9) -> PointClass:
    """Orbit type of the angle z under multiplication by d (mod 1).

    Exact when z is a Fraction; for floats the iteration amplifies input
    error by |d| per step, so keep max_period moderate or pre-snap the
    angle with snap_structured_angle.
    """
    exact = isinstance(z, Fraction)

    def step(a):
        return (d * a) % 1 if exact else frac(d * a)

    def is_per(a):
        w = a
        for n in range(1, max_period + 1):
            w = step(w)
            if (w == a) if exact else (circle_dist(w, a) <= tol):
                return n
        return None

    n = is_per(z)
    if n is not None:
        return PointClass("periodic", period=n)
    w = z
    for m in range(1, max_depth + 1):
        w = step(w)
        n = is_per(w)
        if n is not None:
            return PointClass("preperiodic", period=n, preperiod=m)
    return PointClass("wandering", depth_limited=True)


def snap_structured_angle(theta: float, d: int, angle_tol: float,
                          max_period: int = 16, max_depth: int = 24) -> Fraction | None:
    """Nearest angle of the form k / (|d|^m * |d^n - 1|) within angle_tol.

    These are exactly the angles with eventually-periodic orbits under
    multiplication by d.  Denominators above 0.2/angle_tol are skipped
    (their spacing is below the measurement resolution); among the rest
    the smallest error wins, ties going to the smaller denominator.
    """
    q_max = int(0.1 / angle_tol)
    best: Fraction | None = None
    best_err = angle_tol
    best_q = None
    for n in range(1, max_period + 1):
        q0 = abs(d ** n - 1)
        for m in range(0, max_depth + 1):
            q = q0 * abs(d) ** m
            if q > q_max:
                break
            k = round(theta * q)
            err = abs(theta - k / q)
            if err < best_err or (err == best_err and best_q is not None and q < best_q):
                best = Fraction(k, q) % 1
                best_err = err
                best_q = q
    return best


# ---------------------------------------------------------------------------
# plateau extraction
# ---------------------------------------------------------------------------

def plateau_set(h: SemiconjugacyField1D, plateau_tol: float | None = None
                ) -> list[tuple[float, float]]:
    """Maximal intervals of >= 2 grid cells on which H varies <= plateau_tol.

    Requires a monotone field (covering source).  Intervals are disjoint
    and sorted; a plateau straddling the 0/1 seam is returned with its
    right endpoint > 1.
    """
    n = h.grid
    if plateau_tol is None:
        plateau_tol = 2.0 / n
    s = h.orientation * h.samples
    if np.any(np.diff(s) < -1e-12):
        raise ValueError("plateau detection needs a monotone field")
    xs = np.linspace(0.0, 1.0, n + 1)
    out: list[tuple[float, float]] = []
    i = 0
    while i <= n - 2:
        # largest j with strict variation s[j] - s[i] < plateau_tol
        j = int(np.searchsorted(s, s[i] + plateau_tol, side="left")) - 1
        if j >= i + 2:
            out.append((xs[i], xs[j]))
            i = j + 1
        else:
            i += 1
    # merge satellites: windows split by the greedy scan across what is one
    # flat region at resolution
    merged: list[tuple[float, float]] = []
    for a, b in out:
        if merged and a - merged[-1][1] <= 2.5 / n:
            merged[-1] = (merged[-1][0], b)
        else:
            merged.append((a, b))
    out = merged
    if len(out) >= 2:
        (a0, b0), (a1, b1) = out[0], out[-1]
        touches = a0 <= 1.0 / n and b1 >= 1.0 - 1.5 / n
        if touches and (s[int(round(b0 * n))] + 1.0 - s[int(round(a1 * n))]) <= plateau_tol:
            out = out[1:-1] + [(a1, b0 + 1.0)]
    return out


# ---------------------------------------------------------------------------
# interval signatures
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class IntervalSignature:
    """Finite invariant of the first-return map on a periodic plateau.

    fixed_point_count counts all fixed points on the closed interval
    (endpoints included); sign_pattern holds the signs of F^n - id on the
    count+1 open segments cut by those fixed points, including one
    flanking segment on each side of the interval.  identity_like marks
    return maps within tolerance of the identity; unresolved (count None,
    not identity_like) marks intervals the grid could not resolve.
    """

    orientation: int
    fixed_point_count: int | None
    sign_pattern: tuple[int, ...] | None
    endpoint_behavior: tuple[str, str] | None = None
    identity_like: bool = False

    @classmethod
    def identity_class(cls, orientation: int = 1) -> "IntervalSignature":
        return cls(orientation, None, None, None, identity_like=True)

    @property
    def resolved(self) -> bool:
        return self.identity_like or self.fixed_point_count is not None

    def matches(self, other: "IntervalSignature") -> str:
        """'match' / 'mismatch' / 'uncertain', up to interval reversal."""
        if not self.resolved or not other.resolved:
            return "uncertain"
        if self.identity_like or other.identity_like:
            return "match" if self.identity_like == other.identity_like else "mismatch"
        if self.orientation != other.orientation:
            return "mismatch"
        if self.fixed_point_count != other.fixed_point_count:
            return "mismatch"
        p, q = self.sign_pattern, other.sign_pattern
        reversed_neg = tuple(-s for s in reversed(q))
        return "match" if (p == q or p == reversed_neg) else "mismatch"


def interval_signature(m: LiftedCircleMap, interval: tuple[float, float],
                       period: int, tol: float = 1e-9) -> IntervalSignature:
    """Signature of F^period restricted to a period-invariant interval.

    Fixed points are located by sign-change bisection on a widened window;
    endpoints fixed only tangentially appear as dips of |F^p - id| within
    the grid's composition bias and are recovered from those dips.  When
    that bias reaches the scale of the return map's own displacement the
    signature is reported unresolved rather than guessed.
    """
    a, b = float(interval[0]), float(interval[1])
    width = b - a
    if not 0.0 < width < 1.0:
        raise ValueError(f"bad interval {interval}")
    cell = 1.0 / m.grid
    orientation = 1 if (m.degree > 0 or period % 2 == 0) else -1

    mid = 0.5 * (a + b)
    delta = m.iterate(mid, period) - mid
    level = round(delta)
    if abs(delta - level) > max(1e-6, 0.5 * width):
        raise NotInvariant(f"interval {interval} not {period}-invariant")

    def g(x):
        return m.iterate(np.asarray(x, dtype=float), period) - np.asarray(x, dtype=float) - level

    flank = max(4.0 * cell, 0.02 * width)
    inner = np.linspace(a + flank, b - flank, 512)
    img = g(inner) + inner
    if img.min() < a - 4 * flank or img.max() > b + 4 * flank:
        raise NotInvariant(f"interval {interval} not mapped into itself")

    interior = np.linspace(a + 2 * cell, b - 2 * cell, 512)
    amplitude = float(np.max(np.abs(g(interior))))
    if amplitude <= max(100.0 * tol, 1e-7):
        return IntervalSignature.identity_class(orientation)

    # composition bias of the sampled map vs the return map's displacement
    tang_tol = max(200.0 * tol, 0.5 * abs(m.degree) ** period / m.grid)
    if tang_tol >= 0.5 * amplitude:
        return IntervalSignature(orientation, None, None)   # below resolution

    window = max(16.0 * cell, 0.05 * width)
    xs = np.linspace(a - window, b + window, 4096)
    vals = g(xs)
    scan_cell = xs[1] - xs[0]
    idx = sign_changes(vals)
    roots = [float(r) for r in
             bisect_brackets(g, xs[idx], xs[idx + 1], xtol=min(tol, 1e-12))] if idx.size else []
    small = np.abs(vals) <= tang_tol
    i = 0
    while i < len(small):
        if small[i]:
            j = i
            while j + 1 < len(small) and small[j + 1]:
                j += 1
            x_star = float(xs[i + int(np.argmin(np.abs(vals[i:j + 1])))])
            if not any(abs(x_star - r) <= 4 * scan_cell for r in roots):
                roots.append(x_star)
            i = j + 1
        else:
            i += 1
    roots.sort()
    merged: list[float] = []
    for r in roots:
        if merged and r - merged[-1] <= 4 * scan_cell:
            return IntervalSignature(orientation, None, None)  # unresolved
        merged.append(float(r))
    slack = max(16.0 * cell, 0.1 * width)
    if not merged or abs(merged[0] - a) > slack or abs(merged[-1] - b) > slack:
        raise NotInvariant(f"interval {interval} endpoints not fixed by F^{period}")

    # flank signs just outside the located endpoints, still in the gap region
    lo, hi = merged[0], merged[-1]
    probes = [lo - 3 * cell] + \
             [0.5 * (r1 + r2) for r1, r2 in zip(merged, merged[1:])] + \
             [hi + 3 * cell]
    pattern = tuple(1 if v > 0 else -1 for v in g(np.asarray(probes)))

    def end_flag(out_sign: int, in_sign: int) -> str:
        if out_sign > 0 and in_sign < 0:
            return "attracting"
        if out_sign < 0 and in_sign > 0:
            return "repelling"
        return "mixed"

    behavior = (end_flag(pattern[0], pattern[1]),
                end_flag(-pattern[-1], -pattern[-2]))
    return IntervalSignature(orientation, len(merged), pattern, behavior)


# ---------------------------------------------------------------------------
# classification data
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PlateauRecord:
    image_angle: float
    kind: str
    period: int | None
    preperiod: int | None
    depth_limited: bool
    interval: tuple[float, float]
    signature: IntervalSignature

    @property
    def length(self) -> float:
        return self.interval[1] - self.interval[0]


@dataclass(eq=False)
class ClassificationData:
    degree: int
    records: list[PlateauRecord]
    grid: int
    tol: float
    plateau_tol: float
    max_period: int


def classification_data(m: LiftedCircleMap, tol: float = 1e-8,
                        plateau_tol: float | None = None, max_period: int = 16,
                        max_depth: int = 24, angle_tol: float = 5e-4,
                        h: SemiconjugacyField1D | None = None) -> ClassificationData:
    """Degree plus plateau-image records with periodic-interval signatures.

    Measured plateau images are snapped to the nearest eventually-periodic
    angle before orbit classification (direct iteration of a measured
    float would amplify its error by |d| per step).  Non-periodic records
    carry the identity class.
    """
    if not m.is_covering:
        raise NotACovering("classification needs a covering map")
    if h is None:
        h = solve_semiconjugacy(m, 1, tol)
    if plateau_tol is None:
        plateau_tol = 2.0 / h.grid
    plateaus = plateau_set(h, plateau_tol)
    measured = np.array([float(frac(h(0.5 * (a + b)))) for (a, b) in plateaus])
    records = []
    for (a, b), theta in zip(plateaus, measured):
        snapped = snap_structured_angle(theta, m.degree, angle_tol, max_period, max_depth)
        if snapped is not None and not _orbit_corroborated(snapped, m.degree, measured,
                                                          max(2.0 * plateau_tol, 1e-3)):
            # plateau images are plateaus; a snap whose exact forward orbit
            # misses the detected plateau angles is a resolution artifact
            snapped = None
        if snapped is None:
            cls = PointClass("wandering", depth_limited=True)
            angle = theta
        else:
            cls = classify_circle_point(snapped, m.degree, max_period, max_depth)
            angle = float(snapped)
        if cls.kind == "periodic":
            try:
                sig = interval_signature(m, (a, b), cls.period, tol=1e-9)
            except NotInvariant:
                # the snapped angle's periodicity is not confirmed by the map
                # itself; at this resolution the record cannot be trusted
                cls = PointClass("wandering", depth_limited=True)
                sig = IntervalSignature.identity_class()
        else:
            sig = IntervalSignature.identity_class()
        records.append(PlateauRecord(angle, cls.kind, cls.period, cls.preperiod,
                                     cls.depth_limited, (a, b), sig))
    records.sort(key=lambda r: r.image_angle)
    return ClassificationData(m.degree, records, h.grid, tol, plateau_tol, max_period)


def _orbit_corroborated(theta: Fraction, d: int, measured_angles: np.ndarray,
                        tol: float, horizon: int = 12) -> bool:
    """Every exact forward image of theta matches a detected plateau angle."""
    if len(measured_angles) == 0:
        return False
    w = theta
    seen = {w}
    for _ in range(horizon):
        w = (d * w) % 1
        if float(np.min(circle_dist(measured_angles, float(w)))) > tol:
            return False
        if w in seen:
            break
        seen.add(w)
    return True


@dataclass(frozen=True)
class Verdict:
    status: str                       # "equivalent" | "distinct" | "inconclusive"
    relator: SelfConjugacy | None = None
    reason: str = ""

    @property
    def exit_code(self) -> int:
        return {"equivalent": 0, "distinct": 1, "inconclusive": 2}[self.status]


def _marginal(rec: PlateauRecord, grid: int) -> bool:
    """Records near the resolution floor; their detection varies with the grid."""
    return rec.length <= 16.0 / grid


def _records_match(ra: PlateauRecord, rb: PlateauRecord) -> str:
    """'match' / 'mismatch' / 'uncertain' for an angle-matched record pair.

    Only periodicity itself is part of the data: every non-periodic record
    carries the identity class, so the preperiodic/wandering distinction
    (a resolution-limited diagnostic) is not compared.
    """
    if (ra.kind == "periodic") != (rb.kind == "periodic"):
        return "mismatch"
    if ra.kind == "periodic" and ra.period != rb.period:
        return "mismatch"
    return ra.signature.matches(rb.signature)


def compare_classification(a: ClassificationData, b: ClassificationData,
                           tol: float = 1e-3) -> Verdict:
    """Compare two classification data sets up to a self-conjugacy.

    Exhaustive search over the 2|d-1| candidates; record angles must match
    within tol as sets, periodic records must agree in period and
    signature.  A candidate matching everything except extra records at
    the resolution floor is only evidence at resolution: if no candidate
    matches fully, such partial matches yield an inconclusive verdict
    instead of a distinct one.
    """
    if a.degree != b.degree:
        return Verdict("distinct", reason=f"degrees {a.degree} vs {b.degree}")
    saw_sig_mismatch = False
    saw_partial = False
    for c in self_conjugacies(a.degree):
        mapped = sorted(((float(c.apply_angle(r.image_angle)), r) for r in a.records),
                        key=lambda t: t[0])
        other = sorted(((r.image_angle, r) for r in b.records), key=lambda t: t[0])
        pairs, extra_a, extra_b = _match_angles(mapped, other, tol)
        solid_extras = [r for r in extra_a if not _marginal(r, a.grid)] + \
                       [r for r in extra_b if not _marginal(r, b.grid)]
        if solid_extras:
            continue
        outcomes = [_records_match(ra, rb) for ra, rb in pairs]
        if any(o == "mismatch" for o in outcomes):
            saw_sig_mismatch = True
            continue
        if any(o == "uncertain" for o in outcomes) or extra_a or extra_b:
            saw_partial = True
            continue
        return Verdict("equivalent", relator=c)
    if saw_sig_mismatch:
        return Verdict("distinct", reason="signature mismatch")
    if saw_partial:
        return Verdict("inconclusive", reason="records match only at resolution limit")
    return Verdict("distinct", reason="record angle sets differ")


def _match_angles(xs, ys, tol):
    """Circular matching of (angle, record) lists, closest pairs first.

    Taking candidate pairs in global distance order keeps near-exact
    matches from being stolen by records that are merely within tolerance.
    """
    candidates = []
    for i, (ax, _) in enumerate(xs):
        for j, (ay, _) in enumerate(ys):
            dist = float(circle_dist(ax, ay))
            if dist <= tol:
                candidates.append((dist, i, j))
    candidates.sort()
    used_x, used_y = set(), set()
    pairs = []
    for _, i, j in candidates:
        if i in used_x or j in used_y:
            continue
        used_x.add(i)
        used_y.add(j)
        pairs.append((xs[i][1], ys[j][1]))
    extra_x = [r for i, (_, r) in enumerate(xs) if i not in used_x]
    extra_y = [r for j, (_, r) in enumerate(ys) if j not in used_y]
    return pairs, extra_x, extra_y


# ---------------------------------------------------------------------------
# blow-up synthesis
# ---------------------------------------------------------------------------

def as_angle_fraction(value) -> Fraction:
    """Exact angle in [0,1) from a Fraction, string 'p/q', int or float."""
    if isinstance(value, Fraction):
        return value % 1
    if isinstance(value, str):
        return Fraction(value) % 1
    if isinstance(value, (int, np.integer)):
        return Fraction(int(value)) % 1
    return Fraction(float(value)).limit_denominator(10 ** 12) % 1


@dataclass(frozen=True)
class Insertion:
    base_angle: Fraction
    length: float
    kind: str = "north_south"

    @classmethod
    def of(cls, spec) -> "Insertion":
        if isinstance(spec, Insertion):
            return spec
        return cls(as_angle_fraction(spec["base_angle"]), float(spec["length"]),
                   str(spec.get("kind", "north_south")))


def transform_insertions(insertions, c: SelfConjugacy) -> list[Insertion]:
    """Apply a self-conjugacy to the base angles of insertion specs (exact)."""
    out = []
    for spec in insertions:
        ins = Insertion.of(spec)
        theta = -ins.base_angle if c.reflect else ins.base_angle
        theta = (theta + Fraction(c.rotation_index, c.modulus)) % 1
        out.append(Insertion(theta, ins.length, ins.kind))
    return out


class _Atom:
    __slots__ = ("angle", "length", "owner", "closing")

    def __init__(self, angle: Fraction, length: float, owner: int, closing: str | None = None):
        self.angle = angle
        self.length = length
        self.owner = owner
        self.closing = closing   # insert kind applied on the step out of this atom


def blow_up(degree: int, insertions, grid: int = 4096, depth: int = 12,
            forward_cap: int = 64) -> LiftedCircleMap:
    """Degree-d covering whose semiconjugacy collapses the inserted intervals.

    Every point of each base orbit (tail and cycle, exact rational
    arithmetic) receives an interval of the requested length; preimages up
    to `depth` receive lengths shrunk by 1/(2|d|) per level, pruned below
    the grid floor.  On the cycle the first-return map realizes the
    requested insert kind; all other steps are affine.  Orbits with no
    rational return within forward_cap steps are truncated forward at
    sub-grid lengths.  The first insertion's interval is centered at 0.5.
    """
    d = int(degree)
    ad = abs(d)
    if ad <= 1:
        raise ValueError("|degree| must exceed 1")
    specs = [Insertion.of(s) for s in insertions]
    if not specs:
        xs = np.linspace(0.0, 1.0, grid + 1)
        return make_lift(d * xs, {"family": "blowup", "degree": d, "insertions": []})
    for ins in specs:
        if ins.kind not in INSERT_KINDS:
            raise ValidationError(f"unknown insert kind {ins.kind!r}; "
                                  f"known: {sorted(INSERT_KINDS)}")
        if d < 0 and ins.kind != "identity":
            raise ValidationError("negative degree supports only identity inserts")
        if not 0.0 < ins.length < 1.0:
            raise Overfull(f"insert length {ins.length} out of range")

    atoms: dict[Fraction, _Atom] = {}
    min_len = 0.05 / grid

    def add(angle: Fraction, length: float, owner: int, closing=None) -> _Atom:
        if angle in atoms and atoms[angle].owner != owner:
            raise Clash(f"orbit collision at angle {angle}")
        atom = _Atom(angle, length, owner, closing)
        atoms[angle] = atom
        return atom

    for owner, ins in enumerate(specs):
        seq = [ins.base_angle]
        seen = {ins.base_angle: 0}
        cycle_start = None
        while len(seq) <= forward_cap:
            nxt = (d * seq[-1]) % 1
            if nxt in seen:
                cycle_start = seen[nxt]
                break
            seen[nxt] = len(seq)
            seq.append(nxt)
        if cycle_start is not None:
            for theta in seq:
                add(theta, ins.length, owner)
            atoms[seq[-1]].closing = ins.kind   # step closing the cycle
        else:
            # no rational return: truncate forward with shrinking lengths
            length = ins.length
            seq = [ins.base_angle]
            while length >= min_len:
                length /= 2.0 * ad
                nxt = (d * seq[-1]) % 1
                if nxt in atoms and atoms[nxt].owner != owner:
                    raise Clash(f"orbit collision at angle {nxt}")
                if nxt in atoms:
                    break
                seq.append(nxt)
            lengths = [ins.length]
            for _ in seq[1:]:
                lengths.append(lengths[-1] / (2.0 * ad))
            for theta, ell in zip(seq, lengths):
                add(theta, ell, owner)

    # preimage atoms, pruned below the grid floor
    frontier = list(atoms.values())
    for _ in range(depth):
        new: list[_Atom] = []
        for atom in frontier:
            child_len = atom.length / (2.0 * ad)
            if child_len < min_len:
                continue
            for j in range(ad):
                pre = (Fraction(atom.angle + j, d)) % 1
                if pre in atoms:
                    if atoms[pre].owner != atom.owner:
                        raise Clash(f"orbit collision at angle {pre}")
                    continue
                new.append(add(pre, child_len, atom.owner))
        if not new:
            break
        frontier = new

    total = sum(a.length for a in atoms.values())
    if total >= 1.0:
        raise Overfull(f"total inserted length {total} >= 1")

    order = sorted(atoms)                       # exact Fractions sort
    angles = np.array([float(t) for t in order])
    lengths = np.array([atoms[t].length for t in order])
    scale = 1.0 - total
    lefts = scale * angles + np.concatenate(([0.0], np.cumsum(lengths)[:-1]))
    index = {t: i for i, t in enumerate(order)}

    i0 = index[specs[0].base_angle]
    shift = 0.5 - (lefts[i0] + 0.5 * lengths[i0])
    lefts = lefts + shift

    def position(u: np.ndarray) -> np.ndarray:
        """New-circle position of old angles u in [0,1), jumps bridged rightward."""
        i = np.searchsorted(angles, u, side="right") - 1
        csum = np.concatenate(([0.0], np.cumsum(lengths)))
        return shift + scale * u + csum[i + 1]

    def kind_map(kind: str, s: np.ndarray) -> np.ndarray:
        knots, vals = INSERT_KINDS[kind]
        return np.interp(s, knots, vals)

    # assemble the lift sample-by-sample (vector per piece kind)
    xs = np.linspace(0.0, 1.0, grid + 1)
    samples = np.empty(grid + 1)
    xw = shift + frac(xs - shift)               # position on the laid-out circle
    off = np.round(xw - xs)                     # integer sheet offset
    piece = np.searchsorted(lefts, xw + 1e-15, side="right") - 1
    piece = np.clip(piece, -1, len(order) - 1)
    rights = lefts + lengths
    wrap_last = len(order) - 1                  # points before lefts[0] sit in the last gap

    for i in range(grid + 1):
        p = int(piece[i]) if piece[i] >= 0 else wrap_last
        x = xw[i]
        left, ell = lefts[p], lengths[p]
        if x <= rights[p] + 1e-15 and x >= left - 1e-15 and piece[i] >= 0:
            # inside atom interval p
            s = min(max((x - left) / ell, 0.0), 1.0)
            atom = atoms[order[p]]
            img = (d * atom.angle) % 1
            branch = float(d * atom.angle - img)     # exact integer
            if img in index:
                q = index[img]
                pos = kind_map(atom.closing or "identity", np.array([s]))[0]
                if d < 0:
                    pos = 1.0 - pos
                val = lefts[q] + pos * lengths[q] + branch
            else:
                # truncated chain end: sub-grid interval collapsing to a point
                val = float(position(np.array([float(img)]))[0]) + branch
        else:
            # gap between atoms: pull back to the old coordinate, push forward
            gl = rights[p] if piece[i] >= 0 else rights[wrap_last] - 1.0
            t_old = float(order[p]) if piece[i] >= 0 else angles[wrap_last] - 1.0
            t = t_old + (x - gl) / scale
            tau = d * t
            val = float(position(np.array([frac(tau)]))[0]) + np.floor(tau)
        samples[i] = val - off[i] * d

    meta = {
        "family": "blowup",
        "degree": d,
        "grid": grid,
        "depth": depth,
        "insertions": [{"base_angle": str(s.base_angle), "length": s.length,
                        "kind": s.kind} for s in specs],
        "atom_count": len(order),
        "expected_records": _expected_records(specs, d, forward_cap),
    }
    return make_lift(samples, meta)


def _expected_records(specs: list[Insertion], d: int, forward_cap: int) -> list[dict]:
    out = []
    for ins in specs:
        cls = classify_circle_point(ins.base_angle, d, max_period=forward_cap,
                                    max_depth=forward_cap)
        out.append({"base_angle": float(ins.base_angle), "kind": cls.kind,
                    "period": cls.period, "insert": ins.kind})
    return out
