"""Semiconjugacy of a degree-d circle map with the model z -> z^d.

The lift H of the semiconjugacy is the unique fixed point of the operator
T(H)(x) = H(F(x)) / d on the space of continuous H with H(x+1) = H(x) + o
(orientation o = +-1), where T contracts the sup metric by 1/|d|.  Fields
are stored on the same grid as the map and iterated to a requested
distance-from-fixed-point tolerance via the Banach estimate.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .circle import LiftedCircleMap
from .errors import DegreeMismatch, MaxIterExceeded, NoRelator
from .numerics import circle_dist, frac


@dataclass(eq=False)
class SemiconjugacyField1D:
    """Sampled lift H of a semiconjugacy, with H(x+1) = H(x) + orientation.

    samples[i] = H(i/N), samples[N] = samples[0] + orientation exactly.
    residual is sup |H(F(x)) - d H(x)| measured over the stored grid.
    """

    samples: np.ndarray
    orientation: int
    degree: int
    residual: float = float("nan")
    tol: float = float("nan")
    iterations: int = 0
    metadata: dict = field(default_factory=dict)

    @property
    def grid(self) -> int:
        return len(self.samples) - 1

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        k = np.floor(x)
        pos = (x - k) * self.grid
        i = np.minimum(pos.astype(np.int64), self.grid - 1)
        w = pos - i
        val = self.samples[i] * (1.0 - w) + self.samples[i + 1] * w
        val = val + k * self.orientation
        return val if val.ndim else float(val)

    def angle(self, x):
        """Circle image h(x) in [0, 1)."""
        return frac(self.__call__(x))

    def deviation_bound(self) -> float:
        """sup |H(x) - o*x| over [0, 1]; equal on every [k, k+1] shift."""
        xs = np.linspace(0.0, 1.0, self.grid + 1)
        return float(np.max(np.abs(self.samples - self.orientation * xs)))


def _identity_field(m: LiftedCircleMap, orientation: int) -> SemiconjugacyField1D:
    xs = np.linspace(0.0, 1.0, m.grid + 1)
    return SemiconjugacyField1D(orientation * xs, orientation, m.degree)


def contraction_step(h: SemiconjugacyField1D, m: LiftedCircleMap) -> SemiconjugacyField1D:
    """One application of T(H) = H(F(.)) / d.

    Preserves the equivariance class of H and contracts sup distances
    between fields by 1/|d| up to interpolation slack.
    """
    if h.degree != m.degree:
        raise DegreeMismatch(f"field degree {h.degree} vs map degree {m.degree}")
    xs = np.linspace(0.0, 1.0, h.grid + 1)
    new = h(m(xs)) / m.degree
    new[-1] = new[0] + h.orientation
    out = SemiconjugacyField1D(new, h.orientation, h.degree)
    out.residual = _grid_residual(out, m)
    return out


def _grid_residual(h: SemiconjugacyField1D, m: LiftedCircleMap) -> float:
    xs = np.linspace(0.0, 1.0, h.grid, endpoint=False)
    return float(np.max(np.abs(h(m(xs)) - m.degree * h(xs))))


def solve_semiconjugacy(m: LiftedCircleMap, orientation: int = 1,
                        tol: float = 1e-8, max_iter: int | None = None) -> SemiconjugacyField1D:
    """Fixed point of T to sup-distance tol, started from H0(x) = o*x.

    Iteration stops when the step size drops below tol*(1 - 1/|d|), which
    bounds the remaining distance to the fixed point by tol.
    """
    if orientation not in (1, -1):
        raise ValueError("orientation must be +1 or -1")
    ad = abs(m.degree)
    guaranteed = int(np.ceil(np.log(max(tol, 1e-300)) / np.log(1.0 / ad)))
    if max_iter is None:
        max_iter = 2 * guaranteed + 60
    xs = np.linspace(0.0, 1.0, m.grid + 1)
    fx = m(xs)
    cur = orientation * xs
    stop = tol * (1.0 - 1.0 / ad)
    d = m.degree
    grid = m.grid
    # gather indices/weights for evaluating the field at F(grid) are fixed
    k = np.floor(fx)
    pos = (fx - k) * grid
    i = np.minimum(pos.astype(np.int64), grid - 1)
    w = pos - i
    shift = k * orientation

    for it in range(1, max_iter + 1):
        new = (cur[i] * (1.0 - w) + cur[i + 1] * w + shift) / d
        new[-1] = new[0] + orientation
        change = float(np.max(np.abs(new - cur)))
        cur = new
        if change <= stop:
            out = SemiconjugacyField1D(cur, orientation, m.degree, tol=tol, iterations=it)
            out.residual = _grid_residual(out, m)
            return out
    raise MaxIterExceeded(f"no convergence to {tol} within {max_iter} iterations")


def rotation_number(m: LiftedCircleMap, x, tol: float = 1e-10):
    """Value H(x) of the orientation-preserving semiconjugacy lift.

    Equals lim F^n(x)/d^n; the limit exists for every continuous circle
    map of |degree| > 1 and the convergence is geometric.
    """
    h = solve_semiconjugacy(m, 1, tol)
    return h(x)


@dataclass(frozen=True)
class SelfConjugacy:
    """Circle homeomorphism commuting with z -> z^d.

    Acts on angles as theta -> rotation_index/modulus + s*theta with
    s = -1 when reflect else +1, modulus = |d - 1|.  The 2*modulus such
    maps form a dihedral group.
    """

    rotation_index: int
    reflect: bool
    modulus: int

    def apply_angle(self, theta):
        s = -1.0 if self.reflect else 1.0
        return frac(self.rotation_index / self.modulus + s * np.asarray(theta, dtype=float))

    def compose(self, other: "SelfConjugacy") -> "SelfConjugacy":
        if self.modulus != other.modulus:
            raise DegreeMismatch("cannot compose self-conjugacies of different groups")
        s = -1 if self.reflect else 1
        j = (self.rotation_index + s * other.rotation_index) % self.modulus
        return SelfConjugacy(j, self.reflect != other.reflect, self.modulus)

    def inverse(self) -> "SelfConjugacy":
        if self.reflect:
            return self
        return SelfConjugacy((-self.rotation_index) % self.modulus, False, self.modulus)

    @property
    def is_identity(self) -> bool:
        return self.rotation_index == 0 and not self.reflect


def self_conjugacies(d: int) -> list[SelfConjugacy]:
    """All 2|d-1| circle maps commuting with z -> z^d.

    Rotations by (d-1)-st roots of unity and their compositions with
    complex conjugation.
    """
    if abs(d) <= 1:
        raise ValueError("|d| must exceed 1")
    mod = abs(d - 1)
    out = [SelfConjugacy(j, False, mod) for j in range(mod)]
    out += [SelfConjugacy(j, True, mod) for j in range(mod)]
    return out


def relate_semiconjugacies(h1: SemiconjugacyField1D, h2: SemiconjugacyField1D,
                           tol: float = 1e-8, n_test: int = 2048) -> SelfConjugacy:
    """The unique self-conjugacy c with h1 = c o h2, by exhaustive search.

    Acceptance threshold is 10*tol, looser than the solve tolerance to
    absorb interpolation error.  Raises NoRelator when no candidate fits,
    which signals that one input is not a valid semiconjugacy field.
    """
    if h1.degree != h2.degree:
        raise DegreeMismatch(f"degrees differ: {h1.degree} vs {h2.degree}")
    if max(h1.residual, h2.residual) > tol:
        raise ValueError("both fields must carry residual <= tol")
    xs = np.linspace(0.0, 1.0, n_test, endpoint=False)
    a1 = frac(h1(xs))
    a2 = frac(h2(xs))
    best: SelfConjugacy | None = None
    best_err = np.inf
    for c in self_conjugacies(h1.degree):
        err = float(np.max(circle_dist(a1, c.apply_angle(a2))))
        if err < best_err:
            best, best_err = c, err
    if best is None or best_err > 10.0 * tol:
        raise NoRelator(f"no self-conjugacy within {10.0 * tol} (best {best_err})")
    return best
