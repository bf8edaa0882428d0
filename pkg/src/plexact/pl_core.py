"""Exact piecewise-linear maps of the unit interval.

Everything here works over :class:`fractions.Fraction`.  A :class:`PLMap` is
stored as its canonical breakpoint list: x-coordinates strictly increasing
from 0 to 1, y-values in [0, 1], and no interior breakpoint lying on the
segment joining its neighbours.  Two maps are equal exactly when their
canonical forms are equal.

The module also provides closed rational intervals and finite unions of
them, piecewise-constant probability densities, the sup metric, the
measure-preservation test by branch sums, and conjugation by the
distribution function of a density.
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, NamedTuple, Sequence

from ._graphs import strongly_connected_components

Rat = Fraction

DEFAULT_PIECE_CAP = 10**6

ZERO = Fraction(0)
ONE = Fraction(1)


class PLError(ValueError):
    """Invalid input to a piecewise-linear operation."""


class PieceCapExceeded(RuntimeError):
    """Raised when a construction would exceed the breakpoint budget."""

    def __init__(self, needed: int, cap: int):
        super().__init__(f"piece cap exceeded: {needed} breakpoints > cap {cap}")
        self.needed = needed
        self.cap = cap


def rat(value) -> Fraction:
    """Coerce ints, Fractions and 'p/q' strings to a Fraction.

    Floats and decimal strings are rejected so that no inexact value can
    slip into a computation.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise PLError("booleans are not rationals")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        s = value.strip()
        if not s or any(c in s for c in ".eE"):
            raise PLError(f"not an exact rational: {value!r}")
        try:
            return Fraction(s)
        except (ValueError, ZeroDivisionError) as exc:
            raise PLError(f"not an exact rational: {value!r}") from exc
    raise PLError(f"cannot use {type(value).__name__} as an exact rational")


def format_rat(q: Fraction) -> str:
    if q.denominator == 1:
        return str(q.numerator)
    return f"{q.numerator}/{q.denominator}"


# ---------------------------------------------------------------- intervals


@dataclass(frozen=True, order=True)
class RatInterval:
    """Closed interval [lo, hi]; lo == hi is a point."""

    lo: Fraction
    hi: Fraction

    def __post_init__(self):
        lo, hi = rat(self.lo), rat(self.hi)
        if lo > hi:
            raise PLError(f"empty interval [{lo}, {hi}]")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @staticmethod
    def point(x) -> "RatInterval":
        x = rat(x)
        return RatInterval(x, x)

    @property
    def length(self) -> Fraction:
        return self.hi - self.lo

    @property
    def is_point(self) -> bool:
        return self.lo == self.hi

    @property
    def midpoint(self) -> Fraction:
        return (self.lo + self.hi) / 2

    def contains(self, x) -> bool:
        return self.lo <= x <= self.hi

    def contains_interval(self, other: "RatInterval") -> bool:
        return self.lo <= other.lo and other.hi <= self.hi

    def intersect(self, other: "RatInterval") -> "RatInterval | None":
        lo, hi = max(self.lo, other.lo), min(self.hi, other.hi)
        return RatInterval(lo, hi) if lo <= hi else None

    def meets_interior(self, other: "RatInterval") -> bool:
        """True when the intersection has positive length."""
        return max(self.lo, other.lo) < min(self.hi, other.hi)

    def hull(self, other: "RatInterval") -> "RatInterval":
        return RatInterval(min(self.lo, other.lo), max(self.hi, other.hi))

    def widen(self, r, clip: bool = True) -> "RatInterval":
        lo, hi = self.lo - r, self.hi + r
        if clip:
            lo, hi = max(lo, ZERO), min(hi, ONE)
        return RatInterval(lo, hi)

    def __str__(self) -> str:
        return f"[{format_rat(self.lo)}, {format_rat(self.hi)}]"


UNIT = RatInterval(ZERO, ONE)


class IntervalSet:
    """Sorted, pairwise disjoint, merged finite union of closed intervals."""

    __slots__ = ("_parts",)

    def __init__(self, parts: Iterable[RatInterval] = ()):
        items = sorted(parts, key=lambda J: (J.lo, J.hi))
        merged: list[RatInterval] = []
        for J in items:
            if merged and J.lo <= merged[-1].hi:
                last = merged[-1]
                merged[-1] = RatInterval(last.lo, max(last.hi, J.hi))
            else:
                merged.append(J)
        self._parts = tuple(merged)

    @staticmethod
    def of_points(points: Iterable) -> "IntervalSet":
        return IntervalSet(RatInterval.point(p) for p in points)

    @property
    def parts(self) -> tuple[RatInterval, ...]:
        return self._parts

    def __iter__(self):
        return iter(self._parts)

    def __len__(self) -> int:
        return len(self._parts)

    def __bool__(self) -> bool:
        return bool(self._parts)

    def __eq__(self, other) -> bool:
        return isinstance(other, IntervalSet) and self._parts == other._parts

    def __hash__(self) -> int:
        return hash(self._parts)

    def __repr__(self) -> str:
        return "IntervalSet(" + ", ".join(str(J) for J in self._parts) + ")"

    def points(self) -> list[Fraction]:
        return [J.lo for J in self._parts if J.is_point]

    def intervals(self) -> list[RatInterval]:
        return [J for J in self._parts if not J.is_point]

    def contains(self, x) -> bool:
        i = bisect.bisect_right([J.lo for J in self._parts], x) - 1
        return i >= 0 and self._parts[i].contains(x)

    def component_of(self, x) -> RatInterval | None:
        for J in self._parts:
            if J.contains(x):
                return J
        return None

    def union(self, other: "IntervalSet") -> "IntervalSet":
        return IntervalSet(self._parts + other._parts)

    def intersect_interval(self, K: RatInterval) -> "IntervalSet":
        out = []
        for J in self._parts:
            I = J.intersect(K)
            if I is not None:
                out.append(I)
        return IntervalSet(out)

    def issubset(self, other: "IntervalSet") -> bool:
        return all(
            any(K.contains_interval(J) for K in other._parts) for J in self._parts
        )

    def measure(self) -> Fraction:
        return sum((J.length for J in self._parts), ZERO)

    def map_points(self, fn) -> "IntervalSet":
        """Image under a monotone map of the unit interval."""
        out = []
        for J in self._parts:
            a, b = fn(J.lo), fn(J.hi)
            out.append(RatInterval(min(a, b), max(a, b)))
        return IntervalSet(out)


# ---------------------------------------------------------------- maps


def _collinear(x0, y0, x1, y1, x2, y2) -> bool:
    return (y1 - y0) * (x2 - x0) == (y2 - y0) * (x1 - x0)


def _canonical(xs: Sequence[Fraction], ys: Sequence[Fraction]):
    out_x = [xs[0]]
    out_y = [ys[0]]
    for i in range(1, len(xs) - 1):
        if _collinear(out_x[-1], out_y[-1], xs[i], ys[i], xs[i + 1], ys[i + 1]):
            continue
        out_x.append(xs[i])
        out_y.append(ys[i])
    out_x.append(xs[-1])
    out_y.append(ys[-1])
    return tuple(out_x), tuple(out_y)


class PLMap:
    """Continuous piecewise-linear self-map of [0, 1] with rational breakpoints.

    Construct from ``[(x, y), ...]``.  Coordinates may be ints, Fractions or
    ``'p/q'`` strings.  The breakpoint list is canonicalised on construction.
    """

    __slots__ = ("xs", "ys", "_hash")

    def __init__(self, breakpoints: Iterable[tuple]):
        pts = [(rat(x), rat(y)) for x, y in breakpoints]
        if len(pts) < 2:
            raise PLError("a PL map needs at least two breakpoints")
        xs = [p[0] for p in pts]
        ys = [p[1] for p in pts]
        if xs[0] != 0 or xs[-1] != 1:
            raise PLError("breakpoints must start at x=0 and end at x=1")
        for a, b in zip(xs, xs[1:]):
            if not a < b:
                raise PLError("x-coordinates must be strictly increasing")
        for y in ys:
            if not 0 <= y <= 1:
                raise PLError(f"value {y} outside [0, 1]")
        self.xs, self.ys = _canonical(xs, ys)
        self._hash = None

    @classmethod
    def _trusted(cls, xs, ys) -> "PLMap":
        obj = cls.__new__(cls)
        obj.xs, obj.ys = _canonical(xs, ys)
        obj._hash = None
        return obj

    @staticmethod
    def identity() -> "PLMap":
        return PLMap([(0, 0), (1, 1)])

    @staticmethod
    def flip() -> "PLMap":
        return PLMap([(0, 1), (1, 0)])

    @staticmethod
    def tent() -> "PLMap":
        return PLMap([(0, 0), (Fraction(1, 2), 1), (1, 0)])

    # -- structure

    @property
    def breakpoints(self) -> list[tuple[Fraction, Fraction]]:
        return list(zip(self.xs, self.ys))

    @property
    def n_pieces(self) -> int:
        return len(self.xs) - 1

    def pieces(self):
        """Yield ``(x0, x1, y0, y1)`` for each linear piece."""
        xs, ys = self.xs, self.ys
        for i in range(len(xs) - 1):
            yield xs[i], xs[i + 1], ys[i], ys[i + 1]

    def slopes(self) -> list[Fraction]:
        return [(y1 - y0) / (x1 - x0) for x0, x1, y0, y1 in self.pieces()]

    def turning_points(self) -> list[Fraction]:
        """Interior breakpoints where the sign of the slope changes.

        Both ends of a flat piece count, since canonical form never has two
        flat pieces in a row.
        """
        s = self.slopes()
        out = []
        for i in range(1, len(self.xs) - 1):
            a, b = s[i - 1], s[i]
            if (a > 0) != (b > 0) or (a < 0) != (b < 0):
                out.append(self.xs[i])
        return out

    @property
    def is_surjective(self) -> bool:
        return min(self.ys) == 0 and max(self.ys) == 1

    def check_surjective(self) -> "PLMap":
        if not self.is_surjective:
            raise PLError("map is not surjective")
        return self

    @property
    def max_abs_slope(self) -> Fraction:
        return max(abs(s) for s in self.slopes())

    def has_flat_piece(self) -> bool:
        return any(s == 0 for s in self.slopes())

    # -- evaluation

    def piece_index(self, x) -> int:
        """Index of a piece containing x (the left one at a breakpoint)."""
        i = bisect.bisect_left(self.xs, x)
        return max(i - 1, 0)

    def __call__(self, x) -> Fraction:
        x = rat(x)
        if not 0 <= x <= 1:
            raise PLError(f"x = {x} outside [0, 1]")
        xs, ys = self.xs, self.ys
        i = bisect.bisect_left(xs, x)
        if i < len(xs) and xs[i] == x:
            return ys[i]
        x0, x1, y0, y1 = xs[i - 1], xs[i], ys[i - 1], ys[i]
        return y0 + (y1 - y0) * (x - x0) / (x1 - x0)

    # -- identity

    def __eq__(self, other) -> bool:
        return isinstance(other, PLMap) and self.xs == other.xs and self.ys == other.ys

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self.xs, self.ys))
        return self._hash

    def __repr__(self) -> str:
        pts = ", ".join(f"({format_rat(x)},{format_rat(y)})" for x, y in self.breakpoints)
        return f"PLMap([{pts}])"


def eval(f: PLMap, x) -> Fraction:  # noqa: A001 - public name is part of the API
    return f(x)


class PLHomeo(PLMap):
    """Strictly monotone PL self-homeomorphism of [0, 1]."""

    __slots__ = ()

    def __init__(self, breakpoints: Iterable[tuple]):
        super().__init__(breakpoints)
        self._validate()

    def _validate(self):
        ys = self.ys
        inc = all(a < b for a, b in zip(ys, ys[1:]))
        dec = all(a > b for a, b in zip(ys, ys[1:]))
        if not (inc or dec) or {ys[0], ys[-1]} != {ZERO, ONE}:
            raise PLError("not a monotone homeomorphism of [0, 1]")

    @classmethod
    def from_map(cls, f: PLMap) -> "PLHomeo":
        obj = cls.__new__(cls)
        obj.xs, obj.ys, obj._hash = f.xs, f.ys, None
        obj._validate()
        return obj

    @property
    def increasing(self) -> bool:
        return self.ys[0] == 0

    def inverse(self) -> "PLHomeo":
        pts = list(zip(self.ys, self.xs))
        pts.sort()
        return PLHomeo(pts)

    def __eq__(self, other) -> bool:
        return PLMap.__eq__(self, other)

    __hash__ = PLMap.__hash__


# ---------------------------------------------------------------- algebra


def _refine(f: PLMap, gx, gy, cap: int):
    """Points of g's domain grid refined by g-preimages of f's breakpoints,
    with the matching g-values."""
    xs: list[Fraction] = []
    vs: list[Fraction] = []
    fx = f.xs
    for i in range(len(gx) - 1):
        x0, x1, y0, y1 = gx[i], gx[i + 1], gy[i], gy[i + 1]
        xs.append(x0)
        vs.append(y0)
        if y0 != y1:
            lo, hi = (y0, y1) if y0 < y1 else (y1, y0)
            a = bisect.bisect_right(fx, lo)
            b = bisect.bisect_left(fx, hi)
            inner = fx[a:b]
            if y0 > y1:
                inner = inner[::-1]
            dx = (x1 - x0) / (y1 - y0)
            for v in inner:
                xs.append(x0 + (v - y0) * dx)
                vs.append(v)
        if len(xs) > cap:
            raise PieceCapExceeded(len(xs), cap)
    xs.append(gx[-1])
    vs.append(gy[-1])
    return xs, vs


def compose(f: PLMap, g: PLMap, cap: int = DEFAULT_PIECE_CAP) -> PLMap:
    """Exact f∘g."""
    xs, vs = _refine(f, g.xs, g.ys, cap)
    return PLMap._trusted(xs, [f(v) for v in vs])


def iterate(f: PLMap, k: int, cap: int = DEFAULT_PIECE_CAP) -> PLMap:
    if k < 1:
        raise PLError("iterate needs k >= 1")
    out = f
    for _ in range(k - 1):
        out = compose(f, out, cap)
    return out


def image(f: PLMap, J: RatInterval) -> RatInterval:
    if not UNIT.contains_interval(J):
        raise PLError(f"{J} not inside [0, 1]")
    vals = [f(J.lo), f(J.hi)]
    a = bisect.bisect_right(f.xs, J.lo)
    b = bisect.bisect_left(f.xs, J.hi)
    vals.extend(f.ys[a:b])
    return RatInterval(min(vals), max(vals))


def preimage(f: PLMap, J: RatInterval) -> IntervalSet:
    out = []
    for x0, x1, y0, y1 in f.pieces():
        if y0 == y1:
            if J.contains(y0):
                out.append(RatInterval(x0, x1))
            continue
        lo_v, hi_v = max(J.lo, min(y0, y1)), min(J.hi, max(y0, y1))
        if lo_v > hi_v:
            continue
        s = (x1 - x0) / (y1 - y0)
        a = x0 + (lo_v - y0) * s
        b = x0 + (hi_v - y0) * s
        out.append(RatInterval(min(a, b), max(a, b)))
    return IntervalSet(out)


def common_grid(*maps: PLMap) -> list[Fraction]:
    pts = set()
    for m in maps:
        pts.update(m.xs)
    return sorted(pts)


def sup_distance(f: PLMap, g: PLMap) -> Fraction:
    return max(abs(f(x) - g(x)) for x in common_grid(f, g))


def glue(points: Iterable[tuple]) -> PLMap:
    """PL map through the given breakpoints, dropping exact duplicates."""
    pts = []
    for x, y in points:
        x, y = rat(x), rat(y)
        if pts and pts[-1][0] == x:
            if pts[-1][1] != y:
                raise PLError(f"discontinuity at x = {x}")
            continue
        pts.append((x, y))
    return PLMap(pts)


class PLFunction:
    """Continuous PL function on a closed interval [a, b] with a < b.

    Used for restrictions of maps to subintervals, where full iterates would
    be far too large.  Values are arbitrary rationals.
    """

    __slots__ = ("xs", "ys")

    def __init__(self, xs: Sequence[Fraction], ys: Sequence[Fraction]):
        if len(xs) < 2 or len(xs) != len(ys):
            raise PLError("PL function needs matching breakpoint lists")
        self.xs, self.ys = _canonical(list(xs), list(ys))

    @staticmethod
    def restrict(f: PLMap, J: RatInterval) -> "PLFunction":
        if J.is_point:
            raise PLError("cannot restrict to a point")
        inner = [x for x in f.xs if J.lo < x < J.hi]
        xs = [J.lo] + inner + [J.hi]
        return PLFunction(xs, [f(x) for x in xs])

    @property
    def domain(self) -> RatInterval:
        return RatInterval(self.xs[0], self.xs[-1])

    def __call__(self, x) -> Fraction:
        xs, ys = self.xs, self.ys
        if not xs[0] <= x <= xs[-1]:
            raise PLError(f"{x} outside the domain")
        i = bisect.bisect_left(xs, x)
        if xs[i] == x:
            return ys[i]
        x0, x1, y0, y1 = xs[i - 1], xs[i], ys[i - 1], ys[i]
        return y0 + (y1 - y0) * (x - x0) / (x1 - x0)

    def pieces(self):
        xs, ys = self.xs, self.ys
        for i in range(len(xs) - 1):
            yield xs[i], xs[i + 1], ys[i], ys[i + 1]

    def then(self, f: PLMap, cap: int = DEFAULT_PIECE_CAP) -> "PLFunction":
        """f ∘ self; values of self must lie in [0, 1]."""
        xs, vs = _refine(f, self.xs, self.ys, cap)
        return PLFunction(xs, [f(v) for v in vs])

    def clamp(self, J: RatInterval) -> "PLFunction":
        """Pointwise nearest point of J."""
        xs, ys = [], []
        for x0, x1, y0, y1 in self.pieces():
            xs.append(x0)
            ys.append(min(max(y0, J.lo), J.hi))
            if y0 != y1:
                for c in sorted({J.lo, J.hi}, reverse=y0 > y1):
                    if min(y0, y1) < c < max(y0, y1):
                        xs.append(x0 + (c - y0) * (x1 - x0) / (y1 - y0))
                        ys.append(c)
        xs.append(self.xs[-1])
        ys.append(min(max(self.ys[-1], J.lo), J.hi))
        return PLFunction(xs, ys)

    def image(self) -> RatInterval:
        return RatInterval(min(self.ys), max(self.ys))

    def fixed_components(self) -> IntervalSet:
        parts = []
        for x0, x1, y0, y1 in self.pieces():
            s = (y1 - y0) / (x1 - x0)
            b = y0 - s * x0
            if s == 1:
                if b == 0:
                    parts.append(RatInterval(x0, x1))
                continue
            r = b / (1 - s)
            if x0 <= r <= x1:
                parts.append(RatInterval.point(r))
        return IntervalSet(parts)

    def preimage(self, J: RatInterval) -> IntervalSet:
        out = []
        for x0, x1, y0, y1 in self.pieces():
            if y0 == y1:
                if J.contains(y0):
                    out.append(RatInterval(x0, x1))
                continue
            lo_v, hi_v = max(J.lo, min(y0, y1)), min(J.hi, max(y0, y1))
            if lo_v > hi_v:
                continue
            s = (x1 - x0) / (y1 - y0)
            a, b = x0 + (lo_v - y0) * s, x0 + (hi_v - y0) * s
            out.append(RatInterval(min(a, b), max(a, b)))
        return IntervalSet(out)


def restricted_iterate(f: PLMap, J: RatInterval, k: int, cap: int = DEFAULT_PIECE_CAP) -> PLFunction:
    """f^k on J only."""
    F = PLFunction.restrict(f, J)
    for _ in range(k - 1):
        F = F.then(f, cap)
    return F


# ---------------------------------------------------------------- densities


class PiecewiseConstDensity:
    """Probability density on [0, 1] constant on the cells between cuts.

    ``cuts`` runs 0 = c_0 < ... < c_n = 1 and ``values`` lists the n cell
    densities.  Adjacent cells with equal density are merged, so the
    Lebesgue density is always ``cuts=(0, 1), values=(1,)``.
    """

    __slots__ = ("cuts", "values")

    def __init__(self, cuts: Sequence, values: Sequence):
        cuts = [rat(c) for c in cuts]
        values = [rat(v) for v in values]
        if len(cuts) != len(values) + 1 or not values:
            raise PLError("density needs one value per cell")
        if cuts[0] != 0 or cuts[-1] != 1:
            raise PLError("density cuts must start at 0 and end at 1")
        if any(not a < b for a, b in zip(cuts, cuts[1:])):
            raise PLError("density cuts must be strictly increasing")
        if any(v < 0 for v in values):
            raise PLError("negative density")
        total = sum((v * (b - a) for v, a, b in zip(values, cuts, cuts[1:])), ZERO)
        if total != 1:
            raise PLError(f"density integrates to {total}, not 1")
        mc, mv = [cuts[0]], []
        for v, b in zip(values, cuts[1:]):
            if mv and mv[-1] == v:
                mc[-1] = b
            else:
                mv.append(v)
                mc.append(b)
        self.cuts = tuple(mc)
        self.values = tuple(mv)

    @staticmethod
    def lebesgue() -> "PiecewiseConstDensity":
        return PiecewiseConstDensity([0, 1], [1])

    @property
    def full_support(self) -> bool:
        return all(v > 0 for v in self.values)

    def cells(self):
        for v, a, b in zip(self.values, self.cuts, self.cuts[1:]):
            yield a, b, v

    def at(self, x) -> Fraction:
        """Density on the cell containing x (right cell at a cut)."""
        i = bisect.bisect_right(self.cuts, x) - 1
        return self.values[min(max(i, 0), len(self.values) - 1)]

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, PiecewiseConstDensity)
            and self.cuts == other.cuts
            and self.values == other.values
        )

    def __hash__(self) -> int:
        return hash((self.cuts, self.values))

    def __repr__(self) -> str:
        cells = ", ".join(
            f"{format_rat(a)}..{format_rat(b)}:{format_rat(v)}" for a, b, v in self.cells()
        )
        return f"PiecewiseConstDensity({cells})"


class MeasureCheck(NamedTuple):
    preserved: bool
    witness: RatInterval | None
    failures: tuple = ()


def preserves_measure(f: PLMap, mu: PiecewiseConstDensity) -> MeasureCheck:
    """Decide exactly whether f preserves the measure with density ``mu``.

    The domain is refined so that f is affine and the density constant on
    each subpiece.  On every open value cell between consecutive critical
    values, the pushforward density is the sum of density/|slope| over the
    subpieces whose image covers the cell; it must match ``mu`` there.
    A flat subpiece carrying positive mass is an atom of the pushforward and
    is reported with a degenerate witness.  When several value cells fail,
    the witness is the longest one (leftmost on ties); ``failures`` lists all.
    """
    xs = set(f.xs) | set(mu.cuts)
    for c in mu.cuts:
        for J in preimage(f, RatInterval.point(c)):
            xs.add(J.lo)
            xs.add(J.hi)
    grid = sorted(xs)
    subs = []
    atoms = []
    values = set(mu.cuts)
    for a, b in zip(grid, grid[1:]):
        ya, yb = f(a), f(b)
        dens = mu.at((a + b) / 2)
        if ya == yb:
            if dens > 0:
                atoms.append(RatInterval.point(ya))
            continue
        subs.append((min(ya, yb), max(ya, yb), dens / abs((yb - ya) / (b - a))))
        values.add(ya)
        values.add(yb)
    failures = list(atoms)
    vs = sorted(values)
    for lo, hi in zip(vs, vs[1:]):
        push = sum((w for s_lo, s_hi, w in subs if s_lo <= lo and hi <= s_hi), ZERO)
        if push != mu.at((lo + hi) / 2):
            failures.append(RatInterval(lo, hi))
    if not failures:
        return MeasureCheck(True, None, ())
    if atoms:
        witness = atoms[0]
    else:
        witness = max(failures, key=lambda J: (J.length, -J.lo))
    return MeasureCheck(False, witness, tuple(failures))


def preserves_lebesgue(f: PLMap) -> bool:
    return preserves_measure(f, PiecewiseConstDensity.lebesgue()).preserved


def measure_homeo(mu: PiecewiseConstDensity) -> PLHomeo:
    """Distribution function x -> mu([0, x]) as an increasing PL homeomorphism."""
    if not mu.full_support:
        raise PLError("density vanishes on a cell; no homeomorphism")
    pts = [(ZERO, ZERO)]
    acc = ZERO
    for a, b, v in mu.cells():
        acc += v * (b - a)
        pts.append((b, acc))
    return PLHomeo(pts)


def pushforward_density(mu: PiecewiseConstDensity, psi: PLHomeo) -> PiecewiseConstDensity:
    """Density of psi_* mu for a PL homeomorphism psi."""
    grid = sorted(set(psi.xs) | set(mu.cuts))
    cuts = []
    for a, b in zip(grid, grid[1:]):
        ya, yb = psi(a), psi(b)
        v = mu.at((a + b) / 2) * (b - a) / abs(yb - ya)
        cuts.append((min(ya, yb), max(ya, yb), v))
    cuts.sort()
    return PiecewiseConstDensity([0] + [c[1] for c in cuts], [c[2] for c in cuts])


def conjugate(f: PLMap, psi: PLHomeo, cap: int = DEFAULT_PIECE_CAP) -> PLMap:
    """psi ∘ f ∘ psi⁻¹."""
    return compose(psi, compose(f, psi.inverse(), cap), cap)


# ---------------------------------------------------------------- invariant densities


class NonErgodicError(PLError):
    """The invariant density is not unique; ``densities`` holds the extreme ones."""

    def __init__(self, densities):
        super().__init__(f"{len(densities)} extreme invariant densities")
        self.densities = densities


def _nullspace(rows: list[list[Fraction]], n: int) -> list[list[Fraction]]:
    """Basis of the right kernel of an exact rational matrix."""
    m = [r[:] for r in rows]
    pivots = []
    r = 0
    for c in range(n):
        p = next((i for i in range(r, len(m)) if m[i][c] != 0), None)
        if p is None:
            continue
        m[r], m[p] = m[p], m[r]
        inv = 1 / m[r][c]
        m[r] = [v * inv for v in m[r]]
        for i in range(len(m)):
            if i != r and m[i][c] != 0:
                t = m[i][c]
                m[i] = [a - t * b for a, b in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
        if r == len(m):
            break
    free = [c for c in range(n) if c not in pivots]
    basis = []
    for fc in free:
        v = [ZERO] * n
        v[fc] = ONE
        for i, pc in enumerate(pivots):
            v[pc] = -m[i][fc]
        basis.append(v)
    return basis


def transfer_matrix(f: PLMap, partition: Sequence[Fraction]) -> list[list[Fraction]]:
    """L[i][j] = 1/|slope on cell i| when f(cell i) covers cell j, else 0."""
    cells = list(zip(partition, partition[1:]))
    n = len(cells)
    L = [[ZERO] * n for _ in range(n)]
    for i, (a, b) in enumerate(cells):
        ya, yb = f(a), f(b)
        if ya == yb:
            raise PLError("flat piece on a partition cell")
        w = abs((b - a) / (yb - ya))
        lo, hi = min(ya, yb), max(ya, yb)
        for j, (c, d) in enumerate(cells):
            if lo <= c and d <= hi:
                L[i][j] = w
    return L


def _density_from_vector(partition, v) -> PiecewiseConstDensity:
    total = sum((x * (b - a) for x, a, b in zip(v, partition, partition[1:])), ZERO)
    return PiecewiseConstDensity(partition, [x / total for x in v])


def invariant_density(model) -> PiecewiseConstDensity:
    """Invariant piecewise-constant density of a Markov PL map.

    ``model`` needs ``f`` (the map) and ``partition`` (sorted cut points with
    f affine and non-flat on each cell, images unions of cells).  Raises
    :class:`NonErgodicError` carrying every extreme density when the
    invariant density is not unique.
    """
    f, P = model.f, list(model.partition)
    L = transfer_matrix(f, P)
    n = len(L)
    # v is invariant when v_j = sum_i v_i L[i][j]
    rows = [[L[i][j] - (ONE if i == j else ZERO) for i in range(n)] for j in range(n)]
    basis = _nullspace(rows, n)
    if len(basis) == 1:
        v = basis[0]
        if all(x >= 0 for x in v) or all(x <= 0 for x in v):
            return _density_from_vector(P, v)
    # otherwise one extreme density per closed communicating class
    adj = {i: [j for j in range(n) if L[i][j] != 0] for i in range(n)}
    out = []
    for comp in strongly_connected_components(adj):
        cs = set(comp)
        if any(j not in cs for i in comp for j in adj[i]):
            continue
        sub = [[L[i][j] - (ONE if i == j else ZERO) for i in comp] for j in comp]
        kb = _nullspace(sub, len(comp))
        if len(kb) != 1:
            continue
        sign = 1 if sum(kb[0]) > 0 else -1
        v = [ZERO] * n
        for pos, i in enumerate(comp):
            v[i] = sign * kb[0][pos]
        if all(x >= 0 for x in v):
            out.append(_density_from_vector(P, v))
    raise NonErgodicError(out)


# ---------------------------------------------------------------- text format


def format_plmap(f: PLMap) -> str:
    lines = ["plmap 1"]
    lines += [f"{format_rat(x)} {format_rat(y)}" for x, y in f.breakpoints]
    return "\n".join(lines) + "\n"


def _data_lines(text: str, header: str) -> list[list[str]]:
    lines = [ln.strip() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln and not ln.startswith("#")]
    if not lines or lines[0].split() != header.split():
        raise PLError(f"missing header {header!r}")
    rows = []
    for ln in lines[1:]:
        parts = ln.split()
        if len(parts) != 2:
            raise PLError(f"malformed line {ln!r}")
        for p in parts:
            try:
                canon = format_rat(Fraction(p))
            except (ValueError, ZeroDivisionError):
                canon = None
            if canon != p:
                raise PLError(f"not an integer or reduced p/q: {p!r}")
        rows.append(parts)
    return rows


def parse_plmap(text: str) -> PLMap:
    try:
        rows = _data_lines(text, "plmap 1")
        return PLMap([(rat(x), rat(y)) for x, y in rows])
    except ValueError as exc:
        raise PLError(str(exc)) from exc


def format_density(mu: PiecewiseConstDensity) -> str:
    lines = ["density 1"]
    for a, _, v in mu.cells():
        lines.append(f"{format_rat(a)} {format_rat(v)}")
    lines.append("1 0")
    return "\n".join(lines) + "\n"


def parse_density(text: str) -> PiecewiseConstDensity:
    """``cut value`` rows; each value holds from its cut to the next cut.

    The final row must be ``1 v`` and its value is ignored.
    """
    try:
        rows = _data_lines(text, "density 1")
        cuts = [rat(c) for c, _ in rows]
        vals = [rat(v) for _, v in rows[:-1]]
        return PiecewiseConstDensity(cuts, vals)
    except ValueError as exc:
        raise PLError(str(exc)) from exc
