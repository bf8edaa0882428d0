"""Fixed points, periodic points and transversality, all computed exactly."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import ceil

from .pl_core import (
    DEFAULT_PIECE_CAP,
    IntervalSet,
    PLError,
    PLMap,
    RatInterval,
    compose,
    format_rat,
    iterate,
    rat,
)

ABOVE_BELOW = "above-below"  # f^k > x just left of B, f^k < x just right
BELOW_ABOVE = "below-above"  # f^k < x just left of B, f^k > x just right


@dataclass(frozen=True)
class FixSet:
    k: int
    components: IntervalSet

    def points(self) -> list[Fraction]:
        return self.components.points()

    def intervals(self) -> list[RatInterval]:
        return self.components.intervals()

    def contains(self, x) -> bool:
        return self.components.contains(x)


def fixed_components(g: PLMap) -> IntervalSet:
    """Exact solution set of g(x) = x."""
    parts = []
    for x0, x1, y0, y1 in g.pieces():
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


def fix_set(f: PLMap, k: int, cap: int = DEFAULT_PIECE_CAP) -> FixSet:
    if k < 1:
        raise PLError("period exponent must be positive")
    return FixSet(k, fixed_components(iterate(f, k, cap)))


def minimal_period(f: PLMap, x, bound: int) -> int | None:
    """Least n <= bound with f^n(x) = x, by exact orbit evaluation."""
    x = rat(x)
    y = x
    for n in range(1, bound + 1):
        y = f(y)
        if y == x:
            return n
    return None


@dataclass(frozen=True)
class SignPattern:
    transverse: bool
    pattern: str | None
    left: int | None  # sign of f^k - id on A, None when A does not exist
    right: int | None
    A: RatInterval | None
    B: RatInterval
    C: RatInterval | None


@dataclass(frozen=True)
class PeriodicPoint:
    x: Fraction
    minimal_period: int
    transverse: bool
    local_data: SignPattern


@dataclass(frozen=True)
class PerSet:
    """Isolated points of least period k plus intervals of k-periodic points."""

    k: int
    points: tuple[PeriodicPoint, ...]
    intervals: tuple[RatInterval, ...]

    def __iter__(self):
        return iter(self.points)

    def __len__(self) -> int:
        return len(self.points)

    def xs(self) -> list[Fraction]:
        return [p.x for p in self.points]


def _sign(v) -> int:
    return (v > 0) - (v < 0)


def _pattern(g: PLMap, comps: IntervalSet, x: Fraction) -> SignPattern:
    B = comps.component_of(x)
    parts = comps.parts
    i = parts.index(B)
    A = C = None
    left = right = None
    if B.lo > 0:
        a1 = parts[i - 1].hi if i > 0 else Fraction(0)
        A = RatInterval(a1, B.lo)
        t = A.midpoint
        left = _sign(g(t) - t)
    if B.hi < 1:
        c2 = parts[i + 1].lo if i + 1 < len(parts) else Fraction(1)
        C = RatInterval(B.hi, c2)
        t = C.midpoint
        right = _sign(g(t) - t)
    pattern = None
    if left == 1 and right == -1:
        pattern = ABOVE_BELOW
    elif left == -1 and right == 1:
        pattern = BELOW_ABOVE
    return SignPattern(pattern is not None, pattern, left, right, A, B, C)


def is_transverse(f: PLMap, x, k: int, cap: int = DEFAULT_PIECE_CAP) -> SignPattern:
    """Sign pattern of f^k - id around the fixed component containing x.

    Points whose component touches 0 or 1 have only one side; they are
    reported non-transverse with the available sign filled in.
    """
    x = rat(x)
    g = iterate(f, k, cap)
    if g(x) != x:
        raise PLError(f"{x} is not fixed by f^{k}")
    return _pattern(g, fixed_components(g), x)


def _divisors(k: int) -> list[int]:
    return [d for d in range(1, k) if k % d == 0]


def per_set(f: PLMap, k: int, cap: int = DEFAULT_PIECE_CAP) -> PerSet:
    g = iterate(f, k, cap)
    comps = fixed_components(g)
    lower = [fixed_components(iterate(f, d, cap)) for d in _divisors(k)]
    pts = []
    for x in comps.points():
        if any(L.contains(x) for L in lower):
            continue
        sp = _pattern(g, comps, x)
        pts.append(PeriodicPoint(x, k, sp.transverse, sp))
    return PerSet(k, tuple(pts), tuple(comps.intervals()))


# ---------------------------------------------------------------- density of periodic points


@dataclass(frozen=True)
class CellVerdict:
    cell: RatInterval
    witness: Fraction | None
    period: int | None

    @property
    def exhausted(self) -> bool:
        return self.witness is None


@dataclass(frozen=True)
class DensityCertificate:
    resolution: Fraction
    max_period: int
    cells: tuple[CellVerdict, ...] = field(default=())

    @property
    def all_witnessed(self) -> bool:
        return all(not c.exhausted for c in self.cells)

    def verify(self, f: PLMap) -> bool:
        for c in self.cells:
            if c.exhausted:
                continue
            if not c.cell.contains(c.witness):
                return False
            if minimal_period(f, c.witness, c.period) != c.period:
                return False
        return True

    def to_text(self) -> str:
        lines = [f"periodic-density 1 {format_rat(self.resolution)} {self.max_period}"]
        for c in self.cells:
            head = f"{format_rat(c.cell.lo)} {format_rat(c.cell.hi)}"
            if c.exhausted:
                lines.append(f"{head} exhausted")
            else:
                lines.append(f"{head} witness {format_rat(c.witness)} period {c.period}")
        return "\n".join(lines) + "\n"


def uniform_cells(resolution) -> list[RatInterval]:
    n = ceil(1 / rat(resolution))
    return [RatInterval(Fraction(i, n), Fraction(i + 1, n)) for i in range(n)]


def dense_periodicity_certificate(
    f: PLMap, resolution, max_period: int, cap: int = DEFAULT_PIECE_CAP
) -> DensityCertificate:
    """Search each cell of a uniform partition for a periodic point.

    A cell is ``exhausted`` when no point of period <= max_period lies in it;
    that is a failure to find, not a proof of absence of periodic points.
    """
    resolution = rat(resolution)
    if resolution <= 0:
        raise PLError("resolution must be positive")
    cells = uniform_cells(resolution)
    found: list[tuple[Fraction, int] | None] = [None] * len(cells)
    g = f
    for k in range(1, max_period + 1):
        if k > 1:
            g = compose(f, g, cap)
        comps = fixed_components(g)
        for i, cell in enumerate(cells):
            if found[i] is not None:
                continue
            hit = comps.intersect_interval(cell)
            if hit:
                J = hit.parts[0]
                w = J.lo if J.is_point else J.midpoint
                found[i] = (w, minimal_period(f, w, k))
        if all(v is not None for v in found):
            break
    verdicts = tuple(
        CellVerdict(c, *(v if v is not None else (None, None))) for c, v in zip(cells, found)
    )
    return DensityCertificate(resolution, max_period, verdicts)

