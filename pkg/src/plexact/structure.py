"""Markov partitions and the certificates built on them.

Covers leo (locally eventually onto) certification, turbulence search,
exact entropy brackets, the decomposition of a map with dense periodic
points into mixing pieces of its square, the splitting test, and the
homotopy joining a measure-preserving map to the identity.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from ._graphs import cyclic_classes, reachable, strongly_connected_components
from .periodic import fix_set, fixed_components
from .pl_core import (
    DEFAULT_PIECE_CAP,
    UNIT,
    IntervalSet,
    PLError,
    PLMap,
    RatInterval,
    compose,
    format_rat,
    image,
    iterate,
    preserves_lebesgue,
    rat,
    transfer_matrix,
)

DEFAULT_DEPTH = 64
DEFAULT_RESOLUTION = Fraction(1, 64)

LEO = "leo-certified"
LEO_AT_RESOLUTION = "leo-at-resolution"
DISPROVED = "disproved"
UNKNOWN = "unknown"


# ---------------------------------------------------------------- Markov models


@dataclass(frozen=True)
class MarkovModel:
    f: PLMap
    partition: tuple[Fraction, ...]
    covering: tuple[tuple[int, ...], ...]
    transfer: tuple[tuple[Fraction, ...], ...] | None
    depth: int

    @property
    def cells(self) -> list[RatInterval]:
        P = self.partition
        return [RatInterval(a, b) for a, b in zip(P, P[1:])]

    @property
    def size(self) -> int:
        return len(self.partition) - 1

    def adjacency(self) -> dict[int, list[int]]:
        return {i: [j for j, v in enumerate(row) if v] for i, row in enumerate(self.covering)}


def markovize(
    f: PLMap, depth: int = DEFAULT_DEPTH, max_points: int = 20000
) -> MarkovModel | None:
    """Close the breakpoint set under forward images.

    Returns None (not found) when the set is still growing after ``depth``
    rounds or passes ``max_points``.
    """
    if depth < 1:
        raise PLError("depth must be at least 1")
    P = set(f.xs)
    frontier = set(f.xs)
    for rounds in range(1, depth + 1):
        new = {f(x) for x in frontier} - P
        if not new:
            return _model(f, sorted(P), rounds)
        P |= new
        if len(P) > max_points:
            return None
        frontier = new
    return None


def markov_model(f: PLMap, partition) -> MarkovModel:
    """Model for a caller-supplied Markov partition, checked exactly."""
    P = sorted({rat(x) for x in partition})
    if P[0] != 0 or P[-1] != 1:
        raise PLError("partition must run from 0 to 1")
    cuts = set(P)
    if not set(f.xs) <= cuts:
        raise PLError("every breakpoint of the map must be a cut point")
    if any(f(x) not in cuts for x in P):
        raise PLError("cut points must map to cut points")
    return _model(f, P, 0)


def _model(f: PLMap, P: list[Fraction], rounds: int) -> MarkovModel:
    n = len(P) - 1
    index = {p: i for i, p in enumerate(P)}
    M = []
    for i in range(n):
        ya, yb = f(P[i]), f(P[i + 1])
        lo, hi = index[min(ya, yb)], index[max(ya, yb)]
        M.append(tuple(1 if lo <= j < hi else 0 for j in range(n)))
    try:
        L = tuple(tuple(r) for r in transfer_matrix(f, P))
    except PLError:
        L = None
    return MarkovModel(f, tuple(P), tuple(M), L, rounds)


# ---------------------------------------------------------------- leo


@dataclass(frozen=True)
class LeoCertificate:
    """Verdict on whether every open set eventually covers [0, 1].

    ``exponent``: for ``leo-certified`` the primitivity exponent e of the
    covering matrix (every Markov cell covers [0, 1] after e steps); for
    ``leo-at-resolution`` the number of steps after which every mesh cell
    covers [0, 1].  A disproof carries a set S != [0, 1] containing an open
    interval with f^period(S) inside S.
    """

    verdict: str
    exponent: int | None = None
    model: MarkovModel | None = None
    resolution: Fraction | None = None
    invariant_set: IntervalSet | None = None
    period: int | None = None
    collapsed: RatInterval | None = None
    reason: str = ""

    @property
    def is_leo(self) -> bool:
        return self.verdict in (LEO, LEO_AT_RESOLUTION)

    def verify(self, f: PLMap) -> bool:
        """Replay the witness with exact interval images."""
        if self.verdict == LEO:
            cells = [RatInterval(a, b) for a, b in zip(self.model.partition, self.model.partition[1:])]
            return self.model.f == f and all(
                _push(f, c, self.exponent) == UNIT for c in cells
            ) and self.model.size >= 2
        if self.verdict == LEO_AT_RESOLUTION:
            n = round(1 / self.resolution)
            cells = [RatInterval(Fraction(i, n), Fraction(i + 1, n)) for i in range(n)]
            return all(_push(f, c, self.exponent) == UNIT for c in cells)
        if self.verdict == DISPROVED:
            if self.collapsed is not None:
                return not self.collapsed.is_point and image(f, self.collapsed).is_point
            S = self.invariant_set
            if S is None or not S.intervals() or S == IntervalSet([UNIT]):
                return False
            img = S
            for _ in range(self.period):
                img = IntervalSet(image(f, J) for J in img)
            return img.issubset(S)
        return True

    def to_text(self) -> str:
        parts = [f"leo 1 {self.verdict}"]
        if self.exponent is not None:
            parts.append(f"exponent {self.exponent}")
        if self.resolution is not None:
            parts.append(f"resolution {format_rat(self.resolution)}")
        if self.model is not None:
            parts.append(f"cells {self.model.size} depth {self.model.depth}")
        if self.invariant_set is not None:
            s = " ".join(f"{format_rat(J.lo)}:{format_rat(J.hi)}" for J in self.invariant_set)
            parts.append(f"period {self.period} set {s}")
        if self.reason:
            parts.append(f"reason {self.reason}")
        return " ".join(parts)


def _push(f: PLMap, J: RatInterval, n: int) -> RatInterval:
    for _ in range(n):
        J = image(f, J)
    return J


def _cells_union(model: MarkovModel, idx) -> IntervalSet:
    P = model.partition
    return IntervalSet(RatInterval(P[i], P[i + 1]) for i in idx)


def primitivity_exponent(adj: dict[int, list[int]], n: int) -> int | None:
    """Least e with M^e > 0, or None if no e up to Wielandt's bound n^2 - 2n + 2 works.

    Boolean matrix powers by repeated squaring and binary lifting; products
    of 0/1 matrices are clipped back to 0/1 so float32 arithmetic is exact.
    """
    M = np.zeros((n, n), dtype=np.float32)
    for i, js in adj.items():
        M[i, js] = 1
    bound = n * n - 2 * n + 2
    powers = [M]
    while not powers[-1].all():
        if 2 ** (len(powers) - 1) > bound:
            return None
        P = powers[-1]
        powers.append(np.minimum(P @ P, 1))
    if len(powers) == 1:
        return 1
    cur = None
    k = 0
    for b in range(len(powers) - 2, -1, -1):
        cand = powers[b] if cur is None else np.minimum(cur @ powers[b], 1)
        if not cand.all():
            cur = cand
            k += 2**b
    return k + 1


def certify_leo(
    f: PLMap,
    depth: int = DEFAULT_DEPTH,
    resolution=DEFAULT_RESOLUTION,
    max_iterates: int = 256,
) -> LeoCertificate:
    model = markovize(f, depth)
    if model is not None:
        return _leo_from_model(f, model)
    return leo_at_resolution(f, resolution, max_iterates)


def _leo_from_model(f: PLMap, model: MarkovModel) -> LeoCertificate:
    n = model.size
    adj = model.adjacency()
    flat = [i for i in range(n) if not adj[i]]
    if flat:
        P = model.partition
        i = flat[0]
        return LeoCertificate(DISPROVED, model=model, collapsed=RatInterval(P[i], P[i + 1]),
                              reason="flat piece sends an open cell to a point")
    if n == 1:
        # f is an affine bijection of [0, 1]: the left half returns in one or two steps
        S = IntervalSet([RatInterval(Fraction(0), Fraction(1, 2))])
        for p in (1, 2):
            cert = LeoCertificate(DISPROVED, model=model, invariant_set=S, period=p,
                                  reason="affine bijection")
            if cert.verify(f):
                return cert
        return LeoCertificate(UNKNOWN, model=model)
    comps = strongly_connected_components(adj)
    if len(comps) == 1:
        period, classes = cyclic_classes(adj, comps[0])
        if period == 1:
            e = primitivity_exponent(adj, n)
            if e is not None:
                return LeoCertificate(LEO, exponent=e, model=model)
        S = _cells_union(model, classes[0])
        return LeoCertificate(DISPROVED, model=model, invariant_set=S, period=period,
                              reason="covering matrix is periodic")
    for i in range(n):
        R = reachable(adj, [i])
        if len(R) < n:
            S = _cells_union(model, sorted(R))
            return LeoCertificate(DISPROVED, model=model, invariant_set=S, period=1,
                                  reason="covering matrix is reducible")
    return LeoCertificate(UNKNOWN, model=model)


def leo_at_resolution(f: PLMap, resolution=DEFAULT_RESOLUTION, max_iterates: int = 256) -> LeoCertificate:
    """Check that every cell of a uniform mesh covers [0, 1] within the step budget.

    This is a statement about one mesh only.  When some cell's image
    sequence cycles without reaching [0, 1], that cycle disproves leo.
    """
    resolution = rat(resolution)
    n = -(-resolution.denominator // resolution.numerator)
    worst = 0
    for i in range(n):
        J = RatInterval(Fraction(i, n), Fraction(i + 1, n))
        seen = {J: 0}
        for t in range(1, max_iterates + 1):
            J = image(f, J)
            if J == UNIT:
                worst = max(worst, t)
                break
            if J in seen:
                S = IntervalSet([J])
                if J.is_point:
                    return LeoCertificate(DISPROVED, resolution=Fraction(1, n),
                                          collapsed=RatInterval(Fraction(i, n), Fraction(i + 1, n)),
                                          reason="cell collapses to a point")
                return LeoCertificate(DISPROVED, resolution=Fraction(1, n), invariant_set=S,
                                      period=t - seen[J], reason="periodic interval")
            seen[J] = t
        else:
            return LeoCertificate(UNKNOWN, resolution=Fraction(1, n),
                                  reason=f"cell {i} did not cover within {max_iterates} steps")
    return LeoCertificate(LEO_AT_RESOLUTION, exponent=worst, resolution=Fraction(1, n))


# ---------------------------------------------------------------- turbulence


@dataclass(frozen=True)
class TurbulenceWitness:
    J: RatInterval
    K: RatInterval
    q: int

    def verify(self, f: PLMap) -> bool:
        if self.J.hi > self.K.lo and self.K.hi > self.J.lo:
            return False
        g = iterate(f, self.q)
        both = self.J.hull(self.K) if self.J.hi == self.K.lo or self.K.hi == self.J.lo else None
        need = [self.J, self.K] if both is None else [both]
        imgs = [image(g, self.J), image(g, self.K)]
        return all(I.contains_interval(N) for I in imgs for N in need)


def _candidate_points(f: PLMap, g: PLMap, depth: int, limit: int) -> list[Fraction]:
    model = markovize(f, depth, max_points=4 * limit)
    pts = set(g.xs) | set(fixed_components(g).points())
    if model is not None:
        pts |= set(model.partition)
    pts = sorted(pts)
    if len(pts) > limit:
        step = len(pts) / limit
        keep = {pts[0], pts[-1]}
        keep |= {pts[int(i * step)] for i in range(limit)}
        pts = sorted(keep)
    return pts


def turbulence_at(f: PLMap, q: int, depth: int = DEFAULT_DEPTH, limit: int = 64,
                  cap: int = DEFAULT_PIECE_CAP) -> TurbulenceWitness | None:
    """Exact search for J, K with J ∪ K inside f^q(J) ∩ f^q(K)."""
    g = iterate(f, q, cap)
    pts = _candidate_points(f, g, depth, limit)
    m = len(pts)
    img = {}

    def im(a, b):
        key = (a, b)
        if key not in img:
            img[key] = image(g, RatInterval(pts[a], pts[b]))
        return img[key]

    for b in range(1, m - 1):
        for a in range(b - 1, -1, -1):
            IJ = im(a, b)
            if not (IJ.lo <= pts[a] and IJ.hi >= pts[b]):
                continue
            for c in range(b + 1, m):
                hull = RatInterval(pts[a], pts[c])
                if IJ.contains_interval(hull) and im(b, c).contains_interval(hull):
                    return TurbulenceWitness(RatInterval(pts[a], pts[b]), RatInterval(pts[b], pts[c]), q)
    if m <= 24:
        for a in range(m):
            for b in range(a + 1, m):
                for c in range(b + 1, m):
                    for d in range(c + 1, m):
                        J, K = RatInterval(pts[a], pts[b]), RatInterval(pts[c], pts[d])
                        Ij, Ik = im(a, b), im(c, d)
                        if all(I.contains_interval(N) for I in (Ij, Ik) for N in (J, K)):
                            return TurbulenceWitness(J, K, q)
    return None


def find_turbulence(f: PLMap, max_iterate: int, depth: int = DEFAULT_DEPTH) -> TurbulenceWitness | None:
    if max_iterate < 1:
        raise PLError("max_iterate must be at least 1")
    for q in range(1, max_iterate + 1):
        w = turbulence_at(f, q, depth)
        if w is not None:
            return w
    return None


# ---------------------------------------------------------------- entropy


@dataclass(frozen=True, order=False)
class EntropyBound:
    """The number (1/divisor) * log(base)."""

    base: Fraction
    divisor: int

    def __post_init__(self):
        object.__setattr__(self, "base", rat(self.base))
        if self.base < 1 or self.divisor < 1:
            raise PLError("entropy bound needs base >= 1 and divisor >= 1")

    def compare(self, other: "EntropyBound") -> int:
        lhs = self.base ** other.divisor
        rhs = other.base ** self.divisor
        return (lhs > rhs) - (lhs < rhs)

    def __ge__(self, other):
        return self.compare(other) >= 0

    def __le__(self, other):
        return self.compare(other) <= 0

    def __gt__(self, other):
        return self.compare(other) > 0

    def __lt__(self, other):
        return self.compare(other) < 0

    def __float__(self):
        import math

        return math.log(self.base) / self.divisor

    def same_value(self, other: "EntropyBound") -> bool:
        return self.compare(other) == 0

    def __str__(self) -> str:
        return f"log({format_rat(self.base)})/{self.divisor}"


ZERO_ENTROPY = EntropyBound(Fraction(1), 1)


@dataclass(frozen=True)
class EntropyCertificate:
    lower: EntropyBound | None
    upper: EntropyBound | None
    method: str
    upper_method: str = ""
    witness: object = None

    @property
    def exact(self) -> bool:
        return self.lower is not None and self.upper is not None and self.lower.same_value(self.upper)

    def to_text(self) -> str:
        lo = f"{format_rat(self.lower.base)} {self.lower.divisor}" if self.lower else "none"
        up = f"{format_rat(self.upper.base)} {self.upper.divisor}" if self.upper else "none"
        return f"entropy 1 lower {lo} upper {up} method {self.method}"


def _matmul(A, B):
    Bt = list(zip(*B))
    return [[sum(a * b for a, b in zip(row, col)) for col in Bt] for row in A]


def _row_sum_brackets(model: MarkovModel, max_power: int):
    adj = model.adjacency()
    M = [list(r) for r in model.covering]
    comps = strongly_connected_components(adj)
    best_lo = None
    best_hi = None
    power = M
    blocks = [c for c in comps if len(c) > 1 or c[0] in adj[c[0]]]
    for q in range(1, max_power + 1):
        if q > 1:
            power = _matmul(power, M)
        hi = EntropyBound(max(1, max(sum(r) for r in power)), q)
        if best_hi is None or hi < best_hi:
            best_hi = hi
        for comp in blocks:
            cs = set(comp)
            lo_val = min(sum(power[i][j] for j in cs) for i in comp)
            if lo_val >= 1:
                lo = EntropyBound(lo_val, q)
                if best_lo is None or lo > best_lo:
                    best_lo = lo
        if best_lo is not None and best_lo.same_value(best_hi):
            break
    if best_lo is None:
        best_lo = ZERO_ENTROPY
    return best_lo, best_hi


def lap_count(f: PLMap) -> int:
    return len(f.turning_points()) + 1


def entropy_bounds(f: PLMap, depth: int = DEFAULT_DEPTH, max_power: int = 8) -> EntropyCertificate:
    """Exact brackets for topological entropy, as (base, divisor) pairs."""
    slopes = {abs(s) for s in f.slopes()}
    if len(slopes) == 1 and 0 not in slopes:
        s = max(slopes.pop(), Fraction(1))
        b = EntropyBound(s, 1)
        return EntropyCertificate(b, b, "constant-slope", "constant-slope")
    candidates = []
    upper = EntropyBound(max(1, lap_count(f)), 1)
    upper_method = "lap-count"
    model = markovize(f, depth, max_points=400)
    if model is not None:
        lo, hi = _row_sum_brackets(model, max_power)
        candidates.append((lo, "covering-matrix", model))
        if hi < upper:
            upper, upper_method = hi, "covering-matrix"
    tw = find_turbulence(f, 2, depth)
    if tw is not None:
        candidates.append((EntropyBound(2, tw.q), "turbulence-of-iterate", tw))
    if not candidates:
        return EntropyCertificate(None, upper, "none", upper_method)
    best = candidates[0]
    for c in candidates[1:]:
        if c[0] > best[0]:
            best = c
    return EntropyCertificate(best[0], upper, best[1], upper_method, best[2])


@dataclass(frozen=True)
class HorseshoeWitness:
    intervals: tuple[RatInterval, ...]
    q: int

    def verify(self, f: PLMap) -> bool:
        g = iterate(f, self.q)
        ivs = self.intervals
        if any(a.hi > b.lo for a, b in zip(ivs, ivs[1:])):
            return False
        hull = RatInterval(ivs[0].lo, ivs[-1].hi)
        return all(image(g, J).contains_interval(hull) for J in ivs)

    @property
    def bound(self) -> EntropyBound:
        return EntropyBound(len(self.intervals), self.q)


def horseshoe_in(f: PLMap, window: RatInterval, points, q: int = 1) -> HorseshoeWitness | None:
    """Greedy left-to-right horseshoe inside ``window`` over the given cut points.

    Each interval is the shortest run of consecutive cuts whose image under
    f^q covers the whole window.
    """
    g = iterate(f, q)
    pts = sorted(p for p in points if window.contains(p))
    pieces = []
    start = 0
    for end in range(1, len(pts)):
        J = RatInterval(pts[start], pts[end])
        if image(g, J).contains_interval(window):
            pieces.append(J)
            start = end
    if len(pieces) < 2:
        return None
    return HorseshoeWitness(tuple(pieces), q)


# ---------------------------------------------------------------- decomposition


def restrict_rescale(g: PLMap, J: RatInterval) -> PLMap:
    """g restricted to an invariant interval J, moved to [0, 1] affinely."""
    L = J.length
    pts = [J.lo] + [x for x in g.xs if J.lo < x < J.hi] + [J.hi]
    out = []
    for x in pts:
        y = g(x)
        if not J.contains(y):
            raise PLError(f"{J} is not invariant")
        out.append(((x - J.lo) / L, (y - J.lo) / L))
    return PLMap(out)


class HypothesisViolation(PLError):
    """Input does not behave like a map with dense periodic points."""


@dataclass(frozen=True)
class BargeMartinDecomposition:
    pieces: tuple[tuple[RatInterval, LeoCertificate], ...]
    complement: tuple[RatInterval, ...]
    complement_identity: bool

    @property
    def intervals(self) -> list[RatInterval]:
        return [J for J, _ in self.pieces]

    @property
    def all_mixing(self) -> bool:
        return all(c.is_leo for _, c in self.pieces)


def _identity_on(g: PLMap, C: RatInterval) -> bool:
    pts = [C.lo, C.hi] + [x for x in g.xs if C.lo < x < C.hi]
    return all(g(x) == x for x in pts)


def barge_martin(f: PLMap, depth: int = DEFAULT_DEPTH) -> BargeMartinDecomposition:
    """Split [0, 1] into the closed pieces where the square acts mixingly.

    The complement of the pieces is a union of intervals of points fixed by
    the square.  Pieces are separated at fixed points p of the square where
    both sides are invariant.
    """
    g = compose(f, f)
    fix2 = fix_set(f, 2).components
    fixed_intervals = fix2.intervals()
    # closure of the set where g differs from the identity
    edges = [Fraction(0)]
    for C in fixed_intervals:
        edges += [C.lo, C.hi]
    edges.append(Fraction(1))
    windows = [RatInterval(a, b) for a, b in zip(edges[::2], edges[1::2]) if a < b]
    pieces = []
    for W in windows:
        if image(g, W) != W:
            raise HypothesisViolation(f"square does not map {W} onto itself")
        cuts = [W.lo]
        for p in fix2.points():
            if not W.lo < p < W.hi:
                continue
            if image(g, RatInterval(W.lo, p)) == RatInterval(W.lo, p) and image(
                g, RatInterval(p, W.hi)
            ) == RatInterval(p, W.hi):
                cuts.append(p)
        cuts.append(W.hi)
        for a, b in zip(cuts, cuts[1:]):
            J = RatInterval(a, b)
            pieces.append((J, certify_leo(restrict_rescale(g, J), depth)))
    comp_ok = all(_identity_on(g, C) for C in fixed_intervals)
    return BargeMartinDecomposition(tuple(pieces), tuple(fixed_intervals), comp_ok)


@dataclass(frozen=True)
class SplitWitness:
    J: RatInterval
    period: int
    components: tuple[RatInterval, ...]
    endpoints_free: bool  # f(0), f(1) both outside {0, 1}

    def verify(self, f: PLMap) -> bool:
        return _splits(f, compose(f, f), self.J) is not None


def _splits(f: PLMap, g: PLMap, J: RatInterval):
    if J == UNIT or not (J.hi > 0 and J.lo < 1):
        return None
    fJ = image(f, J)
    if fJ == J:
        period = 1
    elif not J.meets_interior(fJ) and image(g, J) == J and not (fJ == J):
        period = 2
    else:
        return None
    if period == 2 and J.is_point != fJ.is_point:
        return None
    covered = IntervalSet([J, fJ])
    comps = []
    prev = Fraction(0)
    for K in covered:
        if prev < K.lo:
            comps.append(RatInterval(prev, K.lo))
        prev = K.hi
    if prev < 1:
        comps.append(RatInterval(prev, Fraction(1)))
    for C in comps:
        if image(g, C) != C:
            return None
    return period, tuple(comps)


def find_split(f: PLMap, depth: int = DEFAULT_DEPTH) -> SplitWitness | None:
    """First candidate interval or point that splits [0, 1] in the exact sense.

    Candidates must meet (0, 1): the endpoints themselves always satisfy
    the definition when fixed, which says nothing about the interior.
    Order: fixed intervals of f and f^2, then decomposition pieces, then
    isolated fixed points.
    """
    g = compose(f, f)
    free = f(0) not in (0, 1) and f(1) not in (0, 1)
    fix1 = fixed_components(f)
    fix2 = fixed_components(g)
    cands = fix1.intervals() + fix2.intervals()
    try:
        cands += barge_martin(f, depth).intervals
    except HypothesisViolation:
        pass
    cands += [RatInterval.point(p) for p in fix1.points() + fix2.points()]
    seen = set()
    for J in cands:
        if J in seen:
            continue
        seen.add(J)
        res = _splits(f, g, J)
        if res is not None:
            return SplitWitness(J, res[0], res[1], free)
    return None


# ---------------------------------------------------------------- homotopy


def homotopy_to_identity(g: PLMap, alpha) -> PLMap:
    """Identity on [0, alpha], a shrunk copy of g on [alpha, 1]."""
    alpha = rat(alpha)
    if not 0 <= alpha <= 1:
        raise PLError("alpha must lie in [0, 1]")
    if g(0) != 0:
        raise PLError("homotopy needs g(0) = 0")
    if alpha == 1:
        return PLMap.identity()
    w = 1 - alpha
    pts = [(Fraction(0), Fraction(0))] if alpha > 0 else []
    pts += [(alpha + w * x, alpha + w * y) for x, y in g.breakpoints]
    return PLMap(pts)


def homotopy_preserves_lebesgue(g: PLMap, alpha) -> bool:
    return preserves_lebesgue(homotopy_to_identity(g, alpha))
