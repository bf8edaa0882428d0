"""Pseudo-orbits, exact tracing, the linking property and a non-shadowing construction."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

from .periodic import per_set
from .pl_core import (
    IntervalSet,
    PLError,
    PLMap,
    RatInterval,
    UNIT,
    format_rat,
    image,
    preimage,
    rat,
    restricted_iterate,
    sup_distance,
)
from .structure import LeoCertificate, certify_leo

ZERO, ONE = Fraction(0), Fraction(1)

LINKING_NOTE = "orbit condition read as d(f^j x, f^j z) < eps for 0 < j < m"


# ---------------------------------------------------------------- pseudo-orbits


@dataclass(frozen=True)
class PseudoOrbit:
    """Finite delta-pseudo-orbit.  A periodic one stores a single period."""

    points: tuple[Fraction, ...]
    delta: Fraction
    periodic: bool = False

    def __post_init__(self):
        object.__setattr__(self, "points", tuple(rat(x) for x in self.points))
        object.__setattr__(self, "delta", rat(self.delta))
        if self.delta <= 0:
            raise PLError("delta must be positive")
        if not self.points:
            raise PLError("empty pseudo-orbit")
        if any(not UNIT.contains(x) for x in self.points):
            raise PLError("pseudo-orbit leaves [0, 1]")

    @property
    def period(self) -> int | None:
        return len(self.points) if self.periodic else None

    def steps(self):
        """Consecutive pairs (x_n, x_{n+1}), including the wrap for periodic orbits."""
        pts = self.points
        pairs = list(zip(pts, pts[1:]))
        if self.periodic:
            pairs.append((pts[-1], pts[0]))
        return pairs

    def defect(self, f: PLMap) -> Fraction:
        return max((abs(f(a) - b) for a, b in self.steps()), default=ZERO)

    def is_valid(self, f: PLMap) -> bool:
        return all(abs(f(a) - b) < self.delta for a, b in self.steps())

    def unrolled(self, length: int) -> tuple[Fraction, ...]:
        if not self.periodic:
            return self.points[:length]
        n = len(self.points)
        return tuple(self.points[i % n] for i in range(length))

    def to_text(self) -> str:
        head = f"porbit 1 delta {format_rat(self.delta)}"
        if self.periodic:
            head += f" period {len(self.points)}"
        return "\n".join([head] + [format_rat(x) for x in self.points]) + "\n"


def parse_pseudo_orbit(text: str) -> PseudoOrbit:
    lines = [ln.split("#", 1)[0].strip() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln]
    if not lines:
        raise PLError("empty pseudo-orbit file")
    head = lines[0].split()
    if head[:3] != ["porbit", "1", "delta"] or len(head) not in (4, 6):
        raise PLError("expected header 'porbit 1 delta <q> [period <N>]'")
    delta = rat(head[3])
    periodic = len(head) == 6
    if periodic and head[4] != "period":
        raise PLError("expected 'period <N>' after delta")
    pts = tuple(rat(tok) for ln in lines[1:] for tok in ln.split())
    if periodic and int(head[5]) != len(pts):
        raise PLError(f"period {head[5]} but {len(pts)} points")
    return PseudoOrbit(pts, delta, periodic)


def alternating_noise(amplitude) -> Callable[[int], Fraction]:
    a = rat(amplitude)
    return lambda n: a if n % 2 == 0 else -a


def make_pseudo_orbit(
    f: PLMap,
    seed,
    length: int,
    delta,
    noise: str | Callable[[int], Fraction] | Sequence = "alternating",
    period: int | None = None,
) -> PseudoOrbit:
    """x_{n+1} = clip(f(x_n) + e_n) with a deterministic rational noise e_n.

    ``noise`` is ``"zero"``, ``"alternating"`` (plus and minus delta/2), a
    sequence or a callable on the step index.  With ``period`` set, exactly
    that many points are produced and the wrap-around step must also be
    shorter than delta.
    """
    delta = rat(delta)
    if delta <= 0:
        raise PLError("delta must be positive")
    if noise == "zero":
        rule = lambda n: ZERO  # noqa: E731
    elif noise == "alternating":
        rule = alternating_noise(delta / 2)
    elif callable(noise):
        rule = noise
    else:
        seq = [rat(e) for e in noise]
        rule = lambda n: seq[n % len(seq)]  # noqa: E731
    count = period if period is not None else length
    if count < 1:
        raise PLError("need at least one point")
    pts = [rat(seed)]
    for n in range(count - 1):
        pts.append(min(max(f(pts[-1]) + rat(rule(n)), ZERO), ONE))
    po = PseudoOrbit(tuple(pts), delta, period is not None)
    if not po.is_valid(f):
        raise PLError(f"not a delta-pseudo-orbit: defect {po.defect(f)} >= {delta}")
    return po


# ---------------------------------------------------------------- tracing


@dataclass(frozen=True)
class TraceResult:
    z: Fraction
    eps: Fraction
    horizon: int
    periodic: bool
    period: int | None
    chain: tuple[RatInterval, ...]

    def verify(self, f: PLMap, po: PseudoOrbit) -> bool:
        return traces(f, po, self.z, self.eps, self.horizon)


def traces(f: PLMap, po: PseudoOrbit, z, eps, horizon: int | None = None) -> bool:
    """Exact check |f^n(z) - y_n| < eps for n <= horizon."""
    z, eps = rat(z), rat(eps)
    ys = po.unrolled(horizon + 1) if horizon is not None else po.points
    x = z
    for n, y in enumerate(ys):
        if n:
            x = f(x)
        if abs(x - y) >= eps:
            return False
    return True


def _image_set(f: PLMap, S: IntervalSet) -> IntervalSet:
    return IntervalSet(image(f, J) for J in S)


def _preimage_set(f: PLMap, S: IntervalSet) -> IntervalSet:
    out = IntervalSet()
    for J in S:
        out = out.union(preimage(f, J))
    return out


def _intersect(S: IntervalSet, J: RatInterval) -> IntervalSet:
    return S.intersect_interval(J)


def interval_chain(f: PLMap, ys: Sequence[Fraction], radius: Fraction) -> list[RatInterval] | None:
    """Balls around the y_n, each cut down to the image of its predecessor."""
    out = []
    for n, y in enumerate(ys):
        J = RatInterval(max(ZERO, y - radius), min(ONE, y + radius))
        if n:
            J = J.intersect(image(f, out[-1]))
            if J is None:
                return None
        out.append(J)
    return out


def tracing_set(f: PLMap, chain: Sequence[RatInterval]) -> IntervalSet:
    """Exact set of z with f^n(z) in chain[n] for every n."""
    K = IntervalSet([chain[-1]])
    for J in reversed(chain[:-1]):
        K = _intersect(_preimage_set(f, K), J)
        if not K:
            break
    return K


def trace(f: PLMap, po: PseudoOrbit, eps, gamma=None, horizon: int | None = None) -> TraceResult | None:
    """Find an exact eps-tracing point, or None when the gamma-chain is empty.

    The interval chain uses closed balls of radius gamma < eps.  For a
    periodic pseudo-orbit of period N the chain covers one period and the
    returned z is the leftmost fixed point of f^N inside the tracing set, so
    it traces the whole infinite periodic sequence.
    """
    eps = rat(eps)
    if eps <= 0:
        raise PLError("eps must be positive")
    gamma = rat(gamma) if gamma is not None else eps / 2
    if not ZERO < gamma < eps:
        raise PLError("need 0 < gamma < eps")
    if po.periodic:
        N = len(po.points)
        ys = po.unrolled(N + 1)
    else:
        ys = po.points if horizon is None else po.unrolled(horizon + 1)
    chain = interval_chain(f, ys, gamma)
    if chain is None:
        return None
    K = tracing_set(f, chain)
    if not K:
        return None
    if not po.periodic:
        z = K.parts[0].lo
        res = TraceResult(z, eps, len(ys) - 1, False, None, tuple(chain))
        if not res.verify(f, po):  # pragma: no cover - K is exact
            raise AssertionError("tracing point failed its replay")
        return res
    for C in K:
        if C.is_point:
            if _returns(f, C.lo, N):
                return TraceResult(C.lo, eps, N, True, N, tuple(chain))
            continue
        fixed = restricted_iterate(f, C, N).fixed_components()
        if fixed:
            z = fixed.parts[0].lo
            res = TraceResult(z, eps, N, True, N, tuple(chain))
            if not (res.verify(f, po) and _returns(f, z, N)):  # pragma: no cover
                raise AssertionError("periodic tracing point failed its replay")
            return res
    return None


def _returns(f: PLMap, z: Fraction, N: int) -> bool:
    x = z
    for _ in range(N):
        x = f(x)
    return x == z


# ---------------------------------------------------------------- linking


@dataclass(frozen=True)
class LinkResult:
    c: Fraction
    eps: Fraction
    target: Fraction | None
    m: int | None
    z: Fraction | None
    depth: int
    overflow: bool
    tubes: tuple[IntervalSet, ...] = field(repr=False, default=())

    @property
    def linked(self) -> bool:
        return self.target is not None

    def replay(self, f: PLMap) -> bool:
        if not self.linked:
            return False
        return link_holds(f, self.c, self.target, self.z, self.m, self.eps)


def link_holds(f: PLMap, c, target, z, m: int, eps) -> bool:
    """Exact check of the eps-linking conditions for one witness z."""
    if m < 2 or abs(z - c) >= eps:
        return False
    x, w = c, z
    for _ in range(1, m):
        x, w = f(x), f(w)
        if abs(x - w) >= eps:
            return False
    return f(w) == target


@dataclass(frozen=True)
class LinkingReport:
    critical: tuple[Fraction, ...]
    scales: tuple[Fraction, ...]
    depth: int
    results: tuple[LinkResult, ...]
    note: str = LINKING_NOTE

    def at(self, c, eps) -> LinkResult:
        for r in self.results:
            if r.c == c and r.eps == eps:
                return r
        raise KeyError((c, eps))

    def failures(self) -> list[LinkResult]:
        return [r for r in self.results if not r.linked]

    def failing_scales(self) -> list[Fraction]:
        return sorted({r.eps for r in self.failures()}, reverse=True)

    @property
    def linked_at_all_scales(self) -> bool:
        return not self.failures()

    def verdict(self) -> str:
        if self.linked_at_all_scales:
            return "linked at all tested scales"
        return "fails at scale " + format_rat(self.failing_scales()[0])

    def to_text(self) -> str:
        lines = [f"linking 1 depth {self.depth} scales {' '.join(format_rat(e) for e in self.scales)}",
                 f"note {self.note}"]
        for r in self.results:
            head = f"{format_rat(r.c)} eps {format_rat(r.eps)}"
            if r.linked:
                lines.append(f"{head} linked {format_rat(r.target)} m {r.m} z {format_rat(r.z)}")
            else:
                lines.append(f"{head} unlinked depth {r.depth}" + (" overflow" if r.overflow else ""))
        lines.append(f"verdict {self.verdict()}")
        return "\n".join(lines) + "\n"


def critical_set(f: PLMap) -> tuple[Fraction, ...]:
    return tuple(sorted({ZERO, ONE} | set(f.turning_points())))


def _cap(S: IntervalSet, cap: int) -> tuple[IntervalSet, bool]:
    parts = list(S.parts)
    if len(parts) <= cap:
        return S, False
    while len(parts) > cap:
        gaps = [parts[i + 1].lo - parts[i].hi for i in range(len(parts) - 1)]
        i = gaps.index(min(gaps))
        parts[i: i + 2] = [parts[i].hull(parts[i + 1])]
    return IntervalSet(parts), True


def _candidates(K: IntervalSet):
    for J in K:
        yield J.lo
        if not J.is_point:
            yield J.midpoint
            yield J.hi


def link_point(f: PLMap, c, eps, targets, depth: int = 20, cap: int = 64) -> LinkResult:
    """Search 1 < m <= depth for a witness that c is eps-linked to a target."""
    c, eps = rat(c), rat(eps)
    ball = lambda x: RatInterval(max(ZERO, x - eps), min(ONE, x + eps))  # noqa: E731
    tubes = [IntervalSet([ball(c)])]
    orbit = [c]
    overflow = False
    for m in range(2, depth + 1):
        orbit.append(f(orbit[-1]))
        T, over = _cap(_intersect(_image_set(f, tubes[-1]), ball(orbit[-1])), cap)
        overflow |= over
        tubes.append(T)
        if not T:
            break
        reach = _image_set(f, T)
        for tgt in targets:
            if not reach.contains(tgt):
                continue
            for z in _candidates(_back(f, tubes, tgt)):
                if link_holds(f, c, tgt, z, m, eps):
                    return LinkResult(c, eps, tgt, m, z, depth, overflow, tuple(tubes))
    return LinkResult(c, eps, None, None, None, depth, overflow, tuple(tubes))


def _back(f: PLMap, tubes, tgt) -> IntervalSet:
    K = IntervalSet([RatInterval.point(tgt)])
    for S in reversed(tubes):
        pre = _preimage_set(f, K)
        K = IntervalSet(I for J in S for p in pre if (I := J.intersect(p)) is not None)
        if not K:
            break
    return K


def check_linking(f: PLMap, scales, depth: int = 20, cap: int = 64) -> LinkingReport:
    """Per-scale semi-decision of the linking property over the critical set."""
    scales = tuple(sorted({rat(e) for e in scales}, reverse=True))
    if not scales or scales[-1] <= 0:
        raise PLError("scales must be positive")
    C = critical_set(f)
    results = tuple(link_point(f, c, e, C, depth, cap) for e in scales for c in C)
    return LinkingReport(C, scales, depth, results)


# ---------------------------------------------------------------- breaking shadowing


@dataclass(frozen=True)
class BrokenShadowing:
    G: PLMap
    rho: Fraction
    orbit: tuple[Fraction, ...]  # orbit of 0 up to its first return to the cycle
    cycle: tuple[Fraction, ...]
    leo: LeoCertificate
    linking: LinkingReport


def _left_two_fold(g: PLMap, a: Fraction) -> PLMap:
    from .perturb import WindowSpec, _window_copy

    J = RatInterval(ZERO, a)
    return _window_copy(g, J, WindowSpec.regular_window(J, 2).parts, first_same=False)


def _cycle_of(g: PLMap, p: Fraction, k: int) -> tuple[Fraction, ...]:
    out = [p]
    for _ in range(k - 1):
        out.append(g(out[-1]))
    return tuple(sorted(out))


def break_shadowing(
    g: PLMap,
    eps,
    period: int = 2,
    search_depth: int = 12,
    scales=None,
    link_depth: int = 20,
    leo_depth: int = 8,
) -> BrokenShadowing:
    """Two-fold window at 0 sending 0 onto a periodic orbit that avoids the turning points.

    The new value of 0 is the largest point below eps whose orbit reaches
    the cycle without re-entering the window.
    """
    eps = rat(eps)
    if eps <= 0:
        raise PLError("eps must be positive")
    cert = certify_leo(g, leo_depth)
    if not cert.is_leo:
        raise PLError("map is not certified leo")
    turning = set(g.turning_points())
    cycle = None
    for p in per_set(g, period):
        cyc = _cycle_of(g, p.x, period)
        if not (set(cyc) & (turning | {ZERO, ONE})):
            cycle = cyc
            break
    if cycle is None:
        raise PLError(f"no period-{period} orbit avoids the turning points")
    front = set(cycle)
    seen = set(cycle)
    chosen = None
    for _ in range(search_depth):
        nxt = set()
        for y in front:
            for x in preimage(g, RatInterval.point(y)).points():
                if x not in seen:
                    nxt.add(x)
        seen |= nxt
        for y in sorted(nxt, reverse=True):
            a = _window_end(g, y)
            if a is None or not ZERO < y < eps or y in turning:
                continue
            if abs(y - g(ZERO)) < eps and _clean(g, y, a, cycle):
                chosen = (y, a)
                break
        if chosen:
            break
        front = nxt
    if chosen is None:
        raise PLError("no preimage of the cycle below eps within the search depth")
    a = chosen[1]
    G = _left_two_fold(g, a)
    orbit = [ZERO]
    while orbit[-1] not in cycle:
        orbit.append(G(orbit[-1]))
    rho = sup_distance(g, G)
    leo = certify_leo(G, leo_depth)
    if scales is None:
        scales = [eps / 2 ** i for i in range(1, 6)]
    report = check_linking(G, scales, link_depth)
    return BrokenShadowing(G, rho, tuple(orbit), cycle, leo, report)


def _window_end(g: PLMap, y: Fraction) -> Fraction | None:
    """Point a on the first lap with g(a) = y, if any."""
    x1, y0, y1 = g.xs[1], g.ys[0], g.ys[1]
    if y0 == y1 or not min(y0, y1) < y <= max(y0, y1):
        return None
    return (y - y0) * x1 / (y1 - y0)


def _clean(g: PLMap, y: Fraction, a: Fraction, cycle, limit: int = 256) -> bool:
    """Orbit of y reaches the cycle without entering [0, a]."""
    x = y
    for _ in range(limit):
        if x in cycle:
            return True
        if x <= a:
            return False
        x = g(x)
    return False
