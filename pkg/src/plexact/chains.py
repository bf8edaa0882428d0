"""ε-chains on a uniform grid, and the construction of a nearby leo map.

An ε-chain for f is x_0, ..., x_n with |f(x_i) - x_{i+1}| < ε for every
0 <= i < n.  Chains are discretised on the cells of a uniform partition:

* over edge I -> J when the open ε-ball around f(I) meets J; every genuine
  ε-chain induces a walk of over edges, so a cell on no over cycle contains
  no point with an ε-chain back to itself;
* under edge I -> J when every point of f(I) is within ε of J; a cycle of
  under edges yields a genuine ε-chain through one point of the first cell
  (the fixed point of the projected return map), and an (ε + mesh)-chain
  from every point of that cell to itself.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import ceil, floor

from ._graphs import on_cycle, shortest_cycle_through, strongly_connected_components
from .pl_core import (
    PLError,
    PLFunction,
    PLMap,
    RatInterval,
    image,
    rat,
    sup_distance,
)

CERTIFIED = "certified-recurrent-at-scale"
REFUTED = "refuted"
UNKNOWN = "unknown"

EXPANSION = Fraction(3)


class ChainExtractionError(PLError):
    """A required cell lies on no under-edge cycle at the working scale."""


def is_chain(f: PLMap, points, eps) -> bool:
    """Exact test of |f(x_i) - x_{i+1}| < eps for all consecutive pairs."""
    eps = rat(eps)
    return len(points) >= 2 and all(
        abs(f(a) - b) < eps for a, b in zip(points, points[1:])
    )


def chain_defect(f: PLMap, points) -> Fraction:
    return max(abs(f(a) - b) for a, b in zip(points, points[1:]))


# ---------------------------------------------------------------- graph


@dataclass(frozen=True)
class ChainGraph:
    f: PLMap
    eps: Fraction
    n: int
    over: tuple[tuple[int, int], ...]  # inclusive target ranges per cell
    under: tuple[tuple[int, int], ...]

    @property
    def mesh(self) -> Fraction:
        return Fraction(1, self.n)

    def cell(self, i: int) -> RatInterval:
        return RatInterval(Fraction(i, self.n), Fraction(i + 1, self.n))

    def cell_of(self, x) -> int:
        return min(floor(rat(x) * self.n), self.n - 1)

    @staticmethod
    def _adj(ranges) -> dict[int, list[int]]:
        return {i: list(range(lo, hi + 1)) for i, (lo, hi) in enumerate(ranges)}

    def over_adj(self) -> dict[int, list[int]]:
        return self._adj(self.over)

    def under_adj(self) -> dict[int, list[int]]:
        return self._adj(self.under)

    def over_edges(self) -> set[tuple[int, int]]:
        return {(i, j) for i, js in self.over_adj().items() for j in js}

    def under_edges(self) -> set[tuple[int, int]]:
        return {(i, j) for i, js in self.under_adj().items() for j in js}


def build_chain_graph(f: PLMap, eps, mesh) -> ChainGraph:
    eps, mesh = rat(eps), rat(mesh)
    if not 0 < mesh < eps:
        raise PLError("need 0 < mesh < eps")
    n = ceil(1 / mesh)
    over, under = [], []
    for i in range(n):
        fI = image(f, RatInterval(Fraction(i, n), Fraction(i + 1, n)))
        a, b = fI.lo, fI.hi
        lo = max(floor(n * (a - eps)), 0)
        hi = min(ceil(n * (b + eps)) - 1, n - 1)
        over.append((lo, hi))
        lo = max(floor(n * (b - eps)), 0)
        hi = min(ceil(n * (a + eps)) - 1, n - 1)
        under.append((lo, hi) if lo <= hi else (1, 0))
    return ChainGraph(f, eps, n, tuple(over), tuple(under))


# ---------------------------------------------------------------- certification


@dataclass(frozen=True)
class ChainVerdict:
    cell: int
    interval: RatInterval
    eps: Fraction
    verdict: str
    cycle: tuple[int, ...] = ()
    chain: tuple[Fraction, ...] = ()


@dataclass(frozen=True)
class ChainReport:
    graph: ChainGraph
    verdicts: tuple[ChainVerdict, ...]

    @property
    def all_certified(self) -> bool:
        return all(v.verdict == CERTIFIED for v in self.verdicts)

    def counts(self) -> dict[str, int]:
        out = {CERTIFIED: 0, REFUTED: 0, UNKNOWN: 0}
        for v in self.verdicts:
            out[v.verdict] += 1
        return out

    def by_verdict(self, verdict: str) -> list[int]:
        return [v.cell for v in self.verdicts if v.verdict == verdict]

    def to_text(self) -> str:
        g = self.graph
        from .pl_core import format_rat

        lines = [f"chains 1 eps {format_rat(g.eps)} cells {g.n}"]
        for v in self.verdicts:
            rec = f"{v.cell} {v.verdict}"
            if v.chain:
                rec += " chain " + " ".join(format_rat(x) for x in v.chain)
            lines.append(rec)
        return "\n".join(lines) + "\n"


def projected_chain(f: PLMap, graph: ChainGraph, cycle) -> list[Fraction]:
    """Genuine ε-chain x_0, ..., x_n = x_0 following an under-edge cycle.

    x_{t+1} is the nearest point of the next cell to f(x_t); x_0 is the
    leftmost fixed point of the resulting return map of the first cell.
    """
    cells = [graph.cell(c) for c in cycle]
    R = PLFunction.restrict(f, cells[0])
    for C in cells[1:] + cells[:1]:
        R = R.clamp(C)
        if C is not cells[0]:
            R = R.then(f)
    fixed = R.fixed_components()
    x = fixed.parts[0].lo
    chain = [x]
    for C in cells[1:]:
        y = f(chain[-1])
        chain.append(min(max(y, C.lo), C.hi))
    chain.append(x)
    return chain


def certify_chain_recurrent(f: PLMap, eps, mesh, witnesses: bool = True) -> ChainReport:
    """Per-cell verdict at scale eps; see the module docstring for soundness."""
    eps, mesh = rat(eps), rat(mesh)
    if not mesh < eps / 4:
        raise PLError("mesh must be smaller than eps/4")
    graph = build_chain_graph(f, eps, mesh)
    uadj = graph.under_adj()
    good = on_cycle(uadj)
    over_ok = on_cycle(graph.over_adj()) if len(good) < graph.n else set(range(graph.n))
    out = []
    for i in range(graph.n):
        if i in good:
            cyc, ch = (), ()
            if witnesses:
                cyc = tuple(shortest_cycle_through(uadj, i))
                ch = tuple(projected_chain(f, graph, cyc))
            out.append(ChainVerdict(i, graph.cell(i), eps, CERTIFIED, cyc, ch))
        elif i not in over_ok:
            out.append(ChainVerdict(i, graph.cell(i), eps, REFUTED))
        else:
            out.append(ChainVerdict(i, graph.cell(i), eps, UNKNOWN))
    return ChainReport(graph, tuple(out))


# ---------------------------------------------------------------- approximation by a leo map


@dataclass(frozen=True)
class ChainDecomposition:
    chains: tuple[tuple[Fraction, ...], ...]  # each cycle listed once, base point first
    successor: dict  # the cyclic successor map on all chain points
    points: tuple[Fraction, ...]  # sorted union of the chains

    def gaps(self) -> list[RatInterval]:
        P = self.points
        return [RatInterval(a, b) for a, b in zip(P, P[1:])]


@dataclass
class CPCertificate:
    eps: Fraction
    decomposition: ChainDecomposition
    g: PLMap
    rho_f_g: Fraction
    rho_f_h: Fraction
    rho_g_h: Fraction
    folds: tuple[int, ...]
    checks: dict = field(default_factory=dict)
    leo: object = None

    @property
    def ok(self) -> bool:
        return all(self.checks.values()) and self.leo is not None and self.leo.is_leo


def _place(window: RatInterval, target: Fraction, used: set, step: Fraction) -> Fraction:
    """A point of ``window`` near ``target`` not in ``used``, open ball edges excluded."""
    y = min(max(target, window.lo), window.hi)
    if y not in used:
        return y
    d = step
    for _ in range(64):
        for c in (y - d, y + d):
            if window.lo <= c <= window.hi and c not in used:
                return c
        d /= 2
    raise ChainExtractionError("could not place a fresh chain point")


def extract_chains(f: PLMap, eps, mesh=None) -> ChainDecomposition:
    """Disjoint ε/6-chains containing 0 and 1, refined until every gap is
    shorter than 2ε/3 and f oscillates by less than ε/6 across it."""
    eps = rat(eps)
    six = eps / 6
    if mesh is None:
        mesh = Fraction(1, ceil(36 / six))
    scale = six - mesh
    graph = build_chain_graph(f, scale, mesh)
    uadj = graph.under_adj()
    used: set[Fraction] = set()
    succ: dict[Fraction, Fraction] = {}
    chains = []

    def add_chain(base: Fraction):
        c0 = graph.cell_of(base)
        cyc = shortest_cycle_through(uadj, c0)
        if cyc is None:
            raise ChainExtractionError(f"cell {c0} lies on no under-edge cycle")
        pts = [base]
        local = {base}
        for c in cyc[1:]:
            x = pts[-1]
            fx = f(x)
            C = graph.cell(c)
            r = scale + mesh / 2
            window = RatInterval(max(C.lo, fx - r), min(C.hi, fx + r))
            pts.append(_place(window, fx, used | local, mesh / 4))
            local.add(pts[-1])
        assert abs(f(pts[-1]) - base) < six
        for a, b in zip(pts, pts[1:] + pts[:1]):
            succ[a] = b
        used.update(pts)
        chains.append(tuple(pts))

    add_chain(Fraction(0))
    if Fraction(1) not in used:
        add_chain(Fraction(1))
    while True:
        P = sorted(used)
        bad = None
        for a, b in zip(P, P[1:]):
            if b - a >= 4 * six or image(f, RatInterval(a, b)).length >= six:
                bad = (a, b)
                break
        if bad is None:
            break
        add_chain((bad[0] + bad[1]) / 2)
    return ChainDecomposition(tuple(chains), dict(succ), tuple(sorted(used)))


def connect_the_dots(dec: ChainDecomposition) -> PLMap:
    return PLMap([(x, dec.successor[x]) for x in dec.points])


def _neighbors(points, lo, hi):
    """ℐ-neighbours just outside [lo, hi] (or lo/hi themselves at 0 and 1)."""
    import bisect

    i = bisect.bisect_left(points, lo)
    j = bisect.bisect_left(points, hi)
    below = points[i - 1] if i > 0 else points[0]
    above = points[j + 1] if j + 1 < len(points) else points[-1]
    return below, above


def _zigzag(x0, x1, a, b, low, high, alpha):
    """Constant-|slope| zigzag from (x0, a) to (x1, b) turning at low/high.

    Returns the breakpoints and the number of linear pieces (odd).
    """
    W = x1 - x0
    m = 1
    while True:
        if a < b:
            turns = [high, low] * m
        else:
            turns = [low, high] * m
        vals = [a] + turns + [b]
        heights = [abs(v - u) for u, v in zip(vals, vals[1:])]
        total = sum(heights)
        if total / W >= alpha:
            break
        m += 1
    slope = total / W
    pts = [(x0, a)]
    x = x0
    for v, hgt in zip(vals[1:-1], heights):
        x += hgt / slope
        pts.append((x, v))
    pts.append((x1, b))
    return pts, len(vals) - 1


def approximate_by_cp(f: PLMap, eps, mesh=None, depth: int = 8) -> tuple[PLMap, CPCertificate]:
    """A leo map h with ρ(f, h) < 2ε, for f chain-recurrent at scale ε/6."""
    from .structure import certify_leo

    eps = rat(eps)
    if eps <= 0:
        raise PLError("eps must be positive")
    dec = extract_chains(f, eps, mesh)
    g = connect_the_dots(dec)
    P = dec.points
    pts = [(P[0], g(P[0]))]
    folds = []
    cover_ok = True
    for x0, x1 in zip(P, P[1:]):
        a, b = dec.successor[x0], dec.successor[x1]
        low, high = _neighbors(P, min(a, b), max(a, b))
        zz, k = _zigzag(x0, x1, a, b, low, high, EXPANSION)
        pts.extend(zz[1:])
        folds.append(k)
    h = PLMap(pts)
    for x0, x1 in zip(P, P[1:]):
        a, b = dec.successor[x0], dec.successor[x1]
        low, high = _neighbors(P, min(a, b), max(a, b))
        if not image(h, RatInterval(x0, x1)).contains_interval(RatInterval(low, high)):
            cover_ok = False
    rho_fg = sup_distance(f, g)
    rho_fh = sup_distance(f, h)
    rho_gh = sup_distance(g, h)
    six = eps / 6
    checks = {
        "chains": all(
            abs(f(x) - dec.successor[x]) < six for x in P
        ),
        "gaps": all(b - a < 4 * six for a, b in zip(P, P[1:])),
        "oscillation": all(image(f, RatInterval(a, b)).length < six for a, b in zip(P, P[1:])),
        "rho_f_g": rho_fg < 5 * six,
        "agrees_on_chains": all(h(x) == dec.successor[x] for x in P),
        "expanding": all(abs(s) >= EXPANSION for s in h.slopes()),
        "covers_neighbors": cover_ok,
        "rho_g_h": rho_gh < 7 * six,
        "rho_f_h": rho_fh < 2 * eps,
    }
    cert = CPCertificate(eps, dec, g, rho_fg, rho_fh, rho_gh, tuple(folds), checks)
    cert.leo = certify_leo(h, depth)
    return h, cert


# ---------------------------------------------------------------- backward direction


def periodic_point_near(h: PLMap, x, delta, max_period: int = 12, cap: int = 200000):
    """A periodic point p of h with |x - p| < delta and its least period.

    Searches fixed points of h^k restricted to the delta-ball, k = 1, 2, ...
    Returns None when nothing is found within ``max_period``.
    """
    x, delta = rat(x), rat(delta)
    U = RatInterval(max(x - delta, Fraction(0)), min(x + delta, Fraction(1)))
    if U.is_point:
        return None
    F = PLFunction.restrict(h, U)
    for k in range(1, max_period + 1):
        if k > 1:
            F = F.then(h, cap)
        best = None
        for J in F.fixed_components():
            p = min(max(x, J.lo), J.hi)
            if abs(p - x) < delta and (best is None or abs(p - x) < abs(best - x)):
                best = p
        if best is not None:
            y, n = h(best), 1
            while y != best:
                y, n = h(y), n + 1
            return best, n
    return None


def backward_chain(f: PLMap, h: PLMap, x, scale, max_period: int = 12, hints=()):
    """x, h(p), ..., h^{n-1}(p), x through a periodic point p of h near x.

    ``hints`` are known periodic points of h (the chain points of an
    approximation, say); the nearest ones are tried first and kept only if
    the resulting sequence is a scale-chain for f.  Otherwise the radius of
    the search is chosen so that |f(x) - f(p)| < scale/2; when
    ρ(f, h) < scale/2 that result is a scale-chain for f.  Returns the chain
    (or None if no periodic point was found).
    """
    x, scale = rat(x), rat(scale)
    for p in sorted(hints, key=lambda q: (abs(q - x), q))[:8]:
        n = _period(h, p, len(hints) + 1)
        if n is not None:
            seq = _replay(h, x, p, n)
            if is_chain(f, seq, scale):
                return seq
    lip = f.max_abs_slope
    delta = scale / 2 if lip <= 1 else scale / (2 * lip)
    found = periodic_point_near(h, x, delta, max_period)
    if found is None:
        return None
    return _replay(h, x, *found)


def _period(h: PLMap, p, bound: int) -> int | None:
    y = h(p)
    for n in range(1, bound + 1):
        if y == p:
            return n
        y = h(y)
    return None


def _replay(h: PLMap, x, p, n: int) -> list[Fraction]:
    n = max(n, 2)  # a fixed p is run as a 2-cycle so that x_1 = h(p) differs from x_n = x
    seq = [x]
    y = p
    for _ in range(n - 1):
        y = h(y)
        seq.append(y)
    seq.append(x)
    return seq


def scc_partition(graph: ChainGraph, which: str = "over") -> list[list[int]]:
    adj = graph.over_adj() if which == "over" else graph.under_adj()
    return strongly_connected_components(adj)
