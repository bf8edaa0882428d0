"""Constructive perturbations.

Window perturbations replace a map on an interval J by m affinely rescaled
copies of f|J with alternating orientation.  Everything here is built from
exact breakpoint lists, and every construction re-checks the property it is
meant to have before returning.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .chains import certify_chain_recurrent
from .periodic import fix_set, is_transverse, minimal_period
from .pl_core import (
    DEFAULT_PIECE_CAP,
    IntervalSet,
    PLError,
    PLFunction,
    PLMap,
    PiecewiseConstDensity,
    RatInterval,
    UNIT,
    compose,
    conjugate,
    glue,
    image,
    invariant_density,
    iterate,
    measure_homeo,
    preimage,
    preserves_lebesgue,
    preserves_measure,
    rat,
    sup_distance,
)
from .structure import (
    EntropyBound,
    EntropyCertificate,
    HorseshoeWitness,
    certify_leo,
    lap_count,
    markovize,
)

ZERO, ONE = Fraction(0), Fraction(1)

# ---------------------------------------------------------------- windows


@dataclass(frozen=True)
class WindowSpec:
    """Window J cut into consecutive parts; ``m`` is the number of parts."""

    J: RatInterval
    parts: tuple[RatInterval, ...]
    regular: bool = False

    @property
    def m(self) -> int:
        return len(self.parts)

    @classmethod
    def regular_window(cls, J: RatInterval, m: int) -> "WindowSpec":
        if m < 1:
            raise PLError("fold count must be positive")
        step = J.length / m
        parts = tuple(RatInterval(J.lo + i * step, J.lo + (i + 1) * step) for i in range(m))
        return cls(J, parts, True)

    @classmethod
    def from_cuts(cls, cuts) -> "WindowSpec":
        cuts = [rat(c) for c in cuts]
        parts = tuple(RatInterval(a, b) for a, b in zip(cuts, cuts[1:]))
        lengths = {p.length for p in parts}
        return cls(RatInterval(cuts[0], cuts[-1]), parts, len(lengths) == 1)

    def transported(self, h: PLMap) -> "WindowSpec":
        """The same cuts pushed through a homeomorphism (order restored if h reverses)."""
        cuts = [self.J.lo] + [p.hi for p in self.parts]
        return WindowSpec.from_cuts(sorted(h(c) for c in cuts))

    def validate(self, odd: bool = True) -> None:
        if not UNIT.contains_interval(self.J) or self.J.is_point:
            raise PLError(f"window {self.J} must be a nondegenerate subinterval of [0, 1]")
        if not self.parts:
            raise PLError("window has no parts")
        if odd and self.m % 2 == 0:
            raise PLError(f"fold count {self.m} is even")
        if self.parts[0].lo != self.J.lo or self.parts[-1].hi != self.J.hi:
            raise PLError("parts do not cover the window")
        for a, b in zip(self.parts, self.parts[1:]):
            if a.hi != b.lo:
                raise PLError("parts leave a gap or overlap")
        if any(p.is_point for p in self.parts):
            raise PLError("degenerate part")
        if self.regular and len({p.length for p in self.parts}) != 1:
            raise PLError("regular window with unequal parts")


def _window_copy(f: PLMap, J: RatInterval, parts, first_same: bool = True) -> PLMap:
    inner = [J.lo] + [x for x in f.xs if J.lo < x < J.hi] + [J.hi]
    inner = [(x, f(x)) for x in inner]
    pts = [(x, y) for x, y in zip(f.xs, f.ys) if x < J.lo]
    for i, P in enumerate(parts):
        same = (i % 2 == 0) == first_same
        scale = P.length / J.length
        seq = inner if same else inner[::-1]
        for x, y in seq:
            t = P.lo + (x - J.lo) * scale if same else P.hi - (x - J.lo) * scale
            pts.append((t, y))
    pts.extend((x, y) for x, y in zip(f.xs, f.ys) if x > J.hi)
    return glue(pts)


def window_perturb_lambda(f: PLMap, spec: WindowSpec) -> PLMap:
    """m-fold window perturbation of a Lebesgue-preserving map."""
    spec.validate()
    if not preserves_lebesgue(f):
        raise PLError("map does not preserve Lebesgue measure")
    g = _window_copy(f, spec.J, spec.parts)
    if not preserves_lebesgue(g):  # pragma: no cover - holds by the branch-sum identity
        raise AssertionError("window perturbation lost Lebesgue invariance")
    if sup_distance(f, g) > image(f, spec.J).length:  # pragma: no cover
        raise AssertionError("window perturbation exceeded its sup bound")
    return g


def window_perturb_cp(f: PLMap, mu: PiecewiseConstDensity, spec: WindowSpec, cap: int = DEFAULT_PIECE_CAP) -> PLMap:
    """Window perturbation through the measure conjugation; ``spec`` is in the conjugated coordinates."""
    if not mu.full_support:
        raise PLError("density must have full support")
    check = preserves_measure(f, mu)
    if not check.preserved:
        raise PLError(f"measure not invariant; witness {check.witness}")
    psi = measure_homeo(mu)
    g_hat = window_perturb_lambda(conjugate(f, psi, cap), spec)
    return conjugate(g_hat, psi.inverse(), cap)


def fix_boundary(f: PLMap, eps, max_halvings: int = 200) -> PLMap:
    """Two-fold windows at the ends so that neither endpoint maps to {0, 1}."""
    eps = rat(eps)
    if eps <= 0:
        raise PLError("eps must be positive")
    ends = {ZERO, ONE}
    bad_left, bad_right = f(ZERO) in ends, f(ONE) in ends
    if not (bad_left or bad_right):
        return f

    def width(side_window, probe):
        a = min(eps, Fraction(1, 4))
        for _ in range(max_halvings):
            W = side_window(a)
            if image(f, W).length < eps and f(probe(a)) not in ends:
                return a
            a /= 2
        raise PLError("map is flat at an endpoint; cannot move it off {0, 1}")

    g = f
    if bad_left:
        a = width(lambda a: RatInterval(ZERO, a), lambda a: a)
        J = RatInterval(ZERO, a)
        g = _window_copy(g, J, WindowSpec.regular_window(J, 2).parts, first_same=False)
    if bad_right:
        a = width(lambda a: RatInterval(ONE - a, ONE), lambda a: ONE - a)
        J = RatInterval(ONE - a, ONE)
        g = _window_copy(g, J, WindowSpec.regular_window(J, 2).parts, first_same=True)
    if sup_distance(f, g) >= eps or g(ZERO) in ends or g(ONE) in ends:  # pragma: no cover
        raise AssertionError("boundary fix failed its own check")
    return g


def insert_horseshoe(f: PLMap, p, n: int, width) -> tuple[PLMap, EntropyCertificate]:
    """Window of odd fold count at least n+2 centred on a transverse fixed point.

    Each fold maps onto f(window); the certificate's witness is a row of n
    consecutive folds, each covering all of them.
    """
    p, width = rat(p), rat(width)
    if n < 2:
        raise PLError("n must be at least 2")
    if width <= 0:
        raise PLError("width must be positive")
    sp = is_transverse(f, p, 1)
    if not sp.transverse:
        raise PLError(f"{p} is not a transverse fixed point")
    J = RatInterval(p - width / 2, p + width / 2)
    if not UNIT.contains_interval(J):
        raise PLError("window leaves [0, 1]")
    m = n + 2 if n % 2 else n + 3
    spec = WindowSpec.regular_window(J, m)
    g = _window_copy(f, J, spec.parts)
    target = image(f, J)
    covered = [P for P in spec.parts if target.contains_interval(P)]
    if len(covered) < n:
        raise PLError(f"only {len(covered)} folds lie inside f(window); widen or pass through the measure conjugation")
    start = (len(covered) - n) // 2
    hs = HorseshoeWitness(tuple(covered[start:start + n]), 1)
    if not hs.verify(g):  # pragma: no cover
        raise AssertionError("horseshoe does not verify")
    cert = EntropyCertificate(hs.bound, EntropyBound(Fraction(lap_count(g)), 1), "window-horseshoe", "lap-count", hs)
    return g, cert


# ---------------------------------------------------------------- blow-ups

AFFINE_CYCLE = "affine-cycle"
CONTRACTING = "contracting"

TRUNCATION_NOTE = (
    "finite blow-up set closed under the base map only; preimages of blown points "
    "outside the set are crossed by steep windows where the semi-conjugacy is not claimed"
)


@dataclass(frozen=True)
class BlowupPlan:
    """Finite forward-invariant set with one interval length per point.

    ``points`` is in enumeration order; point i (counting from 1) is blown up
    to an interval of length eta**(i+1) unless ``lengths`` is given.
    """

    base: PLMap
    points: tuple[Fraction, ...]
    eta: Fraction
    core: str = AFFINE_CYCLE
    seeds: tuple[Fraction, ...] = ()
    lengths: tuple[Fraction, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "points", tuple(rat(x) for x in self.points))
        object.__setattr__(self, "eta", rat(self.eta))
        if not self.lengths:
            object.__setattr__(
                self, "lengths", tuple(self.eta ** (i + 2) for i in range(len(self.points)))
            )
        else:
            object.__setattr__(self, "lengths", tuple(rat(v) for v in self.lengths))

    @classmethod
    def forward_orbit(cls, T: PLMap, seed, eta, core: str = AFFINE_CYCLE, max_points: int = 256) -> "BlowupPlan":
        seed = rat(seed)
        pts = [seed]
        while True:
            y = T(pts[-1])
            if y in pts:
                break
            pts.append(y)
            if len(pts) > max_points:
                raise PLError("orbit is not eventually periodic within the point budget")
        return cls(T, tuple(pts), eta, core, (seed,))

    @classmethod
    def preimage_tree(cls, T: PLMap, root, depth: int, eta, core: str = CONTRACTING) -> "BlowupPlan":
        root = rat(root)
        pts = [root]
        level = [root]
        for _ in range(depth):
            nxt = []
            for y in level:
                for x in preimage(T, RatInterval.point(y)).points():
                    if x not in pts and x not in nxt:
                        nxt.append(x)
            nxt.sort()
            pts.extend(nxt)
            level = nxt
        return cls(T, tuple(pts), eta, core, (root,))

    @property
    def gamma(self) -> Fraction:
        return sum(self.lengths, ZERO)

    def successor(self) -> tuple[int, ...]:
        index = {x: i for i, x in enumerate(self.points)}
        try:
            return tuple(index[self.base(x)] for x in self.points)
        except KeyError as exc:
            raise PLError(f"blow-up set is not forward invariant: image {exc.args[0]} missing") from None

    def validate(self) -> None:
        if len(set(self.points)) != len(self.points):
            raise PLError("repeated blow-up point")
        if not ZERO < self.eta < Fraction(1, 2):
            raise PLError("eta must lie in (0, 1/2)")
        if len(self.lengths) != len(self.points) or any(v <= 0 for v in self.lengths):
            raise PLError("one positive length per point is required")
        if self.points and self.gamma >= self.eta:
            raise PLError(f"length budget exceeded: total {self.gamma} >= eta {self.eta}")
        forbidden = {ZERO, ONE} | set(self.base.turning_points())
        bad = [x for x in self.points if x in forbidden]
        if bad:
            raise PLError(f"blow-up points hit an endpoint or turning point: {bad}")
        if self.core not in (AFFINE_CYCLE, CONTRACTING):
            raise PLError(f"unknown core {self.core!r}")
        self.successor()


def _increasing_at(T: PLMap, x: Fraction) -> bool:
    i = T.piece_index(x)
    if i == len(T.xs) - 1:
        i -= 1
    return T.ys[i + 1] > T.ys[i]


# unit-square stand-ins for x -> x^2: increasing below the diagonal, or
# orientation reversing with a single attracting interior fixed point
_CORE_UP = ((ZERO, ZERO), (Fraction(1, 2), Fraction(1, 4)), (ONE, ONE))
_CORE_DOWN = ((ZERO, ONE), (Fraction(1, 5), Fraction(1, 4)), (ONE, ZERO))


@dataclass(frozen=True)
class BlowupResult:
    plan: BlowupPlan
    F: PLMap  # rescaled to [0, 1]
    pi: PLMap  # collapse map on the rescaled domain
    raw: PLFunction  # the map on [0, 1 + gamma]
    intervals: tuple[RatInterval, ...]  # rescaled blown intervals, plan order
    windows: tuple[RatInterval, ...]  # rescaled crossing windows
    successor: tuple[int, ...]
    semiconjugate_on_grid: bool
    defect: IntervalSet
    rho: Fraction
    rho_bound: Fraction
    core_periodic: tuple[Fraction, ...]
    note: str = TRUNCATION_NOTE

    @property
    def gamma(self) -> Fraction:
        return self.plan.gamma

    @property
    def defect_in_windows(self) -> bool:
        return all(any(W.contains_interval(D) for W in self.windows) for D in self.defect)

    @property
    def ok(self) -> bool:
        return self.semiconjugate_on_grid and self.defect_in_windows and self.rho <= self.rho_bound

    def orbit_avoids(self, i: int, j: int) -> bool:
        """True when point i is not in the forward orbit of point j."""
        seen, k = set(), self.successor[j]
        while k not in seen:
            if k == i:
                return False
            seen.add(k)
            k = self.successor[k]
        return True

    def non_transitivity_witness(self, i: int, j: int, n_max: int = 50) -> bool:
        """Exact check that F^n(int I_j) misses int I_i for 1 <= n <= n_max."""
        K = self.intervals[j]
        target = self.intervals[i]
        for _ in range(n_max):
            K = image(self.F, K)
            if K.meets_interior(target):
                return False
        return True

    def chain_recurrence(self, eps, mesh=None):
        eps = rat(eps)
        mesh = rat(mesh) if mesh is not None else eps / 5
        return certify_chain_recurrent(self.F, eps, mesh, witnesses=False)


def _defect(P1: PLMap, P2: PLMap) -> IntervalSet:
    grid = sorted(set(P1.xs) | set(P2.xs))
    bad = []
    for a, b in zip(grid, grid[1:]):
        if P1(a) != P2(a) or P1(b) != P2(b):
            bad.append(RatInterval(a, b))
    return IntervalSet(bad)


def blowup(plan: BlowupPlan) -> BlowupResult:
    """Blow each planned point up to an interval and lift the base map."""
    plan.validate()
    T = plan.base
    D = plan.points
    phi = plan.successor()
    if not D:
        return BlowupResult(plan, T, PLMap.identity(), PLFunction(T.xs, T.ys), (), (), (), True,
                            IntervalSet(), ZERO, ZERO, ())
    ell = dict(zip(D, plan.lengths))
    order = sorted(D)
    a_of, acc = {}, ZERO
    for d in order:
        a_of[d] = d + acc
        acc += ell[d]
    total = ONE + plan.gamma
    turning = set(T.turning_points())

    def sigma(y):
        return y + sum((ell[d] for d in order if d < y), ZERO)

    def lift(y, high: bool):
        if y in ell:
            return a_of[y] + ell[y] if high else a_of[y]
        return sigma(y)

    # preimages of blown points that are not blown themselves
    crossings = []
    for d in D:
        for y in preimage(T, RatInterval.point(d)).points():
            if y in ell or y in turning or y in (ZERO, ONE):
                continue
            crossings.append((y, d))
    special = sorted({ZERO, ONE} | set(T.xs) | set(D) | {y for y, _ in crossings})

    pts = []
    for t in T.xs:
        if t in ell or any(t == y for y, _ in crossings):
            continue
        y = T(t)
        if y in ell:
            if t == ZERO:
                high = T.ys[1] > T.ys[0]
            elif t == ONE:
                high = T.ys[-2] > T.ys[-1]
            else:
                i = T.xs.index(t)
                high = T.ys[i - 1] > y  # a minimum approaches from above
            pts.append((sigma(t), lift(y, high)))
        else:
            pts.append((sigma(t), sigma(y)))

    windows = []
    for y, d in crossings:
        gap = min(abs(y - s) for s in special if s != y)
        w = min(ell[d] / 2, gap / 3)
        c = sigma(y)
        pts.append((c - w, sigma(T(y - w))))
        pts.append((c + w, sigma(T(y + w))))
        windows.append(RatInterval((c - w) / total, (c + w) / total))

    core_idx = []
    for i, d in enumerate(D):
        a, b = a_of[d], a_of[d] + ell[d]
        e = D[phi[i]]
        A, B = a_of[e], a_of[e] + ell[e]
        up = _increasing_at(T, d)
        if plan.core == CONTRACTING and phi[i] == i:
            core_idx.append(i)
            shape = _CORE_UP if up else _CORE_DOWN
            pts.extend((a + u * (b - a), a + v * (b - a)) for u, v in shape)
        else:
            pts.append((a, A if up else B))
            pts.append((b, B if up else A))
    if plan.core == CONTRACTING and not core_idx:
        raise PLError("contracting core needs a blown fixed point")

    pts.sort()
    raw = PLFunction([x for x, _ in pts], [v for _, v in pts])
    G = PLMap([(x / total, v / total) for x, v in zip(raw.xs, raw.ys)])
    pi_pts = [(ZERO, ZERO)]
    for d in order:
        pi_pts.append((a_of[d] / total, d))
        pi_pts.append(((a_of[d] + ell[d]) / total, d))
    pi_pts.append((ONE, ONE))
    pi = PLMap(pi_pts)
    intervals = tuple(RatInterval(a_of[d] / total, (a_of[d] + ell[d]) / total) for d in D)

    on_grid = all(T(pi(x)) == pi(G(x)) for x in G.xs)
    defect = _defect(compose(T, pi), compose(pi, G))
    rho = sup_distance(T, G)
    bound = 3 * plan.gamma + T.max_abs_slope * plan.gamma

    core_periodic = []
    for i in core_idx:
        I = intervals[i]
        for C in PLFunction.restrict(G, I).then(G).fixed_components():
            if C.is_point and I.lo < C.lo < I.hi:
                core_periodic.append(C.lo)
            elif not C.is_point:
                core_periodic.append(C.midpoint)
    return BlowupResult(plan, G, pi, raw, intervals, tuple(sorted(windows)), phi, on_grid, defect,
                        rho, bound, tuple(core_periodic))


@dataclass(frozen=True)
class MixingApproximant:
    F: PLMap
    n: int
    rho: Fraction
    fold_ranges: dict = field(default_factory=dict)  # interval index -> rescaled fold range

    def leo(self, depth: int = 8, resolution=Fraction(1, 64)):
        return certify_leo(self.F, depth, resolution)


def mixing_approximant(res: BlowupResult, n: int) -> MixingApproximant:
    """Replace F on every blown interval of index >= n by five steep laps."""
    gamma = res.gamma
    total = ONE + gamma
    raw = res.raw
    replaced = {}
    extra = []
    cut = []
    for k, I in enumerate(res.intervals):
        if k < n:
            continue
        a, b = I.lo * total, I.hi * total
        J = res.intervals[res.successor[k]]
        A, B = J.lo * total, J.hi * total
        M = max(b - a, B - A)
        if M >= gamma:
            raise PLError(f"interval {k}: fold range cannot exceed {M} and stay below gamma {gamma}")
        W = 2 * M if 2 * M < gamma else (M + gamma) / 2
        c = (A + B) / 2
        s = max(ZERO, min(c - W / 2, total - W))
        t = s + W
        va, vb = raw(a), raw(b)
        if va == A:
            vals = [va, t, s, t, s, vb]
        else:
            vals = [va, s, t, s, t, vb]
        travel = [abs(v1 - v0) for v0, v1 in zip(vals, vals[1:])]
        whole = sum(travel)
        xs, run = [a], ZERO
        for d in travel[:-1]:
            run += d
            xs.append(a + (b - a) * run / whole)
        xs.append(b)
        if whole / (b - a) < 3:  # pragma: no cover - W > M forces slope > 3
            raise AssertionError("fold slope below 3")
        cut.append((a, b))
        extra.extend(zip(xs, vals))
        replaced[k] = RatInterval(s / total, t / total)
    if not replaced:
        return MixingApproximant(res.F, n, ZERO, {})
    keep = [(x, v) for x, v in zip(raw.xs, raw.ys) if not any(a <= x <= b for a, b in cut)]
    pts = sorted(keep + extra)
    Fn = glue((x / total, v / total) for x, v in pts)
    return MixingApproximant(Fn, n, sup_distance(Fn, res.F), replaced)


# ---------------------------------------------------------------- Cantor plans


@dataclass(frozen=True)
class CantorPlan:
    """Regular (2n+1)-fold windows at representatives of periodic orbits.

    ``representatives`` pairs each point with its minimal period, which must
    divide ``k``.  ``half_widths`` of None means: start from
    ``initial_half_width`` and halve until the orbit windows are disjoint.
    Widths are measured in the coordinates where the density is Lebesgue.
    """

    k: int
    representatives: tuple[tuple[Fraction, int], ...]
    n: int
    half_widths: tuple[Fraction, ...] | None = None
    density: PiecewiseConstDensity | None = None
    initial_half_width: Fraction = Fraction(1, 16)


@dataclass(frozen=True)
class CantorCount:
    x: Fraction
    period: int
    half_width: Fraction
    window: RatInterval  # in the original coordinates
    in_window: int
    in_orbit: int
    expected_window: int
    expected_orbit: int
    branch_width: Fraction
    minimal_periods: tuple[int, ...]

    @property
    def matches(self) -> bool:
        return self.in_window == self.expected_window and self.in_orbit == self.expected_orbit


@dataclass(frozen=True)
class CantorReport:
    k: int
    n: int
    counts: tuple[CantorCount, ...]

    @property
    def ok(self) -> bool:
        return all(c.matches for c in self.counts)


def _density_for(f: PLMap, density):
    if density is not None:
        return density
    if preserves_lebesgue(f):
        return PiecewiseConstDensity.lebesgue()
    model = markovize(f)
    if model is None:
        raise PLError("no invariant density supplied and no Markov partition found")
    return invariant_density(model)


def _orbit_windows(g: PLMap, J: RatInterval, p: int) -> list[RatInterval] | None:
    out = [J]
    for _ in range(p - 1):
        if not UNIT.contains_interval(out[-1]):
            return None
        out.append(image(g, out[-1]))
    return out


def _admissible(g: PLMap, centre: Fraction, a: Fraction, p: int):
    J = RatInterval(centre - a, centre + a)
    if not (ZERO < J.lo and J.hi < ONE):
        return None
    gp = iterate(g, p)
    if any(J.lo < x < J.hi for x in gp.xs):
        return None
    ws = _orbit_windows(g, J, p)
    if ws is None:
        return None
    for i in range(len(ws)):
        for j in range(i + 1, len(ws)):
            if ws[i].intersect(ws[j]) is not None:
                return None
    return ws


def cantor_plan_perturb(f: PLMap, plan: CantorPlan, cap: int = DEFAULT_PIECE_CAP) -> tuple[PLMap, CantorReport]:
    k, n = plan.k, plan.n
    if k < 1 or n < 0:
        raise PLError("need k >= 1 and n >= 0")
    mu = _density_for(f, plan.density)
    psi = measure_homeo(mu)
    g = conjugate(f, psi, cap)
    reps = [(rat(x), int(p)) for x, p in plan.representatives]
    if plan.half_widths is not None and len(plan.half_widths) != len(reps):
        raise PLError("one half-width per representative")

    chosen = []
    taken: list[RatInterval] = []
    for idx, (x, p) in enumerate(reps):
        if k % p:
            raise PLError(f"period {p} of {x} does not divide {k}")
        if minimal_period(f, x, p) != p:
            raise PLError(f"{x} does not have minimal period {p}")
        if not is_transverse(f, x, p).transverse:
            raise PLError(f"{x} is not transverse for f^{p}")
        c = psi(x)
        if plan.half_widths is not None:
            a = rat(plan.half_widths[idx])
            ws = _admissible(g, c, a, p)
        else:
            a = rat(plan.initial_half_width)
            ws = None
            for _ in range(64):
                ws = _admissible(g, c, a, p)
                if ws is not None and all(W.intersect(V) is None for W in ws for V in taken):
                    break
                a /= 2
                ws = None
        if ws is None:
            raise PLError(f"orbit windows at {x} are not pairwise disjoint")
        if any(W.intersect(V) is not None for W in ws for V in taken):
            raise PLError(f"orbit windows at {x} meet another representative's windows")
        taken.extend(ws)
        chosen.append((x, p, a, ws))

    h_hat = g
    m = 2 * n + 1
    for _, _, _, ws in chosen:
        h_hat = _window_copy(h_hat, ws[0], WindowSpec.regular_window(ws[0], m).parts)
    fixed = fix_set(h_hat, k, cap)
    if fixed.intervals():
        raise PLError("window perturbation produced an interval of periodic points")
    pts = fixed.points()
    counts = []
    inv = psi.inverse()
    for x, p, a, ws in chosen:
        in_w = [q for q in pts if ws[0].contains(q)]
        in_o = [q for q in pts if any(W.contains(q) for W in ws)]
        branches = m ** (k // p)
        periods = tuple(sorted({minimal_period(h_hat, q, k) for q in in_o}))
        window = RatInterval(inv(ws[0].lo), inv(ws[0].hi))
        counts.append(CantorCount(x, p, a, window, len(in_w), len(in_o), branches, branches * p,
                                  2 * a / branches, periods))
    h = conjugate(h_hat, inv, cap)
    return h, CantorReport(k, n, tuple(counts))
