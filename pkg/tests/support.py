"""Shared maps, generators and brute-force oracles for the test suite."""

from __future__ import annotations

import bisect
import random
from fractions import Fraction as F

from hypothesis import strategies as st

from plexact.pl_core import PLHomeo, PLMap, conjugate
from plexact.perturb import WindowSpec, window_perturb_lambda
from plexact.pl_core import RatInterval

TENT = PLMap.tent()
IDENTITY = PLMap.identity()
FLIP = PLMap.flip()
# f([0,1/2]) = [1/2,1] and back, each by a full tent
EXCHANGE_TENTS = PLMap([(0, F(1, 2)), (F(1, 4), 1), (F(1, 2), F(1, 2)), (F(3, 4), 0), (1, F(1, 2))])
THREE_FOLD = PLMap([(0, 0), (F(1, 3), 1), (F(2, 3), 0), (1, 1)])
FIVE_FOLD = PLMap([(F(i, 5), i % 2) for i in range(6)])
REVERSED_TENT = PLMap([(0, 1), (F(1, 2), 0), (1, 1)])
ID_THEN_TENT = PLMap([(0, 0), (F(1, 3), F(1, 3)), (F(2, 3), 1), (1, F(1, 3))])
SLOW = PLMap([(0, 0), (F(1, 2), F(1, 4)), (1, 1)])  # strictly below the diagonal inside
PSI = PLHomeo([(0, 0), (F(1, 2), F(1, 4)), (1, 1)])


def _windowed(f, lo, hi, m):
    return window_perturb_lambda(f, WindowSpec.regular_window(RatInterval(F(lo), F(hi)), m))


# Lebesgue-preserving maps; all are chain-recurrent
LAMBDA_CORPUS = {
    "identity": IDENTITY,
    "flip": FLIP,
    "tent": TENT,
    "reversed-tent": REVERSED_TENT,
    "exchange-tents": EXCHANGE_TENTS,
    "three-fold": THREE_FOLD,
    "five-fold": FIVE_FOLD,
    "id-then-tent": ID_THEN_TENT,
    "tent-window": _windowed(TENT, F(1, 4), F(1, 2), 3),
    "identity-window": _windowed(IDENTITY, F(1, 3), F(2, 3), 3),
}

_P1 = PSI
_P2 = PLHomeo([(0, 0), (F(1, 3), F(1, 2)), (1, 1)])
_P3 = PLHomeo([(0, 1), (F(2, 5), F(1, 2)), (1, 0)])

# 20 chain-recurrent maps: the Lebesgue corpus plus topological conjugates of it
CHAIN_RECURRENT_CORPUS = dict(LAMBDA_CORPUS)
for _name, _psi in [
    ("tent", _P1), ("tent", _P3), ("flip", _P2), ("exchange-tents", _P1), ("three-fold", _P2),
    ("id-then-tent", _P3), ("tent-window", _P1), ("reversed-tent", _P2), ("five-fold", _P3),
    ("identity-window", _P2),
]:
    CHAIN_RECURRENT_CORPUS[f"{_name}~{len(CHAIN_RECURRENT_CORPUS) - 9}"] = conjugate(LAMBDA_CORPUS[_name], _psi)


# ---------------------------------------------------------------- random maps


def random_plmap(rng: random.Random, max_breakpoints: int = 10, denom: int = 24) -> PLMap:
    """Random continuous map of [0,1] with 2..max_breakpoints rational breakpoints."""
    n = rng.randint(2, max_breakpoints)
    inner = sorted(rng.sample(range(1, denom), min(n - 2, denom - 1)))
    xs = [F(0)] + [F(i, denom) for i in inner] + [F(1)]
    ys = [F(rng.randint(0, denom), denom) for _ in xs]
    return PLMap(list(zip(xs, ys)))


def random_homeo(rng: random.Random, pieces: int = 3, denom: int = 12) -> PLHomeo:
    xs = [F(0)] + [F(i, denom) for i in sorted(rng.sample(range(1, denom), pieces - 1))] + [F(1)]
    ys = [F(0)] + [F(i, denom) for i in sorted(rng.sample(range(1, denom), pieces - 1))] + [F(1)]
    if rng.random() < 0.5:
        ys = [1 - y for y in ys]
    return PLHomeo(list(zip(xs, ys)))


def random_lambda_map(rng: random.Random) -> PLMap:
    """A corpus map with a random regular window perturbation applied."""
    f = rng.choice(list(LAMBDA_CORPUS.values()))
    d = 16
    lo = rng.randint(0, d - 1)
    hi = rng.randint(lo + 1, d)
    return _windowed(f, F(lo, d), F(hi, d), rng.choice([1, 3, 5]))


rationals = st.fractions(min_value=0, max_value=1, max_denominator=64)


@st.composite
def plmaps(draw, max_breakpoints: int = 8, denom: int = 32):
    n = draw(st.integers(2, max_breakpoints))
    inner = draw(st.lists(st.integers(1, denom - 1), min_size=n - 2, max_size=n - 2, unique=True))
    xs = [F(0)] + [F(i, denom) for i in sorted(inner)] + [F(1)]
    ys = draw(st.lists(st.integers(0, denom), min_size=len(xs), max_size=len(xs)))
    return PLMap([(x, F(y, denom)) for x, y in zip(xs, ys)])


@st.composite
def homeos(draw, max_pieces: int = 4, denom: int = 16):
    k = draw(st.integers(1, max_pieces))
    xs = draw(st.lists(st.integers(1, denom - 1), min_size=k - 1, max_size=k - 1, unique=True))
    ys = draw(st.lists(st.integers(1, denom - 1), min_size=k - 1, max_size=k - 1, unique=True))
    xs = [F(0)] + [F(i, denom) for i in sorted(xs)] + [F(1)]
    ys = [F(0)] + [F(i, denom) for i in sorted(ys)] + [F(1)]
    if draw(st.booleans()):
        ys = [1 - y for y in ys]
    return PLHomeo(list(zip(xs, ys)))


# ---------------------------------------------------------------- oracles


def interpolate(xs, ys, x):
    """Plain linear interpolation through the nodes, independent of PLMap evaluation."""
    i = min(bisect.bisect_right(xs, x), len(xs) - 1)
    x0, x1, y0, y1 = xs[i - 1], xs[i], ys[i - 1], ys[i]
    return y0 + (y1 - y0) * (x - x0) / (x1 - x0)


def brute_iterate(f: PLMap, k: int, x):
    xs, ys = list(f.xs), list(f.ys)
    for _ in range(k):
        x = interpolate(xs, ys, x)
    return x


def sign_change_roots(f: PLMap, k: int, cells: int = 10_000):
    """Brute-force bracketing of the roots of f^k(x) - x on a uniform grid.

    Returns (brackets, zero_cells): grid cells [a, b] with a strict sign
    change of f^k - id, and grid nodes where f^k - id vanishes.
    """
    vals = [brute_iterate(f, k, F(i, cells)) - F(i, cells) for i in range(cells + 1)]
    brackets = []
    zeros = []
    for i, v in enumerate(vals):
        if v == 0:
            zeros.append(F(i, cells))
        if i and vals[i - 1] * v < 0:
            brackets.append((F(i - 1, cells), F(i, cells)))
    return brackets, zeros
