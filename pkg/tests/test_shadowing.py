from fractions import Fraction as F

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from plexact.pl_core import PLError, sup_distance
from plexact.shadowing import (
    PseudoOrbit,
    break_shadowing,
    check_linking,
    critical_set,
    link_holds,
    make_pseudo_orbit,
    parse_pseudo_orbit,
    trace,
    traces,
)
from plexact.structure import LEO

from support import IDENTITY, LAMBDA_CORPUS, TENT, plmaps


class TestPseudoOrbit:
    def test_zero_noise_is_a_true_orbit(self):
        po = make_pseudo_orbit(TENT, F(1, 3), 4, F(1, 100), noise="zero")
        assert po.points == (F(1, 3), F(2, 3), F(2, 3), F(2, 3))
        assert po.defect(TENT) == 0

    def test_alternating(self):
        po = make_pseudo_orbit(TENT, F(2, 3), 4, F(1, 16))
        assert po.points == (F(2, 3), F(67, 96), F(55, 96), F(85, 96))
        assert po.defect(TENT) == F(1, 32) and po.is_valid(TENT)

    def test_clipped_to_the_interval(self):
        po = make_pseudo_orbit(IDENTITY, 1, 3, F(1, 4), noise=[F(1, 8)])
        assert po.points == (1, 1, 1)

    def test_wrap_must_close(self):
        with pytest.raises(PLError):
            make_pseudo_orbit(TENT, F(1, 3), 0, F(1, 16), noise="zero", period=2)

    def test_noise_too_large(self):
        with pytest.raises(PLError):
            make_pseudo_orbit(TENT, F(1, 3), 3, F(1, 16), noise=[F(1, 16)])

    def test_validation(self):
        with pytest.raises(PLError):
            PseudoOrbit((F(1, 2),), 0)
        with pytest.raises(PLError):
            PseudoOrbit((F(3, 2),), F(1, 2))

    def test_text_round_trip(self):
        po = make_pseudo_orbit(TENT, F(2, 5), 0, F(1, 64), noise=[F(1, 512)], period=2)
        assert parse_pseudo_orbit(po.to_text()) == po
        assert po.to_text().splitlines()[0] == "porbit 1 delta 1/64 period 2"

    @pytest.mark.parametrize("text", ["", "porbit 1 0.5\n0\n", "porbit 1 delta 1/4 period 3\n0\n1\n"])
    def test_parse_errors(self, text):
        with pytest.raises(PLError):
            parse_pseudo_orbit(text)


class TestTrace:
    def test_fixed_point(self):
        po = PseudoOrbit((0, 0, 0), F(1, 16))
        r = trace(TENT, po, F(1, 8))
        assert r.z == 0 and r.horizon == 2 and r.verify(TENT, po)

    def test_alternating(self):
        po = make_pseudo_orbit(TENT, F(1, 5), 16, F(1, 64))
        r = trace(TENT, po, F(1, 8))
        assert r is not None and traces(TENT, po, r.z, F(1, 8))

    def test_periodic_two_cycle(self):
        po = make_pseudo_orbit(TENT, F(2, 5), 0, F(1, 64), noise=[F(1, 512)], period=2)
        r = trace(TENT, po, F(1, 8))
        assert r.periodic and r.period == 2 and r.z == F(2, 5)
        assert TENT(TENT(r.z)) == r.z
        assert traces(TENT, po, r.z, F(1, 8), horizon=40)

    def test_identity_drift_cannot_be_traced(self):
        po = make_pseudo_orbit(IDENTITY, 0, 20, F(1, 16), noise=[F(1, 32)])
        assert po.points[-1] == F(19, 32)
        assert trace(IDENTITY, po, F(1, 8)) is None

    def test_gamma_range(self):
        po = PseudoOrbit((0,), F(1, 16))
        with pytest.raises(PLError):
            trace(TENT, po, F(1, 8), gamma=F(1, 8))
        with pytest.raises(PLError):
            trace(TENT, po, 0)

    @settings(max_examples=40, deadline=None)
    @given(st.sampled_from(sorted(LAMBDA_CORPUS)), st.integers(1, 30))
    def test_results_replay_and_grow_with_eps(self, name, seed):
        f = LAMBDA_CORPUS[name]
        po = make_pseudo_orbit(f, F(seed, 31), 12, F(1, 64))
        small = trace(f, po, F(1, 16))
        if small is not None:
            assert small.verify(f, po)
            # a point tracing at eps/2 also traces at eps
            assert traces(f, po, small.z, F(1, 8))
            assert trace(f, po, F(1, 8)) is not None


class TestLinking:
    def test_tent(self):
        rep = check_linking(TENT, [F(1, 8), F(1, 32)])
        assert rep.critical == (0, F(1, 2), 1)
        r = rep.at(F(1, 2), F(1, 8))
        assert (r.target, r.m, r.z) == (0, 2, F(1, 2))
        assert rep.linked_at_all_scales and rep.verdict() == "linked at all tested scales"

    def test_identity(self):
        rep = check_linking(IDENTITY, [F(1, 8)])
        assert rep.critical == (0, 1) and rep.linked_at_all_scales

    def test_link_holds_is_strict(self):
        assert link_holds(TENT, F(1, 2), 0, F(1, 2), 2, F(1, 8))
        assert not link_holds(TENT, F(1, 2), 0, F(1, 2) + F(1, 8), 2, F(1, 8))
        assert not link_holds(TENT, F(1, 2), 0, F(1, 2), 1, F(1, 8))

    def test_text(self):
        lines = check_linking(TENT, [F(1, 8)]).to_text().splitlines()
        assert lines[0] == "linking 1 depth 20 scales 1/8"
        assert lines[3] == "1/2 eps 1/8 linked 0 m 2 z 1/2"

    def test_bad_scales(self):
        with pytest.raises(PLError):
            check_linking(TENT, [0])

    @settings(max_examples=25, deadline=None)
    @given(plmaps(max_breakpoints=5))
    def test_every_link_replays(self, f):
        rep = check_linking(f, [F(1, 8), F(1, 16)], depth=8)
        assert rep.critical == critical_set(f)
        for r in rep.results:
            if r.linked:
                assert r.replay(f)


@pytest.fixture(scope="module")
def broken():
    return break_shadowing(TENT, F(1, 8))


class TestBreakShadowing:
    def test_construction(self, broken):
        assert broken.cycle == (F(2, 5), F(4, 5))
        assert broken.orbit == (0, F(1, 10), F(1, 5), F(2, 5))
        assert broken.rho == sup_distance(TENT, broken.G) == F(1, 10) < F(1, 8)

    def test_still_leo(self, broken):
        assert broken.leo.verdict == LEO and broken.leo.verify(broken.G)

    def test_linking_fails(self, broken):
        rep = broken.linking
        assert rep.failing_scales()[0] <= F(1, 32)
        assert rep.verdict() == "fails at scale 1/32"
        assert all(not r.linked for r in rep.failures())

    def test_deterministic(self, broken):
        again = break_shadowing(TENT, F(1, 8))
        assert again.G == broken.G and again.linking.to_text() == broken.linking.to_text()

    def test_preconditions(self):
        with pytest.raises(PLError):
            break_shadowing(TENT, 0)
        with pytest.raises(PLError):
            break_shadowing(IDENTITY, F(1, 8))
