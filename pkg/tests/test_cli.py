import io
from fractions import Fraction as F

import pytest

from plexact.cli import digest, main, plot_rows
from plexact.pl_core import (
    PLError,
    PLMap,
    format_density,
    format_plmap,
    invariant_density,
    parse_plmap,
    preserves_lebesgue,
)
from plexact.shadowing import PseudoOrbit, make_pseudo_orbit
from plexact.structure import markovize

from support import IDENTITY, PSI, TENT


def run(argv):
    buf = io.StringIO()
    code = main([str(a) for a in argv], out=buf)
    return code, buf.getvalue()


@pytest.fixture
def files(tmp_path):
    def write(name, text):
        p = tmp_path / name
        p.write_text(text)
        return p

    write("tent.map", format_plmap(TENT))
    write("id.map", format_plmap(IDENTITY))
    write("bad.map", "plmap 1\n0 0\n1/2\n")
    write("fp.po", PseudoOrbit((0, 0, 0), F(1, 16)).to_text())
    write("p2.po", make_pseudo_orbit(TENT, F(2, 5), 0, F(1, 64), noise=[F(1, 512)], period=2).to_text())
    write("drift.po", make_pseudo_orbit(IDENTITY, 0, 20, F(1, 16), noise=[F(1, 32)]).to_text())
    return tmp_path


class TestAnalyze:
    @pytest.fixture(scope="class")
    @staticmethod
    def tent_report(tmp_path_factory):
        p = tmp_path_factory.mktemp("a") / "tent.map"
        p.write_text(format_plmap(TENT))
        code, text = run(["analyze", p, "--verify"])
        assert code == 0
        return text.splitlines()

    def test_header_and_digest(self, tent_report):
        assert tent_report[0] == "cpreport 1"
        assert tent_report[1] == "digest sha256:" + digest(TENT)
        assert tent_report[-1] == "end"

    @pytest.mark.parametrize(
        "line",
        [
            "pieces 2",
            "surjective yes",
            "lebesgue preserved",
            "turbulence q 1 J 0:1/2 K 1/2:1",
            "entropy-value log(2)/1",
            "chain-recurrent at all scales",
        ],
    )
    def test_tent_lines(self, tent_report, line):
        assert line in tent_report

    def test_tent_leo(self, tent_report):
        assert any(ln.startswith("leo 1 leo-certified") for ln in tent_report)

    def test_fixed_points(self, tent_report):
        assert "fix k 1 points 0 2/3 intervals none" in tent_report
        # 0 is a one-sided boundary fixed point, hence non-transverse
        assert "per k 1 points 0! 2/3" in tent_report
        assert "per k 2 points 2/5 4/5" in tent_report

    def test_identity(self, files):
        code, text = run(["analyze", files / "id.map"])
        lines = text.splitlines()
        assert code == 0
        assert "dichotomy square-identity" in lines
        assert any(ln.startswith("leo 1 disproved") for ln in lines)

    def test_deterministic(self, files):
        assert run(["analyze", files / "tent.map"]) == run(["analyze", files / "tent.map"])

    def test_digest_depends_only_on_the_map(self, files):
        (files / "again.map").write_text("# comment\n" + format_plmap(TENT))
        a = run(["analyze", files / "tent.map"])[1].splitlines()[1]
        b = run(["analyze", files / "again.map"])[1].splitlines()[1]
        assert a == b


class TestPerturb:
    def test_window(self, files, capsys):
        code, text = run(["perturb", files / "tent.map", "--verify", "window", "--J", "1/4", "1/2", "--m", "3"])
        assert code == 0
        g = parse_plmap(text)
        assert preserves_lebesgue(g) and g.n_pieces == 5
        cert = capsys.readouterr().err.splitlines()
        assert cert == ["window 1 J 1/4:1/2 m 3 regular yes", "lebesgue preserved yes", "rho 1/3", "bound 1/2"]

    def test_window_through_a_density(self, files):
        f = PLMap([(0, 0), (PSI(F(1, 2)), 1), (1, 0)])
        (files / "f.map").write_text(format_plmap(f))
        (files / "mu.density").write_text(format_density(invariant_density(markovize(f))))
        code, _ = run(["perturb", files / "f.map", "--verify", "window", "--J", "1/4", "1/2",
                       "--density", files / "mu.density"])
        assert code == 0

    def test_out_and_cert_files(self, files):
        code, text = run(["perturb", files / "tent.map", "--out", files / "g.map", "--cert", files / "g.cert",
                          "horseshoe", "--p", "2/3", "--n", "3", "--width", "1/16"])
        assert code == 0 and text == ""
        assert (files / "g.cert").read_text().splitlines()[1].startswith("entropy 1 lower 3 1")
        assert parse_plmap((files / "g.map").read_text()).n_pieces > 2

    def test_homotopy_end(self, files):
        code, text = run(["perturb", files / "tent.map", "homotopy", "--alpha", "1"])
        assert code == 0 and parse_plmap(text) == IDENTITY

    def test_fix_boundary(self, files, capsys):
        code, _ = run(["perturb", files / "tent.map", "fix-boundary", "--eps", "1/8"])
        assert code == 0 and "ends 1/16 1/16 rho 1/16" in capsys.readouterr().err

    def test_cantor(self, files, capsys):
        code, _ = run(["perturb", files / "tent.map", "--verify", "cantor", "--k", "2", "--rep", "2/3:1", "--n", "1"])
        assert code == 0 and "fixed 9/9" in capsys.readouterr().err

    def test_blowup(self, files, capsys):
        code, _ = run(["perturb", files / "tent.map", "--verify", "blowup", "--seed", "1/6"])
        assert code == 0 and "rho 110/10111 bound 111/2000" in capsys.readouterr().err

    def test_break_shadowing(self, files, capsys):
        code, _ = run(["perturb", files / "tent.map", "--verify", "break-shadowing", "--eps", "1/8"])
        err = capsys.readouterr().err
        assert code == 0 and "verdict fails at scale 1/32" in err

    def test_bytes_identical(self, files):
        argv = ["perturb", files / "tent.map", "window", "--J", "0", "1", "--m", "5"]
        assert run(argv) == run(argv)


class TestOtherCommands:
    def test_approximate_cp(self, files, capsys):
        code, text = run(["approximate-cp", files / "tent.map", "--eps", "1/4", "--verify"])
        assert code == 0 and parse_plmap(text).is_surjective
        err = capsys.readouterr().err.splitlines()
        assert err[0] == "approximate-cp 1 eps 1/4" and err[1] == "rho 593/6912 bound 1/2"

    def test_trace_fixed(self, files):
        assert run(["trace", files / "tent.map", files / "fp.po", "--eps", "1/8", "--verify"]) == (
            0, "trace 1 eps 1/8 z 0 horizon 2\n")

    def test_trace_periodic(self, files):
        code, text = run(["trace", files / "tent.map", files / "p2.po", "--eps", "1/8"])
        assert code == 0 and text == "trace 1 eps 1/8 z 2/5 horizon 2 periodic 2\n"

    def test_trace_not_found(self, files):
        assert run(["trace", files / "id.map", files / "drift.po", "--eps", "1/32"]) == (
            8, "trace 1 eps 1/32 not-found\n")

    def test_plot(self, files):
        code, text = run(["plot", files / "tent.map", "--samples", "3"])
        assert code == 0
        assert text.splitlines()[1:] == ["0\t0", "0.5\t1", "1\t0"]

    def test_plot_rows_merge_breakpoints(self):
        f = PLMap([(0, 0), (F(1, 3), 1), (1, 0)])
        assert [x for x, _ in plot_rows(f, 3)] == [0, F(1, 3), F(1, 2), 1]
        with pytest.raises(PLError):
            plot_rows(f, 1)


class TestExitCodes:
    def test_usage(self):
        assert run(["analyze"])[0] == 2
        assert run(["bogus"])[0] == 2

    def test_window_needs_an_interval(self, files):
        assert run(["perturb", files / "tent.map", "window"])[0] == 2

    def test_parse(self, files):
        assert run(["analyze", files / "bad.map"])[0] == 3

    def test_missing_file(self, files):
        assert run(["plot", files / "nope.map"])[0] == 7

    def test_precondition(self, files):
        assert run(["perturb", files / "tent.map", "horseshoe", "--p", "1/2", "--n", "3", "--width", "1/16"])[0] == 5

    def test_decimal_argument_is_a_usage_error(self, files):
        assert run(["perturb", files / "tent.map", "fix-boundary", "--eps", "0.1"])[0] == 2
