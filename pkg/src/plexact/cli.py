"""Command-line interface.

Every numeric argument is an exact rational (``3``, ``-1/4``); decimals are
rejected.  Reports are line-oriented text with a fixed field order, so equal
inputs give byte-identical output.

Exit codes: 0 success, 2 usage, 3 parse error, 4 piece cap exceeded,
5 precondition or construction failure, 6 ``--verify`` replay failure,
7 file error, 8 nothing found (trace).
"""

from __future__ import annotations

import argparse
import hashlib
import sys
from decimal import Decimal, localcontext
from fractions import Fraction

from . import chains, perturb, shadowing, structure
from .periodic import dense_periodicity_certificate, fix_set, per_set
from .pl_core import (
    NonErgodicError,
    PiecewiseConstDensity,
    PieceCapExceeded,
    PLError,
    PLMap,
    RatInterval,
    compose,
    format_plmap,
    format_rat,
    image,
    parse_density,
    parse_plmap,
    preserves_lebesgue,
    preserves_measure,
    rat,
    sup_distance,
)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_PARSE = 3
EXIT_CAP = 4
EXIT_MATH = 5
EXIT_VERIFY = 6
EXIT_IO = 7
EXIT_NOT_FOUND = 8


class ParseError(Exception):
    pass


class VerifyError(Exception):
    pass


class NotFound(Exception):
    pass


def _rational(text: str) -> Fraction:
    try:
        return rat(text)
    except (PLError, ValueError, ZeroDivisionError) as exc:
        raise argparse.ArgumentTypeError(f"not an exact rational: {text!r}") from exc


def _rational_list(text: str) -> list[Fraction]:
    return [_rational(t) for t in text.split(",") if t]


def _rep(text: str) -> tuple[Fraction, int]:
    try:
        x, p = text.split(":")
        return _rational(x), int(p)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected x:period, got {text!r}") from exc


def _read(path: str) -> str:
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise FileNotFoundError(str(exc)) from exc


def _load_map(path: str) -> PLMap:
    text = _read(path)
    try:
        return parse_plmap(text)
    except (PLError, ValueError) as exc:
        raise ParseError(f"{path}: {exc}") from exc


def _load_density(path: str) -> PiecewiseConstDensity:
    try:
        return parse_density(_read(path))
    except (PLError, ValueError) as exc:
        raise ParseError(f"{path}: {exc}") from exc


def _write(path: str | None, text: str, out) -> None:
    if path is None:
        out.write(text)
        return
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)


def _iv(J: RatInterval) -> str:
    return f"{format_rat(J.lo)}:{format_rat(J.hi)}"


def _pts(xs) -> str:
    xs = list(xs)
    return " ".join(format_rat(x) for x in xs) if xs else "none"


def _ivs(Js) -> str:
    Js = list(Js)
    return " ".join(_iv(J) for J in Js) if Js else "none"


def digest(f: PLMap) -> str:
    return hashlib.sha256(format_plmap(f).encode()).hexdigest()


def _check(ok: bool, what: str) -> None:
    if not ok:
        raise VerifyError(f"witness replay failed: {what}")


# ---------------------------------------------------------------- analyze


def analyze_report(f: PLMap, k: int, scales, resolution, depth: int, max_period: int,
                   link_depth: int, verify: bool = False) -> str:
    lines = ["cpreport 1", f"digest sha256:{digest(f)}", f"pieces {f.n_pieces}"]
    lines.append(f"surjective {'yes' if f.is_surjective else 'no'}")
    mc = preserves_measure(f, PiecewiseConstDensity.lebesgue())
    lines.append("lebesgue preserved" if mc.preserved else f"lebesgue not-preserved witness {_iv(mc.witness)}")

    model = structure.markovize(f, depth)
    if model is None:
        lines.append("markov none")
    else:
        lines.append(f"markov cells {model.size} rounds {model.depth}")
        try:
            mu = structure_density(model)
            lines.append("density " + " ".join(f"{format_rat(a)}:{format_rat(b)}={format_rat(v)}"
                                                for a, b, v in mu.cells()))
        except NonErgodicError as exc:
            lines.append(f"density non-unique extremes {len(exc.densities)}")
        except PLError as exc:
            lines.append(f"density none ({exc})")

    for i in range(1, k + 1):
        fs = fix_set(f, i)
        lines.append(f"fix k {i} points {_pts(fs.points())} intervals {_ivs(fs.intervals())}")
        ps = per_set(f, i)
        recs = [f"{format_rat(p.x)}{'' if p.transverse else '!'}" for p in ps]
        lines.append(f"per k {i} points {' '.join(recs) if recs else 'none'}")

    dc = dense_periodicity_certificate(f, resolution, max_period)
    hit = sum(not c.exhausted for c in dc.cells)
    lines.append(f"periodic-density resolution {format_rat(resolution)} max-period {max_period} "
                 f"witnessed {hit}/{len(dc.cells)}")
    if verify:
        _check(dc.verify(f), "periodic density")

    states = []
    for e in scales:
        rep = chains.certify_chain_recurrent(f, e, e / 5, witnesses=verify)
        c = rep.counts()
        states.append("refuted" if c[chains.REFUTED] else "unknown" if c[chains.UNKNOWN] else "certified")
        lines.append(f"chains eps {format_rat(e)} certified {c[chains.CERTIFIED]} "
                     f"refuted {c[chains.REFUTED]} unknown {c[chains.UNKNOWN]}")
        if verify:
            for v in rep.verdicts:
                if v.chain:
                    _check(chains.is_chain(f, v.chain, e), f"chain at cell {v.cell}")
    if "refuted" in states:
        lines.append("chain-recurrent no")
    elif "unknown" in states:
        lines.append("chain-recurrent undetermined")
    else:
        lines.append("chain-recurrent at all scales")

    leo = structure.certify_leo(f, depth, resolution)
    lines.append(leo.to_text())
    if verify:
        _check(leo.verify(f), "leo certificate")

    tw = structure.find_turbulence(f, 2, depth)
    lines.append("turbulence none" if tw is None else
                 f"turbulence q {tw.q} J {_iv(tw.J)} K {_iv(tw.K)}")
    if verify and tw is not None:
        _check(tw.verify(f), "turbulence")

    sq = compose(f, f)
    if sq == PLMap.identity():
        lines.append("dichotomy square-identity")
    else:
        t2 = structure.find_turbulence(sq, 2, depth)
        if t2 is None:
            lines.append("dichotomy undetermined")
        else:
            lines.append(f"dichotomy turbulent-square q {t2.q} bound 2 {2 * t2.q}")
            if verify:
                _check(t2.verify(sq), "turbulence of the square")

    ent = structure.entropy_bounds(f, depth)
    lines.append(ent.to_text())
    if ent.exact:
        lines.append(f"entropy-value {ent.lower}")

    try:
        bm = structure.barge_martin(f, depth)
        pieces = " ".join(f"{_iv(J)}={c.verdict}" for J, c in bm.pieces) or "none"
        lines.append(f"barge-martin pieces {pieces} fixed {_ivs(bm.complement)}")
        if verify:
            for J, c in bm.pieces:
                _check(c.verify(structure.restrict_rescale(sq, J)), f"piece {_iv(J)}")
    except structure.HypothesisViolation as exc:
        lines.append(f"barge-martin hypothesis-violated ({exc})")

    sw = structure.find_split(f, depth)
    lines.append("split none" if sw is None else
                 f"split J {_iv(sw.J)} period {sw.period} parts {_ivs(sw.components)}")
    if verify and sw is not None:
        _check(sw.verify(f), "split")

    lr = shadowing.check_linking(f, scales, link_depth)
    lines.append(f"linking {lr.verdict()} depth {link_depth}")
    if verify:
        for r in lr.results:
            if r.linked:
                _check(r.replay(f), f"link from {format_rat(r.c)}")
    lines.append("end")
    return "\n".join(lines) + "\n"


def structure_density(model):
    from .pl_core import invariant_density

    return invariant_density(model)


def cmd_analyze(args, out) -> int:
    f = _load_map(args.map)
    text = analyze_report(f, args.k, args.scales, args.resolution, args.depth, args.max_period,
                          args.link_depth, args.verify)
    _write(args.out, text, out)
    return EXIT_OK


# ---------------------------------------------------------------- perturb


def _perturb(args, f: PLMap):
    sub = args.sub
    if sub == "window":
        J = RatInterval(*args.J)
        spec = (perturb.WindowSpec.from_cuts(args.cuts) if args.cuts
                else perturb.WindowSpec.regular_window(J, args.m))
        if args.density:
            mu = _load_density(args.density)
            g = perturb.window_perturb_cp(f, mu, spec)
            kept = preserves_measure(g, mu).preserved
            note = f"density preserved {'yes' if kept else 'no'}"
        else:
            g = perturb.window_perturb_lambda(f, spec)
            note = f"lebesgue preserved {'yes' if preserves_lebesgue(g) else 'no'}"
        cert = [f"window 1 J {_iv(spec.J)} m {spec.m} regular {'yes' if spec.regular else 'no'}",
                note, f"rho {format_rat(sup_distance(f, g))}"]
        if not args.density:
            cert.append(f"bound {format_rat(image(f, spec.J).length)}")
        return g, cert, lambda: preserves_lebesgue(g) if not args.density else kept
    if sub == "horseshoe":
        g, ent = perturb.insert_horseshoe(f, args.p, args.n, args.width)
        hs = ent.witness
        cert = [f"horseshoe 1 p {format_rat(args.p)} n {args.n} width {format_rat(args.width)}",
                ent.to_text(), f"folds {_ivs(hs.intervals)}", f"rho {format_rat(sup_distance(f, g))}"]
        return g, cert, lambda: hs.verify(g)
    if sub == "blowup":
        if args.tree_depth is not None:
            plan = perturb.BlowupPlan.preimage_tree(f, args.seed, args.tree_depth, args.eta, args.core)
        else:
            plan = perturb.BlowupPlan.forward_orbit(f, args.seed, args.eta, args.core)
        res = perturb.blowup(plan)
        g = res.F
        if args.mixing is not None:
            g = perturb.mixing_approximant(res, args.mixing).F
        cert = [f"blowup 1 core {plan.core} eta {format_rat(plan.eta)} gamma {format_rat(res.gamma)}",
                f"points {_pts(plan.points)}",
                f"intervals {_ivs(res.intervals)}",
                f"semiconjugacy grid {'yes' if res.semiconjugate_on_grid else 'no'} "
                f"defect {_ivs(res.defect)} inside-windows {'yes' if res.defect_in_windows else 'no'}",
                f"rho {format_rat(res.rho)} bound {format_rat(res.rho_bound)}",
                f"core-periodic {_pts(res.core_periodic)}",
                f"note {res.note}"]
        if args.mixing is not None:
            cert.append(f"mixing n {args.mixing} rho {format_rat(sup_distance(g, res.F))}")
        cert.append("pi")
        cert.append(format_plmap(res.pi).rstrip("\n"))
        return g, cert, lambda: res.semiconjugate_on_grid
    if sub == "cantor":
        plan = perturb.CantorPlan(args.k, tuple(args.rep), args.n,
                                  tuple(args.half_width) if args.half_width else None)
        g, rep = perturb.cantor_plan_perturb(f, plan)
        cert = [f"cantor 1 k {rep.k} n {rep.n}"]
        for c in rep.counts:
            cert.append(f"rep {format_rat(c.x)} period {c.period} half-width {format_rat(c.half_width)} "
                        f"window {_iv(c.window)} fixed {c.in_window}/{c.expected_window} "
                        f"orbit {c.in_orbit}/{c.expected_orbit} branch {format_rat(c.branch_width)}")
        return g, cert, lambda: rep.ok
    if sub == "fix-boundary":
        g = perturb.fix_boundary(f, args.eps)
        cert = [f"fix-boundary 1 eps {format_rat(args.eps)}",
                f"ends {format_rat(g(0))} {format_rat(g(1))} rho {format_rat(sup_distance(f, g))}"]
        return g, cert, lambda: g(0) not in (0, 1) and g(1) not in (0, 1)
    if sub == "break-shadowing":
        b = shadowing.break_shadowing(f, args.eps, args.period)
        cert = [f"break-shadowing 1 eps {format_rat(args.eps)} rho {format_rat(b.rho)}",
                f"orbit {_pts(b.orbit)} cycle {_pts(b.cycle)}", b.leo.to_text(),
                b.linking.to_text().rstrip("\n")]
        return b.G, cert, lambda: b.leo.verify(b.G)
    if sub == "homotopy":
        g = structure.homotopy_to_identity(f, args.alpha)
        cert = [f"homotopy 1 alpha {format_rat(args.alpha)} lebesgue "
                f"{'preserved' if preserves_lebesgue(g) else 'not-preserved'}"]
        return g, cert, lambda: True
    raise PLError(f"unknown perturbation {sub}")  # pragma: no cover


def cmd_perturb(args, out) -> int:
    f = _load_map(args.map)
    g, cert, replay = _perturb(args, f)
    if args.verify:
        _check(replay(), args.sub)
    _write(args.out, format_plmap(g), out)
    cert_text = "\n".join(cert) + "\n"
    if args.cert:
        _write(args.cert, cert_text, out)
    else:
        sys.stderr.write(cert_text)
    return EXIT_OK


# ---------------------------------------------------------------- approximate-cp


def cmd_approximate_cp(args, out) -> int:
    f = _load_map(args.map)
    h, cert = chains.approximate_by_cp(f, args.eps, args.mesh)
    if not cert.checks["rho_f_h"]:
        raise PLError("sup-distance bound failed")
    if args.verify:
        _check(cert.leo.verify(h), "leo certificate")
    _write(args.out, format_plmap(h), out)
    lines = [f"approximate-cp 1 eps {format_rat(args.eps)}",
             f"rho {format_rat(cert.rho_f_h)} bound {format_rat(2 * args.eps)}",
             "checks " + " ".join(f"{k}={'yes' if v else 'no'}" for k, v in cert.checks.items()),
             cert.leo.to_text()]
    text = "\n".join(lines) + "\n"
    if args.cert:
        _write(args.cert, text, out)
    else:
        sys.stderr.write(text)
    return EXIT_OK


# ---------------------------------------------------------------- trace


def cmd_trace(args, out) -> int:
    f = _load_map(args.map)
    try:
        po = shadowing.parse_pseudo_orbit(_read(args.porbit))
    except (PLError, ValueError) as exc:
        raise ParseError(f"{args.porbit}: {exc}") from exc
    if not po.is_valid(f):
        raise PLError(f"not a pseudo-orbit for this map: defect {format_rat(po.defect(f))}")
    res = shadowing.trace(f, po, args.eps, args.gamma)
    if res is None:
        out.write(f"trace 1 eps {format_rat(args.eps)} not-found\n")
        raise NotFound("empty tracing set")
    if args.verify:
        _check(res.verify(f, po), "tracing point")
    line = f"trace 1 eps {format_rat(res.eps)} z {format_rat(res.z)} horizon {res.horizon}"
    if res.periodic:
        line += f" periodic {res.period}"
    out.write(line + "\n")
    return EXIT_OK


# ---------------------------------------------------------------- plot


def _decimal(q: Fraction, digits: int) -> str:
    with localcontext() as ctx:
        ctx.prec = digits + 20
        d = (Decimal(q.numerator) / Decimal(q.denominator)).quantize(Decimal(1).scaleb(-digits))
    s = format(d, "f")
    if "." in s:
        s = s.rstrip("0").rstrip(".")
    return "0" if s in ("-0", "") else s


def plot_rows(f: PLMap, samples: int, digits: int = 6) -> list[tuple[Fraction, Fraction]]:
    if samples < 2:
        raise PLError("need at least 2 samples")
    xs = {Fraction(i, samples - 1) for i in range(samples)} | set(f.xs)
    return [(x, f(x)) for x in sorted(xs)]


def cmd_plot(args, out) -> int:
    f = _load_map(args.map)
    out.write(f"# x\tf(x)  decimal display rounded to {args.precision} places; the map file is exact\n")
    for x, y in plot_rows(f, args.samples, args.precision):
        out.write(f"{_decimal(x, args.precision)}\t{_decimal(y, args.precision)}\n")
    return EXIT_OK


# ---------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="plexact", description="Exact dynamics of piecewise linear interval maps.")
    sp = p.add_subparsers(dest="command", required=True)

    a = sp.add_parser("analyze", help="full structured report for a map")
    a.add_argument("map")
    a.add_argument("--k", type=int, default=2, help="largest period for fix/per sets")
    a.add_argument("--scales", type=_rational_list, default=[Fraction(1, 4), Fraction(1, 10)])
    a.add_argument("--resolution", type=_rational, default=Fraction(1, 64))
    a.add_argument("--depth", type=int, default=structure.DEFAULT_DEPTH)
    a.add_argument("--max-period", type=int, default=6)
    a.add_argument("--link-depth", type=int, default=20)
    a.add_argument("--out")
    a.add_argument("--verify", action="store_true", help="replay every embedded witness")
    a.set_defaults(run=cmd_analyze)

    q = sp.add_parser("perturb", help="constructive perturbations")
    q.add_argument("map")
    q.add_argument("--out", help="output map file (default stdout)")
    q.add_argument("--cert", help="certificate file (default stderr)")
    q.add_argument("--verify", action="store_true")
    qs = q.add_subparsers(dest="sub", required=True)
    w = qs.add_parser("window")
    w.add_argument("--J", nargs=2, type=_rational, metavar=("LO", "HI"))
    w.add_argument("--m", type=int, default=3)
    w.add_argument("--regular", action="store_true", help="equal parts (the default unless --cuts)")
    w.add_argument("--cuts", nargs="+", type=_rational)
    w.add_argument("--density", help="invariant density file; window given in its coordinates")
    h = qs.add_parser("horseshoe")
    h.add_argument("--p", type=_rational, required=True)
    h.add_argument("--n", type=int, required=True)
    h.add_argument("--width", type=_rational, required=True)
    b = qs.add_parser("blowup")
    b.add_argument("--seed", type=_rational, required=True)
    b.add_argument("--eta", type=_rational, default=Fraction(1, 10))
    b.add_argument("--core", choices=[perturb.AFFINE_CYCLE, perturb.CONTRACTING], default=perturb.AFFINE_CYCLE)
    b.add_argument("--tree-depth", type=int, help="blow up the preimage tree of the seed instead of its orbit")
    b.add_argument("--mixing", type=int, help="emit the five-lap approximant from this index on")
    c = qs.add_parser("cantor")
    c.add_argument("--k", type=int, required=True)
    c.add_argument("--rep", type=_rep, action="append", required=True, help="x:period, repeatable")
    c.add_argument("--n", type=int, required=True)
    c.add_argument("--half-width", type=_rational, action="append")
    fb = qs.add_parser("fix-boundary")
    fb.add_argument("--eps", type=_rational, required=True)
    bs = qs.add_parser("break-shadowing")
    bs.add_argument("--eps", type=_rational, required=True)
    bs.add_argument("--period", type=int, default=2)
    ho = qs.add_parser("homotopy")
    ho.add_argument("--alpha", type=_rational, required=True)
    q.set_defaults(run=cmd_perturb)

    ap = sp.add_parser("approximate-cp", help="leo approximation of a chain-recurrent map")
    ap.add_argument("map")
    ap.add_argument("--eps", type=_rational, required=True)
    ap.add_argument("--mesh", type=_rational)
    ap.add_argument("--out")
    ap.add_argument("--cert")
    ap.add_argument("--verify", action="store_true")
    ap.set_defaults(run=cmd_approximate_cp)

    t = sp.add_parser("trace", help="exact tracing point for a pseudo-orbit file")
    t.add_argument("map")
    t.add_argument("porbit")
    t.add_argument("--eps", type=_rational, required=True)
    t.add_argument("--gamma", type=_rational)
    t.add_argument("--verify", action="store_true")
    t.set_defaults(run=cmd_trace)

    pl = sp.add_parser("plot", help="tab-separated samples for plotting")
    pl.add_argument("map")
    pl.add_argument("--samples", type=int, default=101)
    pl.add_argument("--precision", type=int, default=6)
    pl.set_defaults(run=cmd_plot)
    return p


def main(argv=None, out=None) -> int:
    out = out if out is not None else sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    if getattr(args, "sub", None) == "window" and not args.cuts and args.J is None:
        sys.stderr.write("usage error: window needs --J or --cuts\n")
        return EXIT_USAGE
    try:
        return args.run(args, out)
    except ParseError as exc:
        sys.stderr.write(f"parse error: {exc}\n")
        return EXIT_PARSE
    except PieceCapExceeded as exc:
        sys.stderr.write(f"piece cap exceeded: {exc}\n")
        return EXIT_CAP
    except VerifyError as exc:
        sys.stderr.write(f"{exc}\n")
        return EXIT_VERIFY
    except NotFound as exc:
        sys.stderr.write(f"not found: {exc}\n")
        return EXIT_NOT_FOUND
    except FileNotFoundError as exc:
        sys.stderr.write(f"file error: {exc}\n")
        return EXIT_IO
    except PLError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_MATH


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
