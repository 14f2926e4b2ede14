"""Command-line entry point ``hsaec``.

Exit status: 0 when the run passes or the verdict is true, 1 when a property
fails or the verdict is false, 2 on usage or I/O errors.
"""

from __future__ import annotations

import argparse
import sys
from itertools import combinations
from pathlib import Path

from . import io as hio
from .amalgamation import Amalgam, disjoint_amalgam, non_uniqueness_witness, uniqueness_check_one_point
from .forking import ForkingQuery, nonforking_decide
from .galois import TypeInstance, galois_type_equal
from .generators import gen_random_model, make_rng
from .morphisms import inclusion
from .nf import build_nf_witness, chain_levels, nf_decide
from .search import fresh_name
from .solutions import amalgamate_solutions, blocks_over, extend_solution, iso_from_solutions, solve_solution
from .structure import CompTuple, Model, ModelError, fmt
from .suites import SUITES, random_family, run_property_suite


class UsageError(Exception):
    pass


def _emit(text: str, args, name: str) -> None:
    """Print ``text``, or write it to ``--out/name`` and print the path."""
    if args.out:
        path = Path(args.out) / name
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text)
        print(path)
    else:
        sys.stdout.write(text)


def _atoms(text: str | None) -> list:
    return [a for a in (text or "").split(",") if a]


def _term(var) -> str:
    if var[0] == "gamma":
        return f"gamma{fmt(var[1])}({fmt(var[2])})"
    if var[0] == "ell":
        return f"ell{fmt(var[1])}"
    return str(var)


def _certificate_text(cert) -> str:
    lines = ["UNSAT"]
    for eq in cert.equations:
        lab = eq.label
        where = f"Q {fmt(lab.v)}|{fmt(lab.w)}" if isinstance(lab, CompTuple) else str(lab)
        lhs = " + ".join(sorted(_term(v) for v in eq.variables)) or "0"
        lines.append(f"  [{where}] {lhs} = {eq.constant}")
    return "\n".join(lines) + "\n"


def _elements(text: str) -> tuple:
    return tuple(hio.parse_element(part) for part in text.split(";") if part.strip())


def cmd_gen(args) -> int:
    m = gen_random_model(args.n, args.atoms, args.density, make_rng(args.seed))
    _emit(hio.serialize_model(m), args, "model.hsm")
    return 0


def cmd_solve(args) -> int:
    m = hio.read_model(args.model)
    domain = blocks_over(m, _atoms(args.over)) if args.over is not None else None
    h = solve_solution(m, domain)
    _emit(hio.serialize_solution(h, args.model), args, "solution.hssol")
    return 0


def cmd_extend(args) -> int:
    m = hio.read_model(args.model)
    h = hio.parse_solution(Path(args.solution).read_text(), m)
    domain = blocks_over(m, _atoms(args.over)) if args.over is not None else None
    res = extend_solution(m, h, domain)
    if not res:
        print(_certificate_text(res.certificate), end="")
        return 1
    _emit(hio.serialize_solution(res, args.model), args, "solution.hssol")
    return 0


def cmd_amalg(args) -> int:
    m = hio.read_model(args.model)
    A, bs = _atoms(args.base), _atoms(args.new)
    if len(bs) != args.k:
        raise UsageError(f"--new lists {len(bs)} atoms but --k is {args.k}")
    if args.solutions:
        fam = {}
        for path in args.solutions:
            h = hio.parse_solution(Path(path).read_text(), m)
            covered = {a for u in h.domain for a in u}
            w = tuple(b for b in bs if b in covered)
            fam[w] = h
        missing = [w for w in combinations(bs, args.k - 1) if w not in fam]
        if missing:
            raise UsageError(f"no solution file over A + {list(missing[0])}")
    else:
        fam = random_family(m, A, bs, make_rng(args.seed, 7))
    res = amalgamate_solutions(m, A, bs, fam)
    if not res:
        print(_certificate_text(res.certificate), end="")
        print(f"CERTIFICATE {'verified' if res.certificate.verify() else 'INVALID'}")
        return 1
    _emit(hio.serialize_solution(res, args.model), args, "amalgam.hssol")
    return 0


def cmd_iso(args) -> int:
    m, n = hio.read_model(args.model1), hio.read_model(args.model2)
    if len(m.atoms) != len(n.atoms) or m.n != n.n:
        print("ISO false")
        return 1
    if args.pi:
        pi = dict(item.split("->", 1) for item in args.pi.split(","))
    else:
        pi = dict(zip(m.atoms, n.atoms))
    f = iso_from_solutions(solve_solution(m), solve_solution(n), pi)
    _emit(hio.serialize_embedding(f, args.model1, args.model2), args, "iso.hsemb")
    return 0


def cmd_type_eq(args) -> int:
    base = hio.read_model(args.base)
    n1, n2 = hio.read_model(args.ambient1), hio.read_model(args.ambient2)
    t1 = TypeInstance(_elements(args.x), base, n1)
    t2 = TypeInstance(_elements(args.y), base, n2)
    verdict = galois_type_equal(t1, t2, method=args.method, witness=bool(args.out))
    print(f"TYPE-EQ {'true' if verdict.equal else 'false'}")
    if verdict.equal and args.out and verdict.witness is not None:
        star, g1, g2 = verdict.witness
        out = Path(args.out)
        hio.write_model(out / "amalgam.hsm", star)
        (out / "g1.hsemb").write_text(hio.serialize_embedding(g1, args.ambient1, "amalgam.hsm"))
        (out / "g2.hsemb").write_text(hio.serialize_embedding(g2, args.ambient2, "amalgam.hsm"))
        print(out / "g1.hsemb")
        print(out / "g2.hsemb")
    return 0 if verdict.equal else 1


def cmd_nonfork(args) -> int:
    models = [hio.read_model(p) for p in (args.m0, args.m, args.n_model)]
    (x,) = _elements(args.element)
    verdict = nonforking_decide(ForkingQuery(*models, x))
    print(verdict)
    return 0 if verdict.holds else 1


def cmd_uniq_check(args) -> int:
    if args.model:
        m = hio.read_model(args.model)
    else:
        m = Model(tuple(f"m{i}" for i in range(args.atoms if args.atoms is not None else args.n)), args.n)
    a = fresh_name("a", set(m.atoms))
    n = Model(m.atoms + (a,), m.n)
    rep = uniqueness_check_one_point(a, m, n, args.budget, seed=args.seed, trials=args.trials or 4)
    print(f"UNIQ-CHECK {'true' if rep.verified else 'false'} {rep}")
    if not rep.verified and args.out:
        _, am0, am1, _ = rep.counterexample
        hio.write_amalgam(Path(args.out) / "amalgam_a", am0)
        hio.write_amalgam(Path(args.out) / "amalgam_b", am1)
        print(Path(args.out) / "amalgam_a")
        print(Path(args.out) / "amalgam_b")
    return 0 if rep.verified else 1


def cmd_uniq_witness(args) -> int:
    X = [f"x{i}" for i in range(1, args.x + 1)]
    Xplus = [f"y{i}" for i in range(1, args.xplus + 1)]
    w = non_uniqueness_witness(X, Xplus, "a", args.n)
    line = f"UNIQ-WITNESS equivalent={'true' if w.equivalent else 'false'}"
    print(line)
    if args.out:
        out = Path(args.out)
        hio.write_amalgam(out / "amalgam_a", w.amalgam0)
        hio.write_amalgam(out / "amalgam_b", w.amalgam1)
        (out / "verdict.txt").write_text(line + "\n")
        print(out / "verdict.txt")
    # a witness is a pair of amalgams that are not equivalent
    return 0 if not w.equivalent else 1


def cmd_nf_witness(args) -> int:
    m0, m1, m2, m3 = (hio.read_model(p) for p in (args.m0, args.m1, args.m2, args.m3))
    holds = nf_decide(m0, m1, m2, m3)
    line = f"NF {'true' if holds else 'false'}"
    print(line)
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        chain = build_nf_witness(m0, m1, m2, m3) if holds else chain_levels(m0, m1, m2, m3)
        (out / "chain.txt").write_text(chain.to_text())
        square = Amalgam(m0, m1, m2, m3, inclusion(m1, m3), inclusion(m2, m3))
        hio.write_amalgam(out / "amalgam_a", square)
        hio.write_amalgam(out / "amalgam_b", disjoint_amalgam(m0, m1, m2))
        problems = chain.violations()
        verdict = line if holds else line + " CHAIN " + ("invalid" if problems else "valid")
        (out / "verdict.txt").write_text(verdict + "\n")
        print(out / "chain.txt")
    return 0 if holds else 1


def cmd_suite(args) -> int:
    names = sorted(SUITES) if args.name == "all" else [args.name]
    if any(nm not in SUITES for nm in names):
        raise UsageError(f"unknown suite {args.name!r}; known: all, {', '.join(sorted(SUITES))}")
    status = 0
    for nm in names:
        rep = run_property_suite(nm, seed=args.seed, trials=args.trials, out=args.out)
        print(rep.summary())
        for note in rep.notes:
            print("  " + note)
        for path in rep.witnesses:
            print("  witness " + path)
        if not rep.ok:
            status = 1
    return status


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--n", type=int, default=2, help="block size n")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--trials", type=int, default=None)
    common.add_argument("--out", default=None, help="output directory")
    common.add_argument("--format", choices=["text"], default="text")

    p = argparse.ArgumentParser(prog="hsaec", description="Finite Hart-Shelah classes K^n.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("gen", parents=[common], help="seeded random model")
    s.add_argument("--atoms", type=int, default=4)
    s.add_argument("--density", type=float, default=0.5)
    s.set_defaults(func=cmd_gen)

    s = sub.add_parser("solve", parents=[common], help="a solution of a model")
    s.add_argument("model")
    s.add_argument("--over", help="comma-separated atoms A; solve over [A]^n only")
    s.set_defaults(func=cmd_solve)

    s = sub.add_parser("extend", parents=[common], help="extend a partial solution")
    s.add_argument("model")
    s.add_argument("solution")
    s.add_argument("--over", help="comma-separated atoms of the target domain (default: all)")
    s.set_defaults(func=cmd_extend)

    s = sub.add_parser("amalg", parents=[common], help="k-amalgamation of solutions")
    s.add_argument("model")
    s.add_argument("solutions", nargs="*", help="one HSSOL file per (k-1)-subset; seeded family if omitted")
    s.add_argument("--k", type=int, required=True)
    s.add_argument("--base", default="", help="comma-separated atoms A")
    s.add_argument("--new", required=True, help="comma-separated atoms b_1..b_k")
    s.set_defaults(func=cmd_amalg)

    s = sub.add_parser("iso", parents=[common], help="isomorphism between two models")
    s.add_argument("model1")
    s.add_argument("model2")
    s.add_argument("--pi", help="atom map 'a->x,b->y' (default: declaration order)")
    s.set_defaults(func=cmd_iso)

    s = sub.add_parser("type-eq", parents=[common], help="Galois type equality")
    s.add_argument("base")
    s.add_argument("ambient1")
    s.add_argument("x", help="elements separated by ';', e.g. 'I:c;Gstar:{a,c}+{}'")
    s.add_argument("ambient2")
    s.add_argument("y")
    s.add_argument("--method", choices=["auto", "search", "fingerprint"], default="auto")
    s.set_defaults(func=cmd_type_eq)

    s = sub.add_parser("nonfork", parents=[common], help="nonforking of tp(x/M; N) over M0")
    s.add_argument("m0")
    s.add_argument("m")
    s.add_argument("n_model", metavar="N")
    s.add_argument("element")
    s.set_defaults(func=cmd_nonfork)

    s = sub.add_parser("uniq-check", parents=[common], help="budgeted one-point uniqueness check")
    s.add_argument("--budget", type=int, required=True)
    s.add_argument("--model", help="base model M (default: standard on --atoms atoms)")
    s.add_argument("--atoms", type=int, default=None)
    s.set_defaults(func=cmd_uniq_check)

    s = sub.add_parser("uniq-witness", parents=[common], help="explicit non-uniqueness configuration")
    s.add_argument("--x", type=int, default=2, help="|X|")
    s.add_argument("--xplus", type=int, default=1, help="|X+|")
    s.set_defaults(func=cmd_uniq_witness)

    s = sub.add_parser("nf-witness", parents=[common], help="NF verdict and witness bundle")
    for name in ("m0", "m1", "m2", "m3"):
        s.add_argument(name)
    s.set_defaults(func=cmd_nf_witness)

    s = sub.add_parser("suite", parents=[common], help="run a property suite")
    s.add_argument("name", help="suite name or 'all'")
    s.set_defaults(func=cmd_suite)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 2
    try:
        return args.func(args)
    except (UsageError, ModelError, hio.FormatError, OSError, ValueError) as exc:
        print(f"hsaec: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
