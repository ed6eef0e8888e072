"""Command-line driver.

Subcommands: check, compute (cohomology / reduce / braid-equiv /
internal-hom / internal-end / morita / ideal-probe / tensor), list,
export.  Exit codes: 0 success, 1 axiom or verification failure,
2 parse error, 3 unknown verdict / budget exhaustion.
"""

from __future__ import annotations

import argparse
import json
import sys

from .algebra import StructuralError, check_dg_algebra, dual_numbers, trivial_algebra
from .bimodule import check_dg_bimodule, left_regular
from .field import QQ, PrimeField
from .graded import GradedSpace
from .homotopy import cohomology, gaussian_reduce, homotopy_equivalent
from .linalg import Matrix
from .serialize import ParseError, Workspace, dump_workspace, load_workspace
from .twisted import mc_check, twisted_hom_complex
from .zoo import BraidWord, ks_complex, tian_quotient, zigzag

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_PARSE = 2
EXIT_UNKNOWN = 3


def _field_from_flag(spec):
    if spec in (None, "Q"):
        return QQ
    if spec.startswith("F"):
        return PrimeField(int(spec[1:]))
    raise ParseError(f"unknown field {spec!r} (use Q or F<p>)")


def _builtin_algebra(name, field):
    lname = name.lower()
    if lname in ("k", "ground"):
        return trivial_algebra(field, "k")
    if lname in ("d",):
        return dual_numbers(field, degree=-1, differential=True, name="D")
    if lname in ("dual", "dualnumbers"):
        return dual_numbers(field, degree=0, name="dual")
    if lname in ("r'", "rprime", "zi"):
        return tian_quotient(field)[0]
    if lname.startswith("zigzag"):
        return zigzag(int(lname[len("zigzag"):]), field=field)
    return None


def _resolve_algebra(spec, field, ws=None):
    a = _builtin_algebra(spec, field)
    if a is not None:
        return a
    if ws is not None and spec in ws.algebras:
        return ws.algebras[spec]
    raise ParseError(f"unknown algebra {spec!r}")


def _emit(args, payload, text_lines):
    if getattr(args, "json", False):
        payload.setdefault("seed", getattr(args, "seed", 0))
        print(json.dumps(payload, indent=1, sort_keys=True))
    else:
        for line in text_lines:
            print(line)


def cmd_check(args):
    try:
        ws = load_workspace(args.input)
    except (ParseError, OSError) as e:
        print(f"parse error: {e}", file=sys.stderr)
        return EXIT_PARSE
    results = []
    ok = True
    for name, a in sorted(ws.algebras.items()):
        rep = check_dg_algebra(a)
        results.append({"name": name, "kind": "algebra", "passed": rep.passed,
                        "violations": [[v[0], list(map(str, v[1]))] for v in rep.violations]})
        ok = ok and rep.passed
    for name, m in sorted(ws.bimodules.items()):
        rep = check_dg_bimodule(m)
        results.append({"name": name, "kind": "bimodule", "passed": rep.passed,
                        "violations": [[v[0], list(map(str, v[1]))] for v in rep.violations]})
        ok = ok and rep.passed
    for name, x in sorted(ws.twisted.items()):
        rep = mc_check(x)
        results.append({"name": name, "kind": "twisted", "passed": rep.passed,
                        "violations": [[v[0], list(map(str, v[1]))] for v in rep.violations]})
        ok = ok and rep.passed
    for name, g in sorted(ws.morphisms.items()):
        try:
            g.validate()
            passed = True
            viol = []
        except StructuralError as e:
            passed = False
            viol = [["structural", [str(e)]]]
        results.append({"name": name, "kind": "twisted_map", "passed": passed,
                        "violations": viol})
        ok = ok and passed
    for name, c in sorted(ws.certificates.items()):
        try:
            passed = c.verify(deep=True)
        except StructuralError:
            passed = False
        results.append({"name": name, "kind": "certificate", "passed": passed,
                        "violations": [] if passed else [["certificate-identities", []]]})
        ok = ok and passed
    lines = [f"{r['kind']:<12} {r['name']:<24} {'pass' if r['passed'] else 'FAIL'}"
             + (f"  {r['violations'][0][0]}" if r["violations"] else "")
             for r in results]
    lines.append("all checks passed" if ok else "some checks FAILED")
    _emit(args, {"passed": ok, "results": results}, lines)
    return EXIT_OK if ok else EXIT_FAIL


def _write_certificate(args, cert, field):
    if not getattr(args, "certificate_out", None):
        return
    ws = Workspace(field)
    ws.certificates["certificate"] = cert
    dump_workspace(ws, args.certificate_out)


def cmd_compute(args):
    field = _field_from_flag(args.field)
    task = args.task
    try:
        if task == "braid-equiv":
            lhs = ks_complex(BraidWord.parse(args.n, args.lhs), field=field)
            rhs = ks_complex(BraidWord.parse(args.n, args.rhs), field=field)
            verdict = homotopy_equivalent(lhs, rhs, seed=args.seed, budget=args.budget)
            payload = {"verdict": verdict.kind, "reason": verdict.reason,
                       "lhs": args.lhs, "rhs": args.rhs, "n": args.n}
            lines = [f"verdict: {verdict.kind}"]
            if verdict.reason:
                lines.append(verdict.reason)
            if verdict.certificate is not None:
                payload["certificate_verified"] = verdict.certificate.verify()
                _write_certificate(args, verdict.certificate, field)
                if args.certificate_out:
                    lines.append(f"certificate written to {args.certificate_out}")
            _emit(args, payload, lines)
            return {"equivalent": EXIT_OK, "not_equivalent": EXIT_FAIL,
                    "unknown": EXIT_UNKNOWN}[verdict.kind]

        if task == "reduce":
            if args.input:
                ws = load_workspace(args.input)
                if args.name not in ws.twisted:
                    raise ParseError(f"no twisted complex named {args.name!r}")
                x = ws.twisted[args.name]
            else:
                x = ks_complex(BraidWord.parse(args.n, args.lhs), field=field)
            red, cert = gaussian_reduce(x)
            ok = cert.verify()
            out_ws = Workspace(field)
            out_ws.twisted["reduced"] = red
            payload = {"summands": [
                {"word": [{"gen": g.name, "shift": s} for g, s in w],
                 "dim": red.summand(t).dim}
                for t, w in enumerate(red.words)],
                "certificate_verified": ok}
            lines = [f"reduced to {red.n_summands} summands "
                     f"(dims {[red.summand(t).dim for t in range(red.n_summands)]})",
                     f"certificate verified: {ok}"]
            _write_certificate(args, cert, field)
            if args.out:
                dump_workspace(out_ws, args.out)
                lines.append(f"reduced complex written to {args.out}")
            _emit(args, payload, lines)
            return EXIT_OK if ok else EXIT_FAIL

        if task == "cohomology":
            ws = load_workspace(args.input)
            if args.name in ws.twisted:
                x = ws.twisted[args.name]
                dg = twisted_hom_complex(x, x).dg_space()
                label = f"End({args.name})"
            elif args.name in ws.bimodules:
                m = ws.bimodules[args.name]
                from .graded import DgSpace
                dg = DgSpace(m.space, m.diff)
                label = args.name
            else:
                raise ParseError(f"no complex or bimodule named {args.name!r}")
            dims = {}
            for nn in sorted(set(dg.space.degrees)):
                dims[nn] = cohomology(dg, nn)[0]
            payload = {"object": label, "cohomology": {str(k): v for k, v in dims.items()}}
            _emit(args, payload, [f"H^{k}({label}) has dimension {v}" for k, v in dims.items()])
            return EXIT_OK

        if task == "tensor":
            ws = load_workspace(args.input)
            from .bimodule import tensor_over_algebra
            m = ws.bimodules[args.left]
            n = ws.bimodules[args.right]
            t = tensor_over_algebra(m, n)
            out_ws = Workspace(field)
            out_ws.bimodules[args.name or "tensor"] = t
            rep = check_dg_bimodule(t)
            lines = [f"tensor has dimension {t.dim}; axiom check: {rep.passed}"]
            if args.out:
                dump_workspace(out_ws, args.out)
                lines.append(f"written to {args.out}")
            _emit(args, {"dim": t.dim, "passed": rep.passed}, lines)
            return EXIT_OK if rep.passed else EXIT_FAIL

        if task in ("internal-end", "internal-hom"):
            from .twocat import TwoCategoryCA, internal_end_algebra, internal_hom
            alg = _resolve_algebra(args.algebra, field)
            ca = TwoCategoryCA([alg])
            if args.module != "regular":
                raise ParseError("only the regular module is wired to the cli")
            x = ca.free_module(0)
            if task == "internal-end":
                A = internal_end_algebra(ca, 0, x)
                rep = A.check()
                payload = {"carrier_dim": A.carrier.dim,
                           "expected": alg.dim * alg.dim,
                           "passed": rep.passed}
                _emit(args, payload, [
                    f"internal end of the regular module over {alg.name}:",
                    f"  carrier dimension {A.carrier.dim} (= dim(A)^2 = {alg.dim ** 2})",
                    f"  algebra-1-morphism axioms: {rep.passed}"])
                return EXIT_OK if rep.passed else EXIT_FAIL
            ih = internal_hom(ca, 0, 0, x, x)
            payload = {"carrier_dim": ih.carrier.dim}
            _emit(args, payload, [f"[x, x] has dimension {ih.carrier.dim}"])
            return EXIT_OK

        if task == "morita":
            from .twocat import TwoCategoryCA, morita_verify
            from .zoo import matrix_morita_data
            if args.algebra not in (None, "matrix"):
                raise ParseError("morita task supports the matrix instance")
            degrees = [int(t) for t in (args.v_degrees or "0 -1").split()]
            sp = GradedSpace(field, [(f"v{i}", d) for i, d in enumerate(degrees)])
            diff = Matrix.zero(field, sp.dim, sp.dim)
            for pair in (args.v_diff or "").split():
                r, c = pair.split(":")
                diff.data[int(r)][int(c)] = field.one()
            k = trivial_algebra(field, "k")
            ca = TwoCategoryCA([k])
            A, one_alg, X, Y = matrix_morita_data(ca, 0, sp, diff)
            rep = morita_verify(A, one_alg, X, Y, seed=args.seed, budget=args.budget)
            payload = {"equivalent": rep.equivalent, "reason": rep.reason}
            _emit(args, payload, [f"Morita equivalent: {rep.equivalent}"
                                  + (f" ({rep.reason})" if rep.reason else "")])
            return EXIT_OK if rep.equivalent else EXIT_FAIL

        if task == "ideal-probe":
            from .twocat import RepData, quotient_simple_probe
            instance = args.instance or "ck"
            if instance == "ck":
                k = trivial_algebra(field, "k")
                rep = RepData("C_k natural", [left_regular(k)],
                              [], budget=args.budget)
            elif instance == "zi":
                from .zoo import tian_defining_rep
                rep = tian_defining_rep(field, budget=min(args.budget, 8))
            elif instance == "acyclic":
                D = dual_numbers(field, degree=-1, differential=True, name="D")
                rep = RepData("acyclic D", [left_regular(D)], [], budget=args.budget)
            else:
                raise ParseError(f"unknown ideal-probe instance {instance!r}")
            out = quotient_simple_probe(rep)
            kind = "ProperIdeal" if out.proper_found else "NoProperIdealFound"
            payload = {"outcome": kind, "detail": out.detail, "partial": out.partial}
            _emit(args, payload, [f"{kind}: {out.detail}"])
            if out.partial and not out.proper_found:
                return EXIT_UNKNOWN
            return EXIT_OK

        raise ParseError(f"unknown task {task!r}")
    except (ParseError, OSError) as e:
        print(f"parse error: {e}", file=sys.stderr)
        return EXIT_PARSE
    except StructuralError as e:
        print(f"verification failure: {e}", file=sys.stderr)
        return EXIT_FAIL


def cmd_list(args):
    try:
        ws = load_workspace(args.input)
    except (ParseError, OSError) as e:
        print(f"parse error: {e}", file=sys.stderr)
        return EXIT_PARSE
    for name, kind in ws.names():
        print(f"{kind:<12} {name}")
    return EXIT_OK


def cmd_export(args):
    try:
        ws = load_workspace(args.input)
    except (ParseError, OSError) as e:
        print(f"parse error: {e}", file=sys.stderr)
        return EXIT_PARSE
    out = Workspace(ws.field)
    name = args.name
    found = False
    for kind, store_in, store_out in (
            ("algebra", ws.algebras, out.algebras),
            ("bimodule", ws.bimodules, out.bimodules),
            ("twisted", ws.twisted, out.twisted),
            ("twisted_map", ws.morphisms, out.morphisms),
            ("certificate", ws.certificates, out.certificates)):
        if name in store_in:
            store_out[name] = store_in[name]
            found = True
    if not found:
        print(f"no object named {name!r}", file=sys.stderr)
        return EXIT_PARSE
    text = dump_workspace(out, args.out)
    if not args.out:
        print(text)
    return EXIT_OK


def build_parser():
    p = argparse.ArgumentParser(prog="dgcat",
                                description="exact computations with dg algebras, "
                                            "bimodules and twisted complexes")
    sub = p.add_subparsers(dest="command", required=True)

    pc = sub.add_parser("check", help="run axiom checkers over a workspace file")
    pc.add_argument("input")
    pc.add_argument("--json", action="store_true")
    pc.set_defaults(func=cmd_check)

    pp = sub.add_parser("compute", help="run a computation task")
    pp.add_argument("task", choices=["cohomology", "reduce", "braid-equiv",
                                     "internal-hom", "internal-end", "morita",
                                     "ideal-probe", "tensor"])
    pp.add_argument("--input")
    pp.add_argument("--name")
    pp.add_argument("--left")
    pp.add_argument("--right")
    pp.add_argument("--n", type=int, default=2)
    pp.add_argument("--lhs", default="")
    pp.add_argument("--rhs", default="")
    pp.add_argument("--algebra")
    pp.add_argument("--module", default="regular")
    pp.add_argument("--instance")
    pp.add_argument("--v-degrees", dest="v_degrees")
    pp.add_argument("--v-diff", dest="v_diff")
    pp.add_argument("--field", default="Q")
    pp.add_argument("--seed", type=int, default=0)
    pp.add_argument("--budget", type=int, default=64)
    pp.add_argument("--json", action="store_true")
    pp.add_argument("--certificate-out", dest="certificate_out")
    pp.add_argument("--out")
    pp.set_defaults(func=cmd_compute)

    pl = sub.add_parser("list", help="list the named objects in a workspace")
    pl.add_argument("--input", required=True)
    pl.set_defaults(func=cmd_list)

    pe = sub.add_parser("export", help="canonical serialization of one object")
    pe.add_argument("--input", required=True)
    pe.add_argument("--name", required=True)
    pe.add_argument("--out")
    pe.set_defaults(func=cmd_export)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
