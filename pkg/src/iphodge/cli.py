"""Command-line entry point.

Exit codes: 0 when every verdict passes (or is skipped with a reason),
1 on a verification failure, 2 on malformed input or invalid parameters.
Reports are JSON with sorted keys; every number is written as a decimal
string, so a rerun with the same arguments is byte-identical.  Wall-clock
timing is only added with --timing.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from fractions import Fraction

from . import __version__
from .complexes import ComplexError, cohomology, complex_from_json, complex_json, fmt_weight
from .linalg import matrix_json
from .rings import RingError, element_from_json, raw_from_json, raw_json, tower
from .suites import ConfigError, corpus_generate, run_suite

SCHEMA = "iphodge-report/1"


class InputError(ValueError):
    pass


# --- report plumbing ----------------------------------------------------------------

def _stringify(x):
    if isinstance(x, bool) or x is None or isinstance(x, str):
        return x
    if isinstance(x, (int, Fraction)):
        return str(x)
    if isinstance(x, float):
        raise TypeError("floating point value in a report")
    if isinstance(x, dict):
        return {str(k): _stringify(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_stringify(v) for v in x]
    return str(x)


def make_report(command, config, cases, extra=None):
    counts = {"pass": 0, "fail": 0, "skip": 0}
    for c in cases:
        counts[c["verdict"]] += 1
    rep = {"schema": SCHEMA, "tool": "iphodge", "version": __version__, "command": command,
           "config": config, "cases": cases,
           "summary": {"cases": len(cases), "passed": counts["pass"], "failed": counts["fail"],
                       "skipped": counts["skip"]},
           "ok": counts["fail"] == 0}
    if extra:
        rep.update(extra)
    return _stringify(rep)


def emit_report(report, path=None):
    text = json.dumps(report, sort_keys=True, indent=2, ensure_ascii=False) + "\n"
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    return text


def _case(name, ok, **extra):
    out = {"case": name, "verdict": "pass" if ok else "fail"}
    out.update(extra)
    return out


# --- argument helpers -------------------------------------------------------------------

def _read_complex(path):
    data = _read_json(path)
    try:
        return complex_from_json(data)
    except (ComplexError, RingError, ValueError, KeyError, TypeError) as e:
        raise InputError("malformed complex in %s: %s" % (path, e))


def _parse_elem(R, s):
    """An integer literal, or an element object {"unit_exp": .., "coeffs": [..]}."""
    try:
        if s.lstrip().startswith("{"):
            return raw_from_json(R, json.loads(s))
        return R.parse_scalar(s)
    except (ValueError, RingError, KeyError, TypeError) as e:
        raise InputError("cannot parse %r as an element of %s: %s" % (s, R.name(), e))


def _read_json(path):
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as e:
        raise InputError("cannot read %s: %s" % (path, e))


def _read_witt(path):
    from .witt import witt_from_json
    d = _read_json(path)
    try:
        if isinstance(d, dict) and "ring" not in d:
            d = dict(d, ring={"kind": "Integers"})
        return witt_from_json(d)
    except (RingError, ValueError, KeyError, TypeError) as e:
        raise InputError("malformed Witt vector in %s: %s" % (path, e))


def _trunc(s):
    try:
        n, M = (int(x) for x in s.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError("--trunc expects n,M (two integers)")
    if n < 1 or M < 1:
        raise argparse.ArgumentTypeError("--trunc exponents must be >= 1")
    return (n, M)


def _positive(s):
    v = int(s)
    if v < 0:
        raise argparse.ArgumentTypeError("expected a non-negative integer")
    return v


def _prime(s):
    p = int(s)
    if p not in (2, 3, 5, 7, 11, 13):
        raise argparse.ArgumentTypeError("p must be a small prime")
    return p


# --- commands ----------------------------------------------------------------------------

def cmd_eta(a):
    from .decalage import eta_nat
    C = _read_complex(a.input)
    f = _parse_elem(C.ring, a.f)
    phi, rep = eta_nat(C, f)
    L = phi.source
    inc = {str(n): matrix_json(phi.comp(n)) for n in L.degrees()}
    return [_case("eta", rep["inverts_f"], certificate=rep)], {"complex": complex_json(L), "inclusion": inc}


def cmd_bockstein(a):
    from .decalage import bockstein, bockstein_squared_zero
    C = _read_complex(a.input)
    f = _parse_elem(C.ring, a.f)
    B = bockstein(C, f)
    R = C.ring
    groups = []
    for n in C.degrees():
        groups.append({"degree": n, "divisors": [R.to_str(R.normalize(h)) for h in B.divisors(n)],
                       "bockstein": matrix_json(B.matrix(n)) if n < C.hi else None})
    return [_case("bockstein-squared-zero", bockstein_squared_zero(B))], {"groups": groups}


def cmd_eta_check(a):
    from .decalage import eta_bockstein_compare, eta_identities
    C = _read_complex(a.input)
    f = _parse_elem(C.ring, a.f)
    cases = [_case("bockstein-comparison", eta_bockstein_compare(C, f).ok)]
    if a.g is not None:
        g = _parse_elem(C.ring, a.g)
        rep = eta_identities(C, f, g)
        cases.append(_case("multiplicativity", rep["multiplicativity"]["ok"]))
        bc = rep["base_change"]
        if bc.get("ok") is None:
            cases.append({"case": "base-change", "verdict": "skip", "reason": bc["skipped"]})
        else:
            cases.append(_case("base-change", bc["ok"], witness=bc["witness"]))
    for c in cases:
        if c["verdict"] == "fail":
            c["complex"] = complex_json(C)
    return cases, None


def cmd_cohomology(a):
    C = _read_complex(a.input)
    return [], {"cohomology": cohomology(C).to_json()}


WITT_OPS = {"add": 2, "mul": 2, "F": 1, "V": 1, "R": 1, "teich": 1, "ghost": 1, "identities": 0}


def cmd_witt(a):
    from . import witt as W
    from .suites import suite_witt
    if a.op == "identities":
        return suite_witt(a.seed, a.cases, [a.p], [a.r]), None
    if len(a.inputs) != WITT_OPS[a.op]:
        raise InputError("witt %s takes %d input file(s)" % (a.op, WITT_OPS[a.op]))
    if a.op == "teich":
        d = _read_json(a.inputs[0])
        try:
            x = element_from_json(d)
        except (RingError, ValueError, KeyError, TypeError) as e:
            raise InputError("malformed element: %s" % e)
        return [], {"result": W.teichmuller(x, a.p, a.r).to_json()}
    vs = [_read_witt(f) for f in a.inputs]
    if a.op == "ghost":
        R = vs[0].ring
        return [], {"ghost": [raw_json(R, g.v) for g in W.ghost(vs[0])]}
    fn = {"add": W.witt_add, "mul": W.witt_mul, "F": W.frobenius_W, "V": W.verschiebung,
          "R": W.restriction}[a.op]
    return [], {"result": fn(*vs).to_json()}


def _blocks_json(C):
    return [{"weight": fmt_weight(w), "complex": complex_json(b)} for w, b in C]


def cmd_build_qdr(a):
    from .qtorus import qdr_build, qdr_tensor_check
    C = qdr_build(a.d, a.B, tower(a.base, a.p, 0))
    bad = qdr_tensor_check(C)
    return [_case("tensor-structure", not bad, mismatches=bad)], {"blocks": _blocks_json(C)}


def cmd_build_koszul(a):
    from .qtorus import koszul_build
    K = koszul_build(a.d, a.k, a.B, a.p, a.mode)
    return [], {"blocks": _blocks_json(K)}


def cmd_compare(a):
    from .qtorus import compare_eta_qdr, koszul_build
    K = koszul_build(a.d, a.k, a.B, a.p, a.mode)
    ok, items = compare_eta_qdr(K, a.trunc)
    return [_case("w=" + it["weight"], it["ok"], **{k: v for k, v in it.items() if k not in ("ok", "weight")})
            for it in items], None


def cmd_bk_check(a):
    from .qtorus import breuil_kisin_check, qdr_build
    C = qdr_build(1, a.B, tower(a.base, a.p, 0))
    ok, items = breuil_kisin_check(C, a.i, a.trunc)
    return [_case("i=%d" % a.i, ok, blocks=items)], None


def cmd_specialize(a):
    from .qtorus import koszul_build, qdr_build, specialize
    if a.mode == "q_to_1":
        rep = specialize(qdr_build(a.d, a.B, tower(a.base, a.p, 0)), "q_to_1")
        S = rep["complex"]
        return [_case("q_to_1", rep["ok"], mismatches=rep["mismatches"])], {"blocks": _blocks_json(S)}
    rep = specialize(koszul_build(a.d, a.k, a.B, a.p, "Z" if a.base == "Z" else "F"), "invert_mu")
    return [_case("w=" + it["weight"], it["ok"], bound=it["bound"], divisors=it["divisors"])
            for it in rep["blocks"]], None


def _fv_setup(a):
    from .fvproc import TorusDga, weight_sample
    if a.k is not None and a.k < a.r:
        raise ConfigError("level k=%d is below r=%d" % (a.k, a.r))
    D = TorusDga(a.d, a.B, a.p, a.r if a.k is None else a.k)
    ws = D.weights() if a.full_band else weight_sample(D, seed=a.seed)
    return D, ws


def cmd_fv_build(a):
    from .fvproc import FVFamily
    D, ws = _fv_setup(a)
    fam = FVFamily(D, a.r, a.process)
    cells = []
    for r in range(1, a.r + 1):
        for w in ws:
            s = fam.summary(w, r)
            c = fam.cell(w, r)
            s["bockstein"] = []
            from .decalage import bockstein
            B = bockstein(c.lat, c.xi_r)
            for n in c.degrees():
                if n < c.block.hi:
                    s["bockstein"].append({"degree": n, "matrix": matrix_json(B.matrix(n))})
            cells.append(s)
    return [], {"process": a.process, "cells": cells}


def cmd_fv_axioms(a):
    from .fvproc import axioms_check, first_process, improved_process
    D, ws = _fv_setup(a)
    fam = (improved_process if a.process == "improved" else first_process)(D, a.r)
    rep = axioms_check(fam, ws, seed=a.seed).to_json()
    cases = []
    for name, it in rep["axioms"].items():
        if it["checked"] == 0:
            cases.append({"case": name, "verdict": "skip", "reason": it.get("skip_reason", "not applicable")})
        else:
            cases.append(_case(name, it["pass"], checked=it["checked"], counterexample=it["counterexample"]))
    return cases, {"weights": str(len(ws))}


def cmd_fv_rewrite(a):
    from .fvproc import rewrite_as_eta
    D, ws = _fv_setup(a)
    ok, items = rewrite_as_eta(D, a.r, ws)
    return [_case("w=" + it["weight"], it["ok"], **{k: v for k, v in it.items() if k not in ("ok", "weight")})
            for it in items], None


def cmd_fv_compare(a):
    from .fvproc import compare_pre_improved
    D, ws = _fv_setup(a)
    ok, items = compare_pre_improved(D, a.r, a.trunc, ws)
    return [_case("w=" + it["weight"], it["ok"], degrees=it["degrees"]) for it in items], None


def cmd_verify_suite(a):
    return run_suite(a.suite, a), None


def cmd_corpus(a):
    params = {"cases": a.cases, "p": a.p, "a_max": a.a_max, "d": a.d, "k": a.k, "B": a.B}
    cs = corpus_generate(a.kind, params, a.seed)
    return [], {"complexes": [complex_json(C) for C in cs]}


SUITE_NAMES = ["eta-bockstein", "eta-identities", "witt", "distinguished", "torus", "q-to-1",
               "invert-mu", "breuil-kisin", "fv-axioms", "fv-rewrite", "fitting", "all"]


def build_parser():
    ap = argparse.ArgumentParser(prog="iphodge", description="Exact desk-scale integral p-adic Hodge toolkit.")
    ap.add_argument("--version", action="version", version="iphodge " + __version__)
    sub = ap.add_subparsers(dest="command", required=True)

    def add(name, fn, help_):
        p = sub.add_parser(name, help=help_)
        p.set_defaults(fn=fn)
        p.add_argument("--output", "-o", default=None, help="report path (default: stdout)")
        p.add_argument("--timing", action="store_true", help="add wall-clock timing (breaks byte-reproducibility)")
        p.add_argument("--seed", type=int, default=0)
        return p

    for name, fn, h in [("eta", cmd_eta, "L eta_f of a complex"),
                        ("bockstein", cmd_bockstein, "Bockstein complex of N/f"),
                        ("eta-check", cmd_eta_check, "Bockstein comparison and eta identities"),
                        ("cohomology", cmd_cohomology, "cohomology of a complex")]:
        p = add(name, fn, h)
        p.add_argument("input", help="complex JSON file")
        if name != "cohomology":
            p.add_argument("--f", required=True)
        if name == "eta-check":
            p.add_argument("--g", default=None)

    p = add("witt", cmd_witt, "Witt vector arithmetic and identity engine")
    p.add_argument("op", choices=sorted(WITT_OPS))
    p.add_argument("inputs", nargs="*", help="vector JSON files {\"p\", \"components\"}")
    p.add_argument("--p", type=_prime, default=2)
    p.add_argument("--r", type=_positive, default=3)
    p.add_argument("--cases", type=_positive, default=100)

    def torus_args(p, k=True, mode=False, base=False, trunc=False):
        p.add_argument("--d", type=_positive, default=1)
        p.add_argument("--p", type=_prime, default=2)
        p.add_argument("--B", type=_positive, default=2)
        if k:
            p.add_argument("--k", type=_positive, default=1)
        if mode:
            p.add_argument("--mode", choices=["F", "Z"], default="F")
        if base:
            p.add_argument("--base", choices=["F", "Z"], default="F")
        if trunc:
            p.add_argument("--trunc", type=_trunc, default=(1, 8), help="junk truncation n,M")

    torus_args(add("build-qdr", cmd_build_qdr, "q-de Rham complex of the torus"), k=False, base=True)
    torus_args(add("build-koszul", cmd_build_koszul, "Koszul model of the torus"), mode=True)
    torus_args(add("compare", cmd_compare, "L eta_mu(Koszul) vs q-de Rham"), mode=True, trunc=True)
    p = add("bk-check", cmd_bk_check, "Breuil-Kisin check on the d=1 q-de Rham complex")
    p.add_argument("--p", type=_prime, default=2)
    p.add_argument("--B", type=_positive, default=4)
    p.add_argument("--i", type=int, choices=[0, 1], default=1)
    p.add_argument("--base", choices=["F", "Z"], default="F")
    p.add_argument("--trunc", type=_trunc, default=(1, 8))
    p = add("specialize", cmd_specialize, "invert mu or set q = 1")
    torus_args(p, base=True)
    p.add_argument("--mode", choices=["invert_mu", "q_to_1"], required=True)

    for name, fn, h in [("fv-build", cmd_fv_build, "build an F-V-procomplex family"),
                        ("fv-axioms", cmd_fv_axioms, "check the F-V-procomplex axioms"),
                        ("fv-rewrite", cmd_fv_rewrite, "W_r ~ L eta_mu D / xi_r certificate"),
                        ("fv-compare", cmd_fv_compare, "improved vs pre kernels and cokernels")]:
        p = add(name, fn, h)
        torus_args(p, k=False, trunc=(name == "fv-compare"))
        p.add_argument("--r", type=_positive, default=1)
        p.add_argument("--k", type=_positive, default=None, help="model level (default r)")
        p.add_argument("--full-band", action="store_true", help="use every weight of the band")
        if name in ("fv-build", "fv-axioms"):
            p.add_argument("--process", choices=["pre", "improved"], default="improved")

    p = add("verify-suite", cmd_verify_suite, "run a bundled verification suite")
    p.add_argument("suite", choices=SUITE_NAMES)
    p.add_argument("--cases", type=_positive, default=100)
    p.add_argument("--trunc", type=_trunc, default=(1, 8))

    p = add("corpus", cmd_corpus, "generate a random corpus of complexes")
    p.add_argument("kind", choices=["random-free-Z", "two-term-p-power", "koszul-grid"])
    p.add_argument("--cases", type=_positive, default=100)
    p.add_argument("--p", type=_prime, default=2)
    p.add_argument("--a-max", type=_positive, default=6)
    p.add_argument("--d", type=_positive, default=1)
    p.add_argument("--k", type=_positive, default=1)
    p.add_argument("--B", type=_positive, default=1)
    return ap


def _config(a):
    skip = {"fn", "output", "timing"}
    return {k: (list(v) if isinstance(v, tuple) else v) for k, v in sorted(vars(a).items()) if k not in skip}


def main(argv=None):
    ap = build_parser()
    try:
        a = ap.parse_args(argv)
    except SystemExit as e:
        return 2 if e.code not in (0, None) else 0
    t0 = time.perf_counter()
    try:
        cases, extra = a.fn(a)
    except (InputError, ConfigError, ComplexError, RingError, ValueError) as e:
        sys.stderr.write("iphodge: error: %s\n" % e)
        return 2
    extra = dict(extra or {})
    if a.timing:
        extra["timing"] = {"seconds": "%.3f" % (time.perf_counter() - t0)}
    rep = make_report(a.command, _config(a), cases, extra)
    try:
        emit_report(rep, a.output)
    except OSError as e:
        sys.stderr.write("iphodge: error: cannot write report: %s\n" % e)
        return 2
    return 0 if rep["ok"] else 1


if __name__ == "__main__":
    sys.exit(main())
