"""Command-line interface.

Exit codes: 0 success or affirmative answer, 1 negative answer or failed
verification, 2 invalid input, 3 resource cap exceeded. Every command
prints a JSON report (``--json``) or a short summary, with timings.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from fractions import Fraction

from . import zmgroup
from .arithz import (
    GroupZ,
    HElement,
    index_z,
    intersect_z,
    is_member_z,
    is_normal_z,
    is_subnormal_z,
    level_z,
    lift_det_one_info,
    max_pcs_z,
    normal_closure_z,
    normal_subgroups_z,
)
from .congzm import (
    is_normal_zm,
    is_subnormal_zm,
    level_zm,
    max_pcs_zm,
    normal_subgroups_zm,
)
from .exactmat import (
    DeterminantError,
    IntMat,
    ResMat,
    format_factored,
    load_json,
    matrices_from_json,
    matrices_to_json,
    vector_from_json,
)
from .orbitstab import orbit_h, stabilizer_h
from .rationalize import IntegralityError, RatMat, conjugate_into_slnz
from .words import Word
from .zmgroup import GroupZm, ResourceLimitError, index_in_sl, membership

EXIT_OK, EXIT_NO, EXIT_INPUT, EXIT_CAP = 0, 1, 2, 3


class InputError(ValueError):
    pass


# -- loading --------------------------------------------------------------------


def _load_matrices(path):
    try:
        return matrices_from_json(load_json(path))
    except (OSError, KeyError, TypeError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read matrices from {path}: {exc}") from exc


def _integral(rows):
    if any(isinstance(x, Fraction) and x.denominator != 1 for r in rows for x in r):
        raise InputError("expected integer entries")
    return [[int(x) for x in r] for r in rows]


def load_group(path, mod=None):
    """A GroupZ (file mod null) or a GroupZm (file mod set)."""
    n, file_mod, mats = _load_matrices(path)
    if not mats:
        raise InputError("group file has no generators")
    if file_mod is not None:
        if mod is not None and mod != file_mod:
            raise InputError(f"--mod {mod} disagrees with the file modulus {file_mod}")
        return GroupZm(n, file_mod, [ResMat.from_rows(_integral(r), file_mod) for r in mats])
    return GroupZ(n, [IntMat.from_rows(_integral(r)) for r in mats], mod, label=path)


def load_vector(path):
    try:
        return vector_from_json(load_json(path))[0]
    except (OSError, KeyError, TypeError, ValueError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read a vector from {path}: {exc}") from exc


def _need_level(G):
    if isinstance(G, GroupZ) and G.certified_level is None:
        raise InputError("this command needs --mod (a certified level) for integer groups")


def _rows(x):
    return [[str(a) for a in r] for r in x.rows()]


def _group_json(G):
    if isinstance(G, GroupZ):
        return {**matrices_to_json(G.generators), "level": G.certified_level}
    return matrices_to_json(G.generators, G.m)


# -- commands ---------------------------------------------------------------------


def cmd_level(args):
    G = load_group(args.group, args.mod)
    if isinstance(G, GroupZ):
        return EXIT_OK, {"level": str(level_z(G))}
    return EXIT_OK, {"level": str(level_zm(G)), "mod": G.m}


def cmd_index(args):
    G = load_group(args.group, args.mod)
    _need_level(G)
    value = index_z(G) if isinstance(G, GroupZ) else index_in_sl(G)
    return EXIT_OK, {"index": str(value), "factored": format_factored(value)}


def cmd_member(args):
    G = load_group(args.group, args.mod)
    _need_level(G)
    n, _, mats = _load_matrices(args.x)
    x_rows = _integral(mats[0])
    if isinstance(G, GroupZm):
        w = membership(G, ResMat.from_rows(x_rows, G.m))
        if w is None:
            return EXIT_NO, {"member": False}
        return EXIT_OK, {"member": True, "word_length": _length(w),
                         "word": w.to_slp(), "letters": _letters(w),
                         "certificate": {"kind": "member-zm", "group": _group_json(G),
                                         "x": _rows(ResMat.from_rows(x_rows, G.m)),
                                         "word": w.to_slp()}}
    x = IntMat.from_rows(x_rows)
    elem = is_member_z(G, x)
    if elem is None:
        return EXIT_NO, {"member": False}
    return EXIT_OK, {"member": True, "word_length": _length(elem.word),
                     "word": elem.word.to_slp(), "letters": _letters(elem.word),
                     "certificate": {"kind": "member", "group": _group_json(G),
                                     "x": _rows(x), "element": elem.to_json()}}


def _length(word):
    letters = _letters(word)
    return sum(abs(e) for _, e in letters) if letters is not None else None


def _letters(word, cap=2000):
    try:
        return word.letters(cap)
    except ValueError:
        return None


def cmd_max_pcs(args):
    G = load_group(args.group, args.mod)
    _need_level(G)
    if isinstance(G, GroupZ):
        r, _ = max_pcs_z(G)
        return EXIT_OK, {"level": str(r)}
    d = max_pcs_zm(G)
    return EXIT_OK, {"level": str(d.level), "mod": G.m, "descriptor": d.to_json()}


def cmd_subnormal(args):
    G = load_group(args.group, args.mod)
    _need_level(G)
    cert = is_subnormal_z(G) if isinstance(G, GroupZ) else is_subnormal_zm(G)
    return (EXIT_OK if cert.subnormal else EXIT_NO), {
        "subnormal": cert.subnormal, "e_prime": cert.e_prime,
        "defect_bound": cert.defect_bound, "certificate": cert.to_json()}


def cmd_normal(args):
    G = load_group(args.group, args.mod)
    _need_level(G)
    ok = is_normal_z(G) if isinstance(G, GroupZ) else is_normal_zm(G)
    return (EXIT_OK if ok else EXIT_NO), {"normal": ok}


def cmd_normal_closure(args):
    G = load_group(args.group, args.mod)
    if isinstance(G, GroupZm):
        raise InputError("normal-closure works on integer generators")
    res = normal_closure_z(G.n, G.generators)
    return EXIT_OK, {"level": str(res.level), "scalar": res.scalar,
                     "group": _group_json(res.group)}


def cmd_normal_subgroups(args):
    G = load_group(args.group, args.mod)
    _need_level(G)
    if args.level is None:
        raise InputError("normal-subgroups needs --level")
    if isinstance(G, GroupZ):
        found = normal_subgroups_z(G, args.level)
        out = [{"level": str(s.level), "scalars": [str(a) for a in s.scalars],
                "group": _group_json(s.group)} for s in found]
    else:
        found = normal_subgroups_zm(G, args.level)
        out = [{"level": str(s.level), "scalars": [str(a) for a in s.scalars],
                "generators": matrices_to_json(s.generators, G.m)} for s in found]
    return EXIT_OK, {"count": len(out), "subgroups": out}


def cmd_intersect(args):
    G1 = load_group(args.group, args.mod)
    G2 = load_group(args.group2, args.mod2 if args.mod2 is not None else args.mod)
    if not (isinstance(G1, GroupZ) and isinstance(G2, GroupZ)):
        raise InputError("intersect works on integer groups")
    _need_level(G1)
    _need_level(G2)
    res = intersect_z(G1, G2)
    return EXIT_OK, {"level": str(res.certified_level), "group": _group_json(res),
                     "index": str(index_z(res))}


def _int_group(args):
    G = load_group(args.group, args.mod)
    if not isinstance(G, GroupZ):
        raise InputError("orbit and stabilizer work on integer groups")
    _need_level(G)
    return G


def cmd_orbit(args):
    G = _int_group(args)
    u, v = load_vector(args.u), load_vector(args.v)
    ans = orbit_h(u, v, G)
    if not ans.found:
        return EXIT_NO, {"found": False}
    cert = {"kind": "orbit", "group": _group_json(G), "u": [str(a) for a in u],
            "v": [str(a) for a in v], "matrix": _rows(ans.matrix), "element": ans.word.to_json()}
    return EXIT_OK, {"found": True, "matrix": _rows(ans.matrix),
                     "verified": ans.matrix.act(u) == v and ans.word.verify(ans.matrix),
                     "certificate": cert}


def cmd_stabilizer(args):
    G = _int_group(args)
    u = load_vector(args.u)
    st = stabilizer_h(u, G)
    gens = [{"matrix": _rows(x), "element": e.to_json()} for x, e in st]
    ok = all(x.act(u) == u and e.verify(x) for x, e in st)
    return EXIT_OK, {"count": len(gens), "verified": ok,
                     "certificate": {"kind": "stabilizer", "group": _group_json(G),
                                     "u": [str(a) for a in u], "generators": gens}}


def cmd_lift(args):
    n, file_mod, mats = _load_matrices(args.x)
    m = file_mod if file_mod is not None else args.mod
    if m is None:
        raise InputError("lift needs a modulus (file or --mod)")
    out = []
    for rows in mats:
        b = ResMat.from_rows(_integral(rows), m)
        info = lift_det_one_info(b)
        out.append({"matrix": _rows(info.matrix), "strategy": info.strategy,
                    "steps": info.steps, "max_abs": str(info.max_abs)})
    return EXIT_OK, {"mod": m, "lifts": out,
                     "certificate": {"kind": "lift", "mod": m,
                                     "inputs": [[[str(a) for a in r] for r in rows] for rows in mats],
                                     "lifts": [o["matrix"] for o in out]}}


def cmd_conjugate(args):
    _, _, mats = _load_matrices(args.group)
    S = [RatMat.from_rows(r) for r in mats]
    g, conj = conjugate_into_slnz(S, max_rounds=args.max_rounds)
    rat = [[str(a) for a in r] for r in g.rows()]
    return EXIT_OK, {"g": rat, "conjugates": [_rows(c) for c in conj],
                     "certificate": {"kind": "conjugate", "g": rat,
                                     "inputs": [[[str(a) for a in r] for r in rows] for rows in mats],
                                     "conjugates": [_rows(c) for c in conj]}}


def cmd_selftest(args):
    from .selftest import run_selftest

    report = run_selftest(corrupt=args.corrupt)
    return (EXIT_OK if report["passed"] else EXIT_NO), report


def cmd_verify(args):
    data = load_json(args.report)
    cert = data.get("certificate", data)
    checks = verify_certificate(cert)
    ok = all(c["ok"] for c in checks)
    return (EXIT_OK if ok else EXIT_NO), {"verified": ok, "checks": checks}


# -- independent certificate checks ---------------------------------------------------


def _mat(rows):
    return IntMat.from_rows([[int(a) for a in r] for r in rows])


def _element_from_json(data, gens):
    level = int(data["level"])
    segs = []
    for seg in data["segments"]:
        if "word" in seg:
            segs.append(("word", Word.from_slp(seg["word"])))
        else:
            segs.append(("pcs", _mat(seg["pcs"])))
    return HElement(segs, level, gens)


def _group_gens(data):
    _, _, mats = matrices_from_json(data)
    return [IntMat.from_rows(_integral(r)) for r in mats]


def verify_certificate(cert):
    """Re-check a certificate with plain matrix arithmetic (no chains or caches)."""
    kind = cert.get("kind")
    checks = []

    def check(name, ok):
        checks.append({"check": name, "ok": bool(ok)})

    if kind == "member":
        gens = _group_gens(cert["group"])
        elem = _element_from_json(cert["element"], gens)
        check("Gamma_m factors certified", elem.pcs_certified())
        check("product equals x", elem.matrix() == _mat(cert["x"]))
    elif kind == "member-zm":
        n, m, mats = matrices_from_json(cert["group"])
        gens = [ResMat.from_rows(_integral(r), m) for r in mats]
        G = GroupZm(n, m, gens)
        w = Word.from_slp(cert["word"])
        check("word evaluates to x", G.evaluate(w) == ResMat.from_rows(
            [[int(a) for a in r] for r in cert["x"]], m))
    elif kind == "orbit":
        gens = _group_gens(cert["group"])
        elem = _element_from_json(cert["element"], gens)
        mat = _mat(cert["matrix"])
        u = tuple(int(a) for a in cert["u"])
        v = tuple(int(a) for a in cert["v"])
        check("Gamma_m factors certified", elem.pcs_certified())
        check("product equals witness", elem.matrix() == mat)
        check("witness maps u to v", mat.act(u) == v)
    elif kind == "stabilizer":
        gens = _group_gens(cert["group"])
        u = tuple(int(a) for a in cert["u"])
        for k, item in enumerate(cert["generators"]):
            elem = _element_from_json(item["element"], gens)
            mat = _mat(item["matrix"])
            check(f"generator {k} certified", elem.pcs_certified() and elem.matrix() == mat)
            check(f"generator {k} fixes u", mat.act(u) == u)
    elif kind == "lift":
        m = int(cert["mod"])
        for k, (src, dst) in enumerate(zip(cert["inputs"], cert["lifts"])):
            x = _mat(dst)
            check(f"lift {k} has det 1", x.det() == 1)
            check(f"lift {k} reduces correctly",
                  x.reduce(m) == ResMat.from_rows([[int(a) for a in r] for r in src], m))
    elif kind == "conjugate":
        g = RatMat.from_rows([[Fraction(a) for a in r] for r in cert["g"]])
        gi = g.inverse()
        for k, (src, dst) in enumerate(zip(cert["inputs"], cert["conjugates"])):
            s = RatMat.from_rows([[Fraction(a) for a in r] for r in src])
            c = _mat(dst)
            check(f"conjugate {k} matches", gi @ s @ g == RatMat.of(c))
            check(f"conjugate {k} has det 1", c.det() == 1)
    else:
        raise InputError(f"unknown certificate kind {kind!r}")
    return checks


# -- entry point ----------------------------------------------------------------------


COMMANDS = {
    "level": cmd_level,
    "index": cmd_index,
    "member": cmd_member,
    "max-pcs": cmd_max_pcs,
    "subnormal": cmd_subnormal,
    "normal": cmd_normal,
    "normal-closure": cmd_normal_closure,
    "normal-subgroups": cmd_normal_subgroups,
    "intersect": cmd_intersect,
    "orbit": cmd_orbit,
    "stabilizer": cmd_stabilizer,
    "lift": cmd_lift,
    "conjugate": cmd_conjugate,
    "selftest": cmd_selftest,
    "verify": cmd_verify,
}


def build_parser():
    p = argparse.ArgumentParser(prog="arithgroup", description=__doc__.splitlines()[0])
    p.add_argument("verb", choices=sorted(COMMANDS))
    p.add_argument("--group", help="generator file")
    p.add_argument("--group2", help="second generator file (intersect)")
    p.add_argument("--mod", type=int, help="certified level m with Gamma_{n,m} <= H")
    p.add_argument("--mod2", type=int, help="certified level of --group2")
    p.add_argument("--level", type=int, help="level l (normal-subgroups)")
    p.add_argument("--x", help="matrix file (member, lift)")
    p.add_argument("--u", help="vector file")
    p.add_argument("--v", help="vector file (orbit)")
    p.add_argument("--report", help="report file to check (verify)")
    p.add_argument("--max-rounds", type=int, help="lattice closure rounds (conjugate)")
    p.add_argument("--corrupt", help="selftest: perturb the named suite's expected values")
    p.add_argument("--cap-orbit", type=int, help="orbit point budget")
    p.add_argument("--cap-enum", type=int, help="element enumeration budget")
    p.add_argument("--cache-dir", help="directory for cached stabilizer chains")
    p.add_argument("--no-cache", action="store_true", help="ignore the chain cache")
    p.add_argument("--json", action="store_true", help="print the full JSON report")
    return p


_REQUIRED = {
    "level": ["group"], "index": ["group"], "member": ["group", "x"], "max-pcs": ["group"],
    "subnormal": ["group"], "normal": ["group"], "normal-closure": ["group"],
    "normal-subgroups": ["group"], "intersect": ["group", "group2"],
    "orbit": ["group", "u", "v"], "stabilizer": ["group", "u"], "lift": ["x"],
    "conjugate": ["group"], "selftest": [], "verify": ["report"],
}


def _configure(args):
    if args.cap_orbit is not None:
        zmgroup.LIMITS.orbit_cap = args.cap_orbit
    if args.cap_enum is not None:
        zmgroup.LIMITS.enum_cap = args.cap_enum
    if args.no_cache:
        zmgroup._CACHE_DIR = None
    elif args.cache_dir:
        zmgroup._CACHE_DIR = args.cache_dir


def run(argv=None):
    """Run one command; returns (exit code, report)."""
    args = build_parser().parse_args(argv)
    missing = [f"--{k}" for k in _REQUIRED[args.verb] if getattr(args, k) is None]
    t0 = time.perf_counter()
    try:
        if missing:
            raise InputError(f"{args.verb} needs {' '.join(missing)}")
        _configure(args)
        code, report = COMMANDS[args.verb](args)
    except ResourceLimitError as exc:
        code, report = EXIT_CAP, {"error": str(exc), "what": exc.what,
                                   "size": exc.size, "cap": exc.cap}
    except IntegralityError as exc:
        code, report = EXIT_NO, {"error": str(exc)}
    except (InputError, DeterminantError, ValueError) as exc:
        code, report = EXIT_INPUT, {"error": str(exc)}
    report = {"verb": args.verb, "exit": code, **report,
              "seconds": round(time.perf_counter() - t0, 6)}
    return code, report, args


def _summary(report):
    skip = {"certificate", "group", "subgroups", "checks", "suites", "word", "letters",
            "lifts", "conjugates"}
    parts = [f"{k}={v}" for k, v in report.items() if k not in skip]
    lines = [" ".join(parts)]
    for suite in report.get("suites", []):
        lines.append(f"  {'PASS' if suite['ok'] else 'FAIL'} {suite['name']} "
                     f"({suite['passed']}/{suite['total']}, {suite['seconds']:.2f}s)"
                     + (f": {suite['detail']}" if suite.get("detail") else ""))
    return "\n".join(lines)


def main(argv=None):
    code, report, args = run(argv)
    if args.json:
        print(json.dumps(report, indent=1))
    else:
        print(_summary(report))
    return code


if __name__ == "__main__":
    sys.exit(main())
