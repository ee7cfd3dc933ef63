"""``dimq`` command line.

Every subcommand writes one JSON report (stdout, or ``--out``).  Exit codes:
0 all checks passed, 1 a verification failed, 2 usage or input error,
3 a resource budget ran out (the report says where).

Defaults for budgets can come from a ``key = value`` file given with
``--config``; explicit flags win over the file, the file wins over built-in
defaults.  Reports carry a header with the tool version, the SHA-256 of the
bundled fixtures and every parameter that can change the result.  The thread
count is deliberately left out of the header: results do not depend on it.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import os
import re
import sys
from importlib.resources import files

from . import __version__
from .core import (GeneratorId, GroupPresentation, ParseError, format_expr, parse_presentation,
                   parse_word, paper_fixture)

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_BUDGET = 0, 1, 2, 3

FIXTURES = ("G.pres", "Gbar.pres", "w.word", "wz.word")

DEFAULTS = {
    "seconds": 600.0,
    "memory_mb": 4096,
    "max_generators": 20000,
    "max_tails": 100000,
    "max_monomials": 20000,
    "max_rows": 500000,
    "threads": 1,
    "paper_class": 7,
    "paper_delta_n": 4,
}
_INT_KEYS = {k for k, v in DEFAULTS.items() if isinstance(v, int)}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def fixture_hashes() -> dict[str, str]:
    data = files("dimq").joinpath("data")
    return {name: hashlib.sha256(data.joinpath(name).read_bytes()).hexdigest() for name in FIXTURES}


def read_config(path: str) -> dict:
    """Parse a ``key = value`` file; ``#`` starts a comment."""
    out = {}
    try:
        text = open(path, encoding="utf-8").read()
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from None
    for n, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{n}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in DEFAULTS:
            raise UsageError(f"{path}:{n}: unknown key {key!r}")
        try:
            out[key] = int(value) if key in _INT_KEYS else float(value)
        except ValueError:
            raise UsageError(f"{path}:{n}: bad value {value!r}") from None
    return out


def _settings(args) -> dict:
    settings = dict(DEFAULTS)
    if args.config:
        settings.update(read_config(args.config))
    for key in DEFAULTS:
        v = getattr(args, key, None)
        if v is not None:
            settings[key] = v
    for key in ("seconds", "memory_mb", "max_generators", "max_tails", "max_monomials", "max_rows", "threads"):
        if settings[key] <= 0:
            raise UsageError(f"{key} must be positive")
    return settings


def _read_text(path: str) -> str:
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None


def _load_pres(path: str) -> GroupPresentation:
    try:
        return parse_presentation(_read_text(path))
    except ParseError as exc:
        raise UsageError(f"{path}: {exc}") from None


def _word_text(arg: str) -> str:
    return _read_text(arg).strip() if os.path.isfile(arg) else arg


def _load_word(arg: str, alphabet):
    try:
        return parse_word(_word_text(arg), alphabet)
    except ParseError as exc:
        raise UsageError(f"word {arg!r}: {exc}") from None


def _budgets(settings):
    from .augquot import AugBudget
    from .nq import NqBudget
    return (NqBudget(settings["seconds"], settings["max_generators"], settings["max_tails"]),
            AugBudget(settings["max_monomials"], settings["max_rows"]))


def _budget_params(settings) -> dict:
    return {k: settings[k] for k in ("seconds", "memory_mb", "max_generators", "max_tails",
                                     "max_monomials", "max_rows")}


# -- subcommands ----------------------------------------------------------------


def cmd_lie_check(args, settings):
    from .lie import weight3_check
    rep = weight3_check()
    return rep.to_json(), (EXIT_OK if rep.passed else EXIT_FAIL), {}


def cmd_replay(args, settings):
    from .magnus import replay_section1
    rep = replay_section1()
    body = rep.to_json()
    body["summary"] = f"{sum(rep.checks.values())}/{len(rep.checks)} checks pass"
    return body, (EXIT_OK if rep.passed else EXIT_FAIL), {}


def cmd_magnus(args, settings):
    from .magnus import lowest_degree, magnus_embed
    text = _word_text(args.word)
    if args.pres:
        alphabet = _load_pres(args.pres).alphabet
    else:
        names = []
        for name in re.findall(r"[A-Za-z_][A-Za-z0-9_']*", text):
            if name not in names:
                names.append(name)
        alphabet = tuple(GeneratorId(i, n) for i, n in enumerate(names))
    word = _load_word(text, alphabet)
    if args.cap < 1:
        raise UsageError("--cap must be at least 1")
    p = magnus_embed(word, args.cap)
    low = lowest_degree(p - type(p).one(args.cap))
    names = [g.name for g in alphabet]
    body = {
        "word": format_expr(word),
        "alphabet": names,
        "expansion": p.format(names),
        "lowest_degree": None if low is None else low[0],
        "lowest_component": None if low is None else low[1].format(names),
        "in_gamma_cap": low is None,
    }
    return body, EXIT_OK, {"word": format_expr(word), "cap": args.cap, "pres": args.pres}


def cmd_nq(args, settings):
    from .nq import nilpotent_quotient
    from .pc import check_consistency, export_pc
    pres = _load_pres(args.pres)
    if args.class_ < 1:
        raise UsageError("--class must be at least 1")
    nqb, _ = _budgets(settings)
    q = nilpotent_quotient(pres, args.class_, nqb)
    cons = check_consistency(q.pc)
    body = {"summary": q.summary(), "consistent": cons.consistent,
            "pc": export_pc(q.pc, q.images)}
    if args.pc_out:
        with open(args.pc_out, "w", encoding="utf-8") as fh:
            json.dump(body["pc"], fh, sort_keys=True, indent=1)
            fh.write("\n")
    code = EXIT_OK if cons.consistent else EXIT_FAIL
    if not q.complete:
        code = EXIT_BUDGET
    return body, code, {"pres": args.pres, "class": args.class_, "budget": _budget_params(settings)}


def cmd_delta(args, settings):
    from .augquot import delta_report
    pres = _load_pres(args.pres)
    word = _load_word(args.word, pres)
    if args.n < 2:
        raise UsageError("-n must be at least 2")
    nqb, augb = _budgets(settings)
    rep = delta_report(pres, word, args.n, os.path.basename(args.pres), nqb, augb)
    code = EXIT_OK if rep.complete else EXIT_BUDGET
    return rep.to_json(), code, {"pres": args.pres, "word": format_expr(word), "n": args.n,
                                 "budget": _budget_params(settings)}


def _load_pc(path):
    from .pc import MalformedPc, import_pc
    try:
        pc, images, cons = import_pc(_read_text(path))
    except MalformedPc as exc:
        raise UsageError(f"{path}: {exc}") from None
    return pc, images, cons


def cmd_gamma(args, settings):
    from .pc import evaluate, is_in_subgroup, lcs, MissingImage
    pc, images, cons = _load_pc(args.pc)
    if not images:
        raise UsageError(f"{args.pc}: no generator images, cannot evaluate a word")
    alphabet = tuple(GeneratorId(i, n) for i, n in enumerate(sorted(images)))
    word = _load_word(args.word, alphabet)
    if args.n < 1:
        raise UsageError("-n must be at least 1")
    body = {"consistent": cons.consistent, "n": args.n, "word": format_expr(word)}
    if not cons.consistent:
        body["consistency_failure"] = cons.failure
        return body, EXIT_FAIL, {"pc": args.pc, "word": format_expr(word), "n": args.n}
    try:
        img = evaluate(pc, images, word)
    except MissingImage as exc:
        raise UsageError(str(exc)) from None
    series = lcs(pc, max_terms=args.n)
    term = series[args.n - 1] if len(series) >= args.n else None
    body["word_image"] = list(img.exponents)
    body["lcs_ranks"] = [len(s) for s in series]
    body["in_gamma"] = True if term is None else is_in_subgroup(term, img)
    return body, EXIT_OK, {"pc": args.pc, "word": format_expr(word), "n": args.n}


def cmd_pc_verify(args, settings):
    from .pc import verify_relations
    pc, images, cons = _load_pc(args.pc)
    pres = _load_pres(args.pres)
    if not images:
        raise UsageError(f"{args.pc}: no generator images")
    word = _load_word(args.word, pres) if args.word else None
    body = {"ngens": pc.ngens, "relative_orders": sorted({str(o) for o in pc.orders}),
            "consistent": cons.consistent}
    if not cons.consistent:
        body["consistency_failure"] = cons.failure
        return body, EXIT_FAIL, {"pc": args.pc, "pres": args.pres, "word": args.word}
    rep = verify_relations(pc, images, pres, word, n=args.n)
    body.update(rep.to_json())
    ok = rep.all_hold
    if word is not None and not args.relations_only:
        body["witness_pattern"] = (not rep.word_trivial) and (not rep.word_in_gamma) and rep.cube_in_gamma
        ok = ok and body["witness_pattern"]
    return body, (EXIT_OK if ok else EXIT_FAIL), {"pc": args.pc, "pres": args.pres,
                                                   "word": args.word, "n": args.n}


def _gbar_checks(q, fx):
    from .nq import gamma_basis
    from .pc import evaluate, is_in_subgroup
    wx = evaluate(q.pc, q.images, fx.w_x_bar)
    wz = evaluate(q.pc, q.images, fx.w_z)
    cube = q.pc.power(wx, 3)
    n = min(7, q.class_ + 1)
    return {
        "class": q.class_,
        "w_x_equals_w_z": wx == wz,
        "w_cubed_in_gamma7": is_in_subgroup(gamma_basis(q, n), cube),
        "gamma7_test_subgroup": f"gamma_{n}",
        "w_trivial": wx.is_identity(),
        # nonzero exponents, keyed by pc generator name, for auditing the comparison
        "w_x_image": {q.pc.names[i]: e for i, e in wx.support().items()},
        "w_z_image": {q.pc.names[i]: e for i, e in wz.support().items()},
        "definitions": {q.pc.names[i]: _definition(q, i) for i in sorted(set(wx.support()) | set(wz.support()))},
    }


def _definition(q, i):
    d = q.definitions[i]
    if d[0] == "gen":
        return d[1]
    return f"[{q.pc.names[d[1]]},{q.pc.names[d[2]]}]"


def cmd_paper_verify(args, settings):
    from .augquot import delta_report
    from .core import Comm, Gen
    from .lie import weight3_check
    from .magnus import replay_section1
    from .nq import nilpotent_quotient
    fx = paper_fixture()
    nqb, augb = _budgets(settings)
    body: dict = {}
    lie = weight3_check()
    body["lie_check"] = {"passed": lie.passed, "w_in_W": lie.w_in_W, "3w_in_W": lie.w3_in_W,
                         "3w_certificate": lie.w3_certificate}
    rep = replay_section1()
    body["replay"] = {"passed": rep.passed, "checks": rep.checks}
    target = int(settings["paper_class"])
    q = nilpotent_quotient(fx.Gbar, target, nqb)
    checks = _gbar_checks(q, fx) if q.class_ >= 1 else {}
    body["gbar_quotient"] = {
        "summary": q.summary(),
        "checks": checks,
        "budget_exhausted": not q.complete,
        "note": None if q.complete else
        f"budget exhausted; checks were run in the class-{q.class_} quotient instead of class {target}",
    }
    gbar_ok = q.class_ >= min(5, target) and checks.get("w_x_equals_w_z") and checks.get("w_cubed_in_gamma7")

    # the delta pipeline on cases that fit a desk budget
    x, y = GeneratorId(0, "x"), GeneratorId(1, "y")
    free2 = GroupPresentation((x, y), ())
    xy = Comm((Gen(x), Gen(y)))
    sanity = []
    for n, expect_delta in ((2, True), (3, False)):
        d = delta_report(free2, xy, n, "free rank 2", nqb, augb)
        sanity.append({"word": "[x,y]", "n": n, "in_delta": d.in_delta, "in_gamma": d.in_gamma,
                       "expected_in_delta": expect_delta})
    dn = int(settings["paper_delta_n"])
    dg = delta_report(fx.Gbar, fx.w_x_bar, dn, "Gbar", nqb, augb)
    body["delta"] = {
        "free_group_sanity": sanity,
        "gbar": {"n": dn, "in_delta": dg.in_delta, "in_gamma": dg.in_gamma,
                 "monomials": dg.monomials, "budget": dg.budget},
    }
    sanity_ok = all(s["in_delta"] == s["expected_in_delta"] for s in sanity)
    passed = bool(lie.passed and rep.passed and gbar_ok and sanity_ok and dg.in_delta)
    body["passed"] = passed
    code = EXIT_OK if passed else EXIT_FAIL
    if passed and (not q.complete or not dg.complete):
        code = EXIT_BUDGET
    return body, code, {"paper_class": target, "paper_delta_n": dn, "budget": _budget_params(settings)}


# -- driver ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--out", help="write the JSON report here instead of stdout")
    common.add_argument("--config", help="key = value file with default budgets")
    common.add_argument("--threads", type=int, help="worker threads (results never depend on it)")
    common.add_argument("--seconds", type=float, help="wall-time budget for the nilpotent quotient")
    common.add_argument("--memory-mb", dest="memory_mb", type=int, help="address-space limit")
    common.add_argument("--max-generators", dest="max_generators", type=int)
    common.add_argument("--max-tails", dest="max_tails", type=int)
    common.add_argument("--max-monomials", dest="max_monomials", type=int)
    common.add_argument("--max-rows", dest="max_rows", type=int)

    p = _Parser(prog="dimq", description="Dimension-subgroup verification toolkit.")
    p.add_argument("--version", action="version", version=f"dimq {__version__}")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True
    sub.add_parser("lie-check", parents=[common], help="weight-3 Lie lattice computation")
    sub.add_parser("replay", parents=[common], help="replay the Magnus-expansion congruence proof")
    s = sub.add_parser("magnus", parents=[common], help="truncated Magnus expansion of a word")
    s.add_argument("word")
    s.add_argument("--cap", type=int, required=True)
    s.add_argument("--pres", help="take the alphabet from this presentation")
    s = sub.add_parser("nq", parents=[common], help="nilpotent quotient")
    s.add_argument("--pres", required=True)
    s.add_argument("--class", dest="class_", type=int, required=True)
    s.add_argument("--pc-out", dest="pc_out", help="also write the pc JSON here")
    s = sub.add_parser("delta", parents=[common], help="delta_n and gamma_n membership of a word")
    s.add_argument("--pres", required=True)
    s.add_argument("--word", required=True)
    s.add_argument("-n", type=int, required=True)
    s = sub.add_parser("gamma", parents=[common], help="gamma_n membership in a pc group")
    s.add_argument("--pc", required=True)
    s.add_argument("--word", required=True)
    s.add_argument("-n", type=int, required=True)
    s = sub.add_parser("pc-verify", parents=[common], help="check imported pc data against a presentation")
    s.add_argument("--pc", required=True)
    s.add_argument("--pres", required=True)
    s.add_argument("--word")
    s.add_argument("-n", type=int, default=7)
    s.add_argument("--relations-only", action="store_true",
                   help="exit 0 when the relations hold, whatever the word does")
    sub.add_parser("paper-verify", parents=[common], help="run the full verification suite")
    return p


COMMANDS = {
    "lie-check": cmd_lie_check,
    "replay": cmd_replay,
    "magnus": cmd_magnus,
    "nq": cmd_nq,
    "delta": cmd_delta,
    "gamma": cmd_gamma,
    "pc-verify": cmd_pc_verify,
    "paper-verify": cmd_paper_verify,
}


def _limit_memory(mb: int):
    try:
        import resource
        limit = mb * 1024 * 1024
        soft, hard = resource.getrlimit(resource.RLIMIT_AS)
        if hard != resource.RLIM_INFINITY:
            limit = min(limit, hard)
        resource.setrlimit(resource.RLIMIT_AS, (limit, hard))
    except (ImportError, ValueError, OSError):
        pass


def render(report: dict) -> str:
    return json.dumps(report, sort_keys=True, indent=2) + "\n"


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        settings = _settings(args)
    except UsageError as exc:
        print(f"dimq: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)
    _limit_memory(settings["memory_mb"])
    try:
        body, code, params = COMMANDS[args.command](args, settings)
    except UsageError as exc:
        print(f"dimq: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except MemoryError:
        body, code, params = {"error": f"memory budget of {settings['memory_mb']} MB exhausted"}, EXIT_BUDGET, {}
    report = {
        "header": {"tool": "dimq", "version": __version__, "command": args.command,
                   "params": params, "fixtures": fixture_hashes(), "exit_code": code},
        "report": body,
    }
    text = render(report)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
