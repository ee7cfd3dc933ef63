"""Acceptance criteria AC1 to AC8; each prints one PASS/FAIL line in the summary."""
import json
import math
import os
import random
import subprocess
import sys
from pathlib import Path

import pytest

from acceptance_log import criterion
from oracles import (augmentation_powers, cyclic_group, extraspecial27, in_delta, layer_invariants,
                     magnus_letters, word_letters, z3xz3, z9_as_pc)
from perturb import presentation_perturbations
from test_lie import lyndon_count
from test_magnus import _basic_word, _perturbed_fixtures, random_gamma_word

from dimq.augquot import aug_quotient, delta_report, is_in_delta
from dimq.core import parse_presentation, parse_word
from dimq.lie import hall_basis, weight3_check
from dimq.magnus import NcPoly, lowest_degree, magnus_embed, replay_section1, section1_data
from dimq.nq import nilpotent_quotient
from dimq.pc import (PcElement, PcPresentation, check_consistency, cyclic, export_pc, heisenberg,
                     import_pc, verify_relations)


def cli(args, env=None, timeout=None):
    proc = subprocess.run([sys.executable, "-m", "dimq.cli", *args], capture_output=True,
                          env=env, timeout=timeout)
    return proc.returncode, proc.stdout


@criterion("AC1", limit=1.0)
def test_ac1_weight3_lattice():
    rep = weight3_check()
    assert rep.rank == 20
    assert not rep.w_in_W and rep.w_certificate is None
    assert rep.w3_in_W
    combo = [sum(c * r[j] for c, r in zip(rep.w3_certificate, rep.matrix)) for j in range(20)]
    assert combo == [3 * x for x in rep.w_vector]
    assert rep.hnf and all(row[p] > 0 for row, p in zip(rep.hnf, rep.hnf_pivots))
    return "rank 20, w not in W, 3w in W with certificate"


@criterion("AC2", limit=None)
def test_ac2_replay():
    import time
    start = time.monotonic()
    rep = replay_section1()
    elapsed = time.monotonic() - start
    assert rep.passed and len(rep.checks) == 10 and elapsed < 1.0
    assert all(rep.weight_checks[f"e{k}"] >= 7 for k in range(1, 9))
    flipped = total = 0
    for _, data in _perturbed_fixtures():
        total += 1
        flipped += not replay_section1(data).passed
    base = section1_data()
    for _, pres in presentation_perturbations(base.presentation):
        total += 1
        flipped += not replay_section1(section1_data(presentation=pres)).passed
    assert flipped == total
    return f"10/10 checks in {elapsed:.2f} s; {flipped}/{total} single-exponent perturbations flip"


@criterion("AC3", limit=30.0)
def test_ac3_magnus_free_groups():
    from dimq.core import GeneratorId, Word
    rng = random.Random(3)
    count = 0
    for rank in (1, 2, 3):
        for n in range(1, 7):
            for _ in range(200):
                w = random_gamma_word(rng, rank, n)
                assert (magnus_embed(w, n) - NcPoly.one(n)).is_zero()
                count += 1
    for k in (2, 3):
        for n in range(1, 5):
            for h in hall_basis(k, n):
                w = _basic_word(h)
                d, comp = lowest_degree(magnus_embed(w, n + 1) - NcPoly.one(n + 1))
                assert d == n
                oracle = magnus_letters(word_letters(w), n + 1)
                assert comp.terms == {m: c for m, c in oracle.items() if len(m) == n}
    return f"{count} gamma_n words, basic commutators up to weight 4"


@criterion("AC4", limit=120.0)
def test_ac4_nq_witt():
    names = "xyzt"
    for rank in (2, 3, 4):
        pres = parse_presentation(f"gens: {', '.join(names[:rank])}; rels:")
        nq = nilpotent_quotient(pres, 6)
        assert nq.complete
        assert [len(layer) for layer in nq.layers] == [lyndon_count(rank, k) for k in range(1, 7)]
        assert check_consistency(nq.pc).consistent
        for c in range(1, 6):
            assert check_consistency(nilpotent_quotient(pres, c).pc).consistent
    for c in range(1, 7):
        nq = nilpotent_quotient(parse_presentation("gens: x; rels: x^3 = 1"), c)
        assert nq.layers == [(3,)] + [()] * (c - 1) and nq.pc.ngens == 1
    return "ranks 2-4 up to class 6 match Witt"


def _pc_groups():
    return {
        "Z3": (cyclic(3), cyclic_group(3)),
        "Z9": (PcPresentation(2, [1, 1], [3, 3], {0: {1: 1}}, {}), z9_as_pc()),
        "Z3xZ3": (PcPresentation(2, [1, 1], [3, 3], {0: {}, 1: {}}, {}), z3xz3()),
        "E27": (heisenberg(3), extraspecial27()),
    }


@criterion("AC5", limit=120.0)
def test_ac5_augquot_oracle():
    checked = 0
    for name, (pc, G) in _pc_groups().items():
        bases = augmentation_powers(G, 5)
        elements = [()]
        for o in pc.orders:
            elements = [t + (e,) for t in elements for e in range(o)]
        for n in range(1, 6):
            am = aug_quotient(pc, n)
            assert am.layers == [layer_invariants(bases, k) for k in range(n)], (name, n)
            for t in elements:
                ok, _ = is_in_delta(am, PcElement(t))
                assert ok == in_delta(G, bases, n, G.from_exponents(t)), (name, n, t)
                checked += 1
    return f"{checked} membership answers agree"


@pytest.fixture(scope="module")
def paper_report():
    # the real command line with its default budget (600 s, 4096 MB)
    code, out = cli(["paper-verify"], timeout=1500)
    return code, json.loads(out)


@criterion("AC6")
def test_ac6_gbar_necessary_conditions(paper_report):
    code, rep = paper_report
    header, body = rep["header"], rep["report"]
    assert header["params"]["budget"]["seconds"] == 600
    g = body["gbar_quotient"]
    checks = g["checks"]
    reached = g["summary"]["class_reached"]
    assert checks["w_cubed_in_gamma7"] is True, f"w^3 not in {checks['gamma7_test_subgroup']}"
    assert checks["w_x_equals_w_z"] is True, (
        f"class {reached}: w_x -> {checks['w_x_image']}, w_z -> {checks['w_z_image']}, "
        f"defined by {checks['definitions']}")
    if reached >= 7:
        assert checks["gamma7_test_subgroup"] == "gamma_7"
        return "class 7 reached"
    assert reached >= 5
    assert g["budget_exhausted"] is True and "budget exhausted" in g["note"]
    return f"budget exhausted, checks pass at class {reached} ({checks['gamma7_test_subgroup']})"


@criterion("AC7")
def test_ac7_delta_scope(paper_report, tmp_path):
    _, rep = paper_report
    body = rep["report"]
    for case in body["delta"]["free_group_sanity"]:
        assert case["in_delta"] == case["expected_in_delta"]
    gbar = body["delta"]["gbar"]
    assert gbar["in_delta"] is True
    assert replay_section1().passed
    # pc-verify round trip on a nilpotent quotient of G
    G = Path(__file__).resolve().parents[1] / "src" / "dimq" / "data" / "G.pres"
    pc_file = tmp_path / "g2.json"
    code, _ = cli(["nq", "--pres", str(G), "--class", "2", "--pc-out", str(pc_file)])
    assert code == 0
    pc, images, cons = import_pc(pc_file.read_text())
    assert cons.consistent and export_pc(pc, images) == json.loads(pc_file.read_text())
    code, out = cli(["pc-verify", "--pc", str(pc_file), "--pres", str(G), "--relations-only"])
    assert code == 0 and json.loads(out)["report"]["all_relations_hold"]
    # witness pattern on converted data: w != 1, w not in gamma_n, w^3 in gamma_n
    pres = tmp_path / "c3.pres"
    pres.write_text("gens: x\nrels:\nx^3 = 1\n")
    c3 = tmp_path / "c3.json"
    cli(["nq", "--pres", str(pres), "--class", "1", "--pc-out", str(c3)])
    code, out = cli(["pc-verify", "--pc", str(c3), "--pres", str(pres), "--word", "x", "-n", "2"])
    assert code == 0 and json.loads(out)["report"]["witness_pattern"] is True
    return f"Gbar: w in delta_{gbar['n']}; free-group sanity, replay and pc-verify pass"


@criterion("AC8")
def test_ac8_determinism(tmp_path):
    root = Path(__file__).resolve().parents[1]
    G = str(root / "src" / "dimq" / "data" / "G.pres")
    f2 = tmp_path / "f2.pres"
    f2.write_text("gens: x, y\nrels:\n")
    pc = tmp_path / "f2.json"
    cli(["nq", "--pres", str(f2), "--class", "3", "--pc-out", str(pc)])
    cfg = tmp_path / "small.cfg"
    cfg.write_text("paper_class = 4\npaper_delta_n = 3\n")
    commands = [
        ["lie-check"],
        ["replay"],
        ["magnus", "[x1,x2,x3]^3^9", "--cap", "5"],
        ["nq", "--pres", G, "--class", "2"],
        ["delta", "--pres", str(f2), "--word", "[x,y,x]", "-n", "4"],
        ["gamma", "--pc", str(pc), "--word", "[x,y,y]", "-n", "3"],
        ["pc-verify", "--pc", str(pc), "--pres", str(f2), "--word", "[x,y]", "-n", "2"],
        ["paper-verify", "--config", str(cfg)],
    ]
    for args in commands:
        seen = set()
        for seed, threads in (("0", "1"), ("1", "4"), ("2", "8"), ("3", "1")):
            env = dict(os.environ, PYTHONHASHSEED=seed)
            _, out = cli(args + ["--threads", threads], env=env)
            seen.add(out)
        assert len(seen) == 1, args[0]
    return f"{len(commands)} commands byte-identical over 4 runs (threads 1/4/8, varied hash seeds)"
