import json
import random

import pytest
from hypothesis import given, settings, strategies as st

from dimq.core import parse_presentation, parse_word, paper_fixture
from dimq.nq import nilpotent_quotient
from dimq.pc import (
    InconsistentPresentation, MalformedPc, MalformedTail, MissingImage, PcElement, PcPresentation,
    check_consistency, collect, cyclic, evaluate, export_pc, heisenberg, import_pc,
    is_in_subgroup, lcs, subgroup_closure, verify_relations,
)


# 3x3 unitriangular integer matrices: a, b and c = [b, a]
def mat_mul(x, y):
    return tuple(tuple(sum(x[i][k] * y[k][j] for k in range(3)) for j in range(3)) for i in range(3))


def mat_pow(x, e):
    if e < 0:
        a, b, c = x[0][1], x[1][2], x[0][2]
        x = ((1, -a, a * b - c), (0, 1, -b), (0, 0, 1))
        e = -e
    out = ((1, 0, 0), (0, 1, 0), (0, 0, 1))
    for _ in range(e):
        out = mat_mul(out, x)
    return out


A = ((1, 1, 0), (0, 1, 0), (0, 0, 1))
B = ((1, 0, 0), (0, 1, 1), (0, 0, 1))
C = mat_mul(mat_mul(mat_pow(B, -1), mat_pow(A, -1)), mat_mul(B, A))
MATS = [A, B, C]


def matrix_of(word):
    out = mat_pow(A, 0)
    for i, e in word:
        out = mat_mul(out, mat_pow(MATS[i], e))
    return out


def normal_matrix(vec):
    return matrix_of(list(enumerate(vec)))


def test_heisenberg_swap_convention():
    H = heisenberg()
    assert collect(H, [(1, 1), (0, 1)]).exponents == (1, 1, 1)
    assert matrix_of([(1, 1), (0, 1)]) == normal_matrix((1, 1, 1))
    assert collect(H, []).is_identity()


def test_cyclic_power():
    assert collect(cyclic(9), [(0, 11)]).exponents == (2,)


pc_words = st.lists(st.tuples(st.integers(0, 2), st.integers(-4, 4).filter(bool)), max_size=8)


@settings(max_examples=200)
@given(pc_words)
def test_collection_matches_matrices(word):
    assert normal_matrix(collect(heisenberg(), word).exponents) == matrix_of(word)


def z9_by_power() -> PcPresentation:
    return PcPresentation(2, [1, 1], [3, 3], {0: {1: 1}}, {})


def e27() -> PcPresentation:
    return heisenberg(3)


def free_class4():
    nq = nilpotent_quotient(parse_presentation("gens: x, y; rels:"), 4)
    return nq.pc


def _fixtures():
    return [heisenberg(), e27(), z9_by_power(), cyclic(9), free_class4()]


def _random_word(rng, m, length=12):
    return [(rng.randrange(m), rng.choice([-3, -2, -1, 1, 2, 3, 9])) for _ in range(length)]


def _random_tree(rng, c, parts):
    while len(parts) > 1:
        k = rng.randrange(len(parts) - 1)
        parts[k:k + 2] = [c.mul(parts[k], parts[k + 1])]
    return parts[0]


@pytest.mark.parametrize("pc", _fixtures(), ids=["H", "E27", "Z9", "C9", "F2c4"])
def test_confluence_under_rebracketing(pc):
    rng = random.Random(pc.ngens)
    c = pc.collector
    for _ in range(500):
        word = _random_word(rng, pc.ngens)
        direct = c.collect_word(word)
        cuts = sorted(rng.sample(range(1, len(word)), rng.randint(0, 5)))
        pieces = [word[a:b] for a, b in zip([0] + cuts, cuts + [len(word)])]
        # split syllables too: a^e = a^s a^(e-s)
        split = []
        for p in pieces:
            q = []
            for i, e in p:
                s = rng.randint(-2, 2)
                q += [(i, s), (i, e - s)] if s and s != e else [(i, e)]
            split.append(q)
        rebuilt = _random_tree(rng, c, [c.collect_word(p) for p in split])
        assert rebuilt == direct


@pytest.mark.parametrize("pc", _fixtures(), ids=["H", "E27", "Z9", "C9", "F2c4"])
def test_collection_is_multiplicative(pc):
    rng = random.Random(7)
    c = pc.collector
    for _ in range(100):
        u, v = _random_word(rng, pc.ngens, 5), _random_word(rng, pc.ngens, 5)
        assert c.collect_word(u + v) == c.mul(c.collect_word(u), c.collect_word(v))
        g = c.collect_word(u)
        assert c.mul(g, c.inverse(g)) == {}
        assert c.power(g, 5) == c.collect_word(u * 5)
        assert c.power(g, -2) == c.inverse(c.mul(g, g))


def test_consistency_examples():
    assert check_consistency(heisenberg()).consistent
    assert check_consistency(cyclic(9)).consistent
    assert check_consistency(z9_by_power()).consistent


def test_corrupted_tail_detected():
    # a^3 = b forces a and b to commute, which [b, a] = c contradicts
    bad = PcPresentation(3, None, [3, 3, 3], {0: {1: 1}}, {(1, 0): {2: 1}})
    rep = check_consistency(bad)
    assert not rep.consistent
    assert rep.failure["overlap"].startswith("a1^3")
    with pytest.raises(InconsistentPresentation):
        lcs(bad)


def test_corrupted_commutator_tail_detected():
    # a^3 = 1 and central c = [b, a] give c^3 = [b, a^3] = 1, so c^2 = 1 forces c = 1
    bad = PcPresentation(3, None, [3, None, 2], {0: {}, 2: {}}, {(1, 0): {2: 1}})
    assert not check_consistency(bad).consistent


@pytest.mark.parametrize("pc", _fixtures()[:4], ids=["H", "E27", "Z9", "C9"])
def test_bounded_and_full_consistency_agree(pc):
    assert check_consistency(pc).consistent == check_consistency(pc, full=True).consistent


def test_evaluate_examples():
    F = parse_presentation("gens: x, y; rels:")
    H = heisenberg()
    images = {"x": H.gen(0), "y": H.gen(1)}
    assert evaluate(H, images, parse_word("x*x^-1", F)).is_identity()
    assert evaluate(H, images, parse_word("[y,x]", F)) == H.gen(2)
    with pytest.raises(MissingImage):
        evaluate(H, {"x": H.gen(0)}, parse_word("y", F))


@settings(max_examples=60)
@given(st.lists(st.tuples(st.sampled_from("xy"), st.integers(-3, 3).filter(bool)), max_size=5),
       st.lists(st.tuples(st.sampled_from("xy"), st.integers(-3, 3).filter(bool)), max_size=5))
def test_evaluate_is_a_homomorphism(u, v):
    F = parse_presentation("gens: x, y; rels:")
    H = heisenberg()
    images = {"x": H.gen(0), "y": H.mul(H.gen(1), H.gen(0, 2))}

    def parse(syl):
        return parse_word("*".join(f"{g}^{e}" for g, e in syl) if syl else "x*x^-1", F)

    uv = parse(u + v)
    assert evaluate(H, images, uv) == H.mul(evaluate(H, images, parse(u)), evaluate(H, images, parse(v)))


def test_subgroup_membership_examples():
    H = heisenberg()
    series = lcs(H)
    assert [len(s) for s in series] == [3, 1, 0]
    g2 = series[1]
    assert is_in_subgroup(g2, H.gen(2))
    assert not is_in_subgroup(g2, H.gen(0))
    assert is_in_subgroup(series[-1], H.identity())


def test_subgroup_closure_of_powers():
    H = heisenberg()
    sub = subgroup_closure(H, [H.gen(0, 2), H.gen(1, 3)])
    assert is_in_subgroup(sub, H.gen(2, 6))
    assert not is_in_subgroup(sub, H.gen(2))
    assert not is_in_subgroup(sub, H.gen(0))


def test_lcs_commutator_containment():
    pc = free_class4()
    series = lcs(pc)
    rng = random.Random(3)
    c = pc.collector
    for i in range(1, len(series)):
        for j in range(1, len(series) - i):
            gi, gj = series[i - 1].elements, series[j - 1].elements
            for _ in range(5):
                a, b = rng.choice(gi), rng.choice(gj)
                x = PcElement(pc.element(c.comm(a.support(), b.support())).exponents)
                assert is_in_subgroup(series[i + j - 1], x)


def test_export_import_round_trip():
    for pc in _fixtures():
        data = json.dumps(export_pc(pc))
        back, images, report = import_pc(data)
        assert back == pc and images is None and report.consistent


def test_import_errors():
    data = export_pc(e27())
    del data["power_tails"]["1"]
    with pytest.raises(MalformedTail):
        import_pc(data)
    data = export_pc(heisenberg())
    data["commutator_tails"]["1,0"] = [[2]]
    with pytest.raises(MalformedTail):
        import_pc(data)
    data = export_pc(heisenberg())
    data["commutator_tails"]["1,0"] = [[0, 1]]
    with pytest.raises(MalformedTail):
        import_pc(data)
    with pytest.raises(MalformedPc):
        import_pc("{not json")
    with pytest.raises(MalformedPc):
        import_pc({"orders": []})


def test_relations_hold_in_a_quotient_of_G():
    G = paper_fixture().G
    nq = nilpotent_quotient(G, 2)
    rep = verify_relations(nq.pc, nq.images, G)
    assert rep.all_hold and len(rep.relations) == 8
    wrong = dict(nq.images)
    wrong["x2"] = nq.pc.mul(wrong["x2"], nq.pc.gen(0))
    rep = verify_relations(nq.pc, wrong, G)
    assert not rep.all_hold
    flagged = [r["index"] for r in rep.relations if not r["holds"]]
    assert 1 in flagged and 0 not in flagged


def test_verify_reports_word_in_gamma():
    F = parse_presentation("gens: x, y; rels:")
    nq = nilpotent_quotient(F, 3)
    w = parse_word("[x,y,y]", F)
    rep = verify_relations(nq.pc, nq.images, F, word=w, n=3)
    assert rep.word_in_gamma and not rep.word_trivial
    rep = verify_relations(nq.pc, nq.images, F, word=parse_word("[x,y]", F), n=3)
    assert not rep.word_in_gamma and not rep.cube_in_gamma
