import random
import time

import pytest

from dimq.augquot import AugBudget, InvalidWeights, aug_quotient, delta_report, expand, is_in_delta
from dimq.core import Word, free_reduce, left_normed, parse_presentation, parse_word
from dimq.magnus import NcPoly, lowest_degree, magnus_embed
from dimq.nq import BudgetExceeded, nilpotent_quotient
from dimq.pc import PcElement, PcPresentation, cyclic, evaluate, heisenberg, lcs

from oracles import (augmentation_powers, cyclic_group, extraspecial27, in_delta, layer_invariants,
                     z3xz3, z9_as_pc)


def z9_by_power():
    return PcPresentation(2, [1, 1], [3, 3], {0: {1: 1}}, {})


def z3_squared():
    return PcPresentation(2, [1, 1], [3, 3], {0: {}, 1: {}}, {})


GROUPS = {
    "Z3": (lambda: cyclic(3), lambda: cyclic_group(3)),
    "Z9": (z9_by_power, z9_as_pc),
    "Z3xZ3": (z3_squared, z3xz3),
    "E27": (lambda: heisenberg(3), extraspecial27),
}


def all_elements(pc):
    ranges = [range(o) for o in pc.orders]
    out = [()]
    for r in ranges:
        out = [t + (e,) for t in out for e in r]
    return [PcElement(t) for t in out]


def test_infinite_cyclic():
    am = aug_quotient(cyclic(None), 4)
    assert len(am.monomials) == 4
    assert am.layers == [(0,), (0,), (0,), (0,)]
    assert not am.lattice.hnf_rows()
    Z = cyclic(None)
    assert expand(aug_quotient(Z, 3), Z.identity()) == {0: 1}
    assert expand(aug_quotient(Z, 3), Z.gen(0)) == {0: 1, 1: 1}
    assert not is_in_delta(aug_quotient(Z, 2), Z.gen(0))[0]


def test_order_three_layers():
    am = aug_quotient(cyclic(3), 3)
    assert am.layers[1:] == [(3,), (3,)]
    assert not is_in_delta(aug_quotient(cyclic(3), 2), cyclic(3).gen(0))[0]


@pytest.mark.parametrize("name", list(GROUPS))
def test_matches_regular_representation(name):
    make_pc, make_group = GROUPS[name]
    pc, G = make_pc(), make_group()
    start = time.monotonic()
    bases = augmentation_powers(G, 5)
    for n in range(1, 6):
        am = aug_quotient(pc, n)
        assert am.layers == [layer_invariants(bases, k) for k in range(n)]
        for g in all_elements(pc):
            ok, cert = is_in_delta(am, g)
            assert ok == in_delta(G, bases, n, G.from_exponents(g.exponents))
            assert (cert is not None) == ok
    assert time.monotonic() - start < 60


def test_gamma_lies_in_delta():
    pc = heisenberg(3)
    series = lcs(pc)
    for n in (2, 3):
        am = aug_quotient(pc, n)
        gamma = series[n - 1] if n - 1 < len(series) else None
        for g in (gamma.elements if gamma else []):
            assert is_in_delta(am, g)[0]


def _rand(pc, rng):
    return PcElement(tuple(rng.randrange(o) if o else rng.randint(-4, 4) for o in pc.orders))


def _quotients():
    yield heisenberg(3), 5
    yield z9_by_power(), 4
    F = parse_presentation("gens: x, y; rels:")
    yield nilpotent_quotient(F, 3).pc, 4


@pytest.mark.parametrize("pc,n", list(_quotients()), ids=["E27", "Z9", "F2c3"])
def test_multiplicative_and_conjugation_invariant(pc, n):
    rng = random.Random(n)
    am = aug_quotient(pc, n)
    small = [aug_quotient(pc, k) for k in range(1, n)]
    for _ in range(40):
        g, h = _rand(pc, rng), _rand(pc, rng)
        assert am.equivalent(expand(am, pc.mul(g, h)), am.mul(expand(am, g), expand(am, h)))
        conj = pc.conj(g, h)
        assert is_in_delta(am, g)[0] == is_in_delta(am, conj)[0]
        if is_in_delta(am, g)[0]:
            assert all(is_in_delta(s, g)[0] for s in small)


def test_bad_weights_rejected():
    # b is given weight 2 but does not lie in gamma_2
    pc = PcPresentation(3, [1, 2, 2], [None] * 3, {}, {(1, 0): {2: 1}}, check_weights=False)
    with pytest.raises(InvalidWeights):
        aug_quotient(pc, 3)


def test_monomial_budget():
    F = parse_presentation("gens: x, y, z; rels:")
    q = nilpotent_quotient(F, 4)
    with pytest.raises(BudgetExceeded):
        aug_quotient(q.pc, 5, AugBudget(max_monomials=50))


def test_delta_report_free_commutator():
    F = parse_presentation("gens: x, y; rels:")
    w = parse_word("[x,y]", F)
    r2 = delta_report(F, w, 2, "F2")
    assert r2.in_delta is True and r2.in_gamma is True
    r3 = delta_report(F, w, 3, "F2")
    assert r3.in_delta is False and r3.in_gamma is False
    js = r3.to_json()
    for key in ("group", "word", "n", "in_delta", "in_gamma", "certificate", "layers", "budget"):
        assert key in js


def test_delta_report_budget_note():
    F = parse_presentation("gens: x, y; rels:")
    rep = delta_report(F, parse_word("[x,y]", F), 4, "F2", aug_budget=AugBudget(max_monomials=3))
    assert rep.in_delta is None and rep.budget["exhausted"]


def _random_free_word(rng, F, rank):
    gens = [Word(((g, 1),)) for g in F.alphabet[:rank]]
    kind = rng.random()
    if kind < 0.4:
        n = rng.randint(2, 4)
        return left_normed([rng.choice(gens) for _ in range(n)])
    if kind < 0.7:
        c = left_normed([rng.choice(gens) for _ in range(rng.randint(2, 3))])
        return c * left_normed([rng.choice(gens), rng.choice(gens)])
    return free_reduce([(rng.choice(F.alphabet[:rank]), rng.choice([-2, -1, 1, 2])) for _ in range(6)])


@pytest.mark.parametrize("rank", [2, 3])
def test_free_groups_agree_with_magnus(rank):
    F = parse_presentation("gens: x, y, z; rels:" if rank == 3 else "gens: x, y; rels:")
    rng = random.Random(rank)
    for n in range(2, 6):
        q = nilpotent_quotient(F, n - 1)
        am = aug_quotient(q.pc, n, trusted_weights=True)
        for _ in range(40):
            w = _random_free_word(rng, F, rank)
            ok, _ = is_in_delta(am, evaluate(q.pc, q.images, w))
            p = magnus_embed(w, n) - NcPoly.one(n)
            assert ok == p.is_zero()
    w = parse_word("[x,y,y]", F)
    assert delta_report(F, w, 3).in_delta is True
    assert delta_report(F, w, 4).in_delta is False
