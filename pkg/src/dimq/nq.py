"""Nilpotent quotients over Z of finitely presented groups.

The quotient of class ``k+1`` is obtained from the class-``k`` quotient ``Q`` by
adjoining one free central "tail" generator to every relation of ``Q`` that is
not a definition (power relations, commutator relations of total weight at most
``k+1``, images of presentation generators that do not define a pc generator).
The resulting extension ``E`` need not be consistent.  Collecting the relators
of the input presentation and the overlaps of ``E`` yields integer relations
among the tails; the quotient of the free abelian tail group by that lattice is
the new layer ``gamma_{k+1}/gamma_{k+2}``.

Candidate tails (those of ``[a_j, a_i]`` with ``a_j`` of weight ``k`` and ``a_i``
of weight 1) are placed last in the column order, so Hermite elimination keeps
only candidates as new generators and each of them gets a commutator definition.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Mapping

from .core import GroupPresentation
from .pc import (PcElement, PcOps, PcPresentation, SubgroupBasis, Collector,
                 overlap_tests, _eval_steps)
from .zlinalg import Lattice

__all__ = ["NilpotentQuotient", "NqBudget", "nilpotent_quotient", "gamma_basis",
           "BudgetExceeded", "NqInternalError", "abelian_invariants"]


class BudgetExceeded(RuntimeError):
    pass


class NqInternalError(RuntimeError):
    pass


@dataclass(frozen=True)
class NqBudget:
    """Resource limits; exceeding one stops at the last completed class."""

    seconds: float = 600.0
    max_generators: int = 20000
    max_tails: int = 100000


@dataclass
class NilpotentQuotient:
    pc: PcPresentation
    images: dict[str, PcElement]
    class_: int
    layers: list[tuple[int, ...]]
    definitions: list[tuple]
    requested_class: int
    budget_note: str | None = None

    @property
    def complete(self) -> bool:
        return self.class_ >= self.requested_class

    def image(self, name: str) -> PcElement:
        return self.images[name]

    def summary(self) -> dict:
        return {
            "class_requested": self.requested_class,
            "class_reached": self.class_,
            "complete": self.complete,
            "generators": self.pc.ngens,
            "layer_invariants": [list(x) for x in self.layers],
            "layer_sizes": [sum(1 for w in self.pc.weights if w == k) for k in range(1, self.class_ + 1)],
            "budget": self.budget_note,
        }


def abelian_invariants(torsion: list[int], free_rank: int) -> tuple[int, ...]:
    """Invariants in the usual listing: torsion divisors then 0 for each Z factor."""
    return tuple(sorted(torsion)) + (0,) * free_rank


def _merge(a: Mapping[int, int], b: Mapping[int, int]) -> dict[int, int]:
    out = dict(a)
    out.update(b)
    return out


def _normalize_layer(vec: dict[int, int], orders: dict[int, int | None],
                     tails: dict[int, dict[int, int]]) -> dict[int, int]:
    """Normal form of an element of an abelian layer with pc relations ``tails``."""
    v = {k: x for k, x in vec.items() if x}
    done: dict[int, int] = {}
    while v:
        i = min(v)
        x = v.pop(i)
        d = orders[i]
        if d is not None:
            q, x = divmod(x, d)
            if q:
                for k, y in tails.get(i, {}).items():
                    z = v.get(k, 0) + q * y
                    if z:
                        v[k] = z
                    else:
                        v.pop(k, None)
        if x:
            done[i] = x
    return done


class _Clock:
    def __init__(self, budget: NqBudget):
        self.budget = budget
        self.deadline = time.monotonic() + budget.seconds

    def tick(self, what: str):
        if time.monotonic() > self.deadline:
            raise BudgetExceeded(f"time budget of {self.budget.seconds:g} s exhausted during {what}")


def _extend(Q: PcPresentation, images: dict[str, dict[int, int]], defs: list[tuple],
            k: int, pres: GroupPresentation, clock: _Clock):
    m, w = Q.ngens, Q.weights
    defined_pairs = {d[1:] for d in defs if d[0] == "comm"}
    defining_names = {d[1] for d in defs if d[0] == "gen"}

    keys: list[tuple] = []
    cands: list[tuple] = []
    for name in pres.names:
        if name not in defining_names:
            (cands if k == 0 else keys).append(("image", name))
    for i in range(m):
        if Q.orders[i] is not None:
            keys.append(("power", i))
    for j in range(m):
        for i in range(j):
            if w[i] + w[j] > k + 1 or (j, i) in defined_pairs:
                continue
            if w[j] == k and w[i] == 1:
                cands.append(("comm", j, i))
            else:
                keys.append(("comm", j, i))
    keys += cands
    s = len(keys)
    if s > clock.budget.max_tails:
        raise BudgetExceeded(f"class {k + 1} needs {s} tails, above the budget of {clock.budget.max_tails}")
    col = {key: c for c, key in enumerate(keys)}

    power = {}
    for i in range(m):
        if Q.orders[i] is not None:
            power[i] = _merge(Q.power_tails.get(i, {}), {m + col[("power", i)]: 1})
    comm = dict(Q.commutator_tails)
    for key, c in col.items():
        if key[0] == "comm":
            comm[key[1:]] = _merge(Q.commutator_tails.get(key[1:], {}), {m + c: 1})
    E = PcPresentation(m + s, list(w) + [k + 1] * s, list(Q.orders) + [None] * s, power, comm)
    e_images = {}
    for name in pres.names:
        c = col.get(("image", name))
        e_images[name] = images[name] if c is None else _merge(images[name], {m + c: 1})

    relations: list[dict[int, int]] = []
    collector = E.collector

    def tail_part(x: dict[int, int], where: str) -> dict[int, int]:
        if any(i < m for i in x):
            raise NqInternalError(f"{where} does not vanish in the class-{k} quotient")
        return {i - m: e for i, e in x.items()}

    ops = PcOps(E, e_images)
    for idx, (lhs, rhs) in enumerate(pres.relations):
        clock.tick(f"relation {idx} at class {k + 1}")
        a, b = lhs.evaluate(ops), rhs.evaluate(ops)
        relations.append(tail_part(collector.mul(collector.inverse(b), a), f"relation {idx}"))
    if k >= 1:
        for n, (label, left, right) in enumerate(overlap_tests(E, max_weight=k + 1)):
            if n % 64 == 0:
                clock.tick(f"consistency at class {k + 1}")
            a, b = _eval_steps(collector, left), _eval_steps(collector, right)
            if a == b:
                continue
            if {i: e for i, e in a.items() if i < m} != {i: e for i, e in b.items() if i < m}:
                raise NqInternalError(f"overlap {label} fails below the new layer")
            d = {i - m: b.get(i, 0) - a.get(i, 0) for i in set(a) | set(b) if i >= m}
            relations.append(d)

    clock.tick(f"elimination at class {k + 1}")
    lattice = Lattice.from_rows(relations)

    # read off the new layer
    rows = dict(lattice.hnf_rows())
    survivors = [c for c in range(s) if c not in rows or rows[c][c] != 1]
    ncand_start = s - len(cands)
    if any(c < ncand_start for c in survivors):
        raise NqInternalError("a non-candidate tail survived elimination")
    if Q.ngens + len(survivors) > clock.budget.max_generators:
        raise BudgetExceeded(f"class {k + 1} would have {Q.ngens + len(survivors)} generators")
    new_index = {c: m + t for t, c in enumerate(survivors)}
    new_orders: dict[int, int | None] = {}
    new_tails: dict[int, dict[int, int]] = {}
    for c in reversed(survivors):
        g = new_index[c]
        r = rows.get(c)
        if r is None:
            new_orders[g] = None
            continue
        new_orders[g] = r[c]
        rest = {new_index[x]: -y for x, y in r.items() if x != c}
        t = _normalize_layer(rest, new_orders, new_tails)
        if t:
            new_tails[g] = t
    tau: dict[int, dict[int, int]] = {}
    for c in range(s):
        if c in new_index:
            tau[c] = {new_index[c]: 1}
        else:
            r = rows[c]
            tau[c] = _normalize_layer({new_index[x]: -y for x, y in r.items() if x != c},
                                      new_orders, new_tails)

    ngens = m + len(survivors)
    orders = list(Q.orders) + [new_orders[m + t] for t in range(len(survivors))]
    weights = list(w) + [k + 1] * len(survivors)
    p_tails = {i: dict(t) for i, t in Q.power_tails.items()}
    c_tails = {key: dict(t) for key, t in Q.commutator_tails.items()}
    for key, c in col.items():
        if key[0] == "power":
            p_tails[key[1]] = _merge(Q.power_tails.get(key[1], {}), tau[c])
        elif key[0] == "comm":
            c_tails[key[1:]] = _merge(Q.commutator_tails.get(key[1:], {}), tau[c])
    p_tails.update(new_tails)
    names = list(Q.names) + [f"a{i + 1}" for i in range(m, ngens)]
    newQ = PcPresentation(ngens, weights, orders, p_tails, c_tails, names=names)
    new_images = {}
    for name in pres.names:
        c = col.get(("image", name))
        new_images[name] = images[name] if c is None else _merge(images[name], tau[c])
    new_defs = list(defs)
    for c in survivors:
        key = keys[c]
        new_defs.append(("gen", key[1]) if key[0] == "image" else key)
    torsion, free = lattice.quotient_invariants(s)
    return newQ, new_images, new_defs, abelian_invariants(torsion, free)


def nilpotent_quotient(pres: GroupPresentation, c: int, budget: NqBudget | None = None) -> NilpotentQuotient:
    """Consistent weighted pc presentation of ``pres / gamma_{c+1}`` with generator images.

    When a budget runs out the quotient of the last completed class is returned
    with ``budget_note`` set; it is never a partially built layer.
    """
    if c < 1:
        raise ValueError("class must be at least 1")
    budget = budget or NqBudget()
    clock = _Clock(budget)
    Q = PcPresentation(0, [], [])
    images: dict[str, dict[int, int]] = {name: {} for name in pres.names}
    defs: list[tuple] = []
    layers: list[tuple[int, ...]] = []
    note = None
    reached = 0
    for k in range(c):
        try:
            Q, images, defs, layer = _extend(Q, images, defs, k, pres, clock)
        except BudgetExceeded as exc:
            note = str(exc)
            break
        layers.append(layer)
        reached = k + 1
        if all(w <= k for w in Q.weights):
            # the layer vanished, so the lower central series has stabilized
            reached = c
            layers.extend([()] * (c - k - 1))
            break
    return NilpotentQuotient(Q, {n: Q.element(v) for n, v in images.items()}, reached, layers,
                             defs, c, note)


def gamma_basis(nq: NilpotentQuotient, n: int) -> SubgroupBasis:
    """gamma_n of the quotient: the pc generators of weight at least n."""
    if not 1 <= n <= nq.class_ + 1:
        raise ValueError(f"n must lie in 1..{nq.class_ + 1}")
    pc = nq.pc
    return SubgroupBasis(pc, [pc.element({i: 1}) for i in range(pc.ngens) if pc.weights[i] >= n])
