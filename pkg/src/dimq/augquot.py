"""Truncated integral group rings ZQ / I^n of polycyclic groups.

Here ``I`` is the augmentation ideal.  With ``X_i = a_i - 1``, every element of
``ZQ / I^n`` is an integer combination of ordered monomials
``X_1^{e_1} ... X_m^{e_m}`` of weighted degree ``sum e_i w_i < n``.  Right
multiplication by ``X_i`` is computed by moving ``X_i`` leftwards with

    X_j X_i = X_i X_j + (1 + X_i)(1 + X_j)(c - 1),   c = [a_j, a_i],  j > i,

and dropping terms of degree ``>= n``.  The relation lattice ``L`` is spanned by

* ``u * rho_i`` for the power relations ``rho_i = (1 + X_i)^{m_i} - E(t_i)``,
* the reordering discrepancies ``(u X_j) X_i - (u X_i) X_j - u D_ji`` for
  monomials ``u`` that end beyond ``j``,

and closed under right multiplication by every ``X_k``.  The quotient of the
monomial module by ``L`` is then a cyclic right ZQ-module killed by ``I^n``
that maps isomorphically onto ``ZQ / I^n``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from math import comb
from typing import Mapping

from .core import Expr, GroupPresentation
from .nq import BudgetExceeded, NqBudget, gamma_basis, nilpotent_quotient
from .pc import PcElement, PcPresentation, check_consistency, evaluate, is_in_subgroup, lcs, InconsistentPresentation
from .zlinalg import Lattice, IntMatrix, elementary_divisors

__all__ = ["AugModule", "AugBudget", "aug_quotient", "expand", "is_in_delta", "delta_report",
           "DeltaReport", "InvalidWeights", "binom"]

Mono = tuple  # sorted tuple of (generator, exponent) pairs, exponents > 0


class InvalidWeights(ValueError):
    pass


@dataclass(frozen=True)
class AugBudget:
    max_monomials: int = 20000
    max_rows: int = 500000
    max_passes: int = 50


def binom(e: int, r: int) -> int:
    """Binomial coefficient for any integer top entry (negative ``e`` allowed)."""
    if e >= 0:
        return comb(e, r)
    return (-1) ** r * comb(-e + r - 1, r)


def _add(out: dict, mono: Mono, c: int):
    x = out.get(mono, 0) + c
    if x:
        out[mono] = x
    else:
        out.pop(mono, None)


class _Algebra:
    """Ordered-monomial arithmetic truncated at weighted degree ``cap``."""

    def __init__(self, pc: PcPresentation, cap: int):
        self.pc = pc
        self.cap = cap
        self.w = pc.weights
        self._cache: dict[tuple[Mono, int], dict[Mono, int]] = {}
        self._d: dict[tuple[int, int], dict[Mono, int]] = {}

    def degree(self, mono: Mono) -> int:
        return sum(e * self.w[i] for i, e in mono)

    def expansion(self, g: Mapping[int, int]) -> dict[Mono, int]:
        """E(g) = prod (1 + X_k)^{g_k} in pc order, truncated."""
        terms: dict[Mono, int] = {(): 1}
        for k in sorted(g):
            e, wk = g[k], self.w[k]
            new: dict[Mono, int] = {}
            for mono, c in terms.items():
                d = self.degree(mono)
                r = 0
                while d + r * wk < self.cap:
                    b = binom(e, r)
                    if b:
                        _add(new, mono + ((k, r),) if r else mono, c * b)
                    r += 1
            terms = new
        return terms

    def reorder_term(self, j: int, i: int) -> dict[Mono, int]:
        """D_ji = (1 + X_i)(1 + X_j)(E(c) - 1) for c = [a_j, a_i]."""
        key = (j, i)
        if key not in self._d:
            c = self.pc.commutator_tails.get(key)
            out: dict[Mono, int] = {}
            if c:
                ec = self.expansion(c)
                ec.pop((), None)
                for pre in ((), ((i, 1),), ((j, 1),), ((i, 1), (j, 1))):
                    dp = self.degree(pre)
                    for mono, x in ec.items():
                        if dp + self.degree(mono) < self.cap:
                            _add(out, pre + mono, x)
            self._d[key] = out
        return self._d[key]

    def mono_times_gen(self, mono: Mono, i: int) -> dict[Mono, int]:
        key = (mono, i)
        hit = self._cache.get(key)
        if hit is not None:
            return hit
        if self.degree(mono) + self.w[i] >= self.cap:
            out: dict[Mono, int] = {}
        elif not mono or mono[-1][0] < i:
            out = {mono + ((i, 1),): 1}
        elif mono[-1][0] == i:
            out = {mono[:-1] + ((i, mono[-1][1] + 1),): 1}
        else:
            j, x = mono[-1]
            rest = mono[:-1] + (((j, x - 1),) if x > 1 else ())
            out = {}
            for m2, c in self.mono_times_gen(rest, i).items():
                for m3, c3 in self.mono_times_gen(m2, j).items():
                    _add(out, m3, c * c3)
            d = self.reorder_term(j, i)
            if d:
                for m2, c in self.mono_times_mono(rest, d).items():
                    _add(out, m2, c)
        self._cache[key] = out
        return out

    def poly_times_gen(self, p: Mapping[Mono, int], i: int) -> dict[Mono, int]:
        out: dict[Mono, int] = {}
        for mono, c in p.items():
            for m2, c2 in self.mono_times_gen(mono, i).items():
                _add(out, m2, c * c2)
        return out

    def mono_times_mono(self, u: Mono, q: Mapping[Mono, int]) -> dict[Mono, int]:
        """u times an ordered polynomial q, letter by letter."""
        out: dict[Mono, int] = {}
        for v, c in q.items():
            cur = {u: c}
            for k, e in v:
                for _ in range(e):
                    cur = self.poly_times_gen(cur, k)
                    if not cur:
                        break
            for m2, c2 in cur.items():
                _add(out, m2, c2)
        return out

    def mul(self, p: Mapping[Mono, int], q: Mapping[Mono, int]) -> dict[Mono, int]:
        out: dict[Mono, int] = {}
        for u, c in p.items():
            for m2, c2 in self.mono_times_mono(u, q).items():
                _add(out, m2, c * c2)
        return out


def _monomials(weights, cap: int) -> list[Mono]:
    out: list[Mono] = []

    def rec(k: int, mono: tuple, deg: int):
        if k == len(weights):
            out.append(mono)
            return
        e = 0
        while deg + e * weights[k] < cap:
            rec(k + 1, mono + (((k, e),) if e else ()), deg + e * weights[k])
            e += 1

    rec(0, (), 0)
    return out


@dataclass
class AugModule:
    pc: PcPresentation
    cap: int
    monomials: list[Mono]
    index: dict[Mono, int]
    lattice: Lattice
    layers: list[tuple[int, ...]]
    passes: int
    algebra: _Algebra = field(repr=False)

    def degree(self, k: int) -> int:
        return self.algebra.degree(self.monomials[k])

    def vector(self, poly: Mapping[Mono, int]) -> dict[int, int]:
        return {self.index[m]: c for m, c in poly.items() if c}

    def poly(self, vec: Mapping[int, int]) -> dict[Mono, int]:
        return {self.monomials[k]: c for k, c in vec.items() if c}

    def mul(self, u: Mapping[int, int], v: Mapping[int, int]) -> dict[int, int]:
        return self.vector(self.algebra.mul(self.poly(u), self.poly(v)))

    def dense(self, vec: Mapping[int, int]) -> list[int]:
        out = [0] * len(self.monomials)
        for k, c in vec.items():
            out[k] = c
        return out

    def equivalent(self, u: Mapping[int, int], v: Mapping[int, int]) -> bool:
        d = dict(u)
        for k, c in v.items():
            d[k] = d.get(k, 0) - c
        return self.lattice.contains(d)

    def format_monomial(self, k: int) -> str:
        mono = self.monomials[k]
        if not mono:
            return "1"
        names = self.pc.names
        return "*".join(f"X{names[i]}" + (f"^{e}" if e > 1 else "") for i, e in mono)


def _check_weights(pc: PcPresentation):
    """Each generator must lie in the lower central term named by its weight."""
    series = lcs(pc)
    for i, w in enumerate(pc.weights):
        if w > 1:
            term = series[w - 1] if w - 1 < len(series) else None
            if term is None or not is_in_subgroup(term, pc.element({i: 1})):
                raise InvalidWeights(f"generator {pc.names[i]} of weight {w} is not in gamma_{w}")


def aug_quotient(pc: PcPresentation, n: int, budget: AugBudget | None = None,
                 trusted_weights: bool = False) -> AugModule:
    """Model of ZQ / I^n.  ``trusted_weights`` skips the lower-central check of the weights."""
    if n < 1:
        raise ValueError("cap must be at least 1")
    budget = budget or AugBudget()
    if not check_consistency(pc).consistent:
        raise InconsistentPresentation("augmentation quotient needs a consistent presentation")
    if not trusted_weights:
        _check_weights(pc)
    alg = _Algebra(pc, n)
    w = pc.weights
    monos = _monomials(w, n)
    if len(monos) > budget.max_monomials:
        raise BudgetExceeded(f"{len(monos)} monomials exceed the budget of {budget.max_monomials}")

    def dense_key(mono):
        e = [0] * pc.ngens
        for i, x in mono:
            e[i] = x
        return (alg.degree(mono), tuple(e))

    monos.sort(key=dense_key)
    index = {m: k for k, m in enumerate(monos)}

    def vec(p):
        return {index[m]: c for m, c in p.items()}

    rows: list[dict[int, int]] = []
    for i in range(pc.ngens):
        m = pc.orders[i]
        if m is None:
            continue
        rho: dict[Mono, int] = {}
        for r in range(1, m + 1):
            if r * w[i] < n:
                _add(rho, ((i, r),), comb(m, r))
        for mono, c in alg.expansion(pc.power_tails.get(i, {})).items():
            if mono:
                _add(rho, mono, -c)
        if not rho:
            continue
        for u in monos:
            if alg.degree(u) + w[i] < n:
                rows.append(vec(alg.mono_times_mono(u, rho)))
    for u in monos:
        if not u:
            continue
        du, last = alg.degree(u), u[-1][0]
        for j in range(last):
            for i in range(j):
                if du + w[i] + w[j] >= n:
                    continue
                left = alg.poly_times_gen(alg.mono_times_gen(u, j), i)
                right = alg.poly_times_gen(alg.mono_times_gen(u, i), j)
                for m2, c in alg.mono_times_mono(u, alg.reorder_term(j, i)).items():
                    _add(right, m2, c)
                for m2, c in right.items():
                    _add(left, m2, -c)
                if left:
                    rows.append(vec(left))
        if len(rows) > budget.max_rows:
            raise BudgetExceeded(f"more than {budget.max_rows} relation rows")
    lattice = Lattice.from_rows(rows)
    passes = 1
    while True:
        if passes > budget.max_passes:
            raise BudgetExceeded(f"lattice did not stabilize within {budget.max_passes} passes")
        extra = []
        for row in lattice.pivots.values():
            p = {monos[k]: c for k, c in row.items()}
            for k in range(pc.ngens):
                q = alg.poly_times_gen(p, k)
                if q:
                    extra.append(vec(q))
        passes += 1
        if not lattice.extend(extra):
            break
    am = AugModule(pc, n, monos, index, lattice, [], passes, alg)
    am.layers = _layers(am)
    return am


def _layers(am: AugModule) -> list[tuple[int, ...]]:
    """Invariants of I^k / I^{k+1} for k = 0..cap-1 (0 marks a Z summand)."""
    degs = [am.degree(k) for k in range(len(am.monomials))]
    rows = am.lattice.hnf_rows()
    out = []
    for d in range(am.cap):
        cols = [k for k, x in enumerate(degs) if x == d]
        pos = {c: t for t, c in enumerate(cols)}
        block = [[0] * len(cols) for _ in rows if degs[_[0]] == d]
        t = 0
        for piv, r in rows:
            if degs[piv] != d:
                continue
            for c, x in r.items():
                if c in pos:
                    block[t][pos[c]] = x
            t += 1
        divs = elementary_divisors(IntMatrix(block, len(cols))) if block else []
        torsion = sorted(x for x in divs if x > 1)
        free = len(cols) - len(divs)
        out.append(tuple(torsion) + (0,) * free)
    return out


def expand(am: AugModule, g: PcElement) -> dict[int, int]:
    """Coordinates of g in ZQ / I^n (sparse: monomial index -> coefficient)."""
    return am.vector(am.algebra.expansion(g.support()))


def is_in_delta(am: AugModule, g: PcElement) -> tuple[bool, dict[int, int] | None]:
    """Whether g - 1 lies in I^n; the certificate gives coefficients on the HNF rows (by pivot)."""
    v = expand(am, g)
    v[0] = v.get(0, 0) - 1
    if not v[0]:
        del v[0]
    cert = am.lattice.coordinates(v)
    return cert is not None, cert


@dataclass
class DeltaReport:
    group: str
    word: str
    n: int
    in_delta: bool | None
    in_gamma: bool | None
    certificate: dict[int, int] | None
    layers: list[tuple[int, ...]]
    budget: dict
    nq_summary: dict
    monomials: int | None = None

    @property
    def complete(self) -> bool:
        return self.in_delta is not None

    def to_json(self) -> dict:
        return {
            "group": self.group,
            "word": self.word,
            "n": self.n,
            "in_delta": self.in_delta,
            "in_gamma": self.in_gamma,
            "certificate": None if self.certificate is None
            else [[k, c] for k, c in sorted(self.certificate.items())],
            "layers": [list(x) for x in self.layers],
            "monomials": self.monomials,
            "quotient": self.nq_summary,
            "budget": self.budget,
        }


def delta_report(pres: GroupPresentation, word: Expr, n: int, group: str = "",
                 nq_budget: NqBudget | None = None, aug_budget: AugBudget | None = None) -> DeltaReport:
    """Decide g in delta_n and g in gamma_n for the image of ``word`` in ``pres / gamma_n``."""
    if n < 2:
        raise ValueError("n must be at least 2")
    nq_budget = nq_budget or NqBudget()
    aug_budget = aug_budget or AugBudget()
    budget = {"nq_seconds": nq_budget.seconds, "nq_max_generators": nq_budget.max_generators,
              "nq_max_tails": nq_budget.max_tails, "max_monomials": aug_budget.max_monomials,
              "max_rows": aug_budget.max_rows, "exhausted": None}
    q = nilpotent_quotient(pres, n - 1, nq_budget)
    if not q.complete:
        budget["exhausted"] = q.budget_note
        return DeltaReport(group, str(word), n, None, None, None, [], budget, q.summary())
    img = evaluate(q.pc, q.images, word)
    in_gamma = is_in_subgroup(gamma_basis(q, n), img)
    try:
        am = aug_quotient(q.pc, n, aug_budget, trusted_weights=True)
    except BudgetExceeded as exc:
        budget["exhausted"] = str(exc)
        return DeltaReport(group, str(word), n, None, in_gamma, None, [], budget, q.summary())
    ok, cert = is_in_delta(am, img)
    return DeltaReport(group, str(word), n, ok, in_gamma, cert, am.layers, budget, q.summary(),
                       len(am.monomials))
