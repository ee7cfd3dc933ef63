"""Truncated noncommutative polynomials over Z, the Magnus embedding, and the
mechanical replay of the congruence argument showing ``w - 1`` vanishes modulo
the 7th power of the augmentation ideal.

A monomial is a tuple of generator indices; ``X_i`` stands for ``x_i - 1``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from math import comb
from typing import Iterable, Mapping, Sequence

from .core import (
    Comm, Expr, GeneratorId, GroupOps, GroupPresentation, Power, Prod, Gen,
    paper_fixture,
)

__all__ = [
    "NcPoly", "CapMismatch", "MagnusOps", "nc_add", "nc_mul", "magnus_embed",
    "lowest_degree", "verify_binomial_identity", "ReplayData", "ReplayReport",
    "section1_data", "replay_section1",
]


class CapMismatch(ValueError):
    pass


class NcPoly:
    """Integer noncommutative polynomial with every monomial of length < ``cap``."""

    __slots__ = ("cap", "terms")

    def __init__(self, cap: int, terms: Mapping[tuple[int, ...], int] | None = None):
        if cap < 1:
            raise ValueError("cap must be at least 1")
        self.cap = cap
        self.terms = {m: c for m, c in (terms or {}).items() if c and len(m) < cap}

    @classmethod
    def one(cls, cap: int) -> "NcPoly":
        return cls(cap, {(): 1})

    @classmethod
    def var(cls, i: int, cap: int) -> "NcPoly":
        return cls(cap, {(i,): 1})

    def _check(self, other: "NcPoly"):
        if self.cap != other.cap:
            raise CapMismatch(f"cap {self.cap} vs {other.cap}")

    def __add__(self, other: "NcPoly") -> "NcPoly":
        self._check(other)
        out = dict(self.terms)
        for m, c in other.terms.items():
            out[m] = out.get(m, 0) + c
        return NcPoly(self.cap, out)

    def __neg__(self) -> "NcPoly":
        return NcPoly(self.cap, {m: -c for m, c in self.terms.items()})

    def __sub__(self, other: "NcPoly") -> "NcPoly":
        return self + (-other)

    def scale(self, k: int) -> "NcPoly":
        return NcPoly(self.cap, {m: k * c for m, c in self.terms.items()})

    def __rmul__(self, k: int) -> "NcPoly":
        return self.scale(k)

    def __mul__(self, other):
        if isinstance(other, int):
            return self.scale(other)
        self._check(other)
        cap = self.cap
        out: dict[tuple[int, ...], int] = {}
        for m1, c1 in self.terms.items():
            room = cap - len(m1)
            for m2, c2 in other.terms.items():
                if len(m2) < room:
                    m = m1 + m2
                    out[m] = out.get(m, 0) + c1 * c2
        return NcPoly(cap, out)

    def __pow__(self, n: int) -> "NcPoly":
        return MagnusOps(self.cap).pow(self, n)

    def __eq__(self, other) -> bool:
        if not isinstance(other, NcPoly):
            return NotImplemented
        return self.cap == other.cap and self.terms == other.terms

    def __hash__(self):
        return hash((self.cap, frozenset(self.terms.items())))

    def is_zero(self) -> bool:
        return not self.terms

    def constant(self) -> int:
        return self.terms.get((), 0)

    def component(self, degree: int) -> "NcPoly":
        return NcPoly(self.cap, {m: c for m, c in self.terms.items() if len(m) == degree})

    def inverse(self) -> "NcPoly":
        """Inverse of a unit ``+-1 + q`` as the truncated geometric series."""
        c0 = self.constant()
        if c0 not in (1, -1):
            raise ValueError("only polynomials with constant term +-1 are invertible")
        q = (self.scale(c0)) - NcPoly.one(self.cap)  # self * c0 = 1 + q
        result, term = NcPoly.one(self.cap), NcPoly.one(self.cap)
        for _ in range(1, self.cap):
            term = term * (-q)
            result = result + term
        return result.scale(c0)

    def format(self, names: Sequence[str] | None = None) -> str:
        if not self.terms:
            return "0"
        parts = []
        for m in sorted(self.terms, key=lambda m: (len(m), m)):
            c = self.terms[m]
            mono = "*".join(f"X{i + 1}" if names is None else f"X[{names[i]}]" for i in m) or "1"
            parts.append(f"{c:+d}" + ("" if mono == "1" else f"*{mono}") if mono != "1" else f"{c:+d}")
        return " ".join(parts)

    def __repr__(self) -> str:
        return f"NcPoly(cap={self.cap}, {self.format()})"


def nc_add(p: NcPoly, q: NcPoly) -> NcPoly:
    return p + q


def nc_mul(p: NcPoly, q: NcPoly) -> NcPoly:
    return p * q


class MagnusOps(GroupOps):
    """Group arithmetic in the unit group of the truncated ring, ``x_i -> 1 + X_i``."""

    def __init__(self, cap: int):
        self.cap = cap

    def one(self):
        return NcPoly.one(self.cap)

    def gen(self, g: GeneratorId | int):
        i = g.index if isinstance(g, GeneratorId) else g
        return NcPoly(self.cap, {(): 1, (i,): 1})

    def mul(self, a, b):
        return a * b

    def inv(self, a):
        return a.inverse()


def magnus_embed(word: Expr, cap: int) -> NcPoly:
    return word.evaluate(MagnusOps(cap))


def lowest_degree(p: NcPoly) -> tuple[int, NcPoly] | None:
    if not p.terms:
        return None
    d = min(len(m) for m in p.terms)
    return d, p.component(d)


def verify_binomial_identity(d: int, cap: int) -> bool:
    """x^d - 1 against sum_k C(d,k) (x-1)^k in one variable, truncated at ``cap``."""
    if d < 1:
        raise ValueError("d must be positive")
    x = NcPoly(cap, {(): 1, (0,): 1})
    lhs = (x ** d) - NcPoly.one(cap)
    rhs = NcPoly(cap, {(0,) * k: comb(d, k) for k in range(1, min(d, cap - 1) + 1)})
    return lhs == rhs


# ---------------------------------------------------------------------------
# replay of the congruence proof


@dataclass(frozen=True)
class Binomial:
    """One of the eight grouped binomials, with the data of its printed reduction.

    ``factors`` lists the three factors left to right; exactly one of them is the
    ``"mix"`` slot holding ``((coef, gen), (coef, gen))``, the others are
    generator numbers 1..4.  ``relation`` is the index (0-based) of the mixed
    relation of G whose left side the mix slot collapses to.
    """

    name: str
    sign: int
    factors: tuple
    relation: int


@dataclass(frozen=True)
class ReplayData:
    cap: int = 7
    # (power of 3, (a, b, c)) meaning 3^k ([x_a, x_b, x_c] - 1)
    t_terms: tuple = ((9, (1, 2, 3)), (10, (1, 4, 2)), (11, (1, 4, 3)), (12, (2, 4, 3)))
    # the grouped binomials as printed: (sign, ((3-power, monomial), (3-power, monomial)))
    e_terms: tuple = (
        (+1, ((9, (1, 2, 3)), (11, (1, 4, 3)))),
        (+1, ((10, (1, 4, 2)), (12, (3, 4, 2)))),
        (+1, ((12, (2, 4, 3)), (10, (2, 4, 1)))),
        (+1, ((9, (3, 2, 1)), (11, (3, 4, 1)))),
        (-1, ((9, (2, 1, 3)), (10, (2, 1, 4)))),
        (-1, ((9, (3, 1, 2)), (10, (4, 1, 2)))),
        (-1, ((11, (4, 1, 3)), (12, (4, 2, 3)))),
        (-1, ((11, (3, 1, 4)), (12, (3, 2, 4)))),
    )
    # factored forms: position of the varying slot in the monomial and the relation used
    # (relations numbered 0..7 as in G; the mixed ones are 4..7)
    binomials: tuple = (
        ("e1", 1, 6), ("e2", 0, 5), ("e3", 2, 5), ("e4", 1, 6),
        ("e5", 2, 7), ("e6", 0, 7), ("e7", 1, 4), ("e8", 1, 4),
    )
    presentation: GroupPresentation | None = None


def section1_data(**overrides) -> ReplayData:
    data = ReplayData(**overrides)
    if data.presentation is None:
        object.__setattr__(data, "presentation", paper_fixture().G)
    return data


@dataclass
class ReplayReport:
    t_forms_check: bool = False
    expansion_check: bool = False
    binomial_checks: dict[str, bool] = field(default_factory=dict)
    weight_checks: dict[str, int] = field(default_factory=dict)
    details: dict[str, object] = field(default_factory=dict)

    @property
    def checks(self) -> dict[str, bool]:
        out = {"t_forms": self.t_forms_check, "expansion": self.expansion_check}
        out.update(self.binomial_checks)
        return out

    @property
    def passed(self) -> bool:
        return all(self.checks.values()) and len(self.binomial_checks) == 8

    def to_json(self) -> dict:
        return {
            "checks": {k: {"pass": v, "residual_terms": _residual_count(self.details.get(k))}
                       for k, v in self.checks.items()},
            "weights": dict(self.weight_checks),
            "passed": self.passed,
            "details": {k: v for k, v in self.details.items() if v},
        }


def _residual_count(detail) -> int:
    if isinstance(detail, dict):
        return int(detail.get("residual_terms", 0))
    return 0


def _mono(cap: int, coef: int, letters: Iterable[int]) -> NcPoly:
    return NcPoly(cap, {tuple(i - 1 for i in letters): coef})


def _x(i: int, cap: int) -> NcPoly:
    return NcPoly.var(i - 1, cap)


def _leading_commutator_form(a: int, b: int, c: int, cap: int) -> NcPoly:
    """Printed four-term form (XaXbXc - XbXaXc - XcXaXb + XcXbXa)."""
    return (_mono(cap, 1, (a, b, c)) - _mono(cap, 1, (b, a, c))
            - _mono(cap, 1, (c, a, b)) + _mono(cap, 1, (c, b, a)))


def _relation_parts(pres: GroupPresentation, k: int):
    """For a mixed relation ``x_a^p * x_b^q = [..]^s`` return ({a: p, b: q}, s, base)."""
    lhs, rhs = pres.relations[k]
    powers = {}
    for f in (lhs.factors if isinstance(lhs, Prod) else (lhs,)):
        if not (isinstance(f, Power) and isinstance(f.base, Gen)):
            raise ValueError(f"relation {k} left side is not a product of generator powers")
        powers[int(f.base.gen.name[1:])] = f.exponent
    if isinstance(rhs, Power):
        return powers, rhs.exponent, rhs.base
    return powers, 1, rhs


def _x_relation(pres: GroupPresentation, i: int):
    """Exponent e and right side of the relation ``x_i^e = [y_i, y_i']``."""
    lhs, rhs = pres.relations[i - 1]
    if isinstance(lhs, Gen):
        e = 1
    elif isinstance(lhs, Power) and isinstance(lhs.base, Gen):
        e = lhs.exponent
    else:
        raise ValueError(f"relation {i - 1} is not a power of x{i}")
    return e, rhs


def _weight(expr: Expr) -> int:
    """Commutator length of a bracket of generators (1 for a generator)."""
    if isinstance(expr, Comm):
        return sum(_weight(a) for a in expr.args)
    if isinstance(expr, Gen):
        return 1
    raise ValueError(f"not a bracket of generators: {expr}")


def replay_section1(data: ReplayData | None = None) -> ReplayReport:
    """Check the printed proof step by step; failures are recorded, never raised."""
    data = data or section1_data()
    pres = data.presentation
    cap = data.cap
    rep = ReplayReport()

    # (t1)-(t4): the printed four-term forms are the leading parts of the commutators
    t_sum = NcPoly(cap)
    t_residual = NcPoly(cap)
    for k, (a, b, c) in data.t_terms:
        printed = _leading_commutator_form(a, b, c, cap)
        comm = Comm((Gen(pres.alphabet[a - 1]), Gen(pres.alphabet[b - 1]), Gen(pres.alphabet[c - 1])))
        lead = lowest_degree(magnus_embed(comm, cap) - NcPoly.one(cap))
        t_residual = t_residual + (lead[1] - printed if lead and lead[0] == 3 else printed)
        t_sum = t_sum + printed.scale(3 ** k)
    rep.t_forms_check = t_residual.is_zero()
    rep.details["t_forms"] = {"residual_terms": len(t_residual.terms)}

    # the 16 monomials regroup into the eight binomials
    e_sum = NcPoly(cap)
    for sign, pair in data.e_terms:
        for k, mono in pair:
            e_sum = e_sum + _mono(cap, sign * 3 ** k, mono)
    residual = t_sum - e_sum
    n_monomials = sum(len(pair) for _, pair in data.e_terms)
    rep.expansion_check = residual.is_zero() and len(t_sum.terms) == 16 and n_monomials == 16
    rep.details["expansion"] = {"residual_terms": len(residual.terms),
                                "residual": residual.format() if residual.terms else ""}

    x_exp = {}
    x_rhs = {}
    for i in range(1, 5):
        x_exp[i], x_rhs[i] = _x_relation(pres, i)

    for (name, slot, rel), (sign, pair) in zip(data.binomials, data.e_terms):
        problems = []
        monos = [m for _, m in pair]
        fixed = [monos[0][p] for p in range(3) if p != slot]
        if any([m[p] for p in range(3) if p != slot] != fixed for m in monos):
            problems.append("the two monomials do not share the fixed factors")
        varying = [(3 ** k, m[slot]) for k, m in pair]
        # factorization: binomial = L * (c1 X_a + c2 X_b) * R
        middle = NcPoly(cap)
        for coef, g in varying:
            middle = middle + _x(g, cap).scale(coef)
        factors = [_x(g, cap) for g in fixed]
        factors.insert(slot, middle)
        product = factors[0] * factors[1] * factors[2]
        binom = NcPoly(cap)
        for k, m in pair:
            binom = binom + _mono(cap, 3 ** k, m)
        if product != binom:
            problems.append("factored form does not multiply out to the binomial")
        # scalar-to-exponent transfer: every coefficient absorbs the abelianized
        # exponents of all three letters of its monomial
        for coef, g in varying:
            need = x_exp[g]
            for f in fixed:
                need *= x_exp[f]
            if coef % need:
                problems.append(f"3-power {coef} not divisible by exponent product {need}")
        # relation substitution: the mix slot is the left side of relation ``rel``
        try:
            powers, rhs_power, rhs_base = _relation_parts(pres, rel)
        except (ValueError, IndexError) as exc:
            problems.append(str(exc))
            powers, rhs_power, rhs_base = {}, 0, None
        if powers != {g: coef for coef, g in varying}:
            problems.append(f"mix slot {varying} does not match relation {rel} left side {powers}")
        # the power on the relation's right side is split exactly onto the two
        # fixed factors, turning each into its own relation's left side
        need = 1
        for f in fixed:
            need *= x_exp[f]
        if rhs_power != need:
            problems.append(f"right-side power {rhs_power} is not the fixed exponent product {need}")
        # weight-based vanishing of ([y,y']-1)([y,y',y'']-1)([y,y']-1) at the cap
        weight = 0
        if rhs_base is not None:
            pieces = [x_rhs[f] for f in fixed]
            pieces.insert(slot, rhs_base)
            try:
                weight = sum(_weight(p) for p in pieces)
            except ValueError as exc:
                problems.append(str(exc))
            polys = [magnus_embed(p, cap) - NcPoly.one(cap) for p in pieces]
            vanishing = polys[0] * polys[1] * polys[2]
            if not vanishing.is_zero():
                problems.append(f"product of relation differences has {len(vanishing.terms)} terms below degree {cap}")
        if weight < cap:
            problems.append(f"weight sum {weight} < {cap}")
        rep.weight_checks[name] = weight
        rep.binomial_checks[name] = not problems
        rep.details[name] = {"residual_terms": len(problems), "problems": problems} if problems else {}
    return rep
