"""Free Lie ring over Z with a Hall basis of basic commutators.

A basic commutator is either a generator index (int, 0-based) or a pair
``(u, v)`` of basic commutators standing for ``[u, v]``.  The Hall order sorts
by weight first and then lexicographically on ``(left, right)``; ``[u, v]`` is
basic when ``u > v`` and, if ``u = [a, b]``, also ``b <= v``.  With generators
``x1 < x2`` the weight-2 basis of rank 2 is ``[x2, x1]``.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence, Union

from sympy import divisors, mobius

from .core import Comm, Expr, Gen, GroupPresentation, Power, Prod, Word, paper_fixture
from .zlinalg import IntMatrix, hnf, lattice_membership

__all__ = [
    "Basic", "LieElement", "hall_basis", "witt_dimension", "weight", "hall_key",
    "bracket", "lie_normal_form", "NonHomogeneous", "LieCheckReport", "weight3_check",
    "format_basic",
]

Basic = Union[int, tuple]


class NonHomogeneous(ValueError):
    pass


def weight(h: Basic) -> int:
    if isinstance(h, int):
        return 1
    return weight(h[0]) + weight(h[1])


@lru_cache(maxsize=None)
def hall_key(h: Basic) -> tuple:
    if isinstance(h, int):
        return (1, h)
    return (weight(h), hall_key(h[0]), hall_key(h[1]))


def _is_basic_pair(u: Basic, v: Basic) -> bool:
    if hall_key(u) <= hall_key(v):
        return False
    return isinstance(u, int) or hall_key(u[1]) <= hall_key(v)


@lru_cache(maxsize=None)
def hall_basis(k: int, n: int) -> tuple[Basic, ...]:
    """Basic commutators of weight ``n`` on ``k`` generators, in Hall order."""
    if k < 1 or n < 1:
        raise ValueError("rank and weight must be positive")
    if n == 1:
        return tuple(range(k))
    out = []
    for a in range(1, n):
        for u in hall_basis(k, a):
            for v in hall_basis(k, n - a):
                if _is_basic_pair(u, v):
                    out.append((u, v))
    return tuple(sorted(out, key=hall_key))


def witt_dimension(k: int, n: int) -> int:
    return sum(mobius(d) * k ** (n // d) for d in divisors(n)) // n


def format_basic(h: Basic, names: Sequence[str] | None = None) -> str:
    if isinstance(h, int):
        return names[h] if names else f"x{h + 1}"
    return f"[{format_basic(h[0], names)},{format_basic(h[1], names)}]"


@dataclass(frozen=True)
class LieElement:
    weight: int
    coords: tuple[tuple[Basic, int], ...]  # sorted by Hall order, nonzero only

    @classmethod
    def from_dict(cls, w: int, d: dict) -> "LieElement":
        items = sorted(((h, c) for h, c in d.items() if c), key=lambda hc: hall_key(hc[0]))
        return cls(w, tuple(items))

    def as_dict(self) -> dict:
        return dict(self.coords)

    def vector(self, k: int) -> list[int]:
        d = self.as_dict()
        return [d.get(h, 0) for h in hall_basis(k, self.weight)]

    def __add__(self, other: "LieElement") -> "LieElement":
        if not self.coords:
            return other
        if not other.coords:
            return self
        if self.weight != other.weight:
            raise NonHomogeneous(f"weights {self.weight} and {other.weight}")
        d = self.as_dict()
        for h, c in other.coords:
            d[h] = d.get(h, 0) + c
        return LieElement.from_dict(self.weight, d)

    def scale(self, c: int) -> "LieElement":
        return LieElement.from_dict(self.weight, {h: c * x for h, x in self.coords})

    def __neg__(self):
        return self.scale(-1)

    def is_zero(self) -> bool:
        return not self.coords


def _add_into(d: dict, other: dict, c: int = 1):
    for h, x in other.items():
        y = d.get(h, 0) + c * x
        if y:
            d[h] = y
        else:
            d.pop(h, None)


@lru_cache(maxsize=None)
def _bracket_basic(u: Basic, v: Basic) -> tuple:
    """[u, v] for basic u, v as a tuple of (basic, coefficient)."""
    if u == v:
        return ()
    if hall_key(u) < hall_key(v):
        return tuple((h, -c) for h, c in _bracket_basic(v, u))
    if _is_basic_pair(u, v):
        return (((u, v), 1),)
    a, b = u
    # Jacobi: [[a,b],v] = [[a,v],b] - [[b,v],a]
    out: dict = {}
    for h, c in _bracket_basic(a, v):
        _add_into(out, dict(_bracket_basic(h, b)), c)
    for h, c in _bracket_basic(b, v):
        _add_into(out, dict(_bracket_basic(h, a)), -c)
    return tuple(out.items())


def bracket(x: LieElement, y: LieElement) -> LieElement:
    out: dict = {}
    for u, a in x.coords:
        for v, b in y.coords:
            _add_into(out, dict(_bracket_basic(u, v)), a * b)
    return LieElement.from_dict(x.weight + y.weight, out)


def _zero() -> LieElement:
    return LieElement(0, ())


def lie_normal_form(expr: Expr) -> LieElement:
    """Hall coordinates of a homogeneous bracket expression.

    Brackets are read as Lie brackets, products as sums and powers as integer
    multiples, which is how a group element of the n-th lower central term
    maps into the n-th graded quotient.
    """
    if isinstance(expr, Gen):
        return LieElement(1, ((expr.gen.index, 1),))
    if isinstance(expr, Word):
        out: dict = {}
        for g, e in expr.syllables:
            _add_into(out, {g.index: e})
        return LieElement.from_dict(1, out) if expr.syllables else _zero()
    if isinstance(expr, Power):
        return lie_normal_form(expr.base).scale(expr.exponent)
    if isinstance(expr, Prod):
        result = _zero()
        weights = set()
        for f in expr.factors:
            part = lie_normal_form(f)
            if part.weight:
                weights.add(part.weight)
            if len(weights) > 1:
                raise NonHomogeneous(f"factors of weights {sorted(weights)}")
            if part.weight:
                result = result + part if result.weight else part
        return result
    if isinstance(expr, Comm):
        result = lie_normal_form(expr.args[0])
        for a in expr.args[1:]:
            result = bracket(result, lie_normal_form(a))
        return result
    raise TypeError(f"cannot read {expr!r} as a Lie element")


# ---------------------------------------------------------------------------
# the weight-3 lattice computation


@dataclass
class LieCheckReport:
    rank: int
    basis: list[str]
    w_generators: list[str]
    matrix: list[list[int]]
    hnf: list[list[int]]
    hnf_pivots: list[int]
    w_vector: list[int]
    w_in_W: bool
    w_certificate: list[int] | None
    w3_in_W: bool
    w3_certificate: list[int] | None
    first_generator_certificate: list[int] | None

    @property
    def passed(self) -> bool:
        return self.rank == 20 and not self.w_in_W and self.w3_in_W

    def to_json(self) -> dict:
        return {
            "basis_size": self.rank,
            "basis": self.basis,
            "W_generators": self.w_generators,
            "W_matrix": self.matrix,
            "W_hnf": self.hnf,
            "W_hnf_pivots": self.hnf_pivots,
            "w_coordinates": self.w_vector,
            "w_in_W": self.w_in_W,
            "w_certificate": self.w_certificate,
            "3w_in_W": self.w3_in_W,
            "3w_certificate": self.w3_certificate,
            "first_generator_certificate": self.first_generator_certificate,
            "passed": self.passed,
        }


def w_generators(pres: GroupPresentation) -> list[Comm]:
    """[r, x_k, x_l] and [x_k, x_l, r] for each mixed relator r, {k, l} the complementary pair."""
    xs = [pres.generator(f"x{i}") for i in range(1, 5)]
    out = []
    for lhs, _ in pres.relations[4:8]:
        used = {g.index for g in lhs.generators()}
        k, l = [Gen(g) for g in xs if g.index not in used]
        out.append(Comm((lhs, k, l)))
        out.append(Comm((k, l, lhs)))
    return out


def weight3_check(pres: GroupPresentation | None = None, w: Expr | None = None) -> LieCheckReport:
    fx = None
    if pres is None or w is None:
        fx = paper_fixture()
    pres = pres or fx.G
    w = w or fx.w_x
    rank_gens = 4
    basis = hall_basis(rank_gens, 3)
    gens = w_generators(pres)
    names = pres.names
    matrix = [lie_normal_form(g).vector(rank_gens) for g in gens]
    w_lie = lie_normal_form(w)
    if w_lie.weight != 3:
        raise NonHomogeneous(f"witness has weight {w_lie.weight}, expected 3")
    w_vec = w_lie.vector(rank_gens)
    res = hnf(IntMatrix(matrix, len(basis)))
    cert_w = lattice_membership(w_vec, matrix)
    cert_3w = lattice_membership([3 * x for x in w_vec], matrix)
    cert_first = lattice_membership(matrix[0], matrix)
    return LieCheckReport(
        rank=len(basis),
        basis=[format_basic(h, names) for h in basis],
        w_generators=[str(g) for g in gens],
        matrix=matrix,
        hnf=res.H.tolist()[:res.rank],
        hnf_pivots=list(res.pivots),
        w_vector=w_vec,
        w_in_W=cert_w is not None,
        w_certificate=cert_w,
        w3_in_W=cert_3w is not None,
        w3_certificate=cert_3w,
        first_generator_certificate=cert_first,
    )
