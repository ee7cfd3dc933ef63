"""Independent models used as test oracles.

Finite groups are given by explicit multiplication on tuples (no collector),
their integral group rings by the regular representation.
"""
from __future__ import annotations

from itertools import product

from dimq.zlinalg import IntMatrix, elementary_divisors, hnf, lattice_membership


class FiniteGroup:
    def __init__(self, elements, mul, one, pc_images):
        self.elements = list(elements)
        self.index = {g: i for i, g in enumerate(self.elements)}
        self.mul = mul
        self.one = one
        self.pc_images = pc_images  # image of each pc generator

    def from_exponents(self, exps):
        g = self.one
        for img, e in zip(self.pc_images, exps):
            for _ in range(e):
                g = self.mul(g, img)
        return g


def cyclic_group(n):
    return FiniteGroup(range(n), lambda a, b: (a + b) % n, 0, [1])


def z9_as_pc():
    # pc generators a (order 3 relative) and c = a^3
    return FiniteGroup(range(9), lambda a, b: (a + b) % 9, 0, [1, 3])


def z3xz3():
    els = list(product(range(3), repeat=2))
    return FiniteGroup(els, lambda x, y: ((x[0] + y[0]) % 3, (x[1] + y[1]) % 3), (0, 0), [(1, 0), (0, 1)])


def extraspecial27():
    # upper unitriangular 3x3 matrices over F_3: (a, b, c) ~ [[1,a,c],[0,1,b],[0,0,1]]
    def mul(x, y):
        return ((x[0] + y[0]) % 3, (x[1] + y[1]) % 3, (x[2] + y[2] + x[0] * y[1]) % 3)

    els = list(product(range(3), repeat=3))
    a, b = (1, 0, 0), (0, 1, 0)

    def inv(x):
        return ((-x[0]) % 3, (-x[1]) % 3, (x[0] * x[1] - x[2]) % 3)

    c = mul(mul(inv(b), inv(a)), mul(b, a))  # [b, a]
    return FiniteGroup(els, mul, (0, 0, 0), [a, b, c])


def _times(G: FiniteGroup, x: list[int], g) -> list[int]:
    """x * g in the group ring, x as a coefficient vector."""
    out = [0] * len(G.elements)
    for i, c in enumerate(x):
        if c:
            out[G.index[G.mul(G.elements[i], g)]] += c
    return out


def augmentation_powers(G: FiniteGroup, n: int) -> list[list[list[int]]]:
    """HNF bases of I^0 = ZG, I^1, ..., I^n via the regular representation."""
    N = len(G.elements)
    e1 = [0] * N
    e1[G.index[G.one]] = 1
    unit = [[int(i == j) for j in range(N)] for i in range(N)]
    omega = []
    for g in G.elements:
        v = [0] * N
        v[G.index[g]] += 1
        v[G.index[G.one]] -= 1
        omega.append(v)
    bases = [unit]
    cur = omega
    for k in range(1, n + 1):
        res = hnf(IntMatrix(cur, N))
        basis = res.H.tolist()[:res.rank]
        bases.append(basis)
        nxt = []
        for x in basis:
            for g in G.elements:
                gx = _times(G, x, g)
                nxt.append([a - b for a, b in zip(gx, x)])
        cur = nxt
    return bases


def layer_invariants(bases, k) -> tuple[int, ...]:
    upper, lower = bases[k], bases[k + 1]
    coords = [lattice_membership(v, upper) for v in lower]
    assert all(c is not None for c in coords)
    divs = elementary_divisors(IntMatrix(coords, len(upper))) if coords else []
    nz = [d for d in divs if d]
    torsion = sorted(d for d in nz if d > 1)
    return tuple(torsion) + (0,) * (len(upper) - len(nz))


def in_delta(G: FiniteGroup, bases, n, g) -> bool:
    N = len(G.elements)
    v = [0] * N
    v[G.index[g]] += 1
    v[G.index[G.one]] -= 1
    return lattice_membership(v, bases[n]) is not None if bases[n] else not any(v)


# ---------------------------------------------------------------------------
# letter-by-letter Magnus expansion with plain dict arithmetic


def magnus_letters(letters, cap):
    """Expand a word given as a list of (index, +1|-1) into {monomial: coef} below ``cap``."""
    poly = {(): 1}
    for i, s in letters:
        if s == 1:
            factor = {(): 1, (i,): 1}
        else:
            factor = {(i,) * k: (-1) ** k for k in range(cap)}
        out = {}
        for m, a in poly.items():
            for f, b in factor.items():
                if len(m) + len(f) < cap:
                    out[m + f] = out.get(m + f, 0) + a * b
        poly = {m: c for m, c in out.items() if c}
    return poly


def word_letters(word):
    out = []
    for g, e in word.syllables:
        out += [(g.index, 1 if e > 0 else -1)] * abs(e)
    return out
