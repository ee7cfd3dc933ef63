"""Weighted polycyclic presentations: collection, consistency, lower central series.

Generators are numbered ``0..m-1``.  Relations are stored as

* power relations ``a_i^{m_i} = power_tails[i]`` for finite relative order ``m_i``;
* commutator relations ``[a_j, a_i] = commutator_tails[(j, i)]`` for ``j > i``,
  with ``[u, v] = u^-1 v^-1 u v``; equivalently ``a_j^{a_i} = a_j * tail`` and
  ``a_j a_i = a_i a_j [a_j, a_i]``.  Missing entries mean trivial tails.

Tails are normal words over generators strictly after ``i`` (powers) or ``j``
(commutators).  Elements are exponent vectors; internally the collector works
on sparse ``{index: exponent}`` dicts.

Multiplying a normal word by ``a_i^e`` moves the power across the suffix in one
step using the automorphism "conjugate by ``a_i^e``", built from cached images
of ``a_i^{+-2^k}``, so exponents like ``3^12`` cost a logarithmic number of
multiplications rather than a letter-by-letter collection.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .core import Expr, GeneratorId, GroupOps, GroupPresentation, Word

__all__ = [
    "PcPresentation", "PcElement", "SubgroupBasis", "ConsistencyReport", "VerifyReport",
    "MalformedPc", "MalformedTail", "InconsistentPresentation", "MissingImage",
    "collect", "check_consistency", "evaluate", "lcs", "is_in_subgroup", "subgroup_closure",
    "import_pc", "export_pc", "verify_relations", "PcOps", "heisenberg", "cyclic",
]


class MalformedPc(ValueError):
    pass


class MalformedTail(MalformedPc):
    pass


class InconsistentPresentation(ValueError):
    pass


class MissingImage(KeyError):
    pass


def _clean(d: Mapping[int, int]) -> dict[int, int]:
    return {int(k): int(v) for k, v in d.items() if v}


@dataclass(frozen=True)
class PcElement:
    exponents: tuple[int, ...]

    def is_identity(self) -> bool:
        return not any(self.exponents)

    def support(self) -> dict[int, int]:
        return {i: e for i, e in enumerate(self.exponents) if e}

    def leading(self) -> int | None:
        return next((i for i, e in enumerate(self.exponents) if e), None)

    def __len__(self):
        return len(self.exponents)


class PcPresentation:
    """Immutable weighted pc presentation with an attached collector."""

    def __init__(self, ngens: int, weights: Sequence[int] | None, orders: Sequence[int | None],
                 power_tails: Mapping[int, Mapping[int, int]] | None = None,
                 commutator_tails: Mapping[tuple[int, int], Mapping[int, int]] | None = None,
                 names: Sequence[str] | None = None, check_weights: bool = True):
        self.ngens = int(ngens)
        # without weight information every generator gets weight 1 and the
        # weight-bounded shortcuts (consistency, lcs) are switched off
        self.weighted = weights is not None and check_weights
        if weights is None:
            weights, check_weights = [1] * self.ngens, False
        self.weights = tuple(int(w) for w in weights)
        self.orders = tuple(None if o is None else int(o) for o in orders)
        self.names = tuple(names) if names is not None else tuple(f"a{i + 1}" for i in range(self.ngens))
        if len(self.weights) != self.ngens or len(self.orders) != self.ngens or len(self.names) != self.ngens:
            raise MalformedPc("weights, orders and names must have one entry per generator")
        if any(w < 1 for w in self.weights) or any(b < a for a, b in zip(self.weights, self.weights[1:])):
            raise MalformedPc("weights must be positive and nondecreasing")
        if any(o is not None and o < 2 for o in self.orders):
            raise MalformedPc("relative orders must be at least 2")
        self.power_tails: dict[int, dict[int, int]] = {}
        for i, t in (power_tails or {}).items():
            i = int(i)
            if self.orders[i] is None:
                raise MalformedTail(f"power tail given for infinite generator {i}")
            t = _clean(t)
            if any(k <= i or k >= self.ngens for k in t):
                raise MalformedTail(f"power tail of generator {i} must involve later generators only")
            if t:
                self.power_tails[i] = t
        self.commutator_tails: dict[tuple[int, int], dict[int, int]] = {}
        for (j, i), t in (commutator_tails or {}).items():
            j, i = int(j), int(i)
            if not 0 <= i < j < self.ngens:
                raise MalformedTail(f"commutator tail key ({j},{i}) needs j > i")
            t = _clean(t)
            if any(k <= j or k >= self.ngens for k in t):
                raise MalformedTail(f"tail of [a{j + 1},a{i + 1}] must involve generators after a{j + 1}")
            if check_weights and any(self.weights[k] < self.weights[i] + self.weights[j] for k in t):
                raise MalformedTail(f"tail of [a{j + 1},a{i + 1}] has entries of too small weight")
            if t:
                self.commutator_tails[(j, i)] = t
        for i, t in self.power_tails.items():
            for k, e in t.items():
                o = self.orders[k]
                if o is not None and not 0 <= e < o:
                    raise MalformedTail(f"power tail of generator {i} is not in normal form")
        for key, t in self.commutator_tails.items():
            for k, e in t.items():
                o = self.orders[k]
                if o is not None and not 0 <= e < o:
                    raise MalformedTail(f"commutator tail {key} is not in normal form")
        self._collector: Collector | None = None

    # -- convenience -------------------------------------------------------
    @property
    def collector(self) -> "Collector":
        if self._collector is None:
            self._collector = Collector(self)
        return self._collector

    @property
    def class_(self) -> int:
        return max(self.weights, default=0)

    def identity(self) -> PcElement:
        return PcElement((0,) * self.ngens)

    def element(self, d: Mapping[int, int]) -> PcElement:
        e = [0] * self.ngens
        for k, v in d.items():
            e[k] = v
        return PcElement(tuple(e))

    def gen(self, i: int, e: int = 1) -> PcElement:
        return self.element(self.collector.mul_gen({}, i, e))

    def mul(self, a: PcElement, b: PcElement) -> PcElement:
        return self.element(self.collector.mul(a.support(), b.support()))

    def inverse(self, a: PcElement) -> PcElement:
        return self.element(self.collector.inverse(a.support()))

    def power(self, a: PcElement, n: int) -> PcElement:
        return self.element(self.collector.power(a.support(), n))

    def comm(self, a: PcElement, b: PcElement) -> PcElement:
        c = self.collector
        x, y = a.support(), b.support()
        return self.element(c.mul(c.inverse(c.mul(y, x)), c.mul(x, y)))

    def conj(self, a: PcElement, b: PcElement) -> PcElement:
        """a^b = b^-1 a b."""
        c = self.collector
        y = b.support()
        return self.element(c.mul(c.inverse(y), c.mul(a.support(), y)))

    def is_central_generator(self, i: int) -> bool:
        return self.collector.central[i]

    def order_if_finite(self) -> int | None:
        if any(o is None for o in self.orders):
            return None
        n = 1
        for o in self.orders:
            n *= o
        return n

    def __eq__(self, other) -> bool:
        if not isinstance(other, PcPresentation):
            return NotImplemented
        return (self.ngens, self.weights, self.orders, self.power_tails, self.commutator_tails) == \
            (other.ngens, other.weights, other.orders, other.power_tails, other.commutator_tails)

    def __repr__(self) -> str:
        return f"PcPresentation(ngens={self.ngens}, class={self.class_}, orders={self.orders})"


class Collector:
    """Collection from the left on sparse exponent dicts."""

    def __init__(self, pc: PcPresentation):
        self.pc = pc
        m = pc.ngens
        self.orders = pc.orders
        self.power_tails = pc.power_tails
        # a_j^{a_i} as a normal word, for the j > i where it differs from a_j
        self.nontriv: list[set[int]] = [set() for _ in range(m)]
        self.conj1: list[dict[int, dict[int, int]]] = [dict() for _ in range(m)]
        for (j, i), t in pc.commutator_tails.items():
            self.nontriv[i].add(j)
            img = {j: 1}
            img.update(t)
            self.conj1[i][j] = img
        involved = set()
        for (j, i) in pc.commutator_tails:
            involved.add(i)
            involved.add(j)
        self.central = [k not in involved for k in range(m)]
        self._pos_cache: dict[tuple[int, int], dict[int, dict[int, int]]] = {}
        self._neg_cache: dict[tuple[int, int], dict[int, dict[int, int]]] = {}

    # -- basic products ----------------------------------------------------
    def mul_gen(self, g: Mapping[int, int], i: int, e: int) -> dict[int, int]:
        """Normal form of ``g * a_i^e``."""
        if e == 0:
            return dict(g)
        if self.central[i]:
            out = dict(g)
            self._add_central(out, i, e)
            return out
        prefix: dict[int, int] = {}
        suffix: dict[int, int] = {}
        s = e
        for k, x in g.items():
            if k < i:
                prefix[k] = x
            elif k > i:
                suffix[k] = x
            else:
                s += x
        if suffix and not self.nontriv[i].isdisjoint(suffix):
            suffix = self.conjugate(i, e, suffix)
        m = self.orders[i]
        q = 0
        if m is not None:
            q, s = divmod(s, m)
        if s:
            prefix[i] = s
        result = prefix
        if q and i in self.power_tails:
            result = self.mul(result, self.power(self.power_tails[i], q))
        if suffix:
            result = self.mul(result, suffix)
        return result

    def _add_central(self, out: dict[int, int], i: int, e: int) -> bool:
        """In place: ``out * a_i^e`` for a central generator ``a_i``; True if a power tail was used."""
        y = out.get(i, 0) + e
        m = self.orders[i]
        q = 0
        if m is not None:
            q, y = divmod(y, m)
        if y:
            out[i] = y
        else:
            out.pop(i, None)
        if q and i in self.power_tails:
            t = self.mul(out, self.power(self.power_tails[i], q))
            out.clear()
            out.update(t)
            return True
        return False

    def mul(self, g: Mapping[int, int], h: Mapping[int, int]) -> dict[int, int]:
        result = dict(g)
        if not h:
            return result
        if not result:
            return dict(h)
        central = self.central
        top = max(result)
        for j in sorted(h):
            if j > top:
                # the rest of h lies beyond everything present; normal already
                for k in h:
                    if k >= j:
                        result[k] = h[k]
                break
            if central[j]:
                # only a vanishing top entry or a power tail can move the top
                if self._add_central(result, j, h[j]) or j == top:
                    top = max(result) if result else -1
            else:
                result = self.mul_gen(result, j, h[j])
                top = max(result) if result else -1
        return result

    def inverse(self, g: Mapping[int, int]) -> dict[int, int]:
        h: dict[int, int] = {}
        cur = dict(g)
        while cur:
            i = min(cur)
            m = self.orders[i]
            e = (-cur[i]) % m if m is not None else -cur[i]
            h[i] = e
            cur = self.mul_gen(cur, i, e)
        return h

    def power(self, g: Mapping[int, int], n: int) -> dict[int, int]:
        if n == 0 or not g:
            return {}
        if n < 0:
            g, n = self.inverse(g), -n
        if len(g) == 1:
            (k, x), = g.items()
            if self.central[k] and self.orders[k] is None:
                return {k: x * n}
        result: dict[int, int] = {}
        base = dict(g)
        while n:
            if n & 1:
                result = self.mul(result, base)
            n >>= 1
            if n:
                base = self.mul(base, base)
        return result

    def comm(self, g, h):
        return self.mul(self.inverse(self.mul(h, g)), self.mul(g, h))

    # -- conjugation automorphisms ----------------------------------------
    def _apply(self, images: Mapping[int, Mapping[int, int]], v: Mapping[int, int]) -> dict[int, int]:
        out: dict[int, int] = {}
        for j in sorted(v):
            img = images.get(j)
            if img is None:
                out = self.mul_gen(out, j, v[j])
            else:
                out = self.mul(out, self.power(img, v[j]))
        return out

    def _pos_images(self, i: int, k: int) -> dict[int, dict[int, int]]:
        """Images under conjugation by a_i^(2^k)."""
        key = (i, k)
        hit = self._pos_cache.get(key)
        if hit is not None:
            return hit
        if k == 0:
            imgs = self.conj1[i]
        else:
            prev = self._pos_images(i, k - 1)
            imgs = {j: self._apply(prev, prev[j]) for j in prev}
            imgs = {j: x for j, x in imgs.items() if x != {j: 1}}
        self._pos_cache[key] = imgs
        return imgs

    def _neg_images(self, i: int, k: int) -> dict[int, dict[int, int]]:
        """Images under conjugation by a_i^(-2^k)."""
        key = (i, k)
        hit = self._neg_cache.get(key)
        if hit is not None:
            return hit
        if k == 0:
            imgs: dict[int, dict[int, int]] = {}
            # x = a_j * c^-1(d_j^-1) solves c(x) = a_j where c(a_j) = a_j d_j
            for j in sorted(self.conj1[i], reverse=True):
                d = dict(self.conj1[i][j])
                del d[j]
                y = self._apply(imgs, self.inverse(d))
                x = {j: 1}
                x.update(y)
                imgs[j] = x
        else:
            prev = self._neg_images(i, k - 1)
            imgs = {j: self._apply(prev, prev[j]) for j in prev}
            imgs = {j: x for j, x in imgs.items() if x != {j: 1}}
        self._neg_cache[key] = imgs
        return imgs

    def conjugate(self, i: int, e: int, v: Mapping[int, int]) -> dict[int, int]:
        """a_i^-e * v * a_i^e for v in the subgroup generated by a_{i+1}, ..."""
        out = dict(v)
        n, k = abs(e), 0
        while n and out:
            if n & 1:
                imgs = self._pos_images(i, k) if e > 0 else self._neg_images(i, k)
                if not imgs:
                    break
                if not set(imgs).isdisjoint(out):
                    out = self._apply(imgs, out)
            n >>= 1
            k += 1
        return out

    def collect_word(self, word: Iterable[tuple[int, int]]) -> dict[int, int]:
        g: dict[int, int] = {}
        for i, e in word:
            g = self.mul_gen(g, i, e)
        return g


# ---------------------------------------------------------------------------
# module-level operations


def collect(pc: PcPresentation, word: Iterable[tuple[int, int]]) -> PcElement:
    """Normal form of a word given as ``(generator index, exponent)`` pairs."""
    return pc.element(pc.collector.collect_word(word))


class PcOps(GroupOps):
    """Evaluate word expressions in a pc group via generator images."""

    def __init__(self, pc: PcPresentation, images: Mapping):
        self.pc = pc
        self.c = pc.collector
        self.images = {}
        for g, img in images.items():
            key = g.name if isinstance(g, GeneratorId) else str(g)
            self.images[key] = img.support() if isinstance(img, PcElement) else _clean(img)

    def one(self):
        return {}

    def gen(self, g):
        try:
            return self.images[g.name]
        except KeyError:
            raise MissingImage(f"no image for generator {g.name}") from None

    def mul(self, a, b):
        return self.c.mul(a, b)

    def inv(self, a):
        return self.c.inverse(a)

    def pow(self, a, n):
        return self.c.power(a, n)

    def comm(self, a, b):
        return self.c.comm(a, b)


def evaluate(pc: PcPresentation, images: Mapping, word: Expr) -> PcElement:
    return pc.element(word.evaluate(PcOps(pc, images)))


# -- consistency --------------------------------------------------------------


@dataclass
class ConsistencyReport:
    consistent: bool
    checked: int
    failure: dict | None = None

    def to_json(self) -> dict:
        return {"consistent": self.consistent, "checked": self.checked, "failure": self.failure}


def overlap_tests(pc: PcPresentation, max_weight: int | None = None):
    """Yield ``(label, left word, right word)`` pairs that must collect equally.

    Each side is a list of "steps": a list of (generator, exponent) syllables
    collected separately and then multiplied in the stated bracketing.
    ``max_weight`` restricts to overlaps whose total weight is at most that value.
    """
    m, w, orders = pc.ngens, pc.weights, pc.orders
    bound = float("inf") if max_weight is None else max_weight
    # weights are nondecreasing, so each inner loop can stop at the first index
    # whose weight pushes the total over the bound
    for k in range(m):
        for j in range(k):
            if w[j] + w[k] + w[0] > bound:
                break
            for i in range(j):
                if w[i] + w[j] + w[k] > bound:
                    break
                yield (f"a{k + 1}a{j + 1}a{i + 1}", [[(k, 1), (j, 1)], [(i, 1)]], [[(k, 1)], [(j, 1), (i, 1)]])
    for j in range(m):
        mj = orders[j]
        if mj is not None:
            yield (f"a{j + 1}^{mj}a{j + 1}", [[(j, mj)], [(j, 1)]], [[(j, 1)], [(j, mj)]])
        for i in range(j):
            if w[i] + w[j] > bound:
                break
            if mj is not None:
                yield (f"a{j + 1}^{mj}a{i + 1}", [[(j, mj)], [(i, 1)]], [[(j, mj - 1)], [(j, 1), (i, 1)]])
            mi = orders[i]
            if mi is not None:
                yield (f"a{j + 1}a{i + 1}^{mi}", [[(j, 1), (i, 1)], [(i, mi - 1)]], [[(j, 1)], [(i, mi)]])
            else:
                yield (f"a{j + 1}a{i + 1}^-1", [[(j, 1), (i, -1)], [(i, 1)]], [[(j, 1)]])
            if mj is None:
                yield (f"a{j + 1}^-1a{i + 1}", [[(j, -1)], [(j, 1), (i, 1)]], [[(i, 1)]])


def _eval_steps(c: Collector, steps) -> dict[int, int]:
    out: dict[int, int] = {}
    for step in steps:
        out = c.mul(out, c.collect_word(step))
    return out


def check_consistency(pc: PcPresentation, max_weight: int | None = None,
                      full: bool = False) -> ConsistencyReport:
    """Test the overlaps; on weighted presentations those of weight above the class are skipped.

    Overlaps of total weight above the class always collect to the same result
    in a weighted presentation, so the bounded test is complete there.  ``full``
    forces every overlap, which is cubic in the number of generators.
    """
    if max_weight is None and pc.weighted and not full:
        max_weight = pc.class_
    c = pc.collector
    n = 0
    for label, left, right in overlap_tests(pc, max_weight):
        n += 1
        a, b = _eval_steps(c, left), _eval_steps(c, right)
        if a != b:
            return ConsistencyReport(False, n, {"overlap": label, "left": pc.element(a).exponents,
                                                "right": pc.element(b).exponents})
    return ConsistencyReport(True, n)


# -- subgroups -----------------------------------------------------------------


@dataclass
class SubgroupBasis:
    """Induced generating sequence, one element per leading index (increasing)."""

    pc: PcPresentation
    elements: list[PcElement] = field(default_factory=list)

    @property
    def leading(self) -> list[int]:
        return [e.leading() for e in self.elements]

    def __len__(self):
        return len(self.elements)

    def to_json(self) -> list[list[int]]:
        return [list(e.exponents) for e in self.elements]


def _sift(c: Collector, table: dict[int, dict[int, int]], g: dict[int, int]) -> dict[int, int]:
    """Reduce g by the echelon table as far as possible; returns the remainder."""
    orders = c.orders
    while g:
        i = min(g)
        b = table.get(i)
        if b is None:
            return g
        q, r = divmod(g[i], b[i])
        if r:
            return g
        g = c.mul(g, c.power(b, -q))
    return g


def subgroup_closure(pc: PcPresentation, gens: Iterable[PcElement | Mapping[int, int]],
                     normal: bool = False) -> SubgroupBasis:
    """Echelonized basis of the subgroup (normal closure when ``normal``) generated by ``gens``."""
    c = pc.collector
    orders = pc.orders
    table: dict[int, dict[int, int]] = {}
    queue = [g.support() if isinstance(g, PcElement) else _clean(g) for g in gens]

    def insert(g: dict[int, int]):
        while True:
            g = _sift(c, table, g)
            if not g:
                return
            i = min(g)
            b = table.get(i)
            if b is None:
                if orders[i] is not None and g[i] % orders[i] == 0:
                    raise AssertionError("normal form violated")
                # make the leading exponent a divisor of the relative order / positive
                if orders[i] is None and g[i] < 0:
                    g = c.inverse(g)
                elif orders[i] is not None:
                    from math import gcd
                    d = gcd(g[i], orders[i])
                    if d != g[i]:
                        # g^s has leading exponent d for s with s*g_i = d mod m_i
                        s = pow(g[i] // d, -1, orders[i] // d)
                        g2 = c.power(g, s)
                        queue.append(g)
                        g = g2
                table[i] = g
                queue.extend(_closure_terms(g, i))
                return
            # gcd step between the existing leader and g
            from .zlinalg import xgcd
            d, s, t = xgcd(b[i], g[i])
            new = c.mul(c.power(b, s), c.power(g, t))
            table[i] = new
            queue.append(b)
            queue.extend(_closure_terms(new, i))
            g = g

    def _closure_terms(g, i):
        out = []
        if orders[i] is not None:
            out.append(c.power(g, orders[i] // g[i]))
        for j, b in table.items():
            if b is not g:
                out.append(c.comm(g, b))
        if normal:
            for k in range(pc.ngens):
                out.append(c.comm(g, {k: 1}))
        return out

    while queue:
        insert(queue.pop())
    return SubgroupBasis(pc, [pc.element(table[i]) for i in sorted(table)])


def is_in_subgroup(basis: SubgroupBasis, g: PcElement) -> bool:
    table = {e.leading(): e.support() for e in basis.elements}
    return not _sift(basis.pc.collector, table, g.support())


def lcs(pc: PcPresentation, max_terms: int | None = None) -> list[SubgroupBasis]:
    """Lower central series gamma_1 >= gamma_2 >= ... down to the trivial subgroup."""
    if not check_consistency(pc).consistent:
        raise InconsistentPresentation("lower central series needs a consistent presentation")
    c = pc.collector
    series = [subgroup_closure(pc, [{i: 1} for i in range(pc.ngens)])]
    while series[-1].elements:
        if max_terms is not None and len(series) >= max_terms:
            break
        prev = series[-1]
        gens = [c.comm(b.support(), {k: 1}) for b in prev.elements for k in range(pc.ngens)]
        nxt = subgroup_closure(pc, gens, normal=True)
        if len(series) > 1 + pc.ngens * 4 and nxt.elements == prev.elements:
            raise InconsistentPresentation("lower central series does not terminate (group not nilpotent)")
        series.append(nxt)
    return series


# -- import / export ------------------------------------------------------------


def export_pc(pc: PcPresentation, images: Mapping[str, PcElement] | None = None) -> dict:
    def word(d):
        return [[k, v] for k, v in sorted(d.items())]

    out = {
        "ngens": pc.ngens,
        "names": list(pc.names),
        "weights": list(pc.weights) if pc.weighted else None,
        "orders": list(pc.orders),
        "power_tails": {str(i): word(pc.power_tails.get(i, {}))
                        for i in range(pc.ngens) if pc.orders[i] is not None},
        "commutator_tails": {f"{j},{i}": word(t) for (j, i), t in sorted(pc.commutator_tails.items())},
    }
    if images is not None:
        out["images"] = {name: list(img.exponents) for name, img in images.items()}
    return out


def import_pc(data: str | dict, check: bool = True) -> tuple[PcPresentation, dict[str, PcElement] | None, ConsistencyReport | None]:
    """Load the pc JSON format; returns (presentation, images or None, consistency report or None)."""
    if isinstance(data, str):
        try:
            data = json.loads(data)
        except json.JSONDecodeError as exc:
            raise MalformedPc(f"not JSON: {exc}") from None
    try:
        n = int(data["ngens"])
        weights = data.get("weights")
        orders = data["orders"]
        raw_power = data.get("power_tails", {})
        raw_comm = data.get("commutator_tails", {})
    except (KeyError, TypeError, ValueError) as exc:
        raise MalformedPc(f"missing or bad field: {exc}") from None

    def word(w, where):
        if not isinstance(w, list) or any(not isinstance(p, list) or len(p) != 2 for p in w):
            raise MalformedTail(f"{where}: a word is a list of [generator, exponent] pairs")
        out: dict[int, int] = {}
        for k, v in w:
            if not isinstance(k, int) or not isinstance(v, int) or not 0 <= k < n:
                raise MalformedTail(f"{where}: bad syllable [{k}, {v}]")
            out[k] = out.get(k, 0) + v
        return out

    power = {}
    for key, w in raw_power.items():
        power[int(key)] = word(w, f"power tail {key}")
    comm = {}
    for key, w in raw_comm.items():
        try:
            j, i = (int(x) for x in key.split(","))
        except ValueError:
            raise MalformedTail(f"bad commutator key {key!r}") from None
        comm[(j, i)] = word(w, f"commutator tail {key}")
    if not isinstance(orders, list) or len(orders) != n:
        raise MalformedPc(f"orders must be a list of length {n}")
    for i, o in enumerate(orders):
        # every finite relative order needs its power relation, [] when trivial
        if o is not None and i not in power:
            raise MalformedTail(f"missing power tail for generator {i}")
        if o is None and i in power:
            raise MalformedTail(f"power tail given for generator {i} of infinite order")
    pc = PcPresentation(n, weights, orders, power, comm, names=data.get("names"))
    images = None
    if data.get("images") is not None:
        images = {}
        for name, vec in data["images"].items():
            if not isinstance(vec, list) or len(vec) != n:
                raise MalformedPc(f"image of {name} must be an exponent vector of length {n}")
            images[name] = PcElement(tuple(int(x) for x in vec))
    report = check_consistency(pc) if check else None
    return pc, images, report


# -- relation verification --------------------------------------------------------


@dataclass
class VerifyReport:
    relations: list[dict]
    all_hold: bool
    word: str | None = None
    word_image: list[int] | None = None
    word_trivial: bool | None = None
    word_in_gamma: bool | None = None
    cube_in_gamma: bool | None = None
    gamma_n: int | None = None

    def to_json(self) -> dict:
        return {
            "relations": self.relations,
            "all_relations_hold": self.all_hold,
            "word": self.word,
            "word_image": self.word_image,
            "word_trivial": self.word_trivial,
            "gamma_n": self.gamma_n,
            "word_in_gamma": self.word_in_gamma,
            "word_cubed_in_gamma": self.cube_in_gamma,
        }


def verify_relations(pc: PcPresentation, images: Mapping, presentation: GroupPresentation,
                     word: Expr | None = None, n: int = 7,
                     gamma: SubgroupBasis | None = None, power: int = 3) -> VerifyReport:
    """Evaluate both sides of every relation; optionally test a word against gamma_n."""
    ops = PcOps(pc, images)
    rows = []
    for k, (lhs, rhs) in enumerate(presentation.relations):
        try:
            a, b = lhs.evaluate(ops), rhs.evaluate(ops)
            rows.append({"index": k, "relation": f"{lhs} = {rhs}", "holds": a == b})
        except MissingImage as exc:
            rows.append({"index": k, "relation": f"{lhs} = {rhs}", "holds": False, "error": str(exc)})
    rep = VerifyReport(rows, all(r["holds"] for r in rows))
    if word is not None:
        img = word.evaluate(ops)
        rep.word = str(word)
        rep.word_image = list(pc.element(img).exponents)
        rep.word_trivial = not img
        if gamma is None:
            series = lcs(pc, max_terms=n)
            gamma = series[n - 1] if len(series) >= n else SubgroupBasis(pc, [])
        rep.gamma_n = n
        rep.word_in_gamma = is_in_subgroup(gamma, pc.element(img))
        rep.cube_in_gamma = is_in_subgroup(gamma, pc.element(pc.collector.power(img, power)))
    return rep


# -- small named groups ------------------------------------------------------------------


def heisenberg(order: int | None = None) -> PcPresentation:
    """a, b, c with [b, a] = c central; relative orders ``order`` (None for infinite)."""
    return PcPresentation(3, [1, 1, 2], [order] * 3, {}, {(1, 0): {2: 1}}, names=["a", "b", "c"])


def cyclic(n: int | None) -> PcPresentation:
    return PcPresentation(1, [1], [n], names=["a"])
