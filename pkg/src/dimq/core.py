"""Free-group words, structured word expressions, presentations and the fixture groups.

Two word representations live here.  :class:`Word` is the flat, freely reduced
syllable sequence.  The ``Expr`` tree (:class:`Gen`, :class:`Prod`,
:class:`Power`, :class:`Comm`) keeps the bracket and power structure of a word
as written, so that relations such as ``x1^3^11*x2^3^12 = [y12,y12p,y12pp]^3^10``
can be carried around and evaluated in any group without expanding a word of
half a million letters.  Every ``Expr`` (including ``Word``) evaluates through a
:class:`GroupOps` object.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Sequence

__all__ = [
    "GeneratorId", "Word", "Expr", "Gen", "Prod", "Power", "Comm", "IDENTITY",
    "GroupPresentation", "PaperFixture", "GroupOps", "FreeGroupOps",
    "ParseError", "PresentationSyntaxError", "UnknownGenerator", "ZeroExponent",
    "free_reduce", "commutator", "left_normed", "parse_presentation", "parse_word",
    "format_presentation", "format_expr", "paper_fixture", "substitute",
    "load_fixture_text", "ascii_name",
]


@dataclass(frozen=True, order=True)
class GeneratorId:
    index: int
    name: str

    def __str__(self) -> str:
        return self.name


# ---------------------------------------------------------------------------
# group operations protocol


class GroupOps:
    """Arithmetic of a target group; subclasses supply ``one``, ``gen``, ``mul``, ``inv``."""

    def one(self):
        raise NotImplementedError

    def gen(self, g: GeneratorId):
        raise NotImplementedError

    def mul(self, a, b):
        raise NotImplementedError

    def inv(self, a):
        raise NotImplementedError

    def pow(self, a, n: int):
        if n < 0:
            a, n = self.inv(a), -n
        result = self.one()
        while n:
            if n & 1:
                result = self.mul(result, a)
            n >>= 1
            if n:
                a = self.mul(a, a)
        return result

    def comm(self, a, b):
        return self.mul(self.mul(self.inv(a), self.inv(b)), self.mul(a, b))


# ---------------------------------------------------------------------------
# expressions


class Expr:
    """Base class of word expressions."""

    def evaluate(self, ops: GroupOps):
        raise NotImplementedError

    def generators(self) -> set[GeneratorId]:
        raise NotImplementedError

    def expand(self, max_length: int = 10**6) -> "Word":
        """The freely reduced flat word; refuses to build words longer than ``max_length``."""
        return self.evaluate(FreeGroupOps(max_length))

    def __str__(self) -> str:
        return format_expr(self)


@dataclass(frozen=True)
class Gen(Expr):
    gen: GeneratorId

    def evaluate(self, ops):
        return ops.gen(self.gen)

    def generators(self):
        return {self.gen}


@dataclass(frozen=True)
class Prod(Expr):
    factors: tuple[Expr, ...]

    def evaluate(self, ops):
        result = ops.one()
        for f in self.factors:
            result = ops.mul(result, f.evaluate(ops))
        return result

    def generators(self):
        out: set[GeneratorId] = set()
        for f in self.factors:
            out |= f.generators()
        return out


@dataclass(frozen=True)
class Power(Expr):
    base: Expr
    exponent: int
    # (b, k) when the exponent was written as b^k; display only
    form: tuple[int, int] | None = field(default=None, compare=False)

    def evaluate(self, ops):
        return ops.pow(self.base.evaluate(ops), self.exponent)

    def generators(self):
        return self.base.generators()


@dataclass(frozen=True)
class Comm(Expr):
    """Left-normed commutator ``[a1, a2, ..., ak] = [[a1, a2], ..., ak]``."""

    args: tuple[Expr, ...]

    def __post_init__(self):
        if len(self.args) < 2:
            raise ValueError("a commutator needs at least two entries")

    def evaluate(self, ops):
        result = self.args[0].evaluate(ops)
        for a in self.args[1:]:
            result = ops.comm(result, a.evaluate(ops))
        return result

    def generators(self):
        out: set[GeneratorId] = set()
        for a in self.args:
            out |= a.generators()
        return out


# ---------------------------------------------------------------------------
# flat words


def free_reduce(syllables: Iterable[tuple[GeneratorId, int]]) -> "Word":
    stack: list[list] = []
    for g, e in syllables:
        if e == 0:
            continue
        if stack and stack[-1][0] == g:
            stack[-1][1] += e
            if stack[-1][1] == 0:
                stack.pop()
        else:
            stack.append([g, e])
    return Word(tuple((g, e) for g, e in stack), _checked=True)


@dataclass(frozen=True)
class Word(Expr):
    """Freely reduced word: adjacent syllables have distinct generators, exponents nonzero."""

    syllables: tuple[tuple[GeneratorId, int], ...] = ()
    _checked: bool = field(default=False, compare=False, repr=False)

    def __post_init__(self):
        if not self._checked:
            reduced = free_reduce(self.syllables).syllables
            object.__setattr__(self, "syllables", reduced)
            object.__setattr__(self, "_checked", True)

    @classmethod
    def gen(cls, g: GeneratorId, e: int = 1) -> "Word":
        return cls(((g, e),))

    def __len__(self) -> int:
        return sum(abs(e) for _, e in self.syllables)

    def __mul__(self, other: "Word") -> "Word":
        return free_reduce(self.syllables + other.syllables)

    def inverse(self) -> "Word":
        return Word(tuple((g, -e) for g, e in reversed(self.syllables)), _checked=True)

    def is_identity(self) -> bool:
        return not self.syllables

    def evaluate(self, ops):
        result = ops.one()
        for g, e in self.syllables:
            result = ops.mul(result, ops.pow(ops.gen(g), e))
        return result

    def generators(self):
        return {g for g, _ in self.syllables}

    def expand(self, max_length: int = 10**6) -> "Word":
        return self


IDENTITY = Word()


def commutator(u: Word, v: Word) -> Word:
    return u.inverse() * v.inverse() * u * v


def left_normed(ws: Sequence[Word]) -> Word:
    if not ws:
        raise ValueError("left_normed needs at least one word")
    result = ws[0]
    for w in ws[1:]:
        result = commutator(result, w)
    return result


class FreeGroupOps(GroupOps):
    def __init__(self, max_length: int = 10**6):
        self.max_length = max_length

    def one(self):
        return IDENTITY

    def gen(self, g):
        return Word.gen(g)

    def mul(self, a, b):
        return a * b

    def inv(self, a):
        return a.inverse()

    def pow(self, a, n):
        if a.is_identity() or n == 0:
            return IDENTITY
        if len(a) * abs(n) > self.max_length:
            raise ValueError(f"word of length {len(a) * abs(n)} exceeds max_length={self.max_length}")
        return super().pow(a, n)


# ---------------------------------------------------------------------------
# presentations


@dataclass(frozen=True)
class GroupPresentation:
    alphabet: tuple[GeneratorId, ...]
    relations: tuple[tuple[Expr, Expr], ...]

    def __post_init__(self):
        known = set(self.alphabet)
        for i, g in enumerate(self.alphabet):
            if g.index != i:
                raise ValueError(f"generator {g.name} has index {g.index}, expected {i}")
        for lhs, rhs in self.relations:
            for g in lhs.generators() | rhs.generators():
                if g not in known:
                    raise UnknownGenerator(f"generator {g.name} not in alphabet")

    def generator(self, name: str) -> GeneratorId:
        name = ascii_name(name)
        for g in self.alphabet:
            if g.name == name:
                return g
        raise UnknownGenerator(f"unknown generator {name!r}")

    @property
    def names(self) -> list[str]:
        return [g.name for g in self.alphabet]

    def relators(self) -> list[Expr]:
        """Relations in relator form ``lhs * rhs^-1``."""
        return [Prod((lhs, Power(rhs, -1))) for lhs, rhs in self.relations]

    def __str__(self) -> str:
        return format_presentation(self)


class ParseError(ValueError):
    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        self.line, self.column = line, column
        where = f" (line {line}, column {column})" if line is not None else ""
        super().__init__(message + where)


class PresentationSyntaxError(ParseError):
    pass


class UnknownGenerator(ParseError):
    pass


class ZeroExponent(ParseError):
    pass


_NAME_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*'*")
_TOKEN_RE = re.compile(r"\s*(?:(?P<name>[A-Za-z_][A-Za-z0-9_]*'*)|(?P<int>\d+)|(?P<op>[\^\*\[\],()\-]))")


def ascii_name(name: str) -> str:
    """Primes become trailing ``p``: ``y24''`` -> ``y24pp``."""
    stem = name.rstrip("'")
    return stem + "p" * (len(name) - len(stem))


class _WordParser:
    def __init__(self, text: str, lookup: Callable[[str], GeneratorId], line: int = 1, col0: int = 0):
        self.text, self.lookup, self.line, self.col0 = text, lookup, line, col0
        self.tokens: list[tuple[str, str, int]] = []
        pos = 0
        stripped = text.rstrip()
        while pos < len(stripped):
            m = _TOKEN_RE.match(stripped, pos)
            if not m or m.end() == pos:
                self._fail("unexpected character", pos + (len(stripped[pos:]) - len(stripped[pos:].lstrip())))
            kind = m.lastgroup
            self.tokens.append((kind, m.group(kind), m.start(kind)))
            pos = m.end()
        self.i = 0

    def _fail(self, msg, pos, cls=PresentationSyntaxError):
        raise cls(msg, self.line, self.col0 + pos + 1)

    def peek(self):
        return self.tokens[self.i] if self.i < len(self.tokens) else (None, None, len(self.text))

    def take(self, value=None):
        tok = self.peek()
        if tok[0] is None or (value is not None and tok[1] != value):
            self._fail(f"expected {value!r}" if value else "unexpected end of input", tok[2])
        self.i += 1
        return tok

    def parse(self) -> Expr:
        if not self.tokens:
            self._fail("empty word", 0)
        expr = self.word()
        if self.i != len(self.tokens):
            self._fail(f"unexpected token {self.peek()[1]!r}", self.peek()[2])
        return expr

    def word(self) -> Expr:
        factors = [self.factor()]
        while self.peek()[1] == "*":
            self.take("*")
            factors.append(self.factor())
        factors = [f for f in factors if f != IDENTITY]
        if not factors:
            return IDENTITY
        return factors[0] if len(factors) == 1 else Prod(tuple(factors))

    def factor(self) -> Expr:
        expr = self.atom()
        while self.peek()[1] == "^":
            self.take("^")
            neg = False
            if self.peek()[1] == "-":
                self.take("-")
                neg = True
            kind, val, pos = self.take()
            if kind != "int":
                self._fail("expected integer exponent", pos)
            n, form = int(val), None
            if self.peek()[1] == "^":
                self.take("^")
                kind2, val2, pos2 = self.take()
                if kind2 != "int":
                    self._fail("expected integer in power-form exponent", pos2)
                form = (n, int(val2))
                n = n ** int(val2)
            if n == 0:
                self._fail("zero exponent", pos, ZeroExponent)
            if neg:
                n = -n
            expr = Power(expr, n, form if not neg else None) if expr != IDENTITY else IDENTITY
        return expr

    def atom(self) -> Expr:
        kind, val, pos = self.take()
        if kind == "name":
            try:
                return Gen(self.lookup(val))
            except UnknownGenerator:
                self._fail(f"unknown generator {val!r}", pos, UnknownGenerator)
        if kind == "int":
            if val != "1":
                self._fail("only '1' may appear as a literal", pos)
            return IDENTITY
        if val == "(":
            inner = self.word()
            self.take(")")
            return inner
        if val == "[":
            args = [self.word()]
            while self.peek()[1] == ",":
                self.take(",")
                args.append(self.word())
            self.take("]")
            if len(args) < 2:
                self._fail("commutator needs at least two entries", pos)
            return Comm(tuple(args))
        self._fail(f"unexpected token {val!r}", pos)


def parse_word(text: str, alphabet: Sequence[GeneratorId] | GroupPresentation) -> Expr:
    gens = alphabet.alphabet if isinstance(alphabet, GroupPresentation) else alphabet
    table = {g.name: g for g in gens}

    def lookup(name):
        try:
            return table[ascii_name(name)]
        except KeyError:
            raise UnknownGenerator(f"unknown generator {name!r}") from None

    return _WordParser(text.strip(), lookup).parse()


def parse_presentation(text: str) -> GroupPresentation:
    """Parse the ``.pres`` format (``gens:`` line, ``rels:`` block; ``;`` acts as a line break)."""
    # (line number, column offset, content)
    pieces: list[tuple[int, int, str]] = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0]
        offset = 0
        for chunk in line.split(";"):
            if chunk.strip():
                pieces.append((lineno, offset + len(chunk) - len(chunk.lstrip()), chunk.strip()))
            offset += len(chunk) + 1
    names: list[str] | None = None
    rel_lines: list[tuple[int, int, str]] = []
    in_rels = False
    for lineno, col, chunk in pieces:
        low = chunk.lower()
        if low.startswith("gens:"):
            if names is not None:
                raise PresentationSyntaxError("duplicate gens: line", lineno, col + 1)
            names = [ascii_name(n.strip()) for n in chunk[5:].split(",") if n.strip()]
            for n in names:
                if not _NAME_RE.fullmatch(n):
                    raise PresentationSyntaxError(f"bad generator name {n!r}", lineno, col + 1)
            if len(set(names)) != len(names):
                raise PresentationSyntaxError("duplicate generator name", lineno, col + 1)
            in_rels = False
        elif low.startswith("rels:"):
            in_rels = True
            rest = chunk[5:]
            if rest.strip():
                rel_lines.append((lineno, col + 5 + len(rest) - len(rest.lstrip()), rest.strip()))
        elif in_rels:
            rel_lines.append((lineno, col, chunk))
        else:
            raise PresentationSyntaxError("expected 'gens:' or 'rels:'", lineno, col + 1)
    if names is None:
        raise PresentationSyntaxError("missing gens: line", 1, 1)
    alphabet = tuple(GeneratorId(i, n) for i, n in enumerate(names))
    table = {g.name: g for g in alphabet}

    def lookup(name):
        try:
            return table[ascii_name(name)]
        except KeyError:
            raise UnknownGenerator(f"unknown generator {name!r}") from None

    relations = []
    for lineno, col, chunk in rel_lines:
        if chunk.count("=") != 1:
            raise PresentationSyntaxError("relation must have the form 'word = word'", lineno, col + 1)
        left, right = chunk.split("=")
        lhs = _WordParser(left.strip(), lookup, lineno, col + len(left) - len(left.lstrip())).parse()
        rcol = col + len(left) + 1 + len(right) - len(right.lstrip())
        rhs = _WordParser(right.strip(), lookup, lineno, rcol).parse()
        relations.append((lhs, rhs))
    return GroupPresentation(alphabet, tuple(relations))


def _format_exponent(n: int, form) -> str:
    if form is not None and form[0] ** form[1] == n:
        return f"{form[0]}^{form[1]}"
    return str(n)


def format_expr(expr: Expr) -> str:
    if isinstance(expr, Word):
        if not expr.syllables:
            return "1"
        return "*".join(g.name if e == 1 else f"{g.name}^{e}" for g, e in expr.syllables)
    if isinstance(expr, Gen):
        return expr.gen.name
    if isinstance(expr, Prod):
        return "*".join(format_expr(f) if not isinstance(f, Prod) else f"({format_expr(f)})"
                        for f in expr.factors)
    if isinstance(expr, Power):
        base = format_expr(expr.base)
        if isinstance(expr.base, (Prod, Power)) or (isinstance(expr.base, Word) and len(expr.base.syllables) != 1) \
                or (isinstance(expr.base, Word) and expr.base.syllables[0][1] != 1):
            base = f"({base})"
        return f"{base}^{_format_exponent(expr.exponent, expr.form)}"
    if isinstance(expr, Comm):
        return "[" + ",".join(format_expr(a) for a in expr.args) + "]"
    raise TypeError(f"not a word expression: {expr!r}")


def format_presentation(pres: GroupPresentation) -> str:
    lines = ["gens: " + ", ".join(pres.names), "rels:"]
    lines += [f"  {format_expr(l)} = {format_expr(r)}" for l, r in pres.relations]
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# substitution


def _simplify(expr: Expr) -> Expr:
    if isinstance(expr, Prod):
        factors = tuple(f for f in (_simplify(f) for f in expr.factors) if f != IDENTITY)
        if not factors:
            return IDENTITY
        return factors[0] if len(factors) == 1 else Prod(factors)
    if isinstance(expr, Power):
        base = _simplify(expr.base)
        return IDENTITY if base == IDENTITY else Power(base, expr.exponent, expr.form)
    if isinstance(expr, Comm):
        args = tuple(_simplify(a) for a in expr.args)
        # [1, ...] = 1 and [..., 1, ...] = 1 for left-normed brackets
        if any(a == IDENTITY for a in args):
            return IDENTITY
        if len(args) >= 2 and args[0] == args[1] and isinstance(args[0], Gen):
            return IDENTITY
        return Comm(args)
    return expr


def substitute(expr: Expr, mapping: Mapping[GeneratorId, Expr]) -> Expr:
    """Replace generators by expressions (``IDENTITY`` deletes), then drop trivial pieces."""

    def sub(e: Expr) -> Expr:
        if isinstance(e, Gen):
            return mapping.get(e.gen, e)
        if isinstance(e, Word):
            return Prod(tuple(Power(mapping.get(g, Gen(g)), x) if x != 1 else mapping.get(g, Gen(g))
                              for g, x in e.syllables)) if e.syllables else e
        if isinstance(e, Prod):
            return Prod(tuple(sub(f) for f in e.factors))
        if isinstance(e, Power):
            return Power(sub(e.base), e.exponent, e.form)
        if isinstance(e, Comm):
            return Comm(tuple(sub(a) for a in e.args))
        raise TypeError(e)

    return _simplify(sub(expr))


# ---------------------------------------------------------------------------
# fixtures


@dataclass(frozen=True)
class PaperFixture:
    G: GroupPresentation
    Gbar: GroupPresentation
    w_x: Expr
    w_z: Expr
    w_x_bar: Expr  # w_x over the Gbar alphabet


def load_fixture_text(name: str) -> str:
    from importlib.resources import files
    return files("dimq").joinpath("data").joinpath(name).read_text(encoding="utf-8")


# identifications collapsing G onto the 8-generator quotient; None means "set to 1"
GBAR_IDENTIFICATIONS = {
    "z1": ["y1", "y2", "y3", "y34pp"],
    "z2": ["y1p", "y4", "y13", "y24", "y34", "y24pp"],
    "z3": ["y2p", "y4p"],
    "z4": ["y3p", "y13p", "y24p", "y34p", "y13pp"],
    None: ["y12", "y12p", "y12pp"],
}
GBAR_COMMUTATIONS = [("x3", "z3"), ("x4", "z3"), ("x2", "z4"), ("x3", "z4"), ("x4", "z4")]


def build_gbar(G: GroupPresentation) -> GroupPresentation:
    names = ["x1", "x2", "x3", "x4", "z1", "z2", "z3", "z4"]
    alphabet = tuple(GeneratorId(i, n) for i, n in enumerate(names))
    new = {g.name: g for g in alphabet}
    mapping: dict[GeneratorId, Expr] = {}
    for g in G.alphabet:
        if g.name in new:
            mapping[g] = Gen(new[g.name])
    for target, sources in GBAR_IDENTIFICATIONS.items():
        for s in sources:
            mapping[G.generator(s)] = IDENTITY if target is None else Gen(new[target])
    missing = [g.name for g in G.alphabet if g not in mapping]
    if missing:
        raise ValueError(f"identification map misses {missing}")
    rels: list[tuple[Expr, Expr]] = []
    for lhs, rhs in G.relations:
        rel = (substitute(lhs, mapping), substitute(rhs, mapping))
        if rel not in rels:
            rels.append(rel)
    for a, b in GBAR_COMMUTATIONS:
        rel = (Comm((Gen(new[a]), Gen(new[b]))), IDENTITY)
        if rel not in rels:
            rels.append(rel)
    return GroupPresentation(alphabet, tuple(rels))


def paper_fixture() -> PaperFixture:
    G = parse_presentation(load_fixture_text("G.pres"))
    Gbar = parse_presentation(load_fixture_text("Gbar.pres"))
    w_x = parse_word(load_fixture_text("w.word"), G)
    w_z = parse_word(load_fixture_text("wz.word"), Gbar)
    w_x_bar = parse_word(load_fixture_text("w.word"), Gbar)
    return PaperFixture(G, Gbar, w_x, w_z, w_x_bar)
