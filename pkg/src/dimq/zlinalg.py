"""Exact integer linear algebra: Hermite and Smith normal forms, lattice membership.

Everything is plain Python ``int``; no floating point anywhere.  ``hnf`` runs the
same elimination on dense (list) rows or sparse (dict) rows, picking sparse
storage when fewer than 10% of the entries are nonzero.  ``Lattice`` is an
incremental sparse echelon form used by the heavier pipelines, where rows are
added one at a time and most of them reduce to zero.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

__all__ = [
    "IntMatrix", "HnfResult", "hnf", "snf", "lattice_membership", "Lattice",
    "xgcd", "determinant", "elementary_divisors",
]

SPARSE_DENSITY = 0.10


def xgcd(a: int, b: int) -> tuple[int, int, int]:
    """Return ``(g, s, t)`` with ``s*a + t*b == g == gcd(a, b) >= 0``."""
    s0, s1, t0, t1 = 1, 0, 0, 1
    while b:
        q, r = divmod(a, b)
        a, b = b, r
        s0, s1 = s1, s0 - q * s1
        t0, t1 = t1, t0 - q * t1
    if a < 0:
        a, s0, t0 = -a, -s0, -t0
    return a, s0, t0


class IntMatrix:
    """Dense integer matrix stored as a list of row lists."""

    __slots__ = ("rows", "cols", "data")

    def __init__(self, data: Sequence[Sequence[int]], cols: int | None = None):
        self.data = [list(map(int, r)) for r in data]
        self.rows = len(self.data)
        if cols is None:
            cols = len(self.data[0]) if self.data else 0
        self.cols = cols
        if any(len(r) != cols for r in self.data):
            raise ValueError("ragged matrix")

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "IntMatrix":
        return cls([[0] * cols for _ in range(rows)], cols)

    @classmethod
    def identity(cls, n: int) -> "IntMatrix":
        return cls([[int(i == j) for j in range(n)] for i in range(n)], n)

    @classmethod
    def from_sparse(cls, rows: Sequence[dict[int, int]], cols: int) -> "IntMatrix":
        data = [[0] * cols for _ in rows]
        for r, row in zip(data, rows):
            for c, v in row.items():
                r[c] = v
        return cls(data, cols)

    def to_sparse(self) -> list[dict[int, int]]:
        return [{c: v for c, v in enumerate(r) if v} for r in self.data]

    def density(self) -> float:
        if not self.rows or not self.cols:
            return 0.0
        return sum(1 for r in self.data for v in r if v) / (self.rows * self.cols)

    def tolist(self) -> list[list[int]]:
        return [list(r) for r in self.data]

    def to_json(self) -> str:
        return json.dumps(self.data)

    def transpose(self) -> "IntMatrix":
        return IntMatrix([list(c) for c in zip(*self.data)] if self.rows else [], self.rows)

    def __matmul__(self, other: "IntMatrix") -> "IntMatrix":
        if self.cols != other.rows:
            raise ValueError("dimension mismatch")
        ot = list(zip(*other.data)) if other.rows else [()] * other.cols
        return IntMatrix([[sum(a * b for a, b in zip(r, c)) for c in ot] for r in self.data], other.cols)

    def __eq__(self, other) -> bool:
        if not isinstance(other, IntMatrix):
            return NotImplemented
        return (self.rows, self.cols, self.data) == (other.rows, other.cols, other.data)

    def __getitem__(self, ij):
        i, j = ij
        return self.data[i][j]

    def __repr__(self) -> str:
        return f"IntMatrix({self.data!r})"


@dataclass(frozen=True)
class HnfResult:
    H: IntMatrix
    U: IntMatrix
    pivots: tuple[int, ...]

    @property
    def rank(self) -> int:
        return len(self.pivots)


# --- row primitives: one elimination, two storages -------------------------


def _get(row, c):
    return row.get(c, 0) if isinstance(row, dict) else row[c]


def _submul(a, q, b):
    """a - q*b, returned as a new row."""
    if isinstance(a, dict):
        out = dict(a)
        for c, v in b.items():
            x = out.get(c, 0) - q * v
            if x:
                out[c] = x
            else:
                out.pop(c, None)
        return out
    return [x - q * y for x, y in zip(a, b)]


def _neg(a):
    if isinstance(a, dict):
        return {c: -v for c, v in a.items()}
    return [-x for x in a]


def _hnf_rows(A, U, ncols):
    """Column-by-column row HNF in place on row lists ``A`` with transform rows ``U``."""
    nrows = len(A)
    pivots = []
    r = 0
    for col in range(ncols):
        if r >= nrows:
            break
        while True:
            nz = [i for i in range(r, nrows) if _get(A[i], col)]
            if not nz:
                break
            best = min(nz, key=lambda i: (abs(_get(A[i], col)), i))
            if best != r:
                A[r], A[best] = A[best], A[r]
                U[r], U[best] = U[best], U[r]
            p = _get(A[r], col)
            done = True
            for i in range(r + 1, nrows):
                x = _get(A[i], col)
                if x:
                    q = x // p
                    A[i] = _submul(A[i], q, A[r])
                    U[i] = _submul(U[i], q, U[r])
                    if _get(A[i], col):
                        done = False
            if done:
                break
        if not any(_get(A[i], col) for i in range(r, nrows)):
            continue
        if _get(A[r], col) < 0:
            A[r], U[r] = _neg(A[r]), _neg(U[r])
        p = _get(A[r], col)
        for i in range(r):
            x = _get(A[i], col)
            q = x // p
            if q:
                A[i] = _submul(A[i], q, A[r])
                U[i] = _submul(U[i], q, U[r])
        pivots.append(col)
        r += 1
    return pivots


def hnf(A: IntMatrix | Sequence[Sequence[int]], sparse: bool | None = None) -> HnfResult:
    """Row-style Hermite normal form ``H = U @ A``.

    Pivots are positive, entries above a pivot lie in ``[0, pivot)``, zero rows
    come last.  ``sparse=None`` chooses the storage by density.
    """
    if not isinstance(A, IntMatrix):
        A = IntMatrix(A)
    n, m = A.rows, A.cols
    if sparse is None:
        sparse = A.density() < SPARSE_DENSITY
    if sparse:
        rows = A.to_sparse()
        U = [{i: 1} for i in range(n)]
    else:
        rows = A.tolist()
        U = [[int(i == j) for j in range(n)] for i in range(n)]
    pivots = _hnf_rows(rows, U, m)
    if sparse:
        return HnfResult(IntMatrix.from_sparse(rows, m), IntMatrix.from_sparse(U, n), tuple(pivots))
    return HnfResult(IntMatrix(rows, m), IntMatrix(U, n), tuple(pivots))


def snf(A: IntMatrix | Sequence[Sequence[int]]) -> tuple[IntMatrix, IntMatrix, IntMatrix]:
    """Smith normal form: returns ``(D, U, V)`` with ``U @ A @ V == D`` and d_i | d_{i+1}."""
    if not isinstance(A, IntMatrix):
        A = IntMatrix(A)
    n, m = A.rows, A.cols
    D = A.tolist()
    U = [[int(i == j) for j in range(n)] for i in range(n)]
    V = [[int(i == j) for j in range(m)] for i in range(m)]

    def swap_rows(a, b):
        D[a], D[b] = D[b], D[a]
        U[a], U[b] = U[b], U[a]

    def swap_cols(a, b):
        for row in D:
            row[a], row[b] = row[b], row[a]
        for row in V:
            row[a], row[b] = row[b], row[a]

    def add_row(dst, q, src):  # row dst -= q * row src
        D[dst] = [x - q * y for x, y in zip(D[dst], D[src])]
        U[dst] = [x - q * y for x, y in zip(U[dst], U[src])]

    def add_col(dst, q, src):  # col dst -= q * col src
        for row in D:
            row[dst] -= q * row[src]
        for row in V:
            row[dst] -= q * row[src]

    for t in range(min(n, m)):
        while True:
            nz = [(abs(D[i][j]), i, j) for i in range(t, n) for j in range(t, m) if D[i][j]]
            if not nz:
                break
            _, i, j = min(nz)
            swap_rows(t, i)
            swap_cols(t, j)
            p = D[t][t]
            clean = True
            for i in range(t + 1, n):
                if D[i][t]:
                    add_row(i, D[i][t] // p, t)
                    clean = clean and not D[i][t]
            for j in range(t + 1, m):
                if D[t][j]:
                    add_col(j, D[t][j] // p, t)
                    clean = clean and not D[t][j]
            if not clean:
                continue
            bad = next((i for i in range(t + 1, n) for j in range(t + 1, m) if D[i][j] % p), None)
            if bad is None:
                break
            # fold the offending row in and retry: the pivot then shrinks to a gcd
            D[t] = [x + y for x, y in zip(D[t], D[bad])]
            U[t] = [x + y for x, y in zip(U[t], U[bad])]
        if t < n and t < m and D[t][t] < 0:
            D[t] = [-x for x in D[t]]
            U[t] = [-x for x in U[t]]
    return IntMatrix(D, m), IntMatrix(U, n), IntMatrix(V, m)


def sparse_diagonal(rows: Sequence[Mapping[int, int]]) -> list[int]:
    """Diagonalize a sparse integer matrix by unimodular row and column moves.

    Returns the nonzero diagonal entries, which need not divide each other.
    """
    rows = {r: {c: x for c, x in row.items() if x} for r, row in enumerate(rows)}
    rows = {r: row for r, row in rows.items() if row}
    cols: dict[int, set[int]] = {}
    for r, row in rows.items():
        for c in row:
            cols.setdefault(c, set()).add(r)
    diag = []
    while rows:
        _, r, c = min((abs(x), r, c) for r, row in rows.items() for c, x in row.items())
        prow = rows[r]
        p = prow[c]
        clean = True
        for o in sorted(cols[c] - {r}):
            orow = rows[o]
            q = orow[c] // p
            for k, x in prow.items():
                y = orow.get(k, 0) - q * x
                if y:
                    if k not in orow:
                        cols[k].add(o)
                    orow[k] = y
                elif k in orow:
                    del orow[k]
                    cols[k].discard(o)
            if c in orow:
                clean = False
            if not orow:
                del rows[o]
        if not clean:
            continue
        # column moves only touch the pivot row once its column is clear
        for k in list(prow):
            if k != c:
                y = prow[k] % p
                if y:
                    prow[k] = y
                    clean = False
                else:
                    del prow[k]
                    cols[k].discard(r)
        if clean:
            diag.append(abs(p))
            del rows[r]
            cols[c].discard(r)
    return diag


def invariant_factors(diagonal: Sequence[int]) -> list[int]:
    """Invariant factors d_1 | d_2 | ... of the group sum of Z/d_i (zeros allowed)."""
    ds = sorted(abs(d) for d in diagonal if abs(d) != 1)
    zeros = [d for d in ds if d == 0]
    ds = [d for d in ds if d]
    for i in range(len(ds)):
        for j in range(i + 1, len(ds)):
            g = math.gcd(ds[i], ds[j])
            ds[i], ds[j] = g, ds[i] // g * ds[j]
    return [d for d in ds if d != 1] + zeros


def elementary_divisors(A: IntMatrix | Sequence[Sequence[int]]) -> list[int]:
    """Nonzero diagonal entries of the Smith form."""
    D, _, _ = snf(A)
    return [D[i, i] for i in range(min(D.rows, D.cols)) if D[i, i]]


def determinant(A: IntMatrix | Sequence[Sequence[int]]) -> int:
    """Bareiss fraction-free determinant."""
    M = A.tolist() if isinstance(A, IntMatrix) else [list(r) for r in A]
    n = len(M)
    if any(len(r) != n for r in M):
        raise ValueError("determinant of a non-square matrix")
    if n == 0:
        return 1
    sign, prev = 1, 1
    for k in range(n - 1):
        if M[k][k] == 0:
            swap = next((i for i in range(k + 1, n) if M[i][k]), None)
            if swap is None:
                return 0
            M[k], M[swap] = M[swap], M[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                M[i][j] = (M[i][j] * M[k][k] - M[i][k] * M[k][j]) // prev
        prev = M[k][k]
    return sign * M[n - 1][n - 1]


def lattice_membership(v: Sequence[int], gens: Sequence[Sequence[int]]) -> list[int] | None:
    """Integer coefficients ``c`` with ``sum(c_i * gens_i) == v``, or ``None``."""
    v = [int(x) for x in v]
    if not gens:
        return [] if not any(v) else None
    n = len(v)
    if any(len(g) != n for g in gens):
        raise ValueError("dimension mismatch between target and generators")
    res = hnf(IntMatrix(gens, n))
    H, U = res.H, res.U
    rest = list(v)
    x = [0] * H.rows
    for r, col in enumerate(res.pivots):
        q, rem = divmod(rest[col], H[r, col])
        if rem:
            return None
        x[r] = q
        if q:
            rest = [a - q * b for a, b in zip(rest, H.data[r])]
    if any(rest):
        return None
    coeffs = [sum(x[r] * U[r, i] for r in range(len(res.pivots))) for i in range(len(gens))]
    check = [sum(c * g[j] for c, g in zip(coeffs, gens)) for j in range(n)]
    if check != v:
        raise ArithmeticError("lattice certificate failed re-substitution")
    return coeffs


def sparse_hnf(rows: Iterable[dict[int, int]]) -> dict[int, dict[int, int]]:
    """Fully reduced row HNF of a batch of sparse rows, keyed by pivot column.

    Columns are cleared left to right; within a column the pivot is the row
    with the smallest absolute entry, ties going to the shortest row, which
    keeps fill-in and coefficient growth low on the very sparse systems met
    in practice.  The result is the unique HNF whatever the elimination path.
    """
    active: dict[int, dict[int, int]] = {}
    colidx: dict[int, set[int]] = {}
    for n, r in enumerate(rows):
        r = {c: x for c, x in r.items() if x}
        if r:
            active[n] = r
            for c in r:
                colidx.setdefault(c, set()).add(n)

    def sub(rid: int, q: int, prow: dict[int, int]):
        row = active[rid]
        for c, v in prow.items():
            x = row.get(c, 0) - q * v
            if x:
                if c not in row:
                    colidx.setdefault(c, set()).add(rid)
                row[c] = x
            elif c in row:
                del row[c]
                colidx[c].discard(rid)
        if not row:
            del active[rid]

    pivots: dict[int, dict[int, int]] = {}
    for c in sorted(colidx):
        ids = colidx.get(c)
        while ids and len(ids) > 1:
            pid = min(ids, key=lambda i: (abs(active[i][c]), len(active[i]), i))
            prow = dict(active[pid])
            p = prow[c]
            for rid in sorted(ids - {pid}):
                sub(rid, active[rid][c] // p, prow)
        if ids:
            (pid,) = ids
            prow = active.pop(pid)
            for k in prow:
                colidx[k].discard(pid)
            if prow[c] < 0:
                prow = {k: -x for k, x in prow.items()}
            pivots[c] = prow
        colidx.pop(c, None)
    _back_reduce(pivots)
    return pivots


def _back_reduce(pivots: dict[int, dict[int, int]]):
    """Reduce entries above each pivot into [0, pivot)."""
    occ: dict[int, set[int]] = {}
    for c0, row in pivots.items():
        for k in row:
            if k != c0:
                occ.setdefault(k, set()).add(c0)
    for c in sorted(pivots):
        prow = pivots[c]
        p = prow[c]
        for c0 in sorted(occ.get(c, ())):
            if c0 >= c:
                continue
            row = pivots[c0]
            q = row.get(c, 0) // p
            if not q:
                continue
            for k, v in prow.items():
                x = row.get(k, 0) - q * v
                if x:
                    if k not in row and k != c0:
                        occ.setdefault(k, set()).add(c0)
                    row[k] = x
                elif k in row:
                    del row[k]
                    occ[k].discard(c0)


class Lattice:
    """Echelon basis of a sublattice of Z^n with sparse rows.

    ``add`` inserts one vector incrementally; ``from_rows``/``extend`` run the
    batch elimination, which is much faster for large sparse systems.
    """

    def __init__(self, rows: Iterable[dict[int, int]] = ()):
        self.pivots: dict[int, dict[int, int]] = {}
        self._reduced = True
        for r in rows:
            self.add(r)

    @classmethod
    def from_rows(cls, rows: Iterable[dict[int, int]]) -> "Lattice":
        lat = cls()
        lat.pivots = sparse_hnf(rows)
        return lat

    def extend(self, rows: Iterable[dict[int, int]]) -> bool:
        """Add a batch of vectors; returns True when the lattice grew."""
        before = {c: r[c] for c, r in self.pivots.items()}
        self.pivots = sparse_hnf(list(self.pivots.values()) + list(rows))
        return before != {c: r[c] for c, r in self.pivots.items()}

    def __len__(self) -> int:
        return len(self.pivots)

    def add(self, vec: dict[int, int]) -> bool:
        """Insert a vector; returns True when the lattice grew."""
        v = {c: x for c, x in vec.items() if x}
        changed = False
        self._reduced = False
        while v:
            c = min(v)
            r = self.pivots.get(c)
            if r is None:
                if v[c] < 0:
                    v = {k: -x for k, x in v.items()}
                self.pivots[c] = v
                return True
            a, b = v[c], r[c]
            if a % b == 0:
                v = _submul(v, a // b, r)
                continue
            g, s, t = xgcd(b, a)
            new_r = {}
            for k in set(r) | set(v):
                x = s * r.get(k, 0) + t * v.get(k, 0)
                if x:
                    new_r[k] = x
            ab, bb = a // g, b // g
            nv = {}
            for k in set(r) | set(v):
                x = ab * r.get(k, 0) - bb * v.get(k, 0)
                if x:
                    nv[k] = x
            self.pivots[c] = new_r
            v = nv
            changed = True
        return changed

    def reduce(self, vec: dict[int, int]) -> dict[int, int]:
        """Remainder of ``vec`` after subtracting lattice vectors along the pivots."""
        v = {c: x for c, x in vec.items() if x}
        for c in sorted(self.pivots):
            x = v.get(c, 0)
            if x:
                r = self.pivots[c]
                q = x // r[c]
                if q:
                    v = _submul(v, q, r)
        return v

    def contains(self, vec: dict[int, int]) -> bool:
        v = {c: x for c, x in vec.items() if x}
        while v:
            c = min(v)
            r = self.pivots.get(c)
            if r is None or v[c] % r[c]:
                return False
            v = _submul(v, v[c] // r[c], r)
        return True

    def coordinates(self, vec: dict[int, int]) -> dict[int, int] | None:
        """Coefficients (keyed by pivot column) expressing ``vec`` in the echelon rows, or None."""
        v = {c: x for c, x in vec.items() if x}
        out: dict[int, int] = {}
        while v:
            c = min(v)
            r = self.pivots.get(c)
            if r is None or v[c] % r[c]:
                return None
            q = v[c] // r[c]
            out[c] = q
            v = _submul(v, q, r)
        return out

    def hnf_rows(self) -> list[tuple[int, dict[int, int]]]:
        """Fully reduced HNF rows as ``(pivot column, row)``, sorted by pivot."""
        if not self._reduced:
            _back_reduce(self.pivots)
            self._reduced = True
        return [(c, dict(self.pivots[c])) for c in sorted(self.pivots)]

    def quotient_invariants(self, ncols: int) -> tuple[list[int], int]:
        """Torsion invariants (>1) and free rank of Z^ncols / lattice."""
        rows = self.hnf_rows()
        keep = [(c, r) for c, r in rows if r[c] != 1]
        unit_cols = {c for c, r in rows if r[c] == 1}
        free_rank = ncols - len(rows)
        if not keep:
            return [], free_rank
        # rows with unit pivot have zeros in every other pivot column; drop them
        cols = sorted({k for _, r in keep for k in r} - unit_cols)
        index = {c: i for i, c in enumerate(cols)}
        divs = [d for d in invariant_factors(sparse_diagonal(
            [{index[k]: x for k, x in r.items() if k in index} for _, r in keep])) if d != 1]
        return divs, free_rank
