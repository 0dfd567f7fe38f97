"""Exact arithmetic and linear algebra over a prime field F_b.

Field elements are plain machine integers in {0, ..., b-1}.  Matrices are
small and dense; Gaussian elimination uses a fixed pivot policy (leftmost
nonzero column, smallest row index) so that kernel bases are reproducible
bit-for-bit across runs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .errors import InputError

MAX_BASE = 1 << 16


def is_prime(n: int) -> bool:
    """Deterministic primality test by trial division (n < 2^16)."""
    if n < 2:
        return False
    if n < 4:
        return True
    if n % 2 == 0:
        return False
    f = 3
    while f * f <= n:
        if n % f == 0:
            return False
        f += 2
    return True


@dataclass(frozen=True)
class PrimeBase:
    """A prime base b, validated at construction."""

    b: int

    def __post_init__(self):
        if not isinstance(self.b, int) or self.b < 2:
            raise InputError(f"base must be an integer >= 2, got {self.b!r}")
        if self.b > MAX_BASE:
            raise InputError(f"base {self.b} exceeds the supported maximum {MAX_BASE}")
        if not is_prime(self.b):
            raise InputError(f"base {self.b} is not prime")


def binom_mod_p(v: int, i: int, base: PrimeBase) -> int:
    """C(v, i) mod b via Lucas' theorem.

    Follows the usual conventions: C(v, i) = 0 whenever v < i, and
    C(0, 0) = 1 (empty product).
    """
    if v < 0 or i < 0:
        raise InputError("binomial arguments must be nonnegative")
    b = base.b
    result = 1
    while v or i:
        vd, v = v % b, v // b
        id_, i = i % b, i // b
        if id_ > vd:
            return 0
        result = result * math.comb(vd, id_) % b
    return result


@dataclass(frozen=True)
class FieldMatrix:
    """A dense matrix over F_b with entries reduced mod b."""

    base: PrimeBase
    n_rows: int
    n_cols: int
    entries: tuple = field(repr=False)

    def __post_init__(self):
        if self.n_rows < 0 or self.n_cols < 0:
            raise InputError("matrix dimensions must be nonnegative")
        if len(self.entries) != self.n_rows:
            raise InputError("row count does not match entries")
        b = self.base.b
        for row in self.entries:
            if len(row) != self.n_cols:
                raise InputError("ragged matrix rows")
            for e in row:
                if not 0 <= e < b:
                    raise InputError(f"entry {e} outside field range [0, {b})")

    @classmethod
    def from_rows(cls, rows, base: PrimeBase) -> "FieldMatrix":
        b = base.b
        entries = tuple(tuple(int(e) % b for e in row) for row in rows)
        n_rows = len(entries)
        n_cols = len(entries[0]) if entries else 0
        return cls(base, n_rows, n_cols, entries)

    @classmethod
    def identity(cls, n: int, base: PrimeBase) -> "FieldMatrix":
        return cls.from_rows(
            [[1 if i == j else 0 for j in range(n)] for i in range(n)], base
        )

    @classmethod
    def zeros(cls, n_rows: int, n_cols: int, base: PrimeBase) -> "FieldMatrix":
        return cls(base, n_rows, n_cols, tuple((0,) * n_cols for _ in range(n_rows)))

    def row(self, i: int) -> tuple:
        return self.entries[i]

    def transpose(self) -> "FieldMatrix":
        entries = tuple(
            tuple(self.entries[r][c] for r in range(self.n_rows))
            for c in range(self.n_cols)
        )
        return FieldMatrix(self.base, self.n_cols, self.n_rows, entries)

    def to_json(self) -> dict:
        return {
            "b": self.base.b,
            "rows": self.n_rows,
            "cols": self.n_cols,
            "entries": [list(row) for row in self.entries],
        }

    @classmethod
    def from_json(cls, data: dict) -> "FieldMatrix":
        base = PrimeBase(data["b"])
        m = cls.from_rows(data["entries"], base)
        if m.n_rows != data["rows"] or m.n_cols != data["cols"]:
            raise InputError("matrix JSON shape fields disagree with entries")
        return m


def mat_vec_mul(matrix: FieldMatrix, vector) -> tuple:
    """Matrix-vector product over F_b."""
    if len(vector) != matrix.n_cols:
        raise InputError(
            f"dimension mismatch: matrix has {matrix.n_cols} columns, "
            f"vector has {len(vector)} entries"
        )
    b = matrix.base.b
    return tuple(
        sum(r * v for r, v in zip(row, vector)) % b for row in matrix.entries
    )


def _row_echelon(rows, b):
    """In-place row echelon form; returns list of (pivot_row, pivot_col)."""
    n_rows = len(rows)
    n_cols = len(rows[0]) if n_rows else 0
    pivots = []
    pr = 0
    for col in range(n_cols):
        if pr >= n_rows:
            break
        # leftmost nonzero column, smallest row index
        sel = None
        for r in range(pr, n_rows):
            if rows[r][col]:
                sel = r
                break
        if sel is None:
            continue
        rows[pr], rows[sel] = rows[sel], rows[pr]
        inv = pow(rows[pr][col], b - 2, b)
        rows[pr] = [(e * inv) % b for e in rows[pr]]
        for r in range(n_rows):
            if r != pr and rows[r][col]:
                f = rows[r][col]
                rows[r] = [(e - f * p) % b for e, p in zip(rows[r], rows[pr])]
        pivots.append((pr, col))
        pr += 1
    return pivots


def rank(matrix: FieldMatrix) -> int:
    rows = [list(r) for r in matrix.entries]
    return len(_row_echelon(rows, matrix.base.b))


def kernel_basis(matrix: FieldMatrix) -> list:
    """Basis of the right kernel {v : M v = 0 over F_b}.

    Returns n_cols - rank(M) vectors, in the deterministic order induced by
    the free-column indices of the reduced row echelon form.
    """
    b = matrix.base.b
    n_cols = matrix.n_cols
    rows = [list(r) for r in matrix.entries]
    pivots = _row_echelon(rows, b)
    pivot_cols = {col: pr for pr, col in pivots}
    free_cols = [c for c in range(n_cols) if c not in pivot_cols]
    basis = []
    for fc in free_cols:
        v = [0] * n_cols
        v[fc] = 1
        for col, pr in pivot_cols.items():
            v[col] = (-rows[pr][fc]) % b
        basis.append(tuple(v))
    return basis


def rows_independent(rows, base: PrimeBase) -> bool:
    """True iff the given vectors are linearly independent over F_b."""
    rows = [list(r) for r in rows]
    if not rows:
        return True
    if any(len(r) != len(rows[0]) for r in rows):
        raise InputError("row vectors must all have the same length")
    work = [list(r) for r in rows]
    return len(_row_echelon(work, base.b)) == len(rows)
