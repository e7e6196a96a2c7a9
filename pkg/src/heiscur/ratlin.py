"""Exact rational linear algebra on dense Fraction matrices.

Matrices are lists of rows holding ``fractions.Fraction`` entries. All sizes
here are small (exterior algebras up to rank 4, i.e. at most 126 monomials
per degree), so dense fraction-free Gaussian elimination is plenty fast and
keeps every result exact.
"""

from __future__ import annotations

from fractions import Fraction

Matrix = list[list[Fraction]]
Vector = list[Fraction]

ZERO = Fraction(0)
ONE = Fraction(1)


def zeros(rows: int, cols: int) -> Matrix:
    return [[ZERO] * cols for _ in range(rows)]


def identity(m: int) -> Matrix:
    out = zeros(m, m)
    for i in range(m):
        out[i][i] = ONE
    return out


def clone(a: Matrix) -> Matrix:
    return [row[:] for row in a]


def transpose(a: Matrix) -> Matrix:
    if not a:
        return []
    return [list(col) for col in zip(*a)]


def matmul(a: Matrix, b: Matrix) -> Matrix:
    if not a or not b:
        return zeros(len(a), len(b[0]) if b else 0)
    bt = transpose(b)
    return [[sum((x * y for x, y in zip(row, col)), ZERO) for col in bt] for row in a]


def matvec(a: Matrix, v: Vector) -> Vector:
    return [sum((x * y for x, y in zip(row, v)), ZERO) for row in a]


def mat_sub(a: Matrix, b: Matrix) -> Matrix:
    return [[x - y for x, y in zip(ra, rb)] for ra, rb in zip(a, b)]


def mat_eq(a: Matrix, b: Matrix) -> bool:
    return a == b


def is_zero_matrix(a: Matrix) -> bool:
    return all(x == 0 for row in a for x in row)


def scale(a: Matrix, c: Fraction) -> Matrix:
    return [[c * x for x in row] for row in a]


def rref(a: Matrix) -> tuple[Matrix, list[int]]:
    """Reduced row echelon form; returns (R, pivot column indices)."""
    m = clone(a)
    rows = len(m)
    cols = len(m[0]) if rows else 0
    pivots: list[int] = []
    r = 0
    for c in range(cols):
        pivot_row = next((i for i in range(r, rows) if m[i][c] != 0), None)
        if pivot_row is None:
            continue
        m[r], m[pivot_row] = m[pivot_row], m[r]
        inv = ONE / m[r][c]
        m[r] = [x * inv for x in m[r]]
        for i in range(rows):
            if i != r and m[i][c] != 0:
                f = m[i][c]
                m[i] = [x - f * y for x, y in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
        if r == rows:
            break
    return m, pivots


def rank(a: Matrix) -> int:
    if not a or not a[0]:
        return 0
    return len(rref(a)[1])


def nullspace(a: Matrix) -> list[Vector]:
    """Basis of the right kernel, one vector per free column."""
    if not a:
        return []
    cols = len(a[0])
    r, pivots = rref(a)
    pivot_set = set(pivots)
    free = [c for c in range(cols) if c not in pivot_set]
    basis = []
    for fc in free:
        v = [ZERO] * cols
        v[fc] = ONE
        for i, pc in enumerate(pivots):
            v[pc] = -r[i][fc]
        basis.append(v)
    return basis


def inverse(a: Matrix) -> Matrix:
    m = len(a)
    aug = [row[:] + ident_row[:] for row, ident_row in zip(a, identity(m))]
    r, pivots = rref(aug)
    if pivots[:m] != list(range(m)):
        raise ValueError("matrix is singular")
    return [row[m:] for row in r]


def pinv(a: Matrix) -> Matrix:
    """Moore-Penrose pseudo-inverse via exact rank factorization.

    Writes a = c @ f with c of full column rank and f of full row rank,
    then returns f^T (f f^T)^-1 (c^T c)^-1 c^T. Empty or zero matrices
    pseudo-invert to zero matrices of the transposed shape.
    """
    rows = len(a)
    cols = len(a[0]) if rows else 0
    if rows == 0 or cols == 0:
        return zeros(cols, rows)
    r, pivots = rref(a)
    if not pivots:
        return zeros(cols, rows)
    c = [[row[j] for j in pivots] for row in a]
    f = r[: len(pivots)]
    ct, ft = transpose(c), transpose(f)
    middle = matmul(inverse(matmul(f, ft)), inverse(matmul(ct, c)))
    return matmul(ft, matmul(middle, ct))


def column_span_contains(a: Matrix, v: Vector) -> bool:
    if all(x == 0 for x in v):
        return True
    if not a or not a[0]:
        return False
    augmented = [row + [x] for row, x in zip(a, v)]
    return rank(augmented) == rank(a)


def same_column_space(a: Matrix, b: Matrix) -> bool:
    """Compare column spaces of two matrices with equal row counts."""
    ra = rank(a) if a and a[0] else 0
    rb = rank(b) if b and b[0] else 0
    if ra != rb:
        return False
    if ra == 0:
        return True
    joined = [row_a + row_b for row_a, row_b in zip(a, b)]
    return rank(joined) == ra


def gram_schmidt(vectors: list[Vector]) -> list[Vector]:
    """Pairwise-orthogonal spanning set, rational (no normalization)."""
    ortho: list[Vector] = []
    for v in vectors:
        w = v[:]
        for u in ortho:
            uu = sum((x * x for x in u), ZERO)
            uw = sum((x * y for x, y in zip(u, w)), ZERO)
            if uu != 0 and uw != 0:
                f = uw / uu
                w = [x - f * y for x, y in zip(w, u)]
        if any(x != 0 for x in w):
            ortho.append(w)
    return ortho
