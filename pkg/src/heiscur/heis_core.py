"""The Heisenberg group and its weight-graded exterior algebra of covectors.

Points live in exponential coordinates (x, y, t). The left-invariant coframe
is indexed 1..2n+1: indices 1..n are the dx_i, indices n+1..2n the dy_i, and
index 2n+1 is the contact form theta. A basis monomial of the exterior
algebra is a strictly increasing index tuple; its weight is its degree plus
one if it contains theta (theta scales like lambda^2 under the anisotropic
dilations, horizontal covectors like lambda).

Everything algebraic is exact: coefficients are ``fractions.Fraction``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from numbers import Rational

from . import ratlin
from .ratlin import Matrix

Scalar = Fraction
Index = tuple[int, ...]

# Sign convention, fixed once: dtheta = -sum_j w_j ^ w_{j+n}, obtained by
# differentiating theta = dt - (1/2) sum (x_j dy_j - y_j dx_j) in coordinates.
DTHETA_SIGN = -1


def _as_fraction(v) -> Fraction:
    if isinstance(v, Fraction):
        return v
    if isinstance(v, Rational):
        return Fraction(v)
    raise TypeError(f"expected a rational scalar, got {type(v).__name__}")


# ---------------------------------------------------------------------------
# group points


@dataclass(frozen=True)
class GroupPoint:
    """A point of the rank-n Heisenberg group in exponential coordinates."""

    x: tuple
    y: tuple
    t: object

    def __post_init__(self):
        if len(self.x) != len(self.y):
            raise ValueError("x and y must have the same length")

    @property
    def n(self) -> int:
        return len(self.x)

    def coords(self) -> tuple:
        return tuple(self.x) + tuple(self.y) + (self.t,)

    @staticmethod
    def identity(n: int) -> "GroupPoint":
        zero = Fraction(0)
        return GroupPoint((zero,) * n, (zero,) * n, zero)

    @staticmethod
    def of(x, y, t) -> "GroupPoint":
        xs = tuple(x) if isinstance(x, (tuple, list)) else (x,)
        ys = tuple(y) if isinstance(y, (tuple, list)) else (y,)
        return GroupPoint(xs, ys, t)


def group_mul(p: GroupPoint, q: GroupPoint) -> GroupPoint:
    """Group law (x,y,t)*(x',y',t') with twist (1/2) sum (x_j y'_j - y_j x'_j)."""
    if p.n != q.n:
        raise ValueError(f"rank mismatch: {p.n} vs {q.n}")
    half = Fraction(1, 2)
    twist = sum(px * qy - py * qx for px, py, qx, qy in zip(p.x, p.y, q.x, q.y))
    return GroupPoint(
        tuple(a + b for a, b in zip(p.x, q.x)),
        tuple(a + b for a, b in zip(p.y, q.y)),
        p.t + q.t + half * twist,
    )


def group_inverse(p: GroupPoint) -> GroupPoint:
    return GroupPoint(tuple(-a for a in p.x), tuple(-a for a in p.y), -p.t)


def dilate_point(lam, p: GroupPoint) -> GroupPoint:
    """Anisotropic dilation (x, y, t) -> (lam x, lam y, lam^2 t), lam > 0."""
    if lam <= 0:
        raise ValueError("dilation factor must be positive")
    return GroupPoint(
        tuple(lam * a for a in p.x),
        tuple(lam * a for a in p.y),
        lam * lam * p.t,
    )


def koranyi_gauge4(p: GroupPoint):
    """Fourth power of the Cygan-Koranyi norm; exact for rational points."""
    sq = sum(a * a for a in p.x) + sum(a * a for a in p.y)
    return sq * sq + 16 * p.t * p.t


def koranyi_norm(p: GroupPoint) -> float:
    return float(koranyi_gauge4(p)) ** 0.25


def koranyi_distance(p: GroupPoint, q: GroupPoint) -> float:
    return koranyi_norm(group_mul(group_inverse(p), q))


def frame_change(p: GroupPoint) -> Matrix:
    """Matrix sending coordinate tangent components to frame components.

    Rows are ordered X_1..X_n, Y_1..Y_n, Z; columns are the coordinate
    directions (d/dx_1..d/dx_n, d/dy_1..d/dy_n, d/dt). The X and Y rows are
    the identity; the Z row encodes d/dx_i -> X_i + (y_i/2) Z and
    d/dy_i -> Y_i - (x_i/2) Z, so the Z row applied to a coordinate vector
    is exactly theta evaluated on it.
    """
    n = p.n
    dim = 2 * n + 1
    m = ratlin.identity(dim)
    half = Fraction(1, 2)
    for i in range(n):
        m[2 * n][i] = half * p.y[i]
        m[2 * n][n + i] = -half * p.x[i]
    return m


# ---------------------------------------------------------------------------
# multi-covectors


def basis_tuples(n: int, degree: int) -> list[Index]:
    return list(itertools.combinations(range(1, 2 * n + 2), degree))


def monomial_weight(n: int, idx: Index) -> int:
    return len(idx) + (1 if (2 * n + 1) in idx else 0)


def _merge_sign(a: Index, b: Index) -> tuple[int, Index] | None:
    """Sign and sorted union of two increasing tuples; None on collision."""
    if set(a) & set(b):
        return None
    merged = []
    sign = 1
    i = j = 0
    while i < len(a) and j < len(b):
        if a[i] < b[j]:
            merged.append(a[i])
            i += 1
        else:
            # b[j] jumps over the remaining len(a) - i entries of a
            if (len(a) - i) % 2:
                sign = -sign
            merged.append(b[j])
            j += 1
    merged.extend(a[i:])
    merged.extend(b[j:])
    return sign, tuple(merged)


class MultiCovector:
    """An exact element of the exterior algebra on the left-invariant coframe.

    coeffs maps strictly increasing index tuples to nonzero Fractions.
    """

    __slots__ = ("n", "degree", "coeffs")

    def __init__(self, n: int, degree: int, coeffs: dict[Index, Fraction] | None = None):
        if not 0 <= degree <= 2 * n + 1:
            raise ValueError(f"degree {degree} out of range for rank {n}")
        self.n = n
        self.degree = degree
        clean: dict[Index, Fraction] = {}
        for idx, c in (coeffs or {}).items():
            idx = tuple(idx)
            if len(idx) != degree or any(a >= b for a, b in zip(idx, idx[1:])):
                raise ValueError(f"bad basis tuple {idx} for degree {degree}")
            if idx and not (1 <= idx[0] and idx[-1] <= 2 * n + 1):
                raise ValueError(f"index out of range in {idx}")
            c = _as_fraction(c)
            if c != 0:
                clean[idx] = c
        self.coeffs = clean

    # -- constructors ------------------------------------------------------

    @staticmethod
    def zero(n: int, degree: int) -> "MultiCovector":
        return MultiCovector(n, degree, {})

    @staticmethod
    def monomial(n: int, idx: Index, coeff=1) -> "MultiCovector":
        return MultiCovector(n, len(idx), {tuple(idx): Fraction(coeff)})

    @staticmethod
    def from_vector(n: int, degree: int, vec) -> "MultiCovector":
        basis = basis_tuples(n, degree)
        return MultiCovector(n, degree, dict(zip(basis, vec)))

    # -- basic structure ----------------------------------------------------

    def to_vector(self) -> list[Fraction]:
        return [self.coeffs.get(idx, Fraction(0)) for idx in basis_tuples(self.n, self.degree)]

    def is_zero(self) -> bool:
        return not self.coeffs

    def is_horizontal(self) -> bool:
        theta = 2 * self.n + 1
        return all(theta not in idx for idx in self.coeffs)

    def is_vertical(self) -> bool:
        theta = 2 * self.n + 1
        return all(theta in idx for idx in self.coeffs)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, MultiCovector)
            and self.n == other.n
            and self.degree == other.degree
            and self.coeffs == other.coeffs
        )

    def __hash__(self):
        return hash((self.n, self.degree, frozenset(self.coeffs.items())))

    def __add__(self, other: "MultiCovector") -> "MultiCovector":
        self._check_compatible(other)
        out = dict(self.coeffs)
        for idx, c in other.coeffs.items():
            s = out.get(idx, Fraction(0)) + c
            if s:
                out[idx] = s
            else:
                out.pop(idx, None)
        return MultiCovector(self.n, self.degree, out)

    def __sub__(self, other: "MultiCovector") -> "MultiCovector":
        return self + (-other)

    def __neg__(self) -> "MultiCovector":
        return MultiCovector(self.n, self.degree, {i: -c for i, c in self.coeffs.items()})

    def __mul__(self, scalar) -> "MultiCovector":
        s = _as_fraction(scalar)
        if s == 0:
            return MultiCovector.zero(self.n, self.degree)
        return MultiCovector(self.n, self.degree, {i: s * c for i, c in self.coeffs.items()})

    __rmul__ = __mul__

    def _check_compatible(self, other: "MultiCovector"):
        if self.n != other.n:
            raise ValueError("rank mismatch")
        if self.degree != other.degree:
            raise ValueError("degree mismatch")

    def __repr__(self):
        if not self.coeffs:
            return f"MultiCovector(n={self.n}, 0, deg {self.degree})"
        names = []
        for idx in sorted(self.coeffs):
            mono = "^".join(_index_name(self.n, i) for i in idx) or "1"
            names.append(f"{self.coeffs[idx]}*{mono}")
        return " + ".join(names)


def _index_name(n: int, i: int) -> str:
    if i == 2 * n + 1:
        return "theta"
    if i <= n:
        return f"dx{i}"
    return f"dy{i - n}"


def wedge(a: MultiCovector, b: MultiCovector) -> MultiCovector:
    if a.n != b.n:
        raise ValueError("rank mismatch")
    n = a.n
    deg = a.degree + b.degree
    if deg > 2 * n + 1:
        return MultiCovector.zero(n, 2 * n + 1)
    out: dict[Index, Fraction] = {}
    for ia, ca in a.coeffs.items():
        for ib, cb in b.coeffs.items():
            ms = _merge_sign(ia, ib)
            if ms is None:
                continue
            sign, idx = ms
            s = out.get(idx, Fraction(0)) + sign * ca * cb
            if s:
                out[idx] = s
            else:
                out.pop(idx, None)
    return MultiCovector(n, deg, out)


def inner_product(a: MultiCovector, b: MultiCovector) -> Fraction:
    """Inner product making the coframe monomials orthonormal."""
    a._check_compatible(b)
    small, big = (a.coeffs, b.coeffs) if len(a.coeffs) <= len(b.coeffs) else (b.coeffs, a.coeffs)
    return sum((c * big.get(idx, Fraction(0)) for idx, c in small.items()), Fraction(0))


def norm_sq(a: MultiCovector) -> Fraction:
    return inner_product(a, a)


def weight_split(a: MultiCovector) -> tuple[MultiCovector, MultiCovector]:
    """Orthogonal split into (horizontal, theta-divisible) parts."""
    theta = 2 * a.n + 1
    horiz = {i: c for i, c in a.coeffs.items() if theta not in i}
    vert = {i: c for i, c in a.coeffs.items() if theta in i}
    return MultiCovector(a.n, a.degree, horiz), MultiCovector(a.n, a.degree, vert)


def dilation_pullback(lam, a: MultiCovector) -> MultiCovector:
    """Pullback under the dilation: each monomial scales by lam^weight."""
    lam = _as_fraction(lam)
    if lam <= 0:
        raise ValueError("dilation factor must be positive")
    out = {i: c * lam ** monomial_weight(a.n, i) for i, c in a.coeffs.items()}
    return MultiCovector(a.n, a.degree, out)


def dtheta(n: int, sign: int = DTHETA_SIGN) -> MultiCovector:
    coeffs = {(j, j + n): Fraction(sign) for j in range(1, n + 1)}
    return MultiCovector(n, 2, coeffs)


def volume_h(n: int) -> MultiCovector:
    return MultiCovector.monomial(n, tuple(range(1, 2 * n + 1)))


def volume(n: int) -> MultiCovector:
    return MultiCovector.monomial(n, tuple(range(1, 2 * n + 2)))


def hodge_star_h(a: MultiCovector) -> MultiCovector:
    """Hodge star on the horizontal algebra, orientation w_1 ^ ... ^ w_2n."""
    if not a.is_horizontal():
        raise ValueError("hodge star is defined on horizontal covectors")
    n = a.n
    full = range(1, 2 * n + 1)
    out: dict[Index, Fraction] = {}
    for idx, c in a.coeffs.items():
        comp = tuple(i for i in full if i not in idx)
        ms = _merge_sign(idx, comp)
        assert ms is not None
        sign, _ = ms
        out[comp] = sign * c
    return MultiCovector(n, 2 * n - a.degree, out)


# ---------------------------------------------------------------------------
# graded operators


def horizontal_basis(n: int, degree: int) -> list[Index]:
    return list(itertools.combinations(range(1, 2 * n + 1), degree))


class GradedOperator:
    """A degree-indexed family of exact matrices acting on MultiCovectors.

    blocks[k] maps the degree-k monomial basis (columns) to the degree
    (k + shift) basis (rows). Missing blocks act as zero.
    """

    def __init__(self, n: int, shift: int, blocks: dict[int, Matrix]):
        self.n = n
        self.shift = shift
        self.blocks = blocks

    def block(self, degree: int) -> Matrix:
        blk = self.blocks.get(degree)
        if blk is not None:
            return blk
        rows = _basis_dim(self.n, degree + self.shift)
        cols = _basis_dim(self.n, degree)
        return ratlin.zeros(rows, cols)

    def apply(self, a: MultiCovector) -> MultiCovector:
        if a.n != self.n:
            raise ValueError("rank mismatch")
        target = a.degree + self.shift
        if not 0 <= target <= 2 * self.n + 1:
            return MultiCovector.zero(self.n, min(max(target, 0), 2 * self.n + 1))
        blk = self.blocks.get(a.degree)
        if blk is None or a.is_zero():
            return MultiCovector.zero(self.n, target)
        src_basis = basis_tuples(self.n, a.degree)
        col_of = {idx: j for j, idx in enumerate(src_basis)}
        tgt_basis = basis_tuples(self.n, target)
        out = [Fraction(0)] * len(tgt_basis)
        for idx, c in a.coeffs.items():
            j = col_of[idx]
            for i in range(len(tgt_basis)):
                if blk[i][j]:
                    out[i] += blk[i][j] * c
        return MultiCovector.from_vector(self.n, target, out)

    def compose(self, other: "GradedOperator") -> "GradedOperator":
        """self after other."""
        if self.n != other.n:
            raise ValueError("rank mismatch")
        blocks = {}
        for k, blk in other.blocks.items():
            outer = self.blocks.get(k + other.shift)
            if outer is not None:
                blocks[k] = ratlin.matmul(outer, blk)
        return GradedOperator(self.n, self.shift + other.shift, blocks)

    def adjoint(self) -> "GradedOperator":
        blocks = {k + self.shift: ratlin.transpose(blk) for k, blk in self.blocks.items()}
        return GradedOperator(self.n, -self.shift, blocks)


def _basis_dim(n: int, degree: int) -> int:
    if not 0 <= degree <= 2 * n + 1:
        return 0
    import math

    return math.comb(2 * n + 1, degree)


@lru_cache(maxsize=None)
def lefschetz_matrices(n: int, sign: int = DTHETA_SIGN) -> tuple[dict[int, Matrix], dict[int, Matrix]]:
    """Matrices of L (wedge with dtheta) and its adjoint on the horizontal bases."""
    dt = dtheta(n, sign)
    lmats: dict[int, Matrix] = {}
    for k in range(0, 2 * n - 1):
        src = horizontal_basis(n, k)
        tgt = horizontal_basis(n, k + 2)
        row_of = {idx: i for i, idx in enumerate(tgt)}
        m = ratlin.zeros(len(tgt), len(src))
        for j, idx in enumerate(src):
            image = wedge(dt, MultiCovector.monomial(n, idx))
            for out_idx, c in image.coeffs.items():
                m[row_of[out_idx]][j] = c
        lmats[k] = m
    lams = {k + 2: ratlin.transpose(m) for k, m in lmats.items()}
    return lmats, lams


def lefschetz(a: MultiCovector, direction: str) -> MultiCovector:
    """Wedge with dtheta (raise) or its exact metric adjoint (lower)."""
    if not a.is_horizontal():
        raise ValueError("lefschetz operators act on horizontal covectors")
    n = a.n
    if direction == "raise":
        if a.degree > 2 * n - 2:
            return MultiCovector.zero(n, min(a.degree + 2, 2 * n + 1))
        return wedge(dtheta(n), a)
    if direction == "lower":
        if a.degree < 2:
            return MultiCovector.zero(n, 0)
        _, lams = lefschetz_matrices(n)
        mat = lams[a.degree]
        src = horizontal_basis(n, a.degree)
        col_of = {idx: j for j, idx in enumerate(src)}
        tgt = horizontal_basis(n, a.degree - 2)
        out = [Fraction(0)] * len(tgt)
        for idx, c in a.coeffs.items():
            j = col_of[idx]
            for i in range(len(tgt)):
                if mat[i][j]:
                    out[i] += mat[i][j] * c
        return MultiCovector(n, a.degree - 2, dict(zip(tgt, out)))
    raise ValueError("direction must be 'raise' or 'lower'")
