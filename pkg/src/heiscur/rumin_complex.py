"""The algebraic substitute complex: d0, its pseudo-inverse, the projectors
onto the invariant subbundle and the oblique subcomplex, and the second-order
differential built from them.

All operators here are exact rational matrices per degree. The pseudo-inverse
of d0 is the Moore-Penrose one (range orthogonal to the kernel, composition
with d0 an orthogonal projector), computed by rational rank factorization,
never by floating SVD.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from . import ratlin
from .heis_core import (
    DTHETA_SIGN,
    GradedOperator,
    MultiCovector,
    basis_tuples,
    dtheta,
    horizontal_basis,
    lefschetz_matrices,
    monomial_weight,
    wedge,
)
from .poly_forms import PolyForm, apply_graded, d_parts, exterior_d


@lru_cache(maxsize=None)
def d0_matrix(n: int, dtheta_sign: int = DTHETA_SIGN) -> GradedOperator:
    """The weight-preserving part of d on left-invariant forms, per degree.

    On a monomial with a theta factor it substitutes dtheta for theta (with
    the Leibniz sign); horizontal monomials are killed.
    """
    if n < 1:
        raise ValueError("rank must be at least 1")
    theta = 2 * n + 1
    dt = dtheta(n, dtheta_sign)
    blocks = {}
    for k in range(0, 2 * n + 1):
        src = basis_tuples(n, k)
        tgt = basis_tuples(n, k + 1)
        row_of = {idx: i for i, idx in enumerate(tgt)}
        m = ratlin.zeros(len(tgt), len(src))
        for j, idx in enumerate(src):
            if theta not in idx:
                continue
            rest = tuple(i for i in idx if i != theta)
            sign = (-1) ** len(rest)
            image = wedge(MultiCovector.monomial(n, rest), dt) * sign
            for out_idx, c in image.coeffs.items():
                m[row_of[out_idx]][j] = c
        blocks[k] = m
    return GradedOperator(n, +1, blocks)


@lru_cache(maxsize=None)
def d0_pinv(n: int, dtheta_sign: int = DTHETA_SIGN) -> GradedOperator:
    """Exact pseudo-inverse of d0: per degree k+1 -> k, the unique map with
    range in (ker d0)-perp such that d0 o d0inv orthogonally projects onto
    the range of d0. Preserves weights and takes vertical values."""
    d0 = d0_matrix(n, dtheta_sign)
    blocks = {}
    for k, blk in d0.blocks.items():
        blocks[k + 1] = ratlin.pinv(blk)
    return GradedOperator(n, -1, blocks)


@lru_cache(maxsize=None)
def pi_E0_matrix(n: int, dtheta_sign: int = DTHETA_SIGN) -> GradedOperator:
    """Orthogonal projector Id - d0inv d0 - d0 d0inv per degree."""
    d0 = d0_matrix(n, dtheta_sign)
    d0inv = d0_pinv(n, dtheta_sign)
    blocks = {}
    for k in range(0, 2 * n + 2):
        dim = len(basis_tuples(n, k))
        p = ratlin.identity(dim)
        if k in d0.blocks:
            p = ratlin.mat_sub(p, ratlin.matmul(d0inv.block(k + 1), d0.block(k)))
        if k - 1 in d0.blocks:
            p = ratlin.mat_sub(p, ratlin.matmul(d0.block(k - 1), d0inv.block(k)))
        blocks[k] = p
    return GradedOperator(n, 0, blocks)


def pi_E0(n: int) -> GradedOperator:
    return pi_E0_matrix(n)


def pi_E0_apply(a):
    """Apply the invariant projector to a covector or to a form pointwise."""
    if isinstance(a, MultiCovector):
        return pi_E0_matrix(a.n).apply(a)
    return apply_graded(pi_E0_matrix(a.n), a)


def d0_apply(a):
    if isinstance(a, MultiCovector):
        return d0_matrix(a.n).apply(a)
    return apply_graded(d0_matrix(a.n), a)


def d0_pinv_apply(a):
    if isinstance(a, MultiCovector):
        return d0_pinv(a.n).apply(a)
    return apply_graded(d0_pinv(a.n), a)


# ---------------------------------------------------------------------------
# the invariant subbundle, by the independent kernel route


def e0_basis(n: int, h: int) -> list[MultiCovector]:
    """Exact spanning set of the degree-h fiber, pairwise orthogonal.

    Low degrees (h <= n): horizontal covectors killed by L^(n-h+1).
    High degrees: theta wedge (horizontal (h-1)-covectors killed by L).
    This is computed from kernels of the Lefschetz matrices, independently
    of the projector route, so ranks can be cross-checked.
    """
    if not 0 <= h <= 2 * n + 1:
        raise ValueError(f"degree {h} out of range")
    lmats, _ = lefschetz_matrices(n)
    theta = 2 * n + 1
    if h <= n:
        basis = horizontal_basis(n, h)
        vectors = ratlin.gram_schmidt(_lefschetz_power_kernel(n, h, n - h + 1))
        return [MultiCovector(n, h, dict(zip(basis, v))) for v in vectors]
    # high degree: theta ^ (ker L in horizontal degree h-1)
    basis = horizontal_basis(n, h - 1)
    if h - 1 > 2 * n:
        return []
    vectors = ratlin.gram_schmidt(_lefschetz_power_kernel(n, h - 1, 1))
    th = MultiCovector.monomial(n, (theta,))
    out = []
    for v in vectors:
        horiz = MultiCovector(n, h - 1, dict(zip(basis, v)))
        out.append(wedge(th, horiz))
    return out


def _lefschetz_power_kernel(n: int, degree: int, power: int) -> list[list[Fraction]]:
    """Kernel basis of L^power on the degree-`degree` horizontal covectors.

    When the composite overshoots the top horizontal degree 2n the map is
    zero and the kernel is the whole space.
    """
    lmats, _ = lefschetz_matrices(n)
    dim = len(horizontal_basis(n, degree))
    m = ratlin.identity(dim)
    deg = degree
    for _ in range(power):
        if deg > 2 * n - 2:
            return [
                [Fraction(1) if i == j else Fraction(0) for i in range(dim)]
                for j in range(dim)
            ]
        m = ratlin.matmul(lmats[deg], m)
        deg += 2
    return ratlin.nullspace(m)


def e0_dims(n: int) -> tuple[int, ...]:
    return tuple(len(e0_basis(n, h)) for h in range(0, 2 * n + 2))


def pi_E0_ranks(n: int) -> tuple[int, ...]:
    p = pi_E0_matrix(n)
    return tuple(ratlin.rank(p.block(h)) for h in range(0, 2 * n + 2))


@dataclass
class RuminBasis:
    """Per-degree spanning sets of the invariant subbundle plus its projector."""

    n: int
    by_degree: dict[int, list[MultiCovector]]
    projector: GradedOperator

    def dim(self, h: int) -> int:
        return len(self.by_degree.get(h, []))


def build_rumin_basis(n: int) -> RuminBasis:
    by_degree = {h: e0_basis(n, h) for h in range(0, 2 * n + 2)}
    return RuminBasis(n, by_degree, pi_E0_matrix(n))


# ---------------------------------------------------------------------------
# the oblique projector and the substitute differential on forms


def pi_E(a: PolyForm, dtheta_sign: int = DTHETA_SIGN) -> PolyForm:
    """Id - d0inv d - d d0inv on polynomial forms.

    d0inv acts coefficient-wise as a constant matrix; d is the full
    exterior differential. Idempotent and a chain map on the polynomial ring.
    """
    op = d0_pinv(a.n, dtheta_sign)
    out = a
    if a.degree < 2 * a.n + 1:
        out = out - apply_graded(op, exterior_d(a, dtheta_sign))
    if a.degree >= 1:
        out = out - exterior_d(apply_graded(op, a), dtheta_sign)
    return out


def is_e0_valued(a: PolyForm) -> bool:
    return pi_E0_apply(a) == a


def d_c(a: PolyForm, dtheta_sign: int = DTHETA_SIGN) -> PolyForm:
    """The substitute differential: project, differentiate, project back.

    Input must be a pointwise section of the invariant subbundle (checked
    exactly); the result is again such a section. First order in horizontal
    derivatives away from middle degree, second order at degree n.
    """
    if not is_e0_valued(a):
        raise ValueError("d_c input must be a section of the invariant subbundle")
    return apply_graded(
        pi_E0_matrix(a.n, dtheta_sign), exterior_d(pi_E(a, dtheta_sign), dtheta_sign)
    )


def d1_part(a: PolyForm) -> PolyForm:
    return d_parts(a)[1]


def weights_preserved(op: GradedOperator) -> bool:
    """True when every block entry couples only equal-weight monomials."""
    n = op.n
    for k, blk in op.blocks.items():
        src = basis_tuples(n, k)
        tgt = basis_tuples(n, k + op.shift)
        for i, ti in enumerate(tgt):
            for j, sj in enumerate(src):
                if blk[i][j] != 0 and monomial_weight(n, ti) != monomial_weight(n, sj):
                    return False
    return True
