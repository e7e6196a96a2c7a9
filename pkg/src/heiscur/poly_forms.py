"""Differential forms with exact polynomial coefficients on the group.

Coefficients live in the ring Q[x_1..x_n, y_1..y_n, t] (variable slots
0..n-1 for x, n..2n-1 for y, slot 2n for t) and forms are expressed in the
left-invariant coframe, so the exterior differential expands through the
horizontal derivatives X_i, Y_i and the vertical derivative Z:

    d f = sum_i (X_i f) w_i + (Y_i f) w_{n+i} + (Z f) theta,

plus the algebraic term coming from d(theta) = dtheta on the theta factor
of each monomial. This makes the weight decomposition d = d0 + d1 + d2
directly computable term by term.
"""

from __future__ import annotations

import math
from fractions import Fraction
from numbers import Rational

from .heis_core import (
    DTHETA_SIGN,
    GradedOperator,
    GroupPoint,
    Index,
    MultiCovector,
    _merge_sign,
    basis_tuples,
    dtheta,
    monomial_weight,
    wedge,
)

Expo = tuple[int, ...]

# Box over the full coordinate space: one rational interval per coordinate.
Box = list[tuple[Fraction, Fraction]]


def _frac(v) -> Fraction:
    if isinstance(v, Fraction):
        return v
    if isinstance(v, Rational):
        return Fraction(v)
    raise TypeError(f"expected rational, got {type(v).__name__}")


class Polynomial:
    """Sparse multivariate polynomial with Fraction coefficients.

    terms maps exponent tuples (length nvars) to nonzero coefficients.
    """

    __slots__ = ("nvars", "terms")

    def __init__(self, nvars: int, terms: dict[Expo, Fraction] | None = None):
        self.nvars = nvars
        clean: dict[Expo, Fraction] = {}
        for e, c in (terms or {}).items():
            c = _frac(c)
            if len(e) != nvars:
                raise ValueError(f"exponent tuple {e} has wrong length")
            if c != 0:
                clean[tuple(e)] = c
        self.terms = clean

    @staticmethod
    def const(nvars: int, value) -> "Polynomial":
        value = _frac(value)
        if value == 0:
            return Polynomial(nvars)
        return Polynomial(nvars, {(0,) * nvars: value})

    @staticmethod
    def var(nvars: int, index: int) -> "Polynomial":
        e = [0] * nvars
        e[index] = 1
        return Polynomial(nvars, {tuple(e): Fraction(1)})

    def is_zero(self) -> bool:
        return not self.terms

    def is_constant(self) -> bool:
        return all(all(x == 0 for x in e) for e in self.terms)

    def constant_value(self) -> Fraction:
        return self.terms.get((0,) * self.nvars, Fraction(0))

    def total_degree(self) -> int:
        """Max term degree; -1 for the zero polynomial."""
        if not self.terms:
            return -1
        return max(sum(e) for e in self.terms)

    def min_degree(self) -> int:
        if not self.terms:
            return -1
        return min(sum(e) for e in self.terms)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Polynomial)
            and self.nvars == other.nvars
            and self.terms == other.terms
        )

    def __hash__(self):
        return hash((self.nvars, frozenset(self.terms.items())))

    def __add__(self, other: "Polynomial") -> "Polynomial":
        out = dict(self.terms)
        for e, c in other.terms.items():
            s = out.get(e, Fraction(0)) + c
            if s:
                out[e] = s
            else:
                out.pop(e, None)
        return Polynomial(self.nvars, out)

    def __neg__(self) -> "Polynomial":
        return Polynomial(self.nvars, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other: "Polynomial") -> "Polynomial":
        return self + (-other)

    def __mul__(self, other) -> "Polynomial":
        if not isinstance(other, Polynomial):
            return self.scale(other)
        out: dict[Expo, Fraction] = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                s = out.get(e, Fraction(0)) + c1 * c2
                if s:
                    out[e] = s
                else:
                    out.pop(e, None)
        return Polynomial(self.nvars, out)

    def __rmul__(self, other):
        return self.scale(other)

    def scale(self, c) -> "Polynomial":
        c = _frac(c)
        if c == 0:
            return Polynomial(self.nvars)
        return Polynomial(self.nvars, {e: c * v for e, v in self.terms.items()})

    def __pow__(self, k: int) -> "Polynomial":
        if k < 0:
            raise ValueError("negative power")
        out = Polynomial.const(self.nvars, 1)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def diff(self, index: int) -> "Polynomial":
        out: dict[Expo, Fraction] = {}
        for e, c in self.terms.items():
            if e[index] == 0:
                continue
            ne = list(e)
            ne[index] -= 1
            out[tuple(ne)] = c * e[index]
        return Polynomial(self.nvars, out)

    def eval(self, values: list) -> object:
        """Evaluate at a point; works for Fractions, floats, numpy arrays."""
        total = None
        for e, c in self.terms.items():
            term = c if all(x == 0 for x in e) else c
            for v, k in zip(values, e):
                if k:
                    term = term * v**k
            total = term if total is None else total + term
        if total is None:
            return Fraction(0)
        return total

    def eval_float(self, values) -> object:
        total = 0.0
        for e, c in self.terms.items():
            term = float(c)
            for v, k in zip(values, e):
                if k:
                    term = term * v**k
            total = total + term
        return total

    def compose(self, args: list["Polynomial"]) -> "Polynomial":
        """Substitute args[i] for variable i; args live in a common ring."""
        if len(args) != self.nvars:
            raise ValueError("wrong number of substitution arguments")
        nv = args[0].nvars if args else 0
        out = Polynomial(nv)
        power_cache: dict[tuple[int, int], Polynomial] = {}
        for e, c in self.terms.items():
            term = Polynomial.const(nv, c)
            for i, k in enumerate(e):
                if not k:
                    continue
                key = (i, k)
                if key not in power_cache:
                    power_cache[key] = args[i] ** k
                term = term * power_cache[key]
            out = out + term
        return out

    def antiderivative(self, index: int) -> "Polynomial":
        out: dict[Expo, Fraction] = {}
        for e, c in self.terms.items():
            ne = list(e)
            ne[index] += 1
            out[tuple(ne)] = c / ne[index]
        return Polynomial(self.nvars, out)

    def integrate_box(self, box: Box) -> Fraction:
        """Exact integral over a rational coordinate box (all variables)."""
        if len(box) != self.nvars:
            raise ValueError("box dimension mismatch")
        total = Fraction(0)
        for e, c in self.terms.items():
            term = c
            for (lo, hi), k in zip(box, e):
                lo, hi = _frac(lo), _frac(hi)
                term *= (hi ** (k + 1) - lo ** (k + 1)) / (k + 1)
            total += term
        return total

    def integrate_unit_cube(self) -> Fraction:
        total = Fraction(0)
        for e, c in self.terms.items():
            denom = 1
            for k in e:
                denom *= k + 1
            total += c / denom
        return total

    def integrate_unit_simplex(self) -> Fraction:
        """Exact integral over the standard simplex {u_i >= 0, sum u_i <= 1}."""
        total = Fraction(0)
        k = self.nvars
        for e, c in self.terms.items():
            num = 1
            for a in e:
                num *= math.factorial(a)
            total += c * Fraction(num, math.factorial(k + sum(e)))
        return total

    def __repr__(self):
        if not self.terms:
            return "0"
        bits = []
        for e in sorted(self.terms):
            mono = "*".join(f"v{i}^{k}" for i, k in enumerate(e) if k)
            bits.append(f"{self.terms[e]}{'*' + mono if mono else ''}")
        return " + ".join(bits)


# ---------------------------------------------------------------------------
# coordinate ring helpers for rank n


def nvars_for(n: int) -> int:
    return 2 * n + 1


def var_x(n: int, i: int) -> Polynomial:
    if not 1 <= i <= n:
        raise ValueError(f"x index {i} out of range")
    return Polynomial.var(nvars_for(n), i - 1)


def var_y(n: int, i: int) -> Polynomial:
    if not 1 <= i <= n:
        raise ValueError(f"y index {i} out of range")
    return Polynomial.var(nvars_for(n), n + i - 1)


def var_t(n: int) -> Polynomial:
    return Polynomial.var(nvars_for(n), 2 * n)


def horiz_derive(f: Polynomial, n: int, which: str, i: int = 1) -> Polynomial:
    """Apply a left-invariant frame field (X_i, Y_i or Z) to a polynomial."""
    if f.nvars != nvars_for(n):
        raise ValueError("polynomial lives in the wrong ring")
    half = Fraction(1, 2)
    t = 2 * n
    if which == "Z":
        return f.diff(t)
    if not 1 <= i <= n:
        raise ValueError(f"frame index {i} out of range for rank {n}")
    if which == "X":
        return f.diff(i - 1) - (var_y(n, i) * f.diff(t)).scale(half)
    if which == "Y":
        return f.diff(n + i - 1) + (var_x(n, i) * f.diff(t)).scale(half)
    raise ValueError("which must be 'X', 'Y' or 'Z'")


# ---------------------------------------------------------------------------
# polynomial-coefficient forms


class PolyForm:
    """A differential form with polynomial coefficients in the coframe basis."""

    __slots__ = ("n", "degree", "coeffs")

    def __init__(self, n: int, degree: int, coeffs: dict[Index, Polynomial] | None = None):
        if not 0 <= degree <= 2 * n + 1:
            raise ValueError(f"degree {degree} out of range for rank {n}")
        self.n = n
        self.degree = degree
        clean: dict[Index, Polynomial] = {}
        nv = nvars_for(n)
        for idx, p in (coeffs or {}).items():
            idx = tuple(idx)
            if len(idx) != degree or any(a >= b for a, b in zip(idx, idx[1:])):
                raise ValueError(f"bad basis tuple {idx}")
            if not isinstance(p, Polynomial):
                p = Polynomial.const(nv, p)
            if p.nvars != nv:
                raise ValueError("coefficient lives in the wrong ring")
            if not p.is_zero():
                clean[idx] = p
        self.coeffs = clean

    @staticmethod
    def zero(n: int, degree: int) -> "PolyForm":
        return PolyForm(n, degree, {})

    @staticmethod
    def from_covector(a: MultiCovector) -> "PolyForm":
        nv = nvars_for(a.n)
        return PolyForm(a.n, a.degree, {i: Polynomial.const(nv, c) for i, c in a.coeffs.items()})

    @staticmethod
    def from_function(n: int, p: Polynomial) -> "PolyForm":
        return PolyForm(n, 0, {(): p})

    @staticmethod
    def monomial(n: int, idx: Index, p) -> "PolyForm":
        return PolyForm(n, len(idx), {tuple(idx): p})

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
            isinstance(other, PolyForm)
            and self.n == other.n
            and self.degree == other.degree
            and self.coeffs == other.coeffs
        )

    def __add__(self, other: "PolyForm") -> "PolyForm":
        self._check(other)
        out = dict(self.coeffs)
        for idx, p in other.coeffs.items():
            s = out.get(idx)
            s = p if s is None else s + p
            if s.is_zero():
                out.pop(idx, None)
            else:
                out[idx] = s
        return PolyForm(self.n, self.degree, out)

    def __neg__(self) -> "PolyForm":
        return PolyForm(self.n, self.degree, {i: -p for i, p in self.coeffs.items()})

    def __sub__(self, other: "PolyForm") -> "PolyForm":
        return self + (-other)

    def scale(self, c) -> "PolyForm":
        return PolyForm(self.n, self.degree, {i: p.scale(c) for i, p in self.coeffs.items()})

    def multiply_function(self, f: Polynomial) -> "PolyForm":
        return PolyForm(self.n, self.degree, {i: f * p for i, p in self.coeffs.items()})

    def _check(self, other: "PolyForm"):
        if self.n != other.n or self.degree != other.degree:
            raise ValueError("rank or degree mismatch")

    def __repr__(self):
        if not self.coeffs:
            return f"PolyForm(n={self.n}, 0, deg {self.degree})"
        from .heis_core import _index_name

        bits = []
        for idx in sorted(self.coeffs):
            mono = "^".join(_index_name(self.n, i) for i in idx) or "1"
            bits.append(f"({self.coeffs[idx]})*{mono}")
        return " + ".join(bits)


def wedge_forms(a: PolyForm, b: PolyForm) -> PolyForm:
    if a.n != b.n:
        raise ValueError("rank mismatch")
    n = a.n
    deg = a.degree + b.degree
    if deg > 2 * n + 1:
        return PolyForm.zero(n, 2 * n + 1)
    out: dict[Index, Polynomial] = {}
    for ia, pa in a.coeffs.items():
        for ib, pb in b.coeffs.items():
            ms = _merge_sign(ia, ib)
            if ms is None:
                continue
            sign, idx = ms
            term = (pa * pb).scale(sign)
            s = out.get(idx)
            s = term if s is None else s + term
            if s.is_zero():
                out.pop(idx, None)
            else:
                out[idx] = s
    return PolyForm(n, deg, out)


def evaluate_at(a: PolyForm, p: GroupPoint) -> MultiCovector:
    """Substitute the coordinates of p into every coefficient."""
    if p.n != a.n:
        raise ValueError("rank mismatch")
    values = list(p.coords())
    out = {}
    for idx, poly in a.coeffs.items():
        v = poly.eval(values)
        if v != 0:
            out[idx] = _frac(v)
    return MultiCovector(a.n, a.degree, out)


def d_parts(a: PolyForm, dtheta_sign: int = DTHETA_SIGN) -> tuple[PolyForm, PolyForm, PolyForm]:
    """The weight pieces (d0, d1, d2) of the exterior differential.

    d0 is the algebraic part (theta factor replaced through dtheta), d1 the
    horizontal-derivative part, d2 the vertical-derivative part.
    """
    n = a.n
    k = a.degree
    theta = 2 * n + 1
    target = k + 1
    if target > 2 * n + 1:
        z = PolyForm.zero(n, 2 * n + 1)
        return z, z, z
    d0 = PolyForm.zero(n, target)
    d1 = PolyForm.zero(n, target)
    d2 = PolyForm.zero(n, target)
    dt = dtheta(n, dtheta_sign)
    for idx, f in a.coeffs.items():
        mono = MultiCovector.monomial(n, idx)
        # horizontal derivatives: weight +1
        for i in range(1, n + 1):
            xf = horiz_derive(f, n, "X", i)
            if not xf.is_zero():
                piece = wedge(MultiCovector.monomial(n, (i,)), mono)
                d1 = d1 + _covector_times(piece, xf)
            yf = horiz_derive(f, n, "Y", i)
            if not yf.is_zero():
                piece = wedge(MultiCovector.monomial(n, (n + i,)), mono)
                d1 = d1 + _covector_times(piece, yf)
        # vertical derivative: weight +2
        zf = horiz_derive(f, n, "Z")
        if not zf.is_zero() and theta not in idx:
            piece = wedge(MultiCovector.monomial(n, (theta,)), mono)
            d2 = d2 + _covector_times(piece, zf)
        # algebraic part: d(theta factor) through dtheta, weight +0
        if theta in idx:
            rest = tuple(i for i in idx if i != theta)
            sign = (-1) ** len(rest)
            piece = wedge(MultiCovector.monomial(n, rest), dt) * sign
            d0 = d0 + _covector_times(piece, f)
    return d0, d1, d2


def _covector_times(c: MultiCovector, f: Polynomial) -> PolyForm:
    return PolyForm(c.n, c.degree, {i: f.scale(v) for i, v in c.coeffs.items()})


def exterior_d(a: PolyForm, dtheta_sign: int = DTHETA_SIGN) -> PolyForm:
    d0, d1, d2 = d_parts(a, dtheta_sign)
    return d0 + d1 + d2


def d_weight_part(a: PolyForm, j: int) -> PolyForm:
    if j not in (0, 1, 2):
        raise ValueError("weight part must be 0, 1 or 2")
    return d_parts(a)[j]


def weight_split_form(a: PolyForm) -> tuple[PolyForm, PolyForm]:
    theta = 2 * a.n + 1
    horiz = {i: p for i, p in a.coeffs.items() if theta not in i}
    vert = {i: p for i, p in a.coeffs.items() if theta in i}
    return PolyForm(a.n, a.degree, horiz), PolyForm(a.n, a.degree, vert)


def dilation_pullback_form(lam, a: PolyForm) -> PolyForm:
    """Pullback under the dilation: compose coefficients and scale by weight."""
    lam = _frac(lam)
    if lam <= 0:
        raise ValueError("dilation factor must be positive")
    n = a.n
    nv = nvars_for(n)
    subs = [Polynomial.var(nv, i).scale(lam) for i in range(2 * n)]
    subs.append(Polynomial.var(nv, 2 * n).scale(lam * lam))
    out = {}
    for idx, p in a.coeffs.items():
        w = monomial_weight(n, idx)
        out[idx] = p.compose(subs).scale(lam**w)
    return PolyForm(n, a.degree, out)


def apply_graded(op: GradedOperator, a: PolyForm) -> PolyForm:
    """Apply a constant graded operator coefficient-wise to a form."""
    if op.n != a.n:
        raise ValueError("rank mismatch")
    n = a.n
    target = a.degree + op.shift
    if not 0 <= target <= 2 * n + 1:
        return PolyForm.zero(n, min(max(target, 0), 2 * n + 1))
    blk = op.blocks.get(a.degree)
    if blk is None or a.is_zero():
        return PolyForm.zero(n, target)
    src = basis_tuples(n, a.degree)
    col_of = {idx: j for j, idx in enumerate(src)}
    tgt = basis_tuples(n, target)
    nv = nvars_for(n)
    out = [Polynomial(nv) for _ in tgt]
    for idx, p in a.coeffs.items():
        j = col_of[idx]
        for i in range(len(tgt)):
            if blk[i][j]:
                out[i] = out[i] + p.scale(blk[i][j])
    return PolyForm(n, target, dict(zip(tgt, out)))


def bump_multiply(a: PolyForm, box: Box) -> PolyForm:
    """Multiply coefficients by the squared box bump ((c-lo)(hi-c))^2 per coordinate.

    The result and its first derivatives vanish on the box boundary, so
    Stokes-type integrals over the box have no boundary terms.
    """
    n = a.n
    nv = nvars_for(n)
    if len(box) != nv:
        raise ValueError("box must have one interval per coordinate")
    bump = Polynomial.const(nv, 1)
    for i, (lo, hi) in enumerate(box):
        lo, hi = _frac(lo), _frac(hi)
        if hi <= lo:
            raise ValueError("degenerate box interval")
        v = Polynomial.var(nv, i)
        factor = (v - Polynomial.const(nv, lo)) * (Polynomial.const(nv, hi) - v)
        bump = bump * (factor * factor)
    return a.multiply_function(bump)


def integrate_top_form(a: PolyForm, box: Box) -> Fraction:
    """Exact integral of a top-degree form over a rational box.

    The coframe volume w_1^...^w_2n^theta equals the Lebesgue volume
    dx dy dt, so this is plain polynomial integration of the coefficient.
    """
    n = a.n
    if a.degree != 2 * n + 1:
        raise ValueError("only top-degree forms integrate over a box")
    top = tuple(range(1, 2 * n + 2))
    coeff = a.coeffs.get(top)
    if coeff is None:
        return Fraction(0)
    return coeff.integrate_box(box)


def form_theta(n: int) -> PolyForm:
    return PolyForm.from_covector(MultiCovector.monomial(n, (2 * n + 1,)))


def form_dtheta(n: int) -> PolyForm:
    return PolyForm.from_covector(dtheta(n))


def theta_dtheta_power(n: int, m: int) -> PolyForm:
    """The restriction form theta ^ (dtheta)^m as a constant-coefficient form."""
    if m < 0:
        raise ValueError("negative dtheta power")
    out = form_theta(n)
    dt = form_dtheta(n)
    for _ in range(m):
        out = wedge_forms(out, dt)
    return out


def dt_coordinate_form(n: int) -> PolyForm:
    """The coordinate differential dt written in the coframe."""
    return exterior_d(PolyForm.from_function(n, var_t(n)))
