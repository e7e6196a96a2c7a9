"""Machine-checkable identity suite with a conformance report.

Every row certifies one structural identity, names it by the formula it
checks, counts the instances exercised, and records the first counterexample
on failure. Algebraic rows are exact (Fraction arithmetic, zero tolerance);
quadrature-backed rows carry the stated numeric tolerances. Deterministic
for a fixed seed.
"""

from __future__ import annotations

import itertools
import json
import random
import zlib
from dataclasses import dataclass, field
from fractions import Fraction

from . import ratlin
from .currents import (
    Chain,
    ParamSimplex,
    SmoothCurrent,
    b_operator,
    classify,
    co_isotropy_check,
    coleg_3plane_chain,
    correspondence,
    cantor_curve,
    ff_pair,
    horizontal_segment_chain,
    mass,
    non_coleg_3plane_chain,
    oblique_correction,
    oblique_mass,
    oblique_two_path,
    pair,
    pair_current,
    pushforward_dilation,
    rumin_mass,
    t0_graph_square_chain,
    vertical_square_chain,
    QuadRule,
)
from .exprs import expr_from_polynomial
from .heis_core import (
    GroupPoint,
    MultiCovector,
    basis_tuples,
    dilate_point,
    dilation_pullback,
    group_inverse,
    group_mul,
    hodge_star_h,
    horizontal_basis,
    inner_product,
    koranyi_gauge4,
    lefschetz_matrices,
    monomial_weight,
    wedge,
)
from .poly_forms import (
    PolyForm,
    Polynomial,
    bump_multiply,
    d_parts,
    dilation_pullback_form,
    evaluate_at,
    exterior_d,
    horiz_derive,
    integrate_top_form,
    nvars_for,
    theta_dtheta_power,
    var_t,
    var_x,
    var_y,
    weight_split_form,
    wedge_forms,
)
from .rumin_complex import (
    d0_matrix,
    d0_pinv,
    d0_pinv_apply,
    d_c,
    e0_basis,
    e0_dims,
    pi_E,
    pi_E0_matrix,
    pi_E0_ranks,
    weights_preserved,
)


@dataclass
class IdentityRow:
    name: str
    anchor: str
    instances: int
    status: str
    counterexample: str | None = None


@dataclass
class ConformanceReport:
    rows: list[IdentityRow] = field(default_factory=list)

    @property
    def total(self) -> int:
        return len(self.rows)

    @property
    def passed(self) -> int:
        return sum(1 for r in self.rows if r.status == "pass")

    @property
    def failed(self) -> int:
        return sum(1 for r in self.rows if r.status == "fail")

    def all_pass(self) -> bool:
        return self.failed == 0

    def to_text(self) -> str:
        width = max([len(r.name) for r in self.rows] + [8])
        lines = [f"{'identity'.ljust(width)}  {'instances':>9}  status  checks"]
        for r in self.rows:
            line = f"{r.name.ljust(width)}  {r.instances:>9}  {r.status:<6}  {r.anchor}"
            if r.counterexample:
                line += f"\n{' ' * width}  first counterexample: {r.counterexample}"
            lines.append(line)
        lines.append(f"summary: {self.passed} pass, {self.failed} fail, {self.total} total")
        return "\n".join(lines)

    def to_json(self) -> str:
        payload = {
            "rows": [
                {
                    "identity": r.name,
                    "anchor": r.anchor,
                    "instances": r.instances,
                    "status": r.status,
                    "counterexample": r.counterexample,
                }
                for r in self.rows
            ],
            "summary": {"total": self.total, "pass": self.passed, "fail": self.failed},
        }
        return json.dumps(payload, indent=2)

    def to_csv(self) -> str:
        lines = ["identity,anchor,instances,status,counterexample"]
        for r in self.rows:
            ce = (r.counterexample or "").replace('"', "'")
            lines.append(f'{r.name},"{r.anchor}",{r.instances},{r.status},"{ce}"')
        return "\n".join(lines) + "\n"


def _cov_eq(a: MultiCovector, b: MultiCovector) -> bool:
    """Equality that lets zero covectors of clamped degrees agree."""
    if a.is_zero() and b.is_zero():
        return True
    return a == b


class _Row:
    def __init__(self, name: str, anchor: str):
        self.name = name
        self.anchor = anchor
        self.instances = 0
        self.counterexample: str | None = None

    def check(self, ok: bool, describe) -> None:
        self.instances += 1
        if not ok and self.counterexample is None:
            self.counterexample = describe() if callable(describe) else str(describe)

    def finish(self) -> IdentityRow:
        status = "pass" if self.counterexample is None else "fail"
        return IdentityRow(self.name, self.anchor, self.instances, status, self.counterexample)


def _rng_for(seed: int, name: str) -> random.Random:
    return random.Random(seed ^ zlib.crc32(name.encode()))


# ---------------------------------------------------------------------------
# random generators


def random_polynomial(rng: random.Random, n: int, max_deg: int, terms: int = 3) -> Polynomial:
    nv = nvars_for(n)
    out: dict[tuple, Fraction] = {}
    for _ in range(terms):
        e = [0] * nv
        budget = rng.randint(0, max_deg)
        for _ in range(budget):
            e[rng.randrange(nv)] += 1
        c = Fraction(rng.randint(-4, 4), rng.randint(1, 3))
        key = tuple(e)
        out[key] = out.get(key, Fraction(0)) + c
    return Polynomial(nv, out)


def random_polyform(rng: random.Random, n: int, degree: int, max_deg: int, terms: int = 2) -> PolyForm:
    basis = basis_tuples(n, degree)
    coeffs = {}
    for idx in rng.sample(basis, min(terms, len(basis))):
        coeffs[idx] = random_polynomial(rng, n, max_deg)
    return PolyForm(n, degree, coeffs)


def random_e0_section(rng: random.Random, n: int, h: int, max_deg: int) -> PolyForm:
    out = PolyForm.zero(n, h)
    for b in e0_basis(n, h):
        f = random_polynomial(rng, n, max_deg, terms=2)
        if rng.random() < 0.5:
            continue
        out = out + PolyForm(n, h, {i: f.scale(c) for i, c in b.coeffs.items()})
    return out


def random_rational_point(rng: random.Random, n: int) -> GroupPoint:
    def r():
        return Fraction(rng.randint(-6, 6), rng.randint(1, 4))

    return GroupPoint(tuple(r() for _ in range(n)), tuple(r() for _ in range(n)), r())


def random_covector(rng: random.Random, n: int, degree: int, terms: int = 3) -> MultiCovector:
    basis = basis_tuples(n, degree)
    coeffs = {}
    for idx in rng.sample(basis, min(terms, len(basis))):
        coeffs[idx] = Fraction(rng.randint(-5, 5), rng.randint(1, 3))
    return MultiCovector(n, degree, coeffs)


def random_bump_test_form(rng: random.Random, n: int, degree: int, max_deg: int = 2) -> PolyForm:
    # full bumps get expensive fast above rank 1; keep the polynomial factor light there
    if n >= 2:
        max_deg = min(max_deg, 1)
        form = random_polyform(rng, n, degree, max_deg, terms=1)
    else:
        form = random_polyform(rng, n, degree, max_deg)
    box = [(Fraction(-2), Fraction(2))] * nvars_for(n)
    return bump_multiply(form, box)


def random_affine_simplex(rng: random.Random, n: int, dim: int) -> ParamSimplex:
    """Affine polynomial simplex; cheap to compose exactly at any rank."""
    comps = []
    for _ in range(2 * n + 1):
        p = Polynomial.const(dim, Fraction(rng.randint(-2, 2), rng.randint(1, 2)))
        for j in range(dim):
            p = p + Polynomial.var(dim, j).scale(Fraction(rng.randint(-2, 2)))
        comps.append(expr_from_polynomial(p))
    return ParamSimplex(n, dim, rng.choice(("cube", "simplex")), comps)


def random_polynomial_simplex(rng: random.Random, n: int, dim: int, max_deg: int = 2) -> ParamSimplex:
    comps = []
    for _ in range(2 * n + 1):
        p = Polynomial(dim)
        for _ in range(2):
            e = [0] * dim
            for _ in range(rng.randint(0, max_deg)):
                e[rng.randrange(dim)] += 1 if dim else 0
            p = p + Polynomial(dim, {tuple(e): Fraction(rng.randint(-2, 2), rng.randint(1, 2))})
        comps.append(expr_from_polynomial(p))
    domain = rng.choice(("cube", "simplex"))
    return ParamSimplex(n, dim, domain, comps)


def random_horizontal_curve(rng: random.Random, n: int, max_deg: int = 3) -> ParamSimplex:
    """A polynomial curve with vanishing theta pullback (Legendrian lift)."""
    ps, qs = [], []
    for _ in range(n):
        ps.append(_random_univariate(rng, max_deg))
        qs.append(_random_univariate(rng, max_deg))
    half = Fraction(1, 2)
    tau_prime = Polynomial(1)
    for p, q in zip(ps, qs):
        tau_prime = tau_prime + (p * q.diff(0) - q * p.diff(0)).scale(half)
    tau = tau_prime.antiderivative(0)
    comps = [expr_from_polynomial(p) for p in ps + qs] + [expr_from_polynomial(tau)]
    return ParamSimplex(n, 1, "cube", comps)


def _random_univariate(rng: random.Random, max_deg: int) -> Polynomial:
    out = Polynomial(1)
    for k in range(max_deg + 1):
        if rng.random() < 0.6:
            out = out + Polynomial(1, {(k,): Fraction(rng.randint(-2, 2))})
    return out


# ---------------------------------------------------------------------------
# identity rows: group and frame


def _row_group_axioms(rows, seed, instances):
    row = _Row("group_axioms", "p*e = e*p = p, p*inv(p) = e, (pq)r = p(qr), s_l homomorphism, gauge left-invariance")
    rng = _rng_for(seed, row.name)
    for _ in range(instances):
        n = rng.choice((1, 2))
        p, q, r = (random_rational_point(rng, n) for _ in range(3))
        e = GroupPoint.identity(n)
        ok = group_mul(p, e) == p and group_mul(e, p) == p
        ok = ok and group_mul(p, group_inverse(p)) == e
        ok = ok and group_mul(group_mul(p, q), r) == group_mul(p, group_mul(q, r))
        lam, mu = Fraction(rng.randint(1, 5)), Fraction(rng.randint(1, 5), 2)
        ok = ok and dilate_point(lam, dilate_point(mu, p)) == dilate_point(lam * mu, p)
        ok = ok and dilate_point(lam, group_mul(p, q)) == group_mul(
            dilate_point(lam, p), dilate_point(lam, q)
        )
        ok = ok and koranyi_gauge4(dilate_point(lam, p)) == lam**4 * koranyi_gauge4(p)
        g = random_rational_point(rng, n)
        lhs = koranyi_gauge4(group_mul(group_inverse(p), q))
        rhs = koranyi_gauge4(
            group_mul(group_inverse(group_mul(g, p)), group_mul(g, q))
        )
        ok = ok and lhs == rhs
        row.check(ok, lambda: f"n={n} p={p} q={q}")
    rows.append(row.finish())


def _row_frame_commutators(rows, seed, instances):
    row = _Row("frame_commutators", "[X_i,Y_i] = Z and all other frame brackets vanish")
    rng = _rng_for(seed, row.name)
    for _ in range(instances):
        n = rng.choice((1, 2))
        f = random_polynomial(rng, n, 3)
        fields = [("X", i) for i in range(1, n + 1)] + [("Y", i) for i in range(1, n + 1)] + [("Z", 1)]
        a = rng.choice(fields)
        b = rng.choice(fields)

        def apply(which_i, g):
            which, i = which_i
            return horiz_derive(g, n, which, i)

        bracket = apply(a, apply(b, f)) - apply(b, apply(a, f))
        if a[0] == "X" and b[0] == "Y" and a[1] == b[1]:
            expected = horiz_derive(f, n, "Z")
        elif a[0] == "Y" and b[0] == "X" and a[1] == b[1]:
            expected = -horiz_derive(f, n, "Z")
        else:
            expected = Polynomial(nvars_for(n))
        row.check(bracket == expected, lambda: f"n={n} [{a},{b}] on {f}")
    rows.append(row.finish())


def _row_wedge_algebra(rows, seed, instances):
    row = _Row("wedge_algebra", "b^a = (-1)^(deg a * deg b) a^b, associativity, orthonormal split")
    rng = _rng_for(seed, row.name)
    for _ in range(instances):
        n = rng.choice((1, 2))
        da = rng.randint(0, 2)
        db = rng.randint(0, 2)
        a = random_covector(rng, n, da)
        b = random_covector(rng, n, db)
        c = random_covector(rng, n, 1)
        ok = wedge(b, a) == wedge(a, b) * Fraction((-1) ** (da * db))
        ok = ok and _cov_eq(wedge(wedge(a, b), c), wedge(a, wedge(b, c)))
        from .heis_core import weight_split

        horiz, vert = weight_split(a)
        ok = ok and horiz + vert == a and horiz.is_horizontal() and vert.is_vertical()
        ok = ok and inner_product(horiz, vert) == 0
        row.check(ok, lambda: f"n={n} a={a} b={b}")
    rows.append(row.finish())


# ---------------------------------------------------------------------------
# identity rows: differential and projectors


def _row_d_squared(rows, seed, instances, ns, max_deg, sign):
    row = _Row("d_squared_zero", "d(d(alpha)) = 0")
    rng = _rng_for(seed, row.name)
    for _ in range(instances):
        n = rng.choice(ns)
        degree = rng.randint(0, 2 * n)
        a = random_polyform(rng, n, degree, max_deg)
        val = exterior_d(exterior_d(a, sign), sign)
        row.check(val.is_zero(), lambda: f"n={n} alpha={a}")
    rows.append(row.finish())


def _row_d_decomposition(rows, seed, instances, ns, max_deg):
    row = _Row(
        "d_weight_decomposition",
        "d = d0 + d1 + d2 with parts raising monomial weight by 0, 1, 2; d0(f a) = f d0(a)",
    )
    rng = _rng_for(seed, row.name)
    for _ in range(instances):
        n = rng.choice(ns)
        degree = rng.randint(0, 2 * n)
        basis = basis_tuples(n, degree)
        idx = rng.choice(basis)
        f = random_polynomial(rng, n, max_deg)
        a = PolyForm(n, degree, {idx: f})
        parts = d_parts(a)
        ok = parts[0] + parts[1] + parts[2] == exterior_d(a)
        w = monomial_weight(n, idx)
        for j, part in enumerate(parts):
            for out_idx in part.coeffs:
                ok = ok and monomial_weight(n, out_idx) == w + j
        g = random_polynomial(rng, n, 1)
        fa = a.multiply_function(g)
        ok = ok and d_parts(fa)[0] == parts[0].multiply_function(g)
        row.check(ok, lambda: f"n={n} idx={idx} f={f}")
    rows.append(row.finish())


def _row_d0_pinv(rows, seed, instances, ns, sign):
    row = _Row(
        "d0_pseudo_inverse",
        "d0 d0inv d0 = d0, d0inv d0 d0inv = d0inv, both compositions self-adjoint, "
        "d0inv weight-preserving with vertical range; d of constant forms matches the d0 matrix",
    )
    rng = _rng_for(seed, row.name)
    checked = 0
    for n in ns:
        d0 = d0_matrix(n, sign)
        d0i = d0_pinv(n, sign)
        for k in range(0, 2 * n + 1):
            a = d0.block(k)
            ai = d0i.block(k + 1)
            prod1 = ratlin.matmul(a, ratlin.matmul(ai, a))
            prod2 = ratlin.matmul(ai, ratlin.matmul(a, ai))
            proj1 = ratlin.matmul(a, ai)
            proj2 = ratlin.matmul(ai, a)
            ok = ratlin.mat_eq(prod1, a) and ratlin.mat_eq(prod2, ai)
            ok = ok and ratlin.mat_eq(proj1, ratlin.transpose(proj1))
            ok = ok and ratlin.mat_eq(proj2, ratlin.transpose(proj2))
            row.check(ok, lambda: f"n={n} degree {k}: pseudo-inverse axioms")
            checked += 1
        ok_w = weights_preserved(d0) and weights_preserved(d0i)
        row.check(ok_w, lambda: f"n={n}: weight preservation")
        theta = 2 * n + 1
        for k in range(1, 2 * n + 2):
            for idx in basis_tuples(n, k):
                img = d0i.apply(MultiCovector.monomial(n, idx))
                row.check(img.is_vertical(), lambda: f"n={n} d0inv({idx}) not vertical")
    for _ in range(instances):
        n = rng.choice(ns)
        k = rng.randint(0, 2 * n)
        mc = random_covector(rng, n, k)
        lhs = evaluate_at(exterior_d(PolyForm.from_covector(mc), sign), GroupPoint.identity(n))
        rhs = d0_matrix(n, sign).apply(mc)
        row.check(lhs == rhs, lambda: f"n={n} constant form {mc}")
    rows.append(row.finish())


def _row_pi_e0_projector(rows, seed, instances, ns, sign):
    row = _Row(
        "pi_e0_projector",
        "P = Id - d0inv d0 - d0 d0inv is idempotent, self-adjoint, kills theta- and "
        "dtheta-multiples below the middle degree",
    )
    rng = _rng_for(seed, row.name)
    for n in ns:
        p = pi_E0_matrix(n, sign)
        for k in range(0, 2 * n + 2):
            blk = p.block(k)
            ok = ratlin.mat_eq(ratlin.matmul(blk, blk), blk)
            ok = ok and ratlin.mat_eq(blk, ratlin.transpose(blk))
            row.check(ok, lambda: f"n={n} degree {k}: projector algebra")
    from .heis_core import dtheta as dtheta_cov

    for _ in range(instances):
        n = rng.choice(ns)
        k = rng.randint(0, n)
        p = pi_E0_matrix(n, sign)
        if k >= 1:
            a = random_covector(rng, n, k - 1)
            th = MultiCovector.monomial(n, (2 * n + 1,))
            row.check(
                p.apply(wedge(th, a)).is_zero(), lambda: f"n={n} theta-multiple deg {k}"
            )
        if k >= 2:
            b = random_covector(rng, n, k - 2)
            row.check(
                p.apply(wedge(dtheta_cov(n), b)).is_zero(),
                lambda: f"n={n} dtheta-multiple deg {k}",
            )
    rows.append(row.finish())


def _row_pi_e0_weights(rows, seed, instances, ns, sign):
    row = _Row("pi_e0_weights", "the invariant projector commutes with every dilation pullback")
    rng = _rng_for(seed, row.name)
    for _ in range(instances):
        n = rng.choice(ns)
        k = rng.randint(0, 2 * n + 1)
        lam = Fraction(rng.randint(1, 8), rng.randint(1, 8))
        a = random_covector(rng, n, k)
        p = pi_E0_matrix(n, sign)
        lhs = p.apply(dilation_pullback(lam, a))
        rhs = dilation_pullback(lam, p.apply(a))
        row.check(lhs == rhs, lambda: f"n={n} deg {k} lam={lam} a={a}")
    rows.append(row.finish())


def _row_e0_dimensions(rows, seed, instances, ns):
    row = _Row(
        "e0_dimensions",
        "kernel-route dims of the invariant bundle match projector ranks; "
        "(1,2,2,1) at rank 1 and (1,4,5,5,4,1) at rank 2",
    )
    expected = {1: (1, 2, 2, 1), 2: (1, 4, 5, 5, 4, 1)}
    for n in sorted(set(ns) | {1, 2}):
        dims = e0_dims(n)
        ranks = pi_E0_ranks(n)
        row.check(dims == ranks, lambda: f"n={n} dims {dims} vs ranks {ranks}")
        if n in expected:
            row.check(dims == expected[n], lambda: f"n={n} dims {dims}")
        for h in range(0, n + 1):
            row.check(
                len(e0_basis(n, h)) == _binom(2 * n, h) - _binom(2 * n, h - 2),
                lambda: f"n={n} h={h} primitive-count formula",
            )
    rows.append(row.finish())


def _binom(a, b):
    import math

    if b < 0:
        return 0
    return math.comb(a, b)


def _row_pi_e_idempotent(rows, seed, instances, ns, max_deg, sign):
    row = _Row("pi_e_idempotent", "Pi(Pi(alpha)) = Pi(alpha)")
    rng = _rng_for(seed, row.name)
    for _ in range(instances):
        n = rng.choice(ns)
        degree = rng.randint(0, 2 * n + 1)
        a = random_polyform(rng, n, degree, max_deg)
        pa = pi_E(a, sign)
        row.check(pi_E(pa, sign) == pa, lambda: f"n={n} alpha={a}")
    rows.append(row.finish())


def _row_pi_e_chain_map(rows, seed, instances, ns, max_deg, sign):
    row = _Row("pi_e_chain_map", "d Pi = Pi d")
    rng = _rng_for(seed, row.name)
    for _ in range(instances):
        n = rng.choice(ns)
        degree = rng.randint(0, 2 * n)
        a = random_polyform(rng, n, degree, max_deg)
        lhs = exterior_d(pi_E(a, sign), sign)
        rhs = pi_E(exterior_d(a, sign), sign)
        row.check(lhs == rhs, lambda: f"n={n} alpha={a}")
    rows.append(row.finish())


def _row_interleaving(rows, seed, instances, ns, max_deg, sign):
    row = _Row("projector_interleaving", "P Pi P = P and Pi P Pi = Pi on the polynomial battery")
    rng = _rng_for(seed, row.name)
    for _ in range(instances):
        n = rng.choice(ns)
        degree = rng.randint(0, 2 * n + 1)
        a = random_polyform(rng, n, degree, max_deg)
        from .rumin_complex import pi_E0_apply

        def p0(x):
            from .poly_forms import apply_graded

            return apply_graded(pi_E0_matrix(n, sign), x)

        lhs1 = p0(pi_E(p0(a), sign))
        ok = lhs1 == p0(a)
        lhs2 = pi_E(p0(pi_E(a, sign)), sign)
        ok = ok and lhs2 == pi_E(a, sign)
        row.check(ok, lambda: f"n={n} deg {degree} alpha={a}")
    rows.append(row.finish())


def _row_bundle_sections(rows, seed, instances, ns, max_deg, sign):
    row = _Row(
        "pi_e_on_bundle_sections",
        "on sections of the invariant bundle: Pi(g) = g - d0inv(d1 g) below the middle, "
        "Pi(g) = g above; the difference is vertical",
    )
    rng = _rng_for(seed, row.name)
    for _ in range(instances):
        n = rng.choice(ns)
        h = rng.randint(0, 2 * n + 1)
        g = random_e0_section(rng, n, h, max_deg)
        pg = pi_E(g, sign)
        if h <= n:
            expected = g - d0_pinv_apply(d_parts(g)[1]) if g.degree >= 0 else g
            ok = pg == expected
        else:
            ok = pg == g
        diff = pg - g
        ok = ok and diff.is_vertical()
        row.check(ok, lambda: f"n={n} h={h} gamma={g}")
    rows.append(row.finish())


def _row_dc_squared(rows, seed, instances, ns, max_deg, sign):
    row = _Row("d_c_squared_zero", "d_c(d_c(gamma)) = 0 on sections of the invariant bundle")
    rng = _rng_for(seed, row.name)
    for _ in range(instances):
        n = rng.choice(ns)
        h = rng.randint(0, 2 * n)
        g = random_e0_section(rng, n, h, max_deg)
        val = d_c(d_c(g, sign), sign)
        row.check(val.is_zero(), lambda: f"n={n} h={h} gamma={g}")
    rows.append(row.finish())


def _row_dc_order(rows, seed, instances, ns, max_deg, sign):
    row = _Row(
        "d_c_order",
        "d_c drops coefficient degree by at most 1 off the middle degree and by at most 2 "
        "at the middle; the x^2 dy instance genuinely needs two horizontal derivatives",
    )
    rng = _rng_for(seed, row.name)
    n = 1
    x = var_x(n, 1)
    inst = d_c(PolyForm(n, 1, {(2,): x * x}), sign)
    expected = PolyForm(n, 2, {(1, 3): Polynomial.const(3, 2)})
    row.check(inst == expected, lambda: f"x^2 dy instance gave {inst}")
    for _ in range(instances):
        n = rng.choice(ns)
        h = rng.randint(0, 2 * n)
        g = random_e0_section(rng, n, h, max_deg)
        if g.is_zero():
            continue
        dg = d_c(g, sign)
        if dg.is_zero():
            row.check(True, None)
            continue
        drop = 2 if h == n else 1
        min_in = min(p.min_degree() for p in g.coeffs.values())
        min_out = min(p.min_degree() for p in dg.coeffs.values())
        row.check(min_out >= min_in - drop, lambda: f"n={n} h={h} gamma={g} -> {dg}")
    rows.append(row.finish())


def _row_hodge_star_lefschetz(rows, seed, instances):
    row = _Row("hodge_lemma_star", "star Lambda = L star per degree, star star = +-Id")
    from .heis_core import lefschetz

    for n in (1, 2, 3):
        for k in range(2, 2 * n + 1):
            for idx in horizontal_basis(n, k):
                a = MultiCovector.monomial(n, idx)
                lhs = hodge_star_h(lefschetz(a, "lower"))
                rhs = wedge(_dtheta_cov(n), hodge_star_h(a))
                row.check(_cov_eq(lhs, rhs), lambda: f"n={n} deg {k} idx={idx}")
        for k in range(0, 2 * n + 1):
            for idx in horizontal_basis(n, k):
                a = MultiCovector.monomial(n, idx)
                ss = hodge_star_h(hodge_star_h(a))
                row.check(
                    ss == a * Fraction((-1) ** (k * (2 * n - k))),
                    lambda: f"n={n} star star on {idx}",
                )
    rows.append(row.finish())


def _dtheta_cov(n):
    from .heis_core import dtheta

    return dtheta(n)


def _row_hodge_kernels(rows, seed, instances):
    row = _Row("hodge_lemma_kernels", "ker(Lambda) = ker(L^(n-k+1)) in horizontal degree k <= n")
    for n in (1, 2, 3):
        _, lams = lefschetz_matrices(n)
        for k in range(0, n + 1):
            dim = len(horizontal_basis(n, k))
            lam_block = lams[k] if k >= 2 else ratlin.zeros(1, dim)
            ker_lambda = _kernel_matrix(lam_block, dim)
            power = _compose_l_power(n, k, n - k + 1, dim)
            ker_power = _kernel_matrix(power, dim)
            ok = ratlin.same_column_space(ker_lambda, ker_power)
            row.check(ok, lambda: f"n={n} k={k}")
    rows.append(row.finish())


def _kernel_matrix(m, dim) -> list[list[Fraction]]:
    vecs = ratlin.nullspace(m)
    if not vecs:
        return [[Fraction(0)] for _ in range(dim)]
    return ratlin.transpose(vecs)


def _compose_l_power(n, degree, power, dim):
    lmats, _ = lefschetz_matrices(n)
    m = ratlin.identity(dim)
    deg = degree
    for _ in range(power):
        if deg > 2 * n - 2:
            return ratlin.zeros(1, dim)
        m = ratlin.matmul(lmats[deg], m)
        deg += 2
    return m


def _row_hodge_ranges(rows, seed, instances):
    row = _Row(
        "hodge_lemma_ranges",
        "range(Lambda) = range(L^(n-k+1)) inside horizontal degree 2n-k",
    )
    for n in (1, 2, 3):
        lmats, lams = lefschetz_matrices(n)
        for k in range(0, n + 1):
            tgt_dim = len(horizontal_basis(n, 2 * n - k))
            lam_into = lams.get(2 * n - k + 2)
            a = lam_into if lam_into is not None else ratlin.zeros(tgt_dim, 1)
            src_dim = len(horizontal_basis(n, k - 2)) if k >= 2 else 0
            if src_dim:
                b = _l_power_matrix(n, k - 2, n - k + 1)
            else:
                b = ratlin.zeros(tgt_dim, 1)
            row.check(ratlin.same_column_space(a, b), lambda: f"n={n} k={k}")
    rows.append(row.finish())


def _l_power_matrix(n, src_degree, power):
    lmats, _ = lefschetz_matrices(n)
    dim = len(horizontal_basis(n, src_degree))
    m = ratlin.identity(dim)
    deg = src_degree
    for _ in range(power):
        if deg > 2 * n - 2:
            return ratlin.zeros(len(horizontal_basis(n, min(deg + 2 * power, 2 * n))), dim)
        m = ratlin.matmul(lmats[deg], m)
        deg += 2
    return m


def _row_hodge_pairing(rows, seed, instances):
    row = _Row(
        "hodge_lemma_pairing",
        "(d0inv a) ^ a' = (-1)^h a ^ (d0inv a') over full monomial bases",
    )
    for n in (1, 2, 3):
        d0i = d0_pinv(n)
        for h in range(0, 2 * n + 2):
            hp = 2 * n + 1 - h
            for ia in basis_tuples(n, h):
                a = MultiCovector.monomial(n, ia)
                da = d0i.apply(a)
                for ib in basis_tuples(n, hp):
                    b = MultiCovector.monomial(n, ib)
                    lhs = wedge(da, b)
                    rhs = wedge(a, d0i.apply(b)) * Fraction((-1) ** h)
                    row.check(_cov_eq(lhs, rhs), lambda: f"n={n} a={ia} a'={ib}")
    rows.append(row.finish())


def _row_membership_low(rows, seed, instances, ns, max_deg, sign):
    row = _Row(
        "oblique_membership_low",
        "below the middle: Pi(alpha) = alpha iff theta^dtheta^(n-h+1)^alpha = 0 and "
        "theta^dtheta^(n-h)^d(alpha) = 0",
    )
    rng = _rng_for(seed, row.name)
    for i in range(instances):
        n = rng.choice(ns)
        h = rng.randint(0, n)
        a = random_polyform(rng, n, h, max_deg)
        if i % 2 == 0:
            a = pi_E(a, sign)
        member = pi_E(a, sign) == a
        cond1 = wedge_forms(theta_dtheta_power(n, n - h + 1), a).is_zero()
        cond2 = wedge_forms(theta_dtheta_power(n, n - h), exterior_d(a, sign)).is_zero()
        row.check(member == (cond1 and cond2), lambda: f"n={n} h={h} alpha={a} member={member}")
    rows.append(row.finish())


def _row_membership_high(rows, seed, instances, ns, max_deg, sign):
    row = _Row(
        "oblique_membership_high",
        "above the middle: Pi(alpha) = alpha iff alpha and d(alpha) are vertical",
    )
    rng = _rng_for(seed, row.name)
    for i in range(instances):
        n = rng.choice(ns)
        h = rng.randint(n + 1, 2 * n + 1)
        a = random_polyform(rng, n, h, max_deg)
        if i % 2 == 0:
            a = pi_E(a, sign)
        member = pi_E(a, sign) == a
        cond = a.is_vertical() and exterior_d(a, sign).is_vertical()
        row.check(member == cond, lambda: f"n={n} h={h} alpha={a} member={member}")
    rows.append(row.finish())


# ---------------------------------------------------------------------------
# identity rows: currents


def _row_stokes(rows, seed, instances, ns, max_deg):
    row = _Row("stokes_chains", "pair(boundary(T), w) = pair(T, d w) exactly on polynomial data")
    rng = _rng_for(seed, row.name)
    for _ in range(instances):
        n = rng.choice(ns)
        dim = rng.randint(1, 2)
        s = random_polynomial_simplex(rng, n, dim)
        chain = Chain(n, dim, [(rng.choice((-2, -1, 1, 2)), s)])
        omega = random_polyform(rng, n, dim - 1, max_deg)
        lhs = pair(chain.boundary(), omega)
        rhs = pair(chain, exterior_d(omega))
        row.check(lhs == rhs, lambda: f"n={n} dim={dim} domain={s.domain} w={omega}")
    rows.append(row.finish())


def _row_smooth_boundary(rows, seed, instances, ns, max_deg):
    row = _Row(
        "smooth_boundary_sign",
        "boundary of the wedge-integration current of a form a is (-1)^k times the "
        "current of d(a), against compactly supported tests",
    )
    rng = _rng_for(seed, row.name)
    box = None
    for _ in range(instances):
        n = rng.choice(ns)
        box = [(Fraction(-2), Fraction(2))] * nvars_for(n)
        h = rng.randint(0, 2 * n)
        alpha = random_polyform(rng, n, h, max_deg)
        s = SmoothCurrent(n, alpha, box)
        k = s.dim
        gamma = random_bump_test_form(rng, n, k - 1)
        lhs = ff_pair(s, exterior_d(gamma))
        rhs = Fraction((-1) ** k) * ff_pair(SmoothCurrent(n, exterior_d(alpha), box), gamma)
        row.check(lhs == rhs, lambda: f"n={n} h={h} alpha={alpha}")
    rows.append(row.finish())


def _row_b_operator(rows, seed, instances, ns, max_deg):
    row = _Row(
        "b_operator_smooth",
        "pairing tests through d0inv matches (-1)^h times the current of d0inv(a)",
    )
    rng = _rng_for(seed, row.name)
    for _ in range(instances):
        n = rng.choice(ns)
        box = [(Fraction(-2), Fraction(2))] * nvars_for(n)
        h = rng.randint(1, 2 * n + 1)
        alpha = random_polyform(rng, n, h, max_deg)
        s = SmoothCurrent(n, alpha, box)
        omega = random_bump_test_form(rng, n, s.dim + 1)
        lhs = b_operator(s).pair(omega)
        rhs = Fraction((-1) ** h) * ff_pair(SmoothCurrent(n, d0_pinv_apply(alpha), box), omega)
        row.check(lhs == rhs, lambda: f"n={n} h={h} alpha={alpha}")
    rows.append(row.finish())


def _row_oblique_correction(rows, seed, instances, ns, max_deg):
    row = _Row(
        "oblique_correction_pairing",
        "the corrected current equals T - boundary(B T) - B(boundary T) on bump tests",
    )
    rng = _rng_for(seed, row.name)
    for _ in range(instances):
        n = rng.choice(ns)
        box = [(Fraction(-2), Fraction(2))] * nvars_for(n)
        h = rng.randint(1, 2 * n)
        alpha = random_polyform(rng, n, h, max_deg)
        t = SmoothCurrent(n, alpha, box)
        omega = random_bump_test_form(rng, n, t.dim)
        lhs = ff_pair(oblique_correction(t), omega)
        rhs = (
            ff_pair(t, omega)
            - b_operator(t).pair(exterior_d(omega))
            - b_operator(t.boundary()).pair(omega)
        )
        row.check(lhs == rhs, lambda: f"n={n} h={h} alpha={alpha}")
    rows.append(row.finish())


def _battery_chains():
    return [
        ("vertical_square", vertical_square_chain(order=12)),
        ("horizontal_segment", horizontal_segment_chain(order=12)),
        ("t0_graph_square", t0_graph_square_chain(order=12)),
        ("coleg_3plane", coleg_3plane_chain(order=10)),
    ]


def _row_rescale(rows, seed, instances):
    row = _Row(
        "rescale_inequality",
        "mass(dilated T) <= lam^(k+1) oblique(T) + lam^k mass(T) for lam in {1,2,4,8}",
    )
    for name, chain in _battery_chains():
        k = chain.dim
        m0, ob0 = mass(chain), oblique_mass(chain)
        for lam in (1, 2, 4, 8):
            md = mass(pushforward_dilation(lam, chain))
            bound = lam ** (k + 1) * ob0 + lam**k * m0
            ok = md <= bound * (1 + 1e-6) + 1e-12
            row.check(ok, lambda: f"{name} lam={lam}: {md} vs {bound}")
    rows.append(row.finish())


def _row_asymptotics(rows, seed, instances):
    row = _Row(
        "dilation_asymptotics",
        "lam^-(k+1) mass(dilated T) approaches the oblique mass within 2% at lam = 64",
    )
    for name, chain in _battery_chains():
        ob = oblique_mass(chain)
        if ob < 1e-12:
            continue
        k = chain.dim
        ratio = mass(pushforward_dilation(64, chain)) / 64 ** (k + 1)
        ok = abs(ratio - ob) <= 0.02 * ob
        row.check(ok, lambda: f"{name}: ratio {ratio} vs oblique {ob}")
    rows.append(row.finish())


def _row_two_path(rows, seed, instances):
    row = _Row(
        "oblique_two_path",
        "angle-density quadrature equals the sup of pairings against unit horizontal "
        "test covector fields, which never exceed it",
    )
    for name, chain in _battery_chains():
        density, sup = oblique_two_path(chain, seed=seed)
        minor_route = oblique_mass(chain)
        tol = max(1e-9, 1e-9 * max(1.0, density))
        ok = sup <= density + 1e-7 * max(1.0, density)
        ok = ok and abs(sup - density) <= 1e-6 * max(1.0, density)
        ok = ok and abs(minor_route - density) <= 1e-7 * max(1.0, density)
        row.check(ok, lambda: f"{name}: density {density} sup {sup} minors {minor_route}")
    rows.append(row.finish())


def _row_mass_domination(rows, seed, instances):
    row = _Row(
        "mass_domination",
        "projected and oblique masses never exceed the Riemannian mass",
    )
    rng = _rng_for(seed, row.name)
    chains = [c for _, c in _battery_chains()]
    for _ in range(max(4, instances // 50)):
        n = rng.choice((1, 2))
        dim = rng.randint(1, 2)
        chains.append(Chain(n, dim, [(1, random_polynomial_simplex(rng, n, dim))]))
    for chain in chains:
        m = mass(chain)
        ok = oblique_mass(chain) <= m * (1 + 1e-9) + 1e-12
        ok = ok and rumin_mass(chain) <= m * (1 + 1e-9) + 1e-12
        row.check(ok, lambda: f"dim {chain.dim} rank {chain.n}")
    rows.append(row.finish())


def _row_involution_low(rows, seed, instances, sign):
    row = _Row(
        "involution_low",
        "hat then tilde restores pairings on horizontal chains; tilde then hat restores "
        "them against bundle-valued tests, below the middle dimension",
    )
    rng = _rng_for(seed, row.name)
    from .rumin_complex import pi_E0_apply

    half = max(1, instances // 2)
    for i in range(half):
        n = 1 if i % 3 else 2
        curve = random_horizontal_curve(rng, n)
        chain = Chain(n, 1, [(1, curve)])
        back = correspondence(correspondence(chain))
        # bump tests at rank 1, plain polynomial tests at rank 2 (the identity
        # is exact either way; bumps above rank 1 are costly to pair exactly)
        omega = random_bump_test_form(rng, n, 1) if n == 1 else random_polyform(rng, n, 1, 1)
        row.check(
            pair_current(back, omega) == pair(chain, omega),
            lambda: f"n={n} horizontal curve",
        )
    for i in range(instances - half):
        n = 1 if i % 3 else 2
        s = random_polynomial_simplex(rng, n, 1)
        chain = Chain(n, 1, [(1, s)], side="rumin")
        back = correspondence(correspondence(chain))
        gamma = random_bump_test_form(rng, n, 1) if n == 1 else random_polyform(rng, n, 1, 1)
        gamma = pi_E0_apply(gamma)
        row.check(
            pair_current(back, gamma) == pair(chain, gamma),
            lambda: f"n={n} generic chain, bundle test",
        )
    rows.append(row.finish())


def _row_involution_high(rows, seed, instances, sign):
    row = _Row(
        "involution_high",
        "above the middle dimension the two form-level correspondences invert each other",
    )
    rng = _rng_for(seed, row.name)
    from .rumin_complex import pi_E0_apply

    for i in range(instances):
        n = 1 if i % 2 == 0 else 2
        h = rng.randint(0, n)
        box = [(Fraction(-2), Fraction(2))] * nvars_for(n)
        raw = random_polyform(rng, n, h, 2)
        alpha = pi_E(raw, sign)
        s_ff = SmoothCurrent(n, alpha, box, side="ff")
        back = correspondence(correspondence(s_ff))
        ok = back.form == alpha and back.side == "ff"
        beta = pi_E0_apply(raw)
        s_ru = SmoothCurrent(n, beta, box, side="rumin")
        back2 = correspondence(correspondence(s_ru))
        ok = ok and back2.form == beta and back2.side == "rumin"
        row.check(ok, lambda: f"n={n} h={h} raw={raw}")
    rows.append(row.finish())


def _row_boundary_equivariance(rows, seed, instances, sign):
    row = _Row(
        "boundary_equivariance",
        "boundaries commute with both correspondences on bump batteries",
    )
    rng = _rng_for(seed, row.name)
    from .rumin_complex import pi_E0_apply

    per = max(1, instances // 3)
    # low branch, tilde: boundary of the projected pairing vs projected substitute boundary
    for i in range(per):
        n = 1 if i % 3 else 2
        s = random_polynomial_simplex(rng, n, 1) if n == 1 else random_affine_simplex(rng, n, 1)
        chain = Chain(n, 1, [(1, s)], side="rumin")
        omega = random_bump_test_form(rng, n, 0, max_deg=0 if n > 1 else 2)
        lhs = pair(chain, pi_E0_apply(exterior_d(omega)))
        rhs = pair(chain, d_c(pi_E0_apply(omega), sign))
        row.check(lhs == rhs, lambda: f"tilde boundary n={n}")
    # low branch, hat: pairing the boundary through Pi vs d_c through the hat
    for i in range(per):
        n = 2
        s = random_affine_simplex(rng, n, 2)
        chain = Chain(n, 2, [(1, s)])
        gamma = pi_E0_apply(random_bump_test_form(rng, n, 1, max_deg=0))
        lhs = pair(chain.boundary(), pi_E(gamma, sign))
        rhs = pair(chain, pi_E(d_c(gamma, sign), sign))
        row.check(lhs == rhs, lambda: f"hat boundary n={n}")
    # high branch: form-level equivariance through the wedge-integration map
    for i in range(instances - 2 * per):
        n = 1 if i % 3 else 2
        h = rng.randint(0, n)
        box = [(Fraction(-2), Fraction(2))] * nvars_for(n)
        beta = pi_E0_apply(random_polyform(rng, n, h, 2, terms=1))
        k = 2 * n + 1 - h
        tilde = SmoothCurrent(n, pi_E(beta, sign), box, side="ff")
        phi = random_bump_test_form(rng, n, k - 1, max_deg=0)
        lhs = ff_pair(tilde, exterior_d(phi))
        rhs = Fraction((-1) ** k) * ff_pair(
            SmoothCurrent(n, pi_E(d_c(beta, sign), sign), box), phi
        )
        row.check(lhs == rhs, lambda: f"high boundary n={n} h={h}")
    rows.append(row.finish())


def _row_coleg_planes(rows, seed, instances):
    row = _Row(
        "co_legendrian_planes",
        "the rank-2 flat 3-chains classify as co-Legendrian exactly when their horizontal "
        "tangents are co-isotropic; the averaged-level current of a function of y is oblique",
    )
    good = coleg_3plane_chain()
    badc = non_coleg_3plane_chain()
    rep_good = classify(good)
    rep_bad = classify(badc)
    row.check(rep_good.co_legendrian is True, lambda: "x1 x2 t plane not co-Legendrian")
    row.check(rep_bad.co_legendrian is False, lambda: "x1 y1 t plane claimed co-Legendrian")
    row.check(
        co_isotropy_check(good.items[0][1]) is True, lambda: "co-isotropy on the x-plane"
    )
    row.check(
        co_isotropy_check(badc.items[0][1]) is False, lambda: "co-isotropy on the xy-plane"
    )
    # smooth current of Phi(y) dy in rank 1: vacuous restriction, closed form
    n = 1
    y = var_y(n, 1)
    box = [(Fraction(-1), Fraction(1))] * 3
    alpha = PolyForm(n, 1, {(2,): y * y + Polynomial.const(3, 1)})
    s = SmoothCurrent(n, alpha, box)
    k = s.dim
    cond1 = wedge_forms(alpha, theta_dtheta_power(n, k - n)).is_zero()
    vac1 = theta_dtheta_power(n, k - n).degree > k
    cond2 = wedge_forms(exterior_d(alpha), theta_dtheta_power(n, k - n - 1)).is_zero()
    row.check(vac1 and cond1 and cond2, lambda: "Phi(y) dy current not oblique")
    rows.append(row.finish())


def _row_pushforward_pairing(rows, seed, instances, ns, max_deg):
    row = _Row(
        "pushforward_pairing",
        "pairing the dilated chain equals pairing against the dilation pullback form",
    )
    rng = _rng_for(seed, row.name)
    for _ in range(instances):
        n = rng.choice(ns)
        dim = rng.randint(1, 2)
        s = random_polynomial_simplex(rng, n, dim)
        chain = Chain(n, dim, [(1, s)])
        lam = Fraction(rng.randint(1, 4))
        omega = random_polyform(rng, n, dim, max_deg)
        lhs = pair(pushforward_dilation(lam, chain), omega)
        rhs = pair(chain, dilation_pullback_form(lam, omega))
        row.check(lhs == rhs, lambda: f"n={n} dim={dim} lam={lam}")
    rows.append(row.finish())


def _row_bump_stokes(rows, seed, instances, ns, max_deg):
    row = _Row(
        "bump_boundary_vanishing",
        "the box integral of d(bump-multiplied form) vanishes exactly",
    )
    rng = _rng_for(seed, row.name)
    for _ in range(instances):
        n = rng.choice(ns)
        box = [(Fraction(-2), Fraction(2))] * nvars_for(n)
        a = random_polyform(rng, n, 2 * n, max_deg)
        val = integrate_top_form(exterior_d(bump_multiply(a, box)), box)
        row.check(val == 0, lambda: f"n={n} alpha={a}")
    rows.append(row.finish())


def _row_cantor(rows, seed, instances):
    row = _Row(
        "cantor_demo",
        "the square-root-distance curve is horizontal exactly on the retained set and its "
        "per-stage vertical gap ratios stay bounded away from zero",
    )
    curve, report = cantor_curve(10)
    row.check(report.max_theta_on_set <= 1e-12, lambda: f"max theta {report.max_theta_on_set}")
    floor = 0.9 * (4.0 / 3.0) * 2.0**-1.5 * 8.0**-1.5
    for r in report.rows:
        row.check(r.s_ratio >= floor, lambda: f"stage {r.stage}: ratio {r.s_ratio}")
    closed = (4.0 / 3.0) * (report.rows[3].gap_length / 2.0) ** 1.5
    row.check(
        abs(report.rows[3].gap_displacement - closed) <= 1e-12,
        lambda: "gap displacement mismatch with the closed form",
    )
    rows.append(row.finish())


# ---------------------------------------------------------------------------
# runner


def run_verification(
    ns: tuple[int, ...] = (1, 2),
    degree_bound: int = 3,
    instances: int = 200,
    seed: int = 7,
    corrupt_dtheta_sign: bool = False,
    include_currents: bool = True,
) -> ConformanceReport:
    """Run every identity row and collect the conformance report.

    corrupt_dtheta_sign flips the sign convention fed to the algebraic
    operator tables; it exists as a negative control so the harness can be
    seen to catch a real failure.
    """
    sign = +1 if corrupt_dtheta_sign else -1
    ns = tuple(ns)
    rows: list[IdentityRow] = []
    small = max(10, instances // 4)

    _row_group_axioms(rows, seed, small)
    _row_frame_commutators(rows, seed, small)
    _row_wedge_algebra(rows, seed, small)
    _row_d_squared(rows, seed, instances, ns, degree_bound, -1)
    _row_d_decomposition(rows, seed, instances, ns, degree_bound)
    _row_d0_pinv(rows, seed, small, ns, sign)
    _row_pi_e0_projector(rows, seed, small, ns, sign)
    _row_pi_e0_weights(rows, seed, instances, ns, sign)
    _row_e0_dimensions(rows, seed, small, ns)
    _row_pi_e_idempotent(rows, seed, instances, ns, degree_bound, sign)
    _row_pi_e_chain_map(rows, seed, instances, ns, degree_bound, sign)
    _row_interleaving(rows, seed, instances, ns, degree_bound, sign)
    _row_bundle_sections(rows, seed, instances, ns, degree_bound, sign)
    _row_dc_squared(rows, seed, instances, ns, degree_bound, sign)
    _row_dc_order(rows, seed, small, ns, degree_bound, sign)
    _row_hodge_star_lefschetz(rows, seed, instances)
    _row_hodge_kernels(rows, seed, instances)
    _row_hodge_ranges(rows, seed, instances)
    _row_hodge_pairing(rows, seed, instances)
    _row_membership_low(rows, seed, instances, ns, degree_bound, sign)
    _row_membership_high(rows, seed, instances, ns, degree_bound, sign)
    _row_bump_stokes(rows, seed, small, ns, min(degree_bound, 2))

    if include_currents:
        curr = max(10, instances // 5)
        _row_stokes(rows, seed, curr, ns, min(degree_bound, 2))
        _row_smooth_boundary(rows, seed, curr, ns, min(degree_bound, 2))
        _row_b_operator(rows, seed, curr, ns, min(degree_bound, 2))
        _row_oblique_correction(rows, seed, curr, ns, min(degree_bound, 2))
        _row_rescale(rows, seed, curr)
        _row_asymptotics(rows, seed, curr)
        _row_two_path(rows, seed, curr)
        _row_mass_domination(rows, seed, curr)
        _row_involution_low(rows, seed, max(50, instances // 4), sign)
        _row_involution_high(rows, seed, max(50, instances // 4), sign)
        _row_boundary_equivariance(rows, seed, max(30, instances // 6), sign)
        _row_coleg_planes(rows, seed, curr)
        _row_pushforward_pairing(rows, seed, curr, ns, min(degree_bound, 2))
        _row_cantor(rows, seed, curr)

    return ConformanceReport(rows)
