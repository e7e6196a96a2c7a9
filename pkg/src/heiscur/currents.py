"""Currents of integration over parametrized chains, and smooth-representative
currents over boxes.

A chain is an integer-weighted list of parametrized simplices or cubes. Its
pairing with a form pulls the form back through the frame components of the
parametrization Jacobian: pairings are exact rational numbers whenever both
the maps and the form are polynomial, and tensor Gauss-Legendre quadrature
otherwise. Masses integrate pointwise norms of the tangent k-vector in the
left-invariant metric:

    riemannian density  |minors|        (Cauchy-Binet)
    oblique density     |theta-minors|  (the |sin| of the tangent angle)
    projected density   |P minors|      (P the invariant-bundle projector)

Smooth currents are represented by a polynomial form on a rational box and
pair by exact integration of the wedge against the test form.
"""

from __future__ import annotations

import itertools
import json
import math
import random
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import exprs, quadrature, ratlin
from .exprs import Node
from .heis_core import GroupPoint, MultiCovector, basis_tuples
from .poly_forms import (
    Box,
    PolyForm,
    Polynomial,
    evaluate_at,
    exterior_d,
    form_dtheta,
    form_theta,
    integrate_top_form,
    nvars_for,
    theta_dtheta_power,
    wedge_forms,
)
from .rumin_complex import d0_pinv_apply, d_c, pi_E, pi_E0_matrix, pi_E0_apply


@dataclass(frozen=True)
class QuadRule:
    """How to evaluate a pairing: exact when possible, or Gauss of an order."""

    mode: str = "auto"  # "auto" | "exact" | "numeric"
    order: int | None = None

    def resolve_order(self, simplex_order: int) -> int:
        return self.order if self.order is not None else simplex_order


# ---------------------------------------------------------------------------
# parametrized simplices and chains


class ParamSimplex:
    """A C1 map from a reference cube or simplex into the group.

    comps holds one expression AST per coordinate (x_1..x_n, y_1..y_n, t) in
    the parameter variables u1..u_dim. sqrt is rejected when its argument can
    reach zero on the closed domain, since the map must stay C1.
    """

    def __init__(self, n: int, dim: int, domain: str, comps: list[Node], quadrature_order: int = quadrature.DEFAULT_ORDER):
        if domain not in ("cube", "simplex"):
            raise ValueError(f"unknown domain {domain!r}")
        if len(comps) != 2 * n + 1:
            raise ValueError(f"map needs {2 * n + 1} components, got {len(comps)}")
        if dim < 0:
            raise ValueError("dimension must be nonnegative")
        self.n = n
        self.dim = dim
        self.domain = domain
        self.comps = list(comps)
        self.quadrature_order = quadrature_order
        self._poly_map: list[Polynomial] | None | bool = False  # False = not computed
        self._jac_asts: list[list[Node]] | None = None
        self._check_sqrt_smoothness()

    @staticmethod
    def from_exprs(n: int, dim: int, domain: str, texts: list[str], quadrature_order: int = quadrature.DEFAULT_ORDER) -> "ParamSimplex":
        comps = [exprs.parse_map_component(s, dim) for s in texts]
        return ParamSimplex(n, dim, domain, comps, quadrature_order)

    def _check_sqrt_smoothness(self):
        args = []
        for c in self.comps:
            args.extend(exprs.sqrt_arguments(c))
        if not args:
            return
        pts = _sample_grid(self.domain, self.dim)
        for a in args:
            env = {f"u{i + 1}": pts[:, i] for i in range(self.dim)}
            vals = exprs.eval_expr(a, env)
            vals = np.asarray(vals, dtype=float)
            if vals.size and float(vals.min()) <= 1e-9:
                raise ValueError(
                    "sqrt argument can reach zero on the domain; the map would not be C1"
                )

    # -- evaluation ---------------------------------------------------------

    def polynomial_map(self) -> list[Polynomial] | None:
        if self._poly_map is False:
            polys = [exprs.expr_to_polynomial(c, self.dim) for c in self.comps]
            self._poly_map = None if any(p is None for p in polys) else polys
        return self._poly_map

    def jacobian_asts(self) -> list[list[Node]]:
        if self._jac_asts is None:
            self._jac_asts = [
                [exprs.diff_expr(c, f"u{j + 1}") for j in range(self.dim)] for c in self.comps
            ]
        return self._jac_asts

    def eval_map(self, points: np.ndarray) -> np.ndarray:
        env = {f"u{i + 1}": points[:, i] for i in range(self.dim)}
        cols = []
        for c in self.comps:
            v = exprs.eval_expr(c, env)
            cols.append(np.broadcast_to(np.asarray(v, dtype=float), (points.shape[0],)))
        return np.stack(cols, axis=1)

    def eval_frame_jacobian(self, points: np.ndarray) -> np.ndarray:
        """Frame components of the partial velocities, shape (m, 2n+1, dim)."""
        m = points.shape[0]
        env = {f"u{i + 1}": points[:, i] for i in range(self.dim)}
        jac = np.zeros((m, 2 * self.n + 1, self.dim))
        for ci, row in enumerate(self.jacobian_asts()):
            for j, d in enumerate(row):
                v = exprs.eval_expr(d, env)
                jac[:, ci, j] = np.broadcast_to(np.asarray(v, dtype=float), (m,))
        coords = self.eval_map(points)
        n = self.n
        # Z row: dt-component plus the twist (1/2) sum (dx_i y_i - dy_i x_i)
        twist = np.zeros((m, self.dim))
        for i in range(n):
            twist += 0.5 * (
                jac[:, i, :] * coords[:, n + i : n + i + 1] - jac[:, n + i, :] * coords[:, i : i + 1]
            )
        jac[:, 2 * n, :] += twist
        return jac

    def frame_jacobian_polys(self) -> list[list[Polynomial]] | None:
        polys = self.polynomial_map()
        if polys is None:
            return None
        n, k = self.n, self.dim
        jac = [[polys[ci].diff(j) for j in range(k)] for ci in range(2 * n + 1)]
        half = Fraction(1, 2)
        for j in range(k):
            twist = Polynomial(k)
            for i in range(n):
                twist = twist + (jac[i][j] * polys[n + i] - jac[n + i][j] * polys[i]).scale(half)
            jac[2 * n][j] = jac[2 * n][j] + twist
        return jac

    # -- structure ----------------------------------------------------------

    def faces(self) -> list[tuple[int, "ParamSimplex"]]:
        """Boundary faces with induced-orientation signs."""
        if self.dim == 0:
            raise ValueError("a zero-dimensional simplex has no boundary")
        k = self.dim
        out = []
        if self.domain == "cube":
            for i in range(1, k + 1):
                for val, sgn in ((1, (-1) ** (i - 1)), (0, -((-1) ** (i - 1)))):
                    mapping = {f"u{i}": exprs.Const(Fraction(val))}
                    for j in range(i + 1, k + 1):
                        mapping[f"u{j}"] = exprs.Var(f"u{j - 1}")
                    comps = [exprs.substitute(c, mapping) for c in self.comps]
                    out.append((sgn, ParamSimplex(self.n, k - 1, "cube", comps, self.quadrature_order)))
            return out
        # simplex: vertex-omitting faces with alternating signs
        for j in range(0, k + 1):
            mapping: dict[str, Node] = {}
            if j == 0:
                total: Node = exprs.Const(Fraction(1))
                for i in range(1, k):
                    total = exprs.Sub(total, exprs.Var(f"u{i}"))
                mapping["u1"] = total
                for i in range(2, k + 1):
                    mapping[f"u{i}"] = exprs.Var(f"u{i - 1}")
            else:
                for i in range(1, j):
                    mapping[f"u{i}"] = exprs.Var(f"u{i}")
                mapping[f"u{j}"] = exprs.Const(Fraction(0))
                for i in range(j + 1, k + 1):
                    mapping[f"u{i}"] = exprs.Var(f"u{i - 1}")
            comps = [exprs.substitute(c, mapping) for c in self.comps]
            out.append(((-1) ** j, ParamSimplex(self.n, k - 1, "simplex", comps, self.quadrature_order)))
        return out

    def dilated(self, lam: Fraction) -> "ParamSimplex":
        lam = Fraction(lam)
        comps = []
        for i, c in enumerate(self.comps):
            factor = lam * lam if i == 2 * self.n else lam
            comps.append(exprs.Mul(exprs.Const(factor), c))
        return ParamSimplex(self.n, self.dim, self.domain, comps, self.quadrature_order)


def _sample_grid(domain: str, k: int, per_axis: int = 7) -> np.ndarray:
    if k == 0:
        return np.zeros((1, 0))
    axes = [np.linspace(0.0, 1.0, per_axis)] * k
    grid = np.meshgrid(*axes, indexing="ij")
    pts = np.stack([g.reshape(-1) for g in grid], axis=1)
    if domain == "simplex":
        pts = pts[pts.sum(axis=1) <= 1.0 + 1e-12]
    return pts


@dataclass
class Chain:
    """Integer-weighted formal sum of parametrized simplices of equal dimension."""

    n: int
    dim: int
    items: list[tuple[int, ParamSimplex]] = field(default_factory=list)
    embedded_disjoint: bool = True
    side: str = "ff"

    def __post_init__(self):
        for coeff, s in self.items:
            if s.n != self.n or s.dim != self.dim:
                raise ValueError("simplex rank or dimension does not match the chain")
            if coeff != int(coeff):
                raise ValueError("chain coefficients must be integers")

    def is_polynomial(self) -> bool:
        return all(s.polynomial_map() is not None for _, s in self.items)

    def boundary(self) -> "Chain":
        if self.dim == 0:
            raise ValueError("zero-dimensional chains have no boundary")
        items = []
        for coeff, s in self.items:
            for sgn, face in s.faces():
                items.append((coeff * sgn, face))
        return Chain(self.n, self.dim - 1, items, self.embedded_disjoint, self.side)


def pushforward_dilation(lam, chain: Chain) -> Chain:
    lam = Fraction(lam)
    if lam <= 0:
        raise ValueError("dilation factor must be positive")
    return Chain(
        chain.n,
        chain.dim,
        [(c, s.dilated(lam)) for c, s in chain.items],
        chain.embedded_disjoint,
        chain.side,
    )


# ---------------------------------------------------------------------------
# pairing


def _poly_det(m: list[list[Polynomial]], k: int) -> Polynomial:
    if k == 0:
        raise ValueError("empty determinant")
    if k == 1:
        return m[0][0]
    nv = m[0][0].nvars
    out = Polynomial(nv)
    for j in range(k):
        minor = [[m[r][c] for c in range(k) if c != j] for r in range(1, k)]
        term = m[0][j] * _poly_det(minor, k - 1)
        out = out + term if j % 2 == 0 else out - term
    return out


def _pullback_volume_poly(s: ParamSimplex, omega: PolyForm) -> Polynomial:
    """Coefficient of du_1..du_k in the exact pullback of omega through s."""
    k = s.dim
    polys = s.polynomial_map()
    assert polys is not None
    if k == 0:
        mc = omega.coeffs.get(())
        if mc is None:
            return Polynomial(0)
        return mc.compose([Polynomial(0) if False else _const_poly0(p) for p in polys])
    jac = s.frame_jacobian_polys()
    out = Polynomial(k)
    for idx, coeff in omega.coeffs.items():
        rows = [jac[i - 1] for i in idx]
        det = _poly_det(rows, k)
        if det.is_zero():
            continue
        out = out + coeff.compose(polys) * det
    return out


def _const_poly0(p: Polynomial) -> Polynomial:
    # a polynomial in zero variables holding the constant value of p
    return Polynomial.const(0, p.constant_value())


def _exact_domain_integral(p: Polynomial, domain: str) -> Fraction:
    if domain == "cube":
        return p.integrate_unit_cube()
    return p.integrate_unit_simplex()


def _numeric_form_components(omega: PolyForm, coords: np.ndarray) -> dict[tuple, np.ndarray]:
    values = [coords[:, i] for i in range(coords.shape[1])]
    out = {}
    for idx, coeff in omega.coeffs.items():
        out[idx] = np.broadcast_to(
            np.asarray(coeff.eval_float(values), dtype=float), (coords.shape[0],)
        )
    return out


def _minors(jac: np.ndarray, rows: tuple[int, ...]) -> np.ndarray:
    sub = jac[:, [r - 1 for r in rows], :]
    if sub.shape[1] == 0:
        return np.ones(jac.shape[0])
    return np.linalg.det(sub)


def _pair_simplex_numeric(s: ParamSimplex, omega: PolyForm, order: int) -> float:
    pts, wts = quadrature.domain_rule(s.domain, s.dim, order)
    coords = s.eval_map(pts)
    comps = _numeric_form_components(omega, coords)
    if s.dim == 0:
        val = comps.get((), np.zeros(1))
        return float(val[0])
    jac = s.eval_frame_jacobian(pts)
    integrand = np.zeros(pts.shape[0])
    for idx, c in comps.items():
        integrand += c * _minors(jac, idx)
    return float(np.sum(wts * integrand))


def pair(chain: Chain, omega: PolyForm, rule: QuadRule = QuadRule()):
    """Pair a chain with a form; exact rational when data permit."""
    if chain.n != omega.n:
        raise ValueError("rank mismatch between chain and form")
    if chain.dim != omega.degree:
        raise ValueError(
            f"dimension {chain.dim} does not match test-form degree {omega.degree}"
        )
    exact_ok = chain.is_polynomial()
    if rule.mode == "exact" and not exact_ok:
        raise ValueError("exact pairing requested but the chain is not polynomial")
    if rule.mode in ("exact", "auto") and exact_ok:
        total = Fraction(0)
        for coeff, s in chain.items:
            p = _pullback_volume_poly(s, omega)
            total += coeff * _exact_domain_integral(p, s.domain)
        return total
    total = 0.0
    for coeff, s in chain.items:
        total += coeff * _pair_simplex_numeric(s, omega, rule.resolve_order(s.quadrature_order))
    return total


def boundary(chain: Chain) -> Chain:
    return chain.boundary()


# ---------------------------------------------------------------------------
# masses


@dataclass
class MassReport:
    riemannian_mass: float
    oblique_mass: float | None = None
    rumin_mass: float | None = None
    quadrature_error_estimate: float = 0.0
    label: str = ""


def _mass_integral(chain: Chain, density: str, order: int | None) -> float:
    """Common mass quadrature; density picks which minor norm is integrated."""
    n = chain.n
    k = chain.dim
    theta = 2 * n + 1
    total = 0.0
    all_rows = list(itertools.combinations(range(1, 2 * n + 2), k))
    proj = None
    if density == "rumin":
        blk = pi_E0_matrix(n).block(k)
        proj = np.array([[float(x) for x in row] for row in blk])
    for coeff, s in chain.items:
        o = order if order is not None else s.quadrature_order
        pts, wts = quadrature.domain_rule(s.domain, k, o)
        if k == 0:
            total += abs(coeff)
            continue
        jac = s.eval_frame_jacobian(pts)
        minors = np.stack([_minors(jac, rows) for rows in all_rows], axis=0)
        if density == "riemannian":
            vals = np.sqrt(np.sum(minors**2, axis=0))
        elif density == "oblique":
            sel = [i for i, rows in enumerate(all_rows) if theta in rows]
            vals = (
                np.sqrt(np.sum(minors[sel] ** 2, axis=0)) if sel else np.zeros(pts.shape[0])
            )
        elif density == "rumin":
            proj_minors = proj @ minors
            vals = np.sqrt(np.sum(proj_minors**2, axis=0))
        else:
            raise ValueError(f"unknown density {density!r}")
        total += abs(coeff) * float(np.sum(wts * vals))
    return total


def mass(chain: Chain, order: int | None = None) -> float:
    """Riemannian mass: weighted k-area in the left-invariant metric.

    Meaningful as a mass only under the chain's embedded-disjoint flag;
    otherwise it is an upper bound for the mass of the sum.
    """
    return _mass_integral(chain, "riemannian", order)


def oblique_mass(chain: Chain, order: int | None = None) -> float:
    """Integral of |sin(tangent angle)|, the mass of the theta-restriction."""
    return _mass_integral(chain, "oblique", order)


def rumin_mass(chain: Chain, order: int | None = None) -> float:
    """Integral of the norm of the projected unit tangent covector."""
    return _mass_integral(chain, "rumin", order)


def angle_density_oblique_mass(chain: Chain, order: int | None = None) -> float:
    """Oblique mass through the |sin| = sqrt(z G^-1 z^T) angle formula.

    Independent of the minor-norm route; used as a cross-check.
    """
    total = 0.0
    n, k = chain.n, chain.dim
    for coeff, s in chain.items:
        if k == 0:
            continue
        o = order if order is not None else s.quadrature_order
        pts, wts = quadrature.domain_rule(s.domain, k, o)
        jac = s.eval_frame_jacobian(pts)
        gram = np.einsum("mij,mik->mjk", jac, jac)
        z = jac[:, 2 * n, :]
        sol = np.linalg.solve(gram, z[:, :, None])[:, :, 0]
        sin2 = np.einsum("mj,mj->m", z, sol)
        area = np.sqrt(np.linalg.det(gram))
        total += abs(coeff) * float(np.sum(wts * np.sqrt(np.maximum(sin2, 0.0)) * area))
    return total


def mass_report(
    chain: Chain,
    want_oblique: bool = True,
    want_rumin: bool = True,
    order: int | None = None,
) -> MassReport:
    base_order = order if order is not None else max(
        [s.quadrature_order for _, s in chain.items] or [quadrature.DEFAULT_ORDER]
    )
    fine = base_order + quadrature.ERROR_ORDER_STEP
    m0, m1 = mass(chain, base_order), mass(chain, fine)
    err = abs(m1 - m0)
    ob = ru = None
    if want_oblique:
        o0, o1 = oblique_mass(chain, base_order), oblique_mass(chain, fine)
        ob, err = o1, max(err, abs(o1 - o0))
    if want_rumin:
        r0, r1 = rumin_mass(chain, base_order), rumin_mass(chain, fine)
        ru, err = r1, max(err, abs(r1 - r0))
    label = "" if chain.embedded_disjoint else "upper bound only"
    return MassReport(m1, ob, ru, err, label)


# ---------------------------------------------------------------------------
# pointwise pullbacks and classification


def pullback_exact(s: ParamSimplex, phi: PolyForm) -> dict[tuple, Polynomial]:
    """Components of the exact pullback of an m-form along a polynomial map."""
    m = phi.degree
    k = s.dim
    if m > k:
        return {}
    polys = s.polynomial_map()
    if polys is None:
        raise ValueError("exact pullback needs a polynomial map")
    jac = s.frame_jacobian_polys()
    out: dict[tuple, Polynomial] = {}
    for cols in itertools.combinations(range(k), m):
        acc = Polynomial(k)
        for idx, coeff in phi.coeffs.items():
            if m == 0:
                acc = acc + coeff.compose(polys)
                continue
            sub = [[jac[i - 1][c] for c in cols] for i in idx]
            det = _poly_det(sub, m)
            if not det.is_zero():
                acc = acc + coeff.compose(polys) * det
        if not acc.is_zero():
            out[cols] = acc
    return out


def pullback_sup_numeric(s: ParamSimplex, phi: PolyForm, order: int) -> float:
    """Sup over quadrature nodes of pullback component magnitudes."""
    m = phi.degree
    k = s.dim
    if m > k:
        return 0.0
    pts, _ = quadrature.domain_rule(s.domain, k, max(order, 4))
    coords = s.eval_map(pts)
    comps = _numeric_form_components(phi, coords)
    if m == 0:
        return max((float(np.max(np.abs(v))) for v in comps.values()), default=0.0)
    jac = s.eval_frame_jacobian(pts)
    sup = 0.0
    for cols in itertools.combinations(range(k), m):
        acc = np.zeros(pts.shape[0])
        for idx, cvals in comps.items():
            sub = jac[:, [i - 1 for i in idx], :][:, :, list(cols)]
            acc += cvals * np.linalg.det(sub)
        sup = max(sup, float(np.max(np.abs(acc))))
    return sup


@dataclass
class PredicateResult:
    holds: bool
    vacuous: bool = False
    pointwise_residual: object = 0
    pairing_residual: object = 0


@dataclass
class ClassifyReport:
    horizontal: bool | None
    vertical: bool | None
    co_legendrian: bool | None
    oblique: bool | None
    exact: bool
    tolerance: float
    details: dict[str, PredicateResult] = field(default_factory=dict)


def _restriction_zero(
    chain: Chain, phi: PolyForm, rng: random.Random, tol, exact: bool
) -> PredicateResult:
    """Check T restricted to phi vanishes, by pullback and by pairings."""
    k = chain.dim
    if phi.degree > k:
        return PredicateResult(True, vacuous=True)
    point_res: object = Fraction(0) if exact else 0.0
    for _, s in chain.items:
        if exact:
            comps = pullback_exact(s, phi)
            if comps:
                point_res = max(point_res, Fraction(1))
        else:
            point_res = max(point_res, pullback_sup_numeric(s, phi, s.quadrature_order))
    pair_res: object = Fraction(0) if exact else 0.0
    comp_degree = k - phi.degree
    for _ in range(3):
        test = _random_bump_form(chain.n, comp_degree, rng)
        value = pair(chain, wedge_forms(phi, test), QuadRule("auto"))
        pair_res = max(pair_res, abs(value))
    holds = point_res <= tol and pair_res <= tol
    return PredicateResult(bool(holds), False, point_res, pair_res)


def _random_bump_form(n: int, degree: int, rng: random.Random) -> PolyForm:
    from .poly_forms import bump_multiply

    nv = nvars_for(n)
    coeffs = {}
    for idx in rng.sample(basis_tuples(n, degree), min(2, len(basis_tuples(n, degree)))):
        terms = {}
        for _ in range(2):
            e = [0] * nv
            e[rng.randrange(nv)] = rng.randint(0, 2)
            terms[tuple(e)] = terms.get(tuple(e), Fraction(0)) + Fraction(rng.randint(-3, 3))
        coeffs[idx] = Polynomial(nv, terms)
    form = PolyForm(n, degree, coeffs)
    box = [(Fraction(-2), Fraction(2))] * nv
    return bump_multiply(form, box)


def _vanishes_on_horizontal(chain: Chain, rng, tol, exact) -> PredicateResult:
    """Pointwise and pairing check that the chain kills horizontal forms."""
    n, k = chain.n, chain.dim
    if k > 2 * n:
        return PredicateResult(True, vacuous=True)
    point_res: object = Fraction(0) if exact else 0.0
    for _, s in chain.items:
        for idx in itertools.combinations(range(1, 2 * n + 1), k):
            phi = PolyForm.from_covector(MultiCovector.monomial(n, idx))
            if exact:
                if pullback_exact(s, phi):
                    point_res = max(point_res, Fraction(1))
            else:
                point_res = max(point_res, pullback_sup_numeric(s, phi, s.quadrature_order))
    pair_res: object = Fraction(0) if exact else 0.0
    for _ in range(3):
        test = _random_bump_form(chain.n, k, rng)
        horiz, _ = _split_horizontal(test)
        value = pair(chain, horiz, QuadRule("auto"))
        pair_res = max(pair_res, abs(value))
    holds = point_res <= tol and pair_res <= tol
    return PredicateResult(bool(holds), False, point_res, pair_res)


def _split_horizontal(a: PolyForm) -> tuple[PolyForm, PolyForm]:
    from .poly_forms import weight_split_form

    return weight_split_form(a)


def classify(chain: Chain, tolerance: float | None = None, seed: int = 0) -> ClassifyReport:
    """Evaluate the structural predicates of a chain.

    horizontal: theta and dtheta restrictions vanish. vertical: the chain and
    its boundary kill horizontal forms. co-Legendrian (dimensions above the
    middle): the theta ^ dtheta^(k-n) restriction vanishes; oblique adds the
    same for the boundary one power down. Restrictions whose degree exceeds
    the dimension are vacuously true and flagged as such.
    """
    n, k = chain.n, chain.dim
    exact = chain.is_polynomial()
    if tolerance is None:
        tolerance = 0.0 if exact else _float_tolerance(chain)
    tol = Fraction(0) if exact else tolerance
    rng = random.Random(seed)
    details: dict[str, PredicateResult] = {}

    theta_form = form_theta(n)
    dtheta_form = form_dtheta(n)
    details["theta_restriction"] = _restriction_zero(chain, theta_form, rng, tol, exact)
    details["dtheta_restriction"] = _restriction_zero(chain, dtheta_form, rng, tol, exact)
    horizontal = details["theta_restriction"].holds and details["dtheta_restriction"].holds

    details["kills_horizontal"] = _vanishes_on_horizontal(chain, rng, tol, exact)
    vertical: bool | None = None
    if k >= 1:
        bd = chain.boundary()
        details["boundary_kills_horizontal"] = _vanishes_on_horizontal(bd, rng, tol, exact)
        vertical = details["kills_horizontal"].holds and details["boundary_kills_horizontal"].holds
    else:
        vertical = details["kills_horizontal"].holds

    co_leg: bool | None = None
    oblique: bool | None = None
    if k >= n + 1:
        phi = theta_dtheta_power(n, k - n)
        details["co_legendrian_restriction"] = _restriction_zero(chain, phi, rng, tol, exact)
        co_leg = details["co_legendrian_restriction"].holds
        if k >= 1:
            phi2 = theta_dtheta_power(n, k - n - 1)
            bd = chain.boundary()
            details["boundary_co_legendrian"] = _restriction_zero(bd, phi2, rng, tol, exact)
            oblique = co_leg and details["boundary_co_legendrian"].holds
    return ClassifyReport(horizontal, vertical, co_leg, oblique, exact, float(tolerance), details)


def _float_tolerance(chain: Chain) -> float:
    scale = 1.0
    for _, s in chain.items:
        pts = _sample_grid(s.domain, s.dim, 4)
        if pts.shape[0]:
            jac = s.eval_frame_jacobian(pts) if s.dim else None
            if jac is not None and jac.size:
                scale = max(scale, float(np.max(np.abs(jac))))
    return max(1e-9, 100 * np.finfo(float).eps * scale)


def co_isotropy_check(s: ParamSimplex, samples: int = 3) -> bool:
    """Pointwise test that the horizontal tangent part is co-isotropic.

    At rational sample points, the symplectic-orthogonal complement of the
    horizontal tangent subspace must be dtheta-isotropic. Needs a polynomial
    map so the check stays exact.
    """
    n, k = s.n, s.dim
    jac = s.frame_jacobian_polys()
    if jac is None:
        raise ValueError("co-isotropy check needs a polynomial map")
    sym = ratlin.zeros(2 * n, 2 * n)
    for i in range(n):
        sym[i][n + i] = Fraction(-1)
        sym[n + i][i] = Fraction(1)
    pts = _rational_sample_points(s.domain, k, samples)
    for u in pts:
        cols = [[jac[r][c].eval(u) for c in range(k)] for r in range(2 * n + 1)]
        zrow = [cols[2 * n]]
        combos = ratlin.nullspace(zrow)
        horiz = []
        for combo in combos:
            horiz.append(
                [sum(cols[r][c] * combo[c] for c in range(k)) for r in range(2 * n)]
            )
        if not horiz:
            continue
        rows = [ratlin.matvec(sym, w) for w in horiz]
        perp = ratlin.nullspace(rows)
        for v in perp:
            for w in perp:
                pairing = sum(
                    v[i] * sum(sym[i][j] * w[j] for j in range(2 * n)) for i in range(2 * n)
                )
                if pairing != 0:
                    return False
    return True


def _rational_sample_points(domain: str, k: int, per_axis: int) -> list[list[Fraction]]:
    if k == 0:
        return [[]]
    values = [Fraction(i + 1, per_axis + 2) for i in range(per_axis)]
    pts = [list(p) for p in itertools.product(values, repeat=k)]
    if domain == "simplex":
        pts = [p for p in pts if sum(p) < 1]
    return pts


# ---------------------------------------------------------------------------
# smooth-representative currents


@dataclass
class SmoothCurrent:
    """A current represented by a polynomial form on a rational box.

    side "ff" pairs with arbitrary test forms; side "rumin" is the variant
    whose tests are sections of the invariant subbundle. Either way the
    pairing is the exact integral of the wedge over the box.
    """

    n: int
    form: PolyForm
    box: Box
    side: str = "ff"

    @property
    def dim(self) -> int:
        return 2 * self.n + 1 - self.form.degree

    def pair(self, omega: PolyForm) -> Fraction:
        return ff_pair(self, omega)

    def boundary(self) -> "SmoothCurrent":
        """Boundary as a smooth current, valid against compactly supported tests."""
        k = self.dim
        sign = (-1) ** k
        if self.side == "rumin":
            if not pi_E0_apply(self.form) == self.form:
                raise ValueError("representing form must be a section of the bundle")
            new_form = d_c(self.form).scale(sign)
        else:
            new_form = exterior_d(self.form).scale(sign)
        return SmoothCurrent(self.n, new_form, self.box, self.side)


def ff_pair(s: SmoothCurrent, omega: PolyForm) -> Fraction:
    if omega.n != s.n:
        raise ValueError("rank mismatch")
    if omega.degree + s.form.degree != 2 * s.n + 1:
        raise ValueError(
            f"degrees {s.form.degree} and {omega.degree} are not complementary"
        )
    return integrate_top_form(wedge_forms(s.form, omega), s.box)


def oblique_correction(s: SmoothCurrent) -> SmoothCurrent:
    """Replace the representing form by its oblique projection."""
    return SmoothCurrent(s.n, pi_E(s.form), s.box, side="ff")


class BOperatorCurrent:
    """The one-dimension-up functional pairing tests through the d0 pseudo-inverse."""

    def __init__(self, base):
        self.base = base
        self.n = base.n
        self.dim = base.dim + 1

    def pair(self, omega: PolyForm, rule: QuadRule = QuadRule()):
        if omega.degree > 2 * self.n + 1:
            raise ValueError("test degree exceeds the ambient dimension")
        return pair_current(self.base, d0_pinv_apply(omega), rule)


def b_operator(current) -> BOperatorCurrent:
    return BOperatorCurrent(current)


class ProjectedCurrent:
    """A current paired through a projector applied to each test form.

    side "ff" applies the invariant projector (the tilde construction from a
    Rumin-side functional); side "rumin" applies the oblique projector (the
    hat construction from an FF-side functional).
    """

    def __init__(self, base, side: str):
        self.base = base
        self.side = side
        self.n = base.n
        self.dim = base.dim

    def pair(self, omega: PolyForm, rule: QuadRule = QuadRule()):
        if self.side == "ff":
            return pair_current(self.base, pi_E0_apply(omega), rule)
        return pair_current(self.base, pi_E(omega), rule)


def pair_current(x, omega: PolyForm, rule: QuadRule = QuadRule()):
    if isinstance(x, Chain):
        return pair(x, omega, rule)
    if isinstance(x, (SmoothCurrent,)):
        return ff_pair(x, omega)
    if isinstance(x, (ProjectedCurrent, BOperatorCurrent)):
        return x.pair(omega, rule)
    raise TypeError(f"cannot pair object of type {type(x).__name__}")


def correspondence(x):
    """Map a current to the other side of the Rumin/Federer-Fleming pairing.

    Dimensions at or below the middle wrap the pairing with the appropriate
    projector on test forms. Above the middle the maps act on representing
    forms, so a form-represented current is required there.
    """
    n = x.n
    k = x.dim
    side = getattr(x, "side", "ff")
    if k <= n:
        return ProjectedCurrent(x, "ff" if side == "rumin" else "rumin")
    if not isinstance(x, SmoothCurrent):
        raise ValueError(
            "above the middle dimension the correspondence acts on representing "
            "forms; integration chains carry none, so supply a smooth current"
        )
    if side == "rumin":
        return SmoothCurrent(n, pi_E(x.form), x.box, side="ff")
    return SmoothCurrent(n, pi_E0_apply(x.form), x.box, side="rumin")


# ---------------------------------------------------------------------------
# oblique mass: density route versus pairing-sup route


def oblique_two_path(chain: Chain, seed: int = 0, n_fields: int = 50, order: int | None = None) -> tuple[float, float]:
    """Oblique mass two ways: angle-density quadrature, and the sup of
    pairings against unit test covector fields theta ^ phi.

    The family holds n_fields random constant unit horizontal fields plus the
    pointwise calibrating field dual to the tangent, which realizes the sup;
    every member is unit so no pairing can exceed the density route.
    """
    n, k = chain.n, chain.dim
    density = angle_density_oblique_mass(chain, order)
    rng = random.Random(seed)
    hor = list(itertools.combinations(range(1, 2 * n + 1), k - 1))
    values = []
    for _ in range(n_fields):
        raw = np.array([rng.gauss(0.0, 1.0) for _ in hor])
        raw /= np.linalg.norm(raw) or 1.0
        values.append(abs(_pair_theta_field(chain, dict(zip(hor, raw)), None, order)))
    values.append(abs(_pair_theta_field(chain, None, "calibrate", order)))
    return density, max(values)


def _pair_theta_field(chain: Chain, constant_field, mode, order) -> float:
    """Pair with theta ^ phi where phi is a unit horizontal field."""
    n, k = chain.n, chain.dim
    theta = 2 * n + 1
    total = 0.0
    sign = (-1) ** (k - 1)
    for coeff, s in chain.items:
        o = order if order is not None else s.quadrature_order
        pts, wts = quadrature.domain_rule(s.domain, k, o)
        jac = s.eval_frame_jacobian(pts)
        theta_rows = [
            rows for rows in itertools.combinations(range(1, 2 * n + 2), k) if theta in rows
        ]
        minors = {rows: _minors(jac, rows) for rows in theta_rows}
        if mode == "calibrate":
            norm = np.sqrt(sum(m**2 for m in minors.values()))
            norm = np.where(norm == 0.0, 1.0, norm)
            integrand = sum(m * m for m in minors.values()) / norm
        else:
            integrand = np.zeros(pts.shape[0])
            for rows, m in minors.items():
                j = tuple(i for i in rows if i != theta)
                phi_j = constant_field.get(j, 0.0)
                integrand = integrand + sign * phi_j * m
        total += coeff * float(np.sum(wts * integrand))
    return total


# ---------------------------------------------------------------------------
# configuration files


def chain_from_dict(data: dict) -> Chain:
    try:
        n = int(data["n"])
        simplices = data["simplices"]
        embedded = bool(data.get("embedded_disjoint", True))
    except KeyError as e:
        raise ValueError(f"chain config is missing field {e.args[0]!r}") from None
    items = []
    dim = None
    for i, spec in enumerate(simplices):
        try:
            coeff = int(spec["coefficient"])
            sdim = int(spec["dim"])
            domain = spec.get("domain", "cube")
            texts = spec["map"]
            order = int(spec.get("quadrature_order", quadrature.DEFAULT_ORDER))
        except KeyError as e:
            raise ValueError(f"simplex {i}: missing field {e.args[0]!r}") from None
        if dim is None:
            dim = sdim
        elif dim != sdim:
            raise ValueError(f"simplex {i}: dimension {sdim} differs from {dim}")
        try:
            simplex = ParamSimplex.from_exprs(n, sdim, domain, texts, order)
        except exprs.ExprError as e:
            raise ValueError(f"simplex {i}: {e}") from None
        items.append((coeff, simplex))
    if dim is None:
        raise ValueError("chain config holds no simplices")
    return Chain(n, dim, items, embedded)


def load_chain(path: str) -> Chain:
    with open(path, "r", encoding="utf-8") as f:
        data = json.load(f)
    return chain_from_dict(data)


# ---------------------------------------------------------------------------
# battery chains


def vertical_square_chain(n: int = 1, order: int = quadrature.DEFAULT_ORDER) -> Chain:
    texts = ["0"] * (2 * n + 1)
    texts[0] = "u1"
    texts[2 * n] = "u2"
    return Chain(n, 2, [(1, ParamSimplex.from_exprs(n, 2, "cube", texts, order))])


def horizontal_segment_chain(n: int = 1, order: int = quadrature.DEFAULT_ORDER) -> Chain:
    texts = ["0"] * (2 * n + 1)
    texts[0] = "u1"
    return Chain(n, 1, [(1, ParamSimplex.from_exprs(n, 1, "cube", texts, order))])


def t0_graph_square_chain(order: int = quadrature.DEFAULT_ORDER) -> Chain:
    return Chain(1, 2, [(1, ParamSimplex.from_exprs(1, 2, "cube", ["u1", "u2", "0"], order))])


def coleg_3plane_chain(order: int = quadrature.DEFAULT_ORDER) -> Chain:
    texts = ["u1", "u2", "0", "0", "u3"]
    return Chain(2, 3, [(1, ParamSimplex.from_exprs(2, 3, "cube", texts, order))])


def non_coleg_3plane_chain(order: int = quadrature.DEFAULT_ORDER) -> Chain:
    texts = ["u1", "0", "u2", "0", "u3"]
    return Chain(2, 3, [(1, ParamSimplex.from_exprs(2, 3, "cube", texts, order))])


# ---------------------------------------------------------------------------
# the square-root-distance curve over a Cantor-like set


@dataclass
class CantorStageRow:
    stage: int
    gap_length: float
    gap_displacement: float
    s_ratio: float
    max_theta_on_retained_endpoints: float


@dataclass
class CantorReport:
    rows: list[CantorStageRow]
    max_theta_on_set: float


class CantorCurve:
    """The curve x -> (x, 0, integral of sqrt(dist(., A))) for a finite
    Cantor-like construction A.

    Stage j removes a centered open gap of length r_j = base_gap * 2^(-q j)
    from each retained interval; the total removed length must stay below 1.
    The vertical speed is the square root of the distance to the retained
    set, so the velocity is horizontal exactly on A.
    """

    def __init__(self, levels: int, gap_exponent: Fraction = Fraction(4, 3), base_gap: Fraction = Fraction(1, 8)):
        if levels < 1:
            raise ValueError("levels must be at least 1")
        gap_exponent = Fraction(gap_exponent)
        base_gap = Fraction(base_gap)
        if base_gap < 0:
            raise ValueError("invalid gap sequence: negative base gap")
        self.levels = levels
        self.gap_lengths = [
            float(base_gap) * 2.0 ** (-float(gap_exponent) * j) for j in range(levels)
        ]
        if sum(2**j * r for j, r in enumerate(self.gap_lengths)) >= 1.0:
            raise ValueError("invalid gap sequence: removed length reaches 1")
        intervals = [(0.0, 1.0)]
        self.gaps: list[tuple[int, float, float]] = []
        for j, r in enumerate(self.gap_lengths):
            new_intervals = []
            for a, b in intervals:
                mid = (a + b) / 2.0
                ga, gb = mid - r / 2.0, mid + r / 2.0
                if r > 0 and gb - ga < b - a:
                    self.gaps.append((j, ga, gb))
                    new_intervals.extend([(a, ga), (gb, b)])
                else:
                    new_intervals.append((a, b))
            intervals = new_intervals
        self.intervals = intervals
        self.gaps.sort(key=lambda g: g[1])
        # prefix sums of the full-gap vertical displacements, in x-order
        self._gap_prefix = [0.0]
        for _, ga, gb in self.gaps:
            self._gap_prefix.append(self._gap_prefix[-1] + _gap_integral(gb - ga))

    def distance_to_set(self, x: float) -> float:
        if x <= 0.0:
            return -x
        if x >= 1.0:
            return x - 1.0
        for _, ga, gb in self.gaps:
            if ga < x < gb:
                return min(x - ga, gb - x)
        return 0.0

    def u(self, x: float) -> float:
        return math.sqrt(self.distance_to_set(x))

    def vertical_coordinate(self, x: float) -> float:
        """Integral of u from 0 to x, by closed-form piecewise integration."""
        if x <= 0.0:
            return -_outside_integral(-x)
        total = 0.0
        for i, (_, ga, gb) in enumerate(self.gaps):
            if gb <= x:
                total = self._gap_prefix[i + 1]
            elif ga < x < gb:
                total += _partial_gap_integral(ga, gb, x)
                return total
            else:
                break
        if x > 1.0:
            total = self._gap_prefix[len(self.gaps)] + _outside_integral(x - 1.0)
        return total

    def point(self, x: float) -> GroupPoint:
        return GroupPoint.of((x,), (0.0,), self.vertical_coordinate(x))

    def velocity(self, x: float) -> tuple[float, float, float]:
        return (1.0, 0.0, self.u(x))

    def theta_of_velocity(self, x: float) -> float:
        """theta applied to the curve velocity, via the frame conversion."""
        from .heis_core import frame_change

        row = frame_change(self.point(x))[-1]
        v = self.velocity(x)
        return float(sum(float(r) * c for r, c in zip(row, v)))

    def report(self, sample_per_interval: int = 3) -> CantorReport:
        rows = []
        max_theta_global = 0.0
        for j in range(self.levels):
            stage_gaps = [g for g in self.gaps if g[0] == j]
            ga, gb = stage_gaps[0][1], stage_gaps[0][2]
            disp = self.vertical_coordinate(gb) - self.vertical_coordinate(ga)
            s_ratio = disp * 4.0**j
            max_theta = 0.0
            for a, b in self.intervals:
                for x in (a, b):
                    max_theta = max(max_theta, abs(self.theta_of_velocity(x)))
            max_theta_global = max(max_theta_global, max_theta)
            rows.append(
                CantorStageRow(j, self.gap_lengths[j], disp, s_ratio, max_theta)
            )
        for a, b in self.intervals:
            for frac in np.linspace(0.0, 1.0, sample_per_interval):
                x = a + (b - a) * float(frac)
                max_theta_global = max(max_theta_global, abs(self.theta_of_velocity(x)))
        return CantorReport(rows, max_theta_global)


def _gap_integral(r: float) -> float:
    # integral of sqrt(min(s, r - s)) over (0, r)
    return (4.0 / 3.0) * (r / 2.0) ** 1.5


def _partial_gap_integral(ga: float, gb: float, x: float) -> float:
    mid = (ga + gb) / 2.0
    if x <= mid:
        return (2.0 / 3.0) * (x - ga) ** 1.5
    left = (2.0 / 3.0) * (mid - ga) ** 1.5
    return left + (2.0 / 3.0) * ((gb - mid) ** 1.5 - (gb - x) ** 1.5)


def _outside_integral(d: float) -> float:
    return (2.0 / 3.0) * d**1.5


def cantor_curve(levels: int, gap_exponent=Fraction(4, 3), base_gap=Fraction(1, 8)) -> tuple[CantorCurve, CantorReport]:
    curve = CantorCurve(levels, Fraction(gap_exponent), Fraction(base_gap))
    return curve, curve.report()
