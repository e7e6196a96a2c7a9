"""Plain-text expression grammar for forms and parametrization maps.

Tokens: coframe symbols ``dx1..dxn, dy1..dyn, theta`` (unindexed ``dx, dy``
are accepted as aliases for index 1), coordinate variables ``x1.., y1.., t``,
parameter variables ``u1..uk``, rational constants (``3``, ``1/2``, ``0.25``),
operators ``+ - * ^`` and parentheses. ``^`` is the wedge product; between
scalars it coincides with multiplication. ``**`` raises to a nonnegative
integer power (a convenience on top of the base grammar). Map expressions may
additionally call ``sin cos exp sqrt``. The grammar is LL(1) and whitespace
insensitive.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction

from .poly_forms import Polynomial, PolyForm, var_t, var_x, var_y, wedge_forms

_FUNCTIONS = ("sin", "cos", "exp", "sqrt")


class ExprError(ValueError):
    """Parse or validation error carrying a line/column position."""

    def __init__(self, message: str, text: str, pos: int):
        line = text.count("\n", 0, pos) + 1
        col = pos - (text.rfind("\n", 0, pos) + 1) + 1
        super().__init__(f"{message} (line {line}, column {col})")
        self.line = line
        self.column = col


# ---------------------------------------------------------------------------
# AST


@dataclass(frozen=True)
class Const:
    value: Fraction


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Coframe:
    name: str  # "dx<i>", "dy<i>" or "theta"


@dataclass(frozen=True)
class Add:
    left: object
    right: object


@dataclass(frozen=True)
class Sub:
    left: object
    right: object


@dataclass(frozen=True)
class Mul:
    left: object
    right: object


@dataclass(frozen=True)
class Neg:
    arg: object


@dataclass(frozen=True)
class Pow:
    base: object
    exponent: int


@dataclass(frozen=True)
class Call:
    fn: str
    arg: object


Node = object


# ---------------------------------------------------------------------------
# lexer

_TOKEN_RE = re.compile(
    r"\s*(?:"
    r"(?P<number>\d+(?:\.\d+)?(?:/\d+)?)"
    r"|(?P<name>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<power>\*\*)"
    r"|(?P<op>[-+*^()])"
    r")"
)


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None or m.end() == pos:
            stripped = text[pos:].lstrip()
            if not stripped:
                break
            bad_at = len(text) - len(stripped)
            raise ExprError(f"unexpected character {text[bad_at]!r}", text, bad_at)
        kind = m.lastgroup
        tokens.append((kind, m.group(kind), m.start(kind)))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def advance(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, kind: str, value: str | None = None):
        tok = self.advance()
        if tok[0] != kind or (value is not None and tok[1] != value):
            raise ExprError(f"expected {value or kind}, found {tok[1]!r}", self.text, tok[2])
        return tok

    # expr := term (("+"|"-") term)*
    def parse_expr(self) -> Node:
        node = self.parse_term()
        while True:
            kind, value, _ = self.peek()
            if kind == "op" and value in "+-":
                self.advance()
                rhs = self.parse_term()
                node = Add(node, rhs) if value == "+" else Sub(node, rhs)
            else:
                return node

    # term := power (("*"|"^") power)*   (wedge and product share precedence)
    def parse_term(self) -> Node:
        node = self.parse_power()
        while True:
            kind, value, _ = self.peek()
            if kind == "op" and value in "*^":
                self.advance()
                node = Mul(node, self.parse_power())
            else:
                return node

    # power := unary ("**" integer)?
    def parse_power(self) -> Node:
        node = self.parse_unary()
        kind, _, pos = self.peek()
        if kind == "power":
            self.advance()
            tok = self.expect("number")
            if "/" in tok[1] or "." in tok[1]:
                raise ExprError("power exponent must be a nonnegative integer", self.text, tok[2])
            return Pow(node, int(tok[1]))
        return node

    # unary := "-" unary | atom
    def parse_unary(self) -> Node:
        kind, value, _ = self.peek()
        if kind == "op" and value == "-":
            self.advance()
            return Neg(self.parse_unary())
        if kind == "op" and value == "+":
            self.advance()
            return self.parse_unary()
        return self.parse_atom()

    def parse_atom(self) -> Node:
        kind, value, pos = self.advance()
        if kind == "number":
            return Const(_parse_rational(value))
        if kind == "name":
            if value in _FUNCTIONS:
                self.expect("op", "(")
                arg = self.parse_expr()
                self.expect("op", ")")
                return Call(value, arg)
            return _classify_name(value, self.text, pos)
        if kind == "op" and value == "(":
            node = self.parse_expr()
            self.expect("op", ")")
            return node
        raise ExprError(f"unexpected token {value!r}", self.text, pos)


def _parse_rational(text: str) -> Fraction:
    if "/" in text:
        num, den = text.split("/")
        return Fraction(Fraction(num), Fraction(den))
    return Fraction(text)


_NAME_RE = re.compile(r"^(dx|dy|x|y|u)(\d*)$")


def _classify_name(name: str, text: str, pos: int) -> Node:
    if name == "theta":
        return Coframe("theta")
    if name == "t":
        return Var("t")
    m = _NAME_RE.match(name)
    if m is None:
        raise ExprError(f"unknown symbol {name!r}", text, pos)
    stem, idx = m.group(1), m.group(2)
    index = int(idx) if idx else 1
    if index < 1:
        raise ExprError(f"index must start at 1 in {name!r}", text, pos)
    if stem in ("dx", "dy"):
        return Coframe(f"{stem}{index}")
    return Var(f"{stem}{index}")


def parse(text: str) -> Node:
    parser = _Parser(text)
    node = parser.parse_expr()
    parser.expect("end")
    return node


# ---------------------------------------------------------------------------
# lowering to polynomial forms


def to_polyform(node: Node, n: int, source: str = "") -> PolyForm:
    """Evaluate an AST in the polynomial-form algebra over rank n.

    Scalars become 0-forms; + - * ^ act in the graded algebra (the wedge of
    0-forms is the product). Transcendental calls are rejected.
    """
    value = _form_eval(node, n, source)
    if isinstance(value, Polynomial):
        return PolyForm.from_function(n, value)
    return value


def _form_eval(node: Node, n: int, source: str):
    if isinstance(node, Const):
        return Polynomial.const(2 * n + 1, node.value)
    if isinstance(node, Var):
        return _coordinate_poly(node.name, n, source)
    if isinstance(node, Coframe):
        return _coframe_form(node.name, n, source)
    if isinstance(node, Neg):
        v = _form_eval(node.arg, n, source)
        return -v
    if isinstance(node, Add) or isinstance(node, Sub):
        a = _form_eval(node.left, n, source)
        b = _form_eval(node.right, n, source)
        a, b = _promote_pair(a, b, n)
        return a + b if isinstance(node, Add) else a - b
    if isinstance(node, Mul):
        a = _form_eval(node.left, n, source)
        b = _form_eval(node.right, n, source)
        if isinstance(a, Polynomial) and isinstance(b, Polynomial):
            return a * b
        if isinstance(a, Polynomial):
            return b.multiply_function(a)
        if isinstance(b, Polynomial):
            return a.multiply_function(b)
        return wedge_forms(a, b)
    if isinstance(node, Pow):
        base = _form_eval(node.base, n, source)
        if isinstance(base, Polynomial):
            return base**node.exponent
        out = base
        if node.exponent == 0:
            return Polynomial.const(2 * n + 1, 1)
        for _ in range(node.exponent - 1):
            out = wedge_forms(out, base)
        return out
    if isinstance(node, Call):
        raise ExprError(f"function {node.fn!r} is not allowed in form expressions", source, 0)
    raise TypeError(f"unexpected node {node!r}")


def _coordinate_poly(name: str, n: int, source: str) -> Polynomial:
    if name == "t":
        return var_t(n)
    stem, index = name[0], int(name[1:])
    if index > n:
        raise ExprError(f"variable {name!r} exceeds rank {n}", source, 0)
    if name.startswith("u"):
        raise ExprError(f"parameter {name!r} is not a coordinate variable", source, 0)
    return var_x(n, index) if stem == "x" else var_y(n, index)


def _coframe_form(name: str, n: int, source: str) -> PolyForm:
    if name == "theta":
        idx = 2 * n + 1
    else:
        stem, index = name[:2], int(name[2:])
        if index > n:
            raise ExprError(f"coframe symbol {name!r} exceeds rank {n}", source, 0)
        idx = index if stem == "dx" else n + index
    return PolyForm.monomial(n, (idx,), Polynomial.const(2 * n + 1, 1))


def _promote_pair(a, b, n: int):
    if isinstance(a, Polynomial) and isinstance(b, PolyForm):
        if b.degree != 0:
            raise ValueError("cannot add a scalar and a form of positive degree")
        a = PolyForm.from_function(n, a)
    if isinstance(b, Polynomial) and isinstance(a, PolyForm):
        if a.degree != 0:
            raise ValueError("cannot add a scalar and a form of positive degree")
        b = PolyForm.from_function(n, b)
    return a, b


def parse_form(text: str, n: int) -> PolyForm:
    return to_polyform(parse(text), n, text)


# ---------------------------------------------------------------------------
# scalar map expressions (parameter variables u1..uk)


def validate_map_expr(node: Node, k: int, source: str = "") -> None:
    """Check a map component: scalar in u1..uk, calls allowed."""
    if isinstance(node, Const):
        return
    if isinstance(node, Var):
        if not node.name.startswith("u"):
            raise ExprError(
                f"map components are functions of u1..u{k}, found {node.name!r}", source, 0
            )
        index = int(node.name[1:])
        if not 1 <= index <= max(k, 1):
            raise ExprError(f"parameter {node.name!r} out of range (dim {k})", source, 0)
        return
    if isinstance(node, Coframe):
        raise ExprError(f"coframe symbol {node.name!r} not allowed in a map component", source, 0)
    if isinstance(node, (Add, Sub, Mul)):
        validate_map_expr(node.left, k, source)
        validate_map_expr(node.right, k, source)
        return
    if isinstance(node, Neg):
        validate_map_expr(node.arg, k, source)
        return
    if isinstance(node, Pow):
        validate_map_expr(node.base, k, source)
        return
    if isinstance(node, Call):
        validate_map_expr(node.arg, k, source)
        return
    raise TypeError(f"unexpected node {node!r}")


def parse_map_component(text: str, k: int) -> Node:
    node = parse(text)
    validate_map_expr(node, k, text)
    return node


def expr_is_smooth(node: Node) -> bool:
    """True when no sqrt appears (sqrt is only C1 away from zero)."""
    if isinstance(node, Call):
        return node.fn != "sqrt" and expr_is_smooth(node.arg)
    if isinstance(node, (Add, Sub, Mul)):
        return expr_is_smooth(node.left) and expr_is_smooth(node.right)
    if isinstance(node, Neg):
        return expr_is_smooth(node.arg)
    if isinstance(node, Pow):
        return expr_is_smooth(node.base)
    return True


def sqrt_arguments(node: Node) -> list[Node]:
    out = []
    if isinstance(node, Call):
        if node.fn == "sqrt":
            out.append(node.arg)
        out.extend(sqrt_arguments(node.arg))
    elif isinstance(node, (Add, Sub, Mul)):
        out.extend(sqrt_arguments(node.left))
        out.extend(sqrt_arguments(node.right))
    elif isinstance(node, (Neg, Pow)):
        out.extend(sqrt_arguments(node.arg if isinstance(node, Neg) else node.base))
    return out


def diff_expr(node: Node, var: str) -> Node:
    """Symbolic derivative with respect to a parameter variable."""
    zero = Const(Fraction(0))
    if isinstance(node, Const):
        return zero
    if isinstance(node, Var):
        return Const(Fraction(1)) if node.name == var else zero
    if isinstance(node, Add):
        return Add(diff_expr(node.left, var), diff_expr(node.right, var))
    if isinstance(node, Sub):
        return Sub(diff_expr(node.left, var), diff_expr(node.right, var))
    if isinstance(node, Neg):
        return Neg(diff_expr(node.arg, var))
    if isinstance(node, Mul):
        return Add(
            Mul(diff_expr(node.left, var), node.right),
            Mul(node.left, diff_expr(node.right, var)),
        )
    if isinstance(node, Pow):
        if node.exponent == 0:
            return zero
        return Mul(
            Const(Fraction(node.exponent)),
            Mul(Pow(node.base, node.exponent - 1), diff_expr(node.base, var)),
        )
    if isinstance(node, Call):
        inner = diff_expr(node.arg, var)
        if node.fn == "sin":
            outer = Call("cos", node.arg)
        elif node.fn == "cos":
            outer = Neg(Call("sin", node.arg))
        elif node.fn == "exp":
            outer = Call("exp", node.arg)
        elif node.fn == "sqrt":
            return _sqrt_derivative(node, inner)
        else:
            raise ValueError(f"unknown function {node.fn}")
        return Mul(outer, inner)
    raise TypeError(f"unexpected node {node!r}")


@dataclass(frozen=True)
class _Recip:
    """Internal reciprocal node, produced only by sqrt differentiation."""

    arg: object


def _sqrt_derivative(node: Call, inner: Node) -> Node:
    return Mul(Mul(Const(Fraction(1, 2)), _Recip(Call("sqrt", node.arg))), inner)


_MATH_FNS = {"sin": math.sin, "cos": math.cos, "exp": math.exp, "sqrt": math.sqrt}


def eval_expr(node: Node, env: dict[str, object], exact: bool = False):
    """Evaluate; env maps variable names to numbers or numpy arrays."""
    if isinstance(node, Const):
        return node.value if exact else float(node.value)
    if isinstance(node, Var):
        try:
            return env[node.name]
        except KeyError:
            raise ValueError(f"unbound variable {node.name!r}") from None
    if isinstance(node, Add):
        return eval_expr(node.left, env, exact) + eval_expr(node.right, env, exact)
    if isinstance(node, Sub):
        return eval_expr(node.left, env, exact) - eval_expr(node.right, env, exact)
    if isinstance(node, Mul):
        return eval_expr(node.left, env, exact) * eval_expr(node.right, env, exact)
    if isinstance(node, Neg):
        return -eval_expr(node.arg, env, exact)
    if isinstance(node, Pow):
        return eval_expr(node.base, env, exact) ** node.exponent
    if isinstance(node, _Recip):
        return 1.0 / eval_expr(node.arg, env, exact)
    if isinstance(node, Call):
        arg = eval_expr(node.arg, env, exact)
        try:
            import numpy as np

            if isinstance(arg, np.ndarray):
                return getattr(np, node.fn)(arg)
        except ImportError:
            pass
        return _MATH_FNS[node.fn](float(arg))
    raise TypeError(f"unexpected node {node!r}")


def expr_to_polynomial(node: Node, k: int) -> Polynomial | None:
    """Exact polynomial in u1..uk, or None when transcendental calls appear."""
    if isinstance(node, Const):
        return Polynomial.const(k, node.value)
    if isinstance(node, Var):
        index = int(node.name[1:])
        return Polynomial.var(k, index - 1)
    if isinstance(node, Add):
        a, b = expr_to_polynomial(node.left, k), expr_to_polynomial(node.right, k)
        return None if a is None or b is None else a + b
    if isinstance(node, Sub):
        a, b = expr_to_polynomial(node.left, k), expr_to_polynomial(node.right, k)
        return None if a is None or b is None else a - b
    if isinstance(node, Mul):
        a, b = expr_to_polynomial(node.left, k), expr_to_polynomial(node.right, k)
        return None if a is None or b is None else a * b
    if isinstance(node, Neg):
        a = expr_to_polynomial(node.arg, k)
        return None if a is None else -a
    if isinstance(node, Pow):
        a = expr_to_polynomial(node.base, k)
        return None if a is None else a**node.exponent
    if isinstance(node, (Call, _Recip)):
        return None
    raise TypeError(f"unexpected node {node!r}")


def expr_from_polynomial(p: Polynomial) -> Node:
    """Build an AST (in u variables) from an exact polynomial."""
    terms = []
    for e, c in sorted(p.terms.items()):
        node: Node = Const(c)
        for i, power in enumerate(e):
            if power:
                factor = Pow(Var(f"u{i + 1}"), power) if power > 1 else Var(f"u{i + 1}")
                node = Mul(node, factor)
        terms.append(node)
    if not terms:
        return Const(Fraction(0))
    out = terms[0]
    for term in terms[1:]:
        out = Add(out, term)
    return out


def substitute(node: Node, mapping: dict[str, Node]) -> Node:
    """Replace variables by AST nodes (used for boundary face restriction)."""
    if isinstance(node, Const):
        return node
    if isinstance(node, Var):
        return mapping.get(node.name, node)
    if isinstance(node, Add):
        return Add(substitute(node.left, mapping), substitute(node.right, mapping))
    if isinstance(node, Sub):
        return Sub(substitute(node.left, mapping), substitute(node.right, mapping))
    if isinstance(node, Mul):
        return Mul(substitute(node.left, mapping), substitute(node.right, mapping))
    if isinstance(node, Neg):
        return Neg(substitute(node.arg, mapping))
    if isinstance(node, Pow):
        return Pow(substitute(node.base, mapping), node.exponent)
    if isinstance(node, Call):
        return Call(node.fn, substitute(node.arg, mapping))
    if isinstance(node, _Recip):
        return _Recip(substitute(node.arg, mapping))
    raise TypeError(f"unexpected node {node!r}")
