"""Restricted function expressions in ``z`` for the ``--f`` options.

Grammar: numbers, ``z``, ``I`` or ``j``, ``+ - * /``, integer powers
(``**`` or ``^``), parentheses and ``exp(...)``. A number directly followed
by ``z``, ``I``, ``j`` or a parenthesis multiplies it (``2z``, ``3j``).
"""

import logging
import re
from dataclasses import dataclass, field
from tokenize import TokenError
from typing import Callable, List, Union

import numpy as np
import sympy as sp
from sympy.parsing.sympy_parser import parse_expr, standard_transformations

from .errors import ExpressionError
from .geometry import ComplexArray

logger = logging.getLogger(__name__)

_TOKEN = re.compile(
    r"\s*(?:"
    r"(?P<number>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<name>[A-Za-z_]\w*)"
    r"|(?P<op>\*\*|[-+*/^()])"
    r")"
)
_NAMES = {"z": "z", "I": "I", "j": "I", "exp": "exp"}

Z = sp.Symbol("z")


def _translate(text: str) -> str:
    pieces: List[str] = []
    previous = ""
    position = 0
    text = text.rstrip()
    while position < len(text):
        match = _TOKEN.match(text, position)
        if match is None or match.end() == position:
            raise ExpressionError(f"unexpected character {text[position:].strip()[:1]!r} at {position}")
        position = match.end()
        kind = match.lastgroup
        token = match.group(kind or "op")
        if kind == "name":
            if token not in _NAMES:
                raise ExpressionError(f"unknown name {token!r}; allowed: z, I, j, exp")
            token = _NAMES[token]
        elif kind == "op" and token == "^":
            token = "**"
        if previous == "number" and (kind == "name" or token == "("):
            pieces.append("*")
        pieces.append(token)
        previous = kind or ""
    if not pieces:
        raise ExpressionError("empty expression")
    return " ".join(pieces)


def _check_tree(expr: sp.Expr) -> None:
    for node in sp.preorder_traversal(expr):
        if node is sp.I or isinstance(node, (sp.Number, sp.NumberSymbol, sp.Add, sp.Mul, sp.exp)):
            continue
        if isinstance(node, sp.Symbol) and node == Z:
            continue
        if isinstance(node, sp.Pow) and isinstance(node.exp, sp.Integer):
            continue
        raise ExpressionError(f"unsupported construct {sp.srepr(node)[:40]}")
    if expr.has(sp.zoo, sp.nan, sp.oo, -sp.oo):
        raise ExpressionError("expression is not finite")


@dataclass(frozen=True, eq=False)
class FunctionExpression:
    """A parsed expression with a numpy evaluator."""

    source: str
    expr: sp.Expr
    _fn: Callable[..., object] = field(repr=False)

    def __call__(self, z: Union[complex, ComplexArray]) -> ComplexArray:
        points = np.asarray(z, dtype=np.complex128)
        with np.errstate(divide="ignore", invalid="ignore"):
            values = np.asarray(self._fn(points), dtype=np.complex128)
        return np.broadcast_to(values, points.shape).copy()

    @property
    def singularities(self) -> ComplexArray:
        """Zeros of the polynomial factors of the denominator."""
        _, denominator = sp.fraction(sp.together(self.expr))
        roots: List[complex] = []
        try:
            factors = sp.factor_list(denominator)[1]
        except sp.PolynomialError:
            factors = []
        for factor, _power in factors:
            if not factor.has(Z) or factor.has(sp.exp):
                continue
            coeffs = [complex(c) for c in sp.Poly(factor, Z).all_coeffs()]
            roots.extend(complex(r) for r in np.roots(coeffs))
        return np.asarray(roots, dtype=np.complex128)


def parse_function(text: str) -> FunctionExpression:
    """Parse ``text`` into a function of ``z``.

    Raises:
        ExpressionError: The text falls outside the grammar.
    """
    source = _translate(text)
    try:
        expr = parse_expr(
            source,
            local_dict={"z": Z, "I": sp.I, "exp": sp.exp},
            global_dict={"Integer": sp.Integer, "Float": sp.Float, "Rational": sp.Rational},
            transformations=standard_transformations,
        )
    except (SyntaxError, TypeError, TokenError, ZeroDivisionError) as exc:
        raise ExpressionError(f"cannot parse {text!r}: {exc}") from exc
    expr = sp.sympify(expr)
    _check_tree(expr)
    logger.debug("Parsed %r as %s", text, expr)
    return FunctionExpression(text, expr, sp.lambdify(Z, expr, modules="numpy"))
