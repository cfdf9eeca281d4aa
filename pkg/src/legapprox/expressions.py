"""A small arithmetic expression language compiled to sympy.

Grammar: numbers (including complex literals such as ``2j``), the
constants ``pi`` and ``I``, variables ``z, w, y, zeta3 .. zeta{2n}``, the
operators ``+ - * /`` and ``**`` with integer exponent, and the functions
``exp, sin, cos, conj, pow(., int)``.

``conj`` is pushed down to the leaves while building the expression, so a
conjugated variable becomes its own symbol (``zbar``, ``wbar``, ...).  Base
dependence on ``zbar`` is allowed; fiber conjugates make a form non
holomorphic and are rejected later.
"""

from __future__ import annotations

import ast

import sympy as sp

from .errors import ExpressionError

z, zbar = sp.symbols("z zbar")
w, y = sp.symbols("w y")

_FUNCS = {"exp": sp.exp, "sin": sp.sin, "cos": sp.cos}


def fiber_symbols(n: int) -> list:
    """Fiber coordinates ``w, y, zeta3, ..., zeta{2n}``."""
    return [w, y] + [sp.Symbol(f"zeta{k}") for k in range(3, 2 * n + 1)]


def fiber_names(n: int) -> list:
    return [s.name for s in fiber_symbols(n)]


def bar(sym: sp.Symbol) -> sp.Symbol:
    return sp.Symbol(sym.name + "bar")


def _variables(n):
    names = {"z": z}
    for s in fiber_symbols(n):
        names[s.name] = s
    return names


class _Builder:
    def __init__(self, n):
        self.vars = _variables(n)

    def build(self, node, conj=False):
        m = getattr(self, "_" + type(node).__name__, None)
        if m is None:
            raise ExpressionError(f"unsupported syntax: {type(node).__name__}")
        return m(node, conj)

    def _Expression(self, node, conj):
        return self.build(node.body, conj)

    def _Constant(self, node, conj):
        v = node.value
        if isinstance(v, bool) or not isinstance(v, (int, float, complex)):
            raise ExpressionError(f"unsupported literal {v!r}")
        if isinstance(v, complex):
            return sp.sympify(v.conjugate() if conj else v)
        return sp.Integer(v) if isinstance(v, int) else sp.Float(v)

    def _Name(self, node, conj):
        if node.id == "pi":
            return sp.pi
        if node.id == "I":
            return -sp.I if conj else sp.I
        if node.id not in self.vars:
            raise ExpressionError(f"unknown variable {node.id!r}")
        s = self.vars[node.id]
        return bar(s) if conj else s

    def _UnaryOp(self, node, conj):
        v = self.build(node.operand, conj)
        if isinstance(node.op, ast.USub):
            return -v
        if isinstance(node.op, ast.UAdd):
            return v
        raise ExpressionError("unsupported unary operator")

    def _int_exponent(self, node):
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, ast.USub):
            return -self._int_exponent(node.operand)
        if isinstance(node, ast.Constant) and isinstance(node.value, int) and not isinstance(node.value, bool):
            return node.value
        raise ExpressionError("exponents must be integer literals")

    def _BinOp(self, node, conj):
        if isinstance(node.op, ast.Pow):
            return self.build(node.left, conj) ** self._int_exponent(node.right)
        a, b = self.build(node.left, conj), self.build(node.right, conj)
        op = type(node.op)
        if op is ast.Add:
            return a + b
        if op is ast.Sub:
            return a - b
        if op is ast.Mult:
            return a * b
        if op is ast.Div:
            return a / b
        raise ExpressionError(f"unsupported operator {op.__name__}")

    def _Call(self, node, conj):
        if not isinstance(node.func, ast.Name) or node.keywords:
            raise ExpressionError("unsupported call")
        name = node.func.id
        if name == "conj":
            if len(node.args) != 1:
                raise ExpressionError("conj takes one argument")
            return self.build(node.args[0], not conj)
        if name == "pow":
            if len(node.args) != 2:
                raise ExpressionError("pow takes two arguments")
            return self.build(node.args[0], conj) ** self._int_exponent(node.args[1])
        if name in _FUNCS:
            if len(node.args) != 1:
                raise ExpressionError(f"{name} takes one argument")
            return _FUNCS[name](self.build(node.args[0], conj))
        raise ExpressionError(f"unknown function {name!r}")


def parse(text: str, n: int = 1) -> sp.Expr:
    """Parse ``text`` into a sympy expression over the tube coordinates of half-dimension ``n``."""
    if not isinstance(text, str):
        if isinstance(text, (int, float, complex)):
            text = repr(text)
        else:
            raise ExpressionError(f"expected a string expression, got {type(text).__name__}")
    try:
        tree = ast.parse(text.strip(), mode="eval")
    except SyntaxError as exc:
        raise ExpressionError(f"cannot parse {text!r}: {exc.msg}") from None
    return sp.sympify(_Builder(n).build(tree))


def to_text(expr: sp.Expr) -> str:
    """Render an expression back into the input language."""
    reps = {}
    for s in expr.free_symbols:
        if s.name.endswith("bar"):
            reps[s] = sp.Function("conj")(sp.Symbol(s.name[:-3]))
    return sp.sstr(expr.xreplace(reps))
