"""Minimal expression parser and forward-mode differentiation.

Grammar (EBNF), with '^' restricted to constant exponents:

    expr    = term { ("+" | "-") term } ;
    term    = unary { ("*" | "/") unary } ;
    unary   = "-" unary | power ;
    power   = atom [ "^" unary ] ;          (* exponent must be constant *)
    atom    = NUMBER | "x" | NAME "(" expr ")" | "(" expr ")" ;
    NAME    = "log" | "exp" | "sqrt" ;
    NUMBER  = digits [ "." digits ] [ ("e"|"E") ["+"|"-"] digits ] ;

There is no implicit multiplication and no hex literals.  Evaluation is
available in plain floats (eval_expr) and in dual numbers (eval_dual),
whose derivative component is exact by the chain rule.
"""

import math
from dataclasses import dataclass
from typing import Union

from .errors import DomainError, ParseError
from .functions import Interval, ScalarFn, SsaStatus, midpoint_concave

_MAX_DEPTH = 200
_FUNCTIONS = ("log", "exp", "sqrt")


@dataclass(frozen=True)
class Const:
    value: float


@dataclass(frozen=True)
class Var:
    pass


@dataclass(frozen=True)
class Call:
    fn: str
    arg: "Node"


@dataclass(frozen=True)
class Neg:
    arg: "Node"


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Node"
    right: "Node"


Node = Union[Const, Var, Call, Neg, BinOp]


def is_const(node: Node) -> bool:
    if isinstance(node, Const):
        return True
    if isinstance(node, Var):
        return False
    if isinstance(node, Neg):
        return is_const(node.arg)
    if isinstance(node, Call):
        return is_const(node.arg)
    return is_const(node.left) and is_const(node.right)


def to_text(node: Node) -> str:
    """Parenthesized textual form, re-parseable."""
    if isinstance(node, Const):
        return format(node.value, "g")
    if isinstance(node, Var):
        return "x"
    if isinstance(node, Neg):
        return f"(-{to_text(node.arg)})"
    if isinstance(node, Call):
        return f"{node.fn}({to_text(node.arg)})"
    return f"({to_text(node.left)}{node.op}{to_text(node.right)})"


_DIGITS = frozenset("0123456789")
_WORD = frozenset("abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ_")


class _Tokenizer:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def _skip_ws(self):
        while self.pos < len(self.text) and self.text[self.pos] in " \t\r\n":
            self.pos += 1

    def next(self):
        """(kind, value, position); kind in num/name/op/lparen/rparen/end."""
        self._skip_ws()
        start = self.pos
        if self.pos >= len(self.text):
            return ("end", "", start)
        ch = self.text[self.pos]
        if ch in _DIGITS:
            j = self.pos
            while j < len(self.text) and self.text[j] in _DIGITS:
                j += 1
            if j < len(self.text) and self.text[j] == ".":
                j += 1
                while j < len(self.text) and self.text[j] in _DIGITS:
                    j += 1
            if j < len(self.text) and self.text[j] in "eE":
                k = j + 1
                if k < len(self.text) and self.text[k] in "+-":
                    k += 1
                if k < len(self.text) and self.text[k] in _DIGITS:
                    j = k
                    while j < len(self.text) and self.text[j] in _DIGITS:
                        j += 1
                else:
                    raise ParseError(f"malformed exponent at position {j}", position=j)
            tok = self.text[start:j]
            self.pos = j
            return ("num", tok, start)
        if ch in _WORD:
            j = self.pos
            while j < len(self.text) and (self.text[j] in _WORD or self.text[j] in _DIGITS):
                j += 1
            tok = self.text[start:j]
            self.pos = j
            return ("name", tok, start)
        if ch in "+-*/^":
            self.pos += 1
            return ("op", ch, start)
        if ch == "(":
            self.pos += 1
            return ("lparen", ch, start)
        if ch == ")":
            self.pos += 1
            return ("rparen", ch, start)
        raise ParseError(f"unexpected character {ch!r} at position {start}", position=start)


class _Parser:
    def __init__(self, text: str):
        self._tz = _Tokenizer(text)
        self._tok = self._tz.next()
        self._depth = 0

    def _advance(self):
        self._tok = self._tz.next()

    def _expect(self, kind, what):
        if self._tok[0] != kind:
            raise ParseError(
                f"expected {what} at position {self._tok[2]}, got {self._tok[1]!r}",
                position=self._tok[2],
            )
        tok = self._tok
        self._advance()
        return tok

    def parse(self) -> Node:
        node = self._expr()
        if self._tok[0] != "end":
            raise ParseError(
                f"unexpected trailing input at position {self._tok[2]}: {self._tok[1]!r}",
                position=self._tok[2],
            )
        return node

    def _enter(self):
        self._depth += 1
        if self._depth > _MAX_DEPTH:
            raise ParseError("expression too deeply nested", position=self._tok[2])

    def _leave(self):
        self._depth -= 1

    def _expr(self) -> Node:
        self._enter()
        node = self._term()
        while self._tok[0] == "op" and self._tok[1] in "+-":
            op = self._tok[1]
            self._advance()
            node = BinOp(op, node, self._term())
        self._leave()
        return node

    def _term(self) -> Node:
        self._enter()
        node = self._unary()
        while self._tok[0] == "op" and self._tok[1] in "*/":
            op = self._tok[1]
            self._advance()
            node = BinOp(op, node, self._unary())
        self._leave()
        return node

    def _unary(self) -> Node:
        self._enter()
        if self._tok[0] == "op" and self._tok[1] == "-":
            self._advance()
            node = Neg(self._unary())
        else:
            node = self._power()
        self._leave()
        return node

    def _power(self) -> Node:
        self._enter()
        base = self._atom()
        if self._tok[0] == "op" and self._tok[1] == "^":
            pos = self._tok[2]
            self._advance()
            exponent = self._unary()
            if not is_const(exponent):
                raise ParseError(
                    f"exponent at position {pos} must be a constant expression",
                    position=pos,
                )
            try:
                c = eval_expr(exponent, 0.0)
            except DomainError as exc:
                raise ParseError(
                    f"exponent at position {pos} is not evaluable: {exc}",
                    position=pos,
                )
            base = BinOp("^", base, Const(c))
        self._leave()
        return base

    def _atom(self) -> Node:
        self._enter()
        kind, value, pos = self._tok
        if kind == "num":
            self._advance()
            node = Const(float(value))
        elif kind == "name":
            if value == "x":
                self._advance()
                node = Var()
            elif value in _FUNCTIONS:
                self._advance()
                self._expect("lparen", "'('")
                arg = self._expr()
                self._expect("rparen", "')'")
                node = Call(value, arg)
            else:
                raise ParseError(
                    f"unknown name {value!r} at position {pos} "
                    f"(expected x, {', '.join(_FUNCTIONS)})",
                    position=pos,
                )
        elif kind == "lparen":
            self._advance()
            node = self._expr()
            self._expect("rparen", "')'")
        else:
            raise ParseError(
                f"expected number, 'x', '(' or a function name at position {pos}, "
                f"got {value!r}",
                position=pos,
            )
        self._leave()
        return node


def parse_expr(text: str) -> Node:
    return _Parser(text).parse()


@dataclass(frozen=True)
class DualNumber:
    """value + deriv * epsilon with epsilon^2 = 0."""

    value: float
    deriv: float

    def __add__(self, o):
        return DualNumber(self.value + o.value, self.deriv + o.deriv)

    def __sub__(self, o):
        return DualNumber(self.value - o.value, self.deriv - o.deriv)

    def __mul__(self, o):
        return DualNumber(self.value * o.value,
                          self.value * o.deriv + self.deriv * o.value)

    def __truediv__(self, o):
        return DualNumber(self.value / o.value,
                          (self.deriv * o.value - self.value * o.deriv) / (o.value * o.value))

    def __neg__(self):
        return DualNumber(-self.value, -self.deriv)


def _pow_value(base: float, c: float, where: Node) -> float:
    if base == 0.0 and c < 0.0:
        raise DomainError(f"zero base with negative exponent in '{to_text(where)}'",
                          offending=base)
    if base < 0.0 and c != round(c):
        raise DomainError(
            f"negative base {base!r} with non-integer exponent in '{to_text(where)}'",
            offending=base,
        )
    return math.pow(base, c)


def eval_expr(node: Node, x: float) -> float:
    """Evaluate at x; DomainError identifies the failing subexpression."""
    if isinstance(node, Const):
        return node.value
    if isinstance(node, Var):
        return x
    if isinstance(node, Neg):
        return -eval_expr(node.arg, x)
    if isinstance(node, Call):
        v = eval_expr(node.arg, x)
        if node.fn == "log":
            if v <= 0.0:
                raise DomainError(f"log of non-positive value {v!r} in '{to_text(node)}'",
                                  offending=v)
            return math.log(v)
        if node.fn == "exp":
            return math.exp(v)
        if v < 0.0:
            raise DomainError(f"sqrt of negative value {v!r} in '{to_text(node)}'",
                              offending=v)
        return math.sqrt(v)
    left = eval_expr(node.left, x)
    if node.op == "^":
        return _pow_value(left, node.right.value, node)
    right = eval_expr(node.right, x)
    if node.op == "+":
        return left + right
    if node.op == "-":
        return left - right
    if node.op == "*":
        return left * right
    if right == 0.0:
        raise DomainError(f"division by zero in '{to_text(node)}'", offending=right)
    return left / right


def eval_dual(node: Node, x: float) -> DualNumber:
    """Evaluate with the derivative carried along; deriv is exact."""
    if isinstance(node, Const):
        return DualNumber(node.value, 0.0)
    if isinstance(node, Var):
        return DualNumber(x, 1.0)
    if isinstance(node, Neg):
        return -eval_dual(node.arg, x)
    if isinstance(node, Call):
        d = eval_dual(node.arg, x)
        if node.fn == "log":
            if d.value <= 0.0:
                raise DomainError(f"log of non-positive value {d.value!r} in "
                                  f"'{to_text(node)}'", offending=d.value)
            return DualNumber(math.log(d.value), d.deriv / d.value)
        if node.fn == "exp":
            e = math.exp(d.value)
            return DualNumber(e, e * d.deriv)
        if d.value < 0.0:
            raise DomainError(f"sqrt of negative value {d.value!r} in '{to_text(node)}'",
                              offending=d.value)
        if d.value == 0.0 and d.deriv != 0.0:
            raise DomainError(f"sqrt not differentiable at 0 in '{to_text(node)}'",
                              offending=d.value)
        s = math.sqrt(d.value)
        return DualNumber(s, 0.5 * d.deriv / s if d.deriv else 0.0)
    left = eval_dual(node.left, x)
    if node.op == "^":
        c = node.right.value
        v = _pow_value(left.value, c, node)
        if left.deriv == 0.0:
            return DualNumber(v, 0.0)
        if left.value == 0.0 and c < 1.0:
            raise DomainError(f"power not differentiable at 0 in '{to_text(node)}'",
                              offending=left.value)
        return DualNumber(v, c * _pow_value(left.value, c - 1.0, node) * left.deriv)
    right = eval_dual(node.right, x)
    if node.op == "+":
        return left + right
    if node.op == "-":
        return left - right
    if node.op == "*":
        return left * right
    if right.value == 0.0:
        raise DomainError(f"division by zero in '{to_text(node)}'", offending=0.0)
    return left / right


def parse_domain(text: str) -> Interval:
    """Domain strings of the form '(0,inf)' or '[0,inf)'."""
    s = text.strip().replace(" ", "")
    if not s or s[0] not in "([" or not s.endswith(")"):
        raise ParseError(f"domain must look like '(0,inf)' or '[0,inf)', got {text!r}")
    body = s[1:-1]
    lo_txt, sep, hi_txt = body.partition(",")
    if not sep or hi_txt.lower() not in ("inf", "+inf"):
        raise ParseError(f"domain upper end must be inf, got {text!r}")
    try:
        lo = float(lo_txt)
    except ValueError:
        raise ParseError(f"bad domain lower end {lo_txt!r} in {text!r}")
    if lo < 0.0:
        raise ParseError(f"domain lower end must be >= 0, got {text!r}")
    return Interval(lo, s[0] == "[")


_PROBE_POINTS = 50


def to_scalar_fn(node: Node, domain) -> ScalarFn:
    """Wrap a parsed expression as a ScalarFn on the declared domain.

    The expression is probed at 50 interior points (plus the boundary for a
    closed domain); failures are reported together.  Concavity is probed
    numerically by midpoint sampling; ssa_status is UNKNOWN.
    """
    if isinstance(domain, str):
        domain = parse_domain(domain)
    lo = max(domain.lo, 1e-3)
    probes = [lo * (1e6 ** (i / (_PROBE_POINTS - 1))) for i in range(_PROBE_POINTS)]
    if domain.lo_closed:
        probes.insert(0, domain.lo)
    bad = []
    for pt in probes:
        try:
            v = eval_expr(node, pt)
            if not math.isfinite(v):
                bad.append(pt)
        except DomainError:
            bad.append(pt)
    if bad:
        shown = ", ".join(format(b, "g") for b in bad[:5])
        raise DomainError(
            f"expression '{to_text(node)}' fails on its declared domain "
            f"{domain.label()} at probe points [{shown}{', ...' if len(bad) > 5 else ''}]"
        )

    def value(x):
        if not domain.contains(x):
            raise DomainError(f"{x!r} outside declared domain {domain.label()}", offending=x)
        return eval_expr(node, x)

    def derivative(x):
        return eval_dual(node, x).deriv

    finite0 = domain.lo_closed and domain.lo == 0.0 and math.isfinite(eval_expr(node, 0.0))
    concave = midpoint_concave(lambda x: eval_expr(node, x), lo, 1e3)
    return ScalarFn(
        name=to_text(node),
        domain=domain,
        value=value,
        derivative=derivative,
        concave=concave,
        finite_at_zero=finite0,
        ssa_status=SsaStatus.UNKNOWN,
        params={},
    )
