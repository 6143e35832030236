"""Concrete syntax, AST and well-formedness checks for LRec programs.

Grammar (whitespace-insensitive)::

    program := "def" ident "(" "n" ";" int ")" "=" "{" comm "}"
    comm    := "sample" ident "<-" dist "in" "{" body "}"
             | "with" "{" (prob ":" "{" comm "}" ";")+ "}"
    body    := "pre" "(" expr ")" ";" "invoke" call ";"
    call    := "p(" sexpr ")" | "p(" sexpr ")" ";" "p(" sexpr ")"
    dist    := "uniform(n)" | "muniform(n)"
             | "discrete{" (prob ":" expr ",")+ "}"
             | "puniform{" (expr ".." expr ":" prob ",")+ "}"

Inside a ``with`` arm a bare body whose single call does not mention the
sample variable (``pre(1); invoke p(n-1);``) is accepted as shorthand for
``sample v <- discrete{1: n-1,} in { pre(1); invoke p(v); }``.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Union

from .errors import LRecSyntaxError, MultipleProcedures, UnboundVariable
from .sympoly import PseudoPoly, substitute

# ---------------------------------------------------------------------------
# expressions


@dataclass(frozen=True)
class Num:
    value: Fraction


@dataclass(frozen=True)
class EConst:
    pass


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Ln:
    arg: "Expr"


@dataclass(frozen=True)
class BinOp:
    op: str  # + - * /
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Neg:
    arg: "Expr"


@dataclass(frozen=True)
class Pow:
    base: "Expr"
    exp: int


@dataclass(frozen=True)
class Floor:
    arg: "Expr"
    div: int


@dataclass(frozen=True)
class Ceil:
    arg: "Expr"
    div: int


Expr = Union[Num, EConst, Var, Ln, BinOp, Neg, Pow, Floor, Ceil]


def free_vars(e: Expr) -> set[str]:
    if isinstance(e, Var):
        return {e.name}
    if isinstance(e, (Num, EConst)):
        return set()
    if isinstance(e, BinOp):
        return free_vars(e.left) | free_vars(e.right)
    if isinstance(e, (Ln, Neg, Floor, Ceil)):
        return free_vars(e.arg)
    if isinstance(e, Pow):
        return free_vars(e.base)
    raise TypeError(e)


def has_rounding(e: Expr) -> bool:
    if isinstance(e, (Floor, Ceil)):
        return True
    if isinstance(e, BinOp):
        return has_rounding(e.left) or has_rounding(e.right)
    if isinstance(e, (Ln, Neg)):
        return has_rounding(e.arg)
    if isinstance(e, Pow):
        return has_rounding(e.base)
    return False


def _snap(x: float) -> float:
    r = round(x)
    return float(r) if abs(x - r) < 1e-9 else x


def eval_expr(e: Expr, env: dict) -> float:
    if isinstance(e, Num):
        return float(e.value)
    if isinstance(e, EConst):
        return math.e
    if isinstance(e, Var):
        try:
            return float(env[e.name])
        except KeyError:
            raise UnboundVariable(e.name) from None
    if isinstance(e, BinOp):
        a, b = eval_expr(e.left, env), eval_expr(e.right, env)
        if e.op == "+":
            return a + b
        if e.op == "-":
            return a - b
        if e.op == "*":
            return a * b
        return a / b
    if isinstance(e, Neg):
        return -eval_expr(e.arg, env)
    if isinstance(e, Ln):
        x = eval_expr(e.arg, env)
        return math.log(x) if x > 0 else -math.inf
    if isinstance(e, Pow):
        return eval_expr(e.base, env) ** e.exp
    if isinstance(e, Floor):
        return float(math.floor(_snap(eval_expr(e.arg, env)) / e.div + 1e-12))
    if isinstance(e, Ceil):
        return float(math.ceil(_snap(eval_expr(e.arg, env)) / e.div - 1e-12))
    raise TypeError(e)


def const_value(e: Expr) -> float:
    return eval_expr(e, {})


def exact_const(e: Expr):
    """Exact Fraction value of a constant expression, or None if it uses e."""
    if isinstance(e, Num):
        return e.value
    if isinstance(e, BinOp):
        a, b = exact_const(e.left), exact_const(e.right)
        if a is None or b is None:
            return None
        return {"+": a + b, "-": a - b, "*": a * b, "/": a / b if b else None}[e.op]
    if isinstance(e, Neg):
        a = exact_const(e.arg)
        return None if a is None else -a
    if isinstance(e, Pow):
        a = exact_const(e.base)
        return None if a is None or (a == 0 and e.exp < 0) else a ** e.exp
    return None


_SYM_FOR = {"n": "n", "alpha": "alpha"}


def expr_to_poly(e: Expr, rename: dict | None = None, rounding: str = "error", sign: int = 1) -> PseudoPoly:
    """Convert an expression to a pseudo-polynomial.

    ``rename`` maps program variable names onto the algebra symbols
    (default: n -> n and the sample variable -> v).  Floors and ceilings
    are either rejected (``rounding="error"``) or over-approximated in the
    direction given by ``sign`` (``rounding="upper"``): floor(x/b) <= x/b and
    ceil(x/b) <= x/b + (b-1)/b when the rounding occurs with positive
    polarity, and the matching lower bounds otherwise.
    """
    rename = rename or {"n": "n"}
    if isinstance(e, Num):
        return PseudoPoly.const(float(e.value))
    if isinstance(e, EConst):
        return PseudoPoly.const(math.e)
    if isinstance(e, Var):
        if e.name not in rename:
            raise UnboundVariable(e.name)
        return PseudoPoly.symbol(rename[e.name])
    if isinstance(e, BinOp):
        if e.op == "+":
            return expr_to_poly(e.left, rename, rounding, sign) + expr_to_poly(e.right, rename, rounding, sign)
        if e.op == "-":
            return expr_to_poly(e.left, rename, rounding, sign) - expr_to_poly(e.right, rename, rounding, -sign)
        if e.op == "*":
            lr, rr = has_rounding(e.left), has_rounding(e.right)
            if lr or rr:
                other = e.right if lr else e.left
                if free_vars(other) or has_rounding(other):
                    raise ValueError("rounding multiplied by a non-constant")
                k = const_value(other)
                inner = e.left if lr else e.right
                return expr_to_poly(inner, rename, rounding, sign if k >= 0 else -sign) * k
            return expr_to_poly(e.left, rename, rounding, sign) * expr_to_poly(e.right, rename, rounding, sign)
        if e.op == "/":
            if has_rounding(e.right):
                raise ValueError("rounding in a denominator")
            den = expr_to_poly(e.right, rename)
            k = den.const_value() if den.is_const() else None
            flip = sign if (k is None or k > 0) else -sign
            return expr_to_poly(e.left, rename, rounding, flip) / den
    if isinstance(e, Neg):
        return -expr_to_poly(e.arg, rename, rounding, -sign)
    if isinstance(e, Pow):
        if has_rounding(e.base):
            raise ValueError("rounding under a power")
        return expr_to_poly(e.base, rename) ** e.exp
    if isinstance(e, Ln):
        if has_rounding(e.arg):
            raise ValueError("rounding under ln")
        inner = expr_to_poly(e.arg, rename)
        # ln of a monomial expands into ln factors
        x = PseudoPoly.symbol("v", 0, 1)
        return substitute(x, "v", inner)
    if isinstance(e, (Floor, Ceil)):
        if rounding == "error":
            raise ValueError("floor/ceil need the rounding over-approximation")
        base = expr_to_poly(e.arg, rename, rounding, sign) / e.div
        slack = (e.div - 1) / e.div
        if isinstance(e, Floor):
            return base if sign > 0 else base - slack
        return base + slack if sign > 0 else base
    raise TypeError(e)


_PREC = {"+": 1, "-": 1, "*": 2, "/": 2}


def expr_text(e: Expr, prec: int = 0) -> str:
    if isinstance(e, Num):
        v = e.value
        if v.denominator == 1:
            s = str(v.numerator)
            return f"({s})" if v < 0 and prec > 0 else s
        s = f"{v.numerator}/{v.denominator}"
        return f"({s})" if prec > 0 else s
    if isinstance(e, EConst):
        return "e"
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Ln):
        return f"ln({expr_text(e.arg)})"
    if isinstance(e, Floor):
        return f"floor({expr_text(e.arg)}/{e.div})"
    if isinstance(e, Ceil):
        return f"ceil({expr_text(e.arg)}/{e.div})"
    if isinstance(e, Neg):
        s = "-" + expr_text(e.arg, 3)
        return f"({s})" if prec > 0 else s
    if isinstance(e, Pow):
        return f"{expr_text(e.base, 4)}^{e.exp}" if e.exp >= 0 else f"{expr_text(e.base, 4)}^({e.exp})"
    if isinstance(e, BinOp):
        p = _PREC[e.op]
        left = expr_text(e.left, p)
        right = expr_text(e.right, p + 1)
        s = f"{left} {e.op} {right}" if p == 1 else f"{left}{e.op}{right}"
        return f"({s})" if p < prec else s
    raise TypeError(e)


# ---------------------------------------------------------------------------
# program AST


@dataclass(frozen=True)
class SizeBase:
    kind: str  # "floor" or "ceil"
    b: int
    c: int

    def value(self, n: int) -> int:
        q = n // self.b if self.kind == "floor" else -((-n) // self.b)
        return q + self.c

    def text(self) -> str:
        if self.b == 1:
            head = "n"
        else:
            head = f"{self.kind}(n/{self.b})"
        if self.c > 0:
            return f"{head}+{self.c}"
        if self.c < 0:
            return f"{head}-{-self.c}"
        return head


@dataclass(frozen=True)
class RecBody:
    pre_cost: Expr
    calls: str  # "v", "size-v" or "dnc"
    size_base: SizeBase | None = None


@dataclass(frozen=True)
class Uniform:
    pass


@dataclass(frozen=True)
class MUniform:
    pass


@dataclass(frozen=True)
class Discrete:
    arms: tuple  # of (prob Expr, value Expr)


@dataclass(frozen=True)
class PiecewiseUniform:
    pieces: tuple  # of (lo Expr, hi Expr, weight Expr)


Dist = Union[Uniform, MUniform, Discrete, PiecewiseUniform]


@dataclass(frozen=True)
class Sample:
    var: str
    dist: Dist
    body: RecBody


@dataclass(frozen=True)
class Choice:
    arms: tuple  # of (prob Expr, Command)


Command = Union[Sample, Choice]


@dataclass(frozen=True)
class PrrAst:
    proc_name: str
    c_p: int
    body: Command


# ---------------------------------------------------------------------------
# lexer

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+|\#[^\n]*)
  | (?P<num>\d+\.\d+|\d+)
  | (?P<ident>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op><-|\.\.|[(){};:,+\-*/^=\[\]])
    """,
    re.VERBOSE,
)


@dataclass
class Tok:
    kind: str
    text: str
    line: int
    col: int


def tokenize(src: str) -> list[Tok]:
    toks = []
    pos = 0
    line, line_start = 1, 0
    while pos < len(src):
        m = _TOKEN_RE.match(src, pos)
        if not m:
            raise LRecSyntaxError(line, pos - line_start + 1, "a token", src[pos])
        kind = m.lastgroup
        text = m.group()
        if kind != "ws":
            toks.append(Tok(kind, text, line, pos - line_start + 1))
        nl = text.count("\n")
        if nl:
            line += nl
            line_start = pos + text.rfind("\n") + 1
        pos = m.end()
    toks.append(Tok("eof", "", line, pos - line_start + 1))
    return toks


# ---------------------------------------------------------------------------
# parser


class _Parser:
    def __init__(self, src: str):
        self.toks = tokenize(src)
        self.i = 0
        self.bound: list[str] = []

    # token helpers
    @property
    def tok(self) -> Tok:
        return self.toks[self.i]

    def fail(self, expected: str):
        t = self.tok
        raise LRecSyntaxError(t.line, t.col, expected, t.text or "end of input")

    def at(self, text: str) -> bool:
        return self.tok.text == text and self.tok.kind in ("op", "ident")

    def eat(self, text: str) -> Tok:
        if not self.at(text):
            self.fail(repr(text))
        t = self.tok
        self.i += 1
        return t

    def accept(self, text: str) -> bool:
        if self.at(text):
            self.i += 1
            return True
        return False

    def ident(self) -> str:
        if self.tok.kind != "ident":
            self.fail("an identifier")
        t = self.tok.text
        self.i += 1
        return t

    def integer(self) -> int:
        neg = self.accept("-")
        if self.tok.kind != "num" or "." in self.tok.text:
            self.fail("an integer")
        v = int(self.tok.text)
        self.i += 1
        return -v if neg else v

    # program
    def program(self) -> PrrAst:
        self.eat("def")
        name = self.ident()
        self.eat("(")
        if self.ident() != "n":
            self.i -= 1
            self.fail("'n'")
        self.eat(";")
        c_p = self.integer()
        if c_p <= 0:
            self.i -= 1
            self.fail("a positive threshold")
        self.eat(")")
        self.eat("=")
        self.eat("{")
        self.proc = name
        body = self.comm()
        self.eat("}")
        if self.at("def"):
            t = self.tok
            raise MultipleProcedures(f"line {t.line}: only one procedure per program")
        if self.tok.kind != "eof":
            self.fail("end of input")
        return PrrAst(name, c_p, body)

    def comm(self) -> Command:
        if self.accept("sample"):
            var = self.ident()
            if var == "n":
                self.i -= 1
                self.fail("a sample variable other than n")
            self.eat("<-")
            dist = self.dist()
            self.eat("in")
            self.eat("{")
            self.bound.append(var)
            body = self.body(var)
            self.bound.pop()
            self.eat("}")
            return Sample(var, dist, body)
        if self.accept("with"):
            self.eat("{")
            arms = []
            while True:
                prob = self.expr()
                self._const_only(prob)
                self.eat(":")
                self.eat("{")
                if self.at("pre"):
                    cmd = self.bare_body()
                else:
                    cmd = self.comm()
                self.eat("}")
                self.eat(";")
                arms.append((prob, cmd))
                if self.at("}"):
                    break
            self.eat("}")
            return Choice(tuple(arms))
        self.fail("'sample' or 'with'")

    def _const_only(self, e: Expr):
        fv = free_vars(e)
        if fv:
            raise UnboundVariable(f"probability mentions {sorted(fv)}")

    def dist(self) -> Dist:
        name = self.ident()
        if name in ("uniform", "muniform"):
            self.eat("(")
            if self.ident() != "n":
                self.i -= 1
                self.fail("'n'")
            self.eat(")")
            return Uniform() if name == "uniform" else MUniform()
        if name == "discrete":
            self.eat("{")
            arms = []
            while not self.at("}"):
                prob = self.expr()
                self._const_only(prob)
                self.eat(":")
                val = self.expr()
                self._check_vars(val, allow_v=False)
                arms.append((prob, val))
                if not self.accept(","):
                    break
            self.eat("}")
            if not arms:
                self.fail("at least one discrete arm")
            return Discrete(tuple(arms))
        if name == "puniform":
            self.eat("{")
            pieces = []
            while not self.at("}"):
                lo = self.expr()
                self.eat("..")
                hi = self.expr()
                self._check_vars(lo, allow_v=False)
                self._check_vars(hi, allow_v=False)
                self.eat(":")
                w = self.expr()
                self._const_only(w)
                pieces.append((lo, hi, w))
                if not self.accept(","):
                    break
            self.eat("}")
            if not pieces:
                self.fail("at least one piece")
            return PiecewiseUniform(tuple(pieces))
        self.i -= 1
        self.fail("a distribution (uniform, muniform, discrete, puniform)")

    def _check_vars(self, e: Expr, allow_v=True):
        ok = {"n"} | (set(self.bound) if allow_v else set())
        bad = free_vars(e) - ok
        if bad:
            raise UnboundVariable(f"unbound variable(s) {sorted(bad)}")

    def body(self, var: str) -> RecBody:
        self.eat("pre")
        self.eat("(")
        pre = self.expr()
        self._check_vars(pre)
        self.eat(")")
        self.eat(";")
        self.eat("invoke")
        first = self.call(var)
        self.eat(";")
        if self.at(self.proc):
            second = self.call(var)
            self.eat(";")
            if first[0] != "v" or second[0] != "size-v":
                raise LRecSyntaxError(self.tok.line, self.tok.col, "divide-and-conquer form p(v); p(size-v)")
            return RecBody(pre, "dnc", second[1])
        return RecBody(pre, first[0], first[1])

    def bare_body(self) -> Sample:
        self.eat("pre")
        self.eat("(")
        pre = self.expr()
        self._check_vars(pre, allow_v=False)
        self.eat(")")
        self.eat(";")
        self.eat("invoke")
        self.eat(self.proc)
        self.eat("(")
        size = self.expr()
        self._check_vars(size, allow_v=False)
        self.eat(")")
        self.eat(";")
        if self.at(self.proc):
            self.fail("a sample block for two recursive calls")
        return Sample("v", Discrete(((Num(Fraction(1)), size),)), RecBody(pre, "v", None))

    def call(self, var: str):
        self.eat(self.proc)
        self.eat("(")
        e = self.expr()
        self.eat(")")
        if e == Var(var):
            return ("v", None)
        base = _match_size_minus_v(e, var)
        if base is None:
            raise LRecSyntaxError(self.tok.line, self.tok.col, f"a call p({var}) or p(size-{var})", expr_text(e))
        return ("size-v", base)

    # expressions: precedence climbing
    def expr(self) -> Expr:
        left = self.term()
        while self.at("+") or self.at("-"):
            op = self.tok.text
            self.i += 1
            left = BinOp(op, left, self.term())
        return left

    def term(self) -> Expr:
        left = self.unary()
        while self.at("*") or self.at("/"):
            op = self.tok.text
            self.i += 1
            right = self.unary()
            if op == "/" and isinstance(left, Num) and isinstance(right, Num) and right.value != 0:
                left = Num(left.value / right.value)
            else:
                left = BinOp(op, left, right)
        return left

    def unary(self) -> Expr:
        if self.accept("-"):
            arg = self.unary()
            if isinstance(arg, Num):
                return Num(-arg.value)
            return Neg(arg)
        return self.power()

    def power(self) -> Expr:
        base = self.atom()
        if self.accept("^"):
            if self.accept("("):
                k = self.integer()
                self.eat(")")
            else:
                k = self.integer()
            return Pow(base, k)
        return base

    def atom(self) -> Expr:
        t = self.tok
        if t.kind == "num":
            self.i += 1
            return Num(Fraction(t.text))
        if self.accept("("):
            e = self.expr()
            self.eat(")")
            return e
        if t.kind == "ident":
            if t.text in ("ln", "floor", "ceil"):
                self.i += 1
                self.eat("(")
                if t.text == "ln":
                    arg = self.expr()
                    self.eat(")")
                    return Ln(arg)
                arg = self.expr()
                div = 1
                if isinstance(arg, BinOp) and arg.op == "/" and isinstance(arg.right, Num) \
                        and arg.right.value.denominator == 1 and arg.right.value > 0:
                    div = int(arg.right.value)
                    arg = arg.left
                self.eat(")")
                return Floor(arg, div) if t.text == "floor" else Ceil(arg, div)
            self.i += 1
            if t.text == "e":
                return EConst()
            return Var(t.text)
        self.fail("an expression")


def _match_size_minus_v(e: Expr, var: str) -> SizeBase | None:
    """Recognise ``base - v`` with base = n + c or floor/ceil(n/b) + c."""
    if not (isinstance(e, BinOp) and e.op == "-" and e.right == Var(var)):
        return None
    return _match_base(e.left)


def _match_base(e: Expr) -> SizeBase | None:
    c = 0
    while isinstance(e, BinOp) and e.op in "+-" and isinstance(e.right, Num) and e.right.value.denominator == 1:
        k = int(e.right.value)
        c += k if e.op == "+" else -k
        e = e.left
    if e == Var("n"):
        return SizeBase("floor", 1, c)
    if isinstance(e, (Floor, Ceil)) and e.arg == Var("n"):
        return SizeBase("floor" if isinstance(e, Floor) else "ceil", e.div, c)
    return None


def parse(source: str) -> PrrAst:
    """Parse LRec source text into a PrrAst."""
    if isinstance(source, bytes):
        source = source.decode("utf-8")
    return _Parser(source).program()


def parse_expr(text: str, allowed=("n", "alpha", "v")) -> Expr:
    p = _Parser(text)
    e = p.expr()
    if p.tok.kind != "eof":
        p.fail("end of expression")
    bad = free_vars(e) - set(allowed)
    if bad:
        raise UnboundVariable(f"unbound variable(s) {sorted(bad)}")
    return e


def parse_poly(text: str) -> PseudoPoly:
    """Parse a pseudo-polynomial over n, alpha and v (no floors)."""
    text = text.replace("**", "^")
    e = parse_expr(text)
    return expr_to_poly(e, {"n": "n", "alpha": "alpha", "v": "v"})


# ---------------------------------------------------------------------------
# pretty printing


def pretty(ast: PrrAst) -> str:
    return f"def {ast.proc_name}(n; {ast.c_p}) = {{ {_cmd_text(ast.body, ast.proc_name)} }}"


def _dist_text(d: Dist) -> str:
    if isinstance(d, Uniform):
        return "uniform(n)"
    if isinstance(d, MUniform):
        return "muniform(n)"
    if isinstance(d, Discrete):
        inner = " ".join(f"{expr_text(p)}: {expr_text(v)}," for p, v in d.arms)
        return f"discrete{{{inner}}}"
    inner = " ".join(f"{expr_text(lo)}..{expr_text(hi)}: {expr_text(w)}," for lo, hi, w in d.pieces)
    return f"puniform{{{inner}}}"


def _cmd_text(c: Command, proc: str) -> str:
    if isinstance(c, Sample):
        b = c.body
        pre = f"pre({expr_text(b.pre_cost)});"
        v = c.var
        if b.calls == "v":
            call = f"{proc}({v});"
        elif b.calls == "size-v":
            call = f"{proc}({b.size_base.text()}-{v});"
        else:
            call = f"{proc}({v}); {proc}({b.size_base.text()}-{v});"
        return f"sample {v} <- {_dist_text(c.dist)} in {{ {pre} invoke {call} }}"
    arms = " ".join(f"{expr_text(p)}: {{ {_cmd_text(cmd, proc)} }};" for p, cmd in c.arms)
    return f"with {{ {arms} }}"


# ---------------------------------------------------------------------------
# well-formedness


@dataclass(frozen=True)
class Violation:
    kind: str
    detail: str
    value: float | None = None


def ProbSumViolation(total: float) -> Violation:  # noqa: N802 - reads like a type
    return Violation("ProbSumViolation", f"probabilities sum to {total:g}", total)


_CHECK_SPAN = 300


def validate(ast: PrrAst) -> list[Violation]:
    """List of well-formedness violations (empty when the program is fine).

    Size ranges are checked symbolically where the distribution makes it
    obvious and numerically over n in [c_p, c_p + 300] otherwise.  Sizes
    below c_p, including negative ones, simply terminate and are allowed;
    only sizes above n are reported.
    """
    out: list[Violation] = []
    _validate_cmd(ast.body, ast.c_p, out)
    return out


def _prob_check(probs, where, out):
    total = 0.0
    for p in probs:
        x = const_value(p)
        if x < 0 or x > 1 + 1e-12:
            out.append(Violation("ProbRangeViolation", f"{where}: probability {x:g} outside [0,1]", x))
        total += x
    if abs(total - 1.0) > 1e-9:
        out.append(ProbSumViolation(total))


def _validate_cmd(c: Command, c_p: int, out: list):
    if isinstance(c, Choice):
        _prob_check([p for p, _ in c.arms], "with", out)
        for _, cmd in c.arms:
            _validate_cmd(cmd, c_p, out)
        return
    b = c.body
    if c.var in free_vars(b.pre_cost):
        out.append(Violation("PreMentionsSample", f"pre({expr_text(b.pre_cost)}) uses {c.var}"))
    ns = range(c_p, c_p + _CHECK_SPAN)
    for n in ns:
        try:
            s = eval_expr(b.pre_cost, {"n": n, c.var: 0})
        except (ValueError, ZeroDivisionError, OverflowError):
            s = math.nan
        if not (s >= 0) or math.isinf(s):
            out.append(Violation("NegativeCost", f"pre({expr_text(b.pre_cost)}) at n={n} is {s}"))
            break
    d = c.dist
    if isinstance(d, Discrete):
        _prob_check([p for p, _ in d.arms], "discrete", out)
        for _, val in d.arms:
            for n in ns:
                x = eval_expr(val, {"n": n})
                if abs(x - round(x)) > 1e-9:
                    out.append(Violation("NonIntegerSize", f"{expr_text(val)} at n={n} is {x:g}", x))
                    break
                if b.calls == "v" and x > n:
                    out.append(Violation("SizeRangeViolation", f"{expr_text(val)} exceeds n at n={n}", x))
                    break
                if b.calls != "v" and (x < 0 or x > n):
                    out.append(Violation("SizeRangeViolation", f"{expr_text(val)} outside [0,n] at n={n}", x))
                    break
    elif isinstance(d, PiecewiseUniform):
        _prob_check([w for _, _, w in d.pieces], "puniform", out)
        for n in ns:
            spans = sorted((eval_expr(lo, {"n": n}), eval_expr(hi, {"n": n})) for lo, hi, _ in d.pieces)
            bad = any(lo > hi or lo < 0 or hi > n - 1 for lo, hi in spans)
            bad = bad or any(spans[k][1] >= spans[k + 1][0] for k in range(len(spans) - 1))
            if bad:
                out.append(Violation("PieceViolation", f"pieces not disjoint sub-intervals of [0,n-1] at n={n}"))
                break
    if b.size_base is not None:
        for n in ns:
            if b.size_base.value(n) > n:
                out.append(Violation("SizeRangeViolation", f"{b.size_base.text()} exceeds n at n={n}"))
                break
