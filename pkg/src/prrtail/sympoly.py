"""Pseudo-polynomials over the symbols alpha, n and v.

A pseudo-polynomial is a finite sum of monomials

    c * alpha^a * ln(alpha)^b * n^u * ln(n)^w * v^d * ln(v)^e

with integer exponents (negative ones allowed).  Coefficients are doubles,
so anything that involves ln(2) or Euler's number stays representable.

Values are immutable.  A polynomial is stored as a dict from a 6-tuple
signature ``(a, b, u, w, d, e)`` to its coefficient.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Mapping

from .errors import (
    ExponentOverflow,
    MixedSymbols,
    NonMonomialLogSubstitution,
    NonPositiveValue,
    ScanCapExceeded,
    UnboundSymbol,
    ZeroPolynomial,
)

EPS_ZERO = 1e-12
MAX_EXP = 64
SCAN_CAP = 10**9

SYMBOLS = ("alpha", "n", "v")
_IDX = {"alpha": 0, "n": 1, "v": 2, "a": 0}
_ZERO_SIG = (0, 0, 0, 0, 0, 0)


def _sym_index(sym: str) -> int:
    try:
        return _IDX[sym]
    except KeyError:
        raise UnboundSymbol(f"unknown symbol {sym!r}") from None


def _check_sig(sig):
    for e in sig:
        if e > MAX_EXP or e < -MAX_EXP:
            raise ExponentOverflow(f"exponent {e} outside [-{MAX_EXP}, {MAX_EXP}]")
    return sig


def _add_sig(s, t):
    r = (s[0] + t[0], s[1] + t[1], s[2] + t[2], s[3] + t[3], s[4] + t[4], s[5] + t[5])
    if max(r) > MAX_EXP or min(r) < -MAX_EXP:
        _check_sig(r)
    return r


@dataclass(frozen=True)
class PseudoMono:
    coeff: float
    sig: tuple

    def exps(self, sym: str) -> tuple[int, int]:
        i = 2 * _sym_index(sym)
        return self.sig[i], self.sig[i + 1]

    def symbols(self) -> set[str]:
        return {s for k, s in enumerate(SYMBOLS) if self.sig[2 * k] or self.sig[2 * k + 1]}

    def as_poly(self) -> "PseudoPoly":
        return PseudoPoly({self.sig: self.coeff})

    def __str__(self):
        return str(self.as_poly())


class PseudoPoly:
    __slots__ = ("_t", "_hash")

    def __init__(self, terms: Mapping[tuple, float] | None = None, _trusted=False):
        if _trusted:
            self._t = terms
        else:
            t = {}
            for sig, c in (terms or {}).items():
                c = float(c)
                if abs(c) >= EPS_ZERO:
                    t[_check_sig(tuple(sig))] = c
            self._t = t
        self._hash = None

    # -- construction -----------------------------------------------------
    @staticmethod
    def const(c: float) -> "PseudoPoly":
        return PseudoPoly({_ZERO_SIG: c})

    @staticmethod
    def mono(coeff=1.0, alpha=(0, 0), n=(0, 0), v=(0, 0)) -> "PseudoPoly":
        return PseudoPoly({(alpha[0], alpha[1], n[0], n[1], v[0], v[1]): coeff})

    @staticmethod
    def symbol(sym: str, power: int = 1, ln: int = 0) -> "PseudoPoly":
        sig = [0] * 6
        i = 2 * _sym_index(sym)
        sig[i], sig[i + 1] = power, ln
        return PseudoPoly({tuple(sig): 1.0})

    # -- inspection -------------------------------------------------------
    @property
    def terms(self) -> dict:
        return self._t

    def monomials(self) -> list[PseudoMono]:
        return [PseudoMono(c, s) for s, c in sorted(self._t.items(), reverse=True)]

    def is_zero(self) -> bool:
        return not self._t

    def is_const(self) -> bool:
        return all(s == _ZERO_SIG for s in self._t)

    def const_value(self) -> float:
        return self._t.get(_ZERO_SIG, 0.0)

    def symbols(self) -> set[str]:
        out = set()
        for s in self._t:
            for k, name in enumerate(SYMBOLS):
                if s[2 * k] or s[2 * k + 1]:
                    out.add(name)
        return out

    def is_monomial(self) -> bool:
        return len(self._t) == 1

    def single(self) -> PseudoMono:
        if len(self._t) != 1:
            raise ValueError("not a single monomial")
        (s, c), = self._t.items()
        return PseudoMono(c, s)

    # -- ring operations --------------------------------------------------
    def __add__(self, other):
        other = _coerce(other)
        t = dict(self._t)
        for s, c in other._t.items():
            r = t.get(s, 0.0) + c
            if abs(r) < EPS_ZERO:
                t.pop(s, None)
            else:
                t[s] = r
        return PseudoPoly(t, _trusted=True)

    __radd__ = __add__

    def __neg__(self):
        return PseudoPoly({s: -c for s, c in self._t.items()}, _trusted=True)

    def __sub__(self, other):
        return self + (-_coerce(other))

    def __rsub__(self, other):
        return _coerce(other) - self

    def __mul__(self, other):
        if isinstance(other, (int, float)):
            if other == 0:
                return PseudoPoly()
            other = float(other)
            return PseudoPoly({s: c * other for s, c in self._t.items() if abs(c * other) >= EPS_ZERO}, _trusted=True)
        other = _coerce(other)
        t: dict = {}
        for s1, c1 in self._t.items():
            for s2, c2 in other._t.items():
                s = _add_sig(s1, s2)
                t[s] = t.get(s, 0.0) + c1 * c2
        return PseudoPoly({s: c for s, c in t.items() if abs(c) >= EPS_ZERO}, _trusted=True)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, (int, float)):
            return self * (1.0 / other)
        other = _coerce(other)
        if not other.is_monomial():
            raise ValueError("division only by a single monomial")
        return self * other.inverse()

    def inverse(self) -> "PseudoPoly":
        m = self.single()
        return PseudoPoly({tuple(-e for e in m.sig): 1.0 / m.coeff})

    def __pow__(self, k: int):
        if k < 0:
            return self.inverse() ** (-k)
        out = PseudoPoly.const(1.0)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def __eq__(self, other):
        if isinstance(other, (int, float)):
            other = PseudoPoly.const(other)
        if not isinstance(other, PseudoPoly):
            return NotImplemented
        return self._t == other._t

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(frozenset(self._t.items()))
        return self._hash

    def approx_eq(self, other, tol=1e-9) -> bool:
        other = _coerce(other)
        keys = set(self._t) | set(other._t)
        return all(abs(self._t.get(k, 0.0) - other._t.get(k, 0.0)) <= tol * (1 + abs(self._t.get(k, 0.0))) for k in keys)

    def __repr__(self):
        return f"PseudoPoly({str(self)!r})"

    def __str__(self):
        return to_text(self)

    # -- convenience ------------------------------------------------------
    def eval(self, **env) -> float:
        return eval_numeric(self, env)

    def split_by(self, sym: str) -> dict:
        """Group terms by the (power, ln power) of ``sym``.

        Returns a map from that pair to the cofactor polynomial with ``sym``
        removed.
        """
        i = 2 * _sym_index(sym)
        groups: dict = {}
        for s, c in self._t.items():
            key = (s[i], s[i + 1])
            rest = list(s)
            rest[i] = rest[i + 1] = 0
            groups.setdefault(key, {})[tuple(rest)] = c
        return {k: PseudoPoly(v, _trusted=True) for k, v in groups.items()}


def _coerce(x) -> PseudoPoly:
    if isinstance(x, PseudoPoly):
        return x
    if isinstance(x, PseudoMono):
        return x.as_poly()
    if isinstance(x, (int, float)):
        return PseudoPoly.const(x)
    raise TypeError(f"cannot use {type(x).__name__} as a pseudo-polynomial")


ZERO = PseudoPoly()
ONE = PseudoPoly.const(1.0)
N = PseudoPoly.symbol("n")
LN_N = PseudoPoly.symbol("n", 0, 1)
ALPHA = PseudoPoly.symbol("alpha")
LN_ALPHA = PseudoPoly.symbol("alpha", 0, 1)
V = PseudoPoly.symbol("v")
LN_V = PseudoPoly.symbol("v", 0, 1)


def arith(op: str, p, q=None) -> PseudoPoly:
    p = _coerce(p)
    if op == "neg":
        return -p
    q = _coerce(q)
    if op == "add":
        return p + q
    if op == "sub":
        return p - q
    if op == "mul":
        return p * q
    raise ValueError(f"unknown op {op!r}")


# -- printing -------------------------------------------------------------

def _fmt_coeff(c: float) -> str:
    r = round(c)
    if abs(c - r) < 1e-9 * max(1.0, abs(c)):
        return str(int(r))
    return f"{c:.10g}"


def _factor_text(name: str, p: int, l: int) -> list[str]:
    out = []
    if p == 1:
        out.append(name)
    elif p:
        out.append(f"{name}^{p}")
    if l == 1:
        out.append(f"ln({name})")
    elif l:
        out.append(f"ln({name})^{l}")
    return out


def _order_key(sig):
    # alpha magnitude first, then n, then v; descending
    return sig


def to_text(p: PseudoPoly) -> str:
    """Canonical printing, e.g. ``2*alpha*ln(alpha)^-1*n``.

    Terms are ordered by descending (alpha, n, v) magnitude, so equal
    polynomials always print the same way.
    """
    if p.is_zero():
        return "0"
    parts = []
    for sig in sorted(p.terms, key=_order_key, reverse=True):
        c = p.terms[sig]
        factors = []
        for k, name in enumerate(SYMBOLS):
            factors += _factor_text(name, sig[2 * k], sig[2 * k + 1])
        mag = abs(c)
        if not factors:
            body = _fmt_coeff(mag)
        elif abs(mag - 1.0) < 1e-12:
            body = "*".join(factors)
        else:
            body = _fmt_coeff(mag) + "*" + "*".join(factors)
        sign = "-" if c < 0 else "+"
        parts.append((sign, body))
    first_sign, first = parts[0]
    text = ("-" if first_sign == "-" else "") + first
    for sign, body in parts[1:]:
        text += f" {sign} {body}"
    return text


# -- substitution and evaluation ------------------------------------------

def _log_of_monomial(m: PseudoMono, sym: str) -> PseudoPoly:
    if m.coeff <= 0:
        raise NonMonomialLogSubstitution(f"ln of non-positive monomial {m}")
    out = PseudoPoly.const(math.log(m.coeff))
    for k, name in enumerate(SYMBOLS):
        pw, ln = m.sig[2 * k], m.sig[2 * k + 1]
        if ln:
            raise NonMonomialLogSubstitution(f"ln(ln({name})) is not representable")
        if pw:
            out = out + PseudoPoly.symbol(name, 0, 1) * pw
    return out


def substitute(p: PseudoPoly, sym: str, value) -> PseudoPoly:
    """Replace ``sym`` by ``value`` everywhere in ``p``.

    ln(sym) factors need a logarithm of ``value``, which exists only when
    ``value`` is a single positive monomial without ln factors.  Any other
    case raises NonMonomialLogSubstitution; the strengthener's log rule
    handles those first.
    """
    value = _coerce(value)
    i = 2 * _sym_index(sym)
    out = PseudoPoly()
    log_cache = None
    for s, c in p.terms.items():
        pw, ln = s[i], s[i + 1]
        rest = list(s)
        rest[i] = rest[i + 1] = 0
        term = PseudoPoly({tuple(rest): c})
        if pw:
            if pw < 0 and not value.is_monomial():
                raise NonMonomialLogSubstitution("negative power of a non-monomial value")
            term = term * value ** pw
        if ln:
            if log_cache is None:
                if not value.is_monomial():
                    raise NonMonomialLogSubstitution(f"ln({value}) is not a pseudo-polynomial")
                log_cache = _log_of_monomial(value.single(), sym)
            term = term * log_cache ** ln
        out = out + term
    return out


def eval_numeric(p: PseudoPoly, env: Mapping[str, float]) -> float:
    vals = [None, None, None]
    for k, v in env.items():
        vals[_sym_index(k)] = float(v)
    logs = [None, None, None]
    total = 0.0
    for s, c in p.terms.items():
        x = c
        for k in range(3):
            pw, ln = s[2 * k], s[2 * k + 1]
            if not (pw or ln):
                continue
            val = vals[k]
            if val is None:
                raise UnboundSymbol(f"symbol {SYMBOLS[k]} not bound")
            if val <= 0:
                raise NonPositiveValue(f"{SYMBOLS[k]} = {val}")
            if pw:
                x *= val ** pw
            if ln:
                if logs[k] is None:
                    logs[k] = math.log(val)
                x *= logs[k] ** ln
        total += x
    if math.isnan(total) or math.isinf(total):
        raise NonPositiveValue(f"evaluation produced {total}")
    return total


# -- calculus -------------------------------------------------------------

def derivative(p: PseudoPoly, sym: str = "n") -> PseudoPoly:
    i = 2 * _sym_index(sym)
    t: dict = {}
    for s, c in p.terms.items():
        a, b = s[i], s[i + 1]
        if a:
            s1 = list(s)
            s1[i] = a - 1
            k = tuple(s1)
            t[k] = t.get(k, 0.0) + c * a
        if b:
            s2 = list(s)
            s2[i] = a - 1
            s2[i + 1] = b - 1
            k = tuple(s2)
            t[k] = t.get(k, 0.0) + c * b
    return PseudoPoly(t)


def derivative_n(p: PseudoPoly) -> PseudoPoly:
    return derivative(p, "n")


def _only(p: PseudoPoly, sym: str):
    others = p.symbols() - {sym}
    if others:
        raise MixedSymbols(f"expected only {sym}, found {sorted(others)}")


def magnitude(m: PseudoMono, sym: str) -> tuple[int, int]:
    return m.exps(sym)


def leading_monomial(p: PseudoPoly, sym: str) -> PseudoMono:
    if p.is_zero():
        raise ZeroPolynomial("leading monomial of 0")
    _only(p, sym)
    i = 2 * _sym_index(sym)
    sig = max(p.terms, key=lambda s: (s[i], s[i + 1]))
    return PseudoMono(p.terms[sig], sig)


def is_superconstant(pw: int, ln: int) -> bool:
    return pw > 0 or (pw == 0 and ln > 0)


@dataclass(frozen=True)
class LimitValue:
    kind: str  # "+inf", "-inf" or "finite"
    value: float = 0.0

    @property
    def is_finite(self):
        return self.kind == "finite"

    def exp(self) -> float:
        if self.kind == "+inf":
            return math.inf
        if self.kind == "-inf":
            return 0.0
        return math.exp(self.value)


PLUS_INF = LimitValue("+inf", math.inf)
MINUS_INF = LimitValue("-inf", -math.inf)


def limit_at_infinity(p: PseudoPoly, sym: str) -> LimitValue:
    if p.is_zero():
        return LimitValue("finite", 0.0)
    lead = leading_monomial(p, sym)
    pw, ln = lead.exps(sym)
    if is_superconstant(pw, ln):
        return PLUS_INF if lead.coeff > 0 else MINUS_INF
    return LimitValue("finite", p.const_value())


# -- monotonicity and NegativeLB ------------------------------------------

@dataclass(frozen=True)
class MonoClass:
    kind: str  # Constant, NonDecreasing, NonIncreasing, UpThenDown, DownThenUp
    turn: float | None = None

    def eventually_nonincreasing_from(self) -> float:
        """Smallest point after which the monomial never increases."""
        if self.kind in ("Constant", "NonIncreasing"):
            return 1.0
        if self.kind == "UpThenDown":
            return self.turn
        return math.inf


def monotonicity_class(m: PseudoMono | PseudoPoly) -> MonoClass:
    """Monotonicity of ``n^a ln(n)^b`` on n > 1 (positive coefficient)."""
    if isinstance(m, PseudoPoly):
        m = m.single()
    a, b = m.exps("n")
    if a == 0 and b == 0:
        return MonoClass("Constant")
    if a < 0 and b > 0:
        return MonoClass("UpThenDown", math.exp(-b / a))
    if a > 0 and b < 0:
        return MonoClass("DownThenUp", math.exp(-b / a))
    if a < 0 or (a == 0 and b < 0):
        return MonoClass("NonIncreasing")
    return MonoClass("NonDecreasing")


def negative_lb(p: PseudoPoly, start: int = 2) -> float:
    """Threshold T with p(n) <= 0 for every real n >= T, or inf.

    Follows the three-step recipe: normalise by the leading monomial, keep
    the constant part plus the positive subconstant terms, and search past
    the last turning point of those terms for the first integer where the
    kept part is negative.  The kept part is non-increasing there, so a
    doubling-then-bisection search is equivalent to the linear scan.
    """
    start = max(int(start), 2)
    if p.is_zero():
        return start
    _only(p, "n")
    lead = leading_monomial(p, "n")
    if lead.coeff >= 0:
        return math.inf
    inv = PseudoPoly({tuple(-e for e in lead.sig): 1.0 / abs(lead.coeff)})
    p1 = p * inv
    kept = {}
    for s, c in p1.terms.items():
        if s == _ZERO_SIG or c > 0:
            kept[s] = c
    p2 = PseudoPoly(kept)
    n_e = float(start)
    for m in p2.monomials():
        if m.sig == _ZERO_SIG:
            continue
        n_e = max(n_e, monotonicity_class(m).eventually_nonincreasing_from())
    lo = max(start, int(math.ceil(n_e)))

    def neg(x):
        return eval_numeric(p2, {"n": x}) < 0

    if neg(lo):
        return lo
    hi = lo
    step = 1
    while not neg(hi):
        step *= 2
        hi = lo + step
        if step > SCAN_CAP:
            raise ScanCapExceeded(f"no sign change below {hi} for {p}")
    # smallest integer in (hi - step/2, hi] with neg true
    left = hi - step // 2
    while left + 1 < hi:
        mid = (left + hi) // 2
        if neg(mid):
            hi = mid
        else:
            left = mid
    return hi


# -- helpers used by the analysis layers -----------------------------------

def alpha_part(p: PseudoPoly) -> PseudoPoly:
    return PseudoPoly({s: c for s, c in p.terms.items() if s[2:] == (0, 0, 0, 0)}, _trusted=True)


def sum_polys(ps: Iterable[PseudoPoly]) -> PseudoPoly:
    out = PseudoPoly()
    for p in ps:
        out = out + p
    return out


def lex_cmp(x: tuple[int, int], y: tuple[int, int]) -> int:
    return (x > y) - (x < y)
