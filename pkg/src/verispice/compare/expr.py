"""Closed grammar for final-answer expressions, with evaluation on a numeric axis.

Two families are accepted: sums of time-domain terms (constants,
exponentials, sinusoids with phase in degrees, ramps, each optionally
gated by u(t) or u(-t)) and rational network functions in s. The grammar
is deliberately small so a model can be told exactly what to emit and a
parse failure can be quoted back to it verbatim.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from enum import Enum

import numpy as np

from ..errors import GrammarError
from ..sim.output import AxisKind

__all__ = [
    "MAX_DEGREE",
    "RationalNetworkFunction",
    "Term",
    "TermKind",
    "TermSum",
    "evaluate",
    "format_expression",
    "parse_expression",
]

MAX_DEGREE = 4

_RESERVED = {"exp", "cos", "sin", "u", "t", "s", "deg"}


class TermKind(str, Enum):
    CONST = "const"
    EXP = "exp"
    COS = "cos"
    SIN = "sin"
    RAMP = "ramp"


def _require_finite(value: float, what: str) -> float:
    value = float(value)
    if not math.isfinite(value):
        raise GrammarError(f"{what} must be finite, got {value!r}")
    return value


@dataclass(frozen=True)
class Term:
    kind: TermKind
    coefficient: float
    rate: float = 0.0
    omega: float = 0.0
    phase_deg: float = 0.0
    gate: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "coefficient", _require_finite(self.coefficient, "coefficient"))
        object.__setattr__(self, "rate", _require_finite(self.rate, "rate"))
        object.__setattr__(self, "omega", _require_finite(self.omega, "frequency"))
        object.__setattr__(self, "phase_deg", _require_finite(self.phase_deg, "phase"))
        if self.gate not in (None, "u(t)", "u(-t)"):
            raise GrammarError(f"unknown gate {self.gate!r}")
        # zero the parameters the kind does not use, so equality is semantic
        if self.kind is not TermKind.EXP:
            object.__setattr__(self, "rate", 0.0)
        if self.kind not in (TermKind.COS, TermKind.SIN):
            object.__setattr__(self, "omega", 0.0)
            object.__setattr__(self, "phase_deg", 0.0)


@dataclass(frozen=True)
class TermSum:
    terms: tuple[Term, ...]

    def __post_init__(self):
        if not self.terms:
            raise GrammarError("expression has no terms")


@dataclass(frozen=True)
class RationalNetworkFunction:
    """numerator/denominator as ascending coefficient tuples: c0 + c1*s + ...

    Trailing zero coefficients are trimmed so the stored degree is the
    actual degree.
    """

    numerator: tuple[float, ...]
    denominator: tuple[float, ...]

    def __post_init__(self):
        for name, coeffs in (("numerator", self.numerator), ("denominator", self.denominator)):
            if not coeffs:
                raise GrammarError(f"{name} has no coefficients")
            trimmed = tuple(_require_finite(c, f"{name} coefficient") for c in coeffs)
            while len(trimmed) > 1 and trimmed[-1] == 0:
                trimmed = trimmed[:-1]
            if len(trimmed) > MAX_DEGREE + 1:
                raise GrammarError(f"{name} degree exceeds the maximum {MAX_DEGREE}")
            object.__setattr__(self, name, trimmed)
        if not any(self.denominator):
            raise GrammarError("denominator is identically zero")


_TOKEN_RE = re.compile(
    r"\s*(?:(?P<num>\d+\.?\d*(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?)"
    r"|(?P<name>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[-+*/^()=]))"
)


@dataclass(frozen=True)
class _Token:
    kind: str
    text: str
    pos: int


def _tokenize(text: str) -> list[_Token]:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            rest = text[pos:].lstrip()
            if not rest:
                break
            at = len(text) - len(rest)
            raise GrammarError(f"unexpected character {rest[0]!r} at position {at}", at)
        kind = m.lastgroup
        tokens.append(_Token(kind, m.group(kind), m.start(kind)))
        pos = m.end()
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self, ahead: int = 0) -> _Token | None:
        j = self.i + ahead
        return self.tokens[j] if j < len(self.tokens) else None

    def next(self) -> _Token:
        tok = self.peek()
        if tok is None:
            raise GrammarError(
                f"unexpected end of expression at position {len(self.text)}", len(self.text)
            )
        self.i += 1
        return tok

    def fail(self, expected: str) -> GrammarError:
        tok = self.peek()
        if tok is None:
            return GrammarError(
                f"expected {expected} but the expression ended at position {len(self.text)}",
                len(self.text),
            )
        return GrammarError(
            f"expected {expected} but found {tok.text!r} at position {tok.pos}", tok.pos
        )

    def expect_op(self, op: str, expected: str | None = None) -> _Token:
        tok = self.peek()
        if tok is None or tok.kind != "op" or tok.text != op:
            raise self.fail(expected or f"'{op}'")
        return self.next()

    def expect_name(self, name: str) -> _Token:
        tok = self.peek()
        if tok is None or tok.kind != "name" or tok.text != name:
            raise self.fail(f"'{name}'")
        return self.next()

    def at_op(self, *ops: str) -> bool:
        tok = self.peek()
        return tok is not None and tok.kind == "op" and tok.text in ops

    def at_name(self, *names: str) -> bool:
        tok = self.peek()
        return tok is not None and tok.kind == "name" and tok.text in names

    # number with optional sign
    def parse_number(self, what: str = "a number") -> float:
        sign = 1.0
        if self.at_op("+", "-"):
            sign = -1.0 if self.next().text == "-" else 1.0
        tok = self.peek()
        if tok is None or tok.kind != "num":
            raise self.fail(what)
        self.next()
        return sign * float(tok.text)


def _at(parser: _Parser, offset: int, kind: str, *texts: str) -> bool:
    token = parser.peek(offset)
    return token is not None and token.kind == kind and (not texts or token.text in texts)


def _strip_assignment(parser: _Parser) -> None:
    """Skip an optional ``name =``, ``name(t) =``, or ``name(s) =`` head."""
    first = parser.peek(0)
    if first is None or first.kind != "name" or first.text in _RESERVED:
        return
    width = 1
    if (
        _at(parser, 1, "op", "(")
        and _at(parser, 2, "name", "t", "s")
        and _at(parser, 3, "op", ")")
    ):
        width = 4
    if _at(parser, width, "op", "="):
        parser.i += width + 1


def _parse_gate(parser: _Parser) -> str:
    parser.next()  # 'u'
    parser.expect_op("(")
    if parser.at_op("-"):
        parser.next()
        parser.expect_name("t")
        parser.expect_op(")")
        return "u(-t)"
    parser.expect_name("t")
    parser.expect_op(")")
    return "u(t)"


def _parse_term(parser: _Parser, sign: float) -> Term:
    coefficient = sign * parser.parse_number("a coefficient")
    kind = TermKind.CONST
    rate = omega = phase = 0.0

    if parser.at_op("*") and not (
        parser.peek(1) is not None and parser.peek(1).kind == "name" and parser.peek(1).text == "u"
    ):
        parser.next()
        tok = parser.peek()
        if tok is None or tok.kind != "name":
            raise parser.fail("'t', 'exp', 'cos' or 'sin'")
        if tok.text == "t":
            parser.next()
            kind = TermKind.RAMP
        elif tok.text == "exp":
            parser.next()
            parser.expect_op("(")
            rate = parser.parse_number("the exponent rate")
            parser.expect_op("*", "'*t' in the exponent")
            parser.expect_name("t")
            parser.expect_op(")")
            kind = TermKind.EXP
        elif tok.text in ("cos", "sin"):
            parser.next()
            kind = TermKind.COS if tok.text == "cos" else TermKind.SIN
            parser.expect_op("(")
            omega = parser.parse_number("the angular frequency")
            parser.expect_op("*", "'*t' in the sinusoid argument")
            parser.expect_name("t")
            if parser.at_op("+", "-"):
                phase_sign = -1.0 if parser.next().text == "-" else 1.0
                tok2 = parser.peek()
                if tok2 is None or tok2.kind != "num":
                    raise parser.fail("the phase in degrees")
                parser.next()
                phase = phase_sign * float(tok2.text)
                parser.expect_name("deg")
            parser.expect_op(")")
        else:
            raise parser.fail("'t', 'exp', 'cos' or 'sin'")

    gate = None
    while parser.at_op("*") and (
        parser.peek(1) is not None and parser.peek(1).kind == "name" and parser.peek(1).text == "u"
    ):
        star = parser.next()
        if gate is not None:
            raise GrammarError(
                f"term already has a step gate at position {star.pos}", star.pos
            )
        gate = _parse_gate(parser)

    return Term(kind, coefficient, rate=rate, omega=omega, phase_deg=phase, gate=gate)


def _parse_term_sum(parser: _Parser) -> TermSum:
    terms = []
    sign = 1.0
    if parser.at_op("+", "-"):
        sign = -1.0 if parser.next().text == "-" else 1.0
    while True:
        terms.append(_parse_term(parser, sign))
        tok = parser.peek()
        if tok is None:
            break
        if tok.kind == "op" and tok.text in "+-":
            parser.next()
            sign = -1.0 if tok.text == "-" else 1.0
            continue
        raise parser.fail("'+', '-' or the end of the expression")
    return TermSum(tuple(terms))


def _parse_poly(parser: _Parser, what: str) -> tuple[float, ...]:
    coeffs = [0.0] * (MAX_DEGREE + 1)
    degree = 0
    sign = 1.0
    if parser.at_op("+", "-"):
        sign = -1.0 if parser.next().text == "-" else 1.0
    while True:
        has_s = False
        if parser.at_name("s"):
            coefficient = sign
            parser.next()
            has_s = True
        else:
            coefficient = sign * parser.parse_number(f"a coefficient in the {what}")
            if parser.at_op("*"):
                parser.next()
                parser.expect_name("s")
                has_s = True
        power = 1 if has_s else 0
        if has_s and parser.at_op("^"):
            caret = parser.next()
            tok = parser.peek()
            if tok is None or tok.kind != "num" or not tok.text.isdigit():
                raise parser.fail("an integer power of s")
            parser.next()
            power = int(tok.text)
            if power > MAX_DEGREE:
                raise GrammarError(
                    f"power s^{power} exceeds the maximum degree {MAX_DEGREE}"
                    f" at position {caret.pos}",
                    caret.pos,
                )
        coeffs[power] += coefficient
        degree = max(degree, power)
        if parser.at_op("+", "-"):
            sign = -1.0 if parser.next().text == "-" else 1.0
            continue
        break
    return tuple(coeffs[: degree + 1])


def _parse_rational(parser: _Parser) -> RationalNetworkFunction:
    parser.expect_op("(", "'(' opening the numerator")
    numerator = _parse_poly(parser, "numerator")
    parser.expect_op(")")
    parser.expect_op("/", "'/' between numerator and denominator")
    parser.expect_op("(", "'(' opening the denominator")
    denominator = _parse_poly(parser, "denominator")
    parser.expect_op(")")
    if parser.peek() is not None:
        raise parser.fail("the end of the expression")
    return RationalNetworkFunction(numerator, denominator)


def parse_expression(text: str):
    """Parse answer text into a TermSum or RationalNetworkFunction.

    Unicode minus signs are normalized first. Raises GrammarError with a
    character position on any deviation from the grammar.
    """
    normalized = text.replace("−", "-").strip()
    if not normalized:
        raise GrammarError("empty expression", 0)
    parser = _Parser(normalized)
    _strip_assignment(parser)
    remaining = parser.tokens[parser.i :]
    rational = any(
        (tok.kind == "name" and tok.text == "s") or (tok.kind == "op" and tok.text == "/")
        for tok in remaining
    )
    if rational:
        return _parse_rational(parser)
    return _parse_term_sum(parser)


def _format_number(value: float) -> str:
    return repr(float(value))


def _format_term(term: Term) -> str:
    c = _format_number(abs(term.coefficient))
    if term.kind is TermKind.CONST:
        body = c
    elif term.kind is TermKind.RAMP:
        body = f"{c}*t"
    elif term.kind is TermKind.EXP:
        body = f"{c}*exp({_format_number(term.rate)}*t)"
    else:
        fn = "cos" if term.kind is TermKind.COS else "sin"
        op = "-" if term.phase_deg < 0 else "+"
        body = f"{c}*{fn}({_format_number(term.omega)}*t {op} {_format_number(abs(term.phase_deg))} deg)"
    if term.gate:
        body += f"*{term.gate}"
    return body


def _format_poly(coeffs: tuple[float, ...]) -> str:
    parts = []
    for power, c in enumerate(coeffs):
        if c == 0 and any(x != 0 for x in coeffs):
            continue
        if power == 0:
            body = _format_number(abs(c))
        elif power == 1:
            body = f"{_format_number(abs(c))}*s"
        else:
            body = f"{_format_number(abs(c))}*s^{power}"
        if not parts:
            parts.append(body if c >= 0 else f"-{body}")
        else:
            parts.append(f"{'-' if c < 0 else '+'} {body}")
    return " ".join(parts) if parts else "0.0"


def format_expression(expr) -> str:
    """Canonical text for an expression; reparses to an equal structure."""
    if isinstance(expr, RationalNetworkFunction):
        return f"({_format_poly(expr.numerator)})/({_format_poly(expr.denominator)})"
    parts = []
    for term in expr.terms:
        body = _format_term(term)
        if not parts:
            parts.append(body if term.coefficient >= 0 else f"-{body}")
        else:
            parts.append(f"{'-' if term.coefficient < 0 else '+'} {body}")
    return " ".join(parts)


def _evaluate_terms(expr: TermSum, t: np.ndarray) -> np.ndarray:
    total = np.zeros_like(t, dtype=float)
    for term in expr.terms:
        if term.kind is TermKind.CONST:
            values = np.full_like(t, term.coefficient, dtype=float)
        elif term.kind is TermKind.RAMP:
            values = term.coefficient * t
        elif term.kind is TermKind.EXP:
            values = term.coefficient * np.exp(term.rate * t)
        else:
            fn = np.cos if term.kind is TermKind.COS else np.sin
            values = term.coefficient * fn(term.omega * t + math.radians(term.phase_deg))
        if term.gate == "u(t)":
            values = np.where(t > 0, values, 0.0)
        elif term.gate == "u(-t)":
            values = np.where(t <= 0, values, 0.0)
        total += values
    return total


def _evaluate_rational(
    expr: RationalNetworkFunction, hertz: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    s = 1j * 2.0 * math.pi * np.asarray(hertz, dtype=float)
    num = sum(c * s**k for k, c in enumerate(expr.numerator))
    den = sum(c * s**k for k, c in enumerate(expr.denominator))
    with np.errstate(divide="ignore", invalid="ignore"):
        h = np.asarray(num / den, dtype=complex)
    phase = np.degrees(np.angle(h))
    # wrap to (-180, 180]: atan2 yields -180 for negative reals with a -0.0j part
    phase = np.where(phase <= -180.0, phase + 360.0, phase)
    return np.abs(h), phase


def evaluate(expr, axis: np.ndarray, kind: AxisKind):
    """Evaluate on the given axis.

    Time expressions need a time axis and return one vector; network
    functions need a frequency axis (hertz) and return (magnitude,
    phase in degrees wrapped to (-180, 180]).
    """
    axis = np.asarray(axis, dtype=float)
    if isinstance(expr, TermSum):
        if kind is not AxisKind.TIME:
            raise TypeError("time-domain expression requires a time axis")
        return _evaluate_terms(expr, axis)
    if isinstance(expr, RationalNetworkFunction):
        if kind is not AxisKind.FREQUENCY:
            raise TypeError("network function requires a frequency axis")
        return _evaluate_rational(expr, axis)
    raise TypeError(f"not an answer expression: {type(expr).__name__}")
