"""Recursive-descent expression evaluator for the Calculator tool.

Grammar (whitespace insignificant, angles in radians):

    expr   := term (('+'|'-') term)*
    term   := factor (('*'|'/') factor)*
    factor := unary ('^' factor)?          # '^' is right-associative
    unary  := '-' unary | atom
    atom   := number | ident '(' expr (',' expr)* ')' | '(' expr ')'

Functions: sqrt, abs, min, max, sin, cos, tan, atan2, pow. All values are
64-bit floats; a non-finite result is a domain error.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

MAX_EXPRESSION_LENGTH = 4096


class CalculatorError(Exception):
    """Base class for calculator failures; `code` feeds observations."""

    code = "CalculatorError"


class ParseError(CalculatorError):
    code = "ParseError"

    def __init__(self, position: int, message: str) -> None:
        super().__init__(f"at position {position}: {message}")
        self.position = position


class DivisionByZero(CalculatorError):
    code = "DivisionByZero"


class UnknownFunction(CalculatorError):
    code = "UnknownFunction"

    def __init__(self, name: str) -> None:
        super().__init__(f"unknown function {name!r}")
        self.name = name


class DomainError(CalculatorError):
    code = "DomainError"


# name -> (min arity, max arity or None for variadic)
_FUNCTIONS: dict[str, tuple[int, int | None]] = {
    "sqrt": (1, 1),
    "abs": (1, 1),
    "min": (1, None),
    "max": (1, None),
    "sin": (1, 1),
    "cos": (1, 1),
    "tan": (1, 1),
    "atan2": (2, 2),
    "pow": (2, 2),
}


@dataclass(frozen=True, slots=True)
class _Token:
    kind: str  # number | ident | op | lparen | rparen | comma | end
    text: str
    position: int


def _tokenize(expression: str) -> list[_Token]:
    tokens: list[_Token] = []
    i = 0
    n = len(expression)
    while i < n:
        ch = expression[i]
        if ch.isspace():
            i += 1
            continue
        if ch in "+-*/^":
            tokens.append(_Token("op", ch, i))
            i += 1
            continue
        if ch == "(":
            tokens.append(_Token("lparen", ch, i))
            i += 1
            continue
        if ch == ")":
            tokens.append(_Token("rparen", ch, i))
            i += 1
            continue
        if ch == ",":
            tokens.append(_Token("comma", ch, i))
            i += 1
            continue
        if ch.isdigit() or (ch == "." and i + 1 < n and expression[i + 1].isdigit()):
            start = i
            while i < n and expression[i].isdigit():
                i += 1
            if i < n and expression[i] == ".":
                i += 1
                while i < n and expression[i].isdigit():
                    i += 1
            if i < n and expression[i] in "eE":
                j = i + 1
                if j < n and expression[j] in "+-":
                    j += 1
                if j < n and expression[j].isdigit():
                    i = j
                    while i < n and expression[i].isdigit():
                        i += 1
            text = expression[start:i]
            try:
                float(text)
            except ValueError:
                raise ParseError(start, f"malformed number {text!r}") from None
            tokens.append(_Token("number", text, start))
            continue
        if ch.isalpha() or ch == "_":
            start = i
            while i < n and (expression[i].isalnum() or expression[i] == "_"):
                i += 1
            tokens.append(_Token("ident", expression[start:i], start))
            continue
        raise ParseError(i, f"unexpected character {ch!r}")
    tokens.append(_Token("end", "", n))
    return tokens


class _Parser:
    def __init__(self, tokens: list[_Token]) -> None:
        self.tokens = tokens
        self.pos = 0

    @property
    def current(self) -> _Token:
        return self.tokens[self.pos]

    def advance(self) -> _Token:
        token = self.tokens[self.pos]
        self.pos += 1
        return token

    def expect(self, kind: str, what: str) -> _Token:
        if self.current.kind != kind:
            raise ParseError(
                self.current.position,
                f"expected {what}, found {self.current.text or 'end of input'!r}",
            )
        return self.advance()

    def parse(self) -> float:
        value = self.expr()
        if self.current.kind != "end":
            raise ParseError(
                self.current.position, f"unexpected trailing {self.current.text!r}"
            )
        return value

    def expr(self) -> float:
        value = self.term()
        while self.current.kind == "op" and self.current.text in "+-":
            op = self.advance().text
            rhs = self.term()
            value = value + rhs if op == "+" else value - rhs
        return value

    def term(self) -> float:
        value = self.factor()
        while self.current.kind == "op" and self.current.text in "*/":
            op = self.advance()
            rhs = self.factor()
            if op.text == "*":
                value = value * rhs
            else:
                if rhs == 0.0:
                    raise DivisionByZero(f"division by zero at position {op.position}")
                value = value / rhs
        return value

    def factor(self) -> float:
        base = self.unary()
        if self.current.kind == "op" and self.current.text == "^":
            op = self.advance()
            exponent = self.factor()  # right-associative
            try:
                result = math.pow(base, exponent)
            except (ValueError, OverflowError) as exc:
                raise DomainError(
                    f"{base} ^ {exponent} at position {op.position}: {exc}"
                ) from None
            return result
        return base

    def unary(self) -> float:
        if self.current.kind == "op" and self.current.text == "-":
            self.advance()
            return -self.unary()
        return self.atom()

    def atom(self) -> float:
        token = self.current
        if token.kind == "number":
            self.advance()
            return float(token.text)
        if token.kind == "ident":
            self.advance()
            return self.call(token)
        if token.kind == "lparen":
            self.advance()
            value = self.expr()
            self.expect("rparen", "')'")
            return value
        raise ParseError(
            token.position, f"expected a value, found {token.text or 'end of input'!r}"
        )

    def call(self, name_token: _Token) -> float:
        name = name_token.text
        self.expect("lparen", "'(' after function name")
        args = [self.expr()]
        while self.current.kind == "comma":
            self.advance()
            args.append(self.expr())
        self.expect("rparen", "')'")
        if name not in _FUNCTIONS:
            raise UnknownFunction(name)
        lo, hi = _FUNCTIONS[name]
        if len(args) < lo or (hi is not None and len(args) > hi):
            raise ParseError(
                name_token.position,
                f"{name} takes {lo if hi == lo else f'{lo}+'} argument(s), got {len(args)}",
            )
        return self.apply(name, args, name_token.position)

    @staticmethod
    def apply(name: str, args: list[float], position: int) -> float:
        try:
            if name == "sqrt":
                if args[0] < 0:
                    raise DomainError(f"sqrt of negative {args[0]} at position {position}")
                return math.sqrt(args[0])
            if name == "abs":
                return abs(args[0])
            if name == "min":
                return min(args)
            if name == "max":
                return max(args)
            if name == "sin":
                return math.sin(args[0])
            if name == "cos":
                return math.cos(args[0])
            if name == "tan":
                return math.tan(args[0])
            if name == "atan2":
                return math.atan2(args[0], args[1])
            if name == "pow":
                return math.pow(args[0], args[1])
        except DomainError:
            raise
        except (ValueError, OverflowError) as exc:
            raise DomainError(f"{name}{tuple(args)}: {exc}") from None
        raise UnknownFunction(name)


def calculator_eval(expression: str) -> float:
    """Evaluate `expression` under the module grammar to a 64-bit float.

    Raises:
        ParseError: Empty/oversized input or syntax violation.
        DivisionByZero: Division with a zero divisor.
        UnknownFunction: Call to a function outside the supported set.
        DomainError: Out-of-domain arguments or a non-finite result.
    """
    if not expression or not expression.strip():
        raise ParseError(0, "empty expression")
    if len(expression) > MAX_EXPRESSION_LENGTH:
        raise ParseError(
            MAX_EXPRESSION_LENGTH,
            f"expression exceeds {MAX_EXPRESSION_LENGTH} characters",
        )
    result = _Parser(_tokenize(expression)).parse()
    if not math.isfinite(result):
        raise DomainError("expression result is not finite")
    return result


def format_number(value: float) -> str:
    """Render a float the way observations report it: '14', '7.2', '0.5'.

    12 significant digits: enough to carry real precision, short enough
    to absorb last-bit noise (100 * 0.072 displays as 7.2).
    """
    if value == int(value) and abs(value) < 1e15:
        return str(int(value))
    return f"{value:.12g}"
