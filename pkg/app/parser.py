"""
Precedence-climbing parser for rational expressions over the symbol registry.

Grammar: identifiers, non-negative integers, ``+ - * / ^`` and parentheses.
Binding power, loosest first: ``+ -``, ``* /``, unary ``-``, ``^`` (right
associative). ``^`` takes an integer exponent, which may itself be negated.
"""
import logging
import re
from dataclasses import dataclass
from typing import List

from .algebra import FIELD, RatFunc, gen, power
from .exceptions import DivisionByZero, ExpressionSyntaxError

logger = logging.getLogger(__name__)

_TOKEN = re.compile(r"\s*(?:(?P<number>\d+)|(?P<name>[A-Za-z_][A-Za-z0-9_]*)|(?P<op>[-+*/^()]))")

# Operator -> (binding power, right associative)
BINARY_OPERATORS = {
    "+": (1, False),
    "-": (1, False),
    "*": (2, False),
    "/": (2, False),
    "^": (4, True),
}
UNARY_MINUS_POWER = 3


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    position: int


def tokenize(text: str) -> List[Token]:
    """Split ``text`` into tokens; the final token marks the end of input"""
    tokens = []
    position = 0
    while position < len(text):
        if text[position:].strip() == "":
            break
        match = _TOKEN.match(text, position)
        if match is None:
            start = position + (len(text[position:]) - len(text[position:].lstrip()))
            raise ExpressionSyntaxError(f"unexpected character {text[start]!r}", start)
        kind = match.lastgroup
        tokens.append(Token(kind, match.group(kind), match.start(kind)))
        position = match.end()
    tokens.append(Token("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.tokens = tokenize(text)
        self.index = 0

    def peek(self) -> Token:
        return self.tokens[self.index]

    def advance(self) -> Token:
        token = self.tokens[self.index]
        self.index += 1
        return token

    def expect(self, text: str) -> Token:
        token = self.peek()
        if token.text != text or token.kind != "op":
            found = "end of input" if token.kind == "end" else repr(token.text)
            raise ExpressionSyntaxError(f"expected {text!r}, found {found}", token.position)
        return self.advance()

    def atom(self) -> RatFunc:
        token = self.advance()
        if token.kind == "number":
            return FIELD(int(token.text))
        if token.kind == "name":
            return gen(token.text)
        if token.kind == "op" and token.text == "(":
            value = self.expression(0)
            self.expect(")")
            return value
        if token.kind == "op" and token.text == "-":
            return -self.expression(UNARY_MINUS_POWER)
        if token.kind == "end":
            raise ExpressionSyntaxError("unexpected end of input", token.position)
        raise ExpressionSyntaxError(f"unexpected token {token.text!r}", token.position)

    def exponent(self) -> int:
        token = self.peek()
        value = self.expression(BINARY_OPERATORS["^"][0])
        if not value.denom.is_ground or not value.numer.is_ground or value.denom.LC != 1:
            raise ExpressionSyntaxError("exponent must be an integer", token.position)
        return int(value.numer.LC) if value.numer else 0

    def expression(self, min_power: int) -> RatFunc:
        left = self.atom()
        while True:
            token = self.peek()
            if token.kind != "op" or token.text not in BINARY_OPERATORS:
                return left
            binding, right_assoc = BINARY_OPERATORS[token.text]
            if binding < min_power:
                return left
            self.advance()
            if token.text == "^":
                left = power(left, self.exponent())
                continue
            right = self.expression(binding if right_assoc else binding + 1)
            if token.text == "+":
                left = left + right
            elif token.text == "-":
                left = left - right
            elif token.text == "*":
                left = left * right
            else:
                if not right:
                    raise ExpressionSyntaxError("division by zero", token.position)
                left = left / right


def parse_expression(text: str) -> RatFunc:
    """Parse ``text`` into a canonical rational function.

    Args:
        text: expression such as ``"2/(2*x - 3*beta)"``

    Returns:
        RatFunc: the exact value

    Raises:
        ExpressionSyntaxError: malformed input, with the 0-based offset
        UnknownSymbol: an identifier outside the registry
    """
    parser = _Parser(text)
    if parser.peek().kind == "end":
        raise ExpressionSyntaxError("empty expression", parser.peek().position)
    try:
        value = parser.expression(0)
    except DivisionByZero as exc:
        raise ExpressionSyntaxError(str(exc), parser.peek().position) from None
    token = parser.peek()
    if token.kind != "end":
        raise ExpressionSyntaxError(f"unexpected token {token.text!r}", token.position)
    return value
