"""
Unit tests for the expression parser
"""
import pytest

from app.algebra import FIELD, gen, rational, to_text
from app.exceptions import ExpressionSyntaxError, UnknownSymbol
from app.parser import parse_expression, tokenize


class TestParseExpression:
    """Test parsing of rational expressions"""

    def test_deformation_coefficient(self):
        """Test the 9/2 deformation coefficient transcription"""
        x, beta = gen("x"), gen("beta")
        assert parse_expression("2/(2*x - 3*beta)") == 2 / (2 * x - 3 * beta)

    def test_quintic_head(self):
        x, t2 = gen("x"), gen("t2")
        assert parse_expression("x^5 + 3*t2*x^3") == x ** 5 + 3 * t2 * x ** 3

    def test_whitespace_insensitive(self):
        assert parse_expression(" x ^ 2-  beta ") == parse_expression("x^2-beta")

    def test_precedence(self):
        """Test that ^ binds tighter than unary minus, which binds tighter than *"""
        x = gen("x")
        assert parse_expression("-x^2") == -(x ** 2)
        assert parse_expression("2*x^2/4") == x ** 2 / 2
        assert parse_expression("1 - 2 - 3") == rational(-4)
        assert parse_expression("2^3^2") == rational(2 ** 9)

    def test_negative_exponent(self):
        x = gen("x")
        assert parse_expression("x^-2") == 1 / x ** 2
        assert parse_expression("x^(-3)") == 1 / x ** 3

    def test_rational_constant(self):
        assert parse_expression("1/2 + 1/3") == rational(5, 6)

    def test_jet_symbols(self):
        assert parse_expression("alpha_d4 - alpha_d1") == gen("alpha_d4") - gen("alpha_d1")

    def test_canonical_roundtrip(self):
        text = "(alpha^2 + 2*thetainf - 4*hbar)/(3*hbar)"
        value = parse_expression(text)
        assert parse_expression(to_text(value)) == value


class TestParseErrors:
    """Test parser error reporting"""

    def test_unclosed_parenthesis(self):
        with pytest.raises(ExpressionSyntaxError) as info:
            parse_expression("(x")
        assert info.value.position == 2

    def test_unknown_symbol(self):
        with pytest.raises(UnknownSymbol, match="zeta"):
            parse_expression("x + zeta")

    def test_bad_character(self):
        with pytest.raises(ExpressionSyntaxError) as info:
            parse_expression("x + $")
        assert info.value.position == 4

    def test_empty(self):
        with pytest.raises(ExpressionSyntaxError, match="empty"):
            parse_expression("   ")

    def test_trailing_token(self):
        with pytest.raises(ExpressionSyntaxError, match="unexpected token"):
            parse_expression("x y")

    def test_fractional_exponent(self):
        with pytest.raises(ExpressionSyntaxError, match="integer"):
            parse_expression("x^(1/3)")

    def test_division_by_zero(self):
        with pytest.raises(ExpressionSyntaxError, match="division by zero"):
            parse_expression("x/(beta - beta)")


class TestTokenize:
    """Test the tokenizer"""

    def test_positions(self):
        tokens = tokenize("q1 + 12")
        assert [(t.kind, t.text, t.position) for t in tokens] == [
            ("name", "q1", 0), ("op", "+", 3), ("number", "12", 5), ("end", "", 7),
        ]

    def test_zero_constant(self):
        assert parse_expression("0") == FIELD.zero
