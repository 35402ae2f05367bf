"""Tests for the function expression grammar."""

import numpy as np
import pytest

from logpot.errors import ExpressionError
from logpot.expressions import parse_function


class TestParseFunction:
    """Accepted expressions and their evaluators."""

    def test_simple_pole(self):
        f = parse_function("1/(z-2)")
        assert f(0j) == pytest.approx(-0.5)
        assert np.allclose(f.singularities, [2.0])

    def test_implicit_multiplication_after_number(self):
        f = parse_function("2z + 3j")
        assert f(1.0 + 0j) == pytest.approx(2.0 + 3.0j)
        assert parse_function("2(z+1)")(1.0 + 0j) == pytest.approx(4.0)

    def test_caret_is_power(self):
        f = parse_function("z^2 + 1")
        assert f(1j) == pytest.approx(0.0)
        assert f.singularities.size == 0

    def test_exponential(self):
        f = parse_function("exp(z)")
        assert f(0j) == pytest.approx(1.0)
        assert f.singularities.size == 0

    def test_two_poles(self):
        f = parse_function("1/((z-1.5)*(z-3))")
        assert np.allclose(np.sort(f.singularities.real), [1.5, 3.0])

    def test_constant_broadcasts(self):
        values = parse_function("5")(np.array([0j, 1j, 2j]))
        assert values.shape == (3,)
        assert np.all(values == 5.0)

    def test_keeps_source(self):
        assert parse_function("z + I").source == "z + I"


class TestRejected:
    """Text outside the grammar."""

    @pytest.mark.parametrize(
        "text, message",
        [
            ("sin(z)", "unknown name"),
            ("z $ 2", "unexpected character"),
            ("", "empty"),
            ("   ", "empty"),
        ],
    )
    def test_messages(self, text, message):
        with pytest.raises(ExpressionError, match=message):
            parse_function(text)

    @pytest.mark.parametrize("text", ["z ** 0.5", "1/(z-", "1/0", "z z"])
    def test_rejected(self, text):
        with pytest.raises(ExpressionError):
            parse_function(text)
