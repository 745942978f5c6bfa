"""Unit tests for the expression language, system models and built-ins."""

import numpy as np
import pytest

from image_set_filter.exceptions import (
    ArityError,
    ConfigurationError,
    DimensionMismatchError,
    ExpressionSyntaxError,
    ModelDomainError,
    ModelError,
    UnknownIdentifierError,
)
from image_set_filter.geometry import Box
from image_set_filter.systems import (
    BinaryOp,
    Call,
    Model,
    Number,
    UnaryOp,
    Variable,
    builtin_model,
    evaluate,
    parse_expression,
    to_text,
)


def value_of(text: str, **variables: float) -> float:
    """Evaluate an expression at a single point."""
    env = {name: np.array([value]) for name, value in variables.items()}
    result = evaluate(parse_expression(text), env, 1)
    return float(result.values[0])


class TestParser:
    """Test precedence, associativity and the tree shape."""

    def test_multiplication_binds_tighter(self):
        """1 + 2 * 3 is 1 + (2 * 3)."""
        tree = parse_expression("1 + 2 * 3")

        assert tree == BinaryOp(
            "+", Number(1.0), BinaryOp("*", Number(2.0), Number(3.0))
        )

    def test_left_associative_subtraction(self):
        """8 - 3 - 2 is (8 - 3) - 2."""
        assert value_of("8 - 3 - 2") == 3.0
        assert value_of("12 / 3 / 2") == 2.0

    def test_right_associative_power(self):
        """2^3^2 is 2^(3^2)."""
        assert value_of("2^3^2") == 512.0

    def test_unary_minus_below_power(self):
        """-x1^2 is -(x1^2)."""
        tree = parse_expression("-x1^2")

        assert tree == UnaryOp("-", BinaryOp("^", Variable("x", 1), Number(2.0)))
        assert value_of("-x1^2", x1=3.0) == -9.0

    def test_negative_exponent(self):
        """The exponent may carry a sign."""
        assert value_of("2^-1") == 0.5

    def test_functions_and_constants(self):
        """Calls and pi."""
        tree = parse_expression("sin(pi * w2)")

        assert isinstance(tree, Call)
        assert tree.function == "sin"
        assert value_of("cos(pi)") == pytest.approx(-1.0, abs=1e-15)
        assert value_of("log(exp(2))") == pytest.approx(2.0, abs=1e-15)

    def test_scientific_notation(self):
        """Numbers accept exponents."""
        assert value_of("1.5e-3 * 2") == pytest.approx(3e-3)

    @pytest.mark.parametrize(
        "text",
        [
            "sin(x2) + 3*cos(x2) + w1",
            "3*x1 - 20*log(1 + x2) + w2",
            "-0.7*x2 + 0.1*x2^2 + 0.1*x1*x2 + 0.1*exp(x1) + w1",
            "-(x1 - 2)^-3 / abs(w1)",
            "2^3^-x1",
        ],
    )
    def test_to_text_parses_back(self, text):
        """Printed text parses to the same tree."""
        tree = parse_expression(text)

        assert parse_expression(to_text(tree)) == tree


class TestParserErrors:
    """Test error positions and the reported expectations."""

    def test_missing_operand(self):
        """A trailing operator reports the end of input."""
        with pytest.raises(ExpressionSyntaxError) as excinfo:
            parse_expression("x1 +")

        assert (excinfo.value.line, excinfo.value.column) == (1, 5)
        assert "number" in excinfo.value.expected
        assert "end of input" in str(excinfo.value)

    def test_position_on_later_line(self):
        """Line and column count from 1 after newlines."""
        with pytest.raises(ExpressionSyntaxError) as excinfo:
            parse_expression("x1 +\n  * 2")

        assert (excinfo.value.line, excinfo.value.column) == (2, 3)

    def test_unbalanced_parenthesis(self):
        """A missing ')' is reported."""
        with pytest.raises(ExpressionSyntaxError, match=r"Expected '\)'"):
            parse_expression("(x1 + 2")

    def test_stray_character(self):
        """Characters outside the grammar are rejected where they occur."""
        with pytest.raises(ExpressionSyntaxError) as excinfo:
            parse_expression("x1 $ 2")

        assert excinfo.value.column == 4

    def test_trailing_tokens(self):
        """Two operands without an operator."""
        with pytest.raises(ExpressionSyntaxError):
            parse_expression("x1 x2")

    def test_unknown_variable(self):
        """Only x<k>, w<k> and pi are names."""
        with pytest.raises(UnknownIdentifierError):
            parse_expression("x1 + y")
        with pytest.raises(UnknownIdentifierError):
            parse_expression("x0")

    def test_unknown_function(self):
        """The expectation lists the known functions."""
        with pytest.raises(UnknownIdentifierError) as excinfo:
            parse_expression("tanh(x1)")

        assert "sin" in excinfo.value.expected

    def test_function_arity(self):
        """Functions take exactly one argument."""
        with pytest.raises(ArityError):
            parse_expression("sin(x1, x2)")

    def test_function_without_call(self):
        """A function name alone is not an operand."""
        with pytest.raises(ExpressionSyntaxError):
            parse_expression("sin + 1")


class TestEvaluation:
    """Test vectorized evaluation and domain reporting."""

    def test_vectorized(self):
        """One value per sample."""
        env = {"x1": np.array([0.0, 1.0, 2.0])}
        result = evaluate(parse_expression("x1^2 + 1"), env, 3)

        np.testing.assert_array_equal(result.values, [1.0, 2.0, 5.0])
        assert result.ok

    def test_log_domain(self):
        """Nonpositive log arguments are invalid and named."""
        env = {"x1": np.array([1.0, 0.0, -1.0])}
        result = evaluate(parse_expression("2 * log(x1)"), env, 3)

        assert result.valid.tolist() == [True, False, False]
        assert np.isnan(result.values[1])
        assert isinstance(result.culprit, Call)

    def test_division_by_zero(self):
        """x / 0 is a domain error, not inf."""
        env = {"x1": np.array([0.0, 2.0])}
        result = evaluate(parse_expression("1 / x1"), env, 2)

        assert result.valid.tolist() == [False, True]
        assert result.values[1] == 0.5

    def test_integer_power_of_negative_base(self):
        """Integer exponents accept any base, fractional ones do not."""
        assert value_of("x1^3", x1=-2.0) == -8.0
        env = {"x1": np.array([-1.0])}
        assert not evaluate(parse_expression("x1^0.5"), env, 1).ok

    def test_overflow_is_invalid(self):
        """exp overflow does not leak inf."""
        env = {"x1": np.array([1000.0])}
        assert not evaluate(parse_expression("exp(x1)"), env, 1).ok


class TestModel:
    """Test model construction and evaluation."""

    def test_with_noise_boxes(self, abrc08_model):
        """Replacing V keeps W and the dynamics."""
        wider = Box.from_pairs([[-1.0, 1.0]])
        model = abrc08_model.with_noise_boxes(measurement=wider)

        assert model.measurement_box is wider
        assert model.noise_box is abrc08_model.noise_box
        assert model.dynamics == abrc08_model.dynamics

    def test_with_initial_box(self, sysf_model):
        """Replacing X keeps the dynamics and the noise box."""
        narrow = Box.from_pairs([[0.0, 0.5], [0.0, 0.5]])
        model = sysf_model.with_initial_box(narrow)

        assert model.initial_box is narrow
        assert model.noise_box is sysf_model.noise_box
        assert model.dynamics == sysf_model.dynamics
        assert sysf_model.initial_box is not narrow

    def test_dynamics_count_checked(self):
        """n expressions for n states."""
        with pytest.raises(ModelError):
            Model(name="bad", n=2, n_w=0, n_y=0, dynamics=("x1",))

    def test_variables_checked(self):
        """f may not use x3 in R^2, g may not use noise."""
        with pytest.raises(ModelError):
            Model(name="bad", n=2, n_w=0, n_y=0, dynamics=("x1", "x3"))
        with pytest.raises(ModelError):
            Model(
                name="bad",
                n=1,
                n_w=1,
                n_y=1,
                dynamics=("x1 + w1",),
                measurement=("x1 + w1",),
                noise_box=Box.from_pairs([[-1, 1]]),
            )

    def test_noise_needs_box(self):
        """n_w > 0 requires W."""
        with pytest.raises(ModelError):
            Model(name="bad", n=1, n_w=1, n_y=0, dynamics=("x1 + w1",))

    def test_box_dimension_checked(self):
        """X0 must live in R^n."""
        with pytest.raises(DimensionMismatchError):
            Model(
                name="bad",
                n=2,
                n_w=0,
                n_y=0,
                dynamics=("x1", "x2"),
                initial_box=Box.from_pairs([[0, 1]]),
            )

    def test_propagate_needs_noise(self, sysf_model):
        """Noisy models refuse noise-free propagation."""
        with pytest.raises(DimensionMismatchError):
            sysf_model.propagate(np.zeros((3, 2)))

    def test_domain_error_names_component(self, sysf_model):
        """log(1 + x2) fails for x2 < -1 in the second component."""
        with pytest.raises(ModelDomainError) as excinfo:
            sysf_model.eval_dynamics([0.0, -1.5], [0.0, 0.0])

        assert excinfo.value.component == "f2"
        assert "log" in excinfo.value.subexpression

    def test_batch_reports_first_failure(self, sysf_model):
        """The failing sample index is the first invalid row."""
        states = np.array([[0.0, 0.0], [0.0, -2.0], [0.0, -3.0]])
        result = sysf_model.propagate(states, np.zeros((3, 2)))

        assert result.valid.tolist() == [True, False, False]
        assert result.sample_index == 1
        assert result.n_errors == 2

    def test_to_dict(self, abrc08_model):
        """Model file representation keeps boxes."""
        data = abrc08_model.to_dict()

        assert data["n_y"] == 1
        assert data["V"] == {"lower": [-0.2], "upper": [0.2]}


class TestBuiltins:
    """Test the built-in systems against their closed forms."""

    @pytest.fixture
    def points(self, rng):
        return rng.uniform(0.0, 1.0, size=(20, 2)), rng.uniform(-0.2, 0.2, (20, 2))

    def test_sysf(self, sysf_model, points):
        """sin(x2) + 3 cos(x2) + w1 and 3 x1 - 20 log(1 + x2) + w2."""
        x, w = points
        expected = np.column_stack(
            [
                np.sin(x[:, 1]) + 3 * np.cos(x[:, 1]) + w[:, 0],
                3 * x[:, 0] - 20 * np.log(1 + x[:, 1]) + w[:, 1],
            ]
        )
        result = sysf_model.propagate(x, w)

        np.testing.assert_allclose(result.values, expected, rtol=0.0, atol=1e-12)

    def test_abrc08(self, abrc08_model, points):
        """Polynomial-exponential dynamics and y = x1 + x2."""
        x, w = points
        x1, x2 = x[:, 0], x[:, 1]
        expected = np.column_stack(
            [
                -0.7 * x2 + 0.1 * x2**2 + 0.1 * x1 * x2 + 0.1 * np.exp(x1) + w[:, 0],
                x1 + x2 - 0.1 * x1**2 + 0.2 * x1 * x2 + w[:, 1],
            ]
        )

        np.testing.assert_allclose(
            abrc08_model.propagate(x, w).values, expected, rtol=0.0, atol=1e-12
        )
        np.testing.assert_allclose(
            abrc08_model.measure(x).values[:, 0], x1 + x2, atol=1e-12
        )

    def test_identity(self, identity_model):
        """x+ = x."""
        x = np.array([[0.25, 0.75]])

        np.testing.assert_array_equal(identity_model.eval_dynamics(x), [0.25, 0.75])

    def test_abrc08_single_point(self, abrc08_model):
        """Single-point dynamics and measurement at x = (1, 2), w = 0."""
        x_next = abrc08_model.eval_dynamics([1.0, 2.0], [0.0, 0.0])

        expected = [
            -1.4 + 0.4 + 0.2 + 0.1 * np.exp(1.0),
            3.0 - 0.1 + 0.4,
        ]
        np.testing.assert_allclose(x_next, expected, atol=1e-12)
        np.testing.assert_allclose(abrc08_model.eval_measurement([1.0, 2.0]), [3.0])

    def test_lookup_is_case_insensitive(self):
        """Names match regardless of case."""
        assert builtin_model("SYSF").name == "sysF"

    def test_unknown_builtin(self):
        """Unknown names list the available systems."""
        with pytest.raises(ConfigurationError, match="abrc08"):
            builtin_model("lorenz")
