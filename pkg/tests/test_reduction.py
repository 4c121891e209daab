"""
Unit tests for singularity reductions, secondary flows and curves
"""
import pytest

from app.algebra import FIELD, free_symbols, gen, substitute
from app.config import settings
from app.exceptions import (
    GradingError,
    Inconsistent,
    NotTriangular,
    SampleOnDiscriminant,
    SquarefreeFailure,
)
from app.families import family, published_ode
from app.golden import compare_table, load_expression, load_table
from app.lax_models import builtin_model
from app.parser import parse_expression
from app.reduction import (
    MIRROR_SYSTEM,
    CurveSpec,
    FlowSystem,
    ReductionResult,
    classical_limit_curve,
    derive_secondary_flow,
    eliminate_flow_system,
    expand_family,
    genus_check,
    hbar_split,
    mirror_initial_value,
    mirror_transform_check,
    reduce_family,
    relation_multiplier,
    target_derivatives,
    verify_secondary_flow,
)

P = parse_expression


def _result(r0: str) -> ReductionResult:
    value = P(r0)
    return ReductionResult(
        model="gar92", family="main", limit=value, parts=(value, FIELD.zero, FIELD.zero),
        deformation={}, apparent_locus=None, parameters=(),
    )


class TestHbarSplit:
    """Test the hbar grading of a reduced potential"""

    def test_split(self):
        assert hbar_split(P("x^2 + hbar*x/beta + 3*hbar^2")) == (P("x^2"), P("x/beta"), P("3"))

    def test_missing_orders_are_zero(self):
        assert hbar_split(P("x")) == (P("x"), FIELD.zero, FIELD.zero)

    def test_cubic_in_hbar(self):
        with pytest.raises(GradingError):
            hbar_split(P("hbar^3*x"))

    def test_hbar_in_denominator(self):
        with pytest.raises(GradingError):
            hbar_split(P("x/hbar"))


class TestPIVReduction:
    """Test the reduction of the fourth Painlevé equation at its pole"""

    def setup_method(self):
        """Setup test fixtures"""
        self.result = reduce_family("pIV", order=10)

    def test_limit(self):
        assert self.result.limit == load_expression("pIV/potential-limit")

    def test_parameters(self):
        assert self.result.parameters == ("alpha", "beta")

    def test_no_other_time(self):
        assert self.result.deformation == {}
        assert self.result.apparent_locus is None

    def test_genus(self):
        curve = classical_limit_curve(self.result)
        assert curve.cleared_power == 2
        assert genus_check(curve, {"alpha": 1, "beta": 2, "theta0": 3, "thetainf": 5}) == 1


@pytest.mark.slow
class TestGarnierReduction:
    """Test reductions of the two-time models against the stored displays"""

    @pytest.mark.parametrize("model,root", [("gar92", "3*beta/2"), ("gar5232", "beta")])
    def test_main_family(self, model, root):
        result = reduce_family(model)
        names = ("potential-classical", "potential-first-order", "potential-second-order")
        for name, part in zip(names, result.parts):
            assert part == load_expression(f"{model}/{name}"), name
        assert result.deformation["t2"] == load_expression(f"{model}/deformation")
        assert not substitute(FIELD.new(result.apparent_locus), {"x": P(root)})

    @pytest.mark.parametrize("model", ["gar92", "gar5232"])
    def test_secondary_flow(self, model):
        sol = expand_family(family(model), settings.reduction_order)
        derived = derive_secondary_flow(builtin_model(model), sol)
        assert compare_table(derived.rhs, load_table(f"{model}/secondary-flow")) == []
        assert not verify_secondary_flow(reduce_family(model), derived)

    def test_alternative_family_has_no_flow(self):
        sol = expand_family(family("gar92", "alternative"), settings.reduction_order)
        with pytest.raises(Inconsistent):
            derive_secondary_flow(builtin_model("gar92"), sol)

    def test_alternative_deformation_vanishes(self):
        result = reduce_family("gar5232", "alternative")
        assert not result.deformation["t2"]

    def test_mirror_initial_value(self):
        values = mirror_initial_value(expand_family(family("gar5232"), order=8))
        assert values[:3] == (FIELD.zero, P("beta"), P("-4*gamma - hbar"))


class TestElimination:
    """Test triangular elimination of a flow down to one scalar ODE"""

    def test_cyclic_flow(self):
        """Test alpha' = beta, beta' = gamma, gamma' = delta, delta' = alpha"""
        flow = FlowSystem.from_texts({
            "alpha": "hbar*beta", "beta": "hbar*gamma", "gamma": "hbar*delta", "delta": "hbar*alpha",
        })
        elimination = eliminate_flow_system(flow)
        assert elimination.substitutions == {
            "beta": P("alpha_d1"), "gamma": P("alpha_d2"), "delta": P("alpha_d3"),
        }
        assert elimination.divisors == ("1", "1", "1")
        assert elimination.ode().highest == P("alpha")

    def test_division_is_recorded(self):
        flow = FlowSystem.from_texts({
            "alpha": "hbar*t2*beta", "beta": "hbar*gamma", "gamma": "hbar*delta", "delta": "0",
        })
        elimination = eliminate_flow_system(flow)
        assert elimination.divisors[0] == "t2"

    def test_target_derivatives(self):
        flow = FlowSystem.from_texts({"alpha": "hbar*beta", "beta": "hbar*t2"})
        assert target_derivatives(flow, "alpha", 3) == [P("beta"), P("t2"), P("1")]

    def test_missing_parameter(self):
        flow = FlowSystem.from_texts({"alpha": "hbar*alpha", "beta": "hbar*beta"})
        with pytest.raises(NotTriangular):
            eliminate_flow_system(flow, order=2)

    def test_nonlinear_step(self):
        flow = FlowSystem.from_texts({"alpha": "hbar*beta^2", "beta": "hbar*alpha"})
        with pytest.raises(NotTriangular, match="not linear"):
            eliminate_flow_system(flow, order=2)

    @pytest.mark.slow
    @pytest.mark.parametrize("model,multiplier", [("gar92", "1"), ("gar5232", "t2^3*alpha_d1^2")])
    def test_published_ode(self, model, multiplier):
        elimination = eliminate_flow_system(FlowSystem("t2", load_table(f"{model}/secondary-flow")))
        found = relation_multiplier(elimination.relation, published_ode(model).relation)
        assert found is not None
        assert not free_symbols(found / P(multiplier))

    def test_relation_multiplier(self):
        assert relation_multiplier(P("t2*alpha + t2"), P("alpha + 1")) == P("t2")
        assert relation_multiplier(P("alpha^2 - 1"), P("alpha + 1")) is None


class TestCurves:
    """Test classical-limit curves and their genus"""

    def test_cleared_power_is_even(self):
        curve = classical_limit_curve(_result("(x^3 + 1)/x^3"))
        assert curve.cleared_power == 4
        assert curve.f == P("x^4 + x")
        assert curve.degree == 4

    def test_polynomial_potential(self):
        curve = classical_limit_curve(_result("x^5 + t2*x - beta"))
        assert curve.cleared_power == 0
        assert genus_check(curve, {"t2": 1, "beta": 1}) == 2

    def test_non_monomial_denominator(self):
        with pytest.raises(GradingError):
            classical_limit_curve(_result("1/(x - 1)"))

    def test_squarefree_failure(self):
        with pytest.raises(SquarefreeFailure):
            genus_check(CurveSpec(gen("x") ** 2, 0), {})

    def test_sample_on_discriminant(self):
        with pytest.raises(SampleOnDiscriminant, match="repeated root"):
            genus_check(CurveSpec(P("x^3 - beta"), 0), {"beta": 0})

    def test_leading_coefficient_vanishes(self):
        with pytest.raises(SampleOnDiscriminant, match="leading"):
            genus_check(CurveSpec(P("beta*x^3 + x + 1"), 0), {"beta": 0})

    def test_unassigned_sample(self):
        with pytest.raises(ValueError, match="beta"):
            genus_check(CurveSpec(P("x^3 - beta"), 0), {})


class TestMirror:
    """Test the coordinate change regularizing the 5/2+3/2 pole"""

    def test_transformed_flow(self):
        assert not any(mirror_transform_check())

    def test_dropped_term_is_detected(self):
        system = dict(MIRROR_SYSTEM, xi3="4*t1*xi2 - 8*xi2^2 + 4*xi1*xi2*xi3 - 8*xi1^2*xi2*xi4")
        residuals = mirror_transform_check(system)
        assert [bool(r) for r in residuals] == [False, False, True, False]
