"""
Unit tests for the Painlevé and quasi-Painlevé tests
"""
import pytest

from app.algebra import FIELD, free_symbols, gen
from app.exceptions import EmptyRange, InconsistentResonance, NoBalance, NotTriangular
from app.families import expand_quasi, family, published_ode, quasi_normalization
from app.golden import compare_series, load_series
from app.lax_models import builtin_model, hamilton_vector_field
from app.painleve import (
    PoleAnsatz,
    ResidualValuation,
    ScalarODE,
    expand_solution,
    find_leading_balances,
    jet_flow,
    jet_name,
    quasi_test,
    verify_solution,
)
from app.parser import parse_expression
from app.reduction import expand_family
from app.suite import corrupt_coefficient

P = parse_expression


def _piv_flow():
    return hamilton_vector_field(builtin_model("pIV"), 0)


class TestLeadingBalances:
    """Test the dominant-balance search"""

    def test_piv_balances(self):
        balances = find_leading_balances(_piv_flow(), "t1", exponent_range=(-2, 0))
        leading_q = {b.leading["q"] for b in balances}
        assert P("hbar") in leading_q
        assert P("-hbar") in leading_q

    def test_balances_are_singular(self):
        for ansatz in find_leading_balances(_piv_flow(), "t1", exponent_range=(-2, 0)):
            assert not ansatz.is_holomorphic

    def test_empty_range(self):
        with pytest.raises(EmptyRange):
            find_leading_balances(_piv_flow(), "t1", exponent_range=(1, 0))

    def test_linear_flow_has_no_poles(self):
        """Test hbar*u' = u, hbar*v' = -v: no singular balance"""
        flow = {"q1": gen("q1"), "q2": -gen("q2")}
        assert find_leading_balances(flow, "t1", exponent_range=(-3, 0)) == []

    def test_specializations_dropped(self):
        """Test hbar*u' = 0, hbar*v' = -hbar*v^2: u = c1 is free, u = 0 is its specialization"""
        flow = {"q1": FIELD.zero, "q2": -gen("hbar") * gen("q2") ** 2}
        balances = find_leading_balances(flow, "t1", exponent_range=(-2, 0), parameter_names=("c1",))
        assert len(balances) == 1
        assert balances[0].exponents == {"q1": 0, "q2": -1}
        assert balances[0].leading == {"q1": gen("c1"), "q2": FIELD.one}
        assert balances[0].parameters == ("alpha", "c1")

    @pytest.mark.slow
    def test_jet_system_has_no_integer_balance(self):
        flow = jet_flow(published_ode("gar92"))
        assert find_leading_balances(flow, "t2", point="b") == []


class TestExpansion:
    """Test order-by-order expansion about the movable pole"""

    def setup_method(self):
        """Setup test fixtures"""
        self.solution = expand_family(family("pIV"), order=6)

    def test_matches_golden(self):
        for v in ("q", "p"):
            assert compare_series(self.solution[v], load_series(f"pIV/{v}-series")) == []

    def test_parameters(self):
        assert self.solution.parameters == ("alpha", "beta")
        assert self.solution.parameter_count == 2

    def test_resonance_ledger(self):
        orders = [entry.order for entry in self.solution.ledger]
        assert orders == [-1, 3]
        assert self.solution.ledger[1].parameters == ("beta",)

    def test_residual_valuation(self):
        report = verify_solution(_piv_flow(), self.solution)
        assert all(r.passed for r in report.values())

    def test_residual_bound_is_last_exponent_minus_one(self):
        report = verify_solution(_piv_flow(), self.solution)
        for v, verdict in report.items():
            series = self.solution[v]
            assert verdict.required == series.exponent(series.order) - 1
            assert verdict.passed

    def test_corrupted_coefficient(self):
        corrupted = corrupt_coefficient(self.solution, "q", 1, FIELD.one)
        report = verify_solution(_piv_flow(), corrupted)
        assert not report["q"].passed
        assert report["q"].valuation == 0

    def test_unpinned_resonance_uses_names(self):
        sol = expand_solution(_piv_flow(), family("pIV").ansatz(), order=4, parameter_names=("gamma",))
        assert sol.parameters == ("alpha", "gamma")
        assert "gamma" in free_symbols(sol["q"].coefficient(2)) | free_symbols(sol["p"].coefficient(2))

    def test_missing_parameter_name(self):
        with pytest.raises(ValueError, match="order 3"):
            expand_solution(_piv_flow(), family("pIV").ansatz(), order=4)

    def test_inconsistent_resonance(self):
        """Test u'' = 6u^2 + t1^2: the resonance at order 6 is obstructed"""
        ode = ScalarODE.from_relation(P("alpha_d2 - 6*alpha^2 - t1^2"), "alpha", "t1", 2)
        ansatz = PoleAnsatz(
            time="t1", point=gen("b"), exponents={"alpha": -2, "alpha_d1": -3},
            leading={"alpha": FIELD.one, "alpha_d1": -2 * FIELD.one}, parameters=("b",),
        )
        with pytest.raises(InconsistentResonance) as info:
            expand_solution(jet_flow(ode), ansatz, order=6)
        assert info.value.order == 6

    def test_consistent_resonance(self):
        """Test u'' = 6u^2 + t1: the resonance at order 6 is free"""
        ode = ScalarODE.from_relation(P("alpha_d2 - 6*alpha^2 - t1"), "alpha", "t1", 2)
        ansatz = PoleAnsatz(
            time="t1", point=gen("b"), exponents={"alpha": -2, "alpha_d1": -3},
            leading={"alpha": FIELD.one, "alpha_d1": -2 * FIELD.one}, parameters=("b",),
        )
        sol = expand_solution(jet_flow(ode), ansatz, order=7, parameter_names=("c1",))
        assert sol.parameters == ("b", "c1")
        assert sol["alpha"].coefficient(2) == P("-b/10")


class TestResidualValuation:
    """Test residual verdicts"""

    def test_exact_residual_passes(self):
        assert ResidualValuation(valuation=None, required=3).passed

    def test_low_valuation_fails(self):
        assert not ResidualValuation(valuation=0, required=1).passed


class TestScalarODE:
    """Test jet systems of scalar ODEs"""

    def test_from_relation(self):
        ode = ScalarODE.from_relation(P("hbar^2*alpha_d2 - 6*alpha^2 - t2"), "alpha", "t2", 2)
        assert ode.highest == P("(6*alpha^2 + t2)/hbar^2")

    def test_not_triangular(self):
        with pytest.raises(NotTriangular):
            ScalarODE.from_relation(P("alpha_d1 - t2"), "alpha", "t2", 4)

    def test_jet_flow(self):
        ode = ScalarODE.from_relation(P("alpha_d2 - alpha"), "alpha", "t2", 2)
        flow = jet_flow(ode)
        assert flow == {"alpha": P("hbar*alpha_d1"), "alpha_d1": P("hbar*alpha")}

    def test_jet_name(self):
        assert jet_name("alpha", 0) == "alpha"
        assert jet_name("alpha", 3) == "alpha_d3"


class TestQuasiSearch:
    """Test quasi-Painlevé expansions driven by the balance search"""

    def test_search_then_expand(self):
        """Test u'' = 6u^2 + t1 found by the search: one free resonance"""
        ode = ScalarODE.from_relation(P("alpha_d2 - 6*alpha^2 - t1"), "alpha", "t1", 2)
        sol = quasi_test(ode, ramification=1, order=7, parameter_names=("c1",), exponent_range=(-3, 0))
        assert sol.ansatz.exponents == {"alpha": -2, "alpha_d1": -3}
        assert sol.ansatz.leading == {"alpha": FIELD.one, "alpha_d1": -2 * FIELD.one}
        assert sol.parameters == ("b", "c1")
        assert sol["alpha"].coefficient(2) == P("-b/10")

    def test_no_balance(self):
        ode = ScalarODE.from_relation(P("alpha_d2 - alpha"), "alpha", "t2", 2)
        with pytest.raises(NoBalance):
            quasi_test(ode, order=2, exponent_range=(-6, 0))


# leading terms the search has to reproduce, keyed by power of s
QUASI_LEADING = {
    "gar92": {
        "alpha": (0, "c1"),
        "alpha_d1": (-2, "-hbar^2"),
        "alpha_d2": (-5, "2*hbar^4"),
        "alpha_d3": (-8, "-10*hbar^6"),
    },
    "gar5232": {
        "alpha": (0, "c1"),
        "alpha_d1": (-2, "-hbar^2/b"),
        "alpha_d2": (-5, "2*hbar^4/b^2"),
        "alpha_d3": (-8, "-10*hbar^6/b^3"),
    },
}


@pytest.mark.slow
class TestQuasiPainleve:
    """Test ramified expansions of the fourth-order ODEs"""

    @pytest.mark.parametrize("model", ["gar92", "gar5232"])
    def test_searched_balance(self, model):
        norm = quasi_normalization(model)
        balances = find_leading_balances(
            jet_flow(published_ode(model)), "t2", ramification=3, point="b",
            scale=P(norm.scale), parameter_names=("c1",),
        )
        assert len(balances) == 1
        expected = QUASI_LEADING[model]
        assert balances[0].exponents == {v: e for v, (e, _) in expected.items()}
        assert balances[0].leading == {v: P(c) for v, (_, c) in expected.items()}
        assert balances[0].parameters == ("b", "c1")

    @pytest.mark.parametrize("model", ["gar92", "gar5232"])
    def test_puiseux_series(self, model):
        sol = expand_quasi(model)
        assert sol.parameters == ("b", "c1", "c2", "c3")
        assert sol.ansatz.ramification == 3
        assert compare_series(sol["alpha"], load_series(f"{model}/puiseux-series")) == []

    @pytest.mark.parametrize("model", ["gar92", "gar5232"])
    def test_residual_valuation(self, model):
        sol = expand_quasi(model)
        report = verify_solution(jet_flow(published_ode(model)), sol)
        assert all(r.passed for r in report.values())
