"""
Unit tests for the built-in isomonodromy models
"""
from dataclasses import replace

import pytest

from app.algebra import FIELD, degree_in, differentiate, exact_divide, gen, multipoly_gcd, split_by_degree
from app.exceptions import L12IdenticallyZero, UnknownModel
from app.lax_models import (
    builtin_model,
    check_matrix_compatibility,
    check_scalar_compatibility,
    eliminate_second_component,
    flow_derivative,
    gauge_potential,
    hamilton_vector_field,
    matrix,
    model_to_dict,
    schrodinger_from_lax,
    traceless_potential,
)
from app.parser import parse_expression

P = parse_expression


def _dx(f):
    return differentiate(f, "x")


class TestBuiltinModels:
    """Test model tables"""

    def test_unknown_model(self):
        with pytest.raises(UnknownModel, match="gar7"):
            builtin_model("gar7")

    def test_garnier_shape(self):
        m = builtin_model("gar92")
        assert m.times == ("t1", "t2")
        assert m.canonical == ("q1", "q2", "p1", "p2")
        assert m.lax is not None and len(m.deformations) == 2

    def test_piv_scalar_form(self):
        m = builtin_model("pIV")
        assert m.lax is None
        assert m.constants == ("theta0", "thetainf")

    def test_time_index(self):
        m = builtin_model("gar5232")
        assert m.time_index("t2") == 1
        with pytest.raises(UnknownModel):
            m.time_index("t3")

    def test_dump(self):
        dump = model_to_dict(builtin_model("gar5232"))
        assert dump["name"] == "gar5232"
        assert len(dump["hamiltonians"]) == 2
        assert len(dump["lax"]) == 2 and len(dump["lax"][0]) == 2
        assert "potential" in model_to_dict(builtin_model("pIV"))


class TestFlows:
    """Test Hamilton vector fields and total derivatives"""

    def test_hamilton_vector_field(self):
        m = builtin_model("gar92")
        flow = hamilton_vector_field(m, 0)
        assert flow["q2"] == P("3*p1^2 + 2*p2 + t2")
        assert flow["p1"] == P("2*q2")

    def test_flow_derivative(self):
        """Test d/dt of a parameter function along hbar*dalpha/dt = c"""
        flow = {"alpha": P("-3*beta*hbar/2"), "beta": P("-12*gamma")}
        value = flow_derivative(P("alpha*beta + t2"), "t2", flow)
        assert value == P("-3*beta^2/2 - 12*alpha*gamma/hbar + 1")


class TestCompatibility:
    """Test zero-curvature and scalar compatibility"""

    @pytest.mark.slow
    @pytest.mark.parametrize("model", ["gar92", "gar5232"])
    @pytest.mark.parametrize("j", [0, 1])
    def test_matrix_compatibility(self, model, j):
        residual = check_matrix_compatibility(builtin_model(model), j)
        assert all(not e for row in residual for e in row)

    def test_matrix_compatibility_detects_wrong_hamiltonian(self):
        m = builtin_model("gar92")
        wrong = m.hamiltonians[0] + gen("q1")
        residual = check_matrix_compatibility(m, 0, wrong)
        assert any(e for row in residual for e in row)

    def test_scalar_form_has_no_lax(self):
        with pytest.raises(L12IdenticallyZero):
            check_matrix_compatibility(builtin_model("pIV"), 0)

    def test_piv_scalar_compatibility(self):
        m = builtin_model("pIV")
        residual = check_scalar_compatibility(
            m.potential, m.deformation_coefficients[0], hamilton_vector_field(m, 0), "t1"
        )
        assert not residual


class TestScalarReduction:
    """Test elimination of the second component"""

    def test_diagonal_free_system(self):
        """Test L = [[0, 1], [Q, 0]]: psi'' = Q psi / hbar^2"""
        q = P("x^2 + beta")
        first, zeroth = eliminate_second_component(FIELD.zero, FIELD.one, q, FIELD.zero, _dx)
        assert not first
        assert zeroth == -q

    def test_printed_first_order_discrepancy(self):
        data = schrodinger_from_lax(builtin_model("gar92"))
        assert data.printed_agreement == {"first_order": False, "zeroth_order": True}

    def test_deformation_coefficient(self):
        data = schrodinger_from_lax(builtin_model("gar92"))
        l12 = data.apparent_locus
        assert data.deformation_coefficients["t1"] == P("-x - 2*p1") / l12

    def test_vanishing_l12(self):
        m = builtin_model("gar92")
        broken = replace(m, lax=matrix([[gen("x"), FIELD.zero], [FIELD.one, -gen("x")]]))
        with pytest.raises(L12IdenticallyZero):
            schrodinger_from_lax(broken)

    def test_diagonal_gauge_potential(self):
        """Test L = [[f, 1], [0, -f]]: Q = f^2 + hbar f'"""
        f = P("x^3 + beta*x")
        first, zeroth = eliminate_second_component(f, FIELD.one, FIELD.zero, -f, _dx)
        assert not first
        expected = f * f + gen("hbar") * _dx(f)
        assert gauge_potential(first, zeroth, _dx) == expected
        assert traceless_potential(f, FIELD.one, FIELD.zero, _dx) == expected

    @pytest.mark.parametrize("model", ["gar92", "gar5232"])
    def test_closed_form_agrees_with_elimination(self, model):
        data = schrodinger_from_lax(builtin_model(model))
        assert data.closed_form_agreement is True

    def test_closed_form_skipped_with_trace(self):
        m = builtin_model("gar92")
        with_trace = replace(m, lax=matrix([[P("q2*x + q1"), P("x^3 + p1")], [P("x^2 - p2"), P("x - q1")]]))
        assert schrodinger_from_lax(with_trace).closed_form_agreement is None

    @pytest.mark.parametrize("model", ["gar92", "gar5232"])
    def test_potential_at_most_quadratic_in_hbar(self, model):
        q = schrodinger_from_lax(builtin_model(model)).potential
        parts = split_by_degree(q, "hbar", max_degree=2)
        assert degree_in(q, "hbar") <= 2
        assert parts.get(2)

    @pytest.mark.parametrize("model", ["gar92", "gar5232"])
    def test_deformation_poles_at_zeros_of_l12(self, model):
        data = schrodinger_from_lax(builtin_model(model))
        locus = data.apparent_locus.numer
        for time, a in data.deformation_coefficients.items():
            denom = a.denom
            common = multipoly_gcd(denom, locus)
            while degree_in(common, "x") > 0:
                denom = exact_divide(denom, common)
                common = multipoly_gcd(denom, locus)
            assert degree_in(denom, "x") == 0, time
