"""
Unit tests for the numeric corroboration layer
"""
import numpy as np
import pytest

from app.algebra import FIELD
from app.exceptions import DomainViolation, NearPole, StepCollapse
from app.families import expand_quasi, family, published_ode
from app.lax_models import builtin_model, hamilton_vector_field
from app.numeric import (
    RANGE_END,
    STATE_BLOWUP,
    STEP_COLLAPSE,
    CompiledFlow,
    detect_branch,
    evaluate_numeric,
    evaluate_series,
    export_trajectory_csv,
    integrate,
    pole_experiment,
    quasi_branch_experiment,
    quasi_branch_sweep,
)
from app.parser import parse_expression
from app.reduction import expand_family
from app.series import TruncatedSeries
from app.suite import BRANCH_WINDOW, QUASI_SAMPLE

P = parse_expression

ROTATION = {"q1": P("hbar*q2"), "q2": P("-hbar*q1")}
RICCATI = {"q": P("q^2")}


class TestEvaluate:
    """Test floating-point evaluation of exact values"""

    def test_rational_function(self):
        assert evaluate_numeric(P("(x^2 + 1)/(x - 1)"), {"x": 3.0}) == pytest.approx(5.0)

    def test_constant(self):
        assert evaluate_numeric(P("3/4"), {}) == pytest.approx(0.75)

    def test_near_pole(self):
        with pytest.raises(NearPole):
            evaluate_numeric(P("1/(x - beta)"), {"x": 2.0, "beta": 2.0})

    def test_missing_binding(self):
        with pytest.raises(ValueError, match="beta"):
            evaluate_numeric(P("x + beta"), {"x": 1.0})

    def test_laurent_partial_sum(self):
        series = TruncatedSeries("t1", P("alpha"), {-1: FIELD.one, 1: P("beta")})
        value = evaluate_series(series, {"alpha": 1.0, "beta": 2.0}, 1.5)
        assert value == pytest.approx(2.0 + 1.0)

    def test_odd_root_branch(self):
        series = TruncatedSeries("t2", P("b"), {1: FIELD.one}, None, 3)
        assert evaluate_series(series, {"b": 0.0}, -8.0) == pytest.approx(-2.0)

    def test_even_root_of_negative(self):
        series = TruncatedSeries("t2", P("b"), {1: FIELD.one}, None, 2)
        with pytest.raises(DomainViolation):
            evaluate_series(series, {"b": 0.0}, -1.0)


class TestCompiledFlow:
    """Test compiled right-hand sides"""

    def test_divides_by_hbar(self):
        system = CompiledFlow({"q": P("hbar*t1 + 2*q")}, "t1", {"hbar": 2.0})
        assert system(1.0, np.array([3.0])) == pytest.approx([4.0])

    def test_unbound_symbol(self):
        with pytest.raises(ValueError, match="beta"):
            CompiledFlow({"q": P("beta*q")}, "t1", {})


class TestIntegrate:
    """Test adaptive integration and its termination reasons"""

    def test_rotation(self):
        traj = integrate(ROTATION, "t1", {"q1": 1.0, "q2": 0.0}, (0.0, np.pi), {"hbar": 1.0})
        assert traj.status == "success"
        assert traj.termination == RANGE_END
        assert traj.component("q1")[-1] == pytest.approx(-1.0, abs=1e-8)
        assert traj.dense(np.pi / 2)[0] == pytest.approx(0.0, abs=1e-6)

    def test_backward_span(self):
        traj = integrate(ROTATION, "t1", {"q1": 1.0, "q2": 0.0}, (0.0, -np.pi / 2), {"hbar": 1.0})
        assert traj.t[-1] == pytest.approx(-np.pi / 2)
        assert traj.component("q2")[-1] == pytest.approx(-1.0, abs=1e-8)

    def test_blowup(self):
        traj = integrate(RICCATI, "t1", {"q": 1.0}, (0.0, 2.0), {"hbar": 1.0})
        assert traj.status == "failed"
        assert traj.termination in (STEP_COLLAPSE, STATE_BLOWUP)
        assert traj.t[-1] == pytest.approx(1.0, abs=1e-6)

    def test_strict_step_collapse(self):
        with pytest.raises(StepCollapse):
            integrate(RICCATI, "t1", {"q": 1.0}, (0.0, 2.0), {"hbar": 1.0}, strict=True)

    def test_initial_state_on_pole(self):
        with pytest.raises(DomainViolation):
            integrate({"q": P("1/q")}, "t1", {"q": 0.0}, (0.0, 1.0), {"hbar": 1.0})

    def test_step_statistics(self):
        traj = integrate(ROTATION, "t1", {"q1": 1.0, "q2": 0.0}, (0.0, 1.0), {"hbar": 1.0})
        assert len(traj.errors) == len(traj.t)
        assert traj.errors[0] == 0.0
        assert traj.system.evaluations > len(traj.t)

    def test_local_error_estimate(self):
        loose = integrate(ROTATION, "t1", {"q1": 1.0, "q2": 0.0}, (0.0, 1.0), {"hbar": 1.0}, tol=1e-6)
        tight = integrate(ROTATION, "t1", {"q1": 1.0, "q2": 0.0}, (0.0, 1.0), {"hbar": 1.0}, tol=1e-10)
        for traj in (loose, tight):
            assert np.all(np.isfinite(traj.errors))
            assert np.all(traj.errors[1:] < 1e-4)
        assert tight.errors.max() < loose.errors.max()

    def test_export_csv(self, tmp_path):
        traj = integrate(ROTATION, "t1", {"q1": 1.0, "q2": 0.0}, (0.0, 1.0), {"hbar": 1.0})
        path = export_trajectory_csv(traj, tmp_path / "rotation.csv")
        lines = path.read_text().splitlines()
        assert lines[0] == "t1,q1,q2,local_error"
        assert len(lines) == len(traj.t) + 1


class TestBranchDetection:
    """Test location of singularities and their exponents"""

    def test_simple_pole(self):
        """Test q = 1/(1 - t): q' = q^2 behaves like (1 - t)^-2"""
        traj = integrate(RICCATI, "t1", {"q": 1.0}, (0.0, 2.0), {"hbar": 1.0})
        estimate = detect_branch(traj, "q", window=(1e-3, 1e-1))
        assert estimate.point == pytest.approx(1.0, abs=1e-4)
        assert estimate.exponent == pytest.approx(-2.0, abs=1e-2)
        assert estimate.samples >= 20
        assert estimate.residual < 1e-3
        assert 1e-3 * 0.999 < estimate.window[0] < estimate.window[1] < 1e-1 * 1.001

    @pytest.mark.slow
    def test_piv_pole(self):
        sample = {"alpha": 0.5, "beta": 0.2, "theta0": 0.3, "thetainf": 0.4, "hbar": 1.0}
        flow = hamilton_vector_field(builtin_model("pIV"), 0)
        estimate, predicted = pole_experiment(flow, expand_family(family("pIV")), sample, "q")
        assert predicted == pytest.approx(0.5)
        assert estimate.point == pytest.approx(predicted, abs=1e-3)
        assert estimate.exponent == pytest.approx(-2.0, abs=0.05)

    @pytest.mark.slow
    def test_quasi_branch_exponent(self):
        estimate, predicted = quasi_branch_experiment(published_ode("gar92"), expand_quasi("gar92"), QUASI_SAMPLE)
        assert predicted == pytest.approx(QUASI_SAMPLE["b"])
        assert estimate.point == pytest.approx(predicted, abs=1e-3)
        assert BRANCH_WINDOW[0] <= estimate.exponent <= BRANCH_WINDOW[1]

    @pytest.mark.slow
    @pytest.mark.parametrize("model", ["gar92", "gar5232"])
    def test_quasi_branch_sweep(self, model):
        fits = quasi_branch_sweep(published_ode(model), expand_quasi(model), QUASI_SAMPLE, seeds=10, random_seed=7)
        assert len(fits) == 10
        assert len({round(fit.point, 6) for fit in fits}) > 1
        for fit in fits:
            assert BRANCH_WINDOW[0] <= fit.exponent <= BRANCH_WINDOW[1]
            assert fit.window[0] < fit.window[1]
