"""
Verification matrix: every reproducible claim as a named check.

Check ids are ``<selector>.<check-name>``. A check returns a verdict and a
short detail; expected-negative checks pass when the predicted failure
(an inconsistency, a nonzero residual, a squarefree failure) occurs.
"""
import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from functools import lru_cache
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from .algebra import FIELD, RatFunc, differentiate, free_symbols, gen, substitute, to_text
from .config import settings
from .exceptions import (
    DivergentLimit,
    Inconsistent,
    InconsistentResonance,
    IsoreduceError,
    SquarefreeFailure,
)
from .families import expand_quasi, family, published_ode
from .golden import Mismatch, compare_expression, compare_series, compare_table, load_expression, load_series, load_table
from .lax_models import (
    builtin_model,
    check_matrix_compatibility,
    check_scalar_compatibility,
    hamilton_vector_field,
    printed_coefficient_report,
    schrodinger_from_lax,
)
from .models import SELECTORS, SuiteReport, VerificationReport
from .painleve import LaurentSolution, find_leading_balances, jet_flow, verify_solution
from .parser import parse_expression
from .reduction import (
    CurveSpec,
    FlowSystem,
    ReductionResult,
    classical_limit_curve,
    derive_secondary_flow,
    eliminate_flow_system,
    expand_family,
    genus_check,
    mirror_initial_value,
    mirror_transform_check,
    relation_multiplier,
    second_reduction,
    singular_reduction,
)
from .series import SeriesSolution

logger = logging.getLogger(__name__)


@dataclass
class Outcome:
    """What a check function returns; ``ok`` is the raw truth of the asserted property"""
    ok: bool
    detail: str = ""
    mismatches: List[Mismatch] = field(default_factory=list)
    assumptions: Tuple[str, ...] = ()


@dataclass(frozen=True)
class Check:
    selector: str
    name: str
    run: Callable[[], Outcome]
    expected_negative: bool = False

    @property
    def check_id(self) -> str:
        return f"{self.selector}.{self.name}"


# ---------------------------------------------------------------------------
# Shared, cached computations
# ---------------------------------------------------------------------------

@lru_cache(maxsize=None)
def solution(model: str, name: str = "main") -> LaurentSolution:
    return expand_family(family(model, name), settings.reduction_order)


@lru_cache(maxsize=None)
def reduction(model: str, name: str = "main") -> ReductionResult:
    return singular_reduction(builtin_model(model), solution(model, name), name)


@lru_cache(maxsize=None)
def puiseux(model: str) -> LaurentSolution:
    return expand_quasi(model)


def golden_flow(model: str, name: str = "secondary-flow") -> FlowSystem:
    return FlowSystem("t2", load_table(f"{model}/{name}"))


def _series_outcome(sol: LaurentSolution, prefix: str, parameters: int) -> Outcome:
    mismatches: List[Mismatch] = []
    for v in sol.ansatz.variables:
        for m in compare_series(sol[v], load_series(f"{prefix}{v}-series")):
            mismatches.append(Mismatch(f"{v}[{m.key}]", m.expected, m.computed))
    count_ok = sol.parameter_count == parameters
    detail = f"{sol.parameter_count} free parameters ({', '.join(sol.parameters)})"
    if not count_ok:
        detail += f", expected {parameters}"
    return Outcome(not mismatches and count_ok, detail, mismatches)


def _residual_outcome(flow, sol: LaurentSolution) -> Outcome:
    report = verify_solution(flow, sol)
    detail = ", ".join(f"{v}: {r.valuation} (need {r.required})" for v, r in report.items())
    return Outcome(all(r.passed for r in report.values()), detail)


def _zero_outcome(residuals: Sequence[RatFunc], label: str) -> Outcome:
    nonzero = [to_text(r) for r in residuals if r]
    if nonzero:
        return Outcome(False, f"{label}: {len(nonzero)} nonzero residual(s), first {nonzero[0][:200]}")
    return Outcome(True, f"{label}: all residuals vanish")


def _locus_outcome(red: ReductionResult, root: str) -> List[Mismatch]:
    """The apparent locus must be of degree one in x and vanish at ``root``"""
    locus = FIELD.new(red.apparent_locus)
    at_root = substitute(locus, {"x": parse_expression(root)})
    if at_root or locus.numer.degree(0) != 1:
        return [Mismatch("apparent-locus", f"zero at x = {root}", to_text(locus))]
    return []


def _reduction_outcome(model: str, red: ReductionResult, locus_root: Optional[str]) -> Outcome:
    mismatches = []
    names = ("potential-classical", "potential-first-order", "potential-second-order")
    for name, part in zip(names, red.parts):
        mismatches += compare_expression(name, part, load_expression(f"{model}/{name}"))
    mismatches += compare_expression("deformation", red.deformation["t2"], load_expression(f"{model}/deformation"))
    if locus_root is not None:
        mismatches += _locus_outcome(red, locus_root)
    return Outcome(not mismatches, f"R0 = {to_text(red.parts[0])[:120]}", mismatches)


def _flow_outcome(model: str) -> Outcome:
    derived = derive_secondary_flow(builtin_model(model), solution(model))
    mismatches = compare_table(derived.rhs, golden_flow(model).rhs)
    residual = check_scalar_compatibility(
        reduction(model).limit, reduction(model).deformation["t2"], derived.rhs, "t2"
    )
    if residual:
        mismatches.append(Mismatch("compatibility", "0", to_text(residual)[:200]))
    return Outcome(not mismatches, "derived flow matches and makes the reduced pair isomonodromic", mismatches)


def _elimination_outcome(model: str, multiplier: str) -> Outcome:
    elimination = eliminate_flow_system(golden_flow(model))
    published = published_ode(model).relation
    found = relation_multiplier(elimination.relation, published)
    expected = parse_expression(multiplier)
    ok = found is not None and not free_symbols(found / expected)
    detail = f"multiplier {to_text(found) if found is not None else 'none'}; divisions by {', '.join(elimination.divisors)}"
    return Outcome(ok, detail, assumptions=tuple(f"{d} != 0" for d in elimination.divisors))


def _balance_outcome(model: str, leading: Dict[str, Sequence[str]], **kwargs) -> Outcome:
    """Every listed leading coefficient of ``variable`` appears among the balances"""
    m = builtin_model(model)
    balances = find_leading_balances(hamilton_vector_field(m, 0), "t1", **kwargs)
    found = {v: {b.leading[v] for b in balances} for v in leading}
    missing = [
        Mismatch(v, c, ", ".join(sorted(to_text(f) for f in found[v])))
        for v, coefficients in leading.items() for c in coefficients
        if parse_expression(c) not in found[v]
    ]
    return Outcome(not missing, f"{len(balances)} balances", missing)


def _expect_raises(fn: Callable[[], object], error) -> Outcome:
    try:
        fn()
    except error as exc:
        return Outcome(False, f"{type(exc).__name__}: {exc}")
    return Outcome(True, "no failure occurred")


# ---------------------------------------------------------------------------
# pIV
# ---------------------------------------------------------------------------

def _piv_scalar_compatibility() -> Outcome:
    m = builtin_model("pIV")
    residual = check_scalar_compatibility(
        m.potential, m.deformation_coefficients[0], hamilton_vector_field(m, 0), "t1"
    )
    return _zero_outcome([residual], "scalar compatibility")


def _piv_balances() -> Outcome:
    return _balance_outcome("pIV", {"q": ("hbar", "-hbar")}, exponent_range=(-2, 0))


def _piv_series() -> Outcome:
    return _series_outcome(solution("pIV"), "pIV/", 2)


def _piv_residual() -> Outcome:
    return _residual_outcome(hamilton_vector_field(builtin_model("pIV"), 0), solution("pIV"))


def corrupt_coefficient(sol: LaurentSolution, variable: str, power: int, delta: RatFunc) -> LaurentSolution:
    """Copy of ``sol`` with one coefficient shifted by ``delta``"""
    series = sol[variable]
    coefficients = dict(series.coefficients)
    coefficients[power] = coefficients.get(power, FIELD.zero) + delta
    members = dict(sol.solution.series)
    members[variable] = series.like(coefficients, series.order)
    return replace(sol, solution=SeriesSolution(members))


def _piv_corrupted() -> Outcome:
    sol = corrupt_coefficient(solution("pIV"), "q", 1, FIELD.one)
    report = verify_solution(hamilton_vector_field(builtin_model("pIV"), 0), sol)
    detail = ", ".join(f"{v}: {r.valuation}" for v, r in report.items())
    return Outcome(all(r.passed for r in report.values()), f"residual valuations {detail}")


def _piv_reduction() -> Outcome:
    red = reduction("pIV")
    return Outcome(
        red.limit == load_expression("pIV/potential-limit"),
        f"limit {to_text(red.limit)[:160]}",
        compare_expression("potential-limit", red.limit, load_expression("pIV/potential-limit")),
    )


# ---------------------------------------------------------------------------
# Garnier systems
# ---------------------------------------------------------------------------

def _matrix_compatibility(model: str, j: int) -> Callable[[], Outcome]:
    def run() -> Outcome:
        residual = check_matrix_compatibility(builtin_model(model), j)
        return _zero_outcome([e for row in residual for e in row], f"zero curvature in t{j + 1}")
    return run


def _printed_coefficients(model: str) -> Callable[[], Outcome]:
    def run() -> Outcome:
        m = builtin_model(model)
        data = schrodinger_from_lax(m)
        report = printed_coefficient_report(m, data.first_order, data.zeroth_order)
        ok = not report["first_order"] and report["zeroth_order"] and data.closed_form_agreement is not False
        return Outcome(
            ok,
            f"printed first-order agrees: {report['first_order']}, zeroth-order agrees: {report['zeroth_order']}, "
            f"traceless closed form agrees: {data.closed_form_agreement}",
        )
    return run


def _gar92_balances() -> Outcome:
    return _balance_outcome("gar92", {"q1": ("-hbar^5", "9*hbar^5")})


def _gar5232_balances() -> Outcome:
    return _balance_outcome("gar5232", {"q1": ("hbar", "-hbar")}, exponent_range=(-3, 2))


def _family_series(model: str, name: str, parameters: int) -> Callable[[], Outcome]:
    prefix = f"{model}/" if name == "main" else f"{model}/alternative-"

    def run() -> Outcome:
        sol = solution(model, name)
        outcome = _series_outcome(sol, prefix, parameters)
        residual = _residual_outcome(hamilton_vector_field(builtin_model(model), 0), sol)
        return Outcome(outcome.ok and residual.ok, f"{outcome.detail}; {residual.detail}", outcome.mismatches)
    return run


def _gar92_alternative_reduction() -> Outcome:
    red = reduction("gar92", "alternative")
    mismatches = compare_expression("potential-limit", red.limit, load_expression("gar92/alternative-potential-limit"))
    mismatches += compare_expression("deformation", red.deformation["t2"], FIELD.zero)
    return Outcome(not mismatches, "alternative family limit with vanishing deformation", mismatches)


def _gar92_alternative_flow() -> Outcome:
    return _expect_raises(
        lambda: derive_secondary_flow(builtin_model("gar92"), solution("gar92", "alternative")),
        Inconsistent,
    )


def _gar5232_alternative_reduction() -> Outcome:
    red = reduction("gar5232", "alternative")
    mismatches = compare_expression(
        "potential-limit", red.limit, load_expression("gar5232/alternative-potential-limit")
    )
    mismatches += compare_expression("deformation", red.deformation["t2"], FIELD.zero)
    mismatches += _locus_outcome(red, "t2/beta")
    return Outcome(not mismatches, "alternative pair with vanishing deformation", mismatches, ("beta != 0",))


def _gar5232_alternative_compatibility() -> Outcome:
    red = reduction("gar5232", "alternative")
    flow = golden_flow("gar5232", "alternative-secondary-flow")
    residual = check_scalar_compatibility(red.limit, FIELD.zero, flow.rhs, "t2")
    return _zero_outcome([residual], "compatibility of the alternative pair")


def _gar5232_mirror() -> Outcome:
    outcome = _zero_outcome(mirror_transform_check(), "mirror transform")
    expected = [parse_expression(t) for t in ("0", "beta", "-4*gamma - hbar", "(alpha^2 + 14*alpha*beta - 32*beta^2 + 45*delta)/18")]
    mismatches = [
        Mismatch(f"xi{i + 1}(alpha)", to_text(want), to_text(got))
        for i, (got, want) in enumerate(zip(mirror_initial_value(solution("gar5232")), expected))
        if got != want
    ]
    return Outcome(outcome.ok and not mismatches, outcome.detail, mismatches, ("q1 != 0", "q2 != 0"))


# ---------------------------------------------------------------------------
# Quasi-Painlevé
# ---------------------------------------------------------------------------

def _quasi_series(model: str) -> Callable[[], Outcome]:
    def run() -> Outcome:
        sol = puiseux(model)
        mismatches = compare_series(sol["alpha"], load_series(f"{model}/puiseux-series"))
        ok = not mismatches and sol.parameter_count == 4
        return Outcome(ok, f"{sol.parameter_count} free parameters ({', '.join(sol.parameters)})", mismatches)
    return run


def _quasi_no_laurent(model: str) -> Callable[[], Outcome]:
    def run() -> Outcome:
        balances = find_leading_balances(jet_flow(published_ode(model)), "t2", point="b")
        return Outcome(bool(balances), f"{len(balances)} integer-exponent balances")
    return run


def _quasi_second_reduction(model: str) -> Callable[[], Outcome]:
    def run() -> Outcome:
        limit = second_reduction(reduction(model), eliminate_flow_system(golden_flow(model)), puiseux(model))
        mismatches = compare_expression("second-reduction", limit, load_expression(f"{model}/second-reduction"))
        return Outcome(not mismatches, f"limit {to_text(limit)[:160]}", mismatches)
    return run


# ---------------------------------------------------------------------------
# Genus
# ---------------------------------------------------------------------------

GENUS_SAMPLES: Dict[str, Tuple[Dict[str, int], int]] = {
    "pIV": ({"alpha": 1, "beta": 2, "theta0": 3, "thetainf": 5}, 1),
    "gar92": ({"alpha": 1, "beta": 1, "gamma": 1, "delta": 1, "t2": 1}, 2),
    "gar5232": ({"alpha": 1, "beta": 2, "gamma": 3, "delta": 5, "t2": 7}, 2),
}


def _genus(model: str) -> Callable[[], Outcome]:
    def run() -> Outcome:
        sample, expected = GENUS_SAMPLES[model]
        curve = classical_limit_curve(reduction(model))
        genus = genus_check(curve, sample)
        return Outcome(genus == expected, f"degree {curve.degree} after x^{curve.cleared_power}, genus {genus}")
    return run


def _genus_squarefree_control() -> Outcome:
    return _expect_raises(lambda: genus_check(CurveSpec(gen("x") ** 2, 0), {}), SquarefreeFailure)


# ---------------------------------------------------------------------------
# Numeric corroboration
# ---------------------------------------------------------------------------

QUASI_SAMPLE = {"b": 1.0, "c1": 0.5, "c2": 0.3, "c3": 0.2, "hbar": 1.0}
FAMILY_SAMPLE = {"alpha": 0.3, "beta": 0.7, "gamma": 0.2, "delta": 0.1, "t2": 0.5, "hbar": 1.0}
BRANCH_WINDOW = (-0.687, -0.647)


def _numeric_branch(model: str) -> Callable[[], Outcome]:
    def run() -> Outcome:
        from .numeric import quasi_branch_sweep

        fits = quasi_branch_sweep(published_ode(model), puiseux(model), QUASI_SAMPLE)
        exponents = [fit.exponent for fit in fits]
        ok = all(BRANCH_WINDOW[0] <= e <= BRANCH_WINDOW[1] for e in exponents)
        worst = max(fits, key=lambda fit: fit.residual)
        return Outcome(
            ok,
            f"exponents {min(exponents):.4f} to {max(exponents):.4f} over {len(fits)} seeds, "
            f"largest fit residual {worst.residual:.2e} on distances {worst.window[0]:.1e} to {worst.window[1]:.1e}; "
            "numeric evidence, not proof",
        )
    return run


def _numeric_pole() -> Outcome:
    from .numeric import pole_experiment

    sample = {"alpha": 0.5, "beta": 0.2, "theta0": 0.3, "thetainf": 0.4, "hbar": 1.0}
    flow = hamilton_vector_field(builtin_model("pIV"), 0)
    estimate, predicted = pole_experiment(flow, solution("pIV"), sample, "q")
    return Outcome(abs(estimate.exponent + 2) < 0.05, f"exponent {estimate.exponent:.4f} at {estimate.point:.6f} (predicted {predicted})")


FLOW_ODE_RUNS = {
    "gar92": ({"alpha": 0.0, "beta": 0.0, "gamma": 0.0, "delta": 0.0}, (-0.5, 0.5)),
    "gar5232": ({"alpha": 0.1, "beta": 1.0, "gamma": 0.1, "delta": 0.1}, (1.0, 2.0)),
}


def _numeric_flow_vs_ode(model: str) -> Callable[[], Outcome]:
    def run() -> Outcome:
        from .numeric import compare_flow_with_ode

        initial, span = FLOW_ODE_RUNS[model]
        deviation = compare_flow_with_ode(golden_flow(model), published_ode(model), initial, span)
        return Outcome(deviation < 1e-7, f"max deviation {deviation:.2e} on {span}")
    return run


def _numeric_mirror() -> Outcome:
    from .numeric import RANGE_END, mirror_continuation

    deviation, terminations = mirror_continuation(solution("gar5232"), dict(FAMILY_SAMPLE, beta=1.0))
    ok = all(t == RANGE_END for t in terminations)
    return Outcome(ok, f"terminations {terminations}, deviation from series {deviation:.2e}")


def _numeric_hamiltonian_drift() -> Outcome:
    from .numeric import hamiltonian_drift

    m = builtin_model("gar92")
    drift = hamiltonian_drift(
        hamilton_vector_field(m, 0),
        m.hamiltonians[1],
        differentiate(m.hamiltonians[0], "t2"),
        "t1",
        {"q1": 0.1, "q2": 0.2, "p1": 0.1, "p2": -0.1},
        (0.0, 0.1),
        {"t2": 0.3, "hbar": 1.0},
    )
    return Outcome(drift < 1e-4, f"max drift {drift:.2e}")


# ---------------------------------------------------------------------------
# Registry and runner
# ---------------------------------------------------------------------------

CHECKS: Tuple[Check, ...] = (
    Check("pIV", "scalar-compatibility", _piv_scalar_compatibility),
    Check("pIV", "balances", _piv_balances),
    Check("pIV", "laurent-series", _piv_series),
    Check("pIV", "residual", _piv_residual),
    Check("pIV", "corrupted-residual", _piv_corrupted, expected_negative=True),
    Check("pIV", "reduction", _piv_reduction),
    Check("gar92", "compatibility-t1", _matrix_compatibility("gar92", 0)),
    Check("gar92", "compatibility-t2", _matrix_compatibility("gar92", 1)),
    Check("gar92", "printed-coefficients", _printed_coefficients("gar92")),
    Check("gar92", "balances", _gar92_balances),
    Check("gar92", "laurent-series", _family_series("gar92", "main", 4)),
    Check("gar92", "alternative-series", _family_series("gar92", "alternative", 3)),
    Check("gar92", "reduction", lambda: _reduction_outcome("gar92", reduction("gar92"), "3*beta/2")),
    Check("gar92", "alternative-reduction", _gar92_alternative_reduction),
    Check("gar92", "secondary-flow", lambda: _flow_outcome("gar92")),
    Check("gar92", "alternative-flow", _gar92_alternative_flow, expected_negative=True),
    Check("gar92", "elimination", lambda: _elimination_outcome("gar92", "1")),
    Check("gar5232", "compatibility-t1", _matrix_compatibility("gar5232", 0)),
    Check("gar5232", "compatibility-t2", _matrix_compatibility("gar5232", 1)),
    Check("gar5232", "printed-coefficients", _printed_coefficients("gar5232")),
    Check("gar5232", "balances", _gar5232_balances),
    Check("gar5232", "laurent-series", _family_series("gar5232", "main", 4)),
    Check("gar5232", "alternative-series", _family_series("gar5232", "alternative", 4)),
    Check("gar5232", "reduction", lambda: _reduction_outcome("gar5232", reduction("gar5232"), "beta")),
    Check("gar5232", "alternative-reduction", _gar5232_alternative_reduction),
    Check("gar5232", "secondary-flow", lambda: _flow_outcome("gar5232")),
    Check("gar5232", "alternative-compatibility", _gar5232_alternative_compatibility, expected_negative=True),
    Check("gar5232", "elimination", lambda: _elimination_outcome("gar5232", "t2^3*alpha_d1^2")),
    Check("gar5232", "mirror", _gar5232_mirror),
    Check("quasi", "gar92-puiseux", _quasi_series("gar92")),
    Check("quasi", "gar5232-puiseux", _quasi_series("gar5232")),
    Check("quasi", "gar92-no-laurent", _quasi_no_laurent("gar92"), expected_negative=True),
    Check("quasi", "gar5232-no-laurent", _quasi_no_laurent("gar5232"), expected_negative=True),
    Check("quasi", "gar92-second-reduction", _quasi_second_reduction("gar92")),
    Check("quasi", "gar5232-second-reduction", _quasi_second_reduction("gar5232")),
    Check("genus", "pIV", _genus("pIV")),
    Check("genus", "gar92", _genus("gar92")),
    Check("genus", "gar5232", _genus("gar5232")),
    Check("genus", "squarefree-control", _genus_squarefree_control, expected_negative=True),
    Check("numeric", "pIV-pole", _numeric_pole),
    Check("numeric", "gar92-branch", _numeric_branch("gar92")),
    Check("numeric", "gar5232-branch", _numeric_branch("gar5232")),
    Check("numeric", "gar92-flow-vs-ode", _numeric_flow_vs_ode("gar92")),
    Check("numeric", "gar5232-flow-vs-ode", _numeric_flow_vs_ode("gar5232")),
    Check("numeric", "gar5232-mirror-continuation", _numeric_mirror),
    Check("numeric", "gar92-hamiltonian-drift", _numeric_hamiltonian_drift),
)


def select_checks(selector: str) -> List[Check]:
    if selector not in SELECTORS:
        raise ValueError(f"unknown selector '{selector}'; expected one of {', '.join(SELECTORS)}")
    return [c for c in CHECKS if selector == "all" or c.selector == selector]


def _status_for_error(exc: Exception) -> str:
    if isinstance(exc, DivergentLimit):
        return "divergent"
    if isinstance(exc, (Inconsistent, InconsistentResonance)):
        return "inconsistent"
    return "error"


def run_check(check: Check) -> VerificationReport:
    """Run one check and turn its outcome into a report"""
    start = time.perf_counter()
    try:
        outcome = check.run()
    except (IsoreduceError, ValueError, FileNotFoundError) as exc:
        logger.error(f"{check.check_id} raised {type(exc).__name__}: {exc}")
        return VerificationReport(
            check_id=check.check_id,
            status=_status_for_error(exc),
            expected_negative=check.expected_negative,
            detail=f"{type(exc).__name__}: {exc}",
            wall_time=time.perf_counter() - start,
        )
    passed = outcome.ok != check.expected_negative
    if check.expected_negative and passed:
        logger.warning(f"{check.check_id}: predicted failure observed ({outcome.detail})")
    logger.info(f"{check.check_id}: {'pass' if passed else 'fail'}")
    return VerificationReport(
        check_id=check.check_id,
        status="pass" if passed else "fail",
        expected_negative=check.expected_negative,
        detail=outcome.detail,
        mismatches=[vars(m) for m in outcome.mismatches],
        assumptions=list(outcome.assumptions),
        wall_time=time.perf_counter() - start,
    )


def run_suite(selector: str = "all", max_workers: Optional[int] = None) -> SuiteReport:
    """Run the checks of ``selector`` in parallel; the report is ordered by check id"""
    checks = select_checks(selector)
    logger.info(f"Running {len(checks)} checks for '{selector}'")
    with ThreadPoolExecutor(max_workers=max_workers or settings.max_threads) as pool:
        reports = list(pool.map(run_check, checks))
    reports.sort(key=lambda r: r.check_id)
    suite = SuiteReport(selector=selector, checks=reports)
    failed = [r.check_id for r in reports if not r.passed]
    if failed:
        logger.warning(f"{len(failed)} check(s) failed: {', '.join(failed)}")
    return suite
