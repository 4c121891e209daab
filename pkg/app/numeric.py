"""
Numeric lab: evaluation of exact expressions, adaptive Runge-Kutta
integration of the flows, and estimation of movable branch points.

Exact objects are compiled once with ``sympy.lambdify``; stepping uses
``scipy.integrate.RK45`` directly so every accepted step, its dense-output
interpolant and a local error estimate read off that interpolant are
recorded.
"""
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path
from typing import Callable, Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np
import sympy
from scipy.integrate import RK45, OdeSolution

from .algebra import RatFunc, free_symbols, symbol
from .config import settings
from .exceptions import DomainViolation, InsufficientWindow, NearPole, StepCollapse
from .painleve import LaurentSolution, ScalarODE, jet_flow
from .reduction import (
    MIRROR_COORDINATES,
    FlowSystem,
    mirror_flow,
    mirror_initial_value,
    target_derivatives,
)
from .parser import parse_expression
from .series import TruncatedSeries, substitute_solution

logger = logging.getLogger(__name__)

RANGE_END = "range end"
STEP_COLLAPSE = "step collapse"
STATE_BLOWUP = "state blow-up"
NEAR_POLE = "near pole"


# ---------------------------------------------------------------------------
# Evaluation
# ---------------------------------------------------------------------------

@lru_cache(maxsize=None)
def _compiled(f: RatFunc, names: Tuple[str, ...]) -> Tuple[Callable, Callable]:
    args = [symbol(n) for n in names]
    return (
        sympy.lambdify(args, f.numer.as_expr(), modules="numpy"),
        sympy.lambdify(args, f.denom.as_expr(), modules="numpy"),
    )


def evaluate_numeric(f: RatFunc, bindings: Mapping[str, float]) -> float:
    """Floating-point value of ``f``

    Raises:
        NearPole: the denominator is below ``settings.near_pole_threshold``
    """
    names = tuple(sorted(free_symbols(f)))
    missing = [n for n in names if n not in bindings]
    if missing:
        raise ValueError(f"no value for {', '.join(missing)}")
    numer, denom = _compiled(f, names)
    values = [bindings[n] for n in names]
    d = float(denom(*values))
    if abs(d) < settings.near_pole_threshold:
        raise NearPole(f"denominator {d:.3e} at {dict(zip(names, values))}")
    return float(numer(*values)) / d


def evaluate_series(series: TruncatedSeries, bindings: Mapping[str, float], t: float) -> float:
    """Partial sum of a Laurent/Puiseux series at ``t`` (real branch of odd roots)"""
    point = evaluate_numeric(series.point, bindings)
    scale = evaluate_numeric(series.scale, bindings)
    u = (t - point) / scale
    r = series.ramification
    if r % 2 == 0 and u < 0:
        raise DomainViolation(f"even root of negative local variable at t = {t}")
    tau = np.sign(u) * abs(u) ** (1.0 / r) if r > 1 else u
    return float(sum(evaluate_numeric(c, bindings) * tau ** n for n, c in series.coefficients.items()))


class CompiledFlow:
    """Right side dy/dt = flow(y, t) / hbar with constants bound"""

    def __init__(self, flow: Mapping[str, RatFunc], time: str, constants: Mapping[str, float]):
        self.flow = dict(flow)
        self.time = time
        self.variables = tuple(flow)
        self.constants = dict(constants)
        self.hbar = self.constants.setdefault("hbar", settings.numeric_hbar)
        names = set().union(*(free_symbols(f) for f in self.flow.values()))
        unbound = names - set(self.variables) - {time} - set(self.constants)
        if unbound:
            raise ValueError(f"no value for {', '.join(sorted(unbound))}")
        self.evaluations = 0

    def __call__(self, t: float, y: np.ndarray) -> np.ndarray:
        self.evaluations += 1
        bindings = dict(self.constants)
        bindings[self.time] = t
        bindings.update(zip(self.variables, y))
        return np.array([evaluate_numeric(f, bindings) for f in self.flow.values()]) / self.hbar


@dataclass
class Trajectory:
    variables: Tuple[str, ...]
    t: np.ndarray
    y: np.ndarray
    rhs: np.ndarray
    errors: np.ndarray
    dense: OdeSolution
    termination: str
    system: CompiledFlow

    @property
    def status(self) -> str:
        return "success" if self.termination == RANGE_END else "failed"

    def component(self, name: str) -> np.ndarray:
        return self.y[:, self.variables.index(name)]


def _local_error(interpolant, t0: float, y0, f0, t1: float, y1, f1) -> float:
    """Midpoint gap between the quartic step interpolant and the cubic Hermite fit of the step ends"""
    h = t1 - t0
    hermite = (y0 + y1) / 2 + h * (f0 - f1) / 8
    return float(np.max(np.abs(interpolant(t0 + h / 2) - hermite)))


def integrate(
    flow: Mapping[str, RatFunc],
    time: str,
    initial: Mapping[str, float],
    t_span: Tuple[float, float],
    constants: Optional[Mapping[str, float]] = None,
    tol: Optional[float] = None,
    strict: bool = False,
) -> Trajectory:
    """Integrate hbar * dv/dt = flow[v] with adaptive RK45 steps.

    Args:
        flow: right sides keyed by variable
        time: name of the independent variable
        initial: starting values for every variable
        t_span: (start, end); the end may lie before the start
        constants: numeric values of the remaining symbols (hbar included)
        tol: relative and absolute tolerance (defaults to ``settings.numeric_tol``)
        strict: raise instead of stopping when the step size collapses

    Raises:
        DomainViolation: the initial state sits on a pole of the flow
        StepCollapse: only when ``strict`` is set
    """
    tol = settings.numeric_tol if tol is None else tol
    system = CompiledFlow(flow, time, constants or {})
    t0, t_end = t_span
    y0 = np.array([initial[v] for v in system.variables], dtype=float)
    try:
        first = system(t0, y0)
    except NearPole as exc:
        raise DomainViolation(f"initial state on a pole: {exc}") from None

    solver = RK45(system, t0, y0, t_end, rtol=tol, atol=tol)
    ts, ys, rhs, errors, interpolants = [t0], [y0], [first], [0.0], []
    termination = RANGE_END
    while solver.status == "running":
        try:
            solver.step()
        except NearPole:
            termination = NEAR_POLE
            break
        if solver.status == "failed":
            termination = STEP_COLLAPSE
            if strict:
                raise StepCollapse(solver.t)
            break
        interpolant = solver.dense_output()
        interpolants.append(interpolant)
        errors.append(_local_error(interpolant, ts[-1], ys[-1], rhs[-1], solver.t, solver.y, solver.f))
        ts.append(solver.t)
        ys.append(solver.y.copy())
        rhs.append(solver.f.copy())
        if np.max(np.abs(solver.y)) > settings.blowup_threshold:
            termination = STATE_BLOWUP
            break

    t = np.array(ts)
    logger.info(
        f"Integrated {len(ts) - 1} steps from {t0} to {t[-1]} ({termination}), "
        f"{system.evaluations} evaluations, max local error {max(errors):.2e}"
    )
    dense = OdeSolution(t, interpolants) if interpolants else None
    return Trajectory(system.variables, t, np.array(ys), np.array(rhs), np.array(errors), dense, termination, system)


# ---------------------------------------------------------------------------
# Branch points
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BranchFit:
    """Estimated singular point and power-law exponent of a trajectory"""
    point: float
    exponent: float
    # root-mean-square deviation of the log-log fit
    residual: float
    # distances from the point that the fit sampled
    window: Tuple[float, float]
    samples: int

    def to_dict(self) -> Dict[str, object]:
        return {
            "point": self.point,
            "exponent": self.exponent,
            "residual": self.residual,
            "window": list(self.window),
            "samples": self.samples,
        }


def detect_branch(
    traj: Trajectory,
    component: str,
    window: Optional[Tuple[float, float]] = None,
    samples: int = 40,
) -> BranchFit:
    """Locate the singularity ending ``traj`` and fit the power law of d(component)/dt there.

    The point comes from a linear fit of y / y' (which is (t - b)/k for
    y ~ (t - b)**k); the exponent from a log-log fit of |y| on a geometric
    grid of distances, resampled through the dense output.

    Raises:
        InsufficientWindow: fewer than ``settings.branch_min_samples`` usable samples
    """
    index = traj.variables.index(component)
    y = traj.rhs[:, index]
    t = traj.t
    tail = max(settings.branch_min_samples, len(t) // 4)
    if len(t) < tail or traj.dense is None:
        raise InsufficientWindow(f"{len(t)} steps recorded, {tail} needed")
    t_tail, y_tail = t[-tail:], y[-tail:]
    ratio = y_tail / np.gradient(y_tail, t_tail)
    slope, intercept = np.polyfit(t_tail, ratio, 1)
    point = -intercept / slope

    delta = abs(t[-1] - point)
    lo, hi = window or (1e2 * delta, 1e3 * delta)
    side = np.sign(t[0] - point)
    distances = np.geomspace(lo, hi, samples)
    times = point + side * distances
    inside = (times >= t.min()) & (times <= t.max())
    if inside.sum() < settings.branch_min_samples:
        raise InsufficientWindow(f"{int(inside.sum())} samples in [{lo:.2e}, {hi:.2e}]")
    states = traj.dense(times[inside])
    values = np.array([traj.system(s, states[:, i])[index] for i, s in enumerate(times[inside])])
    log_d, log_v = np.log(distances[inside]), np.log(np.abs(values))
    exponent, offset = np.polyfit(log_d, log_v, 1)
    residual = float(np.sqrt(np.mean((log_v - (exponent * log_d + offset)) ** 2)))
    logger.info(f"Branch of {component} at t = {point:.8f} with exponent {exponent:.4f} (residual {residual:.2e})")
    used = distances[inside]
    return BranchFit(float(point), float(exponent), residual, (float(used.min()), float(used.max())), int(inside.sum()))


def seed_from_series(sol: LaurentSolution, bindings: Mapping[str, float], t: float) -> Dict[str, float]:
    return {v: evaluate_series(sol[v], bindings, t) for v in sol.ansatz.variables}


def pole_experiment(
    flow: Mapping[str, RatFunc],
    sol: LaurentSolution,
    bindings: Mapping[str, float],
    component: str,
    offset: float = 1e-2,
    reach: float = 0.1,
) -> Tuple[BranchFit, float]:
    """Seed from the series near the singularity, integrate away and back, and locate it again.

    Returns:
        The estimate and the predicted location
    """
    predicted = evaluate_numeric(sol.solution.point, bindings)
    time = sol.ansatz.time
    constants = {k: v for k, v in bindings.items() if k != time}
    start = predicted + offset
    away = integrate(flow, time, seed_from_series(sol, bindings, start), (start, predicted + reach), constants)
    back = integrate(
        flow, time, dict(zip(away.variables, away.y[-1])), (away.t[-1], predicted - reach), constants
    )
    return detect_branch(back, component), predicted


def quasi_branch_experiment(ode: ScalarODE, sol: LaurentSolution, bindings: Mapping[str, float]) -> Tuple[BranchFit, float]:
    return pole_experiment(jet_flow(ode), sol, bindings, ode.jet(0))


def quasi_branch_sweep(
    ode: ScalarODE,
    sol: LaurentSolution,
    base: Mapping[str, float],
    seeds: int = 10,
    spread: float = 0.2,
    random_seed: int = 0,
) -> List[BranchFit]:
    """Repeat the quasi branch experiment from ``seeds`` initial conditions
    drawn around ``base``.

    Every series parameter moves by up to ``spread`` times its base value
    (or ``spread`` itself when that is zero); ``hbar`` stays fixed.
    """
    rng = np.random.default_rng(random_seed)
    samples = []
    for _ in range(seeds):
        sample = dict(base)
        for name in sol.parameters:
            scale = abs(base[name]) or 1.0
            sample[name] = base[name] + spread * scale * rng.uniform(-1.0, 1.0)
        samples.append(sample)
    with ThreadPoolExecutor(max_workers=settings.max_threads) as executor:
        fits = [fit for fit, _ in executor.map(lambda b: quasi_branch_experiment(ode, sol, b), samples)]
    exponents = [fit.exponent for fit in fits]
    logger.info(f"Quasi branch exponents over {seeds} seeds: {min(exponents):.4f} to {max(exponents):.4f}")
    return fits


# ---------------------------------------------------------------------------
# Cross-checks
# ---------------------------------------------------------------------------

def compare_flow_with_ode(
    flow: FlowSystem,
    ode: ScalarODE,
    initial: Mapping[str, float],
    t_span: Tuple[float, float],
    hbar: Optional[float] = None,
    points: int = 50,
) -> float:
    """Largest difference in the target between the parameter flow and the scalar ODE"""
    constants = {"hbar": settings.numeric_hbar if hbar is None else hbar}
    system = integrate(flow.rhs, flow.time, initial, t_span, constants)
    bindings = dict(initial, **constants)
    bindings[flow.time] = t_span[0]
    jets = {ode.jet(0): initial[ode.unknown]}
    for k, expression in enumerate(target_derivatives(flow, ode.unknown, ode.order - 1), start=1):
        jets[ode.jet(k)] = evaluate_numeric(expression, bindings)
    scalar = integrate(jet_flow(ode), flow.time, jets, t_span, constants)
    end = min(system.t[-1], scalar.t[-1], key=lambda s: abs(s - t_span[0]))
    grid = np.linspace(t_span[0], end, points)
    a = system.dense(grid)[system.variables.index(ode.unknown)]
    b = scalar.dense(grid)[scalar.variables.index(ode.jet(0))]
    deviation = float(np.max(np.abs(a - b)))
    logger.info(f"Flow and scalar ODE agree to {deviation:.2e} on [{t_span[0]}, {end}]")
    return deviation


def hamiltonian_drift(
    flow: Mapping[str, RatFunc],
    h_other: RatFunc,
    h_own_partial: RatFunc,
    time: str,
    initial: Mapping[str, float],
    t_span: Tuple[float, float],
    constants: Mapping[str, float],
    points: int = 200,
) -> float:
    """max |d H_other/dt - dH_own/d(other time)| along a trajectory, with the derivative taken numerically"""
    traj = integrate(flow, time, initial, t_span, constants)
    grid = np.linspace(t_span[0], traj.t[-1], points)
    states = traj.dense(grid)
    values, expected = [], []
    for i, t in enumerate(grid):
        bindings = dict(constants)
        bindings[time] = t
        bindings.update(zip(traj.variables, states[:, i]))
        values.append(evaluate_numeric(h_other, bindings))
        expected.append(evaluate_numeric(h_own_partial, bindings))
    drift = np.gradient(np.array(values), grid) - np.array(expected)
    # one-sided differences at the ends are first order
    return float(np.max(np.abs(drift[2:-2])))


def mirror_continuation(
    sol: LaurentSolution, bindings: Mapping[str, float], span: float = 0.05
) -> Tuple[float, Tuple[str, str]]:
    """Integrate the mirror system through the pole in both directions and compare with the series.

    Returns:
        Largest deviation from the series and the two terminations
    """
    point = evaluate_numeric(sol.solution.point, bindings)
    time = sol.ansatz.time
    constants = {k: v for k, v in bindings.items() if k != time}
    initial = {
        name: evaluate_numeric(value, bindings)
        for name, value in zip(MIRROR_COORDINATES, mirror_initial_value(sol))
    }
    deviation, terminations = 0.0, []
    for end in (point + span, point - span):
        traj = integrate(mirror_flow(), time, initial, (point, end), constants)
        terminations.append(traj.termination)
        for name, text in MIRROR_COORDINATES.items():
            series = substitute_solution(parse_expression(text), sol.solution)
            expected = evaluate_series(series, bindings, traj.t[-1])
            deviation = max(deviation, abs(traj.component(name)[-1] - expected))
    return deviation, tuple(terminations)


def export_trajectory_csv(traj: Trajectory, path: Path) -> Path:
    """Write t, the state and the local error estimate of each step"""
    path = Path(path)
    table = np.column_stack([traj.t, traj.y, traj.errors])
    header = ",".join((traj.system.time,) + traj.variables + ("local_error",))
    np.savetxt(path, table, delimiter=",", header=header, comments="")
    logger.info(f"Wrote {len(traj.t)} rows to {path}")
    return path
