"""Classical optimizers for black-box objectives with optional shot noise.

All optimizers are deterministic for a fixed (config, seed, objective)
triple and account for every objective evaluation in
``OptimizationResult.evaluations_used``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from .statevector import child_seed, rng_from_seed


@dataclass
class Objective:
    """Callable objective with optional analytic-gradient capability.

    ``shift_radii`` holds the per-slot parameter-shift radius r (generator
    eigenvalues +-r) when the shift rule applies; ``exact_gradient``, when
    set, returns the exact gradient at a point (e.g. reverse-mode
    statevector differentiation) and is preferred by gradient methods.
    """

    arity: int
    evaluate: Callable[[np.ndarray], float]
    exact_gradient: Callable[[np.ndarray], np.ndarray] | None = None
    shift_radii: np.ndarray | None = None
    circuits_per_evaluation: int = 1
    shots_per_evaluation: int | None = None


@dataclass
class OptimizationResult:
    best_params: np.ndarray
    best_value: float
    history: list[tuple[int, float]]
    evaluations_used: int
    converged: bool
    reason: str


@dataclass(frozen=True)
class OptimizerConfig:
    """Configuration shared by every optimizer kind.

    Only the fields relevant to ``kind`` are read; the rest are ignored.
    """

    kind: str  # nft | spsa | gsa | quasi_newton
    max_evaluations: int = 10_000
    seed: int = 0
    # nft
    reevaluation_interval: int | None = None  # default: once per sweep
    random_coordinate_order: bool = False
    # spsa
    perturbation: float = 0.1
    learning_rate: float | None = None  # None -> calibrate
    calibration_evals: int = 50
    lr_decay_exponent: float = 0.602
    perturbation_decay_exponent: float = 0.101
    stability_constant: float | None = None
    target_first_step: float = 0.1
    # gsa
    visiting_parameter: float = 2.62
    acceptance_parameter: float = -5.0
    initial_temperature: float = 5230.0
    polish: bool = True
    # quasi_newton
    gradient_mode: str = "finite_difference"  # or parameter_shift
    gradient_tolerance: float = 1e-5
    finite_difference_step: float = 1e-6

    def __post_init__(self):
        if self.max_evaluations < 1:
            raise ValueError("max_evaluations must be >= 1")
        if self.kind == "gsa" and not 1.0 < self.visiting_parameter < 3.0:
            raise ValueError("GSA requires 1 < visiting parameter < 3")


class _Budget:
    def __init__(self, objective: Objective, limit: int):
        self.objective = objective
        self.limit = limit
        self.used = 0
        self.history: list[tuple[int, float]] = []
        self.best_value = math.inf
        self.best_params: np.ndarray | None = None

    def exhausted(self) -> bool:
        return self.used >= self.limit

    def __call__(self, params: np.ndarray, record: bool = True) -> float:
        if self.exhausted():
            raise _BudgetExhausted
        value = float(self.objective.evaluate(np.asarray(params, dtype=float)))
        self.used += 1
        if record:
            self.history.append((self.used, value))
        if value < self.best_value:
            self.best_value = value
            self.best_params = np.array(params, dtype=float)
        return value


class _BudgetExhausted(Exception):
    pass


def _result(budget: _Budget, converged: bool, reason: str) -> OptimizationResult:
    return OptimizationResult(
        best_params=np.array(budget.best_params),
        best_value=budget.best_value,
        history=budget.history,
        evaluations_used=budget.used,
        converged=converged,
        reason=reason,
    )


# --- gradients --------------------------------------------------------------


def finite_difference_gradient(
    objective: Objective, params: np.ndarray, step: float = 1e-6,
    evaluate: Callable | None = None,
) -> np.ndarray:
    evaluate = evaluate or objective.evaluate
    params = np.asarray(params, dtype=float)
    grad = np.zeros_like(params)
    for i in range(params.size):
        shift = np.zeros_like(params)
        shift[i] = step
        grad[i] = (evaluate(params + shift) - evaluate(params - shift)) / (2 * step)
    return grad


def parameter_shift_gradient(
    objective: Objective, params: np.ndarray, evaluate: Callable | None = None
) -> np.ndarray:
    """Exact gradient r [f(x + pi/(4r) e_i) - f(x - pi/(4r) e_i)] per slot."""
    if objective.shift_radii is None:
        raise ValueError("objective does not declare parameter-shift radii")
    radii = np.asarray(objective.shift_radii, dtype=float)
    if radii.shape != (objective.arity,) or np.any(~np.isfinite(radii)):
        raise ValueError("every slot needs a declared shift radius")
    evaluate = evaluate or objective.evaluate
    params = np.asarray(params, dtype=float)
    grad = np.zeros_like(params)
    for i, r in enumerate(radii):
        shift = np.zeros_like(params)
        shift[i] = math.pi / (4.0 * r)
        grad[i] = r * (evaluate(params + shift) - evaluate(params - shift))
    return grad


# --- NFT (sequential sinusoidal minimization) -------------------------------


def fit_sinusoid(
    value_at: float, value_plus: float, value_minus: float, theta: float
) -> tuple[float, float, float]:
    """Fit a sin(x + b) + c through f(theta), f(theta +- pi/2)."""
    c = 0.5 * (value_plus + value_minus)
    sin_part = value_at - c
    cos_part = 0.5 * (value_plus - value_minus)
    a = math.hypot(sin_part, cos_part)
    b = math.atan2(sin_part, cos_part) - theta
    return a, b, c


def nft_minimize(
    objective: Objective, x0, config: OptimizerConfig
) -> OptimizationResult:
    """Coordinate-wise exact minimization of sinusoidal parameter profiles.

    Per coordinate j the objective is a + sin-curve in theta_j; two probe
    evaluations at theta_j +- pi/2 pin the curve and the coordinate jumps
    to its minimum.  The model value is refreshed by a full evaluation
    every ``reevaluation_interval`` coordinate updates (default: once per
    sweep) to stop fit errors from accumulating.
    """
    x = np.array(x0, dtype=float)
    budget = _Budget(objective, config.max_evaluations)
    interval = config.reevaluation_interval or max(objective.arity, 1)
    rng = rng_from_seed(config.seed)
    try:
        current = budget(x)
        updates = 0
        while not budget.exhausted():
            order = np.arange(objective.arity)
            if config.random_coordinate_order:
                rng.shuffle(order)
            for j in order:
                theta = x[j]
                probe = x.copy()
                probe[j] = theta + math.pi / 2
                z_plus = budget(probe, record=False)
                probe[j] = theta - math.pi / 2
                z_minus = budget(probe, record=False)
                a, b, c = fit_sinusoid(current, z_plus, z_minus, theta)
                x[j] = -b - math.pi / 2  # argmin of a sin(x + b) + c, a >= 0
                current = c - a
                budget.history.append((budget.used, current))
                if current < budget.best_value:
                    budget.best_value = current
                    budget.best_params = x.copy()
                updates += 1
                if updates % interval == 0:
                    current = budget(x)
    except _BudgetExhausted:
        return _result(budget, False, "budget_exhausted")
    return _result(budget, False, "budget_exhausted")


# --- SPSA -------------------------------------------------------------------


def spsa_minimize(
    objective: Objective, x0, config: OptimizerConfig
) -> OptimizationResult:
    """Simultaneous-perturbation stochastic approximation.

    Each iteration consumes exactly two evaluations; when no learning rate
    is configured, a calibration phase of ``calibration_evals`` extra
    evaluations sizes the first update step to ``target_first_step``.
    """
    x = np.array(x0, dtype=float)
    budget = _Budget(objective, config.max_evaluations)
    rng = rng_from_seed(config.seed)
    alpha = config.lr_decay_exponent
    gamma = config.perturbation_decay_exponent
    c0 = config.perturbation
    expected_iters = max((config.max_evaluations - config.calibration_evals) // 2, 1)
    stability = (
        config.stability_constant
        if config.stability_constant is not None
        else 0.1 * expected_iters
    )
    try:
        if config.learning_rate is None:
            magnitudes = []
            for _ in range(config.calibration_evals // 2):
                delta = rng.integers(0, 2, size=x.size) * 2.0 - 1.0
                f_plus = budget(x + c0 * delta, record=False)
                f_minus = budget(x - c0 * delta, record=False)
                magnitudes.append(abs(f_plus - f_minus) / (2.0 * c0))
            mean_mag = max(float(np.mean(magnitudes)) if magnitudes else 1.0, 1e-12)
            learning_rate = (
                config.target_first_step * (stability + 1.0) ** alpha / mean_mag
            )
        else:
            learning_rate = config.learning_rate
        k = 0
        while not budget.exhausted():
            a_k = learning_rate / (stability + k + 1.0) ** alpha
            c_k = c0 / (k + 1.0) ** gamma
            delta = rng.integers(0, 2, size=x.size) * 2.0 - 1.0
            f_plus = budget(x + c_k * delta)
            f_minus = budget(x - c_k * delta)
            gradient = (f_plus - f_minus) / (2.0 * c_k) / delta
            x = x - a_k * gradient
            k += 1
    except _BudgetExhausted:
        return _result(budget, False, "budget_exhausted")
    return _result(budget, False, "budget_exhausted")


# --- GSA (generalized simulated annealing) ----------------------------------


def gsa_visiting_displacement(
    rng: np.random.Generator, temperature: float, qv: float, size: int
) -> np.ndarray:
    """Per-coordinate draws from the distorted Cauchy-Lorentz visitor.

    The D=1 visiting density is a q-Gaussian with q = qv, which equals a
    rescaled Student-t with nu = (3 - qv)/(qv - 1) degrees of freedom.
    """
    nu = (3.0 - qv) / (qv - 1.0)
    scale = temperature ** (1.0 / (3.0 - qv)) / math.sqrt(3.0 - qv)
    return rng.standard_t(nu, size=size) * scale


def gsa_temperature(t0: float, qv: float, iteration: int) -> float:
    num = 2.0 ** (qv - 1.0) - 1.0
    den = (2.0 + iteration) ** (qv - 1.0) - 1.0
    return t0 * num / den


def gsa_acceptance_probability(delta: float, temperature: float, qa: float) -> float:
    """Generalized Metropolis rule, clamped to 0 on negative base."""
    if delta <= 0:
        return 1.0
    base = 1.0 - (1.0 - qa) * delta / temperature
    if base <= 0.0:
        return 0.0
    return min(1.0, base ** (1.0 / (1.0 - qa)))


def _wrap_into_box(x: np.ndarray, lower: np.ndarray, upper: np.ndarray) -> np.ndarray:
    span = upper - lower
    return lower + np.mod(x - lower, span)


def gsa_minimize(
    objective: Objective, bounds, config: OptimizerConfig
) -> OptimizationResult:
    """Generalized simulated annealing over a finite box.

    Visiting draws are applied independently per coordinate, proposals are
    wrapped back into the box, and an optional quasi-Newton polish runs
    from the best point with the remaining budget.
    """
    lower = np.array([b[0] for b in bounds], dtype=float)
    upper = np.array([b[1] for b in bounds], dtype=float)
    if lower.size != objective.arity or np.any(upper <= lower):
        raise ValueError("bounds must be finite with lower < upper per coordinate")
    qv, qa = config.visiting_parameter, config.acceptance_parameter
    budget = _Budget(objective, config.max_evaluations)
    rng = rng_from_seed(config.seed)
    polish_budget = min(
        max(20 * objective.arity, 100), config.max_evaluations // 4
    ) if config.polish else 0
    anneal_limit = config.max_evaluations - polish_budget
    x = lower + rng.random(lower.size) * (upper - lower)
    try:
        current = budget(x)
        iteration = 0
        while budget.used < anneal_limit:
            temperature = gsa_temperature(config.initial_temperature, qv, iteration)
            step = gsa_visiting_displacement(rng, temperature, qv, x.size)
            proposal = _wrap_into_box(x + step, lower, upper)
            value = budget(proposal)
            delta = value - current
            if delta <= 0 or rng.random() < gsa_acceptance_probability(
                delta, temperature, qa
            ):
                x, current = proposal, value
            iteration += 1
    except _BudgetExhausted:
        return _result(budget, False, "budget_exhausted")
    if config.polish and budget.best_params is not None and not budget.exhausted():
        def clamped(params: np.ndarray) -> float:
            return budget(np.clip(params, lower, upper), record=False)

        polish_cfg = replace(
            config, kind="quasi_newton", max_evaluations=polish_budget
        )
        try:
            _quasi_newton_loop(
                Objective(objective.arity, clamped),
                np.array(budget.best_params),
                polish_cfg,
                budget,
                evaluate=clamped,
            )
        except _BudgetExhausted:
            pass
    return _result(budget, True, "annealing_schedule_complete")


# --- quasi-Newton (BFGS with Armijo backtracking) ---------------------------


def _gradient_for(
    objective: Objective, params: np.ndarray, config: OptimizerConfig, evaluate
) -> np.ndarray:
    if objective.exact_gradient is not None:
        return np.asarray(objective.exact_gradient(params), dtype=float)
    if config.gradient_mode == "parameter_shift":
        return parameter_shift_gradient(objective, params, evaluate=evaluate)
    return finite_difference_gradient(
        objective, params, config.finite_difference_step, evaluate=evaluate
    )


def _quasi_newton_loop(
    objective: Objective,
    x0: np.ndarray,
    config: OptimizerConfig,
    budget: _Budget,
    evaluate=None,
) -> tuple[bool, str]:
    # History records accepted steps only; raw evaluations (line-search
    # probes, gradient stencils) still count against the budget.
    if evaluate is None:
        evaluate = lambda params: budget(params, record=False)
    x = np.array(x0, dtype=float)
    f = evaluate(x)
    budget.history.append((budget.used, f))
    g = _gradient_for(objective, x, config, evaluate)
    h_inv = np.eye(x.size)
    armijo_c = 1e-4
    while True:
        gnorm = float(np.linalg.norm(g))
        if gnorm <= config.gradient_tolerance:
            return True, "gradient_tolerance"
        direction = -h_inv @ g
        slope = float(g @ direction)
        if slope >= 0:  # reset a corrupted Hessian estimate
            h_inv = np.eye(x.size)
            direction = -g
            slope = -gnorm**2
        step = 1.0
        while True:
            candidate = x + step * direction
            f_new = evaluate(candidate)
            if f_new <= f + armijo_c * step * slope:
                break
            step *= 0.5
            if step < 1e-14:
                return False, "line_search_failure"
        g_new = _gradient_for(objective, candidate, config, evaluate)
        s = step * direction
        y = g_new - g
        ys = float(y @ s)
        if ys > 1e-14:
            rho = 1.0 / ys
            outer = np.outer(s, y)
            h_inv = (
                (np.eye(x.size) - rho * outer)
                @ h_inv
                @ (np.eye(x.size) - rho * outer.T)
                + rho * np.outer(s, s)
            )
        x, f, g = candidate, f_new, g_new
        if budget.best_params is None or f < budget.best_value:
            budget.best_value = f
            budget.best_params = x.copy()
        budget.history.append((budget.used, f))


def quasi_newton_minimize(
    objective: Objective, x0, config: OptimizerConfig
) -> OptimizationResult:
    """BFGS with Armijo backtracking; terminates on small gradient norm.

    Uses the objective's exact gradient when available, otherwise the
    configured parameter-shift or central finite-difference estimate.
    """
    budget = _Budget(objective, config.max_evaluations)
    try:
        converged, reason = _quasi_newton_loop(objective, np.asarray(x0, float), config, budget)
    except _BudgetExhausted:
        return _result(budget, False, "budget_exhausted")
    return _result(budget, converged, reason)


# --- dispatch and multi-start ------------------------------------------------


def minimize(
    objective: Objective,
    config: OptimizerConfig,
    x0=None,
    bounds=None,
) -> OptimizationResult:
    if config.kind == "nft":
        return nft_minimize(objective, x0, config)
    if config.kind == "spsa":
        return spsa_minimize(objective, x0, config)
    if config.kind == "gsa":
        if bounds is None:
            bounds = [(0.0, 2.0 * math.pi)] * objective.arity
        return gsa_minimize(objective, bounds, config)
    if config.kind == "quasi_newton":
        return quasi_newton_minimize(objective, x0, config)
    raise ValueError(f"unknown optimizer kind {config.kind!r}")


def multi_start(
    objective: Objective,
    config: OptimizerConfig,
    runs: int,
    seed: int,
    bounds=None,
) -> tuple[OptimizationResult, list[OptimizationResult]]:
    """Independent seeded restarts from uniform-random initial parameters.

    Run ``k`` draws x0 from the stream (seed, k) and optimizes with a
    config seeded from the same pair; the global best and the full per-run
    record come back together.
    """
    if runs < 1:
        raise ValueError("runs must be >= 1")
    if bounds is None:
        bounds = [(0.0, 2.0 * math.pi)] * objective.arity
    lower = np.array([b[0] for b in bounds])
    upper = np.array([b[1] for b in bounds])
    results = []
    for run in range(runs):
        rng = rng_from_seed(child_seed(seed, run))
        x0 = lower + rng.random(objective.arity) * (upper - lower)
        run_config = replace(config, seed=int(rng.integers(0, 2**31 - 1)))
        results.append(minimize(objective, run_config, x0=x0, bounds=bounds))
    best = min(results, key=lambda r: r.best_value)
    return best, results
