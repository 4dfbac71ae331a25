"""Limited-memory quasi-Newton minimization with Armijo backtracking."""

from collections import deque
from dataclasses import dataclass
from typing import Callable, Tuple

import numpy as np

ObjectiveFn = Callable[[np.ndarray], Tuple[float, np.ndarray]]
StopFn = Callable[[np.ndarray, np.ndarray], bool]


@dataclass(frozen=True)
class OptimizationResult:
    x: np.ndarray
    value: float
    gradient: np.ndarray
    iterations: int
    converged: bool


def _two_loop(gradient: np.ndarray, history: deque) -> np.ndarray:
    """Apply the L-BFGS inverse-Hessian approximation to the gradient."""
    q = gradient.copy()
    alphas = []
    for s, y, rho in reversed(history):
        alpha = rho * (s @ q)
        q -= alpha * y
        alphas.append(alpha)
    if history:
        s, y, _ = history[-1]
        q *= (s @ y) / (y @ y)
    for (s, y, rho), alpha in zip(history, reversed(alphas)):
        beta = rho * (y @ q)
        q += (alpha - beta) * s
    return q


def minimize_lbfgs(objective: ObjectiveFn, x0: np.ndarray, stop: StopFn, max_iters: int = 500,
                   memory: int = 10, armijo: float = 1e-4, shrink: float = 0.5,
                   max_backtracks: int = 60) -> OptimizationResult:
    x = np.asarray(x0, dtype=np.float64).copy()
    value, gradient = objective(x)
    history: deque = deque(maxlen=memory)
    iterations = 0

    while not stop(x, gradient):
        if iterations >= max_iters:
            return OptimizationResult(x, value, gradient, iterations, False)

        direction = -_two_loop(gradient, history)
        slope = gradient @ direction
        if slope >= 0:
            history.clear()
            direction = -gradient
            slope = -(gradient @ gradient)

        # first step without curvature information is scaled to unit length
        step = 1.0 if history else min(1.0, 1.0 / max(np.linalg.norm(gradient), np.finfo(float).tiny))
        for _ in range(max_backtracks):
            candidate = x + step * direction
            candidate_value, candidate_gradient = objective(candidate)
            if candidate_value <= value + armijo * step * slope:
                break
            step *= shrink
        else:
            if history:
                history.clear()
                continue
            # no descent possible along the gradient at machine precision
            return OptimizationResult(x, value, gradient, iterations, stop(x, gradient))

        s = candidate - x
        y = candidate_gradient - gradient
        curvature = s @ y
        if curvature > 1e-12 * np.linalg.norm(s) * np.linalg.norm(y):
            history.append((s, y, 1.0 / curvature))

        x, value, gradient = candidate, candidate_value, candidate_gradient
        iterations += 1

    return OptimizationResult(x, value, gradient, iterations, True)
