"""Limited-memory BFGS with a backtracking (Armijo) line search."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

import numpy as np


@dataclass
class OptimizerState:
    x: np.ndarray
    f: float
    g: np.ndarray
    memory: int = 7
    history: deque = field(default_factory=deque)
    iterations: int = 0
    calls: int = 0
    status: str = "running"
    line_search_failed: bool = False
    log: list = field(default_factory=list)

    @property
    def gnorm(self) -> float:
        return float(np.linalg.norm(self.g))


def two_loop(g: np.ndarray, history) -> np.ndarray:
    """Apply the inverse-Hessian approximation stored in ``history`` to ``g``."""
    q = g.copy()
    alphas = []
    for s, y, rho in reversed(history):
        a = rho * (s @ q)
        q -= a * y
        alphas.append(a)
    if history:
        s, y, _ = history[-1]
        q *= (s @ y) / (y @ y)
    for (s, y, rho), a in zip(history, reversed(alphas)):
        b = rho * (y @ q)
        q += (a - b) * s
    return q


def lbfgs_minimize(fun, x0, max_calls: int = 100, memory: int = 7, gtol: float = 1e-10,
                   c1: float = 1e-4, shrink: float = 0.5, initial_step: float | None = None,
                   min_step: float = 1e-14, converged=None, callback=None) -> OptimizerState:
    """Minimise ``fun(x) -> (f, grad)`` using at most ``max_calls`` evaluations.

    Every evaluation, including line-search probes, counts against the
    budget.  ``initial_step`` scales the first (steepest-descent) step; by
    default it is ``min(1, 1/|g|)``.  ``converged(state)`` may end the run
    early.  ``callback(state, x, f, g, accepted)`` sees every evaluation.
    A failed line search ends the run with ``line_search_failed`` set and
    the best iterate kept.
    """
    x = np.array(x0, dtype=float)
    f, g = fun(x)
    state = OptimizerState(x, float(f), np.asarray(g, dtype=float), memory, deque(maxlen=memory))
    state.calls = 1
    _record(state, callback, x, f, g, True)
    if state.gnorm <= gtol or (converged is not None and converged(state)):
        state.status = "converged"
        return state

    while state.calls < max_calls:
        gnorm = state.gnorm
        if state.history:
            direction = -two_loop(state.g, state.history)
            step = 1.0
        else:
            direction = -state.g
            step = initial_step if initial_step is not None else min(1.0, 1.0 / gnorm)
        slope = state.g @ direction
        if not slope < 0:
            state.history.clear()
            direction = -state.g
            step = initial_step if initial_step is not None else min(1.0, 1.0 / gnorm)
            slope = -gnorm ** 2

        accepted = False
        dnorm = np.linalg.norm(direction)
        while state.calls < max_calls:
            xt = state.x + step * direction
            ft, gt = fun(xt)
            gt = np.asarray(gt, dtype=float)
            state.calls += 1
            ok = np.isfinite(ft) and ft <= state.f + c1 * step * slope
            _record(state, callback, xt, ft, gt, ok)
            if ok:
                accepted = True
                break
            step *= shrink
            if step * dnorm < min_step * max(1.0, np.linalg.norm(state.x)):
                break
        if not accepted:
            if state.calls < max_calls:
                state.line_search_failed = True
                state.status = "line search failed"
            break

        s = xt - state.x
        y = gt - state.g
        sy = s @ y
        if sy > 1e-12 * np.sqrt((s @ s) * (y @ y)):
            state.history.append((s, y, 1.0 / sy))
        state.x, state.f, state.g = xt, float(ft), gt
        state.iterations += 1
        if state.gnorm <= gtol or (converged is not None and converged(state)):
            state.status = "converged"
            return state

    if state.status == "running":
        state.status = "max calls"
    return state


def _record(state, callback, x, f, g, accepted):
    state.log.append({"call": state.calls, "f": float(f), "gnorm": float(np.linalg.norm(g)),
                      "accepted": bool(accepted)})
    if callback is not None:
        callback(state, x, f, g, accepted)
