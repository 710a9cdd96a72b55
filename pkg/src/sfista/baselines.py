"""Baseline accelerated proximal gradient methods for comparison runs.

All four methods share the problem abstraction, the oracle-counting rules
(one prox per line-search attempt), and the termination rule of the
benchmark, so iteration and runtime comparisons against the restarted
solver are apples-to-apples.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import List, Optional

import numpy as np

from .core import CompositeProblem, CountingOracle
from .rpf_sfista import SfistaOutput, SfistaTraceRow

__all__ = [
    "BaselineConfig",
    "solve_fista_bt",
    "solve_fista_restart",
    "solve_rada_fista",
    "solve_greedy_fista",
    "gradient_restart_fires",
]

_LS_SLACK = 1e-12
_L_OVERFLOW = 1e30


@dataclass
class BaselineConfig:
    """Knobs for the four comparison methods.

    L0 seeds the doubling line search of the backtracking variants.  The
    fixed-step variants need the global Lipschitz constant: gamma defaults to
    1/L for the adaptive-momentum method and 1.3/L for the greedy one.
    rada_p, rada_q, rada_r parameterize the adaptive momentum sequence.
    """

    L0: float = 10.0
    chi: float = 0.001
    rada_p: float = 0.5
    rada_q: float = 0.5
    rada_r: float = 4.0
    greedy_gamma_scale: float = 1.3
    greedy_safeguard: bool = False
    eps_hat: float = 1e-8
    residual_mode: str = "relative"
    max_total_iters: int = 10**6
    time_limit: float = 7200.0
    trace: bool = False


def gradient_restart_fires(y_prev: np.ndarray, y: np.ndarray, x_tilde: np.ndarray) -> bool:
    """Heuristic gradient restart predicate: <y_prev - y, y - x_tilde> > 0."""
    return float((y_prev - y) @ (y - x_tilde)) > 0.0


def _residual_denominator(problem: CompositeProblem, z0: np.ndarray, mode: str) -> float:
    if mode == "relative":
        return 1.0 + float(np.linalg.norm(problem.f_grad(z0)))
    return 1.0


def _line_search(oracle, x_tilde, L, chi):
    """Doubling line search; returns (y, L, f_y) with L accepted."""
    g = oracle.grad(x_tilde)
    f_xt = oracle.f(x_tilde)
    while True:
        y = oracle.prox(x_tilde - g / L, 1.0 / L)
        f_y = oracle.f(y)
        d = y - x_tilde
        ell = f_xt + float(g @ d)
        if ell - f_y + (1.0 - chi) * L * float(d @ d) / 4.0 >= -_LS_SLACK * (1.0 + abs(f_y)):
            return y, L, f_y, g
        L *= 2.0
        if L > _L_OVERFLOW:
            raise RuntimeError("line search exceeded L = 1e30")


def _run_fista_bt(problem, config, z0, restart_on_value):
    z0 = problem.check_dim(z0)
    if math.isinf(float(problem.h_eval(z0))):
        raise ValueError("z0 is infeasible: h(z0) = +inf")
    start = time.monotonic()
    oracle = CountingOracle(problem)
    denom = _residual_denominator(problem, z0, config.residual_mode)
    trace: Optional[List[SfistaTraceRow]] = [] if config.trace else None

    L = config.L0
    t = 1.0
    y_prev = z0
    x_tilde = z0
    phi_prev = math.inf
    restarts = 0
    v = np.zeros(problem.dim)
    y = z0
    status = "iter_cap"
    j = 0
    while j < config.max_total_iters:
        if time.monotonic() - start > config.time_limit:
            status = "time_cap"
            break
        j += 1
        y, L, f_y, g_xt = _line_search(oracle, x_tilde, L, config.chi)
        v = oracle.grad(y) - g_xt + L * (x_tilde - y)
        residual = float(np.linalg.norm(v)) / denom
        if trace is not None:
            trace.append(SfistaTraceRow(
                cycle=restarts + 1, j=j, L=L, A=math.nan, tau=math.nan, a=math.nan,
                tau_prev=math.nan, v_norm=float(np.linalg.norm(v)),
                phi_xi=f_y + oracle.h(y), restarted=False,
            ))
        if residual <= config.eps_hat:
            status = "converged"
            break

        restarted = False
        if restart_on_value:
            phi_y = f_y + oracle.h(y)
            if phi_y > phi_prev:
                t = 1.0
                x_tilde = y
                restarts += 1
                restarted = True
                if trace is not None:
                    trace[-1].restarted = True
            phi_prev = phi_y
        if not restarted:
            t_next = (1.0 + math.sqrt(1.0 + 4.0 * t * t)) / 2.0
            x_tilde = y + ((t - 1.0) / t_next) * (y - y_prev)
            t = t_next
        y_prev = y

    return SfistaOutput(
        y=y, v=v, xi=y, L_final=L, cycles=restarts + 1, total_iters=j,
        counters=oracle.counters, status=status,
        residual=float(np.linalg.norm(v)) / denom, trace=trace,
        runtime_s=time.monotonic() - start,
    )


def solve_fista_bt(problem: CompositeProblem, config: BaselineConfig, z0: np.ndarray) -> SfistaOutput:
    """FISTA with a doubling backtracking line search for L."""
    return _run_fista_bt(problem, config, z0, restart_on_value=False)


def solve_fista_restart(problem: CompositeProblem, config: BaselineConfig, z0: np.ndarray) -> SfistaOutput:
    """FISTA-BT plus a function-value restart: reset momentum when the
    objective at the new iterate worsens."""
    return _run_fista_bt(problem, config, z0, restart_on_value=True)


def _require_L(problem: CompositeProblem) -> float:
    if problem.known_L is None or problem.known_L <= 0:
        raise ValueError("fixed-step baselines need problem.known_L")
    return problem.known_L


def _run_fixed_step(problem, config, z0, greedy):
    z0 = problem.check_dim(z0)
    if math.isinf(float(problem.h_eval(z0))):
        raise ValueError("z0 is infeasible: h(z0) = +inf")
    start = time.monotonic()
    L_bar = _require_L(problem)
    gamma = (config.greedy_gamma_scale if greedy else 1.0) / L_bar
    oracle = CountingOracle(problem)
    denom = _residual_denominator(problem, z0, config.residual_mode)
    trace: Optional[List[SfistaTraceRow]] = [] if config.trace else None

    t = 1.0
    y_prev = z0
    x_tilde = z0
    restarts = 0
    grow_streak = 0
    step_prev = math.inf
    v = np.zeros(problem.dim)
    y = z0
    status = "iter_cap"
    j = 0
    while j < config.max_total_iters:
        if time.monotonic() - start > config.time_limit:
            status = "time_cap"
            break
        j += 1
        g_xt = oracle.grad(x_tilde)
        y = oracle.prox(x_tilde - gamma * g_xt, gamma)
        v = oracle.grad(y) - g_xt + (x_tilde - y) / gamma
        residual = float(np.linalg.norm(v)) / denom
        if trace is not None:
            trace.append(SfistaTraceRow(
                cycle=restarts + 1, j=j, L=1.0 / gamma, A=math.nan, tau=math.nan,
                a=math.nan, tau_prev=math.nan, v_norm=float(np.linalg.norm(v)),
                phi_xi=math.nan, restarted=False,
            ))
        if residual <= config.eps_hat:
            status = "converged"
            break

        if config.greedy_safeguard:
            step = float(np.linalg.norm(y - y_prev))
            grow_streak = grow_streak + 1 if step > step_prev else 0
            step_prev = step
            if grow_streak >= 10:
                gamma *= 0.5
                grow_streak = 0

        if gradient_restart_fires(y_prev, y, x_tilde):
            t = 1.0
            x_tilde = y
            restarts += 1
            if trace is not None:
                trace[-1].restarted = True
        elif greedy:
            x_tilde = y + (y - y_prev)
        else:
            t_next = (config.rada_p + math.sqrt(config.rada_q + config.rada_r * t * t)) / 2.0
            x_tilde = y + ((t - 1.0) / t_next) * (y - y_prev)
            t = t_next
        y_prev = y

    return SfistaOutput(
        y=y, v=v, xi=y, L_final=1.0 / gamma, cycles=restarts + 1, total_iters=j,
        counters=oracle.counters, status=status,
        residual=float(np.linalg.norm(v)) / denom, trace=trace,
        runtime_s=time.monotonic() - start,
    )


def solve_rada_fista(problem: CompositeProblem, config: BaselineConfig, z0: np.ndarray) -> SfistaOutput:
    """Fixed-step FISTA with the (p, q, r) momentum sequence and gradient
    restarts; stepsize 1/L."""
    return _run_fixed_step(problem, config, z0, greedy=False)


def solve_greedy_fista(problem: CompositeProblem, config: BaselineConfig, z0: np.ndarray) -> SfistaOutput:
    """Fixed-step FISTA with unit momentum, stepsize 1.3/L, gradient restarts,
    and an optional stepsize-halving safeguard (off by default)."""
    return _run_fixed_step(problem, config, z0, greedy=True)
