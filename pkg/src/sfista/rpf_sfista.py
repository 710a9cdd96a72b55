"""Restarted parameter-free strongly-convex FISTA (RPF-SFISTA).

The solver runs cycles of an accelerated composite gradient iteration with a
backtracking line search for the local smoothness constant L and an aggressive
estimate mu of the strong convexity modulus of the full composite objective.
A checkable inequality is tested every iteration; when it fails the cycle
restarts from the best point found so far with a smaller mu (warm restart).
No knowledge of the true Lipschitz or strong convexity constants is needed.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from .core import CompositeProblem, CountingOracle, OracleCounters

__all__ = [
    "SfistaConfig",
    "SfistaState",
    "SfistaOutput",
    "SfistaTraceRow",
    "solve_sfista",
    "backtracking_step",
    "momentum_update",
    "restart_check",
    "bootstrap_mu0",
    "eval_gamma",
    "GammaSnapshot",
]

# Guard below which ||y - x_tilde|| is treated as zero (relative to iterate
# scale): the restart test's right-hand side vanishes and v is near-exact.
_STATIONARY_RTOL = 1e-14
# Slack in the line-search acceptance: the two sides cancel to roundoff when
# the iterates are nearly stationary.
_LS_SLACK = 1e-12
_L_OVERFLOW = 1e30


@dataclass
class SfistaConfig:
    """Inputs and tuning knobs of the restarted solver.

    mu0=None selects the bootstrap estimate computed from the first prox step
    of the first cycle; a positive float fixes the initial estimate.
    mu_shrink=0.5 matches the theory; 0.1 is the aggressive experimental
    preset.  residual_mode 'absolute' tests ||v|| <= eps_hat, 'relative'
    tests ||v|| / (1 + ||grad f(z0)||) <= eps_hat.
    """

    beta: float = 1.25
    chi: float = 0.001
    M_lower_init: float = 10.0
    mu0: Optional[float] = None
    mu_shrink: float = 0.5
    M_reuse_factor: float = 0.4
    eps_hat: float = 1e-8
    residual_mode: str = "absolute"
    max_total_iters: int = 10**6
    time_limit: float = 7200.0
    trace: bool = False
    trace_vectors: bool = False

    def __post_init__(self):
        if self.beta <= 1:
            raise ValueError("beta must exceed 1")
        if not 0 < self.chi < 1:
            raise ValueError("chi must lie in (0, 1)")
        if self.M_lower_init <= 0:
            raise ValueError("M_lower_init must be positive")
        if self.mu0 is not None and self.mu0 <= 0:
            raise ValueError("fixed mu0 must be positive")
        if not 0 < self.mu_shrink < 1:
            raise ValueError("mu_shrink must lie in (0, 1)")
        if self.eps_hat <= 0:
            raise ValueError("eps_hat must be positive")
        if self.residual_mode not in ("absolute", "relative"):
            raise ValueError(f"unknown residual_mode {self.residual_mode!r}")

    @property
    def kappa(self) -> float:
        """Worst-case line-search overshoot factor 2*beta/(1-chi)."""
        return 2.0 * self.beta / (1.0 - self.chi)


@dataclass
class SfistaState:
    """All per-iteration quantities of one cycle."""

    cycle: int
    j: int
    A: float
    tau: float
    L: float
    mu: float
    x: np.ndarray
    y: np.ndarray
    xi: np.ndarray
    x0_cycle: np.ndarray
    phi_xi: float
    # whether xi has left the cycle's start point (always true in exact
    # arithmetic after j = 1, by strict descent of the first prox step)
    xi_moved: bool = False
    # step-2/3 outputs of the current iteration
    a: float = 0.0
    x_tilde: Optional[np.ndarray] = None
    s: Optional[np.ndarray] = None
    v: Optional[np.ndarray] = None
    grad_x_tilde: Optional[np.ndarray] = None
    f_y: float = math.nan
    ell_y: float = math.nan


@dataclass
class SfistaTraceRow:
    cycle: int
    j: int
    L: float
    A: float
    tau: float
    a: float
    tau_prev: float
    v_norm: float
    phi_xi: float
    restarted: bool
    # vector snapshot for estimate-sequence diagnostics (trace_vectors only)
    y: Optional[np.ndarray] = None
    x_tilde: Optional[np.ndarray] = None
    s: Optional[np.ndarray] = None
    mu: float = math.nan


@dataclass
class SfistaOutput:
    y: np.ndarray
    v: np.ndarray
    xi: np.ndarray
    L_final: float
    cycles: int
    total_iters: int
    counters: OracleCounters
    status: str  # 'converged' | 'iter_cap' | 'time_cap'
    residual: float
    trace: Optional[List[SfistaTraceRow]] = None
    runtime_s: float = 0.0


def backtracking_step(state: SfistaState, oracle: CountingOracle, config: SfistaConfig):
    """One accelerated prox step with line search on L.

    Multiplies L by beta until the local descent inequality
    ell_f(y; x_tilde) + (1-chi) L ||y - x_tilde||^2 / 4 >= f(y) holds, then
    records (a, x_tilde, y, L) and the quantities needed downstream in the
    state.  Every rejected L consumed one prox evaluation.
    """
    A, tau, L = state.A, state.tau, state.L
    x_prev, y_prev = state.x, state.y
    while True:
        a = (tau + math.sqrt(tau * tau + 4.0 * tau * A * L)) / (2.0 * L)
        x_tilde = (A * y_prev + a * x_prev) / (A + a)
        g_xt = oracle.grad(x_tilde)
        f_xt = oracle.f(x_tilde)
        y = oracle.prox(x_tilde - g_xt / L, 1.0 / L)
        f_y = oracle.f(y)
        d = y - x_tilde
        nd2 = float(d @ d)
        ell = f_xt + float(g_xt @ d)
        if ell - f_y + (1.0 - config.chi) * L * nd2 / 4.0 >= -_LS_SLACK * (1.0 + abs(f_y)):
            break
        L *= config.beta
        if L > _L_OVERFLOW:
            raise RuntimeError(
                "line search exceeded L = 1e30; f is not smooth or the oracle is broken"
            )
    state.a = a
    state.x_tilde = x_tilde
    state.grad_x_tilde = g_xt
    state.L = L
    state.f_y = f_y
    state.ell_y = ell
    return a, x_tilde, y, L


def bootstrap_mu0(
    y1: np.ndarray,
    x0: np.ndarray,
    problem: CompositeProblem,
    chi: float = 0.001,
    fallback: float = 10.0,
) -> float:
    """Data-driven initial strong-convexity estimate from the first prox step.

    Returns 4 [f(y1) - ell_f(y1; x0)] / ((1-chi) ||y1 - x0||^2).  When y1 is
    numerically indistinguishable from x0, or the curvature gap is zero
    (linear f), falls back to the given constant.
    """
    y1 = np.asarray(y1, dtype=float)
    x0 = np.asarray(x0, dtype=float)
    d = y1 - x0
    nd2 = float(d @ d)
    if math.sqrt(nd2) <= _STATIONARY_RTOL * (1.0 + float(np.linalg.norm(x0))):
        return fallback
    gap = float(problem.f_eval(y1)) - (
        float(problem.f_eval(x0)) + float(np.asarray(problem.f_grad(x0)) @ d)
    )
    if gap <= 0.0:
        return fallback
    return 4.0 * gap / ((1.0 - chi) * nd2)


def momentum_update(
    state: SfistaState, y_j: np.ndarray, L_j: float, a_prev: float, oracle: CountingOracle
) -> SfistaState:
    """Step-3 updates: best-point, A, tau, s, x, and the residual vector v.

    The best-point tie (phi(y_j) equal to the incumbent) keeps y_j.
    """
    phi_y = state.f_y + oracle.h(y_j)
    if phi_y <= state.phi_xi:
        state.xi = y_j
        state.phi_xi = phi_y
        state.xi_moved = True
    tau_prev = state.tau
    state.A = state.A + a_prev
    state.tau = tau_prev + a_prev * state.mu / 2.0
    s = L_j * (state.x_tilde - y_j)
    state.x = (state.mu * a_prev * y_j / 2.0 + tau_prev * state.x - a_prev * s) / state.tau
    state.s = s
    state.v = oracle.grad(y_j) - state.grad_x_tilde + s
    state.y = y_j
    return state


def restart_check(state: SfistaState, config: SfistaConfig) -> str:
    """'continue' iff ||xi - x0||^2 >= chi A L ||y - x_tilde||^2, else 'restart'.

    Two roundoff guards skip the check.  A near-stationary y (||y - x_tilde||
    at roundoff scale) makes the right-hand side vanish, so a restart would be
    spurious.  And if xi never left the cycle's start point, the first prox
    step failed to decrease phi -- impossible in exact arithmetic -- so the
    iterates are at the numerical optimum and a restart would re-enter the
    same cycle forever.
    """
    if not state.xi_moved:
        return "continue"
    d = state.y - state.x_tilde
    nd = float(np.linalg.norm(d))
    if nd <= _STATIONARY_RTOL * (1.0 + float(np.linalg.norm(state.x_tilde))):
        return "continue"
    lhs = float(np.linalg.norm(state.xi - state.x0_cycle)) ** 2
    rhs = config.chi * state.A * state.L * nd * nd
    return "continue" if lhs >= rhs else "restart"


@dataclass
class GammaSnapshot:
    """Per-iteration quantities needed to evaluate the quadratic minorant."""

    y: np.ndarray
    x_tilde: np.ndarray
    s: np.ndarray
    mu: float


def eval_gamma(snapshot: GammaSnapshot, problem: CompositeProblem, x: np.ndarray) -> float:
    """Quadratic under-estimator of the composite objective at x.

    gamma(x) = phi(y) + 2 [ell_f(y; x_tilde) - f(y)] + <s, x - y>
               + (mu / 4) ||x - y||^2.
    Lower-bounds phi everywhere whenever mu does not exceed the true strong
    convexity modulus of phi.  Diagnostic only.
    """
    y, xt, s, mu = snapshot.y, snapshot.x_tilde, snapshot.s, snapshot.mu
    f_y = float(problem.f_eval(y))
    ell = float(problem.f_eval(xt)) + float(np.asarray(problem.f_grad(xt)) @ (y - xt))
    phi_y = f_y + float(problem.h_eval(y))
    d = np.asarray(x, dtype=float) - y
    return phi_y + 2.0 * (ell - f_y) + float(s @ d) + mu / 4.0 * float(d @ d)


def _clamp_m_lower(target: float, M_bar_prev: float, M_bar0: float) -> float:
    lo = max(0.25 * M_bar_prev, M_bar0)
    hi = M_bar_prev
    if lo > hi:
        # M_bar0 exceeds the previous cycle's exit L; the legal interval
        # degenerates to its upper end.
        return hi
    return min(max(target, lo), hi)


def solve_sfista(
    problem: CompositeProblem, config: SfistaConfig, z0: np.ndarray
) -> SfistaOutput:
    """Run RPF-SFISTA from z0 until the residual test, or a cap, is met."""
    z0 = problem.check_dim(z0)
    if math.isinf(float(problem.h_eval(z0))):
        raise ValueError("z0 is infeasible: h(z0) = +inf")

    start = time.monotonic()
    oracle = CountingOracle(problem)
    denom = 1.0
    if config.residual_mode == "relative":
        denom = 1.0 + float(np.linalg.norm(problem.f_grad(z0)))

    trace: Optional[List[SfistaTraceRow]] = [] if config.trace else None
    M_bar0 = config.M_lower_init
    mu = config.mu0  # None until bootstrapped
    cycle = 1
    M_lower = M_bar0
    z_cycle = z0
    phi_z = oracle.phi(z0)
    total_iters = 0

    state = SfistaState(
        cycle=cycle, j=1, A=0.0, tau=1.0, L=M_lower,
        mu=mu if mu is not None else math.nan,
        x=z_cycle, y=z_cycle, xi=z_cycle, x0_cycle=z_cycle, phi_xi=phi_z,
    )

    status = "iter_cap"
    while True:
        if total_iters >= config.max_total_iters:
            status = "iter_cap"
            break
        if time.monotonic() - start > config.time_limit:
            status = "time_cap"
            break
        total_iters += 1

        a, x_tilde, y, L = backtracking_step(state, oracle, config)

        if mu is None:
            # a0 and y1 never depend on mu (A0 = 0), so the bootstrap value
            # can be installed right before the first tau/x update.
            d = y - x_tilde
            nd2 = float(d @ d)
            gap = state.f_y - state.ell_y
            if math.sqrt(nd2) <= _STATIONARY_RTOL * (
                1.0 + float(np.linalg.norm(x_tilde))
            ) or gap <= 0.0:
                mu = config.M_lower_init
            else:
                mu = 4.0 * gap / ((1.0 - config.chi) * nd2)
            state.mu = mu

        tau_prev = state.tau
        momentum_update(state, y, L, a, oracle)

        if trace is not None:
            trace.append(SfistaTraceRow(
                cycle=state.cycle, j=state.j, L=state.L, A=state.A, tau=state.tau,
                a=a, tau_prev=tau_prev,
                v_norm=float(np.linalg.norm(state.v)), phi_xi=state.phi_xi,
                restarted=False,
                y=y.copy() if config.trace_vectors else None,
                x_tilde=x_tilde.copy() if config.trace_vectors else None,
                s=state.s.copy() if config.trace_vectors else None,
                mu=state.mu,
            ))

        if restart_check(state, config) == "restart":
            if trace is not None:
                trace[-1].restarted = True
            M_bar = state.L
            mu = config.mu_shrink * mu
            cycle += 1
            M_lower = _clamp_m_lower(config.M_reuse_factor * M_bar, M_bar, M_bar0)
            z_cycle = state.xi
            state = SfistaState(
                cycle=cycle, j=1, A=0.0, tau=1.0, L=M_lower, mu=mu,
                x=z_cycle, y=z_cycle, xi=z_cycle, x0_cycle=z_cycle,
                phi_xi=state.phi_xi,
            )
            continue

        residual = float(np.linalg.norm(state.v)) / denom
        if residual <= config.eps_hat:
            status = "converged"
            break

        state.j += 1

    residual = float(np.linalg.norm(state.v)) / denom if state.v is not None else math.inf
    return SfistaOutput(
        y=state.y, v=state.v if state.v is not None else np.zeros(problem.dim),
        xi=state.xi, L_final=state.L, cycles=cycle, total_iters=total_iters,
        counters=oracle.counters, status=status, residual=residual, trace=trace,
        runtime_s=time.monotonic() - start,
    )
