"""Composite problem abstraction and shared numerical utilities.

A composite problem is min f(z) + h(z) with f smooth convex and h closed
proper convex (typically the indicator of a constraint set).  Problems are
immutable oracle bundles; all mutable per-solve state (iterates, counters)
lives in the solver.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

__all__ = [
    "CompositeProblem",
    "OracleCounters",
    "CountingOracle",
    "eval_phi",
    "grad_fd_check",
]


@dataclass(frozen=True)
class CompositeProblem:
    """Oracle bundle for min f(z) + h(z).

    h_eval may return +inf (infeasible point of an indicator).  h_prox(p, lam)
    returns argmin_u h(u) + ||u - p||^2 / (2 lam); for indicator h this is the
    Euclidean projection and is independent of lam.
    """

    dim: int
    f_eval: Callable[[np.ndarray], float]
    f_grad: Callable[[np.ndarray], np.ndarray]
    h_prox: Callable[[np.ndarray, float], np.ndarray]
    h_eval: Callable[[np.ndarray], float]
    known_L: Optional[float] = None
    known_mu_f: Optional[float] = None

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError(f"dim must be positive, got {self.dim}")

    def check_dim(self, z: np.ndarray) -> np.ndarray:
        z = np.asarray(z, dtype=float)
        if z.shape != (self.dim,):
            raise ValueError(f"expected vector of length {self.dim}, got shape {z.shape}")
        return z


@dataclass
class OracleCounters:
    """Counts of oracle calls made during one solve.

    prox_evals counts every prox execution, including line-search repeats.
    """

    grad_evals: int = 0
    f_evals: int = 0
    prox_evals: int = 0

    def merge(self, other: "OracleCounters") -> None:
        self.grad_evals += other.grad_evals
        self.f_evals += other.f_evals
        self.prox_evals += other.prox_evals


class CountingOracle:
    """Wraps a CompositeProblem, incrementing counters on each oracle call.

    One instance per solve; the underlying problem stays immutable and
    shareable across concurrent solves.
    """

    def __init__(self, problem: CompositeProblem, counters: OracleCounters | None = None):
        self.problem = problem
        self.counters = counters if counters is not None else OracleCounters()

    def f(self, z: np.ndarray) -> float:
        self.counters.f_evals += 1
        return float(self.problem.f_eval(z))

    def grad(self, z: np.ndarray) -> np.ndarray:
        self.counters.grad_evals += 1
        return np.asarray(self.problem.f_grad(z), dtype=float)

    def prox(self, p: np.ndarray, lam: float) -> np.ndarray:
        self.counters.prox_evals += 1
        return np.asarray(self.problem.h_prox(p, lam), dtype=float)

    def h(self, z: np.ndarray) -> float:
        return float(self.problem.h_eval(z))

    def phi(self, z: np.ndarray) -> float:
        hz = self.h(z)
        if math.isinf(hz):
            return math.inf
        return self.f(z) + hz


def eval_phi(problem: CompositeProblem, z: np.ndarray) -> float:
    """Value of the composite objective f(z) + h(z); +inf iff h(z) = +inf."""
    z = problem.check_dim(z)
    hz = float(problem.h_eval(z))
    if math.isinf(hz):
        return math.inf
    return float(problem.f_eval(z)) + hz


def grad_fd_check(problem: CompositeProblem, z: np.ndarray, step: float) -> float:
    """Max coordinate-wise gap between f_grad and a central finite difference.

    Returns the discrepancy; the caller decides what counts as a failure.
    """
    z = problem.check_dim(z)
    if step <= 0:
        raise ValueError("step must be positive")
    g = np.asarray(problem.f_grad(z), dtype=float)
    worst = 0.0
    for i in range(problem.dim):
        e = np.zeros(problem.dim)
        e[i] = step
        fd = (problem.f_eval(z + e) - problem.f_eval(z - e)) / (2.0 * step)
        worst = max(worst, abs(fd - g[i]))
    return worst
