"""Composite problem abstraction: dimension checks, counters, phi, FD check."""

import math

import numpy as np
import pytest

from sfista.core import (
    CompositeProblem,
    CountingOracle,
    OracleCounters,
    eval_phi,
    grad_fd_check,
)


def _quadratic_problem(n=3):
    H = np.diag(np.arange(1.0, n + 1.0))
    return CompositeProblem(
        dim=n,
        f_eval=lambda z: 0.5 * float(z @ H @ z),
        f_grad=lambda z: H @ z,
        h_prox=lambda p, lam: p,
        h_eval=lambda z: 0.0,
        known_L=float(n),
        known_mu_f=1.0,
    )


def test_dim_validation():
    with pytest.raises(ValueError):
        CompositeProblem(
            dim=0, f_eval=lambda z: 0.0, f_grad=lambda z: z,
            h_prox=lambda p, lam: p, h_eval=lambda z: 0.0,
        )
    prob = _quadratic_problem(3)
    with pytest.raises(ValueError):
        prob.check_dim(np.zeros(4))
    out = prob.check_dim([1, 2, 3])
    assert out.dtype == float


def test_eval_phi_finite_and_infinite():
    prob = _quadratic_problem(2)
    assert eval_phi(prob, np.array([1.0, 1.0])) == pytest.approx(1.5)

    infeasible = CompositeProblem(
        dim=2, f_eval=lambda z: 1.0, f_grad=lambda z: z,
        h_prox=lambda p, lam: p, h_eval=lambda z: math.inf,
    )
    assert eval_phi(infeasible, np.zeros(2)) == math.inf


def test_counting_oracle_counts():
    prob = _quadratic_problem(2)
    oracle = CountingOracle(prob)
    z = np.ones(2)
    oracle.f(z)
    oracle.f(z)
    oracle.grad(z)
    oracle.prox(z, 0.5)
    oracle.prox(z, 0.5)
    oracle.prox(z, 0.5)
    assert oracle.counters.f_evals == 2
    assert oracle.counters.grad_evals == 1
    assert oracle.counters.prox_evals == 3


def test_counters_merge():
    a = OracleCounters(grad_evals=1, f_evals=2, prox_evals=3)
    b = OracleCounters(grad_evals=10, f_evals=20, prox_evals=30)
    a.merge(b)
    assert (a.grad_evals, a.f_evals, a.prox_evals) == (11, 22, 33)


def test_grad_fd_check_accepts_correct_gradient():
    prob = _quadratic_problem(4)
    rng = np.random.default_rng(0)
    z = rng.standard_normal(4)
    assert grad_fd_check(prob, z, 1e-6) < 1e-6


def test_grad_fd_check_flags_wrong_gradient():
    n = 3
    prob = CompositeProblem(
        dim=n,
        f_eval=lambda z: float(z @ z),
        f_grad=lambda z: z,  # wrong: should be 2z
        h_prox=lambda p, lam: p,
        h_eval=lambda z: 0.0,
    )
    assert grad_fd_check(prob, np.ones(n), 1e-6) > 0.5


def test_grad_fd_check_rejects_bad_step():
    prob = _quadratic_problem(2)
    with pytest.raises(ValueError):
        grad_fd_check(prob, np.zeros(2), 0.0)
