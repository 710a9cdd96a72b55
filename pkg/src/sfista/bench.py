"""Benchmark harness: run method x instance grids, record counts and times,
compute the average time ratio (ATR), and emit csv/markdown tables.

Time limiting is cooperative (each solver checks elapsed time once per
iteration), which keeps iterate sequences deterministic.  Records are merged
in suite order regardless of worker scheduling, so output files are
byte-reproducible apart from the runtime column.
"""

from __future__ import annotations

import concurrent.futures
import csv
import io
import math
import time
from dataclasses import dataclass, replace
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np

from .baselines import (
    BaselineConfig,
    solve_fista_bt,
    solve_fista_restart,
    solve_greedy_fista,
    solve_rada_fista,
)
from .core import CompositeProblem
from .problems import InstanceSpec, make_instance
from .rpf_sfista import SfistaConfig, solve_sfista

__all__ = [
    "RunRecord",
    "METHODS",
    "relative_residual",
    "compute_atr",
    "run_benchmark",
    "emit_table",
    "parse_csv",
    "atr_from_records",
    "desk_suite",
]

_MIN_TICK = 1e-9  # one timer tick: floor for recorded runtimes

CSV_COLUMNS = [
    "instance_id", "family", "m", "n", "param", "method", "status",
    "iters", "prox_evals", "grad_evals", "runtime_s", "rel_residual", "seed",
]


@dataclass
class RunRecord:
    """One benchmark row: one method on one instance."""

    instance_id: str
    family: str
    m: int
    n: int
    param: str
    method: str
    status: str  # 'converged' | 'iter_cap' | 'time_cap' | 'error'
    iters: int
    prox_evals: int
    grad_evals: int
    runtime_s: float
    rel_residual: float
    seed: int


def relative_residual(v: np.ndarray, grad_f_z0: np.ndarray) -> float:
    """||v|| / (1 + ||grad f(z0)||)."""
    return float(np.linalg.norm(v)) / (1.0 + float(np.linalg.norm(grad_f_z0)))


def compute_atr(
    best_other_times: Sequence[float],
    rpf_times: Sequence[float],
    time_limit: float,
) -> float:
    """Average time ratio (1/N) sum b_i/r_i.

    Times that exceed the limit (timeouts) are clamped to the limit before
    taking ratios; every time is floored at one timer tick so the ratio is
    always finite.
    """
    if len(best_other_times) == 0 or len(rpf_times) == 0:
        raise ValueError("ATR needs at least one paired run")
    if len(best_other_times) != len(rpf_times):
        raise ValueError("ATR inputs must have equal length")
    total = 0.0
    for b, r in zip(best_other_times, rpf_times):
        b = min(b, time_limit)
        r = min(r, time_limit)
        total += max(b, _MIN_TICK) / max(r, _MIN_TICK)
    return total / len(rpf_times)


def _solve_rpf(problem, z0, eps_hat, time_limit):
    # mu_shrink 0.1 is the practical restart schedule; the 0.5 default in
    # SfistaConfig is the conservative theory value
    cfg = SfistaConfig(eps_hat=eps_hat, residual_mode="relative",
                       time_limit=time_limit, mu_shrink=0.1)
    return solve_sfista(problem, cfg, z0)


def _make_baseline_runner(fn):
    def run(problem, z0, eps_hat, time_limit):
        cfg = BaselineConfig(eps_hat=eps_hat, residual_mode="relative", time_limit=time_limit)
        return fn(problem, cfg, z0)
    return run


METHODS: Dict[str, Callable] = {
    "rpf-sfista": _solve_rpf,
    "fista-bt": _make_baseline_runner(solve_fista_bt),
    "fista-r": _make_baseline_runner(solve_fista_restart),
    "rada": _make_baseline_runner(solve_rada_fista),
    "greedy": _make_baseline_runner(solve_greedy_fista),
}


def _run_one(spec: InstanceSpec, method: str, eps_hat: float, time_limit: float) -> RunRecord:
    try:
        problem, z0 = make_instance(spec)
        out = METHODS[method](problem, z0, eps_hat, time_limit)
        return RunRecord(
            instance_id=spec.instance_id, family=spec.family, m=spec.m, n=spec.n,
            param=spec.param, method=method, status=out.status,
            iters=out.total_iters, prox_evals=out.counters.prox_evals,
            grad_evals=out.counters.grad_evals,
            runtime_s=max(out.runtime_s, _MIN_TICK),
            rel_residual=out.residual, seed=spec.seed,
        )
    except Exception as exc:  # per-row capture: one bad run must not kill the suite
        return RunRecord(
            instance_id=spec.instance_id, family=spec.family, m=spec.m, n=spec.n,
            param=spec.param, method=method, status=f"error:{type(exc).__name__}",
            iters=0, prox_evals=0, grad_evals=0, runtime_s=0.0,
            rel_residual=math.inf, seed=spec.seed,
        )


def run_benchmark(
    suite: Sequence[InstanceSpec],
    methods: Sequence[str],
    eps_hat: float,
    time_limit: float,
    out_path: Optional[str] = None,
    workers: int = 1,
) -> List[RunRecord]:
    """Run every method on every instance; optionally write the csv table.

    Instances may run across worker threads, but records come back in suite
    order so the output is deterministic regardless of scheduling.
    """
    if len(suite) == 0:
        raise ValueError("suite must be nonempty")
    unknown = [m for m in methods if m not in METHODS]
    if unknown:
        raise ValueError(f"unknown methods: {unknown}; choose from {sorted(METHODS)}")

    jobs = [(spec, method) for spec in suite for method in methods]
    if workers <= 1:
        records = [_run_one(spec, method, eps_hat, time_limit) for spec, method in jobs]
    else:
        with concurrent.futures.ThreadPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(_run_one, spec, method, eps_hat, time_limit)
                       for spec, method in jobs]
            records = [f.result() for f in futures]

    if out_path is not None:
        with open(out_path, "w", newline="") as fh:
            fh.write(emit_table(records, "csv"))
    return records


def emit_table(records: Sequence[RunRecord], format: str = "csv") -> str:
    """Render records as csv (13 fixed columns) or a grouped markdown table.

    Markdown groups rows per instance, bolds the best iteration count and
    runtime within each group (ties: all bolded), and renders non-converged
    entries as "*/<achieved residual>".
    """
    if len(records) == 0:
        raise ValueError("no records to emit")
    if format == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for rec in records:
            writer.writerow([
                rec.instance_id, rec.family, rec.m, rec.n, rec.param,
                rec.method, rec.status, rec.iters, rec.prox_evals,
                rec.grad_evals, repr(rec.runtime_s), repr(rec.rel_residual),
                rec.seed,
            ])
        return buf.getvalue()
    if format != "markdown":
        raise ValueError(f"unknown format {format!r}")

    groups: Dict[str, List[RunRecord]] = {}
    order: List[str] = []
    for rec in records:
        if rec.instance_id not in groups:
            groups[rec.instance_id] = []
            order.append(rec.instance_id)
        groups[rec.instance_id].append(rec)

    lines = ["| instance | method | iters | runtime (s) |",
             "| --- | --- | --- | --- |"]
    for iid in order:
        rows = groups[iid]
        converged = [r for r in rows if r.status == "converged"]
        best_iters = min((r.iters for r in converged), default=None)
        best_time = min((r.runtime_s for r in converged), default=None)
        for rec in rows:
            if rec.status == "converged":
                it_cell = str(rec.iters)
                rt_cell = f"{rec.runtime_s:.3g}"
                if rec.iters == best_iters:
                    it_cell = f"**{it_cell}**"
                if rec.runtime_s == best_time:
                    rt_cell = f"**{rt_cell}**"
            else:
                it_cell = f"*/{rec.rel_residual:.1e}"
                rt_cell = f"*/{rec.rel_residual:.1e}"
            lines.append(f"| {iid} | {rec.method} | {it_cell} | {rt_cell} |")
    return "\n".join(lines) + "\n"


def parse_csv(text: str) -> List[RunRecord]:
    """Inverse of emit_table(..., 'csv'): field-for-field round-trip."""
    reader = csv.reader(io.StringIO(text))
    header = next(reader, None)
    if header != CSV_COLUMNS:
        raise ValueError(f"unexpected csv header: {header}")
    records = []
    for row in reader:
        if not row:
            continue
        if len(row) != len(CSV_COLUMNS):
            raise ValueError(f"expected {len(CSV_COLUMNS)} fields, got {len(row)}")
        records.append(RunRecord(
            instance_id=row[0], family=row[1], m=int(row[2]), n=int(row[3]),
            param=row[4], method=row[5], status=row[6], iters=int(row[7]),
            prox_evals=int(row[8]), grad_evals=int(row[9]),
            runtime_s=float(row[10]), rel_residual=float(row[11]),
            seed=int(row[12]),
        ))
    return records


def atr_from_records(
    records: Sequence[RunRecord],
    subject: str = "rpf-sfista",
    time_limit: float = 7200.0,
    baseline: Optional[str] = None,
) -> float:
    """Suite-level ATR of the subject method versus the best other method
    (or one named baseline) per instance."""
    by_instance: Dict[str, Dict[str, RunRecord]] = {}
    for rec in records:
        by_instance.setdefault(rec.instance_id, {})[rec.method] = rec

    def effective_time(rec: RunRecord) -> float:
        if rec.status != "converged":
            return time_limit
        return rec.runtime_s

    subject_times, other_times = [], []
    for iid, methods in by_instance.items():
        if subject not in methods:
            continue
        if baseline is not None:
            pool = [methods[baseline]] if baseline in methods else []
        else:
            pool = [r for m, r in methods.items() if m != subject]
        if not pool:
            continue
        subject_times.append(effective_time(methods[subject]))
        other_times.append(min(effective_time(r) for r in pool))
    return compute_atr(other_times, subject_times, time_limit)


def desk_suite(family: str, seed: int = 42, count: int = 4) -> List[InstanceSpec]:
    """Small seeded instance grids that finish in seconds per run."""
    if family == "logistic":
        shapes = [(60, 40), (80, 50), (100, 60), (120, 80)]
        return [InstanceSpec("logistic", m, n, seed + i, C=1.0)
                for i, (m, n) in enumerate(shapes[:count])]
    if family == "lasso":
        shapes = [(60, 120), (80, 160), (100, 200), (120, 240)]
        return [InstanceSpec("lasso", m, n, seed + i, C=5.0)
                for i, (m, n) in enumerate(shapes[:count])]
    if family == "qp_simplex":
        sizes = [40, 60, 80, 100]
        return [InstanceSpec("qp_simplex", n, n, seed + i, alpha=100.0,
                             mu_target=1e-4, L_target=1e2)
                for i, n in enumerate(sizes[:count])]
    if family == "qp_box":
        # m = n/2 keeps the least-squares block rank deficient, matching the
        # regime where the adaptive solvers separate from the fixed-step ones
        sizes = [80, 100, 120, 160]
        return [InstanceSpec("qp_box", n // 2, n, seed + i, alpha=1000.0,
                             mu_target=1e-4, L_target=1e2, a_pattern="last1")
                for i, n in enumerate(sizes[:count])]
    raise ValueError(f"unknown family {family!r}")
