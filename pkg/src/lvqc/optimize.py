"""BFGS with central-difference gradients and a backtracking Armijo line search."""
from __future__ import annotations

import csv
import json
import math
import time
from concurrent.futures import Executor
from dataclasses import asdict, dataclass, field
from typing import Callable

import numpy as np

from .circuits import ParameterVector
from .errors import OptimizerError

Cost = Callable[[np.ndarray], float]


@dataclass(frozen=True)
class OptimizerConfig:
    max_iterations: int = 128
    h: float = 1e-5
    grad_tol: float = 1e-8
    cost_tol: float = 1e-12
    armijo: float = 1e-4
    backtrack: float = 0.5
    max_backtracks: int = 30

    def __post_init__(self):
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        for name in ("h", "grad_tol", "cost_tol", "armijo"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if not 0 < self.backtrack < 1:
            raise ValueError("backtrack factor must lie in (0, 1)")


@dataclass
class IterationRecord:
    iteration: int
    cost: float
    grad_norm: float
    step: float
    seconds: float


@dataclass
class OptimizationTrace:
    records: list[IterationRecord]
    theta_opt: np.ndarray
    termination: str
    n_evaluations: int = 0
    theta0: np.ndarray | None = None
    parameters: ParameterVector | None = field(default=None, repr=False)

    @property
    def costs(self) -> list[float]:
        return [r.cost for r in self.records]

    @property
    def final_cost(self) -> float:
        return self.records[-1].cost

    @property
    def converged(self) -> bool:
        return self.termination in ("gradient_tolerance", "cost_tolerance")

    def theta(self) -> ParameterVector:
        if self.parameters is None:
            raise ValueError("trace was produced from a raw array; no layout attached")
        return self.parameters.with_angles(self.theta_opt)

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as f:
            w = csv.writer(f)
            w.writerow(["iter", "cost", "grad_norm", "step", "seconds"])
            for r in self.records:
                w.writerow([r.iteration, repr(r.cost), repr(r.grad_norm), repr(r.step), f"{r.seconds:.6f}"])

    def to_dict(self) -> dict:
        return {
            "termination": self.termination,
            "n_evaluations": self.n_evaluations,
            "final_cost": self.final_cost,
            "theta_opt": self.theta_opt.tolist(),
            "history": [asdict(r) for r in self.records],
        }

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)


def finite_difference_gradient(cost: Cost, theta, h: float = 1e-5,
                               executor: Executor | None = None) -> np.ndarray:
    """Central differences ``(f(θ + h e_i) - f(θ - h e_i)) / 2h`` per coordinate."""
    if h <= 0:
        raise ValueError("step h must be positive")
    theta = np.asarray(theta, dtype=float)
    probes = []
    for i in range(theta.size):
        e = np.zeros_like(theta)
        e[i] = h
        probes += [theta + e, theta - e]
    values = list(executor.map(cost, probes)) if executor is not None else [cost(p) for p in probes]
    values = np.asarray(values, dtype=float)
    if not np.all(np.isfinite(values)):
        raise OptimizerError("non-finite cost at a gradient probe")
    return (values[0::2] - values[1::2]) / (2 * h)


def minimize(cost: Cost, theta0, cfg: OptimizerConfig = OptimizerConfig(),
             executor: Executor | None = None,
             callback: Callable[[IterationRecord], None] | None = None) -> OptimizationTrace:
    """Minimise ``cost`` from ``theta0`` (an array or a :class:`ParameterVector`)."""
    layout = theta0 if isinstance(theta0, ParameterVector) else None
    x = np.array(theta0.angles if layout is not None else theta0, dtype=float)
    n_eval = 0

    def f(z):
        nonlocal n_eval
        n_eval += 1
        return float(cost(z))

    def grad(z):
        nonlocal n_eval
        n_eval += 2 * z.size
        return finite_difference_gradient(cost, z, cfg.h, executor)

    start = time.perf_counter()
    fx = f(x)
    if not math.isfinite(fx):
        raise OptimizerError(f"cost is not finite at the starting point: {fx}")
    g = grad(x)
    records = [IterationRecord(0, fx, float(np.linalg.norm(g)), 0.0, time.perf_counter() - start)]
    if callback:
        callback(records[-1])
    Hinv = np.eye(x.size)
    reason = "max_iterations"

    for it in range(1, cfg.max_iterations + 1):
        if np.linalg.norm(g) <= cfg.grad_tol:
            reason = "gradient_tolerance"
            break
        p = -Hinv @ g
        slope = float(g @ p)
        if slope >= 0:  # lost descent direction; restart from steepest descent
            Hinv = np.eye(x.size)
            p, slope = -g, -float(g @ g)
        t = 1.0
        for _ in range(cfg.max_backtracks):
            x_new = x + t * p
            f_new = f(x_new)
            if math.isfinite(f_new) and f_new <= fx + cfg.armijo * t * slope:
                break
            t *= cfg.backtrack
        else:
            reason = "line_search_failure"
            break
        g_new = grad(x_new)
        s, yv = x_new - x, g_new - g
        improvement = fx - f_new
        x, fx, g = x_new, f_new, g_new
        records.append(IterationRecord(it, fx, float(np.linalg.norm(g)), float(np.linalg.norm(s)),
                                       time.perf_counter() - start))
        if callback:
            callback(records[-1])
        sy = float(s @ yv)
        if sy > 1e-14 * float(np.linalg.norm(s) * np.linalg.norm(yv)):
            if it == 1:
                Hinv *= sy / float(yv @ yv)  # scale the initial guess to the observed curvature
            rho = 1.0 / sy
            Hy = Hinv @ yv
            Hinv += (rho * rho * float(yv @ Hy) + rho) * np.outer(s, s) \
                - rho * (np.outer(Hy, s) + np.outer(s, Hy))
        if improvement <= cfg.cost_tol:
            reason = "cost_tolerance"
            break
    else:
        if np.linalg.norm(g) <= cfg.grad_tol:
            reason = "gradient_tolerance"

    return OptimizationTrace(records, x, reason, n_eval,
                             None if layout is None else layout.angles.copy(), layout)
