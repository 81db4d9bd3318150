"""First-order optimizers with a common step interface.

Each optimizer keeps its own state and exposes ``step(theta, objective)``,
where ``objective`` provides ``cost(theta)`` and ``grad(theta)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Protocol

import numpy as np


class Objective(Protocol):
    def cost(self, theta: np.ndarray) -> float: ...

    def grad(self, theta: np.ndarray) -> np.ndarray: ...


class OptimizerKind(str, Enum):
    ADAM = "adam"
    ADAGRAD = "adagrad"
    NESTEROV = "nesterov"
    GD = "gd"
    CG = "cg"

    @classmethod
    def parse(cls, name: str) -> "OptimizerKind":
        aliases = {
            "adam": cls.ADAM,
            "adagrad": cls.ADAGRAD,
            "nesterov": cls.NESTEROV,
            "nesterovmomentum": cls.NESTEROV,
            "gd": cls.GD,
            "vanillagd": cls.GD,
            "sgd": cls.GD,
            "cg": cls.CG,
            "nonlinearcg": cls.CG,
            "conjugate-gradient": cls.CG,
        }
        try:
            return aliases[name.strip().lower().replace("_", "")]
        except KeyError:
            raise ValueError(f"unknown optimizer {name!r}") from None


@dataclass
class OptimizerConfig:
    kind: OptimizerKind = OptimizerKind.ADAM
    step_rate: float = 0.01
    tol: float = 1e-7
    max_cycles: int = 2000
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    momentum: float = 0.9
    # CG line search: first trial step, shrink factor, Armijo constant, probe cap
    cg_initial_step: float = 1.0
    cg_shrink: float = 0.5
    cg_armijo: float = 1e-4
    cg_max_probes: int = 30

    def __post_init__(self):
        if not isinstance(self.kind, OptimizerKind):
            self.kind = OptimizerKind.parse(str(self.kind))
        if self.step_rate <= 0:
            raise ValueError("step_rate must be positive")
        if self.tol <= 0:
            raise ValueError("tol must be positive")
        if self.max_cycles < 1:
            raise ValueError("max_cycles must be at least 1")


class Adam:
    def __init__(self, cfg: OptimizerConfig):
        self.lr, self.b1, self.b2, self.eps = cfg.step_rate, cfg.beta1, cfg.beta2, cfg.eps
        self.m = self.v = None
        self.t = 0

    def step(self, theta: np.ndarray, objective: Objective) -> np.ndarray:
        g = objective.grad(theta)
        if self.m is None:
            self.m = np.zeros_like(theta)
            self.v = np.zeros_like(theta)
        self.t += 1
        self.m = self.b1 * self.m + (1 - self.b1) * g
        self.v = self.b2 * self.v + (1 - self.b2) * g * g
        m_hat = self.m / (1 - self.b1**self.t)
        v_hat = self.v / (1 - self.b2**self.t)
        return theta - self.lr * m_hat / (np.sqrt(v_hat) + self.eps)


class Adagrad:
    def __init__(self, cfg: OptimizerConfig):
        self.lr, self.eps = cfg.step_rate, cfg.eps
        self.acc = None

    def step(self, theta: np.ndarray, objective: Objective) -> np.ndarray:
        g = objective.grad(theta)
        if self.acc is None:
            self.acc = np.zeros_like(theta)
        self.acc += g * g
        return theta - self.lr * g / np.sqrt(self.acc + self.eps)


class Nesterov:
    """Momentum with the gradient taken at the look-ahead point."""

    def __init__(self, cfg: OptimizerConfig):
        self.lr, self.mu = cfg.step_rate, cfg.momentum
        self.velocity = None

    def step(self, theta: np.ndarray, objective: Objective) -> np.ndarray:
        if self.velocity is None:
            self.velocity = np.zeros_like(theta)
        g = objective.grad(theta - self.mu * self.velocity)
        self.velocity = self.mu * self.velocity + self.lr * g
        return theta - self.velocity


class GradientDescent:
    def __init__(self, cfg: OptimizerConfig):
        self.lr = cfg.step_rate

    def step(self, theta: np.ndarray, objective: Objective) -> np.ndarray:
        return theta - self.lr * objective.grad(theta)


class ConjugateGradient:
    """Polak-Ribiere (PR+) nonlinear CG with backtracking Armijo line search."""

    def __init__(self, cfg: OptimizerConfig):
        self.cfg = cfg
        self.g_prev = None
        self.d_prev = None
        self.alpha = cfg.cg_initial_step
        self.probes = 0

    def step(self, theta: np.ndarray, objective: Objective) -> np.ndarray:
        cfg = self.cfg
        g = objective.grad(theta)
        if self.g_prev is None:
            d = -g
        else:
            beta = max(0.0, float(g @ (g - self.g_prev)) / max(float(self.g_prev @ self.g_prev), 1e-300))
            d = -g + beta * self.d_prev
            if float(g @ d) >= 0:
                d = -g
        slope = float(g @ d)
        f0 = objective.cost(theta)
        self.probes += 1
        alpha = min(cfg.cg_initial_step, 2.0 * self.alpha)
        new = theta
        for _ in range(cfg.cg_max_probes):
            trial = theta + alpha * d
            f = objective.cost(trial)
            self.probes += 1
            if f <= f0 + cfg.cg_armijo * alpha * slope:
                new = trial
                break
            alpha *= cfg.cg_shrink
        else:
            # no sufficient decrease; restart along steepest descent next time
            self.g_prev, self.d_prev = None, None
            return theta
        self.alpha = alpha
        self.g_prev, self.d_prev = g, d
        return new


def make_optimizer(cfg: OptimizerConfig):
    return {
        OptimizerKind.ADAM: Adam,
        OptimizerKind.ADAGRAD: Adagrad,
        OptimizerKind.NESTEROV: Nesterov,
        OptimizerKind.GD: GradientDescent,
        OptimizerKind.CG: ConjugateGradient,
    }[cfg.kind](cfg)
