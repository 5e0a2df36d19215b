"""Records shared by the reweighing solvers."""

from __future__ import annotations

from dataclasses import dataclass, field, fields
from typing import Any, Mapping

import numpy as np

from .core import PromiseViolation


class WidthViolation(PromiseViolation):
    """A score exceeded the width parameter rho."""

    def __init__(self, iteration: int, score: float, rho: float):
        super().__init__(f"width violated at iteration {iteration}: score {score:.6g} > rho {rho:.6g}")
        self.iteration = iteration


@dataclass(frozen=True)
class PromiseParams:
    lam: float
    eps: float
    rho: float | None = None
    delta: float = 0.1

    def __post_init__(self):
        if not 0 < self.eps < 0.5:
            raise ValueError(f"eps must lie in (0, 1/2), got {self.eps}")
        if self.lam < 0:
            raise ValueError(f"lambda must be nonnegative, got {self.lam}")
        if self.rho is not None and self.rho < 0:
            raise ValueError(f"rho must be nonnegative, got {self.rho}")
        if not 0 < self.delta < 1:
            raise ValueError(f"delta must lie in (0, 1), got {self.delta}")


@dataclass
class SolverConfig:
    """Tunable knobs, one per CLI flag.

    ``None`` means "use the solver's own default".
    """

    step_size: float | None = None
    max_iter: int | None = None
    c: float | None = None
    early_exit: bool = True
    t_constant: float = 10.0
    epoch_constant: float = 4.0
    inner_constant: float = 8.0
    gd_budget: int = 200_000
    gradient: str = "scores"
    record_weights: bool = False

    @classmethod
    def from_mapping(cls, values: Mapping[str, Any] | None) -> "SolverConfig":
        if values is None:
            return cls()
        if isinstance(values, cls):
            return values
        known = {f.name for f in fields(cls)}
        unknown = set(values) - known
        if unknown:
            raise ValueError(f"unknown solver options: {sorted(unknown)}")
        return cls(**dict(values))


@dataclass
class TraceStep:
    rayleigh: float
    selected: bool = False


@dataclass
class EpochTrace:
    initial_norm: float
    inner_iterations: int
    final_norm: float


@dataclass
class ReweighSolution:
    center: np.ndarray
    weights: np.ndarray
    trace: list[TraceStep]
    iterations: int
    solver: str
    spectral_norm: float = float("nan")
    planned_iterations: int = 0
    early_exit: bool = False
    # running sums for regret audits: sum_t tau^(t) and sum_t <w^(t), tau^(t)>
    tau_sum: np.ndarray | None = None
    played_loss: float = 0.0
    epochs: list[EpochTrace] = field(default_factory=list)
    history: list[np.ndarray] = field(default_factory=list)
    kept: np.ndarray | None = None
    warnings: list[str] = field(default_factory=list)

    @property
    def rayleighs(self) -> np.ndarray:
        return np.array([s.rayleigh for s in self.trace])
