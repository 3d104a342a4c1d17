"""Von Neumann entropy, entanglement growth rate, and the area-law bound.

Natural logarithm throughout (entropies in nats); the CSV layer also
reports bits as a convenience column.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import linalg
from .dynamics import DensityMatrix, EigenPropagator, rho_reduced, sweep, validate_grid
from .linalg import NumericalCheckError
from .model import BipartiteSystem, InitialState, total_hamiltonian

ENTROPY_TRACE_TOL = 1e-8
RATE_CONVERGENCE_TOL = 1e-4
CONSTANT_TOL = 1e-8


def von_neumann_entropy(rho: DensityMatrix | np.ndarray) -> float:
    """S = -sum_k w_k ln w_k over the spectrum, with 0 ln 0 = 0.

    Eigenvalues are clipped to [0, 1] before the log; input whose trace
    deviates from 1 by more than 1e-8 is rejected.
    """
    mat = rho.mat if isinstance(rho, DensityMatrix) else np.asarray(rho, dtype=complex)
    tr = float(np.trace(mat).real)
    if abs(tr - 1.0) > ENTROPY_TRACE_TOL:
        raise ValueError(f"entropy needs a unit-trace state, got trace {tr!r}")
    w = np.clip(np.linalg.eigvalsh(mat), 0.0, 1.0)
    w = w[w > 0.0]
    return float(-np.sum(w * np.log(w)))


@dataclass
class RateEstimate:
    """Richardson-extrapolated derivative, with step-halving error estimate.

    `converged` is False when the two finite-difference estimates disagree
    by more than the convergence tolerance; the value is still reported.
    """

    value: float
    error: float
    converged: bool


def entanglement_rate_at_zero(
    sys: BipartiteSystem,
    init: InitialState,
    h: float | None = None,
) -> RateEstimate:
    """dS_A/dt at t = 0 from central differences at steps h and h/2.

    The step is scaled by 1/max(1, ||H||) to keep the truncation/roundoff
    tradeoff stable across energy scales.
    """
    prop = EigenPropagator.for_system(sys)
    if h is None:
        hnorm = linalg.operator_norm(total_hamiltonian(sys))
        h = 1e-4 / max(1.0, hnorm)

    def entropy_at(t: float) -> float:
        return von_neumann_entropy(rho_reduced(sys, init, t, prop=prop))

    def central(step: float) -> float:
        return (entropy_at(step) - entropy_at(-step)) / (2 * step)

    d1 = central(h)
    d2 = central(h / 2)
    diff = abs(d2 - d1)
    value = (4 * d2 - d1) / 3
    return RateEstimate(value=value, error=diff / 3, converged=diff <= RATE_CONVERGENCE_TOL)


@dataclass
class BoundReport:
    """Measured entanglement rate against c ||H_AE|| ln(min dim)."""

    rate: RateEstimate
    bound_rhs: float
    satisfied: bool
    ratio: float | None
    coupling_norm: float
    delta_dim: int
    c_constant: float


def kitaev_bound_report(
    sys: BipartiteSystem,
    init: InitialState,
    c: float = 2.0,
) -> BoundReport:
    """Check the small-incremental-entangling bound on the rate at t = 0.

    bound_rhs = c ||H_AE|| ln(delta) with delta = min(dim_a, dim_e). For
    delta = 1 the bound degenerates to zero and satisfaction means the
    measured rate vanishes to tolerance. The constant c is a free
    parameter; the report carries the measured ratio rather than asserting
    a universal value.
    """
    rate = entanglement_rate_at_zero(sys, init)
    coupling_norm = linalg.operator_norm(sys.h_ae)
    delta = min(sys.dim_a, sys.dim_e)
    log_delta = math.log(delta)
    bound_rhs = c * coupling_norm * log_delta
    denom = coupling_norm * log_delta
    ratio = rate.value / denom if denom > 0 else None
    if delta == 1:
        satisfied = abs(rate.value) <= 1e-8
    else:
        satisfied = rate.value <= bound_rhs + 1e-8
    return BoundReport(
        rate=rate,
        bound_rhs=bound_rhs,
        satisfied=satisfied,
        ratio=ratio,
        coupling_norm=coupling_norm,
        delta_dim=delta,
        c_constant=c,
    )


def constant_entropy_check(
    sys: BipartiteSystem,
    init: InitialState,
    grid: np.ndarray,
) -> tuple[float, bool]:
    """Max |S_A(t) - S_A(0)| over the grid, and whether it stays constant."""
    states = sweep(sys, init, grid)
    entropies = np.array([von_neumann_entropy(r) for r in states])
    max_dev = float(np.max(np.abs(entropies - entropies[0])))
    return max_dev, max_dev <= CONSTANT_TOL


@dataclass
class EntropyTrace:
    """Entropy samples over a grid plus the rate and bound data of the run."""

    times: np.ndarray
    entropy: np.ndarray
    rate_at_zero: RateEstimate
    bound_rhs: float
    c_constant: float
    delta_dim: int

    def validate(self, dim_a: int) -> None:
        lo = float(np.min(self.entropy))
        hi = float(np.max(self.entropy))
        if lo < -1e-9 or hi > math.log(dim_a) + 1e-9:
            raise NumericalCheckError(
                f"entropy range [{lo:.3e}, {hi:.3e}] outside [0, ln {dim_a}]"
            )


def entropy_trace(
    sys: BipartiteSystem,
    init: InitialState,
    grid: np.ndarray,
    c: float = 2.0,
) -> tuple[EntropyTrace, list[DensityMatrix]]:
    """Sweep the grid and assemble the entropy trace with its bound report."""
    grid = validate_grid(grid)
    states = sweep(sys, init, grid)
    entropies = np.array([von_neumann_entropy(r) for r in states])
    report = kitaev_bound_report(sys, init, c=c)
    trace = EntropyTrace(
        times=grid,
        entropy=entropies,
        rate_at_zero=report.rate,
        bound_rhs=report.bound_rhs,
        c_constant=c,
        delta_dim=report.delta_dim,
    )
    trace.validate(sys.dim_a)
    return trace, states
