"""Exact time evolution of the composite state and its reduction.

The full density operator is built along two deliberately independent
paths, a literal index sum over initial amplitudes and propagator matrix
elements, and the plain matrix product U rho U^dag. The two paths acting
as mutual oracles is part of the package's verification strategy.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import linalg
from .linalg import NumericalCheckError
from .model import PURE, BipartiteSystem, InitialState, total_hamiltonian

TRACE_TOL = 1e-10
HERM_TOL = 1e-10


@dataclass
class DensityMatrix:
    """Hermitian, unit-trace, positive semidefinite state with dimension metadata.

    dim_e is None for a reduced (system-only) state. Construction checks
    the invariants and raises NumericalCheckError when evolution produced
    an invalid state.
    """

    mat: np.ndarray
    dim_a: int
    dim_e: int | None = None

    def __post_init__(self):
        self.mat = np.asarray(self.mat, dtype=complex)
        n = self.dim_a * (self.dim_e or 1)
        if self.mat.shape != (n, n):
            raise NumericalCheckError(
                f"density matrix shape {self.mat.shape} does not match dims "
                f"({self.dim_a}, {self.dim_e})"
            )
        asym = linalg.max_asymmetry(self.mat)
        if asym > HERM_TOL:
            raise NumericalCheckError(f"density matrix not Hermitian: defect {asym:.3e}")
        tr = float(np.trace(self.mat).real)
        if abs(tr - 1.0) > TRACE_TOL:
            raise NumericalCheckError(f"density matrix trace {tr!r} deviates from 1")
        evals = np.linalg.eigvalsh(self.mat)
        if evals[0] < -linalg.PSD_TOL or evals[-1] > 1.0 + linalg.PSD_TOL:
            raise NumericalCheckError(
                f"density matrix spectrum [{evals[0]:.3e}, {evals[-1]:.3e}] out of range"
            )

    def purity(self) -> float:
        return float(np.trace(self.mat @ self.mat).real)


@dataclass
class EigenPropagator:
    """Cached eigendecomposition of a Hamiltonian, U(t) = V e^{-i w t} V^dag."""

    evals: np.ndarray
    evecs: np.ndarray

    @classmethod
    def for_system(cls, sys: BipartiteSystem) -> "EigenPropagator":
        w, v = linalg.hermitian_eig(total_hamiltonian(sys))
        return cls(w, v)

    def unitary(self, t: float) -> np.ndarray:
        return (self.evecs * np.exp(-1j * self.evals * t)) @ self.evecs.conj().T


def _require_pure(sys: BipartiteSystem, init: InitialState) -> np.ndarray:
    if init.kind != PURE:
        raise ValueError("exact evolution needs a pure initial state")
    if init.amplitudes.shape != (sys.dim_a, sys.dim_e):
        raise ValueError(
            f"initial amplitudes shaped {init.amplitudes.shape} do not match the "
            f"model dims ({sys.dim_a}, {sys.dim_e})"
        )
    return init.amplitude_vector()


def rho_full(
    sys: BipartiteSystem,
    init: InitialState,
    t: float,
    prop: EigenPropagator | None = None,
) -> DensityMatrix:
    """Full density operator rho_AE(t) = U(t) |psi0><psi0| U^dag(t)."""
    psi0 = _require_pure(sys, init)
    if prop is None:
        prop = EigenPropagator.for_system(sys)
    u = prop.unitary(t)
    rho0 = np.outer(psi0, psi0.conj())
    return DensityMatrix(u @ rho0 @ u.conj().T, sys.dim_a, sys.dim_e)


def rho_full_index_sum(sys: BipartiteSystem, init: InitialState, t: float) -> DensityMatrix:
    """Literal index-sum form of the evolved density operator.

    rho[(j1 n1), (j2 n2)] = sum over (i1 a1), (i2 a2) of
    a[i1, a1] conj(a[i2, a2]) <j1 n1|e^{-iHt}|i1 a1> <i2 a2|e^{+iHt}|j2 n2>,
    with the forward and backward propagators computed independently.
    Kept separate from rho_full on purpose, as an internal oracle.
    """
    amp = _require_pure(sys, init)
    h = total_hamiltonian(sys)
    u_fwd = linalg.matexp_hermitian_generator(h, t)
    u_bwd = linalg.matexp_hermitian_generator(h, -t)
    mat = np.einsum("p,q,jp,qk->jk", amp, amp.conj(), u_fwd, u_bwd)
    return DensityMatrix(mat, sys.dim_a, sys.dim_e)


def rho_reduced(
    sys: BipartiteSystem,
    init: InitialState,
    t: float,
    prop: EigenPropagator | None = None,
) -> DensityMatrix:
    """Reduced state rho_A(t), the environment traced out of rho_AE(t)."""
    full = rho_full(sys, init, t, prop=prop)
    reduced = linalg.partial_trace_env(full.mat, sys.dim_a, sys.dim_e)
    return DensityMatrix(reduced, sys.dim_a, None)


@dataclass
class TwoLevelSpectrum:
    """Closed-form eigenvalues of a 2x2 reduced state, sigma11 <= sigma22."""

    sigma11: float
    sigma22: float
    delta: float


def two_level_spectrum(rho: DensityMatrix | np.ndarray) -> TwoLevelSpectrum:
    """Eigenvalues of a 2x2 density matrix from the explicit discriminant.

    sigma11 = (r11 + r22 - sqrt(D)) / 2 and sigma22 = (r11 + r22 + sqrt(D)) / 2
    with D = (r11 - r22)^2 + 4 r12 r21. Tiny negative D from roundoff is
    clamped to zero; a genuinely negative D signals non-Hermitian input.
    """
    mat = rho.mat if isinstance(rho, DensityMatrix) else np.asarray(rho, dtype=complex)
    if mat.shape != (2, 2):
        raise ValueError("two_level_spectrum needs a 2x2 matrix")
    r11 = mat[0, 0]
    r22 = mat[1, 1]
    delta = (r11 - r22) ** 2 + 4 * mat[0, 1] * mat[1, 0]
    delta = complex(delta)
    if abs(delta.imag) > 1e-12 or delta.real < -1e-12:
        raise ValueError(f"discriminant {delta!r} is not a nonnegative real")
    d = max(delta.real, 0.0)
    s = (r11 + r22).real
    root = np.sqrt(d)
    return TwoLevelSpectrum((s - root) / 2, (s + root) / 2, d)


def uniform_grid(t_max: float, steps: int = 200) -> np.ndarray:
    """Uniform time grid on [0, t_max] with `steps` points, starting at 0."""
    if t_max <= 0:
        raise ValueError("t_max must be positive")
    if steps < 2:
        raise ValueError("a grid needs at least 2 points")
    return np.linspace(0.0, t_max, steps)


def validate_grid(grid: np.ndarray) -> np.ndarray:
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.size == 0:
        raise ValueError("time grid must be a nonempty 1-d array")
    if grid[0] != 0.0:
        raise ValueError("time grid must start at 0")
    if grid.size > 1 and np.any(np.diff(grid) <= 0):
        raise ValueError("time grid must be strictly increasing")
    return grid


def sweep(sys: BipartiteSystem, init: InitialState, grid: np.ndarray) -> list[DensityMatrix]:
    """Reduced state at every grid point, one eigendecomposition for the run."""
    grid = validate_grid(grid)
    prop = EigenPropagator.for_system(sys)
    return [rho_reduced(sys, init, t, prop=prop) for t in grid]
