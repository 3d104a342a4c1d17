"""Semi-group (divisibility) diagnostics for the reduced evolution.

The dynamical map acting on the reduced state is represented as a
supermatrix indexed by system index pairs. Divisibility is tested by
composing the supermatrix over a split interval and measuring the
max-entry deviation from the single-interval supermatrix. The module also
computes the one-time memory coupling terms that quantify how strongly
environment-off-diagonal coupling elements break the semi-group property.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import linalg
from .dynamics import EigenPropagator, rho_full
from .model import (
    BipartiteSystem,
    InitialState,
    commutator_classification,
    total_hamiltonian,
    validate_env_weights,
)

RESIDUAL_TOL = 1e-8
DEFAULT_SPLIT_FRACTIONS = (0.25, 0.5, 0.75)

DIVISIBLE = "divisible"
NON_DIVISIBLE = "non-divisible"


@dataclass
class SuperMatrix:
    """Reduced-evolution map over an interval, on system index pairs.

    matrix[(i1, i2), (j1, j2)] maps the initial coefficient pair (i1, i2)
    to the output entry rho_A[j1, j2]; pairs are flattened row-major. The
    entries are built from environment-weighted products of propagator
    matrix elements:

        C[(i1,i2),(j1,j2)] = sum over a1, a2, g of
            d[a1, a2] <j1 g|U|i1 a1> conj(<j2 g|U|i2 a2>)
    """

    matrix: np.ndarray
    dim_a: int
    interval: tuple[float, float]

    def apply(self, system_coeffs: np.ndarray) -> np.ndarray:
        """Propagate initial data: rho_A[j1, j2] = sum c_i1 c*_i2 C[(i1,i2),(j1,j2)]."""
        c = np.asarray(system_coeffs, dtype=complex).reshape(-1)
        if c.size != self.dim_a:
            raise ValueError(f"expected {self.dim_a} system coefficients, got {c.size}")
        weights = np.outer(c, c.conj()).reshape(-1)
        return (weights @ self.matrix).reshape(self.dim_a, self.dim_a)


def supermatrix(
    sys: BipartiteSystem,
    env_weights: np.ndarray,
    t: float,
    s: float = 0.0,
    prop: EigenPropagator | None = None,
) -> SuperMatrix:
    """Supermatrix of the reduced map over the interval (s, t).

    The Hamiltonian is static so only the duration t - s enters the
    propagator; the same environment weights are attached to every
    interval, which is exactly the composition hypothesis the residual
    test probes.
    """
    d = validate_env_weights(env_weights)
    if d.shape[0] != sys.dim_e:
        raise ValueError(
            f"environment weights are {d.shape[0]}-dimensional, model has dim_e={sys.dim_e}"
        )
    if t < s:
        raise ValueError("interval end must not precede its start")
    if prop is None:
        prop = EigenPropagator.for_system(sys)
    u = prop.unitary(t - s).reshape(sys.dim_a, sys.dim_e, sys.dim_a, sys.dim_e)
    c = np.einsum("ab,jgia,kgcb->icjk", d, u, u.conj())
    n2 = sys.dim_a * sys.dim_a
    return SuperMatrix(c.reshape(n2, n2), sys.dim_a, (s, t))


def compose(first: SuperMatrix, second: SuperMatrix) -> SuperMatrix:
    """Chain two interval maps, first (s0, s1) then second (s1, s2).

    The contraction runs over the intermediate index pair, which is a
    plain matrix product in the flattened pair representation.
    """
    if first.dim_a != second.dim_a:
        raise ValueError("supermatrix dimensions do not match")
    if abs(first.interval[1] - second.interval[0]) > 1e-12:
        raise ValueError(
            f"intervals {first.interval} and {second.interval} do not chain"
        )
    return SuperMatrix(
        first.matrix @ second.matrix,
        first.dim_a,
        (first.interval[0], second.interval[1]),
    )


@dataclass
class DivisibilityReport:
    residual: float
    condition_class: str
    verdict: str
    split_times: np.ndarray
    split_residuals: np.ndarray


def divisibility_residual(
    sys: BipartiteSystem,
    env_weights: np.ndarray,
    t: float,
    splits: np.ndarray | None = None,
) -> DivisibilityReport:
    """Max-entry deviation between C(t, 0) and its split compositions.

    Each split s gives |C(t,0) - C(s,0) composed with C(t,s)| in the
    entrywise max norm; the verdict is divisible when every tested split
    stays below 1e-8. One split suffices to falsify, several reduce the
    false-pass risk.
    """
    if t <= 0:
        raise ValueError("divisibility test needs t > 0")
    if splits is None:
        splits = np.array(DEFAULT_SPLIT_FRACTIONS) * t
    splits = np.asarray(splits, dtype=float)
    if np.any((splits <= 0) | (splits >= t)):
        raise ValueError("every split must lie strictly inside (0, t)")
    prop = EigenPropagator.for_system(sys)
    c_full = supermatrix(sys, env_weights, t, 0.0, prop=prop)
    residuals = []
    for s in splits:
        c_head = supermatrix(sys, env_weights, s, 0.0, prop=prop)
        c_tail = supermatrix(sys, env_weights, t, s, prop=prop)
        composed = compose(c_head, c_tail)
        residuals.append(float(np.max(np.abs(c_full.matrix - composed.matrix))))
    residuals = np.array(residuals)
    residual = float(np.max(residuals))
    verdict = DIVISIBLE if residual <= RESIDUAL_TOL else NON_DIVISIBLE
    return DivisibilityReport(
        residual=residual,
        condition_class=commutator_classification(sys).label,
        verdict=verdict,
        split_times=splits,
        split_residuals=residuals,
    )


@dataclass
class MemoryTermsReport:
    """One-time master-equation decomposition at a fixed environment index.

    omega_gamma_beta[b] and omega_beta_gamma[b] are the coupling terms that
    feed the gamma block from environment level b (the gamma slot itself is
    zero). master_residual compares the finite-difference derivative of the
    exact gamma block against the decomposition's right-hand side.
    """

    gamma: int
    omega_gamma_beta: np.ndarray
    omega_beta_gamma: np.ndarray
    master_residual: float


def memory_terms(
    sys: BipartiteSystem,
    init: InitialState,
    t: float,
    gamma: int,
    h: float | None = None,
) -> MemoryTermsReport:
    """Memory coupling terms and the residual of the one-time block equation.

    Everything is expressed in the eigenbasis of H_E, where the derivative
    of the gamma-diagonal block of the exact state splits into a commutator
    with the env-diagonal Hamiltonian block plus coupling terms pulling in
    the off-diagonal environment levels:

        d rho_g / dt = -i [H_d(g), rho_g] - i sum_{b != g} (W_gb - W_bg)
        W_gb[i, k] = sum_j H_AE[(i,g),(j,b)] rho[(j,b),(k,g)]
        W_bg[i, k] = sum_j rho[(i,g),(j,b)] H_AE[(j,b),(k,g)]

    The identity is exact; the reported residual is limited only by the
    finite-difference step.
    """
    d_a, d_e = sys.dim_a, sys.dim_e
    if not 0 <= gamma < d_e:
        raise ValueError(f"environment index {gamma} out of range for dim_e={d_e}")
    _, v_e = linalg.hermitian_eig(sys.h_e)
    rot = linalg.kron(np.eye(d_a), v_e)

    h_total = rot.conj().T @ total_hamiltonian(sys) @ rot
    h_ae = (rot.conj().T @ sys.h_ae @ rot).reshape(d_a, d_e, d_a, d_e)
    h_block = h_total.reshape(d_a, d_e, d_a, d_e)[:, gamma, :, gamma]

    prop = EigenPropagator.for_system(sys)

    def gamma_block(time: float) -> np.ndarray:
        full = rho_full(sys, init, time, prop=prop).mat
        rotated = (rot.conj().T @ full @ rot).reshape(d_a, d_e, d_a, d_e)
        return rotated[:, gamma, :, gamma]

    def full_rotated(time: float) -> np.ndarray:
        full = rho_full(sys, init, time, prop=prop).mat
        return (rot.conj().T @ full @ rot).reshape(d_a, d_e, d_a, d_e)

    rho_t = full_rotated(t)
    omega_gb = np.zeros((d_e, d_a, d_a), dtype=complex)
    omega_bg = np.zeros((d_e, d_a, d_a), dtype=complex)
    for b in range(d_e):
        if b == gamma:
            continue
        omega_gb[b] = np.einsum("ij,jk->ik", h_ae[:, gamma, :, b], rho_t[:, b, :, gamma])
        omega_bg[b] = np.einsum("ij,jk->ik", rho_t[:, gamma, :, b], h_ae[:, b, :, gamma])

    rho_g = rho_t[:, gamma, :, gamma]
    rhs = -1j * linalg.commutator(h_block, rho_g)
    rhs += -1j * (omega_gb.sum(axis=0) - omega_bg.sum(axis=0))

    if h is None:
        h = 1e-5 / max(1.0, linalg.operator_norm(total_hamiltonian(sys)))
    derivative = (gamma_block(t + h) - gamma_block(t - h)) / (2 * h)
    residual = float(np.max(np.abs(derivative - rhs)))
    return MemoryTermsReport(
        gamma=gamma,
        omega_gamma_beta=omega_gb,
        omega_beta_gamma=omega_bg,
        master_residual=residual,
    )
