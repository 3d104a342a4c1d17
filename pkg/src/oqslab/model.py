"""System-plus-environment models: Hamiltonian blocks and initial states."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import linalg

# commutator structure labels
E_COMMUTING = "E-commuting"
A_COMMUTING = "A-commuting"
BOTH_COMMUTING = "both"
NEITHER_COMMUTING = "neither"


@dataclass
class BipartiteSystem:
    """Dimensions and the three Hamiltonian blocks of a bipartite model.

    h_a acts on the system (dim_a x dim_a), h_e on the environment
    (dim_e x dim_e) and h_ae on the product space, all Hermitian. The
    total Hamiltonian is h_a (x) I + I (x) h_e + h_ae.
    """

    dim_a: int
    dim_e: int
    h_a: np.ndarray
    h_e: np.ndarray
    h_ae: np.ndarray

    def __post_init__(self):
        if self.dim_a < 1 or self.dim_e < 1:
            raise ValueError("dimensions must be >= 1")
        self.h_a = np.asarray(self.h_a, dtype=complex)
        self.h_e = np.asarray(self.h_e, dtype=complex)
        self.h_ae = np.asarray(self.h_ae, dtype=complex)
        n = self.dim_a * self.dim_e
        if self.h_a.shape != (self.dim_a, self.dim_a):
            raise ValueError(f"h_a shape {self.h_a.shape} does not match dim_a={self.dim_a}")
        if self.h_e.shape != (self.dim_e, self.dim_e):
            raise ValueError(f"h_e shape {self.h_e.shape} does not match dim_e={self.dim_e}")
        if self.h_ae.shape != (n, n):
            raise ValueError(
                f"h_ae shape {self.h_ae.shape} does not match product dimension {n}"
            )
        linalg.assert_hermitian(self.h_a, name="h_a")
        linalg.assert_hermitian(self.h_e, name="h_e")
        linalg.assert_hermitian(self.h_ae, name="h_ae")


def total_hamiltonian(sys: BipartiteSystem) -> np.ndarray:
    """H = H_A (x) I_E + I_A (x) H_E + H_AE on the product space."""
    return (
        linalg.kron(sys.h_a, np.eye(sys.dim_e))
        + linalg.kron(np.eye(sys.dim_a), sys.h_e)
        + sys.h_ae
    )


@dataclass
class CommutatorClassification:
    norm_e_comm: float
    norm_a_comm: float
    label: str


def commutator_classification(sys: BipartiteSystem) -> CommutatorClassification:
    """Classify the coupling by which local Hamiltonian it commutes with.

    Computes ||[I (x) H_E, H_AE]|| and ||[H_A (x) I, H_AE]|| and labels the
    model E-commuting, A-commuting, both or neither. The tolerance scales
    with ||H_AE|| so large-norm models are not misclassified.
    """
    he_full = linalg.kron(np.eye(sys.dim_a), sys.h_e)
    ha_full = linalg.kron(sys.h_a, np.eye(sys.dim_e))
    norm_e = linalg.operator_norm(linalg.commutator(he_full, sys.h_ae))
    norm_a = linalg.operator_norm(linalg.commutator(ha_full, sys.h_ae))
    tol = 1e-10 * max(1.0, linalg.operator_norm(sys.h_ae))
    e_comm = norm_e <= tol
    a_comm = norm_a <= tol
    if e_comm and a_comm:
        label = BOTH_COMMUTING
    elif e_comm:
        label = E_COMMUTING
    elif a_comm:
        label = A_COMMUTING
    else:
        label = NEITHER_COMMUTING
    return CommutatorClassification(norm_e, norm_a, label)


PURE = "pure"
ENV_WEIGHTED = "env-weighted"

_NORM_TOL = 1e-12


@dataclass
class InitialState:
    """Initial condition of the composite system.

    Two kinds:
      - "pure": product-basis amplitudes a[i, alpha] of a global pure state
        (entangled amplitudes allowed),
      - "env-weighted": system coefficients c[i] with an environment weight
        matrix d (Hermitian, PSD, unit trace), the form consumed by the
        divisibility supermatrix.
    """

    kind: str
    amplitudes: np.ndarray | None = None
    system_coeffs: np.ndarray | None = None
    env_weights: np.ndarray | None = None

    @classmethod
    def pure(cls, amplitudes: np.ndarray) -> "InitialState":
        """Global pure state from amplitudes a[i, alpha], normalized to 1."""
        a = np.asarray(amplitudes, dtype=complex)
        if a.ndim != 2:
            raise ValueError("amplitudes must be a (dim_a, dim_e) array")
        norm2 = float(np.sum(np.abs(a) ** 2))
        if abs(norm2 - 1.0) > _NORM_TOL:
            raise ValueError(f"amplitudes not normalized: sum|a|^2 = {norm2!r}")
        return cls(kind=PURE, amplitudes=a)

    @classmethod
    def product(cls, system: np.ndarray, env: np.ndarray) -> "InitialState":
        """Pure product state a[i, alpha] = c[i] e[alpha]."""
        c = np.asarray(system, dtype=complex).reshape(-1)
        e = np.asarray(env, dtype=complex).reshape(-1)
        nc = np.linalg.norm(c)
        ne = np.linalg.norm(e)
        if abs(nc - 1.0) > _NORM_TOL or abs(ne - 1.0) > _NORM_TOL:
            raise ValueError("product factors must each be normalized")
        return cls.pure(np.outer(c, e))

    @classmethod
    def basis_env(cls, system: np.ndarray, env_index: int, dim_e: int) -> "InitialState":
        """Product state with the environment in a single basis state."""
        e = np.zeros(dim_e, dtype=complex)
        e[env_index] = 1.0
        return cls.product(system, e)

    @classmethod
    def env_weighted(cls, system: np.ndarray, env_weights: np.ndarray) -> "InitialState":
        """System coefficients plus an environment weight matrix d."""
        c = np.asarray(system, dtype=complex).reshape(-1)
        if abs(np.linalg.norm(c) - 1.0) > _NORM_TOL:
            raise ValueError("system coefficients must be normalized")
        d = validate_env_weights(env_weights)
        return cls(kind=ENV_WEIGHTED, system_coeffs=c, env_weights=d)

    def amplitude_vector(self) -> np.ndarray:
        """Flattened amplitudes in the composite (system-major) index."""
        if self.kind != PURE:
            raise ValueError("only the pure kind has an amplitude vector")
        return self.amplitudes.reshape(-1)


def validate_env_weights(d: np.ndarray) -> np.ndarray:
    """Check that d is a valid environment weight matrix (Hermitian PSD, trace 1)."""
    d = np.asarray(d, dtype=complex)
    if d.ndim != 2 or d.shape[0] != d.shape[1]:
        raise ValueError("environment weights must be a square matrix")
    linalg.assert_hermitian(d, name="environment weights")
    tr = float(np.trace(d).real)
    if abs(tr - 1.0) > 1e-10:
        raise ValueError(f"environment weights must have unit trace, got {tr!r}")
    lo = linalg.min_eigenvalue(d)
    if lo < -linalg.PSD_TOL:
        raise ValueError(f"environment weights not positive semidefinite: min eig {lo:.3e}")
    return d
