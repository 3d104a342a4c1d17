"""Dense complex linear algebra for small bipartite Hilbert spaces.

Conventions shared by every module in the package:

  - the composite product-space index is system-major, idx = i * dim_e + alpha,
  - operators are plain complex numpy arrays, treated as immutable,
  - Hermiticity tolerance 1e-12 and positivity tolerance -1e-10 (the
    double-precision eigensolver noise floor).
"""

from __future__ import annotations

import numpy as np

HERMITIAN_TOL = 1e-12
PSD_TOL = 1e-10


class NumericalCheckError(RuntimeError):
    """A numerical invariant (trace, positivity, convergence) failed during a run."""


def max_asymmetry(m: np.ndarray) -> float:
    """Largest entry of |M - M^dag|, the Hermiticity defect."""
    m = np.asarray(m)
    if m.size == 0:
        return 0.0
    return float(np.max(np.abs(m - m.conj().T)))


def assert_hermitian(m: np.ndarray, tol: float = HERMITIAN_TOL, name: str = "matrix") -> None:
    asym = max_asymmetry(m)
    if asym > tol:
        raise ValueError(
            f"{name} is not Hermitian: max|M - M^dag| = {asym:.3e} exceeds {tol:.1e}"
        )


def hermitian_eig(m: np.ndarray, tol: float = HERMITIAN_TOL) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition M = V diag(w) V^dag of a Hermitian matrix.

    Returns eigenvalues in ascending order and the unitary eigenvector
    matrix V (columns are eigenvectors). Rejects input whose Hermiticity
    defect exceeds `tol`.
    """
    m = np.asarray(m, dtype=complex)
    assert_hermitian(m, tol)
    w, v = np.linalg.eigh(m)
    return w, v


def matexp_hermitian_generator(h: np.ndarray, t: float) -> np.ndarray:
    """U(t) = exp(-i H t) for Hermitian H, via eigendecomposition.

    Exactly unitary up to eigensolver error; preferred over
    scaling-and-squaring because every generator in this package is
    Hermitian.
    """
    w, v = hermitian_eig(h)
    return (v * np.exp(-1j * w * t)) @ v.conj().T


def kron(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Tensor product with the system index major.

    kron(A, B)[(i, alpha), (j, beta)] = A[i, j] B[alpha, beta] under the
    composite index map idx = i * dim_e + alpha.
    """
    return np.kron(np.asarray(a, dtype=complex), np.asarray(b, dtype=complex))


def partial_trace_env(rho: np.ndarray, dim_a: int, dim_e: int) -> np.ndarray:
    """Trace out the environment: (rho_A)[j1, j2] = sum_g rho[(j1, g), (j2, g)]."""
    rho = np.asarray(rho, dtype=complex)
    n = dim_a * dim_e
    if rho.shape != (n, n):
        raise ValueError(
            f"density matrix shape {rho.shape} incompatible with dims ({dim_a}, {dim_e})"
        )
    return np.trace(rho.reshape(dim_a, dim_e, dim_a, dim_e), axis1=1, axis2=3)


def partial_trace_sys(rho: np.ndarray, dim_a: int, dim_e: int) -> np.ndarray:
    """Trace out the system, leaving the dim_e x dim_e environment state."""
    rho = np.asarray(rho, dtype=complex)
    n = dim_a * dim_e
    if rho.shape != (n, n):
        raise ValueError(
            f"density matrix shape {rho.shape} incompatible with dims ({dim_a}, {dim_e})"
        )
    return np.trace(rho.reshape(dim_a, dim_e, dim_a, dim_e), axis1=0, axis2=2)


def operator_norm(m: np.ndarray) -> float:
    """Spectral norm (largest singular value; max |eigenvalue| for Hermitian input)."""
    m = np.asarray(m, dtype=complex)
    if m.size == 0:
        return 0.0
    return float(np.linalg.norm(m, 2))


def commutator(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return a @ b - b @ a


def min_eigenvalue(m: np.ndarray) -> float:
    """Smallest eigenvalue of a Hermitian matrix (no Hermiticity check)."""
    return float(np.linalg.eigvalsh(m)[0])
