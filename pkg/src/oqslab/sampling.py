"""Seeded random matrices, states and model families for ensembles and tests."""

from __future__ import annotations

import numpy as np

from .model import BipartiteSystem


def random_hermitian(rng: np.random.Generator, n: int, scale: float = 1.0) -> np.ndarray:
    a = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return scale * (a + a.conj().T) / 2


def random_unitary(rng: np.random.Generator, n: int) -> np.ndarray:
    a = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    q, r = np.linalg.qr(a)
    # fix the phase convention so Q is Haar distributed
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_state(rng: np.random.Generator, n: int) -> np.ndarray:
    v = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    return v / np.linalg.norm(v)


def random_density(rng: np.random.Generator, n: int) -> np.ndarray:
    g = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def random_system(
    rng: np.random.Generator,
    dim_a: int,
    dim_e: int,
    coupling: float = 1.0,
) -> BipartiteSystem:
    """Dense random model: all three blocks drawn Hermitian."""
    return BipartiteSystem(
        dim_a=dim_a,
        dim_e=dim_e,
        h_a=random_hermitian(rng, dim_a),
        h_e=random_hermitian(rng, dim_e),
        h_ae=random_hermitian(rng, dim_a * dim_e, scale=coupling),
    )


def e_commuting_system(
    rng: np.random.Generator,
    dim_a: int,
    dim_e: int,
    coupling: float = 1.0,
) -> BipartiteSystem:
    """Random model with [I (x) H_E, H_AE] = 0 by construction.

    H_E is diagonal with distinct energies and the coupling is block
    diagonal in the environment index, one independent Hermitian system
    block per environment level.
    """
    energies = np.sort(rng.uniform(0.2, 3.0, size=dim_e))
    # enforce a minimal gap so the eigenbasis is unambiguous
    energies += np.arange(dim_e) * 0.5
    h_e = np.diag(energies).astype(complex)
    blocks = np.zeros((dim_a, dim_e, dim_a, dim_e), dtype=complex)
    for g in range(dim_e):
        blocks[:, g, :, g] = random_hermitian(rng, dim_a, scale=coupling)
    h_ae = blocks.reshape(dim_a * dim_e, dim_a * dim_e)
    return BipartiteSystem(
        dim_a=dim_a,
        dim_e=dim_e,
        h_a=random_hermitian(rng, dim_a),
        h_e=h_e,
        h_ae=h_ae,
    )
