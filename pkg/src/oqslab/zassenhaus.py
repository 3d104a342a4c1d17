"""Zassenhaus splitting of exp(X + Y) into an ordered product of exponentials.

exp(X + Y) = exp(X) exp(Y) exp(-c2/2!) exp(-c3/3!) exp(-c4/4!) ...

with nested-commutator terms c_k. The first three are implemented from
their closed forms, higher orders come from a power-series recursion that
is verified against the closed forms. Truncating after the c_k factor
leaves an error of order t^{k+1} when X and Y are linear in t, which the
scan operation measures empirically.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from . import linalg
from .linalg import commutator

ERROR_FLOOR = 1e-14


def _square_pair(x: np.ndarray, y: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    x = np.asarray(x, dtype=complex)
    y = np.asarray(y, dtype=complex)
    if x.ndim != 2 or x.shape[0] != x.shape[1] or x.shape != y.shape:
        raise ValueError("X and Y must be square matrices of equal size")
    return x, y


def matrix_exp(m: np.ndarray) -> np.ndarray:
    """exp(M); eigendecomposition route for anti-Hermitian M, scipy otherwise."""
    m = np.asarray(m, dtype=complex)
    scale = max(1.0, float(np.max(np.abs(m)))) if m.size else 1.0
    if float(np.max(np.abs(m + m.conj().T))) <= 1e-12 * scale:
        # M = -iH with H Hermitian; the eigen route keeps the factor unitary
        return linalg.matexp_hermitian_generator(1j * m, 1.0)
    return scipy.linalg.expm(m)


def c_terms(x: np.ndarray, y: np.ndarray, k: int) -> np.ndarray:
    """Nested-commutator term c_k(X, Y) of the splitting.

    Closed forms for k = 2, 3, 4:
        c2 = [X, Y]
        c3 = 2[[X, Y], Y] + [[X, Y], X]
        c4 = 3[[[X, Y], Y], Y] + 3[[[X, Y], X], Y] + [[[X, Y], X], X]
    Higher k is generated iteratively.
    """
    x, y = _square_pair(x, y)
    if k < 2:
        raise ValueError("commutator terms start at k = 2")
    c2 = commutator(x, y)
    if k == 2:
        return c2
    if k == 3:
        return 2 * commutator(c2, y) + commutator(c2, x)
    if k == 4:
        c2y = commutator(c2, y)
        c2x = commutator(c2, x)
        return (
            3 * commutator(c2y, y) + 3 * commutator(c2x, y) + commutator(c2x, x)
        )
    return zassenhaus_terms(x, y, k)[-1]


def _series_multiply(a: list[np.ndarray], b: list[np.ndarray], order: int) -> list[np.ndarray]:
    n = a[0].shape[0]
    out = [np.zeros((n, n), dtype=complex) for _ in range(order + 1)]
    for i, ai in enumerate(a):
        if i > order:
            break
        for jdx, bj in enumerate(b):
            if i + jdx > order:
                break
            out[i + jdx] += ai @ bj
    return out


def _series_exp(coeff: np.ndarray, power: int, order: int) -> list[np.ndarray]:
    """Series of exp(lambda^power C) through lambda^order."""
    n = coeff.shape[0]
    out = [np.zeros((n, n), dtype=complex) for _ in range(order + 1)]
    out[0] = np.eye(n, dtype=complex)
    term = np.eye(n, dtype=complex)
    for m in range(1, order // power + 1):
        term = term @ coeff / m
        out[m * power] += term
    return out


def zassenhaus_terms(x: np.ndarray, y: np.ndarray, max_order: int) -> list[np.ndarray]:
    """All terms c_2 .. c_max_order by power-series peeling.

    Writes exp(lambda (X+Y)) = exp(lambda X) exp(lambda Y) prod_k
    exp(lambda^k C_k) as formal series in lambda with matrix coefficients;
    after dividing out the factors known so far, the next coefficient of
    the residual series is C_{k}, and c_k = -k! C_k matches the closed-form
    normalization. Exact up to float roundoff.
    """
    x, y = _square_pair(x, y)
    if max_order < 2:
        raise ValueError("max_order must be >= 2")
    order = max_order
    n = x.shape[0]

    target = [np.zeros((n, n), dtype=complex) for _ in range(order + 1)]
    target[0] = np.eye(n, dtype=complex)
    term = np.eye(n, dtype=complex)
    for m in range(1, order + 1):
        term = term @ (x + y) / m
        target[m] = term

    partial = _series_multiply(_series_exp(x, 1, order), _series_exp(y, 1, order), order)

    terms = []
    for k in range(2, max_order + 1):
        # residual R with partial * R = target; R = I + lambda^k C_k + ...
        residual = [np.zeros((n, n), dtype=complex) for _ in range(order + 1)]
        for m in range(order + 1):
            acc = target[m].copy()
            for i in range(1, m + 1):
                acc -= partial[i] @ residual[m - i]
            residual[m] = acc
        c_cap = residual[k]
        terms.append(-math.factorial(k) * c_cap)
        partial = _series_multiply(partial, _series_exp(c_cap, k, order), order)
    return terms


def truncated_exponential(x: np.ndarray, y: np.ndarray, order: int) -> np.ndarray:
    """Ordered product exp(X) exp(Y) exp(-c2/2!) ... exp(-c_order/order!).

    order = 1 keeps only the two leading factors. For commuting inputs the
    product equals exp(X + Y) at every order.
    """
    x, y = _square_pair(x, y)
    if order < 1:
        raise ValueError("order must be >= 1")
    product = matrix_exp(x) @ matrix_exp(y)
    if order == 1:
        return product
    if order <= 4:
        terms = [c_terms(x, y, k) for k in range(2, order + 1)]
    else:
        terms = zassenhaus_terms(x, y, order)
    for k, ck in enumerate(terms, start=2):
        product = product @ matrix_exp(-ck / math.factorial(k))
    return product


@dataclass
class OrderScanResult:
    """Log-log slope of the truncation error against the time parameter.

    Points whose error sits at the floating-point floor are dropped;
    `degenerate` flags a scan left with fewer than 3 usable points (for
    commuting generators every point is at the floor).
    """

    slope: float
    errors: np.ndarray
    t_values: np.ndarray
    used: np.ndarray
    degenerate: bool


def truncation_order_scan(
    x_of_t,
    y_of_t,
    order: int,
    t_values: np.ndarray,
) -> OrderScanResult:
    """Measure the error scaling of the truncated product.

    For X, Y linear in t the order-k truncation error scales as t^{k+1},
    so the fitted slope should sit near order + 1.
    """
    t_values = np.asarray(t_values, dtype=float)
    if t_values.size < 4:
        raise ValueError("the scan needs at least 4 time values")
    if np.any(t_values <= 0):
        raise ValueError("scan time values must be positive")
    errors = np.empty(t_values.size)
    for idx, t in enumerate(t_values):
        x = np.asarray(x_of_t(t), dtype=complex)
        y = np.asarray(y_of_t(t), dtype=complex)
        exact = matrix_exp(x + y)
        approx = truncated_exponential(x, y, order)
        errors[idx] = linalg.operator_norm(approx - exact)
    used = errors > ERROR_FLOOR
    if np.count_nonzero(used) < 3:
        return OrderScanResult(
            slope=math.nan, errors=errors, t_values=t_values, used=used, degenerate=True
        )
    slope = float(np.polyfit(np.log(t_values[used]), np.log(errors[used]), 1)[0])
    return OrderScanResult(
        slope=slope, errors=errors, t_values=t_values, used=used, degenerate=False
    )
