"""Shared numerical kernels: Bessel J0, Hermitian-Toeplitz solves, power."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg


class DomainError(ValueError):
    """An argument lies outside the domain of an operation."""


class SingularMatrixError(ArithmeticError):
    """A correlation matrix could not be factorized, even with loading."""

    def __init__(self, message: str, condition: float):
        super().__init__(f"{message} (condition estimate {condition:.3e})")
        self.condition = condition


# Power series is used below this magnitude, Hankel asymptotics above.
# At 12 the largest series term is ~4e3 (cancellation ~1e-12) and the
# smallest asymptotic term is ~1e-11.
_SERIES_LIMIT = 12.0


def _j0_series(x: float) -> float:
    q = -0.25 * x * x
    term = 1.0
    total = 1.0
    k = 0
    while True:
        k += 1
        term *= q / (k * k)
        total += term
        if abs(term) < 1e-17 * max(1.0, abs(total)):
            return total


def _j0_asymptotic(x: float) -> float:
    # Hankel expansion with c_k = prod_{j<=k} (2j-1)^2 / (k! 8^k x^k):
    #   P = c_0 - c_2 + c_4 - ...,  Q = -c_1 + c_3 - c_5 + ...
    # Truncated at the smallest term, where the divergent series is best.
    p = 1.0
    q = 0.0
    term = 1.0
    k = 0
    while True:
        k += 1
        nxt = term * (2 * k - 1) ** 2 / (k * 8.0 * x)
        if nxt >= term or nxt < 1e-17:
            break
        term = nxt
        if k % 2:
            q += -term if (k // 2) % 2 == 0 else term
        else:
            p += term if (k // 2) % 2 == 0 else -term
    chi = x - 0.25 * math.pi
    return math.sqrt(2.0 / (math.pi * x)) * (p * math.cos(chi) - q * math.sin(chi))


def bessel_j0(x: float) -> float:
    """Zeroth-order Bessel function of the first kind.

    Accurate to about 1e-11 absolute for |x| <= 50.
    """
    x = float(x)
    if not math.isfinite(x):
        raise DomainError(f"bessel_j0 needs a finite argument, got {x!r}")
    x = abs(x)
    if x < _SERIES_LIMIT:
        return _j0_series(x)
    return _j0_asymptotic(x)


@dataclass(frozen=True)
class HermitianToeplitz:
    """Hermitian Toeplitz matrix given by its first row, plus diagonal loading.

    ``R[i, j] = first_row[j - i]`` for ``j >= i`` and the conjugate below
    the diagonal.
    """

    first_row: np.ndarray
    loading: float = 0.0

    def __post_init__(self):
        row = np.asarray(self.first_row, dtype=np.complex128).ravel()
        if row.size < 1:
            raise DomainError("first_row must not be empty")
        if abs(row[0].imag) >= 1e-12:
            raise DomainError(f"first_row[0] must be real, got {row[0]!r}")
        if not self.loading >= 0.0:
            raise DomainError(f"loading must be >= 0, got {self.loading!r}")
        row = row.copy()
        row[0] = row[0].real
        object.__setattr__(self, "first_row", row)

    @property
    def order(self) -> int:
        return self.first_row.size

    def dense(self, loading: float | None = None) -> np.ndarray:
        loading = self.loading if loading is None else loading
        mat = scipy.linalg.toeplitz(self.first_row.conj(), self.first_row)
        return mat + loading * np.eye(self.order)


def _factor_solve(mat: np.ndarray, rhs: np.ndarray) -> np.ndarray | None:
    try:
        factor = scipy.linalg.cho_factor(mat, lower=True, check_finite=False)
        return scipy.linalg.cho_solve(factor, rhs, check_finite=False)
    except np.linalg.LinAlgError:
        pass
    # Indefinite but possibly nonsingular: symmetric-pivoting LDL^H.
    lu, d, perm = scipy.linalg.ldl(mat, lower=True, hermitian=True, check_finite=False)
    d_diag = np.abs(np.diag(d))
    scale = max(np.max(np.abs(mat)), np.finfo(float).tiny)
    if np.min(d_diag) <= 1e-13 * scale * mat.shape[0]:
        return None
    with np.errstate(all="raise"):
        try:
            return np.linalg.solve(mat, rhs)
        except (np.linalg.LinAlgError, FloatingPointError):
            return None


def solve_hermitian_toeplitz(spec: HermitianToeplitz, rhs) -> np.ndarray:
    """Solve ``(R + loading*I) w = rhs`` for a Hermitian Toeplitz ``R``.

    A failed factorization is retried once with the loading raised to
    ``max(loading, 1e-6 * first_row[0])``; a second failure raises
    :class:`SingularMatrixError`.
    """
    rhs = np.asarray(rhs, dtype=np.complex128).ravel()
    if rhs.size != spec.order:
        raise DomainError(f"rhs has length {rhs.size}, expected {spec.order}")
    mat = spec.dense()
    w = _factor_solve(mat, rhs)
    if w is None:
        escalated = max(spec.loading, 1e-6 * spec.first_row[0].real)
        mat = spec.dense(escalated)
        w = _factor_solve(mat, rhs)
    if w is None or not np.all(np.isfinite(w)):
        raise SingularMatrixError("Toeplitz system is numerically singular", float(np.linalg.cond(mat)))
    return w


def mean_power(samples) -> float:
    """Average of ``|x|**2`` over a non-empty sequence."""
    samples = np.asarray(samples)
    if samples.size == 0:
        raise DomainError("mean_power of an empty sequence")
    return float(np.mean(samples.real**2 + samples.imag**2))
