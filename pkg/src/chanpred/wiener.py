"""Order-N, horizon-l Wiener channel predictor built from a sample ACF.

Windows are ordered newest-first throughout: ``window[k-1]`` holds the
estimate taken ``k-1`` symbols before the most recent one.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from chanpred.numerics import DomainError, HermitianToeplitz, solve_hermitian_toeplitz


@dataclass(frozen=True)
class AcfEstimate:
    values: np.ndarray
    train_len: int

    @property
    def max_lag(self) -> int:
        return self.values.size - 1

    def at(self, lag: int) -> complex:
        """ACF at any integer lag, using ``phi[-k] = conj(phi[k])``."""
        if lag < 0:
            return complex(np.conj(self.values[-lag]))
        return complex(self.values[lag])


def sample_acf(train, max_lag: int) -> AcfEstimate:
    """Biased sample autocorrelation of a training segment.

    ``phi[k] = (1/L) * sum_{n=0}^{L-1-k} x[n] conj(x[n+k])``; only pairs
    inside the segment enter the sum, but the normalization stays ``1/L``.
    """
    x = np.asarray(train, dtype=np.complex128).ravel()
    n = x.size
    if max_lag < 0 or max_lag >= n:
        raise DomainError(f"max_lag={max_lag} must lie in [0, {n})")
    values = np.array([np.dot(x[: n - k], x[k:].conj()) for k in range(max_lag + 1)]) / n
    values[0] = values[0].real
    return AcfEstimate(values, n)


def exact_acf(values) -> AcfEstimate:
    """Wrap known ACF values (e.g. the Jakes reference) as an estimate."""
    values = np.asarray(values, dtype=np.complex128).ravel()
    return AcfEstimate(values, np.iinfo(np.int64).max)


@dataclass(frozen=True)
class WienerPredictor:
    taps: np.ndarray
    order: int
    horizon: int
    theoretical_mmse: float


def design(acf: AcfEstimate, order: int, horizon: int, loading: float = 0.0) -> WienerPredictor:
    """Solve the normal equations ``R w = r`` for the horizon-``horizon`` taps.

    ``R[i, j] = phi[j - i]`` and ``r = [phi[l], ..., phi[N-1+l]]``. The
    returned MMSE is ``phi[0] - Re(r^H w)``.
    """
    if order < 1 or horizon < 1:
        raise DomainError(f"order and horizon must be >= 1, got N={order}, l={horizon}")
    if acf.max_lag < order - 1 + horizon:
        raise DomainError(f"ACF covers lags up to {acf.max_lag}, need {order - 1 + horizon}")
    # R[i, j] = E{x[n-i] x*[n-j]} = phi[j-i] with phi[k] = E{x[n] x*[n+k]}.
    mat = HermitianToeplitz(acf.values[:order], loading)
    r = acf.values[horizon : horizon + order]
    taps = solve_hermitian_toeplitz(mat, r)
    mmse = acf.values[0].real - float(np.real(np.vdot(r, taps)))
    return WienerPredictor(taps, order, horizon, mmse)


def predict(pred: WienerPredictor, window) -> complex:
    """``sum_k conj(w_k) window[k-1]`` over a newest-first window."""
    window = np.asarray(window, dtype=np.complex128).ravel()
    if window.size != pred.order:
        raise DomainError(f"window has {window.size} samples, predictor order is {pred.order}")
    return complex(np.vdot(pred.taps, window))


def sliding_windows(x, order: int, horizon: int) -> np.ndarray:
    """All newest-first windows of ``x`` that have a sample ``horizon`` ahead.

    Row ``i`` ends at index ``i + order - 1`` and targets ``i + order - 1 + horizon``.
    """
    x = np.asarray(x)
    count = x.size - order - horizon + 1
    if count < 1:
        raise DomainError(f"segment of {x.size} samples is shorter than N + l = {order + horizon}")
    return sliding_window_view(x[: count + order - 1], order)[:, ::-1]


def prediction_targets(x, order: int, horizon: int) -> np.ndarray:
    x = np.asarray(x)
    return x[order - 1 + horizon :]


def predict_segment(pred: WienerPredictor, estimates) -> np.ndarray:
    """Predictions for every valid window position of a segment."""
    windows = sliding_windows(estimates, pred.order, pred.horizon)
    return windows @ pred.taps.conj()


def empirical_mse(pred: WienerPredictor, estimates, truth) -> float:
    """Mean ``|h[n+l] - h_hat[n+l]|^2`` over a test segment.

    Windows are taken from the noisy ``estimates`` and errors are measured
    against the aligned noiseless ``truth``.
    """
    estimates = np.asarray(estimates)
    truth = np.asarray(truth)
    if estimates.shape != truth.shape:
        raise DomainError("estimates and truth must have the same length")
    err = prediction_targets(truth, pred.order, pred.horizon) - predict_segment(pred, estimates)
    return float(np.mean(err.real**2 + err.imag**2))
