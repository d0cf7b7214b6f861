"""Turn complex LS estimates into real-valued training blocks."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from chanpred.numerics import DomainError


@dataclass(frozen=True)
class Dataset:
    """``inputs`` is (count, 2N) interleaved re/im, oldest sample first;
    ``targets`` is (count, 2)."""

    inputs: np.ndarray
    targets: np.ndarray

    def __len__(self):
        return self.inputs.shape[0]

    def __getitem__(self, idx):
        return Dataset(self.inputs[idx], self.targets[idx])


def interleave(x: np.ndarray) -> np.ndarray:
    """[z0, z1, ...] -> [re0, im0, re1, im1, ...] along the last axis."""
    x = np.asarray(x, dtype=np.complex128)
    out = np.empty(x.shape[:-1] + (2 * x.shape[-1],))
    out[..., 0::2] = x.real
    out[..., 1::2] = x.imag
    return out


def make_blocks(estimates, n: int, ell: int) -> Dataset:
    """Overlapping length-``n`` blocks, each targeting the sample ``ell`` ahead.

    Block ``i`` covers ``estimates[i : i+n]`` and its target is
    ``estimates[i+n-1+ell]``.
    """
    x = np.asarray(estimates, dtype=np.complex128).ravel()
    if n < 1 or ell < 1:
        raise DomainError(f"n and ell must be >= 1, got n={n}, ell={ell}")
    count = x.size - n - ell + 1
    if count < 1:
        raise DomainError(f"{x.size} samples cannot form a block with n={n}, ell={ell}")
    windows = sliding_window_view(x[: count + n - 1], n)
    target = x[n - 1 + ell :]
    return Dataset(interleave(windows), np.stack([target.real, target.imag], axis=1))


def encode_window(window) -> np.ndarray:
    """Encode a newest-first complex window in the block layout."""
    window = np.asarray(window, dtype=np.complex128).ravel()
    return interleave(window[::-1])
