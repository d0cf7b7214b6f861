"""Mini-batch Adam training with dropout and early stopping."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from chanpred.neural.blocks import Dataset, encode_window, interleave, make_blocks
from chanpred.neural.model import RecurrentModel, dropout_mask, forward_batch, loss_and_gradients
from chanpred.neural.optim import Adam
from chanpred.numerics import DomainError

TRAIN_STREAM = 2


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 0.01
    batch_size: int = 16
    max_epochs: int = 200
    patience: int = 10
    min_delta: float = 1e-5
    validation_fraction: float = 0.1
    seed: int = 0

    def __post_init__(self):
        if not self.learning_rate > 0:
            raise DomainError(f"learning_rate must be > 0, got {self.learning_rate}")
        if self.batch_size < 1 or self.max_epochs < 1 or self.patience < 0:
            raise DomainError("batch_size and max_epochs must be >= 1, patience >= 0")
        if not 0.0 <= self.validation_fraction < 1.0:
            raise DomainError(f"validation_fraction must be in [0, 1), got {self.validation_fraction}")


@dataclass
class TrainResult:
    model: RecurrentModel
    train_loss: list[float] = field(default_factory=list)
    val_loss: list[float] = field(default_factory=list)
    initial_val_loss: float = float("nan")
    best_epoch: int = 0

    @property
    def epochs(self) -> int:
        return len(self.train_loss)


def _mean_loss(model: RecurrentModel, data: Dataset) -> float:
    out, _ = forward_batch(model, data.inputs)
    diff = out - data.targets
    return float(np.sum(diff * diff) / len(data))


def train(model: RecurrentModel, estimates, n: int, ell: int, config: TrainConfig) -> TrainResult:
    """Fit ``model`` to predict ``estimates`` ``ell`` steps ahead from ``n``-blocks.

    The last ``validation_fraction`` of blocks is held out. Training stops
    once the validation loss has failed to improve by ``min_delta`` for more
    than ``patience`` consecutive epochs (so ``patience=0`` stops at the
    first non-improving epoch), or after ``max_epochs``. The returned model
    carries the best validation weights; epoch 0 is the untrained model.
    ``model`` itself is left untouched.
    """
    if n != model.arch.window:
        raise DomainError(f"block size {n} does not match model window {model.arch.window}")
    data = make_blocks(estimates, n, ell)
    n_val = int(round(config.validation_fraction * len(data)))
    if len(data) - n_val < 1:
        raise DomainError("no training blocks left after the validation split")
    train_set = data[: len(data) - n_val]
    val_set = data[len(data) - n_val :] if n_val else train_set

    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence([int(config.seed), TRAIN_STREAM])))
    work = model.copy()
    opt = Adam(work.flat.size, lr=config.learning_rate)
    best = _mean_loss(work, val_set)
    result = TrainResult(model=work.copy(), initial_val_loss=best)
    best_flat = work.flat.copy()
    wait = 0
    count = len(train_set)
    for epoch in range(1, config.max_epochs + 1):
        order = rng.permutation(count)
        for start in range(0, count, config.batch_size):
            idx = order[start : start + config.batch_size]
            mask = dropout_mask(work.arch, idx.size, rng)
            _, grad = loss_and_gradients(work, train_set.inputs[idx], train_set.targets[idx], mask)
            opt.step(work.flat, grad)
        if not np.all(np.isfinite(work.flat)):
            raise FloatingPointError(f"non-finite weights after epoch {epoch}")
        val = _mean_loss(work, val_set)
        # Both losses are evaluated without dropout at the end of the epoch.
        result.train_loss.append(_mean_loss(work, train_set))
        result.val_loss.append(val)
        if val < best - config.min_delta:
            best = val
            best_flat[...] = work.flat
            result.best_epoch = epoch
            wait = 0
        else:
            wait += 1
            if wait > config.patience:
                break
    work.flat[...] = best_flat
    result.model = work
    return result


def predict_nn(model: RecurrentModel, window) -> complex:
    """Predict from a newest-first complex window of length N (dropout off)."""
    window = np.asarray(window, dtype=np.complex128).ravel()
    if window.size != model.arch.window:
        raise DomainError(f"window has {window.size} samples, model expects {model.arch.window}")
    out, _ = forward_batch(model, encode_window(window)[None, :])
    return complex(out[0, 0], out[0, 1])


def predict_segment_nn(model: RecurrentModel, estimates, ell: int) -> np.ndarray:
    """Predictions for every block position of a segment, aligned like the Wiener path."""
    data = make_blocks(estimates, model.arch.window, ell)
    out, _ = forward_batch(model, data.inputs)
    return out[:, 0] + 1j * out[:, 1]
