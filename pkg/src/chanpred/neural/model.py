"""Stacked RNN/LSTM cells with a linear 2-unit output and exact BPTT.

All parameters live in one flat float64 buffer; ``model.params`` holds
named views into it, and gradients use the same layout. LSTM gate blocks
are stacked in the order input, forget, output, candidate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from chanpred.numerics import DomainError

CELL_KINDS = ("rnn", "lstm")
INPUT_MODES = ("sequence", "flat")


@dataclass(frozen=True)
class Architecture:
    cell_kind: str = "rnn"
    hidden_layers: int = 1
    hidden_units: int = 16
    input_mode: str = "sequence"
    window: int = 5
    dropout_rate: float = 0.2

    def __post_init__(self):
        if self.cell_kind not in CELL_KINDS:
            raise DomainError(f"cell_kind must be one of {CELL_KINDS}, got {self.cell_kind!r}")
        if self.input_mode not in INPUT_MODES:
            raise DomainError(f"input_mode must be one of {INPUT_MODES}, got {self.input_mode!r}")
        if self.hidden_layers < 1 or self.hidden_units < 1 or self.window < 1:
            raise DomainError("hidden_layers, hidden_units and window must all be >= 1")
        if not 0.0 <= self.dropout_rate < 1.0:
            raise DomainError(f"dropout_rate must be in [0, 1), got {self.dropout_rate}")

    @property
    def gates(self) -> int:
        return 4 if self.cell_kind == "lstm" else 1

    @property
    def steps(self) -> int:
        return self.window if self.input_mode == "sequence" else 1

    @property
    def features(self) -> int:
        return 2 if self.input_mode == "sequence" else 2 * self.window

    def shapes(self) -> dict[str, tuple[int, ...]]:
        """Parameter name -> shape, in buffer order."""
        h, g = self.hidden_units, self.gates
        out = {}
        for layer in range(self.hidden_layers):
            fan_in = self.features if layer == 0 else h
            out[f"W_in{layer}"] = (g * h, fan_in)
            out[f"W_rec{layer}"] = (g * h, h)
            out[f"b{layer}"] = (g * h,)
        out["W_out"] = (2, h)
        out["b_out"] = (2,)
        return out

    def parameter_count(self) -> int:
        return sum(math.prod(s) for s in self.shapes().values())


class RecurrentModel:
    """Weights of a recurrent predictor, stored in one flat buffer."""

    def __init__(self, arch: Architecture, flat: np.ndarray | None = None, rng_seed: int | None = None):
        self.arch = arch
        self.rng_seed = rng_seed
        self.flat = np.zeros(arch.parameter_count()) if flat is None else np.array(flat, dtype=np.float64)
        if self.flat.size != arch.parameter_count():
            raise DomainError(f"expected {arch.parameter_count()} parameters, got {self.flat.size}")
        self.params = split_flat(self.flat, arch)

    def copy(self) -> RecurrentModel:
        return RecurrentModel(self.arch, self.flat.copy(), self.rng_seed)

    def __repr__(self):
        a = self.arch
        return (f"RecurrentModel({a.cell_kind}, layers={a.hidden_layers}, units={a.hidden_units}, "
                f"mode={a.input_mode}, N={a.window}, params={self.flat.size})")


def split_flat(flat: np.ndarray, arch: Architecture) -> dict[str, np.ndarray]:
    views = {}
    offset = 0
    for name, shape in arch.shapes().items():
        size = math.prod(shape)
        views[name] = flat[offset : offset + size].reshape(shape)
        offset += size
    return views


def init_model(arch: Architecture, seed: int) -> RecurrentModel:
    """Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) init; LSTM forget bias 1."""
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence([int(seed), 3])))
    model = RecurrentModel(arch, rng_seed=seed)
    h = arch.hidden_units
    for name, view in model.params.items():
        fan_in = view.shape[1] if view.ndim == 2 else h
        bound = 1.0 / math.sqrt(fan_in)
        view[...] = rng.uniform(-bound, bound, size=view.shape)
    if arch.cell_kind == "lstm":
        for layer in range(arch.hidden_layers):
            model.params[f"b{layer}"][h : 2 * h] = 1.0
    return model


def _sigmoid(z):
    # Split by sign so exp never overflows.
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def to_steps(inputs: np.ndarray, arch: Architecture) -> np.ndarray:
    """(batch, 2N) block inputs -> (batch, steps, features)."""
    inputs = np.asarray(inputs, dtype=np.float64)
    if inputs.ndim == 1:
        inputs = inputs[None, :]
    if inputs.shape[-1] != 2 * arch.window:
        raise DomainError(f"input has {inputs.shape[-1]} entries, expected {2 * arch.window}")
    return inputs.reshape(inputs.shape[0], arch.steps, arch.features)


def dropout_mask(arch: Architecture, batch: int, rng: np.random.Generator | None) -> np.ndarray | None:
    if rng is None or arch.dropout_rate == 0.0:
        return None
    keep = 1.0 - arch.dropout_rate
    return (rng.random((batch, arch.hidden_units)) < keep) / keep


def _rnn_layer(x, w_in, w_rec, b):
    batch, steps, _ = x.shape
    pre = x @ w_in.T + b
    states = np.empty((batch, steps + 1, w_rec.shape[0]))
    states[:, 0] = 0.0
    for t in range(steps):
        states[:, t + 1] = np.tanh(pre[:, t] + states[:, t] @ w_rec.T)
    return states[:, 1:], states


def _lstm_layer(x, w_in, w_rec, b):
    batch, steps, _ = x.shape
    h = w_rec.shape[1]
    pre = x @ w_in.T + b
    hs = np.zeros((batch, steps + 1, h))
    cs = np.zeros((batch, steps + 1, h))
    acts = np.empty((batch, steps, 4 * h))
    for t in range(steps):
        z = pre[:, t] + hs[:, t] @ w_rec.T
        a = acts[:, t]
        a[:, : 3 * h] = _sigmoid(z[:, : 3 * h])
        a[:, 3 * h :] = np.tanh(z[:, 3 * h :])
        i, f, o, g = a[:, :h], a[:, h : 2 * h], a[:, 2 * h : 3 * h], a[:, 3 * h :]
        cs[:, t + 1] = f * cs[:, t] + i * g
        hs[:, t + 1] = o * np.tanh(cs[:, t + 1])
    return hs[:, 1:], (hs, cs, acts)


def forward_batch(model: RecurrentModel, inputs, mask=None):
    """Batched forward pass. Returns ``(outputs, cache)``; outputs is (batch, 2)."""
    arch, p = model.arch, model.params
    x = to_steps(inputs, arch)
    layer_inputs, layer_caches = [], []
    for layer in range(arch.hidden_layers):
        w_in, w_rec, b = p[f"W_in{layer}"], p[f"W_rec{layer}"], p[f"b{layer}"]
        layer_inputs.append(x)
        if arch.cell_kind == "rnn":
            x, cache = _rnn_layer(x, w_in, w_rec, b)
        else:
            x, cache = _lstm_layer(x, w_in, w_rec, b)
        layer_caches.append(cache)
    last = x[:, -1]
    if mask is not None:
        last = last * mask
    out = last @ p["W_out"].T + p["b_out"]
    return out, (layer_inputs, layer_caches, last, mask)


def backward_batch(model: RecurrentModel, cache, d_out) -> np.ndarray:
    """Gradient (flat layout) given d(loss)/d(outputs) of shape (batch, 2)."""
    arch, p = model.arch, model.params
    layer_inputs, layer_caches, last, mask = cache
    grad = np.zeros_like(model.flat)
    g = split_flat(grad, arch)
    g["W_out"][...] = d_out.T @ last
    g["b_out"][...] = d_out.sum(axis=0)
    d_last = d_out @ p["W_out"]
    if mask is not None:
        d_last = d_last * mask
    batch, steps = d_out.shape[0], arch.steps
    h = arch.hidden_units
    d_seq = np.zeros((batch, steps, h))
    d_seq[:, -1] = d_last
    for layer in reversed(range(arch.hidden_layers)):
        x = layer_inputs[layer]
        w_in, w_rec = p[f"W_in{layer}"], p[f"W_rec{layer}"]
        if arch.cell_kind == "rnn":
            d_pre = _rnn_backward(layer_caches[layer], d_seq, w_rec)
        else:
            d_pre = _lstm_backward(layer_caches[layer], d_seq, w_rec)
        prev_h = layer_caches[layer][0][:, :-1] if arch.cell_kind == "lstm" else layer_caches[layer][:, :-1]
        g[f"W_in{layer}"][...] = np.einsum("bth,btf->hf", d_pre, x)
        g[f"W_rec{layer}"][...] = np.einsum("bth,btk->hk", d_pre, prev_h)
        g[f"b{layer}"][...] = d_pre.sum(axis=(0, 1))
        if layer:
            d_seq = d_pre @ w_in
    return grad


def _rnn_backward(states, d_seq, w_rec):
    steps = d_seq.shape[1]
    d_pre = np.empty_like(d_seq)
    d_next = np.zeros_like(d_seq[:, 0])
    for t in reversed(range(steps)):
        s = states[:, t + 1]
        da = (d_seq[:, t] + d_next) * (1.0 - s * s)
        d_pre[:, t] = da
        d_next = da @ w_rec
    return d_pre


def _lstm_backward(cache, d_seq, w_rec):
    hs, cs, acts = cache
    batch, steps, h = d_seq.shape
    d_pre = np.empty((batch, steps, 4 * h))
    dh_next = np.zeros((batch, h))
    dc_next = np.zeros((batch, h))
    for t in reversed(range(steps)):
        a = acts[:, t]
        i, f, o, g = a[:, :h], a[:, h : 2 * h], a[:, 2 * h : 3 * h], a[:, 3 * h :]
        tc = np.tanh(cs[:, t + 1])
        dh = d_seq[:, t] + dh_next
        dc = dh * o * (1.0 - tc * tc) + dc_next
        dz = d_pre[:, t]
        dz[:, :h] = dc * g * i * (1.0 - i)
        dz[:, h : 2 * h] = dc * cs[:, t] * f * (1.0 - f)
        dz[:, 2 * h : 3 * h] = dh * tc * o * (1.0 - o)
        dz[:, 3 * h :] = dc * i * (1.0 - g * g)
        dc_next = dc * f
        dh_next = dz @ w_rec
    return d_pre


def forward(model: RecurrentModel, inputs, train_mode: bool = False, dropout_seed: int | None = None) -> np.ndarray:
    """Predict (re, im) for one block input of length 2N, or a (batch, 2N) array.

    Dropout on the final hidden state is applied only when ``train_mode``.
    """
    inputs = np.asarray(inputs, dtype=np.float64)
    single = inputs.ndim == 1
    batch = 1 if single else inputs.shape[0]
    mask = None
    if train_mode:
        rng = np.random.default_rng(dropout_seed)
        mask = dropout_mask(model.arch, batch, rng)
    out, _ = forward_batch(model, inputs, mask)
    return out[0] if single else out


def loss(prediction, target) -> float:
    """Squared complex error ``dre**2 + dim**2``, averaged over a batch."""
    diff = np.asarray(prediction, dtype=np.float64) - np.asarray(target, dtype=np.float64)
    diff = diff.reshape(-1, 2)
    return float(np.mean(np.sum(diff * diff, axis=1)))


def loss_and_gradients(model: RecurrentModel, inputs, targets, mask=None) -> tuple[float, np.ndarray]:
    out, cache = forward_batch(model, inputs, mask)
    diff = out - targets
    batch = diff.shape[0]
    value = float(np.sum(diff * diff) / batch)
    return value, backward_batch(model, cache, (2.0 / batch) * diff)


def gradients(model: RecurrentModel, batch, dropout_seed: int | None = None) -> dict[str, np.ndarray]:
    """Exact gradients of the mean batch loss, keyed like ``model.params``.

    ``batch`` is a :class:`~chanpred.neural.blocks.Dataset` slice. With a
    ``dropout_seed`` the same seeded mask is used as in :func:`forward`.
    """
    inputs = np.atleast_2d(batch.inputs)
    if inputs.shape[0] == 0:
        raise DomainError("gradients need a non-empty batch")
    mask = None
    if dropout_seed is not None:
        mask = dropout_mask(model.arch, inputs.shape[0], np.random.default_rng(dropout_seed))
    _, grad = loss_and_gradients(model, inputs, np.atleast_2d(batch.targets), mask)
    return split_flat(grad, model.arch)
