"""Plain-text model files.

Architecture fields come first as ``key = value`` lines, then each tensor
as a ``tensor <name> <dims...>`` line followed by one ``<name>[<row>] =``
line per row. Values are written with 17 significant digits, which
round-trips float64 exactly.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from chanpred.neural.model import Architecture, RecurrentModel
from chanpred.numerics import DomainError

_ARCH_FIELDS = {
    "cell_kind": str,
    "hidden_layers": int,
    "hidden_units": int,
    "input_mode": str,
    "window": int,
    "dropout_rate": float,
}


def _fmt(x: float) -> str:
    return f"{x:.16e}"


def dumps(model: RecurrentModel) -> str:
    lines = ["# chanpred recurrent model v1"]
    for key in _ARCH_FIELDS:
        value = getattr(model.arch, key)
        lines.append(f"{key} = {_fmt(value) if isinstance(value, float) else value}")
    if model.rng_seed is not None:
        lines.append(f"rng_seed = {model.rng_seed}")
    for name, arr in model.params.items():
        rows = arr.reshape(arr.shape[0], -1)
        lines.append(f"tensor {name} " + " ".join(str(d) for d in arr.shape))
        for i, row in enumerate(rows):
            lines.append(f"{name}[{i}] = " + " ".join(_fmt(v) for v in row))
    return "\n".join(lines) + "\n"


def loads(text: str) -> RecurrentModel:
    fields, rng_seed = {}, None
    tensors: dict[str, list[list[float]]] = {}
    shapes: dict[str, tuple[int, ...]] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("tensor "):
            _, name, *dims = line.split()
            shapes[name] = tuple(int(d) for d in dims)
            tensors[name] = []
            continue
        key, sep, value = (s.strip() for s in line.partition("="))
        if not sep:
            raise DomainError(f"line {lineno}: expected 'key = value'")
        if key in _ARCH_FIELDS:
            fields[key] = _ARCH_FIELDS[key](value)
        elif key == "rng_seed":
            rng_seed = int(value)
        elif "[" in key and key.split("[")[0] in tensors:
            tensors[key.split("[")[0]].append([float(v) for v in value.split()])
        else:
            raise DomainError(f"line {lineno}: unknown key {key!r}")
    arch = Architecture(**fields)
    expected = arch.shapes()
    if list(shapes) != list(expected) or any(shapes[k] != expected[k] for k in expected):
        raise DomainError("tensor shapes do not match the architecture")
    flat = np.concatenate([np.asarray(tensors[k], dtype=np.float64).ravel() for k in expected])
    return RecurrentModel(arch, flat, rng_seed)


def save_model(model: RecurrentModel, path) -> None:
    Path(path).write_text(dumps(model))


def load_model(path) -> RecurrentModel:
    return loads(Path(path).read_text())
