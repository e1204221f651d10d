"""Named benchmark instances used by the CLI generator and the tests."""

from __future__ import annotations

import numpy as np

from .errors import InvalidInstance
from .model import Instance, beta_mixture_matrix, build_instance, uniform_row, zipf_row

THREE_USER_SKEW = np.array(
    [
        [0.70, 0.20, 0.10, 0.00],
        [0.40, 0.30, 0.20, 0.10],
        [0.25, 0.25, 0.25, 0.25],
    ]
)

_DEFAULT_BUFFERS = {
    "two_item_skewed": (1.0, 1.0),
    "zipf_zipf": (1.0, 1.0),
    "uniform_zipf": (1.0, 1.0),
    "uniform_uniform": (1.0, 1.0),
    "beta_mixture": (2.0, 2.0),
    "three_user_skew": (2.0, 2.0, 2.0),
}

PRESET_NAMES = tuple(sorted(_DEFAULT_BUFFERS))


def preset_matrix(name: str, beta: float = 0.5) -> np.ndarray:
    if name == "two_item_skewed":
        return np.array([[0.99, 0.01], [0.5, 0.5]])
    if name == "zipf_zipf":
        z = zipf_row(20, 1.0)
        return np.vstack([z, z])
    if name == "uniform_zipf":
        return np.vstack([uniform_row(20), zipf_row(20, 1.0)])
    if name == "uniform_uniform":
        u = uniform_row(20)
        return np.vstack([u, u])
    if name == "beta_mixture":
        return beta_mixture_matrix(beta).p.copy()
    if name == "three_user_skew":
        return THREE_USER_SKEW.copy()
    raise InvalidInstance(f"unknown preset {name!r}; choose from {', '.join(PRESET_NAMES)}")


def preset_instance(name: str, buffers=None, beta: float = 0.5, chunks: int = 1) -> Instance:
    matrix = preset_matrix(name, beta=beta)
    if buffers is None:
        buffers = _DEFAULT_BUFFERS[name]
    if len(buffers) != matrix.shape[0]:
        raise InvalidInstance(
            f"preset {name!r} has {matrix.shape[0]} users, got {len(buffers)} buffer sizes"
        )
    return build_instance(matrix, buffers, chunks_per_item=chunks)
