"""Ground-truth target generators for the listener.

Discrete tasks output a pair in [0, n_values)^2; the coordinates task
outputs the original real point.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from .languages import encode_entangled
from .worlds import AttValInput, DiskPoint

ENTANGLING_MATRIX = ((1, -1), (1, 1))  # row j sends (a1, a2) to a1 -+ a2


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    d = 2
    while d * d <= n:
        if n % d == 0:
            return False
        d += 1
    return True


@dataclass(frozen=True)
class LinearTaskParams:
    """Invertible affine map on pairs mod n_values."""

    matrix: tuple[tuple[int, int], tuple[int, int]]
    offset: tuple[int, int]
    n_values: int

    def __post_init__(self):
        (m00, m01), (m10, m11) = self.matrix
        det = (m00 * m11 - m01 * m10) % self.n_values
        if det == 0:
            raise ConfigError("linear task matrix is singular mod n_values")

    def to_dict(self) -> dict:
        return {"matrix": [list(row) for row in self.matrix], "offset": list(self.offset)}


def _normalized(matrix, n_values: int) -> tuple[tuple[int, int], tuple[int, int]]:
    return tuple(tuple(v % n_values for v in row) for row in matrix)


def gen_linear_params(n_values: int, seed: int) -> LinearTaskParams:
    """Rejection-sample an invertible affine map, excluding the identity map
    and the difference/sum map so the linear task stays distinct from the
    other two tasks. Deterministic per seed; requires prime n_values."""
    if not is_prime(n_values):
        raise ConfigError(f"linear task needs prime n_values, got {n_values}")
    identity = ((1, 0), (0, 1))
    entangling = _normalized(ENTANGLING_MATRIX, n_values)
    rng = np.random.default_rng(seed)
    while True:
        m = tuple(tuple(int(v) for v in row) for row in rng.integers(0, n_values, size=(2, 2)))
        det = (m[0][0] * m[1][1] - m[0][1] * m[1][0]) % n_values
        if det == 0 or m == identity or m == entangling:
            continue
        offset = tuple(int(v) for v in rng.integers(0, n_values, size=2))
        return LinearTaskParams(matrix=m, offset=offset, n_values=n_values)


def target_identity(item: AttValInput) -> tuple[int, int]:
    return (item[0], item[1])


def target_linear(item: AttValInput, params: LinearTaskParams, n_values: int) -> tuple[int, int]:
    a1, a2 = item
    (m00, m01), (m10, m11) = params.matrix
    b1, b2 = params.offset
    return ((m00 * a1 + m01 * a2 + b1) % n_values, (m10 * a1 + m11 * a2 + b2) % n_values)


def target_entangled(item: AttValInput, n_values: int) -> tuple[int, int]:
    """Difference/sum transform mod n_values; the same map the entangled
    language applies to messages."""
    return tuple(encode_entangled(item, n_values))


def target_coordinates(p: DiskPoint) -> tuple[float, float]:
    """The pre-rotation coordinates, whatever language carried the point."""
    return (p[0], p[1])
