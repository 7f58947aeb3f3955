"""Input worlds: the discrete attribute-value grid and the continuous unit disk."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import NamedTuple, Sequence

import numpy as np

from .errors import ConfigError, InputError


class AttValInput(NamedTuple):
    """A pair of attribute values, each in [0, n_values)."""

    a1: int
    a2: int


class DiskPoint(NamedTuple):
    """A point with x**2 + y**2 <= 1."""

    x: float
    y: float


@dataclass(frozen=True)
class WorldConfig:
    """Input-world parameters shared by dataset builders."""

    n_values: int = 31
    test_fraction: float = 0.2
    n_train: int = 1000
    n_test: int = 1000
    seed: int = 0

    def __post_init__(self):
        if self.n_values < 2:
            raise ConfigError("n_values must be at least 2")
        if not 0.0 < self.test_fraction < 1.0:
            raise ConfigError("test_fraction must be in (0, 1)")


def enumerate_attval(n_values: int) -> list[AttValInput]:
    """All n_values**2 attribute pairs in lexicographic order."""
    if n_values < 2:
        raise ConfigError("n_values must be at least 2")
    return [AttValInput(a1, a2) for a1 in range(n_values) for a2 in range(n_values)]


def split_train_test(items: Sequence, test_fraction: float, seed: int) -> tuple[list, list]:
    """Deterministic seeded split; the test side gets round(fraction * n) items."""
    if len(items) == 0:
        raise InputError("cannot split an empty dataset")
    if len(items) < 2:
        raise InputError("need at least 2 items to split")
    if not 0.0 < test_fraction < 1.0:
        raise ConfigError("test_fraction must be in (0, 1)")
    n_test = int(len(items) * test_fraction + 0.5)
    perm = np.random.default_rng(seed).permutation(len(items))
    test = [items[i] for i in perm[:n_test]]
    train = [items[i] for i in perm[n_test:]]
    return train, test


def sample_unit_disk(n: int, seed: int) -> list[DiskPoint]:
    """n points uniform over the area of the unit disk, deterministic per seed."""
    if n < 1:
        raise ConfigError("need at least one point")
    rng = np.random.default_rng(seed)
    radius = np.sqrt(rng.uniform(0.0, 1.0, size=n))
    angle = rng.uniform(0.0, 2.0 * np.pi, size=n)
    xs = radius * np.cos(angle)
    ys = radius * np.sin(angle)
    points = []
    for x, y in zip(xs, ys):
        while x * x + y * y > 1.0:  # guard against rounding at the rim
            x *= 1.0 - 1e-15
            y *= 1.0 - 1e-15
        points.append(DiskPoint(float(x), float(y)))
    return points


def dump_dataset(path: str | Path, items: Sequence[AttValInput] | Sequence[DiskPoint]) -> None:
    """One record per line, two plain-decimal fields."""
    lines = [f"{a} {b}" for a, b in items]
    Path(path).write_text("\n".join(lines) + "\n")
