"""Hard-coded sender languages and the naive-compositionality analyzer.

A language maps an input to a fixed length-2 message over a vocabulary of
size n_values. A language is naively compositional when some bijection
between message positions and input attributes makes each symbol a
function of its own attribute alone, determining that attribute uniquely.
"""

from __future__ import annotations

import math
from collections import Counter, defaultdict
from dataclasses import dataclass
from typing import Callable, NamedTuple, Sequence

import numpy as np

from .errors import ConfigError, InputError
from .worlds import AttValInput, DiskPoint

DEFAULT_ROTATION = math.pi / 4.0

LANGUAGE_KINDS = ("identity", "entangled", "coordinate", "rotated")
ATTVAL_KINDS = ("identity", "entangled")
DISK_KINDS = ("coordinate", "rotated")


class Message(NamedTuple):
    """Length-2 message; both symbols in [0, n_values)."""

    s1: int
    s2: int


@dataclass(frozen=True)
class LanguageSpec:
    kind: str
    n_values: int
    rotation_angle: float = DEFAULT_ROTATION

    def __post_init__(self):
        if self.kind not in LANGUAGE_KINDS:
            raise ConfigError(f"unknown language kind {self.kind!r}")
        if self.n_values < 2:
            raise ConfigError("n_values must be at least 2")
        if self.kind == "rotated" and not 0.0 < self.rotation_angle < math.pi / 2.0:
            raise ConfigError("rotation_angle must lie in (0, pi/2)")


def encode_identity(item: AttValInput) -> Message:
    return Message(item[0], item[1])


def encode_entangled(item: AttValInput, n_values: int) -> Message:
    """First symbol carries the difference, second the sum, both mod n_values."""
    a1, a2 = item
    return Message((a1 - a2) % n_values, (a1 + a2) % n_values)


def discretize(v: float, n_values: int) -> int:
    """Bucket index of v on an n_values grid over [-1, 1], top edge clamped."""
    if not -1.0 <= v <= 1.0:
        raise InputError(f"coordinate {v} outside [-1, 1]")
    return min(int(math.floor((v + 1.0) / 2.0 * n_values)), n_values - 1)


def rotate_point(p: DiskPoint, angle: float) -> DiskPoint:
    """Counterclockwise rotation about the origin."""
    c, s = math.cos(angle), math.sin(angle)
    return DiskPoint(c * p[0] - s * p[1], s * p[0] + c * p[1])


def encode_coordinate(p: DiskPoint, n_values: int) -> Message:
    return Message(discretize(p[0], n_values), discretize(p[1], n_values))


def encode_rotated(p: DiskPoint, n_values: int, angle: float = DEFAULT_ROTATION) -> Message:
    return encode_coordinate(rotate_point(p, angle), n_values)


def make_encoder(spec: LanguageSpec) -> Callable:
    """Encoder over the language's native inputs (attribute pairs or points)."""
    if spec.kind == "identity":
        return encode_identity
    if spec.kind == "entangled":
        return lambda item: encode_entangled(item, spec.n_values)
    if spec.kind == "coordinate":
        return lambda p: encode_coordinate(p, spec.n_values)
    return lambda p: encode_rotated(p, spec.n_values, spec.rotation_angle)


# ---------------------------------------------------------------------------
# analysis: exact mutual information and the compositionality predicate
# ---------------------------------------------------------------------------


def cell_center(gx: int, gy: int, n_values: int) -> DiskPoint:
    step = 2.0 / n_values
    return DiskPoint(-1.0 + (gx + 0.5) * step, -1.0 + (gy + 0.5) * step)


def disk_grid_world(n_values: int) -> list[tuple[int, int]]:
    """Grid cells over [-1, 1]^2 whose centers fall inside the unit disk."""
    cells = []
    for gx in range(n_values):
        for gy in range(n_values):
            x, y = cell_center(gx, gy, n_values)
            if x * x + y * y <= 1.0:
                cells.append((gx, gy))
    return cells


def analysis_world(spec: LanguageSpec) -> tuple[list[tuple[int, int]], Callable]:
    """Finite enumeration of the language's inputs as attribute pairs,
    plus an encoder over those pairs.

    Attribute-value languages enumerate the full pair grid; point languages
    enumerate disk-grid cells encoded at their centers.
    """
    if spec.kind in ATTVAL_KINDS:
        world = [(a1, a2) for a1 in range(spec.n_values) for a2 in range(spec.n_values)]
        return world, make_encoder(spec)
    point_encoder = make_encoder(spec)
    world = disk_grid_world(spec.n_values)
    return world, lambda cell: point_encoder(cell_center(cell[0], cell[1], spec.n_values))


def mi_matrix(encoder: Callable, world: Sequence[tuple[int, int]]) -> np.ndarray:
    """Exact I(message position; attribute) in bits, 2x2, uniform over the world."""
    if len(world) == 0:
        raise ConfigError("mi_matrix needs a non-empty enumerable world")
    n = len(world)
    messages = [encoder(item) for item in world]
    out = np.zeros((2, 2))
    for j in range(2):
        for a in range(2):
            joint = Counter((messages[i][j], world[i][a]) for i in range(n))
            sym_marginal = Counter(m[j] for m in messages)
            attr_marginal = Counter(item[a] for item in world)
            mi = 0.0
            for (sym, val), count in joint.items():
                p_joint = count / n
                p_indep = (sym_marginal[sym] / n) * (attr_marginal[val] / n)
                mi += p_joint * math.log2(p_joint / p_indep)
            out[j, a] = mi
    return out


def is_naively_compositional(
    encoder: Callable, world: Sequence[tuple[int, int]]
) -> tuple[bool, dict[int, int] | None]:
    """Brute-force search for a position-to-attribute bijection under which
    each symbol is a function of its own attribute and pins it down uniquely.

    Returns (verdict, witness); the witness maps 1-based message positions
    to 1-based attribute indices.
    """
    messages = [encoder(item) for item in world]
    for assignment in ((0, 1), (1, 0)):
        ok = True
        for j in range(2):
            a = assignment[j]
            value_to_symbols = defaultdict(set)
            symbol_to_values = defaultdict(set)
            for item, message in zip(world, messages):
                value_to_symbols[item[a]].add(message[j])
                symbol_to_values[message[j]].add(item[a])
            if any(len(syms) != 1 for syms in value_to_symbols.values()) or any(
                len(vals) != 1 for vals in symbol_to_values.values()
            ):
                ok = False
                break
        if ok:
            return True, {j + 1: assignment[j] + 1 for j in range(2)}
    return False, None


@dataclass
class LanguageAnalysis:
    spec: LanguageSpec
    mi_bits: np.ndarray
    compositional: bool
    witness: dict[int, int] | None
    world_size: int
    distinct_messages: int

    @property
    def injective(self) -> bool:
        return self.distinct_messages == self.world_size


def analyze_language(spec: LanguageSpec) -> LanguageAnalysis:
    world, encoder = analysis_world(spec)
    messages = [encoder(item) for item in world]
    verdict, witness = is_naively_compositional(encoder, world)
    return LanguageAnalysis(
        spec=spec,
        mi_bits=mi_matrix(encoder, world),
        compositional=verdict,
        witness=witness,
        world_size=len(world),
        distinct_messages=len(set(messages)),
    )


def format_analysis(analysis: LanguageAnalysis) -> str:
    """Plain-text analyzer report: MI table, verdict, witness, injectivity."""
    spec = analysis.spec
    lines = [
        f"language: {spec.kind} (n_values={spec.n_values})",
        f"world size: {analysis.world_size} inputs, {analysis.distinct_messages} distinct messages",
    ]
    if not analysis.injective:
        lines.append(
            "warning: language is not injective on this world "
            f"({analysis.distinct_messages} messages for {analysis.world_size} inputs)"
        )
    lines.append("mutual information (bits):")
    lines.append("              attribute1  attribute2")
    for j in range(2):
        row = analysis.mi_bits[j]
        lines.append(f"  position{j + 1}    {row[0]:10.4f}  {row[1]:10.4f}")
    verdict = "compositional" if analysis.compositional else "not compositional"
    lines.append(f"verdict: {verdict}")
    if analysis.witness is not None:
        pairs = ", ".join(f"position{j} -> attribute{a}" for j, a in sorted(analysis.witness.items()))
        lines.append(f"witness: {pairs}")
    return "\n".join(lines)
