"""Recurrent cells built on the differentiation trace.

Exact gate equations implemented here, with ``W*`` acting on the input,
``U*`` on the previous hidden state, and one bias per gate:

LSTM (forget-gate variant, no peepholes)::

    i = sigmoid(Wi x + Ui h + bi)        input gate
    f = sigmoid(Wf x + Uf h + bf)        forget gate
    g = tanh   (Wg x + Ug h + bg)        candidate
    o = sigmoid(Wo x + Uo h + bo)        output gate
    c' = f * c + i * g
    h' = o * tanh(c')

GRU (reset gate applied to the previous state inside the candidate;
the update gate keeps the previous state)::

    z = sigmoid(Wz x + Uz h + bz)        update gate
    r = sigmoid(Wr x + Ur h + br)        reset gate
    n = tanh   (Wn x + Un (r * h) + bn)  candidate
    h' = z * h + (1 - z) * n

All weights and biases are initialized uniform in
[-INIT_SCALE/sqrt(fan_in), +INIT_SCALE/sqrt(fan_in)], where fan_in is the
input dimension for input weights and the hidden dimension for recurrent
weights and biases. The scale keeps early training in a regime where the
listener memorizes symbol combinations rather than immediately inferring
algebraic structure from them; small-init runs solve the modular tasks
compositionally, which is exactly what this benchmark must be able to
measure the absence of.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .autodiff import Parameter, Tensor, add, as_tensor, linear, mul, one_minus, reshape, sigmoid, tanh
from .errors import ConfigError

LSTM_GATES = ("input_gate", "forget_gate", "candidate", "output_gate")
GRU_GATES = ("update_gate", "reset_gate", "candidate")

INIT_SCALE = 4.0


@dataclass
class GateBlock:
    """One gate's parameters: input map, recurrent map, bias."""

    input_weights: Parameter  # (hidden, input)
    recurrent_weights: Parameter  # (hidden, hidden)
    bias: Parameter  # (hidden,)


@dataclass
class CellParams:
    """Parameter blocks for one recurrent cell, in canonical gate order."""

    kind: str  # "lstm" | "gru"
    input_dim: int
    hidden_dim: int
    blocks: dict[str, GateBlock]

    def parameters(self) -> list[Parameter]:
        out: list[Parameter] = []
        for block in self.blocks.values():
            out.extend((block.input_weights, block.recurrent_weights, block.bias))
        return out


def _uniform(rng: np.random.Generator, shape: tuple[int, ...], fan_in: int) -> np.ndarray:
    bound = INIT_SCALE / np.sqrt(fan_in)
    return rng.uniform(-bound, bound, size=shape)


def init_cell_params(kind: str, input_dim: int, hidden_dim: int, rng: np.random.Generator) -> CellParams:
    if kind not in ("lstm", "gru"):
        raise ConfigError(f"unknown cell kind {kind!r}")
    if input_dim < 1 or hidden_dim < 1:
        raise ConfigError("cell dimensions must be positive")
    gate_names = LSTM_GATES if kind == "lstm" else GRU_GATES
    blocks = {}
    for name in gate_names:
        blocks[name] = GateBlock(
            input_weights=Parameter(
                _uniform(rng, (hidden_dim, input_dim), input_dim), name=f"cell.{name}.input_weights"
            ),
            recurrent_weights=Parameter(
                _uniform(rng, (hidden_dim, hidden_dim), hidden_dim), name=f"cell.{name}.recurrent_weights"
            ),
            bias=Parameter(_uniform(rng, (hidden_dim,), hidden_dim), name=f"cell.{name}.bias"),
        )
    return CellParams(kind=kind, input_dim=input_dim, hidden_dim=hidden_dim, blocks=blocks)


def _as_row_matrix(v, dim: int, what: str) -> tuple[Tensor, bool]:
    t = as_tensor(v)
    if t.data.ndim == 1:
        if t.data.shape[0] != dim:
            raise ConfigError(f"{what}: expected size {dim}, got {t.data.shape[0]}")
        return reshape(t, (1, dim)), True
    if t.data.ndim == 2:
        if t.data.shape[1] != dim:
            raise ConfigError(f"{what}: expected row size {dim}, got {t.data.shape[1]}")
        return t, False
    raise ConfigError(f"{what}: rank must be 1 or 2")


def _gate_preactivation(block: GateBlock, x: Tensor, h: Tensor) -> Tensor:
    return add(linear(x, block.input_weights, block.bias), linear(h, block.recurrent_weights))


def lstm_cell_step(params: CellParams, x, h_prev, c_prev) -> tuple[Tensor, Tensor]:
    """One LSTM step. Accepts rank-1 vectors or rank-2 row batches."""
    if params.kind != "lstm":
        raise ConfigError("lstm_cell_step needs lstm parameters")
    x2, was_vector = _as_row_matrix(x, params.input_dim, "lstm input")
    h2, _ = _as_row_matrix(h_prev, params.hidden_dim, "lstm hidden state")
    c2, _ = _as_row_matrix(c_prev, params.hidden_dim, "lstm cell state")
    blocks = params.blocks
    i = sigmoid(_gate_preactivation(blocks["input_gate"], x2, h2))
    f = sigmoid(_gate_preactivation(blocks["forget_gate"], x2, h2))
    g = tanh(_gate_preactivation(blocks["candidate"], x2, h2))
    o = sigmoid(_gate_preactivation(blocks["output_gate"], x2, h2))
    c_new = add(mul(f, c2), mul(i, g))
    h_new = mul(o, tanh(c_new))
    if was_vector:
        return reshape(h_new, (params.hidden_dim,)), reshape(c_new, (params.hidden_dim,))
    return h_new, c_new


def gru_cell_step(params: CellParams, x, h_prev) -> Tensor:
    """One GRU step. Accepts rank-1 vectors or rank-2 row batches."""
    if params.kind != "gru":
        raise ConfigError("gru_cell_step needs gru parameters")
    x2, was_vector = _as_row_matrix(x, params.input_dim, "gru input")
    h2, _ = _as_row_matrix(h_prev, params.hidden_dim, "gru hidden state")
    blocks = params.blocks
    z = sigmoid(_gate_preactivation(blocks["update_gate"], x2, h2))
    r = sigmoid(_gate_preactivation(blocks["reset_gate"], x2, h2))
    n = tanh(
        add(
            linear(x2, blocks["candidate"].input_weights, blocks["candidate"].bias),
            linear(mul(r, h2), blocks["candidate"].recurrent_weights),
        )
    )
    h_new = add(mul(z, h2), mul(one_minus(z), n))
    if was_vector:
        return reshape(h_new, (params.hidden_dim,))
    return h_new
