"""The trainable listener: embed two symbols, unroll a recurrent cell,
decode with a linear head.

Messages are consumed as exactly two symbols (no end marker); the head
reads the hidden state after the second step. The classification head
emits 2 * n_values logits split into two blocks; the regression head
emits two reals.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .autodiff import (
    Parameter,
    Tensor,
    add,
    backward,
    cross_entropy_rows,
    gather_rows,
    linear,
    mean_all,
    mse,
    reshape,
    slice_cols,
    softmax_nll,
)
from .cells import INIT_SCALE, CellParams, gru_cell_step, init_cell_params, lstm_cell_step
from .errors import ConfigError, InputError

CHECKPOINT_HEADER = "receiver-checkpoint v1"

CLASSIFY = "classify"
REGRESS = "regress"


@dataclass(frozen=True)
class ReceiverConfig:
    cell_kind: str  # "lstm" | "gru"
    n_values: int
    head_kind: str  # "classify" | "regress"
    embed_dim: int = 50
    hidden_dim: int = 100

    def __post_init__(self):
        if self.cell_kind not in ("lstm", "gru"):
            raise ConfigError(f"unknown cell kind {self.cell_kind!r}")
        if self.head_kind not in (CLASSIFY, REGRESS):
            raise ConfigError(f"unknown head kind {self.head_kind!r}")
        if self.n_values < 2 or self.embed_dim < 1 or self.hidden_dim < 1:
            raise ConfigError("receiver dimensions must be positive (n_values >= 2)")

    @property
    def output_dim(self) -> int:
        return 2 * self.n_values if self.head_kind == CLASSIFY else 2


@dataclass
class ReceiverModel:
    config: ReceiverConfig
    embedding: Parameter  # (n_values, embed_dim)
    cell: CellParams
    head_weights: Parameter  # (output_dim, hidden_dim)
    head_bias: Parameter  # (output_dim,)

    def parameters(self) -> list[Parameter]:
        return [self.embedding, *self.cell.parameters(), self.head_weights, self.head_bias]

    def named_parameters(self) -> list[tuple[str, Parameter]]:
        return [(p.name, p) for p in self.parameters()]


def init_receiver(config: ReceiverConfig, seed: int) -> ReceiverModel:
    """Fresh model with every parameter drawn uniform in
    [-INIT_SCALE/sqrt(fan_in), +INIT_SCALE/sqrt(fan_in)] from one seeded
    stream (see the cells module for why the scale matters)."""
    rng = np.random.default_rng(seed)
    embed_bound = INIT_SCALE / np.sqrt(config.embed_dim)
    embedding = Parameter(
        rng.uniform(-embed_bound, embed_bound, size=(config.n_values, config.embed_dim)),
        name="embedding",
    )
    cell = init_cell_params(config.cell_kind, config.embed_dim, config.hidden_dim, rng)
    head_bound = INIT_SCALE / np.sqrt(config.hidden_dim)
    head_weights = Parameter(
        rng.uniform(-head_bound, head_bound, size=(config.output_dim, config.hidden_dim)),
        name="head.weights",
    )
    head_bias = Parameter(
        rng.uniform(-head_bound, head_bound, size=(config.output_dim,)), name="head.bias"
    )
    return ReceiverModel(
        config=config, embedding=embedding, cell=cell, head_weights=head_weights, head_bias=head_bias
    )


def _symbol_array(model: ReceiverModel, symbols) -> np.ndarray:
    arr = np.asarray(symbols, dtype=np.intp)
    if arr.ndim == 1:
        arr = arr.reshape(1, -1)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise InputError("messages must be pairs of symbols")
    if arr.size and (arr.min() < 0 or arr.max() >= model.config.n_values):
        raise InputError("message symbol out of vocabulary range")
    return arr


def forward_hidden(model: ReceiverModel, symbols) -> Tensor:
    """Hidden state after consuming both symbols; symbols is (batch, 2) ints."""
    arr = _symbol_array(model, symbols)
    batch = arr.shape[0]
    x1 = gather_rows(model.embedding, arr[:, 0])
    x2 = gather_rows(model.embedding, arr[:, 1])
    h0 = Tensor(np.zeros((batch, model.config.hidden_dim)))
    if model.config.cell_kind == "lstm":
        c0 = Tensor(np.zeros((batch, model.config.hidden_dim)))
        h1, c1 = lstm_cell_step(model.cell, x1, h0, c0)
        h2, _ = lstm_cell_step(model.cell, x2, h1, c1)
    else:
        h1 = gru_cell_step(model.cell, x1, h0)
        h2 = gru_cell_step(model.cell, x2, h1)
    return h2


def forward_outputs(model: ReceiverModel, symbols) -> Tensor:
    """Raw head outputs, (batch, 2 * n_values) logits or (batch, 2) reals."""
    return linear(forward_hidden(model, symbols), model.head_weights, model.head_bias)


def forward_classify(model: ReceiverModel, message) -> tuple[np.ndarray, np.ndarray]:
    """Logit vectors for both outputs of a single message."""
    if model.config.head_kind != CLASSIFY:
        raise ConfigError("forward_classify needs a classification head")
    logits = forward_outputs(model, message).data[0]
    n = model.config.n_values
    return logits[:n].copy(), logits[n:].copy()


def forward_regress(model: ReceiverModel, message) -> tuple[float, float]:
    if model.config.head_kind != REGRESS:
        raise ConfigError("forward_regress needs a regression head")
    out = forward_outputs(model, message).data[0]
    return float(out[0]), float(out[1])


def loss_classify(model: ReceiverModel, message, target: tuple[int, int]) -> Tensor:
    """Sum of the two per-output negative log-likelihoods for one message."""
    if model.config.head_kind != CLASSIFY:
        raise ConfigError("loss_classify needs a classification head")
    n = model.config.n_values
    logits = forward_outputs(model, message)
    head1 = reshape(slice_cols(logits, 0, n), (n,))
    head2 = reshape(slice_cols(logits, n, 2 * n), (n,))
    return add(softmax_nll(head1, int(target[0])), softmax_nll(head2, int(target[1])))


def loss_regress(model: ReceiverModel, message, target: tuple[float, float]) -> Tensor:
    if model.config.head_kind != REGRESS:
        raise ConfigError("loss_regress needs a regression head")
    out = reshape(forward_outputs(model, message), (2,))
    return mse(out, np.asarray(target, dtype=np.float64))


def batch_loss_classify(model: ReceiverModel, symbols, targets) -> Tensor:
    """Mean over the batch of per-sample summed output NLLs."""
    tgt = np.asarray(targets, dtype=np.intp)
    n = model.config.n_values
    logits = forward_outputs(model, symbols)
    nll1 = cross_entropy_rows(slice_cols(logits, 0, n), tgt[:, 0])
    nll2 = cross_entropy_rows(slice_cols(logits, n, 2 * n), tgt[:, 1])
    return mean_all(add(nll1, nll2))


def batch_loss_regress(model: ReceiverModel, symbols, targets) -> Tensor:
    return mse(forward_outputs(model, symbols), np.asarray(targets, dtype=np.float64))


def predict_classify(model: ReceiverModel, symbols) -> np.ndarray:
    """Argmax class per output head, ties to the lowest index; (batch, 2)."""
    n = model.config.n_values
    out = forward_outputs(model, symbols).data
    return np.stack([out[:, :n].argmax(axis=1), out[:, n:].argmax(axis=1)], axis=1)


def score_classification(model: ReceiverModel, symbols, targets) -> tuple[float, float]:
    """(strict accuracy, per-output accuracy): strict counts a sample only
    when both outputs match."""
    tgt = np.asarray(targets, dtype=np.intp)
    pred = predict_classify(model, symbols)
    per_output = float((pred == tgt).mean())
    strict = float((pred == tgt).all(axis=1).mean())
    return strict, per_output


def predict_and_score(model: ReceiverModel, symbols, targets) -> float:
    """Strict accuracy: both outputs must match."""
    return score_classification(model, symbols, targets)[0]


def dataset_metrics(model: ReceiverModel, symbols, targets) -> tuple[float, float, float | None]:
    """Whole-dataset evaluation from a single forward pass.

    Returns (mean loss, primary metric, per-output accuracy); the metric is
    strict accuracy for classification and the loss itself (MSE) for
    regression, where per-output accuracy is None.
    """
    out = forward_outputs(model, symbols).data
    if model.config.head_kind == CLASSIFY:
        tgt = np.asarray(targets, dtype=np.intp)
        n = model.config.n_values
        nll1 = cross_entropy_rows(Tensor(out[:, :n]), tgt[:, 0]).data
        nll2 = cross_entropy_rows(Tensor(out[:, n:]), tgt[:, 1]).data
        loss = float((nll1 + nll2).mean())
        pred = np.stack([out[:, :n].argmax(axis=1), out[:, n:].argmax(axis=1)], axis=1)
        strict = float((pred == tgt).all(axis=1).mean())
        per_output = float((pred == tgt).mean())
        return loss, strict, per_output
    loss = float(np.mean((out - np.asarray(targets, dtype=np.float64)) ** 2))
    return loss, loss, None


# ---------------------------------------------------------------------------
# checkpoints: versioned textual format, one named array per parameter
# ---------------------------------------------------------------------------


def save_checkpoint(model: ReceiverModel, path: str | Path) -> None:
    cfg = model.config
    lines = [
        CHECKPOINT_HEADER,
        f"config cell={cfg.cell_kind} head={cfg.head_kind} n_values={cfg.n_values} "
        f"embed={cfg.embed_dim} hidden={cfg.hidden_dim}",
    ]
    for name, param in model.named_parameters():
        dims = " ".join(str(d) for d in param.data.shape)
        lines.append(f"param {name} {dims}")
        lines.append(" ".join(f"{v:.17g}" for v in param.data.reshape(-1)))
    Path(path).write_text("\n".join(lines) + "\n")


def load_checkpoint(path: str | Path) -> ReceiverModel:
    lines = Path(path).read_text().splitlines()
    if not lines or lines[0] != CHECKPOINT_HEADER:
        raise InputError(f"{path}: not a recognized checkpoint")
    fields = dict(kv.split("=") for kv in lines[1].split()[1:])
    config = ReceiverConfig(
        cell_kind=fields["cell"],
        n_values=int(fields["n_values"]),
        head_kind=fields["head"],
        embed_dim=int(fields["embed"]),
        hidden_dim=int(fields["hidden"]),
    )
    model = init_receiver(config, seed=0)
    by_name = dict(model.named_parameters())
    i = 2
    seen = set()
    while i < len(lines):
        head = lines[i].split()
        if head[0] != "param":
            raise InputError(f"{path}: malformed checkpoint at line {i + 1}")
        name, shape = head[1], tuple(int(d) for d in head[2:])
        if name not in by_name:
            raise InputError(f"{path}: unknown parameter {name!r}")
        values = np.fromiter(map(float, lines[i + 1].split()), dtype=np.float64)
        if values.size != int(np.prod(shape)) or by_name[name].data.shape != shape:
            raise InputError(f"{path}: shape mismatch for {name!r}")
        by_name[name].data[...] = values.reshape(shape)
        seen.add(name)
        i += 2
    if seen != set(by_name):
        raise InputError(f"{path}: checkpoint missing parameters")
    return model


__all__ = [
    "CLASSIFY",
    "REGRESS",
    "ReceiverConfig",
    "ReceiverModel",
    "backward",
    "batch_loss_classify",
    "batch_loss_regress",
    "dataset_metrics",
    "forward_classify",
    "forward_hidden",
    "forward_outputs",
    "forward_regress",
    "init_receiver",
    "load_checkpoint",
    "loss_classify",
    "loss_regress",
    "predict_and_score",
    "predict_classify",
    "save_checkpoint",
    "score_classification",
]
