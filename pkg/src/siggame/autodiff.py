"""Reverse-mode differentiation on dense float64 arrays of rank <= 2.

Every operation records its inputs and a per-parent gradient rule on the
returned node; ``backward`` walks the trace once and accumulates gradients
into every reachable :class:`Parameter`. Intermediate gradients live only
for the duration of one backward call, while Parameter gradients persist
and add up across calls until explicitly zeroed.

Gradient rules must return arrays that are safe to mutate in place
(the accumulator adds into them); rules that would alias their input
copy it first.
"""

from __future__ import annotations

from typing import Callable, Iterable, Sequence

import numpy as np
from scipy.special import expit

from .errors import ConfigError, InputError, UsageError

GradFn = Callable[[np.ndarray], np.ndarray]


class Tensor:
    """One node of the computation trace."""

    __slots__ = ("data", "_parents", "_grad_fns", "_needs_grad")

    def __init__(self, data, parents=(), grad_fns=()):
        self.data = np.asarray(data, dtype=np.float64)
        self._parents: tuple[Tensor, ...] = tuple(parents)
        self._grad_fns: tuple[GradFn | None, ...] = tuple(grad_fns)
        self._needs_grad = any(p._needs_grad for p in self._parents)

    @property
    def shape(self) -> tuple[int, ...]:
        return self.data.shape

    def item(self) -> float:
        return float(self.data)

    def __add__(self, other):
        return add(self, other)

    def __mul__(self, other):
        return mul(self, other)

    def __matmul__(self, other):
        return matmul(self, other)

    def __repr__(self):
        return f"Tensor(shape={self.data.shape})"


class Parameter(Tensor):
    """Trainable leaf: values plus persistent gradient and Adam state.

    The gradient and both moment accumulators always share the value
    array's shape and start at zero.
    """

    __slots__ = ("grad", "adam_m", "adam_v", "step_count", "name")

    def __init__(self, values, name: str = ""):
        arr = np.array(values, dtype=np.float64)
        if arr.ndim > 2:
            raise ConfigError(f"parameters are rank <= 2, got shape {arr.shape}")
        super().__init__(arr)
        self._needs_grad = True
        self.grad = np.zeros_like(arr)
        self.adam_m = np.zeros_like(arr)
        self.adam_v = np.zeros_like(arr)
        self.step_count = 0
        self.name = name

    def zero_grad(self) -> None:
        self.grad.fill(0.0)

    def __repr__(self):
        return f"Parameter({self.name or 'unnamed'}, shape={self.data.shape})"


def as_tensor(x) -> Tensor:
    return x if isinstance(x, Tensor) else Tensor(x)


def _sigmoid(x: np.ndarray) -> np.ndarray:
    return expit(x)


# ---------------------------------------------------------------------------
# operations
# ---------------------------------------------------------------------------


def add(a, b) -> Tensor:
    """Elementwise sum; also accepts a rank-1 bias broadcast over rank-2 rows."""
    a, b = as_tensor(a), as_tensor(b)
    if a.data.shape == b.data.shape:
        fa: GradFn = lambda g: g.copy()
        fb: GradFn = lambda g: g.copy()
    elif a.data.ndim == 2 and b.data.ndim == 1 and a.data.shape[1] == b.data.shape[0]:
        fa = lambda g: g.copy()
        fb = lambda g: g.sum(axis=0)
    else:
        raise ConfigError(f"add: incompatible shapes {a.data.shape} and {b.data.shape}")
    return Tensor(a.data + b.data, (a, b), (fa, fb))


def mul(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    if a.data.shape != b.data.shape:
        raise ConfigError(f"mul: incompatible shapes {a.data.shape} and {b.data.shape}")
    return Tensor(
        a.data * b.data,
        (a, b),
        (lambda g: g * b.data, lambda g: g * a.data),
    )


def matmul(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    if a.data.ndim != 2 or b.data.ndim != 2 or a.data.shape[1] != b.data.shape[0]:
        raise ConfigError(f"matmul: incompatible shapes {a.data.shape} and {b.data.shape}")
    return Tensor(
        a.data @ b.data,
        (a, b),
        (lambda g: g @ b.data.T, lambda g: a.data.T @ g),
    )


def linear(x, weights, bias=None) -> Tensor:
    """x @ weights.T (+ bias) with weights stored as (out_dim, in_dim)."""
    x, weights = as_tensor(x), as_tensor(weights)
    if x.data.ndim != 2 or weights.data.ndim != 2 or x.data.shape[1] != weights.data.shape[1]:
        raise ConfigError(f"linear: incompatible shapes {x.data.shape} and {weights.data.shape}")
    out = x.data @ weights.data.T
    parents: list[Tensor] = [x, weights]
    fns: list[GradFn] = [lambda g: g @ weights.data, lambda g: g.T @ x.data]
    if bias is not None:
        bias = as_tensor(bias)
        if bias.data.shape != (weights.data.shape[0],):
            raise ConfigError(f"linear: bias shape {bias.data.shape} does not match out dim")
        out = out + bias.data
        parents.append(bias)
        fns.append(lambda g: g.sum(axis=0))
    return Tensor(out, tuple(parents), tuple(fns))


def sigmoid(x) -> Tensor:
    x = as_tensor(x)
    out = _sigmoid(x.data)
    return Tensor(out, (x,), (lambda g: g * out * (1.0 - out),))


def tanh(x) -> Tensor:
    x = as_tensor(x)
    out = np.tanh(x.data)
    return Tensor(out, (x,), (lambda g: g * (1.0 - out * out),))


def one_minus(x) -> Tensor:
    x = as_tensor(x)
    return Tensor(1.0 - x.data, (x,), (lambda g: -g,))


def gather_rows(table, indices) -> Tensor:
    """Select rows of a rank-2 table; gradients scatter-add back into it."""
    table = as_tensor(table)
    idx = np.asarray(indices, dtype=np.intp)
    if table.data.ndim != 2:
        raise ConfigError("gather_rows expects a rank-2 table")
    if idx.size and (idx.min() < 0 or idx.max() >= table.data.shape[0]):
        raise InputError("gather_rows: index out of range")

    def back(g):
        out = np.zeros_like(table.data)
        np.add.at(out, idx, g)
        return out

    return Tensor(table.data[idx], (table,), (back,))


def slice_cols(x, lo: int, hi: int) -> Tensor:
    x = as_tensor(x)
    if x.data.ndim != 2 or not (0 <= lo < hi <= x.data.shape[1]):
        raise ConfigError(f"slice_cols: bad bounds [{lo}, {hi}) for shape {x.data.shape}")

    def back(g):
        out = np.zeros_like(x.data)
        out[:, lo:hi] = g
        return out

    return Tensor(x.data[:, lo:hi].copy(), (x,), (back,))


def reshape(x, shape) -> Tensor:
    x = as_tensor(x)
    return Tensor(
        x.data.reshape(shape),
        (x,),
        (lambda g: g.reshape(x.data.shape).copy(),),
    )


def sum_all(x) -> Tensor:
    x = as_tensor(x)
    return Tensor(
        np.asarray(x.data.sum()),
        (x,),
        (lambda g: np.full(x.data.shape, float(g)),),
    )


def mean_all(x) -> Tensor:
    x = as_tensor(x)
    n = x.data.size
    return Tensor(
        np.asarray(x.data.mean()),
        (x,),
        (lambda g: np.full(x.data.shape, float(g) / n),),
    )


def softmax_nll(logits, target: int) -> Tensor:
    """Negative log-likelihood of one class under softmax(logits), rank-1."""
    logits = as_tensor(logits)
    if logits.data.ndim != 1:
        raise ConfigError("softmax_nll expects a rank-1 logit vector")
    k = logits.data.shape[0]
    if not 0 <= target < k:
        raise InputError(f"target {target} out of range for {k} classes")
    shifted = logits.data - logits.data.max()
    log_z = np.log(np.exp(shifted).sum())
    probs = np.exp(shifted - log_z)

    def back(g):
        d = probs * float(g)
        d[target] -= float(g)
        return d

    return Tensor(np.asarray(log_z - shifted[target]), (logits,), (back,))


def cross_entropy_rows(logits, targets) -> Tensor:
    """Per-row softmax NLL for rank-2 logits and an integer target per row."""
    logits = as_tensor(logits)
    tgt = np.asarray(targets, dtype=np.intp)
    if logits.data.ndim != 2 or tgt.shape != (logits.data.shape[0],):
        raise ConfigError("cross_entropy_rows: logits (n, k) and targets (n,) required")
    if tgt.size and (tgt.min() < 0 or tgt.max() >= logits.data.shape[1]):
        raise InputError("cross_entropy_rows: target class out of range")
    rows = np.arange(tgt.shape[0])
    shifted = logits.data - logits.data.max(axis=1, keepdims=True)
    log_z = np.log(np.exp(shifted).sum(axis=1))
    probs = np.exp(shifted - log_z[:, None])

    def back(g):
        d = probs * g[:, None]
        d[rows, tgt] -= g
        return d

    return Tensor(log_z - shifted[rows, tgt], (logits,), (back,))


def mse(pred, target) -> Tensor:
    """Mean of squared componentwise differences against a constant target."""
    pred = as_tensor(pred)
    tgt = np.asarray(target, dtype=np.float64)
    if pred.data.shape != tgt.shape:
        raise InputError(f"mse: shape mismatch {pred.data.shape} vs {tgt.shape}")
    diff = pred.data - tgt
    n = diff.size
    return Tensor(
        np.asarray(np.mean(diff * diff)),
        (pred,),
        (lambda g: (2.0 * float(g) / n) * diff,),
    )


# ---------------------------------------------------------------------------
# backward pass
# ---------------------------------------------------------------------------


def _trace_order(root: Tensor) -> list[Tensor]:
    order: list[Tensor] = []
    seen: set[int] = set()
    stack: list[tuple[Tensor, bool]] = [(root, False)]
    while stack:
        node, expanded = stack.pop()
        if expanded:
            order.append(node)
            continue
        if id(node) in seen:
            continue
        seen.add(id(node))
        stack.append((node, True))
        for parent in node._parents:
            if parent._needs_grad and id(parent) not in seen:
                stack.append((parent, False))
    return order


def backward(loss: Tensor) -> None:
    """Accumulate d(loss)/d(param) into every Parameter reachable from loss."""
    if loss.data.size != 1:
        raise UsageError(f"backward requires a scalar, got shape {loss.data.shape}")
    if not loss._needs_grad:
        return
    grads: dict[int, np.ndarray] = {id(loss): np.ones_like(loss.data)}
    for node in reversed(_trace_order(loss)):
        g = grads.pop(id(node), None)
        if g is None:
            continue
        if isinstance(node, Parameter):
            node.grad += g.reshape(node.grad.shape)
            continue
        for parent, fn in zip(node._parents, node._grad_fns):
            if fn is None or not parent._needs_grad:
                continue
            contribution = fn(g)
            acc = grads.get(id(parent))
            if acc is None:
                grads[id(parent)] = contribution
            else:
                acc += contribution


def finite_difference_check(
    loss_fn: Callable[[], Tensor],
    params: Iterable[Parameter],
    eps: float = 1e-5,
    coords_per_param: int | None = None,
    seed: int = 0,
) -> float:
    """Compare trace gradients of a deterministic scalar closure against
    central differences.

    Zeroes the parameters' gradients as a side effect. Returns the worst
    relative error max|analytic - numeric| / max(|analytic|, |numeric|, 1e-12)
    over all (or ``coords_per_param`` sampled) coordinates.
    """
    params = list(params)
    for p in params:
        p.zero_grad()
    backward(loss_fn())
    analytic = [p.grad.copy().reshape(-1) for p in params]
    rng = np.random.default_rng(seed)
    worst = 0.0
    for p, ga in zip(params, analytic):
        flat = p.data.reshape(-1)
        if coords_per_param is None or coords_per_param >= flat.size:
            coords: Sequence[int] = range(flat.size)
        else:
            coords = rng.choice(flat.size, size=coords_per_param, replace=False)
        for i in coords:
            orig = flat[i]
            flat[i] = orig + eps
            high = float(loss_fn().data)
            flat[i] = orig - eps
            low = float(loss_fn().data)
            flat[i] = orig
            numeric = (high - low) / (2.0 * eps)
            err = abs(ga[i] - numeric) / max(abs(ga[i]), abs(numeric), 1e-12)
            worst = max(worst, err)
    return worst
