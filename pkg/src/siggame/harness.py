"""Training loop, acquisition measurement, held-out evaluation, aggregation.

One run is fully determined by (config, seed): the seed drives four
independent derived streams (weight init, train/test split, per-epoch
shuffles, linear-task parameters), so reruns and parallel execution
produce identical records.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import languages, tasks, worlds
from .autodiff import backward
from .errors import ConfigError
from .optim import adam_step_all, zero_gradients
from .receiver import (
    CLASSIFY,
    REGRESS,
    ReceiverConfig,
    batch_loss_classify,
    batch_loss_regress,
    dataset_metrics,
    init_receiver,
)

CSV_HEADER = "epoch,train_loss,train_metric,test_loss,test_metric"

ATTVAL = "attval"
COORDINATES = "coordinates"

ATTVAL_TASKS = ("identity", "linear", "entangled")

# derived-stream tags so one run seed feeds independent RNGs
_INIT, _SPLIT, _SHUFFLE, _TASK_PARAMS = 0, 1, 2, 3

# fixed dataset seed for the coordinates experiment: one point set shared
# by every model seed
COORDINATES_DATA_SEED = 20210405


def child_seed(seed: int, *key: int) -> int:
    return int(np.random.SeedSequence([seed, *key]).generate_state(1)[0])


@dataclass(frozen=True)
class RunConfig:
    experiment: str  # "attval" | "coordinates"
    language: str  # identity | entangled | coordinate | rotated
    task: str  # identity | linear | entangled | coordinates
    cell: str  # lstm | gru
    n_values: int
    epochs: int
    lr: float
    batch_size: int = 32
    embed_dim: int = 50
    hidden_dim: int = 100
    test_fraction: float = 0.2
    n_train: int = 1000
    n_test: int = 1000
    data_seed: int = COORDINATES_DATA_SEED
    acquisition_threshold: float = 1.0
    pin_linear_seed: int | None = None

    def __post_init__(self):
        if self.experiment == ATTVAL:
            if self.language not in languages.ATTVAL_KINDS or self.task not in ATTVAL_TASKS:
                raise ConfigError(f"bad attval pairing: {self.language}/{self.task}")
        elif self.experiment == COORDINATES:
            if self.language not in languages.DISK_KINDS or self.task != COORDINATES:
                raise ConfigError(f"bad coordinates pairing: {self.language}/{self.task}")
        else:
            raise ConfigError(f"unknown experiment {self.experiment!r}")
        if self.epochs < 1 or self.batch_size < 1:
            raise ConfigError("epochs and batch_size must be positive")

    @property
    def head_kind(self) -> str:
        return CLASSIFY if self.experiment == ATTVAL else REGRESS

    def receiver_config(self) -> ReceiverConfig:
        return ReceiverConfig(
            cell_kind=self.cell,
            n_values=self.n_values,
            head_kind=self.head_kind,
            embed_dim=self.embed_dim,
            hidden_dim=self.hidden_dim,
        )


@dataclass
class RunRecord:
    config: RunConfig
    seed: int
    train_loss: list[float] = field(default_factory=list)
    train_metric: list[float] = field(default_factory=list)
    test_loss: list[float] = field(default_factory=list)
    test_metric: list[float] = field(default_factory=list)
    acquisition_epoch: int | None = None
    linear_params: tasks.LinearTaskParams | None = None
    final_per_output_accuracy: float | None = None
    failed: bool = False


@dataclass
class Dataset:
    train_symbols: np.ndarray  # (n_train, 2) int
    train_targets: np.ndarray  # (n_train, 2) int or float
    test_symbols: np.ndarray
    test_targets: np.ndarray
    linear_params: tasks.LinearTaskParams | None = None


def _target_fn(config: RunConfig, linear_params):
    if config.task == "identity":
        return tasks.target_identity
    if config.task == "entangled":
        return lambda item: tasks.target_entangled(item, config.n_values)
    if config.task == "linear":
        return lambda item: tasks.target_linear(item, linear_params, config.n_values)
    return tasks.target_coordinates


def build_attval_dataset(config: RunConfig, seed: int) -> Dataset:
    items = worlds.enumerate_attval(config.n_values)
    train_items, test_items = worlds.split_train_test(
        items, config.test_fraction, child_seed(seed, _SPLIT)
    )
    linear_params = None
    if config.task == "linear":
        params_seed = (
            config.pin_linear_seed
            if config.pin_linear_seed is not None
            else child_seed(seed, _TASK_PARAMS)
        )
        linear_params = tasks.gen_linear_params(config.n_values, params_seed)
    encoder = languages.make_encoder(languages.LanguageSpec(config.language, config.n_values))
    target = _target_fn(config, linear_params)
    return Dataset(
        train_symbols=np.array([encoder(i) for i in train_items], dtype=np.intp),
        train_targets=np.array([target(i) for i in train_items], dtype=np.intp),
        test_symbols=np.array([encoder(i) for i in test_items], dtype=np.intp),
        test_targets=np.array([target(i) for i in test_items], dtype=np.intp),
        linear_params=linear_params,
    )


def build_coordinates_dataset(config: RunConfig) -> Dataset:
    points = worlds.sample_unit_disk(config.n_train + config.n_test, config.data_seed)
    train_pts, test_pts = points[: config.n_train], points[config.n_train :]
    encoder = languages.make_encoder(languages.LanguageSpec(config.language, config.n_values))
    return Dataset(
        train_symbols=np.array([encoder(p) for p in train_pts], dtype=np.intp),
        train_targets=np.array([tasks.target_coordinates(p) for p in train_pts]),
        test_symbols=np.array([encoder(p) for p in test_pts], dtype=np.intp),
        test_targets=np.array([tasks.target_coordinates(p) for p in test_pts]),
    )


def build_dataset(config: RunConfig, seed: int) -> Dataset:
    if config.experiment == ATTVAL:
        return build_attval_dataset(config, seed)
    return build_coordinates_dataset(config)


def train_run(config: RunConfig, seed: int) -> RunRecord:
    """Train one receiver; records per-epoch train/test metrics.

    Each epoch shuffles the training set with an RNG derived from
    (seed, epoch), walks it in mini-batches (final partial batch included),
    and takes one Adam step per batch. Metrics are measured after the
    epoch's updates, on the full train and test sets. A non-finite batch
    loss aborts the run and marks it failed.
    """
    data = build_dataset(config, seed)
    model = init_receiver(config.receiver_config(), child_seed(seed, _INIT))
    params = model.parameters()
    record = RunRecord(config=config, seed=seed, linear_params=data.linear_params)
    batch_loss = batch_loss_classify if config.head_kind == CLASSIFY else batch_loss_regress
    n_train = data.train_symbols.shape[0]

    for epoch in range(1, config.epochs + 1):
        order = np.random.default_rng(child_seed(seed, _SHUFFLE, epoch)).permutation(n_train)
        for start in range(0, n_train, config.batch_size):
            batch = order[start : start + config.batch_size]
            zero_gradients(params)
            loss = batch_loss(model, data.train_symbols[batch], data.train_targets[batch])
            if not np.isfinite(loss.data):
                record.failed = True
                return record
            backward(loss)
            adam_step_all(params, config.lr)

        train_loss, train_metric, _ = dataset_metrics(model, data.train_symbols, data.train_targets)
        test_loss, test_metric, per_output = dataset_metrics(
            model, data.test_symbols, data.test_targets
        )
        record.train_loss.append(train_loss)
        record.train_metric.append(train_metric)
        record.test_loss.append(test_loss)
        record.test_metric.append(test_metric)
        record.final_per_output_accuracy = per_output

    record.acquisition_epoch = acquisition_epochs(record)
    return record


def acquisition_epochs(record: RunRecord, threshold: float | None = None) -> int | None:
    """First 1-based epoch whose train accuracy reaches the threshold;
    None when never reached or for regression runs."""
    if record.config.head_kind != CLASSIFY:
        return None
    if threshold is None:
        threshold = record.config.acquisition_threshold
    for epoch, value in enumerate(record.train_metric, start=1):
        if value >= threshold:
            return epoch
    return None


def mean_sem(values) -> tuple[float, float | None]:
    """Mean and standard error of the mean (sample std over sqrt(n));
    the SEM is None for fewer than two values."""
    arr = np.asarray(values, dtype=np.float64)
    mean = float(arr.mean())
    if arr.size < 2:
        return mean, None
    return mean, float(arr.std(ddof=1) / math.sqrt(arr.size))


@dataclass
class ConfigSummary:
    config: RunConfig
    n_runs: int
    n_failed: int
    acquisition_mean: float | None
    acquisition_sem: float | None
    acquisition_not_reached: int
    final_test_metric_mean: float | None
    final_test_metric_sem: float | None
    final_train_metric_mean: float | None
    final_train_metric_sem: float | None
    final_per_output_accuracy_mean: float | None
    linear_params_by_seed: dict[int, dict]

    def to_dict(self) -> dict:
        cfg = self.config
        return {
            "experiment": cfg.experiment,
            "language": cfg.language,
            "task": cfg.task,
            "cell": cfg.cell,
            "n_values": cfg.n_values,
            "epochs": cfg.epochs,
            "lr": cfg.lr,
            "batch_size": cfg.batch_size,
            "n_runs": self.n_runs,
            "n_failed": self.n_failed,
            "acquisition_mean": self.acquisition_mean,
            "acquisition_sem": self.acquisition_sem,
            "acquisition_not_reached": self.acquisition_not_reached,
            "final_test_metric_mean": self.final_test_metric_mean,
            "final_test_metric_sem": self.final_test_metric_sem,
            "final_train_metric_mean": self.final_train_metric_mean,
            "final_train_metric_sem": self.final_train_metric_sem,
            "final_per_output_accuracy_mean": self.final_per_output_accuracy_mean,
            "linear_params_by_seed": self.linear_params_by_seed,
        }


def aggregate(records: list[RunRecord]) -> ConfigSummary:
    """Per-configuration aggregate over seeds. Runs that never reached the
    acquisition threshold are excluded from the acquisition mean and
    reported as a not-reached count; failed runs contribute nothing."""
    if not records:
        raise ConfigError("aggregate needs at least one record")
    ok = [r for r in records if not r.failed]
    acq = [r.acquisition_epoch for r in ok if r.acquisition_epoch is not None]
    classify = records[0].config.head_kind == CLASSIFY
    not_reached = sum(1 for r in ok if r.acquisition_epoch is None) if classify else 0
    acq_mean, acq_sem = mean_sem(acq) if acq else (None, None)
    test_mean, test_sem = mean_sem([r.test_metric[-1] for r in ok]) if ok else (None, None)
    train_mean, train_sem = mean_sem([r.train_metric[-1] for r in ok]) if ok else (None, None)
    per_output = [r.final_per_output_accuracy for r in ok if r.final_per_output_accuracy is not None]
    return ConfigSummary(
        config=records[0].config,
        n_runs=len(records),
        n_failed=len(records) - len(ok),
        acquisition_mean=acq_mean,
        acquisition_sem=acq_sem,
        acquisition_not_reached=not_reached,
        final_test_metric_mean=test_mean,
        final_test_metric_sem=test_sem,
        final_train_metric_mean=train_mean,
        final_train_metric_sem=train_sem,
        final_per_output_accuracy_mean=(sum(per_output) / len(per_output)) if per_output else None,
        linear_params_by_seed={
            r.seed: r.linear_params.to_dict() for r in records if r.linear_params is not None
        },
    )


def run_label(config: RunConfig, seed: int) -> str:
    return (
        f"{config.experiment}_lang-{config.language}_task-{config.task}_"
        f"{config.cell}_seed{seed}"
    )


def write_run_csv(record: RunRecord, path: str | Path) -> None:
    lines = [CSV_HEADER]
    for i in range(len(record.train_loss)):
        lines.append(
            f"{i + 1},{record.train_loss[i]:.17g},{record.train_metric[i]:.17g},"
            f"{record.test_loss[i]:.17g},{record.test_metric[i]:.17g}"
        )
    Path(path).write_text("\n".join(lines) + "\n")
