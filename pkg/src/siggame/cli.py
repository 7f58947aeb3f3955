"""Command-line front end: experiment presets, grid execution, artifacts.

Exit codes: 0 success, 1 usage error, 2 at least one run diverged.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

from . import __version__
from .harness import (
    ATTVAL,
    ATTVAL_TASKS,
    COORDINATES,
    ConfigSummary,
    RunConfig,
    RunRecord,
    aggregate,
    run_label,
    train_run,
    write_run_csv,
)
from .languages import (
    ATTVAL_KINDS,
    DEFAULT_ROTATION,
    DISK_KINDS,
    LANGUAGE_KINDS,
    LanguageSpec,
    analyze_language,
    format_analysis,
)
from .worlds import dump_dataset, enumerate_attval, sample_unit_disk


@dataclass(frozen=True)
class ExperimentPreset:
    name: str
    languages: tuple[str, ...]
    tasks: tuple[str, ...]
    cells: tuple[str, ...]
    n_seeds: int
    n_values: int
    epochs: int
    lr: float

    def grid_size(self) -> int:
        return len(self.languages) * len(self.tasks) * len(self.cells) * self.n_seeds


PRESETS = {
    ATTVAL: ExperimentPreset(
        name=ATTVAL,
        languages=ATTVAL_KINDS,
        tasks=ATTVAL_TASKS,
        cells=("lstm", "gru"),
        n_seeds=20,
        n_values=31,
        epochs=500,
        lr=1e-2,
    ),
    COORDINATES: ExperimentPreset(
        name=COORDINATES,
        languages=DISK_KINDS,
        tasks=(COORDINATES,),
        cells=("lstm",),
        n_seeds=10,
        n_values=100,
        epochs=250,
        lr=1e-3,
    ),
}


def expand_preset(name: str, **overrides) -> list[tuple[RunConfig, int]]:
    """The (config, seed) grid a preset runs, after applying overrides.

    Recognized overrides: language, task, cell (filters), seeds, epochs,
    lr, batch_size, n_values, hidden_dim, embed_dim, test_fraction,
    pin_linear_seed.
    """
    preset = PRESETS[name]
    langs = [overrides["language"]] if overrides.get("language") else list(preset.languages)
    tasks_ = [overrides["task"]] if overrides.get("task") else list(preset.tasks)
    cells = [overrides["cell"]] if overrides.get("cell") else list(preset.cells)
    n_seeds = overrides.get("seeds") or preset.n_seeds
    base = dict(
        experiment=name,
        n_values=overrides.get("n_values") or preset.n_values,
        epochs=overrides.get("epochs") or preset.epochs,
        lr=overrides.get("lr") or preset.lr,
    )
    for key in ("batch_size", "hidden_dim", "embed_dim", "test_fraction", "pin_linear_seed"):
        if overrides.get(key) is not None:
            base[key] = overrides[key]
    jobs = []
    for cell in cells:
        for lang in langs:
            for task in tasks_:
                config = RunConfig(language=lang, task=task, cell=cell, **base)
                for seed in range(n_seeds):
                    jobs.append((config, seed))
    return jobs


def _train_job(job: tuple[RunConfig, int]) -> RunRecord:
    return train_run(*job)


def execute_jobs(jobs: list[tuple[RunConfig, int]], workers: int) -> list[RunRecord]:
    if workers <= 1 or len(jobs) <= 1:
        return [_train_job(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_train_job, jobs, chunksize=1))


def group_records(records: list[RunRecord]) -> dict[RunConfig, list[RunRecord]]:
    grouped: dict[RunConfig, list[RunRecord]] = {}
    for r in records:
        grouped.setdefault(r.config, []).append(r)
    return grouped


# ---------------------------------------------------------------------------
# artifacts
# ---------------------------------------------------------------------------


def _fmt_cell(mean: float | None, sem: float | None, not_reached: int = 0) -> str:
    if mean is None:
        text = "n/a"
    elif sem is None:
        text = f"{mean:.2f}"
    else:
        text = f"{mean:.2f} +- {sem:.2f}"
    if not_reached:
        text += f" ({not_reached} nr)"
    return text


def format_attval_summary(summaries: list[ConfigSummary]) -> str:
    by_key = {(s.config.cell, s.config.language, s.config.task): s for s in summaries}
    cells = sorted({s.config.cell for s in summaries})
    langs = [k for k in ATTVAL_KINDS if any(s.config.language == k for s in summaries)]
    tasks_ = [t for t in ATTVAL_TASKS if any(s.config.task == t for s in summaries)]
    col = 22

    def block(title: str, value) -> list[str]:
        lines = [title, "  " + " " * 18 + "".join(f"task-{t}".ljust(col) for t in tasks_)]
        for cell in cells:
            lines.append(f"  {cell.upper()}")
            for lang in langs:
                row = f"    lang-{lang}".ljust(20)
                for task in tasks_:
                    s = by_key.get((cell, lang, task))
                    row += (value(s) if s else "-").ljust(col)
                lines.append(row.rstrip())
        return lines

    lines = ["attval experiment (mean +- SEM over seeds)", ""]
    lines += block(
        "acquisition speed (epochs to reach threshold train accuracy)",
        lambda s: _fmt_cell(s.acquisition_mean, s.acquisition_sem, s.acquisition_not_reached),
    )
    lines.append("")
    lines += block(
        "test accuracy (final epoch, both outputs correct)",
        lambda s: _fmt_cell(s.final_test_metric_mean, s.final_test_metric_sem),
    )
    return "\n".join(lines) + "\n"


def format_coordinates_summary(summaries: list[ConfigSummary]) -> str:
    lines = ["coordinates experiment (final-epoch MSE, mean +- SEM over seeds)", ""]
    for s in summaries:
        train = _fmt_sci(s.final_train_metric_mean, s.final_train_metric_sem)
        test = _fmt_sci(s.final_test_metric_mean, s.final_test_metric_sem)
        lines.append(f"  lang-{s.config.language:<12} train {train}   test {test}")
    return "\n".join(lines) + "\n"


def _fmt_sci(mean: float | None, sem: float | None) -> str:
    if mean is None:
        return "n/a"
    if sem is None:
        return f"{mean:.3e}"
    return f"{mean:.3e} +- {sem:.1e}"


def emit_curves(records: list[RunRecord], out_dir: Path) -> None:
    """Per-language mean log-MSE learning curves: columnar text + SVG.

    Natural log; a non-positive MSE would be skipped with a warning.
    """
    grouped = group_records(records)
    epochs = max(len(r.train_loss) for r in records)
    columns: list[tuple[str, list[float]]] = []
    for config, group in grouped.items():
        for split, attr in (("train", "train_metric"), ("test", "test_metric")):
            series = []
            for i in range(epochs):
                values = []
                for r in group:
                    mse_value = getattr(r, attr)[i]
                    if mse_value <= 0.0:
                        warnings.warn(
                            f"non-positive MSE at epoch {i + 1} for {run_label(config, r.seed)}; "
                            "skipping log transform"
                        )
                        continue
                    values.append(math.log(mse_value))
                series.append(sum(values) / len(values) if values else math.nan)
            columns.append((f"lang-{config.language}_{split}", series))

    header = "epoch\t" + "\t".join(name for name, _ in columns)
    rows = [header]
    for i in range(epochs):
        rows.append(f"{i + 1}\t" + "\t".join(f"{series[i]:.10g}" for _, series in columns))
    (out_dir / "curves.tsv").write_text("\n".join(rows) + "\n")

    from .svg import write_line_chart

    xs = list(range(1, epochs + 1))
    write_line_chart(
        out_dir / "curves.svg",
        [(name, xs, series) for name, series in columns],
        title="coordinates experiment: learning curves",
        x_label="training epoch",
        y_label="log MSE",
    )


def run_preset(
    name: str,
    out_dir: str | Path,
    workers: int = 1,
    **overrides,
) -> tuple[list[RunRecord], list[ConfigSummary]]:
    """Execute a preset grid, write per-run CSVs, summaries, and (for the
    coordinates preset) curve artifacts. Returns records and summaries."""
    out = Path(out_dir)
    (out / "runs").mkdir(parents=True, exist_ok=True)
    jobs = expand_preset(name, **overrides)
    records = execute_jobs(jobs, workers)
    for record in records:
        write_run_csv(record, out / "runs" / f"{run_label(record.config, record.seed)}.csv")
    summaries = [aggregate(group) for group in group_records(records).values()]
    if name == ATTVAL:
        text = format_attval_summary(summaries)
    else:
        text = format_coordinates_summary(summaries)
    (out / "summary.txt").write_text(text)
    payload = {
        "preset": name,
        "overrides": {k: v for k, v in sorted(overrides.items()) if v is not None},
        "configurations": [s.to_dict() for s in summaries],
    }
    (out / "summary.json").write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    if name == COORDINATES:
        emit_curves(records, out)
    return records, summaries


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="siggame", description=__doc__)
    parser.add_argument("--version", action="version", version=f"siggame {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    run = sub.add_parser("run", help="execute an experiment preset")
    run.add_argument("experiment", choices=sorted(PRESETS), help="experiment preset")
    run.add_argument("--language", choices=LANGUAGE_KINDS)
    run.add_argument("--task", choices=ATTVAL_TASKS + (COORDINATES,))
    run.add_argument("--cell", choices=("lstm", "gru"))
    run.add_argument("--n-values", type=int, dest="n_values")
    run.add_argument("--seeds", type=int, help="number of seeds (0..n-1)")
    run.add_argument("--epochs", type=int)
    run.add_argument("--lr", type=float)
    run.add_argument("--batch-size", type=int, dest="batch_size")
    run.add_argument("--hidden", type=int, dest="hidden_dim")
    run.add_argument("--embedding", type=int, dest="embed_dim")
    run.add_argument("--test-fraction", type=float, dest="test_fraction")
    run.add_argument(
        "--pin-linear-params",
        type=int,
        nargs="?",
        const=0,
        default=None,
        dest="pin_linear_seed",
        metavar="SEED",
        help="share one sampled linear-task map across all seeds",
    )
    run.add_argument("--out", default="results", help="output directory")
    run.add_argument("--workers", type=int, default=None, help="parallel runs (default: cpu count)")

    analyze = sub.add_parser("analyze", help="compositionality report for a language")
    analyze.add_argument("language", choices=LANGUAGE_KINDS)
    analyze.add_argument("--n-values", type=int, required=True, dest="n_values")
    analyze.add_argument("--angle", type=float, default=DEFAULT_ROTATION)

    dump = sub.add_parser("dump-world", help="write a world enumeration or sample to a file")
    dump.add_argument("world", choices=("attval", "disk"))
    dump.add_argument("--n-values", type=int, default=31, dest="n_values")
    dump.add_argument("--count", type=int, default=1000, help="points to sample (disk only)")
    dump.add_argument("--seed", type=int, default=0)
    dump.add_argument("--out", required=True)
    return parser


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as stop:
        return int(stop.code or 0)

    if args.command == "analyze":
        spec = LanguageSpec(args.language, args.n_values, rotation_angle=args.angle)
        print(format_analysis(analyze_language(spec)))
        return 0

    if args.command == "dump-world":
        if args.world == "attval":
            dump_dataset(args.out, enumerate_attval(args.n_values))
        else:
            dump_dataset(args.out, sample_unit_disk(args.count, args.seed))
        return 0

    overrides = {
        key: getattr(args, key)
        for key in (
            "language",
            "task",
            "cell",
            "n_values",
            "seeds",
            "epochs",
            "lr",
            "batch_size",
            "hidden_dim",
            "embed_dim",
            "test_fraction",
            "pin_linear_seed",
        )
        if getattr(args, key) is not None
    }
    workers = args.workers if args.workers is not None else (os.cpu_count() or 1)
    try:
        records, _ = run_preset(args.experiment, args.out, workers=workers, **overrides)
    except ValueError as exc:
        print(f"siggame: error: {exc}", file=sys.stderr)
        return 1
    n_failed = sum(1 for r in records if r.failed)
    print(f"wrote {len(records)} runs to {args.out}")
    if n_failed:
        print(f"siggame: {n_failed} run(s) diverged to a non-finite loss", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
