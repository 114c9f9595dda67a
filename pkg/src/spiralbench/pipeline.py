"""End-to-end wiring: dataset construction, mock predictors, and the
cross-evaluation matrix (rows = test ranges, columns = train ranges).

Predictions are consumed purely from probability-map files, so a real
model and the built-in mocks are interchangeable.  Layout under a
predictions root:

    run-1/<train_range>/<test_range>/block_0007.pmf
    run-2/...

A root without run-* directories is treated as a single run.
"""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .dataset import (
    BlockManifest,
    block_file_name,
    extract,
    load_block,
    load_manifest,
    plan_blocks,
    split,
)
from .metrics import (
    METRIC_FIELDS,
    ConfusionCounts,
    MetricsBundle,
    ProbMap,
    classification_report,
    confusion,
    read_probmap,
    threshold_binarize,
    topk_binarize,
    write_probmap,
)
from .spiral import range_spec, sieve_and_render
from .stats import attach_cis, average_runs, bootstrap_bundle

MOCK_PREDICTORS = ("oracle", "ratio", "noisy-oracle")


class PredictionsMissing(Exception):
    def __init__(self, paths: list[Path]):
        self.paths = paths
        listing = "\n".join(str(p) for p in paths)
        super().__init__(f"{len(paths)} prediction file(s) missing:\n{listing}")


@dataclass(frozen=True)
class Seeds:
    sampling: int = 1
    split: int = 2
    mask: int = 3
    bootstrap: int = 4
    run: int = 5


@dataclass(frozen=True)
class ExperimentConfig:
    ranges: tuple[str, ...]
    block_count: int = 350
    block_size: int = 256
    n_train: int = 300
    n_val: int = 50
    mask_ratio: float = 0.3
    threshold: float | None = 0.5
    topk_fraction: float | None = None
    bootstrap_replicates: int = 10_000
    ci_level: float = 0.95
    seeds: Seeds = field(default_factory=Seeds)
    runs_to_average: int = 3
    noise: float = 0.05  # corruption rate of the noisy-oracle mock


_CONFIG_INT_KEYS = {
    "block_count", "block_size", "n_train", "n_val", "bootstrap_replicates",
    "runs_to_average",
}
_CONFIG_FLOAT_KEYS = {"mask_ratio", "ci_level", "noise"}
_CONFIG_SEED_KEYS = {"seed_sampling", "seed_split", "seed_mask", "seed_bootstrap", "seed_run"}


def load_config(path: str | Path) -> ExperimentConfig:
    """Flat `key = value` text; '#' starts a comment.  Keys mirror the
    ExperimentConfig fields, with seeds flattened to seed_<name>."""
    kv: dict[str, str] = {}
    for raw in Path(path).read_text().splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"bad config line: {raw!r}")
        key, val = (s.strip() for s in line.split("=", 1))
        kv[key] = val

    args: dict = {}
    seeds: dict[str, int] = {}
    for key, val in kv.items():
        if key == "ranges":
            args["ranges"] = tuple(s.strip() for s in val.split(",") if s.strip())
        elif key in _CONFIG_INT_KEYS:
            args[key] = int(val)
        elif key in _CONFIG_FLOAT_KEYS:
            args[key] = float(val)
        elif key in ("threshold", "topk_fraction"):
            args[key] = None if val.lower() in ("none", "") else float(val)
        elif key in _CONFIG_SEED_KEYS:
            seeds[key.removeprefix("seed_")] = int(val)
        else:
            raise ValueError(f"unknown config key {key!r}")
    if "ranges" not in args:
        raise ValueError("config must list ranges")
    if seeds:
        args["seeds"] = Seeds(**{**Seeds().__dict__, **seeds})
    return ExperimentConfig(**args)


@dataclass(frozen=True)
class CrossEvalMatrix:
    train_ranges: tuple[str, ...]
    test_ranges: tuple[str, ...]
    cells: dict  # cells[test_name][train_name] -> MetricsBundle

    def cell(self, test: str, train: str) -> MetricsBundle:
        return self.cells[test][train]

    def to_doc(self) -> dict:
        return {
            "train_ranges": list(self.train_ranges),
            "test_ranges": list(self.test_ranges),
            "cells": {
                t: {tr: self.cells[t][tr].as_dict() for tr in self.train_ranges}
                for t in self.test_ranges
            },
        }


def matrix_from_doc(doc: dict) -> CrossEvalMatrix:
    cells = {}
    for t, row in doc["cells"].items():
        cells[t] = {}
        for tr, entry in row.items():
            values = {name: entry[name] for name in METRIC_FIELDS}
            cells[t][tr] = MetricsBundle(
                **values,
                ci=entry.get("ci", {}),
                degenerate=tuple(entry.get("degenerate", ())),
            )
    return CrossEvalMatrix(
        train_ranges=tuple(doc["train_ranges"]),
        test_ranges=tuple(doc["test_ranges"]),
        cells=cells,
    )


def build_dataset(
    datasets_root: str | Path, range_name: str, config: ExperimentConfig
) -> tuple[Path, BlockManifest]:
    """Sieve + render + plan + split + extract one range, reusing any
    previously built directory (the construction is fully seeded)."""
    root = Path(datasets_root) / range_name.replace(":", "_")
    manifest_path = root / "manifest.json"
    if manifest_path.exists():
        manifest = load_manifest(manifest_path)
        if (
            len(manifest.entries) != config.block_count
            or manifest.block_size != config.block_size
            or manifest.sampling_seed != config.seeds.sampling
            or manifest.split_seed != config.seeds.split
            or manifest.mask_seed != config.seeds.mask
        ):
            raise ValueError(
                f"{manifest_path} was built with different settings; "
                f"point datasets_root elsewhere or delete it"
            )
        return root, manifest
    rng = range_spec(range_name)
    grid = sieve_and_render(rng)
    manifest = plan_blocks(
        grid,
        config.block_count,
        config.block_size,
        seed=config.seeds.sampling,
        mask_seed=config.seeds.mask,
        mask_ratio=config.mask_ratio,
    )
    manifest = split(manifest, config.n_train, config.n_val, config.seeds.split)
    manifest = extract(grid, manifest, root)
    return root, manifest


def eval_entries(manifest: BlockManifest):
    """Evaluation pool: held-out test blocks when present, else the
    validation blocks (the full-scale 300/50 split leaves no test role)."""
    pool = manifest.by_role("test")
    return pool if pool else manifest.by_role("val")


def pool_prevalence(entries, block_pixels: int) -> float:
    return sum(e.white_count for e in entries) / (len(entries) * block_pixels)


def _pred_path(pred_root: Path, run: str | None, train: str, test: str, block_id: int) -> Path:
    base = pred_root / run if run else pred_root
    return base / train.replace(":", "_") / test.replace(":", "_") / f"block_{block_id:04d}.pmf"


def write_mock_predictions(
    mock: str,
    config: ExperimentConfig,
    datasets: dict[str, tuple[Path, BlockManifest]],
    predictions_root: str | Path,
) -> None:
    """Materialize prediction files for every run/(train, test) pair.

    oracle       - the ground truth itself (0.0 / 1.0)
    ratio        - i.i.d. Uniform(0,1) values; combined with top-k decoding
                   at the train range's prevalence this realizes a random
                   ratio-aligned assignment
    noisy-oracle - ground truth with a seeded fraction of pixels flipped
    """
    if mock not in MOCK_PREDICTORS:
        raise ValueError(f"unknown mock {mock!r}; pick from {MOCK_PREDICTORS}")
    pred_root = Path(predictions_root)
    for run_idx in range(1, config.runs_to_average + 1):
        for ti, train in enumerate(config.ranges):
            for si, test in enumerate(config.ranges):
                ds_dir, manifest = datasets[test]
                out_dir = _pred_path(pred_root, f"run-{run_idx}", train, test, 0).parent
                out_dir.mkdir(parents=True, exist_ok=True)
                for e in eval_entries(manifest):
                    truth = load_block(ds_dir, e).astype(np.float32)
                    if mock == "oracle":
                        vals = truth
                    else:
                        key = np.array(
                            [config.seeds.run + run_idx, (ti << 40) ^ (si << 20) ^ e.block_id],
                            dtype=np.uint64,
                        )
                        gen = np.random.Generator(np.random.Philox(key=key))
                        u = gen.random(truth.shape)
                        if mock == "ratio":
                            vals = u.astype(np.float32)
                        else:  # noisy-oracle
                            flip = u < config.noise
                            vals = np.where(flip, 1.0 - truth, truth).astype(np.float32)
                    pm = ProbMap.from_array(vals)
                    write_probmap(pm, _pred_path(pred_root, f"run-{run_idx}", train, test, e.block_id))


def _binarizer(config: ExperimentConfig, mock: str | None, q_train: float):
    if config.topk_fraction is not None:
        return lambda pm: topk_binarize(pm, config.topk_fraction)
    if mock == "ratio":
        # quota decoding at the train range's white rate, per the baseline
        return lambda pm: topk_binarize(pm, q_train)
    if config.threshold is None:
        raise ValueError("config sets neither threshold nor topk_fraction")
    return lambda pm: threshold_binarize(pm, config.threshold)


def score_cell(
    ds_dir: Path,
    manifest: BlockManifest,
    pred_dir: Path,
    binarize,
    replicates: int,
    level: float,
    seed: int,
):
    """Pooled, CI-decorated metrics of one (train, test) prediction set.

    Returns (bundle, per-block confusion counts, per-metric bootstrap
    results)."""
    per_block: list[ConfusionCounts] = []
    missing = [
        pred_dir / f"block_{e.block_id:04d}.pmf"
        for e in eval_entries(manifest)
        if not (pred_dir / f"block_{e.block_id:04d}.pmf").exists()
    ]
    if missing:
        raise PredictionsMissing(missing)
    for e in eval_entries(manifest):
        pm = read_probmap(pred_dir / f"block_{e.block_id:04d}.pmf")
        truth = load_block(ds_dir, e)
        if (pm.height, pm.width) != truth.shape:
            raise ValueError(
                f"block {e.block_id}: prediction {pm.height}x{pm.width} "
                f"vs truth {truth.shape[0]}x{truth.shape[1]}"
            )
        per_block.append(confusion(binarize(pm), truth))
    pooled = sum(per_block[1:], per_block[0])
    bundle = classification_report(pooled)
    cis = bootstrap_bundle(per_block, METRIC_FIELDS, replicates, level, seed)
    return attach_cis(bundle, cis), per_block, cis


def run_pipeline(
    config: ExperimentConfig,
    predictions_root: str | Path,
    datasets_root: str | Path,
    mock: str | None = None,
    jobs: int = 1,
) -> CrossEvalMatrix:
    """Score every (train, test) pair, averaging across run-* directories.

    With a mock name the prediction files are generated first; otherwise
    they must already exist (missing files are reported exhaustively).
    Results are independent of `jobs`.
    """
    datasets = {name: build_dataset(datasets_root, name, config) for name in config.ranges}
    pred_root = Path(predictions_root)
    if mock:
        write_mock_predictions(mock, config, datasets, pred_root)

    run_dirs = sorted(p.name for p in pred_root.glob("run-*") if p.is_dir())
    runs: list[str | None] = list(run_dirs) if run_dirs else [None]

    bp = config.block_size * config.block_size
    q_by_train = {
        name: pool_prevalence(datasets[name][1].entries, bp) for name in config.ranges
    }

    tasks = []
    for run in runs:
        for test in config.ranges:
            for train in config.ranges:
                tasks.append((run, test, train))

    def score_one(task):
        run, test, train = task
        ds_dir, manifest = datasets[test]
        pred_dir = _pred_path(pred_root, run, train, test, 0).parent
        binarize = _binarizer(config, mock, q_by_train[train])
        bundle, _, _ = score_cell(
            ds_dir,
            manifest,
            pred_dir,
            binarize,
            config.bootstrap_replicates,
            config.ci_level,
            config.seeds.bootstrap,
        )
        return bundle

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(score_one, tasks))
    else:
        results = [score_one(t) for t in tasks]

    by_cell: dict[tuple[str, str], list[MetricsBundle]] = {}
    for task, bundle in zip(tasks, results):
        _, test, train = task
        by_cell.setdefault((test, train), []).append(bundle)

    cells = {
        test: {train: average_runs(by_cell[(test, train)]) for train in config.ranges}
        for test in config.ranges
    }
    return CrossEvalMatrix(
        train_ranges=tuple(config.ranges), test_ranges=tuple(config.ranges), cells=cells
    )


def save_matrix(matrix: CrossEvalMatrix, path: str | Path) -> None:
    Path(path).write_text(json.dumps(matrix.to_doc(), indent=2, sort_keys=True) + "\n")


def load_matrix(path: str | Path) -> CrossEvalMatrix:
    return matrix_from_doc(json.loads(Path(path).read_text()))
