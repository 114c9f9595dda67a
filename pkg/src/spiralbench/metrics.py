"""Scoring of probability maps: binarization, confusion counts,
class-decomposed metrics and the training-loss components.

White (prime) is the positive class throughout.  Degenerate 0/0 ratios are
defined as 0 and flagged, never raised, so cross-evaluation sweeps survive
pathological blocks (e.g. prime-free regions).
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

PROBMAP_MAGIC = b"PMF1"
BCE_EPS = 1e-7

METRIC_FIELDS = (
    "accuracy_micro_f1",
    "macro_f1",
    "white_precision",
    "white_recall",
    "white_f1",
    "black_precision",
    "black_recall",
    "black_f1",
)


@dataclass(frozen=True)
class ProbMap:
    """Per-pixel probability of 'prime', row-major."""

    width: int
    height: int
    values: np.ndarray  # float32 (height, width) in [0, 1]

    def __post_init__(self):
        v = self.values
        if v.shape != (self.height, self.width):
            raise ValueError(f"values shape {v.shape} != ({self.height}, {self.width})")
        if v.size and (float(v.min()) < 0.0 or float(v.max()) > 1.0):
            raise ValueError("probabilities must lie in [0, 1]")

    @classmethod
    def from_array(cls, values: np.ndarray) -> "ProbMap":
        v = np.asarray(values, dtype=np.float32)
        return cls(width=v.shape[1], height=v.shape[0], values=v)


def write_probmap(pm: ProbMap, path: str | Path) -> None:
    """Interchange format: 'PMF1', u32-LE width and height, f32-LE pixels."""
    with open(path, "wb") as fh:
        fh.write(PROBMAP_MAGIC)
        fh.write(struct.pack("<II", pm.width, pm.height))
        fh.write(np.ascontiguousarray(pm.values, dtype="<f4").tobytes())


def read_probmap(path: str | Path) -> ProbMap:
    data = Path(path).read_bytes()
    if data[:4] != PROBMAP_MAGIC:
        raise ValueError(f"{path}: bad magic {data[:4]!r}")
    w, h = struct.unpack("<II", data[4:12])
    vals = np.frombuffer(data, dtype="<f4", count=w * h, offset=12)
    return ProbMap(width=w, height=h, values=vals.reshape(h, w).copy())


@dataclass(frozen=True)
class ConfusionCounts:
    """Pixel counts with white/prime as the positive class."""

    tp: int
    fp: int
    tn: int
    fn: int

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn

    def __add__(self, other: "ConfusionCounts") -> "ConfusionCounts":
        return ConfusionCounts(
            self.tp + other.tp, self.fp + other.fp, self.tn + other.tn, self.fn + other.fn
        )


@dataclass(frozen=True)
class LossParams:
    alpha: float = 1.0
    beta: float = 0.5

    def __post_init__(self):
        if self.alpha < 0 or self.beta < 0:
            raise ValueError("alpha and beta must be non-negative")


@dataclass(frozen=True)
class MetricsBundle:
    accuracy_micro_f1: float
    macro_f1: float
    white_precision: float
    white_recall: float
    white_f1: float
    black_precision: float
    black_recall: float
    black_f1: float
    ci: dict[str, float] = field(default_factory=dict)  # half-widths, per metric
    degenerate: tuple[str, ...] = ()

    def value(self, name: str) -> float:
        if name not in METRIC_FIELDS:
            raise KeyError(name)
        return getattr(self, name)

    def as_dict(self) -> dict:
        doc = {name: self.value(name) for name in METRIC_FIELDS}
        if self.ci:
            doc["ci"] = dict(self.ci)
        if self.degenerate:
            doc["degenerate"] = list(self.degenerate)
        return doc

    def with_ci(self, ci: dict[str, float]) -> "MetricsBundle":
        return replace(self, ci=dict(ci))


def threshold_binarize(pm: ProbMap, t: float) -> np.ndarray:
    """uint8 raster: 1 where value >= t (boundary inclusive)."""
    if not 0.0 <= t <= 1.0:
        raise ValueError(f"threshold must be in [0, 1], got {t}")
    return (pm.values >= t).astype(np.uint8)


def topk_binarize(pm: ProbMap, fraction: float) -> np.ndarray:
    """Exactly round(fraction * N) white pixels, highest values first.

    Ties at the cutoff value are resolved toward the lower row-major pixel
    index, which makes the decoding fully deterministic.
    """
    if not 0.0 < fraction < 1.0:
        raise ValueError(f"fraction must be in (0, 1), got {fraction}")
    n = pm.values.size
    k = int(math.floor(fraction * n + 0.5))  # round half away from zero
    flat = pm.values.reshape(-1)
    order = np.argsort(-flat, kind="stable")  # descending value, ascending index
    out = np.zeros(n, dtype=np.uint8)
    out[order[:k]] = 1
    return out.reshape(pm.values.shape)


def _as_binary(arr: np.ndarray) -> np.ndarray:
    return arr.astype(bool) if arr.dtype != bool else arr


def confusion(pred: np.ndarray, truth: np.ndarray) -> ConfusionCounts:
    if pred.shape != truth.shape:
        raise ValueError(f"shape mismatch: {pred.shape} vs {truth.shape}")
    p = _as_binary(pred)
    t = _as_binary(truth)
    tp = int(np.count_nonzero(p & t))
    fp = int(np.count_nonzero(p & ~t))
    fn = int(np.count_nonzero(~p & t))
    tn = int(np.count_nonzero(~p & ~t))
    return ConfusionCounts(tp=tp, fp=fp, tn=tn, fn=fn)


def _ratio(num: int, den: int, name: str, flags: list[str]) -> float:
    if den == 0:
        flags.append(name)
        return 0.0
    return num / den


def _f1(p: float, r: float, name: str, flags: list[str]) -> float:
    if p + r == 0.0:
        flags.append(name)
        return 0.0
    return 2.0 * p * r / (p + r)


def classification_report(c: ConfusionCounts) -> MetricsBundle:
    if c.total <= 0:
        raise ValueError("empty confusion table")
    flags: list[str] = []
    accuracy = (c.tp + c.tn) / c.total
    wp = _ratio(c.tp, c.tp + c.fp, "white_precision", flags)
    wr = _ratio(c.tp, c.tp + c.fn, "white_recall", flags)
    wf1 = _f1(wp, wr, "white_f1", flags)
    bp = _ratio(c.tn, c.tn + c.fn, "black_precision", flags)
    br = _ratio(c.tn, c.tn + c.fp, "black_recall", flags)
    bf1 = _f1(bp, br, "black_f1", flags)
    return MetricsBundle(
        accuracy_micro_f1=accuracy,
        macro_f1=(wf1 + bf1) / 2.0,
        white_precision=wp,
        white_recall=wr,
        white_f1=wf1,
        black_precision=bp,
        black_recall=br,
        black_f1=bf1,
        degenerate=tuple(flags),
    )


def metric_from_counts(c: ConfusionCounts, name: str) -> float:
    return classification_report(c).value(name)


def soft_mca(pm: ProbMap, truth: np.ndarray) -> float:
    """Mean of per-class soft accuracies; classes absent from the truth are
    excluded from the average."""
    t = _as_binary(truth)
    if pm.values.shape != t.shape:
        raise ValueError(f"shape mismatch: {pm.values.shape} vs {t.shape}")
    if t.size == 0:
        raise ValueError("empty raster")
    v = pm.values.astype(np.float64)
    accs = []
    n_white = int(np.count_nonzero(t))
    if n_white:
        accs.append(float(v[t].mean()))
    if n_white < t.size:
        accs.append(float((1.0 - v[~t]).mean()))
    return float(np.mean(accs))


def bce(pm: ProbMap, truth: np.ndarray) -> float:
    """Mean binary cross-entropy with probabilities clamped away from {0,1}."""
    t = _as_binary(truth)
    if pm.values.shape != t.shape:
        raise ValueError(f"shape mismatch: {pm.values.shape} vs {t.shape}")
    p = np.clip(pm.values.astype(np.float64), BCE_EPS, 1.0 - BCE_EPS)
    ll = np.where(t, np.log(p), np.log1p(-p))
    return float(-ll.mean())


def combined_loss(pm: ProbMap, truth: np.ndarray, params: LossParams = LossParams()) -> float:
    """alpha * (1 - soft_mca) + beta * bce; zero for a perfect prediction."""
    return params.alpha * (1.0 - soft_mca(pm, truth)) + params.beta * bce(pm, truth)
