"""Block-level bootstrap intervals, the ratio-aligned analytic baseline
with its Monte-Carlo twin, run averaging and density-curve series.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .metrics import METRIC_FIELDS, ConfusionCounts, MetricsBundle, classification_report, confusion
from .primes import DensityPoint, pnt_density


@dataclass(frozen=True)
class BaselineSpec:
    """p = true white prevalence, q = rate of random white assignment.

    q = 1 (predict everything white) is allowed as a degenerate endpoint.
    """

    p: float
    q: float

    def __post_init__(self):
        if not (0.0 < self.p <= 1.0 and 0.0 < self.q <= 1.0):
            raise ValueError(f"p and q must be in (0, 1], got p={self.p} q={self.q}")


@dataclass(frozen=True)
class BootstrapResult:
    point: float
    ci_low: float
    ci_high: float
    half_width: float
    replicates: int
    seed: int


def _counts_matrix(per_block: list[ConfusionCounts]) -> np.ndarray:
    return np.array([[c.tp, c.fp, c.tn, c.fn] for c in per_block], dtype=np.int64)


def _pool(row: np.ndarray) -> ConfusionCounts:
    return ConfusionCounts(tp=int(row[0]), fp=int(row[1]), tn=int(row[2]), fn=int(row[3]))


def _replicate_indices(seed: int, r: int, n: int) -> np.ndarray:
    # Each replicate owns a counter-keyed generator, so the result cannot
    # depend on scheduling order.
    gen = np.random.Generator(np.random.Philox(key=np.array([seed, r], dtype=np.uint64)))
    return gen.integers(0, n, size=n)


def bootstrap_ci(
    per_block: list[ConfusionCounts],
    metric: str,
    replicates: int = 10_000,
    level: float = 0.95,
    seed: int = 0,
) -> BootstrapResult:
    """Percentile bootstrap over blocks resampled with replacement.

    The point estimate pools counts over all blocks (micro pooling); each
    replicate redraws the block multiset, pools, and re-evaluates.
    """
    many = bootstrap_bundle(per_block, [metric], replicates, level, seed)
    return many[metric]


def bootstrap_bundle(
    per_block: list[ConfusionCounts],
    metric_names: list[str] | tuple[str, ...] = METRIC_FIELDS,
    replicates: int = 10_000,
    level: float = 0.95,
    seed: int = 0,
) -> dict[str, BootstrapResult]:
    """bootstrap_ci for several metrics off the same keyed replicate draws."""
    if not per_block:
        raise ValueError("need at least one block")
    if not 0.0 < level < 1.0:
        raise ValueError(f"level must be in (0, 1), got {level}")
    if replicates < 1:
        raise ValueError(f"replicates must be >= 1, got {replicates}")
    for name in metric_names:
        if name not in METRIC_FIELDS:
            raise KeyError(name)

    counts = _counts_matrix(per_block)
    n = counts.shape[0]
    pooled = classification_report(_pool(counts.sum(axis=0)))
    reps = np.empty((replicates, len(metric_names)), dtype=np.float64)
    for r in range(replicates):
        idx = _replicate_indices(seed, r, n)
        rep = classification_report(_pool(counts[idx].sum(axis=0)))
        for j, name in enumerate(metric_names):
            reps[r, j] = rep.value(name)

    alpha = (1.0 - level) / 2.0
    out = {}
    for j, name in enumerate(metric_names):
        col = np.sort(reps[:, j])
        lo = float(np.quantile(col, alpha))
        hi = float(np.quantile(col, 1.0 - alpha))
        out[name] = BootstrapResult(
            point=pooled.value(name),
            ci_low=lo,
            ci_high=hi,
            half_width=(hi - lo) / 2.0,
            replicates=replicates,
            seed=seed,
        )
    return out


def attach_cis(
    bundle: MetricsBundle, results: dict[str, BootstrapResult]
) -> MetricsBundle:
    return bundle.with_ci({name: r.half_width for name, r in results.items()})


def naive_expected_metrics(b: BaselineSpec) -> MetricsBundle:
    """Closed-form scores of a predictor that knows only the white rate.

    Truth ~ Bernoulli(p) and prediction ~ Bernoulli(q), independent:
    accuracy = pq + (1-p)(1-q), white precision = p, white recall = q,
    and the F1s are harmonic means of those marginals.
    """
    p, q = b.p, b.q
    wf1 = 2.0 * p * q / (p + q)
    flags = ()
    if p == q == 1.0:
        bf1 = 0.0
        flags = ("black_f1",)
    else:
        bf1 = 2.0 * (1.0 - p) * (1.0 - q) / ((1.0 - p) + (1.0 - q))
    return MetricsBundle(
        accuracy_micro_f1=p * q + (1.0 - p) * (1.0 - q),
        macro_f1=(wf1 + bf1) / 2.0,
        white_precision=p,
        white_recall=q,
        white_f1=wf1,
        black_precision=1.0 - p,
        black_recall=1.0 - q,
        black_f1=bf1,
        degenerate=flags,
    )


def naive_mc_oracle(b: BaselineSpec, trials: int, seed: int = 0) -> MetricsBundle:
    """Simulation twin of naive_expected_metrics (independent verification)."""
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    gen = np.random.Generator(np.random.Philox(key=np.array([seed, 0], dtype=np.uint64)))
    truth = gen.random(trials) < b.p
    pred = gen.random(trials) < b.q
    return classification_report(confusion(pred, truth))


def normalize_index(series: list[float]) -> list[float]:
    """Divide a series by its first element (index = 1.0 at the start)."""
    if not series:
        raise ValueError("empty series")
    if series[0] == 0:
        raise ValueError("first element must be nonzero")
    first = series[0]
    return [v / first for v in series]


def average_runs(runs: list[MetricsBundle]) -> MetricsBundle:
    """Field-wise arithmetic mean; CI half-widths are averaged likewise."""
    if not runs:
        raise ValueError("no runs to average")
    ci_keys = set(runs[0].ci.keys())
    for r in runs[1:]:
        if set(r.ci.keys()) != ci_keys:
            raise ValueError("runs carry mismatched CI fields")
    values = {
        name: float(np.mean([r.value(name) for r in runs])) for name in METRIC_FIELDS
    }
    ci = {k: float(np.mean([r.ci[k] for r in runs])) for k in ci_keys}
    degenerate = tuple(sorted({d for r in runs for d in r.degenerate}))
    return MetricsBundle(**values, ci=ci, degenerate=degenerate)


def density_series(x_lo: int, x_hi: int, points: int = 200) -> list[DensityPoint]:
    """1/ln(x) sampled at `points` log-spaced integers in [x_lo, x_hi]."""
    if not 1 < x_lo <= x_hi:
        raise ValueError("need 1 < x_lo <= x_hi")
    xs = np.unique(np.geomspace(x_lo, x_hi, num=points).round().astype(np.int64))
    return [DensityPoint(int(x), pnt_density(float(x))) for x in xs]
