"""Prime-raster generation, block datasets and class-decomposed scoring
for spiral-region inpainting experiments."""

from .primes import (
    DensityPoint,
    PrimalityBitmap,
    count_primes,
    load_bitmap,
    pnt_density,
    save_bitmap,
    sieve_range,
)
from .spiral import (
    PRESETS,
    BitGrid,
    RangeSpec,
    export_raster,
    n_to_xy,
    range_spec,
    rect_n_range,
    render,
    side_for,
    sieve_and_render,
    xy_to_n,
)
from .dataset import (
    BlockEntry,
    BlockManifest,
    MaskBitmap,
    QuotaUnreachable,
    aligned_grid_capacity,
    apply_mask,
    extract,
    gen_mask,
    load_manifest,
    plan_blocks,
    split,
)
from .metrics import (
    ConfusionCounts,
    LossParams,
    MetricsBundle,
    ProbMap,
    bce,
    classification_report,
    combined_loss,
    confusion,
    read_probmap,
    soft_mca,
    threshold_binarize,
    topk_binarize,
    write_probmap,
)
from .stats import (
    BaselineSpec,
    BootstrapResult,
    average_runs,
    bootstrap_ci,
    bootstrap_bundle,
    density_series,
    naive_expected_metrics,
    naive_mc_oracle,
    normalize_index,
)
from .pipeline import (
    CrossEvalMatrix,
    ExperimentConfig,
    Seeds,
    load_config,
    run_pipeline,
)
from .report import emit_report

__version__ = "0.1.0"
