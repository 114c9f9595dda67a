import json

import numpy as np
import pytest

from conftest import DESK_A, DESK_B
from spiralbench import (
    BaselineSpec,
    ExperimentConfig,
    MetricsBundle,
    Seeds,
    emit_report,
    load_config,
    naive_expected_metrics,
    run_pipeline,
)
from spiralbench.metrics import METRIC_FIELDS
from spiralbench.pipeline import (
    CrossEvalMatrix,
    PredictionsMissing,
    build_dataset,
    eval_entries,
    load_matrix,
    matrix_from_doc,
    pool_prevalence,
    save_matrix,
)


def desk_config(**kw):
    base = dict(
        ranges=(DESK_A, DESK_B),
        block_count=32,
        block_size=64,
        n_train=4,
        n_val=4,
        bootstrap_replicates=200,
        runs_to_average=1,
        seeds=Seeds(sampling=1, split=2, mask=3, bootstrap=4, run=5),
    )
    base.update(kw)
    return ExperimentConfig(**base)


@pytest.fixture(scope="module")
def desk_roots(tmp_path_factory):
    return tmp_path_factory.mktemp("desk")


def test_build_dataset_reuses_existing(desk_roots):
    cfg = desk_config()
    d1, m1 = build_dataset(desk_roots / "datasets", DESK_A, cfg)
    d2, m2 = build_dataset(desk_roots / "datasets", DESK_A, cfg)
    assert d1 == d2
    assert m1.to_json() == m2.to_json()
    assert len(m1.by_role("train")) == 4
    assert len(m1.by_role("val")) == 4
    assert len(eval_entries(m1)) == 24


def test_build_dataset_rejects_mismatched_reuse(desk_roots):
    build_dataset(desk_roots / "datasets", DESK_A, desk_config())
    with pytest.raises(ValueError, match="different settings"):
        build_dataset(desk_roots / "datasets", DESK_A, desk_config(block_count=16))


def test_eval_pool_falls_back_to_val(desk_roots):
    cfg = desk_config(block_count=8, n_train=6, n_val=2)
    _, mf = build_dataset(desk_roots / "datasets_noval", DESK_A, cfg)
    pool = eval_entries(mf)
    assert {e.role for e in pool} == {"val"}
    assert len(pool) == 2


def test_oracle_mock_every_cell_perfect(desk_roots):
    cfg = desk_config()
    m = run_pipeline(cfg, desk_roots / "p_oracle", desk_roots / "datasets", mock="oracle")
    for test in cfg.ranges:
        for train in cfg.ranges:
            cell = m.cell(test, train)
            assert cell.accuracy_micro_f1 == 1.0
            assert cell.white_f1 == 1.0


def test_ratio_mock_matches_closed_form(desk_roots):
    cfg = desk_config()
    m = run_pipeline(cfg, desk_roots / "p_ratio", desk_roots / "datasets", mock="ratio")
    datasets = {name: build_dataset(desk_roots / "datasets", name, cfg) for name in cfg.ranges}
    bp = cfg.block_size * cfg.block_size
    for test in cfg.ranges:
        p = pool_prevalence(eval_entries(datasets[test][1]), bp)
        for train in cfg.ranges:
            q = pool_prevalence(datasets[train][1].entries, bp)
            want = naive_expected_metrics(BaselineSpec(p, q))
            got = m.cell(test, train)
            for name in METRIC_FIELDS:
                assert got.value(name) == pytest.approx(want.value(name), abs=1e-2)


def test_noisy_oracle_mock_accuracy_tracks_noise(desk_roots):
    cfg = desk_config(noise=0.1)
    m = run_pipeline(cfg, desk_roots / "p_noisy", desk_roots / "datasets", mock="noisy-oracle")
    for test in cfg.ranges:
        for train in cfg.ranges:
            assert m.cell(test, train).accuracy_micro_f1 == pytest.approx(0.9, abs=1e-2)


def test_jobs_do_not_affect_outputs(tmp_path, desk_roots):
    cfg = desk_config()
    m1 = run_pipeline(cfg, tmp_path / "pj1", desk_roots / "datasets", mock="ratio", jobs=1)
    m8 = run_pipeline(cfg, tmp_path / "pj8", desk_roots / "datasets", mock="ratio", jobs=8)
    save_matrix(m1, tmp_path / "m1.json")
    save_matrix(m8, tmp_path / "m8.json")
    assert (tmp_path / "m1.json").read_bytes() == (tmp_path / "m8.json").read_bytes()


def test_runs_are_averaged(tmp_path, desk_roots):
    cfg = desk_config(runs_to_average=3, noise=0.1)
    m = run_pipeline(cfg, tmp_path / "p3", desk_roots / "datasets", mock="noisy-oracle")
    run_dirs = sorted(p.name for p in (tmp_path / "p3").glob("run-*"))
    assert run_dirs == ["run-1", "run-2", "run-3"]
    # single-run rescoring of run-2 must differ from the average (noise is
    # keyed per run) while staying near it
    cfg_single = desk_config(runs_to_average=1, noise=0.1)
    m2 = run_pipeline(cfg_single, tmp_path / "p3" / "run-2", desk_roots / "datasets")
    cell_avg = m.cell(DESK_A, DESK_A).accuracy_micro_f1
    cell_run2 = m2.cell(DESK_A, DESK_A).accuracy_micro_f1
    assert cell_avg == pytest.approx(cell_run2, abs=5e-3)
    assert cell_avg != cell_run2


def test_missing_predictions_are_listed(tmp_path, desk_roots):
    cfg = desk_config()
    root = tmp_path / "p_missing"
    run_pipeline(cfg, root, desk_roots / "datasets", mock="oracle")
    victims = sorted((root / "run-1").rglob("block_*.pmf"))[:3]
    for v in victims:
        v.unlink()
    with pytest.raises(PredictionsMissing) as exc:
        run_pipeline(cfg, root, desk_roots / "datasets")
    assert len(exc.value.paths) >= 1
    assert str(victims[0]) in str(exc.value)


def test_matrix_json_roundtrip(tmp_path, desk_roots):
    cfg = desk_config()
    m = run_pipeline(cfg, desk_roots / "p_oracle", desk_roots / "datasets")
    save_matrix(m, tmp_path / "m.json")
    again = load_matrix(tmp_path / "m.json")
    save_matrix(again, tmp_path / "m2.json")
    assert (tmp_path / "m.json").read_bytes() == (tmp_path / "m2.json").read_bytes()


def synthetic_matrix(names):
    gen = np.random.Generator(np.random.PCG64(0))
    cells = {}
    for t in names:
        cells[t] = {}
        for tr in names:
            vals = gen.uniform(0.1, 0.99, len(METRIC_FIELDS))
            cells[t][tr] = MetricsBundle(
                **dict(zip(METRIC_FIELDS, vals)),
                ci={name: 0.0029 for name in METRIC_FIELDS},
            )
    return CrossEvalMatrix(train_ranges=tuple(names), test_ranges=tuple(names), cells=cells)


def test_report_emits_eight_tables_per_format(tmp_path):
    names = ["25m", "50m", "100m", "200m", "300m", "400m", "500m"]
    matrix = synthetic_matrix(names)
    files = emit_report(matrix, "csv", tmp_path / "csv")
    assert len(files) == 8
    for f in files:
        rows = f.read_text().strip().splitlines()
        assert len(rows) == 8
        assert all(len(r.split(",")) == 8 for r in rows)
        assert rows[0].split(",")[1:] == names
        assert [r.split(",")[0] for r in rows[1:]] == names

    md_files = emit_report(matrix, "markdown", tmp_path / "md")
    assert len(md_files) == 8
    text = md_files[0].read_text()
    import re

    assert re.search(r"\| 0\.\d{4} \(±0\.0029\)", text)

    html_files = emit_report(matrix, "html", tmp_path / "html")
    assert len(html_files) == 8
    html = html_files[0].read_text()
    assert "background:#" in html and "<table" in html

    json_files = emit_report(matrix, "json", tmp_path / "json")
    assert len(json_files) == 1
    doc = json.loads(json_files[0].read_text())
    again = matrix_from_doc(doc)
    emit_report(again, "json", tmp_path / "json2")
    assert (tmp_path / "json" / "matrix.json").read_bytes() == (
        tmp_path / "json2" / "matrix.json"
    ).read_bytes()

    with pytest.raises(ValueError):
        emit_report(matrix, "xlsx", tmp_path)


def test_report_cell_format_matches_tables():
    from spiralbench.report import cell_text

    assert cell_text(0.8768, 0.0029) == "0.8768 (±0.0029)"
    assert cell_text(0.8768, None) == "0.8768"


def test_load_config(tmp_path):
    text = """
# experiment setup
ranges = 25m, 50m
block_count = 40
block_size = 64
n_train = 10
n_val = 5
mask_ratio = 0.3
threshold = none
topk_fraction = 0.06
bootstrap_replicates = 500
ci_level = 0.9
runs_to_average = 2
seed_sampling = 11
seed_bootstrap = 14
"""
    path = tmp_path / "exp.cfg"
    path.write_text(text)
    cfg = load_config(path)
    assert cfg.ranges == ("25m", "50m")
    assert cfg.block_count == 40
    assert cfg.threshold is None
    assert cfg.topk_fraction == 0.06
    assert cfg.ci_level == 0.9
    assert cfg.seeds.sampling == 11
    assert cfg.seeds.bootstrap == 14
    assert cfg.seeds.split == Seeds().split  # untouched default
    path.write_text("block_count = 1")
    with pytest.raises(ValueError):
        load_config(path)  # ranges are mandatory
    path.write_text("ranges = 25m\nwhat = 1")
    with pytest.raises(ValueError):
        load_config(path)
