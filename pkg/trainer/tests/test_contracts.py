"""Cross-package contracts: mask law parity, loss parity, and the PMF1
interchange, all mediated by files and the scorer's CLI."""

import csv
import json
import subprocess

import numpy as np
import pytest
import torch

from spiraltrainer import (
    InpaintingUNet,
    TrainerConfig,
    bce,
    combined_loss,
    predict,
    read_probmap,
    reveal_mask,
    soft_mca,
    train,
    write_probmap,
)
from spiraltrainer.formats import read_pgm


def run_scorer(*argv):
    res = subprocess.run(["spiralbench", *map(str, argv)], capture_output=True, text=True)
    assert res.returncode == 0, res.stderr
    return res.stdout


@pytest.mark.parametrize("seed,block_id", [(3, 0), (3, 7), (42, 123), (11, 349)])
def test_mask_parity_exact(tmp_path, seed, block_id):
    ours = reveal_mask(block_id, 0.3, seed, 256)
    pgm = tmp_path / f"mask_{seed}_{block_id}.pgm"
    run_scorer("mask", "--block-id", block_id, "--ratio", 0.3, "--seed", seed, "--out", pgm)
    theirs = read_pgm(pgm) == 255
    assert np.array_equal(ours, theirs)


def test_loss_parity_on_shared_fixtures(tmp_path):
    gen = np.random.Generator(np.random.PCG64(99))
    for i in range(20):
        vals = gen.random((64, 64)).astype(np.float32)
        truth = (gen.random((64, 64)) < 0.1).astype(np.uint8)
        pmf = tmp_path / f"fx_{i}.pmf"
        pgm = tmp_path / f"fx_{i}.pgm"
        write_probmap(vals, pmf)
        with open(pgm, "wb") as fh:
            fh.write(b"P5\n64 64\n255\n" + (truth * 255).tobytes())

        reference = json.loads(run_scorer("loss", "--pred", pmf, "--truth", pgm))

        pred_t = torch.from_numpy(read_probmap(pmf)).double()
        truth_t = torch.from_numpy(truth.astype(np.float64))
        assert abs(float(soft_mca(pred_t, truth_t)) - reference["soft_mca"]) < 1e-6
        assert abs(float(bce(pred_t, truth_t)) - reference["bce"]) < 1e-6
        assert abs(float(combined_loss(pred_t, truth_t)) - reference["combined"]) < 1e-6


def test_forward_pass_shape_and_range():
    model = InpaintingUNet(pretrained=False)
    with torch.no_grad():
        out = model(torch.rand(1, 1, 256, 256))
    assert out.shape == (1, 1, 256, 256)
    assert float(out.min()) >= 0.0 and float(out.max()) <= 1.0


@pytest.fixture(scope="module")
def smoke_run(smoke_dataset, tmp_path_factory):
    out = tmp_path_factory.mktemp("smoke_run")
    cfg = TrainerConfig(pretrained=False, seed=42)
    result = train(cfg, smoke_dataset / "manifest.json", out, max_epochs=2)
    return smoke_dataset, out, result


def test_smoke_train_two_epochs(smoke_run):
    _, out, result = smoke_run
    assert result.checkpoint_path.exists()
    assert len(result.log) == 2
    with open(out / "epochs.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert [int(r["epoch"]) for r in rows] == [1, 2]
    for field in ("train_loss", "val_loss", "val_soft_mca", "val_bce",
                  "val_hard_mca", "val_pixel_accuracy", "val_ssim"):
        assert all(field in r for r in rows)
    summary = json.loads((out / "run_summary.json").read_text())
    assert summary["epochs_run"] == 2
    assert 1 <= summary["best_epoch"] <= 2


def test_predict_emits_parseable_maps(smoke_run, tmp_path):
    ds, out, _ = smoke_run
    pred_dir = tmp_path / "preds"
    written = predict(out / "best.pt", ds / "manifest.json", pred_dir, role="val")
    assert written
    for path in written:
        assert path.read_bytes()[:4] == b"PMF1"
        vals = read_probmap(path)
        assert vals.shape == (256, 256)
        assert float(vals.min()) >= 0.0 and float(vals.max()) <= 1.0
    # the scorer itself accepts the files end to end
    manifest = json.loads((ds / "manifest.json").read_text())
    assert all(e["role"] != "test" for e in manifest["entries"])  # val pool is scored
    out_json = tmp_path / "eval.json"
    run_scorer(
        "eval", "--dataset", ds, "--pred", pred_dir,
        "--threshold", 0.5, "--replicates", 50, "--out", out_json,
    )
    doc = json.loads(out_json.read_text())
    assert set(doc["metrics"]) >= {"accuracy_micro_f1", "white_f1"}


def test_predict_is_deterministic(smoke_run, tmp_path):
    ds, out, _ = smoke_run
    a = predict(out / "best.pt", ds / "manifest.json", tmp_path / "a", role="val")
    b = predict(out / "best.pt", ds / "manifest.json", tmp_path / "b", role="val")
    for pa, pb in zip(a, b):
        assert pa.read_bytes() == pb.read_bytes()
