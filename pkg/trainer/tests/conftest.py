import subprocess

import pytest


def build_dataset(out_dir, count, n_train, n_val):
    """Datasets come from the scorer's CLI: files are the only interface."""
    cmd = [
        "spiralbench", "blocks", "--range", "25m",
        "--count", str(count), "--size", "256", "--seed", "1",
        "--train", str(n_train), "--val", str(n_val), "--out", str(out_dir),
    ]
    res = subprocess.run(cmd, capture_output=True, text=True)
    assert res.returncode == 0, res.stderr
    return out_dir


@pytest.fixture(scope="session")
def smoke_dataset(tmp_path_factory):
    return build_dataset(tmp_path_factory.mktemp("smoke_ds"), count=8, n_train=6, n_val=2)


@pytest.fixture(scope="session")
def desk_dataset(tmp_path_factory):
    return build_dataset(tmp_path_factory.mktemp("desk_ds"), count=28, n_train=16, n_val=4)
