import numpy as np
import pytest

from netstream import (
    DoubleStreamNet,
    NetSpec,
    ShapeError,
    bright_side_dataset,
    export_fc7,
    load_pair_images,
    save_pair_images,
)


def test_png_round_trip(tmp_path):
    a, b, _ = bright_side_dataset(6, seed=1)
    ids = [f"p{i:03d}" for i in range(6)]
    save_pair_images(tmp_path, ids, a, b)
    loaded_ids, loaded_a, loaded_b = load_pair_images(tmp_path, 32)
    assert loaded_ids == ids
    # 8-bit quantization on the way through PNG
    assert np.abs(loaded_a - a).max() <= 1 / 255 + 1e-12
    assert np.abs(loaded_b - b).max() <= 1 / 255 + 1e-12


def test_missing_partner_crop_rejected(tmp_path):
    a, b, _ = bright_side_dataset(1, seed=1)
    save_pair_images(tmp_path, ["p0"], a, b)
    (tmp_path / "p0_b.png").unlink()
    with pytest.raises(FileNotFoundError):
        load_pair_images(tmp_path, 32)


def test_wrong_crop_size_rejected(tmp_path):
    from PIL import Image
    Image.fromarray(np.zeros((16, 16), dtype=np.uint8), mode="L").save(tmp_path / "p0_a.png")
    Image.fromarray(np.zeros((16, 16), dtype=np.uint8), mode="L").save(tmp_path / "p0_b.png")
    with pytest.raises(ShapeError):
        load_pair_images(tmp_path, 32)


def test_export_rows_and_determinism(tmp_path):
    net = DoubleStreamNet(NetSpec(classes=2, seed=3))
    a, b, _ = bright_side_dataset(10, seed=5)
    ids = [f"p{i:03d}" for i in range(10)]
    n = export_fc7(net, ids, a, b, tmp_path / "fc7_a.tsv")
    export_fc7(net, ids, a, b, tmp_path / "fc7_b.tsv")
    assert n == 10
    first = (tmp_path / "fc7_a.tsv").read_bytes()
    assert first == (tmp_path / "fc7_b.tsv").read_bytes()
    lines = first.decode().splitlines()
    assert len(lines) == 11
    assert lines[0].split("\t") == ["pair_id"] + [f"v{i}" for i in range(64)]
