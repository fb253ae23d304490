import csv
import io

import numpy as np
import pytest

from rankstereo.cli import main
from rankstereo.evaluation import CSV_HEADER
from rankstereo.imagery import GrayImage, load_gray, save_gray
from rankstereo.synthetic import shifted_pair


@pytest.fixture
def pair(tmp_path):
    scene = shifted_pair(48, 32, 4, seed=6)
    save_gray(scene.left, tmp_path / "l.pgm")
    save_gray(scene.right, tmp_path / "r.pgm")
    return tmp_path, scene


def test_match_identical_views(pair, capsys):
    tmp, scene = pair
    out = tmp / "d.pgm"
    assert main(["match", str(tmp / "l.pgm"), str(tmp / "l.pgm"), "--dmax", "8",
                 "--out", str(out)]) == 0
    text = capsys.readouterr().out
    assert "# dmax = 8" in text and "# cost = unified" in text
    assert "runtime_ms = " in text
    d = load_gray(out)
    assert d.shape == scene.left.shape
    assert not d.data[:, 8:].any()


def test_match_shifted_pair(pair):
    tmp, _ = pair
    out = tmp / "d.pgm"
    assert main(["match", str(tmp / "l.pgm"), str(tmp / "r.pgm"), "--dmax", "9",
                 "--cost", "rank_sad", "--no-subpixel", "--out", str(out)]) == 0
    # disparity 4 of 9 levels renders to floor(4 * 255 / 8 + 0.5) = 128
    assert (load_gray(out).data[4:-4, 10:-4] == 128).all()


def test_match_dimension_mismatch(tmp_path, capsys):
    save_gray(GrayImage(np.zeros((4, 5), np.uint8)), tmp_path / "a.pgm")
    save_gray(GrayImage(np.zeros((5, 4), np.uint8)), tmp_path / "b.pgm")
    assert main(["match", str(tmp_path / "a.pgm"), str(tmp_path / "b.pgm")]) == 1
    assert "dimension mismatch" in capsys.readouterr().err


def test_match_missing_file(tmp_path, capsys):
    assert main(["match", str(tmp_path / "x.pgm"), str(tmp_path / "y.pgm")]) == 1
    assert "error:" in capsys.readouterr().err


def test_usage_errors():
    for argv in ([], ["match"], ["match", "a", "b", "--cost", "census"], ["bogus"]):
        with pytest.raises(SystemExit) as exc:
            main(argv)
        assert exc.value.code == 2


def test_config_file_and_override(pair, tmp_path, capsys):
    tmp, _ = pair
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# smaller search\ndmax = 6\ncost = rank_ad\np1 = 3\nmedian = off\n")
    out = tmp / "d.pgm"
    assert main(["match", str(tmp / "l.pgm"), str(tmp / "r.pgm"), "--config", str(cfg),
                 "--p1", "5", "--out", str(out)]) == 0
    text = capsys.readouterr().out
    for line in ("# dmax = 6", "# cost = rank_ad", "# p1 = 5", "# median = false"):
        assert line in text


def test_bad_config_key(pair, tmp_path, capsys):
    tmp, _ = pair
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("window = 9\n")
    assert main(["match", str(tmp / "l.pgm"), str(tmp / "r.pgm"), "--config", str(cfg)]) == 1
    assert "unknown config key" in capsys.readouterr().err


def test_eval_empty_dir(tmp_path, capsys):
    out = tmp_path / "r.csv"
    assert main(["eval", str(tmp_path), "--out", str(out)]) == 1
    assert out.read_text() == ",".join(CSV_HEADER) + "\n"
    assert "no datasets" in capsys.readouterr().err


def test_eval_synthetic_dataset(tmp_path, capsys):
    scene = shifted_pair(64, 40, 5, seed=2)
    d = tmp_path / "data" / "shift"
    d.mkdir(parents=True)
    save_gray(scene.left, d / "left.pgm")
    save_gray(scene.right, d / "right.pgm")
    save_gray(GrayImage(scene.truth.disparity.astype(np.uint8)), d / "truth.pgm")
    (d / "meta").write_text("scale_divisor = 1\ndmax = 12\n")
    assert main(["eval", str(tmp_path / "data"), "--cost", "unified"]) == 0
    cap = capsys.readouterr()
    rows = list(csv.DictReader(io.StringIO(cap.out)))
    assert len(rows) == 1
    assert rows[0]["dataset"] == "shift" and rows[0]["cost_kind"] == "unified"
    assert float(rows[0]["error_ratio"]) < 0.02
    assert "# delta = 1" in cap.err


def test_arch_table(capsys):
    assert main(["arch"]) == 0
    out = capsys.readouterr().out
    for label, f in [("450x375/30fps", "45.6"), ("450x375/60fps", "91.1"),
                     ("640x480/30fps", "82.9"), ("640x480/60fps", "165.9"),
                     ("720p/30fps", "248.8")]:
        assert f"{label},{f}" in out
    assert "64,450,65535,1491504,182.1" in out
    assert "cost_bits = 8" in out


def test_arch_custom_grid(capsys):
    assert main(["arch", "--res", "100x100,720p", "--fps", "1,30"]) == 0
    out = capsys.readouterr().out
    assert "100x100/1fps,0.1" in out
    assert "720p/30fps,248.8" in out


def test_arch_simulate(capsys):
    assert main(["arch", "--simulate", "--dmax", "8", "--seed", "3"]) == 0
    out = capsys.readouterr().out
    assert "equivalent: yes" in out
    assert "saturation_count = 0" in out


def test_arch_simulate_pair(pair, capsys):
    tmp, _ = pair
    assert main(["arch", "--simulate", "--left", str(tmp / "l.pgm"), "--right",
                 str(tmp / "r.pgm"), "--dmax", "8", "--kernel", "5x5"]) == 0
    assert "equivalent: yes" in capsys.readouterr().out
