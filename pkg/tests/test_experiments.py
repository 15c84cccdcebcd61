import math

import numpy as np
import pytest

from kdistance.convex_body import parse_body
from kdistance.distance_measure import build_profile, l2_weighted_nu, mean_square
from kdistance.experiments.cli import main
from kdistance.experiments.config import ConfigError, parse_config
from kdistance.experiments.sweep import Row, compute_row, fit_slope, run_sweep
from kdistance.lattice import distinct_distances, shell_histogram



def test_fit_slope_examples():
    qs = [8, 16, 32, 64]
    assert fit_slope([(q, q**2.5) for q in qs]) == pytest.approx(2.5)
    assert fit_slope([(q, 3.0) for q in qs]) == pytest.approx(0.0, abs=1e-12)
    assert fit_slope([(q, q * math.log(q)) for q in qs]) == pytest.approx(1.33, abs=0.005)
    with pytest.raises(ValueError):
        fit_slope([(8, 1.0)])
    with pytest.raises(ValueError):
        fit_slope([(8, 1.0), (16, -1.0)])


def test_parse_config():
    cfg = parse_config("d = 2,3\nq = 8, 12, 16\ndelta = 1/(2q)\nbody = ball\nbody = superellipsoid:4\nseed = 7\n")
    assert cfg.dims == [2, 3] and cfg.qs == [8, 12, 16]
    assert cfg.delta(16) == pytest.approx(1 / 32)
    assert cfg.bodies == ["ball", "superellipsoid:4"]
    assert cfg.seed == 7 and cfg.header()["seed"] == 7
    assert parse_config("delta = 1/q").delta(4) == pytest.approx(0.25)
    assert parse_config("delta = 0.5").delta_factor == 0.5


@pytest.mark.parametrize("text", ["q = x", "colour = red", "nonsense", "d = 1", "delta = 9/q",
                                  "body = blob", "d = 2\nbody = ellipsoid:2,1,1", "mattila = maybe"])
def test_bad_config(text):
    with pytest.raises(ConfigError):
        parse_config(text)


def test_one_row_matches_direct_calls():
    cfg = parse_config("d = 3\nq = 10\nbody = ellipsoid:2,1,1\n")
    row = run_sweep(cfg).rows[0]
    body = parse_body("ellipsoid:2,1,1", 3)
    hist = shell_histogram(body, 10, delta=1 / 20)
    prof = build_profile(hist, body)
    assert row.total == hist.total
    assert (row.D_A, row.D_K) == mean_square(prof)
    assert row.l2nu == l2_weighted_nu(prof)
    assert row.distinct == distinct_distances(hist)
    assert row.error == ""


def _same(a: Row, b: Row):
    for k, va in vars(a).items():
        vb = getattr(b, k)
        if isinstance(va, float) and math.isnan(va):
            assert math.isnan(vb), k
        else:
            assert va == vb, k


def test_sweep_resume_and_reproducibility(tmp_path):
    cfg = parse_config("d = 2,3\nq = 8, 12, 16\nbody = ball\nbody = superellipsoid:4\n")
    out = tmp_path / "sweep.csv"
    full = run_sweep(cfg, out)
    assert len(full.rows) == 12
    assert out.read_text().startswith("# dims=2,3")
    # drop the last rows to simulate an interrupted run
    lines = out.read_text().splitlines(keepends=True)
    out.write_text("".join(lines[:-5]))
    seen = []
    resumed = run_sweep(cfg, out, progress=seen.append)
    assert len(seen) == 5
    for a, b in zip(full.rows, resumed.rows):
        _same(a, b)
    assert full.slopes.keys() == resumed.slopes.keys()
    for k in full.slopes:
        assert full.slopes[k] == pytest.approx(resumed.slopes[k], rel=1e-12)
    # rerunning a single row matches the stored row exactly
    _same(compute_row(3, 12, "superellipsoid:4", cfg), resumed.rows[-2])
    assert len(out.read_text().splitlines()) == len(lines)


def test_optional_columns():
    cfg = parse_config("d = 2\nq = 8\nbody = ellipsoid:2,1\nmattila = yes\nduality = yes\n")
    row = run_sweep(cfg).rows[0]
    assert np.isfinite(row.mattila_ratio) and 1 / 3 <= row.duality_ratio <= 3


def test_cli_exit_codes(tmp_path, capsys):
    assert main(["enumerate", "--body", "ball", "--d", "2", "--q", "5"]) == 0
    assert "80 nonzero points" in capsys.readouterr().out
    assert main(["enumerate", "--body", "blob", "--d", "2", "--q", "5"]) == 2
    assert main(["--budget", "100", "enumerate", "--body", "ball", "--d", "4", "--q", "50"]) == 3
    assert main(["enumerate", "--body", "ball", "--d", "4", "--q", "50", "--budget", "100"]) == 3
    bad = tmp_path / "bad.cfg"
    bad.write_text("q = nope\n")
    assert main(["sweep", "--config", str(bad)]) == 2
    assert main(["check", "--config", str(tmp_path / "missing.cfg")]) == 2


def test_cli_outputs(tmp_path):
    out = tmp_path / "h.csv"
    assert main(["enumerate", "--body", "ball", "--d", "2", "--q", "6", "--out", str(out)]) == 0
    assert out.read_text().splitlines()[0] == "k,t_lo,t_hi,count"
    prof = tmp_path / "p.csv"
    assert main(["profile", "--body", "ellipsoid:2,1", "--q", "8", "--out", str(prof)]) == 0
    assert prof.read_text().splitlines()[0] == "t,nu0,N0,E0,nu_w,E_w"
    fal = tmp_path / "f.csv"
    assert main(["falconer", "--body", "ball", "--d", "4", "--q", "8", "--s", "2", "--out", str(fal)]) == 0
    assert len(fal.read_text().splitlines()) == 2
    ser = tmp_path / "s.csv"
    assert main(["poisson", "--body", "ball", "--d", "2", "--q", "16", "--t", "7.7", "--R", "16,32",
                 "--out", str(ser)]) == 0
    assert ser.read_text().splitlines()[0] == "t,value,R"
    cfg = tmp_path / "c.cfg"
    cfg.write_text("d = 2\nq = 8,12,16\nbody = ball\n")
    sw = tmp_path / "sw.csv"
    assert main(["sweep", "--config", str(cfg), "--out", str(sw)]) == 0
    assert len([ln for ln in sw.read_text().splitlines() if not ln.startswith("#")]) == 4


def test_check_subsets(capsys):
    assert main(["check", "--criteria", ""]) == 0
    assert "0/0 criteria passed" in capsys.readouterr().out
    assert main(["check", "--criteria", "1,2"]) == 0
    out = capsys.readouterr().out
    assert "[PASS]  1" in out and "[PASS]  2" in out


def test_check_corrupted_volume_fails(capsys):
    assert main(["check", "--criteria", "14", "--corrupt-volume", "1.05"]) == 1
    assert "[FAIL] 14" in capsys.readouterr().out
