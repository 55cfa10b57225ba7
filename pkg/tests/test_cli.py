import hashlib
import json
import subprocess
import sys

import numpy as np
import pytest

from lrstv import io, metrics
from lrstv.cli import EXIT_ERROR, EXIT_NOT_CONVERGED, EXIT_OK, build_parser, main
from lrstv.fixtures import synthetic_cube


def digest(path):
    return hashlib.sha256(path.read_bytes()).hexdigest()


@pytest.fixture(scope="module")
def workdir(tmp_path_factory):
    d = tmp_path_factory.mktemp("cli")
    assert main(["fixture", "--output", str(d / "clean.hsi")]) == EXIT_OK
    assert main(["simulate", "--input", str(d / "clean.hsi"), "--case", "5", "--seed", "1",
                 "--output", str(d / "noisy.hsi"), "--report", str(d / "sim.json")]) == EXIT_OK
    return d


def test_fixture_matches_library(workdir):
    np.testing.assert_array_equal(io.read_cube(workdir / "clean.hsi"),
                                  synthetic_cube(seed=0).astype(np.float32))


def test_simulate_case1_anchor(tmp_path):
    src = tmp_path / "big.hsi"
    main(["fixture", "--output", str(src), "--shape", "64", "64", "8"])
    rc = main(["simulate", "--input", str(src), "--case", "1", "--seed", "0",
               "--output", str(tmp_path / "n.hsi"), "--report", str(tmp_path / "r.json")])
    assert rc == EXIT_OK
    rep = json.loads((tmp_path / "r.json").read_text())
    assert abs(rep["metrics"]["mpsnr"] - 20.0) <= 0.15
    assert rep["noise_spec"]["gaussian_sigma"] == 0.1


def test_simulate_deterministic(workdir, tmp_path):
    out = tmp_path / "again.hsi"
    main(["simulate", "--input", str(workdir / "clean.hsi"), "--case", "5", "--seed", "1",
          "--output", str(out), "--report", str(tmp_path / "r.json")])
    assert digest(out) == digest(workdir / "noisy.hsi")


def test_simulate_bad_case(workdir, tmp_path, capsys):
    rc = main(["simulate", "--input", str(workdir / "clean.hsi"), "--case", "10",
               "--output", str(tmp_path / "x.hsi")])
    assert rc == EXIT_ERROR
    assert "1..9" in capsys.readouterr().err
    assert not (tmp_path / "x.hsi").exists()


def test_simulate_from_spec_and_unit_scale(workdir, tmp_path, capsys):
    spec = tmp_path / "spec.json"
    spec.write_text(json.dumps({"gaussian_sigma": 0.05, "seed": 3}))
    scaled = tmp_path / "wide.hsi"
    io.write_cube(scaled, 100 * io.read_cube(workdir / "clean.hsi") - 7)
    args = ["simulate", "--input", str(scaled), "--spec", str(spec), "--output", str(tmp_path / "n.hsi")]
    assert main(args) == EXIT_ERROR
    assert "[0, 1]" in capsys.readouterr().err
    assert main(args + ["--unit-scale"]) == EXIT_OK
    rep = json.loads(capsys.readouterr().out)
    assert rep["noise_spec"]["seed"] == 3
    assert abs(rep["metrics"]["mpsnr"] - 26.02) < 0.3


def test_denoise_default_run(workdir, tmp_path):
    rc = main(["denoise", "--input", str(workdir / "noisy.hsi"), "--truth", str(workdir / "clean.hsi"),
               "--output-l", str(tmp_path / "L.hsi"), "--output-s", str(tmp_path / "S.hsi"),
               "--trace", str(tmp_path / "trace.csv"), "--report", str(tmp_path / "d.json")])
    rep = json.loads((tmp_path / "d.json").read_text())
    trace = io.read_csv(tmp_path / "trace.csv")
    assert rc == (EXIT_OK if rep["converged"] else EXIT_NOT_CONVERGED)
    last = trace[-1]
    assert len(trace) == rep["iterations"] <= 100
    assert rep["converged"] == (max(last["residual_fit"], last["residual_split"]) <= rep["epsilon"])
    assert rep["restored"]["mpsnr"] - rep["noisy"]["mpsnr"] >= 10
    assert set(trace[0]) == set(io.TRACE_TRUTH_COLUMNS)
    assert io.read_cube(tmp_path / "S.hsi").shape == (32, 32, 16)


def test_sstv_equals_alpha_zero(workdir, tmp_path):
    common = ["denoise", "--input", str(workdir / "noisy.hsi"), "--max-iters", "20",
              "--report", str(tmp_path / "r.json")]
    main(common + ["--method", "sstv", "--output-l", str(tmp_path / "a.hsi")])
    main(common + ["--alpha", "0", "--output-l", str(tmp_path / "b.hsi")])
    a, b = io.read_cube(tmp_path / "a.hsi"), io.read_cube(tmp_path / "b.hsi")
    assert np.max(np.abs(a - b)) <= 1e-10


def test_max_iters_zero(workdir, tmp_path):
    rc = main(["denoise", "--input", str(workdir / "noisy.hsi"), "--max-iters", "0",
               "--output-l", str(tmp_path / "L.hsi"), "--trace", str(tmp_path / "t.csv"),
               "--report", str(tmp_path / "r.json")])
    assert rc == EXIT_NOT_CONVERGED
    assert digest(tmp_path / "L.hsi") == digest(workdir / "noisy.hsi")
    assert io.read_csv(tmp_path / "t.csv") == []


@pytest.mark.parametrize("flags,msg", [
    (["--rank3", "99"], "--rank3"),
    (["--tau", "-1"], "tau"),
    (["--epsilon", "0"], "--epsilon"),
    (["--max-iters", "-2"], "--max-iters"),
    (["--lambda-c", "-3"], "--lambda-c"),
    (["--spatial-rank-ratio", "1.5"], "--spatial-rank-ratio"),
    (["--rho", "0.5"], "rho"),
])
def test_denoise_invalid_params(workdir, tmp_path, capsys, flags, msg):
    rc = main(["denoise", "--input", str(workdir / "noisy.hsi"),
               "--output-l", str(tmp_path / "L.hsi")] + flags)
    assert rc == EXIT_ERROR
    assert msg in capsys.readouterr().err
    assert not (tmp_path / "L.hsi").exists()


def test_denoise_missing_input(tmp_path, capsys):
    rc = main(["denoise", "--input", str(tmp_path / "nope.hsi"), "--output-l", str(tmp_path / "L.hsi")])
    assert rc == EXIT_ERROR
    assert "nope.hsi" in capsys.readouterr().err


def test_eval_identity_and_report(workdir, tmp_path, capsys):
    clean, noisy = workdir / "clean.hsi", workdir / "noisy.hsi"
    assert main(["eval", "--ref", str(clean), "--test", str(clean)]) == EXIT_OK
    rep = json.loads(capsys.readouterr().out)
    assert rep["mpsnr"] == metrics.PSNR_CAP and rep["mssim"] == pytest.approx(1.0)
    assert rep["ergas"] == 0
    main(["eval", "--ref", str(clean), "--test", str(noisy), "--output", str(tmp_path / "e.json")])
    got = json.loads((tmp_path / "e.json").read_text())
    want = metrics.report(io.read_cube(clean), io.read_cube(noisy)).to_dict()
    for key in want:
        np.testing.assert_allclose(got[key], want[key], rtol=1e-12)


def test_eval_csv_round_trip(workdir, tmp_path):
    clean, noisy = workdir / "clean.hsi", workdir / "noisy.hsi"
    main(["eval", "--ref", str(clean), "--test", str(noisy), "--format", "csv",
          "--output", str(tmp_path / "e.csv")])
    rows = io.read_csv(tmp_path / "e.csv")
    want = metrics.report(io.read_cube(clean), io.read_cube(noisy))
    assert [r["band"] for r in rows[:-1]] == list(range(1, 17))
    np.testing.assert_allclose([r["psnr"] for r in rows[:-1]], want.per_band_psnr, rtol=1e-12)
    np.testing.assert_allclose([r["ssim"] for r in rows[:-1]], want.per_band_ssim, rtol=1e-12)
    mean = rows[-1]
    assert mean["band"] == "mean"
    for key in ("mpsnr", "mssim", "ergas", "sam"):
        col = {"mpsnr": "psnr", "mssim": "ssim"}.get(key, key)
        assert abs(mean[col] - getattr(want, key)) <= 1e-12 * abs(getattr(want, key))


def test_eval_dimension_mismatch(workdir, tmp_path, capsys):
    other = tmp_path / "o.hsi"
    io.write_cube(other, np.zeros((32, 32, 4)))
    assert main(["eval", "--ref", str(workdir / "clean.hsi"), "--test", str(other)]) == EXIT_ERROR
    assert "mismatch" in capsys.readouterr().err


def test_analyze(workdir, tmp_path):
    rc = main(["analyze", "--input", str(workdir / "clean.hsi"), "--spectra", str(tmp_path / "s.csv"),
               "--histogram", str(tmp_path / "h.csv"), "--verify", "30", "--seed", "2",
               "--report", str(tmp_path / "a.json")])
    assert rc == EXIT_OK
    rep = json.loads((tmp_path / "a.json").read_text())
    assert rep["verification"]["all_passed"] and rep["verification"]["lemma_trials"] == 30
    assert rep["effective_rank"]["fourier_1"] <= rep["effective_rank"]["plain_1"]
    rows = io.read_csv(tmp_path / "s.csv")
    assert {r["domain"] for r in rows} == {"plain", "fourier"}
    assert sum(r["count"] for r in io.read_csv(tmp_path / "h.csv")) == 3 * 32 * 32 * 16


def test_analyze_needs_work(capsys):
    assert main(["analyze"]) == EXIT_ERROR
    assert "nothing to do" in capsys.readouterr().err


def test_help_lists_flags_and_defaults():
    parser = build_parser()
    sub = parser._subparsers._group_actions[0].choices
    text = " ".join(sub["denoise"].format_help().split())
    for flag in ("--input", "--output-l", "--output-s", "--method", "--tau", "--alpha", "--lambda-c",
                 "--rank3", "--epsilon", "--max-iters", "--trace", "--truth"):
        assert flag in text
    for default in ("0.01", "0.3", "10.0", "3", "1e-06", "100", "1.5", "tdlrstv"):
        assert f"(default: {default})" in text
    assert "default: None" not in text
    top = " ".join(parser.format_help().split())
    assert "Exit codes" in top and "3 ``denoise`` stopped at ``--max-iters``" in top


def test_usage_error_exit_code():
    with pytest.raises(SystemExit) as exc:
        main(["denoise", "--bogus"])
    assert exc.value.code == 2


def test_console_entry_point(workdir):
    out = subprocess.run([sys.executable, "-m", "lrstv.cli", "eval", "--ref", str(workdir / "clean.hsi"),
                          "--test", str(workdir / "clean.hsi")], capture_output=True, text=True)
    assert out.returncode == 0
    assert json.loads(out.stdout)["mpsnr"] == 100.0
