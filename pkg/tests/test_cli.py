import numpy as np
import pytest

from tkrylov import cli
from tkrylov.oracles import dense_solve_one_sided
from tkrylov.imaging import relative_error, snr
from tkrylov.tensor_core import frob_norm, load_t3


def run(*args):
    return cli.main([str(a) for a in args])


def test_degrade_then_exact_restore(tmp_path):
    out = tmp_path / "d"
    assert run("degrade", "--n", 16, "--sigma", 0.7, "--band-r", 2, "--nu", 0, "--out", out, "--no-figures") == 0
    assert run("restore", "--in", out, "--m", "full", "--mu", 0, "--iter-max", 1, "--no-figures") == 0
    X_hat, X = load_t3(out / "X_hat.t3"), load_t3(out / "restored.t3")
    assert frob_norm(X - X_hat) / frob_norm(X_hat) < 1e-6


def test_degrade_metadata_and_determinism(tmp_path):
    for name in ("a", "b"):
        assert run("degrade", "--n", 16, "--nu", 1e-2, "--seed", 5, "--out", tmp_path / name, "--no-figures") == 0
    meta = cli.read_kv(tmp_path / "a" / "meta.txt")
    C_hat, N = load_t3(tmp_path / "a" / "C_hat.t3"), load_t3(tmp_path / "a" / "N.t3")
    assert float(meta["eps"]) == pytest.approx(1e-2 * frob_norm(C_hat), rel=1e-14)
    assert float(meta["eps"]) == pytest.approx(frob_norm(N), rel=1e-14)
    for f in ("C.t3", "N.t3", "C_hat.t3", "X_hat.t3", "degraded.ppm"):
        assert (tmp_path / "a" / f).read_bytes() == (tmp_path / "b" / f).read_bytes()


@pytest.mark.parametrize("solver", ["gmres", "ggkb"])
def test_restore_report_self_consistent(tmp_path, solver):
    d = tmp_path / "d"
    assert run("degrade", "--n", 32, "--sigma", 2, "--band-r", 4, "--out", d) == 0
    assert (d / "degrade.png").exists()
    out = tmp_path / solver
    assert run("restore", "--in", d, "--solver", solver, "--out", out) == 0
    rep = cli.read_kv(out / "report.txt")
    X, X_hat, C = load_t3(out / "restored.t3"), load_t3(d / "X_hat.t3"), load_t3(d / "C.t3")
    assert rep["method"] == solver
    assert abs(float(rep["snr"]) - snr(X, X_hat)) <= 1e-12 * abs(snr(X, X_hat))
    assert abs(float(rep["relative_error"]) - relative_error(X, X_hat)) <= 1e-12
    assert float(rep["snr"]) > float(rep["degraded_snr"])
    for key in ("wall_time", "mu", "m", "residual_norm", "eps"):
        assert key in rep
    assert (out / "report.png").exists() and (out / "restored.ppm").exists()
    if solver == "ggkb":
        eps = float(rep["eps"])
        assert float(rep["gauss"]) <= float(rep["radau"]) <= 1.1**2 * eps**2
        assert float(rep["residual_norm"]) ** 2 == pytest.approx(float(rep["radau"]), rel=1e-8)


def test_full_gmres_matches_dense_oracle(tmp_path):
    d = tmp_path / "d"
    assert run("degrade", "--n", 8, "--sigma", 0.8, "--band-r", 1, "--nu", 1e-3, "--out", d, "--no-figures") == 0
    assert run("restore", "--in", d, "--m", "full", "--mu", 0, "--iter-max", 1, "--no-figures") == 0
    meta = cli.read_kv(d / "meta.txt")
    op = cli.make_operator("cross", 8, 8, 3, 0.8, 1, 0.8, 0.1, 0.1)
    C = load_t3(d / "C.t3")
    # the two-sided operator as one-sided: X ⋆ B with B = A1' in slice 1 is a right
    # multiplication per slice, so solve it densely via the transposed problem
    A1 = op.B[:, :, 0].T
    Y = np.stack([np.linalg.solve(A1, C[:, :, k].T).T for k in range(3)], axis=2)
    ref = dense_solve_one_sided(op.A, Y)
    X = load_t3(d / "restored.t3")
    assert frob_norm(X - ref) / frob_norm(ref) < 1e-8
    assert meta["blur"] == "cross"


def test_config_file_and_override(tmp_path):
    cfgfile = tmp_path / "exp.cfg"
    cfgfile.write_text("# settings\nsigma = 1.5   # blur width\nband-r = 3\nnu = 0.01\nsolver = ggkb\n")
    args = cli.make_parser().parse_args(["degrade", "--config", str(cfgfile), "--nu", "0.02"])
    cfg = cli.build_config(args)
    assert (cfg.sigma, cfg.band_r, cfg.nu, cfg.solver) == (1.5, 3, 0.02, "ggkb")
    defaults = cli.build_config(cli.make_parser().parse_args(["degrade"]))
    assert (defaults.sigma, defaults.band_r, defaults.eta, defaults.tol, defaults.m, defaults.iter_max) == (
        4.0, 6, 1.1, 1e-6, "10", 10)


@pytest.mark.parametrize("text", ["bogus = 1\n", "sigma 3\n", "sigma = abc\n", "m = -2\n"])
def test_config_errors_exit_2(tmp_path, text):
    cfgfile = tmp_path / "bad.cfg"
    cfgfile.write_text(text)
    assert run("degrade", "--config", cfgfile, "--out", tmp_path / "o") == 2


def test_exit_codes(tmp_path):
    assert run("restore", "--in", tmp_path / "missing") == 2
    assert run("degrade", "--sigma", -1) == 2
    d = tmp_path / "d"
    assert run("degrade", "--n", 16, "--nu", 0, "--out", d, "--no-figures") == 0
    # the discrepancy principle needs a positive noise bound
    assert run("restore", "--in", d, "--solver", "ggkb") == 2
    # m_max too small to satisfy the discrepancy principle
    d2 = tmp_path / "d2"
    assert run("degrade", "--n", 16, "--nu", 1e-4, "--out", d2, "--no-figures") == 0
    assert run("restore", "--in", d2, "--solver", "ggkb", "--m-max", 2, "--no-figures") == 3


def test_frames_roundtrip(tmp_path, rng):
    from tkrylov.imaging import save_frames

    save_frames([rng.uniform(size=(8, 8, 3)) for _ in range(2)], tmp_path / "clip")
    d = tmp_path / "d"
    assert run("degrade", "--in", tmp_path / "clip", "--sigma", 1, "--band-r", 2, "--out", d, "--no-figures") == 0
    assert cli.read_kv(d / "meta.txt")["blur"] == "within"
    assert run("restore", "--in", d, "--no-figures") == 0
    assert len(list((d / "restored").glob("frame_*.ppm"))) == 2


def test_validate_and_perturbed(capsys):
    assert run("validate") == 0
    assert "9/9 checks passed" in capsys.readouterr().out
    assert run("validate", "--perturb-hessenberg") == 3
    out = capsys.readouterr().out
    assert "FAIL\tarnoldi_relations" in out


def test_bench_table(tmp_path, capsys):
    assert run("bench", "--out", tmp_path, "--n", 16, "--nu", 1e-3, "--no-figures") == 0
    lines = (tmp_path / "bench.tsv").read_text().splitlines()
    assert lines[0].split("\t")[:5] == ["image", "nu", "method", "snr", "relative_error"]
    assert len(lines) == 1 + 3 * 2
