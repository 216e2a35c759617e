import numpy as np
import pytest

from mcpreamble import (
    CurveSpec,
    ExperimentConfig,
    preset,
    preset_names,
    run_experiment,
    write_csv,
)

SMALL = dict(n_channels=6, n_noise=8)


def read_bytes(path):
    with open(path, "rb") as fh:
        return fh.read()


def test_preset_names_complete():
    names = preset_names()
    assert "fig1a" in names and "fig8b" in names
    assert len(names) == 13


def test_preset_scales():
    desk = preset("fig1a", scale="desk")
    paper = preset("fig1a", scale="paper")
    assert (desk.M, desk.L_h) == (128, 8)
    assert (paper.M, paper.L_h) == (1024, 32)
    assert paper.n_channels > desk.n_channels
    with pytest.raises(ValueError):
        preset("fig99")


def test_preset_overrides():
    cfg = preset("fig5", scale="desk", M=64, L_h=4, seed=9, n_channels=3,
                 n_noise=4, ebn0_db=(5.0, 15.0))
    assert cfg.M == 64 and cfg.L_h == 4 and cfg.seed == 9
    assert cfg.ebn0_db == (5.0, 15.0)
    assert cfg.E == 64.0


def test_runs_are_deterministic(tmp_path):
    cfg = preset("fig1b", scale="desk", **SMALL)
    a = tmp_path / "a.csv"
    b = tmp_path / "b.csv"
    write_csv(run_experiment(cfg), a, cfg.name)
    write_csv(run_experiment(cfg), b, cfg.name)
    assert read_bytes(a) == read_bytes(b)


def test_parallel_equals_serial(tmp_path):
    serial = preset("fig4b", scale="desk", **SMALL)
    parallel = preset("fig4b", scale="desk", workers=2, **SMALL)
    a = tmp_path / "serial.csv"
    b = tmp_path / "parallel.csv"
    write_csv(run_experiment(serial), a, serial.name)
    write_csv(run_experiment(parallel), b, parallel.name)
    assert read_bytes(a) == read_bytes(b)


def test_seed_changes_output(tmp_path):
    c1 = preset("fig1a", scale="desk", **SMALL)
    c2 = preset("fig1a", scale="desk", seed=43, **SMALL)
    r1 = run_experiment(c1)
    r2 = run_experiment(c2)
    assert not np.array_equal(r1[0].nmse, r2[0].nmse)


def test_csv_format(tmp_path):
    cfg = preset("fig6", scale="desk", n_channels=3, n_noise=4,
                 ebn0_db=(10.0, 40.0))
    curves = run_experiment(cfg)
    path = tmp_path / "out.csv"
    write_csv(curves, path, cfg.name)
    lines = read_bytes(path).decode().splitlines()
    assert lines[0] == ("preset,scheme,preamble,ebn0_db,nmse_db,nmse_linear,"
                        "predicted_db,floor_db,stderr_db,n_samples")
    assert len(lines) == 1 + len(curves) * len(cfg.ebn0_db)
    first = lines[1].split(",")
    assert first[0] == "fig6" and first[1] == "oqam"
    # the scenario-3 curve reports a finite floor, the clean comb none
    floors = {ln.split(",")[2]: ln.split(",")[7] for ln in lines[1:]}
    assert floors["sparse"] == "-inf"
    assert float(floors["sparse-data-3"]) > -60


def test_mc_tracks_closed_form_mid_snr():
    cfg = preset("fig1b", scale="desk", n_channels=12, n_noise=12,
                 ebn0_db=(15.0,))
    for cu in run_experiment(cfg):
        assert abs(cu.nmse_db[0] - cu.predicted_db[0]) < 0.35


def test_equalized_pair_converges():
    # fig2b equalizes the 2 L_h comb to the L_h comb's training power,
    # so both projected estimates share one curve
    cfg = preset("fig2b", scale="desk", n_channels=12, n_noise=10,
                 ebn0_db=(20.0,))
    a, b = run_experiment(cfg)
    assert abs(a.nmse_db[0] - b.nmse_db[0]) < 0.3


def test_same_gain_pair_separates_by_3db():
    cfg = preset("fig2a", scale="desk", n_channels=12, n_noise=10,
                 ebn0_db=(20.0,))
    a, b = run_experiment(cfg)
    assert abs((a.nmse_db[0] - b.nmse_db[0]) - 3.01) < 0.35


def test_experiment_config_system():
    cfg = ExperimentConfig(
        name="x", scale="desk", M=64, L_h=8, K=4, E=64.0,
        curves=(CurveSpec(label="a", system="cpofdm", family="sparse",
                          estimator="projected", n_pilots=8),),
        ebn0_db=(0.0,), n_channels=1, n_noise=1, seed=1)
    assert cfg.system.M == 64
    assert cfg.with_(M=128).system.M == 128
