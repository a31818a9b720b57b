import filecmp
import json
import os

import numpy as np
import pytest

from overparam import experiments as E
from overparam._parallel import ordered_map, worker_count
from overparam.concentration import gram_concentration_trial
from overparam.data import gen_gaussian_sphere
from overparam.errors import InputError


@pytest.fixture(scope="module")
def convergence():
    return E.run(E.preset("convergence"))


def test_convergence_preset_passes(convergence):
    assert convergence.passed
    assert convergence.summary["eta"] == pytest.approx(0.5 / 256, rel=1e-12)
    assert {v.check for v in convergence.verdicts} == {"loss_le_2x_rate_bound", "loss_monotone_after_step_5"}


def test_zero_step_size_fails_monotone_check():
    rep = E.run(E.preset("convergence", eta=0.0, steps=20))
    assert not rep.verdict("loss_monotone_after_step_5").passed
    assert rep.verdict("loss_le_2x_rate_bound").passed


def test_doubling_width_never_worsens_verdicts():
    for seed in range(5):
        narrow = E.run(E.preset("convergence", seed=seed))
        wide = E.run(E.preset("convergence", seed=seed, m=4096))
        for v in narrow.verdicts:
            assert wide.verdict(v.check).passed >= v.passed


def test_regularized_zero_beta_matches_convergence(convergence):
    rep = E.run(E.preset("regularized", reg_beta=0.0))
    assert rep.trace.loss_sq == convergence.trace.loss_sq
    assert rep.trace.max_move == convergence.trace.max_move


def test_regularized_preset_passes():
    rep = E.run(E.preset("regularized"))
    assert rep.passed
    assert rep.config.reg_beta <= rep.summary["reg_beta_max"]


def test_regularized_rejects_large_beta():
    with pytest.raises(InputError, match="violates"):
        E.run(E.preset("regularized", reg_beta=1e4))


def test_eigen_prediction_small_run():
    cfg = E.preset("eigen-prediction", m=2048, steps=120)
    rep = E.run(cfg)
    kappa, n = cfg.kappa, 16
    for name in ("top", "random"):
        measured0 = np.sqrt(rep.traces[name].loss_sq[0])
        assert abs(measured0 - rep.predictions[name].values[0]) <= kappa * np.sqrt(n) * 10
    assert rep.verdict("top_eigvec_faster_than_random_at_k100").passed


def test_prediction_independent_of_width():
    a = E.run(E.preset("eigen-prediction", m=256, steps=30))
    b = E.run(E.preset("eigen-prediction", m=512, steps=30))
    np.testing.assert_array_equal(a.predictions["top"].values, b.predictions["top"].values)


def test_appendix_b_small():
    rep = E.run_appendix_b([20, 40], d=50, fig2_n=10, fig2_d=5, fig2_samples=50)
    assert rep.passed
    header, rows = rep.tables["fig1"]
    assert header == ("n", "lambda", "theta") and [r[0] for r in rows] == [20, 40]
    assert len(rep.tables["fig2"][1]) == 50


def test_report_layout_and_determinism(tmp_path):
    cfg = E.preset("convergence", steps=30)
    a, b = tmp_path / "a", tmp_path / "b"
    E.write_report(E.run(cfg), a)
    E.write_report(E.run(cfg), b)
    names = sorted(os.listdir(a))
    assert {"config.json", "verdicts.csv", "trace_main.csv", "bound_main.csv"} <= set(names)
    assert filecmp.cmpfiles(a, b, names, shallow=False)[0] == names
    assert (a / "verdicts.csv").read_text().splitlines()[0] == "check,pass,measured,threshold"
    cfg2 = E.ExperimentConfig.from_dict(json.loads((a / "config.json").read_text()))
    assert cfg2 == cfg


def test_config_rejects_unknown_keys():
    with pytest.raises(InputError):
        E.ExperimentConfig.from_dict({"name": "convergence", "width": 3})


def test_unknown_preset():
    with pytest.raises(InputError):
        E.preset("nope")


def test_resolve_eta_explicit_and_bad():
    X = np.eye(3)
    c = E.constants_for(X, 0.1, 10, 0)
    assert E.resolve_eta(0.1, X, c)[0] == 0.1
    assert E.resolve_eta("0.25", X, c)[0] == 0.25
    with pytest.raises(InputError):
        E.resolve_eta("fast", X, c)


def test_parallel_results_independent_of_workers(monkeypatch):
    X = gen_gaussian_sphere(6, 4, seed=0).X
    serial = ordered_map(lambda i: i * i, range(10), workers=1)
    assert ordered_map(lambda i: i * i, range(10), workers=4) == serial
    monkeypatch.setenv("OVERPARAM_THREADS", "1")
    assert worker_count() == 1
    r1 = gram_concentration_trial(X, 300, 6, seed=5)
    monkeypatch.setenv("OVERPARAM_THREADS", "4")
    assert worker_count() == 4
    r4 = gram_concentration_trial(X, 300, 6, seed=5)
    np.testing.assert_array_equal(r1.values, r4.values)
