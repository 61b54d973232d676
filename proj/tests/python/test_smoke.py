import json

import numpy as np
import pytest

import caldec


def bike_utility():
    return caldec.LinearUtility.scaled(0.9, [0.8, 1.0, 1.2], [0.02, 0.05, 0.1])


def random_sample(rng, n):
    forecasts = rng.uniform(0.0, 1.0, size=(n, 1))
    outcomes = rng.uniform(0.0, 1.0, size=(n, 1))
    return caldec.Sample(forecasts, outcomes)


def test_utility_surface():
    u = bike_utility()
    assert u.dimension == 1
    assert u.num_actions == 3
    assert u.lipschitz == pytest.approx(0.9 * 1.2)
    assert u.label(0)
    for v in np.linspace(0.0, 1.0, 21):
        p = np.array([v])
        value, action = caldec.val(u, p)
        assert action == caldec.best_response(u, p)
        best = max(caldec.utility(u, a, p) for a in range(u.num_actions))
        assert value == pytest.approx(best, abs=1e-12)
    kinks = caldec.breakpoints_1d(u)
    assert kinks[0] == 0.0 and kinks[-1] == 1.0


def test_general_utility_ctor():
    u = caldec.LinearUtility(2, [("hold", np.array([0.0, 0.0]), 0.1),
                                 ("move", np.array([1.0, -0.5]), 0.0)])
    assert u.num_actions == 2
    assert caldec.utility(u, 1, np.array([1.0, 0.0])) == pytest.approx(1.0)


def test_audit_and_recalibrate():
    rng = np.random.default_rng(5)
    sample = random_sample(rng, 120)
    tests = caldec.build_bin_class(caldec.Partition.uniform(4))
    report = caldec.audit(tests, sample, 1e-8)
    assert report.moments.shape == (4, 1)
    assert report.max_norm > 1e-4
    assert not report.ok
    fixed = caldec.recalibrate_sample(tests, sample)
    again = caldec.audit(tests, fixed, 1e-8)
    assert again.max_norm <= 1e-10
    assert again.ok
    np.testing.assert_allclose(fixed.forecasts, sample.forecasts)


def test_dual_policy_adversary_coherence():
    rng = np.random.default_rng(11)
    u = bike_utility()
    sample = random_sample(rng, 60)
    tests = caldec.build_coordinate_class(1)
    dual = caldec.solve_dual(u, tests, sample, 0.0)
    assert dual.converged
    assert dual.lam.shape == (1, 1)

    policy = caldec.dual_policy(u, tests, dual)
    assert policy.mode == "dual"
    lp = caldec.robust_value_lp(u, tests, sample, 0.0)
    assert lp.status == "optimal"
    wc = caldec.worst_case_for_policy(u, tests, sample, policy, 0.0)
    assert wc.value <= lp.value + 1e-7
    gap = caldec.saddle_gap(u, tests, sample, 0.0, dual)
    assert -1e-7 <= gap <= 1e-4
    assert lp.points.shape == (len(sample), 1)
    assert abs(float(lp.residuals.sum())) <= 1e-7


def test_python_callable_policy():
    rng = np.random.default_rng(17)
    u = bike_utility()
    sample = random_sample(rng, 40)
    tests = caldec.build_bin_class(caldec.Partition.uniform(3))
    face = sum(
        w * caldec.utility(u, 2, v)
        for w, v in zip(sample.weights, sample.forecasts)
    )
    wc = caldec.worst_case_for_policy(u, tests, sample, lambda v: 2, 0.0)
    assert wc.status == "optimal"
    assert wc.value <= face + 1e-9


def test_decision_collapse_and_policy_json():
    rng = np.random.default_rng(23)
    u = bike_utility()
    tests = caldec.build_decision_class(u)
    sample = caldec.recalibrate_sample(tests, random_sample(rng, 80))
    check = caldec.collapse_check(u, tests, sample, 1e-7)
    assert check.is_collapsed
    assert check.structural
    assert check.missing == []

    policy = caldec.collapse_policy(u, tests)
    assert policy.mode == "collapse"
    clone = caldec.policy_from_json(policy.to_json())
    for v in np.linspace(0.0, 1.0, 17):
        p = np.array([v])
        assert policy.action(p) == caldec.best_response(u, p)
        assert clone.action(p) == policy.action(p)
        np.testing.assert_allclose(policy.belief(p), p)


def test_bin_policies():
    rng = np.random.default_rng(29)
    u = bike_utility()
    bins = caldec.Partition.uniform(5)
    assert bins.num_bins == 5
    assert bins.locate(np.array([0.35])) == 1
    sample = random_sample(rng, 100)
    plain = caldec.bin_policy(u, bins, sample)
    shrunk = caldec.eps_bin_policy(u, bins, sample, 0.02)
    assert plain.mode == "bin" and shrunk.mode == "bin"
    v = np.array([0.5])
    assert 0 <= plain.action(v) < u.num_actions
    assert shrunk.belief(v).shape == (1,)


def test_forecaster_moments():
    rng = np.random.default_rng(31)
    x = rng.uniform(-2.0, 2.0, size=(200, 2))
    y = np.sin(2.0 * x[:, 0]) + 0.3 * x[:, 1] + rng.normal(0.0, 0.3, size=200)
    f = caldec.train_forecaster(x, y, 16, 7)
    assert f.width == 16
    pred = f.predict(x)
    assert pred.min() >= 0.0 and pred.max() <= 1.0
    raw = f.predict_raw(x)
    resid = np.array([f.rescale_target(t) for t in y]) - raw
    assert abs(resid.mean()) <= 1e-8
    assert abs(np.mean(raw * resid)) <= 1e-8
    with pytest.raises(ValueError):
        f.predict(np.zeros((4, 3)))


def test_inner_minimize_and_moments():
    u = bike_utility()
    p, objective, action = caldec.inner_minimize(u, np.array([2.0]))
    assert p[0] == 0.0
    assert objective == pytest.approx(caldec.val(u, p)[0] + 2.0 * p[0])
    assert 0 <= action < u.num_actions

    rng = np.random.default_rng(37)
    sample = random_sample(rng, 50)
    tests = caldec.build_coordinate_class(1)
    moments = caldec.compute_moments(tests, sample)
    identity = caldec.compute_moments(tests, sample, sample.forecasts)
    assert moments.shape == (1, 1)
    np.testing.assert_allclose(identity, 0.0, atol=1e-14)


def test_experiment_pipeline(tmp_path):
    csv = caldec.synth_bike(3, 240)
    path = tmp_path / "bike.csv"
    path.write_text(csv)
    config = {
        "dataset": {"path": str(path), "target": "cnt"},
        "utility": {"alpha": 0.9, "multipliers": [0.8, 1.0, 1.2], "costs": [0.02, 0.05, 0.1]},
        "test_class": {"bins": 6},
        "seed": 4,
        "width": 16,
    }
    report = json.loads(caldec.run_experiment(config))
    assert report["dataset"] == "bike"
    cells = report["cells"]
    for regime in ("iid", "adversary_vs_plugin", "adversary_vs_robust"):
        assert set(cells[regime]) == {"plugin", "robust"}
    assert cells["adversary_vs_robust"]["robust"] >= cells["adversary_vs_robust"]["plugin"] - 1e-9
    assert report["rows"]["train"] + report["rows"]["calibration"] + report["rows"]["test"] == 240
    assert report["policy_mode"] in ("collapse", "bin", "dual")
    same = json.loads(caldec.run_experiment(json.dumps(config)))
    assert same == report


def test_error_mapping():
    with pytest.raises(ValueError):
        caldec.run_experiment("{not json")
    with pytest.raises(ValueError):
        caldec.Sample(np.zeros((3, 1)), np.zeros((4, 1)))
    with pytest.raises(ValueError):
        caldec.Partition.from_edges([0.0, 0.5])
