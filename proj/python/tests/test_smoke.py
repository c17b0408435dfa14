import math

import numpy as np
import pytest

import lmnl


def small_binary(rows=300, seed=1):
    sc = lmnl.BinaryScenario()
    sc.n_train = rows
    sc.n_test = 100
    sc.seed = seed
    return lmnl.head_split(lmnl.gen_binary(sc), rows)


def test_dataset_from_numpy():
    values = np.array([[1.0, 2.0], [3.0, 4.0], [0.5, -1.0]])
    d = lmnl.ChoiceDataset(["x_a", "x_b"], values, [0, 1, 1], ["a", "b"])
    assert len(d) == 3
    assert d.columns == ["x_a", "x_b"]
    np.testing.assert_array_equal(d.column("x_b"), values[:, 1])
    assert d.available.all()


def test_unavailable_choice_is_rejected():
    values = np.zeros((1, 1))
    av = np.array([[False, True]])
    with pytest.raises(lmnl.LmnlError):
        lmnl.ChoiceDataset(["x"], values, [0], ["a", "b"], av)


def test_fit_lmnl_on_synthetic_data():
    train, test = small_binary()
    model = lmnl.binary_lmnl("lmnl", ["p", "a", "b"], ["q", "c"], 8).build(0)
    cfg = lmnl.TrainConfig()
    cfg.epochs = 5
    report = lmnl.fit(model, train, cfg, test)
    assert set(report["parameters"]) == {"B_P", "B_A", "B_B"}
    assert report["train_ll"] < 0.0
    assert "test_ll" in report
    assert len(report["epoch_loss"]) == 5
    p = model.probabilities(test)
    np.testing.assert_allclose(p.sum(axis=1), 1.0, atol=1e-12)
    assert math.isclose(model.log_likelihood(train), report["train_ll"], rel_tol=1e-12)


def test_zero_model_has_null_likelihood():
    train, _ = small_binary(50)
    model = lmnl.binary_logit("logit", ["p"]).build(0)
    assert model.log_likelihood(train) == pytest.approx(50 * math.log(0.5))


def test_model_round_trip(tmp_path):
    train, _ = small_binary(100)
    model = lmnl.binary_lmnl("lmnl", ["p"], ["q"], 4).build(3)
    path = tmp_path / "m.txt"
    model.save(path)
    back = lmnl.load_model(path)
    np.testing.assert_array_equal(back.probabilities(train), model.probabilities(train))


def test_feature_impact_ignores_linear_columns():
    train, _ = small_binary(100)
    model = lmnl.binary_lmnl("lmnl", ["p", "a", "b"], ["q", "c"], 6).build(2)
    impact = lmnl.feature_impact(model, train)
    assert impact["p_1"] == 0.0
    assert impact["q_1"] > 0.0


def test_bad_strategy_raises():
    train, _ = small_binary(50)
    model = lmnl.binary_logit("logit", ["p"]).build(0)
    with pytest.raises(lmnl.LmnlError):
        lmnl.fit(model, train, strategy="sideways")
