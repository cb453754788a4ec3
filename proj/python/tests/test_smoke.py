import json

import numpy as np
import pytest

import enose


@pytest.fixture(scope="module")
def data():
    ds = enose.synth(samples_per_class=60, seed=3)
    return enose.stratified_split(ds, 0.25, 7)


def test_synth_shape():
    ds = enose.synth(samples_per_class=20)
    assert len(ds) == 200
    assert ds.features.shape == (200, 9)
    assert ds.num_classes == 10
    assert list(ds.class_counts()) == [20] * 10


def test_synth_is_deterministic():
    a = enose.synth(samples_per_class=10, seed=5)
    b = enose.synth(samples_per_class=10, seed=5)
    np.testing.assert_array_equal(a.features, b.features)


def test_fit_predict_and_round_trip(data):
    train, test = data
    model = enose.fit(train, "rf", [("n_estimators", "20")], version="V2")
    proba = model.predict_proba(test)
    assert proba.shape == (len(test), 10)
    np.testing.assert_allclose(proba.sum(axis=1), 1.0, atol=1e-12)
    pred = model.predict(test)
    assert np.mean(np.array(pred) == np.array(test.labels)) > 0.8

    again = enose.Model.from_json(model.to_json())
    np.testing.assert_array_equal(again.predict_proba(test), proba)


def test_evaluate_report(data):
    train, test = data
    model = enose.fit(train, "dt")
    report = enose.evaluate(test.labels, model.predict_proba(test), test.classes)
    cm = np.array(report["confusion"])
    assert cm.sum() == len(test)
    assert 0.0 <= report["accuracy"] <= 1.0


def test_parameter_count():
    assert enose.mlp_parameter_count("baseline", 7, 10) > 0
    with pytest.raises(enose.EnoseError) as info:
        enose.mlp_parameter_count("huge", 7, 10)
    assert info.value.code == "UnknownVariant"
    assert info.value.exit_code == 1


def test_metrics_helpers():
    cm = enose.confusion_matrix([0, 0, 1, 1], [0, 1, 1, 1], 2)
    np.testing.assert_array_equal(cm, [[1, 1], [0, 2]])
    assert enose.f1_score(0.5, 1.0) == pytest.approx(2 / 3)


def test_pca_eigenvalues_descend():
    x = np.random.default_rng(0).normal(size=(50, 4))
    scores, eig = enose.pca(x, 3)
    assert scores.shape == (50, 3)
    assert np.all(np.diff(eig) <= 0)


def test_config_errors_name_the_key():
    with pytest.raises(enose.EnoseError) as info:
        enose.parse_config("[split]\ntest_fraction = 0.2\n")
    assert info.value.code == "ConfigError"
    assert "[data] source" in str(info.value)


def test_small_run(tmp_path):
    cfg = enose.default_config()
    cfg.samples_per_class = 30
    cfg.folds = 3
    cfg.ann_variants = []
    cfg.learning_curves = False
    cfg.out_dir = str(tmp_path / "out")
    cfg.validate()
    summary = enose.run(cfg)
    assert summary["complete"]
    # 4 versions x 3 families, 3 tuned models, 1 ensemble
    assert len(summary["models"]) == 16
    assert (tmp_path / "out").exists()
