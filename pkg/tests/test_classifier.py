import numpy as np
import pytest

from vladkit import errors, fileio
from vladkit.classifier import LinearModel, TrainHyper, predict, tabulate, train_ovr


def separable_clouds(rng, n_per=40):
    a = rng.standard_normal((n_per, 2)) * 0.3 + np.array([3.0, 0.0])
    b = rng.standard_normal((n_per, 2)) * 0.3 + np.array([-3.0, 0.0])
    x = np.vstack([a, b])
    y = np.array([0] * n_per + [1] * n_per)
    return x, y


def test_separable_training_accuracy():
    rng = np.random.default_rng(0)
    x, y = separable_clouds(rng)
    model = train_ovr(x, y)
    predicted = np.array([predict(model, row)[0] for row in x])
    assert (predicted == y).all()


def test_deterministic_model_bytes(tmp_path):
    rng = np.random.default_rng(1)
    x, y = separable_clouds(rng)
    for name in ("a.vlm", "b.vlm"):
        model = train_ovr(x, y, TrainHyper(seed=5))
        fileio.write_model(model.weights, model.biases, tmp_path / name)
    assert (tmp_path / "a.vlm").read_bytes() == (tmp_path / "b.vlm").read_bytes()


def test_too_few_classes():
    with pytest.raises(errors.TooFewClasses):
        train_ovr(np.zeros((5, 2)), np.zeros(5, dtype=int))


def test_predict_hand_scores():
    model = LinearModel(weights=np.eye(2), biases=np.zeros(2))
    label, scores = predict(model, np.array([2.0, 1.0]))
    assert label == 0
    assert scores.tolist() == [2.0, 1.0]


def test_predict_tie_breaks_low_index():
    model = LinearModel(weights=np.zeros((3, 2)), biases=np.zeros(3))
    label, _ = predict(model, np.array([1.0, 1.0]))
    assert label == 0


def test_predict_matches_linear_scan():
    rng = np.random.default_rng(2)
    for _ in range(50):
        model = LinearModel(weights=rng.standard_normal((4, 3)), biases=rng.standard_normal(4))
        x = rng.standard_normal(3)
        label, scores = predict(model, x)
        best = max(range(4), key=lambda c: (scores[c], -c))
        assert label == best


def test_predict_dim_mismatch():
    model = LinearModel(weights=np.zeros((2, 3)), biases=np.zeros(2))
    with pytest.raises(errors.DimMismatch):
        predict(model, np.zeros(4))


def test_argmax_invariant_to_positive_rescaling():
    rng = np.random.default_rng(3)
    model = LinearModel(weights=rng.standard_normal((3, 4)), biases=np.zeros(3))
    scaled = LinearModel(weights=model.weights / 7.5, biases=np.zeros(3))
    for _ in range(20):
        x = rng.standard_normal(4)
        assert predict(model, x)[0] == predict(scaled, 7.5 * x)[0]


def test_tabulate_identities():
    true = np.array([0, 0, 1, 1, 2])
    pred = np.array([0, 1, 1, 1, 0])
    report = tabulate(true, pred, 3)
    assert report.confusion.sum(axis=1).tolist() == [2, 2, 1]
    assert report.accuracy == np.trace(report.confusion) / report.confusion.sum()
    assert np.allclose(report.per_class_accuracy, [0.5, 1.0, 0.0])


def test_memorized_single_item():
    report = tabulate(np.array([0]), np.array([0]), 1)
    assert report.accuracy == 1.0
    assert report.confusion.shape == (1, 1)


def test_random_predictor_near_chance():
    # Binomial oracle: random guesses on a balanced 4-class set stay within
    # 5 standard errors of 0.25 over 10 seeds.
    n, c = 400, 4
    true = np.repeat(np.arange(c), n // c)
    se = np.sqrt(0.25 * 0.75 / n)
    for seed in range(10):
        rng = np.random.default_rng(seed)
        pred = rng.integers(0, c, size=n)
        acc = tabulate(true, pred, c).accuracy
        assert abs(acc - 0.25) < 5 * se
