import copy

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from streambench.core import FnnParams, UsageError
from streambench.fnn import (FeedForwardNetwork, fnn_backprop, fnn_forward, fnn_gradients,
                             fnn_loss, fnn_pretrain, init_weights, sigmoid)


def zeros(sizes):
    return [(np.zeros((o, i)), np.zeros(o)) for i, o in zip(sizes[:-1], sizes[1:])]


def test_zero_weights_output_half():
    out = fnn_forward(zeros([5, 4, 3]), np.arange(5.0))
    assert np.array_equal(out, np.full(3, 0.5))


def test_default_shape():
    net = FeedForwardNetwork(120, 33)
    assert [W.shape for W, _ in net.weights] == [(30, 120), (33, 30)]
    assert net.scores(np.zeros(120)).shape == (33,)


def test_hand_computed_2_2_2():
    W1, b1 = np.array([[0.5, -1.0], [2.0, 0.25]]), np.array([0.1, -0.3])
    W2, b2 = np.array([[1.5, -0.5], [-2.0, 1.0]]), np.array([0.0, 0.2])
    x = np.array([0.4, -0.6])
    s = lambda z: 1.0 / (1.0 + np.exp(-z))
    h0 = s(0.5 * 0.4 + -1.0 * -0.6 + 0.1)
    h1 = s(2.0 * 0.4 + 0.25 * -0.6 - 0.3)
    expected = [s(1.5 * h0 - 0.5 * h1), s(-2.0 * h0 + 1.0 * h1 + 0.2)]
    out = fnn_forward([(W1, b1), (W2, b2)], x)
    assert np.allclose(out, expected, rtol=0, atol=1e-12)


def test_input_length_checked():
    with pytest.raises(UsageError):
        fnn_forward(init_weights([3, 2, 2]), np.zeros(4))


def test_zero_learning_rate_leaves_weights():
    w = init_weights([4, 3, 2], seed=1)
    before = copy.deepcopy(w)
    fnn_backprop(w, np.ones(4), 1, 0.0)
    assert all(np.array_equal(a, c) and np.array_equal(b, d) for (a, b), (c, d) in zip(w, before))


def max_relative_gradient_error(weights, x, label, h=1e-5):
    worst = 0.0
    for (W, b), (gW, gb) in zip(weights, fnn_gradients(weights, x, label)):
        for arr, grad in ((W, gW), (b, gb)):
            for idx in np.ndindex(arr.shape):
                keep = arr[idx]
                arr[idx] = keep + h
                up = fnn_loss(weights, x, label)
                arr[idx] = keep - h
                down = fnn_loss(weights, x, label)
                arr[idx] = keep
                numeric = (up - down) / (2 * h)
                scale = max(abs(numeric), abs(grad[idx]), 1e-7)
                worst = max(worst, abs(numeric - grad[idx]) / scale)
    return worst


def test_gradient_matches_finite_differences():
    w = init_weights([4, 3, 2], seed=3)
    assert max_relative_gradient_error(w, np.array([0.3, -1.2, 0.8, 0.05]), 1) < 1e-4


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**31), st.lists(st.integers(1, 5), min_size=1, max_size=2),
       st.integers(1, 5), st.integers(2, 4))
def test_gradient_property(seed, hidden, n_in, n_out):
    rng = np.random.default_rng(seed)
    w = init_weights([n_in, *hidden, n_out], seed=seed)
    x = rng.normal(size=n_in)
    assert max_relative_gradient_error(w, x, int(rng.integers(0, n_out))) < 1e-4


def test_repeated_training_raises_target_score():
    w = init_weights([4, 3, 2], seed=4)
    x = np.array([1.0, -0.5, 0.2, 0.7])
    scores = [fnn_forward(w, x)[1]]
    for _ in range(100):
        fnn_backprop(w, x, 1, 0.5)
        scores.append(fnn_forward(w, x)[1])
    assert all(b > a for a, b in zip(scores, scores[1:]))
    assert scores[-1] > 0.9


def sample(n=200, seed=0):
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(n, 3))
    return X, (X[:, 0] + X[:, 1] > 0).astype(int)


def mean_loss(w, X, y):
    return np.mean([fnn_loss(w, x, label) for x, label in zip(X, y)])


def test_pretrain_zero_epochs_is_noop():
    X, y = sample()
    w = init_weights([3, 4, 2], seed=2)
    before = copy.deepcopy(w)
    fnn_pretrain(w, X, y, 0, 0.1)
    assert all(np.array_equal(a, c) for (a, _), (c, _) in zip(w, before))


def test_pretrain_reduces_loss_and_is_reproducible():
    X, y = sample()
    a, b = init_weights([3, 4, 2], seed=2), init_weights([3, 4, 2], seed=2)
    start = mean_loss(a, X, y)
    fnn_pretrain(a, X, y, 5, 0.1, seed=9)
    fnn_pretrain(b, X, y, 5, 0.1, seed=9)
    assert mean_loss(a, X, y) < start
    assert all(np.array_equal(p, q) and np.array_equal(r, s) for (p, r), (q, s) in zip(a, b))


def test_pretrain_empty_sample():
    with pytest.raises(UsageError):
        fnn_pretrain(init_weights([3, 2]), np.zeros((0, 3)), np.zeros(0), 1, 0.1)


def test_classifier_pretrain_marks_trained():
    X, y = sample()
    net = FeedForwardNetwork(3, 2, FnnParams(hidden=(4,), learning_rate=0.1))
    net.pretrain(X, y, 0)
    assert net.predict(X[0]) == 0 and not net.trained
    net.pretrain(X, y, 3, seed=1)
    assert net.trained


def test_online_separable_stream():
    # a larger step than the default so the sanity ceiling is reached within the stream
    rng = np.random.default_rng(7)
    X = rng.uniform(-1, 1, size=(10_000, 2))
    X[:, 0] += np.sign(X[:, 0]) * 0.2
    y = (X[:, 0] > 0).astype(int)
    net = FeedForwardNetwork(2, 2, FnnParams(hidden=(5,), learning_rate=0.5, seed=1))
    hits = []
    for x, label in zip(X, y):
        hits.append(net.predict(x) == label)
        net.train(x, label)
    assert np.mean(hits[-1000:]) >= 0.95


def test_sigmoid_is_stable_for_large_inputs():
    with np.errstate(over="ignore"):
        out = sigmoid(np.array([-800.0, 0.0, 800.0]))
    assert np.all(np.isfinite(out)) and out[1] == 0.5
