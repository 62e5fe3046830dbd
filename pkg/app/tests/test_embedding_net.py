import numpy as np
import pytest

from app.learning.embedding_net import (
    EmbeddingNet,
    backward,
    forward,
    load_checkpoint,
    save_checkpoint,
)
from app.learning.optim import AdamState, adam_step
from app.tests.helpers import numerical_gradient, relative_error
from app.utils.exceptions import FormatError, InputShapeError, NumericError


def _net(weights, biases, normalize=False):
    dims = [weights[0].shape[1]] + [w.shape[0] for w in weights]
    return EmbeddingNet(dims, [np.asarray(w, float) for w in weights], [np.asarray(b, float) for b in biases], normalize)


def test_zero_weights_give_zero_output(rng):
    net = EmbeddingNet.initialize([5, 4, 3], rng)
    zero = net.with_parameters([np.zeros_like(p) for p in net.parameters()])
    assert np.array_equal(forward(zero, rng.normal(size=5)), np.zeros(3))


def test_identity_layer():
    net = _net([np.eye(2)], [np.zeros(2)])
    assert np.array_equal(forward(net, np.array([1.0, 2.0])), np.array([1.0, 2.0]))


def test_two_layer_hand_computed():
    net = _net([np.array([[1.0, -1.0], [0.5, 2.0]]), np.array([[1.0, 2.0]])], [np.array([0.0, -1.0]), np.array([0.5])])
    # hidden pre-activation (-1, 3.5) -> rectified (0, 3.5) -> 2 * 3.5 + 0.5
    assert forward(net, np.array([1.0, 2.0])) == pytest.approx([7.5])


def test_batch_matches_single_rows(rng):
    net = EmbeddingNet.initialize([6, 5, 2], rng)
    x = rng.normal(size=(4, 6))
    batch = forward(net, x)
    for i in range(4):
        assert np.allclose(batch[i], forward(net, x[i]))


def test_forward_is_pure(rng):
    net = EmbeddingNet.initialize([6, 5, 2], rng)
    x = rng.normal(size=6)
    assert np.array_equal(forward(net, x), forward(net, x))


def test_dimension_mismatch(rng):
    net = EmbeddingNet.initialize([3, 2], rng)
    with pytest.raises(InputShapeError):
        forward(net, np.ones(4))
    with pytest.raises(InputShapeError):
        backward(net, np.ones(3), np.ones(5))


def test_glorot_initialization_bounds(rng):
    net = EmbeddingNet.initialize([10, 6, 4], rng)
    assert np.all(np.abs(net.weights[0]) <= np.sqrt(6.0 / 16))
    assert all(np.array_equal(b, np.zeros_like(b)) for b in net.biases)
    assert net.output_dim == 4


def test_zero_upstream_gradient(rng):
    net = EmbeddingNet.initialize([4, 3, 2], rng)
    grads = backward(net, rng.normal(size=4), np.zeros(2))
    assert all(np.array_equal(g, np.zeros_like(g)) for g in grads.parameters())
    assert np.array_equal(grads.inputs, np.zeros(4))


def test_linear_layer_weight_gradient_is_outer_product():
    net = _net([np.eye(3)], [np.zeros(3)])
    x = np.array([0.5, -1.0, 2.0])
    e1 = np.array([1.0, 0.0, 0.0])
    grads = backward(net, x, e1)
    assert np.array_equal(grads.weights[0], np.outer(e1, x))
    assert np.array_equal(grads.biases[0], e1)


@pytest.mark.parametrize("normalize", [False, True])
def test_gradients_match_finite_differences(rng, normalize):
    net = EmbeddingNet.initialize([5, 7, 4, 3], rng, normalize=normalize)
    net = net.with_parameters([p + 0.05 * rng.normal(size=p.shape) for p in net.parameters()])
    x = rng.normal(size=5)
    upstream = rng.normal(size=3)
    grads = backward(net, x, upstream)

    def objective():
        return float(upstream @ forward(net, x))

    for analytic, param in zip(grads.parameters(), net.parameters()):
        assert relative_error(analytic, numerical_gradient(objective, param)) < 1e-4
    assert relative_error(grads.inputs, numerical_gradient(objective, x)) < 1e-4


def test_adam_zero_gradients_leave_parameters(rng):
    net = EmbeddingNet.initialize([3, 2], rng)
    state = AdamState.for_net(net)
    new_net, new_state = adam_step(net, state, [np.zeros_like(p) for p in net.parameters()])
    assert all(np.array_equal(a, b) for a, b in zip(new_net.parameters(), net.parameters()))
    assert new_state.step == state.step + 1


def test_adam_first_and_second_step():
    net = _net([np.zeros((1, 1))], [np.zeros(1)])
    state = AdamState.for_net(net, learning_rate=0.001)
    grads = [np.ones((1, 1)), np.zeros(1)]
    net, state = adam_step(net, state, grads)
    assert net.weights[0][0, 0] == pytest.approx(-0.001, rel=1e-6)
    before = net.weights[0][0, 0]
    net, state = adam_step(net, state, grads)
    # Bias correction makes m_hat = v_hat = 1 again on a repeated gradient
    assert before - net.weights[0][0, 0] == pytest.approx(0.001 / (1 + 1e-8), rel=1e-9)
    assert state.step == 2


def test_adam_rejects_non_finite(rng):
    net = EmbeddingNet.initialize([3, 2], rng)
    grads = [np.zeros_like(p) for p in net.parameters()]
    grads[0][0, 0] = np.nan
    with pytest.raises(NumericError):
        adam_step(net, AdamState.for_net(net), grads)


def test_adam_rejects_wrong_shapes(rng):
    net = EmbeddingNet.initialize([3, 2], rng)
    with pytest.raises(InputShapeError):
        adam_step(net, AdamState.for_net(net), [np.zeros(3)])


def test_checkpoint_round_trip(tmp_path, rng):
    net = EmbeddingNet.initialize([4, 3, 2], rng, normalize=True, seed=17)
    loaded = load_checkpoint(save_checkpoint(net, tmp_path / "net.npz"))
    assert loaded.layer_dims == net.layer_dims
    assert loaded.normalize and loaded.seed == 17
    assert all(np.array_equal(a, b) for a, b in zip(loaded.parameters(), net.parameters()))


def test_checkpoint_rejects_garbage(tmp_path):
    path = tmp_path / "broken.npz"
    path.write_bytes(b"not an archive")
    with pytest.raises(FormatError):
        load_checkpoint(path)
