import numpy as np
import pytest
from scipy import special

from hybridvol.gru import (Adam, GruConfig, LayerWeights, TrainingSet, cell_forward, forward_batch, init_weights,
                           load_weights, loss, loss_and_gradients, network_forward, predict, save_weights, train)
from hybridvol.utils import ConfigError, ConstraintError, ShapeError


def _layer(rng: np.random.Generator, n_in: int, n_hidden: int, scale: float = 0.5) -> LayerWeights:
    def draw(*shape):
        return scale * rng.standard_normal(shape)

    return LayerWeights(
        W_z=draw(n_in, n_hidden), W_r=draw(n_in, n_hidden), W_o=draw(n_in, n_hidden),
        U_z=draw(n_hidden, n_hidden), U_r=draw(n_hidden, n_hidden), U_o=draw(n_hidden, n_hidden),
        b_z=draw(n_hidden), b_r=draw(n_hidden), b_o=draw(n_hidden),
    )


def _zero_layer(n_in: int, n_hidden: int) -> LayerWeights:
    return LayerWeights(
        *(np.zeros((n_in, n_hidden)) for _ in range(3)),
        *(np.zeros((n_hidden, n_hidden)) for _ in range(3)),
        *(np.zeros(n_hidden) for _ in range(3)),
    )


def _network_targets(n: int, config: GruConfig, seed: int):
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((n, config.sequence_length, config.input_dim))
    reference = init_weights(config, seed=seed + 100)
    y = predict(reference, config, X) + 0.01 * rng.standard_normal(n)
    return TrainingSet(X, y)


def test_zero_cell_keeps_zero_state():
    o = cell_forward(_zero_layer(3, 2), np.ones(3), np.zeros(2))
    assert np.array_equal(o, np.zeros(2))


def test_saturated_update_gate_takes_candidate():
    layer = _zero_layer(1, 1)
    layer.b_z[:] = 50.0
    layer.W_o[:] = 1.0
    o = cell_forward(layer, np.array([0.4]), np.array([0.9]), activation="tanh")
    assert o[0] == pytest.approx(np.tanh(0.4), abs=1e-12)


def test_cell_matches_scalar_gate_evaluation():
    rng = np.random.default_rng(0)
    layer = _layer(rng, 3, 2)
    x, o_prev = rng.standard_normal(3), rng.standard_normal(2)
    o = cell_forward(layer, x, o_prev, activation="tanh")

    r = special.expit(x @ layer.W_r + o_prev @ layer.U_r + layer.b_r)
    expected = np.empty(2)
    for j in range(2):
        a_z = sum(x[i] * layer.W_z[i, j] for i in range(3)) + sum(o_prev[k] * layer.U_z[k, j] for k in range(2))
        a_r = sum(x[i] * layer.W_r[i, j] for i in range(3)) + sum(o_prev[k] * layer.U_r[k, j] for k in range(2))
        z = 1.0 / (1.0 + np.exp(-(a_z + layer.b_z[j])))
        a_o = sum(x[i] * layer.W_o[i, j] for i in range(3))
        a_o += sum(r[k] * o_prev[k] * layer.U_o[k, j] for k in range(2)) + layer.b_o[j]
        assert r[j] == pytest.approx(1.0 / (1.0 + np.exp(-(a_r + layer.b_r[j]))), abs=1e-14)
        expected[j] = (1.0 - z) * o_prev[j] + z * np.tanh(a_o)
    assert np.max(np.abs(o - expected)) < 1e-12


def test_relu_candidate():
    layer = _zero_layer(1, 1)
    layer.W_o[:] = 1.0
    assert cell_forward(layer, np.array([-3.0]), np.array([0.0]), activation="relu")[0] == 0.0
    assert cell_forward(layer, np.array([3.0]), np.array([0.0]), activation="relu")[0] == pytest.approx(1.5)


def test_cell_shape_mismatch():
    layer = _zero_layer(3, 2)
    with pytest.raises(ShapeError):
        cell_forward(layer, np.ones(4), np.zeros(2))
    with pytest.raises(ShapeError):
        cell_forward(layer, np.ones(3), np.zeros(3))


def test_tanh_states_stay_bounded():
    config = GruConfig(layer_sizes=(6, 3), precision=64, activation="tanh", dropout_rate=0.0)
    weights = init_weights(config, seed=2)
    X = np.random.default_rng(2).standard_normal((20, 6, 3))
    _, cache = forward_batch(weights, config, X)
    for layer_caches in cache.caches:
        for step in layer_caches:
            assert np.all((step.z > 0) & (step.z < 1)) and np.all((step.r > 0) & (step.r < 1))
            assert np.all(np.abs(step.c) < 1.0)
    assert np.all(np.abs(cache.top_state) < 1.0)


def test_single_unit_network_unrolls_to_repeated_cells():
    config = GruConfig(layer_sizes=(1,), input_dim=1, sequence_length=4, precision=64, activation="tanh")
    weights = init_weights(config, seed=3)
    sequence = np.full((4, 1), 0.7)
    state = np.zeros(1)
    for _ in range(4):
        state = cell_forward(weights.layer(0), sequence[0], state, activation="tanh")
    expected = float(state @ weights.dense_w + weights.dense_b[0])
    assert network_forward(weights, config, sequence) == pytest.approx(expected, abs=1e-12)


def test_eval_mode_is_deterministic_and_dropout_free():
    config = GruConfig(layer_sizes=(5, 3), precision=64, dropout_rate=0.0)
    weights = init_weights(config, seed=1)
    X = np.random.default_rng(1).standard_normal((4, 6, 3))
    eval_a = predict(weights, config, X)
    eval_b = predict(weights, config, X)
    train_mode, _ = forward_batch(weights, config, X, train=True, rng=np.random.default_rng(0))
    assert np.array_equal(eval_a, eval_b)
    assert np.max(np.abs(train_mode - eval_a)) < 1e-12


def test_dropout_changes_training_predictions_only():
    config = GruConfig(layer_sizes=(5, 3), precision=64, dropout_rate=0.5, activation="tanh")
    weights = init_weights(config, seed=1)
    sequence = np.random.default_rng(1).standard_normal((6, 3))
    assert network_forward(weights, config, sequence) == network_forward(weights, config, sequence)
    trained = network_forward(weights, config, sequence, mode="train", rng=np.random.default_rng(9))
    assert trained != network_forward(weights, config, sequence)


def test_dropout_masks_the_state_feeding_the_output_neuron():
    config = GruConfig(layer_sizes=(4,), precision=64, dropout_rate=0.5, activation="tanh")
    weights = init_weights(config, seed=3)
    X = np.random.default_rng(3).standard_normal((10, 6, 3))
    _, eval_cache = forward_batch(weights, config, X)
    predictions, cache = forward_batch(weights, config, X, train=True, rng=np.random.default_rng(4))
    mask = cache.masks[-1]
    assert mask is not None
    assert np.allclose(cache.top_state, eval_cache.top_state * mask[:, -1, :], rtol=0.0, atol=1e-14)
    assert predictions == pytest.approx(cache.top_state @ weights.dense_w + weights.dense_b[0])


def test_network_rejects_wrong_window():
    config = GruConfig(layer_sizes=(4,), precision=64)
    with pytest.raises(ShapeError):
        predict(init_weights(config), config, np.zeros((2, 5, 3)))


def test_loss_values():
    config = GruConfig(layer_sizes=(2,), precision=64)
    weights = init_weights(config, seed=0)
    assert loss(np.array([1.0, 2.0]), np.array([1.0, 2.0]), weights, 0.0) == 0.0
    assert loss(np.array([0.0, 0.0]), np.array([1.0, 2.0]), weights, 0.0) == pytest.approx(2.5)
    kernels = sum(np.sum(w**2) for w in weights.input_kernels())
    assert loss(np.zeros(3), np.zeros(3), weights, 0.01) == pytest.approx(0.01 * kernels)


def test_gradients_match_finite_differences():
    config = GruConfig(layer_sizes=(8, 4), precision=64, activation="tanh", dropout_rate=0.0, l2_lambda=0.001)
    weights = init_weights(config, seed=5)
    rng = np.random.default_rng(5)
    weights.feature_mean = rng.standard_normal(3)
    weights.feature_std = 1.0 + rng.random(3)
    X = rng.standard_normal((20, 6, 3))
    y = rng.standard_normal(20)

    _, grads = loss_and_gradients(weights, config, X, y)

    def objective() -> float:
        return loss(predict(weights, config, X), y, weights, config.l2_lambda)

    step = 1e-5
    for key, value in weights.params.items():
        numeric = np.zeros_like(value)
        for index in np.ndindex(value.shape):
            original = value[index]
            value[index] = original + step
            plus = objective()
            value[index] = original - step
            minus = objective()
            value[index] = original
            numeric[index] = (plus - minus) / (2.0 * step)
        error = np.linalg.norm(grads[key] - numeric) / max(np.linalg.norm(grads[key]) + np.linalg.norm(numeric), 1e-12)
        assert error < 1e-4, key


def test_adam_first_step_moves_by_learning_rate():
    params = {"w": np.array([1.0, -2.0])}
    Adam(0.1).step(params, {"w": np.array([0.5, -3.0])})
    assert params["w"] == pytest.approx([0.9, -1.9], abs=1e-6)


def test_zero_learning_rate_leaves_weights_unchanged():
    config = GruConfig(layer_sizes=(4,), precision=64, epochs=3, batch_size=8, learning_rate=0.0, seed=3)
    data = _network_targets(24, config, 1)
    start = init_weights(config, seed=11)
    trained, history = train(config, data, _network_targets(8, config, 2), weights=start)
    for key, value in start.params.items():
        assert np.array_equal(trained.params[key], value)
    assert len(history.train_loss) == 3


def test_best_epoch_checkpoint_reproduces_its_validation_loss():
    config = GruConfig(layer_sizes=(6,), precision=64, epochs=15, batch_size=16, learning_rate=0.01,
                       dropout_rate=0.0, seed=4)
    data, validation = _network_targets(64, config, 3), _network_targets(24, config, 4)
    best, history = train(config, data, validation)
    replay = loss(predict(best, config, validation.features), validation.targets, best, config.l2_lambda)
    assert 1 <= history.best_epoch <= config.epochs
    assert replay == history.best_validation_loss
    assert history.best_validation_loss == min(history.validation_loss)


def test_training_is_deterministic():
    config = GruConfig(layer_sizes=(4,), precision=64, epochs=4, batch_size=16, seed=8)
    data, validation = _network_targets(40, config, 5), _network_targets(12, config, 6)
    _, first = train(config, data, validation)
    _, second = train(config, data, validation)
    assert first.train_loss == second.train_loss
    assert first.validation_loss == second.validation_loss


def test_trained_network_beats_constant_predictor():
    config = GruConfig(layer_sizes=(8,), precision=64, epochs=60, batch_size=32, learning_rate=0.01,
                       dropout_rate=0.0, l2_lambda=0.0, activation="tanh", seed=1)
    data, validation = _network_targets(300, config, 7), _network_targets(100, config, 8)
    best, _ = train(config, data, validation)
    mse = np.mean((predict(best, config, validation.features) - validation.targets) ** 2)
    assert mse < np.var(validation.targets)


def test_save_and_load_round_trip(tmp_path):
    config = GruConfig(layer_sizes=(4, 2), precision=64)
    weights = init_weights(config, seed=6)
    weights.feature_mean = np.array([0.1, 0.2, 0.3])
    path = str(tmp_path / "weights.npz")
    save_weights(weights, config, path)
    loaded, stored = load_weights(path, config)
    assert stored == config
    for key, value in weights.params.items():
        assert np.array_equal(loaded.params[key], value)
    assert np.array_equal(loaded.feature_mean, weights.feature_mean)


def test_load_with_another_configuration(tmp_path):
    config = GruConfig(layer_sizes=(4,), precision=64)
    path = str(tmp_path / "weights.npz")
    save_weights(init_weights(config), config, path)
    with pytest.raises(ConfigError):
        load_weights(path, GruConfig(layer_sizes=(5,), precision=64))


def test_load_with_wrong_array_shape(tmp_path):
    config = GruConfig(layer_sizes=(4,), precision=64)
    weights = init_weights(config)
    weights.params["layer0.W_z"] = np.zeros((3, 5))
    path = str(tmp_path / "weights.npz")
    save_weights(weights, config, path)
    with pytest.raises(ShapeError):
        load_weights(path)


def test_invalid_configuration():
    with pytest.raises(ConstraintError):
        GruConfig(layer_sizes=())
    with pytest.raises(ConstraintError):
        GruConfig(activation="sigmoid")
    with pytest.raises(ConstraintError):
        GruConfig(precision=16)
