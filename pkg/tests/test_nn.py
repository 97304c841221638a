# tests/test_nn.py
import numpy as np
import numpy.testing as npt
import pytest

from xrayreg.common.errors import DivergenceError, FormatError, ShapeError
from xrayreg.nn import (
    LabelScaler,
    Network,
    NetworkSpec,
    TrainConfig,
    backward,
    batch_gradient,
    flatten_params,
    forward,
    load_model,
    lr_schedule,
    mse_loss,
    save_model,
    sgd_step,
    train,
    xavier_init,
    zero_velocity,
)
from xrayreg.nn.layers import Dense
from xrayreg.nn.model_io import LAYER_ORDER

FD_STEP = 1e-5


def _loss(net, x, y) -> float:
    return float(np.sum((forward(net, x) - y) ** 2))


def test_full_size_architecture_shapes():
    net = Network(NetworkSpec())
    assert net.spatial_chain() == [(152, 296), (76, 148), (72, 144), (36, 72)]
    assert net.n_params() == 156 + 2416 + (16 * 36 * 72 * 250 + 250) + (250 * 3 + 3)
    assert list(net.parameters()) == LAYER_ORDER


def test_input_shape_is_checked(tiny_spec):
    net = Network(tiny_spec)
    with pytest.raises(ShapeError) as err:
        forward(net, np.zeros((12, 13)))
    assert err.value.layer == "input"
    with pytest.raises(ShapeError):
        Network(NetworkSpec(input_rows=8, input_cols=8, kernel=5))


def test_gradients_match_finite_differences(tiny_spec):
    rng = np.random.default_rng(7)
    net = xavier_init(Network(tiny_spec), seed=3)
    x = rng.normal(size=(12, 12))
    y = rng.normal(size=3)
    grads = backward(net, x, y)
    for name, param in net.parameters().items():
        flat = param.reshape(-1)
        picked = rng.choice(flat.size, size=min(100, flat.size), replace=False)
        for k in picked:
            keep = flat[k]
            flat[k] = keep + FD_STEP
            up = _loss(net, x, y)
            flat[k] = keep - FD_STEP
            down = _loss(net, x, y)
            flat[k] = keep
            numeric = (up - down) / (2 * FD_STEP)
            analytic = grads[name].reshape(-1)[k]
            rel = abs(analytic - numeric) / max(abs(analytic) + abs(numeric), 1e-5)
            assert rel < 1e-4, f"{name}[{k}]: analytic {analytic} numeric {numeric}"


def test_batch_gradient_is_mean_of_sample_gradients(tiny_spec):
    rng = np.random.default_rng(11)
    net = xavier_init(Network(tiny_spec), seed=5)
    xs = rng.normal(size=(5, 12, 12))
    ys = rng.normal(size=(5, 3))
    loss, grads = batch_gradient(net, xs, ys, micro_batch=2)
    assert loss == pytest.approx(mse_loss(forward(net, xs), ys))
    for name in grads:
        mean = np.mean([backward(net, xs[i], ys[i])[name] for i in range(5)], axis=0)
        npt.assert_allclose(grads[name], mean, rtol=1e-10, atol=1e-12)


def test_batch_gradient_independent_of_threads(tiny_spec):
    rng = np.random.default_rng(12)
    net = xavier_init(Network(tiny_spec), seed=5)
    xs = rng.normal(size=(17, 12, 12))
    ys = rng.normal(size=(17, 3))
    loss1, g1 = batch_gradient(net, xs, ys, micro_batch=4, threads=1)
    loss4, g4 = batch_gradient(net, xs, ys, micro_batch=4, threads=4)
    assert loss1 == loss4
    for name in g1:
        assert np.array_equal(g1[name], g4[name])


def test_xavier_init(tiny_spec):
    a = flatten_params(xavier_init(Network(tiny_spec), seed=0))
    b = flatten_params(xavier_init(Network(tiny_spec), seed=0))
    c = flatten_params(xavier_init(Network(tiny_spec), seed=1))
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)
    net = xavier_init(Network(tiny_spec), seed=0)
    bound = np.sqrt(6.0 / (8 + 3))
    assert np.abs(net.parameters()["fc2.weight"]).max() <= bound
    assert not net.parameters()["fc1.bias"].any()


def test_lr_schedule():
    assert lr_schedule(0) == 0.0025
    assert lr_schedule(10000) == pytest.approx(0.0025 * 2.0 ** -0.75)
    assert lr_schedule(5) < lr_schedule(4)


def test_sgd_step_with_decay_on_weights_only(tiny_spec):
    net = xavier_init(Network(tiny_spec), seed=2)
    before = {k: v.copy() for k, v in net.parameters().items()}
    grads = {k: np.ones_like(v) for k, v in before.items()}
    config = TrainConfig()
    sgd_step(net, grads, zero_velocity(before), config, 0)
    k0 = lr_schedule(0, config)
    after = net.parameters()
    npt.assert_allclose(after["fc1.weight"], before["fc1.weight"] - k0 * (1.0 + 1e-4 * before["fc1.weight"]))
    npt.assert_allclose(after["fc1.bias"], before["fc1.bias"] - k0)


def test_momentum_accumulates(tiny_spec):
    net = Network(tiny_spec)
    grads = {k: np.ones_like(v) for k, v in net.parameters().items()}
    velocity = zero_velocity(net.parameters())
    config = TrainConfig(weight_decay=0.0)
    sgd_step(net, grads, velocity, config, 0)
    sgd_step(net, grads, velocity, config, 1)
    expected = -(0.9 * lr_schedule(0) + lr_schedule(1)) - lr_schedule(0)
    npt.assert_allclose(net.parameters()["conv1.bias"], expected)


def _toy_problem(n=64, seed=0):
    rng = np.random.default_rng(seed)
    xs = rng.normal(size=(n, 12, 12))
    ys = np.stack([xs.mean(axis=(1, 2)) * 4, xs[:, :6].mean(axis=(1, 2)) * 4, -xs[:, 6:].mean(axis=(1, 2)) * 4], axis=1)
    return xs, ys


def test_training_reduces_loss_and_is_deterministic(tiny_spec):
    xs, ys = _toy_problem()
    config = TrainConfig(batch_size=8, epochs=15, lr_base=0.01, seed=4)
    a = train(xavier_init(Network(tiny_spec), 1), xs, ys, config)
    b = train(xavier_init(Network(tiny_spec), 1), xs, ys, config, threads=3)
    assert a.loss_trace[-1] < a.loss_trace[0]
    assert a.iterations == 15 * 8
    assert a.loss_trace == b.loss_trace
    assert np.array_equal(flatten_params(a.net), flatten_params(b.net))


def test_divergence_is_reported(tiny_spec):
    xs, ys = _toy_problem(n=8)
    config = TrainConfig(batch_size=2, epochs=100, lr_base=1e12)
    with pytest.raises(DivergenceError) as err:
        train(xavier_init(Network(tiny_spec), 0), xs, ys, config, context="zone (0, 0) group 1")
    assert "group 1" in str(err.value)


def test_label_scaler_roundtrip(rng):
    scaler = LabelScaler(np.array([3.0, 3.0, 6.0]))
    delta = rng.uniform(-3, 3, size=(10, 3))
    npt.assert_allclose(scaler.denormalize(scaler.normalize(delta)), delta, atol=1e-12)
    npt.assert_allclose(scaler.normalize([3.0, -3.0, 6.0]), [1.0, -1.0, 1.0])


def test_model_file_roundtrip(tmp_path, tiny_spec, rng):
    net = xavier_init(Network(tiny_spec), seed=9)
    path = save_model(net, tmp_path / "m.model.json", meta={"group": 1})
    back, doc = load_model(path)
    assert doc["group"] == 1
    assert doc["layer_order"] == LAYER_ORDER
    x = rng.normal(size=(12, 12))
    assert np.array_equal(forward(back, x), forward(net, x))


def test_model_blob_size_is_checked(tmp_path, tiny_spec):
    path = save_model(xavier_init(Network(tiny_spec), seed=9), tmp_path / "m.model.json")
    blob = tmp_path / "m.f64"
    blob.write_bytes(blob.read_bytes()[:-8])
    with pytest.raises(FormatError) as err:
        load_model(path)
    assert err.value.field == "weights_file"


def test_zero_network_outputs_zero(tiny_spec, rng):
    net = Network(tiny_spec)
    x = rng.normal(size=(12, 12))
    y = np.array([0.5, -1.0, 2.0])
    assert not forward(net, x).any()
    assert mse_loss(forward(net, x), y) == pytest.approx(float(y @ y))
    grads = backward(net, np.zeros((12, 12)), np.zeros(3))
    assert not any(g.any() for g in grads.values())


@pytest.mark.parametrize(
    "outputs, targets, expected",
    [
        ([0.0, 0.0, 0.0], [1.0, 0.0, 0.0], 1.0),
        (np.zeros((2, 3)), [[1.0, 0.0, 0.0], [1.0, 1.0, 1.0]], 2.0),
        ([[0.2, 0.3]], [0.2, 0.3], 0.0),
    ],
)
def test_mse_loss_values(outputs, targets, expected):
    assert mse_loss(outputs, targets) == pytest.approx(expected)


def test_mse_loss_single_output_batch():
    # (K, 1) outputs against K scalar labels is a batch of K, not K outputs of one sample
    assert mse_loss([[1.0], [2.0], [4.0]], [0.0, 0.0, 0.0]) == pytest.approx(7.0)
    with pytest.raises(ShapeError):
        mse_loss(np.zeros((2, 3)), np.zeros(3))


def test_single_output_net_accepts_flat_labels(rng):
    spec = NetworkSpec(input_rows=12, input_cols=12, c1=2, c2=2, kernel=3, hidden=8, n_out=1)
    net = xavier_init(Network(spec), seed=6)
    xs = rng.normal(size=(6, 12, 12))
    ys = rng.normal(size=6)
    loss, grads = batch_gradient(net, xs, ys, micro_batch=4)
    loss2, grads2 = batch_gradient(net, xs, ys[:, None], micro_batch=4)
    assert loss == loss2
    assert loss == pytest.approx(mse_loss(forward(net, xs), ys))
    for name, p in net.parameters().items():
        assert grads[name].shape == p.shape
        assert np.array_equal(grads[name], grads2[name])
    result = train(net, xs, ys, TrainConfig(batch_size=4, epochs=2, seed=0))
    assert len(result.loss_trace) == 2
    with pytest.raises(ShapeError):
        batch_gradient(net, xs, rng.normal(size=7))


def test_dense_gradient_is_least_squares_closed_form(rng):
    layer = Dense("fc", 5, 3)
    layer.weight[...] = rng.normal(size=(3, 5))
    x = rng.normal(size=(1, 5))
    y = rng.normal(size=(1, 3))
    out, cache = layer.forward(x)
    _, grads = layer.backward(2.0 * (out - y), cache)
    w = layer.weight
    npt.assert_allclose(grads["fc.weight"], 2.0 * np.outer(w @ x[0] - y[0], x[0]), rtol=1e-12)


def test_output_layer_gradient_in_network(tiny_spec, rng):
    net = xavier_init(Network(tiny_spec), seed=8)
    x = rng.normal(size=(12, 12))
    y = rng.normal(size=3)
    _, caches = net.forward_with_caches(x)
    hidden = caches[-1][0]
    f = forward(net, x)
    grads = backward(net, x, y)
    npt.assert_allclose(grads["fc2.weight"], 2.0 * np.outer(f - y, hidden), rtol=1e-10, atol=1e-14)
    npt.assert_allclose(grads["fc2.bias"], 2.0 * (f - y), rtol=1e-10, atol=1e-14)


def test_xavier_weight_statistics():
    spec = NetworkSpec(input_rows=24, input_cols=40, c1=2, c2=8, kernel=3, hidden=100, n_out=3)
    net = xavier_init(Network(spec), seed=0)
    w = net.parameters()["fc1.weight"]
    fan_in, fan_out = w.shape[1], w.shape[0]
    assert w.size >= 10_000
    assert np.abs(w).max() <= np.sqrt(6.0 / (fan_in + fan_out))
    assert np.var(w) == pytest.approx(2.0 / (fan_in + fan_out), rel=0.1)


class _Params:
    """A bare parameter holder standing in for a network in optimizer tests."""

    def __init__(self, **params):
        self.params = {k: np.asarray(v, dtype=np.float64) for k, v in params.items()}

    def parameters(self):
        return self.params


def test_plain_sgd_on_squared_norm_shrinks_geometrically():
    holder = _Params(**{"w.weight": [3.0, -2.0]})
    config = TrainConfig(momentum=0.0, weight_decay=0.0)
    velocity = zero_velocity(holder.parameters())
    w = holder.parameters()["w.weight"]
    for i in range(20):
        expected = (1.0 - 2.0 * lr_schedule(i, config)) * w
        sgd_step(holder, {"w.weight": 2.0 * w}, velocity, config, i)
        npt.assert_allclose(w, expected, rtol=1e-14)


def test_sgd_pure_inertia():
    holder = _Params(**{"w.weight": [1.0, 1.0]})
    velocity = {"w.weight": np.array([0.5, -0.25])}
    sgd_step(holder, {"w.weight": np.zeros(2)}, velocity, TrainConfig(weight_decay=0.0), 0)
    npt.assert_allclose(holder.parameters()["w.weight"], [1.45, 0.775])


def test_sgd_reaches_quadratic_minimum():
    a = np.array([1.0, 3.0])
    w_star = np.array([2.0, -1.0])
    holder = _Params(**{"w.weight": [0.0, 0.0]})
    config = TrainConfig(momentum=0.5, weight_decay=0.0, lr_base=0.1, lr_decay_a=0.0)
    velocity = zero_velocity(holder.parameters())
    w = holder.parameters()["w.weight"]
    for i in range(50):
        sgd_step(holder, {"w.weight": 2.0 * a * (w - w_star)}, velocity, config, i)
    npt.assert_allclose(w, w_star, atol=1e-6)
