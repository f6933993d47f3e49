import numpy as np
import pytest

from groovebench.exceptions import (
    DegenerateBatchError, DegenerateWeightsError, FormatError, ParameterError, ShapeError,
)
from groovebench.numerics.adam import AdamState, adam_step
from groovebench.numerics.gradcheck import max_relative_error, numeric_gradient
from groovebench.numerics.layers import BN_EPS, RunningStats, batchnorm_forward, dense_forward
from groovebench.numerics.matrix import read_grvm, write_grvm
from groovebench.numerics.rng import RngStream, sample_distribution
from groovebench.numerics.tape import Tape, backward, mul, scale, sum_


# ---- 분포 샘플링 ----

def test_beta_mean(rng):
    draws = sample_distribution('beta', 10 ** 6, rng, a=1.0, b=10.0)
    assert abs(draws.mean() - 1.0 / 11.0) < 0.002


def test_gamma_variance(rng):
    draws = sample_distribution('gamma', 10 ** 6, rng, shape=1.0, scale=1.0)
    assert abs(draws.var() - 1.0) < 0.01


def test_gamma_shape_and_scale(rng):
    draws = sample_distribution('gamma', 10 ** 6, rng, shape=2.0, scale=1.5)
    assert abs(draws.mean() - 3.0) < 0.02
    assert abs(draws.var() - 4.5) < 0.05


def test_bernoulli_one_is_all_ones(rng):
    assert np.all(sample_distribution('bernoulli', (4, 3), rng, p=1.0) == 1.0)


def test_multinomial_zero_weights(rng):
    with pytest.raises(DegenerateWeightsError):
        sample_distribution('multinomial', 1, rng, weights=[0.0, 0.0])


@pytest.mark.parametrize('kind, params', [
    ('gamma', {'shape': -1.0}),
    ('beta', {'a': 0.0, 'b': 1.0}),
    ('bernoulli', {'p': 1.5}),
    ('normal', {'sigma': -1.0}),
])
def test_invalid_parameters(rng, kind, params):
    with pytest.raises(ParameterError):
        sample_distribution(kind, 3, rng, **params)


def test_same_seed_same_stream():
    a = sample_distribution('normal', 5, RngStream(7))
    b = sample_distribution('normal', 5, RngStream(7))
    np.testing.assert_array_equal(a, b)
    c = sample_distribution('normal', 5, RngStream(7).child(1))
    assert not np.array_equal(a, c)


# ---- dense / batchnorm ----

def _dense(x, activation='relu'):
    tape = Tape()
    out = dense_forward(tape, tape.constant([x]), tape.constant(np.eye(2)),
                        tape.constant(np.zeros((1, 2))), activation)
    return out.value[0]


def test_dense_identity_relu():
    np.testing.assert_array_equal(_dense([1.0, 0.0]), [1.0, 0.0])
    np.testing.assert_array_equal(_dense([-1.0, 2.0]), [0.0, 2.0])


def test_dense_shape_mismatch():
    tape = Tape()
    with pytest.raises(ShapeError):
        dense_forward(tape, tape.constant(np.ones((2, 3))), tape.constant(np.ones((2, 2))),
                      tape.constant(np.zeros((1, 2))))


def test_dense_gradient(gen):
    for _ in range(20):
        n, k_in, k_out = gen.integers(1, 7, size=3)
        params = {'x': gen.normal(size=(n, k_in)), 'W': gen.normal(size=(k_in, k_out)),
                  'b': gen.normal(size=(1, k_out))}
        weights = gen.normal(size=(n, k_out))

        def loss_node(p):
            tape = Tape()
            out = dense_forward(tape, tape.param('x', p['x']), tape.param('W', p['W']),
                                tape.param('b', p['b']), 'relu')
            return tape, sum_(tape, mul(tape, out, tape.constant(weights)))

        tape, loss = loss_node(params)
        numeric = numeric_gradient(lambda p: float(loss_node(p)[1].value), params)
        assert max_relative_error(backward(tape, loss), numeric) < 1e-5


def _batchnorm(p, weights, mode='train', running=None):
    tape = Tape()
    running = running or RunningStats.initial(p['x'].shape[1])
    out, stats = batchnorm_forward(tape, tape.param('x', p['x']), tape.param('gamma', p['gamma']),
                                   tape.param('beta', p['beta']), running, mode)
    return tape, out, stats, sum_(tape, mul(tape, out, tape.constant(weights)))


def test_batchnorm_normalizes(gen):
    p = {'x': gen.normal(3.0, 2.0, size=(50, 4)), 'gamma': np.ones((1, 4)), 'beta': np.zeros((1, 4))}
    _, out, _, _ = _batchnorm(p, np.ones((50, 4)))
    np.testing.assert_allclose(out.value.mean(axis=0), 0.0, atol=1e-6)
    var = p['x'].var(axis=0)
    np.testing.assert_allclose(out.value.var(axis=0), var / (var + BN_EPS), atol=1e-10)


def test_batchnorm_constant_column(gen):
    x = gen.normal(size=(10, 2))
    x[:, 1] = 5.0
    p = {'x': x, 'gamma': np.full((1, 2), 2.0), 'beta': np.full((1, 2), 0.5)}
    _, out, _, _ = _batchnorm(p, np.ones((10, 2)))
    np.testing.assert_allclose(out.value[:, 1], 0.5)


def test_batchnorm_running_stats(gen):
    x = gen.normal(size=(8, 3))
    p = {'x': x, 'gamma': np.ones((1, 3)), 'beta': np.zeros((1, 3))}
    _, _, stats, _ = _batchnorm(p, np.ones((8, 3)))
    np.testing.assert_allclose(stats.mean, 0.1 * x.mean(axis=0))
    np.testing.assert_allclose(stats.var, 0.9 + 0.1 * x.var(axis=0, ddof=1))


def test_batchnorm_eval_keeps_running_stats(gen):
    running = RunningStats(np.array([1.0, 2.0]), np.array([4.0, 9.0]))
    p = {'x': gen.normal(size=(1, 2)), 'gamma': np.ones((1, 2)), 'beta': np.zeros((1, 2))}
    _, out, stats, _ = _batchnorm(p, np.ones((1, 2)), mode='eval', running=running)
    assert stats is running
    np.testing.assert_allclose(out.value, (p['x'] - running.mean) / np.sqrt(running.var + 1e-5))


def test_batchnorm_train_needs_two_samples(gen):
    p = {'x': gen.normal(size=(1, 3)), 'gamma': np.ones((1, 3)), 'beta': np.zeros((1, 3))}
    with pytest.raises(DegenerateBatchError):
        _batchnorm(p, np.ones((1, 3)))


@pytest.mark.parametrize('mode', ['train', 'eval'])
def test_batchnorm_gradient(gen, mode):
    for _ in range(20):
        n, width = int(gen.integers(3, 9)), int(gen.integers(1, 5))
        p = {'x': gen.normal(size=(n, width)), 'gamma': gen.normal(size=(1, width)),
             'beta': gen.normal(size=(1, width))}
        weights = gen.normal(size=(n, width))
        running = RunningStats(gen.normal(size=width), gen.uniform(0.5, 2.0, size=width))
        tape, _, _, loss = _batchnorm(p, weights, mode, running)
        numeric = numeric_gradient(lambda q: float(_batchnorm(q, weights, mode, running)[3].value), p)
        assert max_relative_error(backward(tape, loss), numeric) < 1e-5


# ---- tape ----

def test_backward_of_sum_is_ones(gen):
    tape = Tape()
    w = tape.param('w', gen.normal(size=(3, 2)))
    grads = backward(tape, sum_(tape, w))
    np.testing.assert_array_equal(grads['w'], np.ones((3, 2)))


def test_backward_of_zero_times_x(gen):
    tape = Tape()
    w = tape.param('w', gen.normal(size=4))
    grads = backward(tape, scale(tape, sum_(tape, w), 0.0))
    np.testing.assert_array_equal(grads['w'], np.zeros(4))


def test_unused_param_gets_zero_gradient(gen):
    tape = Tape()
    w = tape.param('w', gen.normal(size=2))
    tape.param('unused', gen.normal(size=3))
    grads = backward(tape, sum_(tape, w))
    np.testing.assert_array_equal(grads['unused'], np.zeros(3))


# ---- Adam ----

def test_adam_zero_gradient_keeps_params():
    params = {'w': np.array([1.0, -2.0, 3.0])}
    updated = adam_step(AdamState(), params, {'w': np.zeros(3)})
    np.testing.assert_array_equal(updated['w'], params['w'])


def test_adam_first_step_moves_by_learning_rate():
    state = AdamState(learning_rate=0.01)
    g = np.array([2.0, -0.5, 1e-3])
    updated = adam_step(state, {'w': np.zeros(3)}, {'w': g})
    expected = -0.01 * g / (np.abs(g) + state.eps)
    np.testing.assert_allclose(updated['w'], expected, atol=1e-12)
    np.testing.assert_allclose(updated['w'], -0.01 * np.sign(g), atol=1e-6)


def test_adam_converges_on_quadratic():
    state = AdamState(learning_rate=0.1)
    params = {'w': np.zeros(1)}
    for _ in range(200):
        params = adam_step(state, params, {'w': 2.0 * (params['w'] - 3.0)})
    assert abs(params['w'][0] - 3.0) < 0.05


def test_adam_shape_mismatch():
    with pytest.raises(ShapeError):
        adam_step(AdamState(), {'w': np.zeros(3)}, {'w': np.zeros(2)})


# ---- GRVM ----

def test_grvm_roundtrip(tmp_path):
    matrix = np.arange(6, dtype=np.float64).reshape(2, 3) / 4.0
    write_grvm(tmp_path / 'm.grvm', matrix)
    np.testing.assert_array_equal(read_grvm(tmp_path / 'm.grvm'), matrix)


def test_grvm_bad_magic(tmp_path):
    path = tmp_path / 'bad.grvm'
    path.write_bytes(b'NOPE' + bytes(9))
    with pytest.raises(FormatError):
        read_grvm(path)


def test_grvm_truncated_payload(tmp_path):
    path = tmp_path / 'short.grvm'
    write_grvm(path, np.ones((3, 3)))
    path.write_bytes(path.read_bytes()[:-4])
    with pytest.raises(FormatError):
        read_grvm(path)
