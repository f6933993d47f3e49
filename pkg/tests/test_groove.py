import csv

import numpy as np
import pytest
from scipy.special import logsumexp

from groovebench.exceptions import InfeasibleBatchError, MissingPositivesError, UndefinedSimilarityError
from groovebench.groove.losses import (
    backtranslation_node, backtranslation_step, groupclip_loss, groupclip_node,
    reconstruction_loss, reconstruction_node, similarity, translate,
)
from groovebench.groove.model import GrooveHyper, decode, decode_node, encode, encode_node, init_model
from groovebench.groove.network import ForwardPass
from groovebench.groove.persist import load_model, save_model
from groovebench.groove.ps_baseline import PSConfig, train_ps_baseline
from groovebench.groove.sampler import plan_balanced_batches
from groovebench.groove.trainer import TrainConfig, train
from groovebench.numerics.adam import AdamState, adam_step
from groovebench.numerics.gradcheck import max_relative_error, numeric_gradient
from groovebench.numerics.rng import RngStream
from groovebench.numerics.tape import Tape, add, backward, mse, scale
from groovebench.utils.dataset_io import Dataset

TINY = GrooveHyper(latent_dim=3, encoder_hidden=(5,), decoder_hidden=(5,))


# ---- 유사도 ----

def test_cosine_self_similarity():
    assert similarity('cosine', [3.0, -1.0, 2.0], [3.0, -1.0, 2.0]) == pytest.approx(1.0)


def test_tdist_values():
    assert similarity('tdist', [1.0, 2.0], [1.0, 2.0]) == pytest.approx(1.0)
    assert similarity('tdist', [0.0, 0.0], [np.sqrt(0.2), 0.0], tau=0.2, eta=1.0) == pytest.approx(0.5)


def test_cosine_zero_vector():
    with pytest.raises(UndefinedSimilarityError):
        similarity('cosine', [0.0, 0.0], [1.0, 0.0])


# ---- GroupCLIP ----

def _info_nce(Z1, Z2, tau):
    """앵커마다 positive가 하나뿐인 대칭 InfoNCE"""
    U1 = Z1 / np.linalg.norm(Z1, axis=1, keepdims=True)
    U2 = Z2 / np.linalg.norm(Z2, axis=1, keepdims=True)
    logits = U1 @ U2.T / tau
    diag = np.diag(logits)
    forward = np.mean(logsumexp(logits, axis=1) - diag)
    reverse = np.mean(logsumexp(logits, axis=0) - diag)
    return 0.5 * (forward + reverse)


def test_groupclip_reduces_to_info_nce(gen):
    Z1, Z2 = gen.normal(size=(8, 16)), gen.normal(size=(8, 16))
    labels = np.arange(8)
    value = groupclip_loss(Z1, Z2, labels, labels, 'cosine', tau=0.2)
    assert abs(value - _info_nce(Z1, Z2, 0.2)) < 1e-10


@pytest.mark.parametrize('kernel', ['cosine', 'tdist'])
def test_groupclip_single_label_is_zero(gen, kernel):
    labels = np.zeros(6, dtype=int)
    assert groupclip_loss(gen.normal(size=(6, 4)), gen.normal(size=(6, 4)), labels, labels, kernel) == \
        pytest.approx(0.0, abs=1e-12)


def test_groupclip_missing_positive(gen):
    with pytest.raises(MissingPositivesError):
        groupclip_loss(gen.normal(size=(4, 3)), gen.normal(size=(4, 3)), [0, 0, 1, 1], [0, 0, 2, 2])


@pytest.mark.parametrize('kernel', ['cosine', 'tdist'])
def test_groupclip_gradient(gen, kernel):
    for _ in range(20):
        n_labels, per_label, d = (int(v) for v in gen.integers(2, 5, size=3))
        labels1 = np.repeat(np.arange(n_labels), per_label)
        labels2 = gen.permutation(labels1)
        n = labels1.size
        params = {'z1': gen.normal(size=(n, d)), 'z2': gen.normal(size=(n, d))}

        def loss_node(p):
            tape = Tape()
            node = groupclip_node(tape, tape.param('z1', p['z1']), tape.param('z2', p['z2']),
                                  labels1, labels2, kernel, 0.2, 1.0)
            return tape, node

        tape, loss = loss_node(params)
        numeric = numeric_gradient(lambda p: float(loss_node(p)[1].value), params)
        assert max_relative_error(backward(tape, loss), numeric) < 1e-4


@pytest.mark.parametrize('kernel', ['cosine', 'tdist'])
def test_groupclip_ignores_sample_order(gen, kernel):
    labels1 = np.repeat(np.arange(3), 4)
    labels2 = gen.permutation(labels1)
    Z1, Z2 = gen.normal(size=(12, 5)), gen.normal(size=(12, 5))
    p1, p2 = gen.permutation(12), gen.permutation(12)
    shuffled = groupclip_loss(Z1[p1], Z2[p2], labels1[p1], labels2[p2], kernel)
    assert shuffled == pytest.approx(groupclip_loss(Z1, Z2, labels1, labels2, kernel), rel=1e-12)


def test_cosine_groupclip_ignores_positive_scaling(gen):
    labels = np.repeat(np.arange(3), 4)
    Z1, Z2 = gen.normal(size=(12, 5)), gen.normal(size=(12, 5))
    scaled = groupclip_loss(Z1 * gen.uniform(0.1, 10.0, size=(12, 1)), 3.0 * Z2, labels, labels)
    assert scaled == pytest.approx(groupclip_loss(Z1, Z2, labels, labels), rel=1e-12)


# ---- reconstruction / backtranslation ----

def _toy_batch(gen, n=16, k1=6, k2=4):
    return gen.normal(size=(n, k1)), gen.normal(size=(n, k2)), np.repeat(np.arange(4), n // 4)


def _random_instance(gen):
    """작은 무작위 폭/배치 크기의 모델과 배치"""
    k1, k2 = (int(v) for v in gen.integers(2, 7, size=2))
    n_labels, per_label = int(gen.integers(2, 4)), int(gen.integers(2, 4))
    labels = np.repeat(np.arange(n_labels), per_label)
    n = labels.size
    model = init_model(k1, k2, TINY, seed=int(gen.integers(1000)))
    return model, gen.normal(size=(n, k1)), gen.normal(size=(n, k2)), labels


@pytest.mark.parametrize('kernel', ['cosine', 'tdist'])
def test_step1_loss_gradient(gen, kernel):
    hyper = TINY.model_copy(update={'kernel': kernel})
    for _ in range(20):
        model, x1, x2, labels = _random_instance(gen)

        def loss_node(p):
            fp = ForwardPass(p, model.buffers)
            recon, z1, z2 = reconstruction_node(fp, model, fp.const(x1), fp.const(x2), 'train', RngStream(0))
            gclip = groupclip_node(fp.tape, z1, z2, labels, labels, kernel, hyper.tau, hyper.eta)
            return fp.tape, add(fp.tape, scale(fp.tape, recon, hyper.beta), scale(fp.tape, gclip, hyper.alpha))

        tape, loss = loss_node(model.params)
        numeric = numeric_gradient(lambda p: float(loss_node(p)[1].value), model.params)
        assert max_relative_error(backward(tape, loss), numeric) < 1e-4


def test_reconstruction_is_mean_of_modality_mse(gen):
    x1, x2, _ = _toy_batch(gen)
    model = init_model(6, 4, TINY, seed=2)
    r1 = decode(model, encode(model, x1, 1), 1)
    r2 = decode(model, encode(model, x2, 2), 2)
    expected = 0.5 * (np.mean((x1 - r1) ** 2) + np.mean((x2 - r2) ** 2))
    assert reconstruction_loss(model, x1, x2) == pytest.approx(expected, rel=1e-12)


def test_backtranslation_gradient_holds_generator_fixed(gen):
    for _ in range(20):
        model, x1, x2, _ = _random_instance(gen)

        def loss_node(p):
            fp = ForwardPass(p, model.buffers)
            return fp.tape, backtranslation_node(fp, model, x1, x2, RngStream(0), generator=model)

        tape, loss = loss_node(model.params)
        numeric = numeric_gradient(lambda p: float(loss_node(p)[1].value), model.params)
        assert max_relative_error(backward(tape, loss), numeric) < 1e-4


def test_backtranslation_generation_stage_has_no_gradient(gen):
    x1, x2, _ = _toy_batch(gen)
    model = init_model(6, 4, TINY, seed=3)
    fp = ForwardPass(model.params, model.buffers)
    grads = backward(fp.tape, backtranslation_node(fp, model, x1, x2, RngStream(0)))

    # 생성 결과를 상수로 넣고 재인코딩/복원만 미분
    x12, x21 = translate(model, x1, 1), translate(model, x2, 2)
    ref = ForwardPass(model.params, model.buffers)
    rng = RngStream(0)
    z12 = encode_node(ref, model, ref.const(x12), 2, 'train', rng)
    z21 = encode_node(ref, model, ref.const(x21), 1, 'train', rng)
    x121 = decode_node(ref, model, z12, 1, 'train')
    x212 = decode_node(ref, model, z21, 2, 'train')
    loss = add(ref.tape, mse(ref.tape, ref.const(x1), x121), mse(ref.tape, ref.const(x2), x212))
    expected = backward(ref.tape, scale(ref.tape, loss, 0.5))

    assert set(grads) == set(expected)
    for name in grads:
        np.testing.assert_array_equal(grads[name], expected[name])


def test_backtranslation_matches_manual_chain(gen):
    x1, x2, _ = _toy_batch(gen)
    model = init_model(6, 4, TINY, seed=4)
    x12 = decode(model, encode(model, x1, 1), 2)
    x21 = decode(model, encode(model, x2, 2), 1)
    rng = RngStream(9)
    z12 = encode(model, x12, 2, 'train', rng)
    z21 = encode(model, x21, 1, 'train', rng)
    x121 = decode(model, z12, 1, 'train')
    x212 = decode(model, z21, 2, 'train')
    manual = 0.5 * (np.mean((x1 - x121) ** 2) + np.mean((x2 - x212) ** 2))
    assert backtranslation_step(model, x1, x2, RngStream(9)) == pytest.approx(manual, rel=1e-12)


# ---- encoder ----

def test_encode_eval_is_deterministic(gen, small_hyper):
    model = init_model(6, 4, small_hyper, seed=0)
    x = gen.normal(size=(5, 6))
    np.testing.assert_array_equal(encode(model, x, 1), encode(model, x, 1))
    assert encode(model, x, 1).shape == (5, 8)
    assert decode(model, encode(model, x, 1), 2).shape == (5, 4)


def test_encode_does_not_touch_running_stats(gen, small_hyper):
    model = init_model(6, 4, small_hyper, seed=0)
    before = {k: (v.mean.copy(), v.var.copy()) for k, v in model.buffers.items()}
    encode(model, gen.normal(size=(5, 6)), 1, 'train', RngStream(0))
    for key, (mean, var) in before.items():
        np.testing.assert_array_equal(model.buffers[key].mean, mean)
        np.testing.assert_array_equal(model.buffers[key].var, var)


def test_train_encode_variance_floor(gen):
    model = init_model(6, 4, TINY, seed=0)
    W, b = model.params['enc1.1.W'].copy(), model.params['enc1.1.b'].copy()
    W[:, 3:] = 0.0
    b[:, 3:] = -1000.0
    model = model.with_params({**model.params, 'enc1.1.W': W, 'enc1.1.b': b,
                               'coupling.0.W': np.eye(3), 'coupling.0.b': np.zeros((1, 3))})
    x = np.repeat(gen.normal(size=(1, 6)), 20000, axis=0)
    z = encode(model, x, 1, 'train', RngStream(0))
    np.testing.assert_allclose(z.var(axis=0), 1e-4, rtol=0.05)


def test_decoder_overfits_small_batch(gen):
    hyper = GrooveHyper(latent_dim=3, encoder_hidden=(8,), decoder_hidden=(32,))
    model = init_model(4, 4, hyper, seed=0)
    z, x = gen.normal(size=(8, 3)), gen.normal(size=(8, 4))

    def loss_node(p):
        fp = ForwardPass(p, model.buffers)
        return fp.tape, mse(fp.tape, fp.const(x), decode_node(fp, model, fp.const(z), 1, 'train'))

    state = AdamState(learning_rate=1e-2)
    params = model.params
    for step in range(3000):
        if step == 2000:
            state.learning_rate = 1e-3
        tape, loss = loss_node(params)
        params = adam_step(state, params, backward(tape, loss))
    assert float(loss_node(params)[1].value) < 1e-3


# ---- 균형 배치 ----

def test_effective_batch_size():
    labels = np.repeat(np.arange(3), 5)
    plan = plan_balanced_batches(labels, labels, batch_size=10)
    assert (plan.b_eff, plan.quota) == (9, 3)
    assert plan_balanced_batches(labels, labels, batch_size=9).b_eff == 9


def test_batches_are_balanced():
    labels1 = np.repeat(np.arange(3), [6, 8, 10])
    labels2 = np.repeat(np.arange(3), [9, 7, 6])
    plan = plan_balanced_batches(labels1, labels2, batch_size=6, seed=1)
    batches = plan.iter_batches()
    for _ in range(10):
        idx1, idx2 = next(batches)
        np.testing.assert_array_equal(np.bincount(labels1[idx1]), [2, 2, 2])
        np.testing.assert_array_equal(np.bincount(labels2[idx2]), [2, 2, 2])


def test_epoch_has_no_repeats():
    labels = np.repeat(np.arange(2), 8)
    plan = plan_balanced_batches(labels, labels, batch_size=4)
    drawn = np.concatenate([idx1 for idx1, _ in plan.epoch(RngStream(0))])
    assert np.unique(drawn).size == drawn.size


def test_infeasible_batch():
    labels = np.repeat(np.arange(2), 3)
    with pytest.raises(InfeasibleBatchError):
        plan_balanced_batches(labels, labels, batch_size=10)


# ---- 학습 ----

def test_zero_weights_leave_params(small_dataset, small_train):
    hyper = GrooveHyper(alpha=0.0, beta=0.0, latent_dim=4, encoder_hidden=(8,), decoder_hidden=(8,))
    model = init_model(30, 20, hyper, seed=0)
    before = {k: v.copy() for k, v in model.params.items()}
    model, _ = train(model, small_dataset, small_train)
    for name, value in before.items():
        np.testing.assert_array_equal(model.params[name], value)


def test_history_is_written(tmp_path, small_dataset, small_hyper, small_train):
    model = init_model(30, 20, small_hyper, seed=0)
    path = tmp_path / 'history.tsv'
    _, history = train(model, small_dataset, small_train, str(path))
    with open(path, newline='', encoding='utf-8') as f:
        rows = list(csv.reader(f, delimiter='\t'))
    assert rows[0] == ['iteration', 'groupclip', 'reconstruction', 'step1', 'backtranslation']
    assert len(rows) == small_train.iterations + 1
    assert len(history) == small_train.iterations


def test_autoencoder_only_skips_groupclip_and_backtranslation(small_dataset, small_hyper):
    config = TrainConfig(batch_size=16, iterations=3, ablation='autoencoder_only')
    _, history = train(init_model(30, 20, small_hyper, seed=0), small_dataset, config)
    assert all(np.isnan(r.groupclip) and np.isnan(r.backtranslation) for r in history)


def test_autoencoder_reduces_reconstruction(gen):
    X = gen.normal(size=(32, 6))
    Y = gen.normal(size=(32, 4))
    labels = np.repeat(np.arange(2), 16)
    dataset = Dataset(X, Y, labels, labels)
    model = init_model(6, 4, TINY, seed=0)
    before = reconstruction_loss(model, X, Y)
    config = TrainConfig(batch_size=32, iterations=150, learning_rate=1e-2, ablation='autoencoder_only')
    model, _ = train(model, dataset, config)
    assert reconstruction_loss(model, X, Y) < before


def test_training_is_deterministic(small_dataset, small_hyper, small_train):
    a, _ = train(init_model(30, 20, small_hyper, seed=0), small_dataset, small_train)
    b, _ = train(init_model(30, 20, small_hyper, seed=0), small_dataset, small_train)
    for name in a.params:
        np.testing.assert_array_equal(a.params[name], b.params[name])


# ---- PS 베이스라인 ----

def test_ps_width_and_determinism(small_dataset):
    config = PSConfig(hidden=(8,), iterations=5, batch_size=16, seed=0)
    a = train_ps_baseline(small_dataset, config)
    b = train_ps_baseline(small_dataset, config)
    assert a.representations[0].shape == (small_dataset.X.shape[0], 4)
    np.testing.assert_array_equal(a.embed(small_dataset.X, 1), b.embed(small_dataset.X, 1))


def test_ps_separable_accuracy(gen):
    labels = np.repeat(np.arange(3), 20)
    X = np.eye(3)[labels] * 5.0 + gen.normal(scale=0.1, size=(60, 3))
    Y = np.eye(3)[labels] * 5.0 + gen.normal(scale=0.1, size=(60, 3))
    model = train_ps_baseline(Dataset(X, Y, labels, labels),
                              PSConfig(hidden=(8,), iterations=300, learning_rate=1e-2, batch_size=30))
    assert model.accuracy(X, labels, 1) == 1.0
    assert model.accuracy(Y, labels, 2) == 1.0


# ---- 저장 ----

def test_model_roundtrip(tmp_path, gen, small_hyper):
    model = init_model(6, 4, small_hyper, seed=0)
    save_model(model, str(tmp_path / 'model'))
    loaded = load_model(str(tmp_path / 'model'))
    assert loaded.hyper == model.hyper
    assert loaded.widths == model.widths
    x = gen.normal(size=(5, 6))
    np.testing.assert_allclose(encode(loaded, x, 1), encode(model, x, 1), rtol=1e-4, atol=1e-5)
