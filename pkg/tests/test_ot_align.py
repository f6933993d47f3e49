import numpy as np
import pytest
from scipy.stats import ortho_group

from groovebench.evaluate.metrics import trace_metric
from groovebench.exceptions import DegenerateGeometryError, InputError, ParameterError, ShapeError
from groovebench.ot_align import align
from groovebench.ot_align.coot import coot
from groovebench.ot_align.gromov import entropic_gw
from groovebench.ot_align.labeled import labeled
from groovebench.ot_align.plan import AlignSpec
from groovebench.ot_align.sinkhorn import sinkhorn_eot


def _clusters(gen, n_clusters=4, per_cluster=4, width=3, spread=0.05):
    centers = gen.normal(scale=5.0, size=(n_clusters, width))
    return np.repeat(centers, per_cluster, axis=0) + gen.normal(scale=spread, size=(n_clusters * per_cluster, width))


# ---- EOT ----

def test_single_point_plan():
    plan = sinkhorn_eot([[1.0, 2.0]], [[3.0, 4.0]])
    np.testing.assert_array_equal(plan.coupling, [[1.0]])


def test_eot_marginals(gen):
    for _ in range(50):
        n1, n2 = gen.integers(2, 65, size=2)
        plan = sinkhorn_eot(gen.normal(size=(n1, 3)), gen.normal(size=(n2, 3)), AlignSpec(epsilon=0.1))
        assert plan.converged
        assert plan.marginal_violation() < 1e-6
        assert np.all(plan.coupling >= 0)
        assert plan.coupling.sum() == pytest.approx(1.0)


def test_eot_small_epsilon_recovers_identity(gen):
    Z = gen.normal(size=(8, 4))
    plan = sinkhorn_eot(Z, Z, AlignSpec(epsilon=1e-3))
    assert trace_metric(plan) > 0.95


def test_eot_epsilon_ladder(gen):
    Z = gen.normal(size=(20, 5))
    traces = [trace_metric(sinkhorn_eot(Z, Z, AlignSpec(epsilon=eps))) for eps in (1.0, 0.3, 0.1, 0.03)]
    assert traces == sorted(traces)
    assert traces[-1] > traces[0]


def test_eot_permutation_equivariance(gen):
    Za, Zb = gen.normal(size=(10, 3)), gen.normal(size=(12, 3))
    perm = gen.permutation(10)
    plan = sinkhorn_eot(Za, Zb, AlignSpec(epsilon=0.1)).coupling
    permuted = sinkhorn_eot(Za[perm], Zb, AlignSpec(epsilon=0.1)).coupling
    np.testing.assert_allclose(permuted, plan[perm], atol=1e-8)


def test_eot_rejects_nan_and_width_mismatch(gen):
    Z = gen.normal(size=(4, 2))
    with pytest.raises(InputError):
        sinkhorn_eot(np.where(Z > 0, np.nan, Z), Z)
    with pytest.raises(ShapeError):
        sinkhorn_eot(Z, gen.normal(size=(4, 3)))


def test_eot_non_convergence_is_flagged(gen):
    plan = sinkhorn_eot(gen.normal(size=(30, 3)), gen.normal(size=(30, 3)),
                        AlignSpec(epsilon=1e-3, max_iter=2))
    assert not plan.converged
    assert plan.iterations == 2
    assert len(plan.residual_history) == 2


def test_eot_residual_never_increases(gen):
    for _ in range(10):
        n1, n2 = gen.integers(2, 40, size=2)
        plan = sinkhorn_eot(gen.normal(size=(n1, 3)), gen.normal(size=(n2, 3)), AlignSpec(epsilon=0.05))
        history = np.asarray(plan.residual_history)
        assert np.all(np.diff(history) <= 1e-12)


# ---- GW ----

def test_gw_self_alignment(gen):
    Z = _clusters(gen)
    plan = entropic_gw(Z, Z, AlignSpec(kind='egwot', epsilon=0.01))
    # 클러스터 단위로 비교
    clusters = np.repeat(np.arange(4), 4)
    block_mass = sum(plan.coupling[np.ix_(clusters == c, clusters == c)].sum() for c in range(4))
    assert block_mass > 0.9
    assert plan.marginal_violation() < 1e-6


def test_gw_rotation_invariance(gen):
    Z = _clusters(gen, width=4)
    rotation = ortho_group.rvs(4, random_state=0)
    spec = AlignSpec(kind='egwot', epsilon=0.05)
    base = entropic_gw(Z, Z, spec)
    rotated = entropic_gw(Z, Z @ rotation, spec)
    assert rotated.objective == pytest.approx(base.objective, abs=1e-6)


def test_gw_accepts_different_widths(gen):
    plan = entropic_gw(gen.normal(size=(6, 2)), gen.normal(size=(7, 5)))
    assert plan.shape == (6, 7)
    assert plan.objective is not None


def test_gw_degenerate_inputs(gen):
    with pytest.raises(DegenerateGeometryError):
        entropic_gw(np.ones((5, 2)), gen.normal(size=(5, 2)))
    with pytest.raises(DegenerateGeometryError):
        entropic_gw(gen.normal(size=(1, 2)), gen.normal(size=(5, 2)))


# ---- COOT ----

def _offset_columns(gen, n=16, p=6):
    return gen.normal(size=(n, p)) + 3.0 * np.arange(p)


def test_coot_self_alignment(gen):
    X = _offset_columns(gen)
    sample, feature = coot(X, X, AlignSpec(kind='labeled_coot', epsilon=0.01))
    assert trace_metric(sample) > 0.9
    np.testing.assert_array_equal(np.argmax(feature.coupling, axis=1), np.arange(6))
    assert sample.marginal_violation() < 1e-6
    assert feature.marginal_violation() < 1e-6
    assert sample.feature_plan is feature


def test_coot_recovers_column_permutation(gen):
    X = _offset_columns(gen)
    perm = gen.permutation(6)
    _, feature = coot(X, X[:, perm], AlignSpec(kind='labeled_coot', epsilon=0.01))
    # X[:, perm]의 l번째 열은 X의 perm[l]번째 열
    inverse = np.argsort(perm)
    np.testing.assert_array_equal(np.argmax(feature.coupling, axis=1), inverse)


def test_coot_needs_two_samples_and_features(gen):
    with pytest.raises(ShapeError):
        coot(gen.normal(size=(5, 1)), gen.normal(size=(5, 3)))


# ---- labeled ----

@pytest.mark.parametrize('aligner', ['eot', 'egwot', 'coot'])
def test_labeled_blocks_are_exclusive(gen, aligner):
    labels_a = np.repeat([0, 1, 2], [5, 6, 4])
    labels_b = gen.permutation(np.repeat([0, 1, 2], [4, 5, 7]))
    Za, Zb = gen.normal(size=(15, 3)), gen.normal(size=(16, 3))
    plan = labeled(aligner, labels_a, labels_b, (Za, Zb), AlignSpec(kind=f"labeled_{aligner}", epsilon=0.1))
    cross = labels_a[:, None] != labels_b[None, :]
    assert np.all(plan.coupling[cross] == 0.0)
    assert plan.coupling.sum() == pytest.approx(1.0)


def test_labeled_single_label_matches_base(gen):
    Za, Zb = gen.normal(size=(6, 3)), gen.normal(size=(7, 3))
    spec = AlignSpec(kind='labeled_eot', epsilon=0.1)
    plan = labeled('eot', np.zeros(6), np.zeros(7), (Za, Zb), spec)
    np.testing.assert_allclose(plan.coupling, sinkhorn_eot(Za, Zb, spec).coupling)


def test_labeled_self_alignment(gen):
    block = gen.normal(size=(6, 3))
    Z = np.vstack([block, block + 0.1])
    labels = np.repeat([0, 1], 6)
    plan = labeled('eot', labels, labels, (Z, Z), AlignSpec(kind='labeled_eot', epsilon=1e-3))
    assert trace_metric(plan) > 0.95


def test_labeled_block_mass_follows_label_frequency(gen):
    labels_a = np.repeat([0, 1], [2, 6])
    labels_b = np.repeat([0, 1], [4, 4])
    plan = labeled('eot', labels_a, labels_b, (gen.normal(size=(8, 2)), gen.normal(size=(8, 2))))
    # min(2/8, 4/8) : min(6/8, 4/8) = 1 : 2
    assert plan.coupling[:2, :4].sum() == pytest.approx(1.0 / 3.0)
    assert plan.coupling[2:, 4:].sum() == pytest.approx(2.0 / 3.0)


def test_labeled_unseen_label_gets_uniform_mass(gen):
    labels_a = np.array([0, 0, 1, 1, 2])
    labels_b = np.array([0, 0, 1, 1])
    plan = labeled('eot', labels_a, labels_b, (gen.normal(size=(5, 2)), gen.normal(size=(4, 2))))
    assert np.all(plan.coupling[4] > 0)
    np.testing.assert_allclose(plan.coupling[4], plan.coupling[4, 0])
    assert plan.coupling.sum() == pytest.approx(1.0)


def test_labeled_plan_meets_intended_marginals(gen):
    labels_a = np.array([0, 0, 1, 2])
    labels_b = np.array([0, 1, 1])
    plan = labeled('eot', labels_a, labels_b, (gen.normal(size=(4, 2)), gen.normal(size=(3, 2))))
    # 블록 질량 4/7, 3/7 + 반대편에 없는 라벨 2 행의 균등 질량, 전체 5/4로 재정규화
    np.testing.assert_allclose(plan.source_marginal, [8 / 35, 8 / 35, 12 / 35, 1 / 5])
    np.testing.assert_allclose(plan.target_marginal, [11 / 21, 5 / 21, 5 / 21])
    assert plan.marginal_violation() < 1e-12


@pytest.mark.parametrize('aligner', ['eot', 'egwot', 'coot'])
def test_labeled_marginals_are_checked_against_blocks(gen, aligner):
    labels_a = np.repeat([0, 1, 3], [6, 5, 2])
    labels_b = np.repeat([0, 1], [4, 7])
    plan = labeled(aligner, labels_a, labels_b, (gen.normal(size=(13, 3)), gen.normal(size=(11, 3))),
                   AlignSpec(kind=f"labeled_{aligner}", epsilon=0.1))
    assert plan.source_marginal.sum() == pytest.approx(1.0)
    np.testing.assert_allclose(plan.source_marginal[:6], plan.source_marginal[0])
    assert plan.marginal_violation() < 1e-6


def test_labeled_without_shared_labels(gen):
    with pytest.raises(InputError):
        labeled('eot', [0, 0], [1, 1], (gen.normal(size=(2, 2)), gen.normal(size=(2, 2))))


def test_align_dispatch_requires_labels(gen):
    Z = gen.normal(size=(4, 2))
    with pytest.raises(ParameterError):
        align(Z, Z, AlignSpec(kind='labeled_eot'))
    plan = align(Z, Z, AlignSpec(kind='labeled_coot'), [0, 0, 1, 1], [0, 0, 1, 1])
    assert plan.kind == 'labeled_coot'
    assert plan.feature_plan is not None
