import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.spatial.distance import pdist

from fedclus.clustering import (
    ClusterParams,
    assign_nearest,
    center_budget,
    cluster_client,
    cluster_samples,
    gate_quantities,
    select_centers,
)
from fedclus.datagen import ClientShard, Dataset
from fedclus.errors import ConfigError

from conftest import blobs


def test_three_point_trace():
    X = np.array([[0.0], [1.0], [10.0]])
    centers, idx = select_centers(X, ClusterParams(theta=0.5), return_indices=True)
    assert idx.tolist() == [0, 2]
    cs = assign_nearest(X, centers)
    assert [g.tolist() for g in cs.groups] == [[0, 1], [2]]


def test_identical_points_give_one_center():
    X = np.ones((5, 3))
    assert len(select_centers(X, ClusterParams())) == 1


def test_unit_square_trace():
    X = np.array([[0.0, 0.0], [0.0, 1.0], [1.0, 0.0], [1.0, 1.0]])
    _, idx = select_centers(X, ClusterParams(theta=0.9), return_indices=True)
    assert idx.tolist() == [0, 3]


def test_assignment_tie_goes_to_lower_center():
    cs = assign_nearest(np.array([[0.0], [0.5], [1.0]]), np.array([[0.0], [1.0]]))
    assert [g.tolist() for g in cs.groups] == [[0, 1], [2]]
    single = assign_nearest(np.random.default_rng(0).random((7, 2)), np.zeros((1, 2)))
    assert len(single) == 1 and single.sizes == [7]


@pytest.mark.parametrize("kw", [{"theta": 0.0}, {"theta": 1.0}, {"min_samples_to_cluster": 1}, {"gate_factor": 0}])
def test_param_validation(kw):
    with pytest.raises(ConfigError):
        ClusterParams(**kw)


def test_small_shard_is_not_clustered():
    X = np.random.default_rng(1).standard_normal((200, 4))
    cs = cluster_client(ClientShard(0, Dataset(X, np.zeros(200, int))), ClusterParams())
    assert len(cs) == 1 and cs.sizes == [200]


def test_two_blobs_split_cleanly_and_pass_gate():
    X, which = blobs(200, sep=10.0, dim=3, seed=0)
    cs = cluster_samples(X, ClusterParams(theta=0.5))
    assert len(cs) == 2
    for g in cs.groups:
        assert len(set(which[g])) == 1
    # brute-force gate quantities
    worst = max(pdist(X[g]).mean() for g in cs.groups)
    whole = pdist(X).mean()
    assert worst < 1.2 * whole
    assert gate_quantities(X, cs) == pytest.approx((worst, whole))


@pytest.mark.parametrize("seed", range(10))
def test_blob_groups_never_mix(seed):
    # extra centers can split a blob further, but never straddle the gap
    X, which = blobs(200, sep=10.0, dim=3, seed=seed)
    cs = cluster_samples(X, ClusterParams())
    assert all(len(set(which[g])) == 1 for g in cs.groups)


def test_gate_decision_matches_brute_force():
    r = np.random.default_rng(11)
    v = r.standard_normal((400, 3))
    X = v / np.linalg.norm(v, axis=1, keepdims=True) * r.random((400, 1)) ** (1 / 3)
    params = ClusterParams(theta=0.1)
    centers = select_centers(X, params)
    groups = assign_nearest(X, centers).groups
    worst = max(pdist(X[g]).mean() if len(g) > 1 else 0.0 for g in groups)
    keep = worst < 1.2 * pdist(X).mean()
    cs = cluster_samples(X, params)
    assert len(cs) == (len(groups) if keep else 1)


def test_gate_rejection_reverts_to_single_group():
    X, _ = blobs(200, sep=10.0, dim=3, seed=0)
    cs = cluster_samples(X, ClusterParams(theta=0.5, gate_factor=0.01))
    assert len(cs) == 1 and cs.sizes == [400]


def brute_check(X, params):
    """Replay the greedy selection and verify every admission and the stop."""
    centers, idx = select_centers(X, params, return_indices=True)
    n = len(X)
    D = np.linalg.norm(X[:, None] - X[None], axis=2)
    assert idx[0] == 0
    if D[0].max() == 0:
        assert len(idx) == 1
        return idx
    assert idx[1] == int(np.argmax(D[0]))
    d12 = D[0, idx[1]]
    for m in range(2, len(idx)):
        mind = D[:, idx[:m]].min(axis=1)
        assert mind[idx[m]] == mind.max()
        assert idx[m] == int(np.argmax(mind))
        assert mind[idx[m]] > params.theta * d12
    mind = D[:, idx].min(axis=1)
    assert mind.max() <= params.theta * d12 or len(idx) >= center_budget(n, params)
    return idx


@settings(max_examples=50, deadline=None)
@given(st.integers(1, 300), st.integers(1, 13), st.floats(0.05, 0.95), st.integers(0, 2**32 - 1))
def test_farthest_point_properties(n, dim, theta, seed):
    X = np.random.default_rng(seed).standard_normal((n, dim))
    params = ClusterParams(theta=theta, max_centers_divisor=10)
    idx = brute_check(X, params)
    cs = assign_nearest(X, X[idx])
    D = np.linalg.norm(X[:, None] - X[idx][None], axis=2)
    for j, g in enumerate(cs.groups):
        for i in g:
            assert D[i, j] == D[i].min() and j == int(np.argmin(D[i]))
    assert sorted(np.concatenate(cs.groups).tolist()) == list(range(n))
    assert all(len(g) > 0 for g in cs.groups)
