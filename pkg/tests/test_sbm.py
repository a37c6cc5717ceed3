"""Tests for partially observed SBM generation."""

import logging

import numpy as np
import pytest

from sketchcluster.exceptions import ValidationError
from sketchcluster.graph import EdgeState, Partition
from sketchcluster.sbm import (
    SbmParams,
    balanced_sizes,
    empirical_densities,
    generate,
    unbalanced_preset,
)


def test_sbm_params_validation():
    """Test SbmParams rejects inconsistent sizes and probabilities."""
    with pytest.raises(ValidationError, match="sum"):
        SbmParams(10, (4, 4), 0.8, 0.1, 0.7)
    with pytest.raises(ValidationError):
        SbmParams(10, (10, 0), 0.8, 0.1, 0.7)
    with pytest.raises(ValidationError, match="p must"):
        SbmParams(10, (5, 5), 0.0, 0.1, 0.7)
    with pytest.raises(ValidationError, match="q must"):
        SbmParams(10, (5, 5), 0.8, 1.0, 0.7)
    with pytest.raises(ValidationError, match="rho must"):
        SbmParams(10, (5, 5), 0.8, 0.1, 0.0)


def test_sbm_params_warns_outside_structure(caplog):
    """Test p <= 1/2 logs a warning but is accepted."""
    with caplog.at_level(logging.WARNING, logger="sketchcluster.sbm"):
        params = SbmParams(10, (5, 5), 0.4, 0.1, 0.7)

    assert params.r == 2
    assert "not guaranteed" in caplog.text


def test_sbm_params_dict_round_trip():
    """Test to_dict/from_dict preserve every field."""
    params = SbmParams(10, (6, 4), 0.8, 0.1, 0.7, seed=3)
    data = params.to_dict()

    assert data["cluster_sizes"] == [6, 4]
    assert SbmParams.from_dict(data) == params
    assert params.n_min == 4
    assert params.with_seed(9).seed == 9


def test_balanced_sizes():
    """Test balanced_sizes spreads the remainder over the first clusters."""
    assert balanced_sizes(10, 3) == [4, 3, 3]
    assert sum(balanced_sizes(1001, 4)) == 1001
    with pytest.raises(ValidationError):
        balanced_sizes(3, 4)


def test_unbalanced_preset_sizes():
    """Test the unbalanced family: r_small clusters of n_min plus one large."""
    params = unbalanced_preset(n_min=50, n_nodes=800, r_small=2)

    assert params.cluster_sizes == (50, 50, 700)
    assert params.r == 3
    assert params.n_min == 50
    assert (params.p, params.q, params.rho) == (0.8, 0.1, 0.7)


def test_unbalanced_preset_needs_room():
    """Test the large cluster must be non-empty."""
    with pytest.raises(ValidationError, match="no room"):
        unbalanced_preset(n_min=400, n_nodes=800, r_small=2)


def test_generate_is_deterministic():
    """Test the same seed gives the same graph and a new seed a new one."""
    params = SbmParams(60, (30, 30), 0.8, 0.1, 0.7, seed=11)
    g1, t1 = generate(params)
    g2, t2 = generate(params)
    g3, _ = generate(params.with_seed(12))

    assert g1 == g2
    assert t1.partition == t2.partition
    assert g1 != g3


def test_generate_ground_truth(small_sbm):
    """Test L is the block indicator and S marks observed disagreements."""
    params, graph, truth = small_sbm
    labels = truth.partition.labels

    assert truth.partition.sizes.tolist() == list(params.cluster_sizes)
    assert np.array_equal(truth.low_rank, labels[:, None] == labels[None, :])
    observed = graph.observed_mask()
    disagree = graph.numeric(np.int8) != truth.low_rank
    assert np.array_equal(truth.sparse_support, observed & disagree)
    assert not truth.sparse_support[~observed].any()


def test_generate_graph_invariants(small_sbm):
    """Test generated graphs are symmetric with a unit diagonal."""
    _, graph, _ = small_sbm

    assert np.array_equal(graph.states, graph.states.T)
    assert (np.diagonal(graph.states) == EdgeState.ONE).all()


def test_generate_empirical_densities_close():
    """Test p, q and rho estimates land near their targets on a mid-size graph."""
    params = SbmParams(600, (300, 300), 0.8, 0.1, 0.7, seed=5)
    graph, truth = generate(params)
    est = empirical_densities(graph, truth.partition)

    # ~125k observed pairs: standard errors are well below 0.01
    assert est.rho_hat == pytest.approx(0.7, abs=0.01)
    assert est.p_hat == pytest.approx(0.8, abs=0.01)
    assert est.q_hat == pytest.approx(0.1, abs=0.01)
    assert est.pairs == 600 * 599 // 2


def test_generate_full_observation_and_extremes():
    """Test rho=1 observes everything and p=1, q=0 gives exact cliques."""
    params = SbmParams(20, (10, 10), 1.0, 0.0, 1.0, seed=0)
    graph, truth = generate(params)

    assert graph.observation_rate() == 1.0
    assert np.array_equal(graph.numeric(np.int8), truth.low_rank)
    assert not truth.sparse_support.any()


def test_empirical_densities_size_mismatch(small_sbm):
    """Test density estimation rejects a foreign partition."""
    _, graph, _ = small_sbm

    with pytest.raises(ValidationError):
        empirical_densities(graph, Partition.from_sizes([5, 5]))
