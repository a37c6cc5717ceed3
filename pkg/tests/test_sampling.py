"""Tests for URS, SbS, SRS and mixed sampling, and pre-completion."""

import logging

import numpy as np
import pytest

from sketchcluster.config import SamplerConfig, SolverConfig
from sketchcluster.exceptions import ValidationError
from sketchcluster.graph import EdgeState, ObservedGraph, Partition, SketchIndex
from sketchcluster.sampling import (
    binary_embedding,
    draw_sketch,
    embed_columns,
    precomplete,
    sample_mixed,
    sample_sbs,
    sample_srs,
    sample_urs,
    sbs_cluster_probabilities,
    sbs_probabilities,
)
from sketchcluster.sbm import SbmParams, generate, unbalanced_preset
from tests.conftest import clique_graph


def test_sample_urs_distinct_and_sized(rng):
    """Test URS returns n_samples distinct in-range nodes."""
    idx = sample_urs(100, 30, rng)

    assert len(idx) == 30
    assert idx.parent_size == 100
    assert np.unique(idx.indices).size == 30
    assert idx.indices.min() >= 0 and idx.indices.max() < 100


def test_sample_urs_deterministic():
    """Test the same generator seed draws the same sketch."""
    a = sample_urs(50, 10, np.random.default_rng(1))
    b = sample_urs(50, 10, np.random.default_rng(1))

    assert a == b


def test_sample_urs_full_budget(rng):
    """Test N' = N samples every node."""
    assert sample_urs(8, 8, rng).indices.tolist() == list(range(8))


@pytest.mark.parametrize("n_samples", [0, 11])
def test_sample_urs_budget_bounds(rng, n_samples):
    """Test sketch sizes outside [1, N] are rejected."""
    with pytest.raises(ValidationError):
        sample_urs(10, n_samples, rng)


def test_sbs_probabilities_inverse_degree():
    """Test first-draw SbS weights are proportional to 1/degree_l0."""
    # node 0 sees everybody, nodes 1-3 only node 0
    states = np.zeros((4, 4), dtype=np.int8)
    states[0, :] = states[:, 0] = 1
    np.fill_diagonal(states, 1)
    probs = sbs_probabilities(ObservedGraph(states))

    # degrees 4, 2, 2, 2
    weights = np.array([1 / 4, 1 / 2, 1 / 2, 1 / 2])
    assert probs == pytest.approx(weights / weights.sum())
    assert probs.sum() == pytest.approx(1.0)


def test_sbs_favors_small_clusters():
    """Test SbS gives small clusters far more than their uniform share."""
    params = unbalanced_preset(n_min=20, n_nodes=400, r_small=2, p=0.8, q=0.05, rho=0.7, seed=2)
    graph, truth = generate(params)
    cluster_probs = sbs_cluster_probabilities(graph, truth.partition)

    small_share = cluster_probs[:2].sum()
    uniform_share = 40 / 400
    assert cluster_probs.sum() == pytest.approx(1.0)
    assert small_share > 3 * uniform_share


def test_sample_sbs_draws_distinct(rng, small_sbm):
    """Test SbS draws without replacement."""
    _, graph, _ = small_sbm
    idx = sample_sbs(graph, 120, rng)

    assert len(idx) == 120
    assert np.unique(idx.indices).size == 120


def test_binary_embedding_entries(rng):
    """Test the embedding matrix is m x N with +-1 entries."""
    phi = binary_embedding(30, 12, rng)

    assert phi.shape == (12, 30)
    assert set(np.unique(phi).tolist()) <= {-1.0, 1.0}
    with pytest.raises(ValidationError):
        binary_embedding(30, 0, rng)


def test_embed_columns_unit_norm(rng, small_sbm):
    """Test embedded columns are scaled to unit length."""
    _, graph, _ = small_sbm
    columns = embed_columns(graph, 64, rng)

    assert columns.shape == (64, graph.n_nodes)
    assert np.linalg.norm(columns, axis=0) == pytest.approx(np.ones(graph.n_nodes))


def test_sample_srs_balances_cluster_representation():
    """Test SRS picks small cliques far more often than their size suggests."""
    graph = clique_graph([200, 20, 20])
    truth = Partition.from_sizes([200, 20, 20])
    idx = sample_srs(graph, 30, 500, np.random.default_rng(3))

    counts = np.bincount(truth.labels[idx.indices], minlength=3)
    assert counts.sum() == 30
    # uniform sampling would expect 2.5 per small clique
    assert counts[1] >= 4
    assert counts[2] >= 4


def test_sample_srs_respects_exclude(rng):
    """Test excluded nodes are never drawn and only new picks are returned."""
    graph = clique_graph([10, 10])
    exclude = np.arange(0, 20, 2)
    idx = sample_srs(graph, 10, 32, rng, exclude=exclude)

    assert len(idx) == 10
    assert not np.isin(idx.indices, exclude).any()
    assert idx.indices.tolist() == list(range(1, 20, 2))


def test_sample_srs_budget_counts_exclusions(rng):
    """Test SRS cannot draw more nodes than remain after exclusions."""
    graph = clique_graph([5, 5])
    with pytest.raises(ValidationError):
        sample_srs(graph, 8, 16, rng, exclude=np.arange(3))


def test_sample_mixed_split(rng):
    """Test mixed sampling draws floor(f N') by URS and the rest by SRS, all distinct."""
    graph = clique_graph([30, 30, 30])
    idx = sample_mixed(graph, 25, 0.5, 64, rng)

    assert len(idx) == 25
    assert np.unique(idx.indices).size == 25


@pytest.mark.parametrize("fraction", [0.0, 1.0])
def test_sample_mixed_degenerate_fractions(rng, fraction):
    """Test fraction 0 is pure SRS and fraction 1 pure URS."""
    graph = clique_graph([10, 10])
    idx = sample_mixed(graph, 6, fraction, 16, rng)

    assert len(idx) == 6


def test_draw_sketch_dispatch(small_sbm):
    """Test draw_sketch honours every strategy and the budget."""
    _, graph, _ = small_sbm
    for strategy in ("urs", "sbs", "srs", "mixed"):
        cfg = SamplerConfig(strategy=strategy, n_samples=40, embed_dim=32)
        idx = draw_sketch(graph, cfg, np.random.default_rng(0))
        assert len(idx) == 40, strategy


def test_precomplete_restores_hidden_clique_edges():
    """Test pre-completion fills unobserved intra-cluster pairs of noiseless cliques."""
    params = SbmParams(60, (20, 20, 20), p=1.0, q=0.0, rho=0.9, seed=4)
    graph, truth = generate(params)
    completed = precomplete(graph, 30, SolverConfig(), np.random.default_rng(8))

    assert completed.r_hat == 3
    assert np.array_equal(completed.graph.numeric(np.int8), truth.low_rank)
    assert completed.added_ones == int((graph.states[truth.low_rank == 1] == EdgeState.UNOBSERVED).sum())


def test_precomplete_only_raises_entries(small_sbm):
    """Test pre-completion never removes an observed one and keeps the base graph."""
    _, graph, _ = small_sbm
    completed = precomplete(graph, 90, SolverConfig(), np.random.default_rng(1))

    before = graph.states == EdgeState.ONE
    after = completed.graph.states == EdgeState.ONE
    assert (after | ~before).all()
    assert completed.base is graph
    assert completed.completion_matrix.shape == (graph.n_nodes, completed.r_hat)
    assert (completed.completion_matrix.sum(axis=1) <= 1).all()
    # unchanged entries keep their tri-state value
    assert np.array_equal(completed.graph.states[~after], graph.states[~after])


def test_precomplete_small_budget_unchanged(caplog, small_sbm):
    """Test budgets below two leave the graph untouched."""
    _, graph, _ = small_sbm
    with caplog.at_level(logging.WARNING, logger="sketchcluster.sampling"):
        completed = precomplete(graph, 1, SolverConfig(), np.random.default_rng(0))

    assert completed.graph is graph
    assert completed.r_hat == 0
    assert completed.added_ones == 0
    assert "too small" in caplog.text


def test_sbs_two_node_graph_takes_both(rng):
    """Test N' = N returns every node whatever the weights."""
    graph = ObservedGraph.from_matrix(np.ones((2, 2)))

    assert sample_sbs(graph, 2, rng).indices.tolist() == [0, 1]


def test_sbs_weights_monotone_in_degree(small_sbm):
    """Test a node with larger observed degree never gets a larger first-draw probability."""
    _, graph, _ = small_sbm
    degrees = graph.degrees_l0()
    probs = sbs_probabilities(graph)
    order = np.argsort(degrees, kind="stable")

    assert (np.diff(probs[order]) <= 1e-15).all()


@pytest.mark.parametrize("sizes", [[10, 10, 80], [3, 50, 7, 140], [1, 99]])
def test_sbs_cluster_probabilities_equal_on_cliques(sizes):
    """Test single-draw SbS cluster probabilities are exactly 1/r on ideal cliques."""
    graph = clique_graph(sizes)
    probs = sbs_cluster_probabilities(graph, Partition.from_sizes(sizes))

    assert np.abs(probs - 1 / len(sizes)).max() < 1e-12


def test_same_seed_same_sketch(small_sbm):
    """Test every strategy draws the same index set from the same seed."""
    _, graph, _ = small_sbm
    for strategy in ("urs", "sbs", "srs", "mixed"):
        cfg = SamplerConfig(strategy=strategy, n_samples=25, embed_dim=16)
        a = draw_sketch(graph, cfg, np.random.default_rng(99))
        b = draw_sketch(graph, cfg, np.random.default_rng(99))
        assert a == b, strategy


def test_precomplete_ideal_graph_is_noop():
    """Test an already complete union of cliques gains no new ones."""
    graph = clique_graph([15, 15, 10])
    cfg = SolverConfig(lambda_mode="fixed", lambda_fixed_override=1.5)
    completed = precomplete(graph, 24, cfg, np.random.default_rng(2))

    assert completed.graph == graph
    assert completed.added_ones == 0


def test_precomplete_unconnected_node_stays_unassigned():
    """Test a node with no ones towards the sketch is matched to the zero vector."""
    labels = Partition.from_sizes([12, 12]).labels
    values = labels[:, None] == labels[None, :]
    values[-1, :] = values[:, -1] = False
    graph = ObservedGraph.from_matrix(values)
    cfg = SolverConfig(lambda_mode="fixed", lambda_fixed_override=1.5)
    completed = precomplete(graph, 0, cfg, np.random.default_rng(0), idx=SketchIndex(range(23), 24))

    assert completed.r_hat == 2
    assert completed.completion_matrix[-1].sum() == 0
    assert completed.graph.entry(23, 0) is EdgeState.ZERO


def test_precomplete_rejects_foreign_sketch():
    """Test a preliminary sketch of another graph is rejected."""
    cfg = SolverConfig(lambda_mode="fixed")

    with pytest.raises(ValidationError, match="does not belong"):
        precomplete(clique_graph([4, 4]), 0, cfg, np.random.default_rng(0), idx=SketchIndex([0, 1], 9))


@pytest.mark.slow
def test_urs_cluster_counts_match_hypergeometric():
    """Test URS per-cluster counts have hypergeometric means over many repetitions."""
    truth = Partition.from_sizes([20, 30, 150])
    rng = np.random.default_rng(7)
    reps, n_samples = 1000, 40
    counts = np.array(
        [np.bincount(truth.labels[sample_urs(200, n_samples, rng).indices], minlength=3) for _ in range(reps)]
    )

    for k, size in enumerate([20, 30, 150]):
        share = size / 200
        mean = n_samples * share
        var = n_samples * share * (1 - share) * (200 - n_samples) / 199
        assert abs(counts[:, k].mean() - mean) <= 3 * np.sqrt(var / reps)


@pytest.mark.slow
def test_sbs_first_draw_frequencies_uniform_over_clusters():
    """Test the first SbS draw hits each clique of 10/10/80 about a third of the time."""
    sizes = [10, 10, 80]
    graph = clique_graph(sizes)
    labels = Partition.from_sizes(sizes).labels
    rng = np.random.default_rng(11)
    reps = 10000
    hits = np.bincount([labels[sample_sbs(graph, 1, rng).indices[0]] for _ in range(reps)], minlength=3)

    sigma = np.sqrt(reps * (1 / 3) * (2 / 3))
    assert (np.abs(hits - reps / 3) <= 3 * sigma).all()


@pytest.mark.slow
def test_srs_first_draw_frequencies_uniform_over_clusters():
    """Test the first SRS draw hits each of two cliques (20/180) half of the time."""
    sizes = [20, 180]
    graph = clique_graph(sizes)
    labels = Partition.from_sizes(sizes).labels
    rng = np.random.default_rng(13)
    reps = 5000
    hits = sum(int(labels[sample_srs(graph, 1, 64, rng).indices[0]] == 0) for _ in range(reps))

    assert abs(hits - reps / 2) <= 3 * np.sqrt(reps / 4)


@pytest.mark.slow
@pytest.mark.parametrize("seed", [0, 1, 2])
def test_precomplete_raises_intra_cluster_coverage(seed):
    """Test pre-completion increases the share of intra-cluster pairs observed as edges."""
    params = SbmParams(300, (150, 150), p=0.9, q=0.05, rho=0.5, seed=seed)
    graph, truth = generate(params)
    completed = precomplete(graph, 120, SolverConfig(), np.random.default_rng(seed))

    intra = truth.low_rank == 1
    before = (graph.states[intra] == EdgeState.ONE).mean()
    after = (completed.graph.states[intra] == EdgeState.ONE).mean()
    assert after > before
