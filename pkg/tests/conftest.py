"""Shared pytest fixtures for sketchcluster tests."""

import shutil
import tempfile

import numpy as np
import pytest

from sketchcluster.graph import ObservedGraph, Partition
from sketchcluster.sbm import SbmParams, generate


@pytest.fixture
def temp_workspace():
    """
    Temporary output directory for testing.

    Creates a temporary directory with sketchcluster_test_ prefix,
    yields the path, then cleans up after test completes.
    """
    temp_dir = tempfile.mkdtemp(prefix="sketchcluster_test_")
    yield temp_dir
    shutil.rmtree(temp_dir, ignore_errors=True)


@pytest.fixture
def rng():
    """Seeded generator so statistical tests are reproducible."""
    return np.random.default_rng(12345)


def clique_graph(sizes):
    """Fully observed disjoint cliques: the ideal cluster matrix of `sizes`."""
    labels = Partition.from_sizes(sizes).labels
    return ObservedGraph.from_matrix(labels[:, None] == labels[None, :])


@pytest.fixture
def ideal_graph():
    """Three disjoint cliques of sizes 5, 4 and 3, everything observed."""
    return clique_graph([5, 4, 3])


@pytest.fixture
def small_sbm():
    """
    Easy partially observed SBM: N=300, three balanced clusters.

    Returns (params, graph, truth).
    """
    params = SbmParams(300, (100, 100, 100), p=0.9, q=0.05, rho=0.8, seed=7)
    graph, truth = generate(params)
    return params, graph, truth
