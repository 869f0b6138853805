"""Shared test utilities: analytic references and synthetic moment sets."""

import numpy as np

from spinnet.moments import EnsembleMoments, TrajectoryMoments


def complete_graph_u11(n_nodes: int, t: float) -> complex:
    """Return-amplitude of node 1 under the complete graph.

    The adjacency matrix of K_N is J - I with J the all-ones matrix, whose
    spectrum is {N, 0}, so exp(-i A t) = e^{it} (I + (e^{-iNt} - 1) J / N).
    """
    return np.exp(1j * t) * (1.0 + (np.exp(-1j * n_nodes * t) - 1.0) / n_nodes)


def single_edge_graph(n_nodes: int) -> np.ndarray:
    a = np.zeros((n_nodes, n_nodes))
    a[0, 1] = a[1, 0] = 1.0
    return a


def complete_graph(n_nodes: int) -> np.ndarray:
    return np.ones((n_nodes, n_nodes)) - np.eye(n_nodes)


def random_admissible_gram(rng: np.random.Generator, n_components: int = 6) -> np.ndarray:
    """A 4x4 Gram mean reachable by averaging rank-1 records.

    Each component mimics one trajectory: the head of an m-vector whose full
    squared norm is 2, so the head norm is at most 2.
    """
    gram = np.zeros((4, 4), dtype=complex)
    for _ in range(n_components):
        v = rng.normal(size=4) + 1j * rng.normal(size=4)
        v *= np.sqrt(2.0 * rng.random()) / np.linalg.norm(v)
        gram += np.outer(v, v.conj())
    return gram / n_components


def moments_from_gram(gram: np.ndarray, u11=0.5 + 0.1j, u11_abs2=0.6) -> EnsembleMoments:
    """Wrap a single-step Gram (plus arbitrary consistent u11 moments)."""
    return EnsembleMoments(
        n_realizations=1,
        mean_u11=np.array([u11], dtype=complex),
        mean_u11_abs2=np.array([u11_abs2]),
        mean_m_gram=gram[None, :, :],
    )


def synthetic_trajectory(rng: np.random.Generator, n_steps: int, gram_size: int = 4) -> TrajectoryMoments:
    """Random record arrays with the right shapes (not physical; for accumulator tests)."""
    u11 = rng.normal(size=n_steps + 1) + 1j * rng.normal(size=n_steps + 1)
    g = rng.normal(size=(n_steps + 1, gram_size, gram_size)) * 1j
    g += rng.normal(size=(n_steps + 1, gram_size, gram_size))
    return TrajectoryMoments(
        u11=u11,
        u11_abs2=np.abs(u11) ** 2,
        m_gram=g,
        m_norm_check=np.full(n_steps + 1, 2.0),
    )
