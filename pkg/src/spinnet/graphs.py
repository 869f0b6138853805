"""Random interaction graphs, sampled fresh at every time step.

A graph on N nodes is a dense symmetric 0/1 adjacency matrix with zero
diagonal.  Two ensembles are supported:

* ``gilbert``: each of the n_max = N(N-1)/2 unordered pairs is an edge
  independently with probability ``xi``, so the edge count is
  Binomial(n_max, xi) and all graphs with the same edge count are equally
  likely.
* ``thermal``: each labeled graph carries Boltzmann weight exp(-n/T) in its
  edge count n.  Equivalently the edge count follows
  p(n) proportional to C(n_max, n) * exp(-n/T) and the configuration at
  fixed n is uniform.  This is exactly the Gilbert ensemble at
  xi = 1 / (1 + exp(1/T)), which stays below 1/2 for every finite T.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

__all__ = [
    "EnsembleSpec",
    "check_adjacency",
    "edge_count",
    "sample_gilbert",
    "sample_thermal",
    "thermal_edge_count_pmf",
]


def check_adjacency(a: np.ndarray) -> np.ndarray:
    """Validate a square symmetric hollow 0/1 matrix and return it as an array."""
    a = np.asarray(a)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"adjacency matrix must be square, got shape {a.shape}")
    if np.any(np.diag(a) != 0):
        raise ValueError("adjacency matrix must have a zero diagonal")
    if not np.array_equal(a, a.T):
        raise ValueError("adjacency matrix must be symmetric")
    if not np.isin(a, (0, 1)).all():
        raise ValueError("adjacency entries must be 0 or 1")
    return a


def edge_count(a: np.ndarray) -> int:
    """Number of edges, i.e. ones in the strict upper triangle."""
    a = check_adjacency(a)
    return int(np.triu(a, k=1).sum())


def _check_nodes(n_nodes: int) -> int:
    if n_nodes < 1:
        raise ValueError(f"n_nodes must be at least 1, got {n_nodes}")
    return int(n_nodes)


def sample_gilbert(n_nodes: int, xi: float, rng: np.random.Generator) -> np.ndarray:
    """Draw one graph from G(n_nodes, xi): each pair is an edge with probability xi."""
    return _sample_gilbert_batch(n_nodes, xi, rng, 1)[0]


def _sample_gilbert_batch(n_nodes, xi, rng, count):
    n = _check_nodes(n_nodes)
    if not 0.0 <= xi <= 1.0:
        raise ValueError(f"xi must be in [0, 1], got {xi}")
    iu = np.triu_indices(n, k=1)
    graphs = np.zeros((count, n, n))
    # rng.random((count, p)) consumes the stream exactly like count
    # successive rng.random(p) calls, so batching preserves determinism.
    graphs[:, iu[0], iu[1]] = rng.random((count, iu[0].size)) < xi
    graphs += np.transpose(graphs, (0, 2, 1))
    return graphs


def thermal_edge_count_pmf(n_max: int, temperature: float) -> np.ndarray:
    """Edge-count distribution p(n) ~ C(n_max, n) exp(-n/T), normalized.

    The binomial factor counts the equally likely configurations at fixed n;
    the Boltzmann factor exp(-n/T) is the per-configuration weight.
    """
    if temperature <= 0.0:
        raise ValueError(f"temperature must be positive, got {temperature}")
    counts = np.arange(n_max + 1)
    logw = np.array(
        [math.lgamma(n_max + 1) - math.lgamma(n + 1) - math.lgamma(n_max - n + 1) for n in counts]
    )
    logw = logw - counts / temperature
    logw -= logw.max()
    w = np.exp(logw)
    return w / w.sum()


@lru_cache(maxsize=64)
def _thermal_cdf(n_max: int, temperature: float) -> np.ndarray:
    cdf = np.cumsum(thermal_edge_count_pmf(n_max, temperature))
    cdf.flags.writeable = False
    return cdf


def sample_thermal(n_nodes: int, temperature: float, rng: np.random.Generator) -> np.ndarray:
    """Draw one graph from the thermal ensemble at temperature T.

    Inverse-CDF draw of the edge count from ``thermal_edge_count_pmf``,
    then a uniformly random set of that many pairs.
    """
    n = _check_nodes(n_nodes)
    n_max = n * (n - 1) // 2
    cdf = _thermal_cdf(n_max, temperature)
    n_edges = int(np.searchsorted(cdf, rng.random(), side="right"))
    n_edges = min(n_edges, n_max)
    a = np.zeros((n, n))
    if n_edges:
        iu = np.triu_indices(n, k=1)
        chosen = rng.choice(n_max, size=n_edges, replace=False)
        a[iu[0][chosen], iu[1][chosen]] = 1.0
        a += a.T
    return a


@dataclass(frozen=True)
class EnsembleSpec:
    """Which graph ensemble to draw from, and its parameter.

    ``kind`` is ``"gilbert"`` (parameter ``xi`` in [0, 1]) or ``"thermal"``
    (parameter ``temperature`` > 0).
    """

    kind: str
    n_nodes: int
    xi: float | None = None
    temperature: float | None = None

    def __post_init__(self):
        _check_nodes(self.n_nodes)
        if self.kind == "gilbert":
            if self.xi is None or not 0.0 <= self.xi <= 1.0:
                raise ValueError(f"gilbert ensemble needs xi in [0, 1], got {self.xi}")
        elif self.kind == "thermal":
            if self.temperature is None or self.temperature <= 0.0:
                raise ValueError(
                    f"thermal ensemble needs temperature > 0, got {self.temperature}"
                )
        else:
            raise ValueError(f"unknown ensemble kind {self.kind!r}")

    @property
    def n_max(self) -> int:
        return self.n_nodes * (self.n_nodes - 1) // 2

    def sample(self, rng: np.random.Generator) -> np.ndarray:
        if self.kind == "gilbert":
            return sample_gilbert(self.n_nodes, self.xi, rng)
        return sample_thermal(self.n_nodes, self.temperature, rng)

    def sample_batch(self, rng: np.random.Generator, count: int) -> np.ndarray:
        """Draw ``count`` independent graphs as a (count, N, N) array."""
        if self.kind == "gilbert":
            return _sample_gilbert_batch(self.n_nodes, self.xi, rng, count)
        return np.stack([sample_thermal(self.n_nodes, self.temperature, rng) for _ in range(count)])
