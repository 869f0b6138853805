"""One-excitation dynamics: step unitaries and composed propagators.

Restricted to the single-excitation sector the network Hamiltonian is the
(scaled) adjacency matrix, so a time step is exp(-i * scale * A * dt),
evaluated through the real-symmetric eigendecomposition.  Composed
propagators multiply newest factor on the left; entry ``matrix[j, i]`` is
the amplitude to sit on node j after starting from node i, so column i
holds the amplitude map of starting node i.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graphs import EnsembleSpec, check_adjacency
from .moments import TrajectoryMoments, moment_row

__all__ = [
    "EigensolverError",
    "Propagator",
    "compose",
    "generator_from_graph",
    "propagate_sequence",
    "run_trajectory",
    "step_unitary",
    "unitarity_defect",
]


class EigensolverError(RuntimeError):
    """Eigendecomposition failed; carries the offending matrix."""

    def __init__(self, matrix, detail):
        super().__init__(f"symmetric eigensolver did not converge: {detail}")
        self.matrix = matrix


def generator_from_graph(a: np.ndarray, coupling_scale: float = 1.0) -> np.ndarray:
    """Hermitian generator of one step: coupling_scale times the adjacency matrix."""
    if coupling_scale <= 0.0:
        raise ValueError(f"coupling_scale must be positive, got {coupling_scale}")
    return coupling_scale * check_adjacency(a).astype(float)


def step_unitary(h: np.ndarray, dt: float) -> np.ndarray:
    """exp(-i h dt) for real symmetric h, via spectral decomposition.

    Returns V diag(exp(-i w dt)) V^T, which is unitary and complex
    symmetric by construction.
    """
    if dt <= 0.0:
        raise ValueError(f"dt must be positive, got {dt}")
    h = np.asarray(h, dtype=float)
    try:
        w, v = np.linalg.eigh(h)
    except np.linalg.LinAlgError as exc:
        raise EigensolverError(h, exc) from exc
    return (v * np.exp(-1j * dt * w)) @ v.T


def unitarity_defect(matrix: np.ndarray) -> float:
    """Max entrywise deviation of U^dagger U from the identity."""
    m = np.asarray(matrix)
    return float(np.max(np.abs(m.conj().T @ m - np.eye(m.shape[0]))))


@dataclass
class Propagator:
    """Composed evolution after ``step_index`` steps; starts as the identity."""

    matrix: np.ndarray
    step_index: int = 0

    @classmethod
    def identity(cls, n_nodes: int) -> "Propagator":
        return cls(np.eye(n_nodes, dtype=complex), 0)

    @property
    def n_nodes(self) -> int:
        return self.matrix.shape[0]


def compose(p: Propagator, u: np.ndarray) -> Propagator:
    """Apply one more step unitary on the left of the composed propagator."""
    u = np.asarray(u)
    if u.shape != p.matrix.shape:
        raise ValueError(f"shape mismatch: step {u.shape} vs propagator {p.matrix.shape}")
    return Propagator(u @ p.matrix, p.step_index + 1)


def propagate_sequence(graphs, dt: float, coupling_scale: float = 1.0) -> list[Propagator]:
    """Full propagators for an explicit graph sequence, identity included.

    Returns [P(0), P(1), ..., P(len(graphs))].  Used by the oracles and by
    tests that need the whole matrix; ``run_trajectory`` is the lean path.
    """
    graphs = list(graphs)
    if graphs:
        n = check_adjacency(graphs[0]).shape[0]
    else:
        raise ValueError("graph sequence must not be empty")
    out = [Propagator.identity(n)]
    for a in graphs:
        u = step_unitary(generator_from_graph(a, coupling_scale), dt)
        out.append(compose(out[-1], u))
    return out


def _as_generator(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def run_trajectory(
    spec: EnsembleSpec,
    dt: float,
    n_steps: int,
    coupling_scale: float = 1.0,
    rng=None,
    chunk: int = 256,
) -> TrajectoryMoments:
    """One stochastic realization: fresh graph per step, moments per step.

    Only the first two propagator columns are propagated, because every
    accumulated moment is a function of them.  Graphs are drawn and
    diagonalized in chunks; the resulting records are identical for any
    chunk size because the random stream and the per-step arithmetic do
    not depend on it.

    The step grid has ``n_steps + 1`` entries; entry 0 belongs to the
    identity propagator.
    """
    if dt <= 0.0:
        raise ValueError(f"dt must be positive, got {dt}")
    if n_steps < 0:
        raise ValueError(f"n_steps must be nonnegative, got {n_steps}")
    if coupling_scale <= 0.0:
        raise ValueError(f"coupling_scale must be positive, got {coupling_scale}")
    n = spec.n_nodes
    if n < 2:
        raise ValueError("pair moments need at least 2 nodes")
    rng = _as_generator(rng)
    g = min(4, n)

    u11 = np.empty(n_steps + 1, dtype=complex)
    u11_abs2 = np.empty(n_steps + 1)
    m_gram = np.empty((n_steps + 1, g, g), dtype=complex)
    m_norm = np.empty(n_steps + 1)

    cols = np.zeros((n, 2), dtype=complex)
    cols[0, 0] = 1.0
    cols[1, 1] = 1.0
    u11[0], u11_abs2[0], m_gram[0], m_norm[0] = moment_row(cols, g)

    done = 0
    while done < n_steps:
        count = min(chunk, n_steps - done)
        graphs = spec.sample_batch(rng, count)
        w, v = np.linalg.eigh(graphs)
        phases = np.exp((-1j * dt * coupling_scale) * w)
        for j in range(count):
            vj = v[j]
            cols = (vj * phases[j]) @ (vj.T @ cols)
            k = done + j + 1
            u11[k], u11_abs2[k], m_gram[k], m_norm[k] = moment_row(cols, g)
        done += count

    return TrajectoryMoments(u11=u11, u11_abs2=u11_abs2, m_gram=m_gram, m_norm_check=m_norm)
