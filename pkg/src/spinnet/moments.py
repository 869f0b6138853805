"""Sufficient statistics per trajectory and deterministic ensemble averaging.

Every observable produced downstream depends only on u11(t_k), |u11(t_k)|^2
and the Gram matrix of m_j = u_1j + u_2j for j in the first four nodes, so
that is all a trajectory contributes.  Ensemble means are accumulated with a
fixed-shape pairwise tree over the global trajectory index: an accumulator
covering trajectories [s, e) stores one partial sum per maximal aligned
dyadic block of that interval.  The block set, and therefore every floating
point operation in the final mean, depends only on the covered interval,
never on how work was split across workers.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "EnsembleAccumulator",
    "EnsembleMoments",
    "MomentRecord",
    "TrajectoryMoments",
    "extract_record",
    "moment_row",
]


def moment_row(first_two_columns: np.ndarray, gram_size: int):
    """Moment entries read off the first two propagator columns.

    ``first_two_columns`` is the (N, 2) block of the composed propagator;
    m_j is the j-th entry of their sum.
    """
    cols = first_two_columns
    u11 = complex(cols[0, 0])
    m = cols[:, 0] + cols[:, 1]
    head = m[:gram_size]
    gram = np.outer(head, head.conj())
    return u11, abs(u11) ** 2, gram, float(np.real(np.vdot(m, m)))


@dataclass
class MomentRecord:
    """Raw moments of one propagator at one step."""

    step_index: int
    u11: complex
    u11_abs2: float
    m_gram: np.ndarray
    m_norm_check: float

    @property
    def restricted(self) -> bool:
        """True when fewer than 4 nodes exist and the Gram is cut down."""
        return self.m_gram.shape[0] < 4


def extract_record(p) -> MomentRecord:
    """Moment record of a composed propagator (``dynamics.Propagator``)."""
    n = p.n_nodes
    if n < 2:
        raise ValueError("pair moments need at least 2 nodes")
    g = min(4, n)
    u11, u11_abs2, gram, m_norm = moment_row(p.matrix[:, :2], g)
    return MomentRecord(p.step_index, u11, u11_abs2, gram, m_norm)


@dataclass
class TrajectoryMoments:
    """Per-step moment records of one trajectory, stacked over the step grid."""

    u11: np.ndarray          # (K+1,) complex
    u11_abs2: np.ndarray     # (K+1,)
    m_gram: np.ndarray       # (K+1, g, g) complex
    m_norm_check: np.ndarray  # (K+1,)

    @property
    def n_steps(self) -> int:
        return self.u11.shape[0] - 1

    @property
    def gram_size(self) -> int:
        return self.m_gram.shape[1]

    def record(self, k: int) -> MomentRecord:
        return MomentRecord(
            k, complex(self.u11[k]), float(self.u11_abs2[k]), self.m_gram[k], float(self.m_norm_check[k])
        )


@dataclass
class _BlockSums:
    u11: np.ndarray
    u11_abs2: np.ndarray
    m_gram: np.ndarray


def _combine(left: _BlockSums, right: _BlockSums) -> _BlockSums:
    return _BlockSums(
        left.u11 + right.u11,
        left.u11_abs2 + right.u11_abs2,
        left.m_gram + right.m_gram,
    )


@dataclass
class EnsembleMoments:
    """Finalized ensemble averages over the step grid.

    The per-trajectory record arrays (shape (M, K+1, ...)) are kept only
    when the accumulator was built with ``retain_records=True``; they feed
    the bootstrap error estimates.
    """

    n_realizations: int
    mean_u11: np.ndarray
    mean_u11_abs2: np.ndarray
    mean_m_gram: np.ndarray
    records_u11: np.ndarray | None = None
    records_u11_abs2: np.ndarray | None = None
    records_m_gram: np.ndarray | None = None

    @property
    def n_steps(self) -> int:
        return self.mean_u11.shape[0] - 1

    @property
    def gram_size(self) -> int:
        return self.mean_m_gram.shape[1]

    @property
    def has_records(self) -> bool:
        return self.records_u11 is not None


class EnsembleAccumulator:
    """Order-deterministic mean accumulator over a contiguous index range.

    Trajectories must be added in increasing global index order.  Two
    accumulators over adjacent ranges merge into the accumulator of the
    union, bit for bit, regardless of where the range was split.
    """

    def __init__(self, n_steps: int, gram_size: int, retain_records: bool = False,
                 start_index: int = 0):
        self.n_steps = n_steps
        self.gram_size = gram_size
        self.retain_records = retain_records
        self.start_index = start_index
        self.next_index = start_index
        self._blocks: dict[tuple[int, int], _BlockSums] = {}
        self._records: list[TrajectoryMoments] = []

    @property
    def count(self) -> int:
        return self.next_index - self.start_index

    def _check_shape(self, tm: TrajectoryMoments):
        if tm.n_steps != self.n_steps or tm.gram_size != self.gram_size:
            raise ValueError(
                f"trajectory grid ({tm.n_steps} steps, gram {tm.gram_size}) does not match "
                f"accumulator ({self.n_steps} steps, gram {self.gram_size})"
            )

    def _insert(self, level: int, pos: int, sums: _BlockSums):
        while True:
            sibling = (level, pos ^ 1)
            other = self._blocks.pop(sibling, None)
            if other is None:
                self._blocks[(level, pos)] = sums
                return
            if pos & 1:
                sums = _combine(other, sums)
            else:
                sums = _combine(sums, other)
            pos >>= 1
            level += 1

    def add(self, tm: TrajectoryMoments):
        """Add the next trajectory (global index ``next_index``)."""
        self._check_shape(tm)
        self._insert(0, self.next_index, _BlockSums(tm.u11, tm.u11_abs2, tm.m_gram))
        if self.retain_records:
            self._records.append(tm)
        self.next_index += 1

    def merge(self, other: "EnsembleAccumulator"):
        """Absorb an accumulator covering the range right after this one."""
        if other.start_index != self.next_index:
            raise ValueError(
                f"cannot merge: other starts at {other.start_index}, expected {self.next_index}"
            )
        if other.n_steps != self.n_steps or other.gram_size != self.gram_size:
            raise ValueError("cannot merge accumulators with different grids")
        if other.retain_records != self.retain_records:
            raise ValueError("cannot merge accumulators with different record retention")
        for (level, pos), sums in sorted(other._blocks.items(), key=lambda kv: kv[0][1] << kv[0][0]):
            self._insert(level, pos, sums)
        self._records.extend(other._records)
        self.next_index = other.next_index

    def finalize(self) -> EnsembleMoments:
        """Means over the accumulated trajectories."""
        m = self.count
        if m < 1:
            raise ValueError("no trajectories accumulated")
        ordered = sorted(self._blocks.items(), key=lambda kv: kv[0][1] << kv[0][0])
        total = ordered[0][1]
        for _, sums in ordered[1:]:
            total = _combine(total, sums)
        out = EnsembleMoments(
            n_realizations=m,
            mean_u11=total.u11 / m,
            mean_u11_abs2=total.u11_abs2 / m,
            mean_m_gram=total.m_gram / m,
        )
        if self.retain_records:
            out.records_u11 = np.stack([t.u11 for t in self._records])
            out.records_u11_abs2 = np.stack([t.u11_abs2 for t in self._records])
            out.records_m_gram = np.stack([t.m_gram for t in self._records])
        return out
