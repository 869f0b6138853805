"""Observables evaluated from ensemble moments.

All quantities are functions of E(u11), E(|u11|^2) and the averaged Gram
matrix E(m_j m_l^*):

* average fidelity over all pure initial states of node 1,
* average linear entropy 1 - Tr(rho_1^2) of node 1,
* reduced two-qubit states of the pairs (1,2), (1,3), (3,4) in the basis
  (|00>, |01>, |10>, |11>) with the first pair member as the left label,
* spin-flip concurrence of those states,
* two-qubit linear entropy of the pair (1,2).

Concurrence reported in series output goes through the spin-flip
eigenvalue route on the reconstructed density matrix; the coherence
magnitude |E(m_j m_l^*)| is kept as an independent cross-check, the two
agree to 1e-10 on any admissible moment set.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .moments import EnsembleMoments

__all__ = [
    "IntegrityError",
    "ObservableSeries",
    "OBSERVABLE_COLUMNS",
    "avg_fidelity",
    "avg_linear_entropy_single",
    "bootstrap_standard_errors",
    "concurrence_closed_form",
    "linear_entropy_pair",
    "reduced_pair_state",
    "series",
    "wootters_concurrence",
]

# pair label -> (j, l) indices into the moment Gram (0-based node indices)
PAIR_INDICES = {(1, 2): (0, 1), (1, 3): (0, 2), (3, 4): (2, 3)}

# CSV/series column name -> pair label for the three concurrences
CONCURRENCE_PAIRS = {"c12": (1, 2), "c13": (1, 3), "c34": (3, 4)}

OBSERVABLE_COLUMNS = ("fbar", "s1", "c12", "c13", "c34", "s12")

_BOUNDS = {
    "fbar": (1.0 / 6.0, 1.0),
    "s1": (0.0, 0.5),
    "c12": (0.0, 1.0),
    "c13": (0.0, 1.0),
    "c34": (0.0, 1.0),
    "s12": (0.0, 0.75),
}
_BOUND_TOL = 1e-9

# antidiagonal of the two-qubit spin flip Y (x) Y in the (00,01,10,11) basis
_YY = np.zeros((4, 4))
_YY[0, 3] = _YY[3, 0] = -1.0
_YY[1, 2] = _YY[2, 1] = 1.0


class IntegrityError(RuntimeError):
    """An observable left its admissible range; names the step and quantity."""

    def __init__(self, step: int, quantity: str, value: float, low: float, high: float):
        super().__init__(
            f"{quantity} = {value!r} at step {step} outside [{low}, {high}]"
        )
        self.step = step
        self.quantity = quantity
        self.value = value


def _fidelity(mean_u11, mean_u11_abs2):
    return 0.5 + np.real(mean_u11) / 3.0 + mean_u11_abs2 / 6.0


def _entropy_single(mean_u11, mean_u11_abs2):
    return mean_u11_abs2 - np.abs(mean_u11) ** 2 / 3.0 - 2.0 * mean_u11_abs2**2 / 3.0


def _entropy_pair(a, b, c):
    return a + b - a * b / 2.0 - a**2 / 2.0 - b**2 / 2.0 - np.abs(c) ** 2 / 2.0


def avg_fidelity(mom: EnsembleMoments, k: int) -> float:
    """Bloch-sphere averaged fidelity of node 1 at step k."""
    return float(_fidelity(mom.mean_u11[k], mom.mean_u11_abs2[k]))


def avg_linear_entropy_single(mom: EnsembleMoments, k: int) -> float:
    """Bloch-sphere averaged linear entropy of node 1 at step k."""
    return float(_entropy_single(mom.mean_u11[k], mom.mean_u11_abs2[k]))


def _pair_moments(mom: EnsembleMoments, k: int, pair):
    try:
        j, l = PAIR_INDICES[tuple(pair)]
    except KeyError:
        raise ValueError(f"unsupported pair {pair!r}; expected (1,2), (1,3) or (3,4)") from None
    if max(j, l) >= 2 and mom.gram_size < 4:
        raise ValueError(
            f"pair {pair} needs at least 4 nodes, Gram holds {mom.gram_size}"
        )
    gram = mom.mean_m_gram[k]
    return float(gram[j, j].real), float(gram[l, l].real), complex(gram[j, l])


def reduced_pair_state(mom: EnsembleMoments, k: int, pair) -> np.ndarray:
    """Ensemble-averaged two-qubit state of ``pair`` at step k.

    Basis order (|00>, |01>, |10>, |11>); the |11> sector is empty because
    the dynamics never leaves the one-excitation sector.
    """
    a, b, c = _pair_moments(mom, k, pair)
    rho = np.zeros((4, 4), dtype=complex)
    rho[0, 0] = 1.0 - a / 2.0 - b / 2.0
    rho[1, 1] = b / 2.0
    rho[2, 2] = a / 2.0
    rho[2, 1] = c / 2.0
    rho[1, 2] = np.conj(c) / 2.0
    return rho


def _spin_flip_roots(rho_stack: np.ndarray) -> np.ndarray:
    """Decreasing square roots of the eigenvalues of rho (Y x Y) rho* (Y x Y).

    Computed as the singular values of sqrt(rho) (Y x Y) sqrt(rho)*, which
    equal those roots exactly but carry only absolute rounding error; taking
    square roots of eigenvalues of the non-normal product rho rho~ instead
    would blow solver noise up to ~1e-8 whenever the state is close to pure.
    Eigenvalues of rho within solver noise below zero are clamped.
    """
    w, v = np.linalg.eigh(rho_stack)
    root_w = np.sqrt(np.clip(w, 0.0, None))
    sqrt_rho = (v * root_w[..., None, :]) @ np.swapaxes(v, -1, -2).conj()
    product = sqrt_rho @ _YY @ sqrt_rho.conj()
    return np.linalg.svd(product, compute_uv=False)


def _concurrence_from_roots(root: np.ndarray) -> np.ndarray:
    return np.maximum(0.0, root[..., 0] - root[..., 1:].sum(axis=-1))


def wootters_concurrence(rho: np.ndarray) -> float:
    """Spin-flip concurrence of a two-qubit density matrix."""
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (4, 4):
        raise ValueError(f"expected a 4x4 density matrix, got shape {rho.shape}")
    if np.max(np.abs(rho - rho.conj().T)) > 1e-10:
        raise ValueError("density matrix is not Hermitian")
    if abs(np.trace(rho).real - 1.0) > 1e-10:
        raise ValueError(f"density matrix trace is {np.trace(rho)}, expected 1")
    if np.linalg.eigvalsh(rho).min() < -1e-10:
        raise ValueError("density matrix is not positive semidefinite")
    return float(_concurrence_from_roots(_spin_flip_roots(rho)))


def concurrence_closed_form(mom: EnsembleMoments, k: int, pair) -> float:
    """|E(m_j m_l^*)|, the coherence-magnitude shortcut for these states."""
    _, _, c = _pair_moments(mom, k, pair)
    return abs(c)


def linear_entropy_pair(mom: EnsembleMoments, k: int) -> float:
    """Two-qubit linear entropy 1 - Tr(rho_12^2) at step k, in closed form."""
    a, b, c = _pair_moments(mom, k, (1, 2))
    return float(_entropy_pair(a, b, c))


@dataclass
class ObservableSeries:
    """Per-step observable values on the time grid t_k = k dt.

    Unrequested observables stay ``None``.  ``se`` maps a column name to its
    per-step bootstrap standard error, when one was computed.
    """

    t: np.ndarray
    fbar: np.ndarray | None = None
    s1: np.ndarray | None = None
    c12: np.ndarray | None = None
    c13: np.ndarray | None = None
    c34: np.ndarray | None = None
    s12: np.ndarray | None = None
    se: dict[str, np.ndarray] = field(default_factory=dict)

    def column(self, name: str) -> np.ndarray | None:
        if name not in OBSERVABLE_COLUMNS:
            raise ValueError(f"unknown observable column {name!r}")
        return getattr(self, name)


def _default_columns(gram_size: int):
    if gram_size >= 4:
        return OBSERVABLE_COLUMNS
    return ("fbar", "s1", "c12", "s12")


def _concurrence_series(mom: EnsembleMoments, pair) -> np.ndarray:
    n_rows = mom.mean_u11.shape[0]
    rho = np.empty((n_rows, 4, 4), dtype=complex)
    for k in range(n_rows):
        rho[k] = reduced_pair_state(mom, k, pair)
    return _concurrence_from_roots(_spin_flip_roots(rho))


def _check_bounds(name: str, values: np.ndarray):
    low, high = _BOUNDS[name]
    bad = np.flatnonzero((values < low - _BOUND_TOL) | (values > high + _BOUND_TOL))
    if bad.size:
        k = int(bad[0])
        raise IntegrityError(k, name, float(values[k]), low, high)


def series(mom: EnsembleMoments, dt: float, columns=None) -> ObservableSeries:
    """Evaluate the requested observables at every step, bounds-checked.

    ``columns`` is an iterable of names from ``OBSERVABLE_COLUMNS``;
    default is every observable the Gram size supports.
    """
    if dt <= 0.0:
        raise ValueError(f"dt must be positive, got {dt}")
    if columns is None:
        columns = _default_columns(mom.gram_size)
    columns = tuple(columns)
    for name in columns:
        if name not in OBSERVABLE_COLUMNS:
            raise ValueError(f"unknown observable column {name!r}")

    out = ObservableSeries(t=np.arange(mom.mean_u11.shape[0]) * dt)
    if "fbar" in columns:
        out.fbar = _fidelity(mom.mean_u11, mom.mean_u11_abs2)
    if "s1" in columns:
        out.s1 = _entropy_single(mom.mean_u11, mom.mean_u11_abs2)
    for name, pair in CONCURRENCE_PAIRS.items():
        if name in columns:
            setattr(out, name, _concurrence_series(mom, pair))
    if "s12" in columns:
        g = mom.mean_m_gram
        out.s12 = _entropy_pair(g[:, 0, 0].real, g[:, 1, 1].real, g[:, 0, 1])
    for name in columns:
        _check_bounds(name, out.column(name))
    return out


def _resampled_columns(u11, u11_abs2, gram, columns):
    values = {}
    if "fbar" in columns:
        values["fbar"] = _fidelity(u11, u11_abs2)
    if "s1" in columns:
        values["s1"] = _entropy_single(u11, u11_abs2)
    for name, pair in CONCURRENCE_PAIRS.items():
        if name in columns:
            j, l = PAIR_INDICES[pair]
            values[name] = np.abs(gram[:, j, l])
    if "s12" in columns:
        values["s12"] = _entropy_pair(gram[:, 0, 0].real, gram[:, 1, 1].real, gram[:, 0, 1])
    return values


def bootstrap_standard_errors(
    mom: EnsembleMoments, n_bootstrap: int, seed, columns=None
) -> dict[str, np.ndarray]:
    """Nonparametric bootstrap over trajectories; per-step SE per observable.

    Requires the accumulator to have retained per-trajectory records.  The
    concurrence resamples use the coherence-magnitude form, which matches
    the spin-flip route to 1e-10 on these states.
    """
    if n_bootstrap < 1:
        raise ValueError(f"n_bootstrap must be positive, got {n_bootstrap}")
    if not mom.has_records:
        raise ValueError("bootstrap needs retained per-trajectory records")
    m = mom.n_realizations
    if m < 2:
        raise ValueError("bootstrap needs at least 2 trajectories")
    if columns is None:
        columns = _default_columns(mom.gram_size)
    columns = tuple(columns)

    rng = np.random.default_rng(seed)
    # resample means in centered form: when every trajectory is identical the
    # deviations vanish exactly and the standard errors come out exactly zero
    dev_u11 = mom.records_u11 - mom.mean_u11
    dev_u11_abs2 = mom.records_u11_abs2 - mom.mean_u11_abs2
    dev_gram = (mom.records_m_gram - mom.mean_m_gram).reshape(m, -1)
    gram_shape = mom.records_m_gram.shape[1:]
    samples = {name: [] for name in columns}
    for _ in range(n_bootstrap):
        counts = np.bincount(rng.integers(0, m, size=m), minlength=m).astype(float)
        u11 = mom.mean_u11 + (counts @ dev_u11) / m
        u11_abs2 = mom.mean_u11_abs2 + (counts @ dev_u11_abs2) / m
        gram = mom.mean_m_gram + ((counts @ dev_gram) / m).reshape(gram_shape)
        for name, vals in _resampled_columns(u11, u11_abs2, gram, columns).items():
            samples[name].append(vals)
    # spread around the point estimate, so degenerate ensembles give exact zeros
    center = _resampled_columns(mom.mean_u11, mom.mean_u11_abs2, mom.mean_m_gram, columns)
    return {
        name: np.std(np.stack(rows) - center[name], axis=0, ddof=1)
        for name, rows in samples.items()
    }
