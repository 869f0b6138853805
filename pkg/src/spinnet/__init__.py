"""Monte Carlo simulator for information dissipation on random spin networks.

A network of N spin-1/2 particles interacts through XY couplings laid out by
a random graph that is redrawn independently at every time step.  Within the
one-excitation sector the dynamics reduces to N x N unitaries generated by
the adjacency matrix, which makes ensemble averages of fidelity, entropy and
pair concurrence cheap to estimate and, at small N, to compute exactly.
"""

from .graphs import EnsembleSpec, edge_count, sample_gilbert, sample_thermal
from .dynamics import (
    Propagator,
    compose,
    generator_from_graph,
    propagate_sequence,
    run_trajectory,
    step_unitary,
)
from .moments import (
    EnsembleAccumulator,
    EnsembleMoments,
    MomentRecord,
    TrajectoryMoments,
    extract_record,
)
from .observables import (
    IntegrityError,
    ObservableSeries,
    avg_fidelity,
    avg_linear_entropy_single,
    bootstrap_standard_errors,
    concurrence_closed_form,
    linear_entropy_pair,
    reduced_pair_state,
    series,
    wootters_concurrence,
)

__version__ = "0.1.0"

__all__ = [
    "EnsembleSpec",
    "edge_count",
    "sample_gilbert",
    "sample_thermal",
    "Propagator",
    "compose",
    "generator_from_graph",
    "propagate_sequence",
    "run_trajectory",
    "step_unitary",
    "EnsembleAccumulator",
    "EnsembleMoments",
    "MomentRecord",
    "TrajectoryMoments",
    "extract_record",
    "IntegrityError",
    "ObservableSeries",
    "avg_fidelity",
    "avg_linear_entropy_single",
    "bootstrap_standard_errors",
    "concurrence_closed_form",
    "linear_entropy_pair",
    "reduced_pair_state",
    "series",
    "wootters_concurrence",
    "__version__",
]
