import numpy as np
import pytest

from helpers import complete_graph, single_edge_graph
from spinnet.dynamics import propagate_sequence, step_unitary
from spinnet.graphs import EnsembleSpec
from spinnet.oracles import (
    bloch_average_numeric,
    build_exact_maps,
    embed_excitation_state,
    enumerate_weighted_graphs,
    exact_moment_series,
    exact_moments_at_step,
    fullspace_evolve,
    fullspace_hamiltonian,
    reduced_pair_full,
    reduced_qubit_full,
    subspace_reduced_pair,
    subspace_reduced_qubit,
)


def _random_graphs(n, count, seed, xi=0.5):
    spec = EnsembleSpec("gilbert", n, xi=xi)
    rng = np.random.default_rng(seed)
    return [spec.sample(rng) for _ in range(count)]


def test_fullspace_hamiltonian_single_excitation_block():
    # the one-excitation block of the full Hamiltonian is the scaled adjacency
    rng = np.random.default_rng(0)
    for scale in (1.0, 4.0):
        a = EnsembleSpec("gilbert", 4, xi=0.6).sample(rng)
        h = fullspace_hamiltonian(a, coupling_scale=scale)
        idx = [1 << (4 - 1 - j) for j in range(4)]
        block = h[np.ix_(idx, idx)]
        assert np.max(np.abs(block - scale * a)) < 1e-12


def test_fullspace_vacuum_is_invariant():
    psi = np.zeros(16, dtype=complex)
    psi[0] = 1.0
    out = fullspace_evolve(_random_graphs(4, 6, 1), psi, 0.3)
    assert abs(out[0] - 1.0) < 1e-12
    assert np.max(np.abs(out[1:])) < 1e-12


def test_fullspace_single_excitation_matches_propagator_column():
    graphs = _random_graphs(4, 8, 2)
    psi = embed_excitation_state(0.0, np.array([1.0, 0, 0, 0]))
    psi = fullspace_evolve(graphs, psi, 0.2)
    prop = propagate_sequence(graphs, 0.2)[-1]
    idx = [1 << (4 - 1 - j) for j in range(4)]
    assert np.max(np.abs(psi[idx] - prop.matrix[:, 0])) < 1e-10
    mask = np.ones(16, dtype=bool)
    mask[idx] = False
    assert np.max(np.abs(psi[mask])) < 1e-12


def test_fullspace_bell_pair_state_matches_subspace():
    graphs = _random_graphs(4, 10, 3)
    amps0 = np.zeros(4, dtype=complex)
    amps0[:2] = 1 / np.sqrt(2)
    psi = embed_excitation_state(0.0, amps0)
    for k, a in enumerate(graphs, start=1):
        psi = fullspace_evolve([a], psi, 0.2)
        amps = propagate_sequence(graphs[:k], 0.2)[-1].matrix @ amps0
        dev = np.max(np.abs(reduced_pair_full(psi, (1, 2), 4) - subspace_reduced_pair(0.0, amps, (1, 2))))
        assert dev < 1e-10


@pytest.mark.parametrize("n", [2, 3, 4])
def test_subspace_vs_fullspace_both_initial_states(n):
    # quick version of the acceptance sweep: one sequence per size
    graphs = _random_graphs(n, 10, 40 + n)
    theta, phi = 0.9, 1.3
    states = [(0.0, np.full(n, 0j))]
    states[0][1][: min(2, n)] = 1 / np.sqrt(min(2, n))
    single = np.zeros(n, dtype=complex)
    single[0] = np.exp(1j * phi) * np.sin(theta / 2)
    states.append((np.cos(theta / 2), single))
    for c0, amps0 in states:
        psi = embed_excitation_state(c0, amps0)
        psi = fullspace_evolve(graphs, psi, 0.015)
        amps = propagate_sequence(graphs, 0.015)[-1].matrix @ amps0
        assert np.max(np.abs(reduced_qubit_full(psi, 1, n) - subspace_reduced_qubit(c0, amps))) < 1e-10
        if n >= 2:
            dev = np.max(np.abs(reduced_pair_full(psi, (1, 2), n) - subspace_reduced_pair(c0, amps, (1, 2))))
            assert dev < 1e-10


def test_fullspace_guard():
    with pytest.raises(ValueError):
        fullspace_hamiltonian(np.zeros((13, 13)))


def test_fullspace_norm_validation():
    with pytest.raises(ValueError):
        fullspace_evolve([np.zeros((2, 2))], np.array([1.0, 1.0, 0, 0]), 0.1)


def test_exact_maps_xi_zero_is_identity():
    maps = build_exact_maps(EnsembleSpec("gilbert", 3, xi=0.0), 0.015)
    assert np.array_equal(maps.first_map, np.eye(3))
    assert np.array_equal(maps.second_map, np.eye(9))


def test_exact_maps_xi_one_is_complete_graph():
    maps = build_exact_maps(EnsembleSpec("gilbert", 4, xi=1.0), 0.015)
    u = step_unitary(complete_graph(4), 0.015)
    assert np.max(np.abs(maps.first_map - u)) < 1e-14
    assert np.max(np.abs(maps.second_map - np.kron(u, u.conj()))) < 1e-14


@pytest.mark.parametrize("spec", [
    EnsembleSpec("gilbert", 4, xi=0.1),
    EnsembleSpec("gilbert", 4, xi=0.5),
    EnsembleSpec("gilbert", 4, xi=0.9),
    EnsembleSpec("thermal", 4, temperature=1.3),
])
def test_enumeration_probabilities_sum_to_one(spec):
    total = sum(w for w, _ in enumerate_weighted_graphs(spec))
    assert abs(total - 1.0) < 1e-12


def test_exact_maps_order_independent_resummation():
    # re-sum the N=3, xi=0.5 enumeration in reversed order
    spec = EnsembleSpec("gilbert", 3, xi=0.5)
    terms = [(w, step_unitary(a, 0.015)) for w, a in enumerate_weighted_graphs(spec)]
    forward = sum(w * u for w, u in terms)
    backward = sum(w * u for w, u in reversed(terms))
    maps = build_exact_maps(spec, 0.015)
    assert np.max(np.abs(forward - maps.first_map)) < 1e-14
    assert np.max(np.abs(backward - maps.first_map)) < 1e-14
    assert abs(forward - np.mean([u for _, u in terms], axis=0)).max() < 1e-14  # 8 equal weights


def test_exact_maps_guard():
    with pytest.raises(ValueError):
        build_exact_maps(EnsembleSpec("gilbert", 7, xi=0.5), 0.015)


def test_second_map_is_trace_preserving_and_positive():
    maps = build_exact_maps(EnsembleSpec("gilbert", 4, xi=0.4), 0.1)
    n = 4
    ident = np.eye(n, dtype=complex).reshape(-1)
    out = (maps.second_map @ ident).reshape(n, n)
    assert np.max(np.abs(out - np.eye(n))) < 1e-12

    rng = np.random.default_rng(5)
    v = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    rho = v @ v.conj().T
    rho /= np.trace(rho).real
    vec = rho.reshape(-1)
    for _ in range(10):
        vec = maps.second_map @ vec
        rho_k = vec.reshape(n, n)
        assert abs(np.trace(rho_k).real - 1.0) < 1e-12
        assert np.max(np.abs(rho_k - rho_k.conj().T)) < 1e-12
        assert np.linalg.eigvalsh(rho_k).min() > -1e-10


def test_exact_moments_step_zero_and_frozen():
    maps = build_exact_maps(EnsembleSpec("gilbert", 4, xi=0.3), 0.015)
    rec = exact_moments_at_step(maps, 0)
    assert rec.u11 == 1.0
    assert rec.u11_abs2 == 1.0
    assert abs(rec.m_norm_check - 2.0) < 1e-12
    frozen = build_exact_maps(EnsembleSpec("gilbert", 4, xi=0.0), 0.015)
    rec1 = exact_moments_at_step(frozen, 1)
    assert rec1.u11 == 1.0 and rec1.u11_abs2 == 1.0


def test_exact_moment_series_matches_at_step():
    maps = build_exact_maps(EnsembleSpec("gilbert", 4, xi=0.35), 0.015)
    mom = exact_moment_series(maps, 12)
    for k in (0, 3, 12):
        rec = exact_moments_at_step(maps, k)
        assert abs(mom.mean_u11[k] - rec.u11) < 1e-12
        assert abs(mom.mean_u11_abs2[k] - rec.u11_abs2) < 1e-12
        assert np.max(np.abs(mom.mean_m_gram[k] - rec.m_gram)) < 1e-12
    assert abs(exact_moments_at_step(maps, 20).m_norm_check - 2.0) < 1e-10


def test_exact_moments_against_monte_carlo():
    from spinnet.moments import EnsembleAccumulator
    from spinnet.dynamics import run_trajectory
    from spinnet.observables import bootstrap_standard_errors, series

    spec = EnsembleSpec("gilbert", 4, xi=0.3)
    n_steps, m = 10, 4000
    acc = EnsembleAccumulator(n_steps, 4, retain_records=True)
    for i in range(m):
        acc.add(run_trajectory(spec, 0.015, n_steps, rng=np.random.default_rng((9, i))))
    mom = acc.finalize()
    exact = exact_moment_series(build_exact_maps(spec, 0.015), n_steps)
    mc = series(mom, 0.015)
    ex = series(exact, 0.015)
    se = bootstrap_standard_errors(mom, 200, seed=0)
    for name in ("fbar", "s1", "c12", "s12"):
        dev = np.abs(mc.column(name) - ex.column(name))
        tol = np.where(se[name] > 0, 4 * se[name], 1e-12)
        assert np.mean(dev <= tol) >= 0.9, name


def test_thermal_exact_maps_match_equivalent_gilbert():
    # per-configuration weight exp(-n/T) equals the Gilbert weighting at
    # xi = 1/(1 + e^(1/T)), so both enumerations build the same maps
    t = 1.7
    xi_eff = 1.0 / (1.0 + np.exp(1.0 / t))
    thermal = build_exact_maps(EnsembleSpec("thermal", 4, temperature=t), 0.015)
    gilbert = build_exact_maps(EnsembleSpec("gilbert", 4, xi=xi_eff), 0.015)
    assert np.max(np.abs(thermal.first_map - gilbert.first_map)) < 1e-12
    assert np.max(np.abs(thermal.second_map - gilbert.second_map)) < 1e-12


def test_bloch_average_trivial_points():
    f, s = bloch_average_numeric(1.0, 1.0)
    assert abs(f - 1.0) < 1e-8 and abs(s) < 1e-8
    f, s = bloch_average_numeric(0.0, 0.0)
    assert abs(f - 0.5) < 1e-8 and abs(s) < 1e-8


def test_bloch_average_dephased_point():
    # E(u11) = 0 with E|u11|^2 = 1: quadrature must agree with the closed
    # forms, giving 2/3 and 1/3
    f, s = bloch_average_numeric(0.0, 1.0)
    assert abs(f - 2.0 / 3.0) < 1e-8
    assert abs(s - 1.0 / 3.0) < 1e-8


def test_bloch_average_agrees_with_closed_forms_on_grid():
    rng = np.random.default_rng(11)
    checked = 0
    while checked < 100:
        mu2 = rng.random()
        mu = (rng.normal() + 1j * rng.normal()) * 0.5
        if abs(mu) ** 2 > mu2:
            continue
        f, s = bloch_average_numeric(mu, mu2)
        closed_f = 0.5 + mu.real / 3.0 + mu2 / 6.0
        closed_s = mu2 - abs(mu) ** 2 / 3.0 - 2.0 * mu2**2 / 3.0
        assert abs(f - closed_f) < 1e-7
        assert abs(s - closed_s) < 1e-7
        checked += 1


def test_bloch_average_rejects_inconsistent_moments():
    with pytest.raises(ValueError):
        bloch_average_numeric(1.0, 0.5)
    with pytest.raises(ValueError):
        bloch_average_numeric(0.0, 1.5)
