import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nisqlimits.circuits import Circuit, Gate, GateLayer, Topology, bell_circuit, gate, identity_layers, random_circuit
from nisqlimits.dmsim import (
    QubitCapError,
    StateError,
    apply_depolarizing_all,
    apply_unitary_layer,
    basis_state,
    bell_state,
    check_density_matrix,
    evolve,
    maximally_mixed,
    output_distribution,
    partial_trace,
    pure_state,
    random_density_matrix,
    sample_output,
    zero_state,
)
from nisqlimits.infotheory import distance_to_max_mixed

from oracles import evolve_oracle, kraus_depolarize, layer_unitary, partial_trace_oracle


def test_bell_preparation():
    rho = apply_unitary_layer(zero_state(2), GateLayer([gate("H", 0, 1)]))
    rho = apply_unitary_layer(rho, GateLayer([gate("CNOT", 0, 1)]))
    assert np.allclose(rho, bell_state(), atol=1e-12)


def test_empty_layer_is_identity(rng):
    rho = random_density_matrix(3, rng)
    assert np.allclose(apply_unitary_layer(rho, GateLayer()), rho)


def test_cz_fixes_plus_zero():
    plus = np.full((2, 2), 0.5, dtype=complex)
    rho = np.kron(plus, basis_state("0"))
    assert np.allclose(apply_unitary_layer(rho, GateLayer([gate("CZ", 0, 1)])), rho)


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_layer_matches_explicit_kron_oracle(n, rng):
    topo = Topology.full(n) if n > 1 else Topology.chain(1)
    for _ in range(3):
        layer = random_circuit(topo, 1, rng, fill=1.0).layers[0] if n > 1 else GateLayer(
            [Gate((0,), np.array([[0, 1], [1, 0]], dtype=complex))]
        )
        rho = random_density_matrix(n, rng)
        U = layer_unitary(layer.gates, n)
        assert np.allclose(apply_unitary_layer(rho, layer), U @ rho @ U.conj().T, atol=1e-12)


def test_depolarizing_endpoints(rng):
    rho = random_density_matrix(3, rng)
    assert np.allclose(apply_depolarizing_all(rho, 0.0), rho)
    assert np.abs(apply_depolarizing_all(rho, 1.0) - maximally_mixed(3)).max() <= 1e-12


def test_single_qubit_half_depolarized():
    out = apply_depolarizing_all(basis_state("0"), 0.5)
    assert np.allclose(out, np.diag([0.75, 0.25]))


@pytest.mark.parametrize("p", [0.05, 0.3, 0.9])
def test_depolarizing_matches_pauli_kraus(p, rng):
    n = 3
    rho = random_density_matrix(n, rng)
    expected = rho
    for q in range(n):
        expected = kraus_depolarize(expected, q, p, n)
    assert np.allclose(apply_depolarizing_all(rho, p), expected, atol=1e-12)


def test_depolarizing_order_does_not_matter(rng):
    rho = random_density_matrix(4, rng)
    a = apply_depolarizing_all(rho, 0.37)
    b = apply_depolarizing_all(rho, 0.37, order=[2, 0, 3, 1])
    assert np.abs(a - b).max() <= 1e-12


@pytest.mark.parametrize("n, depth, p", [(2, 3, 0.1), (3, 4, 0.25), (4, 2, 0.5)])
def test_evolve_matches_oracle_trajectory(n, depth, p, rng):
    c = random_circuit(Topology.chain(n), depth, rng)
    final, traj = evolve(c, p, record=True)
    ref = evolve_oracle(c, p)
    assert len(traj) == depth
    for mine, theirs in zip(traj, ref[1:]):
        assert np.allclose(mine, theirs, atol=1e-12)
    assert np.allclose(final, ref[-1], atol=1e-12)


def test_evolve_examples():
    assert np.allclose(evolve(identity_layers(3, 0), 0.4), zero_state(3))
    one = Circuit(Topology.chain(1), [GateLayer([gate("I", 0)])])
    assert np.allclose(evolve(one, 1.0), np.eye(2) / 2)
    rho = evolve(bell_circuit(), 0.2)
    assert abs(np.trace(rho) - 1) < 1e-12


def test_bell_layer_with_noise_respects_decay():
    c = Circuit(Topology.chain(2), [GateLayer([gate("CNOT", 0, 1)])])
    assert distance_to_max_mixed(evolve(c, 0.2)) <= 2 * 0.8 + 1e-9


def test_trajectory_states_are_valid(rng):
    c = random_circuit(Topology.grid(2, 3), 6, rng)
    _, traj = evolve(c, 0.15, record=True)
    for rho in traj:
        check_density_matrix(rho)
        assert np.linalg.eigvalsh(rho).min() >= -1e-9


def test_qubit_cap(monkeypatch):
    with pytest.raises(QubitCapError):
        evolve(identity_layers(13, 1), 0.1)
    monkeypatch.setenv("NISQ_QUBIT_CAP", "3")
    with pytest.raises(QubitCapError):
        evolve(identity_layers(4, 1), 0.1)
    evolve(identity_layers(3, 1), 0.1)


def test_spectrum_is_unitarily_invariant(rng):
    rho = random_density_matrix(3, rng)
    layer = random_circuit(Topology.chain(3), 1, rng, fill=1.0).layers[0]
    before = np.linalg.eigvalsh(rho)
    after = np.linalg.eigvalsh(apply_unitary_layer(rho, layer))
    assert np.allclose(before, after, atol=1e-9)


@pytest.mark.parametrize(
    "rho, expected",
    [
        (maximally_mixed(2), [0.25] * 4),
        (bell_state(), [0.5, 0, 0, 0.5]),
        (np.diag([0.75, 0.25]).astype(complex), [0.75, 0.25]),
    ],
)
def test_output_distribution_examples(rho, expected):
    assert np.allclose(output_distribution(rho), expected)


def test_output_distribution_rejects_corrupted_state():
    with pytest.raises(StateError):
        output_distribution(np.diag([0.7, 0.2]).astype(complex))


def test_output_distribution_under_x_layer_is_permuted(rng):
    rho = random_density_matrix(3, rng)
    layer = GateLayer([gate("X", 1)])
    perm = [i ^ 0b010 for i in range(8)]
    assert np.allclose(output_distribution(apply_unitary_layer(rho, layer)), output_distribution(rho)[perm])


def test_sampling_is_deterministic_and_correct():
    rho = basis_state("01")
    assert sample_output(rho, seed=3, shots=5) == ["01"] * 5
    mixed = maximally_mixed(2)
    assert sample_output(mixed, 11, 50) == sample_output(mixed, 11, 50)
    draws = sample_output(maximally_mixed(1), seed=7, shots=100_000)
    assert 0.49 <= draws.count("0") / len(draws) <= 0.51


def test_partial_trace_examples(rng):
    assert np.allclose(partial_trace(bell_state(), [0]), np.eye(2) / 2)
    ra, rb = random_density_matrix(1, rng), random_density_matrix(2, rng)
    assert np.allclose(partial_trace(np.kron(ra, rb), [0]), ra)
    rho = random_density_matrix(3, rng)
    assert np.allclose(partial_trace(rho, [0, 1, 2]), rho)


@pytest.mark.parametrize("keep", [[], [3], [-1]])
def test_partial_trace_rejects_bad_subsets(keep):
    with pytest.raises(ValueError):
        partial_trace(maximally_mixed(3), keep)


@settings(max_examples=40, deadline=None)
@given(
    seed=st.integers(0, 2**32 - 1),
    keep=st.sets(st.integers(0, 3), min_size=1, max_size=4),
)
def test_partial_trace_matches_basis_sum(seed, keep):
    rho = random_density_matrix(4, np.random.default_rng(seed))
    assert np.allclose(partial_trace(rho, keep), partial_trace_oracle(rho, keep, 4), atol=1e-12)


def test_pure_state_normalizes():
    rho = pure_state([1, 1j])
    assert np.isclose(np.trace(rho), 1) and np.allclose(rho, rho.conj().T)
