import json

import numpy as np
import pytest

from nisqlimits.circuits import Circuit, Gate, GateLayer, Topology, brickwork_circuit, gate, identity_layers, random_circuit
from nisqlimits.dmsim import evolve
from nisqlimits.entanglement import entanglement_entropy_pure
from nisqlimits.infotheory import Bipartition, mutual_information
from nisqlimits.lightcone import boundary_cone, depth_entanglement_bound


def test_no_crossing_gate_gives_empty_cone():
    c = Circuit(Topology.chain(4), [GateLayer([gate("CNOT", 0, 1), gate("CZ", 2, 3)])] * 3)
    report = boundary_cone(c, Bipartition.chain(4, 2))
    assert report.support == frozenset() and report.bound_a == report.bound_generic == 0


def test_single_crossing_gate():
    c = Circuit(Topology.chain(6), [GateLayer([gate("CNOT", 2, 3)])])
    report = boundary_cone(c, Bipartition.chain(6, 3))
    assert report.support == {2, 3}
    assert depth_entanglement_bound(c, Bipartition.chain(6, 3)) == 1


def test_brickwork_two_layers(rng):
    c = brickwork_circuit(8, 2, rng)
    report = boundary_cone(c, Bipartition.chain(8, 4))
    assert len(report.support) <= 8
    assert depth_entanglement_bound(c, Bipartition.chain(8, 4)) <= 2


def test_depth_zero_is_zero():
    assert depth_entanglement_bound(identity_layers(4, 0), Bipartition.chain(4, 2)) == 0


def test_bell_pair_saturates_depth_one():
    # H folded into the gate so the state is a Bell pair after one layer
    u = gate("CNOT", 0, 1).unitary @ gate("H", 0, 1).unitary
    c = Circuit(Topology.chain(2), [GateLayer([Gate((0, 1), u)])])
    part = Bipartition.chain(2, 1)
    assert depth_entanglement_bound(c, part) == 1
    assert mutual_information(evolve(c, 0.0), part) / 2 == pytest.approx(1)


def test_snapshots_monotone_and_growth_at_most_two(rng):
    for _ in range(20):
        n = int(rng.integers(4, 11))
        c = random_circuit(Topology.chain(n), int(rng.integers(1, 7)), rng)
        report = boundary_cone(c, Bipartition.chain(n, n // 2))
        prev = frozenset()
        for snap in report.per_layer:
            assert prev <= snap and len(snap) - len(prev) <= 2
            prev = snap
        assert len(report.support) <= 2 * c.depth


@pytest.mark.parametrize("seed", range(4))
def test_random_chain_pure_entropy_below_bound(seed):
    rng = np.random.default_rng(seed)
    c = random_circuit(Topology.chain(8), 3, rng)
    rho = evolve(c, 0.0)
    for cut in range(1, 8):
        part = Bipartition.chain(8, cut)
        assert entanglement_entropy_pure(rho, part) <= depth_entanglement_bound(c, part) + 1e-7


def test_middle_segment_uses_two_t(rng):
    c = brickwork_circuit(8, 1, rng)
    part = Bipartition.chain_segment(8, 3, 5)
    assert not part.contains_end
    assert depth_entanglement_bound(c, part) == 2


def test_noisy_mutual_information_combination(rng):
    n, p = 6, 0.3
    c = brickwork_circuit(n, 6, rng)
    _, traj = evolve(c, p, record=True)
    part = Bipartition.chain(n, 3)
    for t, rho in enumerate(traj, start=1):
        info = mutual_information(rho, part)
        assert info <= 2 * depth_entanglement_bound(c.truncated(t), part) + 1e-7
        assert info <= n * (1 - p) ** t + 1e-7


def test_grid_block_cone(rng):
    c = random_circuit(Topology.grid(3, 3), 2, rng, fill=1.0)
    part = Bipartition.grid_block(3, 3, 2, 2)
    report = boundary_cone(c, part)
    assert report.support <= set(range(9))
    assert depth_entanglement_bound(c, part) == report.bound_generic


def test_report_json_round_trip():
    c = Circuit(Topology.chain(4), [GateLayer([gate("CNOT", 1, 2)])])
    data = json.loads(boundary_cone(c, Bipartition.chain(4, 2)).to_json())
    assert data["support"] == [1, 2] and data["per_layer"] == [[1, 2]]


def test_mismatched_partition_rejected():
    with pytest.raises(ValueError):
        boundary_cone(identity_layers(3, 1), Bipartition.chain(4, 2))
