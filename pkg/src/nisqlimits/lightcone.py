"""Backward light-cone reduction of a layered circuit across a bipartition.

Sweeping from the last layer to the first, a gate is kept if it straddles
the cut or touches a qubit already kept; every other gate (and the noise off
the kept set) is a local operation that commutes past the kept gates. The
state is therefore a local post-processing of a state prepared on the kept
set alone, so the entanglement across the cut is at most
``min(|S & A|, |S & B|)`` ebits for the final kept set ``S``.
"""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass

from .circuits import Circuit
from .infotheory import Bipartition


@dataclass
class ConeReport:
    support: frozenset[int]
    per_layer: list[frozenset[int]]  # snapshots after layers t, t-1, ..., 1
    bound_a: int
    bound_generic: int

    def to_json(self) -> str:
        data = asdict(self)
        data["support"] = sorted(self.support)
        data["per_layer"] = [sorted(s) for s in self.per_layer]
        return json.dumps(data)


def _check(circuit: Circuit, part: Bipartition) -> None:
    if part.n != circuit.n:
        raise ValueError(f"bipartition is for {part.n} qubits, circuit has {circuit.n}")


def boundary_cone(circuit: Circuit, part: Bipartition) -> ConeReport:
    _check(circuit, part)
    support: set[int] = set()
    snapshots = []
    for layer in reversed(circuit.layers):
        grown = set(support)
        for g in layer.gates:
            if part.straddles(g.qubits) or support.intersection(g.qubits):
                grown.update(g.qubits)
        support = grown
        snapshots.append(frozenset(support))
    a = set(part.side_a)
    in_a = len(support & a)
    generic = min(in_a, len(support) - in_a)
    bound_a = generic
    if circuit.topology.kind == "chain" and part.contains_end:
        bound_a = min(generic, circuit.depth)
    return ConeReport(frozenset(support), snapshots, bound_a, generic)


def depth_entanglement_bound(circuit: Circuit, part: Bipartition) -> int:
    """Depth-based cap on any entanglement monotone across ``part``, in ebits.

    The exact cone count is combined with the chain depth caps: ``t`` when
    ``A`` holds an end of the chain, ``2t`` otherwise. Other topologies use
    the cone count alone.
    """
    report = boundary_cone(circuit, part)
    bound = report.bound_generic
    if circuit.topology.kind == "chain":
        t = circuit.depth
        bound = min(bound, t if part.contains_end else 2 * t)
    return bound
