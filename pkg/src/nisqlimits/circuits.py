"""Layered two-qubit circuits over a fixed qubit topology.

A circuit is an ordered list of layers; inside a layer every qubit is touched
by at most one gate. Gates act on ordered qubit pairs with a 4x4 unitary.
Single-qubit gates are also accepted (2x2 on one qubit) so that one-qubit
devices can be described; they are equivalent to the lifted ``U (x) I`` form.

Qubit 0 is the most significant bit of the computational-basis index.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable, Sequence

import numpy as np
from scipy.stats import unitary_group

UNITARY_ATOL = 1e-10

_S2 = 1 / np.sqrt(2)

SINGLE_QUBIT_GATES: dict[str, np.ndarray] = {
    "I": np.eye(2, dtype=complex),
    "H": np.array([[_S2, _S2], [_S2, -_S2]], dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
    "S": np.array([[1, 0], [0, 1j]], dtype=complex),
    "T": np.array([[1, 0], [0, np.exp(1j * np.pi / 4)]], dtype=complex),
}

TWO_QUBIT_GATES: dict[str, np.ndarray] = {
    "CNOT": np.array(
        [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex
    ),
    "CZ": np.diag([1, 1, 1, -1]).astype(complex),
    "SWAP": np.array(
        [[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex
    ),
}


class CircuitFormatError(ValueError):
    """Raised when a circuit description cannot be parsed."""


class CircuitValidationError(ValueError):
    """Raised when a circuit violates topology or layer constraints."""

    def __init__(self, violations: Sequence["Violation"]):
        self.violations = list(violations)
        super().__init__("; ".join(str(v) for v in self.violations))


@dataclass(frozen=True)
class Topology:
    """Qubit connectivity: ``chain``, ``grid`` (row-major) or ``full``."""

    kind: str
    n: int
    rows: int | None = None
    cols: int | None = None

    def __post_init__(self):
        if self.kind not in ("chain", "grid", "full"):
            raise ValueError(f"unknown topology kind {self.kind!r}")
        if self.n < 1:
            raise ValueError("topology needs at least one qubit")
        if self.kind == "grid":
            if self.rows is None or self.cols is None or self.rows * self.cols != self.n:
                raise ValueError("grid topology requires rows * cols == n")

    @classmethod
    def chain(cls, n: int) -> "Topology":
        return cls("chain", n)

    @classmethod
    def grid(cls, rows: int, cols: int) -> "Topology":
        return cls("grid", rows * cols, rows, cols)

    @classmethod
    def full(cls, n: int) -> "Topology":
        return cls("full", n)

    def coords(self, q: int) -> tuple[int, int]:
        if self.kind != "grid":
            return (0, q)
        return divmod(q, self.cols)

    def adjacent(self, i: int, j: int) -> bool:
        if i == j:
            return False
        if self.kind == "full":
            return True
        if self.kind == "chain":
            return abs(i - j) == 1
        (ri, ci), (rj, cj) = self.coords(i), self.coords(j)
        return abs(ri - rj) + abs(ci - cj) == 1

    def edges(self) -> list[tuple[int, int]]:
        return [
            (i, j) for i in range(self.n) for j in range(i + 1, self.n) if self.adjacent(i, j)
        ]

    def to_dict(self) -> dict[str, Any]:
        if self.kind == "grid":
            return {"kind": "grid", "rows": self.rows, "cols": self.cols}
        return {"kind": self.kind, "n": self.n}


@dataclass(frozen=True, eq=False)
class Gate:
    qubits: tuple[int, ...]
    unitary: np.ndarray
    name: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "qubits", tuple(int(q) for q in self.qubits))
        object.__setattr__(self, "unitary", np.asarray(self.unitary, dtype=complex))

    @property
    def arity(self) -> int:
        return len(self.qubits)


@dataclass
class GateLayer:
    gates: list[Gate] = field(default_factory=list)

    def qubits(self) -> list[int]:
        return [q for g in self.gates for q in g.qubits]


@dataclass
class Circuit:
    topology: Topology
    layers: list[GateLayer] = field(default_factory=list)

    @property
    def n(self) -> int:
        return self.topology.n

    @property
    def depth(self) -> int:
        return len(self.layers)

    def truncated(self, depth: int) -> "Circuit":
        return Circuit(self.topology, self.layers[:depth])

    def key(self) -> tuple:
        """Hashable fingerprint, used to cache simulation results."""
        return (
            self.topology,
            tuple(
                tuple((g.qubits, g.unitary.tobytes()) for g in layer.gates)
                for layer in self.layers
            ),
        )


def gate(name: str, *qubits: int) -> Gate:
    """Build a named gate.

    A single-qubit name with two qubits ``(i, j)`` is lifted to ``U (x) I``
    acting on the pair, with ``U`` on ``i``.
    """
    key = name.upper()
    if key in TWO_QUBIT_GATES:
        if len(qubits) != 2:
            raise ValueError(f"{key} acts on two qubits")
        return Gate(qubits, TWO_QUBIT_GATES[key], key)
    if key in SINGLE_QUBIT_GATES:
        u = SINGLE_QUBIT_GATES[key]
        if len(qubits) == 1:
            return Gate(qubits, u, key)
        if len(qubits) == 2:
            return Gate(qubits, np.kron(u, np.eye(2)), key)
        raise ValueError(f"{key} takes one qubit (or a pair to lift onto)")
    raise ValueError(f"unknown gate name {name!r}")


@dataclass(frozen=True)
class Violation:
    layer: int
    gate: int | None
    kind: str
    message: str

    def __str__(self) -> str:
        where = f"layer {self.layer}" if self.gate is None else f"layer {self.layer}, gate {self.gate}"
        return f"{where}: {self.kind}: {self.message}"


@dataclass
class ValidationReport:
    violations: list[Violation]

    @property
    def ok(self) -> bool:
        return not self.violations

    def raise_if_invalid(self) -> None:
        if self.violations:
            raise CircuitValidationError(self.violations)


def validate_circuit(circuit: Circuit) -> ValidationReport:
    """Check unitarity, in-range and adjacent qubits, and one gate per qubit per layer."""
    topo = circuit.topology
    out: list[Violation] = []
    for li, layer in enumerate(circuit.layers):
        seen: dict[int, int] = {}
        for gi, g in enumerate(layer.gates):
            k = g.arity
            if k not in (1, 2):
                out.append(Violation(li, gi, "arity", f"gate acts on {k} qubits"))
                continue
            if g.unitary.shape != (2**k, 2**k):
                out.append(
                    Violation(li, gi, "shape", f"expected {2**k}x{2**k}, got {g.unitary.shape}")
                )
                continue
            err = np.abs(g.unitary.conj().T @ g.unitary - np.eye(2**k)).max()
            if err > UNITARY_ATOL:
                out.append(Violation(li, gi, "non-unitary", f"|U^dag U - I| = {err:.3g}"))
            bad = [q for q in g.qubits if not 0 <= q < topo.n]
            if bad:
                out.append(Violation(li, gi, "range", f"qubits {bad} outside 0..{topo.n - 1}"))
                continue
            if k == 2:
                i, j = g.qubits
                if i == j:
                    out.append(Violation(li, gi, "duplicate", f"gate repeats qubit {i}"))
                elif not topo.adjacent(i, j):
                    out.append(
                        Violation(li, gi, "adjacency", f"({i}, {j}) not adjacent on {topo.kind}")
                    )
            for q in set(g.qubits):
                if q in seen:
                    out.append(
                        Violation(
                            li, gi, "duplicate",
                            f"qubit {q} already used by gate {seen[q]} in this layer",
                        )
                    )
                else:
                    seen[q] = gi
    return ValidationReport(out)


# --- file format -----------------------------------------------------------

def _parse_matrix(raw: Any, where: str) -> np.ndarray:
    try:
        arr = np.array(raw, dtype=float)
    except (TypeError, ValueError) as exc:
        raise CircuitFormatError(f"{where}: matrix entries must be [re, im] pairs") from exc
    if arr.ndim != 3 or arr.shape[2] != 2 or arr.shape[0] != arr.shape[1]:
        raise CircuitFormatError(f"{where}: matrix must be square with [re, im] entries")
    return arr[..., 0] + 1j * arr[..., 1]


def _matrix_to_json(u: np.ndarray) -> list:
    return [[[float(z.real), float(z.imag)] for z in row] for row in u]


def parse_topology(raw: Any) -> Topology:
    if not isinstance(raw, dict) or "kind" not in raw:
        raise CircuitFormatError("topology must be an object with a 'kind'")
    try:
        kind = raw["kind"]
        if kind == "grid":
            return Topology.grid(int(raw["rows"]), int(raw["cols"]))
        return Topology(kind, int(raw["n"]))
    except (KeyError, TypeError, ValueError) as exc:
        raise CircuitFormatError(f"bad topology: {exc}") from exc


def circuit_from_dict(data: Any) -> Circuit:
    """Build a circuit from its JSON-compatible description (no validation)."""
    if not isinstance(data, dict):
        raise CircuitFormatError("circuit description must be a JSON object")
    topo = parse_topology(data.get("topology"))
    raw_layers = data.get("layers", [])
    if not isinstance(raw_layers, list):
        raise CircuitFormatError("'layers' must be a list of layers")
    layers = []
    for li, raw_layer in enumerate(raw_layers):
        if not isinstance(raw_layer, list):
            raise CircuitFormatError(f"layer {li}: must be a list of gates")
        gates = []
        for gi, raw_gate in enumerate(raw_layer):
            where = f"layer {li}, gate {gi}"
            if not isinstance(raw_gate, dict) or "gate" not in raw_gate or "qubits" not in raw_gate:
                raise CircuitFormatError(f"{where}: needs 'gate' and 'qubits'")
            qubits = raw_gate["qubits"]
            if not isinstance(qubits, list) or not all(isinstance(q, int) for q in qubits):
                raise CircuitFormatError(f"{where}: 'qubits' must be a list of integers")
            spec = raw_gate["gate"]
            if isinstance(spec, str):
                try:
                    gates.append(gate(spec, *qubits))
                except ValueError as exc:
                    raise CircuitFormatError(f"{where}: {exc}") from exc
            else:
                gates.append(Gate(tuple(qubits), _parse_matrix(spec, where)))
        layers.append(GateLayer(gates))
    return Circuit(topo, layers)


def circuit_to_dict(circuit: Circuit) -> dict[str, Any]:
    layers = []
    for layer in circuit.layers:
        out = []
        for g in layer.gates:
            spec = g.name if g.name else _matrix_to_json(g.unitary)
            # lifted single-qubit names round-trip only as raw matrices
            if g.name in SINGLE_QUBIT_GATES and g.arity == 2:
                spec = _matrix_to_json(g.unitary)
            out.append({"gate": spec, "qubits": list(g.qubits)})
        layers.append(out)
    return {"topology": circuit.topology.to_dict(), "layers": layers}


def loads_circuit(text: str, validate: bool = True) -> Circuit:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise CircuitFormatError(
            f"invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}"
        ) from exc
    circuit = circuit_from_dict(data)
    if validate:
        validate_circuit(circuit).raise_if_invalid()
    return circuit


def load_circuit(path: str | Path, validate: bool = True) -> Circuit:
    return loads_circuit(Path(path).read_text(encoding="utf-8"), validate=validate)


def dump_circuit(circuit: Circuit, path: str | Path) -> None:
    Path(path).write_text(json.dumps(circuit_to_dict(circuit), indent=1), encoding="utf-8")


# --- circuit builders ------------------------------------------------------

def bell_circuit(n: int = 2, pair: tuple[int, int] = (0, 1)) -> Circuit:
    """Two layers: H on the first qubit of ``pair``, then CNOT across it."""
    i, j = pair
    return Circuit(
        Topology.chain(n),
        [GateLayer([gate("H", i, j)]), GateLayer([gate("CNOT", i, j)])],
    )


def haar_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    return unitary_group.rvs(dim, random_state=rng)


def random_layer(
    topology: Topology,
    rng: np.random.Generator,
    fill: float = 0.75,
) -> GateLayer:
    """Random matching of adjacent pairs, each carrying a Haar-random unitary."""
    edges = topology.edges()
    order = rng.permutation(len(edges))
    used: set[int] = set()
    gates = []
    for e in order:
        i, j = edges[e]
        if i in used or j in used or rng.random() > fill:
            continue
        used.update((i, j))
        pair = (i, j) if rng.random() < 0.5 else (j, i)
        gates.append(Gate(pair, haar_unitary(4, rng)))
    gates.sort(key=lambda g: min(g.qubits))
    return GateLayer(gates)


def random_circuit(
    topology: Topology,
    depth: int,
    rng: np.random.Generator,
    fill: float = 0.75,
) -> Circuit:
    return Circuit(topology, [random_layer(topology, rng, fill) for _ in range(depth)])


def brickwork_circuit(
    n: int,
    depth: int,
    rng: np.random.Generator | None = None,
    unitary: np.ndarray | None = None,
) -> Circuit:
    """Chain brickwork: even bonds on odd-numbered layers, odd bonds on the rest.

    Gates are Haar random from ``rng`` unless a fixed ``unitary`` is given.
    """
    if rng is None and unitary is None:
        raise ValueError("need rng or a fixed unitary")
    layers = []
    for d in range(depth):
        start = d % 2
        gates = []
        for i in range(start, n - 1, 2):
            u = unitary if unitary is not None else haar_unitary(4, rng)
            gates.append(Gate((i, i + 1), u))
        layers.append(GateLayer(gates))
    return Circuit(Topology.chain(n), layers)


def identity_layers(n: int, depth: int, topology: Topology | None = None) -> Circuit:
    """``depth`` empty layers: the device only accumulates noise."""
    return Circuit(topology or Topology.chain(n), [GateLayer() for _ in range(depth)])


def concat(first: Circuit, layers: Iterable[GateLayer]) -> Circuit:
    return Circuit(first.topology, list(first.layers) + list(layers))
