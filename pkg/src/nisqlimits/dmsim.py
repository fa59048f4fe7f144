"""Dense density-matrix evolution of the layered noisy-device model.

States are plain ``(2**n, 2**n)`` complex numpy arrays. A run starts in
``|0...0><0...0|``, applies each gate layer as ``U rho U^dag`` and then
independent single-qubit depolarizing noise on every qubit, including after
the last layer. Outcomes are read from the computational-basis diagonal.
"""
from __future__ import annotations

import os
from typing import Iterable, Sequence

import numpy as np

from .circuits import Circuit, GateLayer, validate_circuit

DEFAULT_QUBIT_CAP = 12
STATE_ATOL = 1e-9


class StateError(ValueError):
    """Raised for arrays that are not valid density matrices of the expected size."""


class QubitCapError(ValueError):
    """Raised when a dense simulation would exceed the configured qubit cap."""


def qubit_cap() -> int:
    raw = os.environ.get("NISQ_QUBIT_CAP")
    return int(raw) if raw else DEFAULT_QUBIT_CAP


def num_qubits(rho: np.ndarray) -> int:
    dim = rho.shape[0]
    n = dim.bit_length() - 1
    if rho.ndim != 2 or rho.shape[1] != dim or 2**n != dim:
        raise StateError(f"shape {rho.shape} is not (2**n, 2**n)")
    return n


def check_density_matrix(rho: np.ndarray, atol: float = STATE_ATOL) -> int:
    """Validate Hermiticity, unit trace and positivity; return the qubit count."""
    n = num_qubits(rho)
    herm = np.abs(rho - rho.conj().T).max()
    if herm > atol:
        raise StateError(f"not Hermitian (max deviation {herm:.3g})")
    tr = np.trace(rho).real
    if abs(tr - 1) > atol:
        raise StateError(f"trace {tr!r} != 1")
    lo = np.linalg.eigvalsh(rho).min()
    if lo < -atol:
        raise StateError(f"negative eigenvalue {lo:.3g}")
    return n


def zero_state(n: int) -> np.ndarray:
    rho = np.zeros((2**n, 2**n), dtype=complex)
    rho[0, 0] = 1
    return rho


def maximally_mixed(n: int) -> np.ndarray:
    return np.eye(2**n, dtype=complex) / 2**n


def pure_state(psi: Sequence[complex]) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex)
    psi = psi / np.linalg.norm(psi)
    return np.outer(psi, psi.conj())


def basis_state(bits: str) -> np.ndarray:
    rho = np.zeros((2 ** len(bits), 2 ** len(bits)), dtype=complex)
    idx = int(bits, 2)
    rho[idx, idx] = 1
    return rho


def bell_state() -> np.ndarray:
    return pure_state([1, 0, 0, 1])


def ghz_state(n: int) -> np.ndarray:
    psi = np.zeros(2**n)
    psi[0] = psi[-1] = 1
    return pure_state(psi)


def random_density_matrix(
    n: int, rng: np.random.Generator, rank: int | None = None
) -> np.ndarray:
    """Wishart-type random state ``G G^dag / Tr`` with ``G`` of shape ``(2**n, rank)``."""
    dim = 2**n
    rank = dim if rank is None else rank
    g = rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


# --- gate application -------------------------------------------------------

def _apply_gate(rho: np.ndarray, u: np.ndarray, qubits: Sequence[int], n: int) -> np.ndarray:
    k = len(qubits)
    t = rho.reshape([2] * (2 * n))
    ut = u.reshape([2] * (2 * k))
    rows = list(qubits)
    cols = [n + q for q in qubits]
    # U rho
    t = np.tensordot(ut, t, axes=(list(range(k, 2 * k)), rows))
    t = np.moveaxis(t, list(range(k)), rows)
    # (U rho) U^dag
    t = np.tensordot(t, ut.conj(), axes=(cols, list(range(k, 2 * k))))
    t = np.moveaxis(t, list(range(2 * n - k, 2 * n)), cols)
    return t.reshape(2**n, 2**n)


def apply_unitary_layer(rho: np.ndarray, layer: GateLayer) -> np.ndarray:
    """Return ``U rho U^dag`` for the tensor product of the layer's gates."""
    n = num_qubits(rho)
    for g in layer.gates:
        if any(not 0 <= q < n for q in g.qubits):
            raise StateError(f"gate on qubits {g.qubits} does not fit a {n}-qubit state")
        rho = _apply_gate(rho, g.unitary, g.qubits, n)
    return rho


def depolarize_qubit(rho: np.ndarray, q: int, p: float) -> np.ndarray:
    """Apply ``(1-p) rho + p I/2`` to qubit ``q`` only."""
    n = num_qubits(rho)
    left, right = 2**q, 2 ** (n - q - 1)
    t = rho.reshape(left, 2, right, left, 2, right)
    traced = np.einsum("aibcid->abcd", t)
    mixed = 0.5 * traced[:, None, :, :, None, :] * np.eye(2)[None, :, None, None, :, None]
    return ((1 - p) * t + p * mixed).reshape(rho.shape)


def _check_p(p: float) -> float:
    p = float(p)
    if not 0 <= p <= 1:
        raise ValueError(f"noise strength must lie in [0, 1], got {p}")
    return p


def apply_depolarizing_all(
    rho: np.ndarray, p: float, order: Iterable[int] | None = None
) -> np.ndarray:
    """Apply the single-qubit depolarizing channel independently to every qubit."""
    p = _check_p(p)
    n = num_qubits(rho)
    if p == 0:
        return rho.copy()
    if p == 1:
        return maximally_mixed(n)
    for q in order if order is not None else range(n):
        rho = depolarize_qubit(rho, q, p)
    return rho


def evolve(
    circuit: Circuit,
    p: float,
    record: bool = False,
    max_qubits: int | None = None,
):
    """Run the noisy device from ``|0...0>``.

    Each layer is followed by depolarizing noise of strength ``p`` on every
    qubit. Returns the final state, or ``(final, trajectory)`` when ``record``
    is set; ``trajectory[k]`` is the state after the noise of layer ``k + 1``.

    Raises:
        QubitCapError: if ``circuit.n`` exceeds ``max_qubits`` (default from
            ``NISQ_QUBIT_CAP``, else 12).
        CircuitValidationError: if the circuit is invalid.
    """
    p = _check_p(p)
    cap = qubit_cap() if max_qubits is None else max_qubits
    if circuit.n > cap:
        raise QubitCapError(f"{circuit.n} qubits exceeds the dense-simulation cap of {cap}")
    validate_circuit(circuit).raise_if_invalid()
    rho = zero_state(circuit.n)
    trajectory = []
    for layer in circuit.layers:
        rho = apply_depolarizing_all(apply_unitary_layer(rho, layer), p)
        if record:
            trajectory.append(rho)
    if record:
        return rho, trajectory
    return rho


# --- measurement --------------------------------------------------------------

def output_distribution(rho: np.ndarray) -> np.ndarray:
    """Computational-basis outcome probabilities ``<X|rho|X>``, indexed by ``int(X, 2)``."""
    probs = np.real(np.diag(rho)).copy()
    total = probs.sum()
    if abs(total - 1) >= 1e-6:
        raise StateError(f"diagonal sums to {total!r}; state is corrupted")
    probs = np.clip(probs, 0, None)
    return probs / probs.sum()


def bitstring(index: int, n: int) -> str:
    return format(index, f"0{n}b") if n else ""


def sample_output(rho: np.ndarray, seed, shots: int) -> list[str]:
    """Draw ``shots`` i.i.d. measurement records; deterministic given ``seed``."""
    if shots < 1:
        raise ValueError("shots must be >= 1")
    n = num_qubits(rho)
    probs = output_distribution(rho)
    rng = np.random.default_rng(seed)
    idx = rng.choice(len(probs), size=shots, p=probs)
    return [bitstring(int(i), n) for i in idx]


# --- reduced states ---------------------------------------------------------

def partial_trace(rho: np.ndarray, keep: Iterable[int]) -> np.ndarray:
    """Reduced state on the qubits in ``keep`` (kept in ascending order)."""
    n = num_qubits(rho)
    keep = sorted(set(int(q) for q in keep))
    if not keep:
        raise ValueError("keep must name at least one qubit")
    if keep[0] < 0 or keep[-1] >= n:
        raise ValueError(f"keep {keep} out of range for {n} qubits")
    if len(keep) == n:
        return rho
    drop = [q for q in range(n) if q not in keep]
    dk, dd = 2 ** len(keep), 2 ** len(drop)
    t = rho.reshape([2] * (2 * n))
    t = t.transpose(keep + drop + [n + q for q in keep] + [n + q for q in drop])
    t = t.reshape(dk, dd, dk, dd)
    return np.einsum("ajbj->ab", t)
