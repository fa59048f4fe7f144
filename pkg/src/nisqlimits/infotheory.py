"""Entropies, divergences and distances, all in bits unless stated.

Relative entropies return ``math.inf`` when the first argument has weight
outside the support of the second.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .dmsim import num_qubits, partial_trace

SUPPORT_EIG_TOL = 1e-10
SUPPORT_WEIGHT_TOL = 1e-8


@dataclass(frozen=True)
class Bipartition:
    """Split of ``n`` qubits into ``A`` and its complement.

    Use the constructors: :meth:`chain` (``A = {0..cut-1}``),
    :meth:`chain_segment` (a contiguous run in the middle of a chain) and
    :meth:`grid_block` (a rectangle anchored at the top-left lattice corner).
    """

    n: int
    side_a: tuple[int, ...]
    kind: str = "custom"
    contains_end: bool = False

    def __post_init__(self):
        a = tuple(sorted(set(self.side_a)))
        object.__setattr__(self, "side_a", a)
        if not 1 <= len(a) <= self.n - 1:
            raise ValueError(f"|A| = {len(a)} must lie in [1, {self.n - 1}]")
        if a[0] < 0 or a[-1] >= self.n:
            raise ValueError(f"A = {a} out of range for {self.n} qubits")

    @classmethod
    def chain(cls, n: int, cut: int) -> "Bipartition":
        return cls(n, tuple(range(cut)), "chain", True)

    @classmethod
    def chain_segment(cls, n: int, start: int, stop: int) -> "Bipartition":
        return cls(n, tuple(range(start, stop)), "chain", start == 0 or stop == n)

    @classmethod
    def grid_block(cls, rows: int, cols: int, height: int, width: int) -> "Bipartition":
        if not (1 <= height <= rows and 1 <= width <= cols):
            raise ValueError("block must fit inside the lattice")
        a = tuple(r * cols + c for r in range(height) for c in range(width))
        return cls(rows * cols, a, "grid", True)

    @property
    def side_b(self) -> tuple[int, ...]:
        a = set(self.side_a)
        return tuple(q for q in range(self.n) if q not in a)

    def straddles(self, qubits: Iterable[int]) -> bool:
        a = set(self.side_a)
        sides = {q in a for q in qubits}
        return len(sides) == 2


def _spectrum(rho: np.ndarray) -> np.ndarray:
    """Eigenvalues with PSD drift clamped to zero and renormalized to sum 1."""
    lam = np.clip(np.linalg.eigvalsh(rho), 0, None)
    return lam / lam.sum()


def _entropy_of(probs: np.ndarray) -> float:
    probs = probs[probs > 0]
    return float(max(0.0, -np.sum(probs * np.log2(probs))))


def von_neumann_entropy(rho: np.ndarray) -> float:
    return _entropy_of(_spectrum(rho))


def relative_entropy(rho: np.ndarray, sigma: np.ndarray) -> float:
    """Quantum relative entropy ``Tr rho (log2 rho - log2 sigma)``.

    Returns ``math.inf`` if more than ``1e-8`` of ``rho``'s weight lies outside
    the eigenspace of ``sigma`` with eigenvalues above ``1e-10``.
    """
    if rho.shape != sigma.shape:
        raise ValueError(f"dimension mismatch {rho.shape} vs {sigma.shape}")
    lam, vecs = np.linalg.eigh(sigma)
    weights = np.real(np.einsum("ij,jk,ki->i", vecs.conj().T, rho, vecs))
    on = lam > SUPPORT_EIG_TOL
    if weights[~on].sum() > SUPPORT_WEIGHT_TOL:
        return math.inf
    cross = float(np.sum(weights[on] * np.log2(lam[on])))
    return max(0.0, -von_neumann_entropy(rho) - cross)


def distance_to_max_mixed(rho: np.ndarray) -> float:
    """``D(rho || I/2^n) = n - S(rho)``."""
    return max(0.0, num_qubits(rho) - von_neumann_entropy(rho))


def shannon_entropy(dist: np.ndarray) -> float:
    return _entropy_of(np.asarray(dist, dtype=float))


def dephase(rho: np.ndarray) -> np.ndarray:
    """Drop all off-diagonal entries in the computational basis."""
    return np.diag(np.diag(rho))


def mutual_information(rho: np.ndarray, part: Bipartition) -> float:
    if num_qubits(rho) != part.n:
        raise ValueError(f"bipartition is for {part.n} qubits, state has {num_qubits(rho)}")
    s_a = von_neumann_entropy(partial_trace(rho, part.side_a))
    s_b = von_neumann_entropy(partial_trace(rho, part.side_b))
    return max(0.0, s_a + s_b - von_neumann_entropy(rho))


def _check_pair(d1, d2) -> tuple[np.ndarray, np.ndarray]:
    d1 = np.asarray(d1, dtype=float)
    d2 = np.asarray(d2, dtype=float)
    if d1.shape != d2.shape:
        raise ValueError(f"length mismatch {d1.shape} vs {d2.shape}")
    return d1, d2


def one_norm_distance(d1, d2) -> float:
    d1, d2 = _check_pair(d1, d2)
    return float(np.abs(d1 - d2).sum())


def kl_divergence(d1, d2, base: str = "bits") -> float:
    """Classical relative entropy ``sum p log(p/q)``; ``math.inf`` on support violation."""
    d1, d2 = _check_pair(d1, d2)
    if base not in ("bits", "nats"):
        raise ValueError("base must be 'bits' or 'nats'")
    on = d1 > 0
    if np.any(d2[on] <= 0):
        return math.inf
    log = np.log2 if base == "bits" else np.log
    return float(max(0.0, np.sum(d1[on] * (log(d1[on]) - log(d2[on])))))
