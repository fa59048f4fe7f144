"""Bipartite entanglement: exact pure-state values and certified upper bounds
on the relative entropy of entanglement.

Any separable ``sigma`` certifies ``E_R(rho) <= D(rho || sigma)``. The search
below returns the best such ``sigma`` it finds together with its explicit
product decomposition, so every reported bound can be re-checked.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .dmsim import num_qubits, partial_trace
from .infotheory import (
    SUPPORT_EIG_TOL,
    SUPPORT_WEIGHT_TOL,
    Bipartition,
    dephase,
    distance_to_max_mixed,
    von_neumann_entropy,
)

MAX_SEARCH_QUBITS = 6


class NotPureError(ValueError):
    pass


def entanglement_entropy_pure(rho: np.ndarray, part: Bipartition) -> float:
    """Entropy of the ``A`` marginal of a pure state (equals ``E_R`` there)."""
    if np.linalg.eigvalsh(rho)[-1] < 1 - 1e-8:
        raise NotPureError("state is not pure")
    return von_neumann_entropy(partial_trace(rho, part.side_a))


def er_upper_via_max_mixed(rho: np.ndarray) -> float:
    """``D(rho || I/2^n)``; valid because the maximally mixed state is separable."""
    return distance_to_max_mixed(rho)


# --- ordering helpers -------------------------------------------------------

def _ab_permutation(part: Bipartition) -> list[int]:
    return list(part.side_a) + list(part.side_b)


def _permute_qubits(op: np.ndarray, order: list[int]) -> np.ndarray:
    """Reorder tensor factors so that new qubit ``k`` is old qubit ``order[k]``."""
    n = len(order)
    t = op.reshape([2] * (2 * n))
    t = t.transpose(order + [n + q for q in order])
    return t.reshape(op.shape)


def _to_natural(op_ab: np.ndarray, part: Bipartition) -> np.ndarray:
    order = _ab_permutation(part)
    inverse = [order.index(q) for q in range(part.n)]
    return _permute_qubits(op_ab, inverse)


@dataclass
class SeparableWitness:
    """Explicit separable state ``sum_j w_j rho_A^j (x) rho_B^j`` across ``part``."""

    part: Bipartition
    weights: np.ndarray
    factors_a: list[np.ndarray]
    factors_b: list[np.ndarray]
    assembled: np.ndarray = field(init=False)

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=float)
        sigma_ab = sum(
            w * np.kron(fa, fb) for w, fa, fb in zip(self.weights, self.factors_a, self.factors_b)
        )
        self.assembled = _to_natural(sigma_ab, self.part)

    def check(self, atol: float = 1e-10) -> None:
        """Raise ``ValueError`` unless weights and factors are valid states."""
        if np.any(self.weights < -atol) or abs(self.weights.sum() - 1) > atol:
            raise ValueError("weights must be a probability vector")
        for f in self.factors_a + self.factors_b:
            if abs(np.trace(f).real - 1) > atol or np.abs(f - f.conj().T).max() > atol:
                raise ValueError("factor is not a unit-trace Hermitian matrix")
            if np.linalg.eigvalsh(f).min() < -atol:
                raise ValueError("factor is not positive semidefinite")

    def __len__(self) -> int:
        return len(self.weights)


def _relent_fixed(rho: np.ndarray, s_rho: float, sigma: np.ndarray) -> float:
    lam, vecs = np.linalg.eigh(sigma)
    weights = np.real(np.einsum("ij,jk,ki->i", vecs.conj().T, rho, vecs))
    on = lam > SUPPORT_EIG_TOL
    if weights[~on].sum() > SUPPORT_WEIGHT_TOL:
        return math.inf
    return -s_rho - float(np.sum(weights[on] * np.log2(lam[on])))


class _Mixture:
    """Parameter vector <-> separable state in A-then-B qubit order.

    Per component: one weight logit, then real and imaginary parts of square
    matrices ``G_A``, ``G_B``; each factor is ``G G^dag / Tr``.
    """

    def __init__(self, k: int, da: int, db: int):
        self.k, self.da, self.db = k, da, db
        self.size = 1 + 2 * da * da + 2 * db * db

    def _arrays(self, x: np.ndarray):
        da, db = self.da, self.db
        comps = x.reshape(self.k, self.size)
        logits = comps[:, 0]
        w = np.exp(logits - logits.max())
        w /= w.sum()
        sa, sb = da * da, db * db
        ga = (comps[:, 1 : 1 + sa] + 1j * comps[:, 1 + sa : 1 + 2 * sa]).reshape(self.k, da, da)
        off = 1 + 2 * sa
        gb = (comps[:, off : off + sb] + 1j * comps[:, off + sb :]).reshape(self.k, db, db)
        return w, _gram_batch(ga), _gram_batch(gb)

    def unpack(self, x: np.ndarray):
        w, fa, fb = self._arrays(x)
        return w, list(fa), list(fb)

    def state(self, x: np.ndarray) -> np.ndarray:
        w, fa, fb = self._arrays(x)
        d = self.da * self.db
        return np.einsum("j,jab,jcd->acbd", w, fa, fb).reshape(d, d)

    def pack(self, logits, roots_a, roots_b) -> np.ndarray:
        rows = []
        for lg, ga, gb in zip(logits, roots_a, roots_b):
            rows.append(
                np.concatenate([[lg], ga.real.ravel(), ga.imag.ravel(), gb.real.ravel(), gb.imag.ravel()])
            )
        return np.concatenate(rows)


def _gram_batch(g: np.ndarray) -> np.ndarray:
    m = g @ g.conj().transpose(0, 2, 1)
    tr = np.einsum("jaa->j", m).real
    d = g.shape[1]
    dead = tr <= 1e-300
    if np.any(dead):
        m[dead] = np.eye(d)
        tr[dead] = d
    return m / tr[:, None, None]


def _psd_root(rho: np.ndarray) -> np.ndarray:
    lam, vecs = np.linalg.eigh(rho)
    return vecs * np.sqrt(np.clip(lam, 0, None))


def compass_search(f, x0: np.ndarray, rng: np.random.Generator, iters: int = 200,
                   step: float = 0.2, decay: float = 0.5, min_step: float = 1e-10,
                   ftol: float = 1e-12):
    """Gradient-free coordinate search.

    Each sweep tries ``+-step`` on every coordinate in random order and keeps
    any improvement; the step is multiplied by ``decay`` after a sweep that
    gains less than ``ftol``.
    """
    x = np.array(x0, dtype=float)
    fx = f(x)
    for _ in range(iters):
        start = fx
        for c in rng.permutation(len(x)):
            for delta in (step, -step):
                x[c] += delta
                fn = f(x)
                if fn < fx:
                    fx = fn
                    break
                x[c] -= delta
        if not start - fx > ftol:
            step *= decay
            if step < min_step:
                break
    return x, fx


def er_upper_via_search(
    rho: np.ndarray,
    part: Bipartition,
    components: int | None = None,
    restarts: int = 8,
    seed: int = 0,
    iters: int = 200,
    seed_candidates: bool = True,
) -> tuple[float, SeparableWitness]:
    """Upper-bound ``E_R`` by minimizing ``D(rho || sigma)`` over separable mixtures.

    The maximally mixed state is always a candidate, so the result never
    exceeds :func:`er_upper_via_max_mixed`. With ``seed_candidates`` the
    product of marginals and the dephased state (both separable) are also
    tried, and seed the first two restarts. Remaining restarts start from
    random mixtures drawn from ``SeedSequence(seed)``.

    Returns:
        ``(bound, witness)`` with ``bound == D(rho || witness.assembled)``.
    """
    n = num_qubits(rho)
    if n != part.n:
        raise ValueError(f"bipartition is for {part.n} qubits, state has {n}")
    if n > MAX_SEARCH_QUBITS:
        raise ValueError(f"separable search is limited to {MAX_SEARCH_QUBITS} qubits")
    na, nb = len(part.side_a), len(part.side_b)
    da, db = 2**na, 2**nb
    k = components if components is not None else 2 ** (2 * min(na, nb))

    rho_ab = _permute_qubits(rho, _ab_permutation(part))
    s_rho = von_neumann_entropy(rho_ab)

    def make(weights, fa, fb):
        return SeparableWitness(part, np.asarray(weights, float), list(fa), list(fb))

    candidates: list[tuple[float, SeparableWitness]] = []
    sigma0 = make([1.0], [np.eye(da) / da], [np.eye(db) / db])
    candidates.append((er_upper_via_max_mixed(rho), sigma0))

    model = _Mixture(k, da, db)
    starts: list[np.ndarray] = []
    if seed_candidates:
        ma = partial_trace(rho_ab, range(na))
        mb = partial_trace(rho_ab, range(na, n))
        prod = make([1.0], [ma], [mb])
        candidates.append((_relent_fixed(rho_ab, s_rho, np.kron(ma, mb)), prod))

        diag = np.real(np.diag(dephase(rho_ab)))
        support = np.flatnonzero(diag > 0)
        fa = [_basis_proj(i // db, da) for i in support]
        fb = [_basis_proj(i % db, db) for i in support]
        deph = make(diag[support] / diag[support].sum(), fa, fb)
        candidates.append((_relent_fixed(rho_ab, s_rho, np.diag(diag).astype(complex)), deph))

        logits = np.full(k, -6.0)
        logits[0] = 0.0
        roots_a = [_psd_root(ma)] + [np.eye(da, dtype=complex)] * (k - 1)
        roots_b = [_psd_root(mb)] + [np.eye(db, dtype=complex)] * (k - 1)
        starts.append(model.pack(logits, roots_a, roots_b))

        top = support[np.argsort(diag[support])[::-1][:k]]
        logits = np.full(k, -6.0)
        roots_a = [np.eye(da, dtype=complex)] * k
        roots_b = [np.eye(db, dtype=complex)] * k
        for j, i in enumerate(top):
            logits[j] = np.log(diag[i])
            roots_a[j] = _basis_proj(i // db, da)
            roots_b[j] = _basis_proj(i % db, db)
        starts.append(model.pack(logits, roots_a, roots_b))

    def objective(x):
        return _relent_fixed(rho_ab, s_rho, model.state(x))

    for r, child in enumerate(np.random.SeedSequence(seed).spawn(restarts)):
        rng = np.random.default_rng(child)
        x0 = starts[r] if r < len(starts) else rng.normal(size=k * model.size)
        x, _ = compass_search(objective, x0, rng, iters=iters)
        w, fa, fb = model.unpack(x)
        wit = make(w, fa, fb)
        # recompute from the assembled witness so the bound is exactly what it certifies
        candidates.append((_relent_fixed(rho_ab, s_rho, model.state(x)), wit))

    bound, witness = min(candidates, key=lambda c: c[0])
    return max(0.0, bound), witness


def _basis_proj(i: int, d: int) -> np.ndarray:
    m = np.zeros((d, d), dtype=complex)
    m[i, i] = 1
    return m
