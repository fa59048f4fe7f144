"""Property tester for the subset-entropy inequality

    sum_{F in family} S(rho_F) >= t * S(rho)

which holds whenever every qubit lies in at least ``t`` members of the family.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .dmsim import num_qubits, partial_trace, random_density_matrix
from .infotheory import von_neumann_entropy


class CoverageError(ValueError):
    """Raised when ``t`` exceeds the family's minimum coverage."""


@dataclass(frozen=True)
class SubsetFamily:
    """A multiset of qubit subsets with per-qubit coverage counts precomputed."""

    n: int
    subsets: tuple[frozenset[int], ...]
    coverage: tuple[int, ...]

    @classmethod
    def of(cls, n: int, subsets: Iterable[Iterable[int]]) -> "SubsetFamily":
        if n < 1:
            raise ValueError("ground set must be nonempty")
        frozen = tuple(frozenset(int(q) for q in s) for s in subsets)
        cover = [0] * n
        for s in frozen:
            for q in s:
                if not 0 <= q < n:
                    raise ValueError(f"index {q} outside 0..{n - 1}")
                cover[q] += 1
        return cls(n, frozen, tuple(cover))

    @classmethod
    def all_k_subsets(cls, n: int, k: int) -> "SubsetFamily":
        return cls.of(n, itertools.combinations(range(n), k))


def min_coverage(family: SubsetFamily) -> int:
    """Largest ``t`` for which ``family`` qualifies."""
    return min(family.coverage)


def subset_entropy(rho: np.ndarray, subset: frozenset[int]) -> float:
    if not subset:
        return 0.0
    return von_neumann_entropy(partial_trace(rho, subset))


def shearer_slack(rho: np.ndarray, family: SubsetFamily, t: int) -> float:
    """Return ``sum_F S(rho_F) - t S(rho)``; nonnegative for qualifying ``t``.

    Raises:
        CoverageError: if ``t`` exceeds ``min_coverage(family)``; the
            inequality is not guaranteed there, so no value is reported.
    """
    n = num_qubits(rho)
    if n != family.n:
        raise ValueError(f"family is over {family.n} qubits, state has {n}")
    if t < 0:
        raise ValueError("t must be nonnegative")
    cov = min_coverage(family)
    if t > cov:
        raise CoverageError(f"t = {t} exceeds minimum coverage {cov}")
    cache: dict[frozenset[int], float] = {}
    total = 0.0
    for s in family.subsets:
        if s not in cache:
            cache[s] = subset_entropy(rho, s)
        total += cache[s]
    return total - t * von_neumann_entropy(rho)


def random_family(n: int, rng: np.random.Generator) -> SubsetFamily:
    """Random family: a few random covers of the ground set plus loose subsets."""
    if rng.random() < 0.3:
        return SubsetFamily.all_k_subsets(n, int(rng.integers(1, n + 1)))
    subsets: list[list[int]] = []
    for _ in range(int(rng.integers(1, 4))):
        # random partition of the ground set into blocks
        perm = rng.permutation(n)
        cuts = np.sort(rng.choice(np.arange(1, n), size=int(rng.integers(0, n)), replace=False))
        subsets.extend(block.tolist() for block in np.split(perm, cuts))
    for _ in range(int(rng.integers(0, n + 1))):
        mask = rng.random(n) < 0.5
        subsets.append(np.flatnonzero(mask).tolist())
    return SubsetFamily.of(n, subsets)


@dataclass
class AuditResult:
    min_slack: float
    trials: int
    worst_family: SubsetFamily | None
    worst_t: int | None

    @property
    def passed(self) -> bool:
        return self.min_slack >= -1e-7


def randomized_shearer_audit(
    n: int,
    trials: int,
    seed: int,
    families: Sequence[SubsetFamily] | None = None,
) -> AuditResult:
    """Minimum slack over random states and qualifying (family, t) pairs.

    Each trial draws its own generator from ``SeedSequence(seed).spawn``; a
    trial uses ``t = min_coverage`` half of the time and a uniformly random
    smaller ``t`` otherwise. If ``families`` is given, trials cycle through it
    instead of drawing random families.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if not 1 <= n <= 4:
        raise ValueError("audit is limited to 1 <= n <= 4 qubits")
    worst = AuditResult(np.inf, trials, None, None)
    for i, child in enumerate(np.random.SeedSequence(seed).spawn(trials)):
        rng = np.random.default_rng(child)
        rank = int(rng.integers(1, 2**n + 1))
        rho = random_density_matrix(n, rng, rank=rank)
        family = families[i % len(families)] if families else random_family(n, rng)
        cov = min_coverage(family)
        t = cov if rng.random() < 0.5 else int(rng.integers(0, cov + 1))
        slack = shearer_slack(rho, family, t)
        if slack < worst.min_slack:
            worst = AuditResult(slack, trials, family, t)
    return worst
