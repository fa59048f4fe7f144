from math import comb

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nisqlimits.dmsim import basis_state, bell_state, maximally_mixed, partial_trace, random_density_matrix
from nisqlimits.infotheory import von_neumann_entropy
from nisqlimits.shearer import (
    CoverageError,
    SubsetFamily,
    min_coverage,
    randomized_shearer_audit,
    shearer_slack,
)


@pytest.mark.parametrize(
    "n, subsets, expected",
    [(2, [{0}, {1}], 1), (3, [{0, 1}], 0), (4, [{0, 1}, {1, 2}, {2, 3}, {3, 0}], 2)],
)
def test_min_coverage_examples(n, subsets, expected):
    assert min_coverage(SubsetFamily.of(n, subsets)) == expected


@pytest.mark.parametrize("n, k", [(n, k) for n in range(1, 6) for k in range(1, n + 1)])
def test_all_k_subsets_coverage(n, k):
    assert min_coverage(SubsetFamily.all_k_subsets(n, k)) == comb(n - 1, k - 1)


def test_out_of_range_index_rejected():
    with pytest.raises(ValueError):
        SubsetFamily.of(2, [{0, 2}])


def test_slack_examples():
    fam = SubsetFamily.of(3, [{0, 1}, {1, 2}, {0, 2}])
    assert shearer_slack(basis_state("000"), fam, 2) == pytest.approx(0, abs=1e-12)
    assert shearer_slack(bell_state(), SubsetFamily.of(2, [{0}, {1}]), 1) == pytest.approx(2)
    one = SubsetFamily.of(1, [{0}])
    assert shearer_slack(random_density_matrix(1, np.random.default_rng(0)), one, 1) == pytest.approx(0, abs=1e-12)


@pytest.mark.parametrize("n, k", [(3, 1), (3, 2), (4, 2), (4, 3)])
def test_maximally_mixed_is_tight(n, k):
    fam = SubsetFamily.all_k_subsets(n, k)
    # C(n, k) * k - C(n-1, k-1) * n = 0
    assert shearer_slack(maximally_mixed(n), fam, comb(n - 1, k - 1)) == pytest.approx(0, abs=1e-9)


def test_refuses_t_above_coverage():
    with pytest.raises(CoverageError):
        shearer_slack(maximally_mixed(3), SubsetFamily.of(3, [{0, 1}]), 1)


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_monotone_in_t(seed):
    rho = random_density_matrix(3, np.random.default_rng(seed))
    fam = SubsetFamily.all_k_subsets(3, 2)
    s = von_neumann_entropy(rho)
    assert shearer_slack(rho, fam, 1) == pytest.approx(shearer_slack(rho, fam, 2) + s, abs=1e-10)


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_strong_subadditivity(seed):
    rho = random_density_matrix(3, np.random.default_rng(seed), rank=1 + seed % 8)

    def S(keep):
        return von_neumann_entropy(partial_trace(rho, keep))

    assert S([0, 1]) + S([1, 2]) >= von_neumann_entropy(rho) + S([1]) - 1e-7


@pytest.mark.parametrize("n, trials", [(1, 50), (2, 500), (3, 200), (4, 60)])
def test_audit_passes(n, trials):
    result = randomized_shearer_audit(n, trials, seed=42)
    assert result.passed, result


def test_audit_with_pairs_family():
    fam = SubsetFamily.all_k_subsets(3, 2)
    result = randomized_shearer_audit(3, 50, seed=5, families=[fam])
    assert result.min_slack >= -1e-7


def test_audit_is_deterministic():
    a = randomized_shearer_audit(3, 30, seed=9)
    b = randomized_shearer_audit(3, 30, seed=9)
    assert a.min_slack == b.min_slack and a.worst_t == b.worst_t
