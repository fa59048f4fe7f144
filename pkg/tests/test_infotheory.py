import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nisqlimits.circuits import Topology, random_circuit
from nisqlimits.dmsim import (
    apply_depolarizing_all,
    apply_unitary_layer,
    basis_state,
    bell_state,
    evolve,
    maximally_mixed,
    output_distribution,
    random_density_matrix,
)
from nisqlimits.infotheory import (
    Bipartition,
    dephase,
    distance_to_max_mixed,
    kl_divergence,
    mutual_information,
    one_norm_distance,
    relative_entropy,
    shannon_entropy,
    von_neumann_entropy,
)

from oracles import binary_entropy, entropy_oracle, relative_entropy_oracle

H25 = binary_entropy(0.25)
seeds = st.integers(0, 2**32 - 1)


def test_binary_entropy_value():
    assert H25 == pytest.approx(0.8112781244591328, abs=1e-12)


@pytest.mark.parametrize("n", [1, 2, 3])
def test_entropy_extremes(n, rng):
    assert von_neumann_entropy(basis_state("0" * n)) == pytest.approx(0, abs=1e-8)
    assert abs(von_neumann_entropy(maximally_mixed(n)) - n) <= 1e-9
    psi = rng.normal(size=2**n) + 1j * rng.normal(size=2**n)
    psi /= np.linalg.norm(psi)
    assert von_neumann_entropy(np.outer(psi, psi.conj())) == pytest.approx(0, abs=1e-8)


def test_entropy_of_quarter_state():
    assert von_neumann_entropy(np.diag([0.75, 0.25])) == pytest.approx(H25, abs=1e-12)


@settings(max_examples=30, deadline=None)
@given(seed=seeds, n=st.integers(1, 3))
def test_entropy_matches_general_eigensolver(seed, n):
    rho = random_density_matrix(n, np.random.default_rng(seed))
    assert von_neumann_entropy(rho) == pytest.approx(entropy_oracle(rho), abs=1e-9)


@settings(max_examples=30, deadline=None)
@given(seed=seeds, n=st.integers(1, 3))
def test_relative_entropy_matches_matrix_log(seed, n):
    rng = np.random.default_rng(seed)
    rho, sigma = random_density_matrix(n, rng), random_density_matrix(n, rng)
    assert relative_entropy(rho, sigma) == pytest.approx(relative_entropy_oracle(rho, sigma), abs=1e-7)


def test_relative_entropy_examples(rng):
    rho = random_density_matrix(2, rng)
    assert relative_entropy(rho, rho) == pytest.approx(0, abs=1e-8)
    assert relative_entropy(rho, maximally_mixed(2)) == pytest.approx(2 - von_neumann_entropy(rho), abs=1e-8)
    assert relative_entropy(basis_state("0"), basis_state("1")) == math.inf
    with pytest.raises(ValueError):
        relative_entropy(rho, maximally_mixed(1))


def test_relative_entropy_support_inclusion_is_finite():
    assert relative_entropy(basis_state("0"), np.diag([0.5, 0.5, 0, 0]).astype(complex)[:2, :2]) == pytest.approx(1)
    # rank-deficient sigma whose support contains rho's
    sigma = np.diag([0.5, 0.5, 0, 0]).astype(complex)
    assert math.isfinite(relative_entropy(basis_state("01"), sigma))


def test_distance_to_max_mixed_examples():
    assert distance_to_max_mixed(basis_state("000")) == pytest.approx(3)
    assert distance_to_max_mixed(maximally_mixed(2)) == pytest.approx(0, abs=1e-12)
    assert distance_to_max_mixed(np.diag([0.75, 0.25])) == pytest.approx(0.188722, abs=1e-6)


@settings(max_examples=25, deadline=None)
@given(seed=seeds, n=st.integers(1, 4))
def test_distance_agrees_with_relative_entropy(seed, n):
    rho = random_density_matrix(n, np.random.default_rng(seed))
    assert abs(distance_to_max_mixed(rho) - relative_entropy(rho, maximally_mixed(n))) <= 1e-7


@pytest.mark.parametrize(
    "dist, expected",
    [([1, 0, 0, 0], 0.0), ([0.25] * 4, 2.0), ([0.125] * 8, 3.0), ([0.75, 0.25], H25)],
)
def test_shannon_entropy_examples(dist, expected):
    assert shannon_entropy(np.array(dist)) == pytest.approx(expected, abs=1e-12)


def test_dephase_examples(rng):
    d = np.diag([0.1, 0.2, 0.3, 0.4]).astype(complex)
    assert np.allclose(dephase(d), d)
    assert np.allclose(dephase(bell_state()), np.diag([0.5, 0, 0, 0.5]))


@settings(max_examples=30, deadline=None)
@given(seed=seeds, n=st.integers(1, 4))
def test_dephasing_raises_entropy_and_matches_shannon(seed, n):
    rho = random_density_matrix(n, np.random.default_rng(seed), rank=1 + seed % 2**n)
    assert von_neumann_entropy(dephase(rho)) >= von_neumann_entropy(rho) - 1e-8
    assert abs(shannon_entropy(output_distribution(rho)) - von_neumann_entropy(dephase(rho))) <= 1e-9


def test_mutual_information_examples(rng):
    part = Bipartition.chain(2, 1)
    prod = np.kron(random_density_matrix(1, rng), random_density_matrix(1, rng))
    assert mutual_information(prod, part) == pytest.approx(0, abs=1e-8)
    assert mutual_information(bell_state(), part) == pytest.approx(2, abs=1e-8)
    noisy = apply_depolarizing_all(bell_state(), 0.5)
    # marginals stay I/2, so I = 2 - S(rho)
    lam = np.linalg.eigvalsh(noisy)
    direct = 2 - (-np.sum(lam[lam > 0] * np.log2(lam[lam > 0])))
    assert mutual_information(noisy, part) == pytest.approx(direct, abs=1e-10)
    assert mutual_information(noisy, part) <= distance_to_max_mixed(noisy) + 1e-7


@settings(max_examples=30, deadline=None)
@given(seed=seeds, n=st.integers(2, 4), data=st.data())
def test_mutual_information_below_distance(seed, n, data):
    cut = data.draw(st.integers(1, n - 1))
    rho = random_density_matrix(n, np.random.default_rng(seed))
    assert mutual_information(rho, Bipartition.chain(n, cut)) <= distance_to_max_mixed(rho) + 1e-7


@settings(max_examples=20, deadline=None)
@given(seed=seeds, n=st.integers(2, 4))
def test_distance_is_unitarily_invariant(seed, n):
    rng = np.random.default_rng(seed)
    rho = random_density_matrix(n, rng)
    layer = random_circuit(Topology.chain(n), 1, rng, fill=1.0).layers[0]
    assert abs(distance_to_max_mixed(apply_unitary_layer(rho, layer)) - distance_to_max_mixed(rho)) <= 1e-8


def test_one_norm_examples():
    d = np.array([0.2, 0.8])
    assert one_norm_distance(d, d) == 0
    assert one_norm_distance([1, 0], [0, 1]) == 2
    assert one_norm_distance([0.75, 0.25], [0.5, 0.5]) == pytest.approx(0.5)
    with pytest.raises(ValueError):
        one_norm_distance([1.0], [0.5, 0.5])


def test_kl_examples():
    d = np.array([0.3, 0.7])
    assert kl_divergence(d, d) == pytest.approx(0, abs=1e-15)
    assert kl_divergence([1, 0], [0.5, 0.5]) == pytest.approx(1)
    assert kl_divergence([0.5, 0.5], [1, 0]) == math.inf
    assert kl_divergence([1, 0], [0.5, 0.5], "nats") == pytest.approx(math.log(2))


@settings(max_examples=50, deadline=None)
@given(seed=seeds, m=st.integers(1, 5))
def test_kl_against_uniform_and_pinsker(seed, m):
    rng = np.random.default_rng(seed)
    d1 = rng.dirichlet(np.full(2**m, 0.3))
    d2 = rng.dirichlet(np.ones(2**m))
    uniform = np.full(2**m, 2.0**-m)
    assert abs(kl_divergence(d1, uniform) - (m - shannon_entropy(d1))) <= 1e-9
    assert one_norm_distance(d1, d2) <= math.sqrt(2 * kl_divergence(d1, d2, "nats")) + 1e-9


@pytest.mark.parametrize("cut", [0, 4, 5])
def test_bipartition_rejects_trivial_cuts(cut):
    with pytest.raises(ValueError):
        Bipartition.chain(4, cut)


def test_grid_block_and_straddle():
    part = Bipartition.grid_block(3, 3, 2, 2)
    assert part.side_a == (0, 1, 3, 4) and part.contains_end
    assert part.straddles((1, 2)) and not part.straddles((0, 1))


def test_entropy_growth_single_example():
    rho = random_density_matrix(3, np.random.default_rng(1))
    p = 0.3
    assert von_neumann_entropy(apply_depolarizing_all(rho, p)) >= (1 - p) * von_neumann_entropy(rho) + 3 * p - 1e-7


def test_noisy_trajectory_decays(rng):
    c = random_circuit(Topology.chain(4), 8, rng)
    _, traj = evolve(c, 0.1, record=True)
    for t, rho in enumerate(traj, start=1):
        assert distance_to_max_mixed(rho) <= 4 * 0.9**t + 1e-7
