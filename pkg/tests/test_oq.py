import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_density
from oqent.circuits import SWAP, psi_alpha
from oqent.measure import rotated_pair, sequential_probability
from oqent.oq import (
    MarginalTable,
    OQTable,
    expectations,
    inverse_transform,
    marginal_correlators,
    marginal_from_correlators,
    marginal_negativity,
    marginal_oq,
    oq_negativity,
    oq_table,
    single_marginal,
)
from oqent.qcore import basis_ket, density_matrix

KET0 = density_matrix(np.array([1, 0], dtype=complex))
BELL = density_matrix(psi_alpha(np.pi / 2))
XY = rotated_pair(0.0, 0.0)
angles = st.floats(0.0, np.pi / 2)
seeds = st.integers(0, 2**32 - 1)


def test_single_qubit_table_of_ket0_is_uniform():
    table = oq_table(KET0, [XY])
    np.testing.assert_allclose(table.values, 0.25, atol=1e-15)
    assert oq_negativity(table) == 0.0


def test_negativity_examples():
    assert oq_negativity(np.array([0.1, 0.2, 0.3, 0.4])) == 0.0
    assert oq_negativity(np.array([-0.25, 0.25, 0.25, 0.75])) == pytest.approx(0.25)
    assert oq_negativity(np.array([-1e-13, 0.5, 0.5, 1e-13])) == 0.0


def test_table_validation():
    with pytest.raises(ValueError):
        OQTable(2, 2, np.full(16, 0.1))
    with pytest.raises(ValueError):
        MarginalTable(np.zeros(3))
    with pytest.raises(ValueError):
        oq_table(BELL, [XY, XY, XY])


def test_rows_use_binary_indices():
    table = oq_table(BELL, [XY, XY])
    rows = table.rows()
    assert [r[0] for r in rows[:3]] == ["0000", "0001", "0010"]
    assert table.outcome(0b1011) == ((1, 0), (1, 1))


def test_marginal_of_uniform_table():
    m = marginal_oq(OQTable(2, 2, np.full(16, 1 / 16)))
    np.testing.assert_allclose(m.values, 0.25, atol=1e-15)


def test_bell_marginal():
    m = marginal_oq(oq_table(BELL, [XY, XY]))
    np.testing.assert_allclose(np.sort(m.values), [-0.25, 0.25, 0.25, 0.75], atol=1e-12)
    c1, c2, c12 = marginal_correlators(BELL, [XY, XY])
    assert (c1, c2) == pytest.approx((-1, -1), abs=1e-12)
    np.testing.assert_allclose(marginal_from_correlators(c1, c2, c12).values, m.values, atol=1e-12)


def test_marginal_from_correlators_examples():
    np.testing.assert_allclose(marginal_from_correlators(0, 0, 0).values, 0.25)
    np.testing.assert_allclose(np.sort(marginal_from_correlators(-1, -1, 0).values), [-0.25, 0.25, 0.25, 0.75])
    with pytest.raises(ValueError):
        marginal_from_correlators(1.5, 0, 0)


def test_bell_single_marginal_is_measurement_probability():
    table = oq_table(BELL, [XY, XY])
    for sub in (0, 1):
        for slot in (0, 1):
            lifted = XY[slot].lift(sub, 2)
            direct = [sequential_probability(BELL, [(lifted, a)]) for a in (0, 1)]
            np.testing.assert_allclose(single_marginal(table, sub, slot), direct, atol=1e-10)


@settings(max_examples=25, deadline=None)
@given(seed=seeds, t1=angles, t2=angles, pure=st.booleans())
def test_table_properties(seed, t1, t2, pure):
    rho = random_density(np.random.default_rng(seed), rank=1 if pure else None)
    pair = rotated_pair(t1, t2)
    table = oq_table(rho, [pair, pair])
    assert table.values.sum() == pytest.approx(1, abs=1e-10)
    np.testing.assert_allclose(inverse_transform(table), expectations(rho, [pair, pair]), atol=1e-10)
    marginal = marginal_oq(table)
    assert marginal.values.sum() == pytest.approx(1, abs=1e-10)


def test_marginal_shortcut_matches_full_table_on_100_states():
    rng = np.random.default_rng(7)
    for i in range(100):
        rho = random_density(rng, rank=1 if i % 2 else None)
        t1, t2 = rng.uniform(0, np.pi / 2, size=2)
        pair = rotated_pair(t1, t2)
        full = marginal_oq(oq_table(rho, [pair, pair])).values
        short = marginal_from_correlators(*marginal_correlators(rho, [pair, pair])).values
        np.testing.assert_allclose(short, full, atol=1e-10)


def test_marginal_negativity_examples():
    assert marginal_negativity(density_matrix(basis_ket("00")), 0, 0) == 0.0
    assert marginal_negativity(BELL, 0, 0) == pytest.approx(0.25, abs=1e-12)
    alphas = np.linspace(0, np.pi, 181)
    values = [marginal_negativity(density_matrix(psi_alpha(a)), 0, 0) for a in alphas]
    assert alphas[int(np.argmax(values))] == pytest.approx(np.pi / 2)


@given(alpha=st.floats(0, np.pi), theta=angles)
def test_marginal_negativity_symmetric_under_qubit_relabeling(alpha, theta):
    rho = density_matrix(psi_alpha(alpha))
    swapped = SWAP @ rho @ SWAP
    assert marginal_negativity(swapped, theta, theta) == pytest.approx(marginal_negativity(rho, theta, theta), abs=1e-10)


@settings(max_examples=40, deadline=None)
@given(seed=seeds, theta=angles)
def test_product_states_score_zero_at_equal_angles(seed, theta):
    rng = np.random.default_rng(seed)
    rho = np.kron(random_density(rng, dim=2), random_density(rng, dim=2))
    assert marginal_negativity(rho, theta, theta) == 0.0


def test_product_states_can_score_above_zero_at_unequal_angles():
    # The sequential correlator equals sin^2(theta2 - theta1) for every state,
    # so unequal angles open a small window for separable inputs.
    rng = np.random.default_rng(0)
    best = 0.0
    for _ in range(500):
        a, b = (random_density(rng, dim=2, rank=1) for _ in range(2))
        best = max(best, marginal_negativity(np.kron(a, b), 0.3, 0.9))
    assert 0.01 < best < 0.06
    for bits in ("00", "01", "10", "11"):
        assert marginal_negativity(density_matrix(basis_ket(bits)), 0.3, 0.9) == 0.0


@settings(max_examples=30, deadline=None)
@given(seed=seeds, t1=angles, t2=angles)
def test_sequential_correlator_is_state_independent(seed, t1, t2):
    rho = random_density(np.random.default_rng(seed))
    pair = rotated_pair(t1, t2)
    _, _, c12 = marginal_correlators(rho, [pair, pair])
    assert c12 == pytest.approx(np.sin(t2 - t1) ** 2, abs=1e-12)
