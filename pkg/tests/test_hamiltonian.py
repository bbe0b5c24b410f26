import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from bcspectra.errors import (
    BlockStructureViolation,
    DegenerateTopOrderBlock,
    EmptyRange,
    NonHermitianCoefficient,
)
from bcspectra.hamiltonian import (
    bulk_bands,
    derivative,
    evaluate,
    evaluate_many,
    gap_window,
    new_hamiltonian,
)
from bcspectra.verify import random_hamiltonian


def test_quadratic_construction(quadratic):
    assert quadratic.m == 1 and quadratic.nc == 2 and quadratic.order == 2
    assert evaluate(quadratic, 2.0)[0, 0] == 4


def test_linear_construction(linear):
    assert linear.nc == 2
    np.testing.assert_array_equal(evaluate(linear, 0), [[0, 1], [1, 0]])
    np.testing.assert_allclose(evaluate(linear, 1j), [[1j, 1], [1, -1j]])


def test_rejects_non_hermitian():
    with pytest.raises(NonHermitianCoefficient) as err:
        new_hamiltonian(1, [2], {2: 1j})
    assert err.value.order == 2


def test_rejects_degenerate_top_block():
    with pytest.raises(DegenerateTopOrderBlock) as err:
        new_hamiltonian(1, [2], {1: 1.0, 2: 0.0})
    assert err.value.order == 2


def test_rejects_block_structure_violation():
    # component 0 has N = 1, so h_2 must vanish on its row and column
    with pytest.raises(BlockStructureViolation) as err:
        new_hamiltonian(2, [1, 2], {1: np.eye(2), 2: [[0, 0.1], [0.1, 1]]})
    assert (err.value.order, err.value.row, err.value.col) == (2, 0, 1)


def test_mixed_order_top_blocks_checked_per_class():
    # the full h_2 is singular but its N = 2 block is not
    h = new_hamiltonian(2, [1, 2], {1: np.eye(2), 2: [[0, 0], [0, 3]]})
    assert h.order_classes() == {1: [0], 2: [1]}
    with pytest.raises(DegenerateTopOrderBlock):
        new_hamiltonian(2, [1, 2], {1: [[0, 1], [1, 0]], 2: [[0, 0], [0, 3]]})


def test_canonical_component_order():
    h = new_hamiltonian(3, [2, 1, 2], {1: np.eye(3), 2: np.diag([1.0, 0, 1.0])})
    assert h.perm == (1, 0, 2)


def test_coefficients_are_read_only(quadratic):
    with pytest.raises(ValueError):
        quadratic.coeffs[2][0, 0] = 5


def test_shape_errors():
    with pytest.raises(ValueError):
        new_hamiltonian(2, [1, 1], {1: np.eye(3)})
    with pytest.raises(ValueError):
        new_hamiltonian(2, [1], {1: np.eye(2)})


def test_bulk_bands_examples(linear, quadratic):
    np.testing.assert_allclose(bulk_bands(linear, [0.0, 1.0]), [[-1, 1], [-math.sqrt(2), math.sqrt(2)]])
    np.testing.assert_allclose(bulk_bands(quadratic, [3.0]), [[9.0]])


def test_gap_window_linear(linear):
    gaps = gap_window(linear, 10.0)
    assert len(gaps) == 1
    assert 0.0 in gaps[0]
    assert gaps[0].lo == pytest.approx(-1.0) and gaps[0].hi == pytest.approx(1.0)


def test_gap_window_quadratic_has_lower_proxy(quadratic):
    gaps = gap_window(quadratic, 10.0)
    assert len(gaps) == 1
    assert gaps[0].hi == pytest.approx(0.0, abs=1e-12)
    assert gaps[0].lo < -50


def test_gap_window_gapless_line():
    assert gap_window(new_hamiltonian(1, [1], {1: 1.0}), 10.0) == []


def test_gap_window_input_errors(linear):
    with pytest.raises(ValueError):
        gap_window(linear, 10.0, n_samples=50)
    with pytest.raises(EmptyRange):
        gap_window(linear, 0.0)


def test_derivative_matches_finite_difference(rng):
    h = random_hamiltonian(rng, 3, [2, 1, 3])
    p, step = 0.37 - 0.2j, 1e-6
    fd = (evaluate(h, p + step) - evaluate(h, p - step)) / (2 * step)
    np.testing.assert_allclose(derivative(h, p), fd, atol=1e-8)


orders = st.lists(st.integers(1, 3), min_size=1, max_size=4)


@given(orders, st.integers(0, 2**31), st.floats(-5, 5))
def test_hermitian_at_real_momentum(top_orders, seed, p):
    h = random_hamiltonian(np.random.default_rng(seed), len(top_orders), top_orders)
    hp = evaluate(h, p)
    assert np.max(np.abs(hp - hp.conj().T)) <= 1e-12 * max(1.0, np.max(np.abs(hp)))


@given(st.integers(1, 3), st.integers(1, 2), st.integers(0, 2**31))
def test_even_models_have_even_bands(m, half, seed):
    rng = np.random.default_rng(seed)
    h = random_hamiltonian(rng, m, [2 * half] * m)
    coeffs = {n: c for n, c in enumerate(h.coeffs) if n % 2 == 0}
    even = new_hamiltonian(m, [2 * half] * m, coeffs)
    p = rng.uniform(-3, 3, size=7)
    np.testing.assert_allclose(bulk_bands(even, p), bulk_bands(even, -p), atol=1e-10)


@given(orders, st.integers(0, 2**31))
def test_evaluate_many_matches_scalar(top_orders, seed):
    rng = np.random.default_rng(seed)
    h = random_hamiltonian(rng, len(top_orders), top_orders)
    ps = rng.standard_normal(4) + 1j * rng.standard_normal(4)
    batch = evaluate_many(h, ps)
    for p, mat in zip(ps, batch):
        np.testing.assert_allclose(mat, evaluate(h, p), atol=1e-12)
