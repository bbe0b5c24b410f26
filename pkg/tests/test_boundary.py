import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from bcspectra.boundary import (
    Admissible,
    Insufficient,
    NotCurrentConserving,
    SymmetricOnly,
    classify_raw,
    classify_relations,
    haar_unitary,
    raw_relation_matrix,
    reparameterize_length,
    row_space_distance,
    standard_bc,
    symmetric_only_bc,
    u1_bc_from_angle,
)
from bcspectra.current import current_diagonalization, diagonalize_current, TraceLayout
from bcspectra.errors import EqualMoverCounts, NonUnitary, UnequalMoverCounts, WrongDimension
from bcspectra.hamiltonian import new_hamiltonian
from bcspectra.verify import random_hamiltonian, symmetric_only_fixture


def _diag3(values):
    layout = TraceLayout(tuple((0, k) for k in range(len(values))), len(values))
    return diagonalize_current(layout, np.diag(values).astype(complex), 1.0)


def _proportional(row, target):
    row, target = np.asarray(row), np.asarray(target, dtype=complex)
    k = np.argmax(np.abs(target))
    return np.allclose(row * target[k] / row[k], target, atol=1e-12)


def test_standard_bc_examples(quadratic):
    d = current_diagonalization(quadratic)
    bc = standard_bc(d, [[np.exp(1j * math.pi / 2)]])
    assert bc.size == 1
    with pytest.raises(UnequalMoverCounts):
        standard_bc(_diag3([1.0, 1.0, -1.0]), [[1.0]])
    with pytest.raises(NonUnitary):
        standard_bc(current_diagonalization(new_hamiltonian(1, [4], {4: 1.0})), [[1, 0], [0, 2]])
    with pytest.raises(WrongDimension):
        standard_bc(d, np.eye(2))


def test_u1_angle_reduced(quadratic, linear):
    d = current_diagonalization(quadratic)
    assert u1_bc_from_angle(d, -math.pi / 2).nu == pytest.approx(3 * math.pi / 2)
    assert u1_bc_from_angle(d, 7 * math.pi).nu == pytest.approx(math.pi)
    with pytest.raises(WrongDimension):
        u1_bc_from_angle(current_diagonalization(new_hamiltonian(1, [4], {4: 1.0})), 0.3)


def test_raw_rows_quadratic(quadratic):
    d = current_diagonalization(quadratic)
    # L = cot(-pi/4) = -1: psi + psi' = 0, and the trace is (psi, -i psi')
    row = raw_relation_matrix(u1_bc_from_angle(d, -math.pi / 2))[0]
    assert _proportional(row, [1, 1j])
    # nu = 0: psi'(0) = 0
    assert _proportional(raw_relation_matrix(u1_bc_from_angle(d, 0.0))[0], [0, 1])
    # hard wall
    assert _proportional(raw_relation_matrix(u1_bc_from_angle(d, math.pi))[0], [1, 0])


def test_raw_rows_linear(linear):
    d = current_diagonalization(linear)
    for nu in (-2.0, 0.4, 3.0):
        row = raw_relation_matrix(u1_bc_from_angle(d, nu))[0]
        assert _proportional(row, [1, -np.exp(-1j * nu)])


def test_classify_examples(linear):
    d = current_diagonalization(linear)
    nu = 0.9
    verdict = classify_relations(d, [[1.0]], [[np.exp(-1j * nu)]])
    assert isinstance(verdict, Admissible)
    assert verdict.u[0, 0] == pytest.approx(np.exp(-1j * nu))
    bad = classify_relations(d, [[1.0]], [[2.0]])
    assert isinstance(bad, NotCurrentConserving)
    w = bad.witness.values
    assert abs(np.vdot(w, d.j_matrix @ w)) > 1e-3
    redundant = classify_relations(d, [[1.0], [0.0]], [[np.exp(-1j * nu)], [0.0]])
    assert isinstance(redundant, Admissible)
    assert isinstance(classify_relations(d, [[0.0]], [[1.0]]), Insufficient)


def test_symmetric_only_fixture():
    h, rows = symmetric_only_fixture()
    d = current_diagonalization(h)
    assert (d.n_plus, d.n_minus) == (2, 1)
    verdict = classify_raw(d, rows)
    assert isinstance(verdict, SymmetricOnly) and verdict.dim == 1


def test_symmetric_only_rows():
    d = _diag3([1.0, 1.0, -1.0])
    rows = symmetric_only_bc(d, [[1.0]])
    np.testing.assert_allclose(rows, [[1, 0, -1], [0, 1, 0]])
    d4 = _diag3([1.0, 1.0, 1.0, -1.0])
    rows4 = symmetric_only_bc(d4, [[np.exp(0.3j)]])
    assert rows4.shape == (3, 4)
    assert isinstance(classify_raw(d4, rows4), SymmetricOnly)
    with pytest.raises(EqualMoverCounts):
        symmetric_only_bc(_diag3([1.0, -1.0]), [[1.0]])


def test_symmetric_only_partner_space_is_larger():
    d = _diag3([1.0, 1.0, 1.0, -1.0])
    rows = symmetric_only_bc(d, [[1.0]])
    kernel = np.linalg.svd(rows)[2][rows.shape[0]:].conj().T
    # every kernel vector carries zero current
    for v in kernel.T:
        assert abs(np.vdot(v, d.j_matrix @ v)) < 1e-12
    # partners psi_b with Psi_a^dag J Psi_b = 0 for all Psi_a in K
    partner_dim = d.nc - np.linalg.matrix_rank(kernel.conj().T @ d.j_matrix)
    assert partner_dim > kernel.shape[1]


def test_reparameterize_examples(quadratic, linear):
    d = current_diagonalization(quadratic)
    bc2 = reparameterize_length(u1_bc_from_angle(d, -math.pi / 2), 2.0)
    nu2 = math.atan2(math.sin(bc2.nu), math.cos(bc2.nu))
    assert nu2 == pytest.approx(2 * math.atan(-2.0), abs=1e-10)
    assert reparameterize_length(u1_bc_from_angle(d, math.pi), 5.0).nu == pytest.approx(math.pi)
    dl = current_diagonalization(linear)
    bc = u1_bc_from_angle(dl, 1.1)
    np.testing.assert_allclose(reparameterize_length(bc, 7.0).u, bc.u, atol=1e-12)
    with pytest.raises(ValueError):
        reparameterize_length(bc, 0.0)


def test_haar_examples():
    assert abs(abs(haar_unitary(1, 3)[0, 0]) - 1) < 1e-14
    u = haar_unitary(2, 42)
    np.testing.assert_allclose(u.conj().T @ u, np.eye(2), atol=1e-12)
    np.testing.assert_array_equal(haar_unitary(3, 7), haar_unitary(3, 7))
    assert np.max(np.abs(haar_unitary(3, 7) - haar_unitary(3, 8))) > 1e-3


def test_haar_phases_are_uniform():
    # first-entry phases of Haar U(2) are uniform; a biased QR would cluster them
    phases = np.array([np.angle(haar_unitary(2, s)[0, 0]) for s in range(2000)])
    hist, _ = np.histogram(phases, bins=8, range=(-math.pi, math.pi))
    assert hist.min() > 180 and hist.max() < 320


square = st.sampled_from([[2], [1, 1], [2, 2], [4], [1, 1, 1, 1], [2, 1, 1], [3, 1]])
seeds = st.integers(0, 2**31)


def _admissible_diag(top_orders, seed, l=1.0):
    for k in range(50):
        rng = np.random.default_rng([seed, k])
        d = current_diagonalization(random_hamiltonian(rng, len(top_orders), top_orders), l)
        if d.n_plus == d.n_minus:
            return rng, d
    pytest.skip("no balanced sample")


@given(square, seeds)
def test_classification_round_trip(top_orders, seed):
    rng, d = _admissible_diag(top_orders, seed)
    u = haar_unitary(d.n_plus, seed)
    verdict = classify_raw(d, raw_relation_matrix(standard_bc(d, u)))
    assert isinstance(verdict, Admissible)
    assert np.max(np.abs(verdict.u.conj().T @ verdict.u - np.eye(d.n_plus))) <= 1e-10
    assert np.max(np.abs(verdict.u - u)) <= 1e-10


@given(square, seeds)
def test_kernel_carries_no_current(top_orders, seed):
    rng, d = _admissible_diag(top_orders, seed)
    rows = raw_relation_matrix(standard_bc(d, haar_unitary(d.n_plus, seed)))
    kernel = np.linalg.svd(rows)[2][rows.shape[0]:]
    coeffs = rng.standard_normal(kernel.shape[0]) + 1j * rng.standard_normal(kernel.shape[0])
    psi = kernel.conj().T @ coeffs
    assert abs(np.vdot(psi, d.j_matrix @ psi)) <= 1e-10 * np.linalg.norm(psi) ** 2 * np.linalg.norm(d.j_matrix, 2)


@given(square, seeds)
def test_distinct_unitaries_give_distinct_conditions(top_orders, seed):
    _, d = _admissible_diag(top_orders, seed)
    u1 = haar_unitary(d.n_plus, seed)
    u2 = haar_unitary(d.n_plus, seed + 1)
    if np.max(np.abs(u1 - u2)) <= 1e-6:
        return
    a = raw_relation_matrix(standard_bc(d, u1))
    b = raw_relation_matrix(standard_bc(d, u2))
    assert row_space_distance(a, b) > 1e-8


@given(st.sampled_from([[2], [2, 2], [4], [3, 1]]), seeds, st.floats(0.1, 10), st.floats(0.1, 10))
def test_reparameterization_keeps_row_space(top_orders, seed, l, l_new):
    _, d = _admissible_diag(top_orders, seed, l)
    bc = standard_bc(d, haar_unitary(d.n_plus, seed))
    out = reparameterize_length(bc, l_new)
    scale = (l_new / l) ** d.layout.powers().astype(float)
    assert row_space_distance(raw_relation_matrix(out), raw_relation_matrix(bc) / scale) <= 1e-10
    back = reparameterize_length(out, l)
    assert np.max(np.abs(back.u - bc.u)) <= 1e-8
