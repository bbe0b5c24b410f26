import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from bcspectra.boundary import u1_bc_from_angle
from bcspectra.current import current_diagonalization
from bcspectra.errors import ResonantWidth, SingularAngle
from bcspectra.hamiltonian import new_hamiltonian
from bcspectra.models import (
    LinearTwoBandModel,
    PotentialWellModel,
    QuadraticModel,
    angle_length_map,
    length_angle_map,
    linear_bound_state,
    low_energy_reduction,
    n4_current_eigenvalues,
    quadratic_bound_energy,
    reduction_gap,
    wall_effective_bc,
    well_effective_bc,
    well_exact_spectrum,
)
from bcspectra.spectra import solve_half_line


def test_quadratic_bound_energy():
    assert quadratic_bound_energy(QuadraticModel(1.0), -1.0) == -1.0
    assert quadratic_bound_energy(QuadraticModel(1.0), 2.0) is None
    assert quadratic_bound_energy(QuadraticModel(3.0), -0.5) == pytest.approx(-12.0)
    assert quadratic_bound_energy(QuadraticModel(1.0), -math.inf) is None
    assert quadratic_bound_energy(QuadraticModel(1.0), 0.0) is None


def test_model_parameters_must_be_positive():
    with pytest.raises(ValueError):
        QuadraticModel(-1.0)
    with pytest.raises(ValueError):
        LinearTwoBandModel(1.0, 0.0)
    with pytest.raises(ValueError):
        PotentialWellModel(1.0, 1.0, math.nan)


def test_angle_length_map():
    assert angle_length_map(1.0, -math.pi / 2) == pytest.approx(-1.0)
    assert angle_length_map(1.0, math.pi) == 0.0
    assert length_angle_map(2.0, -1.0) == pytest.approx(-2.2142974355881813)
    assert length_angle_map(1.0, math.inf) == 0.0
    with pytest.raises(SingularAngle) as err:
        angle_length_map(1.0, 2 * math.pi)
    assert err.value.sentinel == math.inf


@given(st.floats(0.01, 100), st.floats(-math.pi + 1e-6, math.pi).filter(lambda v: abs(v) > 1e-6))
def test_angle_length_round_trip(l, nu):
    L = angle_length_map(l, nu)
    assert length_angle_map(l, L) == pytest.approx(nu, abs=1e-9)
    assert (L < 0) == (nu < 0)


def test_linear_bound_state():
    model = LinearTwoBandModel(1.0, 1.0)
    e, p = linear_bound_state(model, -math.pi / 2)
    assert e == pytest.approx(0.0, abs=1e-15) and p == pytest.approx(1j)
    e, p = linear_bound_state(model, -math.pi / 6)
    assert e == pytest.approx(0.8660254037844387) and p == pytest.approx(0.5j)
    assert linear_bound_state(model, math.pi / 3) is None
    # other branches reduce to (-pi, pi]
    assert linear_bound_state(model, -math.pi / 6 + 2 * math.pi)[0] == pytest.approx(e)


def test_wall_effective_bc():
    assert wall_effective_bc(1.0, 100.0) == pytest.approx(0.1)
    assert wall_effective_bc(1.0, 1e8) == pytest.approx(1e-4)
    assert wall_effective_bc(4.0, 1.0) == pytest.approx(2.0)


def test_well_effective_bc():
    with pytest.raises(ResonantWidth) as err:
        well_effective_bc(PotentialWellModel(1.0, 1.0, math.pi / 2))
    assert err.value.sentinel == math.inf
    assert well_effective_bc(PotentialWellModel(1.0, 1.0, math.pi / 2 + 0.1)) == pytest.approx(
        math.tan(math.pi / 2 + 0.1))
    assert well_effective_bc(PotentialWellModel(1.0, 4.0, 0.1)) == pytest.approx(0.10135501775433)


def test_well_exact_spectrum_counts():
    assert well_exact_spectrum(PotentialWellModel(1.0, 1.0, 1.0)) == []
    assert len(well_exact_spectrum(PotentialWellModel(1.0, 1.0, 2.0))) == 1
    deep = well_exact_spectrum(PotentialWellModel(1.0, 100.0, 1.0))
    assert len(deep) == 3 and deep == sorted(deep)
    assert len(well_exact_spectrum(PotentialWellModel(1.0, 100.0, 1.0), max_states=2)) == 2


@given(st.floats(0.5, 3), st.floats(1, 50), st.floats(0.3, 3))
def test_well_roots_solve_matching_condition(h2, v0, x0):
    model = PotentialWellModel(h2, v0, x0)
    for e in well_exact_spectrum(model):
        assert -v0 < e < 0
        k = math.sqrt((v0 + e) / h2)
        kappa = math.sqrt(-e / h2)
        assert abs(kappa * math.sin(k * x0) + k * math.cos(k * x0)) <= 1e-8 * (k + kappa)


def test_well_realization_improves_towards_threshold():
    errors = []
    for delta in (0.1, 0.05, 0.03, 0.02, 0.01):
        model = PotentialWellModel(1.0, 1.0, math.pi / 2 + delta)
        exact = well_exact_spectrum(model)[-1]
        approx = quadratic_bound_energy(QuadraticModel(1.0), well_effective_bc(model))
        errors.append(abs(exact - approx) / abs(exact))
        assert errors[-1] <= 5 * delta
    assert errors == sorted(errors, reverse=True)


def test_low_energy_reduction():
    assert low_energy_reduction(LinearTwoBandModel(1.0, 1.0)) == (0.5, 0.5)
    assert low_energy_reduction(LinearTwoBandModel(2.0, 1.0)) == (2.0, 1.0)
    assert low_energy_reduction(LinearTwoBandModel(1.0, 0.5)) == (1.0, 1.0)


def test_reduction_gap_scales_as_fourth_power():
    model = LinearTwoBandModel(1.0, 1.0)
    nus = np.linspace(-0.2, -0.02, 10)
    ratios = np.array([reduction_gap(model, nu) / (model.dx * nu**4) for nu in nus])
    assert np.all(ratios < 1)
    # the fitted constant is close to 1/8
    assert np.polyfit(nus**4, [reduction_gap(model, nu) for nu in nus], 1)[0] == pytest.approx(0.125, rel=1e-2)
    assert reduction_gap(model, 0.3) is None


def test_n4_current_eigenvalues_examples():
    phi = (1 + math.sqrt(5)) / 2
    np.testing.assert_allclose(n4_current_eigenvalues(1, 1, 1), [phi, phi - 1, 1 - phi, -phi])
    np.testing.assert_allclose(n4_current_eigenvalues(0, 1, 1), [1, 1, -1, -1])
    assert list(np.sign(n4_current_eigenvalues(1, 1, 10))) == [1, 1, -1, -1]


@given(st.floats(-5, 5), st.floats(0.1, 5), st.booleans(), st.floats(0.05, 20))
def test_n4_matches_numeric_current(h2, h4, negative, l):
    h4 = -h4 if negative else h4
    d = current_diagonalization(new_hamiltonian(1, [4], {2: h2, 4: h4}), l)
    ref = n4_current_eigenvalues(h2, h4, l)
    assert np.max(np.abs(d.eigvals - ref)) <= 1e-10 * np.max(np.abs(ref))


def test_solver_matches_closed_forms_on_64_angles():
    lin = LinearTwoBandModel(1.0, 1.0)
    quad = QuadraticModel(1.0)
    dl = current_diagonalization(lin.hamiltonian())
    dq = current_diagonalization(quad.hamiltonian())
    for nu in np.linspace(-math.pi, 0, 66)[1:-1]:
        (s,) = solve_half_line(u1_bc_from_angle(dl, nu), (-1 + 1e-9, 1 - 1e-9), 128)
        assert abs(s.energy - lin.dx * math.cos(nu)) <= 1e-8
        expect = quadratic_bound_energy(quad, angle_length_map(1.0, nu))
        window = (4 * expect, expect / 4)
        (s,) = solve_half_line(u1_bc_from_angle(dq, nu), window, 64)
        assert abs(s.energy - expect) <= 1e-8 * abs(expect)
