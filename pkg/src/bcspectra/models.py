"""Worked models with closed-form spectra, used as oracles for the numerical engine."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .errors import ResonantWidth, SingularAngle
from .hamiltonian import PolyMatrixHamiltonian, new_hamiltonian

RESONANCE_TOL = 1e-12


def _positive(**kwargs) -> None:
    for name, value in kwargs.items():
        if not (isinstance(value, (int, float)) and math.isfinite(value) and value > 0):
            raise ValueError(f"{name} must be a positive real number, got {value!r}")


@dataclass(frozen=True)
class QuadraticModel:
    """H(p) = h2 p^2 with the single BC psi(0) = L psi'(0)."""

    h2: float
    l: float = 1.0

    def __post_init__(self):
        _positive(h2=self.h2, l=self.l)

    def hamiltonian(self) -> PolyMatrixHamiltonian:
        return new_hamiltonian(1, [2], {2: self.h2})


@dataclass(frozen=True)
class LinearTwoBandModel:
    """H(p) = vz p tau_z + dx tau_x."""

    vz: float
    dx: float

    def __post_init__(self):
        _positive(vz=self.vz, dx=self.dx)

    def hamiltonian(self) -> PolyMatrixHamiltonian:
        return new_hamiltonian(
            2, [1, 1], {0: [[0, self.dx], [self.dx, 0]], 1: [[self.vz, 0], [0, -self.vz]]}
        )


@dataclass(frozen=True)
class PotentialWellModel:
    """Quadratic band with a square well of depth V0 on 0 < x < x0 next to a hard wall."""

    h2: float
    V0: float
    x0: float

    def __post_init__(self):
        _positive(h2=self.h2, V0=self.V0, x0=self.x0)

    @property
    def k0(self) -> float:
        return math.sqrt(self.V0 / self.h2)

    @property
    def alpha0(self) -> float:
        return self.k0 * self.x0


def _reduce_angle(nu: float) -> float:
    """Representative of nu in (-pi, pi]."""
    nu = math.fmod(float(nu), 2 * math.pi)
    if nu <= -math.pi:
        nu += 2 * math.pi
    elif nu > math.pi:
        nu -= 2 * math.pi
    return nu


def quadratic_bound_energy(model: QuadraticModel, L: float) -> float | None:
    """Bound-state energy -h2/L^2 for L < 0; None when L >= 0 or L = +-inf."""
    if math.isinf(L) or L >= 0:
        return None
    return -model.h2 / L**2


def angle_length_map(l: float, nu: float) -> float:
    """L = l cot(nu/2). Raises SingularAngle at nu = 0 mod 2 pi (L = +-inf)."""
    _positive(l=l)
    nu = _reduce_angle(nu)
    if nu == 0.0:
        raise SingularAngle("nu = 0 corresponds to L = +-inf (Neumann condition)")
    if nu == math.pi:
        return 0.0
    return l / math.tan(nu / 2)


def length_angle_map(l: float, L: float) -> float:
    """Inverse of :func:`angle_length_map` on (-pi, pi]; L = +-inf maps to 0."""
    _positive(l=l)
    if math.isinf(L):
        return 0.0
    if L == 0:
        return math.pi
    return 2 * math.atan(l / L)


def linear_bound_state(model: LinearTwoBandModel, nu: float) -> tuple[float, complex] | None:
    """(energy, decaying momentum) of the edge state, present only for -pi < nu < 0."""
    nu = _reduce_angle(nu)
    if not -math.pi < nu < 0:
        return None
    return model.dx * math.cos(nu), complex(0.0, -model.dx / model.vz * math.sin(nu))


def linear_bound_wavefunction(model: LinearTwoBandModel, nu: float, x) -> np.ndarray | None:
    """Unit-norm edge state psi(x), shape (2, len(x)), largest psi(0) entry real positive."""
    state = linear_bound_state(model, nu)
    if state is None:
        return None
    energy, p = state
    chi = np.array([model.dx, energy - model.vz * p], dtype=complex)
    chi /= np.linalg.norm(chi)
    k = int(np.argmax(np.abs(chi) >= np.abs(chi).max() * (1 - 1e-9)))
    chi *= abs(chi[k]) / chi[k]
    kappa = p.imag
    x = np.asarray(x, dtype=float)
    return math.sqrt(2 * kappa) * chi[:, None] * np.exp(-kappa * x)[None, :]


def wall_effective_bc(h2: float, v_wall: float) -> float:
    """Effective L = sqrt(h2 / V) of a step potential; L -> 0 (hard wall) as V -> inf."""
    _positive(h2=h2, v_wall=v_wall)
    return 1.0 / math.sqrt(v_wall / h2)


def well_effective_bc(model: PotentialWellModel) -> float:
    """Effective L0 = tan(k0 x0) / k0 seen by low-energy states outside the well."""
    a = model.alpha0
    c = math.cos(a)
    if abs(c) < RESONANCE_TOL:
        raise ResonantWidth(f"cos(k0 x0) = {c:.1e}: a state sits at zero energy, L0 = +-inf")
    return math.sin(a) / (model.k0 * c)


def well_exact_spectrum(model: PotentialWellModel, max_states: int | None = None) -> list[float]:
    """Bound energies in (-V0, 0) of the hard-wall + square-well problem, ascending.

    The matching condition is written without poles,
    F(e) = kappa sin(k x0) + k cos(k x0) = 0, and each branch
    k x0 in ((n - 1/2) pi, n pi) holds at most one root.
    """
    h2, v0, x0 = model.h2, model.V0, model.x0

    def energy_of(alpha):
        return h2 * (alpha / x0) ** 2 - v0

    def f(e):
        k = math.sqrt((v0 + e) / h2)
        kappa = math.sqrt(max(-e, 0.0) / h2)
        return kappa * math.sin(k * x0) + k * math.cos(k * x0)

    energies = []
    n = 1
    while (n - 0.5) * math.pi < model.alpha0:
        lo = energy_of((n - 0.5) * math.pi)
        hi = min(energy_of(n * math.pi), 0.0)
        if hi > lo and f(lo) * f(hi) < 0:
            energies.append(brentq(f, lo, hi, xtol=1e-12, rtol=4 * np.finfo(float).eps))
        elif hi > lo and f(hi) == 0 and hi < 0:
            energies.append(hi)
        n += 1
    energies.sort()
    return energies[:max_states] if max_states is not None else energies


def low_energy_reduction(model: LinearTwoBandModel) -> tuple[float, float]:
    """(h2, l2) of the quadratic model that the linear one reduces to near its band bottom."""
    return model.vz**2 / (2 * model.dx), model.vz / (2 * model.dx)


def reduction_gap(model: LinearTwoBandModel, nu: float) -> float | None:
    """|E1(nu) - dx - E2(L2(nu))|, or None where either model lacks a bound state."""
    lin = linear_bound_state(model, nu)
    if lin is None:
        return None
    h2, l2 = low_energy_reduction(model)
    quad = quadratic_bound_energy(QuadraticModel(h2, l2), angle_length_map(l2, nu))
    if quad is None:
        return None
    return abs(lin[0] - model.dx - quad)


def n4_current_eigenvalues(h2: float, h4: float, l: float) -> np.ndarray:
    """Current eigenvalues of h2 p^2 + h4 p^4 in descending order."""
    _positive(l=l)
    j2, j4 = h2 / l, h4 / l**3
    root = math.sqrt(4 * j4**2 + j2**2)
    return np.array(sorted(
        [0.5 * (root + j2), 0.5 * (root - j2), 0.5 * (-root + j2), 0.5 * (-root - j2)],
        reverse=True,
    ))
