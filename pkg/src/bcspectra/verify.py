"""Self-check suites behind ``bcspectra verify``.

Each suite returns a :class:`SuiteResult`; :func:`run_all` collects them into
a JSON-ready summary. ``inject`` adds a deliberately broken or special fixture
to exercise the failure path.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Callable

import numpy as np

from .boundary import (
    Admissible,
    NotCurrentConserving,
    SymmetricOnly,
    classify_raw,
    classify_relations,
    haar_unitary,
    raw_relation_matrix,
    reparameterize_length,
    standard_bc,
    symmetric_only_bc,
    u1_bc_from_angle,
)
from .current import current_diagonalization
from .hamiltonian import new_hamiltonian
from .models import (
    LinearTwoBandModel,
    QuadraticModel,
    angle_length_map,
    n4_current_eigenvalues,
    quadratic_bound_energy,
)
from .spectra import solve_half_line, solve_segment

INJECTIONS = ("nonhermitian", "symmetric-only")


@dataclass
class SuiteResult:
    name: str
    passed: bool
    checks: int
    detail: str


def random_hermitian(rng: np.random.Generator, m: int) -> np.ndarray:
    a = rng.standard_normal((m, m)) + 1j * rng.standard_normal((m, m))
    return (a + a.conj().T) / 2


def random_hamiltonian(rng: np.random.Generator, m: int, top_orders):
    """Random hermitian model respecting the block structure of ``top_orders``.

    Top-order blocks get eigenvalues of magnitude in [0.5, 2] so that they are
    safely nondegenerate.
    """
    top_orders = [int(k) for k in top_orders]
    orders = np.array(top_orders)
    coeffs = {}
    for n in range(max(top_orders) + 1):
        h = random_hermitian(rng, m)
        dead = orders < n
        h[dead, :] = 0
        h[:, dead] = 0
        cls = np.flatnonzero(orders == n)
        if cls.size:
            q, _ = np.linalg.qr(rng.standard_normal((cls.size, cls.size))
                                + 1j * rng.standard_normal((cls.size, cls.size)))
            lam = rng.uniform(0.5, 2.0, cls.size) * rng.choice([-1.0, 1.0], cls.size)
            h[np.ix_(cls, cls)] = (q * lam) @ q.conj().T
        coeffs[n] = h
    return new_hamiltonian(m, top_orders, coeffs)


def symmetric_only_fixture():
    """Three first-order modes, two right- and one left-moving; canonical relations."""
    h = new_hamiltonian(
        3, [1, 1, 1],
        {0: [[0, 0.3, 0.2], [0.3, 0.5, 0.1], [0.2, 0.1, 0]], 1: np.diag([1.0, 1.0, -1.0])},
    )
    diag = current_diagonalization(h)
    return h, symmetric_only_bc(diag, [[1.0]])


def _suite_hermiticity(rng, inject):
    fixtures = [random_hermitian(rng, m) for m in (1, 2, 3, 4) for _ in range(5)]
    if "nonhermitian" in inject:
        bad = random_hermitian(rng, 2)
        bad[0, 1] += 0.5
        fixtures.append(bad)
    worst = max(float(np.max(np.abs(h - h.conj().T))) for h in fixtures)
    return worst <= 1e-12, len(fixtures), f"max |h - h^dagger| = {worst:.2e}"


def _suite_current_identity(rng, inject):
    worst = 0.0
    count = 0
    for orders in ([2], [1, 1], [2, 1], [2, 2, 1], [4]):
        h = random_hamiltonian(rng, len(orders), orders)
        d = current_diagonalization(h, 1.0 + rng.random())
        for _ in range(5):
            psi = rng.standard_normal(d.nc) + 1j * rng.standard_normal(d.nc)
            plus, minus = d.movers(psi)
            lhs = np.vdot(psi, d.j_matrix @ psi).real
            rhs = np.vdot(plus, plus).real - np.vdot(minus, minus).real
            worst = max(worst, abs(lhs - rhs) / max(1.0, abs(lhs)))
            count += 1
    return worst <= 1e-10, count, f"max relative defect {worst:.2e}"


def _suite_degeneracy(rng, inject):
    worst = math.inf
    for _ in range(50):
        m = int(rng.integers(1, 4))
        orders = list(rng.integers(1, 4, size=m))
        d = current_diagonalization(random_hamiltonian(rng, m, orders))
        worst = min(worst, float(np.min(np.abs(d.eigvals)) / np.max(np.abs(d.eigvals))))
    return worst > 1e-10, 50, f"smallest |eig| ratio {worst:.2e}"


def _suite_n4(rng, inject):
    worst = 0.0
    for _ in range(50):
        h2, h4, l = rng.uniform(-3, 3), rng.uniform(0.1, 3) * rng.choice([-1, 1]), rng.uniform(0.05, 20)
        d = current_diagonalization(new_hamiltonian(1, [4], {2: h2, 4: h4}), l)
        ref = n4_current_eigenvalues(h2, h4, l)
        worst = max(worst, float(np.max(np.abs(d.eigvals - ref)) / np.max(np.abs(ref))))
    return worst <= 1e-10, 50, f"max relative deviation {worst:.2e}"


def _suite_classification(rng, inject):
    count = 0
    ok = True
    for orders in ([2], [1, 1], [2, 2], [4]):
        d = current_diagonalization(random_hamiltonian(rng, len(orders), orders))
        while d.n_plus != d.n_minus:
            d = current_diagonalization(random_hamiltonian(rng, len(orders), orders))
        for seed in range(5):
            u = haar_unitary(d.n_plus, int(rng.integers(1 << 30)))
            verdict = classify_raw(d, raw_relation_matrix(standard_bc(d, u)))
            ok &= isinstance(verdict, Admissible) and np.max(np.abs(verdict.u - u)) <= 1e-10
            count += 1
    d = current_diagonalization(new_hamiltonian(1, [2], {2: 1.0}))
    for v in (0.5, 2.0):
        ok &= isinstance(classify_relations(d, [[1.0]], [[v]]), NotCurrentConserving)
        count += 1
    h, rows = symmetric_only_fixture()
    ok &= isinstance(classify_raw(current_diagonalization(h), rows), SymmetricOnly)
    return bool(ok), count + 1, "admissible round trips, |V| != 1 and symmetric-only verdicts"


def _suite_spectra(rng, inject):
    lin = LinearTwoBandModel(1.0, 1.0)
    dl = current_diagonalization(lin.hamiltonian())
    worst = 0.0
    count = 0
    residuals = 0.0
    for nu in np.linspace(-3.0, 3.0, 9):
        states = solve_half_line(u1_bc_from_angle(dl, nu), (-1 + 1e-6, 1 - 1e-6), 128)
        expect = [math.cos(nu)] if -math.pi < nu < 0 else []
        if len(states) != len(expect):
            return False, count, f"linear model: {len(states)} states at nu = {nu}"
        for s, e in zip(states, expect):
            worst = max(worst, abs(s.energy - e))
            residuals = max(residuals, s.bc_residual, abs(s.current))
        count += 1
    quad = QuadraticModel(1.0)
    dq = current_diagonalization(quad.hamiltonian())
    for nu in (-2.5, -1.0, -0.3):
        states = solve_half_line(u1_bc_from_angle(dq, nu), (-1e3, -1e-4), 128, spacing="log")
        e = quadratic_bound_energy(quad, angle_length_map(1.0, nu))
        if len(states) != 1:
            return False, count, f"quadratic model: {len(states)} states at nu = {nu}"
        worst = max(worst, abs(states[0].energy - e) / abs(e))
        residuals = max(residuals, states[0].bc_residual, abs(states[0].current))
        count += 1
    return worst <= 1e-8 and residuals <= 1e-8, count, f"max error {worst:.2e}, max residual {residuals:.2e}"


def _suite_ell_invariance(rng, inject):
    quad = QuadraticModel(1.0)
    d1 = current_diagonalization(quad.hamiltonian(), 1.0)
    worst = 0.0
    for nu in (-2.0, -1.0, -0.5):
        bc = u1_bc_from_angle(d1, nu)
        e1 = solve_half_line(bc, (-100, -1e-3), 128, spacing="log")[0].energy
        e3 = solve_half_line(reparameterize_length(bc, 3.0), (-100, -1e-3), 128, spacing="log")[0].energy
        worst = max(worst, abs(e1 - e3))
    return worst <= 1e-9, 3, f"max |E(l=1) - E(l=3)| = {worst:.2e}"


def _suite_segments(rng, inject):
    h2 = QuadraticModel(1.0).hamiltonian()
    wall = u1_bc_from_angle(current_diagonalization(h2), math.pi)
    box = [s.energy for s in solve_segment(h2, wall, wall, math.pi, (0.5, 10), 128)]
    ok = len(box) == 3 and max(abs(a - b) for a, b in zip(box, (1, 4, 9))) <= 1e-7
    detail = f"box levels {[round(e, 9) for e in box]}"
    h, rows = symmetric_only_fixture()
    lengths = (2.0, 5.0, 10.0) if "symmetric-only" in inject else (5.0,)
    found = sum(len(solve_segment(h, rows, rows, x, (-10, 10), 256)) for x in lengths)
    ok &= found == 0
    detail += f"; symmetric-only segments have {found} levels"
    return bool(ok), 1 + len(lengths), detail


SUITES: dict[str, Callable] = {
    "hermiticity": _suite_hermiticity,
    "current-identity": _suite_current_identity,
    "degeneracy": _suite_degeneracy,
    "n4-closed-form": _suite_n4,
    "classification": _suite_classification,
    "half-line-spectra": _suite_spectra,
    "length-invariance": _suite_ell_invariance,
    "segments": _suite_segments,
}


def run_all(seed: int = 0, inject=()) -> dict:
    unknown = set(inject) - set(INJECTIONS)
    if unknown:
        raise ValueError(f"unknown injection(s) {sorted(unknown)}; choose from {INJECTIONS}")
    results = []
    for name, fn in SUITES.items():
        rng = np.random.default_rng([seed, len(results)])
        try:
            passed, checks, detail = fn(rng, set(inject))
        except Exception as exc:  # a crashing suite is a failing suite
            passed, checks, detail = False, 0, f"{type(exc).__name__}: {exc}"
        results.append(SuiteResult(name, bool(passed), checks, detail))
    return {
        "passed": all(r.passed for r in results),
        "seed": seed,
        "inject": sorted(inject),
        "suites": [asdict(r) for r in results],
    }
