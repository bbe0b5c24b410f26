"""Bound states of a continuum model with general boundary conditions.

At a fixed energy the Schrodinger equation H(p) chi = eps chi has Nc plane-wave
solutions chi e^{ipx}. On the half-line x >= 0 the Nc/2 decaying ones are
combined and the boundary condition turns into a square linear system
X(eps) c = 0; its singular energies are the bound states. On a segment all Nc
solutions enter and both ends contribute relations.

Momentum roots come from a first-order pencil written on the boundary trace
slots (n, m), n < N_m: p * y_(n,m) = y_(n+1,m) plus the M rows of
(H(p) - eps) chi = 0. Its p-side matrix is block triangular with the top-order
blocks on the diagonal, so it is invertible for every validated Hamiltonian and
the pencil has exactly Nc finite eigenvalues even when the N_m differ.
"""

from __future__ import annotations

import logging
import math
import weakref
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.optimize import minimize_scalar

from .boundary import BoundaryCondition, _orthonormal_rows
from .current import (
    CurrentDiagonalization,
    TraceLayout,
    build_current_matrix,
    diagonalize_current,
    plane_wave_traces,
)
from .errors import (
    DegenerateRootCluster,
    EnergyInBand,
    LayoutMismatch,
    NegativeCoordinate,
    RootCountMismatch,
    UnbalancedRoots,
)
from .hamiltonian import PolyMatrixHamiltonian, evaluate_many

log = logging.getLogger(__name__)

BAND_TOL = 1e-8
DEGENERATE_RTOL = 1e-8
ACCEPT_TOL = 1e-8
RESIDUAL_TOL = 1e-8


# --- momentum roots ---------------------------------------------------------

class _Pencil:
    def __init__(self, h: PolyMatrixHamiltonian):
        layout = TraceLayout.for_hamiltonian(h)
        idx = layout.index
        size = len(layout)
        a0 = np.zeros((size, size), dtype=complex)
        e = np.zeros((size, size), dtype=complex)
        b = np.zeros((size, size), dtype=complex)
        row = 0
        for n, m in layout.slots:
            if n + 1 < h.top_orders[m]:
                b[row, idx[(n, m)]] = 1.0
                a0[row, idx[(n + 1, m)]] = 1.0
                row += 1
        for m in range(h.m):
            for mp in range(h.m):
                for n in range(min(h.top_orders[m], h.top_orders[mp]) + 1):
                    c = h.coeffs[n][m, mp]
                    if c == 0:
                        continue
                    if n == h.top_orders[mp]:
                        b[row, idx[(n - 1, mp)]] += c
                    else:
                        a0[row, idx[(n, mp)]] -= c
            e[row, idx[(0, m)]] = 1.0
            row += 1
        self.h = h
        self.layout = layout
        self.p0 = np.linalg.solve(b, a0)
        self.pe = np.linalg.solve(b, e)


_PENCILS: "weakref.WeakKeyDictionary[PolyMatrixHamiltonian, _Pencil]" = weakref.WeakKeyDictionary()


def _pencil(h: PolyMatrixHamiltonian) -> _Pencil:
    pen = _PENCILS.get(h)
    if pen is None:
        pen = _PENCILS[h] = _Pencil(h)
    return pen


def _null_vectors(h: PolyMatrixHamiltonian, p: np.ndarray, energies: np.ndarray):
    """Smallest singular triplet of H(p) - eps for stacked (G, K) momenta."""
    mats = evaluate_many(h, p) - energies[:, None, None, None] * np.eye(h.m)
    u, s, vh = np.linalg.svd(mats)
    return u[..., :, -1], s[..., -1], vh[..., -1, :].conj()


def _roots_batch(h: PolyMatrixHamiltonian, energies: np.ndarray):
    """All Nc roots for each energy: p (G, Nc), chi (G, Nc, M), residual (G, Nc)."""
    pen = _pencil(h)
    energies = np.asarray(energies, dtype=complex)
    mats = pen.p0[None] + energies[:, None, None] * pen.pe[None]
    p = np.linalg.eigvals(mats)
    if not np.all(np.isfinite(p)):
        raise RootCountMismatch("linearized pencil produced non-finite momenta")

    # Newton polish on the smallest singular value of H(p) - eps.
    deriv = [n * c for n, c in enumerate(h.coeffs)][1:]
    u, s, chi = _null_vectors(h, p, energies)
    for _ in range(2):
        dh = np.zeros(p.shape + (h.m, h.m), dtype=complex)
        for c in reversed(deriv):
            dh = dh * p[..., None, None] + c
        slope = np.einsum("...i,...ij,...j->...", u.conj(), dh, chi)
        value = np.einsum("...i,...ij,...j->...", u.conj(),
                          evaluate_many(h, p) - energies[:, None, None, None] * np.eye(h.m), chi)
        ok = np.abs(slope) > 1e-300
        step = np.where(ok, value / np.where(ok, slope, 1.0), 0.0)
        p_new = p - step
        u2, s2, chi2 = _null_vectors(h, p_new, energies)
        better = s2 < s
        p = np.where(better, p_new, p)
        u = np.where(better[..., None], u2, u)
        chi = np.where(better[..., None], chi2, chi)
        s = np.where(better, s2, s)

    # sort: decaying (Im p > 0) first, by descending Im p then Re p
    order = np.lexsort((p.real, -p.imag), axis=-1)
    p = np.take_along_axis(p, order, axis=-1)
    chi = np.take_along_axis(chi, order[..., None], axis=-2)
    s = np.take_along_axis(s, order, axis=-1)

    # phase: largest component real positive
    mag = np.abs(chi)
    k = np.argmax(mag >= mag.max(axis=-1, keepdims=True) * (1 - 1e-9), axis=-1)
    lead = np.take_along_axis(chi, k[..., None], axis=-1)
    chi = chi * (np.abs(lead) / lead)
    return p, chi, s


def _degenerate_pairs(p: np.ndarray) -> np.ndarray:
    """Boolean (G,) flag: some pair of roots coincides to DEGENERATE_RTOL."""
    diff = np.abs(p[..., :, None] - p[..., None, :])
    scale = np.maximum(np.abs(p[..., :, None]), np.abs(p[..., None, :]))
    close = diff <= DEGENERATE_RTOL * scale
    size = p.shape[-1]
    close[..., np.arange(size), np.arange(size)] = False
    return close.any(axis=(-1, -2))


@dataclass(frozen=True)
class ParticularSolution:
    """Plane-wave solution chi e^{ipx} of (H(p) - eps) chi = 0, |chi| = 1."""

    p: complex
    chi: np.ndarray
    residual: float


def momentum_roots(h: PolyMatrixHamiltonian, energy: complex) -> list[ParticularSolution]:
    """All Nc roots of det[H(p) - eps] = 0 with their eigenvectors."""
    p, chi, s = _roots_batch(h, np.array([energy]))
    if p.shape[-1] != h.nc:
        raise RootCountMismatch(f"found {p.shape[-1]} roots, expected {h.nc}")
    if _degenerate_pairs(p)[0]:
        scale = max(1.0, abs(energy))
        raise DegenerateRootCluster(energy, p[0].tolist(), scale)
    return [ParticularSolution(complex(p[0, a]), chi[0, a], float(s[0, a])) for a in range(h.nc)]


def decaying_basis(h: PolyMatrixHamiltonian, energy: float) -> list[ParticularSolution]:
    """The Nc/2 roots with Im p > 0 at a gap energy."""
    roots = momentum_roots(h, energy)
    for r in roots:
        if abs(r.p.imag) < BAND_TOL:
            raise EnergyInBand(energy, r.p)
    up = [r for r in roots if r.p.imag > 0]
    if 2 * len(up) != h.nc:
        raise UnbalancedRoots(f"{len(up)} of {h.nc} roots decay into x > 0")
    return up


# --- half-line ----------------------------------------------------------------

class BoundaryMatrix(tuple):
    """(x, column_scale): X(eps) built from mover-normalized solutions.

    Column alpha of ``x`` is [I, -U] Psi~^alpha / |Psi~^alpha| and
    ``column_scale[alpha]`` = |Psi~^alpha|, so x * column_scale is the raw
    T+ Psi^alpha - U T- Psi^alpha.
    """

    def __new__(cls, x, column_scale):
        return super().__new__(cls, (x, column_scale))

    @property
    def x(self) -> np.ndarray:
        return self[0]

    @property
    def column_scale(self) -> np.ndarray:
        return self[1]


def _mover_columns(diag: CurrentDiagonalization, p: np.ndarray, chi: np.ndarray):
    traces = plane_wave_traces(diag.layout, diag.l, p, chi)  # (..., K, Nc)
    movers = np.einsum("ij,...kj->...ik", diag.mover_matrix(), traces)  # (..., Nc, K)
    return traces, movers


def boundary_matrix(bc: BoundaryCondition, basis: Sequence[ParticularSolution]) -> BoundaryMatrix:
    if any(len(s.chi) != bc.diag.layout.m for s in basis):
        raise LayoutMismatch("basis belongs to a Hamiltonian with a different component count")
    if len(basis) != bc.size:
        raise LayoutMismatch(f"need {bc.size} decaying solutions, got {len(basis)}")
    p = np.array([s.p for s in basis])
    chi = np.array([s.chi for s in basis])
    _, movers = _mover_columns(bc.diag, p, chi)
    scale = np.linalg.norm(movers, axis=0)
    w = np.hstack([np.eye(bc.size), -bc.u])
    return BoundaryMatrix(w @ (movers / scale), scale)


@dataclass(frozen=True, eq=False)
class BoundStateResult:
    """A normalized half-line bound state.

    psi(x) = norm_constant * sum_a coeffs[a] chi_a exp(i p_a x), |coeffs| = 1.
    ``trace`` is the trace vector of the normalized state at scale ``l``.
    """

    energy: float
    solutions: tuple[ParticularSolution, ...]
    coeffs: np.ndarray
    norm_constant: float
    det_residual: float
    sigma_min: float
    bc_residual: float
    current: float
    schrodinger_residual: float
    l: float
    trace: np.ndarray

    @property
    def momenta(self) -> np.ndarray:
        return np.array([s.p for s in self.solutions])


def _gram_half_line(p: np.ndarray, chi: np.ndarray) -> np.ndarray:
    """G[a, b] = int_0^inf (chi_a e^{i p_a x})^dagger chi_b e^{i p_b x} dx."""
    q = p[None, :] - p.conj()[:, None]
    return (chi.conj() @ chi.T) * (1j / q)


def _check_layout(h: PolyMatrixHamiltonian, diag: CurrentDiagonalization) -> None:
    if diag.layout != TraceLayout.for_hamiltonian(h):
        raise LayoutMismatch("boundary condition was built for a different Hamiltonian")


def _sigma_profile(h: PolyMatrixHamiltonian, bc: BoundaryCondition, energies: np.ndarray) -> np.ndarray:
    """Smallest singular value of X(eps) on a batch of gap energies."""
    p, chi, _ = _roots_batch(h, energies)
    lam = bc.size
    band = np.abs(p.imag) < BAND_TOL
    if band.any():
        g = int(np.flatnonzero(band.any(axis=1))[0])
        a = int(np.flatnonzero(band[g])[0])
        raise EnergyInBand(float(energies[g].real), complex(p[g, a]))
    if not (np.all(p[:, lam - 1].imag > 0) and np.all(p[:, lam].imag < 0)):
        raise UnbalancedRoots("decaying root count differs from Nc/2 inside the window")
    _, movers = _mover_columns(bc.diag, p[:, :lam], chi[:, :lam])
    movers = movers / np.linalg.norm(movers, axis=-2, keepdims=True)
    w = np.hstack([np.eye(lam), -bc.u])
    x = np.einsum("ij,gjk->gik", w, movers)
    return np.linalg.svd(x, compute_uv=False)[:, -1]


def energy_grid(window, grid_points: int, spacing: str = "linear") -> np.ndarray:
    lo, hi = (float(x) for x in window)
    if not lo < hi:
        raise ValueError("window must satisfy lo < hi")
    if spacing == "linear":
        return np.linspace(lo, hi, grid_points)
    if spacing == "log":
        if lo < 0 < hi or lo == 0 or hi == 0:
            raise ValueError("log spacing needs a window that does not contain 0")
        if hi < 0:
            return -np.geomspace(-lo, -hi, grid_points)
        return np.geomspace(lo, hi, grid_points)
    raise ValueError(f"unknown spacing {spacing!r}")


def _local_minima(values: np.ndarray) -> list[int]:
    n = len(values)
    out = []
    for i in range(n):
        left = values[i - 1] if i > 0 else np.inf
        right = values[i + 1] if i < n - 1 else np.inf
        if values[i] <= left and values[i] <= right and (i == 0 or values[i] < left or i == n - 1 or values[i] < right):
            out.append(i)
    return out


def _polish_v(f, e: float, delta: float, lo: float, hi: float) -> float:
    """Refine the zero of a V-shaped |linear| function near e."""
    fe = f(e)
    for _ in range(40):
        a, b = max(lo, e - delta), min(hi, e + delta)
        if not a < e < b:
            break
        fa, fb = f(a), f(b)
        slope = max((fa - fe) / (e - a), (fb - fe) / (b - e))
        if slope <= 0:
            break
        e_new = e - fe / slope if fa < fb else e + fe / slope
        e_new = min(max(e_new, a), b)
        f_new = f(e_new)
        if f_new > fe:
            break
        step = abs(e_new - e)
        e, fe = e_new, f_new
        if step <= 4 * np.finfo(float).eps * max(abs(e), 1e-300) or fe == 0.0:
            break
        delta = max(8 * step, 16 * np.finfo(float).eps * max(abs(e), 1e-300))
    return e


def _refine(f, grid: np.ndarray, i: int) -> float:
    lo = grid[max(i - 1, 0)]
    hi = grid[min(i + 1, len(grid) - 1)]
    width = hi - lo
    res = minimize_scalar(f, bounds=(lo, hi), method="bounded", options={"xatol": 1e-6 * width})
    e = float(res.x)
    return _polish_v(f, e, max(1e-5 * width, 1e-12 * abs(e)), lo, hi)


def _phase_reference(values: np.ndarray) -> complex:
    mag = np.abs(values)
    k = int(np.flatnonzero(mag >= mag.max() * (1 - 1e-9))[0])
    return values[k] / abs(values[k])


def _assemble_half_line(h, bc: BoundaryCondition, energy: float) -> BoundStateResult | None:
    basis = decaying_basis(h, energy)
    bm = boundary_matrix(bc, basis)
    _, s, vh = np.linalg.svd(bm.x)
    c = vh[-1].conj() / bm.column_scale
    p = np.array([b.p for b in basis])
    chi = np.array([b.chi for b in basis])

    psi0 = chi.T @ c
    ref = psi0 if np.linalg.norm(psi0) > 1e-8 * np.linalg.norm(c) else plane_wave_traces(
        bc.diag.layout, bc.l, p, chi
    ).T @ c
    c = c / _phase_reference(ref)
    c_unit = c / np.linalg.norm(c)
    gram = _gram_half_line(p, chi)
    norm2 = float(np.real(np.vdot(c_unit, gram @ c_unit)))
    norm_constant = 1.0 / math.sqrt(norm2)

    traces = plane_wave_traces(bc.diag.layout, bc.l, p, chi)  # (K, Nc)
    trace = norm_constant * (traces.T @ c_unit)
    plus, minus = bc.diag.movers(trace)
    result = BoundStateResult(
        energy=float(energy),
        solutions=tuple(basis),
        coeffs=c_unit,
        norm_constant=norm_constant,
        det_residual=float(abs(np.linalg.det(bm.x))),
        sigma_min=float(s[-1]),
        bc_residual=float(np.linalg.norm(plus - bc.u @ minus)),
        current=float(np.real(np.vdot(trace, bc.diag.j_matrix @ trace))),
        schrodinger_residual=max(b.residual for b in basis),
        l=bc.l,
        trace=trace,
    )
    return result


def _host(diag: CurrentDiagonalization, h: PolyMatrixHamiltonian | None) -> PolyMatrixHamiltonian:
    h = h if h is not None else diag.hamiltonian
    if h is None:
        raise ValueError("no Hamiltonian attached to the boundary condition; pass h explicitly")
    _check_layout(h, diag)
    return h


def solve_half_line(
    bc: BoundaryCondition,
    window,
    grid_points: int = 256,
    spacing: str = "linear",
    h: PolyMatrixHamiltonian | None = None,
) -> list[BoundStateResult]:
    """Bound states on x >= 0 with ``bc`` at x = 0 and energies inside ``window``.

    The window must lie in a bulk gap; an empty list means no bound state there.
    ``spacing="log"`` places the grid geometrically, which resolves states
    close to a band edge at zero energy.
    """
    if grid_points < 64:
        raise ValueError("grid_points must be >= 64")
    h = _host(bc.diag, h)
    grid = energy_grid(window, grid_points, spacing)
    sigma = _sigma_profile(h, bc, grid)

    def f(e):
        return float(_sigma_profile(h, bc, np.array([e]))[0])

    found: list[BoundStateResult] = []
    for i in _local_minima(sigma):
        e = _refine(f, grid, i)
        if f(e) > ACCEPT_TOL:
            continue
        if any(abs(e - r.energy) <= 1e-10 * (grid[-1] - grid[0]) for r in found):
            continue
        res = _assemble_half_line(h, bc, e)
        if res.bc_residual > RESIDUAL_TOL or abs(res.current) > RESIDUAL_TOL:
            log.warning("dropping candidate at %r: bc residual %.2e, current %.2e",
                        e, res.bc_residual, res.current)
            continue
        found.append(res)
    return sorted(found, key=lambda r: r.energy)


def wavefunction(result, x_values) -> np.ndarray:
    """psi(x) on a grid, shape (M, len(x)); works for half-line and segment states."""
    x = np.asarray(x_values, dtype=float)
    if np.any(x < 0):
        raise NegativeCoordinate("wave functions live on x >= 0")
    if isinstance(result, SegmentState):
        return result.wavefunction(x)
    p = result.momenta
    chi = np.array([s.chi for s in result.solutions])
    phases = np.exp(1j * np.outer(x, p))  # (len, K)
    return result.norm_constant * (chi.T * result.coeffs) @ phases.T


# --- segment ------------------------------------------------------------------

def _relation_rows(end, diag: CurrentDiagonalization, right: bool) -> np.ndarray:
    """Orthonormal relation rows in mover coordinates (Psi~+, Psi~-)."""
    if isinstance(end, BoundaryCondition):
        lam = end.size
        if right:
            w = np.hstack([-end.u, np.eye(lam)])
        else:
            w = np.hstack([np.eye(lam), -end.u])
        return w / math.sqrt(2.0)
    b = np.atleast_2d(np.asarray(end, dtype=complex))
    if b.shape[1] != diag.nc:
        raise LayoutMismatch(f"raw relations must have {diag.nc} columns, got {b.shape[1]}")
    inv_movers = diag.eigvecs / np.sqrt(np.abs(diag.eigvals))[None, :]
    return _orthonormal_rows(b @ inv_movers)


@dataclass(frozen=True, eq=False)
class SegmentState:
    """Eigenstate of a finite segment [0, length].

    psi(x) = norm_constant * sum_a coeffs[a] chi_a exp(i p_a (x - r_a)),
    r_a = 0 for Im p_a >= 0 and r_a = length otherwise.
    """

    energy: float
    solutions: tuple[ParticularSolution, ...]
    coeffs: np.ndarray
    norm_constant: float
    length: float
    sigma_min: float
    residual_left: float
    residual_right: float
    current_left: float
    current_right: float
    schrodinger_residual: float

    @property
    def momenta(self) -> np.ndarray:
        return np.array([s.p for s in self.solutions])

    @property
    def bc_residual(self) -> float:
        return max(self.residual_left, self.residual_right)

    @property
    def current(self) -> float:
        return max(abs(self.current_left), abs(self.current_right))

    def _refs(self):
        return np.where(self.momenta.imag >= 0, 0.0, self.length)

    def wavefunction(self, x_values) -> np.ndarray:
        x = np.asarray(x_values, dtype=float)
        if np.any(x < 0) or np.any(x > self.length):
            raise NegativeCoordinate("segment wave functions live on [0, length]")
        chi = np.array([s.chi for s in self.solutions])
        phases = np.exp(1j * self.momenta[None, :] * (x[:, None] - self._refs()[None, :]))
        return self.norm_constant * (chi.T * self.coeffs) @ phases.T


def _segment_system(h, diag, rows_left, rows_right, length, energies):
    p, chi, res = _roots_batch(h, energies)
    refs = np.where(p.imag >= 0, 0.0, length)
    traces = plane_wave_traces(diag.layout, diag.l, p, chi)  # (G, K, Nc)
    at0 = traces * np.exp(-1j * p * refs)[..., None]
    at_x = traces * np.exp(1j * p * (length - refs))[..., None]
    mm = diag.mover_matrix()
    mov0 = np.einsum("ij,gkj->gik", mm, at0)
    mov_x = np.einsum("ij,gkj->gik", mm, at_x)
    scale = np.sqrt(np.linalg.norm(mov0, axis=1) ** 2 + np.linalg.norm(mov_x, axis=1) ** 2)
    top = np.einsum("ij,gjk->gik", rows_left, mov0)
    bottom = np.einsum("ij,gjk->gik", rows_right, mov_x)
    system = np.concatenate([top, bottom], axis=1) / scale[:, None, :]
    return system, scale, p, chi, res, at0, at_x


def _segment_gram(p, chi, refs, length):
    q = p[None, :] - p.conj()[:, None]
    start = np.exp(1j * (p[None, :] * (0 - refs[None, :]) - p.conj()[:, None] * (0 - refs[:, None])))
    end = np.exp(1j * (p[None, :] * (length - refs[None, :]) - p.conj()[:, None] * (length - refs[:, None])))
    small = np.abs(q * length) < 1e-8
    integral = np.where(small, start * length, (end - start) / np.where(small, 1.0, 1j * q))
    return (chi.conj() @ chi.T) * integral


def _segment_diag(h, bc_left, bc_right, l):
    for end in (bc_left, bc_right):
        if isinstance(end, BoundaryCondition):
            _check_layout(h, end.diag)
            return end.diag
    layout, j = build_current_matrix(h, l)
    return diagonalize_current(layout, j, l, h)


def solve_segment(
    h: PolyMatrixHamiltonian,
    bc_left,
    bc_right,
    length: float,
    window,
    grid_points: int = 256,
    l: float = 1.0,
    spacing: str = "linear",
) -> list[SegmentState]:
    """Discrete spectrum of ``h`` on [0, length].

    Each end takes a :class:`BoundaryCondition` or raw relation rows acting on
    the trace vector at that end. A BC at the right end is read with movers
    relabelled by the outward normal: Psi~-(X) = U_X Psi~+(X).
    """
    if not length > 0:
        raise ValueError("segment length must be positive")
    if grid_points < 64:
        raise ValueError("grid_points must be >= 64")
    diag = _segment_diag(h, bc_left, bc_right, l)
    for end in (bc_left, bc_right):
        if isinstance(end, BoundaryCondition) and end.diag.layout != diag.layout:
            raise LayoutMismatch("left and right BCs belong to different Hamiltonians")
    rows_left = _relation_rows(bc_left, diag, right=False)
    rows_right = _relation_rows(bc_right, diag, right=True)
    grid = energy_grid(window, grid_points, spacing)
    width = grid[-1] - grid[0]

    def profile(energies):
        energies = np.array(energies, dtype=float)
        p, _, _ = _roots_batch(h, energies)
        bad = _degenerate_pairs(p)
        if bad.any():
            energies = energies.copy()
            energies[bad] += 1e-7 * max(1.0, width)
        system = _segment_system(h, diag, rows_left, rows_right, length, energies)[0]
        return np.linalg.svd(system, compute_uv=False)[:, -1], energies

    sigma, grid = profile(grid)

    def f(e):
        return float(profile([e])[0][0])

    candidates: list[float] = []
    for i in _local_minima(sigma):
        e = _refine(f, grid, i)
        if f(e) <= ACCEPT_TOL:
            candidates.append(e)
            lo, hi = grid[max(i - 1, 0)], grid[min(i + 1, len(grid) - 1)]
            gap = 1e-10 * max(1.0, width)
            # deflation: a near-degenerate partner hides inside the same bracket
            for a, b in ((lo, e - gap), (e + gap, hi)):
                if b - a <= gap:
                    continue
                res = minimize_scalar(lambda t: f(t) / abs(t - e), bounds=(a, b), method="bounded",
                                      options={"xatol": 1e-15 * max(1.0, abs(e))})
                e2 = _polish_v(f, float(res.x), max(1e-3 * abs(float(res.x) - e), 1e-14), a, b)
                # a lone root is V-shaped, so f(e2) = 2 f(mid); a true partner has a hump
                if abs(e2 - e) > gap and f(e2) <= min(ACCEPT_TOL, 1e-2 * f(0.5 * (e + e2))):
                    candidates.append(e2)

    states: list[SegmentState] = []
    for e in sorted(candidates):
        if states and abs(e - states[-1].energy) <= 1e-10 * max(1.0, width):
            continue
        st = _assemble_segment(h, diag, rows_left, rows_right, bc_left, bc_right, length, e)
        if st.bc_residual > RESIDUAL_TOL or st.current > RESIDUAL_TOL:
            log.warning("dropping segment candidate at %r: residual %.2e, current %.2e",
                        e, st.bc_residual, st.current)
            continue
        states.append(st)
    return states


def _assemble_segment(h, diag, rows_left, rows_right, bc_left, bc_right, length, energy) -> SegmentState:
    system, scale, p, chi, res, at0, at_x = _segment_system(
        h, diag, rows_left, rows_right, length, np.array([energy])
    )
    _, s, vh = np.linalg.svd(system[0])
    c = vh[-1].conj() / scale[0]
    p, chi, res, at0, at_x = p[0], chi[0], res[0], at0[0], at_x[0]
    refs = np.where(p.imag >= 0, 0.0, length)
    c = c / _phase_reference(at0.T @ c if np.linalg.norm(at0.T @ c) > 0 else c)
    c_unit = c / np.linalg.norm(c)
    norm2 = float(np.real(np.vdot(c_unit, _segment_gram(p, chi, refs, length) @ c_unit)))
    norm_constant = 1.0 / math.sqrt(norm2)
    trace0 = norm_constant * (at0.T @ c_unit)
    trace_x = norm_constant * (at_x.T @ c_unit)

    def residual(end, trace, right):
        if isinstance(end, BoundaryCondition):
            plus, minus = diag.movers(trace)
            return float(np.linalg.norm(minus - end.u @ plus if right else plus - end.u @ minus))
        return float(np.linalg.norm(np.atleast_2d(end) @ trace))

    def current(trace):
        return float(np.real(np.vdot(trace, diag.j_matrix @ trace)))

    return SegmentState(
        energy=float(energy),
        solutions=tuple(ParticularSolution(complex(p[a]), chi[a], float(res[a])) for a in range(len(p))),
        coeffs=c_unit,
        norm_constant=norm_constant,
        length=float(length),
        sigma_min=float(s[-1]),
        residual_left=residual(bc_left, trace0, False),
        residual_right=residual(bc_right, trace_x, True),
        current_left=current(trace0),
        current_right=current(trace_x),
        schrodinger_residual=float(res.max()),
    )
