"""Boundary probability current as a hermitian form on the trace vector.

The trace vector collects (-i l d/dx)^n psi_m(0) for every component m and
derivative order n < N_m. In this basis the current is Psi^dagger J Psi with

    J[(a, m), (b, m')] = h_{a+b+1}[m, m'] / l**(a+b),

one rule that covers equal and unequal top orders alike.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import DegenerateCurrentMatrix, LayoutMismatch, SignStructureChanged
from .hamiltonian import PolyMatrixHamiltonian

NONDEGENERATE_RTOL = 1e-10
TIE_RTOL = 1e-12


@dataclass(frozen=True)
class TraceLayout:
    """Slot order of the trace vector: derivative order first, then component.

    Components enter in the Hamiltonian's canonical order (ascending N_m,
    stable), so mixed-order layouts read psi_1..psi_M, p psi_(N_m>1), ...
    """

    slots: tuple[tuple[int, int], ...]
    m: int
    index: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "index", {s: i for i, s in enumerate(self.slots)})

    def __len__(self):
        return len(self.slots)

    @classmethod
    def for_hamiltonian(cls, h: PolyMatrixHamiltonian) -> "TraceLayout":
        slots = tuple((n, m) for n in range(h.order) for m in h.perm if h.top_orders[m] > n)
        return cls(slots, h.m)

    def powers(self) -> np.ndarray:
        return np.array([n for n, _ in self.slots])

    def components(self) -> np.ndarray:
        return np.array([m for _, m in self.slots])


@dataclass(frozen=True)
class BoundaryTraceVector:
    values: np.ndarray
    l: float
    layout: TraceLayout

    def __post_init__(self):
        if len(self.values) != len(self.layout):
            raise LayoutMismatch(f"trace has {len(self.values)} entries, layout has {len(self.layout)}")
        if not self.l > 0:
            raise ValueError("length scale l must be positive")


def plane_wave_traces(layout: TraceLayout, l: float, p, chi) -> np.ndarray:
    """Trace vectors of chi e^{ipx} at x = 0: slot (n, m) holds (l p)^n chi[m].

    ``p`` has shape (...,) and ``chi`` shape (..., M); returns shape (..., Nc).
    """
    p = np.asarray(p, dtype=complex)
    chi = np.asarray(chi, dtype=complex)
    powers, comps = layout.powers(), layout.components()
    return (l * p[..., None]) ** powers * chi[..., comps]


def trace_of(layout: TraceLayout, l: float, p: complex, chi) -> BoundaryTraceVector:
    return BoundaryTraceVector(plane_wave_traces(layout, l, p, chi), l, layout)


def build_current_matrix(
    h: PolyMatrixHamiltonian, l: float = 1.0, check: bool = True
) -> tuple[TraceLayout, np.ndarray]:
    if not l > 0:
        raise ValueError("length scale l must be positive")
    layout = TraceLayout.for_hamiltonian(h)
    n_top = h.order
    size = len(layout)
    j = np.zeros((size, size), dtype=complex)
    for r, (a, m) in enumerate(layout.slots):
        for c, (b, mp) in enumerate(layout.slots):
            n = a + b + 1
            if n <= n_top:
                j[r, c] = h.coeffs[n][m, mp] / l ** (a + b)
    if check and _inertia(layout, j, l) is None:
        raise DegenerateCurrentMatrix(
            "current matrix is singular although the top-order blocks passed validation"
        )
    return layout, j


def _inertia(layout: TraceLayout, j: np.ndarray, l: float) -> int | None:
    """Number of positive eigenvalues, or None if J is singular.

    Judged on the l = 1 form, which is congruent to J(l) and so shares its
    signs, while J(l) itself spreads its spectrum over powers of l.
    """
    d = float(l) ** layout.powers().astype(float)
    ev = np.linalg.eigvalsh(j * np.outer(d, d))
    if np.min(np.abs(ev)) <= NONDEGENERATE_RTOL * np.max(np.abs(ev)):
        return None
    return int(np.sum(ev > 0))


def current_form(
    layout: TraceLayout, j: np.ndarray, psi_a: BoundaryTraceVector, psi_b: BoundaryTraceVector
) -> complex:
    """Sesquilinear current j[a, b] = Psi_a^dagger J Psi_b (real for a = b)."""
    if psi_a.layout != layout or psi_b.layout != layout:
        raise LayoutMismatch("trace vectors were built for a different layout")
    if psi_a.l != psi_b.l:
        raise LayoutMismatch(f"trace vectors use different length scales {psi_a.l} and {psi_b.l}")
    return complex(np.vdot(psi_a.values, j @ psi_b.values))


def _phase_fix(v: np.ndarray) -> np.ndarray:
    mag = np.abs(v)
    k = int(np.flatnonzero(mag >= mag.max() * (1 - 1e-9))[0])
    return v * (abs(v[k]) / v[k])


def _canonical_basis(vecs: np.ndarray) -> np.ndarray:
    """Deterministic orthonormal basis of span(vecs), built from e_1, e_2, ..."""
    k = vecs.shape[1]
    if k == 1:
        return _phase_fix(vecs[:, 0])[:, None]
    proj = vecs @ vecs.conj().T
    chosen: list[np.ndarray] = []
    for col in range(proj.shape[0]):
        v = proj[:, col].copy()
        for u in chosen:
            v -= u * np.vdot(u, v)
        nv = np.linalg.norm(v)
        if nv > 1e-6:
            chosen.append(_phase_fix(v / nv))
            if len(chosen) == k:
                break
    return np.column_stack(chosen)


@dataclass(frozen=True, eq=False)
class CurrentDiagonalization:
    """Eigen-decomposition of J split into right- (J > 0) and left-movers (J < 0).

    ``t_plus`` / ``t_minus`` map a trace vector to the stretched mover
    amplitudes, so that Psi^dagger J Psi = |t_plus Psi|^2 - |t_minus Psi|^2.
    """

    layout: TraceLayout
    j_matrix: np.ndarray
    l: float
    eigvals: np.ndarray
    eigvecs: np.ndarray
    n_plus: int
    n_minus: int
    t_plus: np.ndarray
    t_minus: np.ndarray
    hamiltonian: PolyMatrixHamiltonian | None = None

    @property
    def nc(self) -> int:
        return len(self.layout)

    def movers(self, trace) -> tuple[np.ndarray, np.ndarray]:
        """Return (Psi~+, Psi~-) for a trace vector (or raw array)."""
        vals = trace.values if isinstance(trace, BoundaryTraceVector) else np.asarray(trace)
        return self.t_plus @ vals, self.t_minus @ vals

    def from_movers(self, plus, minus) -> np.ndarray:
        """Inverse of :meth:`movers`: the trace vector with given mover amplitudes."""
        amp = np.concatenate([np.asarray(plus, complex), np.asarray(minus, complex)])
        return self.eigvecs @ (amp / np.sqrt(np.abs(self.eigvals)))

    def mover_matrix(self) -> np.ndarray:
        """Stacked map [t_plus; t_minus] (square, invertible)."""
        return np.vstack([self.t_plus, self.t_minus])


def diagonalize_current(
    layout: TraceLayout, j: np.ndarray, l: float, hamiltonian: PolyMatrixHamiltonian | None = None
) -> CurrentDiagonalization:
    w, v = np.linalg.eigh(j)
    w, v = w[::-1], v[:, ::-1]
    scale = np.max(np.abs(w))
    n_plus = _inertia(layout, j, l)
    if n_plus is None:
        raise DegenerateCurrentMatrix(f"current matrix is singular (min |eig| = {np.min(np.abs(w)):.3e})")
    if int(np.sum(w > 0)) != n_plus:
        raise DegenerateCurrentMatrix(f"length scale l = {l} leaves the current signs unresolved")

    # canonical basis inside clusters of equal eigenvalues
    vecs = np.empty_like(v)
    start = 0
    while start < len(w):
        stop = start + 1
        while stop < len(w) and abs(w[stop] - w[start]) < TIE_RTOL * scale:
            stop += 1
        vecs[:, start:stop] = _canonical_basis(v[:, start:stop])
        start = stop

    n_minus = len(w) - n_plus
    stretch = np.sqrt(np.abs(w))[:, None] * vecs.conj().T
    return CurrentDiagonalization(
        layout=layout,
        j_matrix=j,
        l=float(l),
        eigvals=w,
        eigvecs=vecs,
        n_plus=n_plus,
        n_minus=n_minus,
        t_plus=stretch[:n_plus],
        t_minus=stretch[n_plus:],
        hamiltonian=hamiltonian,
    )


def current_diagonalization(h: PolyMatrixHamiltonian, l: float = 1.0) -> CurrentDiagonalization:
    """Shortcut: build J(l) for ``h`` and diagonalize it."""
    layout, j = build_current_matrix(h, l)
    return diagonalize_current(layout, j, l, h)


def sign_structure_invariance(h: PolyMatrixHamiltonian, l_values: Sequence[float]) -> tuple[int, int]:
    """(N+, N-) after checking it is the same for every length scale given."""
    ls = sorted(set(float(x) for x in l_values))
    if len(ls) < 2:
        raise ValueError("need at least two distinct length scales")
    counts = {l: (d.n_plus, d.n_minus) for l in ls for d in [current_diagonalization(h, l)]}
    pairs = set(counts.values())
    if len(pairs) != 1:
        raise SignStructureChanged(f"(N+, N-) depends on l: {counts}")
    return pairs.pop()
