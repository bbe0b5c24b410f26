"""Polynomial matrix Hamiltonians H(p) = sum_n h_n p^n of a 1D continuum model."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .errors import (
    BlockStructureViolation,
    DegenerateTopOrderBlock,
    EmptyRange,
    NonHermitianCoefficient,
)

HERMITIAN_RTOL = 1e-12
TOP_BLOCK_RTOL = 1e-10


@dataclass(frozen=True, eq=False)
class PolyMatrixHamiltonian:
    """Validated Hamiltonian data.

    ``coeffs[n]`` is the M x M matrix multiplying p**n, in the user's component
    ordering. ``perm`` lists the components sorted by ascending top order
    (stable); it fixes the internal ordering of the boundary trace vector.
    """

    m: int
    top_orders: tuple[int, ...]
    coeffs: tuple[np.ndarray, ...]
    nc: int = field(init=False)
    perm: tuple[int, ...] = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "nc", int(sum(self.top_orders)))
        perm = tuple(int(i) for i in np.argsort(self.top_orders, kind="stable"))
        object.__setattr__(self, "perm", perm)
        for c in self.coeffs:
            c.setflags(write=False)

    @property
    def order(self) -> int:
        """Top momentum order N = max N_m."""
        return max(self.top_orders)

    def order_classes(self) -> dict[int, list[int]]:
        """Map each top order k to the components (user indices) with N_m = k."""
        classes: dict[int, list[int]] = {}
        for m in self.perm:
            classes.setdefault(self.top_orders[m], []).append(m)
        return classes

    def __repr__(self):
        return f"PolyMatrixHamiltonian(m={self.m}, top_orders={list(self.top_orders)}, nc={self.nc})"


def _as_coeff_list(coeffs, m: int, n_top: int) -> list[np.ndarray]:
    if isinstance(coeffs, Mapping):
        items = {int(k): v for k, v in coeffs.items()}
    else:
        items = dict(enumerate(coeffs))
    size = max([n_top, *items.keys()]) + 1 if items else n_top + 1
    out = [np.zeros((m, m), dtype=complex) for _ in range(size)]
    for n, v in items.items():
        if n < 0:
            raise ValueError(f"negative momentum order {n}")
        arr = np.array(v, dtype=complex)
        if arr.ndim == 0 and m == 1:
            arr = arr.reshape(1, 1)
        if arr.shape != (m, m):
            raise ValueError(f"h_{n} has shape {arr.shape}, expected {(m, m)}")
        out[n] = arr
    return out


def new_hamiltonian(m: int, top_orders: Sequence[int], coeffs) -> PolyMatrixHamiltonian:
    """Build and validate a Hamiltonian.

    ``coeffs`` is either a sequence indexed by momentum order or a mapping
    ``{n: matrix}``; omitted orders are zero. Scalars are accepted for M = 1.
    """
    if m < 1:
        raise ValueError("m must be a positive integer")
    top_orders = tuple(int(k) for k in top_orders)
    if len(top_orders) != m or min(top_orders) < 1:
        raise ValueError("top_orders must list one positive order per component")
    n_top = max(top_orders)
    mats = _as_coeff_list(coeffs, m, n_top)

    for n, h in enumerate(mats):
        dev = float(np.max(np.abs(h - h.conj().T)))
        scale = float(np.max(np.abs(h)))
        if dev > HERMITIAN_RTOL * scale:
            raise NonHermitianCoefficient(n, dev)

    orders = np.array(top_orders)
    for n, h in enumerate(mats[1:], start=1):
        for row in np.flatnonzero(orders < n):
            nz = np.flatnonzero(h[row, :] != 0)
            if nz.size:
                raise BlockStructureViolation(n, int(row), int(nz[0]))
            nz = np.flatnonzero(h[:, row] != 0)
            if nz.size:
                raise BlockStructureViolation(n, int(nz[0]), int(row))

    ham = PolyMatrixHamiltonian(m, top_orders, tuple(mats[: n_top + 1]))
    for k, comps in ham.order_classes().items():
        block = ham.coeffs[k][np.ix_(comps, comps)]
        sv = np.linalg.svd(block, compute_uv=False)
        ratio = float(sv[-1] / sv[0]) if sv[0] > 0 else 0.0
        if ratio <= TOP_BLOCK_RTOL:
            raise DegenerateTopOrderBlock(k, ratio)
    return ham


def _unchecked(m: int, top_orders: Sequence[int], coeffs) -> PolyMatrixHamiltonian:
    # Test-only back door: skips every construction check.
    top_orders = tuple(int(k) for k in top_orders)
    mats = _as_coeff_list(coeffs, m, max(top_orders))
    return PolyMatrixHamiltonian(m, top_orders, tuple(mats[: max(top_orders) + 1]))


def evaluate(h: PolyMatrixHamiltonian, p: complex) -> np.ndarray:
    """Return H(p) = sum_n h_n p^n (Horner)."""
    out = np.zeros((h.m, h.m), dtype=complex)
    for c in reversed(h.coeffs):
        out = out * p + c
    return out


def evaluate_many(h: PolyMatrixHamiltonian, p) -> np.ndarray:
    """Vectorized :func:`evaluate`; returns an array of shape ``p.shape + (M, M)``."""
    p = np.asarray(p, dtype=complex)[..., None, None]
    out = np.zeros(p.shape[:-2] + (h.m, h.m), dtype=complex)
    for c in reversed(h.coeffs):
        out = out * p + c
    return out


def derivative(h: PolyMatrixHamiltonian, p: complex) -> np.ndarray:
    """dH/dp at p."""
    out = np.zeros((h.m, h.m), dtype=complex)
    for n in range(len(h.coeffs) - 1, 0, -1):
        out = out * p + n * h.coeffs[n]
    return out


def bulk_bands(h: PolyMatrixHamiltonian, p_values) -> np.ndarray:
    """Band energies, shape (len(p_values), M), ascending along each row."""
    p = np.asarray(p_values, dtype=float)
    if np.iscomplexobj(p_values) and np.any(np.imag(p_values) != 0):
        raise ValueError("bulk_bands needs real momenta")
    return np.linalg.eigvalsh(evaluate_many(h, p))


@dataclass(frozen=True)
class Gap:
    """Open energy interval free of bulk bands on the sampled momentum grid.

    Edges are only as good as the sampling: ``resolution`` is the largest band
    energy change between neighbouring grid points. An infinite gap side is
    represented by a finite proxy one envelope-width beyond the sampled bands.
    """

    lo: float
    hi: float
    resolution: float

    def __contains__(self, energy: float) -> bool:
        return self.lo < energy < self.hi


def gap_window(h: PolyMatrixHamiltonian, p_range, n_samples: int = 2001) -> list[Gap]:
    """Energy gaps of the bulk spectrum from a momentum grid over [-P, P]."""
    if np.ndim(p_range) == 0:
        lo_p, hi_p = -abs(float(p_range)), abs(float(p_range))
    else:
        lo_p, hi_p = (float(x) for x in p_range)
        if not np.isclose(lo_p, -hi_p):
            raise ValueError("p_range must be symmetric about 0")
    if n_samples < 101:
        raise ValueError("n_samples must be >= 101")
    if not hi_p > lo_p:
        raise EmptyRange(f"degenerate momentum range ({lo_p}, {hi_p})")

    p = np.linspace(lo_p, hi_p, n_samples)
    bands = bulk_bands(h, p)
    resolution = float(np.max(np.abs(np.diff(bands, axis=0)))) if n_samples > 1 else 0.0
    e_min, e_max = float(bands.min()), float(bands.max())
    span = max(e_max - e_min, 1.0)

    intervals = sorted((float(b.min()), float(b.max())) for b in bands.T)
    merged: list[list[float]] = []
    for a, b in intervals:
        if merged and a <= merged[-1][1]:
            merged[-1][1] = max(merged[-1][1], b)
        else:
            merged.append([a, b])

    gaps = [Gap(merged[i][1], merged[i + 1][0], resolution) for i in range(len(merged) - 1)]
    # Semi-infinite gaps exist only when the extreme band turns around inside the grid.
    lowest, highest = bands[:, 0], bands[:, -1]
    i_min, i_max = int(np.argmin(lowest)), int(np.argmax(highest))
    if 0 < i_min < n_samples - 1:
        gaps.insert(0, Gap(e_min - span, e_min, resolution))
    if 0 < i_max < n_samples - 1:
        gaps.append(Gap(e_max, e_max + span, resolution))
    return gaps
