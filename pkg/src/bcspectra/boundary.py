"""Standardized boundary conditions Psi~+(0) = U Psi~-(0) and their classification."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .current import (
    BoundaryTraceVector,
    CurrentDiagonalization,
    diagonalize_current,
)
from .errors import (
    EqualMoverCounts,
    NonUnitary,
    UnequalMoverCounts,
    WrongDimension,
)

UNITARY_TOL = 1e-10
RANK_RTOL = 1e-10
NULL_FORM_TOL = 1e-10
SUBSPACE_TOL = 1e-10


def _unitarity_defect(u: np.ndarray) -> float:
    return float(np.max(np.abs(u.conj().T @ u - np.eye(u.shape[1]))))


def nearest_unitary(a: np.ndarray) -> np.ndarray:
    """Polar-decomposition projection onto U(n)."""
    w, _, vh = np.linalg.svd(a)
    return w @ vh


@dataclass(frozen=True, eq=False)
class BoundaryCondition:
    diag: CurrentDiagonalization
    u: np.ndarray

    @property
    def size(self) -> int:
        return self.u.shape[0]

    @property
    def l(self) -> float:
        return self.diag.l

    @property
    def nu(self) -> float:
        """Phase-shift angle in [0, 2 pi) for the scalar case U = e^{-i nu}."""
        if self.u.shape != (1, 1):
            raise WrongDimension("nu is defined only for 1 x 1 U")
        return float(np.mod(-np.angle(self.u[0, 0]), 2 * np.pi))

    def residual(self, trace) -> float:
        """|Psi~+ - U Psi~-| for a trace vector."""
        plus, minus = self.diag.movers(trace)
        return float(np.linalg.norm(plus - self.u @ minus))


def standard_bc(diag: CurrentDiagonalization, u) -> BoundaryCondition:
    if diag.n_plus != diag.n_minus:
        raise UnequalMoverCounts(diag.n_plus, diag.n_minus)
    u = np.atleast_2d(np.array(u, dtype=complex))
    if u.shape != (diag.n_plus, diag.n_plus):
        raise WrongDimension(f"U must be {diag.n_plus} x {diag.n_plus}, got {u.shape}")
    defect = _unitarity_defect(u)
    if defect > UNITARY_TOL:
        raise NonUnitary(f"|U^dagger U - 1|_max = {defect:.3e}")
    u.setflags(write=False)
    return BoundaryCondition(diag, u)


def u1_bc_from_angle(diag: CurrentDiagonalization, nu: float) -> BoundaryCondition:
    """Single BC of an Nc = 2 model, U = e^{-i nu}."""
    if diag.nc != 2:
        raise WrongDimension(f"the angle form needs Nc = 2, this model has Nc = {diag.nc}")
    nu = math.fmod(float(nu), 2 * math.pi)
    if nu < 0:
        nu += 2 * math.pi
    return standard_bc(diag, [[np.exp(-1j * nu)]])


def _orthonormal_rows(b: np.ndarray) -> np.ndarray:
    _, s, vh = np.linalg.svd(b)
    rank = int(np.sum(s > RANK_RTOL * s[0])) if s.size and s[0] > 0 else 0
    rows = vh[:rank]
    if rows.shape[0] == 1:
        v = rows[0]
        mag = np.abs(v)
        k = int(np.flatnonzero(mag >= mag.max() * (1 - 1e-9))[0])
        rows = (v * abs(v[k]) / v[k])[None, :]
    return rows


def raw_relation_matrix(bc: BoundaryCondition) -> np.ndarray:
    """Rows B with B Psi[psi(0)] = 0 exactly for the wave functions obeying ``bc``."""
    return _orthonormal_rows(bc.diag.t_plus - bc.u @ bc.diag.t_minus)


def row_space_distance(a: np.ndarray, b: np.ndarray) -> float:
    """Sine of the largest principal angle between the row spaces of a and b."""
    qa = _orthonormal_rows(np.atleast_2d(a))
    qb = _orthonormal_rows(np.atleast_2d(b))
    pa = qa.conj().T @ qa
    pb = qb.conj().T @ qb
    return float(np.linalg.norm(pa - pb, 2))


# --- classification -------------------------------------------------------

class BoundaryClassification:
    verdict: str = ""


@dataclass(frozen=True, eq=False)
class Insufficient(BoundaryClassification):
    rank_deficit: int
    verdict = "insufficient"


@dataclass(frozen=True, eq=False)
class NotCurrentConserving(BoundaryClassification):
    witness: BoundaryTraceVector
    current: float
    verdict = "not-current-conserving"


@dataclass(frozen=True, eq=False)
class SymmetricOnly(BoundaryClassification):
    dim: int
    verdict = "symmetric-only"


@dataclass(frozen=True, eq=False)
class Admissible(BoundaryClassification):
    u: np.ndarray
    verdict = "admissible"


def _null_space(a: np.ndarray) -> np.ndarray:
    _, s, vh = np.linalg.svd(a)
    tol = RANK_RTOL * (s[0] if s.size else 0.0)
    rank = int(np.sum(s > tol))
    return vh[rank:].conj().T


def _rank(a: np.ndarray) -> int:
    if a.size == 0:
        return 0
    s = np.linalg.svd(a, compute_uv=False)
    return int(np.sum(s > RANK_RTOL * s[0])) if s[0] > 0 else 0


def classify_relations(diag: CurrentDiagonalization, c_plus, c_minus) -> BoundaryClassification:
    """Classify relations C+ Psi~+(0) = C- Psi~-(0) given in stretched mover variables."""
    c_plus = np.atleast_2d(np.array(c_plus, dtype=complex))
    c_minus = np.atleast_2d(np.array(c_minus, dtype=complex))
    n_plus, n_minus = diag.n_plus, diag.n_minus
    if c_plus.shape[1] != n_plus or c_minus.shape[1] != n_minus or c_plus.shape[0] != c_minus.shape[0]:
        raise WrongDimension(
            f"expected C+ of width {n_plus} and C- of width {n_minus} with equal row counts, "
            f"got {c_plus.shape} and {c_minus.shape}"
        )

    deficit = max(n_plus - _rank(c_plus), n_minus - _rank(c_minus))
    if deficit > 0:
        return Insufficient(deficit)

    basis = _null_space(np.hstack([c_plus, -c_minus]))
    dim = basis.shape[1]
    signature = np.concatenate([np.ones(n_plus), -np.ones(n_minus)])
    if dim:
        gram = basis.conj().T @ (signature[:, None] * basis)
        w, v = np.linalg.eigh(gram)
        k = int(np.argmax(np.abs(w)))
        if abs(w[k]) > NULL_FORM_TOL:
            amp = basis @ v[:, k]
            trace = diag.from_movers(amp[:n_plus], amp[n_plus:])
            return NotCurrentConserving(BoundaryTraceVector(trace, diag.l, diag.layout), float(w[k]))

    if n_plus != n_minus or dim < n_plus:
        return SymmetricOnly(dim)

    top, bottom = basis[:n_plus], basis[n_plus:]
    u = nearest_unitary(top @ np.linalg.inv(bottom))
    return Admissible(u)


def split_raw(diag: CurrentDiagonalization, b) -> tuple[np.ndarray, np.ndarray]:
    """Rewrite trace-space relations B Psi = 0 as C+ Psi~+ = C- Psi~-."""
    b = np.atleast_2d(np.array(b, dtype=complex))
    inv_movers = diag.eigvecs / np.sqrt(np.abs(diag.eigvals))[None, :]
    bm = b @ inv_movers
    return bm[:, : diag.n_plus], -bm[:, diag.n_plus :]


def classify_raw(diag: CurrentDiagonalization, b) -> BoundaryClassification:
    """Classify relations written directly on the trace vector, B Psi[psi(0)] = 0."""
    return classify_relations(diag, *split_raw(diag, b))


def symmetric_only_bc(diag: CurrentDiagonalization, u) -> np.ndarray:
    """Canonical current-nullifying relations for N+ != N- (trace-space rows).

    The larger mover set is split; its first min(N+, N-) amplitudes are tied to
    the smaller set through ``u`` and the remaining ones are set to zero.
    """
    n_plus, n_minus = diag.n_plus, diag.n_minus
    if n_plus == n_minus:
        raise EqualMoverCounts("N+ = N-: use standard_bc for admissible conditions")
    big, small = (diag.t_plus, diag.t_minus) if n_plus > n_minus else (diag.t_minus, diag.t_plus)
    k = small.shape[0]
    u = np.atleast_2d(np.array(u, dtype=complex))
    if u.shape != (k, k):
        raise WrongDimension(f"U must be {k} x {k}, got {u.shape}")
    if _unitarity_defect(u) > UNITARY_TOL:
        raise NonUnitary("U is not unitary")
    return np.vstack([big[:k] - u @ small, big[k:]])


def rescale_traces(layout, l_old: float, l_new: float) -> np.ndarray:
    """Diagonal D with Psi[l_new] = D Psi[l_old]."""
    return (l_new / l_old) ** layout.powers().astype(float)


def reparameterize_length(bc: BoundaryCondition, l_new: float) -> BoundaryCondition:
    """Same boundary condition written at another fictitious length scale."""
    if not l_new > 0:
        raise ValueError("length scale must be positive")
    d = rescale_traces(bc.diag.layout, bc.l, l_new)
    j_new = bc.diag.j_matrix / np.outer(d, d)
    diag_new = diagonalize_current(bc.diag.layout, j_new, l_new, bc.diag.hamiltonian)
    if diag_new.n_plus != diag_new.n_minus:
        raise UnequalMoverCounts(diag_new.n_plus, diag_new.n_minus)
    rows = raw_relation_matrix(bc) / d[None, :]
    verdict = classify_raw(diag_new, rows)
    if not isinstance(verdict, Admissible):
        raise RuntimeError(f"rescaled relations lost admissibility ({verdict.verdict})")
    out = standard_bc(diag_new, verdict.u)
    dist = row_space_distance(raw_relation_matrix(out), rows)
    if dist > SUBSPACE_TOL:
        raise RuntimeError(f"reparameterized BC differs from the original (distance {dist:.2e})")
    return out


def haar_unitary(dim: int, seed) -> np.ndarray:
    """Haar-distributed unitary via QR of a complex Ginibre matrix with phase correction."""
    if dim < 1:
        raise ValueError("dim must be >= 1")
    rng = np.random.default_rng(seed)
    z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))[None, :]
