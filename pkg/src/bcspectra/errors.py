"""Exception hierarchy.

Everything raised on purpose by the library derives from :class:`DomainError`
(CLI exit code 1) or :class:`ConfigError` (CLI exit code 2).
"""

from __future__ import annotations

import math


class DomainError(Exception):
    """Base class for numerical and physical domain errors."""


class ConfigError(Exception):
    """Malformed model or boundary-condition input; carries file and field context."""

    def __init__(self, message: str, path: str | None = None, field: str | None = None):
        self.path = path
        self.field = field
        where = ":".join(x for x in (path, field) if x)
        super().__init__(f"{where}: {message}" if where else message)


# hamiltonian
class NonHermitianCoefficient(DomainError):
    def __init__(self, order: int, deviation: float):
        self.order = order
        self.deviation = deviation
        super().__init__(f"coefficient h_{order} is not hermitian (max |h - h^dagger| = {deviation:.3e})")


class DegenerateTopOrderBlock(DomainError):
    def __init__(self, order: int, ratio: float):
        self.order = order
        self.ratio = ratio
        super().__init__(
            f"top-order block of the components with N_m = {order} is degenerate "
            f"(smallest/largest singular value = {ratio:.3e})"
        )


class BlockStructureViolation(DomainError):
    def __init__(self, order: int, row: int, col: int):
        self.order = order
        self.row = row
        self.col = col
        super().__init__(
            f"h_{order}[{row}, {col}] must vanish: order {order} exceeds the top order of that component"
        )


class EmptyRange(DomainError):
    pass


# current
class DegenerateCurrentMatrix(DomainError):
    pass


class LayoutMismatch(DomainError):
    pass


class SignStructureChanged(DomainError):
    pass


# boundary
class UnequalMoverCounts(DomainError):
    def __init__(self, n_plus: int, n_minus: int):
        self.n_plus = n_plus
        self.n_minus = n_minus
        super().__init__(
            f"N+ = {n_plus} != N- = {n_minus}: a boundary cannot be introduced, no admissible BCs exist"
        )


class EqualMoverCounts(DomainError):
    pass


class NonUnitary(DomainError):
    pass


class WrongDimension(DomainError):
    pass


# spectra
class DegenerateRootCluster(DomainError):
    def __init__(self, energy: complex, roots, scale: float = 1.0):
        self.energy = energy
        self.roots = roots
        self.suggested_shift = 1e-7 * scale
        super().__init__(
            f"momentum roots {roots} coincide at energy {energy}; confluent solutions are not "
            f"supported, perturb the energy by ~{self.suggested_shift:.1e}"
        )


class RootCountMismatch(DomainError):
    pass


class EnergyInBand(DomainError):
    def __init__(self, energy: float, momentum: complex):
        self.energy = energy
        self.momentum = momentum
        super().__init__(f"energy {energy} touches the bulk continuum (root p = {momentum})")


# The half-line solver reports a band-touching window under this name.
WindowTouchesBand = EnergyInBand


class UnbalancedRoots(DomainError):
    pass


class NegativeCoordinate(DomainError):
    pass


# models
class SingularAngle(DomainError):
    """nu = 0 (mod 2 pi): the BC is d/dx psi(0) = 0, i.e. L = +-inf."""

    sentinel = math.inf


class ResonantWidth(DomainError):
    """cos(k0 x0) = 0: the effective length diverges and a state sits at zero energy."""

    sentinel = math.inf
