"""Collective spin operators and exact dense-matrix primitives.

Everything lives in the symmetric (maximal J = N/2) Dicke sector: the
all-down initial state belongs to it and every Hamiltonian in this package
is built from the collective operators Jx, Jy, Jz, so the sector is closed
under the dynamics.  This reduces the Hilbert space from 2**N to N + 1.

Conventions
-----------
* Operators are dense complex ``(N+1, N+1)`` ndarrays.
* The basis is ``|J, m>`` with m ascending, so index ``i`` corresponds to
  ``m = i - J`` and index 0 is the all-down state ``|J, -J>``.
* Pure states are unit-norm complex vectors of length N + 1.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

#: Absolute entrywise tolerance for Hermiticity contract checks.
HERMITICITY_ATOL = 1e-12


class ShapeError(ValueError):
    """Operands have incompatible dimensions."""


class HermiticityError(ValueError):
    """An operator required to be Hermitian is not (within tolerance)."""


@dataclass(frozen=True)
class SpinSystem:
    """A collection of N identical spin-1/2 particles, symmetric sector only.

    Attributes
    ----------
    n_spins
        Number of spins N (>= 1).  The total spin is J = N/2, which may be
        half-integer; ``total_spin`` keeps it exact as a rational.
    """

    n_spins: int

    def __post_init__(self) -> None:
        if not isinstance(self.n_spins, (int, np.integer)) or self.n_spins < 1:
            raise ValueError(f"spin count must be a positive integer, got {self.n_spins!r}")

    @property
    def total_spin(self) -> Fraction:
        """Total spin J = N/2 as an exact rational."""
        return Fraction(self.n_spins, 2)

    @property
    def j(self) -> float:
        """Total spin J = N/2 as a float, for numerics."""
        return self.n_spins / 2.0

    @property
    def dim(self) -> int:
        """Hilbert-space dimension N + 1 of the symmetric sector."""
        return self.n_spins + 1


def build_collective_operators(system: SpinSystem) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Build the collective angular-momentum matrices (Jx, Jy, Jz).

    Jz is diagonal with entries m = -J..J; the ladder operator matrix
    elements are ``<m+1|J+|m> = sqrt(J(J+1) - m(m+1))`` and
    ``Jx = (J+ + J-)/2``, ``Jy = (J+ - J-)/(2i)``.  All three are Hermitian
    and traceless.
    """
    j = system.j
    m = np.arange(system.dim) - j
    jz = np.diag(m.astype(complex))
    raising = np.sqrt(j * (j + 1) - m[:-1] * (m[:-1] + 1))
    jplus = np.zeros((system.dim, system.dim), dtype=complex)
    jplus[np.arange(1, system.dim), np.arange(system.dim - 1)] = raising
    jminus = jplus.conj().T
    jx = (jplus + jminus) / 2
    jy = (jplus - jminus) / 2j
    return jx, jy, jz


def spin_down_state(system: SpinSystem) -> np.ndarray:
    """The coherent state ``|J, -J>`` with every spin pointing down."""
    psi = np.zeros(system.dim, dtype=complex)
    psi[0] = 1.0
    return psi


def _require_matching_square(a: np.ndarray, b: np.ndarray) -> None:
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ShapeError(f"expected a square matrix, got shape {a.shape}")
    if b.ndim != 2 or b.shape != a.shape:
        raise ShapeError(f"operand shapes differ: {a.shape} vs {b.shape}")


def require_hermitian(h: np.ndarray, atol: float = HERMITICITY_ATOL, name: str = "operator") -> None:
    """Raise :class:`HermiticityError` unless ``h`` equals its adjoint entrywise."""
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise ShapeError(f"expected a square matrix, got shape {h.shape}")
    dev = np.abs(h - h.conj().T).max()
    if dev > atol:
        raise HermiticityError(f"{name} deviates from Hermiticity by {dev:.3e} (atol {atol:.1e})")


def commutator(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Return ``a @ b - b @ a``."""
    _require_matching_square(a, b)
    return a @ b - b @ a


def hermitian_eigensystem(h: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of a Hermitian matrix, with the Hermiticity contract checked."""
    require_hermitian(h)
    return np.linalg.eigh(h)


def hermitian_exponential_action(h: np.ndarray, t: float, psi: np.ndarray) -> np.ndarray:
    """Apply ``exp(-i h t)`` to the state ``psi`` via eigendecomposition.

    Exact for time-independent ``h`` (no stepping error); the result keeps
    unit norm to machine precision.
    """
    if psi.ndim != 1 or psi.shape[0] != h.shape[0]:
        raise ShapeError(f"state length {psi.shape} does not match operator {h.shape}")
    w, v = hermitian_eigensystem(h)
    return v @ (np.exp(-1j * w * t) * (v.conj().T @ psi))


def hermitian_exponential(h: np.ndarray, t: float) -> np.ndarray:
    """The full unitary ``exp(-i h t)``, i.e. the exponential action on every basis column."""
    w, v = hermitian_eigensystem(h)
    return (v * np.exp(-1j * w * t)) @ v.conj().T


def expectation(a: np.ndarray, psi: np.ndarray) -> complex:
    """Return ``<psi| a |psi>``; real up to rounding when ``a`` is Hermitian."""
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ShapeError(f"expected a square matrix, got shape {a.shape}")
    if psi.ndim != 1 or psi.shape[0] != a.shape[0]:
        raise ShapeError(f"state length {psi.shape} does not match operator {a.shape}")
    return complex(np.vdot(psi, a @ psi))
