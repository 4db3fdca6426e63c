"""Twisting Hamiltonians and the periodic two-axis winding control.

The control unitary winds the collective spin about the x and y axes with
integer winding numbers (n_x, n_y) per period t_c,

    U_c(t) = exp(-i w n_y t Jy) exp(-i w n_x t Jx),      w = 2*pi/t_c.

Over one period this control averages the linear couplings Jx, Jy, Jz to
zero (first-order decoupling) whenever the two winding frequencies do not
coincide in magnitude, and it simultaneously reshapes the twisting term
Jx^2 into an effective time-averaged Hamiltonian.  Away from resonances the
average is the original one-axis twisting scaled down by four; at the
double-resonance condition n_x = 2*n_y it becomes an equal mixture of
one-axis and two-axis twisting, which is the useful regime.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .spin import (
    SpinSystem,
    build_collective_operators,
    hermitian_exponential,
)

#: Relative tolerance (vs the Frobenius norm of the integrand scale) for the
#: Richardson error estimate of the period average.
QUADRATURE_RTOL = 1e-9


class QuadratureError(ArithmeticError):
    """The period-average quadrature did not converge to tolerance."""


@dataclass(frozen=True)
class ControlParams:
    """Parameters of the periodic winding control.

    Attributes
    ----------
    chi
        Twisting strength (inverse time).
    n_x, n_y
        Nonzero integer winding numbers; ``n_x == n_y`` is rejected because
        it breaks first-order decoupling.
    t_c
        Control period (> 0).  The angular frequency ``omega = 2*pi/t_c``.
    """

    chi: float
    n_x: int
    n_y: int
    t_c: float

    def __post_init__(self) -> None:
        for name, n in (("n_x", self.n_x), ("n_y", self.n_y)):
            if not isinstance(n, (int, np.integer)) or n == 0:
                raise ValueError(f"{name} must be a nonzero integer, got {n!r}")
        if self.n_x == self.n_y:
            raise ValueError(f"winding numbers must differ, got n_x = n_y = {self.n_x}")
        if not self.t_c > 0:
            raise ValueError(f"control period must be positive, got {self.t_c!r}")

    @property
    def omega(self) -> float:
        return 2 * math.pi / self.t_c

    @property
    def is_double_resonance(self) -> bool:
        """Exact integer test for the double-resonance condition n_x = 2*n_y."""
        return self.n_x == 2 * self.n_y


@dataclass(frozen=True)
class AveragedForm:
    """Closed-form classification of the period-averaged twisting Hamiltonian.

    ``kind`` is ``"dr"`` exactly when n_x = 2*n_y, else ``"oat-quarter"``.
    ``constant_shift`` is the coefficient of the identity, (chi/4) J(J+1),
    kept explicit because it matters when comparing propagators directly.
    """

    kind: str
    constant_shift: float


def _symmetrize(h: np.ndarray) -> np.ndarray:
    # Makes products of Hermitian factors exactly Hermitian entrywise,
    # so downstream absolute-tolerance contract checks never see matmul noise.
    return (h + h.conj().T) / 2


def build_oat(system: SpinSystem, chi: float) -> np.ndarray:
    """One-axis twisting ``chi * Jx^2``."""
    jx, _, _ = build_collective_operators(system)
    return _symmetrize(chi * (jx @ jx))


def build_tat(system: SpinSystem, chi: float) -> np.ndarray:
    """Two-axis twisting ``chi * (Jx Jy + Jy Jx)``."""
    jx, jy, _ = build_collective_operators(system)
    return _symmetrize(chi * (jx @ jy + jy @ jx))


def build_dr(system: SpinSystem, chi: float) -> np.ndarray:
    """Double-resonance average ``(chi/4) (Jx^2 + Jx Jy + Jy Jx)``."""
    jx, jy, _ = build_collective_operators(system)
    return _symmetrize((chi / 4) * (jx @ jx + jx @ jy + jy @ jx))


def control_propagator(params: ControlParams, system: SpinSystem, t: float) -> np.ndarray:
    """The winding-control unitary U_c(t).

    Product of the y- then x-rotation exponentials; unitary for any real t,
    and equal to the identity at t = 0.  At t = t_c it returns to the
    identity up to the global parity phase ``(-1)**(N*(n_x+n_y))``.
    """
    jx, jy, _ = build_collective_operators(system)
    w = params.omega
    return hermitian_exponential(jy, w * params.n_y * t) @ hermitian_exponential(jx, w * params.n_x * t)


def control_hamiltonian_source(params: ControlParams, system: SpinSystem):
    """Factory for repeated drive evaluation with the operators built once."""
    jx, jy, jz = build_collective_operators(system)
    w = params.omega

    def h_c(t: float) -> np.ndarray:
        phase = w * params.n_y * t
        return w * params.n_y * jy + w * params.n_x * (math.cos(phase) * jx - math.sin(phase) * jz)

    return h_c


def control_hamiltonian(params: ControlParams, system: SpinSystem, t: float) -> np.ndarray:
    """The drive generating U_c(t), from ``i dU_c/dt = H_c(t) U_c(t)``.

    ``H_c(t) = w n_y Jy + w n_x [Jx cos(w n_y t) - Jz sin(w n_y t)]`` with
    period t_c in t.
    """
    return control_hamiltonian_source(params, system)(t)


def system_hamiltonian_source(params: ControlParams, system: SpinSystem):
    """Factory for the total driven Hamiltonian, twisting term built once."""
    oat = build_oat(system, params.chi)
    h_c = control_hamiltonian_source(params, system)
    return lambda t: oat + h_c(t)


def system_hamiltonian(params: ControlParams, system: SpinSystem, t: float) -> np.ndarray:
    """Total driven Hamiltonian: one-axis twisting plus the winding drive."""
    return system_hamiltonian_source(params, system)(t)


def _conjugation_coefficients(params: ControlParams, t) -> np.ndarray:
    """Trig coefficients of U_c(t)^dag Jx^2 U_c(t) on the six quadratic basis matrices.

    Order: {Jz,Jy}/1, {Jx,Jz}/1, {Jx,Jy}/1, Jx^2, Jy^2, Jz^2 where {A,B} is
    the anticommutator AB + BA.
    """
    t = np.asarray(t, dtype=float)
    ax = params.omega * params.n_x * t
    ay = params.omega * params.n_y * t
    sy, cy = np.sin(ay), np.cos(ay)
    sx, cx = np.sin(ax), np.cos(ax)
    return np.stack(
        [
            0.5 * np.sin(2 * ax) * sy**2,
            0.5 * np.sin(2 * ay) * cx,
            0.5 * np.sin(2 * ay) * sx,
            cy**2,
            sx**2 * sy**2,
            cx**2 * sy**2,
        ]
    )


def _quadratic_basis(system: SpinSystem) -> list[np.ndarray]:
    jx, jy, jz = build_collective_operators(system)
    return [
        _symmetrize(jz @ jy + jy @ jz),
        _symmetrize(jx @ jz + jz @ jx),
        _symmetrize(jx @ jy + jy @ jx),
        _symmetrize(jx @ jx),
        _symmetrize(jy @ jy),
        _symmetrize(jz @ jz),
    ]


def conjugated_jx_squared(params: ControlParams, system: SpinSystem, t: float) -> np.ndarray:
    """Closed form of ``U_c(t)^dag Jx^2 U_c(t)``.

    Six quadratic terms with trigonometric coefficients; reduces to Jx^2 at
    t = 0 and agrees with direct conjugation by :func:`control_propagator`
    at all times.
    """
    coeffs = _conjugation_coefficients(params, t)
    basis = _quadratic_basis(system)
    out = np.zeros((system.dim, system.dim), dtype=complex)
    for c, mat in zip(coeffs, basis):
        out += c * mat
    return out


def _simpson_weights(n_intervals: int, h: float) -> np.ndarray:
    if n_intervals % 2:
        raise ValueError("composite Simpson needs an even interval count")
    w = np.ones(n_intervals + 1)
    w[1:-1:2] = 4.0
    w[2:-1:2] = 2.0
    return w * (h / 3)


def _period_intervals(n_x: int, n_y: int) -> int:
    # Uniform grids integrate trig polynomials of one period spectrally fast;
    # the lcm factor keeps every resonant harmonic commensurate with the grid.
    return 4 * math.lcm(abs(n_x), abs(n_y)) * 64


def averaged_hamiltonian(params: ControlParams, system: SpinSystem) -> tuple[np.ndarray, AveragedForm]:
    """Period average ``(chi/t_c) * integral of U_c^dag Jx^2 U_c`` over one period.

    Computed by composite Simpson quadrature of the conjugated twisting term
    (by linearity, applied to its six scalar coefficients), with one
    Richardson halving step as an error estimate.  The result equals
    ``(chi/4) Jx^2`` plus the identity shift away from double resonance, and
    ``(chi/4)(Jx^2 + Jx Jy + Jy Jx)`` plus the shift at ``n_x == 2 n_y``;
    the shift ``(chi/4) J(J+1)`` is reported in the returned
    :class:`AveragedForm`, not dropped.

    Raises
    ------
    QuadratureError
        If the Richardson estimate exceeds ``QUADRATURE_RTOL * ||Jx^2||_F``.
    """
    n_int = _period_intervals(params.n_x, params.n_y)
    ts = np.linspace(0.0, params.t_c, n_int + 1)
    coeffs = _conjugation_coefficients(params, ts)  # (6, n_int+1)

    w_full = _simpson_weights(n_int, params.t_c / n_int)
    w_half = _simpson_weights(n_int // 2, 2 * params.t_c / n_int)
    c_full = coeffs @ w_full / params.t_c
    c_half = coeffs[:, ::2] @ w_half / params.t_c

    basis = _quadratic_basis(system)
    jx2_norm = np.linalg.norm(basis[3])
    err = np.linalg.norm(sum((cf - ch) * mat for cf, ch, mat in zip(c_full, c_half, basis))) / 15
    if err > QUADRATURE_RTOL * jx2_norm:
        raise QuadratureError(f"period-average error estimate {err:.3e} exceeds tolerance")

    h_bar = params.chi * sum(c * mat for c, mat in zip(c_full, basis))
    j = system.j
    form = AveragedForm(
        kind="dr" if params.is_double_resonance else "oat-quarter",
        constant_shift=params.chi / 4 * j * (j + 1),
    )
    return h_bar, form


def winding_residuals(
    system: SpinSystem, n_x: int, n_y: int, t_c: float = 1.0
) -> tuple[float, float, float]:
    """Frobenius norms of the period-averaged conjugated couplings.

    For each k in (x, y, z) this integrates ``U_c(t)^dag Jk U_c(t)`` over one
    period by composite Simpson quadrature of the directly conjugated
    matrices and returns ``||average||_F``.  All three vanish exactly when
    first-order decoupling holds.  Unlike :func:`dd_residual` this accepts
    any nonzero windings, including pairs that violate the decoupling
    condition, so it can quantify how badly they fail.

    Raises
    ------
    QuadratureError
        If any channel's Richardson estimate exceeds tolerance.
    """
    if n_x == 0 or n_y == 0:
        raise ValueError("winding numbers must be nonzero")
    ops = build_collective_operators(system)
    w = 2 * math.pi / t_c
    wx, vx = np.linalg.eigh(ops[0])
    wy, vy = np.linalg.eigh(ops[1])

    n_int = _period_intervals(n_x, n_y)
    ts = np.linspace(0.0, t_c, n_int + 1)
    weights_full = _simpson_weights(n_int, t_c / n_int)
    weights_half = _simpson_weights(n_int // 2, 2 * t_c / n_int)

    acc_full = [np.zeros_like(ops[0]) for _ in range(3)]
    acc_half = [np.zeros_like(ops[0]) for _ in range(3)]
    for i, t in enumerate(ts):
        uy = (vy * np.exp(-1j * w * n_y * t * wy)) @ vy.conj().T
        ux = (vx * np.exp(-1j * w * n_x * t * wx)) @ vx.conj().T
        u = uy @ ux
        ud = u.conj().T
        for k, jk in enumerate(ops):
            conj = ud @ jk @ u
            acc_full[k] += weights_full[i] * conj
            if i % 2 == 0:
                acc_half[k] += weights_half[i // 2] * conj

    residuals = []
    for k, jk in enumerate(ops):
        err = np.linalg.norm(acc_full[k] - acc_half[k]) / (15 * t_c)
        if err > QUADRATURE_RTOL * np.linalg.norm(jk):
            raise QuadratureError(f"residual quadrature error {err:.3e} on channel {k}")
        residuals.append(float(np.linalg.norm(acc_full[k] / t_c)))
    return residuals[0], residuals[1], residuals[2]


def dd_residual(params: ControlParams, system: SpinSystem) -> tuple[float, float, float]:
    """First-order decoupling residuals for a valid control configuration.

    See :func:`winding_residuals`; this is the same quantity evaluated at
    the windings and period of ``params``.
    """
    return winding_residuals(system, params.n_x, params.n_y, params.t_c)
