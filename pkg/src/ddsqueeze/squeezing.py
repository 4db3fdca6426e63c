"""Squeezing parameters from spin moments, and optimal-time location.

The primary measure is ``xi_s_sq = 4 * min Var(J_n) / N`` where the minimum
runs over directions n perpendicular to the mean spin; values below 1
certify squeezing relative to the coherent state.  The metrological variant
rescales by the mean spin length, ``xi_r_sq = xi_s_sq * (J / |<J>|)**2``,
and always satisfies ``xi_r_sq >= xi_s_sq``.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .dynamics import SpinMoments, TrajectoryMoments

#: The mean spin direction counts as defined while |<J>| > MEAN_SPIN_RTOL * J.
#: Below that (over-twisted states) the perpendicular plane is numerically
#: meaningless and an explicit error beats noise-dominated output.
MEAN_SPIN_RTOL = 1e-9


class DegenerateMeanSpinError(ValueError):
    """The mean spin length is too small to define a squeezing direction."""


class BoundaryMinimumWarning(UserWarning):
    """The squeezing minimum sits on the edge of the sampled time window."""


@dataclass(frozen=True)
class SqueezingSample:
    """Squeezing measures at one time; ``xi_r_sq`` is None when undefined."""

    t: float
    xi_s_sq: float
    xi_r_sq: float | None
    mean_spin_len: float


def squeezing_arrays(
    mean: np.ndarray, second: np.ndarray, n_spins: int
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Vectorized squeezing measures from moment arrays.

    ``mean`` is (n, 3) and ``second`` (n, 3, 3); returns ``(xi_s_sq,
    xi_r_sq, mean_spin_len)`` with NaN entries where the mean spin direction
    is degenerate.

    The perpendicular frame is built by Gram-Schmidt against the Cartesian
    axis of smallest overlap with the mean direction (a numerically stable
    pivot); perpendicular components have zero mean, so the projected second
    moments are the covariance and the minimal variance is the smaller
    eigenvalue of the projected 2x2 block, in closed form.
    """
    mean = np.atleast_2d(np.asarray(mean, dtype=float))
    second = np.asarray(second, dtype=float).reshape(len(mean), 3, 3)
    j = n_spins / 2.0
    mlen = np.linalg.norm(mean, axis=1)
    ok = mlen > MEAN_SPIN_RTOL * j

    xi_s = np.full(len(mean), np.nan)
    xi_r = np.full(len(mean), np.nan)
    if np.any(ok):
        n0 = mean[ok] / mlen[ok, None]
        pivot = np.eye(3)[np.argmin(np.abs(n0), axis=1)]
        n1 = pivot - np.einsum("na,na->n", pivot, n0)[:, None] * n0
        n1 /= np.linalg.norm(n1, axis=1)[:, None]
        n2 = np.cross(n0, n1)
        s = second[ok]
        g11 = np.einsum("na,nab,nb->n", n1, s, n1)
        g22 = np.einsum("na,nab,nb->n", n2, s, n2)
        g12 = np.einsum("na,nab,nb->n", n1, s, n2)
        lam_min = 0.5 * (g11 + g22 - np.hypot(g11 - g22, 2 * g12))
        xi_s[ok] = 4 * np.maximum(lam_min, 0.0) / n_spins
        xi_r[ok] = xi_s[ok] * (j / mlen[ok]) ** 2
    return xi_s, xi_r, mlen


def xi_s_squared(m: SpinMoments, n_spins: int) -> float:
    """Squeezing parameter ``4 * min Var(J_perp) / N`` of one moment set.

    Raises
    ------
    DegenerateMeanSpinError
        If the mean spin length falls below ``MEAN_SPIN_RTOL * J``.
    """
    xi_s, _, mlen = squeezing_arrays(m.mean[None, :], m.second[None, :, :], n_spins)
    if np.isnan(xi_s[0]):
        raise DegenerateMeanSpinError(f"mean spin length {mlen[0]:.3e} defines no direction")
    return float(xi_s[0])


def xi_r_squared(m: SpinMoments, n_spins: int) -> float:
    """Metrological squeezing ``xi_s_sq * (J / |<J>|)**2``."""
    _, xi_r, mlen = squeezing_arrays(m.mean[None, :], m.second[None, :, :], n_spins)
    if np.isnan(xi_r[0]):
        raise DegenerateMeanSpinError(f"mean spin length {mlen[0]:.3e} defines no direction")
    return float(xi_r[0])


def squeezing_series(tm: TrajectoryMoments) -> list[SqueezingSample]:
    """Per-time squeezing samples of a moment series.

    Samples with a degenerate mean spin direction carry ``xi_s_sq = nan``
    and ``xi_r_sq = None`` instead of raising.
    """
    xi_s, xi_r, mlen = squeezing_arrays(tm.mean, tm.second, tm.n_spins)
    return [
        SqueezingSample(
            t=float(t),
            xi_s_sq=float(s),
            xi_r_sq=None if np.isnan(r) else float(r),
            mean_spin_len=float(l),
        )
        for t, s, r, l in zip(tm.times, xi_s, xi_r, mlen)
    ]


def find_min_squeezing(tm: TrajectoryMoments) -> tuple[float, float]:
    """Locate the optimal squeezing time of a moment series.

    Takes the grid minimum of ``xi_s_sq(t)`` and refines it by a quadratic
    fit through the bracketing triple.  If the minimum sits on the window
    boundary a :class:`BoundaryMinimumWarning` is emitted and the grid point
    is returned without interpolation.
    """
    if len(tm) < 3:
        raise ValueError(f"need at least 3 samples, got {len(tm)}")
    xi_s, _, _ = squeezing_arrays(tm.mean, tm.second, tm.n_spins)
    if not np.any(np.isfinite(xi_s)):
        raise DegenerateMeanSpinError("squeezing is undefined along the whole series")
    k = int(np.nanargmin(xi_s))
    if k == 0 or k == len(tm) - 1 or not (np.isfinite(xi_s[k - 1]) and np.isfinite(xi_s[k + 1])):
        warnings.warn(
            f"squeezing minimum at the window edge t={tm.times[k]:.6g}; not interpolated",
            BoundaryMinimumWarning,
            stacklevel=2,
        )
        return float(tm.times[k]), float(xi_s[k])

    t1, t2, t3 = tm.times[k - 1 : k + 2]
    y1, y2, y3 = xi_s[k - 1 : k + 2]
    denom = (t2 - t1) * (y2 - y3) - (t2 - t3) * (y2 - y1)
    if denom == 0:  # flat triple, no curvature to interpolate
        return float(t2), float(y2)
    t_min = t2 - 0.5 * ((t2 - t1) ** 2 * (y2 - y3) - (t2 - t3) ** 2 * (y2 - y1)) / denom
    # Parabola value at the vertex, via Lagrange interpolation.
    xi_min = (
        y1 * (t_min - t2) * (t_min - t3) / ((t1 - t2) * (t1 - t3))
        + y2 * (t_min - t1) * (t_min - t3) / ((t2 - t1) * (t2 - t3))
        + y3 * (t_min - t1) * (t_min - t2) / ((t3 - t1) * (t3 - t2))
    )
    return float(t_min), float(xi_min)
