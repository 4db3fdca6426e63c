"""Classical colored-noise bath: three independent Ornstein-Uhlenbeck channels.

The bath couples linearly to the collective spin,

    H_sb(t) = Bx(t) Jx + By(t) Jy + Bz(t) Jz,

with each channel a stationary Gaussian process of autocorrelation
``sigma_sq * exp(-alpha * tau)``.  Channels are sampled on the propagation
substep grid and held constant within each substep, consistent with a
piecewise-constant Hamiltonian propagator.

Reproducibility
---------------
Streams are derived, not shared: a trajectory seed comes from
``SeedSequence(master_seed, spawn_key=(trajectory,))`` and each channel from
``SeedSequence(trajectory_seed, spawn_key=(channel,))``.  Paths are therefore
bit-reproducible for a given seed regardless of generation order or
parallelism.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.signal import lfilter

from .spin import SpinSystem, build_collective_operators


@dataclass(frozen=True)
class OUParams:
    """Stationary Ornstein-Uhlenbeck parameters.

    ``alpha`` is the inverse correlation time (> 0) and ``sigma_sq`` the
    stationary variance (>= 0); the autocorrelation is
    ``sigma_sq * exp(-alpha * tau)``.
    """

    alpha: float
    sigma_sq: float

    def __post_init__(self) -> None:
        if not self.alpha > 0:
            raise ValueError(f"inverse correlation time must be positive, got {self.alpha!r}")
        if self.sigma_sq < 0:
            raise ValueError(f"variance must be nonnegative, got {self.sigma_sq!r}")


@dataclass(frozen=True)
class NoisePath:
    """Sampled bath channels on a uniform grid.

    ``samples`` has shape (3, n_steps): rows are Bx, By, Bz, with
    ``samples[:, i]`` the value held during substep i.  ``seed`` is the
    64-bit trajectory token the channels were derived from.
    """

    dt: float
    samples: np.ndarray
    seed: int

    def __post_init__(self) -> None:
        if not self.dt > 0:
            raise ValueError(f"grid step must be positive, got {self.dt!r}")
        if self.samples.ndim != 2 or self.samples.shape[0] != 3 or self.samples.shape[1] < 1:
            raise ValueError(f"expected (3, n>=1) channel array, got shape {self.samples.shape}")

    def __len__(self) -> int:
        return self.samples.shape[1]


def derive_path_seed(master_seed: int, trajectory: int) -> int:
    """64-bit per-trajectory seed token, independent of generation order."""
    ss = np.random.SeedSequence(master_seed, spawn_key=(trajectory,))
    return int(ss.generate_state(1, np.uint64)[0])


def sample_ou_path(params: OUParams, n_steps: int, dt: float, seed: int) -> NoisePath:
    """Sample the three bath channels with the exact OU transition.

    Each channel starts from the stationary distribution N(0, sigma_sq) and
    is advanced with the closed-form conditional update

        B[i+1] = B[i] * exp(-alpha dt) + sqrt(sigma_sq (1 - exp(-2 alpha dt))) * xi_i,

    xi_i i.i.d. standard normal, so the single-step law is exact at any dt
    (no Euler bias).  ``sigma_sq = 0`` yields exact zeros.
    """
    if n_steps < 1:
        raise ValueError(f"need at least one step, got {n_steps}")
    if not dt > 0:
        raise ValueError(f"grid step must be positive, got {dt!r}")
    decay = np.exp(-params.alpha * dt)
    scale = np.sqrt(params.sigma_sq * (1 - decay * decay))
    channels = np.empty((3, n_steps))
    for c in range(3):
        rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(c,)))
        xi = rng.standard_normal(n_steps)
        driving = scale * xi
        driving[0] = np.sqrt(params.sigma_sq) * xi[0]
        # lfilter runs the linear recursion y[i] = driving[i] + decay*y[i-1] in C.
        channels[c] = lfilter([1.0], [1.0, -decay], driving)
    return NoisePath(dt=dt, samples=channels, seed=seed)


def noise_hamiltonian(path: NoisePath, step_index: int, system: SpinSystem) -> np.ndarray:
    """The coupling ``Bx[i] Jx + By[i] Jy + Bz[i] Jz`` at the given substep."""
    if not 0 <= step_index < len(path):
        raise IndexError(f"substep {step_index} outside path of length {len(path)}")
    jx, jy, jz = build_collective_operators(system)
    bx, by, bz = path.samples[:, step_index]
    return bx * jx + by * jy + bz * jz
