"""State propagation and ensemble reduction to averaged spin moments.

Static (time-independent) Hamiltonians are propagated exactly through a
single eigendecomposition.  Driven and stochastic Hamiltonians use a
midpoint-exponential integrator: per substep of length dt the unitary
``exp(-i H(t + dt/2) dt)`` is applied, with any noise term held at its
step value.  Each substep is exactly unitary, so norm is conserved by
construction and the global error is O(dt^2) for smooth driving.

The observable record is the pair of first and symmetrized second moments
of (Jx, Jy, Jz).  These are linear in the state projector, so averaging
them over noise trajectories is equivalent to density-matrix averaging,
and they are exactly the sufficient statistic for the squeezing measures.
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from multiprocessing import get_context

import numpy as np

from .hamiltonians import ControlParams, build_oat, system_hamiltonian_source
from .noise import NoisePath, OUParams, derive_path_seed, sample_ou_path
from .spin import (
    ShapeError,
    SpinSystem,
    build_collective_operators,
    hermitian_eigensystem,
    require_hermitian,
)

#: Allowed drift of the state norm over a full driven run.
NORM_DRIFT_TOL = 1e-8

#: Trajectories per reduction chunk.  Chunk boundaries are fixed by index,
#: independent of the worker count, so the ensemble average is bit-identical
#: for any parallelization of the chunks.
ENSEMBLE_CHUNK = 16


class IntegratorError(RuntimeError):
    """The stepped propagator lost unitarity beyond tolerance."""


@dataclass(frozen=True)
class StepPolicy:
    """Discretization policy for propagation.

    ``substeps_per_period`` sets the substep count K per control period for
    driven evolution (K >= 16); ``dt_static`` is the output sampling step
    for static evolution and the substep length for driven evolution
    without a control period.
    """

    substeps_per_period: int = 128
    dt_static: float = 1e-3

    def __post_init__(self) -> None:
        if self.substeps_per_period < 16:
            raise ValueError(f"need at least 16 substeps per period, got {self.substeps_per_period}")
        if not self.dt_static > 0:
            raise ValueError(f"static step must be positive, got {self.dt_static!r}")


@dataclass(frozen=True)
class SpinMoments:
    """First moments <Jk> and symmetrized second moments of one state.

    ``second[a, b] = <Ja Jb + Jb Ja>/2`` is symmetric with trace J(J+1) for
    any pure state of the symmetric sector, and ``second - outer(mean, mean)``
    is the (positive semidefinite) covariance of the spin components.
    """

    mean: np.ndarray
    second: np.ndarray


@dataclass(frozen=True)
class TrajectoryMoments:
    """Moment time series: ``mean[i]``, ``second[i]`` belong to ``times[i]``."""

    times: np.ndarray
    mean: np.ndarray
    second: np.ndarray
    n_spins: int

    def __len__(self) -> int:
        return len(self.times)

    def moment(self, i: int) -> SpinMoments:
        return SpinMoments(mean=self.mean[i], second=self.second[i])


@dataclass(frozen=True)
class EnsembleScenario:
    """One noisy evolution setup: drive (or bare twisting) plus bath.

    ``control is None`` propagates the bare one-axis twisting in the noise,
    i.e. the no-decoupling comparison case.
    """

    n_spins: int
    chi: float
    control: ControlParams | None
    ou: OUParams
    t_end: float

    def __post_init__(self) -> None:
        if not self.t_end > 0:
            raise ValueError(f"evolution time must be positive, got {self.t_end!r}")


@dataclass(frozen=True)
class EnsembleResult:
    """Trajectory-averaged moments, plus optional per-path squeezing averages.

    ``moments`` averages the spin moments over trajectories (the physical
    reduction: moments are linear in the density matrix).  When requested,
    ``xi_s_path_mean``/``xi_r_path_mean`` additionally average the squeezing
    parameters computed per path, for comparison.
    """

    moments: TrajectoryMoments
    n_paths: int
    master_seed: int
    xi_s_path_mean: np.ndarray | None = None
    xi_r_path_mean: np.ndarray | None = None


def moments_from_states(ops, states: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Moments of one or more state columns.

    ``states`` is (dim, n); returns ``mean`` (n, 3) and ``second`` (n, 3, 3).
    """
    applied = [jk @ states for jk in ops]
    n = states.shape[1]
    mean = np.empty((n, 3))
    second = np.empty((n, 3, 3))
    for a in range(3):
        mean[:, a] = np.einsum("in,in->n", states.conj(), applied[a]).real
        for b in range(a, 3):
            s_ab = np.einsum("in,in->n", applied[a].conj(), applied[b]).real
            second[:, a, b] = s_ab
            second[:, b, a] = s_ab
    return mean, second


def propagate_static(h: np.ndarray, psi0: np.ndarray, times) -> TrajectoryMoments:
    """Exact evolution under a time-independent Hamiltonian.

    Diagonalizes ``h`` once and evaluates the state at each requested time
    with no stepping error.
    """
    require_hermitian(h, name="static Hamiltonian")
    if psi0.shape[0] != h.shape[0]:
        raise ShapeError(f"state length {psi0.shape} does not match operator {h.shape}")
    times = np.asarray(times, dtype=float)
    n_spins = h.shape[0] - 1
    ops = build_collective_operators(SpinSystem(n_spins))
    w, v = hermitian_eigensystem(h)
    phases = np.exp(-1j * np.outer(w, times))
    states = v @ (phases * (v.conj().T @ psi0)[:, None])
    mean, second = moments_from_states(ops, states)
    return TrajectoryMoments(times=times.copy(), mean=mean, second=second, n_spins=n_spins)


def _substep_grid(t_end: float, dt: float) -> np.ndarray:
    n_steps = max(1, int(np.ceil(t_end / dt - 1e-9)))
    return np.arange(n_steps + 1) * dt


def propagate_driven(
    h_of_t,
    psi0: np.ndarray,
    t_end: float,
    policy: StepPolicy,
    *,
    period: float | None = None,
    noise: NoisePath | None = None,
) -> TrajectoryMoments:
    """Midpoint-exponential evolution under a time-dependent Hamiltonian.

    The substep is ``period / substeps_per_period`` when a drive period is
    given, else ``dt_static``; ``t_end`` is rounded up to a whole number of
    substeps and moments are recorded at every substep boundary.  When a
    noise path is supplied its step values are added to the midpoint
    Hamiltonian, one value per substep.

    For periodic noiseless driving the K midpoint unitaries of one period
    are precomputed and reused, which changes nothing but the cost.

    Raises
    ------
    IntegratorError
        If the state norm drifts from unity by more than ``NORM_DRIFT_TOL``.
    """
    if not t_end > 0:
        raise ValueError(f"evolution time must be positive, got {t_end!r}")
    dt = period / policy.substeps_per_period if period is not None else policy.dt_static
    times = _substep_grid(t_end, dt)
    n_steps = len(times) - 1
    if noise is not None:
        if len(noise) < n_steps:
            raise ValueError(f"noise path has {len(noise)} steps, need {n_steps}")
        if abs(noise.dt - dt) > 1e-12 * dt:
            raise ValueError(f"noise grid step {noise.dt!r} does not match substep {dt!r}")
        if not np.any(noise.samples):
            noise = None  # degenerate bath: take the exact noiseless path

    n_spins = psi0.shape[0] - 1
    ops = build_collective_operators(SpinSystem(n_spins))
    mean = np.empty((n_steps + 1, 3))
    second = np.empty((n_steps + 1, 3, 3))

    psi = psi0.astype(complex)
    mean[0], second[0] = (m[0] for m in moments_from_states(ops, psi[:, None]))

    step_unitaries = None
    if noise is None and period is not None:
        k = policy.substeps_per_period
        step_unitaries = []
        for i in range(k):
            w, v = hermitian_eigensystem(h_of_t((i + 0.5) * dt))
            step_unitaries.append((v * np.exp(-1j * w * dt)) @ v.conj().T)

    for i in range(n_steps):
        if step_unitaries is not None:
            psi = step_unitaries[i % policy.substeps_per_period] @ psi
        else:
            h = h_of_t((i + 0.5) * dt)
            if noise is not None:
                bx, by, bz = noise.samples[:, i]
                h = h + bx * ops[0] + by * ops[1] + bz * ops[2]
            w, v = hermitian_eigensystem(h)
            psi = v @ (np.exp(-1j * w * dt) * (v.conj().T @ psi))
        mean[i + 1], second[i + 1] = (m[0] for m in moments_from_states(ops, psi[:, None]))

    drift = abs(np.linalg.norm(psi) - 1.0)
    if drift > NORM_DRIFT_TOL:
        raise IntegratorError(f"norm drifted by {drift:.3e} over {n_steps} substeps")
    return TrajectoryMoments(times=times, mean=mean, second=second, n_spins=n_spins)


def _scenario_pieces(scenario: EnsembleScenario, policy: StepPolicy):
    """Smooth Hamiltonian source and substep length for a scenario."""
    system = SpinSystem(scenario.n_spins)
    if scenario.control is not None:
        h_of_t = system_hamiltonian_source(scenario.control, system)
        dt = scenario.control.t_c / policy.substeps_per_period
        period = scenario.control.t_c
    else:
        h_oat = build_oat(system, scenario.chi)
        h_of_t = lambda t: h_oat  # noqa: E731
        dt = policy.dt_static
        period = None
    return h_of_t, dt, period


def _ensemble_chunk(
    scenario: EnsembleScenario,
    policy: StepPolicy,
    master_seed: int,
    start: int,
    stop: int,
    want_xi: bool,
):
    """Sum of per-trajectory moment series for trajectories [start, stop)."""
    h_of_t, dt, period = _scenario_pieces(scenario, policy)
    times = _substep_grid(scenario.t_end, dt)
    n_steps = len(times) - 1
    psi0 = np.zeros(scenario.n_spins + 1, dtype=complex)
    psi0[0] = 1.0

    sum_mean = np.zeros((n_steps + 1, 3))
    sum_second = np.zeros((n_steps + 1, 3, 3))
    sum_xi_s = np.zeros(n_steps + 1) if want_xi else None
    sum_xi_r = np.zeros(n_steps + 1) if want_xi else None
    if want_xi:
        from .squeezing import squeezing_arrays  # deferred: squeezing imports this module

    for traj in range(start, stop):
        path = sample_ou_path(scenario.ou, n_steps, dt, derive_path_seed(master_seed, traj))
        try:
            tm = propagate_driven(h_of_t, psi0, scenario.t_end, policy, period=period, noise=path)
        except IntegratorError as exc:
            raise IntegratorError(f"trajectory {traj}: {exc}") from exc
        sum_mean += tm.mean
        sum_second += tm.second
        if want_xi:
            xi_s, xi_r, _ = squeezing_arrays(tm.mean, tm.second, scenario.n_spins)
            sum_xi_s += xi_s
            sum_xi_r += xi_r
    return sum_mean, sum_second, sum_xi_s, sum_xi_r


def _chunk_ranges(n_paths: int) -> list[tuple[int, int]]:
    return [(s, min(s + ENSEMBLE_CHUNK, n_paths)) for s in range(0, n_paths, ENSEMBLE_CHUNK)]


def run_ensemble(
    scenario: EnsembleScenario,
    n_paths: int,
    master_seed: int,
    policy: StepPolicy,
    *,
    workers: int = 1,
    xi_average: bool = False,
) -> EnsembleResult:
    """Average the moment series over noise trajectories.

    Trajectory ``i`` uses the seed derived from ``(master_seed, i)``, so the
    ensemble is a pure function of its arguments.  Trajectories are grouped
    into fixed index chunks; chunks may run in parallel worker processes
    (spawned with BLAS pinned to one thread) and are always reduced in index
    order, so the result is bit-identical for any ``workers``.

    With ``xi_average=True`` the per-path squeezing parameters are averaged
    as well, for comparison against the default moment-average reduction.
    """
    if n_paths < 1:
        raise ValueError(f"need at least one trajectory, got {n_paths}")
    ranges = _chunk_ranges(n_paths)
    args = [(scenario, policy, master_seed, start, stop, xi_average) for start, stop in ranges]
    if workers > 1 and len(ranges) > 1:
        saved = {}
        thread_vars = ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS")
        for var in thread_vars:
            saved[var] = os.environ.get(var)
            os.environ[var] = "1"
        try:
            with ProcessPoolExecutor(max_workers=workers, mp_context=get_context("spawn")) as pool:
                partials = list(pool.map(_ensemble_chunk_task, args))
        finally:
            for var, value in saved.items():
                if value is None:
                    os.environ.pop(var, None)
                else:
                    os.environ[var] = value
    else:
        partials = [_ensemble_chunk_task(a) for a in args]

    sum_mean = partials[0][0].copy()
    sum_second = partials[0][1].copy()
    for part in partials[1:]:
        sum_mean += part[0]
        sum_second += part[1]

    _, dt, _ = _scenario_pieces(scenario, policy)
    times = _substep_grid(scenario.t_end, dt)
    moments = TrajectoryMoments(
        times=times,
        mean=sum_mean / n_paths,
        second=sum_second / n_paths,
        n_spins=scenario.n_spins,
    )
    xi_s = xi_r = None
    if xi_average:
        xi_s = partials[0][2].copy()
        xi_r = partials[0][3].copy()
        for part in partials[1:]:
            xi_s += part[2]
            xi_r += part[3]
        xi_s /= n_paths
        xi_r /= n_paths
    return EnsembleResult(
        moments=moments,
        n_paths=n_paths,
        master_seed=master_seed,
        xi_s_path_mean=xi_s,
        xi_r_path_mean=xi_r,
    )


def _ensemble_chunk_task(args):
    return _ensemble_chunk(*args)
