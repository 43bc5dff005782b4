"""Time integration of the first-moment dynamics and growth-rate fitting.

Photon numbers are represented by the proxy |<a_i>|^2 of first moments
seeded with a small initial deviation; the zero state is an exact fixed
point, so any buildup reflects dynamical instability. Trajectories are in
the rotating frame, which leaves the photon proxy unchanged.

The full (stationary plus oscillating terms) system is integrated with the
compiled adaptive Runge-Kutta pair from :mod:`dce_lab._rk`, with the step
ceiling tied to the fastest phase present. The filtered system is linear
time-invariant and is propagated exactly through the matrix exponential.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .model import ConfigError
from .expansion import TermSystem
from .stability import LinearSystem, assemble_linear_system, _term_triplets
from ._rk import integrate_ck54

DEFAULT_SAMPLES = 2000
DEFAULT_SEED_AMPLITUDE = 1e-3


class IntegrationError(RuntimeError):
    """Adaptive integration could not meet its contract."""


@dataclass(frozen=True)
class InitialState:
    """Initial first moments <a_i>(0) for the k modes."""

    amplitudes: tuple[complex, ...]
    deviation_scale: float = DEFAULT_SEED_AMPLITUDE

    def __post_init__(self):
        if self.deviation_scale <= 0.0:
            raise ConfigError("deviation_scale must be > 0")
        object.__setattr__(
            self, "amplitudes", tuple(complex(a) for a in self.amplitudes))

    @classmethod
    def seed(cls, k_modes: int, scale: float = DEFAULT_SEED_AMPLITUDE,
             mode: int = 1) -> "InitialState":
        """Small real deviation on one mode, vacuum elsewhere."""
        amps = [0.0 + 0.0j] * k_modes
        amps[mode - 1] = complex(scale)
        return cls(amplitudes=tuple(amps), deviation_scale=scale)

    def stacked(self) -> np.ndarray:
        """The 2k vector (<a_1>..<a_k>, <a_1>*..<a_k>*)."""
        amps = np.asarray(self.amplitudes, dtype=np.complex128)
        return np.concatenate([amps, np.conj(amps)])


@dataclass(frozen=True)
class IntegratorStats:
    steps: int
    rejected: int
    max_error_estimate: float


@dataclass(frozen=True)
class Trajectory:
    """Uniformly sampled mode amplitudes and photon-number proxies."""

    times: np.ndarray                 # (ns,)
    amplitudes: np.ndarray            # (ns, k) complex, <a_i>
    conj_amplitudes: np.ndarray       # (ns, k) complex, the <a_i>* channel
    stats: IntegratorStats
    photon_proxy: np.ndarray = field(init=False)  # (ns, k), |<a_i>|^2

    def __post_init__(self):
        if np.any(np.diff(self.times) <= 0):
            raise ValueError("sample times must be strictly increasing")
        object.__setattr__(self, "photon_proxy",
                           np.abs(self.amplitudes) ** 2)

    @property
    def k(self) -> int:
        return self.amplitudes.shape[1]


def _output_grid(t_end: float, samples: int) -> np.ndarray:
    if t_end <= 0.0:
        raise ConfigError("t_end must be > 0")
    if samples < 2:
        raise ConfigError("samples must be >= 2")
    return np.linspace(0.0, t_end, samples)


def _trajectory_from_stacked(times, stacked, stats) -> Trajectory:
    k = stacked.shape[1] // 2
    return Trajectory(times=times, amplitudes=stacked[:, :k],
                      conj_amplitudes=stacked[:, k:], stats=stats)


def integrate_full(system: TermSystem, init: InitialState, t_end: float,
                   tol: float = 1e-9, samples: int = DEFAULT_SAMPLES,
                   atol: float = 0.0, max_steps: int = 50_000_000) -> Trajectory:
    """Integrate the complete (stationary and oscillating) term system.

    Parameters
    ----------
    system : generated term system; its config supplies the drive and the
        shifted frequency entering every phase factor.
    init : initial first moments; the conjugate channel is seeded with the
        exact complex conjugates.
    t_end : final dimensionless time (omega1 * t units).
    tol : relative local error target per step. The absolute floor
        ``atol`` defaults to zero, which keeps the stepper exactly
        scale-invariant (linearity of the dynamics carries to the numerics).
    samples : size of the uniform output grid, including t = 0.

    Raises
    ------
    IntegrationError
        On step-size underflow (the fastest phase frequency is reported)
        or when the step budget is exhausted before reaching t_end.
    """
    if len(init.amplitudes) != system.config.k_modes:
        raise ConfigError(
            f"initial state has {len(init.amplitudes)} modes, "
            f"config has {system.config.k_modes}")
    if tol <= 0.0:
        raise ConfigError("tol must be > 0")
    rows, cols, amps, freqs = _term_triplets(system)
    ufreqs, fidx = np.unique(freqs, return_inverse=True)
    times = _output_grid(t_end, samples)

    fmax = float(np.max(np.abs(ufreqs))) if ufreqs.size else 0.0
    max_step = t_end / 50.0
    if fmax > 0.0:
        max_step = min(max_step, (2.0 * math.pi / fmax) / 4.0)

    stacked, steps, rejected, max_err, status, t_reached = integrate_ck54(
        rows, cols, amps, fidx.astype(np.int64), ufreqs,
        init.stacked(), times, float(tol), float(atol), max_step,
        int(max_steps))
    if status == 1:
        raise IntegrationError(
            f"step size underflow at t={t_reached!r}; fastest phase frequency "
            f"is {fmax!r} (period {2.0 * math.pi / fmax if fmax else math.inf!r})")
    if status == 2:
        raise IntegrationError(
            f"tolerance {tol!r} not achievable within {max_steps} steps "
            f"(reached t={t_reached!r} of {t_end!r})")
    return _trajectory_from_stacked(
        times, stacked, IntegratorStats(steps=int(steps), rejected=int(rejected),
                                        max_error_estimate=float(max_err)))


def integrate_rwa(system: TermSystem | LinearSystem, init: InitialState,
                  t_end: float, samples: int = DEFAULT_SAMPLES) -> Trajectory:
    """Propagate the filtered (stationary) system exactly.

    The constant-coefficient system is advanced with the matrix exponential
    of one output step, so there is no step error; only rounding enters.
    """
    if isinstance(system, TermSystem):
        ls = assemble_linear_system(system)
        if not isinstance(ls, LinearSystem):
            raise ConfigError(
                "integrate_rwa needs a stationary system; apply the resonance "
                "filter first or pass a LinearSystem")
    else:
        ls = system
    k = ls.k
    if len(init.amplitudes) != k:
        raise ConfigError(
            f"initial state has {len(init.amplitudes)} modes, system has {k}")
    times = _output_grid(t_end, samples)
    step = scipy.linalg.expm(ls.matrix * (times[1] - times[0]))
    stacked = np.empty((times.size, 2 * k), dtype=np.complex128)
    stacked[0] = init.stacked()
    for j in range(1, times.size):
        stacked[j] = step @ stacked[j - 1]
    return _trajectory_from_stacked(
        times, stacked,
        IntegratorStats(steps=times.size - 1, rejected=0,
                        max_error_estimate=0.0))


def fit_growth_rate(traj: Trajectory, mode: int,
                    window: tuple[float, float]) -> float:
    """Least-squares slope of ln(photon proxy) of one mode over a window.

    For trajectories of the filtered system this recovers twice the maximal
    eigenvalue once the growing branch dominates. Raises on windows that
    contain nonpositive proxy values (the mode has not been populated yet).
    """
    if not 1 <= mode <= traj.k:
        raise ConfigError(f"mode must lie in 1..{traj.k}, got {mode}")
    t0, t1 = window
    mask = (traj.times >= t0) & (traj.times <= t1)
    if int(mask.sum()) < 2:
        raise ConfigError(f"window {window!r} selects fewer than two samples")
    values = traj.photon_proxy[mask, mode - 1]
    if np.any(values <= 0.0):
        raise ValueError(
            f"photon proxy of mode {mode} is nonpositive inside {window!r}; "
            "choose a window after the mode is populated")
    slope = np.polyfit(traj.times[mask], np.log(values), 1)[0]
    return float(slope)
