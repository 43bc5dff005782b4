"""Resonance filtering, linear-system assembly, and stability analysis.

On the order-n resonance the drive frequency satisfies W = 2*wt/n (wt being
the shifted fundamental frequency), so a term with drive harmonic m and slow
index p has total phase (m*W + p*wt) * t = (2m + pn) * (wt/n) * t. Keeping
exactly the stationary terms is therefore the integer test 2m + pn == 0.

The filtered system is linear time-invariant; its maximal eigenvalue real
part decides whether the no-photon state is dynamically stable. For the
fundamental-mode pair block the gain is eps^n * omega1 / (2 * n!), giving
the closed-form boundary omega1/kappa1 = n!/eps^n that the sweep reproduces
cell by cell.
"""

from __future__ import annotations

import math
import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .model import ConfigError, ModelConfig, resonant_drive
from .expansion import TermSystem, generate_eom

_RESONANCE_RTOL = 1e-12


@dataclass(frozen=True)
class LinearSystem:
    """Constant matrix M with d/dt (a_1..a_k, a_1*..a_k*) = M (same vector)."""

    matrix: np.ndarray
    config: ModelConfig
    resonance_order: int | None = None  # set when built by the resonance filter

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def k(self) -> int:
        return self.dim // 2


@dataclass(frozen=True)
class TimeDependentSystem:
    """Term-resolved M(t): sparse triplets with one complex frequency each.

    ``matrix_at(t)`` materialises the dense matrix; the triplet arrays drive
    the oscillatory integrator without rebuilding dense matrices per step.
    """

    rows: np.ndarray    # int64
    cols: np.ndarray    # int64
    amps: np.ndarray    # complex128, coefficient * eps^l (phases excluded)
    freqs: np.ndarray   # float64, m*W + p*wt per entry
    config: ModelConfig

    @property
    def dim(self) -> int:
        return 2 * self.config.k_modes

    def matrix_at(self, t: float) -> np.ndarray:
        m = np.zeros((self.dim, self.dim), dtype=np.complex128)
        values = self.amps * np.exp(1j * self.freqs * t)
        np.add.at(m, (self.rows, self.cols), values)
        return m

    def max_phase_frequency(self) -> float:
        return float(np.max(np.abs(self.freqs))) if self.freqs.size else 0.0


@dataclass(frozen=True)
class StabilityResult:
    lambda_max: float
    eigenvalues: tuple[complex, ...]
    unstable: bool
    boundary_ratio: float


class EigensolverError(RuntimeError):
    """Eigenvalue computation failed; the offending matrix is attached."""

    def __init__(self, message: str, matrix: np.ndarray):
        super().__init__(f"{message}\nmatrix =\n{matrix!r}")
        self.matrix = matrix


def _on_resonance(config: ModelConfig) -> bool:
    if config.is_resonant:
        return True
    target = resonant_drive(config.omega1_shifted, config.n_order)
    return abs(config.drive / target - 1.0) <= _RESONANCE_RTOL


def _require_resonant(config: ModelConfig) -> None:
    if not _on_resonance(config):
        target = resonant_drive(config.omega1_shifted, config.n_order)
        raise ConfigError(
            f"resonance filter requires the order-{config.n_order} resonant drive "
            f"{target!r}, got {config.drive!r}"
        )


def rwa_filter(system: TermSystem, n_order: int | None = None) -> TermSystem:
    """Keep exactly the terms with identically vanishing total phase.

    With the drive on the order-n resonance this is the exact integer test
    2m + pn == 0 on the harmonic and slow-phase indices; no floating-point
    phases are involved. Idempotent by construction.
    """
    n = system.config.n_order if n_order is None else n_order
    _require_resonant(system.config)
    kept = tuple(t for t in system.terms if 2 * t.harmonic + t.slow_phase * n == 0)
    return replace(system, terms=kept)


def _term_triplets(system: TermSystem):
    """(row, col, amplitude, frequency) for all 2k equations incl. damping."""
    cfg = system.config
    k = cfg.k_modes
    n = cfg.n_order
    drive = cfg.drive
    ws = cfg.omega1_shifted
    eps = cfg.epsilon
    on_res = _on_resonance(cfg)
    rows, cols, amps, freqs = [], [], [], []
    for term in system.terms:
        value = term.coeff.value(cfg.omega1, drive) * eps ** term.eps_power
        if on_res:
            # exact zero for stationary terms: m*W + p*wt == (2m + pn) * wt/n
            freq = (2 * term.harmonic + term.slow_phase * n) * (ws / n)
        else:
            freq = term.harmonic * drive + term.slow_phase * ws
        col = term.source.mode - 1 + (k if term.source.dagger else 0)
        rows.append(term.target_mode - 1)
        cols.append(col)
        amps.append(value)
        freqs.append(freq)
        # adjoint equation: conjugate coefficient, flipped operator, negated phase
        ccol = term.source.mode - 1 + (0 if term.source.dagger else k)
        rows.append(k + term.target_mode - 1)
        cols.append(ccol)
        amps.append(value.conjugate())
        freqs.append(-freq)
    for i, d in enumerate(system.damping):
        for row in (i, k + i):
            rows.append(row)
            cols.append(row)
            amps.append(complex(d))
            freqs.append(0.0)
    return (np.asarray(rows, dtype=np.int64), np.asarray(cols, dtype=np.int64),
            np.asarray(amps, dtype=np.complex128), np.asarray(freqs, dtype=np.float64))


def assemble_linear_system(system: TermSystem):
    """Assemble the stacked first-moment system from a term system.

    Returns a :class:`LinearSystem` when every term has identically zero
    phase (the post-filter case) and a :class:`TimeDependentSystem`
    otherwise. The lower half of the stacked equations is generated from
    the conjugation closure, so M always has the block structure
    [[A, B], [conj(B), conj(A)]].
    """
    rows, cols, amps, freqs = _term_triplets(system)
    static = all(2 * t.harmonic + t.slow_phase * system.config.n_order == 0
                 for t in system.terms) and _on_resonance(system.config)
    if not static:
        return TimeDependentSystem(rows=rows, cols=cols, amps=amps, freqs=freqs,
                                   config=system.config)
    dim = 2 * system.config.k_modes
    m = np.zeros((dim, dim), dtype=np.complex128)
    np.add.at(m, (rows, cols), amps)
    return LinearSystem(matrix=m, config=system.config,
                        resonance_order=system.config.n_order)


def build_rwa_system(config: ModelConfig) -> LinearSystem:
    """Generate, filter, and assemble the resonant system for a config."""
    ls = assemble_linear_system(rwa_filter(generate_eom(config)))
    assert isinstance(ls, LinearSystem)
    return ls


def resonant_gain(n_order: int, epsilon: float, omega1: float = 1.0) -> float:
    """Parametric gain of the fundamental-mode pair block, eps^n*omega1/(2*n!)."""
    return epsilon ** n_order * omega1 / (2.0 * math.factorial(n_order))


def lambda_max_closed_form(n_order: int, epsilon: float, omega1: float,
                           kappa1: float) -> float:
    """Closed-form maximal eigenvalue of the resonant system."""
    return resonant_gain(n_order, epsilon, omega1) - 0.5 * kappa1


def resonant_block_system(config: ModelConfig) -> LinearSystem:
    """The order-n resonant model: fundamental pair block plus pure decay.

    This is the analytical post-filter system underlying the closed-form
    eigenvalue and the stability boundary: the only off-diagonal content is
    the pair coupling between <a_1> and <a_1>* with gain
    eps^n*omega1/(2*n!) and phase (-i)^(n+1) inherited from the n-th
    harmonic of the modulation. The full generated-and-filtered system
    coincides with it except at expansion orders 1 and 2, where additional
    first-order terms are stationary as well (see tests).
    """
    n = config.n_order
    k = config.k_modes
    dim = 2 * k
    m = np.zeros((dim, dim), dtype=np.complex128)
    for i, kap in enumerate(config.kappa):
        m[i, i] = m[k + i, k + i] = -0.5 * kap
    gain = resonant_gain(n, config.epsilon, config.omega1)
    coupling = -1j * (-1j) ** n * gain
    m[0, k] = coupling
    m[k, 0] = np.conj(coupling)
    return LinearSystem(matrix=m, config=config, resonance_order=n)


def _closed_form_candidates(ls: LinearSystem) -> list[float] | None:
    """Eigenvalue real parts via the 2x2 pair-block formula, if applicable.

    Applies when the only off-diagonal entries sit at (0, k) and (k, 0) and
    the diagonal is real: the block eigenvalues are diag +- |coupling| and
    every other row is pure decay.
    """
    m = ls.matrix
    k = ls.k
    off = m.copy()
    idx = np.diag_indices(ls.dim)
    off[idx] = 0.0
    mask = np.zeros_like(m, dtype=bool)
    mask[0, k] = mask[k, 0] = True
    if np.any(off[~mask] != 0):
        return None
    diag = m[idx]
    if np.any(np.abs(diag.imag) > 0):
        return None
    if m[0, 0] != m[k, k] or m[0, k] != np.conj(m[k, 0]):
        return None
    c = abs(m[0, k])
    reals = [float(m[0, 0].real) + c, float(m[0, 0].real) - c]
    reals += [float(diag[i].real) for i in range(ls.dim) if i not in (0, k)]
    return reals


def max_real_eigenvalue(ls: LinearSystem) -> StabilityResult:
    """Full spectrum of the constant system and the stability verdict.

    Uses the dense complex eigensolver; when the matrix has the pure
    resonant-block shape the closed-form 2x2 path is evaluated as well and
    any disagreement beyond rounding is reported as a solver failure.
    """
    try:
        eigenvalues = np.linalg.eigvals(ls.matrix)
    except np.linalg.LinAlgError as exc:
        raise EigensolverError(f"eigensolver failed: {exc}", ls.matrix) from exc
    lam = float(np.max(eigenvalues.real))
    closed = _closed_form_candidates(ls)
    if closed is not None:
        expected = max(closed)
        scale = max(abs(expected), float(np.max(np.abs(ls.matrix))), 1e-300)
        if abs(lam - expected) > 1e-12 * scale:
            raise EigensolverError(
                f"numeric lambda_max {lam!r} disagrees with closed form {expected!r}",
                ls.matrix)
    cfg = ls.config
    boundary = (stability_boundary(cfg.n_order, cfg.epsilon)
                if cfg.epsilon > 0.0 else math.inf)
    return StabilityResult(
        lambda_max=lam,
        eigenvalues=tuple(complex(z) for z in eigenvalues),
        unstable=lam > 0.0,
        boundary_ratio=boundary,
    )


def stability_boundary(n_order: int, epsilon: float) -> float:
    """Boundary value of omega1/kappa1 where the maximal eigenvalue vanishes.

    Points with larger omega1/kappa1 (weaker damping) are unstable.
    """
    if not 0.0 < epsilon < 1.0:
        raise ConfigError(f"epsilon must lie in (0, 1), got {epsilon}")
    return math.factorial(n_order) / epsilon ** n_order


@dataclass(frozen=True)
class SweepCell:
    epsilon: float
    ratio: float
    lambda_max: float
    unstable: bool
    error: str | None = None


def default_jobs() -> int:
    env = os.environ.get("DCE_LAB_JOBS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            warnings.warn(f"ignoring non-integer DCE_LAB_JOBS={env!r}", stacklevel=2)
    return min(4, os.cpu_count() or 1)


def sweep_stability(n_order: int, epsilon_grid, ratio_grid, omega1: float = 1.0,
                    jobs: int | None = None) -> list[SweepCell]:
    """Map the (eps, omega1/kappa1) plane to maximal eigenvalues.

    Cells are independent and evaluated by a worker pool; the returned rows
    follow grid order (outer eps, inner ratio) regardless of scheduling.
    The symbolic derivation is shared across cells: only the fundamental
    mode carries resonant content here, so the single-mode filtered system
    is assembled per cell with that cell's modulation depth and damping.
    Per-cell failures are recorded on the cell instead of aborting.
    """
    epsilon_grid = [float(e) for e in epsilon_grid]
    ratio_grid = [float(r) for r in ratio_grid]
    if not epsilon_grid or not ratio_grid:
        raise ConfigError("sweep grids must be nonempty")
    if any(not 0.0 <= e < 1.0 for e in epsilon_grid):
        raise ConfigError("sweep epsilon values must lie in [0, 1)")

    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        base_cfg = ModelConfig.create(k_modes=1, n_order=n_order,
                                      epsilon=epsilon_grid[0], omega1=omega1)
    filtered = rwa_filter(generate_eom(base_cfg))

    cells = [(e, r) for e in epsilon_grid for r in ratio_grid]

    def run_cell(cell):
        eps, ratio = cell
        try:
            kappa = omega1 / ratio
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                cfg = ModelConfig.create(k_modes=1, n_order=n_order, epsilon=eps,
                                         omega1=omega1, kappa=kappa)
            system = replace(filtered, config=cfg, damping=(-0.5 * kappa,))
            ls = assemble_linear_system(system)
            result = max_real_eigenvalue(ls)
            return SweepCell(epsilon=eps, ratio=ratio,
                             lambda_max=result.lambda_max,
                             unstable=result.unstable)
        except Exception as exc:  # recorded per cell, sweep continues
            return SweepCell(epsilon=eps, ratio=ratio, lambda_max=float("nan"),
                             unstable=False, error=str(exc))

    jobs = default_jobs() if jobs is None else max(1, jobs)
    if jobs == 1:
        return [run_cell(c) for c in cells]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(run_cell, cells))
