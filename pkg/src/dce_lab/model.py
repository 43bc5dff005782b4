"""Physical parameters and closed-form frequency relations for a cavity
with one harmonically oscillating mirror.

All quantities are in natural units (c = 1, hbar = 1) with the fundamental
cavity frequency omega1 as the default scale; SI enters only through
:class:`PhysicalEstimate`. The mirror trajectory is prescribed externally,
q(t) = L0 * exp(eps * sin(W t)), so the modulation depth eps = x_m / L0 and
the drive frequency W fully characterise the drive.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

LIGHT_SPEED = 2.998e8  # m/s, used only by SI-facing helpers


class ConfigError(ValueError):
    """Invalid model parameters or configuration file contents."""


@dataclass(frozen=True)
class ModelConfig:
    """Parameters of the modulated multimode cavity.

    Attributes
    ----------
    k_modes : number of retained cavity modes, labeled 1..k.
    n_order : maximum power of the modulation depth kept in the expansion.
    epsilon : modulation depth, maximum mirror displacement over cavity
        length; must lie in (0, 1) for the perturbative treatment.
    omega1 : unperturbed fundamental frequency (sets the time unit).
    kappa : per-mode damping rates; uniform damping is the usual choice.
    drive_omega : mirror frequency, or ``None`` to place the drive exactly
        on the order-n resonance 2*omega1_shifted/n.
    """

    k_modes: int
    n_order: int
    epsilon: float
    omega1: float = 1.0
    kappa: tuple[float, ...] = field(default=None)  # type: ignore[assignment]
    drive_omega: float | None = None

    def __post_init__(self):
        if self.k_modes < 1:
            raise ConfigError(f"k_modes must be >= 1, got {self.k_modes}")
        if self.n_order < 1:
            raise ConfigError(f"n_order must be >= 1, got {self.n_order}")
        # epsilon == 0 is allowed as the degenerate no-drive case
        if not 0.0 <= self.epsilon < 1.0:
            raise ConfigError(f"epsilon must lie in [0, 1), got {self.epsilon}")
        if self.omega1 <= 0.0:
            raise ConfigError(f"omega1 must be > 0, got {self.omega1}")
        if self.kappa is None:
            object.__setattr__(self, "kappa", (0.0,) * self.k_modes)
        else:
            object.__setattr__(self, "kappa", tuple(float(x) for x in self.kappa))
        if len(self.kappa) != self.k_modes:
            raise ConfigError(
                f"kappa has {len(self.kappa)} entries for {self.k_modes} modes"
            )
        if any(x < 0.0 for x in self.kappa):
            raise ConfigError("damping rates must be >= 0")
        if self.drive_omega is not None and self.drive_omega <= 0.0:
            raise ConfigError(f"drive_omega must be > 0, got {self.drive_omega}")
        if self.k_modes < self.n_order:
            warnings.warn(
                f"k_modes={self.k_modes} < n_order={self.n_order}: the resonant "
                "mode content at this order is usually studied with k >= n",
                stacklevel=2,
            )

    @classmethod
    def create(cls, k_modes, n_order, epsilon, omega1=1.0, kappa=0.0,
               drive_omega=None) -> "ModelConfig":
        """Build a config, broadcasting a scalar ``kappa`` over all modes."""
        if isinstance(kappa, (int, float)):
            kappa = (float(kappa),) * k_modes
        return cls(k_modes=k_modes, n_order=n_order, epsilon=float(epsilon),
                   omega1=float(omega1), kappa=tuple(kappa),
                   drive_omega=drive_omega)

    @property
    def omega1_shifted(self) -> float:
        return shifted_frequency(self.omega1, self.epsilon, self.n_order)

    @property
    def is_resonant(self) -> bool:
        return self.drive_omega is None

    @property
    def drive(self) -> float:
        """Resolved drive frequency (explicit value or the order-n resonance)."""
        if self.drive_omega is not None:
            return self.drive_omega
        return resonant_drive(self.omega1_shifted, self.n_order)

    def as_dict(self) -> dict:
        return {
            "k_modes": self.k_modes,
            "n_order": self.n_order,
            "epsilon": self.epsilon,
            "omega1": self.omega1,
            "kappa": list(self.kappa),
            "drive_omega": "resonant" if self.drive_omega is None else self.drive_omega,
        }


@dataclass(frozen=True)
class PhysicalEstimate:
    """SI-unit cavity data for back-of-envelope feasibility numbers."""

    cavity_length: float  # L0 in meters
    mech_omega: float     # mirror angular frequency in rad/s
    light_speed: float = LIGHT_SPEED

    def __post_init__(self):
        if self.cavity_length <= 0.0:
            raise ConfigError("cavity_length must be > 0")
        if self.mech_omega <= 0.0:
            raise ConfigError("mech_omega must be > 0")
        if self.light_speed <= 0.0:
            raise ConfigError("light_speed must be > 0")


def mirror_position(epsilon: float, drive_omega: float, t: float,
                    L0: float = 1.0) -> float:
    """Mirror position q(t) = L0 * exp(eps * sin(W t))."""
    if L0 <= 0.0:
        raise ConfigError("L0 must be > 0")
    return L0 * math.exp(epsilon * math.sin(drive_omega * t))


def mirror_log_velocity(epsilon: float, drive_omega: float, t: float) -> float:
    """Logarithmic mirror velocity qdot/q = eps * W * cos(W t).

    This is the purely harmonic drive factor multiplying the squeezing and
    scattering operators in the equations of motion.
    """
    return epsilon * drive_omega * math.cos(drive_omega * t)


def unperturbed_frequency(mode_index: int, omega1: float) -> float:
    """Frequency of mode j for the unperturbed cavity: equally spaced, j*omega1."""
    if mode_index < 1:
        raise ConfigError(f"mode_index must be >= 1, got {mode_index}")
    return mode_index * omega1


def shifted_frequency(omega1: float, epsilon: float, n_order: int) -> float:
    """Effective fundamental frequency including the time-averaged modulation.

    The average of the modulated frequency over a drive period produces a
    truncated series shift,

        omega1_shifted = omega1/2 * (1 + sum_{l=0..n} eps^(2l) / (l!)^2),

    which reduces to omega1 at eps = 0. Higher-mode shifted frequencies
    remain equally spaced: j * omega1_shifted.
    """
    if n_order < 0:
        raise ConfigError(f"n_order must be >= 0, got {n_order}")
    acc = 0.0
    for l in range(n_order + 1):
        acc += epsilon ** (2 * l) / math.factorial(l) ** 2
    return 0.5 * (1.0 + acc) * omega1


def resonant_drive(omega1_shifted: float, n_order: int) -> float:
    """Drive frequency on the order-n resonance: W = 2*omega1_shifted/n."""
    if n_order < 1:
        raise ConfigError(f"n_order must be >= 1, got {n_order}")
    return 2.0 * omega1_shifted / n_order


def coupling_strengths(epsilon: float, omega1: float) -> tuple[float, float]:
    """Equivalent optomechanical single-photon couplings (linear, quadratic)."""
    return epsilon * omega1, 0.5 * epsilon ** 2 * omega1


def epsilon_max(estimate: PhysicalEstimate) -> float:
    """Relativistic ceiling on the modulation depth, c / (W * L0)."""
    return estimate.light_speed / (estimate.mech_omega * estimate.cavity_length)


# -- plain-text key-value configuration files --------------------------------

_CONFIG_KEYS = ("k_modes", "n_order", "epsilon", "omega1", "kappa", "drive_omega")


def save_config(config: ModelConfig, path) -> None:
    lines = []
    d = config.as_dict()
    for key in _CONFIG_KEYS:
        value = d[key]
        if key == "kappa":
            value = ",".join(format(x, ".17g") for x in value)
        elif isinstance(value, float):
            value = format(value, ".17g")
        lines.append(f"{key} = {value}")
    with open(path, "w", newline="") as fh:
        fh.write("\n".join(lines) + "\n")


def load_config(path) -> ModelConfig:
    """Parse a key-value config file; raises ConfigError with line diagnostics."""
    raw: dict[str, str] = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            stripped = line.split("#", 1)[0].strip()
            if not stripped:
                continue
            if "=" not in stripped:
                raise ConfigError(f"{path}:{lineno}: expected 'key = value', got {line!r}")
            key, _, value = stripped.partition("=")
            key = key.strip()
            if key not in _CONFIG_KEYS:
                raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
            if key in raw:
                raise ConfigError(f"{path}:{lineno}: duplicate key {key!r}")
            raw[key] = value.strip()

    def need(key):
        if key not in raw:
            raise ConfigError(f"{path}: missing required key {key!r}")
        return raw[key]

    def parse_num(key, text, cast):
        try:
            return cast(text)
        except ValueError as exc:
            raise ConfigError(f"{path}: key {key!r}: {exc}") from None

    k_modes = parse_num("k_modes", need("k_modes"), int)
    n_order = parse_num("n_order", need("n_order"), int)
    epsilon = parse_num("epsilon", need("epsilon"), float)
    omega1 = parse_num("omega1", raw.get("omega1", "1.0"), float)

    kappa_text = raw.get("kappa", "0.0")
    parts = [p for p in kappa_text.split(",") if p.strip()]
    kappa = tuple(parse_num("kappa", p.strip(), float) for p in parts)
    if len(kappa) == 1:
        kappa = kappa * k_modes

    drive_text = raw.get("drive_omega", "resonant")
    drive = None if drive_text.lower() == "resonant" else parse_num(
        "drive_omega", drive_text, float)

    try:
        return ModelConfig(k_modes=k_modes, n_order=n_order, epsilon=epsilon,
                           omega1=omega1, kappa=kappa, drive_omega=drive)
    except ConfigError as exc:
        raise ConfigError(f"{path}: {exc}") from None
