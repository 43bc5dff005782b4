"""Symbolic generation of the expanded multimode equations of motion.

Every right-hand-side contribution to d<a_i>/dt is one :class:`EomTerm`
with an exact coefficient (Gaussian rational times an optional square-root
radical, in units of omega1 or of the drive frequency), an integer power of
the modulation depth, and two integer phase indices: the drive harmonic m
(factor exp(i*m*W*t)) and the slow rotating-frame index p (factor
exp(i*p*omega1_shifted*t)). Exact integer phase bookkeeping is what makes
the resonance filter in :mod:`dce_lab.stability` an exact integer test.

The generator composes three truncated series: the frequency modulation
exp(-x) with x = eps*sin(W t), the parity-split dressing of the mode
operators (cosh(x/2), sinh(x/2) weights), and the purely harmonic drive
factor qdot/q. Products are truncated at total order n. The intermode
scattering/pair terms carry the drive factor once and are therefore first
order; their operator structure is invariant under the dressing, so they
acquire no higher-order corrections.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Iterable

from .model import ConfigError, ModelConfig

MAX_ORDER = 6  # largest expansion order exercised anywhere downstream


def _reduce_radical(n: int) -> tuple[int, int]:
    """Split n = s^2 * r with r squarefree; returns (s, r)."""
    if n < 1:
        raise ValueError(f"radical must be a positive integer, got {n}")
    s, r = 1, n
    d = 2
    while d * d <= r:
        while r % (d * d) == 0:
            r //= d * d
            s *= d
        d += 1
    return s, r


@dataclass(frozen=True)
class Coefficient:
    """Exact term coefficient: (re + i*im) * sqrt(radical) * unit.

    ``unit`` is one of ``"omega1"``, ``"Omega"`` (drive frequency) or
    ``"one"``; radicals are kept squarefree, with square parts folded into
    the rational factor.
    """

    re: Fraction
    im: Fraction
    radical: int = 1
    unit: str = "omega1"

    def __post_init__(self):
        if self.unit not in ("omega1", "Omega", "one"):
            raise ValueError(f"unknown unit {self.unit!r}")
        s, r = _reduce_radical(self.radical)
        if s != 1 or r != self.radical:
            object.__setattr__(self, "re", self.re * s)
            object.__setattr__(self, "im", self.im * s)
            object.__setattr__(self, "radical", r)
        if self.re == 0 and self.im == 0:
            object.__setattr__(self, "radical", 1)

    @classmethod
    def real(cls, value, radical=1, unit="omega1") -> "Coefficient":
        return cls(Fraction(value), Fraction(0), radical, unit)

    @classmethod
    def imag(cls, value, radical=1, unit="omega1") -> "Coefficient":
        return cls(Fraction(0), Fraction(value), radical, unit)

    def is_zero(self) -> bool:
        return self.re == 0 and self.im == 0

    def conjugate(self) -> "Coefficient":
        return Coefficient(self.re, -self.im, self.radical, self.unit)

    def __neg__(self) -> "Coefficient":
        return Coefficient(-self.re, -self.im, self.radical, self.unit)

    def __add__(self, other: "Coefficient") -> "Coefficient":
        if (self.radical, self.unit) != (other.radical, other.unit):
            raise ValueError("cannot add coefficients with different radical/unit")
        return Coefficient(self.re + other.re, self.im + other.im,
                           self.radical, self.unit)

    def scale(self, factor) -> "Coefficient":
        f = Fraction(factor)
        return Coefficient(self.re * f, self.im * f, self.radical, self.unit)

    def times_i(self) -> "Coefficient":
        return Coefficient(-self.im, self.re, self.radical, self.unit)

    def mul_rational_complex(self, re, im) -> "Coefficient":
        re, im = Fraction(re), Fraction(im)
        return Coefficient(self.re * re - self.im * im,
                           self.re * im + self.im * re,
                           self.radical, self.unit)

    def value(self, omega1: float, drive: float) -> complex:
        unit = {"omega1": omega1, "Omega": drive, "one": 1.0}[self.unit]
        root = math.sqrt(self.radical)
        return complex(float(self.re), float(self.im)) * root * unit

    def __str__(self) -> str:
        parts = []
        if self.re != 0:
            parts.append(str(self.re))
        if self.im != 0:
            sign = "+" if self.im > 0 and parts else ""
            parts.append(f"{sign}{self.im}i")
        body = "".join(parts) or "0"
        if self.re != 0 and self.im != 0:
            body = f"({body})"
        if self.radical != 1:
            body += f"*sqrt({self.radical})"
        if self.unit == "omega1":
            body += "*w1"
        elif self.unit == "Omega":
            body += "*W"
        return body


@dataclass(frozen=True)
class OperatorRef:
    """A mode amplitude <a_mode> (dagger=False) or its conjugate."""

    mode: int
    dagger: bool = False

    def __str__(self) -> str:
        return f"a{self.mode}^+" if self.dagger else f"a{self.mode}"


@dataclass(frozen=True)
class EomTerm:
    """One term of d<a_target>/dt: coeff * eps^l * e^{i m W t} * e^{i p wt t} * source."""

    target_mode: int
    source: OperatorRef
    coeff: Coefficient
    eps_power: int
    harmonic: int
    slow_phase: int

    def conjugated(self) -> "EomTerm":
        """Image of this term in the adjoint equation d<a_target>*/dt."""
        return EomTerm(
            target_mode=self.target_mode,
            source=OperatorRef(self.source.mode, not self.source.dagger),
            coeff=self.coeff.conjugate(),
            eps_power=self.eps_power,
            harmonic=-self.harmonic,
            slow_phase=-self.slow_phase,
        )

    def sort_key(self):
        return (self.target_mode, self.eps_power, self.source.mode,
                self.source.dagger, self.harmonic, self.slow_phase,
                self.coeff.unit, self.coeff.radical)

    def group_key(self):
        return (self.target_mode, self.source.mode, self.source.dagger,
                self.eps_power, self.harmonic, self.slow_phase,
                self.coeff.unit, self.coeff.radical)


def combine_terms(terms: Iterable[EomTerm]) -> tuple[EomTerm, ...]:
    """Sum coefficients of like terms, drop zeros, sort canonically."""
    acc: dict[tuple, EomTerm] = {}
    for term in terms:
        key = term.group_key()
        if key in acc:
            acc[key] = replace(acc[key], coeff=acc[key].coeff + term.coeff)
        else:
            acc[key] = term
    kept = [t for t in acc.values() if not t.coeff.is_zero()]
    return tuple(sorted(kept, key=EomTerm.sort_key))


@dataclass(frozen=True)
class TermSystem:
    """The generated equations for (<a_1>, ..., <a_k>) plus diagonal damping.

    Only the k annihilation-channel equations are stored; the adjoint
    equations follow from :meth:`EomTerm.conjugated` and together they close
    the first-moment dynamics.
    """

    config: ModelConfig
    terms: tuple[EomTerm, ...]
    damping: tuple[float, ...]  # the -kappa_i/2 diagonal entries

    def canonical(self) -> "TermSystem":
        return replace(self, terms=combine_terms(self.terms))

    def max_phase_frequency(self) -> float:
        """Largest |m*W + p*omega1_shifted| over all terms (0 if none)."""
        drive = self.config.drive
        ws = self.config.omega1_shifted
        freqs = [abs(t.harmonic * drive + t.slow_phase * ws) for t in self.terms]
        return max(freqs, default=0.0)


# -- elementary series --------------------------------------------------------


def g_coupling(k_idx: int, j_idx: int) -> Fraction:
    """Intermode coupling weight (-1)^(k+j) * 2kj / (j^2 - k^2); zero on the diagonal."""
    if k_idx < 1 or j_idx < 1:
        raise ConfigError("mode indices must be >= 1")
    if k_idx == j_idx:
        return Fraction(0)
    sign = -1 if (k_idx + j_idx) % 2 else 1
    return Fraction(sign * 2 * k_idx * j_idx, j_idx * j_idx - k_idx * k_idx)


def sin_power_harmonics(l: int) -> dict[int, tuple[Fraction, Fraction]]:
    """Exact harmonics of sin(x)^l: maps m to (re, im) with sin^l = sum c_m e^{imx}.

    The harmonics run over m in {-l, -l+2, ..., l}; coefficients are
    Gaussian rationals from expanding ((e^{ix} - e^{-ix}) / 2i)^l.
    """
    if l < 0:
        raise ConfigError("power must be >= 0")
    # 1/(2i)^l = (-i)^l / 2^l; (-i)^l cycles through 1, -i, -1, i
    cycle = [(Fraction(1), Fraction(0)), (Fraction(0), Fraction(-1)),
             (Fraction(-1), Fraction(0)), (Fraction(0), Fraction(1))]
    base_re, base_im = cycle[l % 4]
    scale = Fraction(1, 2 ** l)
    out: dict[int, tuple[Fraction, Fraction]] = {}
    for r in range(l + 1):
        m = 2 * r - l
        c = Fraction(math.comb(l, r)) * scale
        if (l - r) % 2:
            c = -c
        out[m] = (c * base_re, c * base_im)
    return out


def expand_frequency(n_order: int) -> list[Fraction]:
    """Coefficients [1, -1, 1/2, ...] of exp(-x) truncated at x^n."""
    if n_order < 1:
        raise ConfigError("n_order must be >= 1")
    return [Fraction((-1) ** l, math.factorial(l)) for l in range(n_order + 1)]


def expand_operator(n_order: int) -> tuple[list[Fraction], list[Fraction]]:
    """Parity-split dressing weights 1/(2^l l!) of the mode operators.

    Returns (even, odd) coefficient lists over x^l: the even part weights
    the annihilation operator, the odd part the creation operator.
    """
    if n_order < 1:
        raise ConfigError("n_order must be >= 1")
    even = [Fraction(1, 2 ** l * math.factorial(l)) if l % 2 == 0 else Fraction(0)
            for l in range(n_order + 1)]
    odd = [Fraction(1, 2 ** l * math.factorial(l)) if l % 2 == 1 else Fraction(0)
           for l in range(n_order + 1)]
    return even, odd


def _poly_mul(a: list[Fraction], b: list[Fraction], n: int) -> list[Fraction]:
    """Product of coefficient lists truncated at degree n."""
    out = [Fraction(0)] * (n + 1)
    for i, ai in enumerate(a):
        if ai == 0 or i > n:
            continue
        for j, bj in enumerate(b):
            if i + j > n:
                break
            out[i + j] += ai * bj
    return out


def modulation_series(n_order: int) -> list[Fraction]:
    """Diagonal-channel series N(x) = truncated exp(-x) * (C^2 + S^2).

    C and S are the even/odd operator dressing series; the product equals
    (1 + exp(-2x))/2 truncated at x^n. N - 1 drives both the diagonal and
    the pair-creation channel of each mode.
    """
    freq = expand_frequency(n_order)
    even, odd = expand_operator(n_order)
    dress = [Fraction(0)] * (n_order + 1)
    for i, coeff in enumerate(_poly_mul(even, even, n_order)):
        dress[i] += coeff
    for i, coeff in enumerate(_poly_mul(odd, odd, n_order)):
        dress[i] += coeff
    return _poly_mul(freq, dress, n_order)


def frame_shift_series(n_order: int) -> dict[int, Fraction]:
    """Per-mode frame offset (omega1_shifted - omega1)/omega1 by eps power.

    Equals (1/2) * sum_{l>=1} eps^(2l)/(l!)^2 truncated consistently with
    the expansion order; used to cancel the DC part of the diagonal channel.
    """
    out: dict[int, Fraction] = {}
    for l in range(1, n_order + 1):
        out[2 * l] = Fraction(1, 2 * math.factorial(l) ** 2)
    return out


def generate_eom(config: ModelConfig) -> TermSystem:
    """Generate the full rotating-frame term system for d<a_i>/dt, i = 1..k.

    Per mode m the diagonal channel (source a_m) and the pair channel
    (source a_m^+, slow phase 2m) share the series -i*omega_m*(N(x) - 1);
    the DC harmonic of the diagonal channel is cancelled exactly by the
    shifted-frequency frame within the kept orders. The pair channel
    additionally carries the drive-velocity squeeze -W/4 at harmonics +-1,
    and modes j != m enter through first-order scattering and pair terms
    with exact radical coefficients sqrt(mj)/(j -+ m).

    Raises ConfigError for unsupported expansion orders.
    """
    n = config.n_order
    if n > MAX_ORDER:
        raise ConfigError(f"n_order={n} unsupported (max {MAX_ORDER})")
    k = config.k_modes

    series = modulation_series(n)  # N(x) coefficients, series[0] == 1
    frame = frame_shift_series(n)

    terms: list[EomTerm] = []
    for m in range(1, k + 1):
        # single-mode channels: -i * omega_m * (N(x) - 1) on both a_m and
        # a_m^+ e^{2 i m wt t}; omega_m = m * omega1 folds into the rational
        for l in range(1, n + 1):
            nu = series[l]
            if nu == 0:
                continue
            base = Coefficient.imag(-nu * m, unit="omega1")
            for h, (cre, cim) in sin_power_harmonics(l).items():
                coeff = base.mul_rational_complex(cre, cim)
                if coeff.is_zero():
                    continue
                if h != 0:
                    terms.append(EomTerm(m, OperatorRef(m, False), coeff, l, h, 0))
                terms.append(EomTerm(m, OperatorRef(m, True), coeff, l, h, 2 * m))
        # DC bookkeeping on the diagonal: the frame shift i*(wt_m - w_m)
        # cancels the h == 0 part of the series term by term; any residual
        # sits above the truncation order and is dropped. Emit the exact
        # difference so the cancellation is auditable rather than assumed.
        for l in range(1, n + 1):
            nu = series[l]
            if nu == 0:
                continue
            dc = sin_power_harmonics(l).get(0)
            if dc is None:
                continue
            coeff = Coefficient.imag(-nu * m, unit="omega1").mul_rational_complex(*dc)
            residual = coeff + Coefficient.imag(Fraction(m) * frame.get(l, Fraction(0)),
                                                unit="omega1")
            if not residual.is_zero() and l <= n:
                terms.append(EomTerm(m, OperatorRef(m, False), residual, l, 0, 0))
        # drive-velocity squeeze: -(qdot/2q) a_m^+ = -(eps W /4)(e^{iWt}+e^{-iWt}) a_m^+
        for h in (+1, -1):
            terms.append(EomTerm(
                m, OperatorRef(m, True),
                Coefficient.real(Fraction(-1, 4), unit="Omega"), 1, h, 2 * m))
        # intermode scattering and pair creation, first order in the drive
        for j in range(1, k + 1):
            if j == m:
                continue
            sign = -1 if (m + j) % 2 else 1
            scatter = Coefficient.real(Fraction(sign, 2 * (j - m)), radical=m * j,
                                       unit="Omega")
            pair = Coefficient.real(Fraction(-sign, 2 * (j + m)), radical=m * j,
                                    unit="Omega")
            for h in (+1, -1):
                terms.append(EomTerm(m, OperatorRef(j, False), scatter, 1, h, m - j))
                terms.append(EomTerm(m, OperatorRef(j, True), pair, 1, h, m + j))

    system = TermSystem(config=config, terms=tuple(terms),
                        damping=tuple(-x / 2.0 for x in config.kappa))
    return system.canonical()


# -- numeric evaluation -------------------------------------------------------


def evaluate_rhs(system: TermSystem, t: float, amplitudes) -> list[complex]:
    """Evaluate d<a_i>/dt at time t for the k-vector ``amplitudes``.

    Conjugate sources read conj(amplitudes); damping is included. Intended
    for oracle comparisons, not for the integrators.
    """
    cfg = system.config
    drive = cfg.drive
    ws = cfg.omega1_shifted
    eps = cfg.epsilon
    out = [system.damping[i] * amplitudes[i] for i in range(cfg.k_modes)]
    for term in system.terms:
        src = amplitudes[term.source.mode - 1]
        if term.source.dagger:
            src = src.conjugate()
        phase = term.harmonic * drive + term.slow_phase * ws
        value = (term.coeff.value(cfg.omega1, drive) * eps ** term.eps_power
                 * complex(math.cos(phase * t), math.sin(phase * t)))
        out[term.target_mode - 1] += value * src
    return out


# -- serialization and pretty printing ---------------------------------------


def system_to_json(system: TermSystem) -> str:
    cfg = system.config
    payload = {
        "config": cfg.as_dict(),
        "resonance": {
            "drive_omega": cfg.drive,
            "omega1_shifted": cfg.omega1_shifted,
        },
        "damping": list(system.damping),
        "terms": [
            {
                "target": t.target_mode,
                "mode": t.source.mode,
                "dagger": t.source.dagger,
                "coeff_re": str(t.coeff.re),
                "coeff_im": str(t.coeff.im),
                "radical": t.coeff.radical,
                "unit": t.coeff.unit,
                "eps_power": t.eps_power,
                "harmonic_m": t.harmonic,
                "slow_p": t.slow_phase,
            }
            for t in system.terms
        ],
    }
    return json.dumps(payload, indent=2)


def system_from_json(text: str) -> TermSystem:
    payload = json.loads(text)
    cfg_d = dict(payload["config"])
    drive = cfg_d.pop("drive_omega")
    cfg = ModelConfig(
        k_modes=cfg_d["k_modes"], n_order=cfg_d["n_order"],
        epsilon=cfg_d["epsilon"], omega1=cfg_d["omega1"],
        kappa=tuple(cfg_d["kappa"]),
        drive_omega=None if drive == "resonant" else float(drive),
    )
    terms = tuple(
        EomTerm(
            target_mode=t["target"],
            source=OperatorRef(t["mode"], t["dagger"]),
            coeff=Coefficient(Fraction(t["coeff_re"]), Fraction(t["coeff_im"]),
                              t["radical"], t["unit"]),
            eps_power=t["eps_power"],
            harmonic=t["harmonic_m"],
            slow_phase=t["slow_p"],
        )
        for t in payload["terms"]
    )
    return TermSystem(config=cfg, terms=terms,
                      damping=tuple(payload["damping"]))


def _phase_str(term: EomTerm) -> str:
    chunks = []
    if term.harmonic:
        chunks.append(f"e^({term.harmonic:+d}i W t)")
    if term.slow_phase:
        chunks.append(f"e^({term.slow_phase:+d}i w~ t)")
    return " ".join(chunks)


def pretty_print(system: TermSystem) -> str:
    """Human-readable listing of the equations, one line per term."""
    lines = []
    for m in range(1, system.config.k_modes + 1):
        lines.append(f"d<a_{m}>/dt =")
        lines.append(f"    {system.damping[m - 1]:+g} <a_{m}>")
        for term in system.terms:
            if term.target_mode != m:
                continue
            bits = [f"eps^{term.eps_power}", str(term.coeff)]
            phase = _phase_str(term)
            if phase:
                bits.append(phase)
            bits.append(f"<{term.source}>")
            lines.append("    + " + " * ".join(bits))
        lines.append("")
    return "\n".join(lines)
