"""
Reflection of single photons from a one-sided cavity holding a three-level atom.

All frequencies and rates are in units of the cavity damping rate kappa.
The formulas assume the atom is only virtually excited (large kappa); no
check is made that the chosen parameters actually sit in that regime.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace

import numpy as np

from .hilbert import PureState, QubitId, apply_diagonal_pair_gate

DEGENERATE_TOL = 1e-300


class GateMode(enum.Enum):
    IDEAL = "ideal"
    LOSSY = "lossy"


class Branch(enum.Enum):
    COUPLED = "coupled"
    EMPTY = "empty"


@dataclass(frozen=True)
class CavityParams:
    omega_c: float = 0.0
    omega_0: float = 0.0
    omega_p: float = -0.5
    kappa: float = 1.0
    gamma: float = 0.0
    g: float = 0.5

    def __post_init__(self):
        for name in ("omega_c", "omega_0", "omega_p", "kappa", "gamma", "g"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")
        if self.kappa <= 0:
            raise ValueError("kappa must be positive")
        if self.gamma < 0:
            raise ValueError("gamma must be nonnegative")
        if self.g < 0:
            raise ValueError("g must be nonnegative")

    @classmethod
    def operating_point(cls, gamma: float = 0.0) -> "CavityParams":
        """omega_0 = omega_c, omega_p = omega_c - kappa/2, g = kappa/2."""
        return cls(omega_c=0.0, omega_0=0.0, omega_p=-0.5, kappa=1.0, gamma=gamma, g=0.5)

    @classmethod
    def from_physical(cls, omega_c, omega_0, omega_p, kappa, gamma, g) -> "CavityParams":
        """Normalize physical values (any common unit) to units of kappa, offset from omega_c."""
        return cls(0.0, (omega_0 - omega_c) / kappa, (omega_p - omega_c) / kappa, 1.0, gamma / kappa, g / kappa)

    def with_(self, **kw) -> "CavityParams":
        return replace(self, **kw)


@dataclass(frozen=True)
class Reflection:
    r: complex
    phase: float
    magnitude: float

    @classmethod
    def from_complex(cls, r: complex) -> "Reflection":
        r = complex(r)
        # pin the branch cut so that -1 maps to +pi exactly
        phase = math.atan2(r.imag, r.real)
        if phase == -math.pi:
            phase = math.pi
        return cls(r, phase, abs(r))

    def as_dict(self) -> dict:
        return {"r_re": self.r.real, "r_im": self.r.imag, "phase": self.phase, "magnitude": self.magnitude}


@dataclass(frozen=True)
class PhasePair:
    phi: float
    phi0: float

    @property
    def theta_minus(self) -> float:
        return (self.phi0 - self.phi) / 2

    @property
    def theta_plus(self) -> float:
        return (self.phi - self.phi0) / 2


def _coupled_r(p: CavityParams, omega):
    cav = 1j * (p.omega_c - omega)
    atom = 1j * (p.omega_0 - omega) + p.gamma / 2
    num = (cav - p.kappa / 2) * atom + p.g**2
    den = (cav + p.kappa / 2) * atom + p.g**2
    return num, den


def _empty_r(p: CavityParams, omega):
    cav = 1j * (p.omega_c - omega)
    return (cav - p.kappa / 2) / (cav + p.kappa / 2)


def reflect_coupled(p: CavityParams) -> Reflection:
    num, den = _coupled_r(p, p.omega_p)
    if abs(den) < DEGENERATE_TOL:
        raise ValueError("degenerate cavity parameters: reflection denominator vanishes")
    r = num / den
    # exact values at the usual working point avoid 1e-17 imaginary residue
    return Reflection.from_complex(_snap(r))


def reflect_empty(p: CavityParams) -> Reflection:
    return Reflection.from_complex(_snap(_empty_r(p, p.omega_p)))


def _snap(r: complex) -> complex:
    re, im = r.real, r.imag
    if abs(re) < 1e-15 * max(abs(im), 1.0):
        re = 0.0
    if abs(im) < 1e-15 * max(abs(re), 1.0):
        im = 0.0
    return complex(re, im)


def faraday_phases(p: CavityParams) -> PhasePair:
    return PhasePair(reflect_coupled(p).phase, reflect_empty(p).phase)


@dataclass(frozen=True)
class FaradayGate:
    """Diagonal photon-atom gate; ``phases`` are ordered (L0, R0, L1, R1)."""

    phases: tuple[complex, complex, complex, complex]
    mode: GateMode

    @property
    def r_coupled(self) -> complex:
        return self.phases[0]

    @property
    def r_empty(self) -> complex:
        return self.phases[1]

    def matrix(self) -> np.ndarray:
        """4x4 diagonal in the (atom, photon) basis |0L>, |0R>, |1L>, |1R>."""
        return np.diag(np.array(self.phases, dtype=complex))

    def apply(self, state: PureState, photon_q: QubitId, atom_q: QubitId) -> PureState:
        # ordering (L0, R0, L1, R1) is atom-major
        return apply_diagonal_pair_gate(state, self.phases, atom_q, photon_q)


def faraday_gate(p: CavityParams, mode: GateMode = GateMode.IDEAL) -> FaradayGate:
    rc, re = reflect_coupled(p), reflect_empty(p)
    if mode is GateMode.IDEAL:
        c, e = _unit(rc.phase), _unit(re.phase)
    else:
        c, e = rc.r, re.r
    return FaradayGate((c, e, e, c), mode)


def _unit(phase: float) -> complex:
    # exact values for multiples of pi/2
    q = phase / (math.pi / 2)
    if abs(q - round(q)) < 1e-13:
        return (1 + 0j, 1j, -1 + 0j, -1j)[int(round(q)) % 4]
    return complex(math.cos(phase), math.sin(phase))


@dataclass(frozen=True)
class Pulse:
    samples: np.ndarray
    dt: float

    def __post_init__(self):
        s = np.array(self.samples, dtype=complex).reshape(-1)
        s.setflags(write=False)
        object.__setattr__(self, "samples", s)
        if self.dt <= 0:
            raise ValueError("dt must be positive")

    @property
    def duration(self) -> float:
        return len(self.samples) * self.dt

    @property
    def times(self) -> np.ndarray:
        return np.arange(len(self.samples)) * self.dt

    def energy(self) -> float:
        return float(np.sum(np.abs(self.samples) ** 2) * self.dt)

    def overlap(self, other: "Pulse") -> complex:
        return complex(np.vdot(self.samples, other.samples) * self.dt)


def gaussian_pulse(fwhm: float, window_factor: float = 8.0, n_samples: int = 8192) -> Pulse:
    """Normalized Gaussian envelope whose intensity |f|^2 has full width ``fwhm``.

    The sample window spans ``window_factor * fwhm`` with the peak centered,
    so the tails are negligible at the periodic boundary.
    """
    if fwhm <= 0 or window_factor <= 0:
        raise ValueError("fwhm and window_factor must be positive")
    window = fwhm * window_factor
    dt = window / n_samples
    t = np.arange(n_samples) * dt
    # |f|^2 = exp(-4 ln2 t^2 / fwhm^2)
    f = np.exp(-2 * math.log(2) * ((t - window / 2) / fwhm) ** 2).astype(complex)
    f /= np.sqrt(np.sum(np.abs(f) ** 2) * dt)
    return Pulse(f, dt)


def reflection_spectrum(p: CavityParams, omegas, branch: Branch = Branch.COUPLED) -> np.ndarray:
    """r(omega) on an array of probe frequencies, omega replacing omega_p."""
    omegas = np.asarray(omegas, dtype=float)
    if branch is Branch.EMPTY:
        return _empty_r(p, omegas)
    num, den = _coupled_r(p, omegas)
    if np.any(np.abs(den) < DEGENERATE_TOL):
        raise ValueError("degenerate cavity parameters: reflection denominator vanishes")
    return num / den


def reflect_pulse(p: CavityParams, pulse: Pulse, branch: Branch = Branch.COUPLED) -> Pulse:
    """Filter a pulse envelope (rotating at the carrier omega_p) through r(omega).

    The FFT is periodic over the sample window; pulses should decay well
    before the edges.
    """
    n = len(pulse.samples)
    if n == 0 or n & (n - 1):
        raise ValueError("pulse length must be a power of two")
    detuning = 2 * np.pi * np.fft.fftfreq(n, d=pulse.dt)
    # ifft synthesizes exp(+i w t) while fields rotate as exp(-i omega t):
    # bin w of the envelope sits at absolute frequency omega_p - w
    spectrum = np.fft.fft(pulse.samples)
    r = reflection_spectrum(p, p.omega_p - detuning, branch)
    return Pulse(np.fft.ifft(spectrum * r), pulse.dt)
