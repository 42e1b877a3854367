"""Modified Pierson-Moskowitz sea spectra and long-crested wave realizations."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

G = 9.81

# Wave frequency grid used for every simulated sea state (rad/s).
OMEGA_MIN = 0.05
OMEGA_MAX = 2.0
N_COMPONENTS = 500

TZ_PER_T1 = 0.9212


@dataclass(frozen=True)
class FrequencyGrid:
    """Discrete wave frequencies with their rectangle-rule bin widths."""

    omegas: np.ndarray
    d_omega: np.ndarray

    def __post_init__(self):
        omegas = np.asarray(self.omegas, dtype=float)
        d_omega = np.broadcast_to(np.asarray(self.d_omega, dtype=float), omegas.shape).copy()
        if omegas.ndim != 1 or omegas.size == 0:
            raise ValueError("frequency grid must be a non-empty 1-D array")
        if np.any(omegas <= 0) or np.any(np.diff(omegas) <= 0):
            raise ValueError("grid frequencies must be strictly positive and increasing")
        if np.any(d_omega <= 0):
            raise ValueError("bin widths must be positive")
        object.__setattr__(self, "omegas", omegas)
        object.__setattr__(self, "d_omega", d_omega)

    @classmethod
    def uniform(cls, lo: float = OMEGA_MIN, hi: float = OMEGA_MAX, n: int = N_COMPONENTS) -> "FrequencyGrid":
        omegas = np.linspace(lo, hi, n)
        step = (hi - lo) / (n - 1) if n > 1 else hi - lo
        return cls(omegas, np.full(n, step))

    def __len__(self) -> int:
        return self.omegas.size

    @property
    def wavenumbers(self) -> np.ndarray:
        return deep_water_wavenumber(self.omegas)


@dataclass(frozen=True)
class WaveSpectrum:
    grid: FrequencyGrid
    ordinates: np.ndarray  # m^2 s / rad
    h_s: float
    t_1: float

    def moment(self, n: int = 0) -> float:
        """Spectral moment by the same rectangle rule used for amplitudes."""
        return float(np.sum(self.grid.omegas**n * self.ordinates * self.grid.d_omega))

    @property
    def m0(self) -> float:
        return self.moment(0)


@dataclass(frozen=True)
class WaveRealization:
    grid: FrequencyGrid
    amplitudes: np.ndarray
    phases: np.ndarray
    wavenumbers: np.ndarray

    @property
    def m0(self) -> float:
        return float(np.sum(self.amplitudes**2) / 2.0)

    def scaled(self, factor: float) -> "WaveRealization":
        return WaveRealization(self.grid, self.amplitudes * factor, self.phases, self.wavenumbers)


def deep_water_wavenumber(omega):
    return np.asarray(omega, dtype=float) ** 2 / G


def zero_crossing_period(t_1: float) -> float:
    """Zero-crossing period of an MPM sea with mean period ``t_1``."""
    if not t_1 > 0:
        raise ValueError(f"mean wave period must be positive, got {t_1!r}")
    return TZ_PER_T1 * t_1


def mpm_coefficients(h_s: float, t_1: float) -> tuple[float, float]:
    """Return ``(A, B)`` of S(w) = A / w**5 * exp(-B / w**4)."""
    if not h_s > 0:
        raise ValueError(f"significant wave height must be positive, got {h_s!r}")
    w_z4 = (2.0 * np.pi / zero_crossing_period(t_1)) ** 4
    return h_s**2 / (4.0 * np.pi) * w_z4, w_z4 / np.pi


def mpm_spectrum(h_s: float, t_1: float, grid: FrequencyGrid | None = None) -> WaveSpectrum:
    grid = grid if grid is not None else FrequencyGrid.uniform()
    a, b = mpm_coefficients(h_s, t_1)
    w = grid.omegas
    ordinates = a / w**5 * np.exp(-b / w**4)
    return WaveSpectrum(grid, ordinates, float(h_s), float(t_1))


def realize_wave(spectrum: WaveSpectrum, seed) -> WaveRealization:
    """Draw one long-crested realization with uniform random phases.

    ``seed`` is anything accepted by :func:`numpy.random.default_rng`,
    including a ``SeedSequence``.
    """
    ordinates = np.asarray(spectrum.ordinates, dtype=float)
    if ordinates.shape != spectrum.grid.omegas.shape or np.any(ordinates < 0):
        raise ValueError("spectrum ordinates must be non-negative and match the grid")
    rng = np.random.default_rng(seed)
    phases = rng.uniform(0.0, 2.0 * np.pi, size=ordinates.size)
    amplitudes = np.sqrt(2.0 * ordinates * spectrum.grid.d_omega)
    return WaveRealization(spectrum.grid, amplitudes, phases, spectrum.grid.wavenumbers)


def wave_elevation(realization: WaveRealization, x_w, t):
    """Surface elevation at position ``x_w`` (m) and time(s) ``t`` (s).

    ``x_w`` and ``t`` broadcast against each other; the component axis is
    summed out.
    """
    x_w = np.asarray(x_w, dtype=float)
    t = np.asarray(t, dtype=float)
    x_b, t_b = np.broadcast_arrays(x_w, t)
    arg = (
        realization.wavenumbers * x_b[..., None]
        - realization.grid.omegas * t_b[..., None]
        + realization.phases
    )
    return np.sin(arg) @ realization.amplitudes
