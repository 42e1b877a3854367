"""Noisy heave/pitch/roll time series for one sea-state scenario."""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .vessel import DOFS, VesselParams, frf_table
from .wave_model import FrequencyGrid, WaveRealization, mpm_spectrum, realize_wave

DURATION = 2400.0  # s
N_STEPS = 8192
DT = DURATION / N_STEPS

# Sub-seed offsets derived from a scenario seed.
WAVE_STREAM = 0
NOISE_STREAMS = {"heave": 1, "pitch": 2, "roll": 3}

# IMU noise standard deviations: heave in metres, pitch/roll in degrees.
SENSOR_NOISE = {"heave": 0.01, "pitch": 0.028, "roll": 0.011}
ANGULAR = ("pitch", "roll")


@dataclass(frozen=True)
class Scenario:
    h_s: float      # m
    t_1: float      # s
    mu_h: float     # deg
    speed: float    # m/s
    seed: int = 0

    def __post_init__(self):
        if not self.h_s >= 0 or not self.t_1 > 0:
            raise ValueError("h_s must be non-negative and t_1 positive")
        if not 0 <= self.mu_h <= 180:
            raise ValueError("mu_h must lie in [0, 180] degrees")
        if not self.speed >= 0:
            raise ValueError("speed must be non-negative")


@dataclass(frozen=True)
class ResponseSet:
    times: np.ndarray
    heave: np.ndarray   # m
    pitch: np.ndarray   # rad
    roll: np.ndarray    # rad
    scenario: Scenario

    def series(self, dof: str) -> np.ndarray:
        return getattr(self, dof)

    @property
    def dt(self) -> float:
        return float(self.times[1] - self.times[0])


def time_grid(n_steps: int = N_STEPS, duration: float = DURATION) -> np.ndarray:
    return np.arange(n_steps) * (duration / n_steps)


def sub_seed(seed: int, stream: int) -> np.random.SeedSequence:
    return np.random.SeedSequence([int(seed), stream])


def scenario_realization(scenario: Scenario, grid: FrequencyGrid | None = None) -> WaveRealization:
    grid = grid if grid is not None else FrequencyGrid.uniform()
    if scenario.h_s == 0:
        spec = mpm_spectrum(1.0, scenario.t_1, grid)
        return realize_wave(spec, sub_seed(scenario.seed, WAVE_STREAM)).scaled(0.0)
    spec = mpm_spectrum(scenario.h_s, scenario.t_1, grid)
    return realize_wave(spec, sub_seed(scenario.seed, WAVE_STREAM))


def harmonic_sum(coefficients: np.ndarray, omegas: np.ndarray, times: np.ndarray,
                 block: int = 64) -> np.ndarray:
    """Evaluate ``Im(sum_c C[..., c] * exp(-1j * w_c * t))`` on ``times``.

    On a uniform grid starting at zero the exponential is factored into a
    block offset and an in-block offset, which replaces the
    (times x components) trig table by two small ones and a matrix product.
    """
    coefficients = np.atleast_2d(coefficients)
    n = times.size
    uniform = n > 1 and times[0] == 0 and np.allclose(times, np.arange(n) * times[1], rtol=0, atol=1e-9)
    if not uniform or n % block:
        return (coefficients @ np.exp(-1j * np.outer(omegas, times))).imag
    dt = times[1]
    starts = np.arange(n // block) * (block * dt)
    inner = np.exp(-1j * np.outer(omegas, np.arange(block) * dt))       # (C, block)
    outer = np.exp(-1j * np.outer(starts, omegas))                       # (nb, C)
    out = np.empty((coefficients.shape[0], n))
    for i, c in enumerate(coefficients):
        out[i] = ((outer * c) @ inner).imag.ravel()
    return out


def synthesize(realization: WaveRealization, vessel: VesselParams, speed: float, mu_h: float,
               times: np.ndarray) -> dict[str, np.ndarray]:
    """Sum the response components of every DOF at the encounter frequency.

    Each component contributes A |H| sin(-w_e t + eps + phase(H)).
    """
    table = frf_table(vessel, realization.grid.omegas, speed, mu_h)
    w_e = table["heave"].omega_e  # identical for every DOF
    coefs = np.array([
        realization.amplitudes * table[dof].magnitude * np.exp(1j * (realization.phases + table[dof].phase))
        for dof in DOFS
    ])
    series = harmonic_sum(coefs, w_e, np.asarray(times, dtype=float))
    return dict(zip(DOFS, series))


def simulate_response(vessel: VesselParams, scenario: Scenario, grid: FrequencyGrid | None = None,
                      times: np.ndarray | None = None) -> ResponseSet:
    """Noise-free responses over the standard 2400 s, 8192-sample record."""
    times = time_grid() if times is None else np.asarray(times, dtype=float)
    realization = scenario_realization(scenario, grid)
    series = synthesize(realization, vessel, scenario.speed, scenario.mu_h, times)
    return ResponseSet(times, series["heave"], series["pitch"], series["roll"], scenario)


def noise_sigmas(sigmas: dict[str, float] | None = None) -> dict[str, float]:
    """Noise standard deviations in internal units (m, rad)."""
    sigmas = SENSOR_NOISE if sigmas is None else {**SENSOR_NOISE, **sigmas}
    return {dof: float(np.deg2rad(s)) if dof in ANGULAR else float(s) for dof, s in sigmas.items()}


def add_sensor_noise(responses: ResponseSet, seed: int | None = None,
                     sigmas: dict[str, float] | None = None) -> ResponseSet:
    """Add i.i.d. Gaussian IMU noise to every sample of every DOF.

    ``sigmas`` overrides the defaults in sensor units (m for heave, degrees
    for pitch and roll). ``seed`` defaults to the scenario seed; each DOF
    draws from its own sub-stream.
    """
    seed = responses.scenario.seed if seed is None else seed
    sd = noise_sigmas(sigmas)
    noisy = {}
    for dof in DOFS:
        x = responses.series(dof)
        if sd[dof] == 0:
            noisy[dof] = x
            continue
        rng = np.random.default_rng(sub_seed(seed, NOISE_STREAMS[dof]))
        noisy[dof] = x + rng.normal(0.0, sd[dof], size=x.shape)
    return replace(responses, **noisy)
