"""Closed-form heave, pitch and roll frequency response functions for a box-like hull.

The hull is a homogeneously loaded rectangular barge for heave and pitch
(breadth reduced by the block coefficient so the barge carries the right
displacement) and two prismatic sections of equal draught for roll. All
responses are decoupled single-DOF oscillators driven at the encounter
frequency.

Sign conventions: ``mu_h`` in degrees, 180 = head seas, 90 = beam seas,
0 = following seas.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np

from .wave_model import G

RHO = 1025.0
DOFS = ("heave", "pitch", "roll")

# Lower bound on |omega_e| (rad/s); following-sea components that the hull
# "surfs" would otherwise divide by zero in the damping terms.
OMEGA_E_FLOOR = 1e-3

# Fraction of the length taken by the full-breadth aft prism in the roll model.
AFT_PRISM_FRACTION = 0.5


@dataclass(frozen=True)
class VesselParams:
    length: float = 2.05        # m
    breadth: float = 0.61       # m
    draught: float = 0.16       # m
    c_wp: float = 0.877
    c_b: float = 0.731
    displacement: float = 150.0  # kg
    gm_t: float = 0.264         # m

    def __post_init__(self):
        for name in ("length", "breadth", "draught", "displacement", "gm_t"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be strictly positive")
        for name in ("c_wp", "c_b"):
            if not 0 < getattr(self, name) <= 1:
                raise ValueError(f"{name} must lie in (0, 1]")
        if self.c_wp <= AFT_PRISM_FRACTION:
            raise ValueError("c_wp too small for the two-prism roll model")

    @property
    def effective_breadth(self) -> float:
        return self.c_b * self.breadth

    @property
    def roll_stiffness(self) -> float:
        """Hydrostatic restoring moment per radian (N m / rad)."""
        return self.displacement * G * self.gm_t

    @property
    def natural_roll_period(self) -> float:
        """Empirical natural roll period (s), 2 C B / sqrt(GM)."""
        c = 0.373 + 0.023 * self.breadth / self.draught - 0.043 * self.length / 100.0
        return 2.0 * c * self.breadth / np.sqrt(self.gm_t)

    def prism_sections(self) -> list["PrismSection"]:
        """Aft (full breadth) and forward prisms sharing the draught.

        The forward breadth makes the combined waterplane equal
        ``c_wp * L * B``; the sectional area coefficient ``c_b / c_wp``
        makes the combined volume equal ``c_b * L * B * T``.
        """
        r = AFT_PRISM_FRACTION
        L = self.length
        b_fwd = self.breadth * (self.c_wp - r) / (1.0 - r)
        area_coef = self.c_b / self.c_wp
        return [
            PrismSection(-L / 2, -L / 2 + r * L, self.breadth, area_coef),
            PrismSection(-L / 2 + r * L, L / 2, b_fwd, area_coef),
        ]

    def as_dict(self) -> dict:
        return {k: getattr(self, k) for k in self.__dataclass_fields__}


class PrismSection(NamedTuple):
    x_start: float
    x_end: float
    breadth: float
    area_coefficient: float

    @property
    def length(self) -> float:
        return self.x_end - self.x_start

    @property
    def centre(self) -> float:
        return 0.5 * (self.x_start + self.x_end)


@dataclass(frozen=True)
class FrfPoint:
    omega: np.ndarray
    omega_e: np.ndarray   # effective |omega_e| after the degeneracy floor
    magnitude: np.ndarray
    phase: np.ndarray


class EomCoefficients(NamedTuple):
    """Coefficients of ``inertia*x'' + damping*x' + stiffness*x = forcing*cos(w_e t)``."""

    inertia: np.ndarray
    damping: np.ndarray
    stiffness: np.ndarray
    forcing: np.ndarray


def _check_heading(mu_h):
    mu = np.asarray(mu_h, dtype=float)
    if np.any((mu < 0) | (mu > 180)) or np.any(~np.isfinite(mu)):
        raise ValueError("relative wave heading must lie in [0, 180] degrees")
    return mu


def encounter_frequency(omega, u, mu_h):
    """Signed encounter frequency w - k U cos(mu) with deep-water k."""
    omega = np.asarray(omega, dtype=float)
    if np.any(omega <= 0):
        raise ValueError("wave frequency must be positive")
    if np.any(np.asarray(u) < 0):
        raise ValueError("vessel speed must be non-negative")
    mu = np.deg2rad(_check_heading(mu_h))
    return omega - omega**2 / G * u * np.cos(mu)


def effective_encounter_frequency(omega, u, mu_h):
    return np.maximum(np.abs(encounter_frequency(omega, u, mu_h)), OMEGA_E_FLOOR)


def _sinc(x):
    return np.sinc(np.asarray(x) / np.pi)


def _s3(x):
    """(sin x - x cos x) / x**3, finite at the origin."""
    x = np.asarray(x, dtype=float)
    small = np.abs(x) < 1e-2
    xs = np.where(small, 1.0, x)
    exact = (np.sin(xs) - xs * np.cos(xs)) / xs**3
    x2 = x * x
    series = 1.0 / 3.0 - x2 / 30.0 + x2 * x2 / 840.0
    return np.where(small, series, exact)


def hull_coefficients(vessel: VesselParams, dof: str, omega, u, mu_h) -> EomCoefficients:
    """EOM coefficients for one DOF at wave frequencies ``omega``.

    Heave and pitch are normalised by the heave restoring force (unit
    stiffness); roll is dimensional (N m / rad).
    """
    omega = np.asarray(omega, dtype=float)
    mu = np.deg2rad(_check_heading(mu_h))
    w_e = effective_encounter_frequency(omega, u, mu_h)
    alpha = w_e / omega
    k = omega**2 / G
    k_e = np.abs(k * np.cos(mu))
    L, T = vessel.length, vessel.draught

    if dof in ("heave", "pitch"):
        B = vessel.effective_breadth
        # sectional damping amplitude ratio
        q = 2.0 * np.sin(0.5 * k * B * alpha**2) * np.exp(-k * T * alpha**2)
        f = np.sqrt((1.0 - k * T) ** 2 + (q**2 / (k * B * alpha**3)) ** 2)
        smith = np.exp(-k_e * T)
        x = 0.5 * k_e * L
        if dof == "heave":
            force = smith * f * _sinc(x)
        else:
            force = smith * f * 6.0 * x * _s3(x) / L
        inertia = 2.0 * k * T / omega**2
        damping = q**2 / (k * B * alpha**3 * omega)
        return EomCoefficients(inertia, damping, np.ones_like(omega), force)

    if dof == "roll":
        k_r = w_e**2 / G
        c44 = vessel.roll_stiffness
        b44 = np.zeros_like(omega)
        moment = np.zeros_like(omega, dtype=complex)
        for sec in vessel.prism_sections():
            b = sec.breadth
            y = 0.5 * k_r * b
            depth = np.exp(-k_r * T)
            # radiated-wave amplitude per radian of roll
            a44 = depth * b * y**2 * _s3(y)
            b44 = b44 + sec.length * RHO * G**2 * a44**2 / w_e**3
            # Haskind: excitation per unit length = sqrt(rho g^2 b44 / w_e)
            m_sec = RHO * G * depth * 0.5 * b**2 * y * _s3(y)
            moment = moment + m_sec * sec.length * _sinc(0.5 * k_e * sec.length) * np.exp(1j * k_e * sec.centre)
        force = np.sin(mu) * np.abs(moment)
        inertia = (vessel.natural_roll_period / (2.0 * np.pi)) ** 2 * c44 * np.ones_like(omega)
        return EomCoefficients(inertia, b44, c44 * np.ones_like(omega), force)

    raise ValueError(f"unknown degree of freedom {dof!r}; expected one of {DOFS}")


def frf(
    vessel: VesselParams,
    dof: str,
    omega,
    u: float,
    mu_h: float,
    coefficients: Callable[..., EomCoefficients] = hull_coefficients,
) -> FrfPoint:
    """Steady-state response per unit wave amplitude.

    Units: m/m for heave, rad/m for pitch and roll. ``coefficients`` can be
    swapped for another hull model with the same signature.
    """
    omega = np.asarray(omega, dtype=float)
    if np.any(omega <= 0):
        raise ValueError("wave frequency must be positive")
    w_e = effective_encounter_frequency(omega, u, mu_h)
    c = coefficients(vessel, dof, omega, u, mu_h)
    real = c.stiffness - c.inertia * w_e**2
    imag = c.damping * w_e
    magnitude = np.abs(c.forcing) / np.hypot(real, imag)
    phase = np.arctan2(imag, real)
    return FrfPoint(omega, w_e, magnitude, phase)


def frf_table(vessel: VesselParams, omega, u: float, mu_h: float) -> dict[str, FrfPoint]:
    return {dof: frf(vessel, dof, omega, u, mu_h) for dof in DOFS}
