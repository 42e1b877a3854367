"""Welch response spectra, total power and top-energy feature vectors."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, NamedTuple

import numpy as np
from scipy import signal

from .vessel import DOFS

K_HEIGHT_PERIOD = 30
K_HEADING = 80
SERIES_LENGTH = 8192


class WelchPolicy(NamedTuple):
    segment: int
    hop: int

    @property
    def overlap(self) -> float:
        return 1.0 - self.hop / self.segment

    def n_segments(self, n: int = SERIES_LENGTH) -> int:
        return (n - self.segment) // self.hop + 1


# Heave/roll: 15 Hann segments at 50 % overlap; pitch: 13 longer segments.
# 80 % overlap at 13 segments needs a non-integer segment length, so pitch
# uses 2048-sample segments at 75 % overlap.
WELCH_POLICY = {
    "heave": WelchPolicy(1024, 512),
    "pitch": WelchPolicy(2048, 512),
    "roll": WelchPolicy(1024, 512),
}


@dataclass(frozen=True)
class Psd:
    freqs: np.ndarray      # rad/s
    ordinates: np.ndarray  # unit^2 s / rad

    @property
    def d_omega(self) -> float:
        return float(self.freqs[1] - self.freqs[0])

    @property
    def m0(self) -> float:
        return float(np.sum(self.ordinates) * self.d_omega)


def welch_psd(series, dt: float, dof: str) -> Psd:
    """One-sided Welch PSD in angular frequency using the per-DOF policy."""
    x = np.asarray(series, dtype=float)
    if x.ndim != 1 or x.size != SERIES_LENGTH:
        raise ValueError(f"expected a 1-D series of {SERIES_LENGTH} samples, got shape {x.shape}")
    if not dt > 0:
        raise ValueError("sample interval must be positive")
    try:
        policy = WELCH_POLICY[dof]
    except KeyError:
        raise ValueError(f"unknown degree of freedom {dof!r}") from None
    f, pxx = signal.welch(
        x, fs=1.0 / dt, window="hann", nperseg=policy.segment,
        noverlap=policy.segment - policy.hop, detrend="constant",
        scaling="density", return_onesided=True,
    )
    return Psd(2.0 * np.pi * f, pxx / (2.0 * np.pi))


def top_components(psd: Psd, k: int) -> tuple[np.ndarray, np.ndarray]:
    """The ``k`` largest ordinates (descending) and their frequencies.

    Ties go to the lower frequency.
    """
    n = psd.ordinates.size
    if not 0 < k <= n:
        raise ValueError(f"k must lie in [1, {n}], got {k}")
    order = np.lexsort((psd.freqs, -psd.ordinates))[:k]
    return psd.ordinates[order], psd.freqs[order]


def normalize_mask(dof_mask) -> tuple[str, ...]:
    """Canonical heave, pitch, roll ordering of a DOF selection."""
    if isinstance(dof_mask, str):
        dof_mask = dof_mask.split("+")
    dofs = set(dof_mask)
    unknown = dofs - set(DOFS)
    if unknown or not dofs:
        raise ValueError(f"invalid DOF selection {dof_mask!r}")
    return tuple(d for d in DOFS if d in dofs)


@dataclass(frozen=True)
class FeatureVector:
    """Network input for one record.

    Flat layout: for each DOF in heave, pitch, roll order the ``k``
    ordinates, then the ``k`` frequencies, then that DOF's total power;
    the vessel speed closes the vector.
    """

    ordinates: Mapping[str, np.ndarray]
    freqs: Mapping[str, np.ndarray]
    m0: Mapping[str, float]
    speed: float
    dof_mask: tuple[str, ...]
    k: int

    def to_array(self) -> np.ndarray:
        parts = []
        for dof in self.dof_mask:
            parts += [self.ordinates[dof], self.freqs[dof], [self.m0[dof]]]
        parts.append([self.speed])
        return np.concatenate([np.asarray(p, dtype=float) for p in parts])

    def __len__(self) -> int:
        return feature_width(self.dof_mask, self.k)


def feature_width(dof_mask, k: int) -> int:
    return len(normalize_mask(dof_mask)) * (2 * k + 1) + 1


def build_features(psds: Mapping[str, Psd], speed: float, dof_mask, k: int) -> FeatureVector:
    mask = normalize_mask(dof_mask)
    missing = [d for d in mask if d not in psds]
    if missing:
        raise ValueError(f"no PSD supplied for {missing}")
    ords, freqs, m0 = {}, {}, {}
    for dof in mask:
        ords[dof], freqs[dof] = top_components(psds[dof], k)
        m0[dof] = psds[dof].m0
    return FeatureVector(ords, freqs, m0, float(speed), mask, int(k))
