"""Rayleigh fading, RIS phase alignment, effective two-slot channel, reception.

Numerical convention used throughout the package: fading amplitudes are
unit power, E[beta^2] = 1 (so E[beta] = sqrt(pi)/2), and complex noise has
total variance n0 (n0/2 per real dimension).  SNR(dB) = 10*log10(Es/n0)
with Es = 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .modem import AlamoutiCodeword

__all__ = [
    "RAYLEIGH_SCALE",
    "ChannelRealization",
    "RisPhaseProfile",
    "EffectiveChannel",
    "ReceivedFrame",
    "draw_channel",
    "ris_phases_for_target",
    "effective_channel",
    "full_surface_gains",
    "transmit_frame",
    "transmit_rsm_slot",
    "snr_db_to_noise_var",
]

# numpy's rayleigh(scale) has E[X^2] = 2*scale^2; this makes E[beta^2] = 1
RAYLEIGH_SCALE = 1.0 / math.sqrt(2.0)


@dataclass(frozen=True)
class ChannelRealization:
    """One block-fading draw: amplitudes and phases per (antenna, reflector)."""

    beta: np.ndarray  # (num_rx, num_reflectors), nonnegative
    theta: np.ndarray  # (num_rx, num_reflectors), radians in [0, 2pi)

    @property
    def num_rx(self) -> int:
        return self.beta.shape[0]

    @property
    def num_reflectors(self) -> int:
        return self.beta.shape[1]


@dataclass(frozen=True)
class RisPhaseProfile:
    """Per-reflector phases applied by the surface (aligned to one antenna)."""

    phases: np.ndarray  # (num_reflectors,)
    target: int  # 1-based antenna the profile aligns to


@dataclass(frozen=True)
class EffectiveChannel:
    """Per-antenna two-entry channel: one half-surface sum per entry."""

    h: np.ndarray  # (num_rx, 2) complex


@dataclass(frozen=True)
class ReceivedFrame:
    """Baseband samples for both slots at every antenna."""

    y: np.ndarray  # (num_rx, 2) complex, column per slot
    n0: float


def draw_channel(rng: np.random.Generator, num_rx: int, num_reflectors: int) -> ChannelRealization:
    """Draw an i.i.d. Rayleigh/uniform channel realization."""
    if num_rx < 1 or num_reflectors < 1:
        raise ValueError("num_rx and num_reflectors must be >= 1")
    beta = rng.rayleigh(RAYLEIGH_SCALE, size=(num_rx, num_reflectors))
    theta = rng.uniform(0.0, 2.0 * np.pi, size=(num_rx, num_reflectors))
    return ChannelRealization(beta=beta, theta=theta)


def ris_phases_for_target(ch: ChannelRealization, m: int) -> RisPhaseProfile:
    """Align the surface to antenna m: applied phases equal that row's channel phases."""
    if not 1 <= m <= ch.num_rx:
        raise ValueError(f"antenna index m={m} outside 1..{ch.num_rx}")
    return RisPhaseProfile(phases=ch.theta[m - 1].copy(), target=m)


def effective_channel(ch: ChannelRealization, profile: RisPhaseProfile) -> EffectiveChannel:
    """Half-surface sums per antenna under the given phase profile.

    Row l is [sum over first half, sum over second half] of
    beta[l,i] * exp(j*(phases[i] - theta[l,i])).  At the profile's target
    antenna the exponents cancel exactly, leaving real nonnegative sums.
    """
    if profile.phases.shape != (ch.num_reflectors,):
        raise ValueError("profile length does not match reflector count")
    n = ch.num_reflectors
    if n % 2 != 0:
        raise ValueError("reflector count must be even to split the surface")
    terms = ch.beta * np.exp(1j * (profile.phases[np.newaxis, :] - ch.theta))
    half = n // 2
    h = np.stack([terms[:, :half].sum(axis=1), terms[:, half:].sum(axis=1)], axis=1)
    return EffectiveChannel(h=h)


def full_surface_gains(ch: ChannelRealization, profile: RisPhaseProfile) -> np.ndarray:
    """Whole-surface aligned gain per antenna (single-symbol baseline scheme)."""
    if profile.phases.shape != (ch.num_reflectors,):
        raise ValueError("profile length does not match reflector count")
    terms = ch.beta * np.exp(1j * (profile.phases[np.newaxis, :] - ch.theta))
    return terms.sum(axis=1)


def snr_db_to_noise_var(snr_db: float) -> float:
    """Noise variance for unit average symbol energy."""
    return 10.0 ** (-snr_db / 10.0)


def transmit_frame(
    cw: AlamoutiCodeword,
    eff: EffectiveChannel,
    n0: float,
    rng: np.random.Generator,
) -> ReceivedFrame:
    """Send the two-slot block through the effective channel and add noise.

    y_l = S h_l + n_l per antenna; noise is circular complex Gaussian with
    total variance n0 per sample (n0 = 0 gives a noiseless frame).
    """
    if n0 < 0:
        raise ValueError("noise variance must be nonnegative")
    clean = eff.h @ cw.matrix.T  # (num_rx, 2): column s = slot-s sample
    if n0 > 0:
        sigma = math.sqrt(n0 / 2.0)
        noise = sigma * (
            rng.standard_normal(clean.shape) + 1j * rng.standard_normal(clean.shape)
        )
        clean = clean + noise
    return ReceivedFrame(y=clean, n0=float(n0))


def transmit_rsm_slot(
    symbol: complex,
    gains: np.ndarray,
    n0: float,
    rng: np.random.Generator,
) -> np.ndarray:
    """One-slot reception for the baseline scheme: y_l = s * g_l + n_l."""
    if n0 < 0:
        raise ValueError("noise variance must be nonnegative")
    clean = symbol * gains
    if n0 > 0:
        sigma = math.sqrt(n0 / 2.0)
        clean = clean + sigma * (
            rng.standard_normal(gains.shape) + 1j * rng.standard_normal(gains.shape)
        )
    return clean
