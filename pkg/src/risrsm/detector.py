"""Joint maximum-likelihood detection and receiver complexity accounting."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import ChannelRealization, ReceivedFrame, effective_channel, full_surface_gains, ris_phases_for_target
from .modem import Constellation, Scheme, SystemConfig

__all__ = [
    "Decision",
    "ComplexityReport",
    "ml_detect",
    "ml_detect_rsm",
    "complexity_count",
]


@dataclass(frozen=True)
class Decision:
    """Detector output: hypothesis indices plus its ML cost."""

    m_hat: int  # 1-based antenna index
    k1_hat: int  # constellation point index, slot 1
    k2_hat: int | None  # slot 2 (None for the single-symbol baseline)
    metric: float


@dataclass(frozen=True)
class ComplexityReport:
    """Closed-form receiver cost plus the searched hypothesis count."""

    scheme: Scheme
    real_multiplications: int
    hypotheses: int


def ml_detect(
    frame: ReceivedFrame,
    ch: ChannelRealization,
    constellation: Constellation,
    cfg: SystemConfig,
) -> Decision:
    """Exhaustive joint ML search over (antenna, symbol, symbol) hypotheses.

    The receiver knows the full channel realization, so the effective
    channel is rebuilt for every hypothesized target antenna.  Ties break
    toward the lexicographically smallest (m, k1, k2).
    """
    if cfg.scheme is not Scheme.RIS_RSM_ASBC:
        raise ValueError("ml_detect handles the two-slot coded scheme; use ml_detect_rsm")
    if frame.y.shape != (cfg.num_rx, 2) or ch.beta.shape[0] != cfg.num_rx:
        raise ValueError("frame/channel dimensions do not match the configuration")

    pts = constellation.points
    m_size = len(pts)
    y1 = frame.y[:, 0][:, np.newaxis, np.newaxis]
    y2 = frame.y[:, 1][:, np.newaxis, np.newaxis]
    s1 = pts[np.newaxis, :, np.newaxis]
    s2 = pts[np.newaxis, np.newaxis, :]

    best = None
    for m_hyp in range(1, cfg.num_rx + 1):
        h = effective_channel(ch, ris_phases_for_target(ch, m_hyp)).h
        h0 = h[:, 0][:, np.newaxis, np.newaxis]
        h1 = h[:, 1][:, np.newaxis, np.newaxis]
        d1 = y1 - s1 * h0 - s2 * h1
        d2 = y2 + np.conj(s2) * h0 - np.conj(s1) * h1
        cost = (np.abs(d1) ** 2 + np.abs(d2) ** 2).sum(axis=0)  # (M, M)
        flat = int(np.argmin(cost))
        k1, k2 = divmod(flat, m_size)
        value = float(cost[k1, k2])
        if best is None or value < best[0]:
            best = (value, m_hyp, k1, k2)
    value, m_hat, k1_hat, k2_hat = best
    return Decision(m_hat=m_hat, k1_hat=k1_hat, k2_hat=k2_hat, metric=value)


def ml_detect_rsm(
    y: np.ndarray,
    ch: ChannelRealization,
    constellation: Constellation,
    cfg: SystemConfig,
) -> Decision:
    """One-slot ML search for the baseline: full-surface alignment, one symbol."""
    if cfg.scheme is not Scheme.RIS_RSM:
        raise ValueError("ml_detect_rsm handles the single-symbol baseline scheme")
    y = np.asarray(y, dtype=complex)
    if y.shape != (cfg.num_rx,):
        raise ValueError("received vector length does not match the antenna count")

    pts = constellation.points
    best = None
    for m_hyp in range(1, cfg.num_rx + 1):
        g = full_surface_gains(ch, ris_phases_for_target(ch, m_hyp))
        cost = (np.abs(y[:, np.newaxis] - pts[np.newaxis, :] * g[:, np.newaxis]) ** 2).sum(axis=0)
        k = int(np.argmin(cost))
        value = float(cost[k])
        if best is None or value < best[0]:
            best = (value, m_hyp, k)
    value, m_hat, k_hat = best
    return Decision(m_hat=m_hat, k1_hat=k_hat, k2_hat=None, metric=value)


def complexity_count(scheme: Scheme, num_reflectors: int, num_rx: int, mod_order: int) -> ComplexityReport:
    """Closed-form real-multiplication counts for the receiver search.

    These are the published closed forms, evaluated verbatim; the
    ``hypotheses`` field is the plain search-space size and is reported
    separately, not reconciled with the closed forms.
    """
    if scheme is Scheme.RIS_RSM_ASBC:
        mults = (num_reflectors // 2 + mod_order) ** 2 * num_rx**2
        hyps = num_rx * mod_order**2
    elif scheme is Scheme.RIS_RSM:
        mults = (num_reflectors + mod_order) * num_rx**2
        hyps = num_rx * mod_order
    else:
        raise ValueError(f"unsupported scheme: {scheme}")
    return ComplexityReport(scheme=scheme, real_multiplications=int(mults), hypotheses=int(hyps))
