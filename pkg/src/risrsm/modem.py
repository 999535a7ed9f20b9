"""Bit mapping, Gray-labeled constellations, and Alamouti space-time encoding."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache

import numpy as np

__all__ = [
    "Scheme",
    "ConstellationKind",
    "SystemConfig",
    "Constellation",
    "AlamoutiCodeword",
    "build_constellation",
    "encode_alamouti",
    "split_bits",
    "merge_bits",
    "frame_bit_count",
    "frame_labels",
    "spectral_efficiency",
]


class Scheme(Enum):
    """Supported transmission schemes."""

    RIS_RSM_ASBC = "ris-rsm-asbc"
    RIS_RSM = "ris-rsm"


class ConstellationKind(Enum):
    PSK = "psk"
    QAM = "qam"


def _is_pow2(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


@dataclass(frozen=True)
class SystemConfig:
    """Static link parameters shared by simulation and analysis.

    Antenna indices are 1-based at the API surface; symbol indices are
    0-based positions into the constellation point list.
    """

    scheme: Scheme
    num_reflectors: int  # N, RIS elements
    num_rx: int  # Nr, receive antennas
    mod_order: int  # M
    constellation: ConstellationKind = ConstellationKind.PSK

    def __post_init__(self) -> None:
        if self.num_reflectors < 1:
            raise ValueError("N (reflector count) must be a positive integer")
        if self.scheme is Scheme.RIS_RSM_ASBC and self.num_reflectors % 2 != 0:
            raise ValueError(
                "N (reflector count) must be even for ris-rsm-asbc: the surface "
                "splits into two equal halves"
            )
        if not _is_pow2(self.num_rx):
            raise ValueError("Nr (receive antennas) must be a power of two")
        if not _is_pow2(self.mod_order):
            raise ValueError("M (constellation order) must be a power of two")
        # validate the constellation is constructible (square QAM only)
        build_constellation(self.mod_order, self.constellation)

    @property
    def antenna_bits(self) -> int:
        return int(math.log2(self.num_rx))

    @property
    def symbol_bits(self) -> int:
        return int(math.log2(self.mod_order))


@dataclass(frozen=True)
class Constellation:
    """Unit-energy constellation with Gray bit labels.

    ``points[k]`` is the k-th point in ring order (PSK) or row-major grid
    order (QAM); ``labels[k]`` is its bit label.  ``label_to_index`` is the
    inverse permutation, so bits round-trip through labels exactly.
    """

    points: np.ndarray
    labels: np.ndarray
    bits_per_symbol: int
    kind: ConstellationKind
    label_to_index: np.ndarray = field(repr=False, default=None)

    @property
    def order(self) -> int:
        return len(self.points)

    def point_for_label(self, label: int) -> complex:
        return complex(self.points[self.label_to_index[label]])


def _gray(k: int) -> int:
    return k ^ (k >> 1)


@lru_cache(maxsize=32)
def build_constellation(order: int, kind: ConstellationKind = ConstellationKind.PSK) -> Constellation:
    """Build a Gray-labeled, unit-average-energy constellation.

    PSK rings use a pi/M rotation for order >= 4 (the standard diagonal
    QPSK layout); square QAM only, odd-integer grid scaled to unit energy.
    """
    if not _is_pow2(order):
        raise ValueError("M (constellation order) must be a power of two")

    if order == 1:
        return Constellation(
            points=np.array([1.0 + 0.0j]),
            labels=np.array([0], dtype=np.int64),
            bits_per_symbol=0,
            kind=kind,
            label_to_index=np.array([0], dtype=np.int64),
        )

    if kind is ConstellationKind.PSK:
        offset = math.pi / order if order >= 4 else 0.0
        k = np.arange(order)
        points = np.exp(1j * (2.0 * np.pi * k / order + offset))
        labels = np.array([_gray(i) for i in range(order)], dtype=np.int64)
    elif kind is ConstellationKind.QAM:
        side = math.isqrt(order)
        if side * side != order:
            raise ValueError(
                "M (constellation order) must be a perfect square for QAM "
                f"(got {order}); rectangular QAM is not supported"
            )
        half_bits = int(math.log2(side))
        levels = 2.0 * np.arange(side) - (side - 1)  # ..., -3, -1, +1, +3, ...
        points = np.empty(order, dtype=complex)
        labels = np.empty(order, dtype=np.int64)
        for r in range(side):
            for c in range(side):
                k = r * side + c
                points[k] = levels[c] + 1j * levels[r]
                labels[k] = (_gray(r) << half_bits) | _gray(c)
        points /= math.sqrt(2.0 * (order - 1) / 3.0) if order > 1 else 1.0
    else:
        raise ValueError(f"unknown constellation kind: {kind}")

    label_to_index = np.empty(order, dtype=np.int64)
    label_to_index[labels] = np.arange(order)
    return Constellation(
        points=points,
        labels=labels,
        bits_per_symbol=int(math.log2(order)),
        kind=kind,
        label_to_index=label_to_index,
    )


@dataclass(frozen=True)
class AlamoutiCodeword:
    """Two-symbol orthogonal space-time block over two slots."""

    s1: complex
    s2: complex

    @property
    def matrix(self) -> np.ndarray:
        """Row per slot: [[s1, s2], [-conj(s2), conj(s1)]]."""
        return np.array(
            [[self.s1, self.s2], [-np.conj(self.s2), np.conj(self.s1)]],
            dtype=complex,
        )


def encode_alamouti(s1: complex, s2: complex) -> AlamoutiCodeword:
    """Encode two symbols into the rate-1 orthogonal 2x2 block."""
    return AlamoutiCodeword(s1=complex(s1), s2=complex(s2))


def frame_bit_count(cfg: SystemConfig) -> int:
    """Bits carried per frame: two symbols for the coded scheme, one for the baseline."""
    if cfg.scheme is Scheme.RIS_RSM_ASBC:
        return cfg.antenna_bits + 2 * cfg.symbol_bits
    return cfg.antenna_bits + cfg.symbol_bits


def spectral_efficiency(cfg: SystemConfig) -> float:
    """Bits per channel use: the coded scheme spends two slots per frame."""
    if cfg.scheme is Scheme.RIS_RSM_ASBC:
        return (2.0 * cfg.symbol_bits + cfg.antenna_bits) / 2.0
    return float(cfg.symbol_bits + cfg.antenna_bits)


def _bits_to_int(bits: np.ndarray) -> int:
    value = 0
    for b in bits:
        value = (value << 1) | int(b)
    return value


def _int_to_bits(value: int, width: int) -> list[int]:
    return [(value >> (width - 1 - i)) & 1 for i in range(width)]


def split_bits(bits, cfg: SystemConfig):
    """Split one frame's bits into (m, k1, k2).

    ``m`` is the 1-based target antenna; ``k1``/``k2`` are constellation
    point indices (``k2`` is None for the single-symbol baseline).  Bit
    order: antenna bits, then slot-1 symbol bits, then slot-2 symbol bits.
    """
    bits = np.asarray(bits, dtype=np.int64)
    expected = frame_bit_count(cfg)
    if bits.ndim != 1 or len(bits) != expected:
        raise ValueError(f"frame must contain exactly {expected} bits, got {bits.shape}")
    const = build_constellation(cfg.mod_order, cfg.constellation)

    na, ns = cfg.antenna_bits, cfg.symbol_bits
    m = _bits_to_int(bits[:na]) + 1
    k1 = int(const.label_to_index[_bits_to_int(bits[na : na + ns])])
    if cfg.scheme is Scheme.RIS_RSM_ASBC:
        k2 = int(const.label_to_index[_bits_to_int(bits[na + ns :])])
        return m, k1, k2
    return m, k1, None


def merge_bits(m: int, k1: int, k2, cfg: SystemConfig) -> np.ndarray:
    """Inverse of :func:`split_bits`; exact round trip."""
    if not 1 <= m <= cfg.num_rx:
        raise ValueError(f"antenna index m={m} outside 1..{cfg.num_rx}")
    const = build_constellation(cfg.mod_order, cfg.constellation)
    na, ns = cfg.antenna_bits, cfg.symbol_bits
    out = _int_to_bits(m - 1, na) + _int_to_bits(int(const.labels[k1]), ns)
    if cfg.scheme is Scheme.RIS_RSM_ASBC:
        if k2 is None:
            raise ValueError("k2 is required for the two-symbol coded scheme")
        out += _int_to_bits(int(const.labels[k2]), ns)
    return np.array(out, dtype=np.int64)


def frame_labels(cfg: SystemConfig):
    """Enumerate every (m, k1, k2) hypothesis in lexicographic order."""
    if cfg.scheme is Scheme.RIS_RSM_ASBC:
        return [
            (m, k1, k2)
            for m in range(1, cfg.num_rx + 1)
            for k1 in range(cfg.mod_order)
            for k2 in range(cfg.mod_order)
        ]
    return [
        (m, k1, None)
        for m in range(1, cfg.num_rx + 1)
        for k1 in range(cfg.mod_order)
    ]
