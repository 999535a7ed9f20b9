"""Seeded Monte Carlo bit-error-rate engine.

Frames are simulated in fixed-size batches; every batch draws from its own
counter-derived random stream, and batch results are aggregated in batch
order.  Totals therefore depend only on (seed, batch size), not on worker
count or scheduling.
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .channel import RAYLEIGH_SCALE, snr_db_to_noise_var
from .modem import Constellation, Scheme, SystemConfig, build_constellation, frame_bit_count

__all__ = [
    "StopRule",
    "BerPoint",
    "wilson_interval",
    "run_point",
    "run_sweep",
    "derive_point_seed",
]

_Z95 = 1.959963984540054
DEFAULT_BATCH_SIZE = 4096


@dataclass(frozen=True)
class StopRule:
    """When to stop accumulating frames at one SNR point."""

    min_bit_errors: int = 200
    max_frames: int = 10_000_000
    target_rel_ci: float | None = None

    def __post_init__(self) -> None:
        if self.min_bit_errors < 0:
            raise ValueError("min_bit_errors must be nonnegative")
        if self.max_frames < 1:
            raise ValueError("max_frames must be at least 1")
        if self.target_rel_ci is not None and self.target_rel_ci <= 0:
            raise ValueError("target_rel_ci must be positive when given")

    def satisfied(self, bit_errors: int, bits_sent: int) -> bool:
        if bit_errors < self.min_bit_errors:
            return False
        if self.target_rel_ci is None:
            return True
        if bit_errors == 0 or bits_sent == 0:
            return False
        ber = bit_errors / bits_sent
        lo, hi = wilson_interval(bit_errors, bits_sent)
        return (hi - lo) / (2.0 * ber) <= self.target_rel_ci


@dataclass(frozen=True)
class BerPoint:
    """One measured error-rate sample with its uncertainty metadata."""

    snr_db: float
    ber: float
    bit_errors: int
    bits_sent: int
    frames: int
    ci_low: float
    ci_high: float
    elapsed_seconds: float
    seed: int


def wilson_interval(successes: int, trials: int, z: float = _Z95) -> tuple[float, float]:
    """Wilson score interval for a binomial proportion; robust at few successes."""
    if trials <= 0:
        return 0.0, 1.0
    p = successes / trials
    denom = 1.0 + z * z / trials
    center = (p + z * z / (2.0 * trials)) / denom
    half = (z / denom) * math.sqrt(p * (1.0 - p) / trials + z * z / (4.0 * trials * trials))
    return max(0.0, center - half), min(1.0, center + half)


def derive_point_seed(master_seed: int, grid_index: int) -> int:
    """Independent per-point seed derived from the master seed and grid index."""
    ss = np.random.SeedSequence([int(master_seed), int(grid_index)])
    return int(ss.generate_state(1, np.uint64)[0])


def _unpack_bits(values: np.ndarray, width: int) -> np.ndarray:
    shifts = np.arange(width - 1, -1, -1)
    return (values[:, np.newaxis] >> shifts[np.newaxis, :]) & 1


def _pack_bits(bits: np.ndarray) -> np.ndarray:
    width = bits.shape[1]
    weights = 1 << np.arange(width - 1, -1, -1)
    return (bits * weights[np.newaxis, :]).sum(axis=1)


def _batch_errors(
    cfg: SystemConfig,
    points: np.ndarray,
    labels: np.ndarray,
    label_to_index: np.ndarray,
    snr_db: float,
    point_seed: int,
    batch_index: int,
    n_frames: int,
    keep_arrays: bool = False,
):
    """Simulate one batch of frames; returns (bit errors, bits sent).

    Draw order per batch: frame bits, amplitudes, phases, slot noise.
    With ``keep_arrays`` the per-frame draws and decisions are returned too
    so the vectorized path can be audited against the per-frame modules.
    """
    rng = np.random.default_rng([int(point_seed), int(batch_index)])
    n0 = snr_db_to_noise_var(snr_db)
    nr, n = cfg.num_rx, cfg.num_reflectors
    na, ns = cfg.antenna_bits, cfg.symbol_bits
    nbits = frame_bit_count(cfg)
    two_slot = cfg.scheme is Scheme.RIS_RSM_ASBC

    bits = rng.integers(0, 2, size=(n_frames, nbits), dtype=np.int64)
    m_idx = _pack_bits(bits[:, :na]) if na else np.zeros(n_frames, dtype=np.int64)
    k1 = label_to_index[_pack_bits(bits[:, na : na + ns])] if ns else np.zeros(n_frames, dtype=np.int64)
    if two_slot:
        k2 = label_to_index[_pack_bits(bits[:, na + ns :])] if ns else np.zeros(n_frames, dtype=np.int64)

    beta = rng.rayleigh(RAYLEIGH_SCALE, size=(n_frames, nr, n))
    theta = rng.uniform(0.0, 2.0 * np.pi, size=(n_frames, nr, n))
    b_mat = beta * np.exp(-1j * theta)
    p_mat = np.exp(1j * theta)
    sigma = math.sqrt(n0 / 2.0) if n0 > 0 else 0.0

    if two_slot:
        half = n // 2
        g0 = b_mat[:, :, :half] @ p_mat[:, :, :half].transpose(0, 2, 1)  # (F, l, m_hyp)
        g1 = b_mat[:, :, half:] @ p_mat[:, :, half:].transpose(0, 2, 1)
        take = m_idx[:, np.newaxis, np.newaxis]
        h0 = np.take_along_axis(g0, take, axis=2)[:, :, 0]
        h1 = np.take_along_axis(g1, take, axis=2)[:, :, 0]
        s1 = points[k1]
        s2 = points[k2]
        y1 = s1[:, np.newaxis] * h0 + s2[:, np.newaxis] * h1
        y2 = -np.conj(s2)[:, np.newaxis] * h0 + np.conj(s1)[:, np.newaxis] * h1
        if sigma:
            y1 = y1 + sigma * (rng.standard_normal(y1.shape) + 1j * rng.standard_normal(y1.shape))
            y2 = y2 + sigma * (rng.standard_normal(y2.shape) + 1j * rng.standard_normal(y2.shape))
        mh, k1h, k2h = _detect_batch_two_slot(y1, y2, g0, g1, points)
    else:
        g = b_mat @ p_mat.transpose(0, 2, 1)  # (F, l, m_hyp) over the whole surface
        take = m_idx[:, np.newaxis, np.newaxis]
        hv = np.take_along_axis(g, take, axis=2)[:, :, 0]
        s1 = points[k1]
        y = s1[:, np.newaxis] * hv
        if sigma:
            y = y + sigma * (rng.standard_normal(y.shape) + 1j * rng.standard_normal(y.shape))
        mh, k1h = _detect_batch_one_slot(y, g, points)

    rx_bits = [_unpack_bits(mh, na)] if na else []
    if ns:
        rx_bits.append(_unpack_bits(labels[k1h], ns))
        if two_slot:
            rx_bits.append(_unpack_bits(labels[k2h], ns))
    rx = np.concatenate(rx_bits, axis=1) if rx_bits else np.zeros_like(bits)
    errors = int(np.count_nonzero(bits != rx))
    if not keep_arrays:
        return errors, n_frames * nbits
    extras = {
        "bits": bits,
        "m_idx": m_idx,
        "k1": k1,
        "beta": beta,
        "theta": theta,
        "mh": mh,
        "k1h": k1h,
    }
    if two_slot:
        extras.update({"k2": k2, "k2h": k2h, "y1": y1, "y2": y2})
    else:
        extras["y"] = y
    return errors, n_frames * nbits, extras


def _detect_batch_two_slot(y1, y2, g0, g1, points):
    """Vectorized joint ML over (antenna, symbol, symbol); ties resolve to the
    lexicographically smallest hypothesis via first-minimum argmin."""
    f, nr = y1.shape
    m = len(points)
    s1 = points[np.newaxis, np.newaxis, np.newaxis, :, np.newaxis]
    s2 = points[np.newaxis, np.newaxis, np.newaxis, np.newaxis, :]
    ge0 = g0.transpose(0, 2, 1)[:, :, :, np.newaxis, np.newaxis]  # (F, m_hyp, l, 1, 1)
    ge1 = g1.transpose(0, 2, 1)[:, :, :, np.newaxis, np.newaxis]
    ya = y1[:, np.newaxis, :, np.newaxis, np.newaxis]
    yb = y2[:, np.newaxis, :, np.newaxis, np.newaxis]
    d1 = ya - s1 * ge0 - s2 * ge1
    d2 = yb + np.conj(s2) * ge0 - np.conj(s1) * ge1
    cost = (np.abs(d1) ** 2 + np.abs(d2) ** 2).sum(axis=2)  # (F, m_hyp, M, M)
    flat = cost.reshape(f, -1).argmin(axis=1)
    mh, rest = np.divmod(flat, m * m)
    k1h, k2h = np.divmod(rest, m)
    return mh, k1h, k2h


def _detect_batch_one_slot(y, g, points):
    f, nr = y.shape
    m = len(points)
    s = points[np.newaxis, np.newaxis, np.newaxis, :]
    ge = g.transpose(0, 2, 1)[:, :, :, np.newaxis]  # (F, m_hyp, l, 1)
    d = y[:, np.newaxis, :, np.newaxis] - s * ge
    cost = (np.abs(d) ** 2).sum(axis=2)  # (F, m_hyp, M)
    flat = cost.reshape(f, -1).argmin(axis=1)
    mh, kh = np.divmod(flat, m)
    return mh, kh


def _batch_schedule(max_frames: int, batch_size: int):
    """Deterministic batch sizes independent of runtime state."""
    start = 0
    index = 0
    while start < max_frames:
        size = min(batch_size, max_frames - start)
        yield index, size
        start += size
        index += 1


def run_point(
    cfg: SystemConfig,
    constellation: Constellation,
    snr_db: float,
    stop: StopRule = StopRule(),
    seed: int = 0,
    batch_size: int = DEFAULT_BATCH_SIZE,
    workers: int = 1,
) -> BerPoint:
    """Estimate BER at one SNR, stopping per the rule.

    Deterministic for a fixed (seed, batch_size) regardless of worker
    count: batches are seeded by index and consumed in index order, and the
    stop rule is applied at the same batch boundaries either way.
    """
    t0 = time.perf_counter()
    points = constellation.points
    labels = constellation.labels
    l2i = constellation.label_to_index
    nbits = frame_bit_count(cfg)

    errors = 0
    frames = 0
    schedule = list(_batch_schedule(stop.max_frames, batch_size))

    def finish() -> BerPoint:
        bits_sent = frames * nbits
        ber = errors / bits_sent if bits_sent else 0.0
        lo, hi = wilson_interval(errors, bits_sent)
        return BerPoint(
            snr_db=float(snr_db),
            ber=ber,
            bit_errors=errors,
            bits_sent=bits_sent,
            frames=frames,
            ci_low=lo,
            ci_high=hi,
            elapsed_seconds=time.perf_counter() - t0,
            seed=int(seed),
        )

    if workers <= 1:
        for index, size in schedule:
            e, b = _batch_errors(cfg, points, labels, l2i, snr_db, seed, index, size)
            errors += e
            frames += size
            if stop.satisfied(errors, frames * nbits):
                break
        return finish()

    with ProcessPoolExecutor(max_workers=workers) as pool:
        pos = 0
        stopped = False
        while pos < len(schedule) and not stopped:
            wave = schedule[pos : pos + workers]
            futures = [
                pool.submit(_batch_errors, cfg, points, labels, l2i, snr_db, seed, idx, size)
                for idx, size in wave
            ]
            for (idx, size), fut in zip(wave, futures):
                e, _ = fut.result()
                if stopped:
                    continue  # later-index results are discarded after the stop
                errors += e
                frames += size
                if stop.satisfied(errors, frames * nbits):
                    stopped = True
            pos += len(wave)
    return finish()


def run_sweep(
    cfg: SystemConfig,
    constellation: Constellation,
    snr_grid_db,
    stop: StopRule = StopRule(),
    seed: int = 0,
    batch_size: int = DEFAULT_BATCH_SIZE,
    workers: int = 1,
) -> list[BerPoint]:
    """One BER point per grid SNR; per-point seeds derive from the master seed."""
    grid = [float(v) for v in snr_grid_db]
    if not grid:
        raise ValueError("SNR grid is empty")
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise ValueError("SNR grid must be strictly increasing")
    return [
        run_point(
            cfg,
            constellation,
            snr,
            stop=stop,
            seed=derive_point_seed(seed, i),
            batch_size=batch_size,
            workers=workers,
        )
        for i, snr in enumerate(grid)
    ]
