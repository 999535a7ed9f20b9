"""Render BER-versus-SNR figures to image files (headless backend)."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

__all__ = ["render_ber_figure"]

_MARKERS = ["o", "s", "^", "v", "D", "x", "+", "*"]


def render_ber_figure(curves, path, title: str | None = None) -> None:
    """Save a semilog BER plot.

    ``curves`` maps a legend label to (snr_db list, ber list); zero-BER
    points cannot be drawn on the log axis and are dropped.
    """
    fig, ax = plt.subplots(figsize=(7.2, 5.0))
    for idx, (label, (snr, ber)) in enumerate(curves.items()):
        xs = [x for x, y in zip(snr, ber) if y > 0]
        ys = [y for y in ber if y > 0]
        ax.semilogy(xs, ys, marker=_MARKERS[idx % len(_MARKERS)], label=label)
    ax.set_xlabel("SNR (dB)")
    ax.set_ylabel("BER")
    if title:
        ax.set_title(title)
    ax.grid(True, which="both", linestyle=":", linewidth=0.7)
    if curves:
        ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
