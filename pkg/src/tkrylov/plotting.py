"""Matplotlib figures written next to the text reports."""

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

__all__ = ["plot_restoration", "plot_bench"]


def _show(ax, img, title):
    ax.imshow(np.clip(img, 0.0, 1.0), interpolation="nearest")
    ax.set_title(title, fontsize=9)
    ax.set_axis_off()


def plot_restoration(path, original, degraded, restored, report=None, title=None):
    """Original / degraded / restored panels, plus the solver history when given.

    Multi-frame tensors are shown through their first frame.
    """
    panels = [(original, "original"), (degraded, "degraded"), (restored, "restored")]
    panels = [(p[:, :, :3], t) for p, t in panels if p is not None]
    ncols = len(panels) + (1 if report is not None else 0)
    fig, axes = plt.subplots(1, ncols, figsize=(3.2 * ncols, 3.4))
    axes = np.atleast_1d(axes)
    for ax, (img, name) in zip(axes, panels):
        _show(ax, img, name)
    if report is not None:
        ax = axes[-1]
        hist = report.residual_history
        ax.semilogy(np.arange(1, len(hist) + 1), hist, "o-", ms=3, label="residual")
        if report.mu:
            ax.semilogy(np.arange(1, len(report.mu) + 1), report.mu, "s--", ms=3, label="mu")
        ax.set_xlabel("restart" if report.method == "gmres" else "test step")
        ax.legend(fontsize=8)
        ax.set_title(f"{report.method} history", fontsize=9)
    if title:
        fig.suptitle(title, fontsize=10)
    fig.tight_layout()
    fig.savefig(path, dpi=110)
    plt.close(fig)


def plot_bench(path, rows):
    """Bar charts of SNR and relative error per (image, noise, method) row."""
    labels = [f"{r['image']}\nnu={r['nu']:g}\n{r['method']}" for r in rows]
    x = np.arange(len(rows))
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(max(6, 1.3 * len(rows)) * 2, 3.8))
    ax1.bar(x, [r["snr"] for r in rows], color="tab:blue")
    ax1.bar(x, [r["degraded_snr"] for r in rows], color="tab:gray", alpha=0.6, width=0.4)
    ax1.set_ylabel("SNR (dB)")
    ax2.bar(x, [r["relative_error"] for r in rows], color="tab:orange")
    ax2.bar(x, [r["degraded_relative_error"] for r in rows], color="tab:gray", alpha=0.6, width=0.4)
    ax2.set_ylabel("relative error")
    for ax in (ax1, ax2):
        ax.set_xticks(x)
        ax.set_xticklabels(labels, fontsize=7)
    fig.tight_layout()
    fig.savefig(path, dpi=110)
    plt.close(fig)
