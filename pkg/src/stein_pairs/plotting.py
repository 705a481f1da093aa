"""Static figure output for the rate studies.

Figures are rendered headlessly to files next to the delimited reports; no
display server is ever required.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

__all__ = ["rate_plot", "law_plot"]


def rate_plot(rows, slope, path):
    """Log-log plot of the exact KS distance against n, with the fitted slope."""
    ns = np.array([r.n for r in rows], dtype=float)
    ks = np.array([r.ks for r in rows], dtype=float)
    fig, ax = plt.subplots(figsize=(5.0, 3.6))
    ax.loglog(ns, ks, "o", color="tab:blue", label="exact KS distance")
    if slope is not None and len(ns) >= 2:
        coef = np.polyfit(np.log(ns), np.log(ks), 1)
        ax.loglog(ns, np.exp(np.polyval(coef, np.log(ns))), "-",
                  color="tab:orange", label=f"fit, slope {slope:.3f}")
    ax.loglog(ns, ks[0] * (ns / ns[0]) ** -0.5, "--", color="gray",
              label=r"reference $n^{-1/2}$")
    ax.set_xlabel("n")
    ax.set_ylabel("Kolmogorov distance")
    ax.legend(frameon=False, fontsize=8)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)


def law_plot(law, path, n: int = 400):
    """Density and CDF of a constructed limit law."""
    ts = np.linspace(law.lo, law.hi, n)
    fig, ax = plt.subplots(figsize=(5.0, 3.6))
    ax.plot(ts, law.p(ts), color="tab:blue", label="density p")
    ax.plot(ts, law.cdf(ts), color="tab:orange", label="CDF F")
    ax.set_xlabel("t")
    ax.set_title(law.name)
    ax.legend(frameon=False, fontsize=8)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
