"""Static figures written next to the CLI's delimited output."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

__all__ = ["plot_traces", "plot_spectrum", "plot_table4", "plot_residuals"]

# PNG metadata otherwise embeds the matplotlib version, which breaks byte-identical reruns
_META = {"Software": None}


def _save(fig, path):
    fig.tight_layout()
    fig.savefig(path, dpi=120, metadata=_META)
    plt.close(fig)


def plot_traces(traces, path, title: str = ""):
    """Variance of position against time; ``traces`` is a list of ``(label, EvolutionTrace)``."""
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    for label, tr in traces:
        ax.plot(tr.times, tr.variance, lw=1.0, label=label)
        if tr.tau is not None:
            ax.axvline(tr.tau, color="0.6", lw=0.5, ls=":")
    ax.set_xlabel("t")
    ax.set_ylabel("var q")
    if title:
        ax.set_title(title)
    if len(traces) <= 12:
        ax.legend(fontsize=7, ncol=2)
    _save(fig, path)


def plot_spectrum(rows, path, title: str = ""):
    """Eigenvalue against rank for each sign, one marker style per source column."""
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    for key, marker in (("analytic", "o"), ("numeric", "x")):
        pts = [(r["n"] * r["sign"], r[key]) for r in rows if r.get(key) is not None]
        if pts:
            xs, ys = zip(*pts)
            ax.plot(xs, ys, marker, ms=4, label=key)
    ax.axhline(0.0, color="0.7", lw=0.5)
    ax.set_xlabel("sign * n")
    ax.set_ylabel("tau")
    if title:
        ax.set_title(title)
    ax.legend(fontsize=8)
    _save(fig, path)


def plot_table4(rows, path):
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    for col in sorted({r["column"] for r in rows}):
        sel = [r for r in rows if r["column"] == col]
        diff = [abs(r["numeric"] - r["analytic"]) for r in sel]
        ax.semilogy([r["n"] for r in sel], [max(d, 1e-17) for d in diff], "o-", ms=3, label=col)
    ax.set_xlabel("n")
    ax.set_ylabel("|numeric - analytic|")
    ax.legend(fontsize=8)
    _save(fig, path)


def plot_residuals(rows, path, key: str = "residual", label: str = "name"):
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    names = [str(r[label]) for r in rows]
    vals = [max(float(r[key]), 1e-17) for r in rows]
    ax.bar(range(len(vals)), vals)
    ax.set_yscale("log")
    ax.set_xticks(range(len(vals)))
    ax.set_xticklabels(names, rotation=45, ha="right", fontsize=7)
    ax.set_ylabel(key)
    _save(fig, path)
