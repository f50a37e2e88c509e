"""Figure builders: pure functions from parsed rows to image files.

Styling is pinned so a re-render from the same CSV bytes is identical.
"""

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from .reader import SweepRow

KINDS = ("channel", "purify", "swap", "repeater")

# stable ids inside vector output
matplotlib.rcParams["svg.hashsalt"] = "qrepplot"

_DPI = 100
_DATA_STYLE = dict(marker="o", markersize=4, linewidth=1.2, color="#1f6fb2", capsize=3)
_OVERLAY_STYLE = dict(linestyle="--", linewidth=1.0, color="#b23a1f")


def channel_overlay_points(rows: list[SweepRow]) -> list[tuple[float, float]]:
    """Analytic dephasing curve (1 + (1-2p)^k)/2 through the swept hops.

    The per-hop flip probability is recovered from the smallest positive
    hop count in the data, so the overlay carries no outside knowledge.
    """
    positive = [r for r in rows if r.sweep_value > 0]
    if not positive:
        raise ValueError("overlay needs at least one row with a positive hop count")
    anchor = min(positive, key=lambda r: r.sweep_value)
    r0 = 2.0 * anchor.fidelity_mean - 1.0
    k0 = anchor.sweep_value
    if r0 > 0.0:
        base = r0 ** (1.0 / k0)
    elif k0 == 1.0:
        base = r0
    else:
        raise ValueError("cannot recover the per-hop flip probability from these rows")
    return [(r.sweep_value, (1.0 + base**r.sweep_value) / 2.0) for r in rows]


def _errorbar(ax, rows, field, err_field, label):
    xs = [r.sweep_value for r in rows]
    ys = [getattr(r, field) for r in rows]
    errs = [getattr(r, err_field) for r in rows]
    yerr = errs if any(e > 0 for e in errs) else None
    ax.errorbar(xs, ys, yerr=yerr, label=label, **_DATA_STYLE)
    ax.set_xlabel(rows[0].sweep_param)
    ax.grid(True, alpha=0.3)


def _fidelity_panel(ax, rows, title):
    _errorbar(ax, rows, "fidelity_mean", "fidelity_stderr", "fidelity")
    ax.set_ylabel("fidelity")
    ax.set_title(title)


def _yield_panel(ax, rows, title):
    _errorbar(ax, rows, "yield_mean", "yield_stderr", "yield")
    ax.set_ylabel("yield")
    ax.set_title(title)


def build_figure(kind: str, rows: list[SweepRow], overlay: bool = False):
    if kind not in KINDS:
        raise ValueError(f"unknown figure kind {kind!r}; choose one of {KINDS}")
    if not rows:
        raise ValueError("no rows to plot")
    if rows[0].experiment != kind:
        raise ValueError(
            f"figure kind {kind!r} does not match experiment {rows[0].experiment!r} in the CSV"
        )
    if overlay and kind != "channel":
        raise ValueError("the analytic overlay is defined for the channel sweep")

    if kind in ("channel", "swap"):
        fig, ax = plt.subplots(figsize=(6, 4), dpi=_DPI)
        title = "fidelity after transmission" if kind == "channel" else "fidelity after swapping"
        _fidelity_panel(ax, rows, title)
        if overlay:
            pts = channel_overlay_points(rows)
            ax.plot([x for x, _ in pts], [y for _, y in pts],
                    label="analytic", **_OVERLAY_STYLE)
            ax.legend()
    else:
        fig, (ax_f, ax_y) = plt.subplots(1, 2, figsize=(10, 4), dpi=_DPI)
        what = "purification" if kind == "purify" else "repeater chain"
        _fidelity_panel(ax_f, rows, f"(a) fidelity, {what}")
        _yield_panel(ax_y, rows, f"(b) yield, {what}")
    fig.tight_layout()
    return fig


def render(kind: str, rows: list[SweepRow], out_path: str, overlay: bool = False) -> None:
    fig = build_figure(kind, rows, overlay)
    try:
        save_kwargs = {}
        if str(out_path).lower().endswith(".svg"):
            save_kwargs["metadata"] = {"Date": None}  # keep re-renders identical
        fig.savefig(out_path, **save_kwargs)
    finally:
        plt.close(fig)
