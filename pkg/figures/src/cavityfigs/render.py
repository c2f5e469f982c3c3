"""Rendering of figure specs into static image files.

Rendering is a pure function of the input tables: nothing is recomputed,
re-simulated, or randomized here.  Output is deterministic byte for byte:
fixed layout and sizes, no timestamps in PDF/SVG metadata, and a fixed
hash salt for SVG element ids.
"""

from __future__ import annotations

import math
from pathlib import Path

import matplotlib
import numpy as np
from matplotlib.colors import Normalize, TwoSlopeNorm
from matplotlib.figure import Figure

from .errors import FigureError
from .spec import FIGURES, ROLE_ORDER, FigureSpec
from .tables import Table, load_table

__all__ = ["render", "SUPPORTED_FORMATS"]

SUPPORTED_FORMATS = ("pdf", "png", "svg")
_PNG_DPI = 200
_SAVE_METADATA = {
    ".pdf": {"CreationDate": None},
    ".svg": {"Date": None},
}


def _save(fig: Figure, path: Path) -> None:
    with matplotlib.rc_context({"svg.hashsalt": "cavityfigs"}):
        fig.savefig(path, dpi=_PNG_DPI, metadata=_SAVE_METADATA.get(path.suffix.lower()))


def _resolved_config(table: Table) -> dict:
    return table.metadata.get("resolved_config") or {}


def _beat_period_from_grid(table: Table) -> float | None:
    """Beat period implied by a periods-based time grid, if recorded.

    A grid requested as N beat periods ends exactly at N*T, so T follows
    from the last sample and the sidecar without recomputing any physics.
    """
    grid = _resolved_config(table).get("grid") or {}
    periods = grid.get("periods")
    if not periods:
        return None
    t = table.column("t")
    return float(t[-1] - t[0]) / float(periods)


def _draw_fig03(fig: Figure, spec: FigureSpec, tables: dict) -> None:
    table = tables["series"]
    t = table.column("t")
    ax_top, ax_bottom = fig.subplots(2, 1, sharex=True)

    ax_top.plot(t, table.column("X_semiclassical"), lw=1.4, label="Gaussian")
    ax_top.plot(t, table.column("X_fock"), lw=1.0, ls="--", label="Fock")
    ax_top.set_ylabel(spec.labels["y_top"])
    ax_top.legend(loc="upper right", framealpha=0.9)

    ax_bottom.plot(t, table.column("n_photon_semiclassical"), lw=1.4, label="Gaussian")
    ax_bottom.plot(t, table.column("n_photon_fock"), lw=1.0, ls="--", label="Fock")
    ax_bottom.set_ylabel(spec.labels["y_bottom"])
    ax_bottom.set_xlabel(spec.labels["x"])

    period = _beat_period_from_grid(table)
    if period:
        for k in range(1, int(math.floor((t[-1] - t[0]) / period)) + 1):
            for ax in (ax_top, ax_bottom):
                ax.axvline(t[0] + k * period, color="0.55", lw=0.8, ls=":")
        ax_top.set_title(f"beat period T = {period:.4g}", fontsize="medium")


def _draw_fig04(fig: Figure, spec: FigureSpec, tables: dict) -> None:
    table = tables["sweep"]
    gamma = table.column("params.gamma")
    ax = fig.subplots()
    ax.plot(gamma, table.column("period_T"), lw=1.4, label="full model")
    ax.plot(gamma, table.column("period_T_rwa"), lw=1.2, ls="--", label="rotating wave")
    ax.plot(
        gamma,
        table.column("T_extracted"),
        ls="none",
        marker="x",
        ms=5,
        color="k",
        label="extracted from trajectory",
    )
    ax.axvline(1.0, color="0.75", lw=0.8)
    ax.set_xlabel(spec.labels["x"])
    ax.set_ylabel(spec.labels["y"])
    ax.legend(loc="lower center", framealpha=0.9)


def _pivot(table: Table, xcol: str, ycol: str, vcol: str):
    """Reshape a two-axis sweep table into a dense (y, x) value grid."""
    xs_raw = table.column(xcol)
    ys_raw = table.column(ycol)
    values = table.column(vcol)
    xs = np.unique(xs_raw)
    ys = np.unique(ys_raw)
    x_index = {v: i for i, v in enumerate(xs)}
    y_index = {v: i for i, v in enumerate(ys)}
    grid = np.full((ys.size, xs.size), np.nan)
    for x, y, v in zip(xs_raw, ys_raw, values):
        grid[y_index[y], x_index[x]] = v
    return xs, ys, grid


def _heatmap_norm(grids: list) -> Normalize:
    finite = np.concatenate([g[np.isfinite(g)].ravel() for g in grids])
    if finite.size == 0:
        raise FigureError("heatmap has no finite values to render")
    vmin, vmax = float(finite.min()), float(finite.max())
    if vmin < 0.0 < vmax:
        return TwoSlopeNorm(vcenter=0.0, vmin=vmin, vmax=vmax)
    if vmin == vmax:
        return Normalize(vmin - 0.5, vmax + 0.5)
    return Normalize(vmin, vmax)


def _draw_fig06(fig: Figure, spec: FigureSpec, tables: dict) -> None:
    roles = [r for r in ROLE_ORDER["fig06"] if r in tables]
    pivots = {
        role: _pivot(tables[role], "initial.x0", "initial.w", "Q_photon_avg")
        for role in roles
    }
    norm = _heatmap_norm([grid for _, _, grid in pivots.values()])
    axes = np.atleast_1d(fig.subplots(1, len(roles), sharey=True))
    mesh = None
    for ax, role in zip(axes, roles):
        xs, ys, grid = pivots[role]
        mesh = ax.pcolormesh(
            xs, ys, grid, cmap="RdBu_r", norm=norm, shading="nearest"
        )
        finite = grid[np.isfinite(grid)]
        if finite.size and finite.min() < 0.0 < finite.max():
            ax.contour(xs, ys, grid, levels=[0.0], colors="k", linewidths=0.9)
        gamma = (_resolved_config(tables[role]).get("params") or {}).get("gamma")
        ax.set_title(
            rf"$\gamma = {gamma:g}$" if gamma is not None else role, fontsize="medium"
        )
        ax.set_xlabel(spec.labels["x"])
    axes[0].set_ylabel(spec.labels["y"])
    fig.colorbar(mesh, ax=list(axes), label=spec.labels["value"], shrink=0.92)


_DRAWERS = {"fig03": _draw_fig03, "fig04": _draw_fig04, "fig06": _draw_fig06}
_FIGSIZES = {
    "fig03": (7.0, 5.2),
    "fig04": (5.6, 4.2),
    "fig06": (3.6, 3.4),  # per panel; widened by the panel count
}


def render(spec: FigureSpec, out_dir, formats=("pdf", "png")) -> list:
    """Render one figure spec to ``out_dir``, one file per output format."""
    unknown = [f for f in formats if f not in SUPPORTED_FORMATS]
    if unknown:
        raise FigureError(
            f"unsupported format(s) {', '.join(unknown)}; "
            f"supported: {', '.join(SUPPORTED_FORMATS)}"
        )
    drawer = _DRAWERS.get(spec.figure_id)
    if drawer is None:
        raise FigureError(
            f"no renderer for {spec.figure_id!r}; supported: "
            + ", ".join(sorted(_DRAWERS))
        )

    definition = FIGURES[spec.figure_id]
    tables = {}
    for role, path in spec.inputs.items():
        table = load_table(path)
        table.require(*definition.required_columns[role])
        tables[role] = table

    width, height = _FIGSIZES[spec.figure_id]
    if spec.figure_id == "fig06":
        width *= len(tables)
    fig = Figure(figsize=(width, height), layout="constrained")
    drawer(fig, spec, tables)

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for fmt in formats:
        path = out_dir / f"{spec.figure_id}.{fmt}"
        _save(fig, path)
        written.append(path)
    return written
