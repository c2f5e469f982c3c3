"""Figure definitions: which tables each figure consumes and how it is laid out.

A :class:`FigureSpec` is pure plumbing: it names the figure, the input
table files by role, the panel layout, and the axis labels.  The catalog
in :data:`FIGURES` describes the supported figures declaratively; the
renderer maps each panel onto table columns and fails with the expected
schema if a column is absent.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from types import MappingProxyType

from .errors import FigureError

__all__ = ["FigureDef", "FigureSpec", "FIGURES", "build_figure_spec"]


@dataclass(frozen=True)
class FigureDef:
    """Static description of one supported figure."""

    figure_id: str
    description: str
    # role -> (scenario name, extra --set overrides, output file name)
    sources: "MappingProxyType[str, tuple[str, tuple[str, ...], str]]"
    required_roles: tuple[str, ...]
    # role -> columns the renderer reads from that table
    required_columns: "MappingProxyType[str, tuple[str, ...]]"
    layout: tuple[int, int]
    labels: "MappingProxyType[str, str]"


@dataclass(frozen=True)
class FigureSpec:
    """A renderable figure: definition plus concrete input table paths."""

    figure_id: str
    inputs: "MappingProxyType[str, Path]"
    layout: tuple[int, int]
    labels: "MappingProxyType[str, str]"

    def __post_init__(self):
        missing = [str(p) for p in self.inputs.values() if not Path(p).exists()]
        if missing:
            raise FigureError(
                f"{self.figure_id}: input table(s) not found: {', '.join(missing)}"
            )


def _mapping(d: dict) -> MappingProxyType:
    return MappingProxyType(dict(d))


FIGURES: dict[str, FigureDef] = {
    "fig03": FigureDef(
        figure_id="fig03",
        description=(
            "Two-panel beating: matter quadrature and generated photon number, "
            "Gaussian and Fock backends overlaid, with beat-period markers"
        ),
        sources=_mapping({"series": ("fig03", (), "fig03.csv")}),
        required_roles=("series",),
        required_columns=_mapping(
            {
                "series": (
                    "t",
                    "X_semiclassical",
                    "X_fock",
                    "n_photon_semiclassical",
                    "n_photon_fock",
                )
            }
        ),
        layout=(2, 1),
        labels=_mapping(
            {
                "x": "time $t$ (dimensionless)",
                "y_top": r"$\langle X \rangle$",
                "y_bottom": r"$\langle n \rangle$",
            }
        ),
    ),
    "fig04": FigureDef(
        figure_id="fig04",
        description=(
            "Beat period versus frequency ratio: closed form, rotating-wave "
            "counterpart, and the value extracted from a sampled trajectory"
        ),
        sources=_mapping({"sweep": ("fig04", (), "fig04.csv")}),
        required_roles=("sweep",),
        required_columns=_mapping(
            {"sweep": ("params.gamma", "period_T", "period_T_rwa", "T_extracted")}
        ),
        layout=(1, 1),
        labels=_mapping(
            {
                "x": r"frequency ratio $\gamma$",
                "y": "beat period $T$ (dimensionless)",
            }
        ),
    ),
    "fig06": FigureDef(
        figure_id="fig06",
        description=(
            "Averaged photon Mandel Q heatmap over initial displacement and "
            "width, with the zero contour; companion panels above and below "
            "resonance when their tables are present"
        ),
        sources=_mapping(
            {
                "below": (
                    "fig06",
                    ("params.gamma=0.8", "scenario.name=fig06_below"),
                    "fig06_below.csv",
                ),
                "resonant": ("fig06", (), "fig06.csv"),
                "above": (
                    "fig06",
                    ("params.gamma=1.2", "scenario.name=fig06_above"),
                    "fig06_above.csv",
                ),
            }
        ),
        required_roles=("resonant",),
        required_columns=_mapping(
            {
                role: ("initial.x0", "initial.w", "Q_photon_avg")
                for role in ("below", "resonant", "above")
            }
        ),
        layout=(1, 3),
        labels=_mapping(
            {
                "x": "initial displacement $X_0$",
                "y": "initial width $w$",
                "value": r"$\overline{Q}$ (photon)",
            }
        ),
    ),
}

# Panel order for figures whose optional inputs may be absent.
ROLE_ORDER = {"fig06": ("below", "resonant", "above")}


def build_figure_spec(figure_id: str, tables_dir) -> FigureSpec:
    """Bind a figure definition to the table files in ``tables_dir``.

    Required roles must exist; optional roles are included when their
    default file is present.
    """
    definition = FIGURES.get(figure_id)
    if definition is None:
        raise FigureError(
            f"unknown figure {figure_id!r}; supported: " + ", ".join(sorted(FIGURES))
        )
    tables_dir = Path(tables_dir)
    inputs = {}
    for role, (_, _, filename) in definition.sources.items():
        path = tables_dir / filename
        if path.exists():
            inputs[role] = path
        elif role in definition.required_roles:
            raise FigureError(
                f"{figure_id}: required table {path} not found; generate it "
                f"first (see the make command) or point at the right directory"
            )
    n_panels = len(inputs)
    rows, cols = definition.layout
    if rows * cols > n_panels:
        cols = n_panels if rows == 1 else cols
    return FigureSpec(
        figure_id=figure_id,
        inputs=_mapping(inputs),
        layout=(rows, cols),
        labels=definition.labels,
    )
