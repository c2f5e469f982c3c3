"""Produce input tables by invoking the simulation CLI, then render.

This package never imports the simulation engine; tables are generated by
running its command-line interface as a subprocess, so the figures are
guaranteed to be functions of the public table format alone.
"""

from __future__ import annotations

import subprocess
from pathlib import Path

from .errors import FigureError
from .render import render
from .spec import FIGURES, build_figure_spec

__all__ = ["produce_tables", "make_figure"]


def _run_generator(cmd: list) -> None:
    try:
        result = subprocess.run(cmd, capture_output=True, text=True)
    except OSError as exc:
        raise FigureError(
            f"cannot run table generator {cmd[0]!r}: {exc}; "
            "install the simulation package or pass an explicit executable"
        ) from None
    if result.returncode != 0:
        detail = (result.stderr or result.stdout).strip().splitlines()
        tail = "; ".join(detail[-3:]) if detail else "no output"
        raise FigureError(
            f"table generator failed (exit {result.returncode}): {tail}"
        )


def produce_tables(
    figure_id: str,
    tables_dir,
    generator: str = "cavitydyn",
    overrides=(),
    jobs: int | None = None,
    roles=None,
) -> dict:
    """Run the simulation CLI to produce every table a figure needs.

    ``overrides`` are extra ``section.key=value`` settings appended to each
    scenario invocation (handy for smaller sweeps); ``roles`` restricts
    generation to a subset of the figure's input roles.
    """
    definition = FIGURES.get(figure_id)
    if definition is None:
        raise FigureError(
            f"unknown figure {figure_id!r}; supported: " + ", ".join(sorted(FIGURES))
        )
    tables_dir = Path(tables_dir)
    tables_dir.mkdir(parents=True, exist_ok=True)
    wanted = definition.sources.keys() if roles is None else tuple(roles)
    produced = {}
    for role in wanted:
        if role not in definition.sources:
            raise FigureError(
                f"{figure_id} has no input role {role!r}; roles: "
                + ", ".join(definition.sources)
            )
        scenario, extra_sets, filename = definition.sources[role]
        out_path = tables_dir / filename
        cmd = [generator, "scenario", scenario, "--out", str(out_path)]
        for setting in (*extra_sets, *overrides):
            cmd += ["--set", setting]
        if jobs is not None:
            cmd += ["--jobs", str(jobs)]
        _run_generator(cmd)
        produced[role] = out_path
    return produced


def make_figure(
    figure_id: str,
    out_dir,
    tables_dir=None,
    formats=("pdf", "png"),
    generator: str = "cavitydyn",
    overrides=(),
    jobs: int | None = None,
    required_only: bool = False,
) -> list:
    """Generate tables for a figure and render it; returns written image paths."""
    definition = FIGURES.get(figure_id)
    if definition is None:
        raise FigureError(
            f"unknown figure {figure_id!r}; supported: " + ", ".join(sorted(FIGURES))
        )
    out_dir = Path(out_dir)
    tables_dir = Path(tables_dir) if tables_dir is not None else out_dir / "tables"
    roles = definition.required_roles if required_only else None
    produce_tables(
        figure_id,
        tables_dir,
        generator=generator,
        overrides=overrides,
        jobs=jobs,
        roles=roles,
    )
    spec = build_figure_spec(figure_id, tables_dir)
    return render(spec, out_dir, formats=formats)
