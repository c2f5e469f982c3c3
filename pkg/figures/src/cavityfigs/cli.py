"""Command-line interface: list figures, render from existing tables, or make both."""

from __future__ import annotations

import argparse
import sys

from .errors import FigureError
from .make import make_figure
from .render import SUPPORTED_FORMATS, render
from .spec import FIGURES, build_figure_spec

__all__ = ["main", "build_parser"]


def _formats(text: str) -> tuple:
    return tuple(part.strip() for part in text.split(",") if part.strip())


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cavityfigs",
        description="Render publication-style figures from simulation CLI tables.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("list", help="list supported figures")

    p_render = sub.add_parser("render", help="render a figure from existing tables")
    p_render.add_argument("figure", help="figure id, e.g. fig03")
    p_render.add_argument("--tables-dir", default="tables", help="directory holding the input tables")
    p_render.add_argument("--out-dir", default=".", help="directory for the image files")
    p_render.add_argument(
        "--formats",
        type=_formats,
        default=("pdf", "png"),
        help="comma-separated output formats: " + ", ".join(SUPPORTED_FORMATS),
    )

    p_make = sub.add_parser(
        "make", help="generate the tables with the simulation CLI, then render"
    )
    p_make.add_argument("figure", help="figure id, e.g. fig03")
    p_make.add_argument("--out-dir", default=".", help="directory for the image files")
    p_make.add_argument(
        "--tables-dir",
        default=None,
        help="directory for generated tables (default: OUT_DIR/tables)",
    )
    p_make.add_argument(
        "--formats", type=_formats, default=("pdf", "png"), help="comma-separated formats"
    )
    p_make.add_argument(
        "--generator",
        default="cavitydyn",
        help="simulation CLI executable (default: cavitydyn on PATH)",
    )
    p_make.add_argument(
        "--set",
        dest="overrides",
        action="append",
        default=[],
        metavar="SECTION.KEY=VALUE",
        help="extra scenario override passed to every generator run (repeatable)",
    )
    p_make.add_argument("--jobs", type=int, default=None, help="generator sweep workers")
    p_make.add_argument(
        "--required-only",
        action="store_true",
        help="generate only the figure's required tables (skip optional panels)",
    )
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "list":
            for figure_id in sorted(FIGURES):
                print(f"{figure_id}: {FIGURES[figure_id].description}")
            return 0
        if args.command == "render":
            spec = build_figure_spec(args.figure, args.tables_dir)
            for path in render(spec, args.out_dir, formats=args.formats):
                print(f"wrote {path}")
            return 0
        if args.command == "make":
            written = make_figure(
                args.figure,
                args.out_dir,
                tables_dir=args.tables_dir,
                formats=args.formats,
                generator=args.generator,
                overrides=tuple(args.overrides),
                jobs=args.jobs,
                required_only=args.required_only,
            )
            for path in written:
                print(f"wrote {path}")
            return 0
        raise AssertionError(f"unhandled command {args.command!r}")
    except FigureError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
