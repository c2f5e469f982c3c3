"""Shared fixtures: synthetic tables and a stub table generator.

The synthetic tables mimic the generator CLI's on-disk format (round-trip
float cells, empty cells for undefined values, optional trailing error
column, JSON sidecar) without running any simulation, so the rendering
tests are fast and self-contained.
"""

import json
import math
import stat
import sys
import textwrap
from pathlib import Path

import numpy as np
import pytest


def format_cell(value) -> str:
    if value is None or (isinstance(value, float) and math.isnan(value)):
        return ""
    return repr(float(value))


def write_csv(path, columns, rows, row_errors=None, sidecar=None) -> Path:
    """Write a table the way the generator CLI does."""
    path = Path(path)
    header = list(columns)
    if row_errors is not None:
        header.append("error")
    lines = [",".join(header)]
    for i, row in enumerate(rows):
        cells = [format_cell(v) for v in row]
        if row_errors is not None:
            cells.append(row_errors[i])
        lines.append(",".join(cells))
    path.write_text("\n".join(lines) + "\n")
    if sidecar is not None:
        path.with_name(path.name + ".meta.json").write_text(json.dumps(sidecar))
    return path


def beating_series_rows(n_rows=121, periods=2.0):
    """Toy two-backend beating data: carrier times a slow beat envelope."""
    beat_period = 40.0
    t = np.linspace(0.0, periods * beat_period, n_rows)
    envelope = np.cos(math.pi * t / beat_period)
    x = 3.0 * envelope * np.cos(2.0 * math.pi * t / 4.0)
    n = 2.25 * (1.0 - envelope**2) + 0.05
    rows = [
        [t[i], x[i], x[i] * (1.0 + 1e-6), n[i], n[i] * (1.0 + 1e-6)]
        for i in range(n_rows)
    ]
    columns = [
        "t",
        "X_semiclassical",
        "X_fock",
        "n_photon_semiclassical",
        "n_photon_fock",
    ]
    return columns, rows, beat_period


@pytest.fixture
def fig03_table(tmp_path):
    columns, rows, beat_period = beating_series_rows()
    sidecar = {
        "resolved_config": {"grid": {"periods": 2.0}},
        "columns": columns,
    }
    path = write_csv(tmp_path / "fig03.csv", columns, rows, sidecar=sidecar)
    return path, beat_period


def period_sweep_rows(n_rows=9, bad_row=None):
    gammas = np.linspace(0.8, 1.2, n_rows)
    columns = ["params.gamma", "period_T", "period_T_rwa", "T_extracted"]
    rows, errors = [], []
    for i, g in enumerate(gammas):
        if i == bad_row:
            rows.append([g, math.nan, math.nan, math.nan])
            errors.append("UnsupportedVariant: example row error")
            continue
        period = 60.0 / (0.2 + abs(g - 1.0) + 0.5 * max(0.0, 1.0 - g))
        rwa = 60.0 / (0.2 + abs(g - 1.0))
        rows.append([g, period, rwa, period * 1.001])
        errors.append("")
    return columns, rows, errors


@pytest.fixture
def fig04_table(tmp_path):
    columns, rows, errors = period_sweep_rows(bad_row=4)
    path = write_csv(tmp_path / "fig04.csv", columns, rows, row_errors=errors)
    return path


def heatmap_rows(nx=5, ny=4, gamma=1.0, constant=None):
    xs = np.linspace(0.0, 6.0, nx)
    ws = np.linspace(0.5, 1.4, ny)
    columns = ["initial.x0", "initial.w", "Q_photon_avg"]
    rows = []
    for x0 in xs:
        for w in ws:
            value = constant if constant is not None else 0.4 * (w - 1.0) * (1.0 + x0)
            rows.append([x0, w, value])
    sidecar = {"resolved_config": {"params": {"gamma": gamma}}, "columns": columns}
    return columns, rows, sidecar


@pytest.fixture
def fig06_table(tmp_path):
    columns, rows, sidecar = heatmap_rows()
    path = write_csv(tmp_path / "fig06.csv", columns, rows, sidecar=sidecar)
    return path


def _write_executable(path: Path, body: str) -> Path:
    path.write_text(f"#!{sys.executable}\n" + textwrap.dedent(body))
    path.chmod(path.stat().st_mode | stat.S_IXUSR | stat.S_IRUSR)
    return path


@pytest.fixture
def stub_generator(tmp_path):
    """A fake generator executable that copies canned tables into --out.

    It records its argv next to each output file so tests can check which
    scenario, overrides, and flags were passed. Asking for a table that
    has no canned source fails with a message on stderr, mimicking a
    generator error.
    """
    canned = tmp_path / "canned"
    canned.mkdir()

    columns, rows, _ = beating_series_rows(n_rows=41)
    write_csv(
        canned / "fig03.csv",
        columns,
        rows,
        sidecar={"resolved_config": {"grid": {"periods": 2.0}}},
    )
    columns, rows, errors = period_sweep_rows()
    write_csv(canned / "fig04.csv", columns, rows, row_errors=errors)
    for name, gamma in (
        ("fig06.csv", 1.0),
        ("fig06_below.csv", 0.8),
        ("fig06_above.csv", 1.2),
    ):
        columns, rows, sidecar = heatmap_rows(gamma=gamma)
        write_csv(canned / name, columns, rows, sidecar=sidecar)

    stub = _write_executable(
        tmp_path / "fake-generator",
        f"""
        import json, shutil, sys
        from pathlib import Path

        canned = Path({str(canned)!r})
        args = sys.argv[1:]
        out = Path(args[args.index("--out") + 1])
        source = canned / out.name
        if not source.exists():
            print(f"no canned table for {{out.name}}", file=sys.stderr)
            sys.exit(3)
        shutil.copy(source, out)
        sidecar = source.with_name(source.name + ".meta.json")
        if sidecar.exists():
            shutil.copy(sidecar, out.with_name(out.name + ".meta.json"))
        out.with_name(out.name + ".argv.json").write_text(json.dumps(args))
        """,
    )
    return stub


@pytest.fixture
def failing_generator(tmp_path):
    return _write_executable(
        tmp_path / "broken-generator",
        """
        import sys
        print("stage one ok")
        print("simulated blow-up: parameters outside validity domain", file=sys.stderr)
        sys.exit(3)
        """,
    )
