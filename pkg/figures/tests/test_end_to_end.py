"""End-to-end: real generator CLI, reduced sizes, qualitative structure checks.

These tests exercise the actual ``cavitydyn`` executable through the same
subprocess path the ``make`` command uses, then verify the structure of the
resulting tables and images. All structure checks read only the tables and
sidecars; nothing is recomputed from the model.
"""

import shutil

import numpy as np
import pytest

from cavityfigs import load_table, make_figure, produce_tables


@pytest.fixture(scope="module", autouse=True)
def generator_available():
    assert shutil.which("cavitydyn"), "cavitydyn CLI must be installed"


@pytest.fixture(scope="module")
def fig03_made(tmp_path_factory):
    out_dir = tmp_path_factory.mktemp("fig03")
    written = make_figure(
        "fig03",
        out_dir,
        formats=("pdf", "png"),
        overrides=("grid.n_points=801",),
    )
    table = load_table(out_dir / "tables" / "fig03.csv")
    return written, table


@pytest.fixture(scope="module")
def fig04_made(tmp_path_factory):
    out_dir = tmp_path_factory.mktemp("fig04")
    written = make_figure(
        "fig04",
        out_dir,
        formats=("pdf",),
        overrides=("sweep.values=0.8:1.2:5",),
    )
    table = load_table(out_dir / "tables" / "fig04.csv")
    return written, table


@pytest.fixture(scope="module")
def fig06_made(tmp_path_factory):
    out_dir = tmp_path_factory.mktemp("fig06")
    written = make_figure(
        "fig06",
        out_dir,
        formats=("png",),
        overrides=("sweep.values=0:6:7", "sweep2.values=0.3:1.5:7"),
        required_only=True,
    )
    table = load_table(out_dir / "tables" / "fig06.csv")
    return written, table


class TestBeatingFigureEndToEnd:
    def test_images_written(self, fig03_made):
        written, _ = fig03_made
        assert sorted(p.name for p in written) == ["fig03.pdf", "fig03.png"]
        for path in written:
            assert path.stat().st_size > 10000

    def test_backends_overlay(self, fig03_made):
        _, table = fig03_made
        gap = np.max(
            np.abs(table.column("X_fock") - table.column("X_semiclassical"))
        )
        assert gap < 1e-4, f"backend gap {gap:.2e}"

    def test_beating_structure(self, fig03_made):
        _, table = fig03_made
        t = table.column("t")
        x = table.column("X_fock")
        n = table.column("n_photon_fock")
        periods = table.metadata["resolved_config"]["grid"]["periods"]
        beat_period = (t[-1] - t[0]) / periods

        assert abs(x[0] - 3.0) < 1e-6
        assert abs(n[0]) < 1e-6

        def window(center, half_width=0.05):
            return np.abs(t - center * beat_period) < half_width * beat_period

        # Quadrature envelope: node at T/4, full amplitude again at T/2.
        assert np.max(np.abs(x[window(0.25)])) < 1.0, "no envelope node at T/4"
        assert np.max(np.abs(x[window(0.5)])) > 2.5, "no envelope revival at T/2"

        # Photon transfer peaks at the envelope nodes and empties in between.
        peak = float(np.max(n[window(0.25)]))
        assert peak > 2.0, f"photon transfer peak only {peak:.2f}"
        assert float(np.max(n[window(0.75)])) > 2.0
        for center in (0.5, 1.0):
            low = float(np.min(n[window(center)]))
            assert low < 0.25 * peak, f"no photon revival near {center}T"


class TestPeriodSweepEndToEnd:
    def test_image_written(self, fig04_made):
        written, _ = fig04_made
        assert written[0].name == "fig04.pdf"
        assert written[0].stat().st_size > 5000

    def test_detuning_asymmetry_and_rwa_symmetry(self, fig04_made):
        _, table = fig04_made
        assert table.clean_rows().all()
        gamma = table.column("params.gamma")
        period = table.column("period_T")
        rwa = table.column("period_T_rwa")
        below = period[np.isclose(gamma, 0.8)][0]
        above = period[np.isclose(gamma, 1.2)][0]
        assert abs(below - above) / above > 0.05
        rwa_below = rwa[np.isclose(gamma, 0.8)][0]
        rwa_above = rwa[np.isclose(gamma, 1.2)][0]
        assert abs(rwa_below - rwa_above) < 1e-9
        assert np.argmax(period) == int(np.argmin(np.abs(gamma - 1.0)))

    def test_extracted_period_tracks_formula(self, fig04_made):
        _, table = fig04_made
        relative = np.abs(table.column("T_extracted") / table.column("period_T") - 1.0)
        assert float(np.max(relative)) < 0.01

    def test_generator_output_reproducible(self, tmp_path):
        paths = []
        for label in ("a", "b"):
            produced = produce_tables(
                "fig04", tmp_path / label, overrides=("sweep.values=0.9:1.1:3",)
            )
            paths.append(produced["sweep"])
        assert paths[0].read_bytes() == paths[1].read_bytes()


class TestHeatmapEndToEnd:
    def test_image_written(self, fig06_made):
        written, _ = fig06_made
        assert written[0].name == "fig06.png"
        assert written[0].stat().st_size > 10000

    def test_sub_poissonian_region_with_zero_crossing(self, fig06_made):
        _, table = fig06_made
        q = table.column("Q_photon_avg")
        assert table.clean_rows().all(), "unexpected invalid rows in the heatmap sweep"
        assert float(np.min(q)) < -0.2, "no sub-Poissonian region"
        assert float(np.max(q)) > 0.5, "no super-Poissonian region"

        x0 = table.column("initial.x0")
        w = table.column("initial.w")

        def cell(x_val, w_val):
            return float(q[np.isclose(x0, x_val) & np.isclose(w, w_val)][0])

        # Sub-Poissonian statistics need displacement AND moderate squeezing;
        # the squeezed vacuum alone and any stretched state stay positive.
        assert cell(6.0, 0.5) < -0.2
        assert cell(0.0, 0.3) > 1.0
        assert cell(3.0, 1.5) > 0.3
        assert np.all(q[w > 1.0] > 0.0)
