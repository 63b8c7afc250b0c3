"""Unit tests for export tools (export_tools.py)

Tests SVG generation of rho_k figures and the optional PNG export.
"""

import sys
import xml.etree.ElementTree as ET

import pytest

from rkl.engine.experiments import run_ensemble
from rkl.engine.export_tools import (
    MAX_POINTS,
    _Axes,
    create_dashed_line_svg,
    create_polyline_svg,
    decimate,
    export_rho_figure,
    render_rho_figure,
)
from rkl.engine.models import EnsembleConfig


@pytest.fixture(scope="module")
def small_result():
    return run_ensemble(EnsembleConfig(matrix="A1", trials=3, seed=1, max_iters=30))


# ===== Decimation Tests =====


class TestDecimate:
    """Tests for decimate()"""

    def test_short_series_untouched(self):
        assert decimate([0.5, 0.4, 0.3]) == [(1, 0.5), (2, 0.4), (3, 0.3)]

    def test_long_series_thinned(self):
        values = [1.0 / (k + 1) for k in range(2000)]
        points = decimate(values)

        assert len(points) <= MAX_POINTS
        assert points[0] == (1, 1.0)
        assert points[-1][0] == 2000
        ks = [k for k, _ in points]
        assert ks == sorted(set(ks))

    def test_empty(self):
        assert decimate([]) == []


# ===== SVG Element Tests =====


class TestSvgElements:
    """Tests for the polyline helpers"""

    def test_polyline_points(self):
        axes = _Axes(k_max=10, y_max=1.0)
        svg = create_polyline_svg([(1, 0.5), (10, 0.25)], axes)
        assert svg.startswith("<polyline")
        assert svg.count(",") == 2

    def test_dashed_line_is_horizontal(self):
        axes = _Axes(k_max=10, y_max=1.0)
        svg = create_dashed_line_svg(0.5, axes)
        points = ET.fromstring(svg).get("points").split()
        assert len(points) == 2
        assert points[0].split(",")[1] == points[1].split(",")[1]
        assert "stroke-dasharray" in svg

    def test_values_above_axis_are_clipped(self):
        axes = _Axes(k_max=10, y_max=1.0)
        assert axes.y(5.0) == axes.y(1.0)
        assert axes.y(-1.0) == axes.y(0.0)


# ===== Figure Rendering Tests =====


class TestRenderRhoFigure:
    """Tests for render_rho_figure()"""

    def test_one_curve_per_trial_plus_bound(self, small_result):
        svg = render_rho_figure(small_result, title="A1")
        assert svg.count("<polyline") == len(small_result.traces) + 1
        assert svg.count("stroke-dasharray") == 1

    def test_valid_xml(self, small_result):
        svg = render_rho_figure(small_result, title="A1 < A2 & more")
        try:
            root = ET.fromstring(svg.encode("utf-8"))
        except ET.ParseError as e:
            pytest.fail(f"Invalid SVG XML: {e}")
        assert root.tag.endswith("svg")
        assert "A1 &lt; A2 &amp; more" in svg


# ===== Export Tests =====


class TestExportRhoFigure:
    """Tests for export_rho_figure()"""

    def test_writes_svg(self, small_result, tmp_path):
        summary = export_rho_figure(small_result, tmp_path / "figs" / "fig1_A1", title="A1")

        svg_path = tmp_path / "figs" / "fig1_A1.svg"
        assert summary["files_created"] == [str(svg_path)]
        assert svg_path.read_text(encoding="utf-8").startswith("<?xml")
        assert "warning" not in summary

    def test_png_without_cairosvg(self, small_result, tmp_path, monkeypatch):
        monkeypatch.setitem(sys.modules, "cairosvg", None)

        summary = export_rho_figure(small_result, tmp_path / "fig", png=True)

        assert summary["warning"] == "PNG export requires cairosvg library"
        assert "pip install cairosvg" in summary["note"]
        assert len(summary["files_created"]) == 1

    def test_png_with_cairosvg(self, small_result, tmp_path, mocker):
        fake = mocker.MagicMock()
        mocker.patch.dict(sys.modules, {"cairosvg": fake})

        summary = export_rho_figure(small_result, tmp_path / "fig", png=True)

        fake.svg2png.assert_called_once()
        kwargs = fake.svg2png.call_args.kwargs
        assert kwargs["write_to"] == str(tmp_path / "fig.png")
        assert kwargs["bytestring"].startswith(b"<?xml")
        assert summary["files_created"][-1] == str(tmp_path / "fig.png")
