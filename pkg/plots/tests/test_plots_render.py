"""Renderer unit tests: spec parsing, ingestion errors, figure output."""

import json

import pytest

from fnls_plots.config import PlotSpec, load_plot_specs
from fnls_plots.errors import PlotDataError, PlotSpecError
from fnls_plots.reading import read_summary, read_table
from fnls_plots.render import render_plot


def write(path, text):
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)
    return path


def envelope_artifacts(tmp_path, slope=-0.0625):
    csv = write(tmp_path / "env.csv",
                "N,t,sup_kappa,omega,ratio\n"
                "8,0.01,400.0,512.0,0.78\n"
                "8,0.1,120.0,160.0,0.75\n"
                "16,0.01,1500.0,2048.0,0.73\n"
                "16,0.1,450.0,640.0,0.70\n")
    summary = write(tmp_path / "env.json", json.dumps(
        {"name": "env", "kind": "envelope-certificate",
         "results": {"alpha": 2.0, "d": 1, "slope": slope, "residual": 0.01}}))
    return csv, summary


class TestSpecLoading:
    def test_blocks_and_relative_paths(self, tmp_path):
        spec = write(tmp_path / "p.toml",
                     '[[plot]]\nkind = "envelope"\ncsv = "a.csv"\n'
                     'summary = "a.json"\nout = "figs/a"\ntitle = "t"\n')
        specs, violations = load_plot_specs(spec)
        assert violations == []
        assert specs[0].csv == tmp_path / "a.csv"
        assert specs[0].out == tmp_path / "figs" / "a"
        assert specs[0].title == "t"

    def test_every_violation_listed(self, tmp_path):
        spec = write(tmp_path / "p.toml",
                     'stray = 1\n'
                     '[[plot]]\nkind = "volume"\ncsv = "a.csv"\n'
                     'summary = "a.json"\nout = "x"\nextra = 2\n'
                     '[[plot]]\nkind = "envelope"\ncsv = "b.csv"\n')
        _, violations = load_plot_specs(spec)
        text = "\n".join(violations)
        assert "stray: unknown top-level key" in text
        assert "plot[0].kind: unknown kind 'volume'" in text
        assert "plot[0].extra: unknown field" in text
        assert "plot[1].summary: required" in text
        assert "plot[1].out: required" in text

    def test_duplicate_out_rejected(self, tmp_path):
        spec = write(tmp_path / "p.toml",
                     '[[plot]]\nkind = "envelope"\ncsv = "a.csv"\n'
                     'summary = "a.json"\nout = "x"\n'
                     '[[plot]]\nkind = "gronwall"\ncsv = "b.csv"\n'
                     'summary = "b.json"\nout = "x"\n')
        specs, violations = load_plot_specs(spec)
        assert len(specs) == 1
        assert any("duplicates" in v for v in violations)

    def test_empty_document(self, tmp_path):
        _, violations = load_plot_specs(write(tmp_path / "p.toml", ""))
        assert violations == ["plot: no [[plot]] blocks"]

    def test_unreadable_and_malformed(self, tmp_path):
        with pytest.raises(PlotSpecError, match="unreadable"):
            load_plot_specs(tmp_path / "missing.toml")
        with pytest.raises(PlotSpecError, match="TOML parse error"):
            load_plot_specs(write(tmp_path / "bad.toml", "[[plot"))


class TestReading:
    def test_missing_column_named(self, tmp_path):
        csv = write(tmp_path / "t.csv", "N,t\n8,0.1\n")
        with pytest.raises(PlotDataError, match="ratio"):
            read_table(csv, ("N", "t", "ratio"))

    def test_empty_table(self, tmp_path):
        csv = write(tmp_path / "t.csv", "N,t,ratio\n")
        with pytest.raises(PlotDataError, match="no data rows"):
            read_table(csv, ("N", "ratio"))

    def test_schema_error_wins_over_emptiness(self, tmp_path):
        csv = write(tmp_path / "t.csv", "N,t\n")
        with pytest.raises(PlotDataError, match="ratio"):
            read_table(csv, ("ratio",))

    def test_non_numeric_cell_located(self, tmp_path):
        csv = write(tmp_path / "t.csv", "N,ratio\n8,0.5\n16,oops\n")
        with pytest.raises(PlotDataError, match="line 3, column ratio"):
            read_table(csv, ("N", "ratio"))

    def test_summary_requires_results(self, tmp_path):
        path = write(tmp_path / "s.json", json.dumps({"name": "x"}))
        with pytest.raises(PlotDataError, match="no 'results'"):
            read_summary(path)
        ok = write(tmp_path / "ok.json", json.dumps({"results": {"slope": 1.0}}))
        assert read_summary(ok) == {"slope": 1.0}


class TestRendering:
    def test_envelope_annotation_quotes_summary(self, tmp_path):
        # the CSV implies a different trend; the annotation must still be
        # the JSON number, proving nothing is refitted here
        csv, summary = envelope_artifacts(tmp_path, slope=-0.0625)
        spec = PlotSpec("envelope", csv, summary, tmp_path / "figs" / "env")
        png, svg = render_plot(spec)
        assert png.exists() and svg.exists()
        assert "slope -0.062" in svg.read_text()

    def test_byte_deterministic(self, tmp_path):
        csv, summary = envelope_artifacts(tmp_path)
        spec = PlotSpec("envelope", csv, summary, tmp_path / "figs" / "env")
        first = [p.read_bytes() for p in render_plot(spec)]
        second = [p.read_bytes() for p in render_plot(spec)]
        assert first == second

    def test_scaling_predicted_overlay(self, tmp_path):
        csv = write(tmp_path / "s.csv",
                    "N,quotient,n_time_samples\n8,3.1,1024\n16,5.6,1024\n"
                    "32,10.2,2048\n")
        summary = write(tmp_path / "s.json", json.dumps(
            {"results": {"slope": 0.8135, "predicted": 0.8125,
                         "residual": 0.001}}))
        spec = PlotSpec("scaling", csv, summary, tmp_path / "figs" / "s")
        _, svg = render_plot(spec)
        text = svg.read_text()
        assert "slope 0.814" in text and "predicted 0.812" in text

    def test_growth_uses_fit_columns(self, tmp_path):
        csv = write(tmp_path / "g.csv",
                    "t,mass,energy,linf,h_3,h_1.5\n"
                    "0.0,1.0,2.0,0.5,4.0,2.0\n"
                    "1.0,1.0,2.0,0.5,4.1,2.0\n"
                    "10.0,1.0,2.0,0.5,4.4,2.0\n")
        summary = write(tmp_path / "g.json", json.dumps(
            {"results": {"bound": 3.0, "fits": {
                "h_3": {"exponent": 0.031, "residual": 1e-3},
                "h_1.5": {"exponent": 0.0001, "residual": 1e-5}}}}))
        spec = PlotSpec("growth", csv, summary, tmp_path / "figs" / "g")
        _, svg = render_plot(spec)
        text = svg.read_text()
        assert "h_3 slope 0.031" in text and "h_1.5 slope 0.000" in text

    def test_growth_missing_fit_column_in_csv(self, tmp_path):
        csv = write(tmp_path / "g.csv", "t,h_3\n0.0,4.0\n1.0,4.1\n")
        summary = write(tmp_path / "g.json", json.dumps(
            {"results": {"fits": {"h_3": {"exponent": 0.1},
                                  "h_1.5": {"exponent": 0.0}}}}))
        spec = PlotSpec("growth", csv, summary, tmp_path / "figs" / "g")
        with pytest.raises(PlotDataError, match="h_1.5"):
            render_plot(spec)

    def test_gronwall_annotations(self, tmp_path):
        csv = write(tmp_path / "w.csv", "t,f\n1.0,1.5\n10.0,30.0\n100.0,2600.0\n")
        summary = write(tmp_path / "w.json", json.dumps(
            {"results": {"predicted": 2.0, "fitted_exponent": 1.984,
                         "residual": 0.01, "variant": 1, "T": 100.0}}))
        spec = PlotSpec("gronwall", csv, summary, tmp_path / "figs" / "w")
        _, svg = render_plot(spec)
        text = svg.read_text()
        assert "fitted 1.984" in text and "predicted 2.000" in text

    def test_all_points_nonpositive_rejected(self, tmp_path):
        csv = write(tmp_path / "w.csv", "t,f\n0.0,1.0\n")
        summary = write(tmp_path / "w.json", json.dumps(
            {"results": {"predicted": 2.0, "fitted_exponent": 2.0}}))
        spec = PlotSpec("gronwall", csv, summary, tmp_path / "figs" / "w")
        with pytest.raises(PlotDataError, match="log axes"):
            render_plot(spec)
