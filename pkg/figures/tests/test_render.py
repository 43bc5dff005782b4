"""Render tests; all input data comes from the dce-lab CLI (subprocess)."""

import subprocess
import sys

import numpy as np
import pytest

from dce_figures import FigureSpec, SchemaError, render
from dce_figures.cli import main as cli_main
from dce_figures.render import boundary_curve, read_sweep, read_trajectory


def dce_lab(*argv):
    result = subprocess.run([sys.executable, "-m", "dce_lab.cli", *argv],
                            capture_output=True, text=True)
    assert result.returncode == 0, result.stderr
    return result.stdout


@pytest.fixture(scope="module")
def datasets(tmp_path_factory):
    """The acceptance-run CSVs, produced through the dce-lab CLI."""
    root = tmp_path_factory.mktemp("data")
    paths = {
        "sweep3": root / "fig2_n3.csv",
        "sweep6": root / "fig2_n6.csv",
        "full": root / "fig3_full.csv",
        "rwa": root / "fig3_rwa.csv",
        "rwa6": root / "fig5_rwa.csv",
    }
    sweep_grid = ["--eps", "0.05:0.59:0.03", "--ratio-log", "0:16:0.5"]
    dce_lab("sweep", "--n", "3", *sweep_grid, "--out", str(paths["sweep3"]))
    dce_lab("sweep", "--n", "6", *sweep_grid, "--out", str(paths["sweep6"]))
    point = ["--k", "3", "--n", "3", "--eps", "0.45", "--ratio", "1e3"]
    dce_lab("simulate", *point, "--mode", "full", "--tol", "1e-8",
            "--samples", "800", "--out", str(paths["full"]))
    dce_lab("simulate", *point, "--mode", "rwa", "--samples", "800",
            "--out", str(paths["rwa"]))
    dce_lab("simulate", "--k", "6", "--n", "6", "--eps", "0.02",
            "--ratio", "1e16", "--mode", "rwa", "--samples", "500",
            "--out", str(paths["rwa6"]))
    return paths


class TestReaders:
    def test_sweep_reader_roundtrip(self, datasets):
        eps, ratio, lam, unstable = read_sweep(str(datasets["sweep3"]))
        assert eps.size == ratio.size == lam.size == unstable.size
        assert np.any(unstable) and np.any(~unstable)

    def test_trajectory_reader(self, datasets):
        t, n = read_trajectory(str(datasets["full"]), 3)
        assert t.size == 800
        assert n.shape == (800, 3)
        assert np.all(n >= 0)

    def test_schema_mismatch_fails_loudly(self, tmp_path):
        bad = tmp_path / "bad.csv"
        bad.write_text("a,b,c\n1,2,3\n")
        with pytest.raises(SchemaError, match="header"):
            read_sweep(str(bad))
        with pytest.raises(SchemaError, match="missing column"):
            read_trajectory(str(bad), 1)

    def test_empty_file_fails_loudly(self, tmp_path):
        empty = tmp_path / "empty.csv"
        empty.write_text("")
        with pytest.raises(SchemaError, match="empty"):
            read_sweep(str(empty))
        header_only = tmp_path / "header.csv"
        header_only.write_text("epsilon,ratio,lambda_max,unstable\n")
        with pytest.raises(SchemaError, match="no data"):
            read_sweep(str(header_only))


class TestFigureSpec:
    def test_input_arity_enforced(self, datasets):
        with pytest.raises(SchemaError, match="needs 2"):
            FigureSpec("fig2", (str(datasets["sweep3"]),), "x.png")
        with pytest.raises(SchemaError, match="needs 1"):
            FigureSpec("fig4", (str(datasets["full"]), str(datasets["rwa"])),
                       "x.png")

    def test_unknown_id_rejected(self):
        with pytest.raises(SchemaError, match="figure id"):
            FigureSpec("fig9", ("a.csv",), "x.png")


class TestRendering:
    def test_fig2_curves_and_ordering(self, datasets, tmp_path):
        out = tmp_path / "fig2.png"
        spec = FigureSpec("fig2", (str(datasets["sweep3"]),
                                   str(datasets["sweep6"])), str(out))
        summary = render(spec)
        assert out.exists() and out.stat().st_size > 0
        assert summary.figure_id == "fig2"
        assert all(p > 0 for p in summary.series_points)
        # lower boundary curve belongs to the third-order resonance:
        # on shared modulation depths it sits strictly below the sixth-order
        # curve, so its unstable region opens up first
        (l3, c3), (l6, c6) = summary.curves.items()
        assert l3 == "order 3" and l6 == "order 6"
        common = sorted(set(c3[0]) & set(c6[0]))
        assert common
        for e in common:
            y3 = c3[1][list(c3[0]).index(e)]
            y6 = c6[1][list(c6[0]).index(e)]
            assert y3 < y6

    def test_fig3_full_above_filtered_at_late_times(self, datasets, tmp_path):
        out = tmp_path / "fig3.png"
        summary = render(FigureSpec("fig3", (str(datasets["full"]),
                                             str(datasets["rwa"])), str(out)))
        assert out.exists() and out.stat().st_size > 0
        full_t, full_n = summary.curves["with oscillating terms"]
        rwa_t, rwa_n = summary.curves["stationary terms only"]
        late = full_t > 0.5 * full_t[-1]
        assert np.all(full_n[late] >= rwa_n[late])

    def test_fig4_renders_three_modes(self, datasets, tmp_path):
        out = tmp_path / "fig4.png"
        summary = render(FigureSpec("fig4", (str(datasets["full"]),), str(out)))
        assert out.exists()
        assert set(summary.curves) == {"mode 1", "mode 2", "mode 3"}

    def test_fig5_renders(self, datasets, tmp_path):
        out = tmp_path / "fig5.png"
        summary = render(FigureSpec("fig5", (str(datasets["rwa6"]),), str(out)))
        assert out.exists()
        (t, n1), = summary.curves.values()
        assert n1[-1] > n1[0]  # unstable regime grows

    def test_rendering_is_deterministic_in_shape(self, datasets, tmp_path):
        spec1 = FigureSpec("fig5", (str(datasets["rwa6"]),),
                           str(tmp_path / "a.png"))
        spec2 = FigureSpec("fig5", (str(datasets["rwa6"]),),
                           str(tmp_path / "b.png"))
        s1, s2 = render(spec1), render(spec2)
        assert s1.series_points == s2.series_points
        assert (s1.width_px, s1.height_px) == (s2.width_px, s2.height_px)


class TestCli:
    def test_cli_renders_every_figure(self, datasets, tmp_path, capsys):
        jobs = [
            ("fig2", [str(datasets["sweep3"]), str(datasets["sweep6"])]),
            ("fig3", [str(datasets["full"]), str(datasets["rwa"])]),
            ("fig4", [str(datasets["full"])]),
            ("fig5", [str(datasets["rwa6"])]),
        ]
        for fig_id, inputs in jobs:
            out = tmp_path / f"{fig_id}.png"
            code = cli_main([fig_id, "--in", *inputs, "--out", str(out)])
            assert code == 0, fig_id
            assert out.exists() and out.stat().st_size > 0
            assert "wrote" in capsys.readouterr().out

    def test_cli_empty_csv_fails_without_output(self, tmp_path, capsys):
        empty = tmp_path / "empty.csv"
        empty.write_text("")
        out = tmp_path / "nope.png"
        code = cli_main(["fig5", "--in", str(empty), "--out", str(out)])
        assert code == 1
        assert not out.exists()
        assert "error:" in capsys.readouterr().err

    def test_cli_usage_error(self):
        with pytest.raises(SystemExit) as exc:
            cli_main(["fig7", "--in", "x.csv", "--out", "y.png"])
        assert exc.value.code == 2

    def test_cli_linear_axis_flag(self, datasets, tmp_path, capsys):
        out = tmp_path / "lin.png"
        code = cli_main(["fig5", "--in", str(datasets["rwa6"]),
                         "--out", str(out), "--linear-y"])
        assert code == 0 and out.exists()
