#!/usr/bin/env python3
"""Produce the CSV datasets behind the four study figures.

Runs the dce-lab CLI end to end:

  fig2_n3.csv / fig2_n6.csv   stability maps (third and sixth order)
  fig3_full.csv / fig3_rwa.csv lowest-mode growth at eps=0.45, ratio=1e3
                               (fig4 reads the modes 2 and 3 columns of
                               fig3_full.csv)
  fig5_rwa.csv                 sixth-order growth at eps=0.02, ratio=1e16

Render afterwards with the dce-figures package:

  render_figure fig2 --in out/fig2_n3.csv out/fig2_n6.csv --out out/fig2.png
  render_figure fig3 --in out/fig3_full.csv out/fig3_rwa.csv --out out/fig3.png
  render_figure fig4 --in out/fig3_full.csv --out out/fig4.png
  render_figure fig5 --in out/fig5_rwa.csv --out out/fig5.png
"""

import argparse
import pathlib
import sys

from dce_lab.cli import main as dce_lab_main


def run(argv):
    print("dce-lab " + " ".join(argv))
    code = dce_lab_main(argv)
    if code != 0:
        sys.exit(code)


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--outdir", default="out")
    parser.add_argument("--tol", type=float, default=1e-9,
                        help="local error target for the full integration")
    args = parser.parse_args()
    out = pathlib.Path(args.outdir)
    out.mkdir(parents=True, exist_ok=True)

    run(["sweep", "--n", "3", "--eps", "0.05:0.6:0.01",
         "--ratio-log", "0:16:0.25", "--out", str(out / "fig2_n3.csv")])
    run(["sweep", "--n", "6", "--eps", "0.05:0.6:0.01",
         "--ratio-log", "0:16:0.25", "--out", str(out / "fig2_n6.csv")])

    point3 = ["--k", "3", "--n", "3", "--eps", "0.45", "--ratio", "1e3"]
    run(["simulate", *point3, "--mode", "full", "--tol", str(args.tol),
         "--out", str(out / "fig3_full.csv")])
    run(["simulate", *point3, "--mode", "rwa",
         "--out", str(out / "fig3_rwa.csv")])

    run(["simulate", "--k", "6", "--n", "6", "--eps", "0.02",
         "--ratio", "1e16", "--mode", "rwa",
         "--out", str(out / "fig5_rwa.csv")])

    print(f"datasets written to {out}/")


if __name__ == "__main__":
    main()
