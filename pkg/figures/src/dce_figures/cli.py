"""render_figure: draw one study figure from dce-lab CSV output.

Usage:
  render_figure fig2 --in sweep_n3.csv sweep_n6.csv --out fig2.png
  render_figure fig3 --in full.csv rwa.csv --out fig3.png
  render_figure fig4 --in full.csv --out fig4.png
  render_figure fig5 --in rwa_n6.csv --out fig5.png

Exit codes: 0 success, 1 bad inputs (schema mismatch, empty data), 2 usage.
"""

from __future__ import annotations

import argparse
import sys

from .render import FIGURE_IDS, FigureSpec, SchemaError, render


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="render_figure", description=__doc__)
    parser.add_argument("figure_id", choices=FIGURE_IDS)
    parser.add_argument("--in", dest="inputs", nargs="+", required=True,
                        metavar="CSV", help="input CSV file(s), order matters")
    parser.add_argument("--out", required=True, help="output image path")
    parser.add_argument("--linear-y", action="store_true",
                        help="linear photon axis for fig3..fig5")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    spec_kwargs = {}
    if args.linear_y:
        spec_kwargs["log_y"] = False
    try:
        spec = FigureSpec(figure_id=args.figure_id,
                          input_paths=tuple(args.inputs),
                          output_path=args.out, **spec_kwargs)
        summary = render(spec)
    except (SchemaError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {summary.output_path} "
          f"({summary.width_px}x{summary.height_px}, "
          f"series points {list(summary.series_points)})")
    return 0


if __name__ == "__main__":
    sys.exit(main())
