"""CLI: plotviz timeseries|violin --in <csv> --out <img> [--approach ...] [--k 2]"""

from __future__ import annotations

import argparse
import sys
from typing import Optional

from .render import PlotSpec, render
from .schema import sniff_violin_kind


def main(argv: Optional[list[str]] = None) -> int:
    parser = argparse.ArgumentParser(
        prog="plotviz", description="render twinsim CSV output as figures")
    sub = parser.add_subparsers(dest="command", required=True)

    p_ts = sub.add_parser("timeseries",
                          help="temperature flow pipe with heater state")
    p_vl = sub.add_parser("violin",
                          help="violin plot of switch errors or uncertainties")
    for p in (p_ts, p_vl):
        p.add_argument("--in", dest="input_path", required=True, help="input CSV")
        p.add_argument("--out", dest="output_path", required=True,
                       help="output image (format by extension: .svg/.pdf/.png)")
        p.add_argument("--k", type=float, default=2.0,
                       help="band half-width in stds (default 2)")
    p_vl.add_argument("--approach", action="append",
                      help="keep only this approach (repeatable; errors CSV only)")

    args = parser.parse_args(argv)
    if args.command == "timeseries":
        kind = "timeseries"
        approaches = None
    else:
        kind = sniff_violin_kind(args.input_path)
        approaches = tuple(args.approach) if args.approach else None
    spec = PlotSpec(input_path=args.input_path, kind=kind,
                    output_path=args.output_path, approaches=approaches, k=args.k)
    result = render(spec)
    print(f"wrote {result.output_path}")
    for name, median in result.annotations.items():
        print(f"  {name}: median {median:.6f}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
