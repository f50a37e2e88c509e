import argparse
import sys

from .figures import KINDS, render
from .reader import read_rows


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="qrepplot", description="Render sweep CSVs to figures")
    sub = parser.add_subparsers(dest="command", required=True)
    rp = sub.add_parser("render", help="render one CSV to one image")
    rp.add_argument("--input", required=True, help="sweep CSV produced by the simulator CLI")
    rp.add_argument("--kind", required=True, choices=KINDS, help="figure kind")
    rp.add_argument("--out", required=True, help="output image path (extension picks the format)")
    rp.add_argument("--overlay", action="store_true",
                    help="draw the analytic dephasing curve (channel only)")
    args = parser.parse_args(argv)

    try:
        rows = read_rows(args.input)
        render(args.kind, rows, args.out, overlay=args.overlay)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
