"""render_all <export_dir> <out_dir> [--figures id ...]"""

from __future__ import annotations

import argparse
import sys

from .loading import ExportError
from .recipes import RECIPES


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="render_all",
        description="Render figure analogs from exported JSON analyses")
    parser.add_argument("export_dir")
    parser.add_argument("out_dir")
    parser.add_argument("--figures", nargs="*", default=None,
                        help="subset of figure ids (default: all)")
    args = parser.parse_args(argv)

    ids = args.figures or sorted(RECIPES)
    unknown = [i for i in ids if i not in RECIPES]
    if unknown:
        print(f"error: unknown figure ids {unknown}; "
              f"valid: {sorted(RECIPES)}", file=sys.stderr)
        return 2
    failures = []
    for fid in ids:
        try:
            path = RECIPES[fid].render(args.export_dir, args.out_dir)
            print(f"[ok] {fid} -> {path}")
        except ExportError as exc:
            print(f"[failed] {fid}: {exc}", file=sys.stderr)
            failures.append(fid)
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
