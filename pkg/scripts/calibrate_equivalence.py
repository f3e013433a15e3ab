#!/usr/bin/env python3
"""Record modified-energy equivalence thresholds for shell data.

Scans seeded annulus states per (alpha, n) and prints the first shell
where every probe ratio total / ||u||^2_{H^{alpha+n}} sits inside the
calibration margin, plus the norm threshold that fresh states of the
same family must clear.  Optionally dumps the table as JSON.
"""

import argparse
import json
import sys

from fnls_lab.energetics import equivalence_threshold
from fnls_lab.errors import PreconditionError


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--alpha", type=float, default=3.0)
    ap.add_argument("--d", type=int, default=2)
    ap.add_argument("--n", type=int, nargs="+", default=[0, 1],
                    help="modified-energy orders to calibrate")
    ap.add_argument("--amplitude", type=float, default=0.01)
    ap.add_argument("--shells", type=int, nargs="+", default=[2, 4, 8, 16])
    ap.add_argument("--probes", type=int, default=8)
    ap.add_argument("--seed0", type=int, default=0)
    ap.add_argument("--json", type=str, default=None,
                    help="also write the calibration table here")
    args = ap.parse_args(argv)

    table = {}
    for n in args.n:
        try:
            cal = equivalence_threshold(
                args.alpha, args.d, n, amplitude=args.amplitude,
                shells=tuple(args.shells), n_probes=args.probes,
                seed0=args.seed0)
        except PreconditionError as exc:
            print(f"n = {n}: {exc}", file=sys.stderr)
            return 1
        table[n] = cal.to_dict()
        print(f"alpha = {args.alpha}, d = {args.d}, n = {n}: "
              f"shell {cal.shell}, threshold {cal.threshold:.6g}")
        for shell, (lo, hi) in sorted(cal.ratios_by_shell.items()):
            print(f"  shell {shell:3d}: ratios [{lo:.4f}, {hi:.4f}]")
    if args.json:
        with open(args.json, "w") as fh:
            json.dump({str(k): v for k, v in table.items()}, fh, indent=2)
            fh.write("\n")
        print(f"wrote {args.json}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
