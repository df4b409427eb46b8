#!/usr/bin/env python3
"""Hunt for negative-eigenvalue witnesses of exp(-||x||^p) across a grid.

A witness certifies that the space embeds in no L_p at that exponent;
absence of a witness proves nothing. Prints the best (most negative)
kernel eigenvalue per (spec, p).
"""

import argparse
import sys

from levylab import NormSpec, witness_search


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--qs", default="2,3,4,6", help="comma list of l_q exponents")
    ap.add_argument("--dims", default="2,3", help="comma list of dimensions")
    ap.add_argument("--ps", default="0.5,1.0,1.5", help="comma list of p values")
    ap.add_argument("--trials", type=int, default=2000)
    ap.add_argument("--points", type=int, default=20)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    print("spec,p,min_eigenvalue,witness_found")
    for dim in (int(d) for d in args.dims.split(",")):
        for q in (float(v) for v in args.qs.split(",")):
            spec = NormSpec.lq(q, dim)
            for p in (float(v) for v in args.ps.split(",")):
                w = witness_search(spec, p, n_points=args.points,
                                   trials=args.trials, seed=args.seed)
                print(f"{spec.label},{p:g},{w.min_eigenvalue:.6e},{w.found}", flush=True)
    return 0


if __name__ == "__main__":
    sys.exit(main())
