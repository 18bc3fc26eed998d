"""Normalized energy and gradient-norm curves of Lloyd vs L-BFGS for each quantization density.

    python scripts/quantize_convergence.py --dim 3 --num-sites 500 --iters 100 --out results/quantize
"""

import argparse
from pathlib import Path

from laguerre.densities import make_density
from laguerre.transport import optimize_points


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--dim", type=int, default=3)
    ap.add_argument("--num-sites", type=int, default=500)
    ap.add_argument("--iters", type=int, default=100)
    ap.add_argument("--densities", nargs="+", default=["uniform", "gaussian", "cone"])
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--out", default="results/quantize")
    args = ap.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for name in args.densities:
        for mode in ("lloyd", "lbfgs"):
            _, conv, _ = optimize_points(args.num_sites, make_density(name), args.dim, mode, args.iters,
                                         args.seed, workers=args.workers)
            path = out / f"{name}_{mode}.txt"
            path.write_text(conv.to_text([f"{k} = {v}" for k, v in vars(args).items()]
                                         + [f"density = {name}", f"mode = {mode}"]))
            last = conv.rows[-1]
            print(f"{name:8s} {mode:5s} energy_norm {last['energy_norm']:.4e} "
                  f"gnorm_norm {last['gnorm_norm']:.4e} -> {path}")


if __name__ == "__main__":
    main()
