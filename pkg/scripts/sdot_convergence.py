"""Per-iteration mass histogram (min / median / max over the target) of the weight solver.

    python scripts/sdot_convergence.py --dim 4 --num-sites 100 --out results/sdot
"""

import argparse
from pathlib import Path

import numpy as np

from laguerre.densities import make_density
from laguerre.diagram import compute_diagram
from laguerre.transport import optimize_weights


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--dim", type=int, default=4)
    ap.add_argument("--num-sites", type=int, default=100)
    ap.add_argument("--iters", type=int, default=150)
    ap.add_argument("--mass-tol", type=float, default=1e-3)
    ap.add_argument("--densities", nargs="+", default=["uniform", "sphere"])
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--out", default="results/sdot")
    args = ap.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for name in args.densities:
        density = make_density(name)
        sites, conv, state = optimize_weights(args.num_sites, density, args.dim, args.iters, args.seed,
                                              workers=args.workers, mass_tol=args.mass_tol)
        D = compute_diagram(sites, density=density, workers=args.workers)
        target = D.total_mass / len(D.mass)
        dev = float(np.max(np.abs(D.mass - target)) / target)
        path = out / f"{name}.txt"
        path.write_text(conv.to_text([f"{k} = {v}" for k, v in vars(args).items()]
                                     + [f"density = {name}", "target = 1 (normalized mass)"]))
        print(f"{name:8s} calls {state.calls:3d} status {state.status:20s} max deviation {dev:.3e} -> {path}")


if __name__ == "__main__":
    main()
