"""Timing breakdown of diagram construction for white and blue noise across N and d.

    python scripts/bench_table.py --dims 2 3 4 --sizes 1000 4000 16000 --out results/bench.txt
"""

import argparse
from pathlib import Path

import numpy as np

from laguerre.diagram import SiteSet, compute_diagram
from laguerre.sampling import blue_noise, white_noise

COLUMNS = ["d", "noise", "N", "t_vor", "t_knn", "t_tri", "t_q", "t_total", "vertices", "facets"]


def run(dims, sizes, repeats, seed, workers):
    rows = []
    for d in dims:
        compute_diagram(SiteSet(np.random.default_rng(0).random((8, d))))
        for n in sizes:
            for noise in ("white", "blue"):
                rng = np.random.default_rng(seed)
                Y = white_noise(n, d, rng) if noise == "white" else blue_noise(n, d, rng).points
                runs = [compute_diagram(SiteSet(Y), workers=workers) for _ in range(repeats)]
                best = min(runs, key=lambda D: D.timing["total"])
                t = best.timing
                rows.append([d, noise, n, t["vor"], t["knn"], t["tri"], t["quad"], t["total"],
                             int(best.nvertices.sum()), int(best.nfacets.sum())])
                print(" ".join(str(v) if isinstance(v, (int, str)) else f"{v:.4f}" for v in rows[-1]))
    return rows


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--dims", type=int, nargs="+", default=[2, 3, 4])
    ap.add_argument("--sizes", type=int, nargs="+", default=[1000, 4000, 16000])
    ap.add_argument("--repeats", type=int, default=3)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--out", default="results/bench.txt")
    args = ap.parse_args()
    rows = run(args.dims, args.sizes, args.repeats, args.seed, args.workers)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    lines = [f"# {k} = {v}" for k, v in vars(args).items()] + [" ".join(COLUMNS)]
    lines += [" ".join(str(v) if isinstance(v, (int, str)) else f"{v:.6f}" for v in r) for r in rows]
    out.write_text("\n".join(lines) + "\n")
    print(f"wrote {out}")


if __name__ == "__main__":
    main()
