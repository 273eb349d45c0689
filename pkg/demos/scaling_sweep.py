"""Edge counts against the size laws, across point counts.

Prints edges/(n * log2 aspect) for the net-hierarchy graph and edges/n for
the sampled merge.  Both ratios staying inside a narrow band as n quadruples
is the desk-scale shadow of the asymptotic size bounds.

Run: python demos/scaling_sweep.py
"""

import math

import numpy as np

from navgraph import PointSet, build_euclid_pg


def main():
    print(f"{'n':>5} {'aspect':>8} {'net edges':>10} {'net ratio':>10} "
          f"{'merged':>8} {'merged/n':>9}")
    for n in (250, 500, 1000, 2000):
        pts = PointSet(np.random.default_rng(777).random((n, 2)))
        g = build_euclid_pg(pts, 1.0, seed=5)
        aspect = g.meta["aspect_ratio"]
        net_edges = g.meta["g_net"].edge_count
        ratio = net_edges / (n * math.log2(aspect))
        print(
            f"{n:5d} {aspect:8.0f} {net_edges:10d} {ratio:10.2f} "
            f"{g.edge_count:8d} {g.edge_count / n:9.1f}"
        )


if __name__ == "__main__":
    main()
