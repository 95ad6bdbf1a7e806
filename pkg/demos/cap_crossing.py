"""Watch the Jacobi spectrum of round caps cross zero at the equator.

A cap of the unit 3-sphere is stable while it sits inside a hemisphere.  At
polar angle pi/2 the height function <N, e4> is a Dirichlet Jacobi field, so
the lowest eigenvalue passes through zero there and the cap picks up one
unstable direction beyond it.

    python3 demos/cap_crossing.py [--h 0.125]
"""

import argparse
from math import pi

import numpy as np

from hypstab.graphgeo.patches import round_cap_chart
from hypstab.stability.assembly import index_estimate


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--h", type=float, default=0.125, help="lattice spacing on [-1, 1]^3")
    args = ap.parse_args()

    print(f"{'angle - pi/2':>13} {'neg_count':>10} {'mu_min':>12} {'mu_2':>10}")
    for off in np.linspace(-0.4, 0.4, 9):
        a = index_estimate(round_cap_chart(3, 1.0, pi / 2 + off), 0.0, h=args.h)
        print(f"{off:13.2f} {a.neg_count:10d} {a.mu_min:12.5f} {a.eigenvalues[1]:10.4f}")
    # second eigenvalue of the hemisphere: 2 * 8 - 6 = 10 (degree-two harmonics)


if __name__ == "__main__":
    main()
