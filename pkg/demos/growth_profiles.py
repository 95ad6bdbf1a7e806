"""Growth of the mean-curvature integrals over intrinsic balls.

Compares a paraboloid, whose S1 decays along the graph, with a hemisphere
of constant S1, and prints the graph bound int_{B_{theta R}} S1 against
2 omega_n R^n / (1 - theta).
"""

import numpy as np

from hypstab.graphgeo.geometry import shape_field
from hypstab.graphgeo.patches import hemisphere_graph, paraboloid
from hypstab.stability.growth import graph_growth_bound_check, growth_scan

RADII = [0.4, 0.8, 1.2, 1.6]

for name, patch in (("paraboloid a=0.5", paraboloid(2, 0.5, 2.0)),
                    ("hemisphere rho=2", hemisphere_graph(2, 2.0, 0.95))):
    fld = shape_field(patch, 0.02)
    rep = growth_scan(fld, np.zeros(2), RADII)
    print(name)
    print(f"  {'R':>5} {'vol':>9} {'int S1':>9} {'R^-2 int S1^3':>14}")
    for R, v, s1, _, r2, _ in rep.rows():
        print(f"  {R:5.2f} {v:9.4f} {s1:9.4f} {r2:14.4f}")
    chk = graph_growth_bound_check(fld, np.zeros(2), 0.5, 1.6)
    print(f"  bound at theta=0.5, R=1.6: {chk.lhs:.4f} <= {chk.rhs:.4f}")
