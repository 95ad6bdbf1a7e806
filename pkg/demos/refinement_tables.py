"""Convergence tables for the lattice identities.

Each row halves the grid spacing; the observed order should approach 2 for
the central-difference discretisation.  One-variable graphs hit the exact
floor (P_1 annihilates grad S_1 there), which shows up as order ``inf``.
"""

from hypstab.graphgeo.operators import eqn16_residual, reilly_residual
from hypstab.graphgeo.patches import hemisphere_graph, one_variable_graph, round_cap_chart
from hypstab.graphgeo.refinement import refinement_study


def show(title, fn, patch, hs):
    st = refinement_study(fn, patch, hs)
    print(title)
    print(f"  {'h':>8} {'residual':>12} {'order':>8}")
    orders = ("",) + tuple(f"{o:.3f}" for o in st.orders)
    for h, r, o in zip(st.hs, st.residuals, orders):
        print(f"  {h:8.4f} {r:12.3e} {o:>8}")


if __name__ == "__main__":
    show("T1(1/W) on hemisphere, n=3, rho=2", reilly_residual,
         hemisphere_graph(3, 2.0, 0.5), [0.1, 0.05, 0.025])
    show("L1 S1 identity on a unit 2-sphere cap", eqn16_residual,
         round_cap_chart(2, 1.0, 1.0), [0.2, 0.1, 0.05])
    show("L1 S1 identity on u = sin(x1), n=2", eqn16_residual,
         one_variable_graph("sin(x1)", (-1, 1.5), 2, 0.5), [0.1, 0.05])
