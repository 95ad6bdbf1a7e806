from itertools import product

import numpy as np
import pytest
import scipy.linalg as sla

from hypstab.errors import InvalidInput
from hypstab.graphgeo.geometry import shape_field
from hypstab.graphgeo.patches import flat, hemisphere_graph, one_variable_graph, round_cap_chart
from hypstab.stability import assembly
from hypstab.stability.assembly import (_spectrum_floor, element_data, index_estimate,
                                        q1_value, reference_matrices)

HALF_PI = np.pi / 2


def gauss_reference(n):
    """Element matrices by tensor 2-point Gauss quadrature (exact for these integrands)."""
    g = np.array([0.5 - 0.5 / np.sqrt(3), 0.5 + 0.5 / np.sqrt(3)])
    corners = list(product((0, 1), repeat=n))
    M = np.zeros((2 ** n, 2 ** n))
    K = np.zeros((n, n, 2 ** n, 2 ** n))
    for pt in product(g, repeat=n):
        w = 0.5 ** n
        phi = np.array([np.prod([t if c else 1 - t for c, t in zip(cr, pt)]) for cr in corners])
        dphi = np.array([[np.prod([(1 if c else -1) if k == a else (t if c else 1 - t)
                                   for k, (c, t) in enumerate(zip(cr, pt))])
                          for a in range(n)] for cr in corners])
        M += w * np.outer(phi, phi)
        K += w * np.einsum("ia,jb->abij", dphi, dphi)
    return M, K


@pytest.mark.parametrize("n", [1, 2, 3])
def test_reference_matrices(n):
    M, K = reference_matrices(n)
    Mg, Kg = gauss_reference(n)
    assert np.allclose(M, Mg, atol=1e-15) and np.allclose(K, Kg, atol=1e-15)
    assert M.sum() == pytest.approx(1.0)


def test_flat_spectrum_zero():
    a = index_estimate(flat(2, 1.0), 0.0, h=0.2)
    assert a.complete and a.neg_count == 0
    assert np.max(np.abs(a.eigenvalues)) <= a.tol_eig


def test_cylinder_is_stable():
    a = index_estimate(one_variable_graph("x1**2", (-1, 1), 2, 1.0), 0.0, h=0.1)
    assert a.neg_count == 0 and a.mu_min > 0


def test_matrices_symmetric_and_mass_pd():
    a = index_estimate(hemisphere_graph(2, 1.0, 0.6), 0.0, h=0.1)
    for S in (a.K, a.V, a.Mm):
        assert abs(S - S.T).max() < 1e-14
    assert np.linalg.eigvalsh(a.Mm.toarray())[0] > 0
    assert np.all(np.diff(a.eigenvalues) >= 0)


def test_q1_matches_assembly():
    p = hemisphere_graph(2, 1.0, 0.6)
    f = shape_field(p, 0.1)
    a = index_estimate(f, 0.3)
    rng = np.random.default_rng(2)
    vals = np.zeros(f.grid_shape)
    vals.ravel()[a.basis] = rng.standard_normal(a.dofs)
    x = vals.ravel()[a.basis]
    expect = x @ ((a.K - a.V) @ x)
    assert q1_value(f, vals, 0.3) == pytest.approx(expect, rel=1e-9)
    assert q1_value(f, np.zeros(f.grid_shape), 0.3) == 0.0


def test_q1_flat_and_cylinder():
    f = shape_field(flat(2, 1.0), 0.1)
    vals = np.zeros(f.grid_shape)
    vals[2:-2, 2:-2] = 1.0
    assert q1_value(f, vals) == 0.0
    # convex profile: P1 = diag(kappa, 0) >= 0 and the potential vanishes
    g = shape_field(one_variable_graph("x1**2", (-1, 1), 2, 0.5), 0.1)
    w = np.zeros(g.grid_shape)
    w[1:-1, 1:-1] = np.random.default_rng(0).standard_normal((g.grid_shape[0] - 2,
                                                             g.grid_shape[1] - 2))
    assert q1_value(g, w) >= 0


def test_q1_support_on_boundary_rejected():
    f = shape_field(flat(2, 1.0), 0.1)
    vals = np.zeros(f.grid_shape)
    vals[0, 5] = 1.0
    with pytest.raises(InvalidInput):
        q1_value(f, vals)
    with pytest.raises(InvalidInput):
        q1_value(f, np.zeros((3, 3)))


def test_unit_two_sphere_hemisphere_spectrum():
    # Dirichlet Laplacian on the S^2 hemisphere: 2, 6, 6, ...; Jacobi: mu = lam - 2
    a = index_estimate(round_cap_chart(2, 1.0, HALF_PI), 0.0, h=0.1)
    assert a.complete
    assert abs(a.eigenvalues[0]) < 0.05
    assert a.eigenvalues[1:3] == pytest.approx([4.0, 4.0], rel=0.05)


def test_unit_three_sphere_hemisphere_spectrum():
    # S^3 hemisphere: lam = 3, 8, 8, 8; P1 = 2 I and potential 6, so mu = 2 lam - 6
    a = index_estimate(round_cap_chart(3, 1.0, HALF_PI), 0.0, h=0.125)
    assert not a.complete and a.dofs > assembly.DENSE_MAX
    assert abs(a.mu_min) < 0.15
    assert a.eigenvalues[1:4] == pytest.approx([10.0] * 3, rel=0.05)


def test_crossing_signs():
    below = index_estimate(round_cap_chart(3, 1.0, HALF_PI - 0.2), 0.0, h=0.25)
    above = index_estimate(round_cap_chart(3, 1.0, HALF_PI + 0.2), 0.0, h=0.25)
    assert below.neg_count == 0 and above.neg_count >= 1


def test_nested_caps_monotone():
    counts = [index_estimate(round_cap_chart(2, 1.0, t), 0.0, h=0.1).neg_count
              for t in (1.0, 2.0, 2.8)]
    assert counts == sorted(counts) and counts[-1] > counts[0]


def test_ambient_constant_shifts_potential():
    p = round_cap_chart(2, 1.0, 1.0)
    a0 = index_estimate(p, 0.0, h=0.1)
    a1 = index_estimate(p, 1.0, h=0.1)
    # c (n-1) S1 = 1 * 1 * 2 on the unit S^2
    assert a0.mu_min - a1.mu_min == pytest.approx(2.0, rel=1e-9)


def test_dense_and_sparse_agree():
    p = round_cap_chart(2, 1.0, 2.0)
    for mode in ("dirichlet", "volume"):
        d = index_estimate(p, 0.0, h=0.1, mode=mode)
        s = index_estimate(p, 0.0, h=0.1, mode=mode, dense_max=0)
        assert d.complete and not s.complete
        k = s.eigenvalues.size
        assert np.allclose(s.eigenvalues, d.eigenvalues[:k], rtol=1e-8, atol=1e-8)
        assert s.neg_count == d.neg_count


def test_volume_mode_raises_eigenvalues_and_is_mass_free():
    p = round_cap_chart(2, 1.0, 2.0)
    d = index_estimate(p, 0.0, h=0.1)
    v = index_estimate(p, 0.0, h=0.1, mode="volume")
    assert v.mu_min >= d.mu_min - 1e-10
    assert v.neg_count <= d.neg_count
    ed = element_data(p, 0.0, h=0.1)
    mass = assembly._mass_row_sums(ed, ed.mass())
    x = v.lowest_mode.ravel()[v.basis]
    assert abs(mass @ x) < 1e-10 * np.abs(mass).sum()


def test_spectrum_floor_is_below():
    p = round_cap_chart(2, 1.0, 2.5)
    ed = element_data(p, 0.0, h=0.1)
    a = index_estimate(p, 0.0, h=0.1)
    assert _spectrum_floor(ed, ed.stiffness()) <= a.mu_min


def test_bad_mode():
    with pytest.raises(InvalidInput):
        index_estimate(flat(2, 1.0), 0.0, h=0.2, mode="neumann")
    with pytest.raises(InvalidInput):
        index_estimate(flat(2, 1.0), 0.0)


def test_summary_fields():
    s = index_estimate(flat(2, 1.0), 0.0, h=0.25).summary()
    assert {"neg_count", "mu_min", "tol_eig", "dofs", "complete"} <= set(s)
