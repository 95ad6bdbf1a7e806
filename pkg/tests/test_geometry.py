import numpy as np
import pytest
from hypothesis import given, strategies as st

from hypstab.curvalg import elem_sym_values
from hypstab.errors import DomainError, InvalidInput, UnsupportedPrecision
from hypstab.graphgeo.geometry import (cell_field, covariant_da, geometry_arrays, point_geometry,
                                       s1_divform, shape_field)
from hypstab.graphgeo.oracle import FiniteDifferenceOracle
from hypstab.graphgeo.patches import (Box, SurfacePatch, flat, hemisphere_graph,
                                      one_variable_graph, paraboloid, round_cap_chart)


def test_flat_point():
    g = point_geometry(flat(3, 1.0), [0.2, 0.1, -0.3])
    assert g.W == 1.0
    assert np.allclose(g.A.entries, 0) and np.allclose(g.S.S[1:], 0)


def test_hemisphere_center():
    g = point_geometry(hemisphere_graph(3, 2.0, 0.5), [0, 0, 0])
    assert np.allclose(g.lam, 0.5)
    assert g.S.S[2] == pytest.approx(0.75)
    assert g.W == pytest.approx(1.0)


def test_parabola_vertex_curvature():
    g = point_geometry(one_variable_graph("x1**2", (-1, 1), 3, 0.5), [0, 0, 0])
    assert np.allclose(np.sort(g.lam), [0, 0, 2])
    assert g.S.S[2] == 0.0


def test_outside_domain():
    with pytest.raises(DomainError):
        point_geometry(flat(2, 1.0), [2.0, 0.0])


@given(st.floats(-0.9, 0.9), st.floats(-0.9, 0.9))
def test_plane_curve_curvature(x1, x2):
    # u = sin(x1): curvature -sin(x1) / (1 + cos^2)^(3/2)
    p = one_variable_graph("sin(x1)", (-1, 1), 2, 1.0)
    g = point_geometry(p, [x1, x2])
    kappa = -np.sin(x1) / (1 + np.cos(x1) ** 2) ** 1.5
    assert g.S.S[1] == pytest.approx(kappa, abs=1e-12)
    assert g.S.S[2] == pytest.approx(0.0, abs=1e-14)


def test_hemisphere_field_constant_s2():
    f = shape_field(hemisphere_graph(3, 2.0, 0.5), 0.1)
    S2 = f.S2[f["valid"]]
    assert np.max(np.abs(S2 - 0.75)) <= 1e-8


def test_round_cap_umbilic():
    f = shape_field(round_cap_chart(3, 1.0, np.pi / 2), 0.25)
    v = f["valid"]
    assert np.max(np.abs(f["lam"][v] - 1.0)) < 1e-10
    assert np.max(np.abs(f.potential()[v] - 6.0)) < 1e-9


@pytest.mark.parametrize("patch", [hemisphere_graph(3, 2.0, 0.5), paraboloid(3, 0.7, 0.8),
                                   one_variable_graph("x1**3", (0.5, 1.5), 2, 0.5)])
def test_field_invariants(patch):
    f = shape_field(patch, 0.1)
    v = f["valid"]
    N, W = f["N"][v], f["W"][v]
    assert np.all(W >= 1.0)
    assert np.allclose(np.sum(N * N, axis=1), 1.0, atol=1e-14)
    assert np.allclose(N[:, -1] * W, 1.0, atol=1e-12)
    lam, S = f["lam"][v], f["S"][v]
    assert np.allclose(S[:, 1] ** 2 - np.sum(lam ** 2, axis=1), 2 * S[:, 2], atol=1e-10)
    assert np.allclose(np.trace(f["A"][v], axis1=1, axis2=2), S[:, 1], atol=1e-12)
    p1 = np.sort(np.linalg.eigvalsh(f["P1"][v]), axis=1)
    assert np.allclose(p1, np.sort(S[:, 1:2] - lam, axis=1), atol=1e-10)
    assert np.allclose(S, elem_sym_values(lam), atol=1e-12)


def test_metric_of_graph():
    p = paraboloid(2, 0.5, 1.0)
    geo = geometry_arrays(p, np.array([[0.3, -0.4]]), order=2)
    du = np.array([0.3, -0.4])
    assert np.allclose(geo["g"][0], np.eye(2) + np.outer(du, du))


def test_cell_field_shape():
    p = flat(2, 1.0)
    c = cell_field(p, 0.25)
    assert c.at_cells and c.grid_shape == (8, 8)
    with pytest.raises(InvalidInput):
        c.interior()


def test_shape_field_too_small():
    with pytest.raises(InvalidInput):
        shape_field(flat(2, 0.1), 0.06)


class TestDivForm:
    def test_flat_zero(self):
        assert s1_divform(flat(2, 1.0), [0.1, 0.2], 0.05) == 0.0

    def test_hemisphere_center(self):
        p = hemisphere_graph(3, 2.0, 0.5)
        assert s1_divform(p, [0, 0, 0], 1e-3) == pytest.approx(1.5, abs=1e-6)

    def test_parabola(self):
        p = one_variable_graph("x1**2", (-1, 1), 2, 0.5)
        assert s1_divform(p, [0, 0], 1e-3) == pytest.approx(2.0, abs=1e-5)

    def test_second_order(self):
        p = paraboloid(3, 0.5, 1.0)
        x = np.array([0.3, -0.2, 0.1])
        trace = point_geometry(p, x).S.S[1]
        e1 = abs(s1_divform(p, x, 0.02) - trace)
        e2 = abs(s1_divform(p, x, 0.01) - trace)
        assert np.log2(e1 / e2) > 1.9

    def test_stencil_leaves_domain(self):
        with pytest.raises(DomainError):
            s1_divform(flat(2, 1.0), [0.99, 0.0], 0.05)

    def test_needs_graph(self):
        with pytest.raises(InvalidInput):
            s1_divform(round_cap_chart(2, 1.0, 1.0), [0, 0], 0.01)


class TestCovariant:
    def test_flat(self):
        cda = covariant_da(shape_field(flat(2, 1.0), 0.25, order=3))
        assert not np.any(cda.norm_dA2) and not np.any(cda.norm_dS1_2)

    def test_cap_parallel(self):
        f = shape_field(round_cap_chart(3, 1.0, 1.2), 0.25, order=3)
        cda = covariant_da(f)
        assert np.max(cda.norm_dA2[f["valid"]]) <= 1e-10

    def test_cubic_cylinder_equality(self):
        f = shape_field(one_variable_graph("x1**3", (0.5, 1.5), 3, 0.3), 0.1, order=3)
        cda = covariant_da(f)
        v = f["valid"]
        assert np.max(np.abs(cda.norm_dA2[v] - cda.norm_dS1_2[v])) <= 1e-8
        assert np.max(cda.norm_dA2[v]) > 0.1

    def test_symmetric_in_all_slots(self):
        f = shape_field(paraboloid(2, 0.8, 0.5), 0.1, order=3)
        h = covariant_da(f).coord[f["valid"]]
        assert np.allclose(h, np.swapaxes(h, 1, 3), atol=1e-12)
        assert np.allclose(h, np.swapaxes(h, 1, 2), atol=1e-12)

    def test_matches_ssy_left(self):
        from hypstab.tensorid import ssy_left
        f = shape_field(paraboloid(2, 0.8, 0.5), 0.1, order=3)
        cda = covariant_da(f)
        idx = (3, 4)
        lam = f["lam"][idx]
        assert ssy_left(lam, cda.tensor_at(idx)) == pytest.approx(
            cda.norm_dA2[idx] - cda.norm_dabsA_2[idx], rel=1e-10, abs=1e-12)

    def test_needs_analytic_oracle(self):
        orc = FiniteDifferenceOracle(lambda p: np.concatenate([p, p[:, :1] ** 2], 1), 2, 3, 1e-3)
        patch = SurfacePatch(2, Box.cube(2, 1.0), "graph", orc, "fd", ("up",))
        with pytest.raises(UnsupportedPrecision):
            covariant_da(shape_field(patch, 0.25))
