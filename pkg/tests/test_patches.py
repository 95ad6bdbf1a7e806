import json

import numpy as np
import pytest

from hypstab.errors import DomainError, InvalidInput
from hypstab.graphgeo.patches import (Ball, Box, Lattice, builder_catalog, domain_from_json, flat,
                                      hemisphere_graph, load_descriptor, one_variable_graph,
                                      paraboloid, patch_from_descriptor, round_cap_chart)


def test_box_validation_and_json_roundtrip():
    with pytest.raises(InvalidInput):
        Box((0.0, 1.0), (1.0, 1.0))
    b = Box((-1.0, 0.0), (1.0, 2.0))
    assert domain_from_json(b.to_json()) == b
    assert b.contains([[0, 1], [1, 2]]).all() and not b.contains([1.1, 1.0])


def test_ball_domain():
    b = Ball((0.0, 0.0), 1.0)
    assert domain_from_json(b.to_json()) == b
    lat = Lattice.over(b, 0.25)
    assert lat.inside.sum() < lat.inside.size
    assert lat.inside[lat.nearest_index([0.0, 0.0])]


def test_lattice_centered_and_exact_on_faces():
    lat = Lattice.over(Box.cube(2, 1.0), 0.25)
    assert lat.shape == (9, 9)
    ax = lat.axes()[0]
    assert ax[0] == -1.0 and ax[-1] == 1.0 and ax[4] == 0.0
    with pytest.raises(DomainError):
        lat.nearest_index([2.0, 0.0])


def test_catalog_lists_builders():
    cat = builder_catalog()
    assert {"flat", "hemisphere_graph", "one_variable_graph", "paraboloid",
            "round_cap_chart"} <= set(cat)
    assert all("params" in v for v in cat.values())


@pytest.mark.parametrize("patch", [
    flat(2, 1.0),
    hemisphere_graph(3, 2.0, 0.5),
    one_variable_graph("sin(x1)", (-1, 1), 2, 0.5),
    paraboloid(2, 0.3, 1.0),
    round_cap_chart(2, 1.0, 1.0),
])
def test_descriptor_roundtrip(patch, tmp_path):
    d = patch.descriptor(grid_h=0.1)
    path = tmp_path / "d.json"
    path.write_text(json.dumps(d))
    again, h = load_descriptor(path)
    assert h == 0.1
    assert again.domain == patch.domain and again.builder == patch.builder
    pts = np.array([patch.domain.center])
    assert np.allclose(again.oracle.derivatives(pts, 2)[2], patch.oracle.derivatives(pts, 2)[2])


@pytest.mark.parametrize("desc", [
    {"kind": "nope", "params": {}},
    {"kind": "flat", "params": {"n": 2}},
    {"kind": "flat", "params": {"n": 2, "box": 1.0, "extra": 1}},
    {"kind": "hemisphere_graph", "params": {"n": 3, "rho": -1.0, "fraction": 0.5}},
    {"kind": "one_variable_graph", "params": {"profile": "x2", "slab": [0, 1], "n": 2,
                                              "width": 1}},
    {"kind": "flat", "n": 3, "params": {"n": 2, "box": 1.0}},
    {"params": {}},
])
def test_bad_descriptors(desc):
    with pytest.raises(InvalidInput):
        patch_from_descriptor(desc)


def test_builder_parameter_validation():
    with pytest.raises(InvalidInput):
        flat(1, 1.0)
    with pytest.raises(InvalidInput):
        round_cap_chart(3, 1.0, 3.5)
    with pytest.raises(InvalidInput):
        hemisphere_graph(3, 1.0, 1.0)
