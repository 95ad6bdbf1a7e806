"""Surface patches: a chart map with a derivative oracle on a box or ball.

Graphs ``u: Omega -> R`` are charts ``x -> (x, u(x))`` oriented by the
upward normal, so convex graphs have positive principal curvatures.
"""

import json
from dataclasses import dataclass, field
from itertools import combinations
from math import pi, tan

import numpy as np
import sympy as sp

from ..errors import DomainError, InvalidInput
from .oracle import ComposedOracle, SymbolicOracle, coordinate_symbols

__all__ = [
    "Box",
    "Ball",
    "Lattice",
    "SurfacePatch",
    "flat",
    "hemisphere_graph",
    "one_variable_graph",
    "paraboloid",
    "round_cap_chart",
    "BUILDERS",
    "builder_catalog",
    "patch_from_descriptor",
    "load_descriptor",
]

_EDGE_TOL = 1e-9


@dataclass(frozen=True)
class Box:
    lo: tuple
    hi: tuple

    def __post_init__(self):
        lo = tuple(float(v) for v in self.lo)
        hi = tuple(float(v) for v in self.hi)
        if len(lo) != len(hi) or any(b <= a for a, b in zip(lo, hi)):
            raise InvalidInput(f"invalid box bounds {lo} .. {hi}")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @classmethod
    def cube(cls, n, half_width, center=None):
        c = np.zeros(n) if center is None else np.asarray(center, float)
        return cls(tuple(c - half_width), tuple(c + half_width))

    @property
    def n(self):
        return len(self.lo)

    @property
    def center(self):
        return 0.5 * (np.array(self.lo) + np.array(self.hi))

    @property
    def half_widths(self):
        return 0.5 * (np.array(self.hi) - np.array(self.lo))

    def contains(self, pts, tol=_EDGE_TOL):
        pts = np.asarray(pts, dtype=float)
        return np.all((pts >= np.array(self.lo) - tol) & (pts <= np.array(self.hi) + tol), axis=-1)

    def to_json(self):
        return {"type": "box", "lo": list(self.lo), "hi": list(self.hi)}


@dataclass(frozen=True)
class Ball:
    center: tuple
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", tuple(float(v) for v in self.center))
        if not self.radius > 0:
            raise InvalidInput("ball radius must be positive")

    @property
    def n(self):
        return len(self.center)

    @property
    def half_widths(self):
        return np.full(self.n, float(self.radius))

    def contains(self, pts, tol=_EDGE_TOL):
        d = np.asarray(pts, dtype=float) - np.array(self.center)
        return np.sqrt(np.sum(d * d, axis=-1)) <= self.radius + tol

    def to_json(self):
        return {"type": "ball", "center": list(self.center), "radius": self.radius}


def domain_from_json(d):
    kind = d.get("type")
    if kind == "box":
        return Box(tuple(d["lo"]), tuple(d["hi"]))
    if kind == "ball":
        return Ball(tuple(d["center"]), float(d["radius"]))
    raise InvalidInput(f"unknown domain type {kind!r}")


@dataclass(frozen=True)
class Lattice:
    """Uniform node lattice ``center + h * k`` clipped to a domain.

    Nodes are laid out on a full rectangular index grid; ``inside`` masks
    the ones belonging to the domain (all of them for a box).
    """

    center: np.ndarray
    h: float
    counts: tuple  # nodes on each side of the center, per axis
    inside: np.ndarray

    @classmethod
    def over(cls, domain, h):
        h = float(h)
        if not h > 0:
            raise InvalidInput("grid spacing must be positive")
        center = np.array(domain.center, dtype=float)
        counts = tuple(int(np.floor(w / h + _EDGE_TOL)) for w in domain.half_widths)
        lat = cls(center, h, counts, np.ones(1, bool))
        inside = domain.contains(lat.points())
        return cls(center, h, counts, inside)

    @property
    def n(self):
        return len(self.counts)

    @property
    def shape(self):
        return tuple(2 * c + 1 for c in self.counts)

    def axes(self):
        return [self.center[a] + self.h * np.arange(-c, c + 1) for a, c in enumerate(self.counts)]

    def points(self):
        mesh = np.meshgrid(*self.axes(), indexing="ij")
        return np.stack(mesh, axis=-1)

    def cell_centers(self):
        ax = [0.5 * (x[1:] + x[:-1]) for x in self.axes()]
        return np.stack(np.meshgrid(*ax, indexing="ij"), axis=-1)

    def nearest_index(self, x):
        x = np.asarray(x, dtype=float)
        k = np.rint((x - self.center) / self.h).astype(int)
        idx = tuple(int(ki + c) for ki, c in zip(k, self.counts))
        if any(i < 0 or i >= s for i, s in zip(idx, self.shape)) or not self.inside[idx]:
            raise DomainError(f"point {x.tolist()} is not on the lattice domain")
        return idx


@dataclass(frozen=True)
class SurfacePatch:
    """A chart ``X: domain -> R^(n+1)`` with its derivative oracle.

    ``orientation`` is ``("up",)`` for graphs (normal with positive last
    component) or ``("inward", center)`` for charts of round spheres.
    """

    n: int
    domain: object
    kind: str
    oracle: object
    label: str
    orientation: tuple
    builder: str = ""
    params: dict = field(default_factory=dict)

    @property
    def is_graph(self):
        return self.kind == "graph"

    @property
    def analytic(self):
        return self.oracle.mode == "analytic"

    def check_inside(self, pts):
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        if pts.shape[-1] != self.n:
            raise InvalidInput(f"points must have {self.n} coordinates")
        ok = self.domain.contains(pts)
        if not np.all(ok):
            bad = pts[~ok][0]
            raise DomainError(f"point {bad.tolist()} outside the patch domain")
        return pts

    def lattice(self, h):
        return Lattice.over(self.domain, h)

    def descriptor(self, grid_h=None):
        d = {"kind": self.builder, "n": self.n, "domain": self.domain.to_json(),
             "params": dict(self.params)}
        if grid_h is not None:
            d["grid_h"] = grid_h
        return d


def _graph_patch(n, u, domain, label, builder, params):
    x = coordinate_symbols(n)
    oracle = SymbolicOracle(tuple(x) + (u,), x)
    return SurfacePatch(n, domain, "graph", oracle, label, ("up",), builder, params)


def _check_n(n):
    if not isinstance(n, (int, np.integer)) or n < 2:
        raise InvalidInput(f"dimension n must be an integer >= 2, got {n!r}")
    return int(n)


def _box_param(n, box):
    if isinstance(box, dict):
        return domain_from_json(box)
    if np.isscalar(box):
        if not box > 0:
            raise InvalidInput("box half-width must be positive")
        return Box.cube(n, float(box))
    lo, hi = box
    return Box(tuple(lo), tuple(hi))


def flat(n, box):
    """The hyperplane ``u = 0`` over ``box`` (half-width or ``(lo, hi)``)."""
    n = _check_n(n)
    dom = _box_param(n, box)
    return _graph_patch(n, sp.Integer(0), dom, "flat", "flat", {"n": n, "box": dom.to_json()})


def hemisphere_graph(n, rho, fraction):
    """Lower hemisphere ``u = -sqrt(rho^2 - |x|^2)``.

    With the upward normal every principal curvature is ``+1/rho``.  The
    domain is the cube inscribed in the ball of radius ``fraction * rho``.
    """
    n = _check_n(n)
    if not rho > 0 or not 0 < fraction < 1:
        raise InvalidInput("need rho > 0 and 0 < fraction < 1")
    x = coordinate_symbols(n)
    r = sp.nsimplify(rho)
    u = -sp.sqrt(r ** 2 - sum(v ** 2 for v in x))
    dom = Box.cube(n, fraction * rho / np.sqrt(n))
    params = {"n": n, "rho": rho, "fraction": fraction}
    return _graph_patch(n, u, dom, f"hemisphere rho={rho}", "hemisphere_graph", params)


def one_variable_graph(profile, slab, n, width):
    """Cylinder ``u = profile(x1)`` over ``slab[0] <= x1 <= slab[1]``.

    ``profile`` is a sympy-parsable expression in ``x1``; the transverse
    coordinates range over ``[-width, width]``.  The shape operator has rank
    at most one, so ``S_2 = S_3 = 0``.
    """
    n = _check_n(n)
    x = coordinate_symbols(n)
    expr = sp.sympify(profile, locals={"x1": x[0]})
    if expr.free_symbols - {x[0]}:
        raise InvalidInput(f"profile may only depend on x1: {profile!r}")
    lo, hi = float(slab[0]), float(slab[1])
    dom = Box((lo,) + (-width,) * (n - 1), (hi,) + (width,) * (n - 1))
    params = {"profile": str(profile), "slab": [lo, hi], "n": n, "width": width}
    return _graph_patch(n, expr, dom, f"u={profile}", "one_variable_graph", params)


def paraboloid(n, a, box):
    """``u = a |x|^2``; principal curvatures ``2a`` at the vertex."""
    n = _check_n(n)
    x = coordinate_symbols(n)
    u = sp.nsimplify(a) * sum(v ** 2 for v in x)
    dom = _box_param(n, box)
    params = {"n": n, "a": a, "box": dom.to_json()}
    return _graph_patch(n, u, dom, f"paraboloid a={a}", "paraboloid", params)


def _cube_to_ball_exprs(y):
    """Smooth map of ``[-1, 1]^n`` onto the closed unit ball.

    ``E_i = y_i sqrt(int_0^1 prod_{j != i} (1 - t y_j^2) dt)``; boundary faces
    land on the unit sphere.  The Jacobian degenerates only on the cube's
    codimension-two edges, which are Dirichlet boundary nodes.
    """
    n = len(y)
    out = []
    for i in range(n):
        others = [y[j] ** 2 for j in range(n) if j != i]
        s = sp.Integer(1)
        for k in range(1, n):
            ek = sum(sp.Mul(*c) for c in combinations(others, k))
            s += sp.Integer(-1) ** k * ek / (k + 1)
        out.append(y[i] * sp.sqrt(s))
    return out


def round_cap_chart(n, rho, angle):
    """Geodesic cap of polar angle ``angle`` on the sphere of radius ``rho``.

    The chart is inverse stereographic projection (north pole at the cap
    center) precomposed with a cube-to-ball map scaled to radius
    ``tan(angle/2)``, so the domain is ``[-1, 1]^n`` and the cap boundary is
    the cube boundary.  The inward normal makes every principal curvature
    ``+1/rho``.
    """
    n = _check_n(n)
    if not rho > 0 or not 0 < angle < pi:
        raise InvalidInput("need rho > 0 and 0 < angle < pi")
    y = coordinate_symbols(n)
    z = coordinate_symbols(n)
    t = tan(angle / 2.0)
    inner = SymbolicOracle([t * e for e in _cube_to_ball_exprs(y)], y)
    r2 = sum(v ** 2 for v in z)
    R = sp.nsimplify(rho)
    sphere = [R * 2 * v / (1 + r2) for v in z] + [R * (1 - r2) / (1 + r2)]
    outer = SymbolicOracle(sphere, z)
    oracle = ComposedOracle(outer, inner)
    params = {"n": n, "rho": rho, "angle": angle}
    label = f"round cap rho={rho} angle={angle:.6g}"
    return SurfacePatch(n, Box.cube(n, 1.0), "analytic-chart", oracle, label,
                        ("inward", (0.0,) * (n + 1)), "round_cap_chart", params)


BUILDERS = {
    "flat": (flat, {"n": "int >= 2", "box": "half-width or [lo, hi] or domain JSON"}),
    "hemisphere_graph": (hemisphere_graph, {"n": "int >= 2", "rho": "float > 0",
                                            "fraction": "float in (0, 1)"}),
    "one_variable_graph": (one_variable_graph, {"profile": "expression in x1",
                                                "slab": "[x1_lo, x1_hi]", "n": "int >= 2",
                                                "width": "transverse half-width > 0"}),
    "paraboloid": (paraboloid, {"n": "int >= 2", "a": "float",
                                "box": "half-width or [lo, hi] or domain JSON"}),
    "round_cap_chart": (round_cap_chart, {"n": "int >= 2", "rho": "float > 0",
                                          "angle": "polar angle in (0, pi)"}),
}


def builder_catalog():
    return {name: {"params": schema, "doc": (fn.__doc__ or "").strip().splitlines()[0]}
            for name, (fn, schema) in BUILDERS.items()}


def patch_from_descriptor(desc):
    """Rebuild a patch from ``{kind, n, domain, params, grid_h}``.

    ``kind`` names a builder; ``params`` are its keyword arguments.  Returns
    ``(patch, grid_h)`` with ``grid_h`` possibly ``None``.
    """
    try:
        kind = desc["kind"]
        params = dict(desc["params"])
    except (KeyError, TypeError) as exc:
        raise InvalidInput(f"malformed patch descriptor: {exc}") from None
    if kind not in BUILDERS:
        raise InvalidInput(f"unknown builder {kind!r}")
    fn, schema = BUILDERS[kind]
    missing = set(schema) - set(params)
    if missing:
        raise InvalidInput(f"{kind}: missing parameters {sorted(missing)}")
    extra = set(params) - set(schema)
    if extra:
        raise InvalidInput(f"{kind}: unknown parameters {sorted(extra)}")
    try:
        patch = fn(**params)
    except (TypeError, ValueError, sp.SympifyError) as exc:
        raise InvalidInput(f"{kind}: {exc}") from None
    if "n" in desc and desc["n"] != patch.n:
        raise InvalidInput(f"descriptor n={desc['n']} disagrees with builder n={patch.n}")
    if "domain" in desc and domain_from_json(desc["domain"]) != patch.domain:
        raise InvalidInput("descriptor domain disagrees with builder parameters")
    return patch, desc.get("grid_h")


def load_descriptor(path):
    with open(path) as fh:
        return patch_from_descriptor(json.load(fh))
