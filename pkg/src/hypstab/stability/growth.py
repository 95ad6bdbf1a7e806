"""Growth functionals over distance sublevel sets and the Lemma-type certificate.

Balls ``B_R`` are sublevel sets ``{r <= R}`` of the lattice Dijkstra distance,
which overestimates the intrinsic distance, so every ``B_R`` here is
contained in the true geodesic ball of radius ``R``.
"""

from dataclasses import dataclass, field as dfield
from math import gamma, pi

import numpy as np

from ..errors import InvalidInput, PreconditionViolation
from ..graphgeo.distance import geodesic_distance
from ..graphgeo.operators import S2_CONST_RTOL
from .assembly import _element_quadratic, _node_vector, element_data
from .cutoff import CutoffProfile, cutoff_eval

__all__ = [
    "GrowthReport",
    "GrowthBoundCheck",
    "Lemma32Certificate",
    "node_weights",
    "growth_scan",
    "graph_growth_bound_check",
    "lemma32_certificate",
    "unit_ball_volume",
]

BALL_NOTE = ("B_R approximated by Dijkstra sublevel sets on the lattice; "
             "lattice distance >= intrinsic distance, so each set lies inside the true ball")


def unit_ball_volume(n):
    return pi ** (n / 2) / gamma(n / 2 + 1)


def node_weights(field):
    """Dual-cell quadrature weights ``sqrt(g) h^n``, halved per boundary axis."""
    if field.at_cells:
        raise InvalidInput("node weights need a node field")
    valid = field["valid"]
    w = np.where(valid, field["sqrtg"], 0.0) * field.h ** field.n
    for a in range(field.n):
        fwd = np.zeros_like(valid)
        bwd = np.zeros_like(valid)
        sl = [slice(None)] * field.n
        sl2 = [slice(None)] * field.n
        sl[a], sl2[a] = slice(0, -1), slice(1, None)
        fwd[tuple(sl)] = valid[tuple(sl2)]
        bwd[tuple(sl2)] = valid[tuple(sl)]
        w = w * np.where(fwd & bwd, 1.0, 0.5)
    return w


def _edge_distance(field, dist):
    """Smallest distance to a valid node with a missing lattice neighbour."""
    valid = field["valid"]
    edge = np.zeros_like(valid)
    for a in range(field.n):
        sl = [slice(None)] * field.n
        sl2 = [slice(None)] * field.n
        sl[a], sl2[a] = slice(0, -1), slice(1, None)
        has_fwd = np.zeros_like(valid)
        has_bwd = np.zeros_like(valid)
        has_fwd[tuple(sl)] = valid[tuple(sl2)]
        has_bwd[tuple(sl2)] = valid[tuple(sl)]
        edge |= valid & ~(has_fwd & has_bwd)
    return float(np.min(dist[edge]))


def _sum(values):
    # fixed-order pairwise summation over a C-contiguous copy
    return float(np.sum(np.ascontiguousarray(values, dtype=float)))


@dataclass(frozen=True)
class GrowthReport:
    n: int
    p0: tuple
    radii: tuple
    vol1: tuple
    s1_int: tuple
    s1cubed_int: tuple
    ratio2: tuple
    ration: tuple
    truncated: tuple
    edge_radius: float
    note: str = BALL_NOTE

    def rows(self):
        return list(zip(self.radii, self.vol1, self.s1_int, self.s1cubed_int,
                        self.ratio2, self.ration))

    def to_json(self):
        return {k: (list(v) if isinstance(v, tuple) else v) for k, v in self.__dict__.items()}


def _scan_setup(field, p0):
    dist = geodesic_distance(field, p0)
    w = node_weights(field)
    S1 = np.where(field["valid"], field.S1, 0.0)
    return dist, w, S1


def growth_scan(field, p0, radii):
    """Integrals of ``1``, ``S1`` and ``S1^3`` over ``{r <= R}`` per radius.

    ``ratio2 = R^-2 int S1^3`` and ``ration = R^-n int S1``.  Radii whose ball
    reaches the lattice edge are flagged in ``truncated``.
    """
    radii = tuple(float(R) for R in radii)
    if not radii or any(R <= 0 for R in radii):
        raise InvalidInput("radii must be a nonempty list of positive numbers")
    dist, w, S1 = _scan_setup(field, p0)
    edge = _edge_distance(field, dist)
    vol, i1, i3 = [], [], []
    for R in radii:
        ball = dist <= R
        vol.append(_sum(w[ball]))
        i1.append(_sum((w * S1)[ball]))
        i3.append(_sum((w * S1 ** 3)[ball]))
    n = field.n
    return GrowthReport(
        n=n, p0=tuple(float(v) for v in np.ravel(p0)), radii=radii,
        vol1=tuple(vol), s1_int=tuple(i1), s1cubed_int=tuple(i3),
        ratio2=tuple(v / R ** 2 for v, R in zip(i3, radii)),
        ration=tuple(v / R ** n for v, R in zip(i1, radii)),
        truncated=tuple(R >= edge for R in radii), edge_radius=edge,
    )


@dataclass(frozen=True)
class GrowthBoundCheck:
    theta: float
    R: float
    lhs: float
    rhs: float
    constant: float
    truncated: bool

    @property
    def slack(self):
        return self.rhs - self.lhs

    @property
    def holds(self):
        return self.slack >= 0

    def to_json(self):
        d = dict(self.__dict__)
        d.update(slack=self.slack, holds=self.holds)
        return d


def _check_s1_sign(field):
    S1 = field.S1[field["valid"]]
    tol = 1e-12 * (1.0 + float(np.max(np.abs(S1))))
    if np.any(S1 < -tol) and np.any(S1 > tol):
        raise PreconditionViolation("S1 changes sign on the grid",
                                    s1_min=float(S1.min()), s1_max=float(S1.max()))
    if np.any(S1 < -tol):
        raise PreconditionViolation("S1 is negative on the grid; flip the orientation",
                                    s1_min=float(S1.min()), s1_max=float(S1.max()))


def graph_growth_bound_check(field, p0, theta, R):
    """``int_{B_{theta R}} S1 dM`` against ``2 omega_n R^n / (1 - theta)``."""
    if not field.patch.is_graph:
        raise InvalidInput("growth bound check needs a graph patch")
    if not 0 < theta < 1:
        raise InvalidInput(f"theta must lie in (0, 1), got {theta}")
    if not R > 0:
        raise InvalidInput(f"R must be positive, got {R}")
    _check_s1_sign(field)
    dist, w, S1 = _scan_setup(field, p0)
    ball = dist <= theta * R
    lhs = _sum((w * S1)[ball])
    cn = 2.0 * unit_ball_volume(field.n)
    return GrowthBoundCheck(theta=float(theta), R=float(R), lhs=lhs,
                            rhs=cn * R ** field.n / (1.0 - theta), constant=cn,
                            truncated=bool(theta * R >= _edge_distance(field, dist)))


@dataclass(frozen=True)
class Lemma32Certificate:
    """Both sides of ``int S1 |grad f|^2 >= C int S1 f^2`` with the constant folded in.

    ``lhs = int S1 |grad f|^2`` and ``rhs = (2/n) int (S2 + n(n-1)c/2) S1 f^2``.
    The direction is asserted only when ``asserted`` is true.
    """

    lhs: float
    rhs: float
    hypotheses_met: bool
    asserted: bool
    notes: tuple = dfield(default_factory=tuple)

    @property
    def ratio(self):
        if self.rhs == 0.0:
            return float("nan") if self.lhs == 0.0 else float("inf")
        return self.lhs / self.rhs

    @property
    def holds(self):
        if self.lhs == 0.0 and self.rhs == 0.0:
            return True
        return self.lhs >= self.rhs * (1.0 - 1e-12)

    def to_json(self):
        r = self.ratio
        return {"lhs": self.lhs, "rhs": self.rhs, "ratio": None if np.isnan(r) else r,
                "hypotheses_met": self.hypotheses_met, "asserted": self.asserted,
                "holds": self.holds, "notes": list(self.notes),
                "constant": "C = 2 (S2 + n(n-1)c/2) / n, folded into rhs"}


def _profile_field(field, profile, p0):
    dist = geodesic_distance(field, p0)
    vals = np.zeros(field.grid_shape)
    ok = np.isfinite(dist)
    vals[ok] = cutoff_eval(profile, dist[ok])
    return vals


def lemma32_certificate(field, f, c=0.0, assembly=None, p0=None):
    """Evaluate the Poincare-type inequality behind the 1-volume growth argument.

    ``f`` is a nodal array or a ``CutoffProfile`` (then ``p0`` is the center).
    Hypotheses: ``S2`` constant and ``> 0`` (strictly, for ``c = 0``) and
    ``S1 > 0``.  The inequality is asserted only if they hold and ``assembly``
    is an ``index_estimate`` on the same lattice with ``neg_count == 0`` and
    ``f`` supported on its basis.
    """
    if isinstance(f, CutoffProfile):
        if p0 is None:
            raise InvalidInput("p0 is required with a cutoff profile")
        f = _profile_field(field, f, p0)
    ed = element_data(field, c)
    flat = _node_vector(ed, f)
    n = ed.n
    notes = []
    s2 = ed.s2
    s2_shift = s2 + n * (n - 1) * c / 2.0
    met = True
    if float(s2.max() - s2.min()) > S2_CONST_RTOL * (1.0 + abs(float(s2.mean()))):
        met = False
        notes.append(f"S2 not constant: range [{s2.min():.6g}, {s2.max():.6g}]")
    if not float(s2_shift.min()) > 0:
        met = False
        notes.append("S2 + n(n-1)c/2 > 0 fails" + (" (boundary case S2 = 0)"
                                                   if np.allclose(s2_shift, 0) else ""))
    if not float(ed.s1.min()) > 0:
        met = False
        notes.append("S1 > 0 fails")
    s1_up = ed.s1[:, None, None] * ed.ginv
    lhs = _element_quadratic(ed, ed.stiffness(s1_up), flat)
    rhs = (2.0 / n) * _element_quadratic(ed, ed.mass(s2_shift * ed.s1), flat)
    asserted = False
    if assembly is None:
        notes.append("no stability assembly supplied: report-only")
    elif assembly.node_shape != ed.node_shape or not np.array_equal(assembly.basis, ed.basis):
        notes.append("assembly lattice differs from the field lattice: report-only")
    elif assembly.neg_count != 0:
        notes.append(f"assembly has neg_count {assembly.neg_count}: report-only")
    else:
        asserted = met
    return Lemma32Certificate(lhs=lhs, rhs=rhs, hypotheses_met=met, asserted=asserted,
                              notes=tuple(notes))
