"""Pointwise extrinsic geometry of a chart and its lattice discretization."""

from dataclasses import dataclass

import numpy as np

from ..curvalg import CurvatureVector, NewtonOperator, ShapeOperator, elem_sym_values
from ..errors import DomainError, InvalidInput, NumericalFailure, UnsupportedPrecision
from ..tensorid import CubicSymTensor
from .patches import Lattice

__all__ = [
    "PointGeometry",
    "ShapeField",
    "CovariantDA",
    "geometry_arrays",
    "point_geometry",
    "shape_field",
    "cell_field",
    "s1_divform",
    "covariant_da",
]

DET_FLOOR = 1e-14


def _unit_normal(dX):
    """Unit normal to the columns ``dX[:, a, :]`` via signed cofactors."""
    N_pts, n, m = dX.shape
    nrm = np.empty((N_pts, m))
    for k in range(m):
        minor = np.delete(dX, k, axis=2)
        nrm[:, k] = (-1) ** k * np.linalg.det(minor)
    length = np.linalg.norm(nrm, axis=1)
    return nrm, length


def _orient(patch, X, nrm):
    if patch.orientation[0] == "up":
        ref = np.zeros_like(nrm)
        ref[:, -1] = 1.0
    else:
        ref = np.asarray(patch.orientation[1], dtype=float) - X
    sign = np.where(np.sum(nrm * ref, axis=1) < 0, -1.0, 1.0)
    return nrm * sign[:, None]


def geometry_arrays(patch, pts, order=2):
    """Vectorized geometry at points ``pts`` of shape ``(N, n)``.

    Returns a dict of arrays with leading axis ``N``.  Points with a
    numerically degenerate metric are flagged in ``valid`` and filled with
    NaN.  ``order=3`` adds the third derivatives needed by ``covariant_da``.
    """
    pts = np.atleast_2d(np.asarray(pts, dtype=float))
    n = patch.n
    with np.errstate(invalid="ignore", divide="ignore"):
        D = patch.oracle.derivatives(pts, order)
    finite = np.ones(pts.shape[0], bool)
    for Dk in D:
        ok = np.isfinite(Dk)
        finite &= ok.reshape(pts.shape[0], -1).all(axis=1)
        Dk[~ok] = 0.0
    X, dX, ddX = D[0], D[1], D[2]
    g = np.einsum("zam,zbm->zab", dX, dX)
    detg = np.linalg.det(g)
    nrm, length = _unit_normal(dX)
    # det g <= (tr g / n)^n, so this is a scale-free degeneracy test
    scale = (np.einsum("zaa->z", g) / n) ** n
    valid = finite & (detg > DET_FLOOR * scale) & (length > 0)
    safe_g = np.where(valid[:, None, None], g, np.eye(n))
    N = _orient(patch, X, nrm / np.where(valid, length, 1.0)[:, None])
    ginv = np.linalg.inv(safe_g)
    b = np.einsum("zabm,zm->zab", ddX, N)
    b = 0.5 * (b + np.swapaxes(b, 1, 2))
    w, V = np.linalg.eigh(safe_g)
    g_mhalf = np.einsum("zai,zi,zbi->zab", V, 1.0 / np.sqrt(w), V)
    Asym = np.einsum("zab,zbc,zcd->zad", g_mhalf, b, g_mhalf)
    Asym = 0.5 * (Asym + np.swapaxes(Asym, 1, 2))
    lam, Q = np.linalg.eigh(Asym)
    frame = np.einsum("zab,zbi->zai", g_mhalf, Q)  # g-orthonormal eigenvectors
    S = elem_sym_values(lam)
    A = np.einsum("zab,zbc->zac", ginv, b)
    P1 = S[:, 1, None, None] * np.eye(n) - A
    P1up = S[:, 1, None, None] * ginv - np.einsum("zac,zcd,zdb->zab", ginv, b, ginv)
    P1up = 0.5 * (P1up + np.swapaxes(P1up, 1, 2))
    with np.errstate(divide="ignore"):
        W = 1.0 / N[:, -1]
    out = {
        "x": pts, "X": X, "dX": dX, "ddX": ddX, "g": g, "ginv": ginv,
        "detg": detg, "sqrtg": np.sqrt(np.where(valid, detg, np.nan)),
        "N": N, "W": W, "b": b, "A": A, "lam": lam, "frame": frame,
        "S": S, "P1": P1, "P1up": P1up, "valid": valid,
    }
    if order >= 3:
        out["dddX"] = D[3]
    bad = ~valid
    if np.any(bad):
        for key, arr in out.items():
            if key in ("x", "valid") or arr.dtype.kind != "f":
                continue
            arr[bad] = np.nan
    return out


@dataclass(frozen=True)
class PointGeometry:
    x: np.ndarray
    g: np.ndarray
    g_inv: np.ndarray
    detg: float
    W: float
    N: np.ndarray
    A: ShapeOperator
    A_mixed: np.ndarray
    S: CurvatureVector
    P1: NewtonOperator

    @property
    def lam(self):
        return np.linalg.eigvalsh(self.A.entries)


def point_geometry(patch, x):
    """Geometry at a single domain point.

    ``A`` is the shape operator in a g-orthonormal frame (symmetric);
    ``A_mixed`` is its coordinate matrix ``g^{-1} b``.
    """
    pts = patch.check_inside(x)
    if pts.shape[0] != 1:
        raise InvalidInput("point_geometry takes a single point")
    geo = geometry_arrays(patch, pts, order=2)
    if not geo["valid"][0]:
        raise NumericalFailure(f"degenerate metric at {pts[0].tolist()}")
    lam, frame = geo["lam"][0], geo["frame"][0]
    Aorth = np.diag(lam)
    # principal frame is orthonormal, so A and P1 are diagonal there
    return PointGeometry(
        x=pts[0], g=geo["g"][0], g_inv=geo["ginv"][0], detg=float(geo["detg"][0]),
        W=float(geo["W"][0]), N=geo["N"][0], A=ShapeOperator(Aorth),
        A_mixed=geo["A"][0], S=CurvatureVector(geo["S"][0]),
        P1=NewtonOperator(1, geo["S"][0, 1] * np.eye(patch.n) - Aorth),
    )


@dataclass(frozen=True)
class ShapeField:
    """Geometry sampled on a lattice; arrays carry the lattice shape first."""

    patch: object
    lattice: Lattice
    data: dict
    at_cells: bool = False

    @property
    def h(self):
        return self.lattice.h

    @property
    def n(self):
        return self.patch.n

    @property
    def grid_shape(self):
        return self.data["valid"].shape

    def __getitem__(self, key):
        return self.data[key]

    @property
    def S1(self):
        return self.data["S"][..., 1]

    @property
    def S2(self):
        return self.data["S"][..., 2]

    @property
    def S3(self):
        S = self.data["S"]
        return S[..., 3] if S.shape[-1] > 3 else np.zeros(S.shape[:-1])

    def potential(self, c=0.0):
        """``S1 S2 - 3 S3 + c (n - 1) S1``."""
        return self.S1 * self.S2 - 3.0 * self.S3 + c * (self.n - 1) * self.S1

    def interior(self, width=2):
        """Valid nodes whose whole ``width``-ring stencil is valid."""
        if self.at_cells:
            raise InvalidInput("interior ring is defined for node fields")
        valid = self.data["valid"]
        mask = valid.copy()
        for a in range(self.n):
            for s in range(1, width + 1):
                fwd = np.zeros_like(valid)
                bwd = np.zeros_like(valid)
                sl = [slice(None)] * self.n
                sl2 = [slice(None)] * self.n
                sl[a], sl2[a] = slice(0, -s), slice(s, None)
                fwd[tuple(sl)] = valid[tuple(sl2)]
                bwd[tuple(sl2)] = valid[tuple(sl)]
                mask &= fwd & bwd
        return mask


def _reshape(geo, shape):
    return {k: v.reshape(shape + v.shape[1:]) for k, v in geo.items()}


def shape_field(patch, h, order=2):
    """Node field over the patch lattice of spacing ``h``."""
    lat = patch.lattice(h)
    if any(s < 5 for s in lat.shape):
        raise InvalidInput(f"lattice {lat.shape} has fewer than 5 points per axis")
    pts = lat.points()
    shape = pts.shape[:-1]
    geo = geometry_arrays(patch, pts.reshape(-1, patch.n), order=order)
    geo["valid"] = geo["valid"] & lat.inside.reshape(-1)
    return ShapeField(patch, lat, _reshape(geo, shape))


def cell_field(patch, h):
    """Geometry at cell centers; a cell is valid when all its corners are."""
    lat = patch.lattice(h)
    ctr = lat.cell_centers()
    shape = ctr.shape[:-1]
    geo = geometry_arrays(patch, ctr.reshape(-1, patch.n), order=2)
    inside = lat.inside
    cell_ok = np.ones(shape, bool)
    for corner in np.ndindex(*(2,) * patch.n):
        sl = tuple(slice(c, c + s) for c, s in zip(corner, shape))
        cell_ok &= inside[sl]
    geo["valid"] = geo["valid"] & cell_ok.reshape(-1)
    return ShapeField(patch, lat, _reshape(geo, shape), at_cells=True)


def s1_divform(patch, x, step):
    """Central-difference Euclidean divergence of ``grad u / W`` at ``x``.

    Only defined for graphs; compare with ``trace(A)`` at ``x``.
    """
    if not patch.is_graph:
        raise InvalidInput("s1_divform needs a graph patch")
    x = np.asarray(x, dtype=float).ravel()
    n = patch.n
    stencil = np.concatenate([x + step * np.eye(n), x - step * np.eye(n)])
    if not np.all(patch.domain.contains(stencil)):
        raise DomainError(f"stencil of step {step} leaves the domain at {x.tolist()}")
    du = patch.oracle.derivatives(stencil, 1)[1][:, :, -1]
    V = du / np.sqrt(1.0 + np.sum(du * du, axis=1))[:, None]
    return float(sum((V[a, a] - V[n + a, a]) / (2 * step) for a in range(n)))


@dataclass(frozen=True)
class CovariantDA:
    """Covariant derivative of the second fundamental form on a field.

    ``coord[..., a, b, c]`` is ``h_{ab;c}`` in chart coordinates, ``frame`` the
    same tensor in the principal frame (entries ``h_ijk``).
    """

    coord: np.ndarray
    frame: np.ndarray
    norm_dA2: np.ndarray
    norm_dS1_2: np.ndarray
    norm_dabsA_2: np.ndarray
    valid: np.ndarray

    def tensor_at(self, idx):
        return CubicSymTensor(self.frame[idx])


def _covariant_da_arrays(geo):
    dX, ddX, dddX = geo["dX"], geo["ddX"], geo["dddX"]
    N, A, b, ginv, frame = geo["N"], geo["A"], geo["b"], geo["ginv"], geo["frame"]
    Gam_low = np.einsum("zabm,zkm->zabk", ddX, dX)  # X_ab . X_k
    Gam = np.einsum("zmk,zabk->zmab", ginv, Gam_low)  # Gamma^m_ab
    # d_c b_ab = X_abc . N - A^m_c X_ab . X_m   (Weingarten)
    db = np.einsum("zabcm,zm->zabc", dddX, N) - np.einsum("zmc,zabm->zabc", A, Gam_low)
    hcov = (db
            - np.einsum("zmca,zmb->zabc", Gam, b)
            - np.einsum("zmcb,zam->zabc", Gam, b))
    C = np.einsum("zabc,zai,zbj,zck->zijk", hcov, frame, frame, frame)
    dS1 = np.einsum("zab,zabc->zc", ginv, hcov)
    nS1 = np.einsum("zc,zcd,zd->z", dS1, ginv, dS1)
    nA = np.sum(C * C, axis=(1, 2, 3))
    lam = geo["lam"]
    a2 = np.sum(lam * lam, axis=1)
    grad_abs = np.einsum("zi,ziik->zk", lam, C)
    with np.errstate(invalid="ignore", divide="ignore"):
        nabs = np.where(a2 > 0, np.sum(grad_abs ** 2, axis=1) / np.where(a2 > 0, a2, 1.0), 0.0)
    return hcov, C, nA, nS1, nabs


def covariant_da(field):
    """``h_{ab;c}``, ``|grad A|^2``, ``|grad S1|^2`` and ``|grad |A||^2`` per node.

    Needs third partials of the chart, so only analytic oracles are accepted.
    """
    patch = field.patch
    if not patch.analytic:
        raise UnsupportedPrecision("covariant_da needs an analytic derivative oracle")
    if "dddX" in field.data:
        geo = {k: v.reshape((-1,) + v.shape[len(field.grid_shape):])
               for k, v in field.data.items()}
    else:
        pts = field["x"].reshape(-1, patch.n)
        geo = geometry_arrays(patch, pts, order=3)
    hcov, C, nA, nS1, nabs = _covariant_da_arrays(geo)
    shape = field.grid_shape
    r = lambda a: a.reshape(shape + a.shape[1:])
    return CovariantDA(r(hcov), r(C), r(nA), r(nS1), r(nabs), field["valid"])
