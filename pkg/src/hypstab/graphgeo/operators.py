"""Second-order lattice operators on a ``ShapeField`` and identity residuals."""

import numpy as np

from ..errors import InvalidInput, PreconditionViolation, UnsupportedPrecision
from .geometry import covariant_da, shape_field

__all__ = [
    "coordinate_gradient",
    "intrinsic_div",
    "l1_apply",
    "jacobi_apply",
    "check_constant_s2",
    "reilly_residual",
    "eqn16_residual",
    "eqn16_rhs",
    "sup_interior",
]

S2_CONST_RTOL = 1e-6


def _central(f, axis, h):
    out = np.full(f.shape, np.nan)
    n = f.ndim
    lo = [slice(None)] * n
    hi = [slice(None)] * n
    mid = [slice(None)] * n
    lo[axis], hi[axis], mid[axis] = slice(0, -2), slice(2, None), slice(1, -1)
    out[tuple(mid)] = (f[tuple(hi)] - f[tuple(lo)]) / (2.0 * h)
    return out


def _grid_ndim(field):
    if field.at_cells:
        raise InvalidInput("lattice operators need a node field")
    if any(s < 5 for s in field.grid_shape):
        raise InvalidInput("grid needs at least 5 points per axis")
    return field.n


def coordinate_gradient(field, f):
    """Coordinate partials ``d_a f`` by central differences (NaN on the rim)."""
    n = _grid_ndim(field)
    f = np.asarray(f, dtype=float)
    if f.shape != field.grid_shape:
        raise InvalidInput(f"scalar field shape {f.shape} != grid {field.grid_shape}")
    return np.stack([_central(f, a, field.h) for a in range(n)], axis=-1)


def intrinsic_div(field, X):
    """``(1/sqrt g) d_a (sqrt g X^a)`` for contravariant components ``X``."""
    n = _grid_ndim(field)
    X = np.asarray(X, dtype=float)
    if X.shape != field.grid_shape + (n,):
        raise InvalidInput(f"vector field shape {X.shape} != {field.grid_shape + (n,)}")
    sg = field["sqrtg"]
    total = sum(_central(sg * X[..., a], a, field.h) for a in range(n))
    return total / sg


def l1_apply(field, f):
    """``div(P_1 grad f)`` with ``grad f = g^{-1} df``."""
    df = coordinate_gradient(field, f)
    flux = np.einsum("...ab,...b->...a", field["P1up"], df)
    return intrinsic_div(field, flux)


def jacobi_apply(field, f, c=0.0):
    """``L_1 f + (S1 S2 - 3 S3 + c (n-1) S1) f``."""
    return l1_apply(field, f) + field.potential(c) * np.asarray(f, dtype=float)


def sup_interior(field, values, width=2, within=None):
    """Max of ``|values|`` over interior nodes, optionally inside box ``within``.

    Refinement studies pass the coarse grid's interior box so every level is
    measured on the same region.
    """
    mask = field.interior(width)
    if within is not None:
        mask &= within.contains(field["x"])
    if not np.any(mask):
        raise InvalidInput("no interior nodes left after excluding the boundary ring")
    return float(np.max(np.abs(values[mask])))


def check_constant_s2(field):
    S2 = field.S2[field["valid"]]
    lo, hi = float(np.min(S2)), float(np.max(S2))
    mean = float(np.mean(S2))
    if hi - lo > S2_CONST_RTOL * (1.0 + abs(mean)):
        raise PreconditionViolation(
            f"S2 is not constant on the patch: range [{lo:.6g}, {hi:.6g}]",
            s2_min=lo, s2_max=hi)
    return mean


def _field_for(patch_or_field, h, order=2):
    if hasattr(patch_or_field, "lattice") and hasattr(patch_or_field, "data"):
        return patch_or_field
    if h is None:
        raise InvalidInput("grid spacing h required when passing a patch")
    return shape_field(patch_or_field, h, order=order)


def reilly_residual(patch, h=None, within=None):
    """Sup over interior nodes of ``|T_1 <N, e_{n+1}>|`` (with ``c = 0``).

    For graphs ``<N, e_{n+1}> = 1/W``.  Requires ``S2`` constant on the grid,
    otherwise ``PreconditionViolation`` carries the observed range.
    """
    field = _field_for(patch, h)
    check_constant_s2(field)
    f = field["N"][..., -1]
    return sup_interior(field, jacobi_apply(field, f, 0.0), within=within)


def eqn16_rhs(field, cda=None):
    """``|grad A|^2 - |grad S1|^2 + 3 S1 S3 + S1^2 S2 - 4 S2^2``.

    The last two terms vanish when ``S2 = 0``; they extend the identity to
    every constant ``S2`` (round spheres included).
    """
    if cda is None:
        cda = covariant_da(field)
    S1, S2, S3 = field.S1, field.S2, field.S3
    return (cda.norm_dA2 - cda.norm_dS1_2 + 3.0 * S1 * S3
            + S1 * S1 * S2 - 4.0 * S2 * S2)


def eqn16_residual(patch, h=None, within=None):
    """Sup over interior nodes of ``|L_1 S1 - eqn16_rhs|``."""
    field = _field_for(patch, h, order=3)
    if not field.patch.analytic:
        raise UnsupportedPrecision("eqn16_residual needs an analytic oracle")
    check_constant_s2(field)
    resid = l1_apply(field, field.S1) - eqn16_rhs(field)
    return sup_interior(field, resid, within=within)
