"""Grid-refinement studies with observed convergence orders."""

from dataclasses import dataclass

import numpy as np

from ..errors import InvalidInput
from .geometry import shape_field
from .patches import Box

__all__ = ["EXACT_FLOOR", "RefinementStudy", "common_region", "observed_orders",
           "refinement_study"]

# Residuals at or below this are roundoff: the discrete operator is exact on
# the example, so no order can be measured and none is needed.
EXACT_FLOOR = 1e-10


@dataclass(frozen=True)
class RefinementStudy:
    hs: tuple
    residuals: tuple
    orders: tuple

    @property
    def min_order(self):
        return min(self.orders) if self.orders else float("inf")

    @property
    def finest(self):
        return self.residuals[-1]

    def to_json(self):
        enc = lambda v: "inf" if np.isinf(v) else float(v)
        return {"grid_h": list(self.hs), "residuals": list(self.residuals),
                "orders": [enc(o) for o in self.orders], "min_order": enc(self.min_order)}


def observed_orders(hs, residuals, floor=EXACT_FLOOR):
    """``log(r_k / r_{k+1}) / log(h_k / h_{k+1})`` per consecutive pair.

    A pair whose finer residual is at or below ``floor`` gets ``inf``.
    """
    out = []
    for (h0, r0), (h1, r1) in zip(zip(hs, residuals), zip(hs[1:], residuals[1:])):
        if r1 <= floor:
            out.append(float("inf"))
        elif r0 <= floor:
            out.append(float("-inf"))
        else:
            out.append(float(np.log(r0 / r1) / np.log(h0 / h1)))
    return tuple(out)


def common_region(patch, h):
    """Bounding box of the interior nodes of the lattice of spacing ``h``."""
    field = shape_field(patch, h)
    pts = field["x"][field.interior()]
    if pts.size == 0:
        raise InvalidInput(f"no interior nodes at h={h}")
    return Box(tuple(pts.min(axis=0)), tuple(pts.max(axis=0)))


def refinement_study(residual_fn, patch, hs):
    """Run ``residual_fn(patch, h, within=region)`` over strictly decreasing ``hs``.

    Every level is measured on the coarse grid's interior box so the sup is
    taken over the same set at each resolution.
    """
    hs = tuple(float(h) for h in hs)
    if len(hs) < 2 or any(b >= a for a, b in zip(hs, hs[1:])):
        raise InvalidInput(f"grid_h must be strictly decreasing with >= 2 entries, got {hs}")
    region = common_region(patch, hs[0])
    res = tuple(residual_fn(patch, h, within=region) for h in hs)
    return RefinementStudy(hs, res, observed_orders(hs, res))
