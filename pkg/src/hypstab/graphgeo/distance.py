"""Intrinsic distance on a lattice by Dijkstra over the 2n-neighbor graph.

Each lattice edge is weighted by its metric length ``h sqrt(g_aa)`` with the
metric sampled at the edge midpoint.  Paths are confined to lattice axes, so
the result overestimates the true geodesic distance by up to a factor
``sqrt(n)`` (the l1/l2 ratio in flat space) plus O(h); it is exact along
straight coordinate lines that are geodesics.
"""

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import dijkstra

from ..errors import InvalidInput

__all__ = ["geodesic_distance", "lattice_anisotropy_bound"]


def lattice_anisotropy_bound(n):
    return float(np.sqrt(n))


def _edge_weights(field, axis):
    patch = field.patch
    x = field["x"]
    n = field.n
    sl_a = [slice(None)] * n
    sl_b = [slice(None)] * n
    sl_a[axis], sl_b[axis] = slice(0, -1), slice(1, None)
    mid = 0.5 * (x[tuple(sl_a)] + x[tuple(sl_b)])
    dX = patch.oracle.derivatives(mid.reshape(-1, n), 1)[1]
    gaa = np.einsum("zm,zm->z", dX[:, axis, :], dX[:, axis, :])
    return field.h * np.sqrt(gaa).reshape(mid.shape[:-1]), tuple(sl_a), tuple(sl_b)


def geodesic_distance(field, p0):
    """Distance from the lattice node nearest ``p0`` to every valid node.

    Invalid nodes get ``inf``.  Raises ``InvalidInput`` when some valid node
    is unreachable.
    """
    if field.at_cells:
        raise InvalidInput("geodesic_distance needs a node field")
    valid = field["valid"]
    src = field.lattice.nearest_index(p0)
    if not valid[src]:
        raise InvalidInput(f"source node {src} is not a valid lattice node")
    ids = np.arange(valid.size).reshape(valid.shape)
    rows, cols, wts = [], [], []
    for a in range(field.n):
        w, sa, sb = _edge_weights(field, a)
        keep = valid[sa] & valid[sb] & np.isfinite(w)
        rows.append(ids[sa][keep])
        cols.append(ids[sb][keep])
        wts.append(w[keep])
    rows, cols, wts = map(np.concatenate, (rows, cols, wts))
    graph = coo_matrix((wts, (rows, cols)), shape=(valid.size, valid.size)).tocsr()
    dist = dijkstra(graph, directed=False, indices=int(ids[src]))
    dist = dist.reshape(valid.shape)
    if np.any(~np.isfinite(dist[valid])):
        raise InvalidInput("lattice graph is disconnected")
    dist[~valid] = np.inf
    return dist
