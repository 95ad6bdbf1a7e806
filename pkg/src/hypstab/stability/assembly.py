"""Second-variation quadratic form on multilinear nodal elements.

Coefficients (``P_1``, ``sqrt g`` and the potential) are frozen at each cell
midpoint; the resulting constant-coefficient element integrals are exact.
"""

from dataclasses import dataclass
from functools import lru_cache
from itertools import product

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sps
import scipy.sparse.linalg as spla

from ..errors import InvalidInput, NumericalFailure
from ..graphgeo.geometry import ShapeField, cell_field

__all__ = [
    "ElementData",
    "StabilityAssembly",
    "element_data",
    "assemble",
    "q1_value",
    "index_estimate",
    "DENSE_MAX",
]

DENSE_MAX = 1500
EIG_RTOL = 1e-8
MODES = ("dirichlet", "volume")


@lru_cache(maxsize=None)
def reference_matrices(n):
    """Mass and stiffness blocks of the multilinear element on ``[0, 1]^n``.

    Returns ``(M, K)`` with ``K[a, b]`` the matrix of ``int d_a phi_i d_b phi_j``.
    Corner order is ``itertools.product((0, 1), repeat=n)``.
    """
    m1 = np.array([[1 / 3, 1 / 6], [1 / 6, 1 / 3]])
    d1 = np.array([-1.0, 1.0])
    g1 = np.outer(d1, [0.5, 0.5])  # int phi_i' phi_j
    s1 = np.outer(d1, d1)  # int phi_i' phi_j'

    def kron_all(mats):
        out = np.ones((1, 1))
        for mat in mats:
            out = np.kron(out, mat)
        return out

    M = kron_all([m1] * n)
    K = np.empty((n, n, 2 ** n, 2 ** n))
    for a in range(n):
        for b in range(n):
            if a == b:
                K[a, b] = kron_all([s1 if k == a else m1 for k in range(n)])
            else:
                mats = [m1] * n
                mats[a], mats[b] = g1, g1.T
                K[a, b] = kron_all(mats)
    return M, K


def _cell_nodes(node_shape):
    """Flat node indices of every cell's corners, shape ``(ncells, 2^n)``."""
    n = len(node_shape)
    idx = np.arange(int(np.prod(node_shape))).reshape(node_shape)
    cshape = tuple(s - 1 for s in node_shape)
    cols = []
    for corner in product((0, 1), repeat=n):
        sl = tuple(slice(c, c + s) for c, s in zip(corner, cshape))
        cols.append(idx[sl].ravel())
    return np.stack(cols, axis=1)


@dataclass(frozen=True)
class ElementData:
    """Per-cell coefficients on a lattice.

    ``kcoef`` is ``P1^{ab} sqrt(g) h^(n-2)``, ``mcoef`` is ``sqrt(g) h^n`` and
    ``pot`` the Jacobi potential at the cell midpoint.  Only valid cells are
    kept.
    """

    n: int
    h: float
    node_shape: tuple
    nodes: np.ndarray
    kcoef: np.ndarray
    mcoef: np.ndarray
    pot: np.ndarray
    s1: np.ndarray
    s2: np.ndarray
    sqrtg: np.ndarray
    ginv: np.ndarray
    basis: np.ndarray

    def stiffness(self, coef_up=None):
        """Element stiffness blocks for a contravariant coefficient (default ``P_1``)."""
        _, Kref = reference_matrices(self.n)
        if coef_up is None:
            kc = self.kcoef
        else:
            kc = coef_up * (self.sqrtg * self.h ** (self.n - 2))[:, None, None]
        return np.einsum("cab,abij->cij", kc, Kref, optimize=True)

    def mass(self, weight=None):
        Mref, _ = reference_matrices(self.n)
        w = self.mcoef if weight is None else self.mcoef * weight
        return w[:, None, None] * Mref


def _as_cells(source, h=None):
    if isinstance(source, ShapeField):
        if source.at_cells:
            return source
        return cell_field(source.patch, source.h)
    if h is None:
        raise InvalidInput("grid spacing h required when passing a patch")
    return cell_field(source, h)


def element_data(source, c=0.0, h=None):
    """Cell coefficients and the Dirichlet basis for a field or ``(patch, h)``.

    Basis nodes are lattice nodes off the outer layer whose adjacent cells are
    all valid.
    """
    cells = _as_cells(source, h)
    n = cells.n
    node_shape = cells.lattice.shape
    valid = cells["valid"].ravel()
    if not np.any(valid):
        raise InvalidInput("no valid cells on the lattice")
    nodes = _cell_nodes(node_shape)
    touched_bad = np.zeros(int(np.prod(node_shape)), bool)
    touched_bad[nodes[~valid].ravel()] = True
    interior = np.zeros(node_shape, bool)
    interior[(slice(1, -1),) * n] = True
    basis = np.flatnonzero(interior.ravel() & ~touched_bad)
    if basis.size == 0:
        raise InvalidInput("no interior basis nodes on the lattice")
    take = lambda a: a.reshape((-1,) + a.shape[n:])[valid]
    sqrtg = take(cells["sqrtg"])
    h = cells.h
    return ElementData(
        n=n, h=h, node_shape=node_shape, nodes=nodes[valid],
        kcoef=take(cells["P1up"]) * (sqrtg * h ** (n - 2))[:, None, None],
        mcoef=sqrtg * h ** n,
        pot=take(cells.potential(c)),
        s1=take(cells.S1), s2=take(cells.S2),
        sqrtg=sqrtg, ginv=take(cells["ginv"]), basis=basis,
    )


def assemble(ed, blocks):
    """Sum element blocks into a sparse matrix restricted to the basis."""
    N = int(np.prod(ed.node_shape))
    k = ed.nodes.shape[1]
    rows = np.repeat(ed.nodes, k, axis=1).ravel()
    cols = np.tile(ed.nodes, (1, k)).ravel()
    full = sps.coo_matrix((blocks.ravel(), (rows, cols)), shape=(N, N)).tocsr()
    return full[ed.basis][:, ed.basis]


def _element_quadratic(ed, blocks, f):
    fe = f[ed.nodes]
    return float(np.einsum("ci,cij,cj->", fe, blocks, fe, optimize=True))


def _node_vector(ed, f):
    f = np.asarray(f, dtype=float)
    if f.shape != ed.node_shape:
        raise InvalidInput(f"function shape {f.shape} != lattice {ed.node_shape}")
    flat = f.ravel()
    off = np.ones(flat.size, bool)
    off[ed.basis] = False
    if np.any(flat[off] != 0.0):
        raise InvalidInput("function support touches the boundary or invalid cells")
    return flat


def q1_value(field, f, c=0.0):
    """``int <P1 grad f, grad f> dM - int (S1 S2 - 3 S3 + c(n-1) S1) f^2 dM``.

    ``f`` holds nodal values on the field's lattice and must vanish off the
    interior basis nodes.
    """
    ed = field if isinstance(field, ElementData) else element_data(field, c)
    flat = _node_vector(ed, f)
    blocks = ed.stiffness() - ed.mass(ed.pot)
    return _element_quadratic(ed, blocks, flat)


@dataclass(frozen=True)
class StabilityAssembly:
    """Discrete Jacobi form ``K - V`` against mass ``Mm`` on the basis nodes.

    ``eigenvalues`` are ascending.  When ``complete`` is false only the lowest
    part of the spectrum was computed, but it always reaches past
    ``-tol_eig`` so ``neg_count`` is exact.
    """

    mode: str
    c: float
    h: float
    node_shape: tuple
    basis: np.ndarray
    K: object
    V: object
    Mm: object
    eigenvalues: np.ndarray
    lowest_mode: np.ndarray
    neg_count: int
    tol_eig: float
    complete: bool
    shift: float

    @property
    def mu_min(self):
        return float(self.eigenvalues[0])

    @property
    def dofs(self):
        return int(self.basis.size)

    def summary(self):
        return {"mode": self.mode, "c": self.c, "h": self.h, "dofs": self.dofs,
                "neg_count": self.neg_count, "mu_min": self.mu_min,
                "tol_eig": self.tol_eig, "complete": self.complete,
                "eigenvalues_computed": int(self.eigenvalues.size)}


def _spectrum_floor(ed, kblocks):
    """Rigorous lower bound for every generalized eigenvalue of ``(K - V, Mm)``.

    Per cell ``K_e >= rho_e M_e`` with ``rho_e`` the smallest eigenvalue of the
    pencil ``(K_e, M_e)``, and ``V <= max(pot, 0) Mm``.
    """
    Mref, _ = reference_matrices(ed.n)
    L = np.linalg.cholesky(Mref)
    Li = np.linalg.inv(L)
    T = np.einsum("ij,cjk,lk->cil", Li, kblocks, Li, optimize=True)
    rho = np.linalg.eigvalsh(T)[:, 0] / ed.mcoef
    return min(0.0, float(rho.min())) - max(0.0, float(ed.pot.max()))


def _dense_solve(A, M, cvec):
    A = A.toarray()
    M = M.toarray()
    if cvec is None:
        vals, vecs = sla.eigh(A, M)
        return vals, vecs[:, 0]
    Z = sla.null_space(cvec[None, :])
    vals, vecs = sla.eigh(Z.T @ A @ Z, Z.T @ M @ Z)
    return vals, Z @ vecs[:, 0]


def _sparse_solve(A, M, cvec, sigma, tol, k0=6, kmax=256):
    N = A.shape[0]
    try:
        lu = spla.splu((A - sigma * M).tocsc())
    except RuntimeError as exc:
        raise NumericalFailure(f"factorization of the shifted pencil failed at sigma={sigma:.6g}: {exc}")
    v0 = np.random.default_rng(0).standard_normal(N)
    if cvec is None:
        op = spla.LinearOperator((N, N), matvec=lu.solve, dtype=float)
    else:
        Sc = lu.solve(cvec)
        denom = float(cvec @ Sc)

        def project(b):
            y = lu.solve(b)
            return y - Sc * (float(cvec @ y) / denom)

        op = spla.LinearOperator((N, N), matvec=project, dtype=float)
        v0 = project(M @ v0)
    k = min(k0, N - 2)
    while True:
        try:
            vals, vecs = spla.eigsh(A, k=k, M=M, sigma=sigma, which="LM", OPinv=op, v0=v0)
        except spla.ArpackError as exc:
            raise NumericalFailure(f"eigsh failed with k={k}, sigma={sigma:.6g}: {exc}")
        order = np.argsort(vals)
        vals, vecs = vals[order], vecs[:, order]
        if vals[-1] >= -tol or k >= N - 2:
            return vals, vecs[:, 0]
        if k >= kmax:
            raise NumericalFailure(f"more than {kmax} negative eigenvalues; index too large "
                                   "for the partial solver")
        k = min(2 * k, N - 2)


def index_estimate(source, c=0.0, mode="dirichlet", h=None, dense_max=DENSE_MAX):
    """Assemble the Jacobi form and count its negative eigenvalues.

    ``source`` is a ``ShapeField`` or a patch with ``h``.  ``mode`` is
    ``"dirichlet"`` (compactly supported variations) or ``"volume"`` (also
    ``int f dM = 0``, realized by constraining to the mass-orthogonal
    complement of the constants).
    """
    if mode not in MODES:
        raise InvalidInput(f"mode must be one of {MODES}, got {mode!r}")
    ed = element_data(source, c, h)
    kb = ed.stiffness()
    mb = ed.mass()
    K = assemble(ed, kb)
    V = assemble(ed, mb * ed.pot[:, None, None])
    Mm = assemble(ed, mb)
    A = (K - V).tocsr()
    norm1 = lambda S: float(abs(S).sum(axis=0).max())
    tol = EIG_RTOL * (1.0 + (norm1(K) + norm1(V)) / norm1(Mm))
    cvec = None
    if mode == "volume":
        cvec = _mass_row_sums(ed, mb)
    N = ed.basis.size
    floor = _spectrum_floor(ed, kb)
    sigma = floor - 0.1 * (1.0 + abs(floor))
    if N <= dense_max:
        vals, vec = _dense_solve(A, Mm, cvec)
        complete = True
    else:
        vals, vec = _sparse_solve(A, Mm, cvec, sigma, tol)
        complete = False
    if not np.all(np.isfinite(vals)):
        raise NumericalFailure("non-finite eigenvalues")
    lowest = np.zeros(int(np.prod(ed.node_shape)))
    lowest[ed.basis] = vec / np.max(np.abs(vec))
    if lowest[ed.basis][np.argmax(np.abs(vec))] < 0:
        lowest = -lowest
    return StabilityAssembly(
        mode=mode, c=float(c), h=ed.h, node_shape=ed.node_shape, basis=ed.basis,
        K=K, V=V, Mm=Mm, eigenvalues=np.asarray(vals), lowest_mode=lowest.reshape(ed.node_shape),
        neg_count=int(np.count_nonzero(vals < -tol)), tol_eig=tol, complete=complete,
        shift=float(sigma),
    )


def _mass_row_sums(ed, mb):
    """``int phi_i dM`` for every basis node (boundary neighbours included)."""
    N = int(np.prod(ed.node_shape))
    sums = np.zeros(N)
    np.add.at(sums, ed.nodes.ravel(), mb.sum(axis=2).ravel())
    return sums[ed.basis]
