"""Third-order tensor identities in a frame diagonalizing the shape operator.

With ``h_ii`` the principal curvatures and ``C[i, j, k]`` the components
``h_ijk`` of the covariant derivative of the second fundamental form (a
fully symmetric array when the ambient space is flat), ``ssy_left`` is
``|grad A|^2 - |grad |A||^2`` and ``ssy_right`` the manifestly nonnegative
sum of squares it equals.
"""

from dataclasses import dataclass
from itertools import permutations

import numpy as np

from .curvalg import ShapeOperator, newton_operator
from .errors import InvalidInput

__all__ = [
    "CubicSymTensor",
    "DiagonalShape",
    "EqualityReport",
    "ssy_left",
    "ssy_right",
    "equality_conditions",
    "classify_rank",
    "p1_contraction",
]

NORM_FLOOR = 1e-10
DEFAULT_TOL = 1e-8


def symmetrize3(a):
    a = np.asarray(a, dtype=float)
    return sum(np.transpose(a, p) for p in permutations(range(3))) / 6.0


@dataclass(frozen=True)
class CubicSymTensor:
    entries: np.ndarray

    def __post_init__(self):
        a = np.array(self.entries, dtype=float)
        if a.ndim != 3 or len(set(a.shape)) != 1:
            raise InvalidInput(f"expected an n x n x n array, got {a.shape}")
        a = symmetrize3(a)
        a.setflags(write=False)
        object.__setattr__(self, "entries", a)

    @property
    def n(self):
        return self.entries.shape[0]

    @classmethod
    def from_entries(cls, n, values):
        """Build from ``{(i, j, k): value}``; every permutation gets the value."""
        a = np.zeros((n, n, n))
        for idx, v in values.items():
            for p in set(permutations(idx)):
                a[p] = v
        return cls(a)


@dataclass(frozen=True)
class DiagonalShape:
    h: np.ndarray

    def __post_init__(self):
        h = np.array(self.h, dtype=float).ravel()
        h.setflags(write=False)
        object.__setattr__(self, "h", h)

    @property
    def n(self):
        return self.h.size

    @property
    def norm2(self):
        return float(np.dot(self.h, self.h))


def _coerce(h, C):
    if not isinstance(h, DiagonalShape):
        h = DiagonalShape(h)
    if not isinstance(C, CubicSymTensor):
        C = CubicSymTensor(C)
    if h.n != C.n:
        raise InvalidInput(f"dimension mismatch: h has {h.n}, C has {C.n}")
    return h, C


def _norm2_or_raise(h):
    a2 = h.norm2
    if a2 < NORM_FLOOR ** 2:
        raise ZeroDivisionError(f"|A| = {np.sqrt(a2):.3g} below {NORM_FLOOR}")
    return a2


def ssy_left(h, C):
    h, C = _coerce(h, C)
    a2 = _norm2_or_raise(h)
    c = C.entries
    # sum_i h_ii C_iik for each k
    grad_norm = np.einsum("i,iik->k", h.h, c)
    return float(np.sum(c * c) - np.dot(grad_norm, grad_norm) / a2)


def ssy_right(h, C):
    h, C = _coerce(h, C)
    a2 = _norm2_or_raise(h)
    c = C.entries
    n = h.n
    diag = np.einsum("iik->ik", c)  # diag[i, k] = C_iik
    # (h_ii C_ssk - h_ss C_iik) over all i, s, k
    prop = h.h[:, None, None] * diag[None, :, :] - h.h[None, :, None] * diag[:, None, :]
    i, j, k = np.indices((n, n, n))
    two_equal = (i == j) & (j != k)
    distinct = (i != j) & (j != k) & (i != k)
    return float(
        0.5 * np.sum(prop * prop) / a2
        + 2.0 * np.sum(c[two_equal] ** 2)
        + np.sum(c[distinct] ** 2)
    )


@dataclass(frozen=True)
class EqualityReport:
    mixed_vanish: bool
    distinct_vanish: bool
    proportional: bool
    at_most_one_cubic_diag: bool

    @property
    def all_hold(self):
        return self.mixed_vanish and self.distinct_vanish and self.proportional


def equality_conditions(h, C, tol=DEFAULT_TOL):
    """Evaluate the equality-case system of ``ssy_right == 0``.

    ``h_jji = 0`` for ``j != i``, ``h_ijk = 0`` for distinct indices, and
    ``h_ii h_ssk = h_ss h_iik`` for all ``i, s, k``.  The last field reports
    whether at most one ``C_iii`` exceeds ``tol`` in magnitude.
    """
    h, C = _coerce(h, C)
    c = C.entries
    n = h.n
    i, j, k = np.indices((n, n, n))
    mixed = c[(i == j) & (j != k)]
    distinct = c[(i != j) & (j != k) & (i != k)]
    diag = np.einsum("iik->ik", c)
    prop = h.h[:, None, None] * diag[None, :, :] - h.h[None, :, None] * diag[:, None, :]
    cubic = np.abs(np.einsum("iii->i", c))
    return EqualityReport(
        mixed_vanish=bool(np.all(np.abs(mixed) <= tol)),
        distinct_vanish=bool(np.all(np.abs(distinct) <= tol)),
        proportional=bool(np.all(np.abs(prop) <= tol)),
        at_most_one_cubic_diag=int(np.count_nonzero(cubic > tol)) <= 1,
    )


def classify_rank(h, tol=DEFAULT_TOL):
    if not isinstance(h, DiagonalShape):
        h = DiagonalShape(h)
    nonzero = int(np.count_nonzero(np.abs(h.h) > tol))
    if nonzero == 0:
        return "flat"
    if nonzero == 1:
        return "cylinder_like"
    return "generic"


def p1_contraction(A):
    """``trace(A^2 P_1)``, i.e. ``|sqrt(P_1) A|^2`` when ``P_1`` is psd."""
    if not isinstance(A, ShapeOperator):
        A = ShapeOperator(A)
    a = A.entries
    return float(np.trace(a @ a @ newton_operator(A, 1).entries))
