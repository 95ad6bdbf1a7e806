"""Derivative oracles for chart maps ``R^n -> R^m``.

``derivatives(points, order)`` returns a list ``D`` with ``D[k]`` of shape
``(N,) + (n,) * k + (m,)`` holding every k-th partial derivative as a full
symmetric tensor.
"""

from functools import lru_cache
from itertools import combinations_with_replacement, permutations

import numpy as np
import sympy as sp

from ..errors import UnsupportedPrecision

__all__ = [
    "DerivativeOracle",
    "SymbolicOracle",
    "ComposedOracle",
    "FiniteDifferenceOracle",
    "set_partitions",
    "coordinate_symbols",
]

MAX_ORDER = 4


def coordinate_symbols(n):
    return sp.symbols(f"x1:{n + 1}", real=True)


class DerivativeOracle:
    mode = "analytic"
    step = None
    max_order = MAX_ORDER

    def __init__(self, n, m):
        self.n = n
        self.m = m

    def derivatives(self, points, order):
        raise NotImplementedError

    def _check_order(self, order):
        if order > self.max_order:
            raise UnsupportedPrecision(
                f"{self.mode} oracle supplies derivatives up to order "
                f"{self.max_order}, requested {order}")


@lru_cache(maxsize=None)
def _compiled(exprs, symbols, order):
    """Lambdified unique k-th partials of ``exprs`` (a tuple of sympy exprs)."""
    n = len(symbols)
    multi = list(combinations_with_replacement(range(n), order))
    flat = []
    for mi in multi:
        for e in exprs:
            flat.append(sp.diff(e, *[symbols[i] for i in mi]) if mi else e)
    fn = sp.lambdify(symbols, flat, "numpy", cse=True)
    return multi, fn


class SymbolicOracle(DerivativeOracle):
    """Exact partials of sympy expressions in ``x1..xn``."""

    def __init__(self, exprs, symbols):
        super().__init__(len(symbols), len(exprs))
        self.exprs = tuple(sp.sympify(e) for e in exprs)
        self.symbols = tuple(symbols)

    def derivatives(self, points, order):
        self._check_order(order)
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        N, n, m = pts.shape[0], self.n, self.m
        out = []
        cols = [pts[:, i] for i in range(n)]
        for k in range(order + 1):
            multi, fn = _compiled(self.exprs, self.symbols, k)
            vals = fn(*cols)
            D = np.empty((N,) + (n,) * k + (m,))
            for j, mi in enumerate(multi):
                block = np.empty((N, m))
                for c in range(m):
                    block[:, c] = np.broadcast_to(vals[j * m + c], (N,))
                for p in set(permutations(mi)):
                    D[(slice(None),) + p] = block
            out.append(D)
        return out


def set_partitions(items):
    """All set partitions of the list ``items`` (as lists of blocks)."""
    items = list(items)
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for part in set_partitions(rest):
        yield [[first]] + part
        for i in range(len(part)):
            yield part[:i] + [[first] + part[i]] + part[i + 1:]


_SLOTS = "abcdefgh"
_INNER = "pqrstuvw"


class ComposedOracle(DerivativeOracle):
    """Partials of ``outer(inner(x))`` by the multivariate Faa di Bruno formula."""

    def __init__(self, outer, inner):
        if outer.n != inner.m:
            raise ValueError("outer input dimension must match inner output")
        super().__init__(inner.n, outer.m)
        self.outer = outer
        self.inner = inner
        self.max_order = min(outer.max_order, inner.max_order)

    def derivatives(self, points, order):
        self._check_order(order)
        Din = self.inner.derivatives(points, order)
        Dout = self.outer.derivatives(Din[0], order)
        out = [Dout[0]]
        for k in range(1, order + 1):
            slots = _SLOTS[:k]
            acc = 0.0
            for part in set_partitions(range(k)):
                inner_idx = _INNER[:len(part)]
                ops = ["z" + inner_idx + "m"]
                args = [Dout[len(part)]]
                for b, block in enumerate(part):
                    ops.append("z" + "".join(slots[i] for i in block) + inner_idx[b])
                    args.append(Din[len(block)])
                spec = ",".join(ops) + "->z" + slots + "m"
                acc = acc + np.einsum(spec, *args, optimize=True)
            out.append(acc)
        return out


class FiniteDifferenceOracle(DerivativeOracle):
    """Second-order central differences of a vectorized numeric map.

    Only first and second partials are available; anything higher raises
    ``UnsupportedPrecision``.
    """

    mode = "finite-difference"
    max_order = 2

    def __init__(self, fn, n, m, step):
        super().__init__(n, m)
        self.fn = fn
        self.step = float(step)

    def derivatives(self, points, order):
        self._check_order(order)
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        N, n, h = pts.shape[0], self.n, self.step
        f0 = np.asarray(self.fn(pts), dtype=float).reshape(N, self.m)
        out = [f0]
        if order == 0:
            return out
        eye = np.eye(n) * h
        fp = [np.asarray(self.fn(pts + eye[a])).reshape(N, self.m) for a in range(n)]
        fm = [np.asarray(self.fn(pts - eye[a])).reshape(N, self.m) for a in range(n)]
        out.append(np.stack([(fp[a] - fm[a]) / (2 * h) for a in range(n)], axis=1))
        if order == 1:
            return out
        D2 = np.empty((N, n, n, self.m))
        for a in range(n):
            D2[:, a, a] = (fp[a] - 2 * f0 + fm[a]) / h ** 2
            for b in range(a + 1, n):
                pp = self.fn(pts + eye[a] + eye[b])
                pm = self.fn(pts + eye[a] - eye[b])
                mp = self.fn(pts - eye[a] + eye[b])
                mm = self.fn(pts - eye[a] - eye[b])
                v = (np.asarray(pp) - pm - mp + mm).reshape(N, self.m) / (4 * h * h)
                D2[:, a, b] = v
                D2[:, b, a] = v
        out.append(D2)
        return out
