"""Piecewise-linear radial cutoff profiles used as test functions."""

from dataclasses import dataclass

import numpy as np

from ..errors import InvalidInput

__all__ = ["CutoffProfile", "cutoff_eval", "KINDS"]

KINDS = ("theorem31", "lemma32_outside", "lemma32_simple")


@dataclass(frozen=True)
class CutoffProfile:
    """Radial profile ``phi(r)``.

    ``theorem31`` and ``lemma32_simple`` equal 1 on ``[0, R]`` and ramp down
    to 0 on ``[R, 2R]``.  ``lemma32_outside`` is 0 up to ``R0``, rises as
    ``r - R0`` to 1 at ``R0 + 1``, stays 1 up to ``R + R0 + 1`` and falls to 0
    at ``2R + R0 + 1``.
    """

    kind: str
    R: float
    R0: float = 0.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InvalidInput(f"unknown cutoff kind {self.kind!r}; expected one of {KINDS}")
        if not self.R > 0:
            raise InvalidInput(f"R must be positive, got {self.R}")
        if self.kind == "lemma32_outside" and not self.R0 > 0:
            raise InvalidInput(f"R0 must be positive, got {self.R0}")
        object.__setattr__(self, "R", float(self.R))
        object.__setattr__(self, "R0", float(self.R0))

    @property
    def support_radius(self):
        if self.kind == "lemma32_outside":
            return 2 * self.R + self.R0 + 1
        return 2 * self.R

    def knots(self):
        """Breakpoints and values of the piecewise-linear profile."""
        R, R0 = self.R, self.R0
        if self.kind == "lemma32_outside":
            return ([0.0, R0, R0 + 1, R + R0 + 1, 2 * R + R0 + 1],
                    [0.0, 0.0, 1.0, 1.0, 0.0])
        return [0.0, R, 2 * R], [1.0, 1.0, 0.0]

    def to_json(self):
        d = {"kind": self.kind, "R": self.R}
        if self.kind == "lemma32_outside":
            d["R0"] = self.R0
        return d


def cutoff_eval(profile, r):
    """Value of ``profile`` at distance(s) ``r >= 0``; zero beyond the support."""
    r = np.asarray(r, dtype=float)
    if np.any(r < 0):
        raise InvalidInput("distances must be nonnegative")
    xs, ys = profile.knots()
    out = np.interp(r, xs, ys, right=0.0)
    return float(out) if out.ndim == 0 else out
