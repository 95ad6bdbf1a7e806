"""Pointwise algebra of principal curvatures.

Symmetric functions ``S_r`` and their normalized versions ``H_r``, Newton
operators ``P_r``, the trace identities they satisfy, and audits of the
Maclaurin-type inequalities used in the stability estimates.
"""

from dataclasses import dataclass, field
from math import comb, sqrt

import numpy as np

from .errors import InvalidInput

__all__ = [
    "PrincipalSpectrum",
    "ShapeOperator",
    "NewtonOperator",
    "CurvatureVector",
    "MaclaurinReport",
    "EstimaAudit",
    "elem_sym",
    "elem_sym_values",
    "newton_operator",
    "newton_operators",
    "trace_identity_report",
    "trace_identity_batch",
    "maclaurin_check",
    "maclaurin_batch",
    "estima_audit",
    "orient_p1_psd",
]

IDENTITY_RTOL = 1e-10
PSD_SLACK = 1e-12
ASYMMETRY_RTOL = 1e-8


def _frozen(a):
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class PrincipalSpectrum:
    lam: np.ndarray

    def __post_init__(self):
        lam = _frozen(self.lam).ravel()
        if lam.size < 2:
            raise InvalidInput(f"need dimension n >= 2, got {lam.size}")
        if not np.all(np.isfinite(lam)):
            raise InvalidInput("principal curvatures must be finite")
        object.__setattr__(self, "lam", lam)

    @property
    def n(self):
        return self.lam.size


@dataclass(frozen=True)
class ShapeOperator:
    """Symmetric shape operator in an orthonormal frame.

    Inputs are symmetrized; asymmetry above ``ASYMMETRY_RTOL`` (relative to
    the Frobenius norm) is rejected.
    """

    entries: np.ndarray

    def __post_init__(self):
        a = np.array(self.entries, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise InvalidInput(f"shape operator must be square, got {a.shape}")
        if a.shape[0] < 2:
            raise InvalidInput("need dimension n >= 2")
        if not np.all(np.isfinite(a)):
            raise InvalidInput("shape operator entries must be finite")
        scale = np.linalg.norm(a)
        if np.linalg.norm(a - a.T) > ASYMMETRY_RTOL * max(scale, 1e-300):
            raise InvalidInput("shape operator is not symmetric")
        object.__setattr__(self, "entries", _frozen(0.5 * (a + a.T)))

    @classmethod
    def diag(cls, values):
        return cls(np.diag(np.asarray(values, dtype=float)))

    @property
    def n(self):
        return self.entries.shape[0]

    def spectrum(self):
        return PrincipalSpectrum(np.linalg.eigvalsh(self.entries))


@dataclass(frozen=True)
class NewtonOperator:
    r: int
    entries: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "entries", _frozen(self.entries))


@dataclass(frozen=True)
class CurvatureVector:
    S: np.ndarray
    H: np.ndarray = field(default=None)

    def __post_init__(self):
        S = _frozen(self.S)
        n = S.size - 1
        H = S / np.array([comb(n, r) for r in range(n + 1)], dtype=float)
        object.__setattr__(self, "S", S)
        object.__setattr__(self, "H", _frozen(H))

    @property
    def n(self):
        return self.S.size - 1


def elem_sym_values(lam):
    """Elementary symmetric functions along the last axis.

    Returns an array with trailing length ``n + 1`` holding ``S_0..S_n``;
    ``S_r`` is the coefficient of ``t**(n-r)`` in ``prod(t + lam_i)``, built
    one factor at a time.
    """
    lam = np.asarray(lam, dtype=float)
    n = lam.shape[-1]
    S = np.zeros(lam.shape[:-1] + (n + 1,))
    S[..., 0] = 1.0
    for i in range(n):
        li = lam[..., i]
        # descending r so each factor is used once
        for r in range(i + 1, 0, -1):
            S[..., r] += li * S[..., r - 1]
    return S


def elem_sym(spec):
    if not isinstance(spec, PrincipalSpectrum):
        spec = PrincipalSpectrum(spec)
    return CurvatureVector(elem_sym_values(spec.lam))


def _as_shape(A):
    return A if isinstance(A, ShapeOperator) else ShapeOperator(A)


def newton_operators(A, rmax=None):
    """All Newton operators ``P_0..P_rmax`` from ``P_r = S_r I - A P_{r-1}``."""
    A = _as_shape(A)
    n = A.n
    rmax = n if rmax is None else rmax
    if not 0 <= rmax <= n:
        raise InvalidInput(f"order must lie in 0..{n}, got {rmax}")
    S = elem_sym_values(np.linalg.eigvalsh(A.entries))
    a = A.entries
    eye = np.eye(n)
    out = [eye]
    for r in range(1, rmax + 1):
        out.append(S[r] * eye - a @ out[-1])
    return [NewtonOperator(r, p) for r, p in enumerate(out)], CurvatureVector(S)


def newton_operator(A, r):
    A = _as_shape(A)
    if not isinstance(r, (int, np.integer)) or not 0 <= r <= A.n:
        raise InvalidInput(f"order must be an integer in 0..{A.n}, got {r!r}")
    ops, _ = newton_operators(A, int(r))
    return ops[-1]


def trace_identity_report(A, r):
    """Relative residuals of the three trace identities at order ``r``.

    The targets are ``(n-r) S_r``, ``(r+1) S_{r+1}`` and
    ``S_1 S_{r+1} - (r+2) S_{r+2}``; each residual is divided by
    ``1 + |target|``.
    """
    A = _as_shape(A)
    n = A.n
    if not isinstance(r, (int, np.integer)) or not 0 <= r <= n - 2:
        raise InvalidInput(f"order must be an integer in 0..{n - 2}, got {r!r}")
    ops, cv = newton_operators(A, r)
    P = ops[r].entries
    a = A.entries
    S = cv.S
    targets = (
        (n - r) * S[r],
        (r + 1) * S[r + 1],
        S[1] * S[r + 1] - (r + 2) * S[r + 2],
    )
    values = (np.trace(P), np.trace(a @ P), np.trace(a @ a @ P))
    return tuple(abs(v - t) / (1.0 + abs(t)) for v, t in zip(values, targets))


def trace_identity_batch(As):
    """Residuals of ``trace_identity_report`` for a stack of symmetric matrices.

    Returns an array of shape ``(count, n - 1, 3)`` indexed by sample, order
    ``r = 0..n-2`` and identity.
    """
    As = np.asarray(As, dtype=float)
    if As.ndim != 3 or As.shape[1] != As.shape[2] or As.shape[1] < 2:
        raise InvalidInput(f"expected a stack of n x n matrices, got shape {As.shape}")
    As = 0.5 * (As + np.swapaxes(As, 1, 2))
    n = As.shape[1]
    S = elem_sym_values(np.linalg.eigvalsh(As))
    eye = np.eye(n)
    A2 = As @ As
    P = np.broadcast_to(eye, As.shape).copy()
    out = np.empty((As.shape[0], n - 1, 3))
    for r in range(n - 1):
        if r > 0:
            P = S[:, r, None, None] * eye - As @ P
        targets = np.stack([(n - r) * S[:, r], (r + 1) * S[:, r + 1],
                            S[:, 1] * S[:, r + 1] - (r + 2) * S[:, r + 2]], axis=1)
        values = np.stack([np.trace(P, axis1=1, axis2=2),
                           np.einsum("zij,zji->z", As, P),
                           np.einsum("zij,zji->z", A2, P)], axis=1)
        out[:, r] = np.abs(values - targets) / (1.0 + np.abs(targets))
    return out


@dataclass(frozen=True)
class MaclaurinReport:
    hypotheses_met: bool
    holds: dict
    slack: dict

    @property
    def all_hold(self):
        return all(self.holds.values())


def _maclaurin_arrays(lam):
    lam = np.asarray(lam, dtype=float)
    n = lam.shape[-1]
    S = elem_sym_values(lam)
    S1, S2, S3 = S[..., 1], S[..., 2], S[..., 3] if n >= 3 else np.zeros_like(S[..., 1])
    H1 = S1 / n
    H2 = S2 / comb(n, 2)
    H3 = S3 / comb(n, 3) if n >= 3 else np.zeros_like(H1)
    scale = 1.0 + np.max(np.abs(lam), axis=-1)
    S2p = np.clip(S2, 0.0, None)
    H2p = np.clip(H2, 0.0, None)
    slack = {
        "newton": H1 ** 2 - H2,
        "h1h2_ge_h3": H1 * H2 - H3,
        "h1_ge_sqrt_h2": H1 - np.sqrt(H2p),
        "est11": (n - 2) / n * S1 * S2 - 3 * S3,
        "est12": S1 - sqrt(2 * n / (n - 1)) * np.sqrt(S2p),
    }
    # tolerance scales with the homogeneous degree of each inequality
    tol = {
        "newton": 1e-12 * scale ** 2,
        "h1h2_ge_h3": 1e-12 * scale ** 3,
        "h1_ge_sqrt_h2": 1e-12 * scale,
        "est11": 1e-12 * n ** 3 * scale ** 3,
        "est12": 1e-12 * n * scale,
    }
    hyp = (S2 >= 0) & (S1 > 0)
    return hyp, slack, tol


def maclaurin_check(spec):
    """Audit ``H1 H2 >= H3``, ``H1 >= sqrt(H2)`` and their ``S_r`` forms.

    The four conditional inequalities are evaluated only when ``S2 >= 0`` and
    ``S1 > 0``; otherwise only their slack is reported.  Newton's inequality
    ``H1**2 >= H2`` holds for every real spectrum and is always evaluated.
    """
    if not isinstance(spec, PrincipalSpectrum):
        spec = PrincipalSpectrum(spec)
    hyp, slack, tol = _maclaurin_arrays(spec.lam)
    hyp = bool(hyp)
    holds = {}
    for key, s in slack.items():
        if key == "newton" or hyp:
            holds[key] = bool(s >= -tol[key])
    return MaclaurinReport(hyp, holds, {k: float(s) for k, s in slack.items()})


def maclaurin_batch(lams):
    """Vectorized audit over rows of ``lams``.

    Returns ``(n_hypothesis_rows, violations)`` where ``violations`` maps each
    inequality to the number of rows (meeting the hypotheses, or all rows for
    Newton's inequality) where it fails.
    """
    lams = np.atleast_2d(np.asarray(lams, dtype=float))
    hyp, slack, tol = _maclaurin_arrays(lams)
    viol = {}
    for key, s in slack.items():
        bad = s < -tol[key]
        if key != "newton":
            bad &= hyp
        viol[key] = int(np.count_nonzero(bad))
    return int(np.count_nonzero(hyp)), viol


@dataclass(frozen=True)
class EstimaAudit:
    precondition_met: bool
    strong_holds: bool
    weak_holds: bool
    max_eig_p1: float
    s1: float
    min_eig_p1: float


def estima_audit(spec):
    """Compare ``max eig P_1`` with ``S_1`` (strong) and ``(n-1) S_1`` (weak).

    ``P_1`` has eigenvalues ``S_1 - lambda_i``.  When it is positive
    semidefinite its trace ``(n-1) S_1`` bounds every eigenvalue, so the weak
    form always holds; the strong form can fail.  A non-psd ``P_1`` yields a
    report with ``precondition_met=False`` rather than an exception.
    """
    if not isinstance(spec, PrincipalSpectrum):
        spec = PrincipalSpectrum(spec)
    n = spec.n
    s1 = float(np.sum(spec.lam))
    eig = s1 - spec.lam
    scale = 1.0 + float(np.max(np.abs(spec.lam)))
    slack = PSD_SLACK * scale
    lo, hi = float(eig.min()), float(eig.max())
    return EstimaAudit(
        precondition_met=lo >= -slack,
        strong_holds=hi <= s1 + slack,
        weak_holds=hi <= (n - 1) * s1 + n * slack,
        max_eig_p1=hi,
        s1=s1,
        min_eig_p1=lo,
    )


def orient_p1_psd(A):
    """Return ``(sign, sign * A)`` such that ``P_1`` is positive semidefinite.

    ``P_1`` is linear in ``A``, so flipping the orientation flips it.  Returns
    ``None`` when ``P_1`` is indefinite for both orientations.
    """
    A = _as_shape(A)
    lam = np.linalg.eigvalsh(A.entries)
    eig = lam.sum() - lam
    slack = PSD_SLACK * (1.0 + np.max(np.abs(lam)))
    if eig.min() >= -slack:
        return 1, A
    if eig.max() <= slack:
        return -1, ShapeOperator(-A.entries)
    return None
