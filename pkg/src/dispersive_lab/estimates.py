"""Energy densities as per-mode Hermitian forms and checks of their derivative cancellations.

Every energy used by the a-priori estimates is, mode pair by mode pair, a
quadratic form ``U* A(xi) U`` in ``U = (u^(xi), conj u^(-xi))``.  Along the
flow ``dU/dt = i M U`` its derivative is ``U* R U`` with
``R = i (A M - M^H A)``.  The residuals below add the compensating
lambda-densities to ``R``; the estimates say the result stays bounded in xi.

The entries of ``A M`` reach ``xi^{2m}`` while the residual is O(1), so all
assembly happens in extended precision (an :class:`mpmath.MPContext` per
evaluation, sized by :func:`working_dps`) and only the final matrix is
rounded to ``complex128``.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field
from typing import Callable

import mpmath
import numpy as np

from . import coefficients as ce
from .coefficients import Kind, coefficient_table
from .errors import InvalidConfig
from .evolution import eigen_exponents, mode_matrix_entries, working_dps

__all__ = [
    "QuadraticForm",
    "EstimateReport",
    "RateScan",
    "XI_GRID",
    "derivative_form",
    "prop21_residual",
    "lemma21_residual",
    "prop22_residual",
    "lambda_density_form",
    "growth_exponent",
    "estimate_report",
    "smoothing_rate_scan",
]

XI_GRID = tuple(2.0**k for k in range(11))
GROWTH_PASS = 0.1
NORM_FLOOR = 1e-12
# norms below REL_FLOOR * sup(norms) count as bounded noise
REL_FLOOR = 1e-2
# slope is fitted on xi >= FIT_FROM; below it bounded residuals are still
# approaching their plateau and the transient reads as spurious growth
FIT_FROM = 256.0


@dataclass(frozen=True)
class QuadraticForm:
    """``assembler(xi, ctx)`` returns A(xi) as nested 2x2 lists of ctx numbers."""

    assembler: Callable
    description: str = ""


@dataclass
class EstimateReport:
    name: str
    xi_grid: list
    norms: list
    sup_norm: float
    growth_fit: float
    passed: bool
    notes: dict = field(default_factory=dict)

    def to_dict(self):
        return asdict(self)

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["xi", "norm"])
        for x, n in zip(self.xi_grid, self.norms):
            w.writerow([f"{x:.17g}", f"{n:.17g}"])
        return buf.getvalue()


# ---------------------------------------------------------------------------
# Extended-precision context
# ---------------------------------------------------------------------------


class _Precise:
    """Spec coefficients and derived sequences lifted to one mpmath context."""

    def __init__(self, spec, xi_max, extra=40):
        ctx = mpmath.MPContext()
        ctx.dps = working_dps(spec.m, xi_max, extra)
        self.ctx = ctx
        self.m = m = spec.m
        self.a = [ctx.mpc(z) for z in spec.a]
        self.b = [ctx.mpc(z) for z in spec.b]
        self.gamma = ce._gamma(self.a, self.b, m)
        self.lam = ce._lambda(self.a, self.b, m, self.gamma)
        self.alpha = ce._alpha(self.a, self.b, m)
        self.lp, self.lm = ce._lambda_pm(self.a, self.b, m, self.alpha)
        self.tol = ce.default_tolerance(spec)

    def beta(self, jstar):
        return ce._beta(self.lp, self.lm, self.m, jstar, self.tol)

    def M(self, xi):
        m11, m12, m21, m22 = mode_matrix_entries(self.a, self.b, self.m, self.ctx.mpf(xi))
        return [[m11, m12], [m21, m22]]


def _mul(A, B):
    return [[A[i][0] * B[0][k] + A[i][1] * B[1][k] for k in range(2)] for i in range(2)]


def _adj(A):
    return [[A[k][i].conjugate() for k in range(2)] for i in range(2)]


def _derivative(A, M, ctx):
    AM = _mul(A, M)
    MA = _mul(_adj(M), A)
    j = ctx.mpc(0, 1)
    return [[j * (AM[i][k] - MA[i][k]) for k in range(2)] for i in range(2)]


def _to_numpy(R):
    return np.array([[complex(R[i][k]) for k in range(2)] for i in range(2)], dtype=complex)


def _lift(ctx, z):
    if isinstance(z, (ctx.mpc, ctx.mpf)):
        return z
    return ctx.mpc(complex(z))


def derivative_form(spec, A, xi):
    """Matrix of d/dt [U* A U] along dU/dt = i M(xi) U, i.e. i(A M - M^H A)."""
    ctx = mpmath.MPContext()
    ctx.dps = working_dps(spec.m, xi, 40)
    a = [ctx.mpc(z) for z in spec.a]
    b = [ctx.mpc(z) for z in spec.b]
    m11, m12, m21, m22 = mode_matrix_entries(a, b, spec.m, ctx.mpf(xi))
    Amat = A.assembler(ctx.mpf(xi), ctx)
    Amat = [[_lift(ctx, Amat[i][k]) for k in range(2)] for i in range(2)]
    return _to_numpy(_derivative(Amat, [[m11, m12], [m21, m22]], ctx))


# ---------------------------------------------------------------------------
# Residual assembly
# ---------------------------------------------------------------------------


def _ablation(ablate):
    if ablate in (None, False):
        return set()
    if ablate is True or ablate == "all":
        return {"gamma", "alpha", "beta"}
    if isinstance(ablate, str):
        return {ablate}
    return set(ablate)


def _prop21(P, xi, ablate):
    ctx, m = P.ctx, P.m
    X = ctx.mpf(xi)
    g = 0 * X
    if "gamma" not in ablate:
        for j, gj in enumerate(P.gamma, start=1):
            g = g + gj * X ** (-2 * j)
    A = [[ctx.mpc(1), g], [g.conjugate(), ctx.mpc(1)]]
    R = _derivative(A, P.M(xi), ctx)
    even = sum((P.lam[2 * j - 1] * X ** (2 * (m - j)) for j in range(1, m)), 0 * X)
    odd = sum((P.lam[2 * j - 2] * X ** (2 * (m - j) + 1) for j in range(1, m + 1)), 0 * X)
    R[0][0] += even + odd
    R[1][1] += even - odd
    return R


def _alpha_symbol(P, X, sign):
    """(1/2) sum_j alpha_j (sign)^j X^{-j}."""
    s = 0 * X
    for j, aj in enumerate(P.alpha, start=1):
        s = s + (sign**j) * aj * X ** (-j)
    return s / 2


def _lemma21(P, xi, side, ablate):
    ctx, m = P.ctx, P.m
    X = ctx.mpf(xi)
    zero = ctx.mpc(0)
    if side == "Plus":
        c = zero if "alpha" in ablate else _alpha_symbol(P, X, 1)
        A = [[ctx.mpc(1), c], [c.conjugate(), zero]]
    else:
        c = zero if "alpha" in ablate else _alpha_symbol(P, X, -1)
        A = [[zero, c], [c.conjugate(), ctx.mpc(1)]]
    R = _derivative(A, P.M(xi), ctx)
    for j in range(1, 2 * m):
        w = X ** (2 * m - j)
        if side == "Plus":
            R[0][0] += P.lp[j - 1] * w
            R[1][1] += P.lm[j - 1] * w
        else:
            R[1][1] += (-1) ** j * P.lp[j - 1] * w
            R[0][0] += (-1) ** j * P.lm[j - 1] * w
    return R


def _prop22(P, xi, side, jstar, ablate):
    ctx, m = P.ctx, P.m
    X = ctx.mpf(xi)
    zero = ctx.mpc(0)
    bp, bm = P.beta(jstar)
    if "beta" in ablate:
        bp = [0] * len(bp)
        bm = [0] * len(bm)
    use_alpha = "alpha" not in ablate
    c_plus = _alpha_symbol(P, X, 1) if use_alpha else zero
    c_minus = _alpha_symbol(P, X, -1) if use_alpha else zero
    if side == "Plus":
        # ||P+u||^2 + alpha pairing + sum_k beta+_k F-_k
        A = [[ctx.mpc(1), c_plus], [c_plus.conjugate(), zero]]
        for k, bk in enumerate(bp, start=1):
            w = bk * X ** (-(k + 2))
            A[0][1] += w * c_minus
            A[1][0] += w * c_minus.conjugate()
            A[1][1] += w
    else:
        A = [[zero, c_minus], [c_minus.conjugate(), ctx.mpc(1)]]
        for k, bk in enumerate(bm, start=1):
            w = bk * X ** (-(k + 2))
            A[0][1] += w * c_plus
            A[1][0] += w * c_plus.conjugate()
            A[0][0] += w
    R = _derivative(A, P.M(xi), ctx)
    lead = P.lp[2 * jstar - 2] * X ** (2 * m - 2 * jstar + 1)
    env = X ** (2 * (m - jstar))
    root = ctx.sqrt(env)
    # allowed right-hand side: C|U|^2 + C xi^{2(m-j*)} |U_side|^2 -> normalise by it
    if side == "Plus":
        R[0][0] += lead
        return [[R[0][0] / env, R[0][1] / root], [R[1][0] / root, R[1][1]]]
    R[1][1] -= lead
    return [[R[0][0], R[0][1] / root], [R[1][0] / root, R[1][1] / env]]


def _require_elliptic(spec, table):
    cls = table.classification
    if cls.kind is not Kind.ELLIPTIC:
        raise InvalidConfig(f"twisted energy needs an Elliptic spec, got {cls.kind.value}")
    return cls.jstar


def prop21_residual(spec, table=None, xi=1.0, ablate=None):
    """d/dt(||u||^2 + gamma corrections) plus lambda densities, on one mode pair."""
    P = _Precise(spec, xi)
    return _to_numpy(_prop21(P, xi, _ablation(ablate)))


def lemma21_residual(spec, table=None, xi=1.0, side="Plus", ablate=None):
    """Same construction for the P+ (side='Plus') or P- energy with alpha corrections."""
    if side not in ("Plus", "Minus"):
        raise InvalidConfig("side must be 'Plus' or 'Minus'")
    P = _Precise(spec, xi)
    return _to_numpy(_lemma21(P, xi, side, _ablation(ablate)))


def prop22_residual(spec, table=None, xi=1.0, side="Plus", ablate=None):
    """Twisted P+/P- energy residual divided by the allowed xi^{2(m-j*)} envelope.

    The allowed right-hand side C|U|^2 + C xi^{2(m-j*)}|U_side|^2 is taken as
    the pointwise max of the two densities; the returned matrix is
    W^{-1/2} R W^{-1/2} with W = diag of those weights, so it is bounded in
    xi exactly when the estimate holds.
    """
    if table is None:
        table = coefficient_table(spec)
    jstar = _require_elliptic(spec, table)
    if side not in ("Plus", "Minus"):
        raise InvalidConfig("side must be 'Plus' or 'Minus'")
    P = _Precise(spec, xi)
    return _to_numpy(_prop22(P, xi, side, jstar, _ablation(ablate)))


def lambda_density_form(spec, table, xi):
    """Per-pair matrix of sum lambda_{2j}||d^{m-j}u||^2 + sum lambda_{2j-1}<D^{2(m-j)+1}u, u>."""
    m = spec.m
    lam = table.lambda_
    even = sum(lam[2 * j - 1] * xi ** (2 * (m - j)) for j in range(1, m))
    odd = sum(lam[2 * j - 2] * xi ** (2 * (m - j) + 1) for j in range(1, m + 1))
    return np.array([[even + odd, 0], [0, even - odd]], dtype=complex)


# ---------------------------------------------------------------------------
# Grid evaluation and reports
# ---------------------------------------------------------------------------


def growth_exponent(xi_grid, norms, floor=NORM_FLOOR, fit_from=FIT_FROM, rel_floor=REL_FLOOR):
    """Least-squares slope of log(norm) against log(xi), over xi >= fit_from.

    Norms are clipped below at max(floor, rel_floor * max(norms)).
    """
    xi = np.asarray(xi_grid, dtype=float)
    norms = np.asarray(norms, dtype=float)
    if len(norms):
        floor = max(floor, rel_floor * float(np.max(norms)))
    keep = xi >= fit_from
    if keep.sum() < 2:
        keep = np.ones_like(xi, dtype=bool)
    x = np.log(xi[keep])
    y = np.log(np.maximum(norms[keep], floor))
    if np.ptp(y) == 0:
        return 0.0
    slope, _ = np.polyfit(x, y, 1)
    return float(slope)


def _op_norm(R):
    return float(np.linalg.norm(R, 2))


def estimate_report(name, spec, xi_grid=XI_GRID, side="Plus", ablate=None, table=None):
    """Evaluate one residual family on ``xi_grid`` and fit its growth.

    ``name`` is 'prop21', 'lemma21' or 'prop22'.
    """
    if table is None:
        table = coefficient_table(spec)
    abl = _ablation(ablate)
    P = _Precise(spec, max(xi_grid))
    notes = {"side": side, "ablate": sorted(abl), "m": spec.m}
    if name == "prop21":
        mats = [_prop21(P, x, abl) for x in xi_grid]
        notes["side"] = None
    elif name == "lemma21":
        mats = [_lemma21(P, x, side, abl) for x in xi_grid]
    elif name == "prop22":
        jstar = _require_elliptic(spec, table)
        notes["jstar"] = jstar
        mats = [_prop22(P, x, side, jstar, abl) for x in xi_grid]
    else:
        raise InvalidConfig(f"unknown estimate {name!r}")
    norms = [_op_norm(_to_numpy(R)) for R in mats]
    sup = max(norms)
    slope = growth_exponent(xi_grid, norms)
    passed = bool(math.isfinite(sup) and slope <= GROWTH_PASS)
    return EstimateReport(name, [float(x) for x in xi_grid], norms, sup, slope, passed, notes)


# ---------------------------------------------------------------------------
# Smoothing directions
# ---------------------------------------------------------------------------


@dataclass
class RateScan:
    rows: list
    xi0: int | None
    ties: list
    expected: tuple | None
    kind: str

    @property
    def consistent(self):
        return self.expected is None or self.xi0 is not None


def _expected_signs(cls):
    if cls.kind is Kind.DISPERSIVE:
        return None
    pos = cls.sign == "Positive"
    if cls.kind is Kind.PARABOLIC:
        return (-1, -1) if pos else (1, 1)
    return (-1, 1) if pos else (1, -1)


def smoothing_rate_scan(spec, xi_max, zero_tolerance=None):
    """Forward log-modulus rates of the P+-dominant and P--dominant eigenvectors.

    For each integer xi in [1, xi_max] the eigenvector of M(xi) with the
    larger first component is tagged 'plus'.  ``xi0`` is the smallest xi from
    which every scanned rate has the sign pattern the classification predicts
    (None when the pattern fails at xi_max; always None for Dispersive).
    """
    if xi_max < 4:
        raise InvalidConfig("xi_max must be >= 4")
    cls = ce.classify(spec, zero_tolerance)
    expected = _expected_signs(cls)
    rows, ties = [], []
    for xi in range(1, int(xi_max) + 1):
        e = eigen_exponents(spec, xi)
        w1, w2 = e.weight1, e.weight2
        if not (math.isfinite(w1) and math.isfinite(w2)) or abs(w1 - w2) < 1e-12:
            ties.append(xi)
            plus, minus = e.growth1, e.growth2
        elif w1 > w2:
            plus, minus = e.growth1, e.growth2
        else:
            plus, minus = e.growth2, e.growth1
        rows.append((xi, plus, minus))
    xi0 = None
    if expected is not None:
        for xi, plus, minus in reversed(rows):
            if np.sign(plus) == expected[0] and np.sign(minus) == expected[1] and xi not in ties:
                xi0 = xi
            else:
                break
    return RateScan(rows, xi0, ties, expected, cls.kind.value)
