"""Per-mode 2x2 systems: generator matrices, exact propagators, eigen-exponents.

For a frequency ``xi`` the pair ``U = (u^(xi), conj u^(-xi))`` obeys
``dU/dt = i M(xi) U`` with ``M(xi) = sum_{j=0}^{2m} xi^{2m-j} X_j``.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import mpmath
import numpy as np

from .coefficients import lambda_sequence
from .errors import InvalidConfig, ModeOverflow

__all__ = [
    "ModeMatrix",
    "ModePair",
    "EigenExponents",
    "OVERFLOW_LOG",
    "mode_matrix_entries",
    "build_mode_matrix",
    "mat_exp_2x2",
    "propagator",
    "apply_propagator",
    "evolve_mode",
    "eigen_exponents",
    "predicted_rate_diagonal",
    "rk4_oracle",
    "working_dps",
]

OVERFLOW_LOG = 700.0
SERIES_SWITCH = 1e-4


@dataclass(frozen=True)
class ModeMatrix:
    xi: float
    M: np.ndarray


@dataclass(frozen=True)
class ModePair:
    xi: float
    u_plus: complex
    u_minus_bar: complex

    def as_array(self):
        return np.array([self.u_plus, self.u_minus_bar], dtype=complex)


@dataclass(frozen=True)
class EigenExponents:
    mu1: complex
    mu2: complex
    growth1: float
    growth2: float
    defect_flag: bool
    # |first component|^2 / |v|^2 of each eigenvector of M
    weight1: float = float("nan")
    weight2: float = float("nan")


def mode_matrix_entries(a, b, m, xi):
    """Entries (M11, M12, M21, M22) by Horner evaluation in ``xi``.

    Works for Python complex as well as mpmath numbers; ``a``/``b`` are the
    0-based coefficient lists.
    """
    one = xi ** 0
    m11, m12, m21, m22 = one, 0 * one, 0 * one, -one
    for j in range(1, 2 * m + 1):
        s = 1 if j % 2 == 1 else -1  # (-1)^{j+1}
        aj, bj = a[j - 1], b[j - 1]
        m11 = m11 * xi + aj
        m12 = m12 * xi + bj
        m21 = m21 * xi + s * bj.conjugate()
        m22 = m22 * xi + s * aj.conjugate()
    return m11, m12, m21, m22


def build_mode_matrix(spec, xi):
    xi = float(xi)
    if not math.isfinite(xi):
        raise InvalidConfig("xi must be finite")
    m11, m12, m21, m22 = mode_matrix_entries(spec.a, spec.b, spec.m, xi)
    return ModeMatrix(xi, np.array([[m11, m12], [m21, m22]], dtype=complex))


def _cosh_sinhc_series(d2):
    """cosh(d) and sinh(d)/d from six Taylor terms in d^2."""
    ch = 0j
    sc = 0j
    term_c = 1 + 0j
    term_s = 1 + 0j
    for k in range(6):
        ch += term_c
        sc += term_s
        term_c = term_c * d2 / ((2 * k + 1) * (2 * k + 2))
        term_s = term_s * d2 / ((2 * k + 2) * (2 * k + 3))
    return ch, sc


def _expm_entries(a, b, c, d, threshold=OVERFLOW_LOG):
    """exp([[a, b], [c, d]]) for Python complex scalars, as a 4-tuple."""
    mu = 0.5 * (a + d)
    p = 0.5 * (a - d)
    bc = b * c
    if bc == 0:
        delta = p
    else:
        delta = cmath.sqrt(p * p + bc)
    log_mod = mu.real + abs(delta.real)
    if not (math.isfinite(log_mod) and math.isfinite(abs(delta))):
        raise ModeOverflow(float("inf"), threshold=threshold)
    if log_mod > threshold:
        raise ModeOverflow(log_mod, threshold=threshold)
    if abs(delta) < SERIES_SWITCH:
        ch, sc = _cosh_sinhc_series(p * p + bc)
        e = cmath.exp(mu)
        return (e * (ch + sc * p), e * sc * b, e * sc * c, e * (ch - sc * p))
    # Spectral projector form of e^mu (cosh(delta) I + sinhc(delta) B),
    # B = [[p, b], [c, -p]]; (1 -/+ p/delta) rewritten to avoid cancellation.
    ep = cmath.exp(mu + delta)
    em = cmath.exp(mu - delta)
    if abs(delta + p) >= abs(delta - p):
        one_plus = (delta + p) / delta
        one_minus = bc / (delta * (delta + p))
    else:
        one_minus = (delta - p) / delta
        one_plus = bc / (delta * (delta - p))
    half_diff = 0.5 * (ep - em) / delta
    e11 = 0.5 * (ep * one_plus + em * one_minus)
    e22 = 0.5 * (ep * one_minus + em * one_plus)
    return (e11, half_diff * b, half_diff * c, e22)


def mat_exp_2x2(A, threshold=OVERFLOW_LOG):
    """Closed-form exponential of a complex 2x2 matrix.

    Raises :class:`ModeOverflow` when the largest real part of an eigenvalue
    exceeds ``threshold`` (natural log).
    """
    A = np.asarray(A, dtype=complex)
    if A.shape != (2, 2):
        raise InvalidConfig(f"expected a 2x2 matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise ModeOverflow(float("inf"), threshold=threshold)
    e = _expm_entries(complex(A[0, 0]), complex(A[0, 1]), complex(A[1, 0]), complex(A[1, 1]), threshold)
    return np.array([[e[0], e[1]], [e[2], e[3]]], dtype=complex)


def propagator(spec, xi, t, threshold=OVERFLOW_LOG):
    """exp(i t M(xi)) as a 4-tuple (row-major)."""
    m11, m12, m21, m22 = mode_matrix_entries(spec.a, spec.b, spec.m, float(xi))
    it = 1j * t
    try:
        return _expm_entries(it * m11, it * m12, it * m21, it * m22, threshold)
    except ModeOverflow as exc:
        raise ModeOverflow(exc.log_modulus, xi=xi, t=t, threshold=threshold) from None


def evolve_mode(spec, pair, t):
    """Apply exp(i t M(xi)) to the pair's column vector."""
    if not math.isfinite(t):
        raise InvalidConfig("t must be finite")
    E = propagator(spec, pair.xi, t)
    return ModePair(pair.xi, *apply_propagator(E, pair.u_plus, pair.u_minus_bar, pair.xi, t))


def apply_propagator(E, u, v, xi=None, t=None):
    """E @ (u, v), raising ModeOverflow when the product leaves the float range."""
    e11, e12, e21, e22 = E
    p, q = e11 * u + e12 * v, e21 * u + e22 * v
    if not (cmath.isfinite(p) and cmath.isfinite(q)):
        size = max(abs(e11), abs(e12), abs(e21), abs(e22)) * max(abs(u), abs(v))
        log_mod = math.log(size) if 0 < size < math.inf else math.inf
        raise ModeOverflow(log_mod, xi=xi, t=t)
    return p, q


def working_dps(m, xi, extra=30):
    """Decimal digits that keep O(1) quantities exact next to xi^{2m} terms."""
    mag = max(abs(float(xi)), 2.0)
    return extra + int(math.ceil(2 * m * math.log10(mag)))


def eigen_exponents(spec, xi):
    """Eigenvalues of i M(xi) and their real parts (log-modulus rates).

    Evaluated in extended precision so the O(1) real parts survive next to
    the O(xi^{2m}) imaginary parts.
    """
    ctx = mpmath.MPContext()
    ctx.dps = working_dps(spec.m, xi)
    a = [ctx.mpc(z) for z in spec.a]
    b = [ctx.mpc(z) for z in spec.b]
    X = ctx.mpf(xi)
    m11, m12, m21, m22 = mode_matrix_entries(a, b, spec.m, X)
    half_tr = (m11 + m22) / 2
    p = (m11 - m22) / 2
    disc = p * p + m12 * m21
    delta = ctx.sqrt(disc)
    lam1, lam2 = half_tr + delta, half_tr - delta
    scale = max(abs(m11), abs(m12), abs(m21), abs(m22), 1)
    defect = bool(abs(disc) < 1e-10 * scale**2)

    def weight(lam):
        v1 = (m12, lam - m11)
        v2 = (lam - m22, m21)
        n1 = abs(v1[0]) ** 2 + abs(v1[1]) ** 2
        n2 = abs(v2[0]) ** 2 + abs(v2[1]) ** 2
        v, n = (v1, n1) if n1 >= n2 else (v2, n2)
        if n == 0:
            # A = scalar multiple of I: every vector is an eigenvector
            return float("nan")
        return float(abs(v[0]) ** 2 / n)

    mu1 = complex(1j * lam1)
    mu2 = complex(1j * lam2)
    return EigenExponents(
        mu1=mu1,
        mu2=mu2,
        growth1=float(-lam1.imag),
        growth2=float(-lam2.imag),
        defect_flag=defect,
        weight1=weight(lam1),
        weight2=weight(lam2),
    )


def predicted_rate_diagonal(spec, xi):
    """-(1/2) sum_{j<2m} lambda_j xi^{2m-j}  -  Im a_{2m}.

    The last term is the zeroth-order coefficient's uniform rate, which never
    enters the classification.  Exact for the first component when b = 0.
    """
    lam = lambda_sequence(spec)
    m = spec.m
    xi = float(xi)
    rate = 0.0
    for j in range(1, 2 * m):
        rate -= 0.5 * lam[j - 1] * xi ** (2 * m - j)
    return rate - spec.a[2 * m - 1].imag


def rk4_oracle(spec, pair, t, step):
    """Classical fixed-step RK4 for dU/dt = i M U.  Test oracle only."""
    if step <= 0:
        raise InvalidConfig("step must be positive")
    n = int(math.ceil(abs(t) / step - 1e-9))
    if n > 1e7:
        raise InvalidConfig("t/step exceeds 1e7")
    if n == 0:
        return ModePair(pair.xi, pair.u_plus, pair.u_minus_bar)
    h = t / n
    m11, m12, m21, m22 = mode_matrix_entries(spec.a, spec.b, spec.m, float(pair.xi))
    # h * i M
    a11, a12, a21, a22 = 1j * h * m11, 1j * h * m12, 1j * h * m21, 1j * h * m22
    u, v = complex(pair.u_plus), complex(pair.u_minus_bar)
    for i in range(n):
        k1u = a11 * u + a12 * v
        k1v = a21 * u + a22 * v
        tu, tv = u + 0.5 * k1u, v + 0.5 * k1v
        k2u = a11 * tu + a12 * tv
        k2v = a21 * tu + a22 * tv
        tu, tv = u + 0.5 * k2u, v + 0.5 * k2v
        k3u = a11 * tu + a12 * tv
        k3v = a21 * tu + a22 * tv
        tu, tv = u + k3u, v + k3v
        k4u = a11 * tu + a12 * tv
        k4v = a21 * tu + a22 * tv
        u += (k1u + 2 * k2u + 2 * k3u + k4u) / 6
        v += (k1v + 2 * k2v + 2 * k3v + k4v) / 6
        if i % 1024 == 0 and not (cmath.isfinite(u) and cmath.isfinite(v)):
            raise ModeOverflow(float("inf"), xi=pair.xi, t=t)
    if not (cmath.isfinite(u) and cmath.isfinite(v)):
        raise ModeOverflow(float("inf"), xi=pair.xi, t=t)
    return ModePair(pair.xi, u, v)
