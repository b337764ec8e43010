"""Torus functions as Fourier coefficients on |xi| <= K, with the energies built on them.

Normalisation: ``||e^{i xi x}|| = 1``, so every norm is a plain coefficient sum.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .coefficients import CheckReport, beta_sequences, coefficient_table
from .errors import InvalidConfig
from .evolution import apply_propagator, build_mode_matrix, propagator

__all__ = [
    "SpectralState",
    "EnergyReport",
    "project",
    "multiplier",
    "sobolev_norm",
    "l2_norm",
    "evolve_state",
    "select_N",
    "energy_E",
    "correction_terms",
    "pair_arrays",
    "energy_form",
    "gronwall_constant",
    "random_state",
    "lemma31_check",
]

PROJECTIONS = ("Pplus", "Pminus", "Pzero", "Pnonzero")
MULTIPLIERS = ("riesz", "bessel", "dpow")


@dataclass(frozen=True)
class SpectralState:
    K: int
    coeffs: np.ndarray
    t: float = 0.0

    def __post_init__(self):
        K = int(self.K)
        if K < 1:
            raise InvalidConfig(f"cutoff K must be positive, got {self.K}")
        c = np.array(self.coeffs, dtype=complex)
        if c.shape != (2 * K + 1,):
            raise InvalidConfig(f"expected {2 * K + 1} coefficients, got shape {c.shape}")
        if not np.all(np.isfinite(c)):
            raise InvalidConfig("state has non-finite coefficients")
        c.setflags(write=False)
        object.__setattr__(self, "K", K)
        object.__setattr__(self, "coeffs", c)
        object.__setattr__(self, "t", float(self.t))

    @property
    def xi(self):
        return np.arange(-self.K, self.K + 1)

    def mode(self, xi):
        if abs(xi) > self.K:
            return 0j
        return complex(self.coeffs[xi + self.K])

    def replace(self, coeffs=None, t=None):
        return SpectralState(self.K, self.coeffs if coeffs is None else coeffs,
                             self.t if t is None else t)

    @classmethod
    def zeros(cls, K, t=0.0):
        return cls(K, np.zeros(2 * K + 1, dtype=complex), t)

    @classmethod
    def from_modes(cls, K, modes, t=0.0):
        """``modes`` is an iterable of ``(xi, value)``; modes beyond K are rejected."""
        c = np.zeros(2 * K + 1, dtype=complex)
        for xi, z in modes:
            xi = int(xi)
            if abs(xi) > K:
                raise InvalidConfig(f"mode xi={xi} outside cutoff K={K}")
            c[xi + K] += complex(z)
        return cls(K, c, t)

    @classmethod
    def delta(cls, K, xi, amplitude=1.0):
        return cls.from_modes(K, [(xi, amplitude)])

    @classmethod
    def random_hs(cls, K, s=0.0, seed=0, epsilon=0.05):
        """u^(xi) = <xi>^{-s-1/2-epsilon} times a random unit phase.

        Phases are drawn in the order xi = 0, 1, -1, 2, -2, ... so data for a
        smaller K is the truncation of data for a larger K (same seed).
        """
        rng = np.random.default_rng(seed)
        phases = np.exp(2j * np.pi * rng.random(2 * K + 1))
        order = [0]
        for k in range(1, K + 1):
            order += [k, -k]
        c = np.zeros(2 * K + 1, dtype=complex)
        for ph, xi in zip(phases, order):
            c[xi + K] = (1.0 + xi * xi) ** (-(s + 0.5 + epsilon) / 2) * ph
        return cls(K, c)

    def to_json(self):
        modes = [[int(x), float(z.real), float(z.imag)]
                 for x, z in zip(self.xi, self.coeffs) if z != 0]
        return {"K": self.K, "modes": modes, "t": self.t}

    @classmethod
    def from_json(cls, data):
        try:
            K = int(data["K"])
            modes = [(int(x), complex(re, im)) for x, re, im in data.get("modes", [])]
        except (KeyError, TypeError, ValueError) as exc:
            raise InvalidConfig(f"bad state JSON: {exc}") from exc
        return cls.from_modes(K, modes, float(data.get("t", 0.0)))


def project(state, kind):
    """Keep xi >= 1 (Pplus), xi <= -1 (Pminus), xi = 0 (Pzero) or xi != 0 (Pnonzero)."""
    xi = state.xi
    masks = {
        "Pplus": xi >= 1,
        "Pminus": xi <= -1,
        "Pzero": xi == 0,
        "Pnonzero": xi != 0,
    }
    if kind not in masks:
        raise InvalidConfig(f"unknown projection {kind!r}; expected one of {PROJECTIONS}")
    return state.replace(coeffs=np.where(masks[kind], state.coeffs, 0))


def _symbol(xi, kind, power):
    xi = xi.astype(float)
    if kind == "riesz":
        return np.abs(xi) ** power
    if kind == "bessel":
        return (1.0 + xi * xi) ** (power / 2)
    if kind == "dpow":
        return xi ** power
    raise InvalidConfig(f"unknown multiplier {kind!r}; expected one of {MULTIPLIERS}")


def multiplier(state, kind, power, auto_project=False):
    """Multiply u^(xi) by |xi|^s (riesz), <xi>^s (bessel) or xi^k (dpow).

    Negative powers of riesz/dpow are singular at xi = 0: a nonzero zero mode
    raises InvalidConfig unless ``auto_project`` applies P_{!=0} first.
    """
    c = np.array(state.coeffs)
    singular = kind in ("riesz", "dpow") and power < 0
    if singular:
        if c[state.K] != 0 and not auto_project:
            raise InvalidConfig("negative-power multiplier applied to a nonzero xi=0 mode")
        c[state.K] = 0
    xi = state.xi
    if singular:
        sym = np.zeros(len(xi))
        nz = xi != 0
        sym[nz] = _symbol(xi[nz], kind, power)
    else:
        sym = _symbol(xi, kind, power)
    return state.replace(coeffs=c * sym)


def l2_norm(state):
    return float(np.sqrt(np.sum(np.abs(state.coeffs) ** 2)))


def sobolev_norm(state, s):
    w = (1.0 + state.xi.astype(float) ** 2) ** s
    return float(np.sqrt(np.sum(w * np.abs(state.coeffs) ** 2)))


def pair_arrays(state):
    """(xi, U1, U2) for xi = 1..K with U1 = u^(xi), U2 = conj u^(-xi)."""
    K = state.K
    xi = np.arange(1, K + 1, dtype=float)
    U1 = state.coeffs[K + 1:]
    U2 = np.conj(state.coeffs[K - 1::-1])
    return xi, U1, U2


def evolve_state(spec, state, t):
    """Exact evolution by t: each mode pair goes through the same propagator as evolve_mode."""
    K = state.K
    c = state.coeffs
    out = np.empty_like(c)
    u0 = complex(c[K])
    out[K] = apply_propagator(propagator(spec, 0.0, t), u0, u0.conjugate(), 0.0, t)[0]
    for xi in range(1, K + 1):
        E = propagator(spec, float(xi), t)
        u = complex(c[K + xi])
        v = complex(c[K - xi]).conjugate()
        p, q = apply_propagator(E, u, v, float(xi), t)
        out[K + xi] = p
        out[K - xi] = q.conjugate()
    return SpectralState(K, out, state.t + t)


@dataclass
class EnergyReport:
    l2_sq: float
    E_value: float
    N_used: float
    correction_value: float
    sobolev: dict = field(default_factory=dict)
    projection_norms: dict = field(default_factory=dict)

    @property
    def main_part(self):
        """||f||^2 + N ||d^{-m} P_{!=0} f||^2: the quantity the sandwich compares to E."""
        return self.E_value - self.correction_value


def _correction_symbol(gamma, xi):
    g = np.zeros(len(xi), dtype=complex)
    for j, gj in enumerate(gamma, start=1):
        g += gj * xi ** (-2.0 * j)
    return g


def select_N(spec, K, table=None):
    """Smallest power-of-two N >= 1 making the gamma correction a small perturbation.

    Per pair the correction is the Hermitian form [[0, g], [conj g, 0]] with
    g(xi) = sum_j gamma_j xi^{-2j}, of operator norm |g(xi)|.  N is doubled
    until |g(xi)| <= 1/2 + (N/2) xi^{-2m} on every xi in [1, max(K, 1024)],
    which is the bound that yields E/2 <= ||f||^2 + N||d^{-m}P f||^2 <= 2E.
    """
    if table is None:
        table = coefficient_table(spec)
    xi = np.arange(1, max(int(K), 1024) + 1, dtype=float)
    g = np.abs(_correction_symbol(table.gamma, xi))
    decay = xi ** (-2.0 * spec.m)
    N = 1.0
    while np.any(g > 0.5 + 0.5 * N * decay):
        N *= 2.0
    return N


def energy_E(spec, state, N, table=None):
    """E(f; N) = ||f||^2 + N ||d^{-m} P f||^2 + sum_j Re gamma_j <D^{-2j} P conj f, P f>."""
    if table is None:
        table = coefficient_table(spec)
    xi, U1, U2 = pair_arrays(state)
    l2_sq = float(np.sum(np.abs(state.coeffs) ** 2))
    w = xi ** (-2.0 * spec.m)
    neg = float(np.sum(w * (np.abs(U1) ** 2 + np.abs(U2) ** 2)))
    g = _correction_symbol(table.gamma, xi)
    corr = float(np.sum(2.0 * np.real(g * np.conj(U1) * U2)))
    sob = {s: sobolev_norm(state, s) for s in (0.0, 0.5, 1.0)}
    proj = {k: l2_norm(project(state, k)) for k in ("Pplus", "Pminus", "Pzero")}
    return EnergyReport(l2_sq, l2_sq + N * neg + corr, float(N), corr, sob, proj)


def correction_terms(spec, table, state, jstar):
    """G^+, G^- and the F_k^-, F_k^+ functionals used by the twisted energies."""
    m = spec.m
    bp, bm = beta_sequences(table, jstar, m)
    xi, U1, U2 = pair_arrays(state)
    cross = np.conj(U1) * U2  # pairs conj(u^(xi)) with conj(u^(-xi))
    s_plus = np.zeros(len(xi), dtype=complex)
    s_minus = np.zeros(len(xi), dtype=complex)
    for j, aj in enumerate(table.alpha, start=1):
        s_plus += aj * xi ** (-float(j))
        s_minus += (-1) ** j * aj * xi ** (-float(j))
    g_plus_alpha = float(np.sum(np.real(s_plus * cross)))
    g_minus_alpha = float(np.sum(np.real(s_minus * cross)))
    F_minus, F_plus = [], []
    for k in range(1, len(bp) + 1):
        w = xi ** (-(k + 2.0))
        F_minus.append(float(np.sum(w * np.abs(U2) ** 2 + np.real(w * s_minus * cross))))
        F_plus.append(float(np.sum(w * np.abs(U1) ** 2 + np.real(w * s_plus * cross))))
    return {
        "G_plus": g_plus_alpha + float(np.dot(bp, F_minus)) if bp else g_plus_alpha,
        "G_minus": g_minus_alpha + float(np.dot(bm, F_plus)) if bm else g_minus_alpha,
        "F_minus": F_minus,
        "F_plus": F_plus,
        "beta_plus": list(bp),
        "beta_minus": list(bm),
    }


def energy_form(spec, table, N, xi):
    """Per-pair Hermitian matrix of E(f; N) at xi >= 1 (identity at xi = 0)."""
    if xi == 0:
        return np.eye(2, dtype=complex)
    g = complex(_correction_symbol(table.gamma, np.array([float(xi)]))[0])
    w = 1.0 + N * float(xi) ** (-2.0 * spec.m)
    return np.array([[w, g], [g.conjugate(), w]], dtype=complex)


def gronwall_constant(spec, K, N=None, table=None):
    """Smallest C with dE/dt <= C E for every state supported in |xi| <= K.

    Per pair the derivative of U* A U is U* R U with R = i(A M - M^H A);
    C is the largest generalised eigenvalue of (R, A) over xi = 0..K.
    Requires A positive definite, which select_N guarantees.
    """
    if table is None:
        table = coefficient_table(spec)
    if N is None:
        N = select_N(spec, K, table)
    best = -np.inf
    for xi in range(0, int(K) + 1):
        A = energy_form(spec, table, N, xi)
        M = build_mode_matrix(spec, xi).M
        R = 1j * (A @ M - M.conj().T @ A)
        L = np.linalg.cholesky(A)
        Li = np.linalg.inv(L)
        S = Li @ R @ Li.conj().T
        best = max(best, float(np.linalg.eigvalsh(0.5 * (S + S.conj().T)).max()))
    return best


def random_state(K, rng):
    """Gaussian coefficients on every mode; no decay, so high modes weigh fully."""
    c = rng.standard_normal(2 * K + 1) + 1j * rng.standard_normal(2 * K + 1)
    return SpectralState(K, c)


def lemma31_check(spec, K=256, trials=100, seed=0, N=None):
    """Sandwich E/2 <= ||f||^2 + N||d^{-m}P f||^2 <= 2E on random states.

    Half the states are flat Gaussian, half are random_hs(s=0) data.  The
    recorded residual is the worst violation (0 when both inequalities hold).
    """
    table = coefficient_table(spec)
    if N is None:
        N = select_N(spec, K, table)
    rng = np.random.default_rng(seed)
    res = []
    for i in range(trials):
        if i % 2 == 0:
            st = random_state(K, rng)
        else:
            st = SpectralState.random_hs(K, 0.0, int(rng.integers(2**31)))
        rep = energy_E(spec, st, N, table)
        main = rep.main_part
        viol = max(0.5 * rep.E_value - main, main - 2.0 * rep.E_value, 0.0)
        res.append((i, viol))
    return CheckReport.from_residuals(
        "lemma31", res, 0.0, {"K": int(K), "N": float(N), "m": spec.m}
    )
