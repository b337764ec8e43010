"""Recursive coefficient sequences, type classification and structural checks.

Coefficients are documented 1-based (``a_1 .. a_2m``) and stored 0-based:
``spec.a[j - 1]`` is ``a_j``.  The same shift applies to every derived
sequence (``table.lambda_[j - 1]`` is ``lambda_j`` and so on).

The recursions in this module are written against the small protocol
``+ - * /``, ``.conjugate()``, ``.real`` and ``.imag`` so that the estimate
verifier can rerun them in extended precision with :mod:`mpmath` numbers.
"""
from __future__ import annotations

import cmath
import enum
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .errors import DegenerateBeta, InvalidConfig

__all__ = [
    "EquationSpec",
    "CoefficientTable",
    "Classification",
    "CheckReport",
    "Kind",
    "gamma_sequence",
    "lambda_sequence",
    "alpha_sequence",
    "lambda_pm_sequences",
    "beta_sequences",
    "coefficient_table",
    "classify",
    "default_tolerance",
    "random_spec",
    "sample_spec",
    "hamiltonian_check",
    "mass_conservation_check",
    "remark21_check",
    "lemma22_sides",
    "lemma22_check",
    "lemma23_sample",
    "lemma23_check",
]


# ---------------------------------------------------------------------------
# Domain types
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class EquationSpec:
    """Constant-coefficient equation of order ``2m``.

    ``a[j-1]`` multiplies ``D_x^{2m-j} u`` and ``b[j-1]`` multiplies
    ``D_x^{2m-j} conj(u)``.
    """

    m: int
    a: tuple
    b: tuple

    def __post_init__(self):
        if isinstance(self.m, bool) or not isinstance(self.m, (int, np.integer)):
            raise InvalidConfig(f"m must be a positive integer, got {self.m!r}")
        if self.m < 1:
            raise InvalidConfig(f"m must be >= 1, got {self.m}")
        object.__setattr__(self, "m", int(self.m))
        n = 2 * self.m
        for name in ("a", "b"):
            raw = getattr(self, name)
            try:
                vals = tuple(complex(z) for z in raw)
            except (TypeError, ValueError) as exc:
                raise InvalidConfig(f"{name} must be a sequence of complex numbers") from exc
            if len(vals) != n:
                raise InvalidConfig(f"len({name}) must be 2m = {n}, got {len(vals)}")
            if not all(cmath.isfinite(z) for z in vals):
                raise InvalidConfig(f"{name} contains non-finite entries")
            object.__setattr__(self, name, vals)

    @classmethod
    def zeros(cls, m):
        return cls(m, (0j,) * (2 * m), (0j,) * (2 * m))

    @classmethod
    def from_dict(cls, m, a=None, b=None):
        """Build from sparse 1-based ``{j: value}`` mappings."""
        av = [0j] * (2 * m)
        bv = [0j] * (2 * m)
        for src, dst, name in ((a or {}, av, "a"), (b or {}, bv, "b")):
            for j, z in src.items():
                if not 1 <= j <= 2 * m:
                    raise InvalidConfig(f"{name}_{j} out of range 1..{2 * m}")
                dst[j - 1] = complex(z)
        return cls(m, tuple(av), tuple(bv))

    def scale(self):
        """max(1, |a_j|, |b_j|): the magnitude used for relative tolerances."""
        return max([1.0] + [abs(z) for z in self.a + self.b])

    def scaled(self, c):
        return EquationSpec(self.m, tuple(c * z for z in self.a), tuple(c * z for z in self.b))

    @property
    def is_diagonal(self):
        """True when every ``b_j`` vanishes (the mode system decouples)."""
        return all(z == 0 for z in self.b)


class Kind(str, enum.Enum):
    DISPERSIVE = "Dispersive"
    PARABOLIC = "Parabolic"
    ELLIPTIC = "Elliptic"


@dataclass(frozen=True)
class Classification:
    kind: Kind
    jstar: int | None
    sign: str | None
    smoothing: Any
    zero_tolerance: float
    first_index: int | None = None

    def to_dict(self):
        return {
            "kind": self.kind.value,
            "jstar": self.jstar,
            "sign": self.sign,
            "smoothing": self.smoothing,
            "zero_tolerance": self.zero_tolerance,
        }


@dataclass(frozen=True)
class CoefficientTable:
    gamma: tuple
    lambda_: tuple
    alpha: tuple
    lambda_plus: tuple
    lambda_minus: tuple
    classification: Classification
    beta_plus: tuple | None = None
    beta_minus: tuple | None = None
    beta_residual: float | None = None

    @property
    def jstar(self):
        return self.classification.jstar

    def to_dict(self):
        def cpairs(zs):
            return [[z.real + 0.0, z.imag + 0.0] for z in zs]

        out = {
            "gamma": cpairs(self.gamma),
            "lambda": [x + 0.0 for x in self.lambda_],
            "alpha": cpairs(self.alpha),
            "lambda_plus": [x + 0.0 for x in self.lambda_plus],
            "lambda_minus": [x + 0.0 for x in self.lambda_minus],
            "beta_plus": None if self.beta_plus is None else list(self.beta_plus),
            "beta_minus": None if self.beta_minus is None else list(self.beta_minus),
            "beta_residual": self.beta_residual,
        }
        out.update(self.classification.to_dict())
        return out


@dataclass
class CheckReport:
    name: str
    passed: bool
    max_residual: float
    tolerance: float
    details: list = field(default_factory=list)
    notes: dict = field(default_factory=dict)

    @classmethod
    def from_residuals(cls, name, residuals, tolerance, notes=None):
        details = [(int(i), float(r)) for i, r in residuals]
        worst = max((r for _, r in details), default=0.0)
        passed = bool(np.isfinite(worst) and worst <= tolerance)
        return cls(name, passed, worst, tolerance, details, dict(notes or {}))

    def to_dict(self, max_details=20):
        worst = sorted(self.details, key=lambda d: -d[1])[:max_details]
        return {
            "name": self.name,
            "passed": self.passed,
            "max_residual": self.max_residual,
            "tolerance": self.tolerance,
            "trials": len(self.details),
            "worst": [list(d) for d in worst],
            "notes": self.notes,
        }


# ---------------------------------------------------------------------------
# Generic recursions (0-based storage; comments use the 1-based names)
# ---------------------------------------------------------------------------


def _gamma(a, b, m):
    g = []
    for j in range(1, m):
        acc = b[2 * j - 1]
        for k in range(1, j):
            acc = acc - a[2 * (j - k) - 1].conjugate() * g[k - 1]
        g.append(acc)
    return g


def _lambda(a, b, m, g):
    lam = [None] * (2 * m - 1)
    for j in range(1, m + 1):
        # odd index 2j-1
        acc = 2 * a[2 * j - 2].imag
        for k in range(1, j):
            acc = acc + 2 * (b[2 * (j - k) - 2].conjugate() * g[k - 1]).imag
        lam[2 * j - 2] = acc
        if j <= m - 1:
            acc = 2 * a[2 * j - 1].imag
            for k in range(1, j):
                acc = acc - 2 * (b[2 * (j - k) - 1].conjugate() * g[k - 1]).imag
            lam[2 * j - 1] = acc
    return lam


def _alpha(a, b, m):
    al = []
    for j in range(1, 2 * m):
        acc = b[j - 1]
        # (1 + (-1)^{j-k}) is 2 for even j-k, 0 otherwise
        for k in range(1, j):
            if (j - k) % 2 == 0:
                acc = acc - a[j - k - 1].conjugate() * al[k - 1]
        al.append(acc)
    return al


def _lambda_pm(a, b, m, al):
    lp, lm = [], []
    for j in range(1, 2 * m):
        plus = 2 * a[j - 1].imag
        minus = 0 * plus
        for k in range(1, j):
            term = (b[j - k - 1].conjugate() * al[k - 1]).imag
            plus = plus + (term if (j - k) % 2 == 1 else -term)
            minus = minus - term
        lp.append(plus)
        lm.append(minus)
    return lp, lm


def _beta(lp, lm, m, jstar, tol):
    """Forward substitution for beta^+ and beta^- (1-based indices in comments)."""
    n = 2 * (m - jstar - 1)
    if n <= 0:
        return [], []
    pivot = lp[2 * jstar - 2]  # lambda^+_{2j*-1}
    if abs(pivot) <= tol:
        raise DegenerateBeta(
            f"|lambda^+_{2 * jstar - 1}| = {abs(float(pivot)):.3g} <= tolerance {tol:.3g}"
        )
    bp, bm = [], []
    for k in range(1, n + 1):
        rhs = lm[2 * jstar + k]  # lambda^-_{2j*+k+1}
        sp = 0 * pivot
        sm = 0 * pivot
        for j in range(1, k):
            coef = lp[2 * jstar + k - j - 2]  # lambda^+_{2j*+k-j-1}
            sp = sp + (-1) ** (k - j) * coef * bp[j - 1]
            sm = sm + (-1) ** k * coef * bm[j - 1]
        bp.append((rhs - sp) / pivot)
        bm.append((rhs - sm) / ((-1) ** k * pivot))
    return bp, bm


def _beta_backsub_residual(lp, lm, m, jstar, bp, bm):
    worst = 0.0
    for k in range(1, len(bp) + 1):
        target = lm[2 * jstar + k]
        rp = sum((-1) ** (k - j) * lp[2 * jstar + k - j - 2] * bp[j - 1] for j in range(1, k + 1))
        rm = sum((-1) ** k * lp[2 * jstar + k - j - 2] * bm[j - 1] for j in range(1, k + 1))
        worst = max(worst, abs(float(rp - target)), abs(float(rm - target)))
    return worst


# ---------------------------------------------------------------------------
# Public sequence operations
# ---------------------------------------------------------------------------


def gamma_sequence(spec):
    """gamma_1 .. gamma_{m-1}; empty for m = 1."""
    return _gamma(spec.a, spec.b, spec.m)


def lambda_sequence(spec, gamma=None):
    """lambda_1 .. lambda_{2m-1} (real)."""
    if gamma is None:
        gamma = gamma_sequence(spec)
    return [float(x) for x in _lambda(spec.a, spec.b, spec.m, gamma)]


def alpha_sequence(spec):
    """alpha_1 .. alpha_{2m-1}."""
    return _alpha(spec.a, spec.b, spec.m)


def lambda_pm_sequences(spec, alpha=None):
    """(lambda^+, lambda^-), each of length 2m - 1."""
    if alpha is None:
        alpha = alpha_sequence(spec)
    lp, lm = _lambda_pm(spec.a, spec.b, spec.m, alpha)
    return [float(x) for x in lp], [float(x) for x in lm]


def beta_sequences(table, jstar, m=None, tol=None):
    """Solve the lower-triangular beta systems for the given ``jstar``.

    Returns empty lists when ``jstar >= m - 1`` (no tail terms to cancel).
    Raises :class:`DegenerateBeta` when ``|lambda^+_{2j*-1}|`` is below
    ``tol`` (defaults to the table's zero tolerance).
    """
    if m is None:
        m = (len(table.lambda_plus) + 1) // 2
    if not 1 <= jstar <= m:
        raise InvalidConfig(f"jstar must lie in 1..{m}, got {jstar}")
    if tol is None:
        tol = table.classification.zero_tolerance
    bp, bm = _beta(list(table.lambda_plus), list(table.lambda_minus), m, jstar, tol)
    return [float(x) for x in bp], [float(x) for x in bm]


def default_tolerance(spec):
    return 1e-12 * spec.scale()


def _classify_lambda(lam, tol):
    for idx, val in enumerate(lam, start=1):
        if abs(val) > tol:
            positive = val > 0
            sign = "Positive" if positive else "Negative"
            if idx % 2 == 0:
                smoothing = "[0,inf)" if positive else "(-inf,0]"
                return Classification(Kind.PARABOLIC, idx // 2, sign, smoothing, tol, idx)
            if positive:
                smoothing = {"forward": "P+", "backward": "P-"}
            else:
                smoothing = {"forward": "P-", "backward": "P+"}
            return Classification(Kind.ELLIPTIC, (idx + 1) // 2, sign, smoothing, tol, idx)
    return Classification(Kind.DISPERSIVE, None, None, None, tol, None)


def classify(spec, zero_tolerance=None):
    """Dispersive / Parabolic / Elliptic from the first non-negligible lambda_j."""
    if zero_tolerance is None:
        zero_tolerance = default_tolerance(spec)
    if zero_tolerance < 0:
        raise InvalidConfig("zero_tolerance must be non-negative")
    return _classify_lambda(lambda_sequence(spec), zero_tolerance)


def coefficient_table(spec, zero_tolerance=None):
    """All derived sequences plus classification and (where defined) beta."""
    if zero_tolerance is None:
        zero_tolerance = default_tolerance(spec)
    gamma = gamma_sequence(spec)
    lam = lambda_sequence(spec, gamma)
    alpha = alpha_sequence(spec)
    lp, lm = lambda_pm_sequences(spec, alpha)
    cls = _classify_lambda(lam, zero_tolerance)
    bp = bm = resid = None
    if cls.kind is Kind.ELLIPTIC:
        try:
            bp, bm = _beta(lp, lm, spec.m, cls.jstar, zero_tolerance)
        except DegenerateBeta:
            bp = bm = None
        else:
            resid = _beta_backsub_residual(lp, lm, spec.m, cls.jstar, bp, bm)
            bp, bm = tuple(float(x) for x in bp), tuple(float(x) for x in bm)
    return CoefficientTable(
        gamma=tuple(gamma),
        lambda_=tuple(lam),
        alpha=tuple(alpha),
        lambda_plus=tuple(lp),
        lambda_minus=tuple(lm),
        classification=cls,
        beta_plus=bp,
        beta_minus=bm,
        beta_residual=resid,
    )


# ---------------------------------------------------------------------------
# Random specs
# ---------------------------------------------------------------------------


def random_spec(m, rng):
    """Real and imaginary parts uniform on [-1, 1]."""
    n = 2 * m
    a = rng.uniform(-1, 1, n) + 1j * rng.uniform(-1, 1, n)
    b = rng.uniform(-1, 1, n) + 1j * rng.uniform(-1, 1, n)
    return EquationSpec(m, tuple(a), tuple(b))


def _zero_lambdas(spec, upto):
    """Adjust Im a_j, j = 1..upto, in increasing order so lambda_j = 0.

    lambda_j is 2 Im a_j plus terms built from b and a_i with i < j, so each
    step is a single linear solve.
    """
    a = list(spec.a)
    b = spec.b
    m = spec.m
    for j in range(1, upto + 1):
        a[j - 1] = complex(a[j - 1].real, 0.0)
        g = _gamma(a, b, m)
        lam = _lambda(a, b, m, g)
        a[j - 1] = complex(a[j - 1].real, -lam[j - 1] / 2)
    return EquationSpec(m, tuple(a), b)


def sample_spec(m, rng, kind=None, jstar=None, max_tries=100):
    """Random spec, optionally constrained to a classification.

    ``kind`` is one of ``Kind`` (or its string value); ``jstar`` selects the
    index.  Lower lambdas are zeroed by solving for imaginary parts of ``a``;
    draws whose leading lambda is too small to classify robustly are retried.
    """
    if kind is None:
        return random_spec(m, rng)
    kind = Kind(kind)
    if kind is Kind.DISPERSIVE:
        return _zero_lambdas(random_spec(m, rng), 2 * m - 1)
    if jstar is None:
        raise InvalidConfig("jstar is required for a constrained draw")
    idx = 2 * jstar if kind is Kind.PARABOLIC else 2 * jstar - 1
    if not 1 <= idx <= 2 * m - 1:
        raise InvalidConfig(f"jstar={jstar} is out of range for {kind.value} with m={m}")
    for _ in range(max_tries):
        spec = _zero_lambdas(random_spec(m, rng), idx - 1)
        if abs(lambda_sequence(spec)[idx - 1]) > 0.05:
            return spec
    raise InvalidConfig("could not draw a well-separated spec")  # pragma: no cover


# ---------------------------------------------------------------------------
# Structural checks
# ---------------------------------------------------------------------------


def hamiltonian_check(spec, tol=0.0):
    """Im a_j = 0 (j < 2m) and b_{2n-1} = 0: the equation has a Hamiltonian."""
    m = spec.m
    res = [abs(spec.a[j - 1].imag) for j in range(1, 2 * m)]
    res += [abs(spec.b[2 * n - 2]) for n in range(1, m + 1)]
    worst = max(res)
    passed = worst <= tol
    notes = {"implies": "Dispersive"} if passed else {}
    return CheckReport("hamiltonian", passed, worst, tol, list(enumerate(res)), notes)


def mass_conservation_check(spec, tol=0.0):
    """Literal condition: Im a_j = 0 (j < 2m), b_{2n} = 0.  Strict adds Im a_2m = 0."""
    m = spec.m
    res = [abs(spec.a[j - 1].imag) for j in range(1, 2 * m)]
    res += [abs(spec.b[2 * n - 1]) for n in range(1, m + 1)]
    literal = max(res) <= tol
    strict = literal and abs(spec.a[2 * m - 1].imag) <= tol
    return CheckReport(
        "mass_conservation",
        literal,
        max(res),
        tol,
        list(enumerate(res)),
        {"literal": literal, "strict": strict},
    )


def remark21_residual(spec):
    """Max deviation in gamma_j = alpha_{2j} and the lambda splitting identities."""
    m = spec.m
    g = gamma_sequence(spec)
    lam = lambda_sequence(spec, g)
    al = alpha_sequence(spec)
    lp, lm = lambda_pm_sequences(spec, al)
    worst = 0.0
    for j in range(1, m):
        worst = max(worst, abs(g[j - 1] - al[2 * j - 1]))
        worst = max(worst, abs(lam[2 * j - 1] - lp[2 * j - 1] - lm[2 * j - 1]))
    for k in range(1, m + 1):
        worst = max(worst, abs(lam[2 * k - 2] - lp[2 * k - 2] + lm[2 * k - 2]))
    for j in range(1, min(3, 2 * m - 1) + 1):
        worst = max(worst, abs(lm[j - 1]))
    return worst


def remark21_check(m_values=range(1, 7), trials=1000, seed=0, tol=1e-10):
    rng = np.random.default_rng(seed)
    res = []
    i = 0
    for m in m_values:
        for _ in range(trials):
            spec = random_spec(m, rng)
            res.append((i, remark21_residual(spec) / spec.scale()))
            i += 1
    return CheckReport.from_residuals("remark21", res, tol)


def lemma22_sides(spec):
    """Both sides of the lambda^- recursion for j = 1 .. 2(m-1).

    The right-hand side is
        -1/2 sum_l (1+(-1)^l) Re(a_l) lambda^-_{j+1-l}
        -1/2 sum_l sum_k (1+(-1)^l) Im(a_l) Re(conj(b_{j-l-k+1}) alpha_k),
    which is what the expansion Im(cd) = Re c Im d + Im c Re d produces.
    """
    m = spec.m
    a, b = spec.a, spec.b
    al = alpha_sequence(spec)
    _, lm = lambda_pm_sequences(spec, al)
    lhs, rhs = [], []
    for j in range(1, 2 * (m - 1) + 1):
        s1 = 0.0
        s2 = 0.0
        for l in range(2, j, 2):  # (1 + (-1)^l) = 2 for even l
            s1 += a[l - 1].real * lm[j - l]
            for k in range(1, j - l + 1):
                s2 += a[l - 1].imag * (b[j - l - k].conjugate() * al[k - 1]).real
        lhs.append(lm[j])
        rhs.append(-s1 - s2)
    return lhs, rhs


def lemma22_check(m_values=range(1, 7), trials=1000, seed=0, tol=1e-10):
    rng = np.random.default_rng(seed)
    res = []
    i = 0
    for m in m_values:
        for _ in range(trials):
            spec = random_spec(m, rng)
            lhs, rhs = lemma22_sides(spec)
            worst = max((abs(x - y) for x, y in zip(lhs, rhs)), default=0.0)
            res.append((i, worst / spec.scale() ** 3))
            i += 1
    return CheckReport.from_residuals("lemma22", res, tol)


def lemma23_sample(m, jstar, rng):
    """Random spec satisfying lambda_{2j} = 0 for 1 <= j <= jstar.

    Solves for Im a_{2j} in increasing j; each lambda_{2j} depends only on
    earlier gammas, so the solve is explicit.
    """
    spec = random_spec(m, rng)
    a = list(spec.a)
    for j in range(1, jstar + 1):
        a[2 * j - 1] = complex(a[2 * j - 1].real, 0.0)
        g = _gamma(a, spec.b, m)
        lam = _lambda(a, spec.b, m, g)
        a[2 * j - 1] = complex(a[2 * j - 1].real, -lam[2 * j - 1] / 2)
    return EquationSpec(m, tuple(a), spec.b)


def lemma23_residual(spec, jstar):
    m = spec.m
    table = coefficient_table(spec)
    lam, lp, lm = table.lambda_, table.lambda_plus, table.lambda_minus
    worst = 0.0
    for j in range(1, jstar + 1):
        worst = max(worst, abs(spec.a[2 * j - 1].imag), abs(lp[2 * j - 1]))
    for j in range(1, min(2 * jstar + 3, 2 * m - 1) + 1):
        worst = max(worst, abs(lm[j - 1]))
    if 2 * jstar + 2 <= 2 * m - 1:
        worst = max(worst, abs(lam[2 * jstar + 1] - 2 * spec.a[2 * jstar + 1].imag))
    return worst


def lemma23_check(m, jstar, trials=500, seed=0, tol=1e-10):
    if not 1 <= jstar <= m - 1:
        raise InvalidConfig(f"jstar must lie in 1..{m - 1} for m={m}, got {jstar}")
    rng = np.random.default_rng(seed)
    res = []
    for i in range(trials):
        spec = lemma23_sample(m, jstar, rng)
        res.append((i, lemma23_residual(spec, jstar) / spec.scale() ** 3))
    return CheckReport.from_residuals(
        f"lemma23(m={m},jstar={jstar})", res, tol, {"m": m, "jstar": jstar}
    )
