import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dispersive_lab import coefficients as ce
from dispersive_lab.coefficients import EquationSpec, Kind, coefficient_table
from dispersive_lab.errors import InvalidConfig
from dispersive_lab.estimates import (
    QuadraticForm,
    derivative_form,
    estimate_report,
    growth_exponent,
    lambda_density_form,
    lemma21_residual,
    prop21_residual,
    prop22_residual,
    smoothing_rate_scan,
)
from dispersive_lab.evolution import ModePair, build_mode_matrix, evolve_mode
from dispersive_lab.state import multiplier, pair_arrays, random_state

from .conftest import specs


def const_form(H):
    return QuadraticForm(
        lambda xi, ctx: [[ctx.mpc(complex(H[i][k])) for k in range(2)] for i in range(2)],
        "constant",
    )


IDENTITY = const_form(np.eye(2))


def is_hermitian(R, tol=1e-12):
    return np.abs(R - R.conj().T).max() <= tol * max(1.0, np.abs(R).max())


def test_derivative_identity_hermitian_M():
    # real a and b_j = 0 for even j make every X_j Hermitian
    rng = np.random.default_rng(0)
    for m in (1, 2, 3):
        a = tuple(complex(x) for x in rng.uniform(-1, 1, 2 * m))
        b = tuple(complex(*rng.uniform(-1, 1, 2)) if j % 2 == 0 else 0j for j in range(2 * m))
        spec = EquationSpec(m, a, b)
        for xi in (1.0, 3.0, 10.0):
            M = build_mode_matrix(spec, xi).M
            assert np.allclose(M, M.conj().T)
            assert np.abs(derivative_form(spec, IDENTITY, xi)).max() <= 1e-9


def test_derivative_diagonal_example():
    spec = EquationSpec.from_dict(2, {1: 0.5 + 1j, 2: -0.3j, 3: 2 + 0.25j, 4: 0.7j})
    for xi in (1.0, 2.0, 7.0):
        R = derivative_form(spec, IDENTITY, xi)
        r11 = -sum(2 * spec.a[j - 1].imag * xi ** (4 - j) for j in range(1, 5))
        assert R[0, 0].real == pytest.approx(r11, rel=1e-13)
        assert R[0, 1] == 0


def _fd_cases():
    rng = np.random.default_rng(5)
    cases = []
    while len(cases) < 120:
        m = int(rng.integers(1, 4))
        spec = ce.random_spec(m, rng)
        xi = float(rng.integers(1, 17))
        if 1e-6 * np.abs(build_mode_matrix(spec, xi).M).sum() > 2e-3:
            continue  # central difference at h = 1e-6 cannot resolve this generator
        H = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
        cases.append((spec, xi, H + H.conj().T, rng.standard_normal(2) + 1j * rng.standard_normal(2)))
    return cases


def test_derivative_finite_difference():
    h = 1e-6
    for spec, xi, H, U0 in _fd_cases():
        R = derivative_form(spec, const_form(H), xi)

        def f(s):
            U = evolve_mode(spec, ModePair(xi, U0[0], U0[1]), s).as_array()
            return np.vdot(U, H @ U).real

        fd = (f(h) - f(-h)) / (2 * h)
        exact = np.vdot(U0, R @ U0).real
        assert abs(fd - exact) <= 1e-6 * max(abs(exact), np.linalg.norm(H) * np.linalg.norm(U0) ** 2)


def test_prop21_zero_and_mixed(examples):
    z = EquationSpec.zeros(3)
    assert np.abs(prop21_residual(z, xi=37.0)).max() == 0
    mixed = examples["m2_dispersive_mixed"]
    rep = estimate_report("prop21", mixed)
    at32 = rep.norms[rep.xi_grid.index(32.0)]
    assert rep.passed and rep.sup_norm <= 2 * at32
    abl = estimate_report("prop21", mixed, ablate=True)
    assert not abl.passed and abl.growth_fit >= 0.9


@settings(max_examples=30, deadline=None)
@given(specs(m_max=4), st.sampled_from([1.0, 5.0, 64.0, 1000.0]))
def test_residuals_hermitian(spec, xi):
    table = coefficient_table(spec)
    assert is_hermitian(prop21_residual(spec, table, xi))
    assert is_hermitian(lemma21_residual(spec, table, xi, "Plus"))
    assert is_hermitian(lemma21_residual(spec, table, xi, "Minus"))
    if table.classification.kind is Kind.ELLIPTIC:
        assert is_hermitian(prop22_residual(spec, table, xi, "Plus"))


def test_lemma21_diagonal():
    spec = EquationSpec.from_dict(3, {1: 1j, 2: 0.5 - 0.5j, 5: 2j, 6: 0.75 + 0.25j})
    for side in ("Plus", "Minus"):
        for xi in (1.0, 16.0, 512.0):
            R = lemma21_residual(spec, None, xi, side)
            assert abs(R[0, 1]) == 0
            assert np.abs(R).max() <= 2 * abs(spec.a[5].imag) + 1e-9
        assert estimate_report("lemma21", spec, side=side).passed


def test_lemma21_random_m3_and_ablation():
    rng = np.random.default_rng(17)
    for _ in range(5):
        spec = ce.random_spec(3, rng)
        for side in ("Plus", "Minus"):
            assert estimate_report("lemma21", spec, side=side).growth_fit <= 0.1
            assert estimate_report("lemma21", spec, side=side, ablate="alpha").growth_fit >= 0.9


def test_prop22_examples():
    a3 = EquationSpec.from_dict(2, {3: 1j})
    for side in ("Plus", "Minus"):
        assert estimate_report("prop22", a3, side=side).passed
    with pytest.raises(InvalidConfig):
        prop22_residual(EquationSpec.zeros(2), xi=4.0)
    with pytest.raises(InvalidConfig):
        estimate_report("prop22", EquationSpec.zeros(2))
    spec = ce.sample_spec(4, np.random.default_rng(3), Kind.ELLIPTIC, 1)
    t = coefficient_table(spec)
    assert any(abs(b) > 1e-6 for b in t.beta_plus)
    for side in ("Plus", "Minus"):
        assert estimate_report("prop22", spec, side=side).passed
        assert estimate_report("prop22", spec, side=side, ablate="beta").growth_fit >= 0.9


def test_lambda_density_against_inner_products():
    rng = np.random.default_rng(21)
    for m in (1, 2, 3, 4):
        spec = ce.random_spec(m, rng)
        table = coefficient_table(spec)
        s = random_state(12, rng)
        lam = table.lambda_
        direct = 0.0
        for j in range(1, m):
            v = multiplier(s, "riesz", m - j)
            direct += lam[2 * j - 1] * np.vdot(v.coeffs, v.coeffs).real
        for j in range(1, m + 1):
            v = multiplier(s, "dpow", 2 * (m - j) + 1)
            direct += lam[2 * j - 2] * np.vdot(s.coeffs, v.coeffs).real
        xi, U1, U2 = pair_arrays(s)
        dens = 0.0
        for x, u, w in zip(xi, U1, U2):
            U = np.array([u, w])
            dens += np.vdot(U, lambda_density_form(spec, table, x) @ U).real
        assert dens == pytest.approx(direct, rel=1e-10)


def test_growth_exponent():
    xi = np.array([2.0**k for k in range(11)])
    assert growth_exponent(xi, 3 * xi**2) == pytest.approx(2)
    assert growth_exponent(xi, np.full(11, 0.5)) == 0
    assert growth_exponent(xi, np.zeros(11)) == 0
    assert abs(growth_exponent(xi, 1 + 1 / xi)) < 0.01
    # bounded residual that dips then settles on a small plateau
    dip = 5 * xi**-2.0 + 0.02
    assert growth_exponent(xi, dip) <= 0.1


def test_report_serialization(examples):
    rep = estimate_report("lemma21", examples["m1_elliptic"], side="Minus")
    d = json.loads(rep.to_json())
    assert d["name"] == "lemma21" and d["notes"]["side"] == "Minus"
    lines = rep.to_csv().splitlines()
    assert lines[0] == "xi,norm" and len(lines) == 12
    with pytest.raises(InvalidConfig):
        estimate_report("nope", examples["m1_elliptic"])


def test_rate_scan_examples():
    z = smoothing_rate_scan(EquationSpec.zeros(2), 8)
    assert all(p == 0 and q == 0 for _, p, q in z.rows) and z.xi0 is None
    m1 = smoothing_rate_scan(EquationSpec.from_dict(1, {1: 1j}), 16)
    for xi, p, q in m1.rows:
        assert p == pytest.approx(-xi) and q == pytest.approx(xi)
    par = smoothing_rate_scan(EquationSpec.from_dict(2, {2: 1j}), 64)
    _, p, q = par.rows[-1]
    assert p == pytest.approx(-64**2, rel=0.05) and q == pytest.approx(-64**2, rel=0.05)
    disp = smoothing_rate_scan(EquationSpec.from_dict(2, {3: 1j}, {1: 1, 2: -1j}), 64)
    rates = [abs(r) for _, p, q in disp.rows for r in (p, q)]
    assert max(rates) <= 2.0
    with pytest.raises(InvalidConfig):
        smoothing_rate_scan(EquationSpec.zeros(1), 3)


def test_rate_scan_xi0_and_flip():
    scan = smoothing_rate_scan(EquationSpec.from_dict(2, {3: 1j}), 64)
    assert scan.xi0 is not None and scan.xi0 <= 4
    assert all(p < 0 < q for xi, p, q in scan.rows if xi >= scan.xi0)
    flip = smoothing_rate_scan(EquationSpec.from_dict(2, {3: -1j}), 64)
    assert all(p > 0 > q for xi, p, q in flip.rows if xi >= flip.xi0)


@settings(max_examples=10, deadline=None)
@given(st.sampled_from([0.25, 0.5, 2.0, 7.0]))
def test_rate_scan_scale_invariance(c):
    rng = np.random.default_rng(31)
    for kind, js in ((Kind.ELLIPTIC, 1), (Kind.PARABOLIC, 1)):
        spec = ce.sample_spec(2, rng, kind, js)
        base = smoothing_rate_scan(spec, 64)
        scaled = smoothing_rate_scan(spec.scaled(c), 64)
        assert base.expected == scaled.expected
        lo = max(base.xi0, scaled.xi0)
        for (xi, p, q), (_, p2, q2) in zip(base.rows, scaled.rows):
            if xi >= lo:
                assert (np.sign(p), np.sign(q)) == (np.sign(p2), np.sign(q2))
