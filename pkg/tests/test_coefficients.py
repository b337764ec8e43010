import numpy as np
import pytest
from hypothesis import given, settings

from dispersive_lab import coefficients as ce
from dispersive_lab.coefficients import EquationSpec, Kind
from dispersive_lab.errors import DegenerateBeta, InvalidConfig

from .conftest import specs


def test_spec_validation():
    with pytest.raises(InvalidConfig):
        EquationSpec(0, (), ())
    with pytest.raises(InvalidConfig):
        EquationSpec(1, (0j,), (0j, 0j))
    with pytest.raises(InvalidConfig):
        EquationSpec(1, (complex("nan"), 0j), (0j, 0j))
    with pytest.raises(InvalidConfig):
        EquationSpec(True, (0j, 0j), (0j, 0j))
    with pytest.raises(InvalidConfig):
        EquationSpec.from_dict(2, {5: 1})


def test_gamma_examples(rng):
    assert ce.gamma_sequence(EquationSpec.from_dict(1, {1: 3j}, {1: 1, 2: 2})) == []
    assert ce.gamma_sequence(EquationSpec.from_dict(2, {}, {2: -1j})) == [-1j]
    spec = ce.random_spec(3, rng)
    a, b = spec.a, spec.b
    g1 = b[1]
    g2 = b[3] - a[1].conjugate() * g1
    got = ce.gamma_sequence(spec)
    assert got[0] == pytest.approx(g1, abs=1e-15)
    assert got[1] == pytest.approx(g2, abs=1e-14)


def test_lambda_examples():
    assert ce.lambda_sequence(EquationSpec.from_dict(2, {1: 1j})) == pytest.approx([2, 0, 0])
    mixed = EquationSpec.from_dict(2, {3: 1j}, {1: 1, 2: -1j})
    assert ce.lambda_sequence(mixed) == pytest.approx([0, 0, 0], abs=1e-15)
    assert ce.lambda_sequence(EquationSpec.zeros(3)) == [0.0] * 5


def test_alpha_examples(rng):
    spec = ce.random_spec(2, rng)
    a, b = spec.a, spec.b
    al = ce.alpha_sequence(spec)
    assert al[0] == b[0] and al[1] == b[1]
    assert al[2] == pytest.approx(b[2] - a[1].conjugate() * b[0], abs=1e-14)
    assert len(al) == 3
    assert ce.alpha_sequence(EquationSpec.from_dict(3, {1: 1, 2: 1j})) == [0j] * 5


def test_alpha4_m3(rng):
    spec = ce.random_spec(3, rng)
    a, b = spec.a, spec.b
    assert ce.alpha_sequence(spec)[3] == pytest.approx(b[3] - a[1].conjugate() * b[1], abs=1e-14)


def test_lambda_pm_diagonal(rng):
    spec = EquationSpec(3, ce.random_spec(3, rng).a, (0j,) * 6)
    lp, lm = ce.lambda_pm_sequences(spec)
    assert lm == [0.0] * 5
    assert lp == pytest.approx([2 * z.imag for z in spec.a[:5]])


@settings(max_examples=200, deadline=None)
@given(specs(m_max=6))
def test_remark21_identities(spec):
    assert ce.remark21_residual(spec) <= 1e-10 * spec.scale() ** 3


@settings(max_examples=100, deadline=None)
@given(specs(m_max=6))
def test_table_invariants(spec):
    t = ce.coefficient_table(spec)
    m = spec.m
    assert len(t.gamma) == m - 1
    assert len(t.lambda_) == len(t.alpha) == len(t.lambda_plus) == len(t.lambda_minus) == 2 * m - 1
    for j in range(1, m):
        assert t.gamma[j - 1] == pytest.approx(t.alpha[2 * j - 1], abs=1e-12)
    for j in range(min(3, 2 * m - 1)):
        assert abs(t.lambda_minus[j]) <= 1e-12
    assert all(isinstance(x, float) for x in t.lambda_)


@settings(max_examples=100, deadline=None)
@given(specs(m_max=5))
def test_classification_ignores_zeroth_order(spec):
    m = spec.m
    a = list(spec.a)
    b = list(spec.b)
    a[2 * m - 1] += 0.7 - 0.3j
    b[2 * m - 1] -= 0.2 + 0.9j
    other = EquationSpec(m, tuple(a), tuple(b))
    assert ce.lambda_sequence(other) == ce.lambda_sequence(spec)
    assert ce.classify(other).kind == ce.classify(spec).kind


def test_classify_examples(examples):
    expect = {
        "m1_dispersive": (Kind.DISPERSIVE, None),
        "m1_elliptic": (Kind.ELLIPTIC, 1),
        "m2_elliptic_a3": (Kind.ELLIPTIC, 2),
        "m2_elliptic_b": (Kind.ELLIPTIC, 2),
        "m2_dispersive_mixed": (Kind.DISPERSIVE, None),
        "m2_parabolic_a2": (Kind.PARABOLIC, 1),
    }
    for name, (kind, jstar) in expect.items():
        c = ce.classify(examples[name])
        assert (c.kind, c.jstar) == (kind, jstar), name
        # the examples are exactly representable: tol = 0 agrees
        assert ce.classify(examples[name], 0.0).kind == kind
    par = ce.classify(examples["m2_parabolic_a2"])
    assert par.sign == "Positive" and par.smoothing == "[0,inf)"
    neg = ce.classify(EquationSpec.from_dict(2, {2: -1j}))
    assert neg.smoothing == "(-inf,0]"
    ell = ce.classify(examples["m2_elliptic_b"])
    assert ell.sign == "Negative" and ell.smoothing == {"forward": "P-", "backward": "P+"}
    assert ce.lambda_sequence(examples["m2_elliptic_b"])[2] == pytest.approx(-2)


def test_classify_tolerance():
    spec = EquationSpec.from_dict(2, {1: 1e-13j})
    assert ce.classify(spec).kind is Kind.DISPERSIVE
    assert ce.classify(spec, 0.0).kind is Kind.ELLIPTIC
    with pytest.raises(InvalidConfig):
        ce.classify(spec, -1.0)


def _elliptic(m, jstar, seed):
    return ce.sample_spec(m, np.random.default_rng(seed), Kind.ELLIPTIC, jstar)


def test_beta_lengths_and_residual():
    for m in range(3, 7):
        for jstar in range(1, m - 1):
            spec = _elliptic(m, jstar, 10 * m + jstar)
            t = ce.coefficient_table(spec)
            assert t.classification.kind is Kind.ELLIPTIC and t.jstar == jstar
            assert len(t.beta_plus) == len(t.beta_minus) == 2 * (m - jstar - 1)
            assert t.beta_residual <= 1e-10


def test_beta_first_row():
    spec = _elliptic(4, 1, 3)
    t = ce.coefficient_table(spec)
    bp, _ = ce.beta_sequences(t, 1)
    assert bp[0] == pytest.approx(t.lambda_minus[3] / t.lambda_plus[0], rel=1e-12)


def test_beta_empty_and_degenerate():
    spec = EquationSpec.from_dict(2, {3: 1j})
    t = ce.coefficient_table(spec)
    assert t.beta_plus == () and t.beta_minus == ()
    # lambda^+_1 = 0 makes the j*=1 system singular
    flat = ce.coefficient_table(EquationSpec.from_dict(4, {3: 1j}, {1: 0.5}))
    with pytest.raises(DegenerateBeta):
        ce.beta_sequences(flat, 1)
    with pytest.raises(InvalidConfig):
        ce.beta_sequences(t, 5)


def test_beta_zero_tail():
    spec = EquationSpec.from_dict(4, {1: 1j})
    bp, bm = ce.beta_sequences(ce.coefficient_table(spec), 1)
    assert bp == [0.0] * 4 and bm == [0.0] * 4


def test_hamiltonian_check(rng):
    assert ce.hamiltonian_check(EquationSpec.zeros(2)).passed
    assert not ce.hamiltonian_check(EquationSpec.from_dict(2, {}, {1: 1})).passed
    for _ in range(500):
        m = int(rng.integers(1, 5))
        s = ce.random_spec(m, rng)
        a = tuple(complex(z.real, 0) if j < 2 * m - 1 else z for j, z in enumerate(s.a))
        b = tuple(0j if j % 2 == 0 else z for j, z in enumerate(s.b))
        spec = EquationSpec(m, a, b)
        rep = ce.hamiltonian_check(spec)
        assert rep.passed and rep.notes["implies"] == "Dispersive"
        assert ce.classify(spec).kind is Kind.DISPERSIVE


def test_mass_conservation_check():
    z = ce.mass_conservation_check(EquationSpec.zeros(2))
    assert z.notes == {"literal": True, "strict": True}
    r = ce.mass_conservation_check(EquationSpec.from_dict(2, {4: 1j}))
    assert r.notes == {"literal": True, "strict": False}
    assert not ce.mass_conservation_check(EquationSpec.from_dict(2, {}, {2: 1})).passed


def test_lemma22_zero_b():
    lhs, rhs = ce.lemma22_sides(EquationSpec.from_dict(3, {1: 1, 2: 1j, 4: 2}))
    assert lhs == [0.0] * 4 and rhs == [0.0] * 4


def test_lemma22_random():
    assert ce.lemma22_check([2], trials=200, seed=1).passed
    assert ce.lemma22_check([6], trials=200, seed=2).passed


def test_lemma23():
    rep = ce.lemma23_check(3, 1, trials=100, seed=5)
    assert rep.passed
    spec = ce.lemma23_sample(3, 1, np.random.default_rng(0))
    lm = ce.coefficient_table(spec).lambda_minus
    assert abs(lm[3]) < 1e-12 and abs(lm[4]) < 1e-12
    assert ce.lemma23_check(5, 3, trials=100, seed=3).passed
    with pytest.raises(InvalidConfig):
        ce.lemma23_check(3, 3)


def test_lemma23_zero_b():
    rng = np.random.default_rng(9)
    for _ in range(20):
        s = ce.random_spec(4, rng)
        s = EquationSpec(4, s.a, (0j,) * 8)
        a = list(s.a)
        for j in (1, 2):
            a[2 * j - 1] = complex(a[2 * j - 1].real, 0)
        t = ce.coefficient_table(EquationSpec(4, tuple(a), s.b))
        assert t.lambda_minus == (0.0,) * 7


def test_check_report_dict():
    rep = ce.CheckReport.from_residuals("x", [(0, 1e-3), (1, 2e-3)], 1e-2)
    d = rep.to_dict()
    assert d["passed"] and d["max_residual"] == 2e-3 and d["worst"][0] == [1, 2e-3]


def test_sample_spec_kinds():
    rng = np.random.default_rng(4)
    for m in (2, 3):
        for kind, js in ((Kind.PARABOLIC, 1), (Kind.ELLIPTIC, 2), (Kind.DISPERSIVE, None)):
            spec = ce.sample_spec(m, rng, kind, js)
            c = ce.classify(spec)
            assert c.kind is kind
            if js:
                assert c.jstar == js
    with pytest.raises(InvalidConfig):
        ce.sample_spec(2, rng, Kind.PARABOLIC, 2)
