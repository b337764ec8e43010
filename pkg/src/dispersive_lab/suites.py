"""Named example equations and the batch runs behind ``dispersive-lab verify``."""
from __future__ import annotations

import numpy as np

from . import coefficients as ce
from .coefficients import EquationSpec, Kind, coefficient_table
from .estimates import estimate_report
from .parallel import ordered_map
from .state import lemma31_check

__all__ = [
    "REFERENCE_EXAMPLES",
    "reference_examples",
    "random_suite",
    "estimate_suite",
    "correction_relevant",
    "VERIFY_NAMES",
    "ESTIMATES",
    "default_specs",
]

# name -> (m, {j: a_j}, {j: b_j})
REFERENCE_EXAMPLES = {
    "m1_dispersive": (1, {1: 1.0}, {1: 0.3 + 0.2j, 2: 0.5}),
    "m1_elliptic": (1, {1: 1j}, {}),
    "m2_elliptic_a3": (2, {3: 1j}, {}),
    "m2_elliptic_b": (2, {}, {1: 1.0, 2: -1j}),
    "m2_dispersive_mixed": (2, {3: 1j}, {1: 1.0, 2: -1j}),
    "m2_parabolic_a2": (2, {2: 1j}, {}),
}

VERIFY_NAMES = ("remark21", "lemma22", "lemma23", "prop21", "lemma21", "prop22", "lemma31")
ESTIMATES = ("prop21", "lemma21", "prop22")


def reference_examples():
    return {k: EquationSpec.from_dict(m, a, b) for k, (m, a, b) in REFERENCE_EXAMPLES.items()}


def random_suite(n, seed, m_max=4):
    """``n`` random specs with m cycling through 1..m_max."""
    rng = np.random.default_rng(seed)
    return [ce.random_spec(1 + i % m_max, rng) for i in range(n)]


def default_specs(trials, seed, elliptic=False):
    """Reference examples plus ``trials`` random specs with m cycling through 1..4.

    With ``elliptic`` the random specs are drawn Elliptic (j* cycling through
    1..m) and the non-Elliptic examples are kept; callers skip them.
    """
    specs = reference_examples()
    if elliptic:
        rng = np.random.default_rng(seed)
        rand = []
        for i in range(trials):
            m = 1 + i % 4
            rand.append(ce.sample_spec(m, rng, Kind.ELLIPTIC, 1 + i % m))
    else:
        rand = random_suite(trials, seed)
    for i, s in enumerate(rand):
        specs[f"random_{i}"] = s
    return specs


def correction_relevant(name, table):
    """Does the correction that ``name`` ablates have a nonzero coefficient?"""
    if name == "prop21":
        return any(g != 0 for g in table.gamma)
    if name == "lemma21":
        return any(a != 0 for a in table.alpha)
    if name == "prop22":
        betas = list(table.beta_plus or ()) + list(table.beta_minus or ())
        return any(a != 0 for a in table.alpha) or any(b != 0 for b in betas)
    raise ValueError(name)


def _reports_for(name, spec, ablate):
    table = coefficient_table(spec)
    if name == "prop22" and table.classification.kind is not Kind.ELLIPTIC:
        return []
    if ablate and not correction_relevant(name, table):
        return []
    sides = [None] if name == "prop21" else ["Plus", "Minus"]
    out = []
    for side in sides:
        kw = {} if side is None else {"side": side}
        out.append(estimate_report(name, spec, ablate=bool(ablate), table=table, **kw))
    return out


def estimate_suite(name, specs, ablate=False):
    """EstimateReports for every (spec, side) the estimate applies to.

    Specs where ``name`` does not apply (prop22 on a non-Elliptic spec) or
    where the ablated correction is identically zero are skipped.
    """
    labelled = list(specs.items()) if isinstance(specs, dict) else list(enumerate(specs))
    results = ordered_map(lambda item: _reports_for(name, item[1], ablate), labelled)
    rows = []
    for (label, _), reps in zip(labelled, results):
        for r in reps:
            r.notes["spec"] = label
            rows.append(r)
    return rows


def lemma31_suite(specs, K=256, trials=100, seed=0):
    labelled = list(specs.items()) if isinstance(specs, dict) else list(enumerate(specs))
    return ordered_map(lambda item: lemma31_check(item[1], K, trials, seed), labelled)
