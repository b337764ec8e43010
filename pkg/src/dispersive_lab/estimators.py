"""scikit-learn style wrappers around the coefficient engine and the propagator.

Nothing here is learned: ``fit`` only validates and records shapes.  The
wrappers exist so batches of equations or states can flow through
``Pipeline``/``clone``/``get_params`` like any other estimator.
"""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .coefficients import EquationSpec, Kind, classify, coefficient_table
from .state import SpectralState, evolve_state
from .validation import check_coefficient_rows, check_complex_states, rows_to_specs

__all__ = ["EquationClassifier", "CoefficientTransformer", "SpectralPropagator"]

KINDS = np.array([k.value for k in Kind])


class EquationClassifier(ClassifierMixin, BaseEstimator):
    """Rows of real/imag coefficient pairs -> 'Dispersive' / 'Parabolic' / 'Elliptic'."""

    def __init__(self, m=2, zero_tolerance=None):
        self.m = m
        self.zero_tolerance = zero_tolerance

    def fit(self, X, y=None):
        check_coefficient_rows(X, self.m)
        self.classes_ = KINDS.copy()
        self.n_features_in_ = 8 * self.m
        return self

    def predict(self, X):
        check_is_fitted(self, "classes_")
        X = check_coefficient_rows(X, self.m)
        return np.array(
            [classify(s, self.zero_tolerance).kind.value for s in rows_to_specs(X, self.m)]
        )

    def predict_jstar(self, X):
        """Index j* per row (0 for Dispersive)."""
        check_is_fitted(self, "classes_")
        X = check_coefficient_rows(X, self.m)
        return np.array(
            [classify(s, self.zero_tolerance).jstar or 0 for s in rows_to_specs(X, self.m)]
        )


class CoefficientTransformer(TransformerMixin, BaseEstimator):
    """Rows of coefficients -> lambda_1..lambda_{2m-1} (plus lambda^+/lambda^- if asked)."""

    def __init__(self, m=2, include_pm=False):
        self.m = m
        self.include_pm = include_pm

    def fit(self, X, y=None):
        check_coefficient_rows(X, self.m)
        self.n_features_in_ = 8 * self.m
        return self

    def transform(self, X):
        check_is_fitted(self, "n_features_in_")
        X = check_coefficient_rows(X, self.m)
        rows = []
        for s in rows_to_specs(X, self.m):
            t = coefficient_table(s)
            r = list(t.lambda_)
            if self.include_pm:
                r += list(t.lambda_plus) + list(t.lambda_minus)
            rows.append(r)
        return np.array(rows, dtype=float)

    def get_feature_names_out(self, input_features=None):
        n = 2 * self.m - 1
        names = [f"lambda_{j}" for j in range(1, n + 1)]
        if self.include_pm:
            names += [f"lambda_plus_{j}" for j in range(1, n + 1)]
            names += [f"lambda_minus_{j}" for j in range(1, n + 1)]
        return np.array(names, dtype=object)


class SpectralPropagator(TransformerMixin, BaseEstimator):
    """Evolve each row of Fourier coefficients (xi = -K..K) by time ``t``.

    ``a`` and ``b`` are sequences of 2m complex numbers.
    """

    def __init__(self, m=1, a=None, b=None, t=0.0):
        self.m = m
        self.a = a
        self.b = b
        self.t = t

    def _spec(self):
        n = 2 * self.m
        a = tuple(self.a) if self.a is not None else (0j,) * n
        b = tuple(self.b) if self.b is not None else (0j,) * n
        return EquationSpec(self.m, a, b)

    def fit(self, X, y=None):
        X = check_complex_states(X)
        self.spec_ = self._spec()
        self.K_ = (X.shape[1] - 1) // 2
        self.n_features_in_ = X.shape[1]
        return self

    def transform(self, X):
        check_is_fitted(self, "spec_")
        X = check_complex_states(X, self.K_)
        out = np.empty_like(X)
        for i, row in enumerate(X):
            out[i] = evolve_state(self.spec_, SpectralState(self.K_, row), self.t).coeffs
        return out
