"""Input checks for the estimator wrappers.

sklearn's ``check_array`` refuses complex data, and the mode arrays here are
complex by nature, so the complex path has its own helper.
"""
from __future__ import annotations

import numpy as np
from sklearn.utils.validation import check_array

from .errors import InvalidConfig

__all__ = ["check_coefficient_rows", "check_complex_states", "rows_to_specs", "specs_to_rows"]


def check_coefficient_rows(X, m):
    """Real 2D array of shape (n, 8m): [Re a_1, Im a_1, ..., Re b_2m, Im b_2m]."""
    X = check_array(X, dtype=np.float64, ensure_2d=True)
    if X.shape[1] != 8 * m:
        raise InvalidConfig(f"expected {8 * m} features for m={m}, got {X.shape[1]}")
    return X


def check_complex_states(X, K=None):
    """2D complex array with an odd number 2K+1 of columns; all entries finite."""
    X = np.asarray(X)
    if X.ndim == 1:
        X = X[None, :]
    if X.ndim != 2:
        raise InvalidConfig(f"expected a 2D array of coefficients, got ndim={X.ndim}")
    if X.dtype.kind not in "biufc":
        raise InvalidConfig(f"expected numeric coefficients, got dtype {X.dtype}")
    X = X.astype(np.complex128)
    if X.shape[0] == 0:
        raise InvalidConfig("no states given")
    if X.shape[1] % 2 != 1 or X.shape[1] < 3:
        raise InvalidConfig(f"need 2K+1 >= 3 columns, got {X.shape[1]}")
    if K is not None and X.shape[1] != 2 * K + 1:
        raise InvalidConfig(f"expected {2 * K + 1} columns for K={K}, got {X.shape[1]}")
    if not np.all(np.isfinite(X)):
        raise InvalidConfig("coefficients contain NaN or infinity")
    return X


def rows_to_specs(X, m):
    from .coefficients import EquationSpec

    n = 2 * m
    out = []
    for row in X:
        z = row[0::2] + 1j * row[1::2]
        out.append(EquationSpec(m, tuple(z[:n]), tuple(z[n:])))
    return out


def specs_to_rows(specs):
    rows = []
    for s in specs:
        z = np.array(s.a + s.b, dtype=complex)
        r = np.empty(2 * len(z))
        r[0::2] = z.real
        r[1::2] = z.imag
        rows.append(r)
    return np.array(rows)
