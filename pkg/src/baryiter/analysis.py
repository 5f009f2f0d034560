"""Convergence-order computation and leading-error-factor checks.

A memory method whose dominant error multiplies a product of recent errors
has an asymptotic order ``l`` solving a scalar fixed-point equation:

* root family ("root", coincidence multiplicity m, memory n+1):
  ``l = (m+1) - m l^-(n+1)``; the n -> infinity limit is ``m + 1``.
* optimisation family ("opt"): ``l^2 = 1 + m (l - l^-n)``; the limit is
  ``(m + sqrt(4 + m^2))/2``.

``theoretical_order`` finds the largest root in [1, limit] with safeguarded
Newton (bisection fallback), starting from the limit; the fixed point is
unique in that bracket.  ``empirical_order`` averages log-error ratios,
matching the defining relation ``e_{i+1} ~ e_i^l`` directly, which is more
robust than regression on the few asymptotic steps a trace provides.

``predicted_error_factor`` evaluates the tabulated leading-error constants
for the schemes in this library (exactly the published cells; there is no
closed form for general window sizes), and ``verify_error_factor`` compares
them against the error products of a converged trace.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import mpmath
from mpmath import fsum, mpf

from .errors import InsufficientData, UnsupportedCell
from .numerics import Real, Scalar, real
from .root_search import IterationTrace

FAMILIES = ("root", "opt")

_ORDER_TOL = mpf(10) ** -16


def order_limit(family: str, m: int) -> Real:
    """Asymptotic (n -> infinity) order of the family."""
    if family == "root":
        return mpf(m + 1)
    if family == "opt":
        return (m + mpmath.sqrt(mpf(4) + m * m)) / 2
    raise ValueError(f"family must be one of {FAMILIES}, got {family!r}")


def _residual(family: str, m: int, n: int, l: Real) -> Real:
    if family == "root":
        return l - (m + 1) + m * l ** (-(n + 1))
    return l * l - 1 - m * (l - l ** (-n))


def _slope(family: str, m: int, n: int, l: Real) -> Real:
    if family == "root":
        return 1 - m * (n + 1) * l ** (-(n + 2))
    return 2 * l - m * (1 + n * l ** (-(n + 1)))


def theoretical_order(family: str, m: int, n) -> Real:
    """Convergence index for multiplicity ``m`` and memory parameter ``n``.

    ``n`` may be ``math.inf`` for the asymptotic limit.  Degenerate rows
    (no crossing above 1) return exactly 1.
    """
    if m < 1:
        raise ValueError("m must be at least 1")
    limit = order_limit(family, m)
    if n == math.inf:
        return limit
    n = int(n)
    if n < 0:
        raise ValueError("n must be non-negative")
    lo = 1 + mpf(10) ** -30
    hi = limit
    if _residual(family, m, n, lo) >= 0:
        return mpf(1)
    l = hi
    for _ in range(200):
        step = _residual(family, m, n, l) / _slope(family, m, n, l)
        candidate = l - step
        if not (lo < candidate < hi):
            candidate = (lo + hi) / 2
        if _residual(family, m, n, candidate) > 0:
            hi = candidate
        else:
            lo = candidate
        if abs(candidate - l) < _ORDER_TOL * limit:
            return candidate
        l = candidate
    return l


def empirical_order(trace: IterationTrace, k_last: int) -> Real:
    """Mean of log|e_{i+1}| / log|e_i| over the last ``k_last`` usable steps.

    Usable steps carry a reference error strictly inside (0, 1); at least
    ``k_last + 1`` of them are required.
    """
    if k_last < 1:
        raise ValueError("k_last must be positive")
    errors = [
        s.abs_error
        for s in trace.steps
        if s.abs_error is not None and 0 < s.abs_error < 1
    ]
    if len(errors) < k_last + 1:
        raise InsufficientData(
            f"need {k_last + 1} steps with errors in (0, 1), have {len(errors)}"
        )
    tail = errors[-(k_last + 1):]
    ratios = [mpmath.log(tail[i + 1]) / mpmath.log(tail[i]) for i in range(k_last)]
    return fsum(ratios) / k_last


# ---------------------------------------------------------------------------
# leading-error factors
#
# Cells keyed by "method/weight-scheme" and window size n+1.  d[k] below is
# the k-th derivative of the function (or objective) at the true solution.


def _d(values: Sequence[Real], k: int) -> Real:
    if len(values) < k:
        raise UnsupportedCell(f"needs the solution derivative of order {k}")
    return values[k - 1]


def _factor_a(d, n_plus_1):  # x-weighted inverse-root family
    if n_plus_1 == 2:
        return d(2) / (2 * d(1))
    if n_plus_1 == 3:
        return (3 * d(2) ** 2 - 2 * d(1) * d(3)) / (12 * d(1) ** 2)
    if n_plus_1 == 4:
        return (3 * d(2) ** 3 - 4 * d(1) * d(2) * d(3) + d(1) ** 2 * d(4)) / (24 * d(1) ** 3)
    raise UnsupportedCell(f"no tabulated factor for window {n_plus_1}")


def _factor_b(d, n_plus_1):  # f-weighted inverse-root family
    if n_plus_1 == 2:
        return d(2) / (2 * d(1))
    if n_plus_1 == 3:
        return (6 * d(2) ** 2 - 2 * d(1) * d(3)) / (12 * d(1) ** 2)
    if n_plus_1 == 4:
        return (15 * d(2) ** 3 - 10 * d(1) * d(2) * d(3) + d(1) ** 2 * d(4)) / (24 * d(1) ** 3)
    raise UnsupportedCell(f"no tabulated factor for window {n_plus_1}")


def _factor_d1_x(d, n_plus_1):
    if n_plus_1 == 1:
        return d(2) / (2 * d(1))
    if n_plus_1 == 2:
        return (3 * d(2) ** 3 - 4 * d(1) * d(2) * d(3) + d(1) ** 2 * d(4)) / (24 * d(1) ** 3)
    raise UnsupportedCell(f"no tabulated factor for window {n_plus_1}")


def _factor_d1_f(d, n_plus_1):
    if n_plus_1 == 1:
        return d(2) / (2 * d(1))
    if n_plus_1 == 2:
        return (15 * d(2) ** 3 - 10 * d(1) * d(2) * d(3) + d(1) ** 2 * d(4)) / (24 * d(1) ** 3)
    raise UnsupportedCell(f"no tabulated factor for window {n_plus_1}")


def _factor_newton_f_x(d, n_plus_1):  # direct polynomial interpolant (Newton step)
    if n_plus_1 == 2:
        return d(2) / (2 * d(1))
    if n_plus_1 == 3:
        return -d(3) / (6 * d(1))
    if n_plus_1 == 4:
        return d(4) / (24 * d(1))
    raise UnsupportedCell(f"no tabulated factor for window {n_plus_1}")


def _factor_newton_f_f(d, n_plus_1):
    if n_plus_1 == 2:
        return d(2) / (2 * d(1))
    if n_plus_1 == 3:
        return (3 * d(2) ** 2 - 2 * d(1) * d(3)) / (12 * d(1) ** 2)
    if n_plus_1 == 4:
        return (6 * d(2) ** 3 - 6 * d(1) * d(2) * d(3) + d(1) ** 2 * d(4)) / (24 * d(1) ** 3)
    raise UnsupportedCell(f"no tabulated factor for window {n_plus_1}")


def _factor_ch_f_x(d, n_plus_1):
    if n_plus_1 == 1:
        return d(2) / (2 * d(1))
    if n_plus_1 == 2:
        return d(4) / (24 * d(1))
    raise UnsupportedCell(f"no tabulated factor for window {n_plus_1}")


def _factor_opt_df(d, n_plus_1):
    # (-1)^n / (n+1)! * phi^(n+1) / phi'' with n+1 = window size
    n = n_plus_1 - 1
    if n < 1:
        raise UnsupportedCell("derivative-free optimisation needs a window of at least 2")
    return mpf((-1) ** n) / mpmath.factorial(n + 1) * d(n + 1) / d(2)


_FACTOR_CELLS = {
    "exact-df/x": _factor_a,
    "newton-x-interp/x": _factor_a,
    "exact-df/f": _factor_b,
    "newton-x-interp/f": _factor_b,
    "exact-d1/x": _factor_d1_x,
    "exact-d1/f": _factor_d1_f,
    "newton-f-interp/x": _factor_newton_f_x,
    "newton-f-interp/f": _factor_newton_f_f,
    "ch-x-interp/f": _factor_d1_f,
    "ch-f-interp/x": _factor_ch_f_x,
    "newton-df/x": _factor_opt_df,
}

# error-product shape per scheme: multiplicity m, and whether the newest
# error enters with exponent m-1 (optimisation) or m (root search)
_PRODUCT_SHAPE = {
    "exact-df": (1, "root"),
    "newton-x-interp": (1, "root"),
    "newton-f-interp": (1, "root"),
    "secant": (1, "root"),
    "exact-d1": (2, "root"),
    "ch-x-interp": (2, "root"),
    "ch-f-interp": (2, "root"),
    "newton": (2, "root"),
    "newton-df": (1, "opt"),
}


@dataclass(frozen=True)
class ErrorFactorSpec:
    """Identifies a tabulated leading-error cell.

    ``scheme`` is "method/weight-scheme" (e.g. "exact-df/x"); ``secant`` and
    ``newton`` may be given bare and map onto their tabulated equivalents.
    ``derivatives`` lists the solution-point derivatives starting at order 1.
    """

    scheme: str
    n_plus_1: int
    derivatives: tuple[Scalar, ...]

    def normalised_scheme(self) -> str:
        if self.scheme == "secant":
            return "exact-df/x"
        if self.scheme == "newton":
            return "exact-d1/x"
        return self.scheme


def predicted_error_factor(spec: ErrorFactorSpec) -> Real:
    """Leading-error constant for the scheme's tabulated window size."""
    scheme = spec.normalised_scheme()
    try:
        cell = _FACTOR_CELLS[scheme]
    except KeyError:
        raise UnsupportedCell(f"no tabulated factors for scheme {spec.scheme!r}") from None
    values = [real(v) for v in spec.derivatives]
    if scheme == "newton-df/x":
        # stationary point: the curvature is the non-degeneracy condition
        if len(values) < 2 or values[1] == 0:
            raise ValueError("the solution curvature must be non-zero")
    elif not values or values[0] == 0:
        raise ValueError("the first solution derivative must be non-zero (simple root)")

    def d(k: int) -> Real:
        return _d(values, k)

    return cell(d, spec.n_plus_1)


def _error_products(errors: Sequence[Real], n_plus_1: int, m: int, shape: str):
    """Pairs (e_j, product of the n+1 window errors before step j)."""
    out = []
    for j in range(n_plus_1, len(errors)):
        window = errors[j - n_plus_1: j]
        if any(e == 0 for e in window) or errors[j] == 0:
            continue
        if shape == "opt":
            product = mpf(1)
            for e in window[:-1]:
                product *= e ** m
            product *= window[-1] ** (m - 1)
        else:
            product = mpf(1)
            for e in window:
                product *= e ** m
        out.append((errors[j], product))
    return out


def verify_error_factor(trace: IterationTrace, spec: ErrorFactorSpec, window_tail: int) -> Real:
    """Largest relative deviation of e_j / (error product) from the predicted factor.

    Uses the last ``window_tail`` steps whose full error window is non-zero;
    errors are signed, so the factor's sign is checked too.
    """
    if window_tail < 1:
        raise ValueError("window_tail must be positive")
    predicted = predicted_error_factor(spec)
    method = spec.normalised_scheme().split("/")[0]
    try:
        m, shape = _PRODUCT_SHAPE[method]
    except KeyError:
        raise UnsupportedCell(f"no error-product shape for scheme {spec.scheme!r}") from None
    errors = [s.error for s in trace.steps if s.error is not None]
    pairs = _error_products(errors, spec.n_plus_1, m, shape)
    if len(pairs) < window_tail:
        raise InsufficientData(
            f"need {window_tail} usable error products, have {len(pairs)}"
        )
    if predicted == 0:
        raise ValueError("predicted factor is zero; relative deviation is undefined")
    deviations = [
        abs(e / product / predicted - 1) for e, product in pairs[-window_tail:]
    ]
    return max(deviations)
