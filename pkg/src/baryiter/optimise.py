"""Univariate optimisation on interpolants of the objective.

Only the direct function is interpolated: inverse-objective interpolation
is excluded by design, because near an extremum the inverse is multi-valued
and the interpolant degrades.

``newton-df``
    Newton step on slope and curvature estimated from (x_i, phi_i) memory
    with x-based product weights.  Needs at least three points for a
    non-degenerate curvature, so the window minimum is 3.
``ch-d1``
    Chebyshev-Halley step on (slope, curvature, third-derivative) estimates
    from (x_i, phi_i, phi'_i) memory with x-based squared-product weights;
    window minimum 2.

The solver loop mirrors the root solver: growing memory, newest ``window``
samples, window-reduction fallback on singular steps.  Convergence uses the
slope residual: the true phi' for ``ch-d1``, the interpolant slope estimate
for ``newton-df`` (a documented heuristic, since the true gradient is
unavailable).  Each step records the sign of the curvature estimate; the
solver does not classify the stationary point.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

from mpmath import fsum, mpf

from . import numerics
from .errors import ExactRootHit, SingularStep, ZeroDerivative
from .interpolants import hermite_node_curvature
from .numerics import Real, is_finite, real
from .root_search import (
    OPT_METHODS,
    STATUS_CONVERGED,
    STATUS_DIVERGED,
    STATUS_EXHAUSTED,
    STATUS_FALLBACK,
    STATUS_OK,
    IterationTrace,
    SolverConfig,
    StepRecord,
    attach_reference,
    chebyshev_halley_update,
    default_tolerance,
    select_window,
)
from .weights import HermiteWeights, product_weights, squared_product_weights


@dataclass(frozen=True)
class ObjectiveSample:
    """One evaluated point of the objective."""

    x: Real
    phi: Real
    phi_prime: Real | None = None


def phi_slope_df(window: Sequence[ObjectiveSample], weights: Sequence[Real]) -> Real:
    """Interpolant slope at the newest sample.

    ``(sum_{k!=n} w_k (phi_n - phi_k)/(x_n - x_k)) / (sum_{k!=n} w_k)``
    """
    n = len(window) - 1
    den = fsum(weights[:n])
    if den == 0:
        raise SingularStep("weight sum over the older samples vanished")
    newest = window[n]
    num = fsum(
        weights[k] * (newest.phi - window[k].phi) / (newest.x - window[k].x)
        for k in range(n)
    )
    return num / den


def phi_curvature_df(
    window: Sequence[ObjectiveSample], weights: Sequence[Real], slope: Real
) -> Real:
    """Interpolant curvature at the newest sample, given its slope estimate.

    ``-2 (sum_{k!=n} w_k [(phi_n - phi_k) - slope (x_n - x_k)]/(x_n - x_k)^2)
     / (sum_{k!=n} w_k)``
    """
    n = len(window) - 1
    den = fsum(weights[:n])
    if den == 0:
        raise SingularStep("weight sum over the older samples vanished")
    newest = window[n]
    num = fsum(
        weights[k]
        * ((newest.phi - window[k].phi) - slope * (newest.x - window[k].x))
        / (newest.x - window[k].x) ** 2
        for k in range(n)
    )
    return -2 * num / den


def _df_step(window: Sequence[ObjectiveSample], weights: Sequence[Real]):
    slope = phi_slope_df(window, weights)
    curvature = phi_curvature_df(window, weights, slope)
    if curvature == 0:
        raise SingularStep("estimated curvature vanished")
    return window[-1].x - slope / curvature, curvature


def opt_step_df(window: Sequence[ObjectiveSample], weights: Sequence[Real]) -> Real:
    """Newton step on the derivative-free slope/curvature estimates."""
    return _df_step(window, weights)[0]


def _require_slopes(window: Sequence[ObjectiveSample]) -> list[Real]:
    slopes = [s.phi_prime for s in window]
    if any(sl is None for sl in slopes):
        raise ValueError("this scheme needs phi_prime on every sample")
    return slopes


def phi_curvature_d1(window: Sequence[ObjectiveSample], hweights: HermiteWeights) -> Real:
    """phi'' at the newest sample from the slope-matching interpolant."""
    slopes = _require_slopes(window)
    return hermite_node_curvature(
        [s.x for s in window], [s.phi for s in window], slopes, hweights
    )


def phi_third_d1(
    window: Sequence[ObjectiveSample], hweights: HermiteWeights, curvature: Real
) -> Real:
    """phi''' at the newest sample, given the curvature estimate.

    ``-(6/lam_n) (gam_n phi''_n / 2
      + sum_{k!=n} [gam_k phi'_n/(x_n - x_k)
                    - (gam_k (phi_n - phi_k) - lam_k (phi'_n + phi'_k))/(x_n - x_k)^2
                    - 2 lam_k (phi_n - phi_k)/(x_n - x_k)^3])``
    """
    slopes = _require_slopes(window)
    n = len(window) - 1
    newest = window[n]
    acc = hweights.gam[n] * curvature / 2
    for k in range(n):
        d = newest.x - window[k].x
        dphi = newest.phi - window[k].phi
        acc += hweights.gam[k] * slopes[n] / d
        acc -= (hweights.gam[k] * dphi - hweights.lam[k] * (slopes[n] + slopes[k])) / (d * d)
        acc -= 2 * hweights.lam[k] * dphi / (d * d * d)
    return -6 / hweights.lam[n] * acc


def _d1_step(window: Sequence[ObjectiveSample], hweights: HermiteWeights, beta: Real):
    curvature = phi_curvature_d1(window, hweights)
    if curvature == 0:
        raise SingularStep("estimated curvature vanished")
    third = phi_third_d1(window, hweights, curvature)
    newest = window[-1]
    try:
        x_new = chebyshev_halley_update(newest.x, newest.phi_prime, curvature, third, beta)
    except ZeroDerivative as err:
        raise SingularStep(str(err)) from None
    return x_new, curvature


def opt_step_d1(
    window: Sequence[ObjectiveSample], hweights: HermiteWeights, beta: Real
) -> Real:
    """Chebyshev-Halley step on (phi', phi'', phi''') with estimated curvature terms."""
    return _d1_step(window, hweights, beta)[0]


def _seed_points(problem, config: SolverConfig, x0: Real) -> list[Real]:
    # Derivative-free optimisation needs three distinct points before the
    # first interpolation step, the first-derivative scheme two; seed with
    # x0 +/- h unless an explicit x1 is supplied.
    if config.bootstrap == "picard":
        raise ValueError("picard bootstrap does not apply to optimisation problems")
    h = real(config.perturb_h) if config.perturb_h is not None else mpf(10) ** -3 * max(mpf(1), abs(x0))
    if config.x1 is not None or config.bootstrap == "explicit":
        if config.x1 is None:
            raise ValueError("explicit bootstrap needs x1")
        x1 = real(config.x1)
    else:
        x1 = x0 + h
    if config.method == "newton-df":
        return [x0, x1, x0 - (x1 - x0)]
    return [x0, x1]


def _opt_propose(samples: list, config: SolverConfig, beta: Real):
    """Next iterate, curvature sign, and whether the window shrank."""
    method = config.method
    minimum = 3 if method == "newton-df" else 2
    base = select_window(samples, min(config.window, len(samples)), frozenset({"x"}))
    if len(base) < minimum:
        raise SingularStep("memory collapsed below the method minimum")
    last_err: Exception | None = None
    for size in range(len(base), minimum - 1, -1):
        window = base[len(base) - size:]
        xs = [s.x for s in window]
        try:
            if method == "newton-df":
                x_new, curvature = _df_step(window, product_weights(xs))
            else:
                x_new, curvature = _d1_step(window, squared_product_weights(xs), beta)
            sign = 1 if curvature > 0 else -1
            return x_new, sign, size < len(base)
        except SingularStep as err:
            last_err = err
            continue
    raise last_err if last_err is not None else SingularStep("no usable window")


def _slope_residual(samples: list, config: SolverConfig) -> Optional[Real]:
    # Residual for newton-df: the interpolant slope at the newest sample.
    window = select_window(samples, min(config.window, len(samples)), frozenset({"x"}))
    if len(window) < 2:
        return None
    try:
        return phi_slope_df(window, product_weights([s.x for s in window]))
    except SingularStep:
        return None


def optimize(problem, config: SolverConfig) -> IterationTrace:
    """Drive one optimisation method on ``problem``.

    ``problem.f`` is read as the objective and ``problem.df`` as its
    gradient; the trace's ``f`` column holds objective values and
    ``f_prime`` the slope used as the convergence residual.
    """
    config = config.validated(OPT_METHODS)
    method = config.method
    with numerics.precision(config.precision_bits):
        beta = real(config.beta)
        tol_g = real(config.tol_f) if config.tol_f is not None else default_tolerance(config.precision_bits)
        tol_x = real(config.tol_x) if config.tol_x is not None else default_tolerance(config.precision_bits)
        needs_dphi = method == "ch-d1"
        if needs_dphi and problem.df is None:
            raise ValueError(f"method {method!r} needs phi' but problem {problem.name!r} has none")
        reference = attach_reference(problem)

        steps: list[StepRecord] = []
        samples: list[ObjectiveSample] = []

        def push(x: Real, status: str = STATUS_OK, sign: Optional[int] = None) -> ObjectiveSample:
            phi = problem.f(x)
            dphi = problem.df(x) if needs_dphi else None
            sample = ObjectiveSample(x, phi, dphi)
            samples.append(sample)
            err = x - reference if reference is not None else None
            record = StepRecord(len(steps), x, phi, dphi, err, status, curvature_sign=sign)
            steps.append(record)
            return sample

        def finish(status: str) -> IterationTrace:
            steps[-1].status = status
            return IterationTrace(problem.name, method, config, reference, steps)

        def residual(sample: ObjectiveSample) -> Optional[Real]:
            if needs_dphi:
                return sample.phi_prime
            return _slope_residual(samples, config)

        def terminal(sample: ObjectiveSample, prev: Optional[ObjectiveSample]) -> Optional[str]:
            if not (is_finite(sample.x) and is_finite(sample.phi)):
                return STATUS_DIVERGED
            res = residual(sample)
            if res is not None:
                steps[-1].f_prime = res
                if abs(res) < tol_g:
                    return STATUS_CONVERGED
            if prev is not None and abs(sample.x - prev.x) < tol_x:
                return STATUS_CONVERGED
            return None

        x0 = real(config.x0) if config.x0 is not None else real(problem.default_x0)
        previous: Optional[ObjectiveSample] = None
        current: Optional[ObjectiveSample] = None
        for seed in _seed_points(problem, config, x0):
            previous = current
            current = push(seed)
            status = terminal(current, None)  # seeds converge on residual only
            if status:
                return finish(status)

        while steps[-1].index < config.max_iter:
            try:
                x_new, sign, reduced = _opt_propose(samples, config, beta)
            except ExactRootHit:  # pragma: no cover - objectives have no exact-root path
                return finish(STATUS_CONVERGED)
            previous = samples[-1]
            current = push(x_new, STATUS_FALLBACK if reduced else STATUS_OK, sign)
            status = terminal(current, previous)
            if status:
                return finish(status)
        return finish(STATUS_EXHAUSTED)
