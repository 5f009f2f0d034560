"""Univariate root iterations with memory, plus classical baselines.

Methods (``SolverConfig.method``):

``exact-df``
    Exact root of the inverse-function interpolant over the (x_i, f_i)
    memory: ``x_new = (sum w_i x_i/f_i) / (sum w_i/f_i)``.  Equals the
    secant method with a two-point window.  Weight schemes: ``x``, ``f``
    or ``alpha`` (f-based weights with the newest value shifted).
``exact-d1``
    Exact root of the slope-matching inverse interpolant over
    (x_i, f_i, f'_i).  Equals Newton with a single point.  Weight schemes:
    ``x`` (derivative-scaled) or ``f`` (squared-product).
``newton-x-interp`` / ``newton-f-interp``
    Newton step at the newest point with 1/f' (inverse interpolant) or f'
    (direct interpolant) estimated from memory.  Weight schemes ``x``/``f``.
``ch-x-interp`` / ``ch-f-interp``
    Chebyshev-Halley step at the newest point with f'' estimated from the
    slope-matching inverse (f-based weights) or direct (x-based weights)
    interpolant; the weights are fixed by the scheme and the configured
    weight scheme is ignored.  ``beta`` selects the family member: 0 is
    Chebyshev, 1/2 Halley, 1 super-Halley (the recommended default).
``picard`` / ``newton`` / ``halley`` / ``secant``
    Classical baselines.  ``picard`` needs the problem in fixed-point form;
    ``halley`` uses the true second derivative.

The solver keeps the newest ``window`` samples, growing from the initial
point(s) until the window fills.  Derivative-free methods bootstrap a
second point: one fixed-point step when the problem has that form, else a
small perturbation; an explicit ``x1`` overrides both.  A singular step is
retried with one sample fewer (recorded as ``singular-step-fallback``) down
to the method minimum.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

from mpmath import fsum, mpf

from . import numerics
from .errors import (
    DegenerateNodes,
    ExactRootHit,
    SingularStep,
    ZeroDerivative,
)
from .interpolants import Sample, hermite_node_curvature
from .numerics import Real, Scalar, is_finite, real
from .weights import (
    HermiteWeights,
    derivative_scaled_weights,
    node_scale,
    product_weights,
    separation_floor,
    shifted_product_weights,
    squared_product_weights,
)

ROOT_METHODS = (
    "exact-df",
    "exact-d1",
    "newton-x-interp",
    "newton-f-interp",
    "ch-x-interp",
    "ch-f-interp",
    "picard",
    "newton",
    "halley",
    "secant",
)

OPT_METHODS = ("newton-df", "ch-d1")

WEIGHT_SCHEMES = ("x", "f", "alpha")
BOOTSTRAPS = ("auto", "picard", "perturb", "explicit")

# methods that need two starting points / true derivatives at every sample
TWO_POINT_METHODS = {"exact-df", "newton-x-interp", "newton-f-interp", "secant"}
DERIVATIVE_METHODS = {"exact-d1", "ch-x-interp", "ch-f-interp", "newton", "halley", "ch-d1"}

STATUS_OK = "ok"
STATUS_FALLBACK = "singular-step-fallback"
STATUS_CONVERGED = "converged"
STATUS_DIVERGED = "diverged"
STATUS_EXHAUSTED = "budget-exhausted"


def default_tolerance(precision_bits: int) -> Real:
    """Default convergence tolerance: 10^-(0.3 * decimal digits of the precision)."""
    return mpf(10) ** (-(mpf(3) / 10) * precision_bits * mpf("0.3010299956639812"))


@dataclass
class SolverConfig:
    """Configuration shared by the root solver and the optimiser.

    Numeric fields accept decimal strings (preferred for exact values),
    ints, floats or mpf; they are converted at the configured precision
    when the run starts.  ``tol_f`` doubles as the gradient tolerance for
    optimisation runs.  ``max_iter`` is the highest step index the trace
    may reach (the initial point is index 0).  ``alpha`` only matters for
    the alpha weight scheme; its default of 0 is arbitrary (any value with
    the right asymptotics works, none is preferred).
    """

    method: str = "exact-df"
    weight_scheme: str = "x"
    alpha: Scalar = 0
    window: int = 4
    beta: Scalar = 1
    x0: Optional[Scalar] = None
    x1: Optional[Scalar] = None
    bootstrap: str = "auto"
    perturb_h: Optional[Scalar] = None
    tol_f: Optional[Scalar] = None
    tol_x: Optional[Scalar] = None
    max_iter: int = 60
    precision_bits: int = numerics.DEFAULT_PRECISION_BITS

    def validated(self, methods: Sequence[str] = ROOT_METHODS) -> "SolverConfig":
        if self.method not in methods:
            raise ValueError(f"unknown method {self.method!r}; expected one of {methods}")
        if self.weight_scheme not in WEIGHT_SCHEMES:
            raise ValueError(f"unknown weight scheme {self.weight_scheme!r}")
        if self.bootstrap not in BOOTSTRAPS:
            raise ValueError(f"unknown bootstrap {self.bootstrap!r}")
        if self.window < 1:
            raise ValueError("window must be at least 1")
        if self.method in TWO_POINT_METHODS and self.window < 2:
            raise ValueError(f"{self.method} needs a window of at least 2")
        if self.method == "newton-df" and self.window < 3:
            raise ValueError("newton-df needs a window of at least 3")
        if self.method == "ch-d1" and self.window < 2:
            raise ValueError("ch-d1 needs a window of at least 2")
        if self.max_iter < 1:
            raise ValueError("max_iter must be positive")
        if self.precision_bits < numerics.MIN_PRECISION_BITS:
            raise ValueError(f"precision must be at least {numerics.MIN_PRECISION_BITS} bits")
        if self.method == "exact-d1" and self.weight_scheme == "alpha":
            raise ValueError("exact-d1 supports the x and f weight schemes only")
        return self


@dataclass
class StepRecord:
    """One solver step.  ``error`` is signed (iterate minus reference)."""

    index: int
    x: Real
    f: Optional[Real]
    f_prime: Optional[Real]
    error: Optional[Real]
    status: str
    curvature_sign: Optional[int] = None  # optimisation runs only

    @property
    def abs_error(self) -> Optional[Real]:
        return None if self.error is None else abs(self.error)


@dataclass
class IterationTrace:
    problem: str
    method: str
    config: SolverConfig
    reference: Optional[Real]
    steps: list[StepRecord] = field(default_factory=list)

    @property
    def status(self) -> str:
        return self.steps[-1].status if self.steps else STATUS_EXHAUSTED

    @property
    def iterations(self) -> int:
        return self.steps[-1].index if self.steps else 0

    def abs_errors(self) -> list[Optional[Real]]:
        return [s.abs_error for s in self.steps]


# ---------------------------------------------------------------------------
# step formulas


def step_exact_df(window: Sequence[Sample], weights: Sequence[Real]) -> Real:
    """Exact root of the inverse interpolant: (sum w_i x_i/f_i) / (sum w_i/f_i)."""
    for s in window:
        if s.f == 0:
            raise ExactRootHit(s.x)
    terms = [w / s.f for w, s in zip(weights, window)]
    den = fsum(terms)
    if den == 0:
        raise SingularStep("denominator sum vanished in exact-df step")
    num = fsum(t * s.x for t, s in zip(terms, window))
    return num / den


def step_exact_d1(window: Sequence[Sample], hweights: HermiteWeights) -> Real:
    """Exact root of the slope-matching inverse interpolant.

    ``(sum [lam_i (x_i - f_i/f'_i) - gam_i f_i x_i]/f_i^2)
     / (sum [lam_i - gam_i f_i]/f_i^2)``
    """
    num_terms = []
    den_terms = []
    for lam, gam, s in zip(hweights.lam, hweights.gam, window):
        if s.f == 0:
            raise ExactRootHit(s.x)
        if s.f_prime is None:
            raise ValueError("exact-d1 needs f_prime on every sample")
        if s.f_prime == 0:
            raise ZeroDerivative("exact-d1 needs non-zero f_prime")
        f2 = s.f * s.f
        num_terms.append((lam * (s.x - s.f / s.f_prime) - gam * s.f * s.x) / f2)
        den_terms.append((lam - gam * s.f) / f2)
    den = fsum(den_terms)
    if den == 0:
        raise SingularStep("denominator sum vanished in exact-d1 step")
    return fsum(num_terms) / den


def _estimate_parts(window: Sequence[Sample], weights: Sequence[Real]):
    n = len(window) - 1
    den = fsum(weights[:n])
    if den == 0:
        raise SingularStep("weight sum over the older samples vanished")
    return n, den


def inverse_slope_estimate(window: Sequence[Sample], weights: Sequence[Real]) -> Real:
    """1/f' at the newest sample from the inverse interpolant.

    ``(sum_{k!=n} w_k (x_n - x_k)/(f_n - f_k)) / (sum_{k!=n} w_k)``
    """
    n, den = _estimate_parts(window, weights)
    newest = window[n]
    terms = []
    for k in range(n):
        df = newest.f - window[k].f
        if df == 0:
            raise DegenerateNodes("repeated f value in the window")
        terms.append(weights[k] * (newest.x - window[k].x) / df)
    return fsum(terms) / den


def direct_slope_estimate(window: Sequence[Sample], weights: Sequence[Real]) -> Real:
    """f' at the newest sample from the direct interpolant.

    ``(sum_{k!=n} w_k (f_n - f_k)/(x_n - x_k)) / (sum_{k!=n} w_k)``
    """
    n, den = _estimate_parts(window, weights)
    newest = window[n]
    terms = []
    for k in range(n):
        dx = newest.x - window[k].x
        if dx == 0:
            raise DegenerateNodes("repeated x value in the window")
        terms.append(weights[k] * (newest.f - window[k].f) / dx)
    return fsum(terms) / den


def second_derivative_x_interp(window: Sequence[Sample], hweights: HermiteWeights) -> Real:
    """f'' at the newest sample via the slope-matching inverse interpolant.

    The interpolant's x''[f] at the newest node is converted through
    ``x'' = -f''/f'^3``.  Expects squared-product weights over the f values.
    """
    n = len(window) - 1
    newest = window[n]
    for s in window:
        if s.f_prime is None:
            raise ValueError("this estimate needs f_prime on every sample")
        if s.f_prime == 0:
            raise ZeroDerivative("this estimate needs non-zero f_prime")
    acc = hweights.gam[n] / newest.f_prime
    for k in range(n):
        df = newest.f - window[k].f
        if df == 0:
            raise DegenerateNodes("repeated f value in the window")
        acc += (
            hweights.lam[k] * (newest.x - window[k].x)
            + (hweights.gam[k] * (newest.x - window[k].x) - hweights.lam[k] / window[k].f_prime) * df
        ) / (df * df)
    return 2 * newest.f_prime ** 3 / hweights.lam[n] * acc


def second_derivative_f_interp(window: Sequence[Sample], hweights: HermiteWeights) -> Real:
    """f'' at the newest sample via the slope-matching direct interpolant.

    Expects squared-product weights over the x values.
    """
    for s in window:
        if s.f_prime is None:
            raise ValueError("this estimate needs f_prime on every sample")
    xs = [s.x for s in window]
    if any(xs[-1] == x for x in xs[:-1]):
        raise DegenerateNodes("repeated x value in the window")
    return hermite_node_curvature(
        xs, [s.f for s in window], [s.f_prime for s in window], hweights
    )


def chebyshev_halley_update(x: Real, f: Real, fp: Real, fpp: Real, beta: Real) -> Real:
    """One Chebyshev-Halley step.

    ``x - [(f'^2 + (1/2 - beta) f f'') / (f'^2 - beta f f'')] * f/f'``;
    beta=0 Chebyshev, beta=1/2 Halley, beta=1 super-Halley.  A zero f''
    reduces it to the Newton update.
    """
    if fp == 0:
        raise ZeroDerivative("Chebyshev-Halley update needs f' != 0")
    fp2 = fp * fp
    den = fp2 - beta * f * fpp
    if den == 0:
        raise SingularStep("Chebyshev-Halley denominator vanished")
    num = fp2 + (mpf(1) / 2 - beta) * f * fpp
    return x - (num / den) * (f / fp)


def baseline_step(method: str, problem, window: Sequence[Sample]) -> Real:
    """Classical single-step baselines: picard, newton, halley, secant."""
    newest = window[-1]
    if method == "picard":
        if problem.fixed_point is None:
            raise ValueError(f"problem {problem.name!r} has no fixed-point form")
        return problem.fixed_point(newest.x)
    if method == "newton":
        if newest.f_prime == 0:
            raise ZeroDerivative("Newton step needs f' != 0")
        return newest.x - newest.f / newest.f_prime
    if method == "halley":
        if problem.d2f is None:
            raise ValueError(f"problem {problem.name!r} has no second derivative")
        fpp = problem.d2f(newest.x)
        return chebyshev_halley_update(newest.x, newest.f, newest.f_prime, fpp, mpf(1) / 2)
    if method == "secant":
        if len(window) < 2:
            raise SingularStep("secant needs two samples")
        prev = window[-2]
        den = newest.f - prev.f
        if den == 0:
            raise SingularStep("secant denominator vanished")
        return (prev.x * newest.f - newest.x * prev.f) / den
    raise ValueError(f"unknown baseline {method!r}")


# ---------------------------------------------------------------------------
# solver loop


def _dedup_keys(method: str, scheme: str) -> frozenset[str]:
    if method in ("exact-df", "exact-d1"):
        return frozenset({"x"} if scheme == "x" else {"f"})
    if method == "newton-x-interp":
        return frozenset({"x", "f"} if scheme == "x" else {"f"})
    if method == "newton-f-interp":
        return frozenset({"x", "f"} if scheme == "f" else {"x"})
    if method == "ch-x-interp":
        return frozenset({"f"})
    if method in ("ch-f-interp", "newton-df", "ch-d1"):
        return frozenset({"x"})
    if method == "secant":
        return frozenset({"f"})
    return frozenset()


def select_window(samples: Sequence, size: int, keys: frozenset[str]) -> list:
    """Newest ``size`` samples whose ``keys`` coordinates are pairwise distinct.

    Scans from the newest backwards; an older sample colliding with a newer
    one (within the separation floor) is skipped, implementing the
    evict-the-older-duplicate policy.
    """
    floors = {
        key: separation_floor(node_scale([getattr(s, key) for s in samples]))
        for key in keys
    }
    kept: list = []
    for s in reversed(samples):
        clash = any(
            abs(getattr(s, key) - getattr(t, key)) <= floors[key]
            for key in keys
            for t in kept
        )
        if not clash:
            kept.append(s)
            if len(kept) == size:
                break
    kept.reverse()
    return kept


def _interp_weights(method: str, scheme: str, window: Sequence[Sample], alpha: Real):
    xs = [s.x for s in window]
    fs = [s.f for s in window]
    if method in ("exact-df", "newton-x-interp", "newton-f-interp"):
        if scheme == "x":
            return product_weights(xs)
        if scheme == "f":
            return product_weights(fs)
        return shifted_product_weights(fs, alpha)
    if method == "exact-d1":
        if scheme == "x":
            return derivative_scaled_weights(xs, [s.f_prime for s in window])
        return squared_product_weights(fs)
    if method == "ch-x-interp":
        return squared_product_weights(fs)
    if method == "ch-f-interp":
        return squared_product_weights(xs)
    raise ValueError(f"no interpolation weights for method {method!r}")


def _interp_step(method: str, scheme: str, window: Sequence[Sample], alpha: Real, beta: Real) -> Real:
    w = _interp_weights(method, scheme, window, alpha)
    newest = window[-1]
    if method == "exact-df":
        return step_exact_df(window, w)
    if method == "exact-d1":
        return step_exact_d1(window, w)
    if method == "newton-x-interp":
        return newest.x - newest.f * inverse_slope_estimate(window, w)
    if method == "newton-f-interp":
        slope = direct_slope_estimate(window, w)
        if slope == 0:
            raise SingularStep("estimated slope vanished")
        return newest.x - newest.f / slope
    if method == "ch-x-interp":
        fpp = second_derivative_x_interp(window, w)
        return chebyshev_halley_update(newest.x, newest.f, newest.f_prime, fpp, beta)
    if method == "ch-f-interp":
        fpp = second_derivative_f_interp(window, w)
        return chebyshev_halley_update(newest.x, newest.f, newest.f_prime, fpp, beta)
    raise ValueError(f"unknown interpolation method {method!r}")


def _propose(problem, samples: list, config: SolverConfig, alpha: Real, beta: Real):
    """Next iterate plus a flag telling whether the window had to shrink."""
    method = config.method
    if method in ("picard", "newton", "halley"):
        return baseline_step(method, problem, samples[-1:]), False
    if method == "secant":
        window = select_window(samples, 2, _dedup_keys(method, config.weight_scheme))
        if len(window) < 2:
            raise SingularStep("not enough distinct samples for a secant step")
        return baseline_step("secant", problem, window), False

    minimum = 2 if method in TWO_POINT_METHODS else 1
    keys = _dedup_keys(method, config.weight_scheme)
    base = select_window(samples, min(config.window, len(samples)), keys)
    if len(base) < minimum:
        raise SingularStep("memory collapsed below the method minimum")
    last_err: Exception | None = None
    for size in range(len(base), minimum - 1, -1):
        window = base[len(base) - size:]
        try:
            return _interp_step(method, config.weight_scheme, window, alpha, beta), size < len(base)
        except SingularStep as err:
            last_err = err
            continue
    raise last_err if last_err is not None else SingularStep("no usable window")


def bootstrap_second_point(problem, config: SolverConfig, x0: Real) -> Real:
    """Second starting point for the two-point methods.

    ``explicit`` (or a supplied ``x1``) wins; otherwise one fixed-point step
    when the problem has that form, else a relative perturbation
    ``h = 1e-3 * max(1, |x0|)``.
    """
    mode = config.bootstrap
    if mode == "auto":
        if config.x1 is not None:
            mode = "explicit"
        elif problem.fixed_point is not None:
            mode = "picard"
        else:
            mode = "perturb"
    if mode == "explicit":
        if config.x1 is None:
            raise ValueError("explicit bootstrap needs x1")
        return real(config.x1)
    if mode == "picard":
        if problem.fixed_point is None:
            raise ValueError(f"problem {problem.name!r} has no fixed-point form")
        return problem.fixed_point(x0)
    h = real(config.perturb_h) if config.perturb_h is not None else mpf(10) ** -3 * max(mpf(1), abs(x0))
    return x0 + h


def attach_reference(problem) -> Optional[Real]:
    """Reference solution at the working precision, or None if unavailable."""
    try:
        return problem.reference()
    except Exception:
        return None


def solve(problem, config: SolverConfig) -> IterationTrace:
    """Drive one root method on ``problem`` until convergence or budget end.

    ``problem`` needs ``f`` (plus ``df`` for the derivative methods,
    ``d2f`` for halley, ``fixed_point`` for picard) returning mpf values,
    and a ``reference()`` used to fill the signed error column when it is
    available.
    """
    config = config.validated(ROOT_METHODS)
    method = config.method
    with numerics.precision(config.precision_bits):
        alpha = real(config.alpha)
        beta = real(config.beta)
        tol_f = real(config.tol_f) if config.tol_f is not None else default_tolerance(config.precision_bits)
        tol_x = real(config.tol_x) if config.tol_x is not None else default_tolerance(config.precision_bits)
        needs_df = method in DERIVATIVE_METHODS
        if needs_df and problem.df is None:
            raise ValueError(f"method {method!r} needs f' but problem {problem.name!r} has none")
        if method == "picard" and problem.fixed_point is None:
            raise ValueError(f"problem {problem.name!r} has no fixed-point form")
        if method == "halley" and problem.d2f is None:
            raise ValueError(f"problem {problem.name!r} has no second derivative")
        reference = attach_reference(problem)

        steps: list[StepRecord] = []
        samples: list[Sample] = []

        def push(x: Real, status: str = STATUS_OK) -> Sample:
            fx = problem.f(x)
            fpx = problem.df(x) if needs_df else None
            sample = Sample(x, fx, fpx)
            samples.append(sample)
            err = x - reference if reference is not None else None
            steps.append(StepRecord(len(steps), x, fx, fpx, err, status))
            return sample

        def finish(status: str) -> IterationTrace:
            steps[-1].status = status
            return IterationTrace(problem.name, method, config, reference, steps)

        def terminal(sample: Sample, prev: Optional[Sample]) -> Optional[str]:
            if not (is_finite(sample.x) and is_finite(sample.f)):
                return STATUS_DIVERGED
            if sample.f == 0 or abs(sample.f) < tol_f:
                return STATUS_CONVERGED
            if prev is not None and abs(sample.x - prev.x) < tol_x:
                return STATUS_CONVERGED
            return None

        x0 = real(config.x0) if config.x0 is not None else real(problem.default_x0)
        current = push(x0)
        status = terminal(current, None)
        if status:
            return finish(status)
        if method in TWO_POINT_METHODS:
            previous = current
            current = push(bootstrap_second_point(problem, config, x0))
            status = terminal(current, previous)
            if status:
                return finish(status)

        while steps[-1].index < config.max_iter:
            try:
                x_new, reduced = _propose(problem, samples, config, alpha, beta)
            except ExactRootHit:
                return finish(STATUS_CONVERGED)
            previous = samples[-1]
            current = push(x_new, STATUS_FALLBACK if reduced else STATUS_OK)
            status = terminal(current, previous)
            if status:
                return finish(status)
        return finish(STATUS_EXHAUSTED)
