"""Working-precision real arithmetic that every solver module runs on.

All iteration math uses mpmath arbitrary-precision floats under a single
process-wide working precision (mantissa width in bits, >= 64, default 256).
Precision is a per-run configuration: pick it once, directly or through a
solver config, and every value created afterwards carries it.  There is no
per-value precision and no user-facing rounding control; mpmath rounds to
nearest, so results are deterministic for a fixed precision.  Values are
immutable and safe to share between threads; changing the working precision
while solvers are running concurrently at another precision is not
supported.
"""

from __future__ import annotations

import os
from contextlib import contextmanager
from typing import Iterator, Union

import mpmath
from mpmath import mpf

from .errors import DomainError

Real = mpf
Scalar = Union[mpf, int, float, str]

MIN_PRECISION_BITS = 64
DEFAULT_PRECISION_BITS = 256

PRECISION_ENV_VAR = "BARYITER_PRECISION_BITS"


def _validated_bits(bits) -> int:
    bits = int(bits)
    if bits < MIN_PRECISION_BITS:
        raise ValueError(f"precision must be at least {MIN_PRECISION_BITS} bits, got {bits}")
    return bits


def set_precision(bits: int) -> None:
    """Set the working precision to ``bits`` of mantissa."""
    mpmath.mp.prec = _validated_bits(bits)


def get_precision() -> int:
    """Current working precision in bits."""
    return mpmath.mp.prec


@contextmanager
def precision(bits: int) -> Iterator[None]:
    """Run a block at a temporary working precision."""
    saved = mpmath.mp.prec
    mpmath.mp.prec = _validated_bits(bits)
    try:
        yield
    finally:
        mpmath.mp.prec = saved


def default_precision_bits() -> int:
    """Default precision, overridable through ``BARYITER_PRECISION_BITS``."""
    env = os.environ.get(PRECISION_ENV_VAR)
    if env is not None and env.strip():
        return _validated_bits(env)
    return DEFAULT_PRECISION_BITS


def decimal_digits(bits: int | None = None) -> int:
    """Significant decimal digits representable at ``bits`` (default: current)."""
    if bits is None:
        bits = get_precision()
    return int(bits * 0.3010299956639812)


def real(value: Scalar) -> Real:
    """Convert to an mpf at the working precision.

    Pass decimal strings for values that are not exactly representable in
    binary64; they are parsed directly at the working precision.
    """
    if isinstance(value, mpf):
        return +value
    return mpf(value)


def is_finite(value) -> bool:
    return mpmath.isfinite(value)


def ulp(value: Scalar) -> Real:
    """Unit in the last place of ``value`` at the working precision."""
    x = real(value)
    if x == 0:
        return mpf(2) ** (1 - get_precision())
    return mpf(2) ** (int(mpmath.mag(x)) - get_precision())


def to_decimal(value: Scalar, digits: int) -> str:
    """Scientific-notation decimal string ``d.ddd...e±nn`` with ``digits`` significant digits."""
    if digits < 1:
        raise ValueError("digits must be positive")
    x = real(value)
    if mpmath.isnan(x):
        return "nan"
    if mpmath.isinf(x):
        return "inf" if x > 0 else "-inf"
    if x == 0:
        mantissa = "0" if digits == 1 else "0." + "0" * (digits - 1)
        return mantissa + "e+00"
    s = mpmath.nstr(
        x, digits, strip_zeros=False, min_fixed=1, max_fixed=0, show_zero_exponent=True
    )
    mantissa, _, exponent = s.partition("e")
    sign, magnitude = exponent[0], exponent[1:]
    return f"{mantissa}e{sign}{magnitude.zfill(2)}"


def parse_decimal(text: str) -> Real:
    """Parse a decimal string (plain or scientific) at the working precision."""
    try:
        return mpf(text.strip())
    except ValueError as exc:
        raise ValueError(f"not a decimal number: {text!r}") from exc


# ---------------------------------------------------------------------------
# elementary functions with domain checks

def cos(x: Scalar) -> Real:
    return mpmath.cos(real(x))


def sin(x: Scalar) -> Real:
    return mpmath.sin(real(x))


def exp(x: Scalar) -> Real:
    return mpmath.exp(real(x))


def log(x: Scalar) -> Real:
    x = real(x)
    if x <= 0:
        raise DomainError("log requires a positive argument")
    return mpmath.log(x)


def sqrt(x: Scalar) -> Real:
    x = real(x)
    if x < 0:
        raise DomainError("sqrt requires a non-negative argument")
    return mpmath.sqrt(x)


def powi(x: Scalar, exponent: int) -> Real:
    """Integer power; 0 to a negative power is a domain error."""
    x = real(x)
    exponent = int(exponent)
    if x == 0 and exponent < 0:
        raise DomainError("0 cannot be raised to a negative power")
    return x ** exponent


_ELEMENTARY = {"cos": cos, "sin": sin, "exp": exp, "log": log, "sqrt": sqrt}


def eval_elementary(fn: str, x: Scalar, exponent: int | None = None) -> Real:
    """Dispatch an elementary function by tag: cos, sin, exp, log, sqrt, pow-int."""
    if fn == "pow-int":
        if exponent is None:
            raise ValueError("pow-int requires an exponent")
        return powi(x, exponent)
    if exponent is not None:
        raise ValueError("exponent only applies to pow-int")
    try:
        func = _ELEMENTARY[fn]
    except KeyError:
        raise ValueError(f"unknown elementary function {fn!r}") from None
    return func(x)


set_precision(DEFAULT_PRECISION_BITS)
