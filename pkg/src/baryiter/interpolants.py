"""Evaluate the barycentric interpolants behind the iteration schemes.

These evaluators are diagnostics: the solvers never evaluate an interpolant
away from its nodes, but finite differences of these functions are the
independent check for every derivative estimate the steps use.

Two forms, each in two orientations:

* plain      ``(sum w_i v_i/(t - c_i)) / (sum w_i/(t - c_i))``
* slope-matching (order 2)
             ``(sum [lam_i v_i + (gam_i v_i + lam_i s_i)(t - c_i)]/(t - c_i)^2)
              / (sum [lam_i + gam_i (t - c_i)]/(t - c_i)^2)``

Direct orientation interpolates f over the x nodes (``c=x, v=f, s=f'``);
inverse orientation interpolates x over the f nodes (``c=f, v=x, s=1/f'``).
Both match the stored values at the nodes for any non-zero weights, and the
slope-matching form matches the stored first derivatives as well.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from mpmath import fsum

from .errors import SingularDenominator, ZeroDerivative
from .numerics import Real, Scalar, real
from .weights import HermiteWeights, node_scale, separation_floor


@dataclass(frozen=True)
class Sample:
    """One evaluated point of the target function."""

    x: Real
    f: Real
    f_prime: Real | None = None


ORIENTATIONS = ("direct", "inverse")


def _plain_data(samples: Sequence[Sample], orientation: str):
    if orientation == "direct":
        return [s.x for s in samples], [s.f for s in samples]
    if orientation == "inverse":
        return [s.f for s in samples], [s.x for s in samples]
    raise ValueError(f"orientation must be one of {ORIENTATIONS}, got {orientation!r}")


def _hermite_data(samples: Sequence[Sample], orientation: str):
    nodes, values = _plain_data(samples, orientation)
    if orientation == "direct":
        slopes = [s.f_prime for s in samples]
        if any(sl is None for sl in slopes):
            raise ValueError("slope-matching evaluation needs f_prime on every sample")
    else:
        slopes = []
        for s in samples:
            if s.f_prime is None:
                raise ValueError("inverse slope-matching evaluation needs f_prime on every sample")
            if s.f_prime == 0:
                raise ZeroDerivative("inverse orientation needs non-zero f_prime")
            slopes.append(1 / s.f_prime)
    return nodes, values, slopes


def _near_node(nodes: Sequence[Real], t: Real) -> int | None:
    # Within the separation floor the ratio is meaningless; return the node
    # value instead so evaluation is total away from true poles.
    floor = separation_floor(max(node_scale(nodes), abs(t)))
    for i, c in enumerate(nodes):
        if abs(t - c) <= floor:
            return i
    return None


def eval_plain(
    samples: Sequence[Sample],
    weights: Sequence[Real],
    t: Scalar,
    orientation: str = "direct",
) -> Real:
    """Value of the plain barycentric ratio at ``t``.

    ``t`` is an x value for the direct orientation and an f value for the
    inverse one.  At (or within the separation floor of) a node the paired
    coordinate is returned directly.
    """
    nodes, values = _plain_data(samples, orientation)
    if len(weights) != len(nodes):
        raise ValueError("weight list length must equal the sample count")
    t = real(t)
    hit = _near_node(nodes, t)
    if hit is not None:
        return values[hit]
    terms = [w / (t - c) for w, c in zip(weights, nodes)]
    den = fsum(terms)
    if den == 0:
        raise SingularDenominator(f"denominator sum vanished at t={t}")
    num = fsum(term * v for term, v in zip(terms, values))
    return num / den


def eval_hermite(
    samples: Sequence[Sample],
    hweights: HermiteWeights,
    t: Scalar,
    orientation: str = "direct",
) -> Real:
    """Value of the order-2 (slope-matching) barycentric ratio at ``t``."""
    nodes, values, slopes = _hermite_data(samples, orientation)
    if len(hweights) != len(nodes):
        raise ValueError("weight list length must equal the sample count")
    t = real(t)
    hit = _near_node(nodes, t)
    if hit is not None:
        return values[hit]
    num_terms = []
    den_terms = []
    for lam, gam, c, v, s in zip(hweights.lam, hweights.gam, nodes, values, slopes):
        d = t - c
        d2 = d * d
        num_terms.append((lam * v + (gam * v + lam * s) * d) / d2)
        den_terms.append((lam + gam * d) / d2)
    den = fsum(den_terms)
    if den == 0:
        raise SingularDenominator(f"denominator sum vanished at t={t}")
    return fsum(num_terms) / den


def hermite_node_curvature(
    nodes: Sequence[Real],
    values: Sequence[Real],
    slopes: Sequence[Real],
    hweights: HermiteWeights,
) -> Real:
    """Second derivative of the direct slope-matching interpolant at the newest node.

    ``-(2/lam_n) (gam_n s_n + sum_{k!=n} [(gam_k (v_n - v_k) - lam_k s_k)/(c_n - c_k)
    + lam_k (v_n - v_k)/(c_n - c_k)^2])`` with the newest node last.  Agrees
    with finite differences of ``eval_hermite`` for the squared-product
    weights (checked in the test suite).
    """
    n = len(nodes) - 1
    acc = hweights.gam[n] * slopes[n]
    for k in range(n):
        d = nodes[n] - nodes[k]
        dv = values[n] - values[k]
        acc += (hweights.gam[k] * dv - hweights.lam[k] * slopes[k]) / d
        acc += hweights.lam[k] * dv / (d * d)
    return -2 / hweights.lam[n] * acc
