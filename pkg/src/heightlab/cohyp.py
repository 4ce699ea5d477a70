"""Bound arithmetic for cohomologically hyperbolic maps.

Everything here is exact rational arithmetic: Lyapunov-exponent ratios and
the hyperbolicity classification, the epsilon-m parameter search, the
periodic-point height bound, its version in families, and an empirical
harness for the recursive height inequality along orbits.
"""

from __future__ import annotations

from dataclasses import dataclass

from .certificates import Certificate, fmt_rat
from .exactcore import QQ

__all__ = [
    "DynDegrees",
    "RecursionParams",
    "lyapunov",
    "eps_m_search",
    "per_bound",
    "family_bound",
    "recineq_check",
]


@dataclass(frozen=True)
class DynDegrees:
    """Dynamical degrees d_1, ..., d_k of a self-map (d_0 = 1 implicit)."""

    degrees: tuple

    def __post_init__(self):
        if not self.degrees:
            raise ValueError("at least one dynamical degree is required")
        if any(QQ(d) <= 0 for d in self.degrees):
            raise ValueError("dynamical degrees must be positive")


@dataclass(frozen=True)
class RecursionParams:
    """Exact parameters of the height recursion: eps, m and the derived pair
    alpha = (eps^2 mu_p)^m > 1 > beta = (mu_{p+1}/eps^2)^m >= 0."""

    mu_p: object
    mu_next: object
    eps: object
    m: int
    alpha: object
    beta: object

    def __post_init__(self):
        if not (self.alpha > 1 > self.beta >= 0):
            raise ValueError("parameters violate alpha > 1 > beta >= 0")


def lyapunov(d: DynDegrees | list) -> tuple[list, str]:
    """Cohomological Lyapunov exponents mu_i = d_i/d_{i-1} and the
    hyperbolicity classification.

    The map is p-cohomologically hyperbolic when the maximum of the d_i is
    attained at a unique index p; any tie yields "not cohomologically
    hyperbolic".  (mu_{dim+1} = 0 by convention and is not part of the
    returned list.)
    """
    degrees = d.degrees if isinstance(d, DynDegrees) else tuple(d)
    degrees = tuple(QQ(x) for x in degrees)
    if not degrees:
        raise ValueError("at least one dynamical degree is required")
    if any(x <= 0 for x in degrees):
        raise ValueError("dynamical degrees must be positive")
    mus = []
    prev = QQ(1)
    for x in degrees:
        mus.append(x / prev)
        prev = x
    top = max(degrees)
    argmax = [i for i, x in enumerate(degrees) if x == top]
    if len(argmax) == 1:
        label = f"{argmax[0] + 1}-cohomologically hyperbolic"
    else:
        label = "not cohomologically hyperbolic"
    return mus, label


_EPS_GRID = [QQ((1 << j) - 1, 1 << j) for j in range(2, 21)]
_M_CAP = 4096


def eps_m_search(mu_p, mu_next) -> RecursionParams:
    """First grid point eps in {1 - 2^-j : 2 <= j <= 20} admitting an m with

        (eps^2 mu_p)^m + (mu_{p+1}/eps^2)^m <= (eps mu_p)^m  and
        eps^2 mu_p > 1 > mu_{p+1}/eps^2,

    together with the least such m; everything verified in exact arithmetic.
    """
    mu_p = QQ(mu_p)
    mu_next = QQ(mu_next)
    if not (mu_p > 1 > mu_next >= 0):
        raise ValueError("need mu_p > 1 > mu_{p+1} >= 0")
    for eps in _EPS_GRID:
        a_base = eps * eps * mu_p
        b_base = mu_next / (eps * eps)
        if not (a_base > 1 > b_base):
            continue
        mid_base = eps * mu_p
        a_pow, b_pow, mid_pow = a_base, b_base, mid_base
        for m in range(1, _M_CAP + 1):
            if a_pow + b_pow <= mid_pow:
                return RecursionParams(
                    mu_p=mu_p,
                    mu_next=mu_next,
                    eps=eps,
                    m=m,
                    alpha=a_pow,
                    beta=b_pow,
                )
            a_pow *= a_base
            b_pow *= b_base
            mid_pow *= mid_base
    raise ValueError(
        f"no (eps, m) found on the grid 1 - 2^-j, 2 <= j <= 20, with m <= {_M_CAP}"
    )


def per_bound(alpha, beta, c) -> tuple:
    """Exact (c1, c2, bound) with c1 = c/(1-alpha), c2 = c/(1-beta) and
    bound = (c1 - c2)/(alpha - beta), the height bound for periodic points
    satisfying the two-sided recursion."""
    alpha, beta, c = QQ(alpha), QQ(beta), QQ(c)
    if not (alpha > 1 > beta >= 0):
        raise ValueError("need alpha > 1 > beta >= 0")
    c1 = c / (1 - alpha)
    c2 = c / (1 - beta)
    bound = (c1 - c2) / (alpha - beta)
    return c1, c2, bound


def family_bound(alpha, beta, k, C, h_value) -> dict:
    """The family version: with c = -k h + C the bound is affine in h.

    Returns the bound at the given h together with the exact coefficients
    (C1, C2) such that bound(h) = C1 h + C2.
    """
    alpha, beta, k, C = QQ(alpha), QQ(beta), QQ(k), QQ(C)
    if not (alpha > 1 > beta >= 0):
        raise ValueError("need alpha > 1 > beta >= 0")
    if k < 0:
        raise ValueError("need k >= 0")
    h_value = QQ(h_value)
    c = -k * h_value + C
    c1 = c / (1 - alpha)
    c2 = c / (1 - beta)
    bound = (c1 - c2) / (alpha - beta)
    denom = (1 - alpha) * (1 - beta)
    coeff1 = -k / denom
    coeff2 = C / denom
    if bound != coeff1 * h_value + coeff2:  # defensive
        raise ArithmeticError("affine coefficients disagree with the direct value")
    return {"bound": bound, "C1": coeff1, "C2": coeff2, "c1": c1, "c2": c2}


def recineq_check(orbit_heights, alpha, beta, c, m: int = 1) -> Certificate:
    """Check h_{i+2} + alpha beta h_i - (alpha+beta) h_{i+1} >= c on every
    consecutive triple of orbit heights (samples taken every m iterates).

    Heights are exact rationals (in whatever fixed log unit the caller
    uses); the certificate carries the minimal slack.
    """
    heights = [QQ(h) for h in orbit_heights]
    if len(heights) < 3:
        raise ValueError("need at least three orbit height samples")
    alpha, beta, c = QQ(alpha), QQ(beta), QQ(c)
    slack = None
    for h0, h1, h2 in zip(heights, heights[1:], heights[2:]):
        s = h2 + alpha * beta * h0 - (alpha + beta) * h1 - c
        slack = s if slack is None else min(slack, s)
    return Certificate(
        name=f"recursive-inequality-m{m}",
        expected=f"slack >= 0 against c = {fmt_rat(c)}",
        computed=f"minimal slack {fmt_rat(slack)}",
        source="exact arithmetic",
        passed=slack >= 0,
        detail=f"{len(heights) - 2} triples checked",
    )
