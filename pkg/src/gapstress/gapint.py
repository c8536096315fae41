"""Thin-gap integrals int_{|x'|<R} w(x') / (eps + h1 - h2) dx'.

These integrals drive every diagonal entry of the factor matrices.  The
integrand develops a layer of width eps^(1/m) at the origin, so the 1D and
radial paths hand scipy's adaptive quadrature an explicit breakpoint at the
layer scale, while the anisotropic path uses the exact polar reduction onto
[0, pi/2] with angular weight E(theta) and a scaled radial kernel.

Closed forms used as oracles elsewhere:
    d=2, m=2, w=1:       (2/sqrt(eps*tau)) * arctan(R * sqrt(tau/eps))
    d=3 radial, m=2, w=1: (pi/tau) * ln(1 + tau R^2 / eps)
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from gapstress.asympt import gamma_bracket, tanhsinh
from gapstress.geometry import AnisotropicProfile, GapProfileBase, MonomialProfile

__all__ = [
    "GapIntegral",
    "gap_integral",
    "LeadingFit",
    "leading_term_check",
    "radial_kernel_integral",
]

_WEIGHT_DEGREE = {"one": 0, "norm2": 2, "x1sq": 2, "x2sq": 2}


@dataclass
class GapIntegral:
    """Value and error estimate of one thin-gap integral."""

    value: float
    error: float
    eps: float
    weight: str
    d: int
    regime: str

    def __post_init__(self):
        if self.value <= 0.0:
            raise ArithmeticError("gap integral must be positive")


def _weight_1d(weight: str):
    if weight == "one":
        return lambda r: 1.0
    if weight in ("norm2", "x1sq"):
        return lambda r: r * r
    raise ValueError(f"weight '{weight}' not defined for a 1D tangential space")


def _check_regime(profile: GapProfileBase, eps: float, weight: str) -> str:
    d = profile.dm1 + 1
    k = _WEIGHT_DEGREE[weight]
    crit = d - 1 + k
    if eps < 0.0:
        raise ValueError("eps must be >= 0")
    if eps == 0.0 and profile.m >= crit:
        raise ValueError(
            f"the eps = 0 integral diverges for m >= d-1+deg(w) = {crit} "
            f"(here m = {profile.m}, d = {d}, deg(w) = {k}); supply eps > 0"
        )
    if profile.m > crit:
        return f"supercritical (m > {crit}): power-law blow-up"
    if profile.m == crit:
        return f"critical (m = {crit}): logarithmic blow-up"
    return f"subcritical (m < {crit}): finite limit"


def radial_kernel_integral(k: int, m: float, eps: float, upper: float) -> float:
    """int_0^upper t^k / (eps + t^m) dt by panelled Gauss-Legendre.

    After scaling t = eps^(1/m) * u the integrand is smooth with unit scale,
    so geometric panels [0,1], [1,2], [2,4], ... reach machine accuracy with
    a fixed 24-point rule per panel.
    """
    if upper <= 0.0:
        return 0.0
    if eps == 0.0:
        p = k + 1.0 - m
        if p <= 0.0:
            raise ValueError("divergent kernel integral at eps = 0")
        return upper**p / p
    scale = eps ** (1.0 / m)
    big_u = upper / scale
    nodes, weights = np.polynomial.legendre.leggauss(24)
    edges = [0.0, min(1.0, big_u)]
    while edges[-1] < big_u:
        edges.append(min(2.0 * edges[-1], big_u))
    total = 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        mid, rad = 0.5 * (hi + lo), 0.5 * (hi - lo)
        u = mid + rad * nodes
        total += rad * float(np.sum(weights * u**k / (1.0 + u**m)))
    return total * scale ** (k + 1.0) / eps


def _quad_1d(f, lo: float, hi: float, layer: float, tol: float) -> tuple[float, float]:
    pts = [p for p in (layer, 8.0 * layer) if lo < p < hi]
    val, err = quad(f, lo, hi, epsabs=0.0, epsrel=0.1 * tol, limit=300, points=pts or None)
    return val, err


def gap_integral(
    profile: GapProfileBase,
    eps: float,
    weight: str = "one",
    R: float | None = None,
    tol: float = 1e-9,
    lo: float = 0.0,
) -> GapIntegral:
    """Evaluate the thin-gap integral with relative error <= tol.

    weight is one of 'one' (1), 'norm2' (|x'|^2), 'x1sq'/'x2sq' (single
    squared tangential coordinates, anisotropic profiles only).  ``lo``
    restricts the radial range to lo < |x'| < R, used by the splitting
    identity tests.  Divergent eps = 0 requests are rejected with the
    regime named.
    """
    if weight not in _WEIGHT_DEGREE:
        raise ValueError(f"unknown weight '{weight}'")
    R = profile.R if R is None else R
    regime = _check_regime(profile, eps, weight)
    d = profile.dm1 + 1

    if profile.dm1 == 1:
        w = _weight_1d(weight)

        def f(r):
            g = profile.gap(np.array([[r]]))[0]
            return w(r) / (eps + g)

        layer = (eps / max(profile.tau1, 1e-300)) ** (1.0 / profile.m) if eps > 0 else 0.0
        val, err = _quad_1d(f, lo, R, layer, tol)
        val, err = 2.0 * val, 2.0 * err
    elif isinstance(profile, MonomialProfile):
        # radially symmetric: reduce over the angular average of the weight
        ang = 2.0 * math.pi if weight == "one" else (2.0 * math.pi if weight == "norm2" else math.pi)
        k = 1 + _WEIGHT_DEGREE[weight]

        def f(r):
            return ang * r**k / (eps + profile.tau * r**profile.m)

        layer = (eps / profile.tau) ** (1.0 / profile.m) if eps > 0 else 0.0
        val, err = _quad_1d(f, lo, R, layer, tol)
    elif isinstance(profile, AnisotropicProfile):
        if lo != 0.0:
            raise ValueError("radial splitting is not supported on the anisotropic path")
        val, err = _anisotropic_integral(profile, eps, weight, R, tol)
    else:
        raise ValueError(f"no integration path for profile type {type(profile).__name__}")

    if err > tol * abs(val):
        raise ArithmeticError(
            f"gap integral did not reach the requested tolerance: est. rel. error "
            f"{err / abs(val):.2e} > {tol:.1e}"
        )
    return GapIntegral(value=val, error=err, eps=eps, weight=weight, d=d, regime=regime)


def _anisotropic_integral(
    profile: AnisotropicProfile, eps: float, weight: str, R: float, tol: float
) -> tuple[float, float]:
    """Exact polar reduction: (8/m) * int_0^{pi/2} E(t) W(t) J_k(R(t)) dt.

    The substitution u_i = tau_i^(1/m) x_i followed by u = rho cos^{2/m},
    v = rho sin^{2/m} turns the denominator into eps + rho^m with Jacobian
    (2/m) rho E(theta); the weight w contributes the angular factor W and
    raises the kernel power k.
    """
    m = profile.m
    tau1, tau2 = profile.taus
    tt = tau1 * tau2
    p = 2.0 / m
    q = 4.0 / m
    if weight == "one":
        k, pref = 1, 8.0 / (m * tt ** (1.0 / m))
        wfun = lambda c4, s4: 1.0
    elif weight == "norm2":
        k, pref = 3, 8.0 / (m * tt ** (1.0 / m))
        wfun = lambda c4, s4: tau1 ** (-2.0 / m) * c4 + tau2 ** (-2.0 / m) * s4
    elif weight == "x1sq":
        k, pref = 3, 8.0 / (m * tt ** (1.0 / m)) * tau1 ** (-2.0 / m)
        wfun = lambda c4, s4: c4
    else:  # x2sq
        k, pref = 3, 8.0 / (m * tt ** (1.0 / m)) * tau2 ** (-2.0 / m)
        wfun = lambda c4, s4: s4

    r1 = tau1 ** (-2.0 / m)
    r2 = tau2 ** (-2.0 / m)

    def f(da, db):
        s, c = np.sin(da), np.sin(db)
        E = s ** (p - 1.0) * c ** (p + 1.0) + s ** (p + 1.0) * c ** (p - 1.0)
        c4, s4 = c**q, s**q
        Rt = R / np.sqrt(r1 * c4 + r2 * s4)
        J = np.array([radial_kernel_integral(k, m, eps, x) for x in np.atleast_1d(Rt)])
        return E * wfun(c4, s4) * J

    val, diff, _ = tanhsinh(f, 0.0, 0.5 * math.pi, tol=0.01 * tol)
    return pref * val, pref * diff


@dataclass
class LeadingFit:
    """Least-squares fit of gap-integral values against the predicted leading term."""

    coefficient: float
    offset: float
    residual_rel: float
    model: str
    flagged: bool


def predicted_leading_coefficient(profile: GapProfileBase, weight: str) -> float:
    """Closed-form coefficient of the leading term, where one is known.

    Monomial (any d): c = measure * Gamma-type integral; anisotropic d = 3:
    the E/F angular integrals.  Returns the coefficient multiplying
    eps^((d-1+k)/m - 1) (supercritical) or |ln eps| (critical).
    """
    m = profile.m
    d = profile.dm1 + 1
    k = _WEIGHT_DEGREE[weight]
    crit = d - 1 + k
    if isinstance(profile, MonomialProfile):
        tau = profile.tau
        if weight == "one":
            ang = 2.0 if d == 2 else 2.0 * math.pi
        else:
            ang = 2.0 if d == 2 else (2.0 * math.pi if weight == "norm2" else math.pi)
        if m > crit:
            # int_0^inf s^{crit-1}/(1+s^m) ds = (pi/m)/sin(pi*crit/m)
            c_inf = (math.pi / m) / math.sin(math.pi * crit / m)
            return ang * c_inf * tau ** (-crit / m)
        if m == crit:
            return ang / (m * tau)
        raise ValueError("no blow-up in the subcritical regime")
    if isinstance(profile, AnisotropicProfile):
        from gapstress.asympt import angular_integrals

        tau1, tau2 = profile.taus
        tt = tau1 * tau2
        ang = angular_integrals(m, tau1, tau2, profile.R)
        if weight == "one":
            if m == 2.0:
                return math.pi / math.sqrt(tt)
            return 8.0 * gamma_bracket(0, m) * ang.int_E / (m**2 * tt ** (1.0 / m))
        if weight == "norm2":
            if m == 4.0:
                return ang.int_EF / (2.0 * math.sqrt(tt))
            if m > 4.0:
                return 8.0 * gamma_bracket(2, m) * ang.int_EF / (m**2 * tt ** (2.0 / m))
        raise ValueError("no closed-form coefficient for this case")
    raise ValueError("no closed-form coefficient for tabulated profiles")


def leading_term_check(
    profile: GapProfileBase,
    weight: str,
    eps_list,
    tol: float = 1e-9,
    flag_threshold: float = 0.05,
) -> LeadingFit:
    """Fit computed values against the regime's leading function of eps.

    Fits value = c * g(eps) + b with g the predicted leading function
    (eps-power or |ln eps|); returns the multiplicative constant c, the
    offset, and the relative rms residual (flagged above flag_threshold).
    """
    eps_arr = np.asarray(sorted(eps_list, reverse=True), dtype=float)
    if eps_arr.size < 4:
        raise ValueError("need at least 4 sweep points")
    ratios = eps_arr[:-1] / eps_arr[1:]
    if np.any(ratios <= 1.0):
        raise ValueError("eps sweep must be strictly decreasing")

    d = profile.dm1 + 1
    k = _WEIGHT_DEGREE[weight]
    crit = d - 1 + k
    m = profile.m
    if m > crit:
        g = eps_arr ** (crit / m - 1.0)
        model = "power"
    elif m == crit:
        g = np.abs(np.log(eps_arr))
        model = "log"
    else:
        g = np.ones_like(eps_arr)
        model = "const"

    y = np.array([gap_integral(profile, e, weight=weight, tol=tol).value for e in eps_arr])
    if model == "const":
        c, b = float(np.mean(y)), 0.0
        res = y - c
    else:
        A = np.column_stack([g, np.ones_like(g)])
        sol, *_ = np.linalg.lstsq(A, y, rcond=None)
        c, b = float(sol[0]), float(sol[1])
        res = y - A @ sol
    residual_rel = float(np.sqrt(np.mean(res**2)) / np.sqrt(np.mean(y**2)))
    return LeadingFit(
        coefficient=c,
        offset=b,
        residual_rel=residual_rel,
        model=model,
        flagged=residual_rel > flag_threshold,
    )
