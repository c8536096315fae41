"""Closed-form asymptotic constants and blow-up rate functions.

Rate functions follow the exact case splits in m versus d-1 and d+1; the
splits are genuinely discontinuous, so no continuity across branches is
implied.  The angular integrals live on [0, pi/2] where the base weight
has integrable endpoint singularities of exponent 2/m - 1 > -1 for m > 2;
they are evaluated by tanh-sinh quadrature, which certifies itself by
halving the step until the value is stable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from gapstress.elastic import ElasticityTensor, lame_constants

__all__ = [
    "rho",
    "rho_d",
    "r_eps",
    "rbar_eps",
    "gamma_bracket",
    "tanhsinh",
    "AngularIntegrals",
    "angular_integrals",
    "big_M",
    "GeoConstants",
    "geo_constant",
    "g_star_scalar",
    "k_star_planar",
]


# ---------------------------------------------------------------------------
# Rate functions


def _check_eps(eps: float) -> None:
    if not 0.0 < eps < 1.0:
        raise ValueError(f"eps must lie in (0, 1), got {eps}")


def rho(i: int, d: int, m: float, eps: float) -> float:
    """Blow-up rate rho_i(d, m; eps) for i in {0, 2}.

    eps^((d+i-1)/m - 1) when m > d+i-1, |ln eps| when m = d+i-1, else 1.
    """
    if i not in (0, 2):
        raise ValueError(f"i must be 0 or 2, got {i}")
    _check_eps(eps)
    crit = d + i - 1
    if m > crit:
        return eps ** (crit / m - 1.0)
    if m == crit:
        return abs(math.log(eps))
    return 1.0


def rho_d(d: int, eps: float) -> float:
    """|ln eps| in dimension two, 1 for d >= 3."""
    _check_eps(eps)
    return abs(math.log(eps)) if d == 2 else 1.0


def r_eps(d: int, m: float, eps: float) -> float:
    """Convergence rate of the vector blow-up factors (five regimes)."""
    _check_eps(eps)
    if m > d + 1:
        return eps ** min(0.25, (m - d - 1.0) / m)
    if m == d + 1:
        return 1.0 / abs(math.log(eps))
    if m > d - 1:
        return eps ** min((d + 1.0 - m) / (12.0 * m), (m - d + 1.0) / m)
    if m == d - 1:
        return 1.0 / abs(math.log(eps))
    return eps ** min(1.0 / 6.0, (d - 1.0 - m) / (12.0 * m))


def rbar_eps(d: int, m: float, eps: float) -> float:
    """Convergence rate of the scalar blow-up factor (three regimes)."""
    _check_eps(eps)
    if m > d - 1:
        return eps ** min(0.25, (m - d + 1.0) / m)
    if m == d - 1:
        return 1.0 / abs(math.log(eps))
    return eps ** min(1.0 / 6.0, (d - 1.0 - m) / (12.0 * m))


def gamma_bracket(i: int, m: float) -> float:
    """Gamma(1 - (i+2)/m) * Gamma((i+2)/m), with value 1 exactly at m = i+2.

    For m > i+2 the product equals pi / sin(pi*(i+2)/m) by the reflection
    formula, which is exact in double precision.  The case split is
    discontinuous: the product diverges as m -> (i+2)+ while the m = i+2
    branch is pinned to 1.
    """
    if i not in (0, 2):
        raise ValueError(f"i must be 0 or 2, got {i}")
    if m < i + 2:
        raise ValueError(f"gamma bracket needs m >= {i + 2}, got m={m}")
    if m == i + 2:
        return 1.0
    return math.pi / math.sin(math.pi * (i + 2.0) / m)


# ---------------------------------------------------------------------------
# Tanh-sinh quadrature with a node-doubling certificate


def tanhsinh(f, a: float, b: float, tol: float = 1e-12, max_level: int = 12):
    """Integrate f over (a, b) by the double-exponential rule.

    f receives (da, db), the distances to the two endpoints, which remain
    accurate near the boundary so integrable endpoint singularities
    (exponents > -1) are handled stably.  The step is halved until two
    consecutive values agree within tol*|value|; returns
    (value, last_halving_diff, n_nodes).
    """
    half = 0.5 * (b - a)
    t_max = 4.0

    def contrib(ts: np.ndarray) -> tuple[float, int]:
        with np.errstate(over="ignore", under="ignore"):
            u = 0.5 * np.pi * np.sinh(ts)
            da = half * 2.0 / (1.0 + np.exp(-2.0 * u))
            db = half * 2.0 / (1.0 + np.exp(2.0 * u))
            w = half * 0.5 * np.pi * np.cosh(ts) / np.cosh(u) ** 2
        keep = (da > 0.0) & (db > 0.0) & np.isfinite(w) & (w > 0.0)
        da, db, w = da[keep], db[keep], w[keep]
        if da.size == 0:
            return 0.0, 0
        return float(np.sum(w * f(da, db))), int(da.size)

    h = 0.5
    s0, n_nodes = contrib(np.arange(-t_max, t_max + 0.5 * h, h))
    value = h * s0
    diff = math.inf
    for _ in range(max_level):
        h *= 0.5
        s_new, n = contrib(np.arange(-t_max + h, t_max, 2.0 * h))
        n_nodes += n
        prev = value
        value = 0.5 * prev + h * s_new
        diff = abs(value - prev)
        if diff <= tol * max(abs(value), 1e-300):
            break
    return value, diff, n_nodes


# ---------------------------------------------------------------------------
# Angular functions on [0, pi/2]
#
# E(t) = sin^{2/m-1} cos^{2/m+1} + sin^{2/m+1} cos^{2/m-1}
# F(t) = (tau2/tau1)^{1/m} cos^{4/m} + (tau1/tau2)^{1/m} sin^{4/m}
# R(t) = R * (tau1^{-2/m} cos^{4/m} + tau2^{-2/m} sin^{4/m})^{-1/2}
#
# Inside the quadrature sin and cos are evaluated from the distances to the
# endpoints (sin t = sin da, cos t = sin db), which keeps the singular
# factors accurate arbitrarily close to the boundary.


def E_theta(theta, m: float):
    s, c = np.sin(theta), np.cos(theta)
    p = 2.0 / m
    return s ** (p - 1.0) * c ** (p + 1.0) + s ** (p + 1.0) * c ** (p - 1.0)


def F_theta(theta, m: float, tau1: float, tau2: float):
    s, c = np.sin(theta), np.cos(theta)
    q = 4.0 / m
    return (tau2 / tau1) ** (1.0 / m) * c**q + (tau1 / tau2) ** (1.0 / m) * s**q


def R_theta(theta, m: float, tau1: float, tau2: float, R: float):
    s, c = np.sin(theta), np.cos(theta)
    q = 4.0 / m
    return R / np.sqrt(tau1 ** (-2.0 / m) * c**q + tau2 ** (-2.0 / m) * s**q)


@dataclass
class AngularIntegrals:
    """The six angular integrals over [0, pi/2] and their stability data.

    R2m and R4m denote the weights R(theta)^{2-m} and R(theta)^{4-m}.  Each
    halving_diff records the change produced by the final node doubling.
    """

    m: float
    tau1: float
    tau2: float
    R: float
    int_E: float
    int_EF: float
    int_E_lnR: float
    int_EF_lnR: float
    int_E_R2m: float
    int_EF_R4m: float
    halving_diffs: dict
    n_nodes: dict

    def as_dict(self) -> dict:
        return {
            "int_E": self.int_E,
            "int_EF": self.int_EF,
            "int_E_lnR": self.int_E_lnR,
            "int_EF_lnR": self.int_EF_lnR,
            "int_E_R2m": self.int_E_R2m,
            "int_EF_R4m": self.int_EF_R4m,
        }


def angular_integrals(
    m: float, tau1: float, tau2: float, R: float, tol: float = 1e-12
) -> AngularIntegrals:
    """Evaluate the six angular integrals by tanh-sinh quadrature.

    All integrands share the factor E whose endpoint exponent 2/m - 1 is
    integrable for every m >= 2; convergence is certified by requiring the
    last step halving to move each value by less than tol relatively.
    """
    if m < 2.0:
        raise ValueError(f"m must be >= 2, got {m}")
    if tau1 <= 0.0 or tau2 <= 0.0 or R <= 0.0:
        raise ValueError("tau1, tau2, R must be positive")
    p = 2.0 / m
    q = 4.0 / m
    f21 = (tau2 / tau1) ** (1.0 / m)
    f12 = (tau1 / tau2) ** (1.0 / m)
    r1 = tau1 ** (-2.0 / m)
    r2 = tau2 ** (-2.0 / m)

    def parts(da, db):
        s = np.sin(da)   # theta = da, pi/2 - theta = db
        c = np.sin(db)
        E = s ** (p - 1.0) * c ** (p + 1.0) + s ** (p + 1.0) * c ** (p - 1.0)
        F = f21 * c**q + f12 * s**q
        Rt = R / np.sqrt(r1 * c**q + r2 * s**q)
        return E, F, Rt

    specs = {
        "int_E": lambda E, F, Rt: E,
        "int_EF": lambda E, F, Rt: E * F,
        "int_E_lnR": lambda E, F, Rt: E * np.log(Rt),
        "int_EF_lnR": lambda E, F, Rt: E * F * np.log(Rt),
        "int_E_R2m": lambda E, F, Rt: E * Rt ** (2.0 - m),
        "int_EF_R4m": lambda E, F, Rt: E * F * Rt ** (4.0 - m),
    }
    vals, diffs, nodes = {}, {}, {}
    for name, g in specs.items():
        v, diff, n = tanhsinh(
            lambda da, db, g=g: g(*parts(da, db)), 0.0, 0.5 * math.pi, tol=tol
        )
        rel = diff / max(abs(v), 1e-300)
        if rel > max(tol * 100.0, 1e-9):
            raise ArithmeticError(
                f"angular integral {name} did not converge (last halving moved "
                f"the value by {rel:.2e} relative)"
            )
        vals[name], diffs[name], nodes[name] = v, diff, n
    return AngularIntegrals(
        m=m, tau1=tau1, tau2=tau2, R=R, halving_diffs=diffs, n_nodes=nodes, **vals
    )


# ---------------------------------------------------------------------------
# Definite constants


def big_M(which: int, m: float, tau1: float, tau2: float) -> float:
    """M1 = 2*pi*Gamma[2/m]/(m*tau), M2 = pi*Gamma[4/m]/(m*tau^2), tau = (tau1*tau2)^(1/m)."""
    tau = (tau1 * tau2) ** (1.0 / m)
    if which == 1:
        if m < 2.0:
            raise ValueError(f"M1 needs m >= 2, got {m}")
        return 2.0 * math.pi * gamma_bracket(0, m) / (m * tau)
    if which == 2:
        if m < 4.0:
            raise ValueError(f"M2 needs m >= 4, got {m}")
        return math.pi * gamma_bracket(2, m) / (m * tau**2)
    raise ValueError(f"which must be 1 or 2, got {which}")


@dataclass
class GeoConstants:
    """K*_m^alpha and G*_m^alpha for one basis index alpha (d = 3)."""

    alpha: int
    m: float
    k_star: float
    g_star: float
    branch: str
    m_star: float
    m_star_supplied: bool


def geo_constant(
    alpha: int,
    m: float,
    tensor: ElasticityTensor,
    tau1: float,
    tau2: float,
    R: float,
    m_star: float | None = None,
) -> GeoConstants:
    """Assemble K*_m^alpha then G*_m^alpha for the 3D anisotropic profile.

    The energy constant M*_3^alpha must be supplied externally (it involves
    the touching-domain solution); when absent the chain is evaluated with
    M* = 0 and reported as such.  Branches: alpha <= 3 uses m = 2 / m > 2,
    alpha >= 4 uses m = 4 / m > 4; G is affine in M* with slope
    m*pi / (4 L3^alpha M_i int).
    """
    if tensor.dim != 3:
        raise ValueError("geo_constant is defined for the d = 3 tensor")
    if not 1 <= alpha <= 6:
        raise ValueError(f"alpha must be in 1..6, got {alpha}")
    supplied = m_star is not None
    ms = float(m_star) if supplied else 0.0
    L = lame_constants(tensor)[alpha - 1]
    ang = angular_integrals(m, tau1, tau2, R)
    tt = tau1 * tau2
    if alpha <= 3:
        if m < 2.0:
            raise ValueError("alpha <= 3 branch needs m >= 2")
        if m == 2.0:
            k = ms + 4.0 * L * ang.int_E_lnR / math.sqrt(tt)
            branch = "alpha<=3, m=2"
        else:
            k = ms - 8.0 * L * ang.int_E_R2m / (m * (m - 2.0) * tt ** (1.0 / m))
            branch = "alpha<=3, m>2"
        g = m * math.pi * k / (4.0 * L * big_M(1, m, tau1, tau2) * ang.int_E)
    else:
        if m < 4.0:
            raise ValueError("alpha >= 4 branch needs m >= 4")
        if m == 4.0:
            k = ms + L * ang.int_EF_lnR / math.sqrt(tt)
            branch = "alpha>=4, m=4"
        else:
            k = ms - 4.0 * L * ang.int_EF_R4m / (m * (m - 4.0) * tt ** (2.0 / m))
            branch = "alpha>=4, m>4"
        g = m * math.pi * k / (4.0 * L * big_M(2, m, tau1, tau2) * ang.int_EF)
    return GeoConstants(
        alpha=alpha, m=m, k_star=k, g_star=g, branch=branch, m_star=ms, m_star_supplied=supplied
    )


def g_star_scalar(m: float, tau1: float, tau2: float, R: float, m_r_star: float) -> float:
    """Scalar geometry constant G*_m of the conductivity problem (d = 3)."""
    ang = angular_integrals(m, tau1, tau2, R)
    m1 = big_M(1, m, tau1, tau2)
    tt = tau1 * tau2
    if m == 2.0:
        return (m_r_star + 4.0 * ang.int_E_lnR / math.sqrt(tt)) / m1
    return (
        m
        * math.pi
        / (4.0 * m1 * ang.int_E)
        * (m_r_star - 8.0 * ang.int_E_R2m / (m * (m - 2.0) * tt ** (1.0 / m)))
    )


def k_star_planar(m_value: float, m: float, tau: float, R: float, L: float = 1.0) -> float:
    """R-independent combination for d = 2: M(R) - 2*L*R^(1-m)/(tau*(m-1)).

    In two dimensions the gap integral over |x'| < R of 1/(eps + tau|x'|^m)
    expands as c_m * tau^(-1/m) * eps^(1/m-1) - 2 R^(1-m)/(tau*(m-1)) + o(1),
    so subtracting the R-dependent tail from the measured energy constant
    M(R) yields a quantity independent of the window radius.
    """
    if m < 2.0:
        raise ValueError(f"m must be >= 2, got {m}")
    return m_value - 2.0 * L * R ** (1.0 - m) / (tau * (m - 1.0))
