"""Two-inclusion geometry: m-convex gap profiles and hypothesis checks.

The narrow region between the inclusions is bounded by the graphs
x_d = eps + h1(x') above and x_d = h2(x') below, with h1 - h2 growing like
|x'|^m near the closest point.  Profiles expose h1, h2 and their first
three tangential derivative tensors; the gap thickness is
delta(x') = eps + h1(x') - h2(x').
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.interpolate import CubicSpline

__all__ = [
    "GapProfileBase",
    "MonomialProfile",
    "AnisotropicProfile",
    "TabulatedProfile",
    "HypothesisReport",
    "DomainSpec",
    "delta",
    "validate_hypotheses",
    "load_config",
]


def _as_points(xp: np.ndarray, dm1: int) -> np.ndarray:
    """Coerce tangential coordinates to shape (n, dm1)."""
    xp = np.atleast_1d(np.asarray(xp, dtype=float))
    if dm1 == 1 and xp.ndim == 1:
        xp = xp[:, None]
    if xp.ndim == 1 and xp.shape[0] == dm1:
        xp = xp[None, :]
    if xp.ndim != 2 or xp.shape[1] != dm1:
        raise ValueError(f"expected points of shape (n, {dm1}), got {xp.shape}")
    return xp


class GapProfileBase:
    """Common interface: h1/h2 values and tangential derivatives up to order 3.

    Derivative conventions: grad has shape (n, dm1), hess (n, dm1, dm1),
    third (n, dm1, dm1, dm1).  All shipped profiles are even in each
    tangential coordinate, so h1(0) = h2(0) = 0 at the closest point.
    """

    m: float
    R: float
    dm1: int
    tau1: float
    tau2: float
    tau3: float
    tau4: float

    def h1(self, xp):  # pragma: no cover - abstract
        raise NotImplementedError

    def h2(self, xp):  # pragma: no cover - abstract
        raise NotImplementedError

    def h_der(self, which: int, order: int, xp):  # pragma: no cover - abstract
        raise NotImplementedError

    # Convenience wrappers -------------------------------------------------
    def gap(self, xp) -> np.ndarray:
        """h1 - h2 (the epsilon = 0 thickness)."""
        return self.h1(xp) - self.h2(xp)

    def delta(self, eps: float, xp) -> np.ndarray:
        xp = _as_points(xp, self.dm1)
        r = np.sqrt(np.sum(xp**2, axis=1))
        if np.any(r > 2.0 * self.R * (1.0 + 1e-12)):
            raise ValueError("tangential point outside |x'| <= 2R")
        return eps + self.gap(xp)

    def grad_delta(self, xp) -> np.ndarray:
        return self.h_der(1, 1, xp) - self.h_der(2, 1, xp)

    def hess_delta(self, xp) -> np.ndarray:
        return self.h_der(1, 2, xp) - self.h_der(2, 2, xp)

    def third_delta(self, xp) -> np.ndarray:
        return self.h_der(1, 3, xp) - self.h_der(2, 3, xp)


def _pow_abs(x: np.ndarray, p: float) -> np.ndarray:
    """|x|^p with the convention 0^p = 0 for p > 0."""
    out = np.zeros_like(x)
    nz = x != 0.0
    out[nz] = np.abs(x[nz]) ** p
    return out


def _coordwise_derivatives(xp: np.ndarray, coeffs: np.ndarray, m: float, order: int) -> np.ndarray:
    """Derivative tensors of sum_i coeffs[i] * |x_i|^m (separable form)."""
    n, dm1 = xp.shape
    if order == 0:
        return np.sum(coeffs[None, :] * _pow_abs(xp, m), axis=1)
    if order == 1:
        return coeffs[None, :] * m * np.sign(xp) * _pow_abs(xp, m - 1.0)
    if order == 2:
        out = np.zeros((n, dm1, dm1))
        diag = coeffs[None, :] * m * (m - 1.0) * _pow_abs(xp, m - 2.0)
        idx = np.arange(dm1)
        out[:, idx, idx] = diag
        return out
    if order == 3:
        out = np.zeros((n, dm1, dm1, dm1))
        diag = coeffs[None, :] * m * (m - 1.0) * (m - 2.0) * np.sign(xp) * _pow_abs(xp, m - 3.0)
        idx = np.arange(dm1)
        out[:, idx, idx, idx] = diag
        return out
    raise ValueError(f"order {order} not supported")


def _radial_derivatives(xp: np.ndarray, coeff: float, m: float, order: int) -> np.ndarray:
    """Derivative tensors of coeff * |x'|^m (euclidean norm)."""
    n, dm1 = xp.shape
    r2 = np.sum(xp**2, axis=1)
    r = np.sqrt(r2)
    if order == 0:
        return coeff * _pow_abs(r, m)
    if order == 1:
        f = coeff * m * _pow_abs(r, m - 2.0)
        return f[:, None] * xp
    eye = np.eye(dm1)
    if order == 2:
        f1 = coeff * m * _pow_abs(r, m - 2.0)
        f2 = coeff * m * (m - 2.0) * _pow_abs(r, m - 4.0)
        return f1[:, None, None] * eye[None, :, :] + f2[:, None, None] * (
            xp[:, :, None] * xp[:, None, :]
        )
    if order == 3:
        f2 = coeff * m * (m - 2.0) * _pow_abs(r, m - 4.0)
        f3 = coeff * m * (m - 2.0) * (m - 4.0) * _pow_abs(r, m - 6.0)
        out = np.zeros((n, dm1, dm1, dm1))
        for i in range(dm1):
            for j in range(dm1):
                for k in range(dm1):
                    out[:, i, j, k] = f2 * (
                        eye[i, j] * xp[:, k] + eye[i, k] * xp[:, j] + eye[j, k] * xp[:, i]
                    ) + f3 * xp[:, i] * xp[:, j] * xp[:, k]
        return out
    raise ValueError(f"order {order} not supported")


@dataclass(frozen=True)
class MonomialProfile(GapProfileBase):
    """h1 - h2 = tau * |x'|^m with the split h1 = split*tau*|x'|^m.

    Works for any tangential dimension; |x'| is the euclidean norm, so in
    2D this is tau*|x1|^m and in 3D the radially symmetric profile.
    """

    m: float
    tau: float
    R: float
    dm1: int = 1
    split: float = 0.5
    tau3: float = 0.0
    tau4: float = 0.0

    def __post_init__(self):
        if self.m < 2.0:
            raise ValueError(f"m must be >= 2, got {self.m}")
        if self.tau <= 0.0 or self.R <= 0.0:
            raise ValueError("tau and R must be positive")
        if not 0.0 < self.split < 1.0:
            raise ValueError("split must lie in (0, 1)")
        if self.tau3 == 0.0:
            # valid for any split: |grad^j h_i| / |x|^{m-j} <= tau * m * m for j = 1, 2
            object.__setattr__(self, "tau3", self.tau * self.m * self.m)
        if self.tau4 == 0.0:
            object.__setattr__(
                self, "tau4", self.tau * (2.0 * self.R) ** self.m * (1.0 + self.m**2)
            )

    @property
    def tau1(self) -> float:
        return self.tau

    @property
    def tau2(self) -> float:
        return self.tau

    def _coeff(self, which: int) -> float:
        return self.split * self.tau if which == 1 else -(1.0 - self.split) * self.tau

    def h1(self, xp):
        return self.h_der(1, 0, xp)

    def h2(self, xp):
        return self.h_der(2, 0, xp)

    def h_der(self, which: int, order: int, xp):
        xp = _as_points(xp, self.dm1)
        return _radial_derivatives(xp, self._coeff(which), self.m, order)


@dataclass(frozen=True)
class AnisotropicProfile(GapProfileBase):
    """h1 - h2 = sum_i tau_i |x_i|^m over two tangential coordinates (d = 3)."""

    m: float
    taus: tuple[float, float]
    R: float
    split: float = 0.5
    tau3: float = 0.0
    tau4: float = 0.0
    dm1: int = field(init=False, default=2)

    def __post_init__(self):
        if self.m < 2.0:
            raise ValueError(f"m must be >= 2, got {self.m}")
        if min(self.taus) <= 0.0 or self.R <= 0.0:
            raise ValueError("taus and R must be positive")
        if self.tau3 == 0.0:
            object.__setattr__(self, "tau3", max(self.taus) * self.m * max(1.0, self.m - 1.0) * 2.0)
        if self.tau4 == 0.0:
            object.__setattr__(
                self, "tau4", sum(self.taus) * (2.0 * self.R) ** self.m * (1.0 + self.m**2)
            )

    @property
    def tau1(self) -> float:
        # min over the unit circle of sum tau_i |w_i|^m
        if self.m == 2.0:
            return min(self.taus)
        w = np.linspace(0.0, np.pi / 2, 2001)
        vals = self.taus[0] * np.cos(w) ** self.m + self.taus[1] * np.sin(w) ** self.m
        return float(vals.min()) * (1.0 - 1e-5)  # sampled minimum, padded downward

    @property
    def tau2(self) -> float:
        return max(self.taus)

    def _coeffs(self, which: int) -> np.ndarray:
        s = self.split if which == 1 else -(1.0 - self.split)
        return s * np.asarray(self.taus)

    def h1(self, xp):
        return self.h_der(1, 0, xp)

    def h2(self, xp):
        return self.h_der(2, 0, xp)

    def h_der(self, which: int, order: int, xp):
        xp = _as_points(xp, self.dm1)
        return _coordwise_derivatives(xp, self._coeffs(which), self.m, order)


@dataclass(frozen=True)
class TabulatedProfile(GapProfileBase):
    """Sampled 1D profiles interpolated by cubic splines (d = 2 only).

    Samples must cover [0, 2R]; the profile is extended evenly to negative
    x', so h(-x) = h(x) by construction.  Spline differentiation supplies
    the derivatives; third derivatives are piecewise constant.
    """

    x_samples: tuple
    h1_samples: tuple
    h2_samples: tuple
    m: float
    R: float
    tau1: float
    tau2: float
    tau3: float
    tau4: float
    dm1: int = field(init=False, default=1)

    def __post_init__(self):
        x = np.asarray(self.x_samples, dtype=float)
        if x[0] != 0.0 or x[-1] < 2.0 * self.R * (1.0 - 1e-12):
            raise ValueError("samples must start at 0 and cover [0, 2R]")
        # even extension => zero odd derivatives at x = 0
        s1 = CubicSpline(x, np.asarray(self.h1_samples, dtype=float), bc_type=((1, 0.0), "natural"))
        s2 = CubicSpline(x, np.asarray(self.h2_samples, dtype=float), bc_type=((1, 0.0), "natural"))
        object.__setattr__(self, "_s1", s1)
        object.__setattr__(self, "_s2", s2)

    def _spline(self, which: int) -> CubicSpline:
        return self._s1 if which == 1 else self._s2

    def h1(self, xp):
        return self.h_der(1, 0, xp)

    def h2(self, xp):
        return self.h_der(2, 0, xp)

    def h_der(self, which: int, order: int, xp):
        xp = _as_points(xp, 1)
        x = xp[:, 0]
        s = self._spline(which)
        val = s(np.abs(x), nu=order)
        if order % 2 == 1:
            val = val * np.sign(x)
        n = x.shape[0]
        return val.reshape((n,) + (1,) * order)


def delta(profile: GapProfileBase, eps: float, xp) -> np.ndarray:
    """Gap thickness delta(x') = eps + h1(x') - h2(x') for |x'| <= 2R."""
    return profile.delta(eps, xp)


@dataclass
class HypothesisReport:
    """Outcome of the sampled (H1)-(H3) checks plus the evenness check."""

    h1_lower_ok: bool
    h1_upper_ok: bool
    h2_ok: bool
    even_ok: bool
    h3_proxy: float
    worst_points: dict
    measured: dict

    @property
    def all_ok(self) -> bool:
        return self.h1_lower_ok and self.h1_upper_ok and self.h2_ok and self.even_ok


def _sample_grid(profile: GapProfileBase, n: int) -> np.ndarray:
    lim = 2.0 * profile.R
    if profile.dm1 == 1:
        x = np.linspace(-lim, lim, n)
        x = x[np.abs(x) > 1e-9 * lim]
        return x[:, None]
    k = int(np.sqrt(n))
    g = np.linspace(-lim, lim, k)
    xx, yy = np.meshgrid(g, g)
    pts = np.column_stack([xx.ravel(), yy.ravel()])
    r = np.sqrt(np.sum(pts**2, axis=1))
    keep = (r > 1e-9 * lim) & (r < lim)
    return pts[keep]


def validate_hypotheses(profile: GapProfileBase, n_samples: int = 10_000) -> HypothesisReport:
    """Check (H1), (H2) and evenness on a sample grid; (H3) is report-only.

    (H1): tau1*|x'|^m <= h1-h2 <= tau2*|x'|^m on |x'| < 2R.
    (H2): |grad^j h_i| <= tau3*|x'|^{m-j} for j = 1, 2.
    (H3) has no numeric bound in general, so the measured discrete C^2
    seminorm proxy is reported and never fails on its own.
    """
    pts = _sample_grid(profile, n_samples)
    r = np.sqrt(np.sum(pts**2, axis=1))
    rm = r**profile.m
    gap = profile.gap(pts)

    ratio = gap / rm
    tol = 1e-9
    i_lo = int(np.argmin(ratio))
    i_hi = int(np.argmax(ratio))
    h1_lower_ok = bool(ratio[i_lo] >= profile.tau1 * (1.0 - 1e-6) - tol)
    h1_upper_ok = bool(ratio[i_hi] <= profile.tau2 * (1.0 + 1e-6) + tol)

    h2_ok = True
    h2_worst = (0.0, None)
    for which in (1, 2):
        for j in (1, 2):
            dj = profile.h_der(which, j, pts)
            mag = np.sqrt(np.sum(dj.reshape(dj.shape[0], -1) ** 2, axis=1))
            q = mag / r ** (profile.m - j)
            i = int(np.argmax(q))
            if q[i] > h2_worst[0]:
                h2_worst = (float(q[i]), pts[i])
            if q[i] > profile.tau3 * (1.0 + 1e-6) + tol:
                h2_ok = False

    even_ok = True
    for c in range(profile.dm1):
        refl_c = pts.copy()
        refl_c[:, c] *= -1.0
        if np.abs(profile.gap(refl_c) - gap).max() > 1e-10 * max(1.0, np.abs(gap).max()):
            even_ok = False

    # C^2 seminorm proxy: sup of the Hessian magnitude over the sample grid
    h3 = 0.0
    for which in (1, 2):
        hess = profile.h_der(which, 2, pts)
        h3 = max(h3, float(np.abs(hess).max()))

    return HypothesisReport(
        h1_lower_ok=h1_lower_ok,
        h1_upper_ok=h1_upper_ok,
        h2_ok=h2_ok,
        even_ok=even_ok,
        h3_proxy=h3,
        worst_points={
            "h1_lower": pts[i_lo].tolist(),
            "h1_upper": pts[i_hi].tolist(),
            "h2": None if h2_worst[1] is None else h2_worst[1].tolist(),
        },
        measured={
            "h1_ratio_min": float(ratio[i_lo]),
            "h1_ratio_max": float(ratio[i_hi]),
            "h2_quotient_max": h2_worst[0],
            "h3_proxy": h3,
        },
    )


# ---------------------------------------------------------------------------
# Domain description


def _scalar_data(name: str):
    table = {
        "x1": lambda x: x[:, 0],
        "x2": lambda x: x[:, 1],
        "x1x2": lambda x: x[:, 0] * x[:, 1],
        "one": lambda x: np.ones(x.shape[0]),
        "zero": lambda x: np.zeros(x.shape[0]),
    }
    if name not in table:
        raise KeyError(f"unknown scalar boundary datum '{name}'")
    return table[name]


def _vector_data(name: str):
    def stretch(c):
        def f(x):
            out = np.zeros_like(x)
            out[:, c] = x[:, c]
            return out

        return f

    table = {
        "psi1": lambda x: np.column_stack([np.ones(x.shape[0]), np.zeros(x.shape[0])]),
        "psi2": lambda x: np.column_stack([np.zeros(x.shape[0]), np.ones(x.shape[0])]),
        "psi3": lambda x: np.column_stack([x[:, 1], -x[:, 0]]),
        "stretch_x1": stretch(0),
        "stretch_x2": stretch(1),
        "shear": lambda x: np.column_stack([x[:, 1], x[:, 0]]),
        "zero": lambda x: np.zeros_like(x),
    }
    if name not in table:
        raise KeyError(f"unknown vector boundary datum '{name}'")
    return table[name]


@dataclass
class DomainSpec:
    """Two stacked inclusions in a square, separated by a thin gap.

    The inclusions are caps bounded near the origin by the profile graphs
    (upper inclusion above x_d = eps + h1, lower below x_d = h2) and closed
    by tangent circular arcs starting where the graph slope reaches
    ``junction_slope``.  The outer boundary is the square [-L, L]^2.
    Only d = 2 is meshable; d = 3 enters through closed forms only.
    """

    profile: GapProfileBase
    eps: float
    d: int = 2
    outer: float = 4.0
    phi: str = "x2"
    junction_slope: float = 1.0

    def __post_init__(self):
        if self.eps <= 0.0:
            raise ValueError(f"eps must be positive, got {self.eps}")
        if self.d != self.profile.dm1 + 1:
            raise ValueError("profile tangential dimension does not match d")
        if self.d == 2:
            xc = self.graph_halfwidth()
            if xc <= self.profile.R * (1.0 + 1e-9):
                raise ValueError(
                    "cap junction falls inside the gap region; decrease R or "
                    "increase junction_slope"
                )
            top = self.cap_center_radius(+1)
            if top[0][1] + top[1] > self.outer * 0.95:
                raise ValueError("inclusion too close to the outer boundary")

    # Cap geometry (d = 2) -------------------------------------------------
    def graph_halfwidth(self) -> float:
        """x' where the graph slope reaches junction_slope (cap junction)."""
        p = self.profile
        lo, hi = 1e-9, 4.0 * p.R
        want = self.junction_slope

        def slope(x):
            g = p.h_der(1, 1, np.array([[x]]))[0, 0]
            g2 = p.h_der(2, 1, np.array([[x]]))[0, 0]
            return max(abs(g), abs(g2))

        if slope(hi) < want:
            return hi
        for _ in range(80):
            mid = 0.5 * (lo + hi)
            if slope(mid) < want:
                lo = mid
            else:
                hi = mid
        return 0.5 * (lo + hi)

    def cap_center_radius(self, side: int) -> tuple[np.ndarray, float]:
        """Center and radius of the closing arc for the upper (+1) or lower (-1) cap."""
        p = self.profile
        xc = self.graph_halfwidth()
        which = 1 if side > 0 else 2
        y = p.h_der(which, 0, np.array([[xc]]))[0] + (self.eps if side > 0 else 0.0)
        s = p.h_der(which, 1, np.array([[xc]]))[0, 0]
        s = abs(s) if side > 0 else -abs(s)
        # center on the symmetry axis along the normal through the junction
        t = xc / s
        cy = float(y + t)
        rad = float(np.hypot(xc, t))
        return np.array([0.0, cy]), rad

    def boundary_datum(self, kind: str):
        """Named boundary field; kind is 'scalar' or 'vector'."""
        if kind == "scalar":
            return _scalar_data(self.phi)
        return _vector_data(self.phi)


def load_config(path: str | Path) -> dict:
    """Read a declarative domain config (JSON) and build the objects.

    Keys: d, m, tau (scalar or pair), epsilon, R, outer, phi; optional
    n_gap, h_far, split, lam, mu.  Returns a dict with 'domain', 'tensor',
    and the mesh parameters.
    """
    cfg = json.loads(Path(path).read_text())
    d = int(cfg.get("d", 2))
    m = float(cfg.get("m", 2.0))
    tau = cfg.get("tau", 1.0)
    R = float(cfg.get("R", 0.5))
    split = float(cfg.get("split", 0.5))
    if isinstance(tau, (list, tuple)):
        profile: GapProfileBase = AnisotropicProfile(m=m, taus=tuple(tau), R=R, split=split)
    else:
        profile = MonomialProfile(m=m, tau=float(tau), R=R, dm1=d - 1, split=split)
    domain = DomainSpec(
        profile=profile,
        eps=float(cfg.get("epsilon", 1e-2)),
        d=d,
        outer=float(cfg.get("outer", 4.0)),
        phi=str(cfg.get("phi", "x2")),
    )
    from gapstress.elastic import ElasticityTensor

    tensor = ElasticityTensor(lam=float(cfg.get("lam", 1.0)), mu=float(cfg.get("mu", 1.0)), dim=d)
    return {
        "domain": domain,
        "tensor": tensor,
        "n_gap": int(cfg.get("n_gap", 6)),
        "h_far": float(cfg.get("h_far", 0.35)),
        "raw": cfg,
    }
