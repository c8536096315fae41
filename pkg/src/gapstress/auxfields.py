"""Explicit auxiliary fields in the narrow region.

The scalar profile vbar(x', x_d) = (x_d - h2(x')) / (eps + h1(x') - h2(x'))
interpolates 0 -> 1 across the gap.  The vector fields

    u1^alpha = psi_alpha * vbar + F_alpha,
    u2^alpha = psi_alpha * (1 - vbar) - F_alpha,

with the correction

    F_alpha = (lam+mu)/mu * f(vbar) * psi_alpha^d * sum_i d_i(delta) e_i
            + (lam+mu)/(lam+2mu) * f(vbar) * sum_i psi_alpha^i d_i(delta) e_d,
    f(v) = (v - 1/2)^2 / 2 - 1/8,

capture the dominant part of the gradients of the domain fields v_i^alpha.
All evaluators are closed-form inside Omega_2R (values, gradients, and
second derivatives), so the Lame operator can be applied exactly.  The
touching-domain variants are the same formulas with eps = 0.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from gapstress.elastic import ElasticityTensor, RigidMotion, rigid_basis
from gapstress.geometry import GapProfileBase, _as_points

__all__ = ["f_of_v", "vbar", "vbar_grad", "AuxField"]


def f_of_v(v):
    """f(v) = (v - 1/2)^2 / 2 - 1/8; vanishes at v = 0, 1, minimum -1/8."""
    v = np.asarray(v, dtype=float)
    if np.any(v < -1e-12) or np.any(v > 1.0 + 1e-12):
        raise ValueError("f is used on vbar values, which lie in [0, 1]")
    return 0.5 * (v - 0.5) ** 2 - 0.125


class _SlabPoints:
    """Points inside Omega_2R split into tangential / vertical parts."""

    def __init__(self, profile: GapProfileBase, eps: float, x: np.ndarray, tol: float = 1e-9):
        d = profile.dm1 + 1
        x = np.asarray(x, dtype=float)
        if x.ndim == 1:
            x = x[None, :]
        if x.ndim != 2 or x.shape[1] != d:
            raise ValueError(f"expected points of shape (n, {d})")
        self.x = x
        self.xp = x[:, :-1]
        self.xd = x[:, -1]
        r = np.sqrt(np.sum(self.xp**2, axis=1))
        if np.any(r > 2.0 * profile.R * (1.0 + 1e-12)):
            raise ValueError("point outside |x'| <= 2R")
        lo = profile.h2(self.xp)
        hi = eps + profile.h1(self.xp)
        slack = tol * (hi - lo)
        if np.any(self.xd < lo - slack) or np.any(self.xd > hi + slack):
            raise ValueError("point outside the gap slab")


def _pad_grad(g_t: np.ndarray, d: int) -> np.ndarray:
    """Extend a tangential gradient (n, d-1) by a zero last component."""
    n = g_t.shape[0]
    out = np.zeros((n, d))
    out[:, : d - 1] = g_t
    return out


def _pad_hess(h_t: np.ndarray, d: int) -> np.ndarray:
    n = h_t.shape[0]
    out = np.zeros((n, d, d))
    out[:, : d - 1, : d - 1] = h_t
    return out


def _sym_outer(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return a[:, :, None] * b[:, None, :] + b[:, :, None] * a[:, None, :]


def _prod_grad(a, ga, b, gb):
    return ga * b[:, None] + gb * a[:, None]


def _prod_hess(a, ga, ha, b, gb, hb):
    return ha * b[:, None, None] + hb * a[:, None, None] + _sym_outer(ga, gb)


@dataclass
class _ScalarJet:
    """Value / gradient / Hessian triple of a scalar field at points."""

    val: np.ndarray
    grad: np.ndarray
    hess: np.ndarray

    def times(self, other: "_ScalarJet") -> "_ScalarJet":
        return _ScalarJet(
            val=self.val * other.val,
            grad=_prod_grad(self.val, self.grad, other.val, other.grad),
            hess=_prod_hess(self.val, self.grad, self.hess, other.val, other.grad, other.hess),
        )


def _vbar_jet(profile: GapProfileBase, eps: float, pts: _SlabPoints) -> _ScalarJet:
    d = profile.dm1 + 1
    xp = pts.xp
    dlt = eps + profile.gap(xp)
    g1 = _pad_grad(profile.grad_delta(xp), d)
    g2 = _pad_hess(profile.hess_delta(xp), d)
    w = pts.xd - profile.h2(xp)
    gw = _pad_grad(-profile.h_der(2, 1, xp), d)
    gw[:, -1] = 1.0
    hw = _pad_hess(-profile.h_der(2, 2, xp), d)

    inv = 1.0 / dlt
    val = w * inv
    grad = gw * inv[:, None] - (w * inv**2)[:, None] * g1
    hess = (
        hw * inv[:, None, None]
        - _sym_outer(gw, g1) * (inv**2)[:, None, None]
        - g2 * (w * inv**2)[:, None, None]
        + 2.0 * (w * inv**3)[:, None, None] * (g1[:, :, None] * g1[:, None, :])
    )
    return _ScalarJet(val=val, grad=grad, hess=hess)


def vbar(profile: GapProfileBase, eps: float, x) -> np.ndarray:
    """Scalar gap profile; 0 on the lower wall, 1 on the upper wall."""
    pts = _SlabPoints(profile, eps, np.asarray(x, dtype=float))
    xp = pts.xp
    return (pts.xd - profile.h2(xp)) / (eps + profile.gap(xp))


def vbar_grad(profile: GapProfileBase, eps: float, x) -> np.ndarray:
    pts = _SlabPoints(profile, eps, np.asarray(x, dtype=float))
    return _vbar_jet(profile, eps, pts).grad


class AuxField:
    """Closed-form u1^alpha / u2^alpha for one rigid-motion index.

    lam and mu are taken as raw floats so that degenerate demonstration
    inputs (for instance lam + mu = 0, which kills the correction term)
    remain representable; construction from a validated ElasticityTensor
    is the normal route.
    """

    def __init__(
        self,
        profile: GapProfileBase,
        eps: float,
        motion: RigidMotion,
        lam: float,
        mu: float,
    ):
        if eps < 0.0:
            raise ValueError("eps must be >= 0")
        if mu == 0.0 or lam + 2.0 * mu == 0.0:
            raise ValueError("mu and lam + 2 mu must be nonzero")
        self.profile = profile
        self.eps = eps
        self.motion = motion
        self.lam = lam
        self.mu = mu
        self.d = profile.dm1 + 1
        self.c_mu = (lam + mu) / mu
        self.c_la = (lam + mu) / (lam + 2.0 * mu)

    @classmethod
    def from_tensor(
        cls, profile: GapProfileBase, eps: float, tensor: ElasticityTensor, alpha: int
    ) -> "AuxField":
        motion = rigid_basis(tensor.dim)[alpha - 1]
        return cls(profile, eps, motion, tensor.lam, tensor.mu)

    # ------------------------------------------------------------------
    def _jets(self, x):
        """Jets of every ingredient at the points x."""
        pts = _SlabPoints(self.profile, self.eps, np.asarray(x, dtype=float))
        n = pts.x.shape[0]
        d = self.d
        vb = _vbar_jet(self.profile, self.eps, pts)

        # g = f(vbar):  f' = v - 1/2, f'' = 1
        fp = vb.val - 0.5
        g = _ScalarJet(
            val=0.5 * fp**2 - 0.125,
            grad=fp[:, None] * vb.grad,
            hess=fp[:, None, None] * vb.hess + vb.grad[:, :, None] * vb.grad[:, None, :],
        )

        psi_vals = self.motion(pts.x)          # (n, d)
        gpsi = self.motion.gradient()          # (d, d): [component, deriv]

        g2 = self.profile.hess_delta(pts.xp)   # (n, dm1, dm1)
        g3 = self.profile.third_delta(pts.xp)  # (n, dm1, dm1, dm1)
        d1 = self.profile.grad_delta(pts.xp)   # (n, dm1)

        def d_jet(c: int) -> _ScalarJet:
            hz = np.zeros((n, d, d))
            hz[:, : d - 1, : d - 1] = g3[:, c, :, :]
            return _ScalarJet(val=d1[:, c], grad=_pad_grad(g2[:, c, :], d), hess=hz)

        def psi_jet(c: int) -> _ScalarJet:
            return _ScalarJet(
                val=psi_vals[:, c],
                grad=np.broadcast_to(gpsi[c], (n, d)).copy(),
                hess=np.zeros((n, d, d)),
            )

        return pts, vb, g, d_jet, psi_jet

    def _f_jets(self, x) -> list[_ScalarJet]:
        """Component jets of the correction F_alpha."""
        pts, vb, g, d_jet, psi_jet = self._jets(x)
        n, d = pts.x.shape
        psid = psi_jet(d - 1)
        comps = []
        for c in range(d - 1):
            jc = g.times(psid).times(d_jet(c))
            comps.append(
                _ScalarJet(self.c_mu * jc.val, self.c_mu * jc.grad, self.c_mu * jc.hess)
            )
        acc = None
        for i in range(d - 1):
            term = g.times(psi_jet(i)).times(d_jet(i))
            acc = term if acc is None else _ScalarJet(
                acc.val + term.val, acc.grad + term.grad, acc.hess + term.hess
            )
        comps.append(_ScalarJet(self.c_la * acc.val, self.c_la * acc.grad, self.c_la * acc.hess))
        return comps, vb, psi_jet

    def _u1_jets(self, x):
        f_comps, vb, psi_jet = self._f_jets(x)
        out = []
        for c in range(self.d):
            base = psi_jet(c).times(vb)
            fc = f_comps[c]
            out.append(_ScalarJet(base.val + fc.val, base.grad + fc.grad, base.hess + fc.hess))
        return out

    # Public evaluators -------------------------------------------------
    def F(self, x) -> np.ndarray:
        comps, _, _ = self._f_jets(x)
        return np.column_stack([c.val for c in comps])

    def u1(self, x) -> np.ndarray:
        return np.column_stack([j.val for j in self._u1_jets(x)])

    def grad_u1(self, x) -> np.ndarray:
        """Gradient stack G[n, c, j] = d(u1_c)/d(x_j)."""
        return np.stack([j.grad for j in self._u1_jets(x)], axis=1)

    def hess_u1(self, x) -> np.ndarray:
        """Hessian stack H[n, c, j, k] = d2(u1_c)/d(x_j)d(x_k)."""
        return np.stack([j.hess for j in self._u1_jets(x)], axis=1)

    def u2(self, x) -> np.ndarray:
        pts = _SlabPoints(self.profile, self.eps, np.asarray(x, dtype=float))
        return self.motion(pts.x) - self.u1(x)

    def grad_u2(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        g1 = self.grad_u1(x)
        n = g1.shape[0]
        gpsi = np.broadcast_to(self.motion.gradient(), (n, self.d, self.d))
        return gpsi - g1

    def lame_residual(self, x) -> np.ndarray:
        """L u1 = mu * Lap(u1) + (lam + mu) * grad(div u1), exactly.

        The magnitude obeys |L u1| <= C (|psi| delta^{-2/m} +
        |grad' psi| delta^{-1} + 1) with a geometry constant C.
        """
        H = self.hess_u1(x)
        lap = np.trace(H, axis1=2, axis2=3)                  # (n, d)
        grad_div = np.einsum("njcj->nc", H)                  # sum_j d_c d_j u_j
        return self.mu * lap + (self.lam + self.mu) * grad_div
