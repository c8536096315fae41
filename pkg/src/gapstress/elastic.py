"""Isotropic elasticity tensor, rigid displacement basis, and Lame constant table.

The tensor acts on symmetric d x d matrices as A -> lam*tr(A)*I + 2*mu*A and
satisfies min{2mu, d*lam+2mu}|xi|^2 <= (C xi, xi) <= max{2mu, d*lam+2mu}|xi|^2
for every symmetric xi.  Rigid displacements are ordered translations first,
then the rotations pairing each tangential axis with the last axis, then the
remaining coordinate pairs.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "ElasticityTensor",
    "RigidMotion",
    "rigid_basis",
    "lame_constants",
]

_SYM_TOL = 1e-12


@dataclass(frozen=True)
class ElasticityTensor:
    """Isotropic elasticity tensor given by the Lame pair (lam, mu).

    Components are synthesized on demand from the closed form
    C_ijkl = lam*d_ij*d_kl + mu*(d_ik*d_jl + d_il*d_jk); no d^4 array is
    stored.  Construction validates the strong ellipticity window
    tau0 < mu and d*lam + 2*mu < 1/tau0 for a positive tau0.
    """

    lam: float
    mu: float
    dim: int = 2
    tau0: float = field(default=0.0)

    def __post_init__(self):
        if self.dim < 2:
            raise ValueError(f"dim must be >= 2, got {self.dim}")
        if self.mu <= 0.0:
            raise ValueError(f"shear modulus must be positive, got mu={self.mu}")
        bulk = self.dim * self.lam + 2.0 * self.mu
        if bulk <= 0.0:
            raise ValueError(f"d*lam + 2*mu must be positive, got {bulk}")
        if self.tau0 == 0.0:
            object.__setattr__(self, "tau0", 0.5 * min(self.mu, 1.0 / bulk))
        if not (0.0 < self.tau0 < self.mu and bulk < 1.0 / self.tau0):
            raise ValueError(
                f"ellipticity window violated: need 0 < tau0 < mu and "
                f"d*lam+2*mu < 1/tau0 (tau0={self.tau0}, mu={self.mu}, d*lam+2*mu={bulk})"
            )

    @property
    def n_rigid(self) -> int:
        return self.dim * (self.dim + 1) // 2

    def _check_symmetric(self, a: np.ndarray) -> np.ndarray:
        a = np.asarray(a, dtype=float)
        if a.shape != (self.dim, self.dim):
            raise ValueError(f"expected a {self.dim}x{self.dim} matrix, got {a.shape}")
        scale = max(1.0, float(np.abs(a).max()))
        if np.abs(a - a.T).max() > _SYM_TOL * scale:
            raise ValueError("matrix is not symmetric within 1e-12")
        return a

    def apply(self, a: np.ndarray) -> np.ndarray:
        """Return C a = lam*tr(a)*I + 2*mu*a for a symmetric matrix a."""
        a = self._check_symmetric(a)
        return self.lam * np.trace(a) * np.eye(self.dim) + 2.0 * self.mu * a

    def quadratic_form(self, xi: np.ndarray) -> float:
        """Return (C xi, xi) = lam*tr(xi)^2 + 2*mu*|xi|^2 for symmetric xi."""
        xi = self._check_symmetric(xi)
        return float(self.lam * np.trace(xi) ** 2 + 2.0 * self.mu * np.sum(xi * xi))

    def ellipticity_bounds(self) -> tuple[float, float]:
        """Constants (lo, hi) with lo*|xi|^2 <= (C xi, xi) <= hi*|xi|^2."""
        lo = min(2.0 * self.mu, self.dim * self.lam + 2.0 * self.mu)
        hi = max(2.0 * self.mu, self.dim * self.lam + 2.0 * self.mu)
        return lo, hi


@dataclass(frozen=True)
class RigidMotion:
    """One rigid displacement basis element psi_alpha.

    Translations (alpha = 1..d) are the coordinate unit fields.  Rotations
    carry an index pair (i, j), i < j, and evaluate to x_j e_i - x_i e_j;
    the pairs (i, d) come first, ordered by i, followed by the remaining
    pairs with j < d in lexicographic order.  Indices here are 1-based to
    match the alpha convention.
    """

    alpha: int
    dim: int
    kind: str  # "translation" | "rotation"
    axis: int = 0       # translation axis (1-based), 0 for rotations
    pair: tuple[int, int] = (0, 0)  # (i, j) 1-based, (0, 0) for translations

    def __call__(self, x: np.ndarray) -> np.ndarray:
        """Evaluate at points x of shape (..., d); returns shape (..., d)."""
        x = np.asarray(x, dtype=float)
        out = np.zeros(x.shape)
        if self.kind == "translation":
            out[..., self.axis - 1] = 1.0
        else:
            i, j = self.pair
            out[..., i - 1] = x[..., j - 1]
            out[..., j - 1] = -x[..., i - 1]
        return out

    def gradient(self) -> np.ndarray:
        """Constant gradient matrix G with G[c, k] = d(psi_c)/d(x_k)."""
        g = np.zeros((self.dim, self.dim))
        if self.kind == "rotation":
            i, j = self.pair
            g[i - 1, j - 1] = 1.0
            g[j - 1, i - 1] = -1.0
        return g


def rigid_basis(dim: int) -> list[RigidMotion]:
    """Rigid displacement basis of R^d in the canonical ordering.

    psi_alpha = e_alpha for alpha <= d; psi_alpha = x_d e_{alpha-d} -
    x_{alpha-d} e_d for d+1 <= alpha <= 2d-1; the remaining elements carry
    the pairs (i, j) with i < j < d in lexicographic order.
    """
    if dim < 2:
        raise ValueError(f"rigid basis needs dim >= 2, got {dim}")
    basis = [
        RigidMotion(alpha=a, dim=dim, kind="translation", axis=a)
        for a in range(1, dim + 1)
    ]
    for i in range(1, dim):
        basis.append(
            RigidMotion(alpha=dim + i, dim=dim, kind="rotation", pair=(i, dim))
        )
    alpha = 2 * dim
    for i in range(1, dim):
        for j in range(i + 1, dim):
            basis.append(RigidMotion(alpha=alpha, dim=dim, kind="rotation", pair=(i, j)))
            alpha += 1
    return basis


def lame_constants(tensor: ElasticityTensor) -> np.ndarray:
    """Per-alpha constants multiplying the leading gap integrals.

    For d = 2 the table is (mu, lam+2mu, lam+2mu); for d >= 3 it is mu for
    alpha < d, lam+2mu for d <= alpha <= 2d-1, and 2mu for the remaining
    rotations.
    """
    d, lam, mu = tensor.dim, tensor.lam, tensor.mu
    n = tensor.n_rigid
    out = np.empty(n)
    out[: d - 1] = mu
    out[d - 1 : 2 * d - 1] = lam + 2.0 * mu
    out[2 * d - 1 :] = 2.0 * mu
    return out
