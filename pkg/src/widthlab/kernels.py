"""Kernel catalog, Mercer expansions, and power kernels.

A kernel here is a symmetric positive-semidefinite function on an
axis-aligned box, evaluated in vectorized form. The catalog covers the
classical Gaussian-process kernels whose associated function spaces are
norm-equivalent to Sobolev spaces of known order, plus the Gaussian
kernel as an infinitely smooth reference point.

Power kernels raise every eigenvalue of a Mercer expansion to a fixed
exponent gamma while keeping the eigenfunctions, which realizes the
scale of spaces interpolating between L2 and the native space of the
base kernel (and extrapolating beyond it for gamma > 1).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import ConfigError, DegenerateDesignError, DomainError, TruncationError
from .quadrature import Box, QuadratureRule, unit_interval

_DUPLICATE_TOL = 1e-14


@dataclass(frozen=True)
class Kernel:
    """Evaluatable symmetric PSD kernel with domain metadata.

    `pairwise(A, B)` returns the matrix k(a_i, b_j) for point arrays of
    shape (m, d) and (n, d). `smoothness_hint` is the Sobolev order used
    by the rate presets; None when no equivalence is claimed.
    `uniformly_bounded_eigenfunctions` records whether uniform
    boundedness of the eigenfunctions has been verified for this kernel
    (True), or is merely unknown (None). It is metadata, never assumed.
    """

    name: str
    dim: int
    domain: Box
    pairwise: Callable[[np.ndarray, np.ndarray], np.ndarray]
    smoothness_hint: float | None = None
    params: dict = field(default_factory=dict)
    uniformly_bounded_eigenfunctions: bool | None = None
    diagonal: Callable[[np.ndarray], np.ndarray] | None = None

    def __call__(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        return self.pairwise(np.atleast_2d(a), np.atleast_2d(b))

    def diag(self, x: np.ndarray) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=float))
        if self.diagonal is not None:
            return np.asarray(self.diagonal(x), dtype=float)
        out = np.empty(x.shape[0])
        # small chunks: the generic path has only the pairwise map to work with
        step = 32
        for i in range(0, x.shape[0], step):
            blk = x[i : i + step]
            out[i : i + step] = np.diagonal(self.pairwise(blk, blk))
        return out

    def identifier(self) -> str:
        ps = ",".join(f"{k}={v:.17g}" if isinstance(v, float) else f"{k}={v}" for k, v in sorted(self.params.items()))
        return f"{self.name}({ps})" if ps else self.name


def _as_points(x, dim: int) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.ndim == 0:
        x = x.reshape(1, 1)
    elif x.ndim == 1:
        # a single point in R^dim, or a batch of scalars in 1d
        x = x.reshape(-1, 1) if dim == 1 and x.size != dim else x.reshape(1, -1)
    if x.shape[1] != dim:
        raise DomainError(f"points have dimension {x.shape[1]}, kernel expects {dim}")
    return x


def eval_kernel(kernel: Kernel, x, x2) -> float:
    """Single kernel evaluation with domain validation."""
    a = _as_points(x, kernel.dim)
    b = _as_points(x2, kernel.dim)
    if not kernel.domain.contains(a) or not kernel.domain.contains(b):
        raise DomainError("evaluation point outside the kernel domain")
    return float(kernel.pairwise(a, b)[0, 0])


def gram_matrix(kernel: Kernel, points) -> np.ndarray:
    """Gram matrix K[i, j] = k(x_i, x_j) for pairwise distinct points."""
    pts = _as_points(points, kernel.dim)
    if not kernel.domain.contains(pts):
        raise DomainError("design point outside the kernel domain")
    if pts.shape[0] > 1:
        d2 = ((pts[:, None, :] - pts[None, :, :]) ** 2).sum(axis=-1)
        np.fill_diagonal(d2, np.inf)
        if d2.min() <= _DUPLICATE_TOL**2:
            raise DegenerateDesignError("duplicate points in design")
    K = kernel.pairwise(pts, pts)
    return 0.5 * (K + K.T)


def trace_integral(kernel: Kernel, quad: QuadratureRule) -> float:
    """Integral of the kernel diagonal, the trace of the integral operator."""
    if not kernel.domain.contains(quad.nodes):
        raise DomainError("quadrature does not cover the kernel domain")
    return quad.integrate(kernel.diag(quad.nodes))


# ---------------------------------------------------------------------------
# catalog


def _sqdist(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.maximum(((a[:, None, :] - b[None, :, :]) ** 2).sum(axis=-1), 0.0)


def make_kernel(kernel_id: str, dim: int = 1, domain: Box | None = None, length_scale: float = 0.3) -> Kernel:
    """Build a catalog kernel by string id.

    Ids: brownian, bridge, brownian_int (once-integrated Brownian motion),
    matern12, matern32, gaussian. The first three are 1d only.
    """
    kid = kernel_id.strip().lower()
    if kid in ("brownian", "bridge", "brownian_int"):
        if dim != 1:
            raise DomainError(f"kernel '{kid}' is one-dimensional")
        box = domain or unit_interval()

        if kid == "brownian":

            def pw(a, b):
                return np.minimum(a[:, 0][:, None], b[:, 0][None, :])

            return Kernel(
                kid, 1, box, pw, smoothness_hint=1.0, uniformly_bounded_eigenfunctions=True,
                diagonal=lambda x: x[:, 0].copy(),
            )

        if kid == "bridge":

            def pw(a, b):
                s = a[:, 0][:, None]
                t = b[:, 0][None, :]
                return np.minimum(s, t) - s * t

            return Kernel(
                kid, 1, box, pw, smoothness_hint=1.0, uniformly_bounded_eigenfunctions=True,
                diagonal=lambda x: x[:, 0] - x[:, 0] ** 2,
            )

        # covariance of the integrated Brownian motion:
        # k(s, t) = m^2 M / 2 - m^3 / 6 with m = min, M = max
        def pw(a, b):
            s = a[:, 0][:, None]
            t = b[:, 0][None, :]
            lo = np.minimum(s, t)
            hi = np.maximum(s, t)
            return lo * lo * hi / 2.0 - lo**3 / 6.0

        return Kernel(kid, 1, box, pw, smoothness_hint=2.0, diagonal=lambda x: x[:, 0] ** 3 / 3.0)

    box = domain or Box((0.0,) * dim, (1.0,) * dim)
    if box.dim != dim:
        raise DomainError("domain box dimension does not match kernel dimension")
    if length_scale <= 0:
        raise ValueError("length_scale must be positive")
    params = {"ell": float(length_scale)}

    ones = lambda x: np.ones(x.shape[0])  # noqa: E731  stationary normalized diagonals

    if kid == "matern12":

        def pw(a, b, ell=length_scale):
            return np.exp(-np.sqrt(_sqdist(a, b)) / ell)

        return Kernel(kid, dim, box, pw, smoothness_hint=0.5 + dim / 2.0, params=params, diagonal=ones)

    if kid == "matern32":

        def pw(a, b, ell=length_scale):
            r = np.sqrt(3.0 * _sqdist(a, b)) / ell
            return (1.0 + r) * np.exp(-r)

        return Kernel(kid, dim, box, pw, smoothness_hint=1.5 + dim / 2.0, params=params, diagonal=ones)

    if kid == "gaussian":

        def pw(a, b, ell=length_scale):
            return np.exp(-_sqdist(a, b) / (2.0 * ell * ell))

        return Kernel(kid, dim, box, pw, smoothness_hint=None, params=params, diagonal=ones)

    raise ConfigError(f"unknown kernel id '{kid}' (field kernel.id)")


CATALOG_IDS = ("brownian", "bridge", "brownian_int", "matern12", "matern32", "gaussian")


# ---------------------------------------------------------------------------
# Mercer expansions and power kernels


@dataclass(frozen=True)
class MercerExpansion:
    """Truncated eigensystem lambda_i, e_i of an integral operator.

    `basis(X)` evaluates all eigenfunctions at the points X, returning a
    matrix of shape (len(X), n_terms). Eigenfunctions are L2-orthonormal
    with respect to the quadrature that produced them.
    """

    eigenvalues: np.ndarray
    basis: Callable[[np.ndarray], np.ndarray]
    n_terms: int
    source: str  # "analytic" | "nystrom"
    quad: QuadratureRule | None = None

    def __post_init__(self):
        lam = np.asarray(self.eigenvalues, dtype=float)
        object.__setattr__(self, "eigenvalues", lam)
        if lam.ndim != 1 or lam.shape[0] < self.n_terms:
            raise TruncationError("fewer eigenvalues than n_terms")
        if np.any(lam < -1e-15):
            raise ValueError("negative eigenvalue in Mercer expansion")
        if np.any(np.diff(lam) > 1e-12 * max(lam[0], 1.0)):
            raise ValueError("eigenvalues must be nonincreasing")

    def orthonormality_defect(self) -> float:
        """Max deviation of the weighted basis Gram matrix from identity."""
        if self.quad is None:
            raise ValueError("expansion carries no quadrature")
        V = self.basis(self.quad.nodes)[:, : self.n_terms]
        G = V.T @ (self.quad.weights[:, None] * V)
        return float(np.abs(G - np.eye(self.n_terms)).max())


@dataclass(frozen=True)
class PowerKernelSpec:
    """Eigenvalue power gamma > 0 applied to a truncated Mercer expansion."""

    base: MercerExpansion
    gamma: float
    n_terms: int

    def __post_init__(self):
        if self.gamma <= 0:
            raise ValueError("gamma must be positive")
        if self.n_terms < 1 or self.n_terms > self.base.n_terms:
            raise TruncationError(
                f"requested {self.n_terms} terms, expansion provides {self.base.n_terms}"
            )

    def powered_eigenvalues(self) -> np.ndarray:
        return self.base.eigenvalues[: self.n_terms] ** self.gamma

    def trace(self) -> float:
        return float(self.powered_eigenvalues().sum())


def power_kernel_eval(spec: PowerKernelSpec, x, x2) -> float:
    """Evaluate sum_i lambda_i^gamma e_i(x) e_i(x2) over the truncation."""
    a = np.atleast_2d(np.asarray(x, dtype=float))
    b = np.atleast_2d(np.asarray(x2, dtype=float))
    lam_g = spec.powered_eigenvalues()
    va = spec.base.basis(a)[0, : spec.n_terms]
    vb = spec.base.basis(b)[0, : spec.n_terms]
    return float(np.sum(lam_g * va * vb))


def power_kernel(spec: PowerKernelSpec, name: str | None = None, domain: Box | None = None) -> Kernel:
    """Wrap a power-kernel spec as a Kernel usable by the rest of the lab."""
    lam_g = spec.powered_eigenvalues()
    box = domain or (spec.base.quad.box if spec.base.quad is not None else unit_interval())

    def pw(a, b):
        va = spec.base.basis(a)[:, : spec.n_terms]
        vb = spec.base.basis(b)[:, : spec.n_terms]
        return (va * lam_g[None, :]) @ vb.T

    def diag(x):
        v = spec.base.basis(x)[:, : spec.n_terms]
        return (v**2) @ lam_g

    label = name or f"power(gamma={spec.gamma:g},N={spec.n_terms})"
    return Kernel(label, box.dim, box, pw, params={"gamma": spec.gamma, "n_terms": spec.n_terms}, diagonal=diag)
