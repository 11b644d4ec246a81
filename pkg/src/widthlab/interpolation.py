"""Kernel interpolation: cardinal weights, power function, greedy designs.

For a design D = (x_1, ..., x_n) the interpolant of f is
A f(x) = sum_i a_i(x) f(x_i), where the cardinal weights a(x) solve
K a = k_x with K the design Gram matrix and (k_x)_i = k(x, x_i). The
power function

    P(x)^2 = k(x, x) - k_x^T K^{-1} k_x

is the worst-case pointwise error of this scheme over the unit ball of
the native space, so the L_p norm of P is the value of the p-width
objective at D. The width itself is an infimum over designs; here it is
approximated from above by uniform grids, power-function greedy
selection, and coordinate-descent refinement.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import cho_solve, solve_triangular

from .errors import DegenerateDesignError, DomainError
from .kernels import Kernel, gram_matrix
from .quadrature import QuadratureRule

JITTER_SCALE = 1e-12
_POWER_AT_NODE_TOL = 1e-6


@dataclass(frozen=True)
class DesignSet:
    """Ordered distinct interpolation points with a cached Gram factor.

    `jitter` records the ridge added to make the Cholesky factorization
    succeed; zero for a cleanly positive-definite Gram matrix.
    `greedy_sup_path` is filled by greedy_design with the sup of the
    power function before each point insertion.
    """

    points: np.ndarray
    kernel: Kernel
    chol: np.ndarray | None
    jitter: float = 0.0
    greedy_sup_path: np.ndarray | None = field(default=None, compare=False)

    @property
    def size(self) -> int:
        return self.points.shape[0]

    @property
    def kernel_id(self) -> str:
        return self.kernel.identifier()


def design(kernel: Kernel, points) -> DesignSet:
    """Build a design, factorizing its Gram matrix (with recorded jitter)."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if pts.size == 0:
        pts = pts.reshape(0, kernel.dim)
        return DesignSet(pts, kernel, None)
    if pts.shape[1] != kernel.dim:
        pts = pts.reshape(-1, kernel.dim)
    K = gram_matrix(kernel, pts)  # validates distinctness and domain
    jitter = 0.0
    try:
        L = np.linalg.cholesky(K)
    except np.linalg.LinAlgError:
        # trace can vanish for boundary points of vanishing kernels; keep
        # the ridge strictly positive so the zero-information limit works
        scale = np.trace(K) / K.shape[0]
        jitter = JITTER_SCALE * (scale if scale > 0 else 1.0)
        try:
            L = np.linalg.cholesky(K + jitter * np.eye(K.shape[0]))
        except np.linalg.LinAlgError as exc:
            raise DegenerateDesignError("Gram matrix singular even after jitter") from exc
    return DesignSet(pts, kernel, L, jitter=jitter)


def cardinal_weights(des: DesignSet, x) -> np.ndarray:
    """Cardinal weight vector a(x) solving K a = k_x; unit vector at nodes."""
    if des.size == 0:
        return np.zeros(0)
    x = np.atleast_2d(np.asarray(x, dtype=float)).reshape(1, des.kernel.dim)
    kx = des.kernel.pairwise(des.points, x)[:, 0]
    return cho_solve((des.chol, True), kx)


def apply_interpolant(des: DesignSet, f_values, x) -> float:
    """Evaluate sum_i a_i(x) f(x_i); reproduces f at the design points."""
    f_values = np.asarray(f_values, dtype=float)
    if f_values.shape != (des.size,):
        raise ValueError(f"f_values has length {f_values.size}, design has {des.size} points")
    return float(cardinal_weights(des, x) @ f_values)


def power_values(des: DesignSet, points, diag: np.ndarray | None = None) -> np.ndarray:
    """Power function on a batch of points (vectorized quadratic form).

    `diag` may carry precomputed kernel diagonal values for the points.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if diag is None:
        diag = des.kernel.diag(pts)
    if des.size == 0:
        return np.sqrt(np.maximum(diag, 0.0))
    Kx = des.kernel.pairwise(des.points, pts)
    S = solve_triangular(des.chol, Kx, lower=True)
    p2 = diag - np.einsum("ij,ij->j", S, S)
    return np.sqrt(np.maximum(p2, 0.0))


def power_function(des: DesignSet, x) -> float:
    """Worst-case pointwise interpolation error at x over the unit ball."""
    x = np.atleast_2d(np.asarray(x, dtype=float)).reshape(1, des.kernel.dim)
    if not des.kernel.domain.contains(x):
        raise DomainError("evaluation point outside the kernel domain")
    return float(power_values(des, x)[0])


@dataclass(frozen=True)
class PowerFunctionProfile:
    """Power function tabulated on a grid, with its supremum."""

    grid: np.ndarray
    values: np.ndarray
    sup_value: float
    design: DesignSet

    def node_defect(self) -> float:
        """Max power value at the design points; near zero by exactness."""
        if self.design.size == 0:
            return 0.0
        vals = power_values(self.design, self.design.points)
        bound = _POWER_AT_NODE_TOL * np.sqrt(np.maximum(self.design.kernel.diag(self.design.points), 0.0)) + 1e-12
        return float(np.max(vals - bound))


def power_profile(des: DesignSet, grid) -> PowerFunctionProfile:
    grid = np.atleast_2d(np.asarray(grid, dtype=float))
    vals = power_values(des, grid)
    return PowerFunctionProfile(grid, vals, float(vals.max()) if vals.size else 0.0, des)


def greedy_design(kernel: Kernel, candidates, n: int) -> DesignSet:
    """Power-function greedy selection over a candidate grid.

    Starts from the candidate maximizing k(x, x) and repeatedly appends
    the candidate with the largest current power function, updating the
    power values through the Newton basis. Ties break to the lowest
    candidate index, so runs are deterministic. The sup-power values
    recorded before each insertion are nonincreasing. Stops early if the
    remaining power mass is at rounding level (candidate set exhausted).
    """
    cand = np.atleast_2d(np.asarray(candidates, dtype=float))
    if cand.shape[0] == 0:
        raise ValueError("empty candidate grid")
    if n > cand.shape[0]:
        raise ValueError(f"requested {n} points from {cand.shape[0]} candidates")
    if n == 0:
        return design(kernel, np.empty((0, kernel.dim)))
    p2 = np.maximum(kernel.diag(cand), 0.0)
    scale = float(p2.max())
    V = np.zeros((cand.shape[0], 0))
    chosen: list[int] = []
    sups: list[float] = []
    for _ in range(n):
        i = int(np.argmax(p2))  # argmax returns the first maximizer
        if p2[i] <= 1e-15 * max(scale, 1.0):
            break  # candidate set numerically exhausted
        sups.append(math.sqrt(p2[i]))
        col = kernel.pairwise(cand, cand[i : i + 1])[:, 0]
        if V.shape[1]:
            col = col - V @ V[i, :]
        col = col / math.sqrt(p2[i])
        V = np.hstack([V, col[:, None]])
        p2 = np.maximum(p2 - col**2, 0.0)
        chosen.append(i)
    des = design(kernel, cand[chosen])
    return DesignSet(des.points, des.kernel, des.chol, des.jitter, np.asarray(sups))


def interpolation_width(
    des: DesignSet,
    quad: QuadratureRule,
    p: float,
    eval_grid: np.ndarray | None = None,
    sup_points_per_axis: int = 0,
) -> float:
    """L_p norm of the power function for the given design.

    Finite p integrates P^p against the quadrature; p = inf takes the
    max over an endpoint-including evaluation grid (default 4096 points
    in 1d, 128 per axis in 2d), which must be denser than the design.
    The result is the width objective at D, an upper bound on the
    infimum over designs of the same size.
    """
    if not (p == math.inf or p >= 2.0):
        raise ValueError("p must be in [2, inf]")
    if p == math.inf:
        if eval_grid is None:
            per_axis = sup_points_per_axis or _default_sup_points(des.kernel.dim)
            eval_grid = des.kernel.domain.grid(per_axis, endpoint=True)
        return float(power_values(des, eval_grid).max())
    vals = power_values(des, quad.nodes)
    return float((quad.weights @ vals**p) ** (1.0 / p))


def _default_sup_points(dim: int) -> int:
    return {1: 4096, 2: 128}.get(dim, 32)


def uniform_design(kernel: Kernel, n: int) -> DesignSet:
    """Right-shifted uniform grid design: lo + (i/g)(hi - lo) per axis.

    In more than one dimension g = floor(n^(1/d)) per axis, so the design
    has at most n points; a width value at a design of size <= n is still
    an upper bound for the n-point width.
    """
    box = kernel.domain
    if n == 0:
        return design(kernel, np.empty((0, kernel.dim)))
    g = n if kernel.dim == 1 else max(1, math.floor(n ** (1.0 / kernel.dim) + 1e-9))
    axes = [l + (np.arange(1, g + 1) / g) * (h - l) for l, h in zip(box.lo, box.hi)]
    mesh = np.meshgrid(*axes, indexing="ij")
    return design(kernel, np.column_stack([m.ravel() for m in mesh]))


def optimize_interpolation_width(
    kernel: Kernel,
    quad: QuadratureRule,
    p: float,
    n: int,
    strategy: str = "greedy",
    candidates: np.ndarray | None = None,
    eval_grid: np.ndarray | None = None,
    seed: int = 0,
    restarts: int = 2,
) -> tuple[DesignSet, float]:
    """Search for a good n-point design; the value is an upper bound.

    Strategies: "uniform" (fixed grid), "greedy" (power-function greedy
    on the candidate grid), "multistart" (coordinate-descent refinement
    from the uniform and greedy designs plus seeded random starts).
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if candidates is None:
        candidates = kernel.domain.grid(_default_sup_points(kernel.dim) + 1, endpoint=True)
    if p == math.inf and eval_grid is None:
        eval_grid = kernel.domain.grid(_default_sup_points(kernel.dim), endpoint=True)

    # diagonal values on the fixed evaluation points are design-independent
    if p == math.inf:
        eval_diag = kernel.diag(eval_grid)

        def objective(des: DesignSet) -> float:
            return float(power_values(des, eval_grid, diag=eval_diag).max())

    else:
        quad_diag = kernel.diag(quad.nodes)

        def objective(des: DesignSet) -> float:
            vals = power_values(des, quad.nodes, diag=quad_diag)
            return float((quad.weights @ vals**p) ** (1.0 / p))

    if strategy == "uniform":
        des = uniform_design(kernel, n)
        return des, objective(des)
    if strategy == "greedy":
        des = greedy_design(kernel, candidates, n)
        return des, objective(des)
    if strategy != "multistart":
        raise ValueError(f"unknown strategy '{strategy}'")

    starts = [uniform_design(kernel, n).points, greedy_design(kernel, candidates, n).points]
    rng = np.random.default_rng(seed)
    lo = np.asarray(kernel.domain.lo)
    hi = np.asarray(kernel.domain.hi)
    for _ in range(restarts):
        starts.append(lo + (hi - lo) * rng.random((n, kernel.dim)))
    best_des, best_val = None, math.inf
    for pts in starts:
        des, val = _coordinate_descent(kernel, pts, objective)
        if val < best_val:
            best_des, best_val = des, val
    return best_des, best_val


def _coordinate_descent(kernel: Kernel, points: np.ndarray, objective, offsets: int = 8) -> tuple[DesignSet, float]:
    """Shrinking-bracket line search over each point coordinate in turn."""
    lo = np.asarray(kernel.domain.lo)
    hi = np.asarray(kernel.domain.hi)
    span = float((hi - lo).max())
    pts = np.array(points, dtype=float, copy=True)
    n = pts.shape[0]

    def safe_objective(cand_pts) -> float:
        try:
            return objective(design(kernel, cand_pts))
        except DegenerateDesignError:
            return math.inf

    best = safe_objective(pts)
    radius = span / max(2.0 * n ** (1.0 / kernel.dim), 4.0)
    steps = np.concatenate([-np.linspace(1.0, 1.0 / offsets, offsets // 2), np.linspace(1.0 / offsets, 1.0, offsets // 2)])
    sweeps = 0
    while radius > 1e-6 * span and sweeps < 200:
        sweeps += 1
        improved = False
        for i in range(n):
            for ax in range(kernel.dim):
                base = pts[i, ax]
                trials = np.clip(base + radius * steps, lo[ax], hi[ax])
                for t in trials:
                    if t == base:
                        continue
                    cand = pts.copy()
                    cand[i, ax] = t
                    val = safe_objective(cand)
                    if val < best * (1.0 - 1e-9):
                        best, pts = val, cand
                        improved = True
        if not improved:
            radius *= 0.5
    return design(kernel, pts), best
