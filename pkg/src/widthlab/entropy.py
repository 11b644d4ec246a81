"""Entropy-number estimates for diagonal operators and point clouds.

The n-th dyadic entropy number of an operator is the smallest radius at
which 2^(n-1) balls cover the image of the unit ball. General operators
are out of reach numerically; the estimators here cover the two cases
the lab needs as evidence and as oracles: diagonal operators between
sequence spaces (ellipsoids in l2) and small point clouds in R^d with
d <= 3, where brute force is honest.

The Carl check evaluates the weighted sup-seminorm inequality
sup_{k<=n} k^{1/p} e_k <= C_p sup_{k<=n} k^{1/p} s_k with the explicit
constant C_p = 128 (32 + 16/p)^{1/p}; a flagged violation on valid
input indicates a pipeline bug, never new mathematics.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import BudgetError

DIAG_UPPER_FACTOR = 6.0  # pragmatic universal factor, flagged in the method label
_BRUTE_MAX_BALLS = 4096
_BRUTE_MAX_POINTS = 20000


@dataclass(frozen=True)
class DiagonalOperator:
    """Diagonal operator on l2 with nonincreasing nonnegative entries."""

    sigma: np.ndarray

    def __post_init__(self):
        s = np.asarray(self.sigma, dtype=float)
        object.__setattr__(self, "sigma", s)
        if s.ndim != 1 or s.size == 0:
            raise ValueError("sigma must be a nonempty 1d sequence")
        if np.any(s < 0):
            raise ValueError("sigma entries must be nonnegative")
        if np.any(np.diff(s) > 1e-15 * max(s[0], 1.0)):
            raise ValueError("sigma must be nonincreasing")


@dataclass(frozen=True)
class EntropyEstimate:
    n: int
    lower: float
    upper: float
    method: str

    def __post_init__(self):
        if not (0.0 <= self.lower <= self.upper + 1e-15):
            raise ValueError(f"entropy bracket invalid: [{self.lower}, {self.upper}]")


def carl_constant(p: float) -> float:
    """Explicit admissible constant C_p = 128 (32 + 16/p)^(1/p)."""
    if p <= 0:
        raise ValueError("p must be positive")
    return 128.0 * (32.0 + 16.0 / p) ** (1.0 / p)


def adjoint(op: DiagonalOperator) -> DiagonalOperator:
    """Adjoint of a diagonal operator between l2 spaces: the same diagonal.

    How entropy numbers of a general operator relate to those of its
    adjoint is a hard question with only partial answers (weighted
    sup-seminorm comparisons on B-convex spaces); no general dual
    computation is attempted here. For the diagonal operators this
    module covers the question is trivial, since the adjoint is the
    operator itself, and `diag_entropy_bounds` is exactly self-dual.
    """
    return DiagonalOperator(op.sigma.copy())


# ---------------------------------------------------------------------------
# diagonal operators


def _volume_lower(sigma: np.ndarray, n: int) -> float:
    # covering 2^(n-1) balls of the k-dim coordinate sub-ellipsoid cannot
    # beat volume: e_n >= max_k 2^{-(n-1)/k} (sigma_1...sigma_k)^{1/k}
    pos = sigma > 0
    k_max = int(np.argmin(pos)) if not pos.all() else sigma.size
    if k_max == 0:
        return 0.0
    ks = np.arange(1, k_max + 1, dtype=float)
    gm = np.exp(np.cumsum(np.log(sigma[:k_max])) / ks)
    # keep the power of two exact: a lower bound must never exceed the truth
    vals = gm * 2.0 ** (-(n - 1) / ks)
    return float(vals.max())


def _dyadic_grid_upper(sigma: np.ndarray, n: int) -> float:
    # constructive cover: split axis i of the bounding box into 2^{a_i}
    # cells; the leftover axes contribute at most sigma_{k+1} in norm.
    # One ball of radius sigma_1 centered at the origin always covers.
    N = sigma.size
    best = float(sigma[0])
    budget = n - 1

    def tail2(k: int) -> float:
        return float(sigma[k] ** 2) if k < N else 0.0

    for a1 in range(budget + 1):
        r2 = (sigma[0] / 2.0**a1) ** 2 + tail2(1)
        best = min(best, math.sqrt(r2))
        if N < 2:
            continue
        for a2 in range(budget - a1 + 1):
            r2 = (sigma[0] / 2.0**a1) ** 2 + (sigma[1] / 2.0**a2) ** 2 + tail2(2)
            best = min(best, math.sqrt(r2))
            if N < 3:
                continue
            a3 = budget - a1 - a2
            r2 = (
                (sigma[0] / 2.0**a1) ** 2
                + (sigma[1] / 2.0**a2) ** 2
                + (sigma[2] / 2.0**a3) ** 2
                + tail2(3)
            )
            best = min(best, math.sqrt(r2))
    return best


def diag_entropy_bounds(op: DiagonalOperator, n: int) -> EntropyEstimate:
    """Bracket the n-th entropy number of a diagonal operator on l2.

    Lower bound by volume comparison; upper bound as the smaller of the
    volume expression times DIAG_UPPER_FACTOR (asymptotic constant
    unverified) and a constructive dyadic grid covering that optimizes
    over at most three covered axes.
    """
    if n < 1:
        raise ValueError("entropy index must be >= 1")
    s = op.sigma
    if s[0] == 0.0:
        return EntropyEstimate(n, 0.0, 0.0, "volume+dyadic-grid")
    lower = _volume_lower(s, n)
    upper = min(DIAG_UPPER_FACTOR * lower, _dyadic_grid_upper(s, n))
    upper = max(upper, lower)  # the factor-6 guess must not undercut the certified lower
    return EntropyEstimate(n, lower, upper, "volume+dyadic-grid[factor-6-unverified]")


# ---------------------------------------------------------------------------
# point clouds


def _pairwise_sq(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.maximum(((a[:, None, :] - b[None, :, :]) ** 2).sum(axis=-1), 0.0)


def _cluster_center(points: np.ndarray, iters: int = 32) -> tuple[np.ndarray, float]:
    """Approximate min-enclosing-ball center: centroid plus farthest-point walk."""
    best_c = points.mean(axis=0)
    best_r = float(np.sqrt(_pairwise_sq(points, best_c[None, :]).max()))
    c = best_c.copy()
    for t in range(1, iters + 1):
        d2 = _pairwise_sq(points, c[None, :])[:, 0]
        j = int(np.argmax(d2))
        r = math.sqrt(float(d2[j]))
        if r < best_r:
            best_c, best_r = c.copy(), r
        c = c + (points[j] - c) / (t + 1.0)
    return best_c, best_r


def _kcenter_radius(points: np.ndarray, centers: np.ndarray) -> float:
    d2 = _pairwise_sq(points, centers)
    return float(np.sqrt(d2.min(axis=1).max()))


def brute_cover_entropy(points: np.ndarray, n: int, seed: int = 0) -> EntropyEstimate:
    """Bracket e_n of a finite point cloud in R^d, d <= 3, by brute force.

    Upper bound: greedy k-center seeding with 2^(n-1) centers followed by
    assign/recenter rounds, cluster centers refined toward min enclosing
    balls (centers need not be data points). Lower bound: farthest-point
    packing; 2^(n-1) + 1 points pairwise eps-separated force e_n >= eps/2.
    Deterministic for a fixed seed.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    m, d = pts.shape
    if d > 3:
        raise BudgetError(f"point clouds are limited to dimension 3, got {d}")
    if m > _BRUTE_MAX_POINTS:
        raise BudgetError(f"point cloud size {m} exceeds {_BRUTE_MAX_POINTS}")
    balls = 2 ** (n - 1)
    if balls > _BRUTE_MAX_BALLS:
        raise BudgetError(f"2^(n-1) = {balls} balls exceeds the budget {_BRUTE_MAX_BALLS}")

    # ---- packing lower bound: greedy farthest-point separation
    lower = 0.0
    if m > balls:
        first = 0
        sel = [first]
        mind2 = _pairwise_sq(pts, pts[first : first + 1])[:, 0]
        insertion = math.inf
        for _ in range(balls):
            j = int(np.argmax(mind2))
            insertion = math.sqrt(float(mind2[j]))
            sel.append(j)
            mind2 = np.minimum(mind2, _pairwise_sq(pts, pts[j : j + 1])[:, 0])
        lower = insertion / 2.0

    # ---- covering upper bound
    if balls >= m:
        # one center per point covers exactly
        return EntropyEstimate(n, 0.0, 0.0, "kcenter+packing")

    def lloyd_minimax(centers: np.ndarray, rounds: int = 60) -> float:
        best = _kcenter_radius(pts, centers)
        cur = centers.copy()
        for _ in range(rounds):
            assign = np.argmin(_pairwise_sq(pts, cur), axis=1)
            moved = False
            for c in range(cur.shape[0]):
                members = pts[assign == c]
                if members.size == 0:
                    continue
                center, _ = _cluster_center(members)
                if not np.allclose(center, cur[c]):
                    moved = True
                cur[c] = center
            r = _kcenter_radius(pts, cur)
            if r < best:
                best = r
            if not moved:
                break
        return best

    # greedy k-center seeds (2-approximation), then seeded random restarts
    rng = np.random.default_rng(seed)
    uppers = []
    greedy_centers_idx = [0]
    mind2 = _pairwise_sq(pts, pts[:1])[:, 0]
    for _ in range(balls - 1):
        j = int(np.argmax(mind2))
        greedy_centers_idx.append(j)
        mind2 = np.minimum(mind2, _pairwise_sq(pts, pts[j : j + 1])[:, 0])
    uppers.append(lloyd_minimax(pts[greedy_centers_idx].copy()))
    for _ in range(3):
        idx = rng.choice(m, size=balls, replace=False)
        uppers.append(lloyd_minimax(pts[idx].copy()))
    upper = float(min(uppers))
    upper = max(upper, lower)
    return EntropyEstimate(n, lower, upper, "kcenter+packing")


# ---------------------------------------------------------------------------
# Carl check


@dataclass(frozen=True)
class CarlReport:
    """Per-index ratios of weighted sup-seminorms and any violations."""

    p: float
    constant: float
    ratios: np.ndarray
    flagged: tuple[int, ...]

    @property
    def ok(self) -> bool:
        return len(self.flagged) == 0


def carl_check(e_values, s_values, p: float, n_max: int) -> CarlReport:
    """Ratios sup_{k<=n} k^{1/p} e_k / sup_{k<=n} k^{1/p} s_k for n <= n_max.

    Flags every n whose ratio exceeds the explicit constant; on valid
    entropy/approximation pairs no flag may appear.
    """
    e = np.asarray(e_values, dtype=float)
    s = np.asarray(s_values, dtype=float)
    if e.size < n_max or s.size < n_max:
        raise ValueError(f"need at least n_max={n_max} entries in both sequences")
    if np.any(e[:n_max] <= 0) or np.any(s[:n_max] <= 0):
        raise ValueError("sequences must be positive up to n_max")
    k = np.arange(1, n_max + 1, dtype=float)
    we = np.maximum.accumulate(k ** (1.0 / p) * e[:n_max])
    ws = np.maximum.accumulate(k ** (1.0 / p) * s[:n_max])
    ratios = we / ws
    c = carl_constant(p)
    flagged = tuple(int(i + 1) for i in np.nonzero(ratios > c)[0])
    return CarlReport(p, c, ratios, flagged)
