"""Log-log rate fitting and asymptotic-equivalence bookkeeping.

Rate claims of the form a_n ~ n^s cannot be verified literally on a
finite index window; the lab operationalizes them as an ordinary least
squares slope in log-log coordinates plus a bounded-ratio check. The
slope tolerance (default 0.1) and ratio cap (default 32) are explicit
knobs, and families with logarithmic factors are expected to consume
part of the slope tolerance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import GridMismatchError

DEFAULT_SLOPE_TOL = 0.1
DEFAULT_RATIO_CAP = 32.0
DEFAULT_REGULARITY_CAP = 16.0

STATUS_CERTIFIED = "certified"
STATUS_INCONCLUSIVE = "inconclusive"
STATUS_HYPOTHESIS_VIOLATION = "hypothesis-violation"


@dataclass(frozen=True)
class RateSeries:
    """Positive values indexed by strictly increasing positive integers."""

    ns: np.ndarray
    values: np.ndarray
    label: str = ""

    def __post_init__(self):
        ns = np.asarray(self.ns, dtype=int)
        vals = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "ns", ns)
        object.__setattr__(self, "values", vals)
        if ns.shape != vals.shape or ns.ndim != 1:
            raise ValueError("index and value arrays must be 1d of equal length")
        if ns.size and ns[0] < 1:
            raise ValueError("indices must be positive")
        if np.any(np.diff(ns) <= 0):
            raise ValueError("indices must be strictly increasing")
        if np.any(vals <= 0):
            raise ValueError("rate series values must be positive")

    def window(self, n_min: int, n_max: int) -> "RateSeries":
        mask = (self.ns >= n_min) & (self.ns <= n_max)
        return RateSeries(self.ns[mask], self.values[mask], self.label)

    def dyadic(self) -> "RateSeries":
        mask = np.array([n & (n - 1) == 0 for n in self.ns])
        return RateSeries(self.ns[mask], self.values[mask], self.label)

    def at(self, n: int) -> float:
        idx = np.searchsorted(self.ns, n)
        if idx >= self.ns.size or self.ns[idx] != n:
            raise KeyError(f"series '{self.label}' has no entry at n={n}")
        return float(self.values[idx])


@dataclass(frozen=True)
class SlopeReport:
    """OLS fit of log value against log n on a window."""

    slope: float
    intercept: float
    stderr: float
    window: tuple[int, int]
    label: str = ""
    n_points: int = 0

    def interval(self) -> tuple[float, float]:
        return (self.slope - self.stderr, self.slope + self.stderr)


@dataclass(frozen=True)
class Verdict:
    """An asymptotic judgment with the slope reports that support it.

    `status` is certified only when every premise lies within its
    tolerance; rule applications keep their numeric premises attached
    so reports can separate computed certificates from rule-based
    conclusions.
    """

    claim: str
    premises: tuple[SlopeReport, ...]
    status: str
    detail: str = ""
    observed_constant: float | None = None

    @property
    def certified(self) -> bool:
        return self.status == STATUS_CERTIFIED

    def to_record(self) -> dict:
        return {
            "claim": self.claim,
            "status": self.status,
            "detail": self.detail,
            "observed_constant": self.observed_constant,
            "premises": [
                {
                    "label": p.label,
                    "slope": p.slope,
                    "stderr": p.stderr,
                    "window": list(p.window),
                }
                for p in self.premises
            ],
        }


def fit_loglog(series: RateSeries, window: tuple[int, int] | None = None, dyadic: bool = False) -> SlopeReport:
    """Least squares slope of log value on log n; deterministic.

    With `dyadic` the fit is restricted to indices that are powers of
    two, which decorrelates overlapping constructions. At least four
    points must remain in the window.
    """
    sub = series
    if dyadic:
        sub = sub.dyadic()
    if window is not None:
        sub = sub.window(*window)
    if sub.ns.size < 4:
        raise ValueError(
            f"need >= 4 points to fit, got {sub.ns.size} in window {window} (label '{series.label}')"
        )
    x = np.log(sub.ns.astype(float))
    y = np.log(sub.values)
    xc = x - x.mean()
    sxx = float(xc @ xc)
    slope = float(xc @ y) / sxx
    intercept = float(y.mean() - slope * x.mean())
    resid = y - (intercept + slope * x)
    dof = x.size - 2
    stderr = math.sqrt(max(float(resid @ resid), 0.0) / dof / sxx) if dof > 0 else 0.0
    win = window if window is not None else (int(sub.ns[0]), int(sub.ns[-1]))
    return SlopeReport(slope, intercept, stderr, win, label=series.label, n_points=int(sub.ns.size))


@dataclass(frozen=True)
class RegularityReport:
    """Observed constants for the halving and monotonicity conditions."""

    c_half: float
    c_mono: float
    cap: float
    pairs: int

    @property
    def regular(self) -> bool:
        return math.isfinite(self.c_half) and math.isfinite(self.c_mono) and max(self.c_half, self.c_mono) <= self.cap


def regular_check(series: RateSeries, cap: float = DEFAULT_REGULARITY_CAP) -> RegularityReport:
    """Minimal observed constants for the two regularity conditions.

    c_half: a_n <= c a_{2n} (no more than constant decay per doubling);
    c_mono: a_n <= c a_m for m <= n (almost nonincreasing; exactly 1 for
    monotone sequences). Requires entries at n and 2n for at least three
    values of n.
    """
    ns = series.ns
    vals = series.values
    ratios = []
    index = {int(n): i for i, n in enumerate(ns)}
    for i, n in enumerate(ns):
        j = index.get(int(2 * n))
        if j is not None:
            ratios.append(vals[i] / vals[j])
    if len(ratios) < 3:
        raise GridMismatchError(
            f"series '{series.label}' has only {len(ratios)} (n, 2n) pairs; need >= 3"
        )
    c_half = float(np.max(ratios))
    running_min = np.minimum.accumulate(vals)
    c_mono = float(np.max(vals / running_min))
    return RegularityReport(c_half, c_mono, cap, len(ratios))


def asymp_equiv(
    a: RateSeries,
    b: RateSeries,
    window: tuple[int, int] | None = None,
    slope_tol: float = DEFAULT_SLOPE_TOL,
    ratio_cap: float = DEFAULT_RATIO_CAP,
) -> Verdict:
    """Two-sided comparability verdict on a common window.

    Certified when the fitted slopes agree within `slope_tol` and the
    pointwise ratio stays inside [1/C, C] for an observed C <= cap.
    """
    common = np.intersect1d(a.ns, b.ns)
    if window is not None:
        common = common[(common >= window[0]) & (common <= window[1])]
    if common.size < 4:
        raise GridMismatchError(
            f"series '{a.label}' and '{b.label}' share only {common.size} indices in window"
        )
    av = np.array([a.at(int(n)) for n in common])
    bv = np.array([b.at(int(n)) for n in common])
    win = (int(common[0]), int(common[-1]))
    fa = fit_loglog(RateSeries(common, av, a.label), win)
    fb = fit_loglog(RateSeries(common, bv, b.label), win)
    ratio = av / bv
    observed_c = float(max(ratio.max(), (1.0 / ratio).max()))
    slope_gap = abs(fa.slope - fb.slope)
    ok = slope_gap <= slope_tol and observed_c <= ratio_cap
    status = STATUS_CERTIFIED if ok else STATUS_INCONCLUSIVE
    detail = f"slope gap {slope_gap:.4f} (tol {slope_tol}), ratio constant {observed_c:.4f} (cap {ratio_cap})"
    claim = f"{a.label} and {b.label} are asymptotically comparable on n in [{win[0]}, {win[1]}]"
    return Verdict(claim, (fa, fb), status, detail, observed_constant=observed_c)


def gap_report(upper_series: RateSeries, lower_series: RateSeries) -> SlopeReport:
    """Slope of the pointwise ratio upper/lower on their shared grid.

    A positive slope quantifies how much slower the upper-bound scale
    decays than the reference scale.
    """
    if upper_series.ns.shape != lower_series.ns.shape or np.any(upper_series.ns != lower_series.ns):
        raise GridMismatchError(
            f"series '{upper_series.label}' and '{lower_series.label}' are on different index grids"
        )
    ratio = RateSeries(
        upper_series.ns,
        upper_series.values / lower_series.values,
        f"gap[{upper_series.label}/{lower_series.label}]",
    )
    return fit_loglog(ratio)


def loglog_log_diagnostic(series: RateSeries, exponent: float) -> np.ndarray:
    """Residual diagnostic for families with logarithmic factors.

    Returns log(value * n^(-exponent)) against log log n; no verdict is
    attached because a log-exponent cannot be certified on a short
    window.
    """
    mask = series.ns >= 2
    ns = series.ns[mask].astype(float)
    comp = series.values[mask] * ns ** (-exponent)
    return np.column_stack([np.log(np.log(ns)), np.log(comp)])
