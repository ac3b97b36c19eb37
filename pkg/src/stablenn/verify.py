"""Estimators and verdicts comparing Monte Carlo output with predicted limits.

KS distances are reported descriptively against fixed thresholds: the
predicted parameters are plugged in, so classical KS p-values do not apply.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy import stats

from .stable import TailAsymptote, cdf_table

__all__ = [
    "Check",
    "TailRow",
    "VerificationReport",
    "DEFAULT_TOLERANCES",
    "estimate_stability",
    "estimate_scale",
    "hill_tail_index",
    "ks_against_prediction",
    "tail_scan",
    "log_factor_check",
    "verify_samples",
]

DEFAULT_TOLERANCES = {"ks": 0.05, "alpha": 0.1, "scale": 0.10, "tail": 0.25, "log_ratio": 0.15, "flat": 0.10}


@dataclass(frozen=True)
class Check:
    """One pass/fail verdict; ``observed`` is compared against ``tolerance``."""

    name: str
    tolerance: float
    observed: float
    passed: bool
    detail: str = ""


@dataclass(frozen=True)
class TailRow:
    level: float
    z: float
    observed: float
    predicted: float

    @property
    def ratio(self) -> float:
        return self.observed / self.predicted if self.predicted > 0 else math.inf


@dataclass
class VerificationReport:
    """Pure-data verification record; render with :meth:`to_json` or :meth:`to_text`."""

    alpha_hat: float
    sigma_hat: float
    ks_distance: float
    tail_table: list = field(default_factory=list)
    checks: list = field(default_factory=list)
    sample_count: int = 0
    width: int | None = None
    seed: int | None = None
    config: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_dict(self) -> dict:
        out = asdict(self)
        out["tail_table"] = [dict(asdict(r), ratio=r.ratio) for r in self.tail_table]
        out["passed"] = self.passed
        return out

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, **kw)

    def to_text(self) -> str:
        lines = [
            f"samples     {self.sample_count}",
            f"width       {self.width}",
            f"seed        {self.seed}",
            f"alpha_hat   {self.alpha_hat!r}",
            f"sigma_hat   {self.sigma_hat!r}",
            f"ks_distance {self.ks_distance!r}",
        ]
        if self.tail_table:
            lines.append("")
            lines.append(f"{'level':>8} {'z':>14} {'observed':>14} {'predicted':>14} {'ratio':>8}")
            for r in self.tail_table:
                lines.append(f"{r.level:>8.5f} {r.z:>14.6g} {r.observed:>14.6g} {r.predicted:>14.6g} {r.ratio:>8.4f}")
        lines.append("")
        lines.append(f"{'check':<22} {'tolerance':>10} {'observed':>12}  verdict")
        for c in self.checks:
            lines.append(f"{c.name:<22} {c.tolerance:>10.4g} {c.observed:>12.6g}  {'PASS' if c.passed else 'FAIL'}")
        lines.append(f"overall: {'PASS' if self.passed else 'FAIL'}")
        return "\n".join(lines)


# --------------------------------------------------------------------------
# characteristic-function regression


def _ecf_points(samples):
    x = np.asarray(samples, dtype=float).ravel()
    if x.size < 1000:
        raise ValueError(f"need at least 1000 samples, got {x.size}")
    if not np.all(np.isfinite(x)):
        raise ValueError("samples contain non-finite values")
    q1, q3 = np.percentile(x, [25, 75])
    s0 = 0.5 * (q3 - q1)
    if not s0 > 0:
        raise ValueError("degenerate samples: zero interquartile range")
    t = np.geomspace(0.1 / s0, 1.0 / s0, 24)
    re, im, re2 = (np.empty_like(t) for _ in range(3))
    for i, ti in enumerate(t):
        tx = ti * x
        re[i], im[i], re2[i] = np.cos(tx).mean(), np.sin(tx).mean(), np.cos(2.0 * tx).mean()
    mod = np.hypot(re, im)
    keep = (mod >= 0.1) & (mod < 1.0)
    if keep.sum() < 3:
        raise ValueError("too few usable characteristic-function points")
    t, mod, re2 = t[keep], mod[keep], re2[keep]
    y = np.log(-np.log(mod))
    # delta-method variance of log(-log|phi|) with a plug-in variance of |phi|
    var_mod = np.maximum(1.0 + re2 - 2.0 * mod**2, 1e-12) / (2.0 * x.size)
    w = (mod * np.log(mod)) ** 2 / var_mod
    return np.log(t), y, w


def estimate_stability(samples) -> tuple[float, float]:
    """``(alpha_hat, sigma_hat)`` by regressing ``log(-log|phi_hat(t)|)`` on ``log t``.

    The slope is ``alpha`` and the intercept ``alpha log sigma``.  The fit is
    weighted by the inverse delta-method variance; ``alpha_hat`` is clamped to
    ``(0, 2]`` and the intercept refitted when clamping occurs.
    """
    lt, y, w = _ecf_points(samples)
    slope, intercept = np.polyfit(lt, y, 1, w=np.sqrt(w))
    alpha = float(slope)
    if alpha > 2.0 or alpha <= 0.0:
        alpha = min(max(alpha, 1e-3), 2.0)
        intercept = float(np.average(y - alpha * lt, weights=w))
    return alpha, float(math.exp(intercept / alpha))


def estimate_scale(samples, alpha: float) -> float:
    """``sigma_hat`` from the same regression with the slope fixed at ``alpha``."""
    if not (0 < alpha <= 2):
        raise ValueError("alpha must lie in (0, 2]")
    lt, y, w = _ecf_points(samples)
    return float(math.exp(np.average(y - alpha * lt, weights=w) / alpha))


# --------------------------------------------------------------------------
# tails


def hill_tail_index(samples, k_fraction: float = 0.01, min_exceedances: int = 50) -> float:
    """Hill estimate of the tail index of ``|samples|`` from the top ``k`` order statistics."""
    if not (0 < k_fraction <= 0.05):
        raise ValueError("k_fraction must lie in (0, 0.05]")
    a = np.abs(np.asarray(samples, dtype=float).ravel())
    k = int(k_fraction * a.size)
    if k < min_exceedances:
        raise ValueError(f"only {k} exceedances; need at least {min_exceedances}")
    top = np.partition(a, a.size - k - 1)[a.size - k - 1 :]
    top.sort()
    threshold = top[0]
    if not threshold > 0:
        raise ValueError("threshold order statistic is zero")
    return float(1.0 / np.mean(np.log(top[1:] / threshold)))


def tail_scan(samples, asymptote: TailAsymptote, levels=(0.999,), side: str = "abs") -> list[TailRow]:
    """Empirical ``S(z) z^index`` (over ``log z`` if log-corrected) at sample quantiles.

    ``side='abs'`` scans the survival of ``|samples|``, the quantity the
    product-tail asymptotes describe; ``side='upper'`` scans ``P(X > z)``,
    which is what a one-sided stable survival asymptote describes.
    ``samples`` may be an array or a zero-argument callable returning one.
    """
    if side not in ("abs", "upper"):
        raise ValueError("side must be 'abs' or 'upper'")
    if callable(samples):
        samples = samples()
    a = np.asarray(samples, dtype=float).ravel()
    a = np.sort(np.abs(a) if side == "abs" else a)
    rows = []
    for q in levels:
        if not (0.99 <= q <= 0.9999):
            raise ValueError(f"tail level {q} outside [0.99, 0.9999]")
        z = float(np.quantile(a, q))
        if not z > 0 or (asymptote.log_factor and not z > 1):
            raise ValueError(f"quantile {z!r} too small for a tail scan")
        surv = (a.size - np.searchsorted(a, z, side="right")) / a.size
        rows.append(TailRow(q, z, float(asymptote.normalized(z, surv)), asymptote.constant))
    return rows


# --------------------------------------------------------------------------
# distances


def ks_against_prediction(samples, prediction) -> float:
    """Two-sided KS distance to ``S_stability(scale)``."""
    if prediction.skewness != 0 or prediction.centering != 0:
        raise ValueError("KS comparison needs a symmetric prediction")
    table = cdf_table(prediction.stability)
    x = np.asarray(samples, dtype=float).ravel()
    return float(stats.kstest(x, lambda v: table.cdf(v, prediction.scale)).statistic)


def verify_samples(samples, prediction, tolerances=None, width=None, seed=None, config=None,
                   tail_asymptote=None, tail_levels=(0.999,), tail_side="abs") -> VerificationReport:
    """Fit, compare and judge ``samples`` against ``prediction``.

    Checks: KS distance, ``|alpha_hat - stability|`` and the relative scale
    error; optionally the tail constant at ``tail_levels``.
    """
    tol = dict(DEFAULT_TOLERANCES)
    tol.update(tolerances or {})
    a_hat, s_hat = estimate_stability(samples)
    ks = ks_against_prediction(samples, prediction)
    scale_err = abs(s_hat / prediction.scale - 1.0)
    checks = [
        Check("ks", tol["ks"], ks, ks <= tol["ks"]),
        Check("alpha", tol["alpha"], abs(a_hat - prediction.stability), abs(a_hat - prediction.stability) <= tol["alpha"]),
        Check("scale", tol["scale"], scale_err, scale_err <= tol["scale"]),
    ]
    rows = []
    if tail_asymptote is not None:
        rows = tail_scan(samples, tail_asymptote, tail_levels, tail_side)
        for r in rows:
            err = abs(r.ratio - 1.0)
            checks.append(Check(f"tail@{r.level}", tol["tail"], err, err <= tol["tail"]))
    return VerificationReport(a_hat, s_hat, ks, rows, checks, int(np.size(samples)), width, seed, dict(config or {}))


# --------------------------------------------------------------------------
# log-correction scaling


@dataclass(frozen=True)
class LogFactorResult:
    n_grid: tuple
    sigma_plain: tuple
    sigma_log: tuple
    log_expected: bool
    checks: tuple

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)


def log_factor_check(spec, alpha: float, n_grid, replications: int, seed: int = 0, tolerances=None,
                     workers=None) -> LogFactorResult:
    """Scale of shallow outputs (``alpha0 = alpha1 = alpha``, unit scales) across widths.

    Every ensemble is normalized by ``n^(-1/alpha)``; the ``(n log n)``
    version is the same samples times ``(log n)^(-1/alpha)``.  When the limit
    is log-corrected, plain-scale ratios must track ``(log n_k / log n_0)^(1/alpha)``
    and the corrected scales must be flat; otherwise the plain scales must be flat.
    """
    from .simulate import sample_shallow
    from .theory import shallow_exponent

    n_grid = tuple(int(n) for n in n_grid)
    if len(n_grid) < 3:
        raise ValueError("n_grid needs at least 3 widths")
    if min(n_grid) < 2:
        raise ValueError("widths must be >= 2")
    tol = dict(DEFAULT_TOLERANCES)
    tol.update(tolerances or {})
    p, log_expected = shallow_exponent(alpha, alpha, spec)
    plain = []
    for i, n in enumerate(n_grid):
        v = sample_shallow(n, alpha, 1.0, alpha, 1.0, spec, scaling="plain_n", p=p, seed=seed + i,
                           replications=replications, workers=workers)
        plain.append(estimate_stability(v)[1])
    corrected = [s * math.log(n) ** (-1.0 / p) for s, n in zip(plain, n_grid)]
    checks = []
    if log_expected:
        for n, s in zip(n_grid[1:], plain[1:]):
            expected = (math.log(n) / math.log(n_grid[0])) ** (1.0 / p)
            err = abs((s / plain[0]) / expected - 1.0)
            checks.append(Check(f"log_ratio[{n}/{n_grid[0]}]", tol["log_ratio"], err, err <= tol["log_ratio"]))
        spread = max(corrected) / min(corrected) - 1.0
        checks.append(Check("n_log_n_flat", tol["flat"], spread, spread <= tol["flat"]))
    else:
        spread = max(plain) / min(plain) - 1.0
        checks.append(Check("plain_n_flat", tol["flat"], spread, spread <= tol["flat"]))
    return LogFactorResult(n_grid, tuple(plain), tuple(corrected), log_expected, tuple(checks))
