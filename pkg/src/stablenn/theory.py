"""Closed-form large-width limits.

Everything here is deterministic: generalized-CLT normalization, tail
asymptotics of ``X * tau(Y)``, shallow limit laws and the layer-by-layer
scale recursions of deep networks grown one layer at a time.

Log-corrected cases use the ``(n L(n))^(-1/p)`` convention with the scale
``((c + d) / C_p)^(1/p)``.  When ``L(z) = log z`` the ratio
``L((n log n)^(1/p)) / L(n)`` tends to ``1/p`` rather than 1, so for ``p != 1``
the exact limit scale is this value times ``p^(-1/p)``; at ``p = 1`` the
two agree.  Finite-``n`` samples also carry a slowly decaying
``log log n / log n`` bias in these cases.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from fractions import Fraction

import numpy as np

from .activations import ActivationSpec
from .stable import TailAsymptote, c_alpha, frac_abs_moment

__all__ = [
    "LimitPrediction",
    "LayerScaleSequence",
    "gclt_limit",
    "product_tail",
    "shallow_limit",
    "deep_recursion",
    "relu_explicit_scale",
    "compare_exponents",
    "shallow_exponent",
    "first_layer_scale",
]


@dataclass(frozen=True)
class LimitPrediction:
    """Predicted limit law ``S_stability(scale, skewness)``.

    The sum is normalized by ``n^(-1/p)``, or ``(n log n)^(-1/p)`` when
    ``log_correction`` holds, with ``p = scaling_exponent``.  ``centering`` is
    the per-term shift ``a_n``: 0, the slope of ``log n`` (p = 1), or the mean.
    """

    stability: float
    scale: float
    scaling_exponent: float
    log_correction: bool = False
    centering: float = 0.0
    skewness: float = 0.0
    per_layer: tuple = field(default=())

    def __post_init__(self):
        for name in ("stability", "scale", "scaling_exponent", "centering", "skewness"):
            object.__setattr__(self, name, float(getattr(self, name)))
        object.__setattr__(self, "per_layer", tuple((float(a), float(s)) for a, s in self.per_layer))
        if not (0 < self.stability <= 2):
            raise ValueError(f"stability must lie in (0, 2], got {self.stability}")
        if not self.scale > 0:
            raise ValueError(f"scale must be positive, got {self.scale}")
        if not self.scaling_exponent > 0:
            raise ValueError("scaling exponent must be positive")

    @property
    def symmetric(self) -> bool:
        return self.skewness == 0.0 and self.centering == 0.0

    def normalizer(self, n: int) -> float:
        """Multiplier applied to the raw sum of ``n`` terms."""
        count = n * math.log(n) if self.log_correction else n
        return count ** (-1.0 / self.scaling_exponent)

    def to_dict(self) -> dict:
        out = asdict(self)
        out["per_layer"] = [{"layer": i + 1, "stability": a, "scale": s} for i, (a, s) in enumerate(self.per_layer)]
        return out

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)


@dataclass(frozen=True)
class LayerScaleSequence:
    """``(stability_l, sigma_l)`` for layers ``l = 1 .. L+1``."""

    layers: tuple
    scaling_exponent: float
    log_correction: bool

    def __post_init__(self):
        object.__setattr__(self, "layers", tuple((float(a), float(s)) for a, s in self.layers))
        if not self.layers:
            raise ValueError("empty layer sequence")
        if any(not s > 0 for _, s in self.layers):
            raise ValueError("layer scales must be positive")

    def __len__(self):
        return len(self.layers)

    def __getitem__(self, i):
        return self.layers[i]

    @property
    def output(self) -> tuple:
        return self.layers[-1]

    def prediction(self) -> LimitPrediction:
        a, s = self.output
        return LimitPrediction(a, s, self.scaling_exponent, self.log_correction, per_layer=self.layers)


# --------------------------------------------------------------------------
# exponent comparison


def _as_fraction(x: float) -> Fraction | None:
    f = Fraction(x).limit_denominator(10_000)
    return f if abs(float(f) - x) <= 1e-15 * max(1.0, abs(x)) else None


def compare_exponents(gamma: float, alpha_num: float, alpha_den: float) -> int:
    """Sign of ``gamma - alpha_num / alpha_den``.

    Exact on short rationals (e.g. 1.5 == 3/2); otherwise values within a
    relative 1e-12 count as equal, which routes them to the log-corrected case.
    """
    fr = [_as_fraction(v) for v in (gamma, alpha_num, alpha_den)]
    if all(f is not None for f in fr):
        diff = fr[0] * fr[2] - fr[1]
        return (diff > 0) - (diff < 0)
    lhs, rhs = gamma * alpha_den, alpha_num
    if abs(lhs - rhs) <= 1e-12 * max(abs(lhs), abs(rhs)):
        return 0
    return 1 if lhs > rhs else -1


# --------------------------------------------------------------------------
# generalized CLT


def gclt_limit(c: float, d: float, p: float, log_factor: bool = False, mean: float | None = None) -> LimitPrediction:
    """Limit of normalized i.i.d. sums with ``P(Z > z) ~ c z^-p L(z)``, ``P(Z < -z) ~ d z^-p L(z)``.

    ``L`` is 1 or ``log`` (``log_factor``).  The scale is ``((c + d) / C_p)^(1/p)``
    and the skewness ``(c - d) / (c + d)``.  For ``1 < p < 2`` the centering is
    the mean, which the caller supplies unless the tails are balanced.
    """
    if not (0 < p < 2):
        raise ValueError(f"p must lie in (0, 2), got {p}")
    if c < 0 or d < 0 or not c + d > 0:
        raise ValueError("need c, d >= 0 with c + d > 0")
    if p < 1:
        centering = 0.0
    elif p == 1:
        centering = float(c - d)
    else:
        if mean is None:
            if c != d:
                raise ValueError("1 < p < 2 with unbalanced tails needs the mean as centering")
            mean = 0.0
        centering = float(mean)
    scale = ((c + d) / c_alpha(p)) ** (1.0 / p)
    return LimitPrediction(p, scale, p, bool(log_factor), centering, (c - d) / (c + d))


# --------------------------------------------------------------------------
# tails of X * tau(Y)


def _log_branch_constant(spec, a_bar, sigma_x, sigma_y):
    g = spec.gamma
    return spec.c_tau * a_bar * c_alpha(a_bar) * c_alpha(a_bar * g) * sigma_x**a_bar * sigma_y ** (a_bar * g)


def product_tail(alpha_x: float, sigma_x: float, alpha_y: float, sigma_y: float, spec: ActivationSpec) -> TailAsymptote:
    """Survival asymptote of ``|X tau(Y)|``, ``X ~ S_alpha_x(sigma_x)``, ``Y ~ S_alpha_y(sigma_y)``.

    In the equal-rate case the two log-tails convolve and pick up a factor
    ``alpha_bar log z``; the constant carries that ``alpha_bar``.
    """
    if spec.class_tag == "E1":
        if not spec.beta_bound * alpha_x < alpha_y:
            raise ValueError("E1 tail needs beta_bound * alpha_x < alpha_y")
        if not alpha_x < 2:
            raise ValueError("alpha_x = 2 has no power tail")
        m = spec.abs_moment(alpha_y, sigma_y, alpha_x)
        return TailAsymptote(alpha_x, c_alpha(alpha_x) * sigma_x**alpha_x * m)
    g = spec.gamma
    cmp = compare_exponents(g, alpha_y, alpha_x)
    if cmp == 0:
        a_bar = alpha_x
        if not (alpha_x < 2 and alpha_y < 2):
            raise ValueError("equal-rate case needs both indices below 2")
        return TailAsymptote(a_bar, _log_branch_constant(spec, a_bar, sigma_x, sigma_y), log_factor=True)
    if cmp > 0:
        a_bar = alpha_y / g
        if not alpha_y < 2:
            raise ValueError("alpha_y = 2 gives tau(Y) no power tail")
        m = frac_abs_moment(alpha_x, sigma_x, a_bar)
        return TailAsymptote(a_bar, spec.c_tau * c_alpha(alpha_y) * sigma_y**alpha_y * m)
    a_bar = alpha_x
    if not alpha_x < 2:
        raise ValueError("alpha_x = 2 has no power tail")
    m = spec.abs_moment(alpha_y, sigma_y, a_bar)
    return TailAsymptote(a_bar, c_alpha(a_bar) * sigma_x**a_bar * m)


# --------------------------------------------------------------------------
# shallow networks


def _gaussian_branch(alpha0: float, alpha1: float, spec: ActivationSpec) -> bool:
    return alpha1 == 2 and (alpha0 == 2 or 2 * spec.growth < alpha0)


def shallow_exponent(alpha0: float, alpha1: float, spec: ActivationSpec) -> tuple[float, bool]:
    """``(p, log_correction)`` of the shallow normalization, without any quadrature."""
    if _gaussian_branch(alpha0, alpha1, spec):
        return 2.0, False
    if spec.class_tag == "E1":
        return float(alpha1), False
    cmp = compare_exponents(spec.gamma, alpha0, alpha1)
    if cmp > 0:
        return alpha0 / spec.gamma, False
    return float(alpha1), cmp == 0


def _gaussian_shallow(alpha0, sigma0, sigma1, spec):
    m = spec.abs_moment(alpha0, sigma0, 2.0)
    return LimitPrediction(2.0, sigma1 * math.sqrt(m), 2.0)


def shallow_limit(alpha0: float, sigma0: float, alpha1: float, sigma1: float, spec: ActivationSpec) -> LimitPrediction:
    """Limit of ``sum_j w_j tau(w0_j)`` with ``w0 ~ S_alpha0(sigma0)``, ``w ~ S_alpha1(sigma1)``.

    With ``alpha_bar = min(alpha1, alpha0 / gamma)`` the sum is normalized by
    ``n^(-1/alpha_bar)``, times ``(log n)^(-1/alpha_bar)`` when
    ``gamma == alpha0 / alpha1``.  Gaussian output weights (``alpha1 = 2``)
    with a finite second moment of ``tau(w0)`` fall back to the ordinary CLT.
    """
    for a in (alpha0, alpha1):
        if not (0 < a <= 2):
            raise ValueError(f"stability must lie in (0, 2], got {a}")
    if _gaussian_branch(alpha0, alpha1, spec):
        return _gaussian_shallow(alpha0, sigma0, sigma1, spec)
    if spec.class_tag == "E1":
        if not spec.beta_bound * alpha1 < alpha0:
            raise ValueError("E1 limit needs beta_bound * alpha1 < alpha0")
        m = spec.abs_moment(alpha0, sigma0, alpha1)
        return LimitPrediction(alpha1, sigma1 * m ** (1.0 / alpha1), alpha1)
    g = spec.gamma
    cmp = compare_exponents(g, alpha0, alpha1)
    if cmp > 0:
        a_bar = alpha0 / g
        if not alpha0 < 2:
            raise ValueError("alpha0 = 2 is outside the heavy-tailed regime")
        m = frac_abs_moment(alpha1, 1.0, a_bar)
        ratio = spec.c_tau * c_alpha(a_bar * g) / c_alpha(a_bar) * m
        return LimitPrediction(a_bar, sigma0**g * sigma1 * ratio ** (1.0 / a_bar), a_bar)
    if cmp == 0:
        a_bar = alpha1
        if not (alpha0 < 2 and alpha1 < 2):
            raise ValueError("equal-rate case needs both indices below 2")
        scale = sigma0**g * sigma1 * (spec.c_tau * a_bar * c_alpha(g * a_bar)) ** (1.0 / a_bar)
        return LimitPrediction(a_bar, scale, a_bar, log_correction=True)
    a_bar = alpha1
    # moment taken under the pre-activation law S_alpha0(sigma0)
    m = spec.abs_moment(alpha0, sigma0, a_bar)
    return LimitPrediction(a_bar, sigma1 * m ** (1.0 / a_bar), a_bar)


# --------------------------------------------------------------------------
# deep networks


def first_layer_scale(alpha: float, sigma_w: float, sigma_b: float, x) -> float:
    """Scale of ``sigma_w <w, x> + sigma_b b`` with i.i.d. ``S_alpha(1)`` entries."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if x.ndim != 1 or x.size == 0:
        raise ValueError("input must be a non-empty vector")
    return (sigma_w**alpha * float(np.sum(np.abs(x) ** alpha)) + sigma_b**alpha) ** (1.0 / alpha)


def deep_recursion(
    alpha: float,
    sigma_w: float,
    sigma_b: float,
    x,
    L: int,
    spec: ActivationSpec,
) -> LayerScaleSequence:
    """Per-layer limit laws of a deep network widened one layer at a time.

    Sub-linear and ``gamma <= 1`` activations keep stability ``alpha``;
    ``gamma > 1`` activations (with biases of index ``alpha / gamma^l``)
    divide the stability by ``gamma`` at every layer.
    """
    if L < 1:
        raise ValueError("depth L must be at least 1")
    if not (0 < alpha <= 2):
        raise ValueError(f"alpha must lie in (0, 2], got {alpha}")
    if sigma_w < 0 or sigma_b < 0:
        raise ValueError("sigma_w and sigma_b must be non-negative")
    sigma = first_layer_scale(alpha, sigma_w, sigma_b, x)
    layers = [(alpha, sigma)]
    cmp = 0 if spec.class_tag == "E1" else compare_exponents(spec.gamma, 1.0, 1.0)
    if spec.class_tag == "E1" or cmp < 0 or alpha == 2:
        if alpha == 2 and spec.class_tag != "E1" and cmp > 0:
            raise ValueError("super-linear activations need alpha < 2")
        for _ in range(L):
            m = spec.abs_moment(alpha, sigma, alpha)
            sigma = (sigma_w**alpha * m + sigma_b**alpha) ** (1.0 / alpha)
            layers.append((alpha, sigma))
        return LayerScaleSequence(tuple(layers), alpha, False)
    if cmp == 0:
        k = spec.c_tau * alpha * c_alpha(alpha) * sigma_w**alpha
        for _ in range(L):
            sigma = (k * sigma**alpha + sigma_b**alpha) ** (1.0 / alpha)
            layers.append((alpha, sigma))
        return LayerScaleSequence(tuple(layers), alpha, True)
    g = spec.gamma
    prev = alpha
    for _ in range(L):
        cur = prev / g
        m = frac_abs_moment(alpha, 1.0, cur)
        inner = spec.c_tau * c_alpha(prev) / c_alpha(cur) * sigma_w**cur * sigma**prev * m + sigma_b**cur
        sigma = inner ** (1.0 / cur)
        layers.append((cur, sigma))
        prev = cur
    return LayerScaleSequence(tuple(layers), prev, False)


def relu_explicit_scale(L: int, alpha: float, sigma_w: float, sigma_b: float, sigma_x: float) -> float:
    """Unrolled ReLU recursion: output scale after ``L`` hidden layers.

    ``sigma_x`` is the first-layer scale.
    """
    if L < 1:
        raise ValueError("depth L must be at least 1")
    if not (0 < alpha < 2):
        raise ValueError("alpha must lie in (0, 2)")
    k = 0.5 * alpha * c_alpha(alpha) * sigma_w**alpha
    total = k**L * sigma_x**alpha + sum(k**i for i in range(L)) * sigma_b**alpha
    return total ** (1.0 / alpha)
