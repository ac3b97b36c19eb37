"""Reference computations kept independent of the library code paths."""

import math

import numpy as np
from scipy import integrate, special


def zolotarev_cdf(alpha, x):
    """Standard symmetric stable cdf from Zolotarev's finite-interval integral."""
    if x == 0:
        return 0.5
    if x < 0:
        return 1.0 - zolotarev_cdf(alpha, -x)
    if alpha == 1.0:
        return 0.5 + math.atan(x) / math.pi
    expo = alpha / (alpha - 1.0)

    def v(theta):
        return (math.cos(theta) / math.sin(alpha * theta)) ** expo * math.cos((alpha - 1) * theta) / math.cos(theta)

    def f(theta):
        arg = -(x**expo) * v(theta)
        return math.exp(arg) if arg > -745 else 0.0

    val, _ = integrate.quad(f, 0.0, math.pi / 2, epsabs=1e-13, epsrel=1e-12, limit=500)
    c1 = 0.5 if alpha < 1 else 1.0
    return c1 + math.copysign(1.0, 1.0 - alpha) * val / math.pi


def zolotarev_pdf(alpha, x):
    x = abs(x)
    if alpha == 1.0:
        return 1.0 / (math.pi * (1 + x * x))
    if x == 0:
        return special.gamma(1 + 1 / alpha) / math.pi
    expo = alpha / (alpha - 1.0)

    def v(theta):
        return (math.cos(theta) / math.sin(alpha * theta)) ** expo * math.cos((alpha - 1) * theta) / math.cos(theta)

    def f(theta):
        vt = v(theta)
        arg = -(x**expo) * vt
        return vt * math.exp(arg) if arg > -745 else 0.0

    val, _ = integrate.quad(f, 0.0, math.pi / 2, epsabs=1e-14, epsrel=1e-12, limit=500)
    return alpha * x ** (1 / (alpha - 1)) / (math.pi * abs(alpha - 1)) * val


def stable_abs_moment(alpha, sigma, r):
    """Closed form of E|Z|^r for Z ~ S_alpha(sigma), 0 < r < alpha."""
    return (
        sigma**r
        * 2**r
        * special.gamma((1 + r) / 2)
        * special.gamma(1 - r / alpha)
        / (math.sqrt(math.pi) * special.gamma(1 - r / 2))
    )


def c_alpha_by_quadrature(alpha):
    """(int_0^inf x^-alpha sin x dx)^-1 by direct oscillatory quadrature."""
    head, _ = integrate.quad(lambda x: x ** (-alpha) * math.sin(x), 0.0, math.pi, epsabs=1e-14, epsrel=1e-13, limit=400)
    tail, _ = integrate.quad(lambda x: x ** (-alpha), math.pi, np.inf, weight="sin", wvar=1.0, limlst=400)
    return 1.0 / (head + tail)


def ks_distance(samples, cdf):
    """Two-sided KS sup distance of sorted samples against a vectorized cdf."""
    x = np.sort(np.asarray(samples, dtype=float))
    n = x.size
    f = cdf(x)
    i = np.arange(1, n + 1)
    return float(max(np.max(i / n - f), np.max(f - (i - 1) / n)))
