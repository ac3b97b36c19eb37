"""Activation functions grouped by growth class.

* ``E1``: ``|tau(z)| = O(|z|^beta)`` with ``0 <= beta < 1`` (sub-linear).
* ``E2``: ``|tau(z)| ~ |z|^gamma`` on both sides, strictly increasing for
  ``|z| > a``.
* ``E3``: ``tau(z) ~ z^gamma`` as ``z -> +inf``, ``|tau(z)| = O(|z|^beta)``
  with ``beta < gamma`` as ``z -> -inf``, strictly increasing for ``z > a``.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .stable import TailAsymptote, abs_moment_of, c_alpha

__all__ = ["ActivationSpec", "ActivationWarning", "builtin", "custom", "tau_tail_asymptote", "BUILTIN_NAMES"]

CLASSES = ("E1", "E2", "E3")
BUILTIN_NAMES = ("tanh", "identity", "relu", "odd_power", "positive_part_power")


class ActivationWarning(UserWarning):
    """Numeric sanity check disagrees with the declared class metadata."""


@dataclass(frozen=True)
class ActivationSpec:
    """An activation together with the metadata the limit formulas read.

    ``eval`` must accept numpy arrays.  ``gamma`` is the growth exponent
    (E2/E3), ``beta_bound`` the sub-linear bound (E1) or the negative-side
    bound (E3), ``threshold`` the ``a`` beyond which the activation increases
    strictly.
    """

    name: str
    eval: Callable = field(compare=False, repr=False)
    class_tag: str
    gamma: float | None = None
    beta_bound: float = 0.0
    threshold: float = 1.0
    params: tuple = ()

    def __post_init__(self):
        if self.class_tag not in CLASSES:
            raise ValueError(f"class_tag must be one of {CLASSES}, got {self.class_tag!r}")
        if self.beta_bound < 0:
            raise ValueError("beta_bound must be non-negative")
        if self.class_tag == "E1":
            if self.beta_bound >= 1:
                raise ValueError("E1 activations need beta_bound < 1")
        else:
            if self.gamma is None or not self.gamma > 0:
                raise ValueError(f"{self.class_tag} activations need gamma > 0")
            if self.class_tag == "E3" and not self.beta_bound < self.gamma:
                raise ValueError("E3 activations need beta_bound < gamma")
        if not self.threshold > 0:
            raise ValueError("threshold must be positive")

    @property
    def c_tau(self) -> float:
        return 0.5 if self.class_tag == "E3" else 1.0

    @property
    def growth(self) -> float:
        """Power bounding ``|tau(z)|`` at infinity."""
        return self.beta_bound if self.class_tag == "E1" else float(self.gamma)

    def __call__(self, z):
        return self.eval(z)

    def key(self) -> tuple:
        return (self.name, self.params, self.class_tag, self.gamma, self.beta_bound)

    def abs_moment(self, alpha: float, sigma: float, r: float) -> float:
        """``E|tau(Z)|^r`` for ``Z ~ S_alpha(sigma)``."""
        return _cached_moment(self, float(alpha), float(sigma), float(r))

    def describe(self) -> dict:
        return {
            "kind": self.name,
            "params": list(self.params),
            "class": self.class_tag,
            "gamma": self.gamma,
            "beta_bound": self.beta_bound,
            "c_tau": self.c_tau,
        }


_MOMENTS: dict = {}


def _cached_moment(spec: ActivationSpec, alpha: float, sigma: float, r: float) -> float:
    key = (spec.key(), id(spec.eval) if spec.name == "custom" else None, alpha, sigma, r)
    val = _MOMENTS.get(key)
    if val is None:
        scalar = lambda z: float(spec.eval(np.float64(z)))
        val = abs_moment_of(scalar, alpha, sigma, r, growth=spec.growth)
        # dict assignment is atomic; a duplicate computation is harmless
        _MOMENTS[key] = val
    return val


def _relu(z):
    return np.maximum(z, 0.0)


def _identity(z):
    return np.asarray(z, dtype=float) * 1.0


def _odd_power(gamma):
    def f(z):
        z = np.asarray(z, dtype=float)
        return np.sign(z) * np.abs(z) ** gamma

    return f


def _positive_part_power(gamma):
    def f(z):
        z = np.asarray(z, dtype=float)
        return np.where(z > 0, np.abs(z) ** gamma, 0.0)

    return f


def builtin(name: str, gamma: float | None = None) -> ActivationSpec:
    """Named activations with their class metadata.

    ``odd_power`` is ``sign(z)|z|^gamma`` (E2); ``positive_part_power`` is
    ``z^gamma`` on ``z >= 0`` and 0 otherwise (E3).
    """
    if name == "tanh":
        return ActivationSpec("tanh", np.tanh, "E1", beta_bound=0.0)
    if name in ("identity", "id"):
        return ActivationSpec("identity", _identity, "E2", gamma=1.0)
    if name == "relu":
        return ActivationSpec("relu", _relu, "E3", gamma=1.0, beta_bound=0.0)
    if name in ("odd_power", "positive_part_power"):
        if gamma is None:
            raise ValueError(f"{name} needs a gamma")
        gamma = float(gamma)
        if not gamma > 0:
            raise ValueError(f"gamma must be positive, got {gamma}")
        if name == "odd_power":
            return ActivationSpec(name, _odd_power(gamma), "E2", gamma=gamma, params=(gamma,))
        return ActivationSpec(name, _positive_part_power(gamma), "E3", gamma=gamma, beta_bound=0.0, params=(gamma,))
    raise ValueError(f"unknown activation {name!r}; known: {', '.join(BUILTIN_NAMES)}")


def custom(
    eval: Callable,
    class_tag: str,
    gamma: float | None = None,
    beta_bound: float = 0.0,
    threshold: float = 1.0,
    check: bool = True,
) -> ActivationSpec:
    """Wrap a user function with caller-declared class metadata.

    Class membership cannot be proven numerically, so the check below only
    warns: monotonicity beyond ``threshold`` and ``tau(z) / z^gamma -> 1`` on
    a log-spaced grid for E2/E3, the growth bound for E1.
    """
    spec = ActivationSpec("custom", eval, class_tag, gamma=gamma, beta_bound=beta_bound, threshold=threshold)
    if check:
        sanity_check(spec)
    return spec


def sanity_check(spec: ActivationSpec, z_max: float = 1e6) -> list[str]:
    """Spot-check the declared metadata; returns (and warns about) any findings."""
    problems = []
    a = spec.threshold
    grid = np.geomspace(max(a, 1e-3) * 1.01, max(z_max, 10 * a), 400)
    with np.errstate(all="ignore"):
        pos = np.asarray(spec.eval(grid), dtype=float)
        neg = np.asarray(spec.eval(-grid), dtype=float)
    if spec.class_tag == "E1":
        ratio = np.maximum(np.abs(pos), np.abs(neg)) / grid**spec.beta_bound
        if ratio[-1] > 10 * max(ratio[0], 1.0):
            problems.append("E1 bound |tau(z)| = O(|z|^beta_bound) looks violated")
    else:
        g = spec.gamma
        if np.any(np.diff(pos) <= 0):
            problems.append(f"not strictly increasing beyond threshold {a}")
        if abs(pos[-1] / grid[-1] ** g - 1.0) > 0.05:
            problems.append(f"tau(z) / z^{g} does not approach 1")
        if spec.class_tag == "E2":
            if np.any(np.diff(neg) >= 0):
                problems.append(f"not strictly increasing below -{a}")
            if abs(abs(neg[-1]) / grid[-1] ** g - 1.0) > 0.05:
                problems.append(f"|tau(-z)| / z^{g} does not approach 1")
        else:
            b = spec.beta_bound
            ratio = np.abs(neg) / grid**b
            if ratio[-1] > 10 * max(ratio[0], 1.0):
                problems.append(f"negative side exceeds O(|z|^{b})")
    for p in problems:
        warnings.warn(f"activation {spec.name}: {p}", ActivationWarning, stacklevel=3)
    return problems


def tau_tail_asymptote(spec: ActivationSpec, alpha: float, sigma: float) -> TailAsymptote:
    """``P(|tau(Y)| > t) ~ c_tau C_alpha sigma^alpha t^(-alpha/gamma)`` for ``Y ~ S_alpha(sigma)``."""
    if spec.class_tag == "E1":
        raise ValueError("E1 activations have no power-law tail for tau(Y)")
    if not (0 < alpha < 2):
        raise ValueError("tail asymptote needs 0 < alpha < 2")
    return TailAsymptote(alpha / spec.gamma, spec.c_tau * c_alpha(alpha) * sigma**alpha)

