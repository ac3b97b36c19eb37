"""Monte Carlo sampling of finite-width Stable networks.

Replications are grouped into fixed-size blocks.  Block ``k`` of a run draws
from its own stream ``make_rng(seed, tag, k)`` and writes into its own slice
of the output, so the result depends on ``(config, seed)`` only, never on the
number of worker threads.  Weights are generated in row chunks and discarded
after use; no weight matrix is ever held in full.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass

import numpy as np

from .activations import ActivationSpec
from .stable import make_rng, standard_symmetric
from .theory import compare_exponents, deep_recursion, first_layer_scale, shallow_exponent

__all__ = [
    "BudgetError",
    "NetworkConfig",
    "EnsembleConfig",
    "sample_shallow",
    "sample_deep",
    "sample_surface",
    "sequential_law",
    "sample_products",
    "sample_normalized_sums",
    "two_sided_pareto",
    "default_workers",
    "to_csv",
    "to_json",
]

# stream tags keep the different samplers on disjoint RNG streams
_TAG_SHALLOW, _TAG_DEEP, _TAG_SURFACE, _TAG_SUMS, _TAG_PRODUCTS = 1, 2, 3, 4, 5

# elements per generated chunk; bounds peak memory at a few tens of MB
_CHUNK_ELEMENTS = 1 << 20

SCALINGS = ("auto", "plain_n", "n_log_n")
BIAS_REGIMES = ("standard", "geometric")
GROWTH_MODES = ("exact_sequential", "finite_width")


class BudgetError(ValueError):
    """Requested run exceeds the configured draw budget."""


def default_workers() -> int:
    """Worker count from ``STABLENN_WORKERS``, else 1."""
    raw = os.environ.get("STABLENN_WORKERS", "")
    try:
        return max(1, int(raw)) if raw else 1
    except ValueError:
        return 1


@dataclass(frozen=True)
class NetworkConfig:
    """Architecture and prior of a deep network evaluated at one input."""

    alpha: float
    sigma_w: float
    sigma_b: float
    input_x: tuple
    depth_L: int
    activation: ActivationSpec
    bias_regime: str = "standard"
    scaling: str = "auto"

    def __post_init__(self):
        object.__setattr__(self, "input_x", tuple(float(v) for v in np.atleast_1d(self.input_x)))
        if not (0 < self.alpha <= 2):
            raise ValueError(f"alpha must lie in (0, 2], got {self.alpha}")
        if self.sigma_w < 0 or self.sigma_b < 0:
            raise ValueError("sigma_w and sigma_b must be non-negative")
        if len(self.input_x) < 1:
            raise ValueError("input_x needs at least one coordinate")
        if int(self.depth_L) != self.depth_L or self.depth_L < 1:
            raise ValueError("depth_L must be an integer >= 1")
        if self.bias_regime not in BIAS_REGIMES:
            raise ValueError(f"bias_regime must be one of {BIAS_REGIMES}")
        if self.scaling not in SCALINGS:
            raise ValueError(f"scaling must be one of {SCALINGS}")
        if self.bias_regime == "geometric":
            spec = self.activation
            if spec.class_tag == "E1" or compare_exponents(spec.gamma, 1.0, 1.0) <= 0:
                raise ValueError("geometric bias regime needs an E2/E3 activation with gamma > 1")
            if self.scaling == "n_log_n":
                raise ValueError("geometric bias regime uses plain n scaling")
            if self.alpha == 2:
                raise ValueError("geometric bias regime needs alpha < 2")

    @property
    def resolved_scaling(self) -> str:
        if self.scaling != "auto":
            return self.scaling
        spec = self.activation
        if spec.class_tag != "E1" and compare_exponents(spec.gamma, 1.0, 1.0) == 0 and self.bias_regime == "standard":
            return "n_log_n"
        return "plain_n"

    def layer_index(self, layer: int) -> float:
        """Stability of the weights/biases entering layer ``layer`` (1-based)."""
        if self.bias_regime == "geometric":
            return self.alpha / self.activation.gamma ** (layer - 1)
        return self.alpha

    def describe(self) -> dict:
        out = {k: v for k, v in asdict(self).items() if k != "activation"}
        out["input_x"] = list(self.input_x)
        out["activation"] = self.activation.describe()
        out["resolved_scaling"] = self.resolved_scaling
        return out


@dataclass(frozen=True)
class EnsembleConfig:
    """Width, replication count and reproducibility settings."""

    width_n: int
    replications: int
    seed: int = 0
    growth_mode: str = "exact_sequential"
    block_size: int = 256
    budget: float = 1e10

    def __post_init__(self):
        if self.width_n < 1 or self.replications < 1:
            raise ValueError("width_n and replications must be >= 1")
        if self.growth_mode not in GROWTH_MODES:
            raise ValueError(f"growth_mode must be one of {GROWTH_MODES}")
        if self.block_size < 1:
            raise ValueError("block_size must be >= 1")

    def describe(self) -> dict:
        return asdict(self)


# --------------------------------------------------------------------------
# block scheduling


def _run_blocks(total: int, block_size: int, fn, workers: int, dtype=float) -> np.ndarray:
    """Fill ``out[k*B:(k+1)*B] = fn(k, count)`` for every block ``k``."""
    out = np.empty(total, dtype=dtype)
    blocks = [(k, k * block_size, min(total, (k + 1) * block_size)) for k in range((total + block_size - 1) // block_size)]

    def job(item):
        k, lo, hi = item
        out[lo:hi] = fn(k, hi - lo)

    workers = max(1, int(workers))
    if workers == 1 or len(blocks) == 1:
        for b in blocks:
            job(b)
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(job, blocks))
    return out


def _check_budget(draws: float, budget: float):
    if draws > budget:
        raise BudgetError(f"run needs about {draws:.3g} draws, above the budget of {budget:.3g}")


def _normalizer(n: int, p: float, log: bool) -> float:
    if log:
        if n < 2:
            raise ValueError("n log n scaling needs n >= 2")
        return (n * math.log(n)) ** (-1.0 / p)
    return n ** (-1.0 / p)


def _column_chunk(rows: int, n: int) -> int:
    return max(1, min(n, _CHUNK_ELEMENTS // max(rows, 1)))


# --------------------------------------------------------------------------
# shallow networks


def sample_shallow(
    n: int,
    alpha0: float,
    sigma0: float,
    alpha1: float,
    sigma1: float,
    spec: ActivationSpec,
    scaling: str = "auto",
    seed: int = 0,
    replications: int | None = None,
    p: float | None = None,
    workers: int | None = None,
    block_size: int = 256,
    budget: float = 1e10,
):
    """Normalized shallow outputs ``nu(n)^(-1/p) sum_j w_j tau(w0_j)``.

    ``w0_j ~ S_alpha0(sigma0)`` and ``w_j ~ S_alpha1(sigma1)``.  ``p`` defaults
    to the exponent of the shallow limit; ``scaling='auto'`` adds the
    ``log n`` factor exactly when that limit is log-corrected.  Returns a float
    when ``replications`` is None, else an array of that length.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if scaling not in SCALINGS:
        raise ValueError(f"scaling must be one of {SCALINGS}")
    p_auto, log_auto = shallow_exponent(alpha0, alpha1, spec)
    p = p_auto if p is None else float(p)
    log = log_auto if scaling == "auto" else scaling == "n_log_n"
    norm = _normalizer(n, p, log)
    reps = 1 if replications is None else int(replications)
    _check_budget(2.0 * reps * n, budget)

    def block(k, count):
        rng = make_rng(seed, _TAG_SHALLOW, k)
        acc = np.zeros(count)
        step = _column_chunk(count, n)
        for lo in range(0, n, step):
            m = min(step, n - lo)
            w0 = sigma0 * standard_symmetric(alpha0, (count, m), rng)
            w = sigma1 * standard_symmetric(alpha1, (count, m), rng)
            acc += np.sum(w * spec(w0), axis=1)
        return norm * acc

    out = _run_blocks(reps, block_size, block, default_workers() if workers is None else workers)
    return float(out[0]) if replications is None else out


# --------------------------------------------------------------------------
# deep networks


def _hidden_norm(config: NetworkConfig, n: int, layer: int) -> float:
    """Normalization of the width-``n`` sum that produces layer ``layer`` (>= 2)."""
    if config.bias_regime == "geometric":
        return n ** (-(config.activation.gamma ** (layer - 1)) / config.alpha)
    return _normalizer(n, config.alpha, config.resolved_scaling == "n_log_n")


def _first_layer(config: NetworkConfig, rows, rng) -> np.ndarray:
    x = np.asarray(config.input_x)
    a = config.alpha
    g = config.sigma_w * (standard_symmetric(a, (rows, len(x)), rng) @ x)
    return g + config.sigma_b * standard_symmetric(a, rows, rng)


def _bias(config: NetworkConfig, layer: int, shape, rng):
    """Bias term of layer ``layer``; always drawn so the stream layout is fixed."""
    b = standard_symmetric(config.layer_index(layer), shape, rng)
    return config.sigma_b * b


def _dense_layer(config: NetworkConfig, h: np.ndarray, layer: int, width: int, rng) -> np.ndarray:
    """``sigma_b b + sigma_w norm * W tau(h)`` with ``W`` streamed in row chunks.

    ``h`` has shape ``(n_in, k)``: ``k`` inputs or ``k`` replications that share
    the weights.  Returns shape ``(width, k)``.
    """
    a = config.alpha
    t = config.activation(h)
    n_in = h.shape[0]
    norm = config.sigma_w * _hidden_norm(config, n_in, layer)
    out = np.empty((width, h.shape[1]))
    step = _column_chunk(n_in, width)
    for lo in range(0, width, step):
        m = min(step, width - lo)
        w = standard_symmetric(a, (m, n_in), rng)
        out[lo : lo + m] = norm * (w @ t)
    out += _bias(config, layer, (width, 1), rng)
    return out


def _deep_block_finite(config: NetworkConfig, n: int, count: int, rng) -> np.ndarray:
    res = np.empty(count)
    L = config.depth_L
    for r in range(count):
        h = _first_layer(config, n, rng)[:, None]
        for layer in range(2, L + 1):
            h = _dense_layer(config, h, layer, n, rng)
        res[r] = _dense_layer(config, h, L + 1, 1, rng)[0, 0]
    return res


def _deep_block_sequential(config: NetworkConfig, law: tuple, n: int, count: int, rng) -> np.ndarray:
    a_l, s_l = law
    L = config.depth_L
    norm = config.sigma_w * _hidden_norm(config, n, L + 1)
    acc = np.zeros(count)
    step = _column_chunk(count, n)
    for lo in range(0, n, step):
        m = min(step, n - lo)
        g = s_l * standard_symmetric(a_l, (count, m), rng)
        w = standard_symmetric(config.alpha, (count, m), rng)
        acc += np.sum(w * config.activation(g), axis=1)
    return norm * acc + _bias(config, L + 1, count, rng)


def sample_deep(config: NetworkConfig, ensemble: EnsembleConfig, workers: int | None = None) -> np.ndarray:
    """``ensemble.replications`` i.i.d. draws of the network output at ``config.input_x``.

    ``finite_width`` runs every hidden layer at width ``n``, which
    approximates joint growth.  ``exact_sequential`` replaces the layer-``L``
    units by i.i.d. draws from their sequential-growth limit law and simulates
    only the last sum at width ``n``.
    """
    n, reps = ensemble.width_n, ensemble.replications
    if ensemble.growth_mode == "finite_width":
        _check_budget(reps * n * (2.0 + len(config.input_x) + (config.depth_L - 1) * (n + 1)), ensemble.budget)

        def block(k, count):
            return _deep_block_finite(config, n, count, make_rng(ensemble.seed, _TAG_DEEP, 0, k))

    else:
        _check_budget(2.0 * reps * n, ensemble.budget)
        law = sequential_law(config)

        def block(k, count):
            return _deep_block_sequential(config, law, n, count, make_rng(ensemble.seed, _TAG_DEEP, 1, k))

    return _run_blocks(reps, ensemble.block_size, block, default_workers() if workers is None else workers)


def sequential_law(config: NetworkConfig) -> tuple:
    """``(stability, scale)`` of the layer-``L`` units under sequential growth."""
    spec = config.activation
    superlinear = spec.class_tag != "E1" and compare_exponents(spec.gamma, 1.0, 1.0) > 0
    if superlinear and config.bias_regime != "geometric":
        raise ValueError("gamma > 1 activations have a sequential limit only in the geometric bias regime")
    if config.depth_L == 1:
        return config.alpha, first_layer_scale(config.alpha, config.sigma_w, config.sigma_b, config.input_x)
    seq = deep_recursion(config.alpha, config.sigma_w, config.sigma_b, config.input_x, config.depth_L - 1, spec)
    return seq[config.depth_L - 1]


def sample_surface(config: NetworkConfig, grid, n: int, seed: int = 0) -> np.ndarray:
    """One weight realization evaluated at every input in ``grid``.

    All hidden layers have width ``n`` and every grid point sees the same
    weights, so the output is a sample path of the random function.
    """
    pts = np.asarray(grid, dtype=float)
    if pts.ndim == 1:
        pts = pts[:, None]
    d = len(config.input_x)
    if pts.ndim != 2 or pts.shape[1] != d:
        raise ValueError(f"grid points must have dimension {d}, got shape {pts.shape}")
    rng = make_rng(seed, _TAG_SURFACE)
    a = config.alpha
    w0 = standard_symmetric(a, (n, d), rng)
    b0 = standard_symmetric(a, (n, 1), rng)
    h = config.sigma_w * (w0 @ pts.T) + config.sigma_b * b0
    for layer in range(2, config.depth_L + 1):
        h = _dense_layer(config, h, layer, n, rng)
    return _dense_layer(config, h, config.depth_L + 1, 1, rng)[0]


# --------------------------------------------------------------------------
# generic i.i.d. helpers


def two_sided_pareto(p: float, size, rng: np.random.Generator, c: float = 0.5, d: float = 0.5) -> np.ndarray:
    """Draws with ``P(Z > z) = c z^-p`` and ``P(Z < -z) = d z^-p`` beyond ``(c + d)^(1/p)``."""
    if not p > 0 or c < 0 or d < 0 or not c + d > 0:
        raise ValueError("need p > 0, c, d >= 0 and c + d > 0")
    u = 1.0 - rng.random(size)
    mag = (c + d) ** (1.0 / p) * u ** (-1.0 / p)
    sign = np.where(rng.random(size) < c / (c + d), 1.0, -1.0)
    return sign * mag


def sample_normalized_sums(
    draw,
    n: int,
    replications: int,
    normalizer: float,
    centering: float = 0.0,
    seed: int = 0,
    workers: int | None = None,
    block_size: int = 256,
) -> np.ndarray:
    """``normalizer * sum_{i<=n} (Z_i - centering)`` with ``Z = draw(rng, shape)``."""

    def block(k, count):
        rng = make_rng(seed, _TAG_SUMS, k)
        acc = np.zeros(count)
        step = _column_chunk(count, n)
        for lo in range(0, n, step):
            m = min(step, n - lo)
            acc += np.sum(draw(rng, (count, m)), axis=1)
        return normalizer * (acc - n * centering)

    return _run_blocks(replications, block_size, block, default_workers() if workers is None else workers)


def sample_products(
    alpha_x: float,
    sigma_x: float,
    alpha_y: float,
    sigma_y: float,
    spec: ActivationSpec,
    count: int,
    seed: int = 0,
    workers: int | None = None,
    block_size: int = 1 << 18,
) -> np.ndarray:
    """``count`` draws of ``X tau(Y)``, ``X ~ S_alpha_x(sigma_x)``, ``Y ~ S_alpha_y(sigma_y)``."""

    def block(k, m):
        rng = make_rng(seed, _TAG_PRODUCTS, k)
        x = sigma_x * standard_symmetric(alpha_x, m, rng)
        y = sigma_y * standard_symmetric(alpha_y, m, rng)
        return x * spec(y)

    return _run_blocks(count, block_size, block, default_workers() if workers is None else workers)


# --------------------------------------------------------------------------
# serialization


def _header_lines(config: dict, normalization: str) -> list[str]:
    lines = [f"# {k} = {json.dumps(v, sort_keys=True)}" for k, v in sorted(config.items())]
    lines.append(f"# normalization = {normalization}")
    return lines


def to_csv(values, config: dict, normalization: str = "", column: str = "value") -> str:
    """CSV text: ``#``-prefixed config echo, a header row, one value per row."""
    buf = io.StringIO()
    for line in _header_lines(config, normalization):
        buf.write(line + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow([column])
    for v in np.asarray(values, dtype=float):
        w.writerow([repr(float(v))])
    return buf.getvalue()


def to_json(values, config: dict, seed: int, normalization: str = "") -> str:
    """JSON envelope ``{config, seed, normalization, values}``."""
    payload = {
        "config": config,
        "seed": seed,
        "normalization": normalization,
        "values": [float(v) for v in np.asarray(values, dtype=float)],
    }
    return json.dumps(payload, sort_keys=True)
