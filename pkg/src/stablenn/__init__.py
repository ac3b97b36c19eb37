"""Large-width limits of neural networks with symmetric alpha-stable parameters.

Submodules:

* :mod:`stablenn.stable`: univariate stable laws (sampling, CDF/PDF, tail
  constants, fractional moments).
* :mod:`stablenn.activations`: activation classes E1/E2/E3 and their metadata.
* :mod:`stablenn.theory`: closed-form limit predictions.
* :mod:`stablenn.simulate`: reproducible finite-width Monte Carlo.
* :mod:`stablenn.verify`: estimators and pass/fail reports.
* :mod:`stablenn.cli`: the ``stablenn`` command.
"""

from .activations import ActivationSpec, builtin, custom, tau_tail_asymptote
from .simulate import EnsembleConfig, NetworkConfig, sample_deep, sample_shallow, sample_surface
from .stable import (
    StableParams,
    TailAsymptote,
    c_alpha,
    char_fn,
    frac_abs_moment,
    sample,
    survival_asymptote,
    symmetric_cdf,
    symmetric_pdf,
)
from .theory import (
    LayerScaleSequence,
    LimitPrediction,
    deep_recursion,
    gclt_limit,
    product_tail,
    relu_explicit_scale,
    shallow_limit,
)
from .verify import (
    VerificationReport,
    estimate_stability,
    hill_tail_index,
    ks_against_prediction,
    log_factor_check,
    tail_scan,
)

__version__ = "0.1.0"
