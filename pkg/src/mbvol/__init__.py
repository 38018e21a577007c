"""Modulated bipower variation estimators for noisy high-frequency prices."""

from .constants import (
    BiasConstants,
    abs_moment,
    bias_constants,
    clt_constant_A,
    exact_block_variances,
    finite_sample_nu1,
    optimal_constants,
)
from .errors import ConfigurationError, LoadError, UndefinedStatisticError
from .estimators import (
    BlockScheme,
    Estimate,
    block_average,
    block_averages,
    confidence_interval,
    feasible_variance,
    make_block_scheme,
    make_gamma_scheme,
    mbv,
    mbv_robust,
    mmv,
    mmv_gamma,
    mrq,
    mrv,
    mtq,
    omega_hat,
    scheme_constants,
    standardized_iv_stat,
)
from .experiments import (
    ExperimentConfig,
    aggregate,
    histogram_export,
    load_config,
    load_preset,
    mix_seed,
    run_experiment,
)
from .io import TickSeries, load_ticks, regularize
from .simulate import (
    Observations,
    SimPath,
    SVModelParams,
    add_jumps,
    add_noise,
    make_rng,
    simulate_constant_vol_path,
    simulate_sv_path,
)

__version__ = "0.1.0"
