"""Coverage and secrecy analysis for hard-core aerial networks.

Two backends over one parameter record: a closed-form evaluator for
coverage probability, secrecy probability and secrecy throughput, and a
Monte Carlo simulator that realizes full network snapshots and estimates
the same metrics by direct SINR evaluation. A sweep CLI and an HTTP
service drive both and cross-validate them.
"""
from .params import (
    ChannelParams,
    ConfigError,
    DegenerateChannelError,
    InfeasibleTargetError,
    NumericError,
    SamplingError,
    SystemParams,
    db_to_linear,
    dbm_to_watts,
    linear_to_db,
    watts_to_dbm,
)

__version__ = "0.1.0"

from .analytic import (  # noqa: E402
    QuadratureSpec,
    combine_throughput,
    coverage_probability,
    default_quadrature,
    secrecy_probability,
    secrecy_throughput,
)
from .config import DEFAULT_CONFIG, LoadedConfig, load_config, parse_config  # noqa: E402
from .montecarlo import MetricEstimate, Stream, substream  # noqa: E402
from .point_process import (  # noqa: E402
    HardCoreParams,
    parent_intensity_from_target,
    sample_mhcpp,
    sample_palm_mhcpp,
)
from .simulator import (  # noqa: E402
    SimConfig,
    TrialOutcome,
    compare,
    default_window,
    estimate_all,
    estimate_cp,
    estimate_sp,
    estimate_st,
    run_trial,
)
from .sweep import (  # noqa: E402
    CSV_COLUMNS,
    SweepResult,
    SweepRow,
    SweepSpec,
    apply_parameter,
    parse_csv,
    preset_specs,
    run_sweep,
    write_csv,
)

__all__ = [
    "ChannelParams",
    "SystemParams",
    "ConfigError",
    "NumericError",
    "SamplingError",
    "InfeasibleTargetError",
    "DegenerateChannelError",
    "db_to_linear",
    "linear_to_db",
    "dbm_to_watts",
    "watts_to_dbm",
    "QuadratureSpec",
    "default_quadrature",
    "coverage_probability",
    "secrecy_probability",
    "secrecy_throughput",
    "combine_throughput",
    "MetricEstimate",
    "Stream",
    "substream",
    "HardCoreParams",
    "parent_intensity_from_target",
    "sample_mhcpp",
    "sample_palm_mhcpp",
    "SimConfig",
    "TrialOutcome",
    "run_trial",
    "estimate_cp",
    "estimate_sp",
    "estimate_st",
    "estimate_all",
    "compare",
    "default_window",
    "DEFAULT_CONFIG",
    "LoadedConfig",
    "load_config",
    "parse_config",
    "CSV_COLUMNS",
    "SweepSpec",
    "SweepRow",
    "SweepResult",
    "apply_parameter",
    "run_sweep",
    "preset_specs",
    "parse_csv",
    "write_csv",
    "__version__",
]
