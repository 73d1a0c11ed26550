"""Basis risk in parametric insurance: copula simulation, tail metrics, EVT and a flood CART study."""
from .copulas import CopulaSpec, Family, sample_copula, tau_to_param, param_to_tau
from .errors import DomainError, EmptyEstimateError, FitError
from .evt import GpdFit, fit_gpd, pot_fit, qq_exponential
from .gaussian_oracle import GaussianPairSpec
from .margins import ParetoSpec, PayoffTransform, TransformedParetoSpec
from .simlab import BenchmarkConfig, MainSettingConfig, figure_suite, run_benchmark, run_main_setting
from .tail_metrics import ExcessCurve, PairedSample, excess_curve, kendall_tau

__version__ = "0.1.0"
