from ._channel import DEFAULT_GRID_SIZE
from ._channel import ChannelModel
from ._channel import DopplerKind
from ._channel import DopplerModel
from ._channel import FrequencyGrid
from ._channel import LosTaps
from ._channel import PowerProfile
from ._channel import ProfileKind
from ._channel import build_delta_doppler
from ._channel import build_exponential_doppler
from ._channel import build_jakes_doppler
from ._channel import build_los_taps
from ._channel import make_grid
from ._channel import normalize_for_snr
from ._channel import rho_from_db
from ._channel import rho_to_db
from ._channel import transfer_function
from ._cli import Trend
from ._cli import classify_trend
from ._cli import main
from ._config import DopplerConfig
from ._config import LosConfig
from ._config import ModelConfig
from ._config import ProfileConfig
from ._config import ProfileParams
from ._config import SnrConfig
from ._config import SweepConfig
from ._config import SweepVariable
from ._config import apply_sweep_value
from ._config import build_model
from ._config import check_sweep
from ._config import dump_config
from ._config import load_config
from ._config import parse_config
from ._errors import ConfigError
from ._errors import ConvergenceError
from ._errors import EmbeddingError
from ._errors import NumericalError
from ._errors import QuadratureError
from ._errors import StateInvariantError
from ._mutual_info import MpLaw
from ._mutual_info import MutualInfoResult
from ._mutual_info import QuadratureEstimate
from ._mutual_info import deq_mutual_information
from ._mutual_info import deterministic_only_mutual_info
from ._mutual_info import mp_mutual_information
from ._mutual_info import mp_stieltjes
from ._mutual_info import mutual_info_via_quadrature
from ._mutual_info import nats_to_bits
from ._reader import ResultReader
from ._records import CheckRecord
from ._records import ModelColumns
from ._records import MonteCarloRecord
from ._records import SolveRecord
from ._records import TrialRecord
from ._records import ValidationRecord
from ._selftest import run_selftest
from ._solver import DeqState
from ._solver import SolverDiagnostics
from ._solver import SolverOptions
from ._solver import StieltjesCheck
from ._solver import StieltjesReport
from ._solver import apply_map_h
from ._solver import check_stieltjes_properties
from ._solver import continuity_bound
from ._solver import contraction_threshold
from ._solver import in_contraction_region
from ._solver import initial_state
from ._solver import perturb_state
from ._solver import solve
from ._solver import state_residual
from ._solver import state_violations
from ._solver import stieltjes_p
from ._solver import stieltjes_report
from ._writer import ResultWriter

__all__ = [
    "DEFAULT_GRID_SIZE",
    "ChannelModel",
    "DopplerKind",
    "DopplerModel",
    "FrequencyGrid",
    "LosTaps",
    "PowerProfile",
    "ProfileKind",
    "build_delta_doppler",
    "build_exponential_doppler",
    "build_jakes_doppler",
    "build_los_taps",
    "make_grid",
    "normalize_for_snr",
    "rho_from_db",
    "rho_to_db",
    "transfer_function",
    "Trend",
    "classify_trend",
    "main",
    "DopplerConfig",
    "LosConfig",
    "ModelConfig",
    "ProfileConfig",
    "ProfileParams",
    "SnrConfig",
    "SweepConfig",
    "SweepVariable",
    "apply_sweep_value",
    "build_model",
    "check_sweep",
    "dump_config",
    "load_config",
    "parse_config",
    "ConfigError",
    "ConvergenceError",
    "EmbeddingError",
    "NumericalError",
    "QuadratureError",
    "StateInvariantError",
    "MpLaw",
    "MutualInfoResult",
    "QuadratureEstimate",
    "deq_mutual_information",
    "deterministic_only_mutual_info",
    "mp_mutual_information",
    "mp_stieltjes",
    "mutual_info_via_quadrature",
    "nats_to_bits",
    "ResultReader",
    "CheckRecord",
    "ModelColumns",
    "MonteCarloRecord",
    "SolveRecord",
    "TrialRecord",
    "ValidationRecord",
    "run_selftest",
    "DeqState",
    "SolverDiagnostics",
    "SolverOptions",
    "StieltjesCheck",
    "StieltjesReport",
    "apply_map_h",
    "check_stieltjes_properties",
    "continuity_bound",
    "contraction_threshold",
    "in_contraction_region",
    "initial_state",
    "perturb_state",
    "solve",
    "state_residual",
    "state_violations",
    "stieltjes_p",
    "stieltjes_report",
    "ResultWriter",
]
