from dataclasses import dataclass
from typing import Any
from typing import TypeVar

from mimocap._channel import DopplerKind
from mimocap._channel import ProfileKind
from mimocap._config import ModelConfig
from mimocap._config import SweepVariable


@dataclass(frozen=True, slots=True, kw_only=True)
class ModelColumns:
    """The columns that describe the model behind every result row."""

    N: int
    T: int
    L: int
    grid_size: int
    doppler: DopplerKind
    f_d: float | None
    profile: ProfileKind
    xi: float | None
    rho: float
    rho_db: float
    ricean_k: float
    sweep_variable: SweepVariable | None = None
    sweep_value: float | None = None

    @staticmethod
    def describe(
        config: ModelConfig,
        sweep_variable: SweepVariable | None = None,
        sweep_value: float | None = None,
    ) -> dict[str, Any]:
        """Collect the model columns of a configuration as keyword arguments."""
        return {
            "N": config.N,
            "T": config.T,
            "L": config.L,
            "grid_size": config.grid_size,
            "doppler": config.doppler.kind,
            "f_d": config.doppler.f_d,
            "profile": config.profile.kind,
            "xi": None if config.los is None else config.los.xi,
            "rho": config.snr.linear,
            "rho_db": config.snr.decibels,
            "ricean_k": config.snr.ricean_k,
            "sweep_variable": sweep_variable,
            "sweep_value": sweep_value,
        }


@dataclass(frozen=True, slots=True, kw_only=True)
class SolveRecord(ModelColumns):
    """One deterministic-equivalent solve; the numeric columns are empty when it failed."""

    mutual_info_nats: float | None = None
    mutual_info_bits: float | None = None
    term_logdet: float | None = None
    term_log_scalar: float | None = None
    term_cross: float | None = None
    iterations: int | None = None
    final_residual: float | None = None
    error: str | None = None


@dataclass(frozen=True, slots=True, kw_only=True)
class MonteCarloRecord(ModelColumns):
    """One Monte Carlo estimate."""

    window: int
    trials: int
    seed: int
    mutual_info_nats: float | None = None
    mutual_info_bits: float | None = None
    stderr_nats: float | None = None
    error: str | None = None


@dataclass(frozen=True, slots=True, kw_only=True)
class ValidationRecord(ModelColumns):
    """A comparison of the deterministic equivalent with a Monte Carlo estimate."""

    window: int
    trials: int
    seed: int
    tolerance: float
    deq_nats: float | None = None
    deq_bits: float | None = None
    mc_nats: float | None = None
    mc_bits: float | None = None
    stderr_nats: float | None = None
    abs_gap: float | None = None
    rel_gap: float | None = None
    passed: bool | None = None
    error: str | None = None


@dataclass(frozen=True, slots=True, kw_only=True)
class TrialRecord:
    """The mutual information of one Monte Carlo trial."""

    trial: int
    window: int
    mutual_info_nats: float
    mutual_info_bits: float


@dataclass(frozen=True, slots=True, kw_only=True)
class CheckRecord:
    """The outcome of one self-test check."""

    suite: str
    name: str
    passed: bool
    value: float | None = None
    expected: float | None = None
    detail: str | None = None


ResultType = TypeVar(
    "ResultType", SolveRecord, MonteCarloRecord, ValidationRecord, TrialRecord, CheckRecord
)
"""Type variable for the rows of any result table."""
