import dataclasses
import logging
import math
from dataclasses import dataclass
from dataclasses import field
from enum import Enum
from enum import unique
from pathlib import Path
from typing import Literal

import msgspec
from typing_extensions import override

from mimocap._channel import ChannelModel
from mimocap._channel import DopplerKind
from mimocap._channel import DopplerModel
from mimocap._channel import LosTaps
from mimocap._channel import PowerProfile
from mimocap._channel import ProfileKind
from mimocap._channel import build_delta_doppler
from mimocap._channel import build_exponential_doppler
from mimocap._channel import build_jakes_doppler
from mimocap._channel import build_los_taps
from mimocap._channel import make_grid
from mimocap._channel import normalize_for_snr
from mimocap._channel import rho_from_db
from mimocap._channel import rho_to_db
from mimocap._errors import ConfigError

logger = logging.getLogger(__name__)

SCHEMA_VERSION: int = 1
"""The only configuration schema version understood."""


@unique
class SweepVariable(str, Enum):
    """The model parameters a sweep can vary."""

    RhoDb = "rho_db"
    K = "K"
    Xi = "xi"
    FD = "f_d"
    M = "M"

    @override
    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class DopplerConfig:
    """The temporal correlation model of the fading."""

    kind: DopplerKind
    f_d: float | None = None
    reg: float | None = None

    def __post_init__(self) -> None:
        """Check that models with a Doppler parameter are given one."""
        if self.kind is not DopplerKind.Delta and self.f_d is None:
            raise ValueError(f"The {self.kind} Doppler model needs f_d!")


@dataclass(frozen=True)
class ProfileParams:
    """Shape parameters of the power profile."""

    scale: float = 1.0


@dataclass(frozen=True)
class ProfileConfig:
    """The shape of the multipath power profile; its total power is set by the SNR."""

    kind: ProfileKind = ProfileKind.Uniform
    params: ProfileParams = field(default_factory=ProfileParams)


@dataclass(frozen=True)
class LosConfig:
    """The line-of-sight component and its inverse delay spread."""

    xi: float

    def __post_init__(self) -> None:
        """Validate the inverse delay spread."""
        if self.xi < 0.0:
            raise ValueError(f"xi must be nonnegative but found: {self.xi}")


@dataclass(frozen=True)
class SnrConfig:
    """The SNR, linear or in decibels, and the Ricean factor."""

    K: float | Literal["inf"]
    rho: float | None = None
    rho_db: float | None = None

    def __post_init__(self) -> None:
        """Check that exactly one SNR is given and that both quantities are in range."""
        if (self.rho is None) == (self.rho_db is None):
            raise ValueError("Exactly one of rho and rho_db must be given!")
        if self.rho is not None and not self.rho > 0.0:
            raise ValueError(f"rho must be positive but found: {self.rho}")
        if not isinstance(self.K, str) and not self.K >= 0.0:
            raise ValueError(f"K must be nonnegative but found: {self.K}")

    @property
    def linear(self) -> float:
        """The SNR as a linear ratio."""
        if self.rho is not None:
            return self.rho
        assert self.rho_db is not None
        return rho_from_db(self.rho_db)

    @property
    def decibels(self) -> float:
        """The SNR in decibels."""
        return self.rho_db if self.rho_db is not None else rho_to_db(self.linear)

    @property
    def ricean_k(self) -> float:
        """The Ricean factor as a float, infinite for a purely deterministic channel."""
        return math.inf if isinstance(self.K, str) else float(self.K)


@dataclass(frozen=True)
class SweepConfig:
    """A parameter to vary and the values it takes."""

    variable: SweepVariable
    values: tuple[float, ...]

    def __post_init__(self) -> None:
        """Reject empty sweeps."""
        if len(self.values) == 0:
            raise ValueError("A sweep needs at least one value!")


@dataclass(frozen=True)
class ModelConfig:
    """A complete, versioned description of one channel model.

    Examples:
        >>> config = parse_config(
        ...     '{"version": 1, "N": 2, "T": 2, "L": 0, "doppler": {"kind": "delta"},'
        ...     ' "snr": {"rho": 1.0, "K": 0}}'
        ... )
        >>> config.grid_size, config.los is None, config.snr.ricean_k
        (256, True, 0.0)
    """

    version: int
    N: int
    T: int
    L: int
    doppler: DopplerConfig
    snr: SnrConfig
    grid_size: int = 256
    profile: ProfileConfig = field(default_factory=ProfileConfig)
    los: LosConfig | None = None
    sweep: SweepConfig | None = None

    def __post_init__(self) -> None:
        """Validate the schema version and the dimensions."""
        if self.version != SCHEMA_VERSION:
            raise ValueError(f"Unsupported config version {self.version}, expected 1!")
        if self.N < 1 or self.T < 1:
            raise ValueError(f"N and T must be positive but found N={self.N}, T={self.T}!")
        if self.L < 0:
            raise ValueError(f"L must be nonnegative but found: {self.L}")
        if self.grid_size < 2:
            raise ValueError(f"grid_size must be at least 2 but found: {self.grid_size}")
        if self.grid_size <= 2 * self.L:
            raise ValueError(f"grid_size must exceed 2L = {2 * self.L} but found: {self.grid_size}")


def parse_config(data: bytes | str) -> ModelConfig:
    """Decode a JSON configuration.

    Raises:
        ConfigError: on malformed JSON, a schema violation (reported with its JSON path) or an
            out-of-range value.
    """
    try:
        return msgspec.json.decode(data, type=ModelConfig)
    except msgspec.ValidationError as error:
        raise ConfigError(f"Invalid configuration: {error}") from error
    except msgspec.DecodeError as error:
        raise ConfigError(f"Malformed configuration JSON: {error}") from error
    except ValueError as error:
        raise ConfigError(f"Invalid configuration: {error}") from error


def load_config(path: Path | str) -> ModelConfig:
    """Read and decode a JSON configuration file."""
    try:
        data = Path(path).read_bytes()
    except OSError as error:
        raise ConfigError(f"Cannot read configuration {path}: {error}") from error
    return parse_config(data)


def dump_config(config: ModelConfig) -> bytes:
    """Encode a configuration as JSON."""
    return msgspec.json.encode(config)


def check_sweep(config: ModelConfig, sweep: SweepConfig) -> None:
    """Check that every sweep value can be applied to the model before anything is solved.

    Raises:
        ConfigError: if the sweep variable does not apply to the model or a value is out of range.
    """
    variable = sweep.variable
    if variable is SweepVariable.Xi and config.los is None:
        raise ConfigError("A xi sweep needs a model with a line-of-sight component!")
    if variable is SweepVariable.FD and config.doppler.kind is DopplerKind.Delta:
        raise ConfigError("An f_d sweep needs an exponential or Jakes Doppler model!")
    if variable is SweepVariable.K and config.los is None and any(v > 0 for v in sweep.values):
        raise ConfigError("A K sweep with K > 0 needs a model with a line-of-sight component!")
    for value in sweep.values:
        if not math.isfinite(value) and variable is not SweepVariable.K:
            raise ConfigError(f"Sweep values must be finite but found: {value}")
        if variable is SweepVariable.M and (value < 1 or value != int(value) or value % 2 != 1):
            raise ConfigError(f"Window lengths must be positive odd integers but found: {value}")
        if variable in (SweepVariable.K, SweepVariable.Xi) and value < 0:
            raise ConfigError(f"{variable} values must be nonnegative but found: {value}")
        if variable is SweepVariable.FD and not value > 0:
            raise ConfigError(f"f_d values must be positive but found: {value}")


def apply_sweep_value(config: ModelConfig, variable: SweepVariable, value: float) -> ModelConfig:
    """Return the configuration with one sweep value substituted; window sweeps leave it as is."""
    if variable is SweepVariable.RhoDb:
        return dataclasses.replace(
            config, snr=dataclasses.replace(config.snr, rho=None, rho_db=value)
        )
    if variable is SweepVariable.K:
        k: float | Literal["inf"] = "inf" if math.isinf(value) else value
        return dataclasses.replace(config, snr=dataclasses.replace(config.snr, K=k))
    if variable is SweepVariable.Xi:
        return dataclasses.replace(config, los=LosConfig(xi=value))
    if variable is SweepVariable.FD:
        return dataclasses.replace(config, doppler=dataclasses.replace(config.doppler, f_d=value))
    return config


def _build_doppler(config: ModelConfig) -> DopplerModel:
    grid = make_grid(config.grid_size)
    doppler = config.doppler
    if doppler.kind is DopplerKind.Delta:
        return build_delta_doppler(grid)
    assert doppler.f_d is not None
    if doppler.kind is DopplerKind.Exponential:
        return build_exponential_doppler(doppler.f_d, grid)
    return build_jakes_doppler(doppler.f_d, grid, reg=doppler.reg)


def build_model(config: ModelConfig) -> ChannelModel:
    """Build the channel model a configuration describes, normalized to its SNR and K.

    Raises:
        ConfigError: if the configuration describes an impossible model.
    """
    try:
        grid = make_grid(config.grid_size)
        doppler = _build_doppler(config)
        if config.profile.kind is ProfileKind.Exponential:
            profile = PowerProfile.exponential(config.L, scale=config.profile.params.scale)
        else:
            profile = PowerProfile.uniform(config.L)
        if config.los is None:
            los = LosTaps.zeros(config.N, config.T, config.L)
        else:
            los = build_los_taps(config.N, config.T, config.L, config.los.xi)
        model = ChannelModel.build(doppler, profile, los, grid)
        return normalize_for_snr(model, config.snr.linear, config.snr.ricean_k)
    except ConfigError:
        raise
    except ValueError as error:
        raise ConfigError(f"Invalid model: {error}") from error
