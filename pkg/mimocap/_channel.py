import logging
import math
from dataclasses import dataclass
from enum import Enum
from enum import unique
from functools import cached_property
from typing import TypeAlias

import numpy as np
from numpy.typing import NDArray
from typing_extensions import Self
from typing_extensions import override

logger = logging.getLogger(__name__)

FloatArray: TypeAlias = NDArray[np.float64]
"""A real-valued numpy array."""

ComplexArray: TypeAlias = NDArray[np.complex128]
"""A complex-valued numpy array."""

DEFAULT_GRID_SIZE: int = 256
"""The default number of points on the frequency grid."""

EXPONENTIAL_TRUNCATION: float = 1e-12
"""Exponential covariances are truncated at the first lag whose value falls below this."""

JAKES_TRUNCATION: float = 1e-10
"""Jakes covariances are truncated after the last lag whose magnitude reaches this."""

JAKES_RESOLUTION: int = 1 << 14
"""The number of frequencies the Jakes covariance and simulated Jakes fields are sampled on."""

NORMALIZATION_TOLERANCE: float = 1e-10
"""Allowed deviation of the spectrum quadrature from one."""


@unique
class DopplerKind(str, Enum):
    """The temporal correlation models of the fast fading."""

    Delta = "delta"
    """Block fading: independent channel realizations from one block to the next."""

    Exponential = "exponential"
    """Exponentially decaying covariance exp(-|k| f_d)."""

    Jakes = "jakes"
    """The Jakes spectrum, softened at the band edge."""

    @override
    def __str__(self) -> str:
        return self.value


@unique
class ProfileKind(str, Enum):
    """The shapes of the multipath amplitude profile."""

    Uniform = "uniform"
    Exponential = "exponential"

    @override
    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True, slots=True)
class FrequencyGrid:
    """A uniform discretization of [0, 1) used for every frequency integral.

    Quadrature is the rectangle rule with weight 1/F, which converges spectrally fast for the
    smooth 1-periodic integrands met here.

    Examples:
        >>> grid = make_grid(4)
        >>> grid.points.tolist()
        [0.0, 0.25, 0.5, 0.75]
        >>> grid.weight
        0.25
    """

    size: int

    def __post_init__(self) -> None:
        """Validate the number of grid points."""
        if self.size < 2:
            raise ValueError(f"A frequency grid needs at least 2 points but found: {self.size}")

    @property
    def points(self) -> FloatArray:
        """The grid frequencies j/F for j = 0..F-1."""
        return np.arange(self.size, dtype=np.float64) / self.size

    @property
    def weight(self) -> float:
        """The quadrature weight shared by all grid points."""
        return 1.0 / self.size

    @property
    def centered(self) -> FloatArray:
        """The grid frequencies mapped periodically into [-1/2, 1/2)."""
        return np.asarray(((self.points + 0.5) % 1.0) - 0.5, dtype=np.float64)

    def integrate(self, values: NDArray[np.generic], axis: int = 0) -> NDArray[np.generic]:
        """Integrate sampled values over [0, 1) along an axis with the rectangle rule."""
        return np.asarray(np.sum(values, axis=axis) / self.size)

    def convolve(self, kernel: FloatArray, values: ComplexArray) -> ComplexArray:
        """Return the periodic convolution f -> integral of kernel(f - u) * values(u) du."""
        spectrum = np.fft.fft(kernel) * np.fft.fft(values)
        return np.asarray(np.fft.ifft(spectrum) / self.size, dtype=np.complex128)

    def correlate(self, kernel: FloatArray, values: ComplexArray) -> ComplexArray:
        """Return the periodic correlation f -> integral of kernel(u - f) * values(u) du."""
        return self.convolve(reflect(kernel), values)


def reflect(values: FloatArray) -> FloatArray:
    """Sample f -> g(-f) on the grid from samples of g (index reversal modulo F)."""
    return np.roll(values[::-1], 1)


def make_grid(size: int = DEFAULT_GRID_SIZE) -> FrequencyGrid:
    """Build a uniform frequency grid with `size` points."""
    return FrequencyGrid(size)


@dataclass(frozen=True, eq=False)
class DopplerModel:
    """The temporal covariance of the fading and its spectrum on a frequency grid.

    Attributes:
        kind: the correlation model.
        spectrum: the spectral density sampled on the grid, with unit quadrature.
        covariance: the covariance sequence for lags -K..K where K is the truncation horizon.
        f_d: the Doppler parameter, when the model has one.
        reg: the band-edge softening of the Jakes spectrum.
    """

    kind: DopplerKind
    spectrum: FloatArray
    covariance: FloatArray
    f_d: float | None = None
    reg: float | None = None

    def __post_init__(self) -> None:
        """Validate the normalization and positivity of this Doppler model."""
        if self.covariance.ndim != 1 or self.covariance.size % 2 != 1:
            raise ValueError("The covariance must hold the lags -K..K!")
        if abs(self.gamma(0) - 1.0) > 1e-12:
            raise ValueError(f"The covariance must satisfy gamma(0) = 1 but found: {self.gamma(0)}")
        if np.any(self.spectrum < 0.0):
            raise ValueError("The Doppler spectrum must be nonnegative!")
        total = float(np.mean(self.spectrum))
        if abs(total - 1.0) > NORMALIZATION_TOLERANCE:
            raise ValueError(f"The Doppler spectrum must integrate to 1 but found: {total}")

    @property
    def horizon(self) -> int:
        """The truncation horizon K of the covariance sequence."""
        return (self.covariance.size - 1) // 2

    @property
    def summability(self) -> float:
        """The sum of absolute covariances over all retained lags."""
        return float(np.sum(np.abs(self.covariance)))

    def gamma(self, lag: int) -> float:
        """The covariance at an integer lag; zero beyond the truncation horizon."""
        if abs(lag) > self.horizon:
            return 0.0
        return float(self.covariance[self.horizon + lag])


def _spectrum_from_covariance(covariance: FloatArray, grid: FrequencyGrid) -> FloatArray:
    """Sum the Fourier series of a symmetric covariance sequence on the grid points."""
    horizon = (covariance.size - 1) // 2
    lags = np.arange(-horizon, horizon + 1)
    phases = np.exp(2j * np.pi * np.outer(grid.points, lags))
    return np.asarray((phases @ covariance).real, dtype=np.float64)


def build_delta_doppler(grid: FrequencyGrid) -> DopplerModel:
    """Build the block-fading model: a flat spectrum and a covariance supported at lag zero."""
    return DopplerModel(
        kind=DopplerKind.Delta,
        spectrum=np.ones(grid.size, dtype=np.float64),
        covariance=np.ones(1, dtype=np.float64),
    )


def build_exponential_doppler(
    f_d: float, grid: FrequencyGrid, horizon: int | None = None
) -> DopplerModel:
    """Build the exponentially decaying covariance model gamma(k) = exp(-|k| f_d).

    Args:
        f_d: the decay rate of the covariance, positive.
        grid: the frequency grid on which to sample the spectrum.
        horizon: the truncation horizon; by default the first lag where the covariance falls
            below 1e-12.

    Examples:
        >>> doppler = build_exponential_doppler(1.0, make_grid(256))
        >>> round(float(doppler.spectrum[0]), 4)
        2.164
    """
    if not f_d > 0.0:
        raise ValueError(f"The exponential Doppler rate must be positive but found: {f_d}")
    if horizon is None:
        horizon = math.floor(-math.log(EXPONENTIAL_TRUNCATION) / f_d) + 1
    elif math.exp(-horizon * f_d) >= EXPONENTIAL_TRUNCATION:
        raise ValueError(f"The truncation horizon {horizon} is too short for f_d = {f_d}!")

    lags = np.arange(-horizon, horizon + 1)
    covariance = np.exp(-np.abs(lags) * f_d)
    spectrum = _spectrum_from_covariance(covariance, grid)
    spectrum = spectrum / float(np.mean(spectrum))
    return DopplerModel(
        kind=DopplerKind.Exponential, spectrum=spectrum, covariance=covariance, f_d=f_d
    )


def sample_jakes_spectrum(f_d: float, reg: float, size: int) -> FloatArray:
    """Sample the softened Jakes spectrum on `size` uniform frequencies, normalized to unit mean."""
    frequency = make_grid(size).centered
    inside = np.abs(frequency) < f_d
    spectrum = np.zeros(size, dtype=np.float64)
    spectrum[inside] = (1.0 / np.pi) / np.sqrt(f_d**2 - frequency[inside] ** 2 + reg**2)
    return spectrum / float(np.mean(spectrum))


def build_jakes_doppler(f_d: float, grid: FrequencyGrid, reg: float | None = None) -> DopplerModel:
    """Build the Jakes model, its spectrum softened as sqrt(f_d^2 - f^2 + reg^2) at the edge.

    The band edge leaves a jump in the spectrum, so the covariance only decays like 1/k. It is
    taken as the inverse discrete transform of the spectrum sampled on `JAKES_RESOLUTION` points,
    which is exactly the covariance of the fields drawn for simulation, and truncated after the
    last lag whose magnitude reaches 1e-10.

    Args:
        f_d: the maximum Doppler frequency, in (0, 0.5).
        grid: the frequency grid on which to sample the spectrum.
        reg: the band-edge softening, by default f_d / 100.
    """
    if not 0.0 < f_d < 0.5:
        raise ValueError(f"The Jakes Doppler frequency must lie in (0, 0.5) but found: {f_d}")
    reg = f_d / 100.0 if reg is None else reg
    if not reg > 0.0:
        raise ValueError(f"The Jakes regularization must be positive but found: {reg}")

    spectrum = sample_jakes_spectrum(f_d, reg, grid.size)
    fine = sample_jakes_spectrum(f_d, reg, JAKES_RESOLUTION)
    periodic = np.fft.fft(fine).real / JAKES_RESOLUTION
    half = (JAKES_RESOLUTION - 1) // 2
    horizon = int(np.flatnonzero(np.abs(periodic[: half + 1]) >= JAKES_TRUNCATION)[-1])
    logger.debug("Jakes covariance (f_d=%g, reg=%g) kept up to lag %d.", f_d, reg, horizon)
    one_sided = periodic[: horizon + 1]
    covariance = np.concatenate([one_sided[:0:-1], one_sided])
    return DopplerModel(
        kind=DopplerKind.Jakes, spectrum=spectrum, covariance=covariance, f_d=f_d, reg=reg
    )


@dataclass(frozen=True, eq=False)
class PowerProfile:
    """The multipath amplitude profile phi(l) for the lags l = -L..L."""

    taps: FloatArray
    kind: ProfileKind = ProfileKind.Uniform

    def __post_init__(self) -> None:
        """Validate the tap amplitudes."""
        if self.taps.ndim != 1 or self.taps.size % 2 != 1:
            raise ValueError("The power profile must hold the lags -L..L!")
        if not np.all(np.isfinite(self.taps)) or np.any(self.taps < 0.0):
            raise ValueError("The power profile taps must be finite and nonnegative!")

    @property
    def L(self) -> int:  # noqa: N802
        """The one-sided number of lags."""
        return (self.taps.size - 1) // 2

    @property
    def sigma_sq(self) -> float:
        """The received power of the random part: the sum of squared taps."""
        return float(np.sum(self.taps**2))

    @classmethod
    def uniform(cls, L: int, sigma_sq: float = 1.0) -> Self:  # noqa: N803
        """Build a flat profile with phi(l)^2 = sigma_sq / (2L + 1)."""
        if L < 0 or sigma_sq < 0.0:
            raise ValueError("L and sigma_sq must be nonnegative!")
        taps = np.full(2 * L + 1, math.sqrt(sigma_sq / (2 * L + 1)), dtype=np.float64)
        return cls(taps=taps, kind=ProfileKind.Uniform)

    @classmethod
    def exponential(cls, L: int, sigma_sq: float = 1.0, scale: float = 1.0) -> Self:  # noqa: N803
        """Build a profile with phi(l)^2 proportional to exp(-|l| / scale)."""
        if L < 0 or sigma_sq < 0.0:
            raise ValueError("L and sigma_sq must be nonnegative!")
        if not scale > 0.0:
            raise ValueError(f"The profile scale must be positive but found: {scale}")
        power = np.exp(-np.abs(np.arange(-L, L + 1)) / scale)
        taps = np.sqrt(sigma_sq * power / np.sum(power))
        return cls(taps=taps, kind=ProfileKind.Exponential)

    def scaled(self, sigma_sq: float) -> Self:
        """Return this profile rescaled to a total power of `sigma_sq`."""
        if sigma_sq == 0.0:
            return type(self)(taps=np.zeros_like(self.taps), kind=self.kind)
        if self.sigma_sq == 0.0:
            raise ValueError("Cannot rescale an all-zero power profile to a positive power!")
        return type(self)(taps=self.taps * math.sqrt(sigma_sq / self.sigma_sq), kind=self.kind)


@dataclass(frozen=True, eq=False)
class LosTaps:
    """The deterministic channel taps A(k), k = -L..L, stacked as a (2L+1, N, T) array."""

    blocks: ComplexArray

    def __post_init__(self) -> None:
        """Validate the tap array."""
        if self.blocks.ndim != 3 or self.blocks.shape[0] % 2 != 1:
            raise ValueError("The LOS taps must be a (2L+1, N, T) array!")
        if not np.all(np.isfinite(self.blocks)):
            raise ValueError("The LOS taps must be finite!")

    @property
    def N(self) -> int:  # noqa: N802
        """The number of receive antennas."""
        return int(self.blocks.shape[1])

    @property
    def T(self) -> int:  # noqa: N802
        """The number of transmit antennas."""
        return int(self.blocks.shape[2])

    @property
    def L(self) -> int:  # noqa: N802
        """The one-sided number of lags."""
        return (int(self.blocks.shape[0]) - 1) // 2

    @cached_property
    def spectral_norm_sum(self) -> float:
        """The sum of the spectral norms of the taps."""
        return float(np.sum(np.linalg.norm(self.blocks, ord=2, axis=(1, 2))))

    @cached_property
    def power(self) -> float:
        """The sum over all taps of trace(A(k) A(k)^*)."""
        return float(np.sum(np.abs(self.blocks) ** 2))

    def block(self, lag: int) -> ComplexArray:
        """Return the tap A(lag), which is zero outside -L..L."""
        if abs(lag) > self.L:
            return np.zeros((self.N, self.T), dtype=np.complex128)
        return self.blocks[self.L + lag]

    @classmethod
    def zeros(cls, N: int, T: int, L: int) -> Self:  # noqa: N803
        """Build an all-zero set of taps: a channel without a deterministic part."""
        return cls(blocks=np.zeros((2 * L + 1, N, T), dtype=np.complex128))

    def scaled(self, factor: float) -> Self:
        """Return these taps multiplied by a scalar."""
        return type(self)(blocks=self.blocks * factor)


def build_los_taps(N: int, T: int, L: int, xi: float) -> LosTaps:  # noqa: N803
    """Build the line-of-sight taps of steering-vector form.

    A(k)[m, n] = exp(-|k| xi / L_tot) exp(2 pi j (m - n) sin(theta_k)) / sqrt(N), with
    theta_k = k pi / L_tot and L_tot = 2L + 1; every tap has rank one.
    """
    if N < 1 or T < 1:
        raise ValueError(f"Antenna counts must be positive but found N={N}, T={T}!")
    if L < 0:
        raise ValueError(f"L must be nonnegative but found: {L}")
    if xi < 0.0:
        raise ValueError(f"The inverse delay spread must be nonnegative but found: {xi}")

    l_tot = 2 * L + 1
    lags = np.arange(-L, L + 1)
    sines = np.sin(lags * np.pi / l_tot)
    receive = np.exp(2j * np.pi * np.outer(sines, np.arange(N)))
    transmit = np.exp(2j * np.pi * np.outer(sines, np.arange(T)))
    amplitude = np.exp(-np.abs(lags) * xi / l_tot) / math.sqrt(N)
    blocks = amplitude[:, None, None] * receive[:, :, None] * transmit.conj()[:, None, :]
    return LosTaps(blocks=np.asarray(blocks, dtype=np.complex128))


def transfer_function(los: LosTaps, grid: FrequencyGrid) -> ComplexArray:
    """Evaluate A(f) = sum_k exp(2 i pi k f) A(k) at every grid point, as an (F, N, T) array."""
    lags = np.arange(-los.L, los.L + 1)
    phases = np.exp(2j * np.pi * np.outer(grid.points, lags))
    return np.asarray(np.einsum("fk,knt->fnt", phases, los.blocks), dtype=np.complex128)


@dataclass(frozen=True, eq=False)
class ChannelModel:
    """The full statistical description of the channel and its spectra on a frequency grid.

    Build instances with `ChannelModel.build`, which derives `transfer` and `gram` from the taps.
    """

    N: int
    T: int
    L: int
    doppler: DopplerModel
    profile: PowerProfile
    los: LosTaps
    grid: FrequencyGrid
    transfer: ComplexArray
    gram: ComplexArray

    def __post_init__(self) -> None:
        """Validate that all parts of the model agree with each other."""
        if self.N < 1 or self.T < 1:
            raise ValueError(f"Antenna counts must be positive but found N={self.N}, T={self.T}!")
        if self.profile.L != self.L or self.los.L != self.L:
            raise ValueError("The power profile and the LOS taps must span the same lags!")
        if (self.los.N, self.los.T) != (self.N, self.T):
            raise ValueError("The LOS taps must be N x T matrices!")
        if self.doppler.spectrum.size != self.grid.size:
            raise ValueError("The Doppler spectrum must be sampled on the model's grid!")
        if self.grid.size <= 2 * self.L:
            raise ValueError(
                f"A grid of {self.grid.size} points aliases the lags of A(f) A(f)^*, it needs more"
                f" than 2L = {2 * self.L} points!"
            )
        if self.transfer.shape != (self.grid.size, self.N, self.T):
            raise ValueError("The transfer function must be an (F, N, T) array!")
        expected = self.transfer @ self.transfer.conj().transpose(0, 2, 1)
        scale = 1.0 + float(np.max(np.abs(expected), initial=0.0))
        if self.gram.shape != expected.shape or not np.allclose(
            self.gram, expected, rtol=0.0, atol=1e-12 * scale
        ):
            raise ValueError("The Gram matrices must equal A(f) A(f)^* at every grid point!")

    @classmethod
    def build(
        cls,
        doppler: DopplerModel,
        profile: PowerProfile,
        los: LosTaps,
        grid: FrequencyGrid,
    ) -> Self:
        """Assemble a channel model and compute its frequency-domain representation."""
        transfer = transfer_function(los, grid)
        gram = transfer @ transfer.conj().transpose(0, 2, 1)
        return cls(
            N=los.N,
            T=los.T,
            L=los.L,
            doppler=doppler,
            profile=profile,
            los=los,
            grid=grid,
            transfer=transfer,
            gram=np.asarray(gram, dtype=np.complex128),
        )

    @property
    def c(self) -> float:
        """The antenna ratio N / T."""
        return self.N / self.T

    @property
    def sigma_sq(self) -> float:
        """The received power of the random part of the channel."""
        return self.profile.sigma_sq

    @property
    def los_power(self) -> float:
        """The received power of the deterministic part: (1/N) * integral of trace(AA^*)(f)."""
        trace = np.trace(self.gram, axis1=1, axis2=2).real
        return float(self.grid.integrate(trace)) / self.N

    @property
    def rho(self) -> float:
        """The SNR: random power plus deterministic power per receive antenna."""
        return self.sigma_sq + self.los_power

    @property
    def spectral_norm_sum(self) -> float:
        """The sum of the spectral norms of the LOS taps."""
        return self.los.spectral_norm_sum

    @cached_property
    def gram_eigenvalues(self) -> FloatArray:
        """The eigenvalues of (AA^*)(f) at every grid point, as an (F, N) array."""
        eigenvalues = np.linalg.eigvalsh(self.gram)
        return np.asarray(np.clip(eigenvalues, 0.0, None), dtype=np.float64)

    @cached_property
    def cogram_eigenvalues(self) -> FloatArray:
        """The eigenvalues of (A^*A)(f) at every grid point, as an (F, T) array."""
        rank = min(self.N, self.T)
        shared = self.gram_eigenvalues[:, self.N - rank :]
        padding = np.zeros((self.grid.size, self.T - rank), dtype=np.float64)
        return np.concatenate([padding, shared], axis=1)


def normalize_for_snr(model: ChannelModel, rho: float, K: float) -> ChannelModel:  # noqa: N803
    """Rescale the random and deterministic parts to an SNR `rho` and a Ricean factor `K`.

    The random power becomes rho / (1 + K) and the deterministic power rho K / (1 + K). An
    infinite `K` leaves a purely deterministic channel.
    """
    if not rho > 0.0:
        raise ValueError(f"The SNR must be positive but found: {rho}")
    if not K >= 0.0:
        raise ValueError(f"The Ricean factor must be nonnegative but found: {K}")

    if math.isinf(K):
        sigma_target, los_target = 0.0, rho
    else:
        sigma_target, los_target = rho / (1.0 + K), rho * K / (1.0 + K)

    if sigma_target > 0.0 and model.sigma_sq == 0.0:
        raise ValueError(f"K={K} needs a random part but the power profile is zero!")
    if los_target > 0.0 and model.los_power == 0.0:
        raise ValueError(f"K={K} needs a deterministic part but the LOS taps are zero!")

    profile = model.profile.scaled(sigma_target)
    if los_target == 0.0:
        los = model.los.scaled(0.0)
    else:
        los = model.los.scaled(math.sqrt(los_target / model.los_power))
    return ChannelModel.build(model.doppler, profile, los, model.grid)


def rho_from_db(rho_db: float) -> float:
    """Convert an SNR in decibels to a linear ratio."""
    return float(10.0 ** (rho_db / 10.0))


def rho_to_db(rho: float) -> float:
    """Convert a linear SNR to decibels."""
    return 10.0 * math.log10(rho)
