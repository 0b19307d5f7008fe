import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from numpy.random import Generator
from numpy.random import SeedSequence
from numpy.random import default_rng
from scipy import linalg
from typing_extensions import Self

from mimocap._channel import JAKES_RESOLUTION
from mimocap._channel import ChannelModel
from mimocap._channel import ComplexArray
from mimocap._channel import DopplerKind
from mimocap._channel import DopplerModel
from mimocap._channel import FloatArray
from mimocap._channel import sample_jakes_spectrum
from mimocap._errors import EmbeddingError
from mimocap._errors import NumericalError

logger = logging.getLogger(__name__)

DIMENSION_CAP: int = 4096
"""The largest row or column count of a band matrix that will be assembled densely."""

CLIP_TOLERANCE: float = 1e-3
"""The largest fraction of spectral mass the circulant embedding may clip away."""


@dataclass(frozen=True, slots=True)
class McConfig:
    """The window and trial settings of a Monte Carlo estimate.

    Attributes:
        n: the half-window; the window holds M = 2n + 1 blocks.
        trials: the number of independent channel draws.
        seed: the master seed all per-trial streams are derived from.
    """

    n: int
    trials: int
    seed: int = 42

    def __post_init__(self) -> None:
        """Validate the Monte Carlo settings."""
        if self.n < 0:
            raise ValueError(f"The half-window must be nonnegative but found: {self.n}")
        if self.trials < 1:
            raise ValueError(f"At least one trial is required but found: {self.trials}")
        if not 0 <= self.seed < 2**64:
            raise ValueError(f"The seed must be a 64-bit unsigned integer but found: {self.seed}")

    @property
    def window(self) -> int:
        """The number of blocks M = 2n + 1 observed."""
        return 2 * self.n + 1

    @classmethod
    def from_window(cls, window: int, trials: int, seed: int = 42) -> Self:
        """Build a configuration from an odd window length M."""
        if window < 1 or window % 2 != 1:
            raise ValueError(f"The window must be a positive odd integer but found: {window}")
        return cls(n=(window - 1) // 2, trials=trials, seed=seed)


@dataclass(frozen=True, eq=False)
class LagField:
    """The random field W_d(k) of one channel lag d, for k = -n..n, as an (M, N, T) array."""

    lag: int
    samples: ComplexArray
    clipped_fraction: float = 0.0


@dataclass(frozen=True, eq=False)
class BandMatrix:
    """A finite window of the channel operator, (2n+1)N rows by (2n+2L+1)T columns."""

    matrix: ComplexArray
    n: int
    L: int
    N: int
    T: int

    def block(self, m: int, column: int) -> ComplexArray:
        """The N x T block at block row m in -n..n and block column in -n-L..n+L."""
        i = m + self.n
        j = column + self.n + self.L
        return self.matrix[i * self.N : (i + 1) * self.N, j * self.T : (j + 1) * self.T]


@dataclass(frozen=True, eq=False)
class McEstimate:
    """The mean per-antenna mutual information over trials and its standard error."""

    mean: float
    stderr: float
    trials: int
    per_trial: FloatArray | None = None


@dataclass(frozen=True, eq=False)
class MomentEstimate:
    """Pooled lag moments of a set of sequences with their standard errors."""

    values: ComplexArray
    stderr: FloatArray


def embedding_length(window: int, horizon: int) -> int:
    """The smallest power of two at least 4 (window + horizon)."""
    return 1 << (4 * (window + horizon) - 1).bit_length()


def _embedded_spectrum(doppler: DopplerModel, length: int) -> tuple[FloatArray, float]:
    """Embed the covariance in a circulant of the given length and return its clipped spectrum."""
    horizon = doppler.horizon
    first_row = np.zeros(length, dtype=np.float64)
    one_sided = doppler.covariance[horizon:]
    first_row[: horizon + 1] = one_sided
    if horizon > 0:
        first_row[length - horizon :] = one_sided[:0:-1]

    spectrum = np.real(np.fft.fft(first_row))
    negative = spectrum < 0.0
    clipped = float(np.sum(np.abs(spectrum[negative])) / np.sum(np.abs(spectrum)))
    if clipped > CLIP_TOLERANCE:
        raise EmbeddingError(
            f"Circulant embedding of length {length} clipped {clipped:.3e} of the spectral mass!"
        )
    if np.any(negative):
        positive = np.maximum(spectrum, 0.0)
        spectrum = float(np.sum(spectrum)) / float(np.sum(positive)) * positive
    return spectrum, clipped


def _field_spectrum(doppler: DopplerModel, window: int) -> tuple[FloatArray, float]:
    """The nonnegative circulant spectrum fields of the given window are synthesized from."""
    if doppler.kind is DopplerKind.Jakes and doppler.f_d is not None and doppler.reg is not None:
        length = max(JAKES_RESOLUTION, embedding_length(window, 0))
        return sample_jakes_spectrum(doppler.f_d, doppler.reg, length), 0.0
    return _embedded_spectrum(doppler, embedding_length(window, doppler.horizon))


def generate_lag_field(
    doppler: DopplerModel,
    n: int,
    N: int,  # noqa: N803
    T: int,  # noqa: N803
    rng: Generator,
    lag: int = 0,
) -> LagField:
    """Draw N x T independent stationary complex Gaussian sequences of length 2n + 1.

    Each entry's sequence has unit variance and autocovariance gamma. Sequences are synthesized by
    circulant embedding: the covariance is wrapped into a circulant of power-of-two length, its
    spectrum is clipped to be nonnegative and renormalized, and spectrally weighted white noise is
    transformed back and sliced. Jakes fields skip the embedding and weight the noise with the
    softened spectrum sampled on at least `JAKES_RESOLUTION` frequencies, whose covariance is the
    model covariance.

    Raises:
        EmbeddingError: if more than 1e-3 of the spectral mass had to be clipped.
    """
    window = 2 * n + 1
    spectrum, clipped = _field_spectrum(doppler, window)
    length = spectrum.size

    shape = (N, T, length)
    noise = (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / math.sqrt(2.0)
    synthesized = math.sqrt(length) * np.fft.ifft(np.sqrt(spectrum) * noise, axis=-1)
    samples = np.ascontiguousarray(np.transpose(synthesized[..., :window], (2, 0, 1)))
    return LagField(lag=lag, samples=samples.astype(np.complex128), clipped_fraction=clipped)


def assemble_band_matrix(model: ChannelModel, n: int, rng: Generator) -> BandMatrix:
    """Draw one window of the channel operator.

    Block (m, m - d) holds A(d) + phi(d) W_d(m) / sqrt(T) for |d| <= L; all other blocks vanish.
    Random fields are only drawn for lags with a nonzero profile tap.

    Raises:
        ValueError: if the matrix would exceed the dimension cap.
    """
    N, T, L = model.N, model.T, model.L
    window = 2 * n + 1
    rows, columns = window * N, (window + 2 * L) * T
    if max(rows, columns) > DIMENSION_CAP:
        raise ValueError(
            f"A {rows} x {columns} band matrix exceeds the dimension cap of {DIMENSION_CAP}!"
        )

    fields: dict[int, LagField] = {}
    for lag in range(-L, L + 1):
        if model.profile.taps[lag + L] > 0.0:
            fields[lag] = generate_lag_field(model.doppler, n, N, T, rng, lag=lag)

    matrix = np.zeros((rows, columns), dtype=np.complex128)
    for i in range(window):
        for lag in range(-L, L + 1):
            block = model.los.block(lag).copy()
            if lag in fields:
                tap = model.profile.taps[lag + L]
                block = block + tap / math.sqrt(T) * fields[lag].samples[i]
            j = i + L - lag
            matrix[i * N : (i + 1) * N, j * T : (j + 1) * T] = block
    return BandMatrix(matrix=matrix, n=n, L=L, N=N, T=T)


def per_antenna_mutual_info(band: BandMatrix) -> float:
    """Compute log det(I + H H^*) / ((2n+1) N) through a Cholesky factorization.

    Raises:
        NumericalError: if the factorization fails.
    """
    matrix = band.matrix
    rows = matrix.shape[0]
    gram = np.eye(rows, dtype=np.complex128) + matrix @ matrix.conj().T
    try:
        factor = linalg.cholesky(gram, lower=True)
    except linalg.LinAlgError as error:
        raise NumericalError("I + HH^* is not numerically positive definite!") from error
    return 2.0 * float(np.sum(np.log(np.diag(factor).real))) / rows


def estimate(
    model: ChannelModel,
    config: McConfig,
    threads: int = 1,
    keep_trials: bool = False,
) -> McEstimate:
    """Average the per-antenna mutual information over independent draws of the channel window.

    Every trial draws from its own stream spawned from the master seed, so the estimate depends
    only on the seed and not on the number of threads.
    """
    if threads < 1:
        raise ValueError(f"threads must be at least 1 but found: {threads}")
    streams = SeedSequence(config.seed).spawn(config.trials)

    def _trial(stream: SeedSequence) -> float:
        return per_antenna_mutual_info(assemble_band_matrix(model, config.n, default_rng(stream)))

    if threads == 1:
        values = np.array([_trial(stream) for stream in streams], dtype=np.float64)
    else:
        with ThreadPoolExecutor(max_workers=threads) as executor:
            values = np.array(list(executor.map(_trial, streams)), dtype=np.float64)

    if config.trials == 1:
        mean, stderr = float(values[0]), math.nan
    elif np.ptp(values) == 0.0:
        mean, stderr = float(values[0]), 0.0
    else:
        mean = float(np.mean(values))
        stderr = float(np.std(values, ddof=1)) / math.sqrt(config.trials)
    logger.debug(
        "Monte Carlo over %d trials at M=%d: %.6f +/- %.6f.",
        config.trials,
        config.window,
        mean,
        stderr,
    )
    return McEstimate(
        mean=mean,
        stderr=stderr,
        trials=config.trials,
        per_trial=values if keep_trials else None,
    )


def _lag_moments(sequences: ComplexArray, max_lag: int, conjugate: bool) -> MomentEstimate:
    """Pool lag products over sequences; standard errors come from the spread across sequences."""
    count, length = sequences.shape
    if not 0 <= max_lag < length:
        raise ValueError(f"max_lag must lie in [0, {length}) but found: {max_lag}")
    values = np.empty(max_lag + 1, dtype=np.complex128)
    stderr = np.empty(max_lag + 1, dtype=np.float64)
    for lag in range(max_lag + 1):
        head = sequences[:, : length - lag]
        tail = sequences[:, lag:]
        products = tail * (head.conj() if conjugate else head)
        per_sequence = np.mean(products, axis=1)
        values[lag] = np.mean(per_sequence)
        stderr[lag] = float(np.std(per_sequence, ddof=1)) / math.sqrt(count) if count > 1 else 0.0
    return MomentEstimate(values=values, stderr=stderr)


def autocovariance(sequences: ComplexArray, max_lag: int) -> MomentEstimate:
    """Estimate E[x(k + l) conj(x(k))] for l = 0..max_lag from a (count, length) array."""
    return _lag_moments(sequences, max_lag, conjugate=True)


def pseudo_covariance(sequences: ComplexArray, max_lag: int) -> MomentEstimate:
    """Estimate E[x(k + l) x(k)] for l = 0..max_lag from a (count, length) array."""
    return _lag_moments(sequences, max_lag, conjugate=False)


def field_sequences(field: LagField) -> ComplexArray:
    """Rearrange a lag field into one sequence per matrix entry, as a (N*T, M) array."""
    window = field.samples.shape[0]
    return np.ascontiguousarray(field.samples.reshape(window, -1).T)
