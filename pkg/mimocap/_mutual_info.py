import logging
import math
from collections.abc import Callable
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike
from scipy import integrate

from mimocap._channel import ChannelModel
from mimocap._channel import FloatArray
from mimocap._errors import QuadratureError
from mimocap._solver import DeqState
from mimocap._solver import SolverDiagnostics
from mimocap._solver import SolverOptions
from mimocap._solver import coupling
from mimocap._solver import solve
from mimocap._solver import stieltjes_p
from mimocap._solver import validate_point

logger = logging.getLogger(__name__)

QUADPACK_TOLERANCE: float = 1e-12
"""The absolute and relative tolerance requested from adaptive quadrature."""

QUADPACK_ACCEPTANCE: float = 1e-8
"""The largest error estimate accepted from adaptive quadrature."""

DEFAULT_T_MAX: float = 1e4
DEFAULT_N_T: int = 64


@dataclass(frozen=True, eq=False)
class MutualInfoResult:
    """The deterministic-equivalent mutual information, in nats per receive antenna.

    Attributes:
        total: term_logdet + term_log_scalar - term_cross.
        term_logdet: the log-determinant integral.
        term_log_scalar: the integral of log(1 + zeta).
        term_cross: the subtracted double integral of phi and the convolved phi_tilde.
        state: the solution at z = -1 the terms were computed from.
        diagnostics: the solver diagnostics for that solution.
    """

    total: float
    term_logdet: float
    term_log_scalar: float
    term_cross: float
    state: DeqState
    diagnostics: SolverDiagnostics


def deq_mutual_information(
    model: ChannelModel, options: SolverOptions | None = None
) -> MutualInfoResult:
    """Compute the deterministic equivalent of the per-antenna mutual information.

    Solves the system at z = -1, then evaluates the three grid integrals. The log determinant is
    read off the precomputed Gram eigenvalues.

    Raises:
        ConvergenceError: if the solver does not converge at z = -1.
    """
    state, diagnostics = solve(model, -1.0, options)
    zeta, zeta_tilde = coupling(state, model)
    zeta_real = zeta.real
    zeta_tilde_real = zeta_tilde.real

    shifted = (1.0 + zeta_tilde_real)[:, None] + model.gram_eigenvalues / (1.0 + zeta_real)[:, None]
    term_logdet = float(np.mean(np.sum(np.log(shifted), axis=1))) / model.N
    ratio = model.T / model.N
    term_log_scalar = ratio * float(np.mean(np.log1p(zeta_real)))
    term_cross = ratio * float(np.mean(state.phi.real * zeta_tilde_real))
    total = term_logdet + term_log_scalar - term_cross
    logger.debug(
        "Mutual information %.10f = %.10f + %.10f - %.10f.",
        total,
        term_logdet,
        term_log_scalar,
        term_cross,
    )
    return MutualInfoResult(
        total=total,
        term_logdet=term_logdet,
        term_log_scalar=term_log_scalar,
        term_cross=term_cross,
        state=state,
        diagnostics=diagnostics,
    )


def deterministic_only_mutual_info(model: ChannelModel) -> float:
    """The mutual information (1/N) integral of log det(I + AA^*(f)) of a channel with no fading.

    Examples:
        >>> from mimocap import PowerProfile, LosTaps, build_delta_doppler, make_grid
        >>> grid = make_grid(8)
        >>> los = LosTaps(blocks=np.full((1, 1, 1), math.sqrt(3.0), dtype=np.complex128))
        >>> model = ChannelModel.build(
        ...     build_delta_doppler(grid), PowerProfile.uniform(0, 0.0), los, grid
        ... )
        >>> abs(deterministic_only_mutual_info(model) - math.log(4.0)) < 1e-12
        True
    """
    if model.sigma_sq != 0.0:
        raise ValueError(f"The channel must have no random part but sigma^2 = {model.sigma_sq}!")
    return float(np.mean(np.sum(np.log1p(model.gram_eigenvalues), axis=1))) / model.N


@dataclass(frozen=True, slots=True)
class QuadratureEstimate:
    """A truncated integral and a bound on the part of the integral beyond the truncation."""

    value: float
    tail_bound: float

    @property
    def interval(self) -> tuple[float, float]:
        """The interval that contains the untruncated integral."""
        return (self.value, self.value + self.tail_bound)


def mutual_info_via_quadrature(
    model: ChannelModel,
    t_max: float = DEFAULT_T_MAX,
    n_t: int = DEFAULT_N_T,
    options: SolverOptions | None = None,
    threads: int = 1,
) -> QuadratureEstimate:
    """Recompute the mutual information as the integral over t >= 1 of 1/t - p(-t).

    The system is solved on a logarithmic ladder of t in [1, t_max] and the integrand, written in
    s = log t as 1 - t p(-t), is integrated with Simpson's rule. The neglected tail is at most
    3 (a^2 + sigma^2) / t_max.

    Args:
        model: the channel model.
        t_max: the truncation point, at least 10.
        n_t: the number of ladder points, at least 16.
        options: solver controls.
        threads: the number of worker threads solving ladder points.
    """
    if t_max < 10.0:
        raise ValueError(f"t_max must be at least 10 but found: {t_max}")
    if n_t < 16:
        raise ValueError(f"n_t must be at least 16 but found: {n_t}")
    if threads < 1:
        raise ValueError(f"threads must be at least 1 but found: {threads}")

    ladder = np.logspace(0.0, math.log10(t_max), n_t)

    def _integrand(t: float) -> float:
        state, _ = solve(model, -float(t), options)
        return 1.0 - float(t) * stieltjes_p(state, model).real

    if threads == 1:
        values = [_integrand(t) for t in ladder]
    else:
        with ThreadPoolExecutor(max_workers=threads) as executor:
            values = list(executor.map(_integrand, ladder))

    value = float(integrate.simpson(np.asarray(values), x=np.log(ladder)))
    tail_bound = 3.0 * (model.spectral_norm_sum**2 + model.sigma_sq) / t_max
    return QuadratureEstimate(value=value, tail_bound=tail_bound)


def mp_stieltjes(sigma_sq: float, c: float, z: complex) -> tuple[complex, complex]:
    """Solve alpha = c / (-z - z sigma^2 alpha_tilde), alpha_tilde = 1 / (-z - z sigma^2 alpha).

    Eliminating alpha_tilde leaves z sigma^2 alpha^2 + (z + sigma^2 (c - 1)) alpha + c = 0; the
    root kept is the one with Im alpha > 0 above the real axis, or alpha > 0 on the negative axis.

    Examples:
        >>> alpha, alpha_tilde = mp_stieltjes(1.0, 1.0, -1.0)
        >>> abs(alpha - (math.sqrt(5.0) - 1.0) / 2.0) < 1e-12
        True
    """
    z = validate_point(z)
    if sigma_sq < 0.0 or not c > 0.0:
        raise ValueError(f"Expected sigma^2 >= 0 and c > 0 but found {sigma_sq} and {c}!")
    if sigma_sq == 0.0:
        return -c / z, -1.0 / z

    a = z * sigma_sq
    b = z + sigma_sq * (c - 1.0)
    root = complex(np.sqrt(complex(b * b - 4.0 * a * c)))
    q = -0.5 * (b + root) if (b.conjugate() * root).real >= 0.0 else -0.5 * (b - root)
    candidates = (q / a, c / q)
    if z.imag > 0.0:
        alpha = max(candidates, key=lambda value: value.imag)
    else:
        alpha = complex(max(candidates, key=lambda value: value.real).real, 0.0)
    alpha_tilde = 1.0 / (-z - z * sigma_sq * alpha)
    return alpha, alpha_tilde


@dataclass(frozen=True, slots=True)
class MpLaw:
    """The Marchenko-Pastur law with variance `sigma_sq` and ratio `c`.

    Examples:
        >>> law = MpLaw(sigma_sq=1.0, c=4.0)
        >>> law.lambda_minus, law.lambda_plus, law.atom_at_zero
        (1.0, 9.0, 0.75)
    """

    sigma_sq: float
    c: float

    def __post_init__(self) -> None:
        """Validate the law's parameters."""
        if not self.sigma_sq > 0.0:
            raise ValueError(f"sigma^2 must be positive but found: {self.sigma_sq}")
        if not self.c > 0.0:
            raise ValueError(f"c must be positive but found: {self.c}")

    @property
    def lambda_minus(self) -> float:
        """The left edge of the continuous part."""
        return self.sigma_sq * (1.0 - math.sqrt(self.c)) ** 2

    @property
    def lambda_plus(self) -> float:
        """The right edge of the continuous part."""
        return self.sigma_sq * (1.0 + math.sqrt(self.c)) ** 2

    @property
    def atom_at_zero(self) -> float:
        """The mass of the atom at zero, present when c > 1."""
        return max(0.0, 1.0 - 1.0 / self.c)

    def density(self, x: ArrayLike) -> FloatArray:
        """The density of the continuous part, zero outside its support."""
        x = np.asarray(x, dtype=np.float64)
        inside = (x > self.lambda_minus) & (x < self.lambda_plus) & (x > 0.0)
        result = np.zeros_like(x)
        values = x[inside]
        result[inside] = np.sqrt((self.lambda_plus - values) * (values - self.lambda_minus)) / (
            2.0 * math.pi * self.c * self.sigma_sq * values
        )
        return result

    def expect(self, g: Callable[[float], float]) -> float:
        """The expectation of g under the law, its square-root edges handled by weighted QUADPACK.

        Raises:
            QuadratureError: if the error estimate exceeds 1e-8.
        """
        norm = 2.0 * math.pi * self.c * self.sigma_sq
        if self.lambda_minus > 1e-12 * self.lambda_plus:

            def _integrand(x: float) -> float:
                return g(x) / (norm * x)

            wvar = (0.5, 0.5)
        else:

            def _integrand(x: float) -> float:
                return g(x) / norm

            wvar = (-0.5, 0.5)

        value, abserr = integrate.quad(
            _integrand,
            self.lambda_minus,
            self.lambda_plus,
            weight="alg",
            wvar=wvar,
            epsabs=QUADPACK_TOLERANCE,
            epsrel=QUADPACK_TOLERANCE,
            limit=200,
        )
        if abserr > QUADPACK_ACCEPTANCE * max(1.0, abs(value)):
            raise QuadratureError(
                f"Marchenko-Pastur quadrature error estimate {abserr:.3e} is too large!"
            )
        return float(value) + self.atom_at_zero * g(0.0)


def mp_mutual_information(sigma_sq: float, c: float) -> float:
    """The integral of log(1 + x) under the Marchenko-Pastur law."""
    return MpLaw(sigma_sq=sigma_sq, c=c).expect(math.log1p)


def nats_to_bits(nats: float) -> float:
    """Convert an information quantity from nats to bits."""
    return nats / math.log(2.0)
