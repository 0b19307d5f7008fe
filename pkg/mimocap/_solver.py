import logging
import math
from collections.abc import Sequence
from dataclasses import dataclass
from dataclasses import field

import numpy as np

from mimocap._channel import ChannelModel
from mimocap._channel import ComplexArray
from mimocap._channel import FloatArray
from mimocap._errors import ConvergenceError
from mimocap._errors import StateInvariantError

logger = logging.getLogger(__name__)

STATE_SLACK: float = 1e-12
"""Relative slack allowed when checking the sign and bound invariants of a converged state."""

FALLBACK_DAMPING: float = 0.5
"""The damping the solver switches to when the residual keeps increasing."""

OSCILLATION_PATIENCE: int = 3
"""How many consecutive residual increases trigger the damping fallback."""

RATIO_FLOOR: float = 1e-9
"""Residual ratios are only recorded while the previous residual stays above this (relative)."""


@dataclass(frozen=True, eq=False)
class DeqState:
    """The pair of functions phi(f, z), phi_tilde(f, z) sampled on the frequency grid."""

    phi: ComplexArray
    phi_tilde: ComplexArray
    z: complex

    def __post_init__(self) -> None:
        """Validate the shapes of the sampled functions."""
        if self.phi.ndim != 1 or self.phi.shape != self.phi_tilde.shape:
            raise ValueError("phi and phi_tilde must be 1-D arrays sampled on the same grid!")

    @property
    def scale(self) -> float:
        """The largest magnitude across both components, floored at one."""
        return max(1.0, float(np.max(np.abs(self.phi))), float(np.max(np.abs(self.phi_tilde))))


@dataclass(frozen=True, slots=True)
class SolverOptions:
    """Controls for the fixed-point iteration.

    Attributes:
        tol: the target sup-norm change between consecutive iterates.
        max_iter: the maximum number of map applications.
        damping: the weight kept on the current iterate, in [0, 1).
    """

    tol: float = 1e-12
    max_iter: int = 100_000
    damping: float = 0.0

    def __post_init__(self) -> None:
        """Validate the solver controls."""
        if not self.tol > 0.0:
            raise ValueError(f"The tolerance must be positive but found: {self.tol}")
        if self.max_iter < 1:
            raise ValueError(f"max_iter must be at least 1 but found: {self.max_iter}")
        if not 0.0 <= self.damping < 1.0:
            raise ValueError(f"The damping must lie in [0, 1) but found: {self.damping}")


@dataclass(frozen=True, eq=False)
class SolverDiagnostics:
    """What happened during one solve."""

    iterations: int
    final_residual: float
    contraction_estimates: FloatArray
    damping: float = 0.0


def validate_point(z: complex) -> complex:
    """Reject evaluation points on the nonnegative real axis or in the lower half-plane."""
    z = complex(z)
    if not (math.isfinite(z.real) and math.isfinite(z.imag)):
        raise ValueError(f"The evaluation point must be finite but found: {z}")
    if z.imag < 0.0:
        raise ValueError(f"The evaluation point must not lie in the lower half-plane: {z}")
    if z.imag == 0.0 and z.real >= 0.0:
        raise ValueError(f"The evaluation point must not lie on [0, inf): {z}")
    return z


def initial_state(model: ChannelModel, z: complex) -> DeqState:
    """The starting point phi = -(N/T)/z, phi_tilde = -1/z of the iteration."""
    z = validate_point(z)
    size = model.grid.size
    return DeqState(
        phi=np.full(size, -model.c / z, dtype=np.complex128),
        phi_tilde=np.full(size, -1.0 / z, dtype=np.complex128),
        z=z,
    )


def perturb_state(state: DeqState) -> DeqState:
    """Multiply a state by (1 + 0.3i) and reflect each value into the upper half-plane."""

    def _perturb(values: ComplexArray) -> ComplexArray:
        moved = values * (1.0 + 0.3j)
        return np.asarray(np.where(moved.imag < 0.0, moved.conj(), moved), dtype=np.complex128)

    return DeqState(phi=_perturb(state.phi), phi_tilde=_perturb(state.phi_tilde), z=state.z)


def coupling(state: DeqState, model: ChannelModel) -> tuple[ComplexArray, ComplexArray]:
    """Return zeta = sigma^2 gamma(-f) * phi and zeta_tilde = sigma^2 gamma(f) * phi_tilde."""
    spectrum = model.doppler.spectrum
    zeta = model.sigma_sq * model.grid.correlate(spectrum, state.phi)
    zeta_tilde = model.sigma_sq * model.grid.convolve(spectrum, state.phi_tilde)
    if state.z.imag == 0.0:
        zeta = zeta.real.astype(np.complex128)
        zeta_tilde = zeta_tilde.real.astype(np.complex128)
    return zeta, zeta_tilde


def apply_map_h(state: DeqState, model: ChannelModel) -> DeqState:
    """Apply one step of the fixed-point map to a state.

    The resolvents are inverted through the eigenvalues of the Gram matrices, so that
    trace(S)/T = (1/T) sum_i 1 / (-z(1 + zeta_tilde) + lambda_i / (1 + zeta)) and dually.

    Raises:
        StateInvariantError: if a resolvent is singular at some grid point.
    """
    if state.phi.shape != (model.grid.size,):
        raise ValueError(
            f"The state holds {state.phi.size} points but the grid has {model.grid.size}!"
        )
    z = state.z
    zeta, zeta_tilde = coupling(state, model)
    try:
        with np.errstate(divide="raise", invalid="raise", over="raise"):
            phi = np.sum(
                1.0
                / (
                    -z * (1.0 + zeta_tilde)[:, None]
                    + model.gram_eigenvalues / (1.0 + zeta)[:, None]
                ),
                axis=1,
            )
            phi_tilde = np.sum(
                1.0
                / (
                    -z * (1.0 + zeta)[:, None]
                    + model.cogram_eigenvalues / (1.0 + zeta_tilde)[:, None]
                ),
                axis=1,
            )
    except FloatingPointError as error:
        raise StateInvariantError(f"Singular resolvent while iterating at z={z}!") from error
    return DeqState(phi=phi / model.T, phi_tilde=phi_tilde / model.T, z=z)


def state_residual(first: DeqState, second: DeqState) -> float:
    """The maximum of the sup-norm distances between the two components."""
    return max(
        float(np.max(np.abs(first.phi - second.phi))),
        float(np.max(np.abs(first.phi_tilde - second.phi_tilde))),
    )


def state_violations(state: DeqState, model: ChannelModel) -> list[str]:
    """List the sign and boundedness properties that a state fails to satisfy.

    In the upper half-plane phi, phi_tilde, z phi and z phi_tilde have nonnegative imaginary parts
    and |phi| <= c / Im z, |phi_tilde| <= 1 / Im z. On the negative real axis both functions are
    real and positive.
    """
    z = state.z
    slack = STATE_SLACK * state.scale
    violations: list[str] = []
    if z.imag > 0.0:
        for name, values in (
            ("Im phi", state.phi.imag),
            ("Im phi_tilde", state.phi_tilde.imag),
            ("Im z*phi", (z * state.phi).imag),
            ("Im z*phi_tilde", (z * state.phi_tilde).imag),
        ):
            if float(np.min(values)) < -slack:
                violations.append(f"{name} is negative (min {float(np.min(values)):.3e})")
        if float(np.max(np.abs(state.phi))) > model.c / z.imag + STATE_SLACK:
            violations.append("|phi| exceeds c / Im z")
        if float(np.max(np.abs(state.phi_tilde))) > 1.0 / z.imag + STATE_SLACK:
            violations.append("|phi_tilde| exceeds 1 / Im z")
    else:
        for name, values in (("phi", state.phi), ("phi_tilde", state.phi_tilde)):
            if float(np.max(np.abs(values.imag))) > slack:
                violations.append(f"{name} is not real at a real evaluation point")
            if float(np.min(values.real)) <= 0.0:
                violations.append(f"{name} is not positive at a real evaluation point")
    return violations


def solve(
    model: ChannelModel,
    z: complex,
    options: SolverOptions | None = None,
    initial: DeqState | None = None,
) -> tuple[DeqState, SolverDiagnostics]:
    """Solve the coupled fixed-point system at one evaluation point.

    Iterates next = (1 - d) h(cur) + d cur until the change falls below the tolerance. When the
    residual grows for several consecutive iterations the damping is raised to 0.5.

    Args:
        model: the channel model.
        z: an evaluation point in the upper half-plane or on the negative real axis.
        options: iteration controls, defaults if not given.
        initial: a custom starting state; by default phi = -(N/T)/z, phi_tilde = -1/z.

    Returns:
        The converged state and the iteration diagnostics.

    Raises:
        ConvergenceError: if the tolerance is not reached within `max_iter` applications.
        StateInvariantError: if the converged state violates its sign or bound properties.
    """
    options = SolverOptions() if options is None else options
    z = validate_point(z)
    if initial is None:
        current = initial_state(model, z)
    elif initial.z != z:
        raise ValueError(f"The initial state was built for z={initial.z}, not z={z}!")
    else:
        current = initial

    damping = options.damping
    ratios: list[float] = []
    previous = math.inf
    increases = 0
    residual = math.inf

    for iteration in range(options.max_iter):
        image = apply_map_h(current, model)
        residual = state_residual(image, current)
        if residual < options.tol:
            diagnostics = SolverDiagnostics(
                iterations=iteration,
                final_residual=residual,
                contraction_estimates=np.asarray(ratios, dtype=np.float64),
                damping=damping,
            )
            logger.debug(
                "Solved at z=%s in %d iterations (residual %.3e).", z, iteration, residual
            )
            violations = state_violations(current, model)
            if violations:
                raise StateInvariantError(
                    f"The converged state at z={z} is invalid: {'; '.join(violations)}!"
                )
            return current, diagnostics

        if previous < math.inf and previous > RATIO_FLOOR * current.scale:
            ratios.append(residual / previous)
        increases = increases + 1 if residual > previous else 0
        if increases >= OSCILLATION_PATIENCE and damping < FALLBACK_DAMPING:
            logger.warning(
                "Residual increased %d times in a row at z=%s; switching to damping %g.",
                increases,
                z,
                FALLBACK_DAMPING,
            )
            damping = FALLBACK_DAMPING
            increases = 0
        previous = residual

        if damping == 0.0:
            current = image
        else:
            current = DeqState(
                phi=(1.0 - damping) * image.phi + damping * current.phi,
                phi_tilde=(1.0 - damping) * image.phi_tilde + damping * current.phi_tilde,
                z=z,
            )

    raise ConvergenceError(
        f"The iteration at z={z} did not converge after {options.max_iter} iterations "
        f"(last residual {residual:.3e})!",
        iterations=options.max_iter,
        residual=residual,
    )


def in_contraction_region(model: ChannelModel, z: complex) -> bool:
    """Whether the fixed-point map is guaranteed to halve distances at `z`.

    The test is (c v 1) sigma^2 (a^2 |z|^2 / (Im z)^4 + |z| / (Im z)^2) < 1/2, where a is the sum
    of the spectral norms of the LOS taps.
    """
    z = complex(z)
    if not z.imag > 0.0:
        raise ValueError(f"The contraction region lies in the upper half-plane but found: {z}")
    a_sq = model.spectral_norm_sum**2
    y = z.imag
    left = max(model.c, 1.0) * model.sigma_sq * (a_sq * abs(z) ** 2 / y**4 + abs(z) / y**2)
    return left < 0.5


def contraction_threshold(model: ChannelModel) -> float:
    """The height above which every point iy of the imaginary axis is in the contraction region."""
    k = max(model.c, 1.0) * model.sigma_sq
    if k == 0.0:
        return 0.0
    return k + math.sqrt(k**2 + 2.0 * k * model.spectral_norm_sum**2)


def continuity_bound(model: ChannelModel, z: complex, first: int, second: int) -> float:
    """Bound how much a solution can change between the grid points `first` and `second`.

    The bound is (c v 1)|z|/(Im z)^3 ((sigma^2 + |z| sigma^2 a^2/(Im z)^2) int|gamma(f - f' + u)
    - gamma(u)| du + 4 pi L a^2 |f - f'|), with the integral taken on the grid.
    """
    z = complex(z)
    if not z.imag > 0.0:
        raise ValueError(f"The continuity bound holds in the upper half-plane but found: {z}")
    spectrum = model.doppler.spectrum
    variation = float(np.mean(np.abs(np.roll(spectrum, first - second) - spectrum)))
    y = z.imag
    a_sq = model.spectral_norm_sum**2
    distance = abs(float(model.grid.points[first] - model.grid.points[second]))
    return (
        max(model.c, 1.0)
        * abs(z)
        / y**3
        * (
            (model.sigma_sq + abs(z) * model.sigma_sq * a_sq / y**2) * variation
            + 4.0 * math.pi * model.L * a_sq * distance
        )
    )


def stieltjes_p(state: DeqState, model: ChannelModel) -> complex:
    """The Stieltjes transform p(z) = (T/N) integral of phi(f, z) df."""
    return complex((model.T / model.N) * np.mean(state.phi))


@dataclass(frozen=True, slots=True)
class StieltjesCheck:
    """The outcome of one property check at one evaluation point."""

    name: str
    z: complex
    passed: bool
    value: float


@dataclass(frozen=True)
class StieltjesReport:
    """The outcomes of all property checks over a sample of evaluation points."""

    checks: list[StieltjesCheck] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        """Whether every check passed."""
        return all(check.passed for check in self.checks)

    def failures(self) -> list[StieltjesCheck]:
        """The checks that failed."""
        return [check for check in self.checks if not check.passed]


def check_stieltjes_properties(
    states: Sequence[DeqState],
    model: ChannelModel,
    ladder: Sequence[DeqState] = (),
) -> StieltjesReport:
    """Check that solutions behave like Stieltjes transforms of probability measures.

    At every state: phi and phi_tilde satisfy their sign and bound properties, Im p > 0,
    Im(z p) > 0 and |p| <= 1/Im z. Over the ladder of states at points iy, the normalization
    error |-iy p(iy) - 1| must decrease as y grows. Failures are reported, never raised.
    """
    checks: list[StieltjesCheck] = []
    for state in states:
        z = state.z
        if not z.imag > 0.0:
            raise ValueError(f"Stieltjes properties are checked in the upper half-plane: {z}")
        p = stieltjes_p(state, model)
        violations = state_violations(state, model)
        checks.append(StieltjesCheck("state", z, not violations, float(len(violations))))
        checks.append(StieltjesCheck("im_p", z, p.imag > 0.0, p.imag))
        checks.append(StieltjesCheck("im_zp", z, (z * p).imag > -STATE_SLACK, (z * p).imag))
        checks.append(
            StieltjesCheck("p_bound", z, abs(p) <= 1.0 / z.imag + STATE_SLACK, abs(p) * z.imag)
        )

    ordered = sorted(ladder, key=lambda state: state.z.imag)
    errors = [abs(-1j * state.z.imag * stieltjes_p(state, model) - 1.0) for state in ordered]
    for index, state in enumerate(ordered):
        decreasing = index == 0 or errors[index] < errors[index - 1]
        checks.append(StieltjesCheck("normalization", state.z, decreasing, errors[index]))
    return StieltjesReport(checks=checks)


def stieltjes_report(
    model: ChannelModel,
    points: Sequence[complex],
    ladder: Sequence[float] = (10.0, 100.0, 1000.0),
    options: SolverOptions | None = None,
) -> StieltjesReport:
    """Solve at every point and along the imaginary ladder, then check the Stieltjes properties."""
    states = [solve(model, z, options)[0] for z in points]
    rungs = [solve(model, complex(0.0, y), options)[0] for y in ladder]
    return check_stieltjes_properties(states, model, rungs)
