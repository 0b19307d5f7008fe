import logging

import numpy as np
from numpy.random import default_rng

from mimocap._channel import DopplerKind
from mimocap._channel import build_exponential_doppler
from mimocap._channel import make_grid
from mimocap._config import DopplerConfig
from mimocap._config import LosConfig
from mimocap._config import ModelConfig
from mimocap._config import SnrConfig
from mimocap._config import build_model
from mimocap._mutual_info import deq_mutual_information
from mimocap._mutual_info import deterministic_only_mutual_info
from mimocap._mutual_info import mp_mutual_information
from mimocap._mutual_info import mp_stieltjes
from mimocap._records import CheckRecord
from mimocap._solver import contraction_threshold
from mimocap._solver import in_contraction_region
from mimocap._solver import solve
from mimocap._solver import stieltjes_p
from mimocap._solver import stieltjes_report
from mimocap.montecarlo import McConfig
from mimocap.montecarlo import autocovariance
from mimocap.montecarlo import estimate
from mimocap.montecarlo import field_sequences
from mimocap.montecarlo import generate_lag_field
from mimocap.montecarlo import pseudo_covariance

logger = logging.getLogger(__name__)

MP_RATIOS: tuple[tuple[int, int], ...] = ((1, 2), (2, 2), (2, 1))
"""(N, T) pairs giving the antenna ratios 0.5, 1 and 2."""

MP_DOPPLERS: tuple[DopplerConfig, ...] = (
    DopplerConfig(kind=DopplerKind.Delta),
    DopplerConfig(kind=DopplerKind.Exponential, f_d=1.0),
    DopplerConfig(kind=DopplerKind.Jakes, f_d=0.2),
)


def marchenko_pastur_suite() -> list[CheckRecord]:
    """Channels without a deterministic part must reduce to the Marchenko-Pastur law."""
    checks: list[CheckRecord] = []
    for N, T in MP_RATIOS:  # noqa: N806
        for doppler in MP_DOPPLERS:
            config = ModelConfig(
                version=1, N=N, T=T, L=0, doppler=doppler, snr=SnrConfig(K=0.0, rho=1.0)
            )
            model = build_model(config)
            result = deq_mutual_information(model)
            alpha, _ = mp_stieltjes(1.0, model.c, -1.0)
            oracle = mp_mutual_information(1.0, model.c)
            label = f"c={model.c:g}/{doppler.kind}"
            spread = float(np.ptp(result.state.phi.real))
            error = float(np.max(np.abs(result.state.phi - alpha)))
            checks.append(
                CheckRecord(suite="mp", name=f"{label}:flat", passed=spread < 1e-10, value=spread)
            )
            checks.append(
                CheckRecord(
                    suite="mp",
                    name=f"{label}:alpha",
                    passed=error < 1e-8,
                    value=float(result.state.phi[0].real),
                    expected=alpha.real,
                )
            )
            checks.append(
                CheckRecord(
                    suite="mp",
                    name=f"{label}:mutual_info",
                    passed=abs(result.total - oracle) < 1e-6,
                    value=result.total,
                    expected=oracle,
                )
            )
    return checks


def deterministic_suite(seed: int = 42, window: int = 201) -> list[CheckRecord]:
    """A channel with no fading must match the Toeplitz-limit log determinant."""
    config = ModelConfig(
        version=1,
        N=4,
        T=4,
        L=2,
        doppler=DopplerConfig(kind=DopplerKind.Delta),
        snr=SnrConfig(K="inf", rho_db=10.0),
        los=LosConfig(xi=1.0),
    )
    model = build_model(config)
    oracle = deterministic_only_mutual_info(model)
    deq = deq_mutual_information(model).total
    mc = estimate(model, McConfig.from_window(window, trials=1, seed=seed)).mean
    return [
        CheckRecord(
            suite="deterministic",
            name="deq",
            passed=abs(deq - oracle) < 1e-10,
            value=deq,
            expected=oracle,
        ),
        CheckRecord(
            suite="deterministic",
            name=f"montecarlo:M={window}",
            passed=abs(mc - oracle) <= 0.01 * oracle,
            value=mc,
            expected=oracle,
        ),
    ]


def contraction_suite(points: int = 20) -> list[CheckRecord]:
    """Inside the contraction region every iteration must at least halve the residual."""
    config = ModelConfig(
        version=1,
        N=2,
        T=3,
        L=1,
        doppler=DopplerConfig(kind=DopplerKind.Exponential, f_d=0.5),
        snr=SnrConfig(K=1.0, rho=2.0),
        los=LosConfig(xi=1.0),
    )
    model = build_model(config)
    threshold = contraction_threshold(model)
    checks: list[CheckRecord] = []
    for index in range(points):
        y = threshold * (1.1 + 0.15 * index)
        z = complex(0.1 * y * (-1) ** index, y)
        if not in_contraction_region(model, z):
            z = complex(0.0, y)
        _, diagnostics = solve(model, z)
        worst = float(np.max(diagnostics.contraction_estimates, initial=0.0))
        checks.append(
            CheckRecord(
                suite="contraction",
                name=f"z={z:.4g}",
                passed=worst <= 0.5 + 1e-9,
                value=worst,
                expected=0.5,
            )
        )
    return checks


def stieltjes_suite(seed: int = 42, models: int = 10) -> list[CheckRecord]:
    """Solutions on random models must behave like Stieltjes transforms of probabilities."""
    rng = default_rng(seed)
    checks: list[CheckRecord] = []
    for index in range(models):
        kind = DopplerKind.Exponential if rng.random() < 0.5 else DopplerKind.Delta
        f_d = float(rng.uniform(0.2, 2.0)) if kind is DopplerKind.Exponential else None
        ricean_k = float(rng.choice([0.0, 1.0, 10.0]))
        config = ModelConfig(
            version=1,
            N=int(rng.integers(1, 4)),
            T=int(rng.integers(1, 4)),
            L=int(rng.integers(0, 3)),
            doppler=DopplerConfig(kind=kind, f_d=f_d),
            snr=SnrConfig(K=ricean_k, rho_db=float(rng.uniform(-5.0, 5.0))),
            los=LosConfig(xi=float(rng.uniform(0.5, 2.0))),
            grid_size=64,
        )
        model = build_model(config)
        report = stieltjes_report(model, (1j, 1 + 2j, -3 + 0.5j), ladder=(10.0, 100.0, 1000.0))
        failures = report.failures()
        checks.append(
            CheckRecord(
                suite="stieltjes",
                name=f"model{index}:properties",
                passed=report.passed,
                value=float(len(failures)),
                expected=0.0,
                detail="; ".join(f"{check.name}@{check.z}" for check in failures) or None,
            )
        )
        state, _ = solve(model, 100j)
        error = abs(-100j * stieltjes_p(state, model) - 1.0)
        checks.append(
            CheckRecord(
                suite="stieltjes",
                name=f"model{index}:normalization",
                passed=error < 0.05,
                value=error,
                expected=0.0,
            )
        )
    return checks


def field_statistics_suite(seed: int = 42, max_lag: int = 5) -> list[CheckRecord]:
    """Generated fields must have the model autocovariance and vanishing pseudo-covariance."""
    doppler = build_exponential_doppler(1.0, make_grid())
    field = generate_lag_field(doppler, n=10, N=100, T=100, rng=default_rng(seed))
    sequences = field_sequences(field)
    covariance = autocovariance(sequences, max_lag)
    pseudo = pseudo_covariance(sequences, max_lag)
    checks: list[CheckRecord] = []
    for lag in range(max_lag + 1):
        expected = doppler.gamma(lag)
        gap = abs(complex(covariance.values[lag]) - expected)
        checks.append(
            CheckRecord(
                suite="field",
                name=f"autocovariance:lag={lag}",
                passed=gap <= 3.0 * float(covariance.stderr[lag]),
                value=float(covariance.values[lag].real),
                expected=expected,
            )
        )
        size = abs(complex(pseudo.values[lag]))
        checks.append(
            CheckRecord(
                suite="field",
                name=f"pseudo_covariance:lag={lag}",
                passed=size <= 3.0 * float(pseudo.stderr[lag]),
                value=size,
                expected=0.0,
            )
        )
    return checks


def run_selftest(seed: int = 42) -> list[CheckRecord]:
    """Run every oracle suite and return one record per check."""
    checks: list[CheckRecord] = []
    for name, suite in (
        ("marchenko-pastur", marchenko_pastur_suite),
        ("deterministic", lambda: deterministic_suite(seed)),
        ("contraction", contraction_suite),
        ("stieltjes", lambda: stieltjes_suite(seed)),
        ("field statistics", lambda: field_statistics_suite(seed)),
    ):
        results = suite()
        failed = sum(not check.passed for check in results)
        logger.info("Self-test suite %s: %d checks, %d failed.", name, len(results), failed)
        checks.extend(results)
    return checks
