import math

import pytest

from mimocap import DopplerConfig
from mimocap import DopplerKind
from mimocap import LosConfig
from mimocap import ModelConfig
from mimocap import MpLaw
from mimocap import QuadratureEstimate
from mimocap import SnrConfig
from mimocap import Trend
from mimocap import build_model
from mimocap import classify_trend
from mimocap import deq_mutual_information
from mimocap import deterministic_only_mutual_info
from mimocap import mp_mutual_information
from mimocap import mp_stieltjes
from mimocap import mutual_info_via_quadrature
from mimocap import nats_to_bits
from mimocap._channel import ChannelModel
from mimocap._channel import LosTaps
from mimocap._channel import PowerProfile
from mimocap._channel import build_delta_doppler
from mimocap._channel import make_grid

GOLDEN_MP_MUTUAL_INFO: float = (
    2.0 * math.log((1.0 + math.sqrt(5.0)) / 2.0) - (3.0 - math.sqrt(5.0)) / 2.0
)
"""The Marchenko-Pastur mutual information at c = 1 and sigma^2 = 1."""


def _config(
    N: int = 4,  # noqa: N803
    T: int = 4,  # noqa: N803
    L: int = 1,  # noqa: N803
    K: float | str = 1.0,  # noqa: N803
    rho_db: float = 10.0,
    xi: float | None = 1.0,
    doppler: DopplerConfig | None = None,
    grid_size: int = 64,
) -> ModelConfig:
    return ModelConfig(
        version=1,
        N=N,
        T=T,
        L=L,
        doppler=doppler or DopplerConfig(kind=DopplerKind.Exponential, f_d=1.0),
        snr=SnrConfig(K=K, rho_db=rho_db),  # type: ignore[arg-type]
        los=None if xi is None else LosConfig(xi=xi),
        grid_size=grid_size,
    )


def test_golden_ratio_oracle_value() -> None:
    """Test the closed form of the Marchenko-Pastur mutual information at c = 1."""
    assert GOLDEN_MP_MUTUAL_INFO == pytest.approx(0.5804576388, abs=1e-10)
    assert mp_mutual_information(1.0, 1.0) == pytest.approx(GOLDEN_MP_MUTUAL_INFO, abs=1e-10)


@pytest.mark.parametrize("c", [0.25, 0.5, 1.0, 2.0, 4.0])
@pytest.mark.parametrize("sigma_sq", [0.5, 1.0, 10.0])
def test_marchenko_pastur_moments(c: float, sigma_sq: float) -> None:
    """Test that the law has unit mass, mean sigma^2 and second moment sigma^4 (1 + c)."""
    law = MpLaw(sigma_sq=sigma_sq, c=c)
    assert law.expect(lambda x: 1.0) == pytest.approx(1.0, abs=1e-9)
    assert law.expect(lambda x: x) == pytest.approx(sigma_sq, rel=1e-9)
    assert law.expect(lambda x: x * x) == pytest.approx(sigma_sq**2 * (1.0 + c), rel=1e-9)


def test_marchenko_pastur_law_rejects_bad_parameters() -> None:
    """Test that the law needs a positive variance and ratio."""
    with pytest.raises(ValueError, match="sigma\\^2 must be positive"):
        MpLaw(sigma_sq=0.0, c=1.0)
    with pytest.raises(ValueError, match="c must be positive"):
        MpLaw(sigma_sq=1.0, c=0.0)


def test_marchenko_pastur_density_vanishes_off_support() -> None:
    """Test that the density is zero outside [lambda_minus, lambda_plus]."""
    law = MpLaw(sigma_sq=1.0, c=0.25)
    assert law.lambda_minus == pytest.approx(0.25)
    assert law.lambda_plus == pytest.approx(2.25)
    density = law.density([0.1, 1.0, 3.0])
    assert density[0] == 0.0
    assert density[1] > 0.0
    assert density[2] == 0.0


@pytest.mark.parametrize("z", [-1.0, -0.1, 1j, 2.0 + 0.5j, -3.0 + 0.01j])
@pytest.mark.parametrize("c", [0.5, 1.0, 2.0])
def test_mp_stieltjes_solves_its_coupled_equations(z: complex, c: float) -> None:
    """Test that the selected roots satisfy both scalar equations and lie on the right branch."""
    alpha, alpha_tilde = mp_stieltjes(1.0, c, z)
    z = complex(z)
    assert alpha == pytest.approx(c / (-z - z * alpha_tilde), abs=1e-12)
    assert alpha_tilde == pytest.approx(1.0 / (-z - z * alpha), abs=1e-12)
    if z.imag > 0.0:
        assert alpha.imag > 0.0
    else:
        assert alpha.real > 0.0
        assert alpha.imag == 0.0


def test_mp_stieltjes_without_fading() -> None:
    """Test that a vanishing variance gives the transforms of a point mass at zero."""
    alpha, alpha_tilde = mp_stieltjes(0.0, 2.0, 1j)
    assert alpha == pytest.approx(2j)
    assert alpha_tilde == pytest.approx(1j)


@pytest.mark.parametrize(("N", "T"), [(1, 2), (2, 2), (2, 1), (3, 2)])
def test_rayleigh_mutual_info_matches_marchenko_pastur(N: int, T: int) -> None:  # noqa: N803
    """Test that a Rayleigh single-lag channel has the Marchenko-Pastur mutual information."""
    model = build_model(
        _config(N=N, T=T, L=0, K=0.0, xi=None, doppler=DopplerConfig(kind=DopplerKind.Delta))
    )
    result = deq_mutual_information(model)
    assert result.total == pytest.approx(mp_mutual_information(model.rho, N / T), abs=1e-6)


def test_rayleigh_mutual_info_at_unit_snr_is_the_golden_value() -> None:
    """Test the square Rayleigh channel at unit SNR against the closed form."""
    config = ModelConfig(
        version=1,
        N=2,
        T=2,
        L=0,
        doppler=DopplerConfig(kind=DopplerKind.Jakes, f_d=0.2),
        snr=SnrConfig(K=0.0, rho=1.0),
    )
    result = deq_mutual_information(build_model(config))
    assert result.total == pytest.approx(GOLDEN_MP_MUTUAL_INFO, abs=1e-8)


def test_mutual_info_terms_add_up() -> None:
    """Test that the total is the log-determinant plus the log term minus the cross term."""
    result = deq_mutual_information(build_model(_config()))
    expected = result.term_logdet + result.term_log_scalar - result.term_cross
    assert result.total == pytest.approx(expected, abs=1e-15)
    assert result.state.z == -1.0
    assert result.total > 0.0


def test_deterministic_channel_matches_the_log_determinant() -> None:
    """Test that without fading the mutual information is the integrated log-determinant."""
    model = build_model(_config(L=2, K="inf"))
    assert model.sigma_sq == 0.0
    oracle = deterministic_only_mutual_info(model)
    assert deq_mutual_information(model).total == pytest.approx(oracle, abs=1e-10)


def test_deterministic_oracle_refuses_fading_channels() -> None:
    """Test that the deterministic oracle needs a channel without a random part."""
    with pytest.raises(ValueError, match="no random part"):
        deterministic_only_mutual_info(build_model(_config()))


def test_mutual_info_grows_with_snr() -> None:
    """Test that the mutual information increases with the SNR."""
    totals = [
        deq_mutual_information(build_model(_config(rho_db=rho_db))).total
        for rho_db in (-5.0, 0.0, 5.0, 10.0)
    ]
    assert totals == sorted(totals)
    assert len(set(totals)) == len(totals)


def test_rank_deficient_los_loses_to_rayleigh_at_large_k() -> None:
    """Test that a strong rank-one deterministic part gives less than pure fading."""
    totals = {
        k: deq_mutual_information(build_model(_config(L=0, K=k))).total
        for k in (0.0, 1.0, 3.0, 10.0, 100.0)
    }
    assert totals[100.0] < max(totals.values())
    assert totals[100.0] < totals[0.0]


def test_k_sweep_peaks_inside_its_range() -> None:
    """Test that the mutual information first rises and then falls as K grows."""
    totals = [
        deq_mutual_information(build_model(_config(N=2, T=3, L=3, K=k, xi=2.0))).total
        for k in (0.0, 1.0, 3.0, 10.0, 100.0)
    ]
    assert classify_trend(totals) is Trend.InteriorMax


def test_mutual_info_decreases_with_inverse_delay_spread() -> None:
    """Test that concentrating the LOS power on fewer taps lowers the mutual information."""
    totals = [
        deq_mutual_information(build_model(_config(K=10.0, xi=xi))).total
        for xi in (0.5, 1.0, 2.0, 4.0)
    ]
    assert all(first > second for first, second in zip(totals, totals[1:]))


def test_quadrature_agrees_with_the_closed_form() -> None:
    """Test that integrating the Stieltjes transform recovers the mutual information."""
    model = build_model(_config(N=2, T=2, L=1, K=1.0, rho_db=0.0, grid_size=32))
    direct = deq_mutual_information(model).total
    estimate = mutual_info_via_quadrature(model, t_max=1e4, n_t=64)
    low, high = estimate.interval
    assert low - 1e-3 <= direct <= high + 1e-3
    assert estimate.tail_bound == pytest.approx(3.0 * (model.spectral_norm_sum**2 + 0.5) / 1e4)


@pytest.mark.parametrize(
    ("doppler", "K"),
    [
        (DopplerConfig(kind=DopplerKind.Delta), 0.0),
        (DopplerConfig(kind=DopplerKind.Delta), 10.0),
        (DopplerConfig(kind=DopplerKind.Exponential, f_d=1.0), 1.0),
        (DopplerConfig(kind=DopplerKind.Exponential, f_d=1.0), "inf"),
        (DopplerConfig(kind=DopplerKind.Jakes, f_d=0.2), 1.0),
        (DopplerConfig(kind=DopplerKind.Jakes, f_d=0.2), 10.0),
    ],
)
def test_quadrature_brackets_the_closed_form(
    doppler: DopplerConfig,
    K: float | str,  # noqa: N803
) -> None:
    """Test that the closed form lies in the quadrature interval across Doppler models and K."""
    model = build_model(_config(N=2, T=2, L=1, K=K, rho_db=0.0, doppler=doppler, grid_size=32))
    direct = deq_mutual_information(model).total
    low, high = mutual_info_via_quadrature(model).interval
    assert low - 1e-4 <= direct <= high + 1e-4


def test_quadrature_grows_with_the_truncation_point() -> None:
    """Test that extending the ladder at a fixed step never lowers the truncated integral."""
    model = build_model(_config(N=2, T=2, L=1, K=1.0, rho_db=0.0, grid_size=32))
    values = [
        mutual_info_via_quadrature(model, t_max=t_max, n_t=n_t).value
        for t_max, n_t in ((1e2, 33), (1e3, 49), (1e4, 65))
    ]
    assert all(second >= first - 1e-12 for first, second in zip(values, values[1:]))


def test_quadrature_of_a_silent_channel_is_zero() -> None:
    """Test that a channel with neither fading nor LOS part integrates to exactly zero."""
    grid = make_grid(8)
    model = ChannelModel.build(
        build_delta_doppler(grid), PowerProfile.uniform(0, 0.0), LosTaps.zeros(1, 1, 0), grid
    )
    estimate = mutual_info_via_quadrature(model, t_max=1e3, n_t=16)
    assert estimate.value == pytest.approx(0.0, abs=1e-12)
    assert estimate.tail_bound == 0.0


def test_quadrature_is_independent_of_the_thread_count() -> None:
    """Test that solving the ladder on several threads gives the same integral."""
    model = build_model(_config(N=2, T=2, L=0, K=0.0, xi=None, rho_db=0.0, grid_size=16))
    serial = mutual_info_via_quadrature(model, n_t=16)
    threaded = mutual_info_via_quadrature(model, n_t=16, threads=3)
    assert serial == threaded


def test_quadrature_rejects_bad_arguments() -> None:
    """Test the ranges of the quadrature controls."""
    model = build_model(_config(N=1, T=1, L=0, K=0.0, xi=None, grid_size=8))
    with pytest.raises(ValueError, match="t_max must be at least 10"):
        mutual_info_via_quadrature(model, t_max=5.0)
    with pytest.raises(ValueError, match="n_t must be at least 16"):
        mutual_info_via_quadrature(model, n_t=8)
    with pytest.raises(ValueError, match="threads must be at least 1"):
        mutual_info_via_quadrature(model, threads=0)


def test_quadrature_interval() -> None:
    """Test that the interval extends the truncated value by the tail bound."""
    assert QuadratureEstimate(value=1.0, tail_bound=0.25).interval == (1.0, 1.25)


def test_nats_to_bits() -> None:
    """Test the unit conversion."""
    assert nats_to_bits(math.log(2.0)) == pytest.approx(1.0)
    assert nats_to_bits(0.0) == 0.0
