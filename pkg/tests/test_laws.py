import math

import numpy as np
import pytest
from scipy import integrate, stats

from tidlab.common.errors import DomainError, InvalidParameters, NoLimitLaw, NonIntegrable
from tidlab.common.utils.rng import RngStreamSpec
from tidlab.laws.densities import cdf_table, density, law_cdf, law_sample, normalizer
from tidlab.laws.descriptor import LawKind, LimitLawDescriptor, Quadrature, Support
from tidlab.laws.packages import blowup_profile, fit_blowup_exponent, limit_package
from tidlab.laws.rates import bessel_log_rate, linear_case_params, transient_rate
from tidlab.model.params import Params
from tidlab.model.regime import NormKind, classify
from tidlab.stats.ks import ks_distance
from tidlab.time_change.path import KilledPath

LAMBDA_GAUSSIAN = LimitLawDescriptor.lambda_law(-1.0, 1.0)
PI_GAUSSIAN = LimitLawDescriptor.pi_law(-1.0, 1.0)


def test_normalizer_examples():
    assert normalizer(0.0, 0.5, LawKind.LAMBDA) == pytest.approx(math.sqrt(2 * math.pi), rel=1e-8)
    assert normalizer(-1.0, 1.0, LawKind.LAMBDA) == pytest.approx(
        math.sqrt(2 * math.pi / 3), rel=1e-8
    )
    assert normalizer(-1.0, 1.0, LawKind.PI) == pytest.approx(math.sqrt(math.pi), rel=1e-8)


@pytest.mark.parametrize(
    "rho, alpha, kind",
    [(0.5, 1.0, LawKind.LAMBDA), (1.0, 2.0, LawKind.LAMBDA), (1.0, 0.0, LawKind.PI)],
)
def test_normalizer_rejects_non_integrable(rho, alpha, kind):
    with pytest.raises(NonIntegrable):
        normalizer(rho, alpha, kind)


@pytest.mark.parametrize(
    "law",
    [
        LimitLawDescriptor.lambda_law(0.3, 0.5),
        LimitLawDescriptor.lambda_law(-2.0, 2.0),
        LimitLawDescriptor.lambda_law(0.4, -1.0),
        LimitLawDescriptor.lambda_law(1.0, -2.0),
        LimitLawDescriptor.pi_law(-1.0, 0.0),
        LimitLawDescriptor.pi_law(-0.5, 3.0),
        LimitLawDescriptor.sqrt_gamma(1.5, 2.0),
        LimitLawDescriptor.half_gaussian(),
    ],
)
def test_densities_integrate_to_one(law):
    positive, _ = integrate.quad(lambda x: density(law, x), 0.0, math.inf, limit=200)
    negative, _ = integrate.quad(lambda x: density(law, x), -math.inf, 0.0, limit=200)
    if law.support == Support.HALF_LINE_POS:
        assert negative == 0.0
    assert positive + negative == pytest.approx(1.0, abs=1e-7)


def test_gaussian_reductions_are_pointwise_exact():
    x = np.linspace(-3.0, 3.0, 25)
    np.testing.assert_allclose(
        density(LAMBDA_GAUSSIAN, x), stats.norm.pdf(x, scale=math.sqrt(1 / 3)), rtol=1e-8
    )
    np.testing.assert_allclose(
        density(PI_GAUSSIAN, x), stats.norm.pdf(x, scale=math.sqrt(0.5)), rtol=1e-8
    )
    np.testing.assert_allclose(
        law_cdf(LAMBDA_GAUSSIAN, x), stats.norm.cdf(x, scale=math.sqrt(1 / 3)), atol=1e-8
    )


def test_cdf_examples():
    assert law_cdf(LimitLawDescriptor.gaussian(0.0, 1.0), 0.0) == pytest.approx(0.5)
    assert law_cdf(LimitLawDescriptor.half_gaussian(), 0.0) == 0.0
    assert law_cdf(LAMBDA_GAUSSIAN, 0.0) == pytest.approx(0.5)
    assert law_cdf(LimitLawDescriptor.deterministic(2.0), 1.9) == 0.0
    assert law_cdf(LimitLawDescriptor.deterministic(2.0), 2.0) == 1.0


def test_cdf_is_monotone_on_the_half_line():
    law = LimitLawDescriptor.lambda_law(1.0, -2.0)
    x = np.linspace(-1.0, 6.0, 40)
    values = law_cdf(law, x)
    assert np.all(values[x <= 0] == 0.0)
    assert np.all(np.diff(values) >= 0.0)
    assert values[-1] == pytest.approx(1.0, abs=1e-6)


def test_point_laws_have_no_density():
    with pytest.raises(DomainError):
        density(LimitLawDescriptor.point_mass_zero(), 0.0)


def test_gaussian_sample_mean():
    samples = law_sample(LimitLawDescriptor.gaussian(0.0, 1.0), RngStreamSpec(1), 100000)
    assert abs(samples.mean()) < 0.02


def test_lambda_sampler_matches_its_cdf():
    samples = law_sample(LAMBDA_GAUSSIAN, RngStreamSpec(2), 10000)
    report = ks_distance(samples, lambda x: law_cdf(LAMBDA_GAUSSIAN, x))
    assert report.statistic < 0.02


@pytest.mark.parametrize(
    "law", [LimitLawDescriptor.pi_law(-0.5, 3.0), LimitLawDescriptor.lambda_law(1.0, -2.0)]
)
def test_tabulated_sampler_matches_its_cdf(law):
    samples = law_sample(law, RngStreamSpec(3), 10000)
    report = ks_distance(samples, lambda x: law_cdf(law, x))
    assert report.statistic < 0.025


def test_sqrt_gamma_sample_moments():
    samples = law_sample(LimitLawDescriptor.sqrt_gamma(1.5, 2.0), RngStreamSpec(4), 10000)
    assert np.all(samples >= 0.0)
    assert np.mean(samples ** 2) == pytest.approx(3.0, rel=0.05)


def test_law_sample_is_deterministic():
    law = LimitLawDescriptor.pi_law(-1.0, 0.0)
    first = law_sample(law, RngStreamSpec(9, 4), 100)
    second = law_sample(law, RngStreamSpec(9, 4), 100)
    np.testing.assert_array_equal(first, second)
    assert not np.array_equal(first, law_sample(law, RngStreamSpec(9, 5), 100))


def test_cdf_table_is_monotone():
    table = cdf_table(LimitLawDescriptor.pi_law(-0.5, 3.0))
    assert table.cumulative[0] == 0.0
    assert table.cumulative[-1] == pytest.approx(1.0)
    draws = table.sample_abs(np.linspace(0.0, 1.0, 101))
    assert np.all(np.diff(draws) >= 0.0)


def test_slowly_decaying_pi_law_widens_its_table():
    law = LimitLawDescriptor.pi_law(-0.01, -0.9)
    # c |X|^k is Gamma(1/k) with k = alpha + 1 and c = -2 rho / k
    k, c = 0.1, 0.2
    assert normalizer(law.rho, law.alpha, LawKind.PI) == pytest.approx(
        2.0 * math.gamma(1.0 / k) / (k * c ** (1.0 / k)), rel=1e-10
    )
    table = cdf_table(law)
    assert table.knots[-1] > 1e20
    assert table.cumulative[-1] == 1.0

    samples = law_sample(law, RngStreamSpec(11), 4000)
    assert np.all(np.isfinite(samples))
    report = ks_distance(c * np.abs(samples) ** k, stats.gamma(1.0 / k).cdf)
    assert report.statistic < 0.05


def test_limit_package_examples():
    for p, kind, variance in (
        (Params(-1.0, 1.0, 1.0), NormKind.SQRT_T, 1.0 / 3.0),
        (Params(0.5, 1.0, 1.0), NormKind.SQRT_T_LOG_T, 1.0),
        (Params(-1.0, 1.0, 0.0), NormKind.T_POW, 0.5),
    ):
        normalization, law = limit_package(classify(p), p)
        assert normalization.kind == kind
        assert law.kind == LawKind.GAUSSIAN
        assert law.variance == pytest.approx(variance)

    partial = Params(1.0, 3.0, 3.0)
    normalization, law = limit_package(classify(partial), partial)
    assert normalization.kind == NormKind.SQRT_T
    assert law.variance == 1.0

    explosive = Params(1.0, 3.0, 0.0)
    with pytest.raises(NoLimitLaw):
        limit_package(classify(explosive), explosive)


def test_blowup_profile_example():
    value = blowup_profile(Params(1.0, 3.0, 2.0), 2.0, 1.999)
    assert value == pytest.approx(2.0 / math.sqrt(0.002), rel=1e-10)
    with pytest.raises(InvalidParameters):
        blowup_profile(Params(1.0, 3.0, 3.0), 2.0, 1.5)
    with pytest.raises(InvalidParameters):
        blowup_profile(Params(1.0, 3.0, 0.0), 2.0, 2.5)


def test_blowup_profile_without_time_dependence():
    # beta = 0: |x|^-2 = 2 (tau - t) exactly for x' = x^3
    value = blowup_profile(Params(1.0, 3.0, 0.0), 1.5, 1.4)
    assert value == pytest.approx((2.0 * 0.1) ** -0.5, rel=1e-10)


def test_fit_blowup_exponent_on_exact_profile():
    tau = 1.5
    gaps = np.geomspace(1e-3, 1e-7, 60)
    path = KilledPath(tau - gaps[0], tau - gaps, gaps ** -0.5, tau)
    assert fit_blowup_exponent(path, tau, (1e-6, 1e-5)) == pytest.approx(-0.5, abs=1e-6)


@pytest.mark.parametrize(
    "rho, alpha, ell, nu", [(1.0, 0.0, 1.0, 1.0), (2.0, -1.0, 2.0, 0.5), (1.0, 0.5, 0.25, 2.0)]
)
def test_transient_rate_examples(rho, alpha, ell, nu):
    assert transient_rate(Params(rho, alpha, 0.0)) == pytest.approx((ell, nu))


def test_transient_rate_region():
    with pytest.raises(InvalidParameters):
        transient_rate(Params(-1.0, 0.0, 0.0))
    with pytest.raises(InvalidParameters):
        transient_rate(Params(1.0, 0.0, 2.0))


def test_linear_case_params_examples():
    m, sigma2 = linear_case_params(Params(1.0, 1.0, 0.0, x0=1.0))
    assert m == pytest.approx(math.exp(-1.0))
    assert sigma2 == pytest.approx(math.exp(-2.0) / 2.0, rel=1e-9)
    assert linear_case_params(Params(1.0, 1.0, 0.0))[0] == 0.0


def test_linear_case_variance_is_stable_under_tighter_quadrature():
    p = Params(1.0, 1.0, 0.5)
    _, coarse = linear_case_params(p)
    _, fine = linear_case_params(p, Quadrature(abs_tol=5e-11, rel_tol=5e-11))
    assert coarse == pytest.approx(fine, abs=1e-8)
    with pytest.raises(NonIntegrable):
        linear_case_params(Params(1.0, 1.0, 1.0))


def test_bessel_log_rate():
    assert bessel_log_rate(Params(1.0, -1.0, 0.0)) == pytest.approx(-1.0)
    with pytest.raises(InvalidParameters):
        bessel_log_rate(Params(0.25, -1.0, 0.0))
