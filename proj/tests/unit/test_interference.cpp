#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "fixtures.hpp"
#include "homsim/errors.hpp"
#include "homsim/interference.hpp"

using namespace homsim;

TEST_SUITE("interference") {

TEST_CASE("dip without a sample is centred, symmetric and reaches the visibility floor")
{
    const auto& s = fixtures::broadband();
    const auto xs = linspace(-30.0, 30.0, 1201);
    const HomCurve c = hom_profile(s, xs, std::nullopt, 0.93);
    CHECK(*std::min_element(c.probability.begin(), c.probability.end()) == doctest::Approx(0.5 * (1.0 - 0.93)).epsilon(1e-9));
    for (std::size_t k = 0; k < xs.size(); ++k)
        CHECK(c.probability[k] == doctest::Approx(c.probability[xs.size() - 1 - k]).epsilon(1e-12));
    CHECK(c.probability.front() == doctest::Approx(0.5).epsilon(1e-3));
    // Sinc side lobes lift the maximum slightly above the asymptote.
    CHECK(curve_visibility(c) > 0.93);
    CHECK(curve_visibility(c) < 0.95);
}

TEST_CASE("broadband dip width is near 4 um and shows sinc side lobes")
{
    const auto xs = linspace(-40.0, 40.0, 4001);
    const HomCurve c = hom_profile(fixtures::broadband(), xs, std::nullopt, 1.0);
    CHECK(curve_fwhm(c) == doctest::Approx(3.9884).epsilon(1e-3));
    CHECK(count_maxima_above(c, 0.5 + 3.0 * 0.5 / std::sqrt(1000.0)) > 0);
}

TEST_CASE("Gaussian spectra give Gaussian dips without side lobes")
{
    const auto g = gaussian_spectrum(Micrometers{0.81}, Nanometers{10});
    const auto xs = linspace(-200.0, 200.0, 2001);
    const HomCurve c = hom_profile(g, xs, std::nullopt, 1.0);
    CHECK(count_maxima_above(c, 0.5 + 3.0 * 0.5 / std::sqrt(1000.0)) == 0);
    // Transform-limited Gaussian: width = 2 ln2 l^2 / (pi dl), halved by the two-photon delay.
    const double expected = 2.0 * std::log(2.0) * 0.81 * 0.81 / (std::numbers::pi * 10e-3);
    CHECK(curve_fwhm(c) == doctest::Approx(expected).epsilon(0.01));
}

TEST_CASE("even spectral phase leaves the dip unchanged")
{
    const auto& s = fixtures::broadband();
    const Sample ktp = fixtures::sample("KTP", 5.07, 22);
    const std::vector<double> phase = sample_phase(ktp, s, true);
    const std::size_t n = phase.size();
    std::vector<double> odd(n), with_even(n);
    for (std::size_t k = 0; k < n; ++k) {
        odd[k] = 0.5 * (phase[k] - phase[n - 1 - k]);
        with_even[k] = odd[k] + 1e3 * std::pow(s.detuning[k] * 1e-14, 2) + 37.0;
    }
    const HomEvaluator a(s, phase, 0.93);
    const HomEvaluator b(s, odd, 0.93);
    const HomEvaluator c(s, with_even, 0.93);
    const double center = (group_index(ktp.material, s.center, ktp.temperature) - 1.0) * 5070.0;
    double worst = 0.0;
    for (double x : linspace(center - 20.0, center + 20.0, 401)) {
        worst = std::max(worst, std::abs(a(x) - b(x)));
        worst = std::max(worst, std::abs(c(x) - b(x)));
    }
    CHECK(worst <= 1e-9);
}

TEST_CASE("a 5.07 mm KTP sample shifts the dip by its group delay")
{
    const auto& s = fixtures::broadband();
    const Sample ktp = fixtures::sample("KTP", 5.07, 22);
    const auto ref = hom_profile(s, linspace(-20.0, 20.0, 1601), std::nullopt, 0.93);
    const double predicted = (group_index(ktp.material, s.center, ktp.temperature) - 1.0) * 5070.0;
    const auto with =
        hom_profile(s, linspace(predicted - 20.0, predicted + 20.0, 1601), ArmSample{ktp, Arm::One, true}, 0.93);
    CHECK(dip_shift(ref, with) == doctest::Approx(4610.6).epsilon(1e-4));
    CHECK(with.sample_label == "KTP");

    const auto mirrored = hom_profile(s, linspace(-predicted - 20.0, -predicted + 20.0, 1601),
                                      ArmSample{ktp, Arm::Two, true}, 0.93);
    CHECK(dip_shift(ref, mirrored) == doctest::Approx(-dip_shift(ref, with)).epsilon(1e-9));
}

TEST_CASE("vacuum sample leaves the curve untouched")
{
    const auto& s = fixtures::broadband();
    const auto xs = linspace(-10.0, 10.0, 201);
    const auto ref = hom_profile(s, xs, std::nullopt, 0.9);
    const auto vac = hom_profile(s, xs, ArmSample{fixtures::sample("vacuum-test", 3.0, 25), Arm::One, true}, 0.9);
    for (std::size_t k = 0; k < xs.size(); ++k) CHECK(vac.probability[k] == doctest::Approx(ref.probability[k]));
}

TEST_CASE("probability stays within [0, 0.5 (1 + V)]")
{
    const auto& s = fixtures::broadband();
    const auto c = hom_profile(s, linspace(-60.0, 60.0, 2401), std::nullopt, 0.93);
    for (double p : c.probability) {
        CHECK(p >= 0.0);
        CHECK(p <= 0.5 * (1.0 + 0.93) + 1e-12);
    }
}

TEST_CASE("FWHM converges under grid doubling")
{
    auto crystal = fixtures::ktp_source(1.0);
    crystal.temperature = flux_optimal_temperature(crystal);
    const auto xs = linspace(-30.0, 30.0, 3001);
    const double coarse = curve_fwhm(hom_profile(spdc_spectral_density(crystal, 4096), xs, std::nullopt, 1.0));
    const double fine = curve_fwhm(hom_profile(spdc_spectral_density(crystal, 8192), xs, std::nullopt, 1.0));
    CHECK(std::abs(fine - coarse) / fine < 1e-3);
}

TEST_CASE("shape diagnostics reject degenerate curves")
{
    HomCurve flat;
    flat.delay_um = {0, 1, 2, 3};
    flat.probability = {0.5, 0.5, 0.5, 0.5};
    CHECK_THROWS_AS(curve_fwhm(flat), ShapeError);
    CHECK_THROWS_AS(HomEvaluator(fixtures::broadband(), std::nullopt, 1.5), ConfigError);

    HomCurve edge;
    edge.delay_um = {0, 1, 2, 3, 4};
    edge.probability = {0.1, 0.2, 0.3, 0.4, 0.5};
    CHECK_THROWS_AS(dip_shift(edge, edge), ShapeError);
}

TEST_CASE("linspace endpoints")
{
    const auto v = linspace(-1.0, 1.0, 5);
    CHECK(v.front() == -1.0);
    CHECK(v.back() == 1.0);
    CHECK(v[2] == 0.0);
}

}
