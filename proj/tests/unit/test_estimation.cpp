#include <doctest.h>

#include <cmath>
#include <random>

#include "fixtures.hpp"
#include "homsim/errors.hpp"
#include "homsim/estimation.hpp"

using namespace homsim;

namespace {

double gaussian_dip(double x, double B, double V, double x0, double w)
{
    const double u = (x - x0) / w;
    return B * (1.0 - V * std::exp(-4.0 * std::log(2.0) * u * u));
}

std::vector<CountRecord> line_records(double slope, double intercept, double from, double to, double step)
{
    std::vector<CountRecord> out;
    for (double x = from; x <= to + 1e-9; x += step) {
        CountRecord r;
        r.delay_um = x;
        r.coincidences = static_cast<std::uint64_t>(std::llround(intercept + slope * x));
        out.push_back(r);
    }
    return out;
}

}  // namespace

TEST_SUITE("estimation") {

TEST_CASE("Gaussian dip fit recovers exact parameters")
{
    std::vector<double> x, y;
    for (double v = -30.0; v <= 30.0; v += 0.5) {
        x.push_back(v);
        y.push_back(gaussian_dip(v, 1000.0, 0.9, 2.3, 12.0));
    }
    const DipFit f = fit_gaussian_dip(x, y);
    CHECK(f.baseline_counts == doctest::Approx(1000.0).epsilon(1e-7));
    CHECK(f.visibility == doctest::Approx(0.9).epsilon(1e-7));
    CHECK(f.center_um == doctest::Approx(2.3).epsilon(1e-7));
    CHECK(f.fwhm_um == doctest::Approx(12.0).epsilon(1e-7));
    CHECK(f.residual_norm < 1e-8);
}

TEST_CASE("Gaussian dip fit on Poisson data is consistent with its covariance")
{
    std::mt19937_64 rng(3);
    int inside = 0;
    const int trials = 40;
    for (int t = 0; t < trials; ++t) {
        std::vector<double> x, y;
        for (double v = -20.0; v <= 20.0; v += 0.5) {
            x.push_back(v);
            std::poisson_distribution<int> p(gaussian_dip(v, 2000.0, 0.9, -1.0, 8.0));
            y.push_back(p(rng));
        }
        const DipFit f = fit_gaussian_dip(x, y);
        CHECK(f.reduced_chi2 == doctest::Approx(1.0).epsilon(0.6));
        if (std::abs(f.center_um + 1.0) < 2.0 * f.center_sigma_um()) ++inside;
    }
    CHECK(inside >= 32);
}

TEST_CASE("dip fit input validation")
{
    std::vector<double> x{0, 1, 2, 3, 4, 5}, y{1, 1, 0, 1, 1, 1};
    CHECK_THROWS_AS(fit_gaussian_dip(x, y), ShapeError);
    std::vector<double> xf{0, 1, 2, 3, 4, 5, 6, 7}, flat(8, 3.0);
    CHECK_THROWS_AS(fit_gaussian_dip(xf, flat), ShapeError);
}

TEST_CASE("parabolic minimum is exact for a parabola")
{
    std::vector<double> x, y;
    for (double v = -5.0; v <= 5.0; v += 1.0) {
        x.push_back(v);
        y.push_back(3.0 * (v - 0.37) * (v - 0.37) + 2.0);
    }
    const auto m = locate_min(x, y);
    CHECK(m.position == doctest::Approx(0.37).epsilon(1e-12));
    CHECK(m.value == doctest::Approx(2.0).epsilon(1e-12));
    CHECK_FALSE(m.ambiguous);
}

TEST_CASE("ties between separated minima are flagged")
{
    std::vector<double> x{0, 1, 2, 3, 4, 5, 6}, y{5, 1, 5, 6, 5, 1, 5};
    CHECK(locate_min(x, y).ambiguous);
}

TEST_CASE("line fit")
{
    std::vector<double> x{0, 1, 2, 3, 4}, y{1, 3, 5, 7, 9};
    const LineFit f = fit_line(x, y);
    CHECK(f.slope == doctest::Approx(2.0));
    CHECK(f.intercept == doctest::Approx(1.0));
    CHECK(f.slope_stderr == doctest::Approx(0.0));
}

TEST_CASE("slope calibration inverts a linear flank")
{
    const auto records = line_records(-300.0, 5000.0, 1.0, 5.0, 0.1);
    const SlopeCalibration cal = calibrate_linear_region(records, {1.0, 4.5}, 0.05);
    CHECK(cal.slope_counts_per_um == doctest::Approx(-300.0).epsilon(1e-3));
    CHECK(cal.anchor_delay_um == 1.0);
    CHECK(cal.anchor_counts == doctest::Approx(4700.0).epsilon(1e-3));
    CHECK(delay_from_counts(4100.0, cal) == doctest::Approx(3.0).epsilon(1e-3));
    for (double x : {1.0, 2.2, 4.5})
        CHECK(delay_from_counts(5000.0 - 300.0 * x, cal) == doctest::Approx(x).epsilon(1e-3));
    CHECK_THROWS_AS(delay_from_counts(6000.0, cal), ExtrapolationError);
    CHECK_THROWS_AS(delay_from_counts(2000.0, cal), ExtrapolationError);

    const SlopeCalibration anchored = calibrate_linear_region(records, {1.0, 4.5}, 0.05, 2.0);
    CHECK(anchored.anchor_counts == doctest::Approx(4400.0).epsilon(1e-3));
}

TEST_CASE("calibration rejects bad regions")
{
    std::vector<CountRecord> v;
    for (double x = -3.0; x <= 3.0 + 1e-9; x += 0.25) {
        CountRecord r;
        r.delay_um = x;
        r.coincidences = static_cast<std::uint64_t>(1000.0 + 200.0 * std::abs(x));
        v.push_back(r);
    }
    CHECK_THROWS_AS(calibrate_linear_region(v, {-3.0, 3.0}, 0.1), CalibrationError);
    CHECK_THROWS_AS(calibrate_linear_region(v, {0.1, 0.6}, 0.1), CalibrationError);
    CHECK_THROWS_AS(calibrate_linear_region(v, {2.0, 1.0}, 0.1), CalibrationError);
    CHECK_THROWS_AS(calibrate_linear_region(line_records(0.0, 500.0, 0.0, 3.0, 0.1), {0.0, 3.0}, 0.1),
                    CalibrationError);
}

TEST_CASE("group index from the dip shift")
{
    const Sample vac = fixtures::sample("vacuum-test", 5.0, 25);
    CHECK(group_index_from_shift(0.0, 0.01, vac).n_g == 1.0);

    const Sample ktp = fixtures::sample("KTP", 5.07, 22);
    const auto g = group_index_from_shift(4610.0, 0.05, ktp);
    CHECK(g.n_g == doctest::Approx(1.0 + 4610.0 / 5070.0));
    CHECK(g.uncertainty == doctest::Approx(0.05 / 5070.0));
    CHECK(group_index_from_shift(4610.0, 0.05, ktp, false).n_g == doctest::Approx(4610.0 / 5070.0));
    CHECK_THROWS_AS(group_index_from_shift(1.0, 0.0, ktp), ConfigError);
    CHECK_THROWS_AS(group_index_from_shift(1.0, 0.1, fixtures::sample("KTP", 0.0, 22)), ConfigError);
}

TEST_CASE("thermal index change matches the oracle")
{
    const Sample ktp = fixtures::sample("KTP", 30.12, 26);
    const auto r = delta_ng_from_delay(1.1230044330744, ktp, 1.0);
    CHECK(r.delta_ng == doctest::Approx(2.44286662486314e-5).epsilon(1e-9));
    CHECK(std::abs(r.delta_ng - 2.44285017726328e-5) < 1e-9);
    CHECK(r.length_change_mm == doctest::Approx(0.000202796599032024).epsilon(1e-9));
    CHECK(r.cross_term_negligible);
}

TEST_CASE("thermal index change is linear in the delay with slope 1/L")
{
    const Sample ktp = fixtures::sample("KTP", 30.12, 26);
    const double a = delta_ng_from_delay(0.5, ktp, 0.3).delta_ng;
    const double b = delta_ng_from_delay(1.5, ktp, 0.3).delta_ng;
    CHECK((b - a) / 1.0 == doctest::Approx(1.0 / 30120.0).epsilon(1e-12));
    CHECK_FALSE(delta_ng_from_delay(216.0, fixtures::sample("KTP", 30.12, 25), 175.0).cross_term_negligible);
}

TEST_CASE("precision follows counting statistics")
{
    SlopeCalibration cal;
    cal.slope_counts_per_um = -2000.0;
    const Precision p = precision_report(cal, 2500.0);
    CHECK(p.sigma_delay_um == doctest::Approx(0.025));
    CHECK(p.sigma_ng_per_cm == doctest::Approx(2.5e-6));
    CHECK_FALSE(p.count_floor_applied);
    CHECK(precision_report(cal, 0.0).count_floor_applied);
    cal.slope_counts_per_um = 0.0;
    CHECK_THROWS_AS(precision_report(cal, 100.0), CalibrationError);
}

}
