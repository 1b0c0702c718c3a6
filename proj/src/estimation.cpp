#include "homsim/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Dense>
#include <fmt/format.h>

#include "homsim/errors.hpp"

namespace homsim {

namespace {

constexpr double kFourLn2 = 4.0 * std::numbers::ln2;

using Params = Eigen::Vector4d;

double dip_model(const Params& p, double x)
{
    const double u = (x - p[2]) / p[3];
    return p[0] * (1.0 - p[1] * std::exp(-kFourLn2 * u * u));
}

double sum_squares(const Params& p, std::span<const double> x, std::span<const double> y)
{
    double s = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) {
        const double r = y[k] - dip_model(p, x[k]);
        s += r * r;
    }
    return s;
}

Eigen::MatrixXd numeric_jacobian(const Params& p, const Params& scale, std::span<const double> x)
{
    Eigen::MatrixXd J(static_cast<Eigen::Index>(x.size()), 4);
    for (int j = 0; j < 4; ++j) {
        const double h = 1e-6 * std::max(std::abs(p[j]), scale[j]);
        Params up = p;
        Params down = p;
        up[j] += h;
        down[j] -= h;
        for (std::size_t k = 0; k < x.size(); ++k)
            J(static_cast<Eigen::Index>(k), j) = (dip_model(up, x[k]) - dip_model(down, x[k])) / (2.0 * h);
    }
    return J;
}

Params initial_guess(std::span<const double> x, std::span<const double> y)
{
    const std::size_t n = x.size();
    const double baseline = 0.25 * (y[0] + y[1] + y[n - 2] + y[n - 1]);
    const std::size_t m = static_cast<std::size_t>(std::min_element(y.begin(), y.end()) - y.begin());
    const double depth = std::clamp(1.0 - y[m] / std::max(baseline, 1e-300), 0.05, 0.999);
    const double level = 0.5 * (y[m] + baseline);
    std::size_t r = m;
    while (r + 1 < n && y[r] < level) ++r;
    std::size_t l = m;
    while (l > 0 && y[l] < level) --l;
    double width = x[r] - x[l];
    if (!(width > 0.0)) width = 0.25 * (x[n - 1] - x[0]);
    return Params{baseline, depth, x[m], width};
}

}  // namespace

double DipFit::center_sigma_um() const { return std::sqrt(std::max(covariance_diagonal[2], 0.0)); }

DipFit fit_gaussian_dip(std::span<const double> x, std::span<const double> y)
{
    const std::size_t n = x.size();
    if (n != y.size()) throw ShapeError("dip fit needs matching delay and count arrays");
    if (n < 7) throw ShapeError(fmt::format("dip fit needs at least 7 points (got {})", n));
    if (!(x[n - 1] > x[0])) throw ShapeError("dip fit needs increasing delays with nonzero span");
    const auto [lo, hi] = std::minmax_element(y.begin(), y.end());
    if (!(*hi > *lo)) throw ShapeError("dip fit needs a nonflat curve");

    Params p = initial_guess(x, y);
    const Params scale{std::abs(p[0]), 1.0, p[3], p[3]};
    double cost = sum_squares(p, x, y);
    double lambda = 1e-3;
    std::vector<double> trace{cost};

    bool converged = false;
    int iteration = 0;
    Eigen::MatrixXd J;
    for (; iteration < 200 && !converged; ++iteration) {
        J = numeric_jacobian(p, scale, x);
        Eigen::VectorXd r(static_cast<Eigen::Index>(n));
        for (std::size_t k = 0; k < n; ++k) r[static_cast<Eigen::Index>(k)] = y[k] - dip_model(p, x[k]);
        const Eigen::Matrix4d A = J.transpose() * J;
        const Eigen::Vector4d g = J.transpose() * r;
        Eigen::Matrix4d damped = A;
        damped.diagonal() += lambda * A.diagonal();
        const Params step = damped.ldlt().solve(g);
        if (!step.allFinite()) throw FitError("dip fit produced a non-finite step");

        const Params candidate = p + step;
        const double candidate_cost = sum_squares(candidate, x, y);
        const bool small = step.norm() <= 1e-9 * p.norm();
        if (candidate_cost < cost) {
            p = candidate;
            cost = candidate_cost;
            lambda = std::max(lambda * 0.1, 1e-12);
            trace.push_back(cost);
        } else {
            lambda *= 10.0;
        }
        converged = small || lambda > 1e16;
    }
    if (!converged) {
        std::string history;
        for (std::size_t k = 0; k < trace.size(); k += std::max<std::size_t>(1, trace.size() / 10))
            history += fmt::format(" {:.6g}", trace[k]);
        throw FitError(fmt::format("dip fit did not converge in {} iterations; cost trace:{}", iteration, history));
    }

    J = numeric_jacobian(p, scale, x);
    const double dof = static_cast<double>(n) - 4.0;
    const double variance = cost / dof;
    const Eigen::Matrix4d info = J.transpose() * J;
    const Eigen::Matrix4d cov = info.inverse() * variance;

    DipFit fit;
    fit.baseline_counts = p[0];
    fit.visibility = std::clamp(p[1], 0.0, 1.0);
    fit.center_um = p[2];
    fit.fwhm_um = std::abs(p[3]);
    fit.residual_norm = std::sqrt(cost / static_cast<double>(n)) / std::abs(p[0]);
    double chi2 = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const double r = y[k] - dip_model(p, x[k]);
        chi2 += r * r / std::max(y[k], 1.0);
    }
    fit.reduced_chi2 = chi2 / dof;
    for (int j = 0; j < 4; ++j) fit.covariance_diagonal[j] = cov(j, j);
    fit.iterations = iteration;
    return fit;
}

DipFit fit_gaussian_dip(std::span<const CountRecord> records)
{
    std::vector<double> x, y;
    for (const auto& r : records) {
        x.push_back(r.delay_um);
        y.push_back(static_cast<double>(r.coincidences));
    }
    return fit_gaussian_dip(x, y);
}

MinimumLocation locate_min(std::span<const double> delay_um, std::span<const double> values)
{
    return parabolic_minimum(delay_um, values, 0.0);
}

MinimumLocation locate_min(const HomCurve& curve)
{
    return parabolic_minimum(curve.delay_um, curve.probability, 1e-12);
}

MinimumLocation locate_min(std::span<const CountRecord> records)
{
    std::vector<double> x, y;
    for (const auto& r : records) {
        x.push_back(r.delay_um);
        y.push_back(static_cast<double>(r.coincidences));
    }
    return parabolic_minimum(x, y, 0.0);
}

SlopeCalibration calibrate_linear_region(std::span<const CountRecord> records, Region region,
                                         double integration_time_s)
{
    return calibrate_linear_region(records, region, integration_time_s, region.a_um);
}

SlopeCalibration calibrate_linear_region(std::span<const CountRecord> records, Region region,
                                         double integration_time_s, double anchor_delay_um)
{
    if (!(region.a_um < region.b_um)) throw CalibrationError("linear region bounds must satisfy a < b");
    std::vector<std::pair<double, double>> pts;
    for (const auto& r : records)
        if (r.delay_um >= region.a_um && r.delay_um <= region.b_um)
            pts.emplace_back(r.delay_um, static_cast<double>(r.coincidences));
    if (pts.size() < 5)
        throw CalibrationError(fmt::format("linear region holds {} points, at least 5 are needed", pts.size()));
    std::sort(pts.begin(), pts.end());

    std::vector<double> x, y;
    for (const auto& [px, py] : pts) {
        x.push_back(px);
        y.push_back(py);
    }
    const LineFit line = fit_line(x, y);

    if (pts.size() >= 6) {
        const std::size_t h = pts.size() / 2;
        const LineFit first = fit_line(std::span(x).first(h), std::span(y).first(h));
        const LineFit second = fit_line(std::span(x).subspan(h), std::span(y).subspan(h));
        const bool opposite = (first.slope < 0.0) != (second.slope < 0.0);
        const bool significant = std::abs(first.slope) > 3.0 * first.slope_stderr &&
                                 std::abs(second.slope) > 3.0 * second.slope_stderr;
        if (opposite && significant) throw CalibrationError("linear region spans the dip minimum");
    }
    if (line.slope == 0.0 || std::abs(line.slope) <= 3.0 * line.slope_stderr)
        throw CalibrationError(fmt::format("slope {} counts/um is indistinguishable from zero", line.slope));

    SlopeCalibration cal;
    cal.slope_counts_per_um = line.slope;
    cal.slope_stderr = line.slope_stderr;
    cal.anchor_delay_um = anchor_delay_um;
    cal.anchor_counts = line.intercept + line.slope * anchor_delay_um;
    cal.linear_region = region;
    cal.integration_time_s = integration_time_s;
    const double ca = line.intercept + line.slope * region.a_um;
    const double cb = line.intercept + line.slope * region.b_um;
    cal.count_min = std::min(ca, cb);
    cal.count_max = std::max(ca, cb);
    cal.margin_counts = 3.0 * std::sqrt(std::max(cal.count_max, 1.0));
    return cal;
}

double delay_from_counts(double counts, const SlopeCalibration& cal)
{
    if (counts < cal.count_min - cal.margin_counts || counts > cal.count_max + cal.margin_counts)
        throw ExtrapolationError(fmt::format("{} counts lie outside the calibrated range [{:.1f}, {:.1f}]", counts,
                                             cal.count_min, cal.count_max));
    return cal.anchor_delay_um + (counts - cal.anchor_counts) / cal.slope_counts_per_um;
}

std::string_view to_string(GroupIndexMethod method)
{
    switch (method) {
    case GroupIndexMethod::DipShift: return "dip-shift";
    case GroupIndexMethod::LinearRegion: return "linear-region";
    case GroupIndexMethod::Compensated: return "compensated";
    }
    return "unknown";
}

GroupIndexResult group_index_from_shift(double shift_um, double shift_sigma_um, const Sample& sample,
                                        bool displaces_air, double length_sigma_mm)
{
    if (!(sample.length.value > 0.0)) throw ConfigError("sample length must be positive");
    if (!(shift_sigma_um > 0.0)) throw ConfigError("shift uncertainty must be positive");
    const double length_um = to_micrometers(sample.length);
    GroupIndexResult out;
    out.sample_length_mm = sample.length.value;
    out.n_g = (displaces_air ? 1.0 : 0.0) + shift_um / length_um;
    const double from_shift = shift_sigma_um / length_um;
    const double from_length = std::abs(shift_um) / length_um * (length_sigma_mm / sample.length.value);
    out.uncertainty = std::hypot(from_shift, from_length);
    out.method = GroupIndexMethod::DipShift;
    return out;
}

ThermalIndexChange delta_ng_from_delay(double delta_x_um, const Sample& sample, double dT_C, Micrometers wavelength)
{
    if (!(sample.length.value > 0.0)) throw ConfigError("sample length must be positive");
    ThermalIndexChange out;
    out.base_group_index = group_index(sample.material, wavelength, sample.temperature);
    out.length_change_mm = thermal_expansion(sample.material, sample.length, sample.temperature, dT_C).value;
    const double length_um = to_micrometers(sample.length);
    out.delta_ng = (delta_x_um - out.base_group_index * out.length_change_mm * 1000.0) / length_um;
    out.cross_term = out.delta_ng * out.length_change_mm / sample.length.value;
    out.cross_term_negligible = std::abs(out.cross_term) < 1e-9;
    return out;
}

Precision precision_report(const SlopeCalibration& cal, double counts)
{
    if (cal.slope_counts_per_um == 0.0) throw CalibrationError("calibration slope is zero");
    Precision p;
    if (!(counts >= 1.0)) {
        counts = 1.0;
        p.count_floor_applied = true;
    }
    p.sigma_delay_um = std::sqrt(counts) / std::abs(cal.slope_counts_per_um);
    p.sigma_ng_per_cm = p.sigma_delay_um * 1e-4;
    return p;
}

}  // namespace homsim
