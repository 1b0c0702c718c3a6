#include "homsim/interference.hpp"

#include <algorithm>
#include <cmath>

#include "homsim/errors.hpp"
#include "homsim/numeric.hpp"

namespace homsim {

namespace {

constexpr std::size_t kReseedInterval = 256;

}  // namespace

std::vector<double> sample_phase(const Sample& sample, const SpectralDensity& spectrum, bool displaces_air)
{
    const double omega0 = angular_frequency(spectrum.center);
    const double length_um = to_micrometers(sample.length);
    const double air = displaces_air ? 1.0 : 0.0;
    std::vector<double> phase(spectrum.size());
    for (std::size_t k = 0; k < spectrum.size(); ++k) {
        const double omega = omega0 + spectrum.detuning[k];
        const double n = refractive_index(sample.material, wavelength_of(omega), sample.temperature);
        phase[k] = (n - air) * omega * length_um / kSpeedOfLight;
    }
    return phase;
}

namespace {

std::vector<double> arm_phase_of(const SpectralDensity& spectrum, const std::optional<ArmSample>& sample)
{
    if (!sample) return {};
    std::vector<double> phase = sample_phase(sample->sample, spectrum, sample->displaces_air);
    if (sample->arm == Arm::Two)
        for (double& p : phase) p = -p;
    return phase;
}

}  // namespace

HomEvaluator::HomEvaluator(const SpectralDensity& spectrum, const std::optional<ArmSample>& sample,
                           double visibility0)
    : HomEvaluator(spectrum, arm_phase_of(spectrum, sample), visibility0)
{
}

HomEvaluator::HomEvaluator(const SpectralDensity& spectrum, std::span<const double> arm_phase, double visibility0)
    : detuning_(spectrum.detuning), step_(spectrum.step()), visibility0_(visibility0)
{
    if (!(visibility0 > 0.0 && visibility0 <= 1.0)) throw ConfigError("visibility0 must lie in (0, 1]");
    const std::size_t n = spectrum.size();
    if (n < 2) throw ShapeError("spectrum is empty");
    if (!arm_phase.empty() && arm_phase.size() != n) throw ShapeError("phase and spectrum grids differ in size");

    weights_.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
        const double trap = (k == 0 || k + 1 == n) ? 0.5 * step_ : step_;
        const double dphi = arm_phase.empty() ? 0.0 : arm_phase[k] - arm_phase[n - 1 - k];
        weights_[k] = std::polar(trap * spectrum.weights[k], dphi);
    }
}

double HomEvaluator::operator()(double delay_um) const
{
    const double rate = -2.0 * delay_um / kSpeedOfLight;
    const std::complex<double> advance = std::polar(1.0, rate * step_);
    std::complex<double> carrier;
    std::complex<double> sum{0.0, 0.0};
    for (std::size_t k = 0; k < weights_.size(); ++k) {
        if (k % kReseedInterval == 0)
            carrier = std::polar(1.0, rate * detuning_[k]);
        else
            carrier *= advance;
        sum += weights_[k] * carrier;
    }
    return 0.5 * (1.0 - visibility0_ * sum.real());
}

HomCurve hom_profile(const SpectralDensity& spectrum, std::span<const double> delays_um,
                     const std::optional<ArmSample>& sample, double visibility0)
{
    const HomEvaluator eval(spectrum, sample, visibility0);
    HomCurve curve;
    curve.delay_um.assign(delays_um.begin(), delays_um.end());
    curve.probability.reserve(delays_um.size());
    for (double x : delays_um) curve.probability.push_back(eval(x));
    curve.visibility0 = visibility0;
    curve.spectrum_kind = spectrum.kind;
    if (sample) curve.sample_label = sample->sample.material.name;
    return curve;
}

std::vector<double> linspace(double start, double stop, std::size_t points)
{
    std::vector<double> out(points);
    if (points == 1) {
        out[0] = start;
        return out;
    }
    for (std::size_t k = 0; k < points; ++k) out[k] = start + (stop - start) * k / (points - 1);
    return out;
}

double curve_fwhm(const HomCurve& curve)
{
    const auto& y = curve.probability;
    const auto& x = curve.delay_um;
    if (y.size() < 3 || x.size() != y.size()) throw ShapeError("curve too short for a width");
    const std::size_t m = static_cast<std::size_t>(std::min_element(y.begin(), y.end()) - y.begin());
    const double level = 0.5 * (y[m] + 0.5);
    if (!(y[m] < level)) throw ShapeError("curve has no dip below the asymptote");

    std::size_t right = m;
    while (right < y.size() && y[right] < level) ++right;
    std::size_t left = m;
    while (left > 0 && y[left] < level) --left;
    if (right == y.size() || y[left] < level) throw ShapeError("curve has no half-depth crossing inside the scan");

    const auto cross = [&](std::size_t inside, std::size_t outside) {
        const double f = (level - y[inside]) / (y[outside] - y[inside]);
        return x[inside] + f * (x[outside] - x[inside]);
    };
    return cross(right - 1, right) - cross(left + 1, left);
}

double curve_visibility(const HomCurve& curve)
{
    if (curve.probability.empty()) throw ShapeError("curve is empty");
    const auto [lo, hi] = std::minmax_element(curve.probability.begin(), curve.probability.end());
    if (!(*hi > 0.0)) throw ShapeError("degenerate curve: maximum is zero");
    return (*hi - *lo) / *hi;
}

double dip_shift(const HomCurve& reference, const HomCurve& with_sample)
{
    const auto locate = [](const HomCurve& c) {
        const auto loc = parabolic_minimum(c.delay_um, c.probability, 1e-12);
        if (loc.ambiguous) throw ShapeError("curve has no unique minimum");
        return loc.position;
    };
    return locate(with_sample) - locate(reference);
}

std::size_t count_maxima_above(const HomCurve& curve, double level)
{
    const auto& y = curve.probability;
    std::size_t count = 0;
    for (std::size_t k = 1; k + 1 < y.size(); ++k)
        if (y[k] > y[k - 1] && y[k] >= y[k + 1] && y[k] > level) ++count;
    return count;
}

}  // namespace homsim
