#include "homsim/biphoton.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "homsim/errors.hpp"

namespace homsim {

namespace {

constexpr double kFwhmToSigma = 2.3548200450309493;  // 2 sqrt(2 ln 2)

std::vector<double> symmetric_grid(int points, double half_span)
{
    const double step = 2.0 * half_span / (points - 1);
    const double mid = 0.5 * (points - 1);
    std::vector<double> grid(points);
    for (int k = 0; k < points; ++k) grid[k] = (k - mid) * step;
    return grid;
}

void symmetrize(std::vector<double>& w)
{
    const std::size_t n = w.size();
    for (std::size_t k = 0; k < n / 2; ++k) {
        const double avg = 0.5 * (w[k] + w[n - 1 - k]);
        w[k] = avg;
        w[n - 1 - k] = avg;
    }
}

void normalize(SpectralDensity& s)
{
    const double area = trapezoid(s.weights, s.step());
    if (!(area > 0.0) || !std::isfinite(area)) throw EmptySpectrumError("spectrum has no weight to normalise");
    for (double& w : s.weights) w /= area;
}

// Largest detuning keeping both daughter wavelengths inside the material range.
double max_detuning(const Material& m, double omega0)
{
    const double up = angular_frequency(Micrometers{m.wavelength_um.min}) - omega0;
    const double down = omega0 - angular_frequency(Micrometers{m.wavelength_um.max});
    return 0.999 * std::min({up, down, 0.45 * omega0});
}

double spectral_weight(const CrystalSpec& c, double omega0, double detuning)
{
    const double dk = phase_mismatch(c, wavelength_of(omega0 + detuning));
    const double s = sinc(0.5 * dk * to_micrometers(c.length));
    return s * s;
}

double pair_flux(const CrystalSpec& c)
{
    const double omega0 = angular_frequency(c.degenerate_wavelength());
    const double half = max_detuning(c.material, omega0);
    constexpr int n = 4096;
    const double step = half / (n - 1);
    double sum = 0.0;
    for (int k = 0; k < n; ++k) sum += spectral_weight(c, omega0, k * step) * (k == 0 || k == n - 1 ? 0.5 : 1.0);
    return sum * step;
}

}  // namespace

std::string_view to_string(SpectrumKind kind)
{
    switch (kind) {
    case SpectrumKind::Sinc2: return "sinc2";
    case SpectrumKind::Filtered: return "filtered";
    case SpectrumKind::SyntheticGaussian: return "synthetic-gaussian";
    case SpectrumKind::Synthetic: return "synthetic";
    }
    return "unknown";
}

Micrometers SpectralDensity::wavelength_at(std::size_t k) const
{
    return wavelength_of(angular_frequency(center) + detuning.at(k));
}

double sinc(double x)
{
    if (std::abs(x) < 1e-4) return 1.0 - x * x / 6.0;
    return std::sin(x) / x;
}

double trapezoid(const std::vector<double>& y, double step)
{
    if (y.size() < 2) return 0.0;
    double sum = 0.5 * (y.front() + y.back());
    for (std::size_t k = 1; k + 1 < y.size(); ++k) sum += y[k];
    return sum * step;
}

double phase_mismatch(const CrystalSpec& c, Micrometers signal)
{
    const double lp = c.pump_wavelength.value;
    const double ls = signal.value;
    const double li = 1.0 / (1.0 / lp - 1.0 / ls);
    if (!(li > 0.0)) throw RangeError(fmt::format("signal wavelength {} um leaves no idler for pump {} um", ls, lp));
    const double np = refractive_index(c.material, c.pump_wavelength, c.temperature);
    const double ns = refractive_index(c.material, signal, c.temperature);
    const double ni = refractive_index(c.material, Micrometers{li}, c.temperature);
    constexpr double two_pi = 2.0 * std::numbers::pi;
    return two_pi * (np / lp - ns / ls - ni / li) - two_pi / c.grating_period.value;
}

Celsius qpm_temperature(const CrystalSpec& crystal)
{
    CrystalSpec c = crystal;
    const auto mismatch = [&](double T) {
        c.temperature = Celsius{T};
        return phase_mismatch(c, c.degenerate_wavelength());
    };

    const double lo_limit = c.material.temperature_C.min;
    const double hi_limit = c.material.temperature_C.max;
    constexpr int scan = 400;
    double lo = lo_limit;
    double f_lo = mismatch(lo);
    for (int k = 1; k <= scan; ++k) {
        const double hi = k == scan ? hi_limit : lo_limit + (hi_limit - lo_limit) * k / scan;
        const double f_hi = mismatch(hi);
        if (f_lo == 0.0) return Celsius{lo};
        if ((f_lo < 0.0) != (f_hi < 0.0)) {
            double a = lo;
            double b = hi;
            double fa = f_lo;
            for (int it = 0; it < 200 && b - a > 1e-11; ++it) {
                const double mid = 0.5 * (a + b);
                const double fm = mismatch(mid);
                if ((fm < 0.0) == (fa < 0.0)) {
                    a = mid;
                    fa = fm;
                } else {
                    b = mid;
                }
            }
            return Celsius{0.5 * (a + b)};
        }
        lo = hi;
        f_lo = f_hi;
    }
    throw NoBracketError(fmt::format("degenerate phase mismatch of {} does not change sign in [{}, {}] C",
                                     c.material.name, lo_limit, hi_limit));
}

Celsius flux_optimal_temperature(const CrystalSpec& crystal)
{
    CrystalSpec c = crystal;
    const double tq = qpm_temperature(c).value;
    const double reach = 20.0 / std::max(c.length.value, 0.05);
    const double lo = std::max(c.material.temperature_C.min, tq - reach);
    const double hi = std::min(c.material.temperature_C.max, tq + reach);

    const auto flux = [&](double T) {
        c.temperature = Celsius{T};
        return pair_flux(c);
    };

    constexpr int scan = 80;
    const double step = (hi - lo) / scan;
    int best = 0;
    double best_flux = -1.0;
    for (int k = 0; k <= scan; ++k) {
        const double f = flux(lo + k * step);
        if (f > best_flux) {
            best_flux = f;
            best = k;
        }
    }

    // Golden-section refinement around the best scan point.
    double a = lo + std::max(best - 1, 0) * step;
    double b = lo + std::min(best + 1, scan) * step;
    const double g = 0.5 * (std::sqrt(5.0) - 1.0);
    double x1 = b - g * (b - a);
    double x2 = a + g * (b - a);
    double f1 = flux(x1);
    double f2 = flux(x2);
    while (b - a > 1e-5) {
        if (f1 > f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - g * (b - a);
            f1 = flux(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + g * (b - a);
            f2 = flux(x2);
        }
    }
    return Celsius{0.5 * (a + b)};
}

SpectralDensity spdc_spectral_density(const CrystalSpec& crystal, int grid_points, double span_factor)
{
    if (grid_points < 1024 || grid_points % 2 != 0)
        throw ConfigError(fmt::format("grid_points must be even and at least 1024 (got {})", grid_points));
    if (!(span_factor >= 3.0)) throw ConfigError(fmt::format("span_factor must be at least 3 (got {})", span_factor));
    if (!(crystal.length.value > 0.0)) throw ConfigError("crystal length must be positive");
    if (!(crystal.grating_period.value > 0.0)) throw ConfigError("grating period must be positive");

    const Micrometers center = crystal.degenerate_wavelength();
    const double omega0 = angular_frequency(center);
    const double limit = max_detuning(crystal.material, omega0);

    // Coarse scan of the positive half to estimate the main-lobe width.
    constexpr int coarse = 4096;
    std::vector<double> probe(coarse);
    for (int k = 0; k < coarse; ++k) probe[k] = spectral_weight(crystal, omega0, limit * k / (coarse - 1));
    const auto peak = std::max_element(probe.begin(), probe.end());
    const double half = 0.5 * *peak;
    auto edge = std::find_if(peak, probe.end(), [&](double w) { return w < half; });
    if (edge == probe.end() || *peak <= 0.0)
        throw ShapeError(fmt::format("sinc^2 spectrum of {} has no half-maximum crossing within the material range",
                                     crystal.material.name));
    const double edge_detuning = limit * static_cast<double>(edge - probe.begin()) / (coarse - 1);

    SpectralDensity s;
    s.center = center;
    s.kind = SpectrumKind::Sinc2;
    double half_span = 0.5 * span_factor * (2.0 * edge_detuning);
    if (half_span > limit) {
        half_span = limit;
        s.clipped = true;
    }
    s.detuning = symmetric_grid(grid_points, half_span);
    s.weights.resize(grid_points);
    for (int k = 0; k < grid_points; ++k) s.weights[k] = spectral_weight(crystal, omega0, s.detuning[k]);
    symmetrize(s.weights);
    normalize(s);
    return s;
}

SpectralDensity apply_filter(const SpectralDensity& spectrum, const BandpassFilter& filter)
{
    if (!(filter.fwhm.value > 0.0)) throw ConfigError("filter fwhm must be positive");
    if (filter.passes != 1 && filter.passes != 2) throw ConfigError("filter passes must be 1 or 2");

    const double omega0 = angular_frequency(spectrum.center);
    const double offset = angular_frequency(filter.center) - omega0;
    const double width = 2.0 * std::numbers::pi * kSpeedOfLight * (filter.fwhm.value * 1e-3) /
                         (filter.center.value * filter.center.value);
    const auto transmission = [&](double detuning) {
        const double u = (detuning - offset) / width;
        return std::exp(-4.0 * std::numbers::ln2 * u * u);
    };

    SpectralDensity out = spectrum;
    out.kind = SpectrumKind::Filtered;
    double peak = 0.0;
    for (std::size_t k = 0; k < out.size(); ++k) {
        double t = transmission(out.detuning[k]);
        if (filter.passes == 2) t *= transmission(-out.detuning[k]);
        out.weights[k] *= t;
        peak = std::max(peak, out.weights[k]);
    }
    if (!(peak > 0.0)) throw EmptySpectrumError("filter transmits nothing on the spectrum grid");
    if (offset < spectrum.detuning.front() || offset > spectrum.detuning.back())
        throw RangeError(fmt::format("filter centre {} um lies outside the spectrum grid", filter.center.value));
    if (offset == 0.0) symmetrize(out.weights);
    normalize(out);
    return out;
}

SpectralDensity gaussian_spectrum(Micrometers center, Nanometers fwhm, int grid_points, double span_factor)
{
    if (!(fwhm.value > 0.0)) throw ConfigError("gaussian fwhm must be positive");
    if (grid_points < 16 || grid_points % 2 != 0) throw ConfigError("grid_points must be even");
    const double width =
        2.0 * std::numbers::pi * kSpeedOfLight * (fwhm.value * 1e-3) / (center.value * center.value);
    const double sigma = width / kFwhmToSigma;
    SpectralDensity s;
    s.center = center;
    s.kind = SpectrumKind::SyntheticGaussian;
    s.detuning = symmetric_grid(grid_points, 0.5 * span_factor * width);
    s.weights.resize(grid_points);
    for (int k = 0; k < grid_points; ++k) {
        const double u = s.detuning[k] / sigma;
        s.weights[k] = std::exp(-0.5 * u * u);
    }
    symmetrize(s.weights);
    normalize(s);
    return s;
}

SpectralDensity make_spectrum(std::vector<double> detuning, std::vector<double> weights, Micrometers center,
                              SpectrumKind kind)
{
    const std::size_t n = detuning.size();
    if (n < 4 || weights.size() != n) throw ShapeError("spectrum needs matching grids of at least four points");
    const double step = detuning[1] - detuning[0];
    if (!(step > 0.0)) throw ShapeError("spectrum grid must increase");
    for (std::size_t k = 0; k < n; ++k) {
        if (std::abs(detuning[k] + detuning[n - 1 - k]) > 1e-9 * step)
            throw ShapeError("spectrum grid must be symmetric about zero");
        if (k > 0 && std::abs(detuning[k] - detuning[k - 1] - step) > 1e-6 * step)
            throw ShapeError("spectrum grid must be uniform");
        if (!(weights[k] >= 0.0) || !std::isfinite(weights[k]))
            throw ShapeError("spectral weights must be finite and nonnegative");
    }
    SpectralDensity s;
    s.detuning = std::move(detuning);
    s.weights = std::move(weights);
    s.center = center;
    s.kind = kind;
    normalize(s);
    return s;
}

double bandwidth_fwhm(const SpectralDensity& s)
{
    const auto& w = s.weights;
    if (w.size() < 3) throw ShapeError("spectrum too short for a width");
    const std::size_t peak = static_cast<std::size_t>(std::max_element(w.begin(), w.end()) - w.begin());
    const double half = 0.5 * w[peak];

    std::size_t right = peak;
    while (right + 1 < w.size() && w[right + 1] >= half) ++right;
    std::size_t left = peak;
    while (left > 0 && w[left - 1] >= half) --left;
    if (right + 1 >= w.size() || left == 0)
        throw ShapeError("spectrum has no half-maximum crossing inside the grid");

    const auto cross = [&](std::size_t inside, std::size_t outside) {
        const double f = (w[inside] - half) / (w[inside] - w[outside]);
        return s.detuning[inside] + f * (s.detuning[outside] - s.detuning[inside]);
    };
    const double omega0 = angular_frequency(s.center);
    const double low = cross(left, left - 1);
    const double high = cross(right, right + 1);
    return (wavelength_of(omega0 + low).value - wavelength_of(omega0 + high).value) * 1e3;
}

double coherence_bandwidth_nm(Micrometers center, double dip_fwhm_um)
{
    if (!(dip_fwhm_um > 0.0)) throw ShapeError("dip width must be positive");
    return center.value * center.value / dip_fwhm_um * 1e3;
}

}  // namespace homsim
