#include "homsim/detection.hpp"

#include <cmath>
#include <random>

#include <fmt/format.h>

#include "homsim/errors.hpp"

namespace homsim {

namespace {

std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t poisson(std::mt19937_64& rng, double mean)
{
    if (!(mean > 0.0)) return 0;
    std::poisson_distribution<std::uint64_t> dist(mean);
    return dist(rng);
}

}  // namespace

void DetectorModel::validate() const
{
    const auto nonnegative = [](double v, const char* name) {
        if (!(v >= 0.0) || !std::isfinite(v)) throw ConfigError(fmt::format("detector {} must be >= 0", name));
    };
    nonnegative(pair_rate_hz, "pair_rate_hz");
    nonnegative(dark_rate_1_hz, "dark_rate_1_hz");
    nonnegative(dark_rate_2_hz, "dark_rate_2_hz");
    if (!(efficiency_1 > 0.0 && efficiency_1 <= 1.0)) throw ConfigError("detector efficiency_1 must lie in (0, 1]");
    if (!(efficiency_2 > 0.0 && efficiency_2 <= 1.0)) throw ConfigError("detector efficiency_2 must lie in (0, 1]");
    if (!(coincidence_window_s > 0.0)) throw ConfigError("detector coincidence_window_s must be > 0");
    if (!(integration_time_s > 0.0)) throw ConfigError("detector integration_time_s must be > 0");
    if (!(drift.period_s > 0.0)) throw ConfigError("drift period_s must be > 0");
}

ExpectedRates expected_rates(double probability, const DetectorModel& d, double rate_scale)
{
    if (!(probability >= 0.0 && probability <= 1.0))
        throw RangeError(fmt::format("coincidence probability {} outside [0, 1]", probability));
    const double pairs = d.pair_rate_hz * rate_scale;
    ExpectedRates r;
    r.singles_1_hz = pairs * d.efficiency_1 + d.dark_rate_1_hz;
    r.singles_2_hz = pairs * d.efficiency_2 + d.dark_rate_2_hz;
    // Probability 0.5 (distinguishable photons) gives the uncorrelated-pair asymptote.
    r.true_coincidence_hz = pairs * d.efficiency_1 * d.efficiency_2 * 2.0 * probability;
    r.accidental_hz = r.singles_1_hz * r.singles_2_hz * d.coincidence_window_s;
    r.coincidence_hz = r.true_coincidence_hz + r.accidental_hz;
    return r;
}

std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t index)
{
    return splitmix64(splitmix64(seed) ^ splitmix64(index + 0x632be59bd9b4e019ULL));
}

CountRecord draw_record(double delay_um, double probability, const DetectorModel& d, std::uint64_t seed,
                        std::uint64_t index, double rate_scale)
{
    const ExpectedRates r = expected_rates(probability, d, rate_scale);
    std::mt19937_64 rng(substream_seed(seed, index));
    CountRecord rec;
    rec.delay_um = delay_um;
    rec.singles_1 = poisson(rng, r.singles_1_hz * d.integration_time_s);
    rec.singles_2 = poisson(rng, r.singles_2_hz * d.integration_time_s);
    rec.coincidences = poisson(rng, r.coincidence_hz * d.integration_time_s);
    rec.seed = seed;
    return rec;
}

std::vector<CountRecord> simulate_counts(const HomCurve& curve, const DetectorModel& d, std::uint64_t seed)
{
    d.validate();
    std::vector<CountRecord> out;
    out.reserve(curve.delay_um.size());
    for (std::size_t k = 0; k < curve.delay_um.size(); ++k)
        out.push_back(draw_record(curve.delay_um[k], curve.probability[k], d, seed, k));
    return out;
}

std::vector<double> drift_factors(const DriftModel& drift, std::span<const double> times_s, std::uint64_t seed)
{
    std::vector<double> out(times_s.size(), 1.0);
    if (!drift.enabled()) return out;
    std::mt19937_64 rng(substream_seed(seed, 0xd21f7ULL));
    std::normal_distribution<double> normal(0.0, 1.0);
    double walk = 0.0;
    double previous = times_s.empty() ? 0.0 : times_s.front();
    for (std::size_t k = 0; k < times_s.size(); ++k) {
        const double dt = std::max(times_s[k] - previous, 0.0);
        walk += drift.random_walk_per_sqrt_s * std::sqrt(dt) * normal(rng);
        previous = times_s[k];
        const double wave = drift.relative_amplitude * std::sin(2.0 * std::numbers::pi * times_s[k] / drift.period_s);
        out[k] = std::max(0.0, 1.0 + wave + walk);
    }
    return out;
}

}  // namespace homsim
