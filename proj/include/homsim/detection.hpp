#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "homsim/interference.hpp"

namespace homsim {

// Slow multiplicative modulation of the pair rate. Off by default.
struct DriftModel {
    double relative_amplitude = 0.0;       // sinusoid amplitude
    double period_s = 60.0;
    double random_walk_per_sqrt_s = 0.0;   // relative random-walk step scale

    bool enabled() const { return relative_amplitude != 0.0 || random_walk_per_sqrt_s != 0.0; }
};

struct DetectorModel {
    double pair_rate_hz = 2.8e6;
    double efficiency_1 = 0.2;
    double efficiency_2 = 0.2;
    double dark_rate_1_hz = 100.0;
    double dark_rate_2_hz = 100.0;
    double coincidence_window_s = 1.62e-9;
    double integration_time_s = 0.1;
    DriftModel drift;

    void validate() const;
};

struct ExpectedRates {
    double singles_1_hz = 0.0;
    double singles_2_hz = 0.0;
    double true_coincidence_hz = 0.0;
    double accidental_hz = 0.0;
    double coincidence_hz = 0.0;  // true + accidental
};

struct CountRecord {
    double delay_um = 0.0;
    std::uint64_t singles_1 = 0;
    std::uint64_t singles_2 = 0;
    std::uint64_t coincidences = 0;
    std::uint64_t seed = 0;
};

// `rate_scale` multiplies the pair rate (drift hook).
ExpectedRates expected_rates(double probability, const DetectorModel& detector, double rate_scale = 1.0);

// Seed of the independent substream for point `index` under `seed`.
std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t index);

// One Poisson reading of a point with the given coincidence probability.
CountRecord draw_record(double delay_um, double probability, const DetectorModel& detector, std::uint64_t seed,
                        std::uint64_t index, double rate_scale = 1.0);

std::vector<CountRecord> simulate_counts(const HomCurve& curve, const DetectorModel& detector, std::uint64_t seed);

// Pair-rate multipliers at the given times.
std::vector<double> drift_factors(const DriftModel& drift, std::span<const double> times_s, std::uint64_t seed);

}  // namespace homsim
