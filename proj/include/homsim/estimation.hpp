#pragma once

#include <array>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "homsim/detection.hpp"
#include "homsim/materials.hpp"
#include "homsim/numeric.hpp"

namespace homsim {

struct DipFit {
    double center_um = 0.0;
    double fwhm_um = 0.0;
    double visibility = 0.0;
    double baseline_counts = 0.0;
    // RMS residual relative to the baseline.
    double residual_norm = 0.0;
    // Sum of squared residuals over the Poisson variance, per degree of freedom.
    double reduced_chi2 = 0.0;
    // Variances of (baseline, visibility, center, fwhm).
    std::array<double, 4> covariance_diagonal{};
    int iterations = 0;

    double center_sigma_um() const;
};

// Inverted Gaussian fit: B (1 - V exp(-4 ln2 (x - x0)^2 / w^2)).
DipFit fit_gaussian_dip(std::span<const CountRecord> records);
DipFit fit_gaussian_dip(std::span<const double> delay_um, std::span<const double> counts);

MinimumLocation locate_min(std::span<const double> delay_um, std::span<const double> values);
MinimumLocation locate_min(const HomCurve& curve);
MinimumLocation locate_min(std::span<const CountRecord> records);

struct Region {
    double a_um = 0.0;
    double b_um = 0.0;
};

struct SlopeCalibration {
    double slope_counts_per_um = 0.0;
    double anchor_delay_um = 0.0;
    double anchor_counts = 0.0;
    Region linear_region;
    double integration_time_s = 0.0;
    // Readings outside [count_min - margin, count_max + margin] are extrapolations.
    double count_min = 0.0;
    double count_max = 0.0;
    double margin_counts = 0.0;
    double slope_stderr = 0.0;
};

// Least-squares line through the records inside `region`. The anchor defaults to region.a.
SlopeCalibration calibrate_linear_region(std::span<const CountRecord> records, Region region,
                                         double integration_time_s);
SlopeCalibration calibrate_linear_region(std::span<const CountRecord> records, Region region,
                                         double integration_time_s, double anchor_delay_um);

double delay_from_counts(double counts, const SlopeCalibration& cal);

enum class GroupIndexMethod { DipShift, LinearRegion, Compensated };

std::string_view to_string(GroupIndexMethod method);

struct GroupIndexResult {
    double n_g = 0.0;
    double uncertainty = 0.0;
    double sample_length_mm = 0.0;
    GroupIndexMethod method = GroupIndexMethod::DipShift;
};

GroupIndexResult group_index_from_shift(double shift_um, double shift_sigma_um, const Sample& sample,
                                        bool displaces_air = true, double length_sigma_mm = 0.0);

struct ThermalIndexChange {
    double delta_ng = 0.0;
    double base_group_index = 0.0;
    double length_change_mm = 0.0;
    // Neglected second-order term delta_ng * dL / L.
    double cross_term = 0.0;
    bool cross_term_negligible = true;
};

// Group-index change of a sample heated by dT from its current temperature, from the delay change.
ThermalIndexChange delta_ng_from_delay(double delta_x_um, const Sample& sample, double dT_C,
                                       Micrometers wavelength = Micrometers{0.8108});

struct Precision {
    double sigma_delay_um = 0.0;
    double sigma_ng_per_cm = 0.0;
    bool count_floor_applied = false;
};

Precision precision_report(const SlopeCalibration& cal, double counts);

}  // namespace homsim
