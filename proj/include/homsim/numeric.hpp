#pragma once

#include <span>

namespace homsim {

struct MinimumLocation {
    double position = 0.0;
    double value = 0.0;
    bool ambiguous = false;  // another, non-adjacent sample ties with the minimum
};

// Vertex of the parabola through the lowest sample and its two neighbours.
// Ties go to the smallest position and are flagged.
MinimumLocation parabolic_minimum(std::span<const double> x, std::span<const double> y, double tie_tolerance = 0.0);

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double slope_stderr = 0.0;
    double residual_sigma = 0.0;
};

LineFit fit_line(std::span<const double> x, std::span<const double> y);

}  // namespace homsim
