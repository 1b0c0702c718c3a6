#pragma once

#include <complex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "homsim/biphoton.hpp"
#include "homsim/materials.hpp"

namespace homsim {

enum class Arm { One, Two };

struct ArmSample {
    Sample sample;
    Arm arm = Arm::One;
    // Subtract the air the sample replaces from its optical path.
    bool displaces_air = true;
};

struct HomCurve {
    std::vector<double> delay_um;     // one-pass path delay
    std::vector<double> probability;  // coincidence probability
    double visibility0 = 1.0;
    std::string sample_label;         // empty without a sample
    SpectrumKind spectrum_kind = SpectrumKind::Sinc2;
};

// Spectral phase accumulated in the sample on the spectrum's grid, in radians.
std::vector<double> sample_phase(const Sample& sample, const SpectralDensity& spectrum, bool displaces_air = true);

// Evaluates the coincidence probability at arbitrary delays for a fixed spectrum and sample.
class HomEvaluator {
public:
    HomEvaluator(const SpectralDensity& spectrum, const std::optional<ArmSample>& sample, double visibility0);
    // Arbitrary phase on the spectrum's grid, imposed in arm one.
    HomEvaluator(const SpectralDensity& spectrum, std::span<const double> arm_phase, double visibility0);

    double operator()(double delay_um) const;
    double visibility0() const { return visibility0_; }

private:
    std::vector<double> detuning_;
    std::vector<std::complex<double>> weights_;  // trapezoid weight * S * exp(i dphi)
    double step_ = 0.0;
    double visibility0_ = 1.0;
};

HomCurve hom_profile(const SpectralDensity& spectrum, std::span<const double> delays_um,
                     const std::optional<ArmSample>& sample, double visibility0);

std::vector<double> linspace(double start, double stop, std::size_t points);

// Width at half depth between the global minimum and the 0.5 asymptote.
double curve_fwhm(const HomCurve& curve);

double curve_visibility(const HomCurve& curve);

// Minimum of `with_sample` minus minimum of `reference`, each refined parabolically.
double dip_shift(const HomCurve& reference, const HomCurve& with_sample);

// Local maxima of the curve that rise above `level`.
std::size_t count_maxima_above(const HomCurve& curve, double level);

}  // namespace homsim
