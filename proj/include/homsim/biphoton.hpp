#pragma once

#include <string_view>
#include <vector>

#include "homsim/materials.hpp"
#include "homsim/units.hpp"

namespace homsim {

enum class SpectrumKind { Sinc2, Filtered, SyntheticGaussian, Synthetic };

std::string_view to_string(SpectrumKind kind);

// Degenerate biphoton spectrum on a uniform detuning grid symmetric about zero.
struct SpectralDensity {
    std::vector<double> detuning;  // rad/s from the degenerate frequency
    std::vector<double> weights;   // S(detuning), normalised so the trapezoid integral is 1
    Micrometers center;            // degenerate wavelength
    SpectrumKind kind = SpectrumKind::Sinc2;
    bool clipped = false;          // span was reduced to stay inside the material range

    std::size_t size() const { return detuning.size(); }
    double step() const { return detuning.size() > 1 ? detuning[1] - detuning[0] : 0.0; }
    double span() const { return detuning.empty() ? 0.0 : detuning.back() - detuning.front(); }
    Micrometers wavelength_at(std::size_t k) const;
};

struct CrystalSpec {
    Material material;
    Millimeters length;
    Micrometers grating_period;
    Celsius temperature;
    Micrometers pump_wavelength;

    Micrometers degenerate_wavelength() const { return Micrometers{2.0 * pump_wavelength.value}; }
};

struct BandpassFilter {
    Micrometers center;
    Nanometers fwhm;
    // 1 when only one photon of each pair passes the filter, 2 when both do.
    int passes = 1;
};

// Pump minus signal and idler wavevectors minus the grating vector, in rad/um.
double phase_mismatch(const CrystalSpec& crystal, Micrometers signal_wavelength);

// Temperature where the degenerate mismatch vanishes, searched within the material range.
Celsius qpm_temperature(const CrystalSpec& crystal);

// Oven temperature that maximises the total generated pair flux.
Celsius flux_optimal_temperature(const CrystalSpec& crystal);

SpectralDensity spdc_spectral_density(const CrystalSpec& crystal, int grid_points = 8192, double span_factor = 4.0);

SpectralDensity apply_filter(const SpectralDensity& spectrum, const BandpassFilter& filter);

// Gaussian spectrum in detuning whose wavelength FWHM is `fwhm` near the centre.
SpectralDensity gaussian_spectrum(Micrometers center, Nanometers fwhm, int grid_points = 8192,
                                  double span_factor = 8.0);

// Spectrum from arbitrary symmetric weights on a uniform grid; normalises and checks invariants.
SpectralDensity make_spectrum(std::vector<double> detuning, std::vector<double> weights, Micrometers center,
                              SpectrumKind kind);

// Main-lobe full width at half maximum, in nanometres of wavelength.
double bandwidth_fwhm(const SpectralDensity& spectrum);

// Bandwidth equivalent of a dip width, center^2 / width, in nanometres.
double coherence_bandwidth_nm(Micrometers center, double dip_fwhm_um);

double sinc(double x);

double trapezoid(const std::vector<double>& y, double step);

}  // namespace homsim
