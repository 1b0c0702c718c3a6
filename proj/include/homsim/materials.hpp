#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "homsim/units.hpp"

namespace homsim {

// Reference temperature of the thermo-optic and thermal-expansion polynomials.
inline constexpr Celsius kReferenceTemperature{25.0};

struct SellmeierTerm {
    double strength = 0.0;  // dimensionless
    double pole_um2 = 0.0;  // resonance wavelength squared
};

// n^2 = constant + sum strength * l^2 / (l^2 - pole) - ir_correction * l^2
struct SellmeierCoefficients {
    double constant = 1.0;
    std::vector<SellmeierTerm> terms;
    double ir_correction = 0.0;
};

// Temperature-parametrised form used for the lithium tantalate/niobate families:
// n^2 = a1 + b1 f + (a2 + b2 f) / (l^2 - (a3 + b3 f)^2) + (a4 + b4 f) / (l^2 - a5^2) - a6 l^2
// with f = (T - 24.5)(T + 570.82).
struct TemperatureSellmeierCoefficients {
    double a[6] = {};
    double b[4] = {};
};

using DispersionCoefficients = std::variant<SellmeierCoefficients, TemperatureSellmeierCoefficients>;

struct Interval {
    double min = 0.0;
    double max = 0.0;

    bool contains(double x) const { return x >= min && x <= max; }
};

struct Material {
    std::string name;
    DispersionCoefficients dispersion;
    // thermo_optic[k][m] multiplies (T - 25)^(k+1) / l^m.
    std::vector<std::vector<double>> thermo_optic;
    // Linear, quadratic, ... expansion coefficients about 25 C.
    std::vector<double> expansion;
    Interval wavelength_um;
    Interval temperature_C;
    std::string source;
};

struct Sample {
    Material material;
    Millimeters length;   // physical length at `temperature`
    Celsius temperature;
};

void check_wavelength(const Material& material, Micrometers wavelength);
void check_temperature(const Material& material, Celsius temperature);
void check_range(const Material& material, Micrometers wavelength, Celsius temperature);

double refractive_index(const Material& material, Micrometers wavelength, Celsius temperature);

// dn/dl in 1/um, analytic.
double index_slope(const Material& material, Micrometers wavelength, Celsius temperature);

double group_index(const Material& material, Micrometers wavelength, Celsius temperature);

// Central-difference variant of group_index, used to cross-check the analytic path.
double group_index_numeric(const Material& material, Micrometers wavelength, Celsius temperature,
                           double step_um = 1e-4);

// Length change of a body of `length` (measured at T0) when heated from T0 to T0 + dT.
Millimeters thermal_expansion(const Material& material, Millimeters length, Celsius T0, double dT_C);

// The sample after its temperature is changed to `temperature`, length expanded accordingly.
Sample at_temperature(const Sample& sample, Celsius temperature);

class MaterialRegistry {
public:
    void add(Material material);
    const Material& at(std::string_view name) const;
    bool contains(std::string_view name) const;
    std::size_t size() const { return materials_.size(); }
    std::vector<std::string> names() const;

private:
    std::map<std::string, Material, std::less<>> materials_;
};

MaterialRegistry parse_materials(std::string_view text, const std::string& origin = "<memory>");
MaterialRegistry load_materials(const std::filesystem::path& path);

// Path of the material file shipped with the library.
std::filesystem::path default_materials_path();
std::filesystem::path data_directory();

}  // namespace homsim
