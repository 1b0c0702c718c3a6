#pragma once

#include "homsim/biphoton.hpp"
#include "homsim/materials.hpp"

namespace fixtures {

inline const homsim::MaterialRegistry& materials()
{
    static const homsim::MaterialRegistry registry = homsim::load_materials(homsim::default_materials_path());
    return registry;
}

inline homsim::CrystalSpec ktp_source(double length_mm)
{
    return {materials().at("KTP"), homsim::Millimeters{length_mm}, homsim::Micrometers{3.425}, homsim::Celsius{25.0},
            homsim::Micrometers{0.4054}};
}

// 1 mm KTP source at its flux-optimal temperature on the default grid.
inline const homsim::SpectralDensity& broadband()
{
    static const homsim::SpectralDensity s = [] {
        auto c = ktp_source(1.0);
        c.temperature = homsim::flux_optimal_temperature(c);
        return homsim::spdc_spectral_density(c);
    }();
    return s;
}

inline homsim::Sample sample(const char* material, double length_mm, double temperature_C)
{
    return {materials().at(material), homsim::Millimeters{length_mm}, homsim::Celsius{temperature_C}};
}

}  // namespace fixtures
