#pragma once

#include <compare>
#include <numbers>

namespace homsim {

// Speed of light in micrometres per second.
inline constexpr double kSpeedOfLight = 299792458.0e6;

template <class Tag>
struct Quantity {
    double value = 0.0;

    constexpr auto operator<=>(const Quantity&) const = default;
    constexpr Quantity operator+(Quantity o) const { return Quantity{value + o.value}; }
    constexpr Quantity operator-(Quantity o) const { return Quantity{value - o.value}; }
};

using Micrometers = Quantity<struct MicrometersTag>;
using Millimeters = Quantity<struct MillimetersTag>;
using Nanometers = Quantity<struct NanometersTag>;
using Celsius = Quantity<struct CelsiusTag>;

inline constexpr double to_micrometers(Millimeters l) { return l.value * 1000.0; }

// Angular frequency (rad/s) of light with the given vacuum wavelength.
inline constexpr double angular_frequency(Micrometers wavelength)
{
    return 2.0 * std::numbers::pi * kSpeedOfLight / wavelength.value;
}

inline constexpr Micrometers wavelength_of(double angular_frequency_rad_s)
{
    return Micrometers{2.0 * std::numbers::pi * kSpeedOfLight / angular_frequency_rad_s};
}

}  // namespace homsim
