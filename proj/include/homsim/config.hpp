#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "homsim/detection.hpp"
#include "homsim/interference.hpp"
#include "homsim/protocol.hpp"

namespace homsim {

inline constexpr int kSchemaVersion = 1;

enum class Command { Spectrum, Dip, Measure, Sweep };
enum class SweepKind { Calibration, Stability, Linear, Compensated };

std::string_view to_string(Command command);
std::string_view to_string(SweepKind kind);

struct SourceTemperature {
    enum class Mode { FluxMax, Qpm, Fixed };
    Mode mode = Mode::FluxMax;
    double value_C = 25.0;  // used when mode is Fixed
};

struct SourceConfig {
    std::string material = "KTP";
    double length_mm = 1.0;
    double grating_period_um = 3.425;
    double pump_wavelength_um = 0.4054;
    SourceTemperature temperature;
};

struct GridConfig {
    int points = 8192;
    double span_factor = 4.0;
};

struct FilterConfig {
    double center_um = 0.8108;
    double fwhm_nm = 10.0;
    int passes = 1;
};

struct SampleConfig {
    std::string label;
    std::string material;
    double length_mm = 0.0;
    double temperature_C = 22.0;
    Arm arm = Arm::One;
    bool displaces_air = true;
};

struct DipCase {
    std::string label;
    std::optional<double> source_length_mm;  // overrides source.length_mm
    std::optional<FilterConfig> filter;
    double half_window_um = 0.0;              // 0 picks a window from the spectrum width
    int points = 2001;
};

struct DipConfig {
    std::vector<DipCase> cases;
    std::optional<SampleConfig> sample;
};

struct SpectrumConfig {
    std::vector<double> lengths_mm;
};

struct MeasureConfig {
    std::vector<SampleConfig> samples;
    std::map<std::string, double> alternate_lengths_mm;  // label -> length
    bool use_alternate_lengths = false;
    double reference_half_width_um = 8.0;
    double coarse_half_width_um = 30.0;
    double coarse_step_um = 1.0;
    double fine_half_width_um = 8.0;
    double fine_step_um = 0.25;
    double theory_wavelength_um = 0.810;
    int runs = 1;
};

struct SweepConfig {
    SweepKind kind = SweepKind::Calibration;
    SampleConfig sample{"", "KTP", 30.12, 26.0, Arm::One, false};
    FlankSettings flank;
    SweepSettings settings;
    double oven_resolution_C = 0.1;
    double oven_jitter_C = 0.0;
    double travel_before_um = 100.0;
    double travel_after_um = 400.0;
};

struct RunConfig {
    int schema_version = kSchemaVersion;
    Command command = Command::Spectrum;
    std::filesystem::path materials_path;
    std::uint64_t seed = 1;
    std::filesystem::path output_dir = "out";
    SourceConfig source;
    GridConfig grid;
    DetectorModel detector;
    double visibility = 0.93;
    SpectrumConfig spectrum;
    DipConfig dip;
    MeasureConfig measure;
    SweepConfig sweep;
    std::string text;  // source text, hashed into summaries
};

RunConfig parse_run_config(std::string_view text, const std::string& origin = "<memory>");
RunConfig load_run_config(const std::filesystem::path& path);

std::filesystem::path preset_path(std::string_view name);
std::vector<std::string> preset_names();

// 64-bit FNV-1a of the config text and effective seed, as 16 hex digits.
std::string config_hash(const RunConfig& config);

}  // namespace homsim
