#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "homsim/biphoton.hpp"
#include "homsim/detection.hpp"
#include "homsim/estimation.hpp"
#include "homsim/interference.hpp"

namespace homsim {

struct InstrumentSetup {
    SpectralDensity spectrum;
    Sample sample;  // the heated sample at the run's start temperature
    Arm arm = Arm::One;
    bool displaces_air = false;
    DetectorModel detector;
    double visibility0 = 0.93;
    double oven_resolution_C = 0.1;
    double oven_jitter_C = 0.0;     // uniform +/- jitter of the actual temperature
    double travel_before_um = 100.0;  // stage travel behind the predicted dip
    double travel_after_um = 400.0;   // stage travel ahead of it, along the heating direction
    std::uint64_t seed = 1;
};

// Simulated HOM interferometer with a heated sample, a delay stage and a counter.
class Instrument {
public:
    explicit Instrument(InstrumentSetup setup);

    void set_temperature(Celsius target);
    Celsius temperature() const { return setpoint_; }
    Celsius actual_temperature() const { return actual_; }

    void move_stage_to(double position_um);
    double stage() const { return stage_um_; }

    // One integration at the current state; `rate_scale` multiplies the pair rate.
    CountRecord read(double rate_scale = 1.0);
    double probability() const;

    // Dip position predicted from the sample's group index, in stage coordinates.
    double predicted_dip_um() const;
    // +1 when heating moves the dip towards larger stage positions.
    int heating_direction() const { return setup_.arm == Arm::One ? 1 : -1; }

    std::uint64_t cursor() const { return cursor_; }
    const InstrumentSetup& setup() const { return setup_; }
    Sample current_sample() const;
    std::string state_dump() const;

private:
    void rebuild();

    InstrumentSetup setup_;
    Celsius setpoint_;
    Celsius actual_;
    double stage_um_ = 0.0;
    double travel_min_um_ = 0.0;
    double travel_max_um_ = 0.0;
    std::uint64_t cursor_ = 0;
    std::uint64_t last_counts_ = 0;
    std::optional<HomEvaluator> evaluator_;
};

struct FlankSettings {
    double start_offset_um = 1.0;  // operating point, relative delay from the dip minimum
    double end_offset_um = 4.5;    // far end of the calibrated linear region
    double step_um = 0.05;
    double search_half_width_um = 15.0;
    double search_step_um = 0.5;
};

struct OperatingPoint {
    double dip_center_um = 0.0;
    double stage_um = 0.0;
    int direction = 1;
    SlopeCalibration calibration;
    std::vector<CountRecord> search_scan;
    std::vector<CountRecord> flank_scan;
};

// Locates the dip, scans the flank and parks the stage at the start point.
OperatingPoint calibrate_operating_point(Instrument& instrument, const FlankSettings& flank);

struct SweepSettings {
    double start_C = 26.0;
    double stop_C = 29.0;
    double step_C = 0.1;
    double dwell_s = 20.0;        // stability traces
    int plateaus = 5;             // stability traces
    int max_moves = 50;           // compensated sweeps
    double bracket_step_um = 1.0; // compensated sweeps
    Micrometers wavelength{0.8108};
};

struct ProtocolConfig {
    InstrumentSetup instrument;
    FlankSettings flank;
    SweepSettings sweep;
};

enum class SweepMode { Linear, Compensated };

std::string_view to_string(SweepMode mode);

struct SweepRecord {
    double temperature_C = 0.0;
    double stage_position_um = 0.0;
    std::uint64_t coincidence_counts = 0;
    double inferred_delay_um = 0.0;
    double inferred_delta_ng = 0.0;
    double sigma_delta_ng = 0.0;
    double theory_delta_ng = 0.0;
    int moves = 0;
    SweepMode mode = SweepMode::Linear;
};

struct CalibrationSweepResult {
    std::vector<SweepRecord> records;
    double slope_um_per_C = 0.0;
    double slope_stderr = 0.0;
    OperatingPoint operating_point;
};

CalibrationSweepResult run_calibration_sweep(const ProtocolConfig& config);

struct LinearMeasurementResult {
    std::vector<SweepRecord> records;
    double delta_ng_range = 0.0;
    OperatingPoint operating_point;
};

LinearMeasurementResult run_linear_measurement(const ProtocolConfig& config);

struct StabilitySample {
    double time_s = 0.0;
    double temperature_C = 0.0;
    std::uint64_t counts = 0;
};

struct Plateau {
    double temperature_C = 0.0;
    double mean_counts = 0.0;
    double stddev_counts = 0.0;
    std::size_t samples = 0;
};

struct StabilityTrace {
    std::vector<StabilitySample> samples;
    std::vector<Plateau> plateaus;
    std::vector<double> jumps;  // mean(p + 1) - mean(p)
    OperatingPoint operating_point;
};

StabilityTrace run_stability_trace(const ProtocolConfig& config);

struct CompensatedSweepResult {
    std::vector<SweepRecord> records;
    double total_delta_ng = 0.0;
    double total_stage_um = 0.0;
    OperatingPoint operating_point;
};

CompensatedSweepResult run_compensated_sweep(const ProtocolConfig& config);

// Group-index change of the sample between two temperatures, from the material model.
double theory_delta_ng(const Sample& sample, Celsius from, Celsius to, Micrometers wavelength);

}  // namespace homsim
