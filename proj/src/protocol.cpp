#include "homsim/protocol.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <fmt/format.h>

#include "homsim/errors.hpp"
#include "homsim/numeric.hpp"

namespace homsim {

namespace {

constexpr std::uint64_t kJitterStream = 0x6a177e5ULL;

std::vector<double> temperature_grid(double start, double stop, double step)
{
    if (!(step > 0.0)) throw ConfigError("sweep step must be positive");
    std::vector<double> out;
    const int count = static_cast<int>(std::floor((stop - start) / step + 1e-9));
    for (int k = 0; k <= count; ++k) out.push_back(start + k * step);
    return out;
}

double relative_delay(const Instrument& instr, const OperatingPoint& op, double counts)
{
    try {
        return op.direction * (instr.stage() - delay_from_counts(counts, op.calibration));
    } catch (const ExtrapolationError& e) {
        throw ProtocolFault(std::string(e.what()) + "; recalibrate the linear region", instr.state_dump());
    }
}

SweepRecord make_record(const Instrument& instr, const OperatingPoint& op, const Sample& base,
                        const SweepSettings& sweep, const CountRecord& reading, SweepMode mode)
{
    SweepRecord r;
    r.temperature_C = instr.temperature().value;
    r.stage_position_um = instr.stage();
    r.coincidence_counts = reading.coincidences;
    r.inferred_delay_um = relative_delay(instr, op, static_cast<double>(reading.coincidences));
    const double dT = r.temperature_C - base.temperature.value;
    r.inferred_delta_ng = delta_ng_from_delay(r.inferred_delay_um, base, dT, sweep.wavelength).delta_ng;
    r.sigma_delta_ng = precision_report(op.calibration, static_cast<double>(reading.coincidences)).sigma_delay_um /
                       to_micrometers(base.length);
    r.theory_delta_ng = theory_delta_ng(base, base.temperature, instr.temperature(), sweep.wavelength);
    r.mode = mode;
    return r;
}

ProtocolConfig at_start(const ProtocolConfig& config)
{
    ProtocolConfig c = config;
    c.instrument.sample = at_temperature(c.instrument.sample, Celsius{c.sweep.start_C});
    return c;
}

struct LinearSweep {
    std::vector<SweepRecord> records;
    OperatingPoint op;
};

LinearSweep linear_sweep(const ProtocolConfig& input)
{
    const ProtocolConfig config = at_start(input);
    const auto temps = temperature_grid(config.sweep.start_C, config.sweep.stop_C, config.sweep.step_C);
    if (temps.size() < 2) throw ConfigError("empty run: the sweep span holds fewer than two temperatures");

    Instrument instr(config.instrument);
    LinearSweep out;
    out.op = calibrate_operating_point(instr, config.flank);
    for (double T : temps) {
        instr.set_temperature(Celsius{T});
        const CountRecord reading = instr.read();
        out.records.push_back(
            make_record(instr, out.op, config.instrument.sample, config.sweep, reading, SweepMode::Linear));
    }
    return out;
}

}  // namespace

std::string_view to_string(SweepMode mode) { return mode == SweepMode::Linear ? "linear" : "compensated"; }

Instrument::Instrument(InstrumentSetup setup)
    : setup_(std::move(setup)), setpoint_(setup_.sample.temperature), actual_(setup_.sample.temperature)
{
    setup_.detector.validate();
    if (!(setup_.oven_resolution_C > 0.0)) throw ConfigError("oven resolution must be positive");
    rebuild();
    const double dip = predicted_dip_um();
    stage_um_ = dip;
    if (heating_direction() > 0) {
        travel_min_um_ = dip - setup_.travel_before_um;
        travel_max_um_ = dip + setup_.travel_after_um;
    } else {
        travel_min_um_ = dip - setup_.travel_after_um;
        travel_max_um_ = dip + setup_.travel_before_um;
    }
}

Sample Instrument::current_sample() const { return at_temperature(setup_.sample, actual_); }

void Instrument::rebuild()
{
    ArmSample arm{current_sample(), setup_.arm, setup_.displaces_air};
    evaluator_.emplace(setup_.spectrum, arm, setup_.visibility0);
}

void Instrument::set_temperature(Celsius target)
{
    const double res = setup_.oven_resolution_C;
    const Celsius quantized{std::round(target.value / res) * res};
    check_temperature(setup_.sample.material, quantized);
    double actual = quantized.value;
    if (setup_.oven_jitter_C > 0.0) {
        std::mt19937_64 rng(substream_seed(setup_.seed ^ kJitterStream, cursor_++));
        std::uniform_real_distribution<double> jitter(-setup_.oven_jitter_C, setup_.oven_jitter_C);
        actual += jitter(rng);
    }
    const bool changed = actual != actual_.value;
    setpoint_ = quantized;
    actual_ = Celsius{actual};
    if (changed) rebuild();
}

void Instrument::move_stage_to(double position_um)
{
    if (position_um < travel_min_um_ || position_um > travel_max_um_)
        throw ProtocolFault(fmt::format("stage travel exhausted: {:.3f} um outside [{:.3f}, {:.3f}] um", position_um,
                                        travel_min_um_, travel_max_um_),
                            state_dump());
    stage_um_ = position_um;
}

double Instrument::probability() const { return (*evaluator_)(stage_um_); }

CountRecord Instrument::read(double rate_scale)
{
    const CountRecord r =
        draw_record(stage_um_, probability(), setup_.detector, setup_.seed, cursor_++, rate_scale);
    last_counts_ = r.coincidences;
    return r;
}

double Instrument::predicted_dip_um() const
{
    const Sample s = current_sample();
    const double ng = group_index(s.material, setup_.spectrum.center, s.temperature);
    const double air = setup_.displaces_air ? 1.0 : 0.0;
    return heating_direction() * (ng - air) * to_micrometers(s.length);
}

std::string Instrument::state_dump() const
{
    return fmt::format("setpoint={:.2f} C actual={:.4f} C stage={:.4f} um travel=[{:.3f}, {:.3f}] um "
                       "cursor={} last_counts={}",
                       setpoint_.value, actual_.value, stage_um_, travel_min_um_, travel_max_um_, cursor_,
                       last_counts_);
}

OperatingPoint calibrate_operating_point(Instrument& instr, const FlankSettings& flank)
{
    if (!(flank.start_offset_um < flank.end_offset_um)) throw ConfigError("flank start offset must precede its end");
    if (!(flank.step_um > 0.0) || !(flank.search_step_um > 0.0)) throw ConfigError("flank steps must be positive");

    OperatingPoint op;
    op.direction = instr.heating_direction();
    const double predicted = instr.predicted_dip_um();
    const int half = static_cast<int>(std::round(flank.search_half_width_um / flank.search_step_um));
    for (int k = -half; k <= half; ++k) {
        instr.move_stage_to(predicted + k * flank.search_step_um);
        op.search_scan.push_back(instr.read());
    }
    const double lo = op.search_scan.front().delay_um;
    const double hi = op.search_scan.back().delay_um;
    double center = locate_min(op.search_scan).position;
    try {
        const DipFit fit = fit_gaussian_dip(op.search_scan);
        if (fit.center_um > lo && fit.center_um < hi) center = fit.center_um;
    } catch (const FitError&) {
    } catch (const ShapeError&) {
    }
    op.dip_center_um = center;

    const int points = static_cast<int>(std::round((flank.end_offset_um - flank.start_offset_um) / flank.step_um));
    for (int k = points; k >= 0; --k) {
        const double offset = flank.start_offset_um + k * flank.step_um;
        instr.move_stage_to(center - op.direction * offset);
        op.flank_scan.push_back(instr.read());
    }
    std::sort(op.flank_scan.begin(), op.flank_scan.end(),
              [](const CountRecord& a, const CountRecord& b) { return a.delay_um < b.delay_um; });

    const double a = center - op.direction * flank.start_offset_um;
    const double b = center - op.direction * flank.end_offset_um;
    const double eps = 1e-9 * std::max(1.0, std::abs(center));
    const Region region{std::min(a, b) - eps, std::max(a, b) + eps};
    op.calibration =
        calibrate_linear_region(op.flank_scan, region, instr.setup().detector.integration_time_s, a);
    op.stage_um = a;
    instr.move_stage_to(a);
    return op;
}

double theory_delta_ng(const Sample& sample, Celsius from, Celsius to, Micrometers wavelength)
{
    return group_index(sample.material, wavelength, to) - group_index(sample.material, wavelength, from);
}

CalibrationSweepResult run_calibration_sweep(const ProtocolConfig& config)
{
    LinearSweep sweep = linear_sweep(config);
    std::vector<double> T, x;
    for (const auto& r : sweep.records) {
        T.push_back(r.temperature_C);
        x.push_back(r.inferred_delay_um);
    }
    const LineFit line = fit_line(T, x);
    CalibrationSweepResult out;
    out.records = std::move(sweep.records);
    out.slope_um_per_C = line.slope;
    out.slope_stderr = line.slope_stderr;
    out.operating_point = std::move(sweep.op);
    return out;
}

LinearMeasurementResult run_linear_measurement(const ProtocolConfig& config)
{
    LinearSweep sweep = linear_sweep(config);
    LinearMeasurementResult out;
    const auto [lo, hi] = std::minmax_element(sweep.records.begin(), sweep.records.end(),
                                              [](const SweepRecord& a, const SweepRecord& b) {
                                                  return a.inferred_delta_ng < b.inferred_delta_ng;
                                              });
    out.delta_ng_range = hi->inferred_delta_ng - lo->inferred_delta_ng;
    out.records = std::move(sweep.records);
    out.operating_point = std::move(sweep.op);
    return out;
}

StabilityTrace run_stability_trace(const ProtocolConfig& input)
{
    const ProtocolConfig config = at_start(input);
    const auto& sweep = config.sweep;
    if (sweep.plateaus < 1) throw ConfigError("stability trace needs at least one plateau");
    if (!(sweep.dwell_s > 0.0)) throw ConfigError("stability dwell must be positive");

    Instrument instr(config.instrument);
    StabilityTrace out;
    out.operating_point = calibrate_operating_point(instr, config.flank);

    const double tau = config.instrument.detector.integration_time_s;
    const std::size_t per_plateau = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(sweep.dwell_s / tau)));
    std::vector<double> times(per_plateau * sweep.plateaus);
    for (std::size_t k = 0; k < times.size(); ++k) times[k] = k * tau;
    const auto factors = drift_factors(config.instrument.detector.drift, times, config.instrument.seed);

    std::size_t k = 0;
    for (int p = 0; p < sweep.plateaus; ++p) {
        instr.set_temperature(Celsius{sweep.start_C + p * sweep.step_C});
        Plateau plateau;
        plateau.temperature_C = instr.temperature().value;
        double sum = 0.0, sum2 = 0.0;
        for (std::size_t i = 0; i < per_plateau; ++i, ++k) {
            const CountRecord r = instr.read(factors[k]);
            out.samples.push_back({times[k], plateau.temperature_C, r.coincidences});
            const double c = static_cast<double>(r.coincidences);
            sum += c;
            sum2 += c * c;
        }
        const double n = static_cast<double>(per_plateau);
        plateau.samples = per_plateau;
        plateau.mean_counts = sum / n;
        plateau.stddev_counts = n > 1 ? std::sqrt(std::max(0.0, (sum2 - sum * sum / n) / (n - 1))) : 0.0;
        out.plateaus.push_back(plateau);
    }
    for (std::size_t p = 1; p < out.plateaus.size(); ++p)
        out.jumps.push_back(out.plateaus[p].mean_counts - out.plateaus[p - 1].mean_counts);
    return out;
}

CompensatedSweepResult run_compensated_sweep(const ProtocolConfig& input)
{
    const ProtocolConfig config = at_start(input);
    const auto& sweep = config.sweep;
    if (!(sweep.step_C > 0.0)) throw ConfigError("sweep step must be positive");
    if (sweep.max_moves < 1) throw ConfigError("max_moves must be at least 1");
    if (!(sweep.bracket_step_um > 0.0)) throw ConfigError("bracket step must be positive");

    CompensatedSweepResult out;
    std::vector<double> temps;
    for (double T = sweep.start_C + sweep.step_C; T < sweep.stop_C + 1e-9; T += sweep.step_C) temps.push_back(T);
    if (!temps.empty() && temps.back() < sweep.stop_C - 1e-9) temps.push_back(sweep.stop_C);
    if (temps.empty() && sweep.stop_C > sweep.start_C + 1e-9) temps.push_back(sweep.stop_C);
    if (temps.empty()) return out;

    Instrument instr(config.instrument);
    out.operating_point = calibrate_operating_point(instr, config.flank);
    const OperatingPoint& op = out.operating_point;
    const Sample& base = config.instrument.sample;
    const double target = op.calibration.anchor_counts;
    const double tolerance = std::sqrt(std::max(target, 1.0));

    for (double T : temps) {
        // STEP_TEMP
        instr.set_temperature(Celsius{T});
        // READ
        double error = static_cast<double>(instr.read().coincidences) - target;

        // MOVE: bisection along the heating direction on the monotone flank.
        const double origin = instr.stage();
        int moves = 0;
        const auto probe = [&](double u) {
            if (++moves > sweep.max_moves)
                throw ProtocolFault(fmt::format("counts not recovered into the setpoint band after {} moves",
                                                sweep.max_moves),
                                    instr.state_dump());
            instr.move_stage_to(origin + op.direction * u);
            return static_cast<double>(instr.read().coincidences) - target;
        };
        if (std::abs(error) > tolerance) {
            double above = 0.0;  // displacement with counts above target
            double below = 0.0;  // displacement with counts below target
            bool done = false;
            if (error > 0.0) {
                for (double u = sweep.bracket_step_um;; u += sweep.bracket_step_um) {
                    const double e = probe(u);
                    if (std::abs(e) <= tolerance) {
                        done = true;
                        break;
                    }
                    if (e < 0.0) {
                        below = u;
                        break;
                    }
                    above = u;
                }
            } else {
                for (double u = -sweep.bracket_step_um;; u -= sweep.bracket_step_um) {
                    const double e = probe(u);
                    if (std::abs(e) <= tolerance) {
                        done = true;
                        break;
                    }
                    if (e > 0.0) {
                        above = u;
                        break;
                    }
                    below = u;
                }
            }
            while (!done) {
                const double mid = 0.5 * (above + below);
                const double e = probe(mid);
                if (std::abs(e) <= tolerance) break;
                (e > 0.0 ? above : below) = mid;
            }
        }

        // RECORD
        const CountRecord reading = instr.read();
        SweepRecord r = make_record(instr, op, base, sweep, reading, SweepMode::Compensated);
        r.moves = moves;
        out.records.push_back(r);
    }
    out.total_delta_ng = out.records.back().inferred_delta_ng;
    out.total_stage_um = op.direction * (instr.stage() - op.stage_um);
    return out;
}

}  // namespace homsim
