#include "homsim/commands.hpp"

#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "homsim/errors.hpp"
#include "homsim/io.hpp"

namespace homsim {

namespace {

// Local maxima above this level count as side oscillations.
double oscillation_level() { return 0.5 + 3.0 * 0.5 / std::sqrt(1000.0); }

double auto_half_window_um(const SpectralDensity& s)
{
    const double bw_um = bandwidth_fwhm(s) * 1e-3;
    return 12.0 * s.center.value * s.center.value / bw_um;
}

double arm_sign(Arm arm) { return arm == Arm::One ? 1.0 : -1.0; }

double predicted_shift_um(const Sample& sample, const SpectralDensity& s, Arm arm, bool displaces_air)
{
    const double ng = group_index(sample.material, s.center, sample.temperature);
    return arm_sign(arm) * (ng - (displaces_air ? 1.0 : 0.0)) * to_micrometers(sample.length);
}

std::vector<double> grid(double center, double half_width, double step)
{
    const auto half = static_cast<long>(std::llround(half_width / step));
    std::vector<double> out;
    for (long k = -half; k <= half; ++k) out.push_back(center + static_cast<double>(k) * step);
    return out;
}

std::vector<CountRecord> scan(const HomEvaluator& evaluator, const std::vector<double>& delays,
                              const DetectorModel& detector, std::uint64_t seed, std::uint64_t& cursor)
{
    std::vector<CountRecord> out;
    out.reserve(delays.size());
    for (double x : delays) out.push_back(draw_record(x, evaluator(x), detector, seed, cursor++));
    return out;
}

struct DipEstimate {
    double center_um = 0.0;
    double sigma_um = 0.0;
};

DipEstimate estimate_center(const std::vector<CountRecord>& fine)
{
    const double lo = fine.front().delay_um;
    const double hi = fine.back().delay_um;
    try {
        const DipFit fit = fit_gaussian_dip(fine);
        if (fit.center_um > lo && fit.center_um < hi && fit.center_sigma_um() > 0.0)
            return {fit.center_um, fit.center_sigma_um()};
    } catch (const FitError&) {
    }
    const MinimumLocation m = locate_min(fine);
    return {m.position, fine[1].delay_um - fine[0].delay_um};
}

std::size_t coarse_minimum(const std::vector<CountRecord>& records)
{
    std::size_t best = 0;
    for (std::size_t k = 1; k < records.size(); ++k)
        if (records[k].coincidences < records[best].coincidences) best = k;
    return best;
}

nlohmann::json optional_number(const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(); }

std::string file_label(std::size_t index, const std::string& label)
{
    std::string out;
    for (char c : label) out += std::isalnum(static_cast<unsigned char>(c)) ? c : '_';
    return fmt::format("{:02}_{}", index, out);
}

nlohmann::json spectrum_command(const RunConfig& config, const std::filesystem::path& out)
{
    const SpectrumReport report = compute_spectrum(config);
    nlohmann::json rows = nlohmann::json::array();
    for (std::size_t k = 0; k < report.rows.size(); ++k) {
        const auto& r = report.rows[k];
        write_csv(out / fmt::format("spectrum_{}.csv", file_label(k, format_number(r.length_mm) + "mm")),
                  spectrum_table(report.spectra[k]));
        rows.push_back({{"length_mm", r.length_mm},
                        {"source_temperature_C", r.source_temperature_C},
                        {"bandwidth_nm", r.bandwidth_nm},
                        {"coherence_bandwidth_nm", r.coherence_bandwidth_nm},
                        {"dip_fwhm_um", r.dip_fwhm_um},
                        {"clipped", r.clipped}});
    }
    return {{"command", "spectrum"}, {"rows", rows}};
}

nlohmann::json dip_command(const RunConfig& config, const std::filesystem::path& out)
{
    const DipReport report = compute_dip(config);
    nlohmann::json rows = nlohmann::json::array();
    for (std::size_t k = 0; k < report.rows.size(); ++k) {
        const auto& r = report.rows[k];
        write_csv(out / fmt::format("dip_{}.csv", file_label(k, r.label)), curve_table(report.curves[k]));
        if (k < report.sample_curves.size())
            write_csv(out / fmt::format("dip_{}_sample.csv", file_label(k, r.label)), curve_table(report.sample_curves[k]));
        rows.push_back({{"label", r.label},
                        {"spectrum_kind", std::string(to_string(r.kind))},
                        {"bandwidth_nm", r.bandwidth_nm},
                        {"fwhm_um", r.fwhm_um},
                        {"visibility", r.visibility},
                        {"minimum_um", r.minimum_um},
                        {"side_maxima", r.side_maxima},
                        {"sample_fwhm_um", optional_number(r.sample_fwhm_um)},
                        {"shift_um", optional_number(r.shift_um)}});
    }
    return {{"command", "dip"}, {"rows", rows}};
}

nlohmann::json measure_command(const RunConfig& config, const std::filesystem::path& out)
{
    const MeasureReport report = compute_measure(config);
    write_csv(out / "measure_reference.csv", counts_table(report.reference_scan));
    nlohmann::json rows = nlohmann::json::array();
    for (std::size_t k = 0; k < report.rows.size(); ++k) {
        const auto& r = report.rows[k];
        write_csv(out / fmt::format("measure_{}.csv", file_label(k, r.label)), counts_table(report.sample_scans[k]));
        rows.push_back({{"sample", r.label},
                        {"material", r.material},
                        {"length_mm", r.length_mm},
                        {"theory_ng", r.theory_ng},
                        {"measured_ng", r.measured_ng},
                        {"accuracy", r.accuracy},
                        {"uncertainty", r.uncertainty},
                        {"spread_ng", r.spread_ng},
                        {"shift_um", r.shift_um},
                        {"per_run_ng", r.per_run_ng}});
    }
    return {{"command", "measure"},
            {"runs", config.measure.runs},
            {"reference_center_um", report.reference_center_um},
            {"theory_wavelength_um", config.measure.theory_wavelength_um},
            {"rows", rows}};
}

nlohmann::json operating_point_json(const OperatingPoint& op)
{
    const auto& c = op.calibration;
    const Precision p = precision_report(c, c.anchor_counts);
    return {{"dip_center_um", op.dip_center_um},
            {"stage_um", op.stage_um},
            {"direction", op.direction},
            {"slope_counts_per_um", c.slope_counts_per_um},
            {"anchor_counts", c.anchor_counts},
            {"count_range", {c.count_min, c.count_max}},
            {"integration_time_s", c.integration_time_s},
            {"sigma_delay_um", p.sigma_delay_um},
            {"sigma_ng_per_cm", p.sigma_ng_per_cm}};
}

nlohmann::json sweep_command(const RunConfig& config, const std::filesystem::path& out)
{
    const ProtocolConfig pc = protocol_config(config);
    nlohmann::json summary{{"command", "sweep"}, {"mode", std::string(to_string(config.sweep.kind))}};
    switch (config.sweep.kind) {
    case SweepKind::Calibration: {
        const auto r = run_calibration_sweep(pc);
        write_csv(out / "sweep.csv", sweep_table(r.records));
        summary["slope_um_per_C"] = r.slope_um_per_C;
        summary["slope_stderr_um_per_C"] = r.slope_stderr;
        summary["operating_point"] = operating_point_json(r.operating_point);
        break;
    }
    case SweepKind::Linear: {
        const auto r = run_linear_measurement(pc);
        write_csv(out / "sweep.csv", sweep_table(r.records));
        summary["delta_ng_range"] = r.delta_ng_range;
        summary["theory_delta_ng_range"] = r.records.back().theory_delta_ng - r.records.front().theory_delta_ng;
        summary["operating_point"] = operating_point_json(r.operating_point);
        break;
    }
    case SweepKind::Stability: {
        const auto r = run_stability_trace(pc);
        write_csv(out / "stability.csv", stability_table(r.samples));
        nlohmann::json plateaus = nlohmann::json::array();
        for (const auto& p : r.plateaus)
            plateaus.push_back({{"temperature_C", p.temperature_C},
                                {"mean_counts", p.mean_counts},
                                {"stddev_counts", p.stddev_counts},
                                {"samples", p.samples}});
        summary["plateaus"] = plateaus;
        summary["jumps"] = r.jumps;
        summary["operating_point"] = operating_point_json(r.operating_point);
        break;
    }
    case SweepKind::Compensated: {
        const auto r = run_compensated_sweep(pc);
        write_csv(out / "sweep.csv", sweep_table(r.records));
        summary["steps"] = r.records.size();
        summary["total_delta_ng"] = r.total_delta_ng;
        summary["total_stage_um"] = r.total_stage_um;
        if (!r.records.empty()) {
            summary["theory_total_delta_ng"] = r.records.back().theory_delta_ng;
            double mean_sigma = 0.0;
            for (const auto& rec : r.records) mean_sigma += rec.sigma_delta_ng;
            summary["mean_sigma_delta_ng"] = mean_sigma / static_cast<double>(r.records.size());
            summary["operating_point"] = operating_point_json(r.operating_point);
        }
        break;
    }
    }
    return summary;
}

}  // namespace

MaterialRegistry registry_for(const RunConfig& config)
{
    return load_materials(config.materials_path.empty() ? default_materials_path() : config.materials_path);
}

CrystalSpec source_crystal(const RunConfig& config, const MaterialRegistry& materials, double length_mm)
{
    const auto& s = config.source;
    CrystalSpec c{materials.at(s.material), Millimeters{length_mm}, Micrometers{s.grating_period_um}, Celsius{25.0},
                  Micrometers{s.pump_wavelength_um}};
    switch (s.temperature.mode) {
    case SourceTemperature::Mode::FluxMax: c.temperature = flux_optimal_temperature(c); break;
    case SourceTemperature::Mode::Qpm: c.temperature = qpm_temperature(c); break;
    case SourceTemperature::Mode::Fixed: c.temperature = Celsius{s.temperature.value_C}; break;
    }
    return c;
}

SpectralDensity source_spectrum(const RunConfig& config, const MaterialRegistry& materials, double length_mm)
{
    return spdc_spectral_density(source_crystal(config, materials, length_mm), config.grid.points,
                                 config.grid.span_factor);
}

Sample make_sample(const SampleConfig& s, const MaterialRegistry& materials)
{
    Sample out{materials.at(s.material), Millimeters{s.length_mm}, Celsius{s.temperature_C}};
    check_temperature(out.material, out.temperature);
    return out;
}

SpectrumReport compute_spectrum(const RunConfig& config)
{
    const MaterialRegistry materials = registry_for(config);
    SpectrumReport report;
    for (double L : config.spectrum.lengths_mm) {
        const CrystalSpec crystal = source_crystal(config, materials, L);
        SpectralDensity s = spdc_spectral_density(crystal, config.grid.points, config.grid.span_factor);
        const double h = auto_half_window_um(s);
        const auto delays = linspace(-h, h, 4001);
        const double dip = curve_fwhm(hom_profile(s, delays, std::nullopt, 1.0));
        SpectrumRow row;
        row.length_mm = L;
        row.source_temperature_C = crystal.temperature.value;
        row.bandwidth_nm = bandwidth_fwhm(s);
        row.dip_fwhm_um = dip;
        row.coherence_bandwidth_nm = coherence_bandwidth_nm(s.center, dip);
        row.clipped = s.clipped;
        report.rows.push_back(row);
        report.spectra.push_back(std::move(s));
    }
    return report;
}

DipReport compute_dip(const RunConfig& config)
{
    if (config.dip.cases.empty()) throw ConfigError("dip.cases must list at least one bandwidth case");
    const MaterialRegistry materials = registry_for(config);
    std::optional<ArmSample> arm;
    if (config.dip.sample) {
        const auto& sc = *config.dip.sample;
        arm = ArmSample{make_sample(sc, materials), sc.arm, sc.displaces_air};
    }

    DipReport report;
    for (const auto& c : config.dip.cases) {
        SpectralDensity s = source_spectrum(config, materials, c.source_length_mm.value_or(config.source.length_mm));
        if (c.filter)
            s = apply_filter(s, BandpassFilter{Micrometers{c.filter->center_um}, Nanometers{c.filter->fwhm_nm},
                                               c.filter->passes});
        const double h = c.half_window_um > 0.0 ? c.half_window_um : auto_half_window_um(s);
        const auto delays = linspace(-h, h, static_cast<std::size_t>(c.points));
        HomCurve curve = hom_profile(s, delays, std::nullopt, config.visibility);

        DipRow row;
        row.label = c.label;
        row.kind = s.kind;
        row.bandwidth_nm = bandwidth_fwhm(s);
        row.fwhm_um = curve_fwhm(curve);
        row.visibility = curve_visibility(curve);
        row.minimum_um = locate_min(curve).position;
        row.side_maxima = count_maxima_above(curve, oscillation_level());

        if (arm) {
            const double center = predicted_shift_um(arm->sample, s, arm->arm, arm->displaces_air);
            const auto shifted = linspace(center - h, center + h, static_cast<std::size_t>(c.points));
            HomCurve with = hom_profile(s, shifted, arm, config.visibility);
            with.sample_label = config.dip.sample->label;
            row.sample_fwhm_um = curve_fwhm(with);
            row.shift_um = dip_shift(curve, with);
            report.sample_curves.push_back(std::move(with));
        }
        report.rows.push_back(row);
        report.curves.push_back(std::move(curve));
    }
    return report;
}

MeasureReport compute_measure(const RunConfig& config)
{
    const auto& mc = config.measure;
    const MaterialRegistry materials = registry_for(config);
    const SpectralDensity spectrum = source_spectrum(config, materials, config.source.length_mm);
    const HomEvaluator reference(spectrum, std::nullopt, config.visibility);

    std::vector<Sample> samples;
    std::vector<std::optional<HomEvaluator>> evaluators;
    for (const auto& sc : mc.samples) {
        Sample s = make_sample(sc, materials);
        if (mc.use_alternate_lengths)
            if (auto it = mc.alternate_lengths_mm.find(sc.label); it != mc.alternate_lengths_mm.end())
                s.length = Millimeters{it->second};
        evaluators.emplace_back(HomEvaluator(spectrum, ArmSample{s, sc.arm, sc.displaces_air}, config.visibility));
        samples.push_back(std::move(s));
    }

    MeasureReport report;
    report.rows.resize(samples.size());
    report.sample_scans.resize(samples.size());
    for (int run = 0; run < mc.runs; ++run) {
        const std::uint64_t seed = config.seed + static_cast<std::uint64_t>(run);
        std::uint64_t cursor = 0;
        const auto ref_scan = scan(reference, grid(0.0, mc.reference_half_width_um, mc.fine_step_um), config.detector,
                                   seed, cursor);
        const DipEstimate ref = estimate_center(ref_scan);
        if (run == 0) {
            report.reference_scan = ref_scan;
            report.reference_center_um = ref.center_um;
        }
        for (std::size_t k = 0; k < samples.size(); ++k) {
            const auto& sc = mc.samples[k];
            const double predicted = predicted_shift_um(samples[k], spectrum, sc.arm, sc.displaces_air);
            const auto coarse = scan(*evaluators[k], grid(predicted, mc.coarse_half_width_um, mc.coarse_step_um),
                                     config.detector, seed, cursor);
            const double rough = coarse[coarse_minimum(coarse)].delay_um;
            const auto fine =
                scan(*evaluators[k], grid(rough, mc.fine_half_width_um, mc.fine_step_um), config.detector, seed, cursor);
            const DipEstimate est = estimate_center(fine);
            const double shift = arm_sign(sc.arm) * (est.center_um - ref.center_um);
            const GroupIndexResult g =
                group_index_from_shift(shift, std::hypot(est.sigma_um, ref.sigma_um), samples[k], sc.displaces_air);

            MeasureRow& row = report.rows[k];
            row.per_run_ng.push_back(g.n_g);
            if (run == 0) {
                row.label = sc.label;
                row.material = sc.material;
                row.length_mm = samples[k].length.value;
                row.theory_ng = group_index(samples[k].material, Micrometers{mc.theory_wavelength_um},
                                            samples[k].temperature);
                row.uncertainty = g.uncertainty;
                row.shift_um = shift;
                report.sample_scans[k] = fine;
            }
        }
    }
    for (auto& row : report.rows) {
        const double n = static_cast<double>(row.per_run_ng.size());
        row.measured_ng = std::accumulate(row.per_run_ng.begin(), row.per_run_ng.end(), 0.0) / n;
        double ss = 0.0;
        for (double v : row.per_run_ng) ss += (v - row.measured_ng) * (v - row.measured_ng);
        row.spread_ng = n > 1 ? std::sqrt(ss / (n - 1)) : 0.0;
        row.accuracy = std::abs(row.measured_ng - row.theory_ng);
    }
    return report;
}

ProtocolConfig protocol_config(const RunConfig& config)
{
    const MaterialRegistry materials = registry_for(config);
    const auto& sw = config.sweep;
    ProtocolConfig pc;
    pc.instrument.spectrum = source_spectrum(config, materials, config.source.length_mm);
    SampleConfig sc = sw.sample;
    sc.temperature_C = sw.settings.start_C;
    pc.instrument.sample = make_sample(sc, materials);
    pc.instrument.arm = sc.arm;
    pc.instrument.displaces_air = sc.displaces_air;
    pc.instrument.detector = config.detector;
    pc.instrument.visibility0 = config.visibility;
    pc.instrument.oven_resolution_C = sw.oven_resolution_C;
    pc.instrument.oven_jitter_C = sw.oven_jitter_C;
    pc.instrument.travel_before_um = sw.travel_before_um;
    pc.instrument.travel_after_um = sw.travel_after_um;
    pc.instrument.seed = config.seed;
    pc.flank = sw.flank;
    pc.sweep = sw.settings;
    return pc;
}

int exit_status(const std::exception& e)
{
    if (dynamic_cast<const ConfigError*>(&e)) return 2;
    if (dynamic_cast<const RangeError*>(&e)) return 3;
    if (dynamic_cast<const ShapeError*>(&e) || dynamic_cast<const FitError*>(&e)) return 4;
    if (dynamic_cast<const ProtocolFault*>(&e) || dynamic_cast<const ExtrapolationError*>(&e)) return 5;
    return 1;
}

nlohmann::json execute(const RunConfig& config, const std::filesystem::path& out)
{
    std::filesystem::create_directories(out);
    nlohmann::json summary;
    switch (config.command) {
    case Command::Spectrum: summary = spectrum_command(config, out); break;
    case Command::Dip: summary = dip_command(config, out); break;
    case Command::Measure: summary = measure_command(config, out); break;
    case Command::Sweep: summary = sweep_command(config, out); break;
    }
    summary["seed"] = config.seed;
    write_summary(out / "summary.json", summary, config_hash(config));
    summary["schema_version"] = kSchemaVersion;
    summary["config_hash"] = config_hash(config);
    return summary;
}

}  // namespace homsim
