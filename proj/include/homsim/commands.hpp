#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "homsim/config.hpp"
#include "homsim/estimation.hpp"

namespace homsim {

MaterialRegistry registry_for(const RunConfig& config);

// Source crystal of the given length with the configured oven temperature resolved.
CrystalSpec source_crystal(const RunConfig& config, const MaterialRegistry& materials, double length_mm);
SpectralDensity source_spectrum(const RunConfig& config, const MaterialRegistry& materials, double length_mm);

Sample make_sample(const SampleConfig& sample, const MaterialRegistry& materials);

struct SpectrumRow {
    double length_mm = 0.0;
    double source_temperature_C = 0.0;
    double bandwidth_nm = 0.0;
    double coherence_bandwidth_nm = 0.0;
    double dip_fwhm_um = 0.0;
    bool clipped = false;
};

struct SpectrumReport {
    std::vector<SpectrumRow> rows;
    std::vector<SpectralDensity> spectra;
};

SpectrumReport compute_spectrum(const RunConfig& config);

struct DipRow {
    std::string label;
    SpectrumKind kind = SpectrumKind::Sinc2;
    double bandwidth_nm = 0.0;
    double fwhm_um = 0.0;
    double visibility = 0.0;
    double minimum_um = 0.0;
    std::size_t side_maxima = 0;  // local maxima above 0.5 + 3 sigma of 1000 counts
    std::optional<double> sample_fwhm_um;
    std::optional<double> shift_um;
};

struct DipReport {
    std::vector<DipRow> rows;
    std::vector<HomCurve> curves;
    std::vector<HomCurve> sample_curves;
};

DipReport compute_dip(const RunConfig& config);

struct MeasureRow {
    std::string label;
    std::string material;
    double length_mm = 0.0;
    double theory_ng = 0.0;
    double measured_ng = 0.0;  // mean over runs
    double spread_ng = 0.0;    // standard deviation over runs, 0 for one run
    double uncertainty = 0.0;  // fit-propagated, first run
    double accuracy = 0.0;     // |measured - theory|
    double shift_um = 0.0;     // first run
    std::vector<double> per_run_ng;
};

struct MeasureReport {
    std::vector<MeasureRow> rows;
    std::vector<CountRecord> reference_scan;
    std::vector<std::vector<CountRecord>> sample_scans;  // fine scans of the first run
    double reference_center_um = 0.0;
};

MeasureReport compute_measure(const RunConfig& config);

ProtocolConfig protocol_config(const RunConfig& config);

// Process exit status for an error: 2 config, 3 range, 4 shape or fit, 5 protocol, 1 otherwise.
int exit_status(const std::exception& error);

// Runs the configured command, writes CSVs and summary.json under `out`, and returns the summary.
nlohmann::json execute(const RunConfig& config, const std::filesystem::path& out);

}  // namespace homsim
