#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "homsim/biphoton.hpp"
#include "homsim/detection.hpp"
#include "homsim/interference.hpp"
#include "homsim/protocol.hpp"

namespace homsim {

// Header row plus rows of cells; numbers are written with 12 significant digits.
struct CsvTable {
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;

    void add_row(std::vector<std::string> cells);
    std::size_t column(const std::string& name) const;
    double number(std::size_t row, const std::string& name) const;
};

std::string format_number(double value);

void write_csv(const std::filesystem::path& path, const CsvTable& table);
CsvTable read_csv(const std::filesystem::path& path);

CsvTable spectrum_table(const SpectralDensity& spectrum);
CsvTable curve_table(const HomCurve& curve);
CsvTable counts_table(const std::vector<CountRecord>& records);
CsvTable sweep_table(const std::vector<SweepRecord>& records);
CsvTable stability_table(const std::vector<StabilitySample>& samples);

std::vector<CountRecord> counts_from_table(const CsvTable& table);
std::vector<SweepRecord> sweep_from_table(const CsvTable& table);

// Writes `summary` with schema_version and config_hash keys, pretty-printed.
void write_summary(const std::filesystem::path& path, nlohmann::json summary, const std::string& config_hash);

}  // namespace homsim
