#include "homsim/io.hpp"

#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "homsim/config.hpp"
#include "homsim/errors.hpp"

namespace homsim {

namespace {

std::vector<std::string> split(const std::string& line)
{
    std::vector<std::string> out;
    std::string cell;
    std::istringstream in(line);
    while (std::getline(in, cell, ',')) out.push_back(cell);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

std::string integer(std::uint64_t v) { return std::to_string(v); }

std::uint64_t to_count(const CsvTable& t, std::size_t row, const std::string& name)
{
    const std::string& cell = t.rows[row][t.column(name)];
    try {
        return std::stoull(cell);
    } catch (const std::exception&) {
        throw ParseError(fmt::format("row {}: column '{}' is not a count ('{}')", row + 1, name, cell));
    }
}

}  // namespace

void CsvTable::add_row(std::vector<std::string> cells)
{
    if (cells.size() != columns.size())
        throw ShapeError(fmt::format("csv row has {} cells for {} columns", cells.size(), columns.size()));
    rows.push_back(std::move(cells));
}

std::size_t CsvTable::column(const std::string& name) const
{
    for (std::size_t k = 0; k < columns.size(); ++k)
        if (columns[k] == name) return k;
    throw ParseError(fmt::format("csv has no column '{}'", name));
}

double CsvTable::number(std::size_t row, const std::string& name) const
{
    const std::string& cell = rows.at(row)[column(name)];
    try {
        std::size_t used = 0;
        const double v = std::stod(cell, &used);
        if (used != cell.size()) throw std::invalid_argument(cell);
        return v;
    } catch (const std::exception&) {
        throw ParseError(fmt::format("row {}: column '{}' is not a number ('{}')", row + 1, name, cell));
    }
}

std::string format_number(double value) { return fmt::format("{:.12g}", value); }

void write_csv(const std::filesystem::path& path, const CsvTable& table)
{
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError(fmt::format("cannot write '{}'", path.string()));
    const auto line = [&out](const std::vector<std::string>& cells) {
        for (std::size_t k = 0; k < cells.size(); ++k) out << (k ? "," : "") << cells[k];
        out << '\n';
    };
    line(table.columns);
    for (const auto& row : table.rows) line(row);
}

CsvTable read_csv(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError(fmt::format("cannot open '{}'", path.string()));
    CsvTable t;
    std::string line;
    if (!std::getline(in, line)) throw ParseError(fmt::format("'{}' is empty", path.string()));
    t.columns = split(line);
    std::size_t number = 1;
    while (std::getline(in, line)) {
        ++number;
        if (line.empty()) continue;
        auto cells = split(line);
        if (cells.size() != t.columns.size())
            throw ParseError(fmt::format("{}:{}: expected {} cells, found {}", path.string(), number,
                                         t.columns.size(), cells.size()));
        t.rows.push_back(std::move(cells));
    }
    return t;
}

CsvTable spectrum_table(const SpectralDensity& s)
{
    CsvTable t{{"detuning_rad_per_s", "wavelength_um", "weight"}, {}};
    for (std::size_t k = 0; k < s.size(); ++k)
        t.add_row({format_number(s.detuning[k]), format_number(s.wavelength_at(k).value), format_number(s.weights[k])});
    return t;
}

CsvTable curve_table(const HomCurve& c)
{
    CsvTable t{{"delay_um", "probability"}, {}};
    for (std::size_t k = 0; k < c.delay_um.size(); ++k)
        t.add_row({format_number(c.delay_um[k]), format_number(c.probability[k])});
    return t;
}

CsvTable counts_table(const std::vector<CountRecord>& records)
{
    CsvTable t{{"delay_um", "singles_1", "singles_2", "coincidences", "seed"}, {}};
    for (const auto& r : records)
        t.add_row({format_number(r.delay_um), integer(r.singles_1), integer(r.singles_2), integer(r.coincidences),
                   integer(r.seed)});
    return t;
}

CsvTable sweep_table(const std::vector<SweepRecord>& records)
{
    CsvTable t{{"temperature_C", "stage_position_um", "coincidence_counts", "inferred_delay_um", "inferred_delta_ng",
                "sigma_delta_ng", "theory_delta_ng", "moves", "mode"},
               {}};
    for (const auto& r : records)
        t.add_row({format_number(r.temperature_C), format_number(r.stage_position_um), integer(r.coincidence_counts),
                   format_number(r.inferred_delay_um), format_number(r.inferred_delta_ng),
                   format_number(r.sigma_delta_ng), format_number(r.theory_delta_ng), std::to_string(r.moves),
                   std::string(to_string(r.mode))});
    return t;
}

CsvTable stability_table(const std::vector<StabilitySample>& samples)
{
    CsvTable t{{"time_s", "temperature_C", "coincidences"}, {}};
    for (const auto& s : samples)
        t.add_row({format_number(s.time_s), format_number(s.temperature_C), integer(s.counts)});
    return t;
}

std::vector<CountRecord> counts_from_table(const CsvTable& t)
{
    std::vector<CountRecord> out;
    for (std::size_t k = 0; k < t.rows.size(); ++k) {
        CountRecord r;
        r.delay_um = t.number(k, "delay_um");
        r.singles_1 = to_count(t, k, "singles_1");
        r.singles_2 = to_count(t, k, "singles_2");
        r.coincidences = to_count(t, k, "coincidences");
        r.seed = to_count(t, k, "seed");
        out.push_back(r);
    }
    return out;
}

std::vector<SweepRecord> sweep_from_table(const CsvTable& t)
{
    std::vector<SweepRecord> out;
    for (std::size_t k = 0; k < t.rows.size(); ++k) {
        SweepRecord r;
        r.temperature_C = t.number(k, "temperature_C");
        r.stage_position_um = t.number(k, "stage_position_um");
        r.coincidence_counts = to_count(t, k, "coincidence_counts");
        r.inferred_delay_um = t.number(k, "inferred_delay_um");
        r.inferred_delta_ng = t.number(k, "inferred_delta_ng");
        r.sigma_delta_ng = t.number(k, "sigma_delta_ng");
        r.theory_delta_ng = t.number(k, "theory_delta_ng");
        r.moves = static_cast<int>(to_count(t, k, "moves"));
        const std::string& mode = t.rows[k][t.column("mode")];
        if (mode == "linear") r.mode = SweepMode::Linear;
        else if (mode == "compensated") r.mode = SweepMode::Compensated;
        else throw ParseError(fmt::format("row {}: unknown sweep mode '{}'", k + 1, mode));
        out.push_back(r);
    }
    return out;
}

void write_summary(const std::filesystem::path& path, nlohmann::json summary, const std::string& config_hash)
{
    summary["schema_version"] = kSchemaVersion;
    summary["config_hash"] = config_hash;
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError(fmt::format("cannot write '{}'", path.string()));
    out << summary.dump(2) << '\n';
}

}  // namespace homsim
