#include "homsim/materials.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <yaml-cpp/yaml.h>

#include "homsim/errors.hpp"

namespace homsim {

namespace {

struct IndexValue {
    double n;
    double slope;  // dn/dl
};

template <class... Fs>
struct Overloaded : Fs... {
    using Fs::operator()...;
};
template <class... Fs>
Overloaded(Fs...) -> Overloaded<Fs...>;

// n^2 and d(n^2)/dl for the base dispersion form.
std::pair<double, double> squared_index(const DispersionCoefficients& coeffs, double l, double T)
{
    const double l2 = l * l;
    return std::visit(
        Overloaded{
            [&](const SellmeierCoefficients& c) {
                double n2 = c.constant - c.ir_correction * l2;
                double d = -2.0 * c.ir_correction * l;
                for (const auto& t : c.terms) {
                    const double den = l2 - t.pole_um2;
                    n2 += t.strength * l2 / den;
                    d += -2.0 * t.strength * t.pole_um2 * l / (den * den);
                }
                return std::pair{n2, d};
            },
            [&](const TemperatureSellmeierCoefficients& c) {
                const double f = (T - 24.5) * (T + 570.82);
                const double p = c.a[1] + c.b[1] * f;
                const double q = c.a[2] + c.b[2] * f;
                const double r = c.a[3] + c.b[3] * f;
                const double den1 = l2 - q * q;
                const double den2 = l2 - c.a[4] * c.a[4];
                const double n2 = c.a[0] + c.b[0] * f + p / den1 + r / den2 - c.a[5] * l2;
                const double d = -2.0 * l * p / (den1 * den1) - 2.0 * l * r / (den2 * den2) - 2.0 * c.a[5] * l;
                return std::pair{n2, d};
            },
        },
        coeffs);
}

IndexValue evaluate(const Material& m, double l, double T)
{
    const auto [n2, dn2] = squared_index(m.dispersion, l, T);
    const double base = std::sqrt(n2);
    IndexValue v{base, dn2 / (2.0 * base)};

    const double dT = T - kReferenceTemperature.value;
    double power = 1.0;
    for (const auto& row : m.thermo_optic) {
        power *= dT;
        double term = 0.0;
        double dterm = 0.0;
        for (std::size_t k = 0; k < row.size(); ++k) {
            const double mk = static_cast<double>(k);
            term += row[k] * std::pow(l, -mk);
            dterm += -mk * row[k] * std::pow(l, -mk - 1.0);
        }
        v.n += power * term;
        v.slope += power * dterm;
    }
    return v;
}

double expansion_factor(const Material& m, double T)
{
    const double d = T - kReferenceTemperature.value;
    double factor = 1.0;
    double power = 1.0;
    for (double coeff : m.expansion) {
        power *= d;
        factor += coeff * power;
    }
    return factor;
}

}  // namespace

void check_wavelength(const Material& m, Micrometers wavelength)
{
    const double l = wavelength.value;
    if (!std::isfinite(l) || l < m.wavelength_um.min)
        throw RangeError(fmt::format("wavelength {} um is below the minimum {} um of material {}", l,
                                     m.wavelength_um.min, m.name));
    if (l > m.wavelength_um.max)
        throw RangeError(fmt::format("wavelength {} um is above the maximum {} um of material {}", l,
                                     m.wavelength_um.max, m.name));
}

void check_temperature(const Material& m, Celsius temperature)
{
    const double T = temperature.value;
    if (!std::isfinite(T) || T < m.temperature_C.min)
        throw RangeError(fmt::format("temperature {} C is below the minimum {} C of material {}", T,
                                     m.temperature_C.min, m.name));
    if (T > m.temperature_C.max)
        throw RangeError(fmt::format("temperature {} C is above the maximum {} C of material {}", T,
                                     m.temperature_C.max, m.name));
}

void check_range(const Material& m, Micrometers wavelength, Celsius temperature)
{
    check_wavelength(m, wavelength);
    check_temperature(m, temperature);
}

double refractive_index(const Material& m, Micrometers wavelength, Celsius temperature)
{
    check_range(m, wavelength, temperature);
    return evaluate(m, wavelength.value, temperature.value).n;
}

double index_slope(const Material& m, Micrometers wavelength, Celsius temperature)
{
    check_range(m, wavelength, temperature);
    return evaluate(m, wavelength.value, temperature.value).slope;
}

double group_index(const Material& m, Micrometers wavelength, Celsius temperature)
{
    check_range(m, wavelength, temperature);
    const auto v = evaluate(m, wavelength.value, temperature.value);
    return v.n - wavelength.value * v.slope;
}

double group_index_numeric(const Material& m, Micrometers wavelength, Celsius temperature, double step_um)
{
    check_range(m, wavelength, temperature);
    const double l = wavelength.value;
    const double T = temperature.value;
    const double slope = (evaluate(m, l + step_um, T).n - evaluate(m, l - step_um, T).n) / (2.0 * step_um);
    return evaluate(m, l, T).n - l * slope;
}

Millimeters thermal_expansion(const Material& m, Millimeters length, Celsius T0, double dT_C)
{
    check_temperature(m, T0);
    check_temperature(m, Celsius{T0.value + dT_C});
    const double ratio = expansion_factor(m, T0.value + dT_C) / expansion_factor(m, T0.value);
    return Millimeters{length.value * (ratio - 1.0)};
}

Sample at_temperature(const Sample& sample, Celsius temperature)
{
    Sample heated = sample;
    heated.length = sample.length +
                    thermal_expansion(sample.material, sample.length, sample.temperature,
                                      temperature.value - sample.temperature.value);
    heated.temperature = temperature;
    return heated;
}

void MaterialRegistry::add(Material material)
{
    const std::string name = material.name;
    if (!materials_.emplace(name, std::move(material)).second)
        throw ParseError(fmt::format("duplicate material name '{}'", name));
}

const Material& MaterialRegistry::at(std::string_view name) const
{
    const auto it = materials_.find(name);
    if (it == materials_.end()) throw LookupError(fmt::format("unknown material '{}'", name));
    return it->second;
}

bool MaterialRegistry::contains(std::string_view name) const { return materials_.find(name) != materials_.end(); }

std::vector<std::string> MaterialRegistry::names() const
{
    std::vector<std::string> out;
    for (const auto& [name, _] : materials_) out.push_back(name);
    return out;
}

namespace {

std::string where(const std::string& origin, const YAML::Node& node)
{
    const auto mark = node.Mark();
    if (mark.is_null()) return origin;
    return fmt::format("{}:{}", origin, mark.line + 1);
}

YAML::Node require(const YAML::Node& record, const char* field, const std::string& origin)
{
    const YAML::Node value = record[field];
    if (!value) throw ParseError(fmt::format("{}: material record is missing field '{}'", where(origin, record), field));
    return value;
}

template <class T>
T scalar(const YAML::Node& node, const std::string& context, const std::string& origin)
{
    try {
        return node.as<T>();
    } catch (const YAML::Exception&) {
        throw ParseError(fmt::format("{}: field '{}' has the wrong type", where(origin, node), context));
    }
}

std::vector<double> numbers(const YAML::Node& node, const std::string& context, const std::string& origin)
{
    if (!node.IsSequence())
        throw ParseError(fmt::format("{}: field '{}' must be a list of numbers", where(origin, node), context));
    std::vector<double> out;
    for (const auto& item : node) out.push_back(scalar<double>(item, context, origin));
    return out;
}

Interval interval(const YAML::Node& node, const std::string& context, const std::string& origin)
{
    const auto v = numbers(node, context, origin);
    if (v.size() != 2 || !(v[0] < v[1]))
        throw ParseError(fmt::format("{}: field '{}' must be an increasing pair", where(origin, node), context));
    return {v[0], v[1]};
}

void reject_unknown(const YAML::Node& node, const std::set<std::string>& allowed, const std::string& context,
                    const std::string& origin)
{
    for (const auto& kv : node) {
        const auto key = kv.first.as<std::string>();
        if (!allowed.count(key))
            throw ParseError(fmt::format("{}: unknown field '{}.{}'", where(origin, kv.first), context, key));
    }
}

Material parse_record(const YAML::Node& record, const std::string& origin)
{
    if (!record.IsMap()) throw ParseError(fmt::format("{}: material record must be a mapping", where(origin, record)));
    reject_unknown(record, {"name", "form", "coeffs", "thermo", "expansion", "range", "source"}, "material", origin);

    Material m;
    m.name = scalar<std::string>(require(record, "name", origin), "name", origin);
    const auto form = scalar<std::string>(require(record, "form", origin), "form", origin);
    const YAML::Node coeffs = require(record, "coeffs", origin);
    const std::string ctx = m.name + ".coeffs";

    if (form == "sellmeier") {
        reject_unknown(coeffs, {"constant", "terms", "ir_correction"}, ctx, origin);
        SellmeierCoefficients c;
        c.constant = scalar<double>(require(coeffs, "constant", origin), ctx + ".constant", origin);
        if (coeffs["ir_correction"])
            c.ir_correction = scalar<double>(coeffs["ir_correction"], ctx + ".ir_correction", origin);
        if (coeffs["terms"]) {
            for (const auto& term : coeffs["terms"]) {
                const auto pair = numbers(term, ctx + ".terms", origin);
                if (pair.size() != 2)
                    throw ParseError(fmt::format("{}: each of '{}.terms' needs [strength, pole]", where(origin, term), ctx));
                c.terms.push_back({pair[0], pair[1]});
            }
        }
        m.dispersion = c;
    } else if (form == "temperature-sellmeier") {
        reject_unknown(coeffs, {"a", "b"}, ctx, origin);
        const auto a = numbers(require(coeffs, "a", origin), ctx + ".a", origin);
        const auto b = numbers(require(coeffs, "b", origin), ctx + ".b", origin);
        if (a.size() != 6 || b.size() != 4)
            throw ParseError(fmt::format("{}: '{}' needs 6 'a' and 4 'b' values", where(origin, coeffs), ctx));
        TemperatureSellmeierCoefficients c;
        std::copy(a.begin(), a.end(), c.a);
        std::copy(b.begin(), b.end(), c.b);
        m.dispersion = c;
    } else {
        throw ParseError(fmt::format("{}: unknown form '{}' for material {}", where(origin, record), form, m.name));
    }

    const YAML::Node thermo = require(record, "thermo", origin);
    if (!thermo.IsSequence())
        throw ParseError(fmt::format("{}: field '{}.thermo' must be a list", where(origin, thermo), m.name));
    for (const auto& row : thermo) m.thermo_optic.push_back(numbers(row, m.name + ".thermo", origin));

    m.expansion = numbers(require(record, "expansion", origin), m.name + ".expansion", origin);

    const YAML::Node range = require(record, "range", origin);
    reject_unknown(range, {"wavelength_um", "temperature_C"}, m.name + ".range", origin);
    if (!range["wavelength_um"])
        throw ParseError(fmt::format("{}: material record is missing field 'range.wavelength_um'", where(origin, range)));
    if (!range["temperature_C"])
        throw ParseError(fmt::format("{}: material record is missing field 'range.temperature_C'", where(origin, range)));
    m.wavelength_um = interval(range["wavelength_um"], m.name + ".range.wavelength_um", origin);
    m.temperature_C = interval(range["temperature_C"], m.name + ".range.temperature_C", origin);

    m.source = scalar<std::string>(require(record, "source", origin), "source", origin);
    return m;
}

}  // namespace

MaterialRegistry parse_materials(std::string_view text, const std::string& origin)
{
    YAML::Node root;
    try {
        root = YAML::Load(std::string(text));
    } catch (const YAML::ParserException& e) {
        throw ParseError(fmt::format("{}:{}: {}", origin, e.mark.line + 1, e.msg));
    }
    if (!root || root.IsNull()) throw ParseError(fmt::format("{}: material file is empty", origin));
    const YAML::Node list = root["materials"];
    if (!list || !list.IsSequence() || list.size() == 0)
        throw ParseError(fmt::format("{}: no materials defined", origin));

    MaterialRegistry registry;
    for (const auto& record : list) {
        Material m = parse_record(record, origin);
        if (registry.contains(m.name))
            throw ParseError(fmt::format("{}: duplicate material name '{}'", where(origin, record), m.name));
        registry.add(std::move(m));
    }
    return registry;
}

MaterialRegistry load_materials(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw ParseError(fmt::format("cannot open material file '{}'", path.string()));
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_materials(buffer.str(), path.string());
}

std::filesystem::path data_directory()
{
    if (const char* env = std::getenv("HOMSIM_DATA_DIR"); env && *env) return env;
    return HOMSIM_DEFAULT_DATA_DIR;
}

std::filesystem::path default_materials_path() { return data_directory() / "materials.yaml"; }

}  // namespace homsim
