#include "homsim/config.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <yaml-cpp/yaml.h>

#include "homsim/errors.hpp"

namespace homsim {

namespace {

// Field access with the dotted path of the node and its source line in every error.
class Section {
public:
    Section(YAML::Node node, std::string path, const std::string& origin)
        : node_(std::move(node)), path_(std::move(path)), origin_(origin)
    {
        if (!node_.IsMap()) throw ConfigError(fmt::format("{}: '{}' must be a mapping", where(node_), path_));
    }

    void allow(std::initializer_list<const char*> keys) const
    {
        const std::set<std::string> allowed(keys.begin(), keys.end());
        for (const auto& kv : node_) {
            const auto key = kv.first.as<std::string>();
            if (!allowed.count(key)) throw ConfigError(fmt::format("{}: unknown key '{}'", where(kv.first), join(key)));
        }
    }

    bool has(const char* key) const { return static_cast<bool>(node_[key]); }

    YAML::Node raw(const char* key) const
    {
        const YAML::Node value = node_[key];
        if (!value) throw ConfigError(fmt::format("{}: missing required key '{}'", where(node_), join(key)));
        return value;
    }

    Section child(const char* key) const { return Section(raw(key), join(key), origin_); }

    template <class T>
    T get(const char* key) const
    {
        return convert<T>(raw(key), join(key));
    }

    template <class T>
    void read(const char* key, T& target) const
    {
        if (has(key)) target = get<T>(key);
    }

    template <class T>
    T convert(const YAML::Node& node, const std::string& path) const
    {
        try {
            return node.as<T>();
        } catch (const YAML::Exception&) {
            throw ConfigError(fmt::format("{}: '{}' has the wrong type", where(node), path));
        }
    }

    std::vector<YAML::Node> list(const char* key) const
    {
        const YAML::Node value = raw(key);
        if (!value.IsSequence()) throw ConfigError(fmt::format("{}: '{}' must be a list", where(value), join(key)));
        return {value.begin(), value.end()};
    }

    std::string join(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
    std::string where(const YAML::Node& node) const
    {
        const auto mark = node.Mark();
        return mark.is_null() ? origin_ : fmt::format("{}:{}", origin_, mark.line + 1);
    }
    const std::string& origin() const { return origin_; }
    const YAML::Node& node() const { return node_; }

    [[noreturn]] void fail(const char* key, const std::string& message) const
    {
        const YAML::Node value = node_[key];
        throw ConfigError(fmt::format("{}: '{}' {}", where(value ? value : node_), join(key), message));
    }

private:
    YAML::Node node_;
    std::string path_;
    const std::string& origin_;
};

template <class T>
void require_positive(const Section& s, const char* key, T value)
{
    if (!(value > T{0})) s.fail(key, "must be positive");
}

Arm parse_arm(const Section& s, const char* key)
{
    const auto v = s.get<std::string>(key);
    if (v == "one") return Arm::One;
    if (v == "two") return Arm::Two;
    s.fail(key, fmt::format("must be 'one' or 'two' (got '{}')", v));
}

SampleConfig parse_sample(const Section& s, SampleConfig out)
{
    s.allow({"label", "material", "length_mm", "temperature_C", "arm", "displaces_air"});
    out.material = s.get<std::string>("material");
    out.length_mm = s.get<double>("length_mm");
    require_positive(s, "length_mm", out.length_mm);
    s.read("temperature_C", out.temperature_C);
    s.read("displaces_air", out.displaces_air);
    if (s.has("arm")) out.arm = parse_arm(s, "arm");
    out.label = s.has("label") ? s.get<std::string>("label") : out.material;
    return out;
}

FilterConfig parse_filter(const Section& s)
{
    s.allow({"center_um", "fwhm_nm", "passes"});
    FilterConfig f;
    f.center_um = s.get<double>("center_um");
    f.fwhm_nm = s.get<double>("fwhm_nm");
    s.read("passes", f.passes);
    require_positive(s, "fwhm_nm", f.fwhm_nm);
    if (f.passes != 1 && f.passes != 2) s.fail("passes", "must be 1 or 2");
    return f;
}

void parse_source(const Section& s, SourceConfig& out)
{
    s.allow({"material", "length_mm", "grating_period_um", "pump_wavelength_um", "temperature_C"});
    s.read("material", out.material);
    s.read("length_mm", out.length_mm);
    s.read("grating_period_um", out.grating_period_um);
    s.read("pump_wavelength_um", out.pump_wavelength_um);
    require_positive(s, "length_mm", out.length_mm);
    require_positive(s, "grating_period_um", out.grating_period_um);
    require_positive(s, "pump_wavelength_um", out.pump_wavelength_um);
    if (s.has("temperature_C")) {
        const YAML::Node t = s.raw("temperature_C");
        const auto text = s.convert<std::string>(t, s.join("temperature_C"));
        if (text == "flux-max") {
            out.temperature.mode = SourceTemperature::Mode::FluxMax;
        } else if (text == "qpm") {
            out.temperature.mode = SourceTemperature::Mode::Qpm;
        } else {
            try {
                out.temperature.value_C = t.as<double>();
            } catch (const YAML::Exception&) {
                s.fail("temperature_C", "must be 'flux-max', 'qpm' or a number");
            }
            out.temperature.mode = SourceTemperature::Mode::Fixed;
        }
    }
}

void parse_detector(const Section& s, DetectorModel& d)
{
    s.allow({"pair_rate_hz", "efficiency_1", "efficiency_2", "dark_rate_1_hz", "dark_rate_2_hz", "coincidence_window_s",
             "integration_time_s", "drift"});
    s.read("pair_rate_hz", d.pair_rate_hz);
    s.read("efficiency_1", d.efficiency_1);
    s.read("efficiency_2", d.efficiency_2);
    s.read("dark_rate_1_hz", d.dark_rate_1_hz);
    s.read("dark_rate_2_hz", d.dark_rate_2_hz);
    s.read("coincidence_window_s", d.coincidence_window_s);
    s.read("integration_time_s", d.integration_time_s);
    if (s.has("drift")) {
        const Section drift = s.child("drift");
        drift.allow({"relative_amplitude", "period_s", "random_walk_per_sqrt_s"});
        drift.read("relative_amplitude", d.drift.relative_amplitude);
        drift.read("period_s", d.drift.period_s);
        drift.read("random_walk_per_sqrt_s", d.drift.random_walk_per_sqrt_s);
    }
    try {
        d.validate();
    } catch (const ConfigError& e) {
        throw ConfigError(fmt::format("{}: {}", s.where(s.node()), e.what()));
    }
}

void parse_dip(const Section& s, DipConfig& out)
{
    s.allow({"cases", "sample"});
    const auto cases = s.list("cases");
    if (cases.empty()) s.fail("cases", "must list at least one bandwidth case");
    for (std::size_t k = 0; k < cases.size(); ++k) {
        const Section c(cases[k], s.join(fmt::format("cases[{}]", k)), s.origin());
        c.allow({"label", "source_length_mm", "filter", "half_window_um", "points"});
        DipCase dc;
        dc.label = c.get<std::string>("label");
        if (c.has("source_length_mm")) {
            dc.source_length_mm = c.get<double>("source_length_mm");
            require_positive(c, "source_length_mm", *dc.source_length_mm);
        }
        if (c.has("filter")) dc.filter = parse_filter(c.child("filter"));
        c.read("half_window_um", dc.half_window_um);
        c.read("points", dc.points);
        if (dc.half_window_um < 0.0) c.fail("half_window_um", "must be >= 0");
        if (dc.points < 11) c.fail("points", "must be at least 11");
        out.cases.push_back(dc);
    }
    if (s.has("sample")) out.sample = parse_sample(s.child("sample"), SampleConfig{});
}

void parse_measure(const Section& s, MeasureConfig& out)
{
    s.allow({"samples", "alternate_lengths_mm", "use_alternate_lengths", "reference_half_width_um",
             "coarse_half_width_um", "coarse_step_um", "fine_half_width_um", "fine_step_um", "theory_wavelength_um",
             "runs"});
    const auto samples = s.list("samples");
    if (samples.empty()) s.fail("samples", "must list at least one sample");
    for (std::size_t k = 0; k < samples.size(); ++k)
        out.samples.push_back(
            parse_sample(Section(samples[k], s.join(fmt::format("samples[{}]", k)), s.origin()), SampleConfig{}));
    if (s.has("alternate_lengths_mm")) {
        const Section alt = s.child("alternate_lengths_mm");
        for (const auto& kv : alt.node()) {
            const auto label = kv.first.as<std::string>();
            const auto known = std::any_of(out.samples.begin(), out.samples.end(),
                                           [&](const SampleConfig& c) { return c.label == label; });
            if (!known) throw ConfigError(fmt::format("{}: unknown key '{}'", alt.where(kv.first), alt.join(label)));
            out.alternate_lengths_mm[label] = alt.get<double>(label.c_str());
            require_positive(alt, label.c_str(), out.alternate_lengths_mm[label]);
        }
    }
    s.read("use_alternate_lengths", out.use_alternate_lengths);
    s.read("reference_half_width_um", out.reference_half_width_um);
    s.read("coarse_half_width_um", out.coarse_half_width_um);
    s.read("coarse_step_um", out.coarse_step_um);
    s.read("fine_half_width_um", out.fine_half_width_um);
    s.read("fine_step_um", out.fine_step_um);
    s.read("theory_wavelength_um", out.theory_wavelength_um);
    s.read("runs", out.runs);
    require_positive(s, "reference_half_width_um", out.reference_half_width_um);
    require_positive(s, "coarse_half_width_um", out.coarse_half_width_um);
    require_positive(s, "coarse_step_um", out.coarse_step_um);
    require_positive(s, "fine_half_width_um", out.fine_half_width_um);
    require_positive(s, "fine_step_um", out.fine_step_um);
    require_positive(s, "runs", out.runs);
}

void parse_sweep(const Section& s, SweepConfig& out)
{
    s.allow({"mode", "sample", "start_C", "stop_C", "step_C", "dwell_s", "plateaus", "max_moves", "bracket_step_um",
             "wavelength_um", "flank", "oven", "travel"});
    const auto mode = s.get<std::string>("mode");
    if (mode == "calibration") out.kind = SweepKind::Calibration;
    else if (mode == "stability") out.kind = SweepKind::Stability;
    else if (mode == "linear") out.kind = SweepKind::Linear;
    else if (mode == "compensated") out.kind = SweepKind::Compensated;
    else s.fail("mode", fmt::format("must be calibration, stability, linear or compensated (got '{}')", mode));

    if (s.has("sample")) {
        SampleConfig base = out.sample;
        base.displaces_air = false;
        out.sample = parse_sample(s.child("sample"), base);
    }
    auto& st = out.settings;
    s.read("start_C", st.start_C);
    s.read("stop_C", st.stop_C);
    s.read("step_C", st.step_C);
    s.read("dwell_s", st.dwell_s);
    s.read("plateaus", st.plateaus);
    s.read("max_moves", st.max_moves);
    s.read("bracket_step_um", st.bracket_step_um);
    if (s.has("wavelength_um")) st.wavelength = Micrometers{s.get<double>("wavelength_um")};
    if (st.stop_C < st.start_C) s.fail("stop_C", "must not precede start_C");

    if (s.has("flank")) {
        const Section f = s.child("flank");
        f.allow({"start_offset_um", "end_offset_um", "step_um", "search_half_width_um", "search_step_um"});
        f.read("start_offset_um", out.flank.start_offset_um);
        f.read("end_offset_um", out.flank.end_offset_um);
        f.read("step_um", out.flank.step_um);
        f.read("search_half_width_um", out.flank.search_half_width_um);
        f.read("search_step_um", out.flank.search_step_um);
        if (!(out.flank.end_offset_um > out.flank.start_offset_um)) f.fail("end_offset_um", "must exceed start_offset_um");
    }
    if (s.has("oven")) {
        const Section o = s.child("oven");
        o.allow({"resolution_C", "jitter_C"});
        o.read("resolution_C", out.oven_resolution_C);
        o.read("jitter_C", out.oven_jitter_C);
        require_positive(o, "resolution_C", out.oven_resolution_C);
    }
    if (s.has("travel")) {
        const Section t = s.child("travel");
        t.allow({"before_um", "after_um"});
        t.read("before_um", out.travel_before_um);
        t.read("after_um", out.travel_after_um);
    }
}

Command parse_command(const Section& s)
{
    const auto v = s.get<std::string>("command");
    if (v == "spectrum") return Command::Spectrum;
    if (v == "dip") return Command::Dip;
    if (v == "measure") return Command::Measure;
    if (v == "sweep") return Command::Sweep;
    s.fail("command", fmt::format("must be spectrum, dip, measure or sweep (got '{}')", v));
}

}  // namespace

std::string_view to_string(Command command)
{
    switch (command) {
    case Command::Spectrum: return "spectrum";
    case Command::Dip: return "dip";
    case Command::Measure: return "measure";
    case Command::Sweep: return "sweep";
    }
    return "unknown";
}

std::string_view to_string(SweepKind kind)
{
    switch (kind) {
    case SweepKind::Calibration: return "calibration";
    case SweepKind::Stability: return "stability";
    case SweepKind::Linear: return "linear";
    case SweepKind::Compensated: return "compensated";
    }
    return "unknown";
}

RunConfig parse_run_config(std::string_view text, const std::string& origin)
{
    YAML::Node root;
    try {
        root = YAML::Load(std::string(text));
    } catch (const YAML::ParserException& e) {
        throw ParseError(fmt::format("{}:{}: {}", origin, e.mark.line + 1, e.msg));
    }
    if (!root || root.IsNull()) throw ConfigError(fmt::format("{}: run config is empty", origin));

    const Section s(root, "", origin);
    s.allow({"schema_version", "command", "materials", "seed", "output_dir", "source", "grid", "detector", "visibility",
             "spectrum", "dip", "measure", "sweep"});

    RunConfig cfg;
    cfg.text = std::string(text);
    cfg.schema_version = s.get<int>("schema_version");
    if (cfg.schema_version != kSchemaVersion)
        s.fail("schema_version", fmt::format("must be {} (got {})", kSchemaVersion, cfg.schema_version));
    cfg.command = parse_command(s);
    if (s.has("materials")) cfg.materials_path = s.get<std::string>("materials");
    s.read("seed", cfg.seed);
    if (s.has("output_dir")) cfg.output_dir = s.get<std::string>("output_dir");
    s.read("visibility", cfg.visibility);
    if (!(cfg.visibility > 0.0 && cfg.visibility <= 1.0)) s.fail("visibility", "must lie in (0, 1]");

    if (s.has("source")) parse_source(s.child("source"), cfg.source);
    if (s.has("grid")) {
        const Section g = s.child("grid");
        g.allow({"points", "span_factor"});
        g.read("points", cfg.grid.points);
        g.read("span_factor", cfg.grid.span_factor);
        if (cfg.grid.points < 1024 || cfg.grid.points % 2 != 0) g.fail("points", "must be even and at least 1024");
        if (cfg.grid.span_factor < 3.0) g.fail("span_factor", "must be at least 3");
    }
    if (s.has("detector")) parse_detector(s.child("detector"), cfg.detector);

    if (s.has("spectrum")) {
        const Section sp = s.child("spectrum");
        sp.allow({"lengths_mm"});
        for (const auto& item : sp.list("lengths_mm")) {
            const double v = sp.convert<double>(item, sp.join("lengths_mm"));
            if (!(v > 0.0)) sp.fail("lengths_mm", "entries must be positive");
            cfg.spectrum.lengths_mm.push_back(v);
        }
    }
    if (s.has("dip")) parse_dip(s.child("dip"), cfg.dip);
    if (s.has("measure")) parse_measure(s.child("measure"), cfg.measure);
    if (s.has("sweep")) parse_sweep(s.child("sweep"), cfg.sweep);

    switch (cfg.command) {
    case Command::Spectrum:
        if (cfg.spectrum.lengths_mm.empty()) cfg.spectrum.lengths_mm.push_back(cfg.source.length_mm);
        break;
    case Command::Dip:
        if (!s.has("dip")) throw ConfigError(fmt::format("{}: missing required key 'dip'", origin));
        break;
    case Command::Measure:
        if (!s.has("measure")) throw ConfigError(fmt::format("{}: missing required key 'measure'", origin));
        break;
    case Command::Sweep:
        if (!s.has("sweep")) throw ConfigError(fmt::format("{}: missing required key 'sweep'", origin));
        break;
    }
    return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw ConfigError(fmt::format("cannot open run config '{}'", path.string()));
    std::stringstream buffer;
    buffer << in.rdbuf();
    RunConfig cfg = parse_run_config(buffer.str(), path.string());
    if (!cfg.materials_path.empty() && cfg.materials_path.is_relative())
        cfg.materials_path = path.parent_path() / cfg.materials_path;
    return cfg;
}

std::filesystem::path preset_path(std::string_view name)
{
    const auto path = data_directory() / "presets" / (std::string(name) + ".yaml");
    if (!std::filesystem::exists(path)) {
        std::string known;
        for (const auto& n : preset_names()) known += " " + n;
        throw LookupError(fmt::format("unknown preset '{}'; available:{}", name, known));
    }
    return path;
}

std::vector<std::string> preset_names()
{
    std::vector<std::string> out;
    const auto dir = data_directory() / "presets";
    if (!std::filesystem::is_directory(dir)) return out;
    for (const auto& entry : std::filesystem::directory_iterator(dir))
        if (entry.path().extension() == ".yaml") out.push_back(entry.path().stem().string());
    std::sort(out.begin(), out.end());
    return out;
}

std::string config_hash(const RunConfig& config)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    const auto mix = [&h](std::string_view bytes) {
        for (unsigned char c : bytes) {
            h ^= c;
            h *= 0x100000001b3ULL;
        }
    };
    mix(config.text);
    mix(fmt::format("\nseed={}", config.seed));
    return fmt::format("{:016x}", h);
}

}  // namespace homsim
