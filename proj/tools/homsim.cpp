#include <optional>
#include <iostream>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "homsim/commands.hpp"
#include "homsim/errors.hpp"

namespace {

struct Options {
    std::string config;
    std::string preset;
    std::string out;
    std::optional<std::uint64_t> seed;
};

homsim::RunConfig load(const Options& o, const std::string& subcommand)
{
    if (o.config.empty() == o.preset.empty()) throw homsim::ConfigError("give exactly one of --config or --preset");
    homsim::RunConfig cfg = homsim::load_run_config(o.preset.empty() ? std::filesystem::path(o.config) : homsim::preset_path(o.preset));
    if (!subcommand.empty() && subcommand != homsim::to_string(cfg.command))
        throw homsim::ConfigError(fmt::format("config selects '{}' but the '{}' command was requested",
                                              homsim::to_string(cfg.command), subcommand));
    if (o.seed) cfg.seed = *o.seed;
    if (!o.out.empty()) cfg.output_dir = o.out;
    return cfg;
}

void print_summary(const nlohmann::json& summary) { std::cout << summary.dump(2) << '\n'; }

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"HOM interferometry group-index simulator"};
    app.require_subcommand(0, 1);
    Options opts;
    const auto add_flags = [&opts](CLI::App* a) {
        a->add_option("--config", opts.config, "Run config file");
        a->add_option("--preset", opts.preset, "Shipped preset name");
        a->add_option("--out", opts.out, "Output directory");
        a->add_option("--seed", opts.seed, "Random seed");
    };
    add_flags(&app);
    for (const char* name : {"spectrum", "dip", "measure", "sweep"}) {
        CLI::App* sub = app.add_subcommand(name, fmt::format("Run the {} command", name));
        add_flags(sub);
    }
    bool list = false;
    app.add_flag("--list-presets", list, "List shipped presets and exit");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (list) {
            for (const auto& name : homsim::preset_names()) std::cout << name << '\n';
            return 0;
        }
        std::string subcommand;
        if (!app.get_subcommands().empty()) subcommand = app.get_subcommands().front()->get_name();
        const homsim::RunConfig cfg = load(opts, subcommand);
        print_summary(homsim::execute(cfg, cfg.output_dir));
        return 0;
    } catch (const homsim::ProtocolFault& e) {
        std::cerr << "error: " << e.what() << "\nstate: " << e.state_dump() << '\n';
        return homsim::exit_status(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return homsim::exit_status(e);
    }
}
