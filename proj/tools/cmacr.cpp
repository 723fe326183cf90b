// Command-line front end for the cMACr rate-region library.

#include <cstdio>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "cmacr/cli.hpp"

int main(int argc, char** argv)
{
    using namespace cmacr::cli;
    using nlohmann::json;

    CLI::App app{"Rate regions and outer bounds of the compound MAC with a relay"};
    std::string config_path, mode, out;
    std::uint64_t seed = 0;
    double grid_step = 0.0;
    unsigned threads = 0;
    auto* config_opt = app.add_option("--config", config_path, "Experiment config (JSON)");
    auto* mode_opt = app.add_option("--mode", mode, "gaussian-region | gaussian-sweep | dmc-search | verify");
    auto* out_opt = app.add_option("--out", out, "Output directory");
    auto* seed_opt = app.add_option("--seed", seed, "Random seed (u64)");
    auto* step_opt = app.add_option("--grid-step", grid_step, "Power-split grid step in (0, 0.5]");
    auto* threads_opt = app.add_option("--threads", threads, "Worker threads");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    }

    try {
        json doc = json::object();
        if (*config_opt) {
            std::ifstream in(config_path);
            if (!in) throw ConfigError("cannot read config '" + config_path + "'");
            try {
                doc = json::parse(in);
            } catch (const json::exception& e) {
                throw ConfigError("config '" + config_path + "': " + e.what());
            }
        }
        if (*mode_opt) doc["mode"] = mode;
        if (*out_opt) doc["out"] = out;
        if (*seed_opt) doc["seed"] = seed;
        if (*step_opt) doc["grid_step"] = grid_step;
        if (*threads_opt) doc["threads"] = threads;

        const auto cfg = parse_config(doc);
        const auto result = run(cfg);
        for (const auto& f : result.files) std::cout << f << '\n';
        if (result.exit_code == kExitInvariant)
            std::cerr << "invariant check failed; see verify_report.json\n";
        return result.exit_code;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const OutputError& e) {
        std::cerr << "output error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitConfig;
    }
}
