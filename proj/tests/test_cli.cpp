#include <doctest.h>

#include <array>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <sys/wait.h>

#include <json.hpp>

#include "cmacr/cli.hpp"

using namespace cmacr;
using namespace cmacr::cli;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string source_dir()
{
    const char* d = std::getenv("CMACR_SOURCE_DIR");
    return d ? d : ".";
}

fs::path scratch(const std::string& name)
{
    auto p = fs::temp_directory_path() / ("cmacr_test_cli_" + name);
    fs::remove_all(p);
    return p;
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

json load(const std::string& rel)
{
    std::ifstream in(source_dir() + "/" + rel);
    REQUIRE(in);
    return json::parse(in);
}

json orthogonal_channel_json() { return load("tools/configs/orthogonal_relay_channel.json"); }

/// Runs the command-line binary and returns its exit status, or -1 when the
/// binary is not available.
int run_binary(const std::string& args)
{
    const char* bin = std::getenv("CMACR_CLI");
    if (!bin) return -1;
    const std::string cmd = std::string("\"") + bin + "\" " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::vector<std::vector<std::string>> read_csv(const fs::path& p)
{
    std::vector<std::vector<std::string>> rows;
    std::istringstream in(slurp(p));
    std::string line;
    while (std::getline(in, line)) {
        std::vector<std::string> cells;
        std::string cell;
        std::istringstream ls(line);
        while (std::getline(ls, cell, ',')) cells.push_back(cell);
        rows.push_back(cells);
    }
    return rows;
}

}  // namespace

TEST_CASE("parse_config rejects bad configurations")
{
    CHECK_THROWS_AS(parse_config(json::array()), ConfigError);
    CHECK_THROWS_AS(parse_config(json{{"p1_db", 5}}), ConfigError);
    CHECK_THROWS_AS(parse_config(json{{"mode", "fig9"}}), ConfigError);
    CHECK_THROWS_AS(parse_config(json{{"mode", "gaussian-region"}, {"colour", 1}}), ConfigError);
    CHECK_THROWS_AS(parse_config(json{{"mode", "gaussian-region"}, {"grid_step", 0.0}}), ConfigError);
    CHECK_THROWS_AS(parse_config(json{{"mode", "gaussian-region"}, {"grid_step", 0.6}}), ConfigError);
    CHECK_THROWS_AS(parse_config(json{{"mode", "gaussian-region"}, {"eta_sq", -1}}), ConfigError);
    CHECK_THROWS_AS(parse_config(json{{"mode", "gaussian-region"}, {"strategy", "AF"}}), ConfigError);
    CHECK_THROWS_AS(parse_config(json{{"mode", "gaussian-region"}, {"threads", 0}}), ConfigError);
    CHECK_THROWS_AS(parse_config(json{{"mode", "gaussian-region"}, {"p1_db", "loud"}}), ConfigError);
    CHECK_THROWS_AS(parse_config(json{{"mode", "gaussian-sweep"}, {"p_db_list", json::array()}}), ConfigError);
    CHECK_THROWS_AS(parse_config(json{{"mode", "gaussian-sweep"}, {"gamma_sq", {1, 5}}}), ConfigError);
    CHECK_THROWS_AS(parse_config(json{{"mode", "dmc-search"}}), ConfigError);
    CHECK_THROWS_AS(parse_config(json{{"mode", "dmc-search"}, {"channel", "/nonexistent/channel.json"}}), ConfigError);
    CHECK_THROWS_AS(parse_config(json{{"mode", "dmc-search"}, {"channel", {{"card_x", {2, 2, 2}}}}}), ConfigError);
    CHECK_THROWS_AS(parse_config(json{{"mode", "dmc-search"}, {"channel", orthogonal_channel_json()}, {"proposition", "af"}}),
                    ConfigError);
    CHECK_THROWS_AS(parse_config(json{{"mode", "dmc-search"}, {"channel", orthogonal_channel_json()}, {"budget", 0}}),
                    ConfigError);
    CHECK_THROWS_AS(parse_config(json{{"mode", "verify"}, {"mutant", "flip_everything"}}), ConfigError);
}

TEST_CASE("parse_config defaults and overrides")
{
    const auto fig2 = parse_config(load("tools/configs/fig2.json"));
    CHECK(fig2.mode == Mode::gaussian_region);
    CHECK(fig2.gamma_sq == std::vector<double>{1.0, 5.0});
    CHECK(fig2.strategies.size() == 3);
    CHECK(fig2.eta_sq == 10.0);

    const auto sweep = parse_config(json{{"mode", "gaussian-sweep"}});
    CHECK(sweep.gamma_sq == std::vector<double>{1.0});
    CHECK(sweep.p_db_list.size() == 31);
    CHECK(sweep.p_db_list.front() == 0.0);
    CHECK(sweep.p_db_list.back() == 30.0);

    const auto one = parse_config(json{{"mode", "gaussian-region"}, {"gamma_sq", 2}, {"strategy", "CF"}});
    CHECK(one.gamma_sq == std::vector<double>{2.0});
    REQUIRE(one.strategies.size() == 1);
    CHECK(one.strategies.front() == gaussian::Strategy::cf);

    const auto ch = one.channel_for(4.0);
    CHECK(ch.gamma == doctest::Approx(2.0));
    CHECK(ch.eta == doctest::Approx(std::sqrt(10.0)));
    CHECK(ch.p1 == doctest::Approx(std::pow(10.0, 0.5)));
}

TEST_CASE("unwritable output path is reported with the path")
{
    const auto blocker = scratch("blocker");
    { std::ofstream(blocker.string()) << "x"; }
    auto cfg = parse_config(json{{"mode", "gaussian-sweep"}, {"p_db_list", {0}}, {"out", (blocker / "sub").string()}});
    try {
        run(cfg);
        FAIL("expected OutputError");
    } catch (const OutputError& e) {
        CHECK(std::string(e.what()).find(blocker.string()) != std::string::npos);
    }
    fs::remove_all(blocker);
}

TEST_CASE("fig2 run writes frontiers and a summary; repeated runs are byte identical")
{
    auto doc = load("tools/configs/fig2.json");
    const auto a = scratch("fig2a"), b = scratch("fig2b");
    doc["out"] = a.string();
    const auto ra = run(parse_config(doc));
    doc["out"] = b.string();
    const auto rb = run(parse_config(doc));
    CHECK(ra.exit_code == kExitOk);
    REQUIRE(ra.files.size() == 7);
    for (std::size_t i = 0; i < ra.files.size(); ++i) {
        const auto name = fs::path(ra.files[i]).filename();
        CHECK(slurp(a / name) == slurp(b / name));
    }
    CHECK(fs::exists(a / "fig2_df_g1.csv"));
    CHECK(fs::exists(a / "fig2_outer_g5.csv"));
    const auto rows = read_csv(a / "fig2_cf_g1.csv");
    REQUIRE(rows.size() > 2);
    CHECK(rows.front() == std::vector<std::string>{"theta", "r1", "r2", "r3", "provenance"});

    // every frontier point lies in the region its provenance names
    const auto cfg = parse_config(doc);
    for (double g : cfg.gamma_sq)
        for (auto s : cfg.strategies) {
            const auto ch = cfg.channel_for(g);
            const auto cloud = gaussian::strategy_cloud(ch, s, cfg.cloud_options());
            for (const auto& f : region::frontier_slice(cloud)) {
                const auto reg = gaussian::region_from_provenance(ch, f.source);
                CHECK(region::contains(reg, {f.r1, f.r2, f.r3}));
            }
        }

    const auto summary = json::parse(slurp(a / "fig2_summary.json"));
    REQUIRE(summary["results"].size() == 2);
    for (const auto& e : summary["results"]) {
        CHECK(e["symmetric_rate"]["DF"].get<double>() <= e["symmetric_rate"]["OUTER"].get<double>() + 1e-9);
        CHECK(e["symmetric_rate"]["CF"].get<double>() <= e["symmetric_rate"]["OUTER"].get<double>() + 1e-9);
    }
    fs::remove_all(a);
    fs::remove_all(b);
}

TEST_CASE("fig3 rows agree with a direct symmetric-rate computation")
{
    const auto dir = scratch("fig3");
    auto cfg = parse_config(json{{"mode", "gaussian-sweep"}, {"p_db_list", {0, 7, 30}}, {"out", dir.string()}});
    const auto r = run(cfg);
    CHECK(r.exit_code == kExitOk);
    const auto rows = read_csv(dir / "fig3.csv");
    REQUIRE(rows.size() == 4);
    CHECK(rows[0] == std::vector<std::string>{"p_db", "df_rate", "cf_rate", "outer_rate"});
    const std::array<gaussian::Strategy, 3> order{gaussian::Strategy::df, gaussian::Strategy::cf, gaussian::Strategy::outer};
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const double p_db = std::stod(rows[i][0]);
        auto ch = cfg.channel_for(1.0);
        ch.p1 = ch.p2 = ch.p3 = gaussian::db_to_linear(p_db);
        for (std::size_t k = 0; k < 3; ++k) {
            const double direct = region::max_symmetric_rate(gaussian::strategy_cloud(ch, order[k], cfg.cloud_options()));
            CHECK(std::abs(std::stod(rows[i][k + 1]) - direct) < 1e-9);
        }
    }
    const auto sweep = read_csv(dir / "fig3_sweep.csv");
    CHECK(sweep.size() == 10);
    CHECK(sweep[0] == std::vector<std::string>{"p_db", "strategy", "rate"});

    // outer-DF gap is larger at high power than at low power
    const double low_gap = std::stod(rows[1][3]) - std::stod(rows[1][1]);
    const double high_gap = std::stod(rows[3][3]) - std::stod(rows[3][1]);
    CHECK(low_gap < high_gap);
    fs::remove_all(dir);
}

TEST_CASE("dmc-search writes cloud, frontier and summary deterministically")
{
    const auto a = scratch("dmca"), b = scratch("dmcb");
    json doc{{"mode", "dmc-search"}, {"channel", orthogonal_channel_json()}, {"proposition", "df"}, {"budget", 120},
             {"seed", 5}};
    doc["out"] = a.string();
    const auto ra = run(parse_config(doc));
    doc["out"] = b.string();
    doc["threads"] = 3;
    run(parse_config(doc));
    REQUIRE(ra.files.size() == 3);
    for (const auto& f : ra.files) {
        const auto name = fs::path(f).filename();
        CHECK(slurp(a / name) == slurp(b / name));
    }
    const auto summary = json::parse(slurp(a / "dmc_df_summary.json"));
    CHECK(summary["markov"].get<bool>());
    CHECK(summary["points"].get<std::size_t>() > 0);
    CHECK(read_csv(a / "dmc_df_cloud.csv").front() ==
          std::vector<std::string>{"theta", "r1", "r2", "r3", "provenance"});

    // outer search on a channel with a cross link is a configuration error
    json cross{{"card_x", {2, 2, 1}}, {"card_y", {2, 1, 1}}, {"trans", {1, 0, 0, 1, 1, 0, 0, 1}}};
    json bad{{"mode", "dmc-search"}, {"channel", cross}, {"proposition", "outer"}, {"budget", 5}, {"out", a.string()}};
    CHECK_THROWS_AS(run(parse_config(bad)), ConfigError);
    fs::remove_all(a);
    fs::remove_all(b);
}

TEST_CASE("verify passes on the library and catches the mutant")
{
    const auto dir = scratch("verify");
    const auto ok = run(parse_config(json{{"mode", "verify"}, {"draws", 20}, {"out", dir.string()}}));
    CHECK(ok.exit_code == kExitOk);
    const auto report = json::parse(slurp(dir / "verify_report.json"));
    CHECK(report["passed"].get<bool>());
    bool saw_markov = false;
    for (const auto& s : report["suites"]) {
        CHECK(s["passed"].get<bool>());
        if (s["name"] == "dmc_markov_rejection") saw_markov = s["checks"].get<int>() >= 2;
    }
    CHECK(saw_markov);

    const auto bad = run(parse_config(json{{"mode", "verify"}, {"draws", 20}, {"mutant", "df_sum_max"}, {"out", dir.string()}}));
    CHECK(bad.exit_code == kExitInvariant);
    const auto mreport = json::parse(slurp(dir / "verify_report.json"));
    CHECK_FALSE(mreport["passed"].get<bool>());
    bool has_counterexample = false;
    for (const auto& s : mreport["suites"])
        if (s["name"] == "gaussian_df_within_outer") {
            CHECK_FALSE(s["passed"].get<bool>());
            REQUIRE(!s["failures"].empty());
            has_counterexample = s["failures"][0].contains("counterexample");
        }
    CHECK(has_counterexample);
    fs::remove_all(dir);
}

TEST_CASE("command-line exit codes")
{
    if (!std::getenv("CMACR_CLI")) return;
    const auto dir = scratch("exit");
    CHECK(run_binary("--mode verify --out " + dir.string()) == kExitOk);
    CHECK(run_binary("--mode nonsense") == kExitConfig);
    CHECK(run_binary("--config /nonexistent.json") == kExitConfig);
    CHECK(run_binary("--mode gaussian-region --grid-step 0") == kExitConfig);
    CHECK(run_binary("--bogus-flag") == kExitConfig);

    const auto cfg = dir / "mutant.json";
    { std::ofstream(cfg.string()) << json{{"mode", "verify"}, {"mutant", "df_sum_max"}, {"draws", 10}}.dump(); }
    CHECK(run_binary("--config " + cfg.string() + " --out " + dir.string()) == kExitInvariant);

    const auto blocker = dir / "file";
    { std::ofstream(blocker.string()) << "x"; }
    CHECK(run_binary("--mode gaussian-sweep --out " + (blocker / "x").string()) == kExitConfig);
    fs::remove_all(dir);
}
