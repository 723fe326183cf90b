#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "cmacr/dmc.hpp"
#include "cmacr/gaussian.hpp"

namespace cmacr::cli {

/// Invalid or incomplete configuration. Maps to exit status 2.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Output could not be written. The message names the offending path.
class OutputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline constexpr int kExitOk = 0;
inline constexpr int kExitInvariant = 1;
inline constexpr int kExitConfig = 2;

enum class Mode { gaussian_region, gaussian_sweep, dmc_search, verify };

std::string to_string(Mode m);
Mode mode_from_string(const std::string& s);

/**
 * One experiment. Powers are in dB and gains are squared linear values; the
 * conversion to a GaussianChannel happens in `channel_for`.
 *
 * JSON keys match the field names. `gamma_sq` and `strategy` accept a single
 * value or a list. Unknown keys are rejected.
 */
struct ExperimentConfig {
    Mode mode = Mode::gaussian_region;

    double p1_db = 5.0;
    double p2_db = 5.0;
    double p3_db = 5.0;
    std::vector<double> gamma_sq{1.0, 5.0};
    double eta_sq = 10.0;
    std::vector<gaussian::Strategy> strategies{gaussian::Strategy::df, gaussian::Strategy::cf,
                                               gaussian::Strategy::outer};
    double grid_step = 0.05;
    int halvings = 6;
    int directions = region::kDefaultDirections;
    std::vector<double> p_db_list;
    gaussian::SumRateReading reading = gaussian::SumRateReading::symmetric;

    std::uint64_t seed = 1;
    unsigned threads = 1;
    std::string out = ".";

    std::optional<nlohmann::json> channel;
    dmc::Builder proposition = dmc::Builder::decode_forward;
    std::size_t budget = 2000;
    dmc::LinkCapacities link_caps{};
    std::size_t card_aux = 2;
    std::string output = "Y1";

    std::string mutant;
    int draws = 100;

    gaussian::CloudOptions cloud_options() const;
    gaussian::GaussianChannel channel_for(double gamma_sq_value) const;
};

/// Parses and validates a config document. Throws ConfigError.
ExperimentConfig parse_config(const nlohmann::json& doc);

struct RunResult {
    int exit_code = kExitOk;
    std::vector<std::string> files;
    nlohmann::json summary;
};

/// Frontiers at R3 = 0 for every strategy and gamma^2:
/// fig2_<strategy>_g<gamma^2>.csv plus fig2_summary.json.
RunResult run_fig2(const ExperimentConfig& cfg);
/// Symmetric rate versus common power: fig3.csv with
/// p_db,df_rate,cf_rate,outer_rate and the long form fig3_sweep.csv with
/// p_db,strategy,rate.
RunResult run_fig3(const ExperimentConfig& cfg);
/// Point cloud and frontier of one discrete builder.
RunResult run_dmc_search(const ExperimentConfig& cfg);
/// Invariant suites; writes verify_report.json and exits 1 on any failure.
RunResult run_verify(const ExperimentConfig& cfg);

/// Dispatches on cfg.mode.
RunResult run(const ExperimentConfig& cfg);

}  // namespace cmacr::cli
