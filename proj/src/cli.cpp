#include "cmacr/cli.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>

#include "cmacr/infomeasure.hpp"
#include "cmacr/region.hpp"

namespace cmacr::cli {

namespace fs = std::filesystem;
using nlohmann::json;
using region::format_number;
using region::RateTriple;

std::string to_string(Mode m)
{
    switch (m) {
    case Mode::gaussian_region: return "gaussian-region";
    case Mode::gaussian_sweep: return "gaussian-sweep";
    case Mode::dmc_search: return "dmc-search";
    case Mode::verify: return "verify";
    }
    return "?";
}

Mode mode_from_string(const std::string& s)
{
    for (auto m : {Mode::gaussian_region, Mode::gaussian_sweep, Mode::dmc_search, Mode::verify})
        if (to_string(m) == s) return m;
    throw ConfigError("unknown mode '" + s +
                      "' (expected gaussian-region, gaussian-sweep, dmc-search or verify)");
}

gaussian::CloudOptions ExperimentConfig::cloud_options() const
{
    gaussian::CloudOptions o;
    o.grid_step = grid_step;
    o.halvings = halvings;
    o.directions = directions;
    o.threads = threads;
    o.formula.reading = reading;
    return o;
}

gaussian::GaussianChannel ExperimentConfig::channel_for(double g) const
{
    return gaussian::GaussianChannel::from_db(p1_db, p2_db, p3_db, g, eta_sq);
}

// ---------------------------------------------------------------------------
// Config parsing

namespace {

double number(const json& v, const std::string& key)
{
    if (!v.is_number()) throw ConfigError("'" + key + "' must be a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) throw ConfigError("'" + key + "' must be finite");
    return x;
}

double nonneg(const json& v, const std::string& key)
{
    const double x = number(v, key);
    if (x < 0.0) throw ConfigError("'" + key + "' must be >= 0");
    return x;
}

std::uint64_t unsigned_value(const json& v, const std::string& key)
{
    if (v.is_number_unsigned()) return v.get<std::uint64_t>();
    if (v.is_number_integer() && v.get<std::int64_t>() >= 0)
        return static_cast<std::uint64_t>(v.get<std::int64_t>());
    throw ConfigError("'" + key + "' must be a non-negative integer");
}

std::vector<double> number_list(const json& v, const std::string& key)
{
    std::vector<double> out;
    if (v.is_array()) {
        for (const auto& e : v) out.push_back(number(e, key));
    } else {
        out.push_back(number(v, key));
    }
    return out;
}

std::string text(const json& v, const std::string& key)
{
    if (!v.is_string()) throw ConfigError("'" + key + "' must be a string");
    return v.get<std::string>();
}

json load_channel(const json& v)
{
    if (v.is_object()) return v;
    if (!v.is_string()) throw ConfigError("'channel' must be an object or a path to a JSON file");
    const auto path = v.get<std::string>();
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read channel file '" + path + "'");
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw ConfigError("channel file '" + path + "': " + e.what());
    }
}

}  // namespace

ExperimentConfig parse_config(const json& doc)
{
    if (!doc.is_object()) throw ConfigError("config must be a JSON object");
    if (!doc.contains("mode")) throw ConfigError("config is missing 'mode'");

    ExperimentConfig c;
    c.mode = mode_from_string(text(doc.at("mode"), "mode"));
    if (c.mode == Mode::gaussian_sweep) {
        c.gamma_sq = {1.0};
        for (int p = 0; p <= 30; ++p) c.p_db_list.push_back(p);
    }

    static const std::vector<std::string> known{
        "mode",      "p1_db",    "p2_db",      "p3_db",   "gamma_sq",         "eta_sq",
        "strategy",  "grid_step", "halvings",  "directions", "p_db_list",     "sum_rate_reading",
        "seed",      "threads",  "out",        "channel", "proposition",      "budget",
        "link_caps", "card_aux", "output",     "mutant",  "draws"};
    for (const auto& [key, v] : doc.items()) {
        if (std::find(known.begin(), known.end(), key) == known.end())
            throw ConfigError("unknown config key '" + key + "'");
        try {
            if (key == "p1_db") c.p1_db = number(v, key);
            else if (key == "p2_db") c.p2_db = number(v, key);
            else if (key == "p3_db") c.p3_db = number(v, key);
            else if (key == "eta_sq") c.eta_sq = nonneg(v, key);
            else if (key == "gamma_sq") {
                c.gamma_sq = number_list(v, key);
                for (double g : c.gamma_sq)
                    if (g < 0.0) throw ConfigError("'gamma_sq' values must be >= 0");
            } else if (key == "strategy") {
                c.strategies.clear();
                const json list = v.is_array() ? v : json::array({v});
                for (const auto& s : list) c.strategies.push_back(gaussian::strategy_from_string(text(s, key)));
            } else if (key == "grid_step") c.grid_step = number(v, key);
            else if (key == "halvings") c.halvings = static_cast<int>(unsigned_value(v, key));
            else if (key == "directions") c.directions = static_cast<int>(unsigned_value(v, key));
            else if (key == "p_db_list") c.p_db_list = number_list(v, key);
            else if (key == "sum_rate_reading") {
                const auto r = text(v, key);
                if (r == "symmetric") c.reading = gaussian::SumRateReading::symmetric;
                else if (r == "as_printed") c.reading = gaussian::SumRateReading::as_printed;
                else throw ConfigError("'sum_rate_reading' must be 'symmetric' or 'as_printed'");
            } else if (key == "seed") c.seed = unsigned_value(v, key);
            else if (key == "threads") c.threads = static_cast<unsigned>(unsigned_value(v, key));
            else if (key == "out") c.out = text(v, key);
            else if (key == "channel") c.channel = load_channel(v);
            else if (key == "proposition") c.proposition = dmc::builder_from_string(text(v, key));
            else if (key == "budget") c.budget = unsigned_value(v, key);
            else if (key == "link_caps") {
                if (!v.is_object()) throw ConfigError("'link_caps' must be an object {c1, c2}");
                if (v.contains("c1")) c.link_caps.c1 = nonneg(v.at("c1"), "link_caps.c1");
                if (v.contains("c2")) c.link_caps.c2 = nonneg(v.at("c2"), "link_caps.c2");
            } else if (key == "card_aux") c.card_aux = unsigned_value(v, key);
            else if (key == "output") c.output = text(v, key);
            else if (key == "mutant") c.mutant = text(v, key);
            else if (key == "draws") c.draws = static_cast<int>(unsigned_value(v, key));
        } catch (const ConfigError&) {
            throw;
        } catch (const std::exception& e) {
            throw ConfigError("'" + key + "': " + e.what());
        }
    }

    if (!(c.grid_step > 0.0 && c.grid_step <= 0.5))
        throw ConfigError("'grid_step' must lie in (0, 0.5]");
    if (c.halvings > 40) throw ConfigError("'halvings' must be <= 40");
    if (c.directions < 2) throw ConfigError("'directions' must be >= 2");
    if (c.threads == 0) throw ConfigError("'threads' must be >= 1");
    if (c.out.empty()) throw ConfigError("'out' must not be empty");

    switch (c.mode) {
    case Mode::gaussian_region:
        if (c.gamma_sq.empty()) throw ConfigError("'gamma_sq' must list at least one value");
        if (c.strategies.empty()) throw ConfigError("'strategy' must list at least one strategy");
        break;
    case Mode::gaussian_sweep:
        if (c.p_db_list.empty()) throw ConfigError("'p_db_list' must not be empty");
        if (c.gamma_sq.size() != 1) throw ConfigError("gaussian-sweep takes exactly one 'gamma_sq'");
        break;
    case Mode::dmc_search:
        if (!c.channel) throw ConfigError("dmc-search requires 'channel'");
        if (c.budget == 0) throw ConfigError("'budget' must be >= 1");
        if (c.card_aux == 0) throw ConfigError("'card_aux' must be >= 1");
        if (c.output != dmc::kY1 && c.output != dmc::kY2 && c.output != dmc::kY3)
            throw ConfigError("'output' must be Y1, Y2 or Y3");
        try {
            (void)dmc::dmc_channel_from_json(*c.channel);
        } catch (const std::exception& e) {
            throw ConfigError(std::string("invalid channel: ") + e.what());
        }
        break;
    case Mode::verify:
        if (!c.mutant.empty() && c.mutant != "df_sum_max")
            throw ConfigError("unknown mutant '" + c.mutant + "' (expected df_sum_max)");
        if (c.draws < 1) throw ConfigError("'draws' must be >= 1");
        break;
    }
    return c;
}

// ---------------------------------------------------------------------------
// Output

namespace {

class OutDir {
public:
    explicit OutDir(const std::string& dir) : dir_(dir)
    {
        std::error_code ec;
        fs::create_directories(dir_, ec);
        if (ec || !fs::is_directory(dir_))
            throw OutputError("cannot create output directory '" + dir + "': " +
                              (ec ? ec.message() : "not a directory"));
    }

    std::string write(const std::string& name, const std::string& content)
    {
        const auto path = (dir_ / name).string();
        std::ofstream os(path, std::ios::binary | std::ios::trunc);
        if (!os) throw OutputError("cannot open '" + path + "' for writing");
        os << content;
        os.flush();
        if (!os) throw OutputError("failed writing '" + path + "'");
        files_.push_back(path);
        return path;
    }

    const std::vector<std::string>& files() const { return files_; }

private:
    fs::path dir_;
    std::vector<std::string> files_;
};

std::string lower(std::string s)
{
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char ch) { return std::tolower(ch); });
    return s;
}

}  // namespace

RunResult run_fig2(const ExperimentConfig& cfg)
{
    using gaussian::Strategy;
    OutDir out(cfg.out);
    const auto opts = cfg.cloud_options();
    json results = json::array();

    for (double g : cfg.gamma_sq) {
        const auto ch = cfg.channel_for(g);
        json entry{{"gamma_sq", g}};
        json sym = json::object();
        std::vector<std::pair<Strategy, region::PointCloudRegion>> clouds;
        for (auto s : cfg.strategies) {
            auto cloud = gaussian::strategy_cloud(ch, s, opts);
            const auto frontier = region::frontier_slice(cloud, 0.0, cfg.directions);
            std::ostringstream csv;
            region::write_frontier_csv(csv, frontier);
            out.write("fig2_" + lower(gaussian::to_string(s)) + "_g" + format_number(g) + ".csv", csv.str());
            sym[gaussian::to_string(s)] = region::max_symmetric_rate(cloud);
            clouds.emplace_back(s, std::move(cloud));
        }
        entry["symmetric_rate"] = sym;

        auto find = [&clouds](Strategy s) -> const region::PointCloudRegion* {
            for (const auto& [k, c] : clouds)
                if (k == s) return &c;
            return nullptr;
        };
        const auto* df = find(Strategy::df);
        const auto* cf = find(Strategy::cf);
        if (df && cf) {
            int cf_above = 0, df_above = 0;
            for (int k = 0; k < cfg.directions; ++k) {
                const double th = (std::numbers::pi / 2) * k / (cfg.directions - 1);
                const double d = region::support_value(*df, th);
                const double c = region::support_value(*cf, th);
                if (c > d + region::kSlack) ++cf_above;
                if (d > c + region::kSlack) ++df_above;
            }
            entry["cf_above_df_directions"] = cf_above;
            entry["df_above_cf_directions"] = df_above;
        }
        if (sym.contains("DF") && sym.contains("OUTER"))
            entry["outer_minus_df_symmetric"] = sym["OUTER"].get<double>() - sym["DF"].get<double>();
        results.push_back(entry);
    }

    json summary{{"mode", to_string(cfg.mode)},
                 {"p_db", {cfg.p1_db, cfg.p2_db, cfg.p3_db}},
                 {"eta_sq", cfg.eta_sq},
                 {"grid_step", cfg.grid_step},
                 {"results", results}};
    out.write("fig2_summary.json", summary.dump(2) + "\n");
    return {kExitOk, out.files(), summary};
}

RunResult run_fig3(const ExperimentConfig& cfg)
{
    using gaussian::Strategy;
    if (cfg.p_db_list.empty()) throw ConfigError("'p_db_list' must not be empty");
    OutDir out(cfg.out);
    const auto opts = cfg.cloud_options();
    auto templ = cfg.channel_for(cfg.gamma_sq.front());

    std::array<std::vector<gaussian::SweepRow>, 3> rows;
    const std::array<Strategy, 3> order{Strategy::df, Strategy::cf, Strategy::outer};
    for (std::size_t k = 0; k < order.size(); ++k)
        rows[k] = gaussian::symmetric_rate_sweep(templ, cfg.p_db_list, order[k], opts);

    std::ostringstream csv;
    csv << "p_db,df_rate,cf_rate,outer_rate\n";
    json table = json::array();
    for (std::size_t i = 0; i < cfg.p_db_list.size(); ++i) {
        csv << format_number(cfg.p_db_list[i]) << ',' << format_number(rows[0][i].rate) << ','
            << format_number(rows[1][i].rate) << ',' << format_number(rows[2][i].rate) << '\n';
        table.push_back({cfg.p_db_list[i], rows[0][i].rate, rows[1][i].rate, rows[2][i].rate});
    }
    out.write("fig3.csv", csv.str());

    std::ostringstream sweep;
    sweep << "p_db,strategy,rate\n";
    for (std::size_t k = 0; k < order.size(); ++k)
        for (const auto& r : rows[k])
            sweep << format_number(r.p_db) << ',' << gaussian::to_string(r.strategy) << ','
                  << format_number(r.rate) << '\n';
    out.write("fig3_sweep.csv", sweep.str());
    json summary{{"mode", to_string(cfg.mode)}, {"gamma_sq", cfg.gamma_sq.front()},
                 {"eta_sq", cfg.eta_sq},        {"grid_step", cfg.grid_step},
                 {"rows", table}};
    return {kExitOk, out.files(), summary};
}

RunResult run_dmc_search(const ExperimentConfig& cfg)
{
    if (!cfg.channel) throw ConfigError("dmc-search requires 'channel'");
    const auto ch = dmc::dmc_channel_from_json(*cfg.channel);
    dmc::SearchOptions opts;
    opts.card_q = opts.card_u = opts.card_yh3 = cfg.card_aux;
    opts.output = cfg.output;
    opts.links = cfg.link_caps;
    opts.threads = cfg.threads;

    region::PointCloudRegion cloud;
    try {
        cloud = dmc::search_region(ch, cfg.proposition, cfg.budget, cfg.seed, opts);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }

    OutDir out(cfg.out);
    const auto name = dmc::to_string(cfg.proposition);
    std::ostringstream cloud_csv, frontier_csv;
    region::write_cloud_csv(cloud_csv, cloud);
    region::write_frontier_csv(frontier_csv, region::frontier_slice(cloud, 0.0, cfg.directions));
    out.write("dmc_" + name + "_cloud.csv", cloud_csv.str());
    out.write("dmc_" + name + "_frontier.csv", frontier_csv.str());

    json summary{{"mode", to_string(cfg.mode)},
                 {"proposition", name},
                 {"seed", cfg.seed},
                 {"budget", cfg.budget},
                 {"points", cloud.size()},
                 {"symmetric_rate", region::max_symmetric_rate(cloud)},
                 {"markov", dmc::verify_markov(ch)}};
    out.write("dmc_" + name + "_summary.json", summary.dump(2) + "\n");
    return {kExitOk, out.files(), summary};
}

// ---------------------------------------------------------------------------
// Verification suites

namespace {

struct Suite {
    std::string name;
    std::size_t checks = 0;
    std::size_t failed = 0;
    json failures = json::array();

    void check(bool ok, const std::function<json()>& detail)
    {
        ++checks;
        if (ok) return;
        ++failed;
        if (failures.size() < 5) failures.push_back(detail());
    }

    json report() const
    {
        return {{"name", name}, {"checks", checks}, {"failed", failed}, {"passed", failed == 0},
                {"failures", failures}};
    }
};

json triple_json(const RateTriple& t) { return json::array({t.r1, t.r2, t.r3}); }

double uniform(std::mt19937_64& rng, double lo, double hi)
{
    return lo + (hi - lo) * (static_cast<double>(rng() >> 11) * 0x1.0p-53);
}

info::JointPmf random_pmf(std::mt19937_64& rng, const std::vector<std::string>& labels)
{
    std::vector<std::size_t> cards;
    std::size_t n = 1;
    for (std::size_t k = 0; k < labels.size(); ++k) {
        cards.push_back(2 + rng() % 2);
        n *= cards.back();
    }
    std::vector<double> p(n);
    double total = 0.0;
    for (auto& v : p) total += (v = -std::log(uniform(rng, 1e-300, 1.0)));
    for (auto& v : p) v /= total;
    return info::JointPmf(labels, cards, p);
}

/// Channel of the form p(y1|x1,x3) p(y2|x2,x3) p(y3|x1,x2,x3) on binary alphabets.
dmc::DmcChannel random_markov_channel(std::mt19937_64& rng)
{
    auto row = [&rng] {
        const double a = uniform(rng, 0.0, 1.0);
        return std::array<double, 2>{a, 1.0 - a};
    };
    std::array<std::array<double, 2>, 4> y1, y2;
    std::array<std::array<double, 2>, 8> y3;
    for (auto& r : y1) r = row();
    for (auto& r : y2) r = row();
    for (auto& r : y3) r = row();
    return dmc::DmcChannel::from_law({2, 2, 2}, {2, 2, 2},
                                     [&](std::size_t a, std::size_t b, std::size_t c, std::size_t d,
                                         std::size_t e, std::size_t f) {
                                         return y1[a * 2 + c][d] * y2[b * 2 + c][e] *
                                                y3[(a * 2 + b) * 2 + c][f];
                                     });
}

/// Reverses the symbol order of one axis.
info::JointPmf reverse_axis(const info::JointPmf& p, const std::string& label)
{
    const auto axis = p.axis(label);
    const auto& cards = p.cards();
    std::size_t stride = 1;
    for (std::size_t k = cards.size(); k-- > axis + 1;) stride *= cards[k];
    const std::size_t n = cards[axis];
    std::vector<double> out(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) {
        const std::size_t digit = (i / stride) % n;
        const std::size_t j = i + (n - 1 - 2 * digit) * stride;
        out[j] = p.probs()[i];
    }
    return info::JointPmf(p.labels(), p.cards(), out);
}

/// First vertex of `a` outside `b`, if any.
std::optional<RateTriple> escape_vertex(const region::LinearRateRegion& a,
                                        const region::LinearRateRegion& b, double slack)
{
    for (const auto& v : region::corner_points(a))
        if (!region::contains(b, v, slack)) return v;
    return std::nullopt;
}

double max_mask_gap(const region::LinearRateRegion& a, const region::LinearRateRegion& b)
{
    double gap = 0.0;
    for (const auto& c : a.constraints())
        if (auto other = b.bound(c.mask)) gap = std::max(gap, std::abs(c.bound - *other));
    return gap;
}

Suite suite_infomeasure(std::mt19937_64& rng, int draws)
{
    Suite s{"infomeasure_properties"};
    for (int i = 0; i < draws; ++i) {
        const auto p = random_pmf(rng, {"A", "B", "C", "G"});
        const double ab = info::conditional_mi(p, {"A"}, {"B"}, {"G"});
        const double ba = info::conditional_mi(p, {"B"}, {"A"}, {"G"});
        s.check(std::abs(ab - ba) < 1e-9, [&] { return json{{"check", "symmetry"}, {"ab", ab}, {"ba", ba}}; });
        const double cap = std::log2(std::min(p.cards()[0], p.cards()[1]));
        s.check(ab >= 0.0 && ab <= cap + 1e-9, [&] { return json{{"check", "range"}, {"value", ab}}; });
        const double whole = info::conditional_mi(p, {"A"}, {"B", "C"}, {"G"});
        const double chain = ab + info::conditional_mi(p, {"A"}, {"C"}, {"B", "G"});
        s.check(std::abs(whole - chain) < 1e-9,
                [&] { return json{{"check", "chain_rule"}, {"whole", whole}, {"chain", chain}}; });
        const double x = uniform(rng, 0.0, 100.0), y = uniform(rng, 0.0, 100.0);
        const double lhs = info::capacity_fn(x) + info::capacity_fn(y);
        const double rhs = info::capacity_fn(x + y + x * y);
        s.check(std::abs(lhs - rhs) < 1e-12,
                [&] { return json{{"check", "capacity_additivity"}, {"x", x}, {"y", y}}; });
    }
    return s;
}

gaussian::GaussianChannel random_gaussian(std::mt19937_64& rng)
{
    return gaussian::GaussianChannel::from_db(uniform(rng, -5, 20), uniform(rng, -5, 20),
                                              uniform(rng, -5, 20), uniform(rng, 0.1, 10),
                                              uniform(rng, 0.1, 20));
}

Suite suite_gaussian_subset(std::mt19937_64& rng, int draws, const gaussian::DfFormula& tested,
                            const gaussian::DfFormula& reference)
{
    Suite s{"gaussian_df_within_outer"};
    for (int i = 0; i < draws; ++i) {
        const auto ch = random_gaussian(rng);
        gaussian::DfSplit sp{uniform(rng, 0, 1), uniform(rng, 0, 1), uniform(rng, 0, 1), 0.0};
        sp.a3pp = uniform(rng, 0, 1) * (1.0 - sp.a3p);
        const auto df = gaussian::df_region_at(ch, sp, tested);
        const auto outer = gaussian::outer_region_at(ch, sp, reference);
        const auto bad = escape_vertex(df, outer, region::kSlack);
        s.check(!bad, [&] {
            return json{{"check", "df_subset_outer"},
                        {"channel", {ch.p1, ch.p2, ch.p3, ch.gamma, ch.eta}},
                        {"split", {sp.a1, sp.a2, sp.a3p, sp.a3pp}},
                        {"counterexample", triple_json(*bad)}};
        });
    }
    return s;
}

Suite suite_frontier_containment(const ExperimentConfig& cfg)
{
    Suite s{"gaussian_frontier_in_own_region"};
    auto opts = cfg.cloud_options();
    opts.grid_step = std::max(opts.grid_step, 0.1);
    opts.halvings = std::min(opts.halvings, 3);
    opts.threads = cfg.threads;
    const auto ch = cfg.channel_for(cfg.gamma_sq.front());
    for (auto strat : {gaussian::Strategy::df, gaussian::Strategy::cf, gaussian::Strategy::outer}) {
        const auto cloud = gaussian::strategy_cloud(ch, strat, opts);
        for (const auto& f : region::frontier_slice(cloud)) {
            const RateTriple t{f.r1, f.r2, f.r3};
            const auto own = gaussian::region_from_provenance(ch, f.source, opts.formula);
            s.check(region::contains(own, t, region::kSlack), [&] {
                return json{{"check", "frontier_point_in_region"},
                            {"strategy", gaussian::to_string(strat)},
                            {"point", triple_json(t)},
                            {"source", f.source.to_string()}};
            });
        }
    }
    return s;
}

Suite suite_dmc_df_outer(std::mt19937_64& rng, int draws)
{
    Suite s{"dmc_df_within_outer"};
    for (int i = 0; i < draws; ++i) {
        const auto ch = random_markov_channel(rng);
        const auto inp = dmc::sample_input(ch, dmc::Builder::decode_forward, {}, rng());
        const auto joint = dmc::assemble_joint(ch, inp);
        const auto df = dmc::df_region_dmc(joint);
        const auto outer = dmc::outer_bound_dmc(joint);
        const auto bad = escape_vertex(df, outer, region::kSlack);
        s.check(!bad, [&] {
            return json{{"check", "df_subset_outer"}, {"input", inp.hash()}, {"counterexample", triple_json(*bad)}};
        });
        region::LinearRateRegion relaxed;
        for (const auto& c : df.constraints())
            if (c.mask != region::mask_of({1, 2})) relaxed.add(c.mask, c.bound);
        const auto gap = escape_vertex(outer, relaxed, 1e-9);
        s.check(!gap, [&] {
            return json{{"check", "relay_sum_rate_is_only_separator"},
                        {"input", inp.hash()},
                        {"counterexample", triple_json(*gap)}};
        });
    }
    return s;
}

Suite suite_dmc_reductions(std::mt19937_64& rng, int draws)
{
    Suite s{"dmc_structural_reductions"};
    for (int i = 0; i < draws; ++i) {
        const auto ch = random_markov_channel(rng);
        const auto inp = dmc::sample_input(ch, dmc::Builder::cognitive, {}, rng());
        const auto joint = dmc::assemble_joint(ch, inp);
        const auto cog = dmc::cognitive_mac_region(joint, dmc::kY1);
        const auto wide = dmc::limited_link_region(joint, {1e6, 1e6}, dmc::kY1);
        const double gap = max_mask_gap(cog, wide);
        s.check(gap < 1e-9, [&] { return json{{"check", "infinite_links_match_cognitive"}, {"gap", gap}}; });
        const auto zero = dmc::limited_link_region(joint, {0.0, 0.0}, dmc::kY1);
        bool below = true;
        for (const auto& c : zero.constraints())
            if (auto b = cog.bound(c.mask)) below = below && c.bound <= *b + 1e-12;
        s.check(below, [&] { return json{{"check", "zero_links_within_cognitive"}, {"input", inp.hash()}}; });

        const auto flipped = reverse_axis(reverse_axis(joint, dmc::kX1), dmc::kY1);
        const double relabel = max_mask_gap(cog, dmc::cognitive_mac_region(flipped, dmc::kY1));
        s.check(relabel < 1e-9, [&] { return json{{"check", "relabel_invariance"}, {"gap", relabel}}; });
    }
    return s;
}

Suite suite_markov_rejection()
{
    Suite s{"dmc_markov_rejection"};
    // Receiver 1 hears source 2 directly.
    const auto ch = dmc::DmcChannel::from_law({2, 2, 2}, {2, 2, 2},
                                              [](std::size_t, std::size_t b, std::size_t, std::size_t d,
                                                 std::size_t, std::size_t) { return (d == b ? 1.0 : 0.0) * 0.25; });
    s.check(!dmc::verify_markov(ch), [] { return json{{"check", "verify_markov_flags_cross_link"}}; });
    const auto joint = dmc::assemble_joint(ch, dmc::FactorizedInput::uniform(2, 2, 2, {2, 2, 2}, 2));
    bool rejected = false;
    try {
        (void)dmc::outer_bound_dmc(joint);
    } catch (const std::invalid_argument&) {
        rejected = true;
    }
    s.check(rejected, [] { return json{{"check", "outer_bound_rejects_cross_link"}}; });
    return s;
}

}  // namespace

RunResult run_verify(const ExperimentConfig& cfg)
{
    std::mt19937_64 rng(cfg.seed);
    gaussian::DfFormula reference;
    reference.reading = cfg.reading;
    gaussian::DfFormula tested = reference;
    tested.fault_sum_max = cfg.mutant == "df_sum_max";

    std::vector<Suite> suites;
    suites.push_back(suite_infomeasure(rng, cfg.draws));
    suites.push_back(suite_gaussian_subset(rng, cfg.draws, tested, reference));
    suites.push_back(suite_frontier_containment(cfg));
    suites.push_back(suite_dmc_df_outer(rng, cfg.draws));
    suites.push_back(suite_dmc_reductions(rng, cfg.draws));
    suites.push_back(suite_markov_rejection());

    json list = json::array();
    bool ok = true;
    for (const auto& s : suites) {
        list.push_back(s.report());
        ok = ok && s.failed == 0;
    }
    json report{{"mode", to_string(cfg.mode)},
                {"seed", cfg.seed},
                {"draws", cfg.draws},
                {"mutant", cfg.mutant.empty() ? json(nullptr) : json(cfg.mutant)},
                {"passed", ok},
                {"suites", list}};
    OutDir out(cfg.out);
    out.write("verify_report.json", report.dump(2) + "\n");
    return {ok ? kExitOk : kExitInvariant, out.files(), report};
}

RunResult run(const ExperimentConfig& cfg)
{
    switch (cfg.mode) {
    case Mode::gaussian_region: return run_fig2(cfg);
    case Mode::gaussian_sweep: return run_fig3(cfg);
    case Mode::dmc_search: return run_dmc_search(cfg);
    case Mode::verify: return run_verify(cfg);
    }
    throw ConfigError("unknown mode");
}

}  // namespace cmacr::cli
