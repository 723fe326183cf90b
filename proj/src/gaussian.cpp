#include "cmacr/gaussian.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cmath>
#include <functional>
#include <numbers>
#include <stdexcept>
#include <thread>

#include "cmacr/infomeasure.hpp"

namespace cmacr::gaussian {

using info::capacity_fn;
using region::HullVertex;
using region::ParetoHull;
using region::Provenance;

double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

namespace {

void require_unit(double v, const char* what)
{
    if (!(v >= 0.0 && v <= 1.0))
        throw std::invalid_argument(std::string(what) + " must lie in [0, 1]");
}

void require_nonneg(double v, const char* what)
{
    if (!(v >= 0.0) || !std::isfinite(v))
        throw std::invalid_argument(std::string(what) + " must be finite and >= 0");
}

// num / den for the relay-decoding interference fractions; 0/0 resolves to 0.
double fraction(double num, double den)
{
    if (num == 0.0) return 0.0;
    if (den <= 0.0)
        throw std::invalid_argument("df split: degenerate denominator with nonzero numerator");
    return std::clamp(num / den, 0.0, 1.0);
}

}  // namespace

void GaussianChannel::validate() const
{
    require_nonneg(p1, "p1");
    require_nonneg(p2, "p2");
    require_nonneg(p3, "p3");
    require_nonneg(gamma, "gamma");
    require_nonneg(eta, "eta");
}

GaussianChannel GaussianChannel::from_db(double p1_db, double p2_db, double p3_db, double gamma_sq,
                                         double eta_sq)
{
    require_nonneg(gamma_sq, "gamma_sq");
    require_nonneg(eta_sq, "eta_sq");
    GaussianChannel ch{db_to_linear(p1_db), db_to_linear(p2_db), db_to_linear(p3_db),
                       std::sqrt(gamma_sq), std::sqrt(eta_sq)};
    ch.validate();
    return ch;
}

void DfSplit::validate() const
{
    require_unit(a1, "a1");
    require_unit(a2, "a2");
    require_unit(a3p, "a3p");
    require_unit(a3pp, "a3pp");
    if (a3p + a3pp > 1.0 + 1e-12) throw std::invalid_argument("df split: a3p + a3pp must be <= 1");
}

void CfSplit::validate() const
{
    require_unit(a1, "a1");
    require_unit(a2, "a2");
}

DfBounds df_bounds(const GaussianChannel& ch, const DfSplit& s, const DfFormula& f, bool outer)
{
    ch.validate();
    s.validate();
    const double g2 = ch.gamma * ch.gamma;
    const double e2 = ch.eta * ch.eta;
    const double p1 = ch.p1, p2 = ch.p2, p3 = ch.p3;

    const double leak1 = fraction(s.a1 * s.a3p, 1.0 - s.a2 * s.a3pp);
    const double leak2 = fraction(s.a2 * s.a3pp, 1.0 - s.a1 * s.a3p);

    DfBounds b;
    b.r1 = std::min(capacity_fn(g2 * p1 * (1.0 - leak1)), capacity_fn(p1 + e2 * p3 * (1.0 - s.a3pp)));
    b.r2 = std::min(capacity_fn(g2 * p2 * (1.0 - leak2)), capacity_fn(p2 + e2 * p3 * (1.0 - s.a3p)));

    const double coherent2 = f.reading == SumRateReading::symmetric ? s.a2 : s.a1;
    const double rx1 = capacity_fn(p1 + e2 * p3 + 2.0 * ch.eta * std::sqrt(s.a1 * s.a3p * p1 * p3));
    const double rx2 =
        capacity_fn(p2 + e2 * p3 + 2.0 * ch.eta * std::sqrt(coherent2 * s.a3pp * p2 * p3));
    b.sum = std::min(rx1, rx2);
    if (!outer) {
        double relay = 0.0;
        const double total = p1 + p2;
        if (total > 0.0) {
            const double c = std::sqrt(s.a1 * s.a3p * p1) + std::sqrt(s.a2 * s.a3pp * p2);
            relay = capacity_fn(std::max(0.0, g2 * total * (1.0 - c * c / total)));
        }
        b.sum = f.fault_sum_max ? std::max({rx1, rx2, relay}) : std::min(b.sum, relay);
    }
    return b;
}

namespace {

LinearRateRegion pack(const DfBounds& b)
{
    LinearRateRegion r;
    r.add(region::mask_of({1}), b.r1);
    r.add(region::mask_of({2}), b.r2);
    r.add(region::mask_of({1, 2}), b.sum);
    return r;
}

}  // namespace

LinearRateRegion df_region_at(const GaussianChannel& ch, const DfSplit& s, const DfFormula& f)
{
    return pack(df_bounds(ch, s, f, false));
}

LinearRateRegion outer_region_at(const GaussianChannel& ch, const DfSplit& s, const DfFormula& f)
{
    return pack(df_bounds(ch, s, f, true));
}

double quantization_noise(const GaussianChannel& ch, const CfSplit& s)
{
    ch.validate();
    s.validate();
    const double relay_snr = ch.eta * ch.eta * ch.p3;
    if (!(relay_snr > 0.0))
        throw std::domain_error("cf: eta^2 P3 must be positive for compress-and-forward");
    const double g2 = ch.gamma * ch.gamma;
    const double q1 = s.a1 * ch.p1, q2 = s.a2 * ch.p2;
    const double pbar = std::min(q1, q2);
    return (1.0 + g2 * (q1 * q2 + q1 + q2) + pbar) / relay_snr;
}

namespace {

DfBounds cf_bounds(const GaussianChannel& ch, const CfSplit& s)
{
    const double nq = quantization_noise(ch, s);
    const double g2 = ch.gamma * ch.gamma;
    const double q1 = s.a1 * ch.p1, q2 = s.a2 * ch.p2;
    DfBounds b;
    b.r1 = capacity_fn(g2 * q1 / (1.0 + nq));
    b.r2 = capacity_fn(g2 * q2 / (1.0 + nq));
    b.sum = capacity_fn(std::min(q1, q2)) + capacity_fn(g2 * (q1 + q2) / (1.0 + nq));
    return b;
}

}  // namespace

LinearRateRegion cf_region_at(const GaussianChannel& ch, const CfSplit& s)
{
    return pack(cf_bounds(ch, s));
}

std::vector<RateTriple> planar_corners(double r1, double r2, double sum)
{
    const double x = std::max(0.0, std::min(r1, sum));
    const double y = std::max(0.0, std::min(r2, sum));
    return {{x, 0.0, 0.0},
            {x, std::max(0.0, std::min(r2, sum - x)), 0.0},
            {std::max(0.0, std::min(r1, sum - y)), y, 0.0},
            {0.0, y, 0.0}};
}

std::string to_string(Strategy s)
{
    switch (s) {
    case Strategy::df: return "DF";
    case Strategy::cf: return "CF";
    case Strategy::outer: return "OUTER";
    }
    return "?";
}

Strategy strategy_from_string(const std::string& s)
{
    std::string u;
    for (char c : s) u += static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    if (u == "DF") return Strategy::df;
    if (u == "CF") return Strategy::cf;
    if (u == "OUTER") return Strategy::outer;
    throw std::invalid_argument("unknown strategy '" + s + "' (expected DF, CF or OUTER)");
}

// ---------------------------------------------------------------------------
// Cloud construction

namespace {

using Params = std::vector<double>;

/// A parameterized family of planar regions: grid enumeration, feasibility,
/// and the bound evaluation for one parameter vector.
struct Scheme {
    std::string label;
    std::size_t count = 0;
    std::function<Params(std::size_t)> decode;
    std::function<bool(const Params&)> feasible;
    std::function<DfBounds(const Params&)> bounds;
};

std::vector<double> grid_values(double step)
{
    if (!(step > 0.0 && step <= 0.5))
        throw std::invalid_argument("grid_step must lie in (0, 0.5]");
    const auto n = static_cast<std::size_t>(std::ceil(1.0 / step - 1e-9));
    std::vector<double> v;
    for (std::size_t k = 0; k < n; ++k) v.push_back(static_cast<double>(k) * step);
    v.push_back(1.0);
    return v;
}

Scheme df_scheme(const GaussianChannel& ch, double step, const DfFormula& f, bool outer)
{
    auto values = grid_values(step);
    std::vector<std::pair<double, double>> relay;
    for (double a : values)
        for (double b : values)
            if (a + b <= 1.0 + 1e-12) relay.emplace_back(a, std::min(b, 1.0 - a));
    const std::size_t n = values.size(), m = relay.size();

    Scheme s;
    s.label = outer ? "outer" : "df";
    s.count = n * n * m;
    s.decode = [values, relay, n, m](std::size_t idx) {
        const auto& r = relay[idx % m];
        idx /= m;
        return Params{values[idx / n], values[idx % n], r.first, r.second};
    };
    s.feasible = [](const Params& p) {
        for (double v : p)
            if (v < 0.0 || v > 1.0) return false;
        return p[2] + p[3] <= 1.0 + 1e-12;
    };
    s.bounds = [ch, f, outer](const Params& p) {
        return df_bounds(ch, {p[0], p[1], p[2], p[3]}, f, outer);
    };
    return s;
}

Scheme cf_scheme(const GaussianChannel& ch, double step)
{
    auto values = grid_values(step);
    const std::size_t n = values.size();
    Scheme s;
    s.label = "cf";
    s.count = n * n;
    s.decode = [values, n](std::size_t idx) { return Params{values[idx / n], values[idx % n]}; };
    s.feasible = [](const Params& p) {
        return p[0] >= 0.0 && p[0] <= 1.0 && p[1] >= 0.0 && p[1] <= 1.0;
    };
    s.bounds = [ch](const Params& p) { return cf_bounds(ch, {p[0], p[1]}); };
    return s;
}

// Only the two Pareto corners of a planar pentagon can reach the hull.
std::array<RateTriple, 2> hull_corners(const DfBounds& b)
{
    auto c = planar_corners(b.r1, b.r2, b.sum);
    return {c[1], c[2]};
}

double directional_value(const DfBounds& b, double c, double s)
{
    const auto k = hull_corners(b);
    return std::max(c * k[0].r1 + s * k[0].r2, c * k[1].r1 + s * k[1].r2);
}

/// Best-improvement pattern search over single- and two-coordinate moves.
/// Returns every accepted iterate (the start point excluded).
std::vector<Params> pattern_search(const Scheme& scheme, Params x, double step, int halvings,
                                   const std::function<double(const DfBounds&)>& objective)
{
    std::vector<Params> accepted;
    double fx = objective(scheme.bounds(x));
    const std::size_t dim = x.size();
    std::vector<std::vector<double>> moves;
    for (std::size_t i = 0; i < dim; ++i)
        for (double si : {-1.0, 1.0}) {
            std::vector<double> d(dim, 0.0);
            d[i] = si;
            moves.push_back(d);
        }
    for (std::size_t i = 0; i < dim; ++i)
        for (std::size_t j = i + 1; j < dim; ++j)
            for (double si : {-1.0, 1.0})
                for (double sj : {-1.0, 1.0}) {
                    std::vector<double> d(dim, 0.0);
                    d[i] = si;
                    d[j] = sj;
                    moves.push_back(d);
                }

    for (int level = 1; level <= halvings; ++level) {
        const double h = step / std::ldexp(1.0, level);
        for (int iter = 0; iter < 400; ++iter) {
            Params best;
            double best_f = fx;
            for (const auto& d : moves) {
                Params y = x;
                for (std::size_t i = 0; i < dim; ++i) y[i] = std::clamp(y[i] + h * d[i], 0.0, 1.0);
                if (y == x || !scheme.feasible(y)) continue;
                const double fy = objective(scheme.bounds(y));
                if (fy > best_f + 1e-14) {
                    best_f = fy;
                    best = std::move(y);
                }
            }
            if (best.empty()) break;
            x = std::move(best);
            fx = best_f;
            accepted.push_back(x);
        }
    }
    return accepted;
}

template <class Fn>
void parallel_for(std::size_t n, unsigned threads, Fn&& fn)
{
    threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(n, 1))));
    if (threads == 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i, 0u);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t)
        pool.emplace_back([&, t] {
            for (std::size_t i; (i = next.fetch_add(1)) < n;) fn(i, t);
        });
    for (auto& th : pool) th.join();
}

PointCloudRegion build_cloud(const Scheme& scheme, const CloudOptions& opts)
{
    if (opts.halvings < 0) throw std::invalid_argument("halvings must be >= 0");
    if (opts.directions < 2) throw std::invalid_argument("directions must be >= 2");

    // Grid pass: fixed contiguous chunks so the merge is independent of threads.
    const std::size_t chunk = 1u << 14;
    const std::size_t chunks = (scheme.count + chunk - 1) / chunk;
    std::vector<std::vector<HullVertex>> partial(chunks);
    parallel_for(chunks, opts.threads, [&](std::size_t c, unsigned) {
        ParetoHull hull;
        const std::size_t end = std::min(scheme.count, (c + 1) * chunk);
        for (std::size_t idx = c * chunk; idx < end; ++idx) {
            const auto k = hull_corners(scheme.bounds(scheme.decode(idx)));
            hull.insert(k[0].r1, k[0].r2, 2 * idx);
            hull.insert(k[1].r1, k[1].r2, 2 * idx + 1);
        }
        hull.consolidate();
        partial[c] = hull.vertices();
    });
    std::vector<HullVertex> merged;
    for (auto& p : partial) merged.insert(merged.end(), p.begin(), p.end());
    ParetoHull hull(std::move(merged));

    std::vector<Params> refined;
    auto params_of = [&](std::size_t index) {
        const std::size_t base = 2 * scheme.count;
        return index < base ? scheme.decode(index / 2) : refined[(index - base) / 2];
    };

    // Refinement from the best split of each sweep direction.
    if (opts.halvings > 0 && !hull.vertices().empty()) {
        std::vector<std::vector<Params>> paths(opts.directions);
        const auto seeds = hull.vertices();
        parallel_for(paths.size(), opts.threads, [&](std::size_t k, unsigned) {
            const double theta = (std::numbers::pi / 2.0) * k / (opts.directions - 1);
            const double c = std::cos(theta), s = std::sin(theta);
            const HullVertex* best = &seeds.front();
            for (const auto& v : seeds)
                if (c * v.x + s * v.y > c * best->x + s * best->y) best = &v;
            paths[k] = pattern_search(scheme, params_of(best->index), opts.grid_step, opts.halvings,
                                      [c, s](const DfBounds& b) { return directional_value(b, c, s); });
        });
        for (auto& path : paths)
            for (auto& p : path) {
                const std::size_t index = 2 * scheme.count + 2 * refined.size();
                const auto k = hull_corners(scheme.bounds(p));
                refined.push_back(std::move(p));
                hull.insert(k[0].r1, k[0].r2, index);
                hull.insert(k[1].r1, k[1].r2, index + 1);
            }
        hull.consolidate();
    }

    PointCloudRegion cloud;
    for (const auto& v : hull.vertices())
        cloud.add({v.x, v.y, 0.0}, Provenance{scheme.label, params_of(v.index), {}});
    return cloud;
}

}  // namespace

PointCloudRegion df_cloud(const GaussianChannel& ch, const CloudOptions& opts)
{
    ch.validate();
    return build_cloud(df_scheme(ch, opts.grid_step, opts.formula, false), opts);
}

PointCloudRegion outer_bound_region(const GaussianChannel& ch, const CloudOptions& opts)
{
    ch.validate();
    return build_cloud(df_scheme(ch, opts.grid_step, opts.formula, true), opts);
}

PointCloudRegion cf_cloud(const GaussianChannel& ch, const CloudOptions& opts)
{
    ch.validate();
    if (!(ch.eta * ch.eta * ch.p3 > 0.0))
        throw std::domain_error("cf: eta^2 P3 must be positive for compress-and-forward");
    return build_cloud(cf_scheme(ch, opts.grid_step), opts);
}

PointCloudRegion strategy_cloud(const GaussianChannel& ch, Strategy s, const CloudOptions& opts)
{
    switch (s) {
    case Strategy::df: return df_cloud(ch, opts);
    case Strategy::cf: return cf_cloud(ch, opts);
    case Strategy::outer: return outer_bound_region(ch, opts);
    }
    throw std::invalid_argument("unknown strategy");
}

LinearRateRegion region_from_provenance(const GaussianChannel& ch, const Provenance& src,
                                        const DfFormula& f)
{
    const auto& p = src.params;
    if ((src.label == "df" || src.label == "outer") && p.size() == 4) {
        const DfSplit s{p[0], p[1], p[2], p[3]};
        return src.label == "df" ? df_region_at(ch, s, f) : outer_region_at(ch, s, f);
    }
    if (src.label == "cf" && p.size() == 2) return cf_region_at(ch, {p[0], p[1]});
    throw std::invalid_argument("region_from_provenance: unrecognized provenance '" +
                                src.to_string() + "'");
}

std::optional<DfSplit> outer_certificate(const GaussianChannel& ch, const RateTriple& t,
                                         const DfFormula& f)
{
    const auto scheme = df_scheme(ch, 0.1, f, true);
    auto slack = [&t](const DfBounds& b) {
        return std::min({b.r1 - t.r1, b.r2 - t.r2, b.sum - t.r1 - t.r2});
    };
    std::vector<std::pair<double, std::size_t>> ranked;
    ranked.reserve(scheme.count);
    for (std::size_t idx = 0; idx < scheme.count; ++idx)
        ranked.emplace_back(slack(scheme.bounds(scheme.decode(idx))), idx);
    const std::size_t starts = std::min<std::size_t>(8, ranked.size());
    std::partial_sort(ranked.begin(), ranked.begin() + starts, ranked.end(),
                      [](const auto& x, const auto& y) { return x.first > y.first || (x.first == y.first && x.second < y.second); });

    Params best = scheme.decode(ranked.front().second);
    double best_val = ranked.front().first;
    for (std::size_t k = 0; k < starts && best_val < -region::kSlack; ++k) {
        auto path = pattern_search(scheme, scheme.decode(ranked[k].second), 0.1, 20, slack);
        if (path.empty()) continue;
        const double v = slack(scheme.bounds(path.back()));
        if (v > best_val) {
            best_val = v;
            best = path.back();
        }
    }
    if (best_val < -region::kSlack) return std::nullopt;
    return DfSplit{best[0], best[1], best[2], best[3]};
}

// ---------------------------------------------------------------------------

MulticastTerms multicast_terms(double p1, double p3, const RelayGains& g, double rho)
{
    require_nonneg(p1, "p1");
    require_nonneg(p3, "p3");
    require_nonneg(g.source_relay, "source_relay gain");
    require_nonneg(g.source_rx1, "source_rx1 gain");
    require_nonneg(g.relay_rx1, "relay_rx1 gain");
    require_nonneg(g.relay_rx2, "relay_rx2 gain");
    require_unit(rho, "rho");
    MulticastTerms t;
    t.relay_decoding = capacity_fn(g.source_relay * g.source_relay * p1 * (1.0 - rho * rho));
    t.rx1 = capacity_fn(g.source_rx1 * g.source_rx1 * p1 + g.relay_rx1 * g.relay_rx1 * p3 +
                        2.0 * rho * g.source_rx1 * g.relay_rx1 * std::sqrt(p1 * p3));
    t.rx2 = capacity_fn(g.relay_rx2 * g.relay_rx2 * p3);
    return t;
}

double multicast_relay_capacity(double p1, double p3, const RelayGains& g)
{
    auto f = [&](double rho) {
        const auto t = multicast_terms(p1, p3, g, rho);
        return std::min({t.relay_decoding, t.rx1, t.rx2});
    };
    // The relay term decreases in rho and the rx1 term increases, so the
    // min is unimodal on [0, 1].
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = 0.0, b = 1.0;
    double c = b - inv_phi * (b - a), d = a + inv_phi * (b - a);
    double fc = f(c), fd = f(d);
    while (b - a > 1e-8) {
        if (fc < fd) {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        } else {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        }
    }
    return std::max({f(0.0), f(1.0), f(0.5 * (a + b))});
}

std::vector<SweepRow> symmetric_rate_sweep(const GaussianChannel& templ,
                                           const std::vector<double>& p_db, Strategy s,
                                           const CloudOptions& opts)
{
    std::vector<SweepRow> rows;
    for (double db : p_db) {
        GaussianChannel ch = templ;
        ch.p1 = ch.p2 = ch.p3 = db_to_linear(db);
        rows.push_back({db, s, region::max_symmetric_rate(strategy_cloud(ch, s, opts))});
    }
    return rows;
}

}  // namespace cmacr::gaussian
