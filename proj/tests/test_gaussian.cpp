#include <doctest.h>

#include <cmath>
#include <random>

#include "cmacr/gaussian.hpp"
#include "cmacr/infomeasure.hpp"
#include "oracles.hpp"

using namespace cmacr::gaussian;
using cmacr::info::capacity_fn;
using cmacr::region::mask_of;
using cmacr::region::PointCloudRegion;

namespace {

const double kP5 = std::pow(10.0, 0.5);

GaussianChannel paper_channel(double gamma_sq) { return GaussianChannel::from_db(5, 5, 5, gamma_sq, 10); }

DfSplit random_split(std::mt19937_64& rng)
{
    std::uniform_real_distribution<double> u(0.0, 1.0);
    DfSplit s{u(rng), u(rng), u(rng), 0.0};
    s.a3pp = u(rng) * (1.0 - s.a3p);
    return s;
}

GaussianChannel random_channel(std::mt19937_64& rng)
{
    std::uniform_real_distribution<double> db(-5.0, 20.0), g(0.05, 10.0), e(0.05, 20.0);
    return GaussianChannel::from_db(db(rng), db(rng), db(rng), g(rng), e(rng));
}

bool close(double a, oracle::Real b, double tol = 1e-12) { return std::abs(a - double(b)) <= tol * (1 + std::abs(a)); }

std::vector<std::array<double, 2>> planar(const PointCloudRegion& c)
{
    std::vector<std::array<double, 2>> out;
    for (const auto& p : c.points()) out.push_back({p.rate.r1, p.rate.r2});
    return out;
}

CloudOptions coarse(double step = 0.1, int halvings = 3)
{
    CloudOptions o;
    o.grid_step = step;
    o.halvings = halvings;
    return o;
}

}  // namespace

TEST_CASE("channel and split validation")
{
    CHECK(db_to_linear(10.0) == doctest::Approx(10.0));
    CHECK(db_to_linear(0.0) == 1.0);
    CHECK_THROWS(GaussianChannel{-1, 1, 1, 1, 1}.validate());
    CHECK_THROWS(GaussianChannel::from_db(5, 5, 5, -1, 10));
    CHECK_THROWS(DfSplit{0.5, 0.5, 0.6, 0.5}.validate());
    CHECK_THROWS(DfSplit{1.5, 0.5, 0.0, 0.0}.validate());
    CHECK_THROWS(CfSplit{-0.1, 0.5}.validate());
    CHECK_THROWS(df_region_at(paper_channel(1), {0.5, 0.5, 0.7, 0.7}));
    CHECK(strategy_from_string("DF") == Strategy::df);
    CHECK(strategy_from_string("outer") == Strategy::outer);
    CHECK_THROWS(strategy_from_string("AF"));
}

TEST_CASE("df_region_at at zero split")
{
    const auto ch = paper_channel(5);
    const auto r = df_region_at(ch, {0, 0, 0, 0});
    const double g2 = 5, e2 = 10, p = kP5;
    CHECK(*r.bound(mask_of({1})) == doctest::Approx(std::min(capacity_fn(g2 * p), capacity_fn(p + e2 * p))));
    CHECK(*r.bound(mask_of({2})) == doctest::Approx(std::min(capacity_fn(g2 * p), capacity_fn(p + e2 * p))));
    CHECK(*r.bound(mask_of({1, 2})) ==
          doctest::Approx(std::min({capacity_fn(p + e2 * p), capacity_fn(p + e2 * p), capacity_fn(g2 * 2 * p)})));
    CHECK(r.constraints().size() == 3);
}

TEST_CASE("df_region_at at (1,1,0.5,0.5) matches the high-precision oracle")
{
    const auto ch = GaussianChannel::from_db(5, 5, 5, 1, 10);
    const DfSplit s{1, 1, 0.5, 0.5};
    const auto b = df_bounds(ch, s);
    const auto o = oracle::df(kP5, kP5, kP5, 1, 10, 1, 1, 0.5, 0.5);
    CHECK(close(b.r1, o.r1));
    CHECK(close(b.r2, o.r2));
    CHECK(close(b.sum, o.sum));
    // both relay-decoding fractions are saturated at this split
    CHECK(b.r1 == 0.0);
    CHECK(b.r2 == 0.0);
}

TEST_CASE("df_region_at with eta = 0 caps the sum at C(P1)")
{
    std::mt19937_64 rng(3);
    for (int i = 0; i < 50; ++i) {
        auto ch = random_channel(rng);
        ch.eta = 0.0;
        const auto b = df_bounds(ch, random_split(rng));
        CHECK(b.sum <= capacity_fn(ch.p1) + 1e-12);
    }
}

TEST_CASE("DF, outer and CF bounds match the closed-form oracle on random draws")
{
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 400; ++i) {
        const auto ch = random_channel(rng);
        const auto s = random_split(rng);
        const double g2 = ch.gamma * ch.gamma, e2 = ch.eta * ch.eta;
        for (bool printed : {false, true}) {
            DfFormula f;
            f.reading = printed ? SumRateReading::as_printed : SumRateReading::symmetric;
            for (bool outer : {false, true}) {
                const auto b = df_bounds(ch, s, f, outer);
                const auto o = oracle::df(ch.p1, ch.p2, ch.p3, g2, e2, s.a1, s.a2, s.a3p, s.a3pp, outer, printed);
                CHECK(close(b.r1, o.r1, 1e-11));
                CHECK(close(b.r2, o.r2, 1e-11));
                CHECK(close(b.sum, o.sum, 1e-11));
            }
        }
        const CfSplit c{u(rng), u(rng)};
        const auto cr = cf_region_at(ch, c);
        const auto co = oracle::cf(ch.p1, ch.p2, ch.p3, g2, e2, c.a1, c.a2);
        CHECK(close(*cr.bound(mask_of({1})), co.r1, 1e-11));
        CHECK(close(*cr.bound(mask_of({2})), co.r2, 1e-11));
        CHECK(close(*cr.bound(mask_of({1, 2})), co.sum, 1e-11));
    }
}

TEST_CASE("DF region lies inside the outer region at the same split")
{
    std::mt19937_64 rng(19);
    for (int i = 0; i < 300; ++i) {
        const auto ch = random_channel(rng);
        const auto s = random_split(rng);
        CHECK(cmacr::region::region_subset(df_region_at(ch, s), outer_region_at(ch, s), 16));
    }
}

TEST_CASE("user swap maps the DF region by exchanging R1 and R2")
{
    std::mt19937_64 rng(23);
    for (int i = 0; i < 300; ++i) {
        const auto ch = random_channel(rng);
        const auto s = random_split(rng);
        const auto a = df_bounds(ch, s);
        const auto b = df_bounds(ch.swapped(), s.swapped());
        CHECK(a.r1 == doctest::Approx(b.r2).epsilon(1e-12));
        CHECK(a.r2 == doctest::Approx(b.r1).epsilon(1e-12));
        CHECK(a.sum == doctest::Approx(b.sum).epsilon(1e-12));
    }
}

TEST_CASE("the two sum-rate readings differ only when alpha1 != alpha2")
{
    const auto ch = paper_channel(1);
    DfFormula printed;
    printed.reading = SumRateReading::as_printed;
    const DfSplit same{0.4, 0.4, 0.3, 0.6};
    CHECK(df_bounds(ch, same).sum == df_bounds(ch, same, printed).sum);
    const DfSplit skew{1.0, 0.1, 0.5, 0.5};
    CHECK(df_bounds(ch, skew, printed, true).sum > df_bounds(ch, skew, {}, true).sum);
}

TEST_CASE("cf_region_at examples")
{
    const auto ch = paper_channel(1);
    const auto zero = cf_region_at(ch, {0, 0});
    for (const auto& c : zero.constraints()) CHECK(c.bound == 0.0);

    auto strong = ch;
    strong.eta = 1e6;
    const auto r = cf_region_at(strong, {0.7, 1.0});
    CHECK(*r.bound(mask_of({1})) == doctest::Approx(capacity_fn(0.7 * kP5)).epsilon(1e-6));

    const auto full = cf_region_at(ch, {1, 1});
    const auto o = oracle::cf(kP5, kP5, kP5, 1, 10, 1, 1);
    CHECK(close(*full.bound(mask_of({1})), o.r1));
    CHECK(close(*full.bound(mask_of({2})), o.r2));
    CHECK(close(*full.bound(mask_of({1, 2})), o.sum));

    auto silent = ch;
    silent.eta = 0;
    CHECK_THROWS_AS(cf_region_at(silent, {1, 1}), std::domain_error);
    auto off = ch;
    off.p3 = 0;
    CHECK_THROWS_AS(quantization_noise(off, {1, 1}), std::domain_error);
}

TEST_CASE("quantization noise is positive and CF stays below the noiseless cut-set values")
{
    std::mt19937_64 rng(29);
    std::uniform_real_distribution<double> u(0.01, 1.0);
    for (int i = 0; i < 200; ++i) {
        const auto ch = random_channel(rng);
        const CfSplit s{u(rng), u(rng)};
        CHECK(quantization_noise(ch, s) > 0.0);
        const auto r = cf_region_at(ch, s);
        const double g2 = ch.gamma * ch.gamma;
        CHECK(*r.bound(mask_of({1})) < capacity_fn(g2 * s.a1 * ch.p1));
        CHECK(*r.bound(mask_of({2})) < capacity_fn(g2 * s.a2 * ch.p2));
    }
}

TEST_CASE("df_cloud at grid 0.5 is symmetric on a symmetric channel")
{
    const auto ch = paper_channel(1);
    const auto cloud = df_cloud(ch, coarse(0.5, 0));
    for (const auto& p : cloud.points()) {
        bool mirrored = false;
        for (const auto& q : cloud.points())
            mirrored = mirrored || (q.rate.r1 == p.rate.r2 && q.rate.r2 == p.rate.r1);
        CHECK(mirrored);
    }
    const auto cf = cf_cloud(ch, coarse(0.5, 0));
    for (const auto& p : cf.points()) {
        bool mirrored = false;
        for (const auto& q : cf.points())
            mirrored = mirrored || (q.rate.r1 == p.rate.r2 && q.rate.r2 == p.rate.r1);
        CHECK(mirrored);
    }
}

TEST_CASE("grid clouds reproduce the exhaustive symmetric-rate oracle")
{
    for (double g2 : {1.0, 5.0}) {
        const auto ch = paper_channel(g2);
        const double df_grid = max_symmetric_rate(df_cloud(ch, coarse(0.05, 0)));
        CHECK(std::abs(df_grid - double(oracle::df_symmetric_grid(kP5, kP5, g2, 10, 0.05L))) < 1e-9);
        const double outer_grid = max_symmetric_rate(outer_bound_region(ch, coarse(0.05, 0)));
        CHECK(std::abs(outer_grid - double(oracle::df_symmetric_grid(kP5, kP5, g2, 10, 0.05L, true))) < 1e-9);
        const double cf_grid = max_symmetric_rate(cf_cloud(ch, coarse(0.01, 0)));
        CHECK(std::abs(cf_grid - double(oracle::cf_symmetric_grid(kP5, kP5, g2, 10, 0.01L))) < 1e-9);

        // refinement and finer nested grids never lose ground
        CHECK(max_symmetric_rate(df_cloud(ch, coarse(0.05, 6))) >= df_grid - 1e-12);
        CHECK(max_symmetric_rate(df_cloud(ch, coarse(0.025, 0))) >= df_grid - 1e-12);
    }
}

TEST_CASE("DF cloud lies inside the outer-bound cloud")
{
    std::mt19937_64 rng(31);
    for (int i = 0; i < 8; ++i) {
        const auto ch = random_channel(rng);
        const auto df = df_cloud(ch, coarse());
        const auto outer = outer_bound_region(ch, coarse());
        for (const auto& p : df.points()) {
            CHECK(cmacr::region::contains(region_from_provenance(ch, {"outer", p.source.params, ""}), p.rate));
        }
        for (int k = 0; k <= 20; ++k) {
            const double th = (M_PI / 2) * k / 20;
            CHECK(cmacr::region::support_value(df, th) <= cmacr::region::support_value(outer, th) + 1e-9);
        }
    }
}

TEST_CASE("every cloud point lies in the region named by its provenance")
{
    const auto ch = paper_channel(1);
    for (auto s : {Strategy::df, Strategy::cf, Strategy::outer}) {
        const auto cloud = strategy_cloud(ch, s, coarse(0.05, 6));
        REQUIRE_FALSE(cloud.empty());
        for (const auto& p : cloud.points()) {
            CHECK(p.source.label == (s == Strategy::df ? "df" : s == Strategy::cf ? "cf" : "outer"));
            CHECK(cmacr::region::contains(region_from_provenance(ch, p.source), p.rate));
        }
    }
    CHECK_THROWS(region_from_provenance(ch, {"af", {1.0}, ""}));
}

TEST_CASE("outer bound and DF coincide as gamma^2 grows")
{
    const auto ch = paper_channel(1e6);
    const auto df = df_cloud(ch);
    const auto outer = outer_bound_region(ch);
    for (int k = 0; k < cmacr::region::kDefaultDirections; ++k) {
        const double th = (M_PI / 2) * k / (cmacr::region::kDefaultDirections - 1);
        CHECK(std::abs(cmacr::region::support_value(df, th) - cmacr::region::support_value(outer, th)) < 1e-6);
    }
}

TEST_CASE("paper channel with gamma^2 = 1 leaves a strict DF to outer gap")
{
    const auto ch = paper_channel(1);
    const auto df = df_cloud(ch);
    const auto outer = outer_bound_region(ch);
    double gap = 0.0;
    for (int k = 0; k <= 90; ++k) {
        const double th = (M_PI / 2) * k / 90;
        gap = std::max(gap, cmacr::region::support_value(outer, th) - cmacr::region::support_value(df, th));
    }
    CHECK(gap > 0.1);
}

TEST_CASE("cloud output is identical across thread counts")
{
    const auto ch = paper_channel(5);
    auto one = coarse(0.05, 6);
    auto many = one;
    many.threads = 3;
    for (auto s : {Strategy::df, Strategy::cf, Strategy::outer}) {
        const auto a = strategy_cloud(ch, s, one);
        const auto b = strategy_cloud(ch, s, many);
        REQUIRE(a.size() == b.size());
        for (std::size_t i = 0; i < a.size(); ++i) {
            CHECK(a.points()[i].rate == b.points()[i].rate);
            CHECK(a.points()[i].source.params == b.points()[i].source.params);
        }
    }
}

TEST_CASE("cloud options are validated")
{
    const auto ch = paper_channel(1);
    CHECK_THROWS(df_cloud(ch, coarse(0.0, 0)));
    CHECK_THROWS(df_cloud(ch, coarse(0.6, 0)));
    CHECK_THROWS(df_cloud(ch, coarse(0.1, -1)));
    auto silent = ch;
    silent.eta = 0;
    CHECK_THROWS(cf_cloud(silent, coarse()));
}

TEST_CASE("symmetric rate is monotone in every channel parameter")
{
    const auto base = paper_channel(1);
    for (auto s : {Strategy::df, Strategy::cf, Strategy::outer}) {
        const double r0 = max_symmetric_rate(strategy_cloud(base, s));
        for (int field = 0; field < 5; ++field) {
            auto up = base;
            double* v[] = {&up.p1, &up.p2, &up.p3, &up.gamma, &up.eta};
            *v[field] *= 1.5;
            CHECK(max_symmetric_rate(strategy_cloud(up, s)) >= r0 - 1e-9);
        }
    }
}

TEST_CASE("outer_certificate")
{
    const auto ch = paper_channel(1);
    const auto inside = outer_certificate(ch, {0.5, 0.5, 0});
    REQUIRE(inside.has_value());
    CHECK(cmacr::region::contains(outer_region_at(ch, *inside), {0.5, 0.5, 0}));
    CHECK_FALSE(outer_certificate(ch, {5, 5, 0}).has_value());
}

TEST_CASE("multicast relay capacity")
{
    CHECK(multicast_relay_capacity(3, 3, {1, 1, 1, 0}) == 0.0);

    // an unconstrained relay link leaves max over rho of min(rx1, rx2)
    const RelayGains wide{1e6, 0.8, 1.1, 0.9};
    const double expect = double(oracle::multicast_grid(3, 2, 1e6, 0.8, 1.1, 0.9));
    CHECK(std::abs(multicast_relay_capacity(3, 2, wide) - expect) < 1e-7);
    CHECK(std::abs(expect - std::min(capacity_fn(0.64 * 3 + 1.21 * 2 + 2 * 0.8 * 1.1 * std::sqrt(6.0)),
                                     capacity_fn(0.81 * 2))) < 1e-9);

    std::mt19937_64 rng(37);
    std::uniform_real_distribution<double> u(0.0, 2.0), p(0.1, 10.0);
    for (int i = 0; i < 25; ++i) {
        const double p1 = p(rng), p3 = p(rng);
        const RelayGains g{u(rng), u(rng), u(rng), u(rng)};
        const auto ref = oracle::multicast_grid(p1, p3, g.source_relay, g.source_rx1, g.relay_rx1, g.relay_rx2);
        CHECK(std::abs(multicast_relay_capacity(p1, p3, g) - double(ref)) < 1e-7);
    }
    const auto t = multicast_terms(3, 2, {1, 0.5, 0.5, 1}, 0.3);
    CHECK(t.relay_decoding == doctest::Approx(double(oracle::cap(3 * (1 - 0.09L)))));
}

TEST_CASE("symmetric_rate_sweep")
{
    auto templ = paper_channel(1);
    const auto one = symmetric_rate_sweep(templ, {5.0}, Strategy::df);
    REQUIRE(one.size() == 1);
    CHECK(one[0].p_db == 5.0);
    CHECK(one[0].rate == max_symmetric_rate(df_cloud(paper_channel(1))));

    const auto rows = symmetric_rate_sweep(templ, {0, 4, 8, 12}, Strategy::cf);
    for (std::size_t i = 1; i < rows.size(); ++i) CHECK(rows[i].rate >= rows[i - 1].rate);
}
