#include "cmacr/dmc.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cmath>
#include <cstring>
#include <limits>
#include <random>
#include <stdexcept>
#include <thread>

namespace cmacr::dmc {

using info::InfoEvaluator;
using info::VarSet;
using region::mask_of;

namespace {

constexpr double kFactorTol = 1e-9;

void check_slices(const std::vector<double>& t, std::size_t slice, const char* what)
{
    if (slice == 0 || t.size() % slice != 0)
        throw std::invalid_argument(std::string(what) + ": table size is not a multiple of the slice");
    for (std::size_t s = 0; s < t.size(); s += slice) {
        double total = 0.0;
        for (std::size_t k = 0; k < slice; ++k) {
            const double v = t[s + k];
            if (!(v >= 0.0) || !std::isfinite(v))
                throw std::invalid_argument(std::string(what) + ": entries must be finite and >= 0");
            total += v;
        }
        if (std::abs(total - 1.0) > info::kNormTolerance)
            throw std::invalid_argument(std::string(what) + ": conditional slice sums to " +
                                        std::to_string(total));
    }
}

}  // namespace

DmcChannel::DmcChannel(std::array<std::size_t, 3> card_x, std::array<std::size_t, 3> card_y,
                       std::vector<double> trans)
    : card_x_(card_x), card_y_(card_y), trans_(std::move(trans))
{
    for (auto c : card_x_)
        if (c == 0) throw std::invalid_argument("DmcChannel: input cardinalities must be >= 1");
    for (auto c : card_y_)
        if (c == 0) throw std::invalid_argument("DmcChannel: output cardinalities must be >= 1");
    if (trans_.size() != inputs() * outputs())
        throw std::invalid_argument("DmcChannel: transition tensor has " +
                                    std::to_string(trans_.size()) + " entries, expected " +
                                    std::to_string(inputs() * outputs()));
    check_slices(trans_, outputs(), "DmcChannel");
}

double DmcChannel::at(std::size_t x1, std::size_t x2, std::size_t x3, std::size_t y1,
                      std::size_t y2, std::size_t y3) const
{
    const std::size_t x = (x1 * card_x_[1] + x2) * card_x_[2] + x3;
    const std::size_t y = (y1 * card_y_[1] + y2) * card_y_[2] + y3;
    return trans_[x * outputs() + y];
}

void FactorizedInput::validate() const
{
    if (card_q == 0 || card_u1 == 0 || card_u2 == 0 || card_y3 == 0)
        throw std::invalid_argument("FactorizedInput: cardinalities must be >= 1");
    for (auto c : card_x)
        if (c == 0) throw std::invalid_argument("FactorizedInput: input cardinalities must be >= 1");
    auto expect = [](const std::vector<double>& t, std::size_t n, const char* what) {
        if (t.size() != n)
            throw std::invalid_argument(std::string("FactorizedInput: ") + what + " has " +
                                        std::to_string(t.size()) + " entries, expected " +
                                        std::to_string(n));
    };
    expect(pq, card_q, "p(q)");
    expect(px1u1, card_q * card_x[0] * card_u1, "p(x1,u1|q)");
    expect(px2u2, card_q * card_x[1] * card_u2, "p(x2,u2|q)");
    expect(px3, card_q * card_u1 * card_u2 * card_x[2], "p(x3|u1,u2,q)");
    check_slices(pq, card_q, "p(q)");
    check_slices(px1u1, card_x[0] * card_u1, "p(x1,u1|q)");
    check_slices(px2u2, card_x[1] * card_u2, "p(x2,u2|q)");
    check_slices(px3, card_x[2], "p(x3|u1,u2,q)");
    if (card_yh3 > 0) {
        expect(pyh3, card_q * card_y3 * card_x[2] * card_yh3, "p(yh3|y3,x3,q)");
        check_slices(pyh3, card_yh3, "p(yh3|y3,x3,q)");
    } else if (!pyh3.empty()) {
        throw std::invalid_argument("FactorizedInput: quantizer table given with card_yh3 = 0");
    }
}

std::string FactorizedInput::hash() const
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto mix = [&h](std::uint64_t v) {
        for (int k = 0; k < 8; ++k) {
            h ^= (v >> (8 * k)) & 0xff;
            h *= 0x100000001b3ULL;
        }
    };
    for (auto c : {card_q, card_u1, card_u2, card_x[0], card_x[1], card_x[2], card_y3, card_yh3})
        mix(c);
    for (const auto* t : {&pq, &px1u1, &px2u2, &px3, &pyh3}) {
        mix(t->size());
        for (double v : *t) {
            std::uint64_t bits;
            std::memcpy(&bits, &v, sizeof bits);
            mix(bits);
        }
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

FactorizedInput FactorizedInput::uniform(std::size_t card_q, std::size_t card_u1,
                                         std::size_t card_u2, std::array<std::size_t, 3> card_x,
                                         std::size_t card_y3, std::size_t card_yh3)
{
    FactorizedInput f;
    f.card_q = card_q;
    f.card_u1 = card_u1;
    f.card_u2 = card_u2;
    f.card_x = card_x;
    f.card_y3 = card_y3;
    f.card_yh3 = card_yh3;
    f.pq.assign(card_q, 1.0 / card_q);
    f.px1u1.assign(card_q * card_x[0] * card_u1, 1.0 / (card_x[0] * card_u1));
    f.px2u2.assign(card_q * card_x[1] * card_u2, 1.0 / (card_x[1] * card_u2));
    f.px3.assign(card_q * card_u1 * card_u2 * card_x[2], 1.0 / card_x[2]);
    if (card_yh3 > 0) f.pyh3.assign(card_q * card_y3 * card_x[2] * card_yh3, 1.0 / card_yh3);
    return f;
}

JointPmf assemble_joint(const DmcChannel& ch, const FactorizedInput& in)
{
    in.validate();
    if (in.card_x != ch.card_x())
        throw std::invalid_argument("assemble_joint: input cardinalities do not match the channel");
    const bool quantized = in.card_yh3 > 0;
    if (quantized && in.card_y3 != ch.card_y()[2])
        throw std::invalid_argument("assemble_joint: quantizer Y3 cardinality does not match the channel");

    const auto [nx1, nx2, nx3] = ch.card_x();
    const auto [ny1, ny2, ny3] = ch.card_y();
    const std::size_t nq = in.card_q, nu1 = in.card_u1, nu2 = in.card_u2, nh = in.card_yh3;

    std::vector<std::string> labels{kQ, kU1, kU2, kX1, kX2, kX3, kY1, kY2, kY3};
    std::vector<std::size_t> cards{nq, nu1, nu2, nx1, nx2, nx3, ny1, ny2, ny3};
    if (quantized) {
        labels.push_back(kYh3);
        cards.push_back(nh);
    }
    std::vector<double> probs;
    std::size_t total = 1;
    for (auto c : cards) total *= c;
    probs.reserve(total);

    for (std::size_t q = 0; q < nq; ++q)
        for (std::size_t u1 = 0; u1 < nu1; ++u1)
            for (std::size_t u2 = 0; u2 < nu2; ++u2)
                for (std::size_t x1 = 0; x1 < nx1; ++x1)
                    for (std::size_t x2 = 0; x2 < nx2; ++x2)
                        for (std::size_t x3 = 0; x3 < nx3; ++x3) {
                            const double pin = in.pq[q] * in.px1u1[(q * nx1 + x1) * nu1 + u1] *
                                               in.px2u2[(q * nx2 + x2) * nu2 + u2] *
                                               in.px3[((q * nu1 + u1) * nu2 + u2) * nx3 + x3];
                            for (std::size_t y1 = 0; y1 < ny1; ++y1)
                                for (std::size_t y2 = 0; y2 < ny2; ++y2)
                                    for (std::size_t y3 = 0; y3 < ny3; ++y3) {
                                        const double p = pin * ch.at(x1, x2, x3, y1, y2, y3);
                                        if (!quantized) {
                                            probs.push_back(p);
                                            continue;
                                        }
                                        for (std::size_t h = 0; h < nh; ++h)
                                            probs.push_back(
                                                p * in.pyh3[((q * ny3 + y3) * nx3 + x3) * nh + h]);
                                    }
                        }
    return JointPmf(std::move(labels), std::move(cards), std::move(probs));
}

// ---------------------------------------------------------------------------
// Region builders

namespace {

void require_vars(const JointPmf& j, const VarSet& vars, const char* who)
{
    for (const auto& v : vars)
        if (!j.has(v))
            throw std::invalid_argument(std::string(who) + ": joint is missing variable '" + v + "'");
}

void require_ci(const JointPmf& j, const VarSet& a, const VarSet& b, const VarSet& g,
                const char* who, const char* what)
{
    if (!info::conditionally_independent(j, a, b, g, kFactorTol))
        throw std::invalid_argument(std::string(who) + ": joint violates the factorization (" +
                                    what + ")");
}

/// Checks p(q)p(x1,u1|q)p(x2,u2|q)p(x3|u1,u2,q) and that `outputs` depend
/// on (Q, U1, U2) only through the channel inputs.
void require_cognitive_form(const JointPmf& j, const VarSet& outputs, const char* who)
{
    require_vars(j, {kQ, kU1, kU2, kX1, kX2, kX3}, who);
    require_vars(j, outputs, who);
    require_ci(j, {kX1, kU1}, {kX2, kU2}, {kQ}, who, "(X1,U1) and (X2,U2) given Q");
    require_ci(j, {kX3}, {kX1, kX2}, {kU1, kU2, kQ}, who, "X3 and (X1,X2) given (U1,U2,Q)");
    require_ci(j, outputs, {kQ, kU1, kU2}, {kX1, kX2, kX3}, who, "channel law");
}

VarSet present(const JointPmf& j, const VarSet& vars)
{
    VarSet out;
    for (const auto& v : vars)
        if (j.has(v)) out.push_back(v);
    return out;
}

}  // namespace

LinearRateRegion cognitive_mac_region(const JointPmf& joint, const std::string& y)
{
    require_cognitive_form(joint, {y}, "cognitive_mac_region");
    InfoEvaluator ev(joint);
    LinearRateRegion r;
    r.add(mask_of({3}), ev.mi({kX3}, {y}, {kX1, kX2, kU1, kU2, kQ}));
    r.add(mask_of({1, 3}), ev.mi({kX1, kX3}, {y}, {kX2, kU2, kQ}));
    r.add(mask_of({2, 3}), ev.mi({kX2, kX3}, {y}, {kX1, kU1, kQ}));
    r.add(mask_of({1, 2, 3}), ev.mi({kX1, kX2, kX3}, {y}, {kQ}));
    return r;
}

LinearRateRegion partial_cognitive_region(const JointPmf& joint, const std::string& y)
{
    const char* who = "partial_cognitive_region";
    require_vars(joint, {kQ, kX1, kX2, kX3, y}, who);
    require_ci(joint, {kX2}, {kX1, kX3}, {kQ}, who, "X2 and (X1,X3) given Q");
    auto context = present(joint, {kQ, kU1, kU2});
    require_ci(joint, {y}, context, {kX1, kX2, kX3}, who, "channel law");
    InfoEvaluator ev(joint);
    LinearRateRegion r;
    r.add(mask_of({2}), ev.mi({kX2}, {y}, {kX1, kX3, kQ}));
    r.add(mask_of({3}), ev.mi({kX3}, {y}, {kX1, kX2, kQ}));
    r.add(mask_of({1, 3}), ev.mi({kX1, kX3}, {y}, {kX2, kQ}));
    r.add(mask_of({2, 3}), ev.mi({kX2, kX3}, {y}, {kX1, kQ}));
    r.add(mask_of({1, 2, 3}), ev.mi({kX1, kX2, kX3}, {y}, {kQ}));
    return r;
}

LinearRateRegion limited_link_region(const JointPmf& joint, const LinkCapacities& lc,
                                     const std::string& y)
{
    if (!(lc.c1 >= 0.0) || !(lc.c2 >= 0.0) || !std::isfinite(lc.c1) || !std::isfinite(lc.c2))
        throw std::invalid_argument("limited_link_region: link capacities must be finite and >= 0");
    require_cognitive_form(joint, {y}, "limited_link_region");
    InfoEvaluator ev(joint);
    const VarSet all{kX1, kX2, kX3};
    LinearRateRegion r;
    r.add(mask_of({1}), ev.mi({kX1}, {y}, {kX2, kX3, kU1, kU2, kQ}) + lc.c1);
    r.add(mask_of({2}), ev.mi({kX2}, {y}, {kX1, kX3, kU1, kU2, kQ}) + lc.c2);
    r.add(mask_of({3}), ev.mi({kX3}, {y}, {kX1, kX2, kU1, kU2, kQ}));
    r.add(mask_of({1, 2}), ev.mi({kX1, kX2}, {y}, {kX3, kU1, kU2, kQ}) + lc.c1 + lc.c2);
    r.add(mask_of({1, 3}), std::min(ev.mi({kX1, kX3}, {y}, {kX2, kU1, kU2, kQ}) + lc.c1,
                                    ev.mi({kX1, kX3}, {y}, {kX2, kU2, kQ})));
    r.add(mask_of({2, 3}), std::min(ev.mi({kX2, kX3}, {y}, {kX1, kU1, kU2, kQ}) + lc.c2,
                                    ev.mi({kX2, kX3}, {y}, {kX1, kU1, kQ})));
    r.add(mask_of({1, 2, 3}), std::min({ev.mi(all, {y}, {kU1, kQ}) + lc.c1,
                                        ev.mi(all, {y}, {kU2, kQ}) + lc.c2,
                                        ev.mi(all, {y}, {kQ}),
                                        ev.mi(all, {y}, {kU1, kU2, kQ}) + lc.c1 + lc.c2}));
    return r;
}

LinearRateRegion df_region_dmc(const JointPmf& joint)
{
    require_cognitive_form(joint, {kY1, kY2, kY3}, "df_region_dmc");
    InfoEvaluator ev(joint);
    auto both = [&ev](const VarSet& a, const VarSet& g) {
        return std::min(ev.mi(a, {kY1}, g), ev.mi(a, {kY2}, g));
    };
    LinearRateRegion r;
    r.add(mask_of({1}), ev.mi({kX1}, {kY3}, {kU1, kX2, kX3, kQ}));
    r.add(mask_of({2}), ev.mi({kX2}, {kY3}, {kU2, kX1, kX3, kQ}));
    r.add(mask_of({1, 2}), ev.mi({kX1, kX2}, {kY3}, {kU1, kU2, kX3, kQ}));
    r.add(mask_of({3}), both({kX3}, {kX1, kX2, kU1, kU2, kQ}));
    r.add(mask_of({1, 3}), both({kX1, kX3}, {kX2, kU2, kQ}));
    r.add(mask_of({2, 3}), both({kX2, kX3}, {kX1, kU1, kQ}));
    r.add(mask_of({1, 2, 3}), both({kX1, kX2, kX3}, {kQ}));
    return r;
}

LinearRateRegion cf_region_dmc(const JointPmf& joint)
{
    const char* who = "cf_region_dmc";
    require_vars(joint, {kQ, kX1, kX2, kX3, kY1, kY2, kY3, kYh3}, who);
    require_ci(joint, {kX1}, {kX2, kX3}, {kQ}, who, "X1 and (X2,X3) given Q");
    require_ci(joint, {kX2}, {kX3}, {kQ}, who, "X2 and X3 given Q");
    auto context = present(joint, {kQ, kU1, kU2});
    require_ci(joint, {kY1, kY2, kY3}, context, {kX1, kX2, kX3}, who, "channel law");
    auto others = present(joint, {kX1, kX2, kY1, kY2, kU1, kU2});
    require_ci(joint, {kYh3}, others, {kY3, kX3, kQ}, who, "quantizer p(yh3|y3,x3,q)");

    InfoEvaluator ev(joint);
    double r3 = std::numeric_limits<double>::infinity();
    for (const auto& y : {kY1, kY2}) {
        const double room = ev.mi({kX3}, {y}, {kQ}) - ev.mi({kY3}, {kYh3}, {kX3, y, kQ});
        if (room < -region::kSlack) return LinearRateRegion::empty_marker();
        r3 = std::min(r3, std::max(0.0, room));
    }
    auto both = [&ev](const VarSet& a, const VarSet& g) {
        return std::min(ev.mi(a, {kY1, kYh3}, g), ev.mi(a, {kY2, kYh3}, g));
    };
    LinearRateRegion r;
    r.add(mask_of({1}), both({kX1}, {kX2, kX3, kQ}));
    r.add(mask_of({2}), both({kX2}, {kX1, kX3, kQ}));
    r.add(mask_of({1, 2}), both({kX1, kX2}, {kX3, kQ}));
    r.add(mask_of({3}), r3);
    return r;
}

LinearRateRegion outer_bound_dmc(const JointPmf& joint)
{
    const char* who = "outer_bound_dmc";
    require_cognitive_form(joint, {kY1, kY2, kY3}, who);
    if (!info::conditionally_independent(joint, {kY1}, {kX2}, {kX1, kX3}, kFactorTol) ||
        !info::conditionally_independent(joint, {kY2}, {kX1}, {kX2, kX3}, kFactorTol))
        throw std::invalid_argument(
            "outer_bound_dmc: channel violates Y1-(X1,X3)-X2 or Y2-(X2,X3)-X1; bound does not apply");
    InfoEvaluator ev(joint);
    LinearRateRegion r;
    r.add(mask_of({1}), ev.mi({kX1}, {kY3}, {kU1, kX2, kX3, kQ}));
    r.add(mask_of({2}), ev.mi({kX2}, {kY3}, {kU2, kX1, kX3, kQ}));
    r.add(mask_of({3}), std::min(ev.mi({kX3}, {kY1}, {kX1, kX2, kU1, kU2, kQ}),
                                 ev.mi({kX3}, {kY2}, {kX1, kX2, kU1, kU2, kQ})));
    r.add(mask_of({1, 3}),
          std::min(ev.mi({kX1, kX3}, {kY1}, {kU2, kQ}), ev.mi({kX3}, {kY2}, {kX2, kU2, kQ})));
    r.add(mask_of({2, 3}),
          std::min(ev.mi({kX3}, {kY1}, {kX1, kU1, kQ}), ev.mi({kX2, kX3}, {kY2}, {kU1, kQ})));
    r.add(mask_of({1, 2, 3}),
          std::min(ev.mi({kX1, kX3}, {kY1}, {kQ}), ev.mi({kX2, kX3}, {kY2}, {kQ})));
    return r;
}

LinearRateRegion compound_cognitive_region(const JointPmf& joint)
{
    return region::intersect(cognitive_mac_region(joint, kY1), cognitive_mac_region(joint, kY2));
}

// ---------------------------------------------------------------------------
// Structural checks on the channel law

namespace {

/// p(y_k | x1, x2, x3) laid out as [x1][x2][x3][y_k].
std::vector<double> output_marginal(const DmcChannel& ch, int k)
{
    const auto cx = ch.card_x();
    const auto cy = ch.card_y();
    std::vector<double> out(ch.inputs() * cy[k], 0.0);
    for (std::size_t a = 0; a < cx[0]; ++a)
        for (std::size_t b = 0; b < cx[1]; ++b)
            for (std::size_t c = 0; c < cx[2]; ++c) {
                const std::size_t x = (a * cx[1] + b) * cx[2] + c;
                for (std::size_t d = 0; d < cy[0]; ++d)
                    for (std::size_t e = 0; e < cy[1]; ++e)
                        for (std::size_t f = 0; f < cy[2]; ++f) {
                            const std::size_t y = k == 0 ? d : (k == 1 ? e : f);
                            out[x * cy[k] + y] += ch.at(a, b, c, d, e, f);
                        }
            }
    return out;
}

/// True if table[x1][x2][x3][y] does not vary with the input on axis `free`.
bool constant_along(const std::vector<double>& table, const std::array<std::size_t, 3>& cx,
                    std::size_t ny, int free, double tol)
{
    for (std::size_t a = 0; a < cx[0]; ++a)
        for (std::size_t b = 0; b < cx[1]; ++b)
            for (std::size_t c = 0; c < cx[2]; ++c) {
                std::array<std::size_t, 3> ref{a, b, c};
                ref[free] = 0;
                const std::size_t x = (a * cx[1] + b) * cx[2] + c;
                const std::size_t x0 = (ref[0] * cx[1] + ref[1]) * cx[2] + ref[2];
                for (std::size_t y = 0; y < ny; ++y)
                    if (std::abs(table[x * ny + y] - table[x0 * ny + y]) > tol) return false;
            }
    return true;
}

}  // namespace

bool verify_markov(const DmcChannel& ch, double tol)
{
    const auto cx = ch.card_x();
    const auto cy = ch.card_y();
    return constant_along(output_marginal(ch, 0), cx, cy[0], 1, tol) &&
           constant_along(output_marginal(ch, 1), cx, cy[1], 0, tol);
}

bool verify_orthogonal_relay(const DmcChannel& ch, const RelaySplit& split, double tol)
{
    const auto cx = ch.card_x();
    const std::size_t n3 = ch.card_y()[2];
    if (split.card_y31 == 0 || split.card_y32 == 0 || split.card_y31 * split.card_y32 != n3)
        throw std::invalid_argument("verify_orthogonal_relay: |Y3| = " + std::to_string(n3) +
                                    " does not factor as |Y31| x |Y32|");
    const auto y3 = output_marginal(ch, 2);
    std::vector<double> y31(ch.inputs() * split.card_y31, 0.0);
    std::vector<double> y32(ch.inputs() * split.card_y32, 0.0);
    for (std::size_t x = 0; x < ch.inputs(); ++x)
        for (std::size_t y = 0; y < n3; ++y) {
            y31[x * split.card_y31 + y / split.card_y32] += y3[x * n3 + y];
            y32[x * split.card_y32 + y % split.card_y32] += y3[x * n3 + y];
        }
    return constant_along(y32, cx, split.card_y32, 0, tol) &&
           constant_along(y31, cx, split.card_y31, 1, tol);
}

// ---------------------------------------------------------------------------
// Search

std::string to_string(Builder b)
{
    switch (b) {
    case Builder::cognitive: return "cognitive";
    case Builder::partial_cognitive: return "partial_cognitive";
    case Builder::limited_link: return "limited_link";
    case Builder::compound_cognitive: return "compound_cognitive";
    case Builder::decode_forward: return "df";
    case Builder::compress_forward: return "cf";
    case Builder::outer_bound: return "outer";
    }
    return "?";
}

Builder builder_from_string(const std::string& s)
{
    for (auto b : {Builder::cognitive, Builder::partial_cognitive, Builder::limited_link,
                   Builder::compound_cognitive, Builder::decode_forward, Builder::compress_forward,
                   Builder::outer_bound})
        if (to_string(b) == s) return b;
    throw std::invalid_argument("unknown proposition builder '" + s + "'");
}

LinearRateRegion evaluate_builder(Builder b, const JointPmf& joint, const SearchOptions& opts)
{
    switch (b) {
    case Builder::cognitive: return cognitive_mac_region(joint, opts.output);
    case Builder::partial_cognitive: return partial_cognitive_region(joint, opts.output);
    case Builder::limited_link: return limited_link_region(joint, opts.links, opts.output);
    case Builder::compound_cognitive: return compound_cognitive_region(joint);
    case Builder::decode_forward: return df_region_dmc(joint);
    case Builder::compress_forward: return cf_region_dmc(joint);
    case Builder::outer_bound: return outer_bound_dmc(joint);
    }
    throw std::invalid_argument("unknown builder");
}

namespace {

std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream, std::uint64_t i)
{
    return splitmix64(splitmix64(seed ^ splitmix64(stream)) + i);
}

double unit_open(std::mt19937_64& rng)
{
    return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
}

/// One distribution over n symbols: flat Dirichlet, sharpened Dirichlet,
/// point mass, or uniform.
void draw_simplex(std::mt19937_64& rng, double* out, std::size_t n)
{
    const auto kind = rng() % 5;
    if (kind == 3) {
        const auto hot = rng() % n;
        for (std::size_t k = 0; k < n; ++k) out[k] = k == hot ? 1.0 : 0.0;
        return;
    }
    if (kind == 4) {
        for (std::size_t k = 0; k < n; ++k) out[k] = 1.0 / static_cast<double>(n);
        return;
    }
    double total = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        double e = -std::log(unit_open(rng));
        if (kind == 2) e = e * e * e;
        out[k] = e;
        total += e;
    }
    for (std::size_t k = 0; k < n; ++k) out[k] /= total;
}

void fill(std::mt19937_64& rng, std::vector<double>& t, std::size_t slice)
{
    for (std::size_t s = 0; s < t.size(); s += slice) draw_simplex(rng, t.data() + s, slice);
}

// Conditional slices of a mixture may drift from 1 by an ulp or two.
void renormalize(std::vector<double>& t, std::size_t slice)
{
    for (std::size_t s = 0; s < t.size(); s += slice) {
        double total = 0.0;
        for (std::size_t k = 0; k < slice; ++k) total += t[s + k];
        for (std::size_t k = 0; k < slice; ++k) t[s + k] /= total;
    }
}

FactorizedInput mix(const FactorizedInput& a, const FactorizedInput& b, double w)
{
    FactorizedInput out = a;
    auto blend = [w](std::vector<double>& x, const std::vector<double>& y, std::size_t slice) {
        for (std::size_t k = 0; k < x.size(); ++k) x[k] = (1.0 - w) * x[k] + w * y[k];
        renormalize(x, slice);
    };
    blend(out.pq, b.pq, a.card_q);
    blend(out.px1u1, b.px1u1, a.card_x[0] * a.card_u1);
    blend(out.px2u2, b.px2u2, a.card_x[1] * a.card_u2);
    blend(out.px3, b.px3, a.card_x[2]);
    if (a.card_yh3 > 0) blend(out.pyh3, b.pyh3, a.card_yh3);
    return out;
}

/// Scores of one region against the refinement objectives: weighted
/// supports, then the symmetric rate at R3 = 0.
std::vector<double> objective_scores(const LinearRateRegion& r)
{
    static const std::array<std::array<double, 3>, 9> weights{{{1, 0, 0},
                                                               {0, 1, 0},
                                                               {0, 0, 1},
                                                               {1, 1, 0},
                                                               {1, 0, 1},
                                                               {0, 1, 1},
                                                               {1, 1, 1},
                                                               {2, 1, 0},
                                                               {1, 2, 0}}};
    std::vector<double> out(weights.size() + 1, -1.0);
    if (r.is_empty()) return out;
    const auto corners = region::corner_points(r);
    for (std::size_t k = 0; k < weights.size(); ++k) {
        double best = 0.0;
        for (const auto& c : corners)
            best = std::max(best, weights[k][0] * c.r1 + weights[k][1] * c.r2 + weights[k][2] * c.r3);
        out[k] = best;
    }
    double sym = std::numeric_limits<double>::infinity();
    for (const auto& c : r.constraints()) {
        const int k = ((c.mask & 1) ? 1 : 0) + ((c.mask & 2) ? 1 : 0);
        if (k > 0) sym = std::min(sym, c.bound / k);
    }
    out.back() = std::isfinite(sym) ? std::max(0.0, sym) : 0.0;
    return out;
}

struct Candidate {
    FactorizedInput input;
    LinearRateRegion region;
    std::vector<double> scores;
};

template <class Fn>
void parallel_for(std::size_t n, unsigned threads, Fn&& fn)
{
    threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(n, 1))));
    if (threads == 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t)
        pool.emplace_back([&] {
            for (std::size_t i; (i = next.fetch_add(1)) < n;) fn(i);
        });
    for (auto& th : pool) th.join();
}

}  // namespace

FactorizedInput sample_input(const DmcChannel& ch, Builder b, const SearchOptions& opts,
                             std::uint64_t seed)
{
    if (opts.card_q == 0 || opts.card_u == 0)
        throw std::invalid_argument("search: auxiliary cardinalities must be >= 1");
    std::mt19937_64 rng(seed);
    const bool cf = b == Builder::compress_forward;
    if (cf && opts.card_yh3 == 0)
        throw std::invalid_argument("search: compress-and-forward needs card_yh3 >= 1");
    FactorizedInput f = FactorizedInput::uniform(opts.card_q, cf ? 1 : opts.card_u,
                                                 cf ? 1 : opts.card_u, ch.card_x(),
                                                 ch.card_y()[2], cf ? opts.card_yh3 : 0);
    fill(rng, f.pq, f.card_q);
    fill(rng, f.px1u1, f.card_x[0] * f.card_u1);
    fill(rng, f.px2u2, f.card_x[1] * f.card_u2);
    fill(rng, f.px3, f.card_x[2]);
    if (cf) fill(rng, f.pyh3, f.card_yh3);

    if (b == Builder::partial_cognitive) {
        // relay input may depend on U1 only: copy the u2 = 0 slice
        const std::size_t nx3 = f.card_x[2];
        for (std::size_t q = 0; q < f.card_q; ++q)
            for (std::size_t u1 = 0; u1 < f.card_u1; ++u1)
                for (std::size_t u2 = 1; u2 < f.card_u2; ++u2)
                    for (std::size_t x3 = 0; x3 < nx3; ++x3)
                        f.px3[((q * f.card_u1 + u1) * f.card_u2 + u2) * nx3 + x3] =
                            f.px3[((q * f.card_u1 + u1) * f.card_u2) * nx3 + x3];
    }
    return f;
}

PointCloudRegion search_region(const DmcChannel& ch, Builder b, std::size_t budget,
                               std::uint64_t seed, const SearchOptions& opts)
{
    if (budget == 0) throw std::invalid_argument("search_region: budget must be >= 1");
    if (b == Builder::outer_bound && !verify_markov(ch))
        throw std::invalid_argument("search_region: outer bound requires a channel without cross links");

    const std::size_t refine = budget >= 10 ? budget * 3 / 10 : 0;
    const std::size_t draws = budget - refine;

    auto evaluate = [&](FactorizedInput in) {
        Candidate c;
        c.region = evaluate_builder(b, assemble_joint(ch, in), opts);
        c.scores = objective_scores(c.region);
        c.input = std::move(in);
        return c;
    };

    std::vector<Candidate> pool(draws);
    parallel_for(draws, opts.threads, [&](std::size_t i) {
        pool[i] = evaluate(sample_input(ch, b, opts, derive_seed(seed, 1, i)));
    });

    const std::size_t objectives = pool.front().scores.size();
    std::vector<std::vector<Candidate>> chains(objectives);
    if (refine > 0) {
        parallel_for(objectives, opts.threads, [&](std::size_t o) {
            std::size_t best = 0;
            for (std::size_t i = 1; i < pool.size(); ++i)
                if (pool[i].scores[o] > pool[best].scores[o]) best = i;
            const std::size_t steps = refine / objectives + (o < refine % objectives ? 1 : 0);
            Candidate current = pool[best];
            double weight = 0.5;
            for (std::size_t k = 0; k < steps; ++k) {
                auto fresh = sample_input(ch, b, opts, derive_seed(seed, 2 + o, k));
                Candidate next = evaluate(mix(current.input, fresh, weight));
                const bool better = next.scores[o] > current.scores[o] + 1e-12;
                chains[o].push_back(next);
                if (better)
                    current = std::move(next);
                else
                    weight = std::max(1e-3, weight * 0.7);
            }
        });
    }

    PointCloudRegion cloud;
    const std::string label = to_string(b);
    auto emit = [&](const Candidate& c) {
        const auto tag = c.input.hash();
        for (const auto& v : region::corner_points(c.region)) cloud.add(v, {label, {}, tag});
    };
    for (const auto& c : pool) emit(c);
    for (const auto& chain : chains)
        for (const auto& c : chain) emit(c);
    return cloud;
}

nlohmann::json to_json(const DmcChannel& ch)
{
    return nlohmann::json{{"card_x", ch.card_x()}, {"card_y", ch.card_y()}, {"trans", ch.trans()}};
}

DmcChannel dmc_channel_from_json(const nlohmann::json& j)
{
    return DmcChannel(j.at("card_x").get<std::array<std::size_t, 3>>(),
                      j.at("card_y").get<std::array<std::size_t, 3>>(),
                      j.at("trans").get<std::vector<double>>());
}

}  // namespace cmacr::dmc
