#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "cmacr/infomeasure.hpp"
#include "cmacr/region.hpp"

namespace cmacr::dmc {

using info::JointPmf;
using region::LinearRateRegion;
using region::PointCloudRegion;

// Axis labels of assembled joints.
inline const std::string kQ = "Q";
inline const std::string kU1 = "U1";
inline const std::string kU2 = "U2";
inline const std::string kX1 = "X1";
inline const std::string kX2 = "X2";
inline const std::string kX3 = "X3";
inline const std::string kY1 = "Y1";
inline const std::string kY2 = "Y2";
inline const std::string kY3 = "Y3";
inline const std::string kYh3 = "Yh3";

/// Discrete memoryless cMACr law p(y1, y2, y3 | x1, x2, x3), stored row-major
/// over (x1, x2, x3, y1, y2, y3).
class DmcChannel {
public:
    DmcChannel(std::array<std::size_t, 3> card_x, std::array<std::size_t, 3> card_y,
               std::vector<double> trans);

    const std::array<std::size_t, 3>& card_x() const { return card_x_; }
    const std::array<std::size_t, 3>& card_y() const { return card_y_; }
    const std::vector<double>& trans() const { return trans_; }

    std::size_t inputs() const { return card_x_[0] * card_x_[1] * card_x_[2]; }
    std::size_t outputs() const { return card_y_[0] * card_y_[1] * card_y_[2]; }
    double at(std::size_t x1, std::size_t x2, std::size_t x3, std::size_t y1, std::size_t y2,
              std::size_t y3) const;

    /// Builds a channel from a callable law(x1, x2, x3, y1, y2, y3).
    template <class Law>
    static DmcChannel from_law(std::array<std::size_t, 3> cx, std::array<std::size_t, 3> cy, Law law)
    {
        std::vector<double> t;
        t.reserve(cx[0] * cx[1] * cx[2] * cy[0] * cy[1] * cy[2]);
        for (std::size_t a = 0; a < cx[0]; ++a)
            for (std::size_t b = 0; b < cx[1]; ++b)
                for (std::size_t c = 0; c < cx[2]; ++c)
                    for (std::size_t d = 0; d < cy[0]; ++d)
                        for (std::size_t e = 0; e < cy[1]; ++e)
                            for (std::size_t f = 0; f < cy[2]; ++f) t.push_back(law(a, b, c, d, e, f));
        return DmcChannel(cx, cy, std::move(t));
    }

private:
    std::array<std::size_t, 3> card_x_;
    std::array<std::size_t, 3> card_y_;
    std::vector<double> trans_;
};

/**
 * Input distribution p(q) p(x1,u1|q) p(x2,u2|q) p(x3|u1,u2,q), optionally
 * followed by a relay quantizer p(yh3|y3,x3,q) for compress-and-forward.
 *
 * Factor tables are row-major in the order their arguments are listed:
 *   pq[q], px1u1[q][x1][u1], px2u2[q][x2][u2], px3[q][u1][u2][x3],
 *   pyh3[q][y3][x3][yh3].
 * card_yh3 == 0 means no quantizer.
 */
struct FactorizedInput {
    std::size_t card_q = 1;
    std::size_t card_u1 = 1;
    std::size_t card_u2 = 1;
    std::array<std::size_t, 3> card_x{1, 1, 1};
    std::size_t card_y3 = 1;
    std::size_t card_yh3 = 0;

    std::vector<double> pq;
    std::vector<double> px1u1;
    std::vector<double> px2u2;
    std::vector<double> px3;
    std::vector<double> pyh3;

    /// Throws unless every factor has the right size and each conditional
    /// slice sums to 1 within 1e-12.
    void validate() const;
    /// Stable 64-bit FNV-1a digest of cardinalities and factor values, as hex.
    std::string hash() const;

    /// Factors all uniform.
    static FactorizedInput uniform(std::size_t card_q, std::size_t card_u1, std::size_t card_u2,
                                   std::array<std::size_t, 3> card_x, std::size_t card_y3 = 1,
                                   std::size_t card_yh3 = 0);
};

struct LinkCapacities {
    double c1 = 0.0;
    double c2 = 0.0;
};

/// Joint over (Q, U1, U2, X1, X2, X3, Y1, Y2, Y3[, Yh3]).
JointPmf assemble_joint(const DmcChannel& ch, const FactorizedInput& inp);

/// MAC with a cognitive relay, single receiver `output`.
LinearRateRegion cognitive_mac_region(const JointPmf& joint, const std::string& output = "Y");
/// MAC with a relay informed of W1 only; needs p(q)p(x2|q)p(x1,x3|q).
LinearRateRegion partial_cognitive_region(const JointPmf& joint, const std::string& output = "Y");
/// Cognition through orthogonal source-to-relay links of capacities c1, c2.
LinearRateRegion limited_link_region(const JointPmf& joint, const LinkCapacities& lc,
                                     const std::string& output = "Y");
/// Decode-and-forward for the cMACr.
LinearRateRegion df_region_dmc(const JointPmf& joint);
/// Compress-and-forward with a single quantized description Yh3. Returns the
/// empty marker when the quantization rate does not fit at R3 = 0.
LinearRateRegion cf_region_dmc(const JointPmf& joint);
/// Outer bound for channels without cross links. Throws if the joint
/// violates Y1 - (X1,X3) - X2 or Y2 - (X2,X3) - X1.
LinearRateRegion outer_bound_dmc(const JointPmf& joint);
/// Compound MAC with a cognitive relay: intersection over receivers Y1 and Y2.
LinearRateRegion compound_cognitive_region(const JointPmf& joint);

/// Y1 - (X1,X3) - X2 and Y2 - (X2,X3) - X1 as properties of the channel law.
bool verify_markov(const DmcChannel& ch, double tol = 1e-12);

/// Y3 = (Y31, Y32) with y3 = y31 * card_y32 + y32.
struct RelaySplit {
    std::size_t card_y31 = 1;
    std::size_t card_y32 = 1;
};

/// X1 - (X2,X3) - Y32 and X2 - (X1,X3) - Y31. Throws if |Y3| != |Y31||Y32|.
bool verify_orthogonal_relay(const DmcChannel& ch, const RelaySplit& split, double tol = 1e-12);

enum class Builder {
    cognitive,
    partial_cognitive,
    limited_link,
    compound_cognitive,
    decode_forward,
    compress_forward,
    outer_bound,
};

std::string to_string(Builder b);
Builder builder_from_string(const std::string& s);

struct SearchOptions {
    std::size_t card_q = 2;
    std::size_t card_u = 2;
    std::size_t card_yh3 = 2;
    /// Single-receiver builders read this output (Y1, Y2 or Y3).
    std::string output = "Y1";
    LinkCapacities links{};
    unsigned threads = 1;
};

/// Evaluates one builder on an assembled joint.
LinearRateRegion evaluate_builder(Builder b, const JointPmf& joint, const SearchOptions& opts);

/// Draws an input distribution of the shape the builder requires.
FactorizedInput sample_input(const DmcChannel& ch, Builder b, const SearchOptions& opts,
                             std::uint64_t seed);

/**
 * Seeded random search over input distributions followed by perturbation
 * refinement of the best candidates per objective.
 *
 * Roughly 70% of `budget` evaluations are independent draws, the rest are
 * refinement steps. Each draw uses its own derived seed, so the result is
 * bit-identical for a given (seed, budget) regardless of `opts.threads`.
 * The cloud holds the corner points of every evaluated region, tagged with
 * the input's hash.
 */
PointCloudRegion search_region(const DmcChannel& ch, Builder b, std::size_t budget,
                               std::uint64_t seed, const SearchOptions& opts = {});

nlohmann::json to_json(const DmcChannel& ch);
DmcChannel dmc_channel_from_json(const nlohmann::json& j);

}  // namespace cmacr::dmc
