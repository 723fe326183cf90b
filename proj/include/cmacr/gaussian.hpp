#pragma once

#include <optional>
#include <string>
#include <vector>

#include "cmacr/region.hpp"

namespace cmacr::gaussian {

using region::LinearRateRegion;
using region::PointCloudRegion;
using region::RateTriple;

double db_to_linear(double db);

/**
 * Gaussian compound MAC with a relay:
 *   Y1 = X1 + eta X3 + Z1,  Y2 = X2 + eta X3 + Z2,  Y3 = gamma (X1 + X2) + Z3
 * with unit-variance noise and linear-scale power constraints p1, p2, p3.
 */
struct GaussianChannel {
    double p1 = 0.0;
    double p2 = 0.0;
    double p3 = 0.0;
    double gamma = 0.0;
    double eta = 0.0;

    void validate() const;
    /// Powers in dB, squared gains in linear scale.
    static GaussianChannel from_db(double p1_db, double p2_db, double p3_db, double gamma_sq,
                                   double eta_sq);
    GaussianChannel swapped() const { return {p2, p1, p3, gamma, eta}; }
};

/// DF power split: source fractions a1, a2 and relay fractions a3p, a3pp
/// spent cooperating with source 1 and source 2.
struct DfSplit {
    double a1 = 0.0;
    double a2 = 0.0;
    double a3p = 0.0;
    double a3pp = 0.0;

    void validate() const;
    DfSplit swapped() const { return {a2, a1, a3pp, a3p}; }
};

struct CfSplit {
    double a1 = 0.0;
    double a2 = 0.0;

    void validate() const;
};

/// How the second term of the DF sum-rate bound weights the relay's
/// cooperation with source 2: the printed formula multiplies alpha1, the
/// user-symmetric reading multiplies alpha2.
enum class SumRateReading { symmetric, as_printed };

struct DfFormula {
    SumRateReading reading = SumRateReading::symmetric;
    /// Fault injection for the verification suite: replaces the min in the DF
    /// sum-rate bound with a max. Never set outside of mutation testing.
    bool fault_sum_max = false;
};

/// The three DF bounds before they are packed into a region.
struct DfBounds {
    double r1 = 0.0;
    double r2 = 0.0;
    double sum = 0.0;
};

DfBounds df_bounds(const GaussianChannel& ch, const DfSplit& s, const DfFormula& f = {},
                   bool outer = false);

/// DF region at a fixed split: masks {1}, {2}, {1,2}.
LinearRateRegion df_region_at(const GaussianChannel& ch, const DfSplit& s, const DfFormula& f = {});
/// Outer bound at a fixed split: the DF region without the relay sum-rate term.
LinearRateRegion outer_region_at(const GaussianChannel& ch, const DfSplit& s,
                                 const DfFormula& f = {});

/// Quantization noise variance of the Gaussian CF scheme. Throws if eta^2 P3 == 0.
double quantization_noise(const GaussianChannel& ch, const CfSplit& s);
LinearRateRegion cf_region_at(const GaussianChannel& ch, const CfSplit& s);

struct CloudOptions {
    double grid_step = 0.05;
    int halvings = 6;
    int directions = region::kDefaultDirections;
    unsigned threads = 1;
    DfFormula formula{};
};

enum class Strategy { df, cf, outer };

std::string to_string(Strategy s);
Strategy strategy_from_string(const std::string& s);

/**
 * Achievable-point cloud for a strategy at R3 = 0.
 *
 * Evaluates every split on the grid, keeps the corner points that reach the
 * upper-right hull, then runs a pattern search (single- and two-coordinate
 * moves, step halved `halvings` times) from the best split of each sweep
 * direction. Points carry their split as provenance. Output is identical for
 * any thread count.
 */
PointCloudRegion df_cloud(const GaussianChannel& ch, const CloudOptions& opts = {});
PointCloudRegion outer_bound_region(const GaussianChannel& ch, const CloudOptions& opts = {});
PointCloudRegion cf_cloud(const GaussianChannel& ch, const CloudOptions& opts = {});
PointCloudRegion strategy_cloud(const GaussianChannel& ch, Strategy s, const CloudOptions& opts = {});

/// Rebuilds the fixed-split region a cloud point was taken from.
LinearRateRegion region_from_provenance(const GaussianChannel& ch, const region::Provenance& src,
                                        const DfFormula& f = {});

/// Corner points of {R1 <= r1, R2 <= r2, R1 + R2 <= sum} at R3 = 0.
std::vector<RateTriple> planar_corners(double r1, double r2, double sum);

/// Searches for an outer-bound split whose region contains `t`.
std::optional<DfSplit> outer_certificate(const GaussianChannel& ch, const RateTriple& t,
                                         const DfFormula& f = {});

struct RelayGains {
    double source_relay = 0.0;
    double source_rx1 = 0.0;
    double relay_rx1 = 0.0;
    double relay_rx2 = 0.0;
};

struct MulticastTerms {
    double relay_decoding = 0.0;
    double rx1 = 0.0;
    double rx2 = 0.0;
};

/// Mutual-information terms of the multicast relay channel with jointly
/// Gaussian (X1, X3) of correlation rho.
MulticastTerms multicast_terms(double p1, double p3, const RelayGains& g, double rho);

/// Capacity of the single-source multicast relay channel: golden-section
/// search over rho in [0, 1] of the min of the three terms.
double multicast_relay_capacity(double p1, double p3, const RelayGains& g);

struct SweepRow {
    double p_db = 0.0;
    Strategy strategy = Strategy::df;
    double rate = 0.0;
};

/// Symmetric rate versus common power P1 = P2 = P3 = P (dB); the template
/// supplies gamma and eta.
std::vector<SweepRow> symmetric_rate_sweep(const GaussianChannel& templ,
                                           const std::vector<double>& p_db, Strategy s,
                                           const CloudOptions& opts = {});

}  // namespace cmacr::gaussian
