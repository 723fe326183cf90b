#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace cmacr::region {

/// Slack used by every membership and dominance test, in bits.
inline constexpr double kSlack = 1e-9;
inline constexpr int kDefaultDirections = 181;

/// Rate triplet (R1, R2, R3) in bits per channel use.
struct RateTriple {
    double r1 = 0.0;
    double r2 = 0.0;
    double r3 = 0.0;

    double operator[](int j) const { return j == 0 ? r1 : (j == 1 ? r2 : r3); }
    bool operator==(const RateTriple&) const = default;
};

/// Subset of {R1, R2, R3}; bit j-1 selects R_j.
using Mask = std::uint8_t;

constexpr Mask mask_of(std::initializer_list<int> users)
{
    Mask m = 0;
    for (int u : users) m = static_cast<Mask>(m | (1u << (u - 1)));
    return m;
}

/// Users selected by a mask, 1-based, ascending.
std::vector<int> mask_users(Mask m);

/// sum_{j in mask} R_j <= bound
struct Constraint {
    Mask mask = 0;
    double bound = 0.0;
};

/**
 * Conjunction of sum-rate half-spaces intersected with the nonnegative orthant.
 *
 * At most one constraint is kept per mask; adding a second one for the same
 * mask keeps the smaller bound. A region may also carry an explicit empty
 * marker (an infeasible scheme), which is distinct from zero bounds.
 */
class LinearRateRegion {
public:
    LinearRateRegion() = default;

    /// Adds `sum_{mask} R <= bound`, keeping the tighter bound on a repeat mask.
    LinearRateRegion& add(Mask mask, double bound);

    static LinearRateRegion empty_marker();

    const std::vector<Constraint>& constraints() const { return constraints_; }
    std::optional<double> bound(Mask mask) const;
    bool has_empty_marker() const { return empty_marker_; }
    /// True for the empty marker or when some bound is negative beyond the slack.
    bool is_empty() const;

private:
    std::vector<Constraint> constraints_;
    bool empty_marker_ = false;
};

bool contains(const LinearRateRegion& region, const RateTriple& t, double slack = kSlack);
LinearRateRegion intersect(const LinearRateRegion& a, const LinearRateRegion& b);

/// Vertices of the bounded polytope; regions unbounded along some axis
/// get that axis clipped at `cap`. Empty regions have no vertices.
std::vector<RateTriple> corner_points(const LinearRateRegion& region, double cap = 1e6);

/// Where a cloud point came from: a scheme label and its parameter vector.
struct Provenance {
    std::string label;
    std::vector<double> params;
    std::string tag;

    std::string to_string() const;
};

struct CloudPoint {
    RateTriple rate;
    Provenance source;
};

/**
 * Union of convex regions, represented by certified achievable points.
 *
 * Membership of t holds iff a convex combination of stored points dominates t
 * componentwise (time sharing plus downward closure).
 */
class PointCloudRegion {
public:
    PointCloudRegion() = default;
    explicit PointCloudRegion(std::vector<CloudPoint> points) : points_(std::move(points)) {}

    void add(const RateTriple& rate, Provenance source);
    void append(const PointCloudRegion& other);

    const std::vector<CloudPoint>& points() const { return points_; }
    std::size_t size() const { return points_.size(); }
    bool empty() const { return points_.empty(); }

private:
    std::vector<CloudPoint> points_;
};

/// A point of the 2-D upper-right convex boundary, carrying its source index.
struct HullVertex {
    double x = 0.0;
    double y = 0.0;
    std::size_t index = 0;
};

/**
 * Upper-right convex boundary of the downward closure of a planar point set.
 *
 * Vertices run from the largest-x point to the largest-y point with x strictly
 * decreasing and y strictly increasing. Exact coordinate ties keep the lowest
 * source index so the result does not depend on insertion order.
 */
class ParetoHull {
public:
    ParetoHull() = default;
    explicit ParetoHull(std::vector<HullVertex> points);

    /// Buffers a point unless it already lies inside the current hull.
    void insert(double x, double y, std::size_t index);
    /// Flushes buffered points; called implicitly by the const queries' callers.
    void consolidate();

    const std::vector<HullVertex>& vertices() const { return vertices_; }
    bool contains(double x, double y, double slack = kSlack) const;
    double support(double theta) const;

private:
    std::vector<HullVertex> vertices_;
    std::vector<HullVertex> pending_;
};

/// Reduces a cloud to the vertices of its R1-R2 hull at R3 >= r3.
PointCloudRegion hull_reduce(const PointCloudRegion& cloud, double r3 = 0.0);

/// max over eligible points (r3 >= slice) of cos(theta) r1 + sin(theta) r2.
/// Returns 0 for an empty eligible set.
double support_value(const PointCloudRegion& cloud, double theta, double r3 = 0.0);

struct FrontierPoint {
    double theta = 0.0;
    double r1 = 0.0;
    double r2 = 0.0;
    double r3 = 0.0;
    Provenance source;
};

/**
 * Pareto boundary of the (R1, R2) slice at the given R3.
 *
 * Sweeps `directions` angles over [0, pi/2] and keeps the supporting point
 * for each; consecutive duplicates are dropped, so the list starts at the R1
 * intercept and ends at the R2 intercept. Neighbouring points are joined by
 * time-sharing segments.
 */
std::vector<FrontierPoint> frontier_slice(const PointCloudRegion& cloud, double r3 = 0.0,
                                          int directions = kDefaultDirections);

/// Largest R with (R, R, 0) dominated by a convex combination of cloud points.
double max_symmetric_rate(const PointCloudRegion& cloud);

/// True if a convex combination of two points dominates (x, y).
bool pair_dominates(const RateTriple& p, const RateTriple& q, double x, double y,
                    double slack = 1e-12);

/// Membership in the downward-closed convex hull of the cloud.
bool cloud_contains(const PointCloudRegion& cloud, const RateTriple& t, double slack = kSlack);

/// Every cloud point lies in b.
bool region_subset(const PointCloudRegion& a, const LinearRateRegion& b);
/// Every vertex of a, plus `samples` ray-cast boundary points, lies in b.
bool region_subset(const LinearRateRegion& a, const LinearRateRegion& b, int samples);

/// Boundary point of a region along direction (d1, d2, d3) from the origin.
RateTriple ray_boundary(const LinearRateRegion& region, const RateTriple& direction);

std::string format_number(double v);

void write_cloud_csv(std::ostream& os, const PointCloudRegion& cloud);
void write_frontier_csv(std::ostream& os, const std::vector<FrontierPoint>& frontier);

nlohmann::json to_json(const LinearRateRegion& region);
LinearRateRegion linear_region_from_json(const nlohmann::json& j);

}  // namespace cmacr::region
