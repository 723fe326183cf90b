#include "cmacr/region.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <ostream>
#include <stdexcept>
#include <tuple>

namespace cmacr::region {

std::vector<int> mask_users(Mask m)
{
    std::vector<int> users;
    for (int j = 1; j <= 3; ++j)
        if (m & (1u << (j - 1))) users.push_back(j);
    return users;
}

LinearRateRegion& LinearRateRegion::add(Mask mask, double bound)
{
    if (mask == 0 || mask > 7)
        throw std::invalid_argument("LinearRateRegion: mask must be a nonempty subset of {1,2,3}");
    if (std::isnan(bound))
        throw std::invalid_argument("LinearRateRegion: NaN bound");
    for (auto& c : constraints_) {
        if (c.mask == mask) {
            c.bound = std::min(c.bound, bound);
            return *this;
        }
    }
    constraints_.push_back({mask, bound});
    return *this;
}

LinearRateRegion LinearRateRegion::empty_marker()
{
    LinearRateRegion r;
    r.empty_marker_ = true;
    return r;
}

std::optional<double> LinearRateRegion::bound(Mask mask) const
{
    for (const auto& c : constraints_)
        if (c.mask == mask) return c.bound;
    return std::nullopt;
}

bool LinearRateRegion::is_empty() const
{
    if (empty_marker_) return true;
    return std::any_of(constraints_.begin(), constraints_.end(),
                       [](const Constraint& c) { return c.bound < -kSlack; });
}

bool contains(const LinearRateRegion& region, const RateTriple& t, double slack)
{
    if (region.has_empty_marker()) return false;
    for (const auto& c : region.constraints()) {
        double s = 0.0;
        for (int j : mask_users(c.mask)) s += t[j - 1];
        if (s > c.bound + slack) return false;
    }
    return true;
}

LinearRateRegion intersect(const LinearRateRegion& a, const LinearRateRegion& b)
{
    if (a.has_empty_marker() || b.has_empty_marker()) return LinearRateRegion::empty_marker();
    LinearRateRegion out = a;
    for (const auto& c : b.constraints()) out.add(c.mask, c.bound);
    return out;
}

namespace {

struct Plane {
    std::array<double, 3> normal;
    double offset;
};

bool solve3(const std::array<Plane, 3>& p, RateTriple& out)
{
    const auto& a = p[0].normal;
    const auto& b = p[1].normal;
    const auto& c = p[2].normal;
    const double det = a[0] * (b[1] * c[2] - b[2] * c[1]) - a[1] * (b[0] * c[2] - b[2] * c[0]) +
                       a[2] * (b[0] * c[1] - b[1] * c[0]);
    if (std::abs(det) < 1e-12) return false;
    std::array<double, 3> x{};
    for (int k = 0; k < 3; ++k) {
        std::array<std::array<double, 3>, 3> m{a, b, c};
        for (int r = 0; r < 3; ++r) m[r][k] = p[r].offset;
        const double dk = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
                          m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
                          m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
        x[k] = dk / det;
    }
    out = {x[0], x[1], x[2]};
    return true;
}

}  // namespace

std::vector<RateTriple> corner_points(const LinearRateRegion& region, double cap)
{
    if (region.is_empty()) return {};
    std::vector<Plane> planes;
    for (int j = 0; j < 3; ++j) {
        Plane p{{0, 0, 0}, 0.0};
        p.normal[j] = 1.0;
        planes.push_back(p);
        p.offset = cap;
        planes.push_back(p);
    }
    for (const auto& c : region.constraints()) {
        Plane p{{0, 0, 0}, c.bound};
        for (int j : mask_users(c.mask)) p.normal[j - 1] = 1.0;
        planes.push_back(p);
    }
    auto feasible = [&](const RateTriple& t) {
        for (int j = 0; j < 3; ++j)
            if (t[j] < -kSlack || t[j] > cap + kSlack) return false;
        return contains(region, t);
    };
    std::vector<RateTriple> out;
    const std::size_t n = planes.size();
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            for (std::size_t k = j + 1; k < n; ++k) {
                RateTriple t;
                if (!solve3({planes[i], planes[j], planes[k]}, t)) continue;
                if (!feasible(t)) continue;
                t = {std::max(0.0, t.r1), std::max(0.0, t.r2), std::max(0.0, t.r3)};
                out.push_back(t);
            }
    std::sort(out.begin(), out.end(), [](const RateTriple& a, const RateTriple& b) {
        return std::tie(a.r1, a.r2, a.r3) < std::tie(b.r1, b.r2, b.r3);
    });
    auto same = [](const RateTriple& a, const RateTriple& b) {
        return std::abs(a.r1 - b.r1) <= 1e-12 && std::abs(a.r2 - b.r2) <= 1e-12 &&
               std::abs(a.r3 - b.r3) <= 1e-12;
    };
    out.erase(std::unique(out.begin(), out.end(), same), out.end());
    return out;
}

std::string Provenance::to_string() const
{
    std::string s = label;
    if (!params.empty()) {
        s += ':';
        for (std::size_t i = 0; i < params.size(); ++i) {
            if (i) s += ';';
            s += format_number(params[i]);
        }
    }
    if (!tag.empty()) s += '#' + tag;
    return s;
}

void PointCloudRegion::add(const RateTriple& rate, Provenance source)
{
    points_.push_back({rate, std::move(source)});
}

void PointCloudRegion::append(const PointCloudRegion& other)
{
    points_.insert(points_.end(), other.points_.begin(), other.points_.end());
}

// ---------------------------------------------------------------------------
// ParetoHull

namespace {

double cross(double ax, double ay, double bx, double by) { return ax * by - ay * bx; }

std::vector<HullVertex> build_hull(std::vector<HullVertex> pts)
{
    std::sort(pts.begin(), pts.end(), [](const HullVertex& a, const HullVertex& b) {
        if (a.x != b.x) return a.x > b.x;
        if (a.y != b.y) return a.y > b.y;
        return a.index < b.index;
    });
    std::vector<HullVertex> pareto;
    double best_y = -std::numeric_limits<double>::infinity();
    for (const auto& p : pts) {
        if (p.y > best_y) {
            pareto.push_back(p);
            best_y = p.y;
        }
    }
    std::vector<HullVertex> chain;
    for (const auto& c : pareto) {
        while (chain.size() >= 2) {
            const auto& a = chain[chain.size() - 2];
            const auto& b = chain.back();
            if (cross(b.x - a.x, b.y - a.y, c.x - b.x, c.y - b.y) > 0.0) break;
            chain.pop_back();
        }
        chain.push_back(c);
    }
    return chain;
}

}  // namespace

ParetoHull::ParetoHull(std::vector<HullVertex> points) : vertices_(build_hull(std::move(points))) {}

void ParetoHull::insert(double x, double y, std::size_t index)
{
    if (!vertices_.empty() && contains(x, y, 0.0)) return;
    pending_.push_back({x, y, index});
    if (pending_.size() > std::max<std::size_t>(1024, 4 * vertices_.size())) consolidate();
}

void ParetoHull::consolidate()
{
    if (pending_.empty()) return;
    pending_.insert(pending_.end(), vertices_.begin(), vertices_.end());
    vertices_ = build_hull(std::move(pending_));
    pending_.clear();
}

bool ParetoHull::contains(double x, double y, double slack) const
{
    if (vertices_.empty()) return false;
    const auto& first = vertices_.front();
    const auto& last = vertices_.back();
    if (x > first.x + slack || y > last.y + slack) return false;
    if (x >= first.x) return y <= first.y + slack;
    if (x <= last.x) return true;
    // first vertex with v.x <= x; vertices are sorted by x descending
    auto it = std::partition_point(vertices_.begin(), vertices_.end(),
                                   [x](const HullVertex& v) { return v.x > x; });
    const auto& b = *it;
    const auto& a = *(it - 1);
    const double dx = b.x - a.x, dy = b.y - a.y;
    const double c = cross(dx, dy, x - a.x, y - a.y);
    return c >= -slack * std::hypot(dx, dy);
}

double ParetoHull::support(double theta) const
{
    const double c = std::cos(theta), s = std::sin(theta);
    double best = 0.0;
    for (const auto& v : vertices_) best = std::max(best, c * v.x + s * v.y);
    return best;
}

namespace {

std::vector<HullVertex> eligible(const PointCloudRegion& cloud, double r3)
{
    std::vector<HullVertex> pts;
    const auto& ps = cloud.points();
    for (std::size_t i = 0; i < ps.size(); ++i)
        if (ps[i].rate.r3 >= r3 - kSlack) pts.push_back({ps[i].rate.r1, ps[i].rate.r2, i});
    return pts;
}

}  // namespace

PointCloudRegion hull_reduce(const PointCloudRegion& cloud, double r3)
{
    ParetoHull hull(eligible(cloud, r3));
    PointCloudRegion out;
    for (const auto& v : hull.vertices()) {
        const auto& p = cloud.points()[v.index];
        out.add(p.rate, p.source);
    }
    return out;
}

double support_value(const PointCloudRegion& cloud, double theta, double r3)
{
    const double c = std::cos(theta), s = std::sin(theta);
    double best = 0.0;
    for (const auto& p : cloud.points())
        if (p.rate.r3 >= r3 - kSlack) best = std::max(best, c * p.rate.r1 + s * p.rate.r2);
    return best;
}

std::vector<FrontierPoint> frontier_slice(const PointCloudRegion& cloud, double r3, int directions)
{
    if (directions < 2) throw std::invalid_argument("frontier_slice: need at least 2 directions");
    auto pts = eligible(cloud, r3);
    if (pts.empty()) return {};
    ParetoHull hull(std::move(pts));
    const auto& verts = hull.vertices();

    std::vector<FrontierPoint> out;
    for (int k = 0; k < directions; ++k) {
        const double theta = (std::numbers::pi / 2.0) * k / (directions - 1);
        const double c = std::cos(theta), s = std::sin(theta);
        const HullVertex* best = nullptr;
        double best_val = 0.0;
        for (const auto& v : verts) {
            const double val = c * v.x + s * v.y;
            if (!best || val > best_val + 1e-12 ||
                (std::abs(val - best_val) <= 1e-12 && std::tie(v.x, v.y) > std::tie(best->x, best->y))) {
                best = &v;
                best_val = val;
            }
        }
        if (!out.empty() && out.back().r1 == best->x && out.back().r2 == best->y) continue;
        const auto& src = cloud.points()[best->index];
        out.push_back({theta, best->x, best->y, r3, src.source});
    }
    return out;
}

bool pair_dominates(const RateTriple& p, const RateTriple& q, double x, double y, double slack)
{
    double lo = 0.0, hi = 1.0;
    const std::array<std::array<double, 3>, 2> rows{{{p.r1, q.r1, x}, {p.r2, q.r2, y}}};
    for (const auto& r : rows) {
        // lambda * (p - q) >= target - q
        const double a = r[0] - r[1];
        const double b = r[2] - r[1] - slack;
        if (a == 0.0) {
            if (b > 0.0) return false;
        } else if (a > 0.0) {
            lo = std::max(lo, b / a);
        } else {
            hi = std::min(hi, b / a);
        }
    }
    return lo <= hi;
}

double max_symmetric_rate(const PointCloudRegion& cloud)
{
    if (cloud.empty()) return 0.0;
    // Downward closure makes every point's (r1, r2) projection achievable at R3 = 0.
    std::vector<HullVertex> pts;
    for (std::size_t i = 0; i < cloud.size(); ++i)
        pts.push_back({cloud.points()[i].rate.r1, cloud.points()[i].rate.r2, i});
    ParetoHull hull(std::move(pts));
    std::vector<RateTriple> verts;
    for (const auto& v : hull.vertices()) verts.push_back({v.x, v.y, 0.0});

    double best = 0.0;
    for (std::size_t i = 0; i < verts.size(); ++i)
        for (std::size_t j = i; j < verts.size(); ++j) {
            const auto& a = verts[i];
            const auto& b = verts[j];
            best = std::max({best, std::min(a.r1, a.r2), std::min(b.r1, b.r2)});
            const double da = a.r1 - a.r2, db = b.r1 - b.r2;
            if ((da > 0.0 && db < 0.0) || (da < 0.0 && db > 0.0)) {
                const double lambda = -db / (da - db);
                best = std::max(best, lambda * a.r1 + (1.0 - lambda) * b.r1);
            }
        }
    return best;
}

bool cloud_contains(const PointCloudRegion& cloud, const RateTriple& t, double slack)
{
    auto pts = eligible(cloud, t.r3);
    if (pts.empty()) return t.r1 <= slack && t.r2 <= slack && t.r3 <= slack;
    ParetoHull hull(std::move(pts));
    return hull.contains(t.r1, t.r2, slack);
}

bool region_subset(const PointCloudRegion& a, const LinearRateRegion& b)
{
    return std::all_of(a.points().begin(), a.points().end(),
                       [&](const CloudPoint& p) { return contains(b, p.rate); });
}

RateTriple ray_boundary(const LinearRateRegion& region, const RateTriple& d)
{
    double t = 1e6 / std::max({d.r1, d.r2, d.r3, 1e-300});
    for (const auto& c : region.constraints()) {
        double s = 0.0;
        for (int j : mask_users(c.mask)) s += d[j - 1];
        if (s > 0.0) t = std::min(t, std::max(0.0, c.bound) / s);
    }
    return {t * d.r1, t * d.r2, t * d.r3};
}

bool region_subset(const LinearRateRegion& a, const LinearRateRegion& b, int samples)
{
    if (samples < 1) throw std::invalid_argument("region_subset: samples must be >= 1");
    if (a.is_empty()) return true;
    for (const auto& v : corner_points(a))
        if (!contains(b, v)) return false;
    // Deterministic spiral over the positive octant of the unit sphere.
    const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
    for (int i = 0; i < samples; ++i) {
        const double z = (i + 0.5) / samples;
        const double r = std::sqrt(1.0 - z * z);
        const double phi = std::fmod(golden * i, std::numbers::pi / 2.0);
        const RateTriple d{r * std::cos(phi), r * std::sin(phi), z};
        if (!contains(b, ray_boundary(a, d))) return false;
    }
    return true;
}

std::string format_number(double v)
{
    if (v == 0.0) return "0";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

void write_cloud_csv(std::ostream& os, const PointCloudRegion& cloud)
{
    os << "theta,r1,r2,r3,provenance\n";
    for (const auto& p : cloud.points())
        os << ',' << format_number(p.rate.r1) << ',' << format_number(p.rate.r2) << ','
           << format_number(p.rate.r3) << ',' << p.source.to_string() << '\n';
}

void write_frontier_csv(std::ostream& os, const std::vector<FrontierPoint>& frontier)
{
    os << "theta,r1,r2,r3,provenance\n";
    for (const auto& f : frontier)
        os << format_number(f.theta) << ',' << format_number(f.r1) << ',' << format_number(f.r2)
           << ',' << format_number(f.r3) << ',' << f.source.to_string() << '\n';
}

nlohmann::json to_json(const LinearRateRegion& region)
{
    nlohmann::json cs = nlohmann::json::array();
    for (const auto& c : region.constraints())
        cs.push_back({{"mask", mask_users(c.mask)}, {"bound", c.bound}});
    nlohmann::json j{{"constraints", cs}};
    if (region.has_empty_marker()) j["empty"] = true;
    return j;
}

LinearRateRegion linear_region_from_json(const nlohmann::json& j)
{
    if (j.value("empty", false)) return LinearRateRegion::empty_marker();
    LinearRateRegion r;
    for (const auto& c : j.at("constraints")) {
        Mask m = 0;
        for (int u : c.at("mask").get<std::vector<int>>()) {
            if (u < 1 || u > 3) throw std::invalid_argument("mask entries must be 1, 2 or 3");
            m = static_cast<Mask>(m | (1u << (u - 1)));
        }
        r.add(m, c.at("bound").get<double>());
    }
    return r;
}

}  // namespace cmacr::region
