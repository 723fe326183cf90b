#include "cmacr/infomeasure.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <unordered_set>

namespace cmacr::info {

double capacity_fn(double snr)
{
    if (!(snr >= 0.0) || !std::isfinite(snr))
        throw std::domain_error("capacity_fn: SNR must be finite and nonnegative");
    return 0.5 * std::log2(1.0 + snr);
}

JointPmf::JointPmf(std::vector<std::string> labels, std::vector<std::size_t> cards,
                   std::vector<double> probs)
    : labels_(std::move(labels)), cards_(std::move(cards)), probs_(std::move(probs))
{
    if (labels_.size() != cards_.size())
        throw std::invalid_argument("JointPmf: label and cardinality counts differ");
    if (labels_.size() > 64)
        throw std::invalid_argument("JointPmf: at most 64 axes supported");
    std::unordered_set<std::string> seen;
    for (const auto& l : labels_) {
        if (!seen.insert(l).second)
            throw std::invalid_argument("JointPmf: duplicate axis label '" + l + "'");
    }
    std::size_t n = 1;
    for (auto c : cards_) {
        if (c == 0)
            throw std::invalid_argument("JointPmf: cardinalities must be >= 1");
        n *= c;
    }
    if (probs_.size() != n)
        throw std::invalid_argument("JointPmf: probability tensor has " +
                                    std::to_string(probs_.size()) + " entries, expected " +
                                    std::to_string(n));
    double total = 0.0;
    for (double v : probs_) {
        if (!(v >= 0.0) || !std::isfinite(v))
            throw std::invalid_argument("JointPmf: probabilities must be finite and >= 0");
        total += v;
    }
    if (std::abs(total - 1.0) > kNormTolerance)
        throw std::invalid_argument("JointPmf: probabilities sum to " + std::to_string(total));
}

JointPmf JointPmf::uniform(std::vector<std::string> labels, std::vector<std::size_t> cards)
{
    std::size_t n = 1;
    for (auto c : cards) n *= c;
    std::vector<double> probs(n, n == 0 ? 0.0 : 1.0 / static_cast<double>(n));
    return JointPmf(std::move(labels), std::move(cards), std::move(probs));
}

bool JointPmf::has(const std::string& name) const
{
    return std::find(labels_.begin(), labels_.end(), name) != labels_.end();
}

std::size_t JointPmf::axis(const std::string& name) const
{
    auto it = std::find(labels_.begin(), labels_.end(), name);
    if (it == labels_.end())
        throw std::invalid_argument("JointPmf: unknown variable '" + name + "'");
    return static_cast<std::size_t>(it - labels_.begin());
}

std::uint64_t JointPmf::axis_mask(const VarSet& names) const
{
    std::uint64_t mask = 0;
    for (const auto& n : names) mask |= std::uint64_t{1} << axis(n);
    return mask;
}

double JointPmf::at(const std::vector<std::size_t>& index) const
{
    if (index.size() != cards_.size())
        throw std::invalid_argument("JointPmf::at: index rank mismatch");
    std::size_t flat = 0;
    for (std::size_t k = 0; k < cards_.size(); ++k) {
        if (index[k] >= cards_[k])
            throw std::out_of_range("JointPmf::at: index out of range");
        flat = flat * cards_[k] + index[k];
    }
    return probs_[flat];
}

std::vector<double> marginal_table(const JointPmf& p, std::uint64_t mask)
{
    const auto& cards = p.cards();
    const std::size_t rank = cards.size();

    // Stride of each source axis inside the marginal table (0 when summed out).
    std::vector<std::size_t> stride(rank, 0);
    std::size_t out_size = 1;
    for (std::size_t k = rank; k-- > 0;) {
        if (mask & (std::uint64_t{1} << k)) {
            stride[k] = out_size;
            out_size *= cards[k];
        }
    }
    std::vector<double> out(out_size, 0.0);
    std::vector<std::size_t> idx(rank, 0);
    std::size_t target = 0;
    for (double v : p.probs()) {
        out[target] += v;
        // odometer increment, last axis fastest
        for (std::size_t k = rank; k-- > 0;) {
            target += stride[k];
            if (++idx[k] < cards[k]) break;
            target -= stride[k] * cards[k];
            idx[k] = 0;
        }
    }
    return out;
}

JointPmf marginalize(const JointPmf& p, const VarSet& keep)
{
    if (keep.empty())
        throw std::invalid_argument("marginalize: keep set must be nonempty");
    const std::uint64_t mask = p.axis_mask(keep);
    std::vector<std::string> labels;
    std::vector<std::size_t> cards;
    for (std::size_t k = 0; k < p.rank(); ++k) {
        if (mask & (std::uint64_t{1} << k)) {
            labels.push_back(p.labels()[k]);
            cards.push_back(p.cards()[k]);
        }
    }
    auto table = marginal_table(p, mask);
    // Summation drift is far below tolerance, but renormalize the rounding away.
    const double total = std::accumulate(table.begin(), table.end(), 0.0);
    for (double& v : table) v /= total;
    return JointPmf(std::move(labels), std::move(cards), std::move(table));
}

namespace {

double table_entropy(const std::vector<double>& t)
{
    double h = 0.0;
    for (double v : t) {
        if (v > 0.0) h -= v * std::log2(v);
    }
    return h;
}

void check_disjoint(const VarSet& a, const VarSet& b, const VarSet& g)
{
    std::unordered_set<std::string> seen;
    for (const auto* set : {&a, &b, &g}) {
        for (const auto& n : *set) {
            if (!seen.insert(n).second)
                throw std::invalid_argument("conditional_mi: variable '" + n +
                                            "' appears in more than one set");
        }
    }
}

}  // namespace

double entropy(const JointPmf& p, const VarSet& vars)
{
    if (vars.empty()) return 0.0;
    return table_entropy(marginal_table(p, p.axis_mask(vars)));
}

double InfoEvaluator::entropy(std::uint64_t mask)
{
    if (mask == 0) return 0.0;
    auto it = cache_.find(mask);
    if (it != cache_.end()) return it->second;
    const double h = table_entropy(marginal_table(p_, mask));
    cache_.emplace(mask, h);
    return h;
}

double InfoEvaluator::mi(const VarSet& a, const VarSet& b, const VarSet& given)
{
    if (a.empty() || b.empty())
        throw std::invalid_argument("conditional_mi: a and b must be nonempty");
    check_disjoint(a, b, given);
    const auto ma = p_.axis_mask(a);
    const auto mb = p_.axis_mask(b);
    const auto mg = p_.axis_mask(given);
    const double v = entropy(ma | mg) + entropy(mb | mg) - entropy(ma | mb | mg) - entropy(mg);
    // entropy differences can land a few ulps below zero
    return std::max(0.0, v);
}

double conditional_mi(const JointPmf& p, const VarSet& a, const VarSet& b, const VarSet& given)
{
    InfoEvaluator ev(p);
    return ev.mi(a, b, given);
}

bool conditionally_independent(const JointPmf& p, const VarSet& a, const VarSet& b,
                               const VarSet& given, double tol)
{
    check_disjoint(a, b, given);
    const auto ma = p.axis_mask(a);
    const auto mb = p.axis_mask(b);
    const auto mg = p.axis_mask(given);
    const auto& cards = p.cards();
    const std::size_t rank = cards.size();
    const std::uint64_t all = ma | mb | mg;

    auto pabg = marginal_table(p, all);
    auto pag = marginal_table(p, ma | mg);
    auto pbg = marginal_table(p, mb | mg);
    auto pg = marginal_table(p, mg);

    // Walk the (a,b,g) table and compute the flat offsets into the smaller ones.
    std::vector<std::size_t> axes;
    for (std::size_t k = 0; k < rank; ++k)
        if (all & (std::uint64_t{1} << k)) axes.push_back(k);
    auto strides_for = [&](std::uint64_t m) {
        std::vector<std::size_t> s(axes.size(), 0);
        std::size_t acc = 1;
        for (std::size_t i = axes.size(); i-- > 0;) {
            if (m & (std::uint64_t{1} << axes[i])) {
                s[i] = acc;
                acc *= cards[axes[i]];
            }
        }
        return s;
    };
    const auto s_ag = strides_for(ma | mg);
    const auto s_bg = strides_for(mb | mg);
    const auto s_g = strides_for(mg);

    std::vector<std::size_t> idx(axes.size(), 0);
    for (double v : pabg) {
        std::size_t iag = 0, ibg = 0, ig = 0;
        for (std::size_t i = 0; i < axes.size(); ++i) {
            iag += idx[i] * s_ag[i];
            ibg += idx[i] * s_bg[i];
            ig += idx[i] * s_g[i];
        }
        if (std::abs(v * pg[ig] - pag[iag] * pbg[ibg]) > tol) return false;
        for (std::size_t i = axes.size(); i-- > 0;) {
            if (++idx[i] < cards[axes[i]]) break;
            idx[i] = 0;
        }
    }
    return true;
}

nlohmann::json to_json(const JointPmf& p)
{
    return nlohmann::json{{"vars", p.labels()}, {"cards", p.cards()}, {"probs", p.probs()}};
}

JointPmf joint_pmf_from_json(const nlohmann::json& j)
{
    return JointPmf(j.at("vars").get<std::vector<std::string>>(),
                    j.at("cards").get<std::vector<std::size_t>>(),
                    j.at("probs").get<std::vector<double>>());
}

}  // namespace cmacr::info
