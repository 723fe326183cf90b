#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

namespace cmacr::info {

using VarSet = std::vector<std::string>;

/// Probability normalization tolerance applied on construction.
inline constexpr double kNormTolerance = 1e-12;

/// Gaussian capacity function C(x) = 1/2 log2(1 + x), in bits.
/// Throws std::domain_error for negative or non-finite SNR.
double capacity_fn(double snr);

/**
 * Dense joint probability mass function over named discrete variables.
 *
 * Probabilities are stored row-major: the last axis varies fastest.
 * Instances are validated on construction and immutable afterwards.
 */
class JointPmf {
public:
    JointPmf(std::vector<std::string> labels, std::vector<std::size_t> cards,
             std::vector<double> probs);

    const std::vector<std::string>& labels() const { return labels_; }
    const std::vector<std::size_t>& cards() const { return cards_; }
    const std::vector<double>& probs() const { return probs_; }
    std::size_t rank() const { return labels_.size(); }
    std::size_t size() const { return probs_.size(); }

    bool has(const std::string& name) const;
    /// Axis index of a variable; throws std::invalid_argument if unknown.
    std::size_t axis(const std::string& name) const;
    /// Bitmask of axes for a set of names; throws on unknown names.
    std::uint64_t axis_mask(const VarSet& names) const;

    double at(const std::vector<std::size_t>& index) const;

    /// Uniform pmf over the given alphabets.
    static JointPmf uniform(std::vector<std::string> labels, std::vector<std::size_t> cards);

private:
    std::vector<std::string> labels_;
    std::vector<std::size_t> cards_;
    std::vector<double> probs_;
};

/// Sums out every axis not in `keep`. Kept axes retain their original order.
JointPmf marginalize(const JointPmf& p, const VarSet& keep);

/// Joint entropy H(vars) in bits. An empty set has entropy 0.
double entropy(const JointPmf& p, const VarSet& vars);

/// I(A;B|G) in bits. A and B must be nonempty; A, B, G pairwise disjoint.
double conditional_mi(const JointPmf& p, const VarSet& a, const VarSet& b,
                      const VarSet& given = {});

/// True iff p(a,b,g) p(g) == p(a,g) p(b,g) cell by cell within `tol`.
bool conditionally_independent(const JointPmf& p, const VarSet& a, const VarSet& b,
                               const VarSet& given, double tol = 1e-9);

/**
 * Memoizing evaluator for many information terms over one joint.
 *
 * Region builders evaluate a dozen conditional mutual informations that share
 * most of their marginals; entropies are cached per axis mask. Not thread-safe.
 */
class InfoEvaluator {
public:
    explicit InfoEvaluator(const JointPmf& p) : p_(p) {}

    double entropy(std::uint64_t mask);
    double entropy(const VarSet& vars) { return entropy(p_.axis_mask(vars)); }
    double mi(const VarSet& a, const VarSet& b, const VarSet& given = {});

    const JointPmf& joint() const { return p_; }

private:
    const JointPmf& p_;
    std::unordered_map<std::uint64_t, double> cache_;
};

/// Marginal over an axis mask, returned as a flat table in kept-axis order.
std::vector<double> marginal_table(const JointPmf& p, std::uint64_t mask);

nlohmann::json to_json(const JointPmf& p);
JointPmf joint_pmf_from_json(const nlohmann::json& j);

}  // namespace cmacr::info
