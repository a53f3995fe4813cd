#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <string_view>
#include <vector>

#include "divprune/distance.hpp"
#include "divprune/embeddings.hpp"

namespace divprune {

/// Objective of a subset with fewer than two members (no pairs to take the minimum over).
inline constexpr double kSingletonObjective = std::numeric_limits<double>::infinity();

inline constexpr double kDefaultKeepFraction = 0.098;
inline constexpr std::uint64_t kDefaultExactLimit = 2'000'000;

/// Identifier of the generator behind random_select, recorded in reports.
inline constexpr std::string_view kRandomAlgorithm = "mt19937_64+partial-fisher-yates";

enum class Strategy { greedy, exact, random, minmax };

std::string_view to_string(Strategy strategy) noexcept;
Strategy parse_strategy(std::string_view name);

/// Retention budget: an absolute token count or a fraction of the available tokens.
class Budget {
public:
    enum class Kind { count, fraction };

    static Budget count(std::size_t n);
    static Budget fraction(double f);

    Kind kind() const noexcept { return kind_; }
    double value() const noexcept { return value_; }

    /// Number of tokens to keep out of `total`. A fraction floors to
    /// floor(total * f), raised to 1 when total >= 1. Throws BudgetTooLarge
    /// when a count exceeds `total`.
    std::size_t resolve(std::size_t total) const;

private:
    Budget(Kind kind, double value) : kind_(kind), value_(value) {}

    Kind kind_ = Kind::fraction;
    double value_ = kDefaultKeepFraction;
};

struct SelectionResult {
    /// Kept token indices in insertion order (ascending for exact/random).
    std::vector<std::size_t> selected;
    /// Minimum pairwise distance over `selected`; kSingletonObjective when |selected| <= 1.
    double objective = kSingletonObjective;
    /// Per insertion, the score that won the argmax (greedy) or argmin (minmax). Empty otherwise.
    std::vector<double> trace;
    Strategy strategy = Strategy::greedy;

    std::vector<std::size_t> sorted_indices() const;
};

/// Minimum of dist over all unordered pairs in `subset`.
double maxmin_objective(const DistanceMatrix& dist, std::span<const std::size_t> subset);

/**
 * @brief Two-stage farthest-point construction for the max-min diversity problem.
 *
 * Stage one picks the token whose nearest neighbour is farthest away. Stage two
 * repeatedly adds the remaining token whose distance to its nearest already
 * selected token is largest. Every argmax breaks ties by the lowest index.
 */
SelectionResult greedy_select(const DistanceMatrix& dist, Budget budget);

/// Exhaustive search over all subsets of the resolved size. Among optimal subsets the
/// lexicographically smallest is returned. Throws CombinatorialLimitExceeded when
/// C(M, k) > limit.
SelectionResult exact_select(const DistanceMatrix& dist, Budget budget, std::uint64_t limit = kDefaultExactLimit);

/// Uniform sample without replacement, deterministic in `seed`.
SelectionResult random_select(const DistanceMatrix& dist, Budget budget, std::uint64_t seed);

/// Mirror of greedy_select that concentrates the subset: stage one takes the token with the
/// smallest farthest-neighbour distance, stage two adds the candidate whose largest distance
/// to the selected set is smallest.
SelectionResult minmax_select(const DistanceMatrix& dist, Budget budget);

/// C(n, k), saturating at UINT64_MAX.
std::uint64_t binomial(std::uint64_t n, std::uint64_t k) noexcept;

struct PruneConfig {
    Metric metric = Metric::cosine;
    Strategy strategy = Strategy::greedy;
    Budget budget = Budget::fraction(kDefaultKeepFraction);
    std::uint64_t seed = 0;
    ZeroPolicy zero_policy = ZeroPolicy::error;
    std::size_t max_rows = kDefaultMaxRows;
    std::uint64_t exact_limit = kDefaultExactLimit;
};

SelectionResult run_strategy(const DistanceMatrix& dist, const PruneConfig& config);

/// Distance matrix + configured strategy over a borrowed embedding buffer.
SelectionResult select_tokens(const EmbeddingView& emb, const PruneConfig& config);

struct PruneOutput {
    /// Kept rows in ascending original index order.
    EmbeddingMatrix kept;
    SelectionResult selection;
};

PruneOutput prune(const EmbeddingMatrix& emb, const PruneConfig& config);

}  // namespace divprune
