#include "divprune/selection.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "divprune/errors.hpp"

namespace divprune {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

/// Resolves the budget against dist, rejecting empty inputs first.
std::size_t checked_budget(const DistanceMatrix& dist, const Budget& budget) {
    if (dist.size() == 0) throw Error(ErrorKind::EmptyInput, "no tokens to select from");
    return budget.resolve(dist.size());
}

struct ExactSearch {
    const DistanceMatrix& dist;
    std::size_t n;
    std::size_t k;
    std::vector<std::size_t> current;
    std::vector<std::size_t> best;
    double best_objective = -kInf;

    // Subsets are visited in lexicographic order and the incumbent only changes on strict
    // improvement, so any branch whose partial minimum is <= the incumbent can be dropped.
    void extend(std::size_t start, double partial_min) {
        if (current.size() == k) {
            if (partial_min > best_objective) {
                best_objective = partial_min;
                best = current;
            }
            return;
        }
        const std::size_t last = n - (k - current.size());
        for (std::size_t c = start; c <= last; ++c) {
            double next_min = partial_min;
            for (const std::size_t s : current) next_min = std::min(next_min, dist(s, c));
            if (next_min <= best_objective) continue;
            current.push_back(c);
            extend(c + 1, next_min);
            current.pop_back();
        }
    }
};

}  // namespace

std::string_view to_string(Strategy strategy) noexcept {
    switch (strategy) {
        case Strategy::greedy: return "greedy";
        case Strategy::exact: return "exact";
        case Strategy::random: return "random";
        case Strategy::minmax: return "minmax";
    }
    return "greedy";
}

Strategy parse_strategy(std::string_view name) {
    if (name == "greedy") return Strategy::greedy;
    if (name == "exact") return Strategy::exact;
    if (name == "random") return Strategy::random;
    if (name == "minmax") return Strategy::minmax;
    throw Error(ErrorKind::InvalidConfig, "unknown strategy '" + std::string(name) + "'");
}

Budget Budget::count(std::size_t n) {
    if (n == 0) throw Error(ErrorKind::InvalidBudget, "token count must be positive");
    return Budget(Kind::count, static_cast<double>(n));
}

Budget Budget::fraction(double f) {
    if (!(f > 0.0 && f <= 1.0)) throw Error(ErrorKind::InvalidBudget, "keep fraction must lie in (0, 1]");
    return Budget(Kind::fraction, f);
}

std::size_t Budget::resolve(std::size_t total) const {
    if (kind_ == Kind::count) {
        const auto n = static_cast<std::size_t>(value_);
        if (n > total) {
            throw Error(ErrorKind::BudgetTooLarge,
                        "requested " + std::to_string(n) + " tokens but only " + std::to_string(total) + " exist");
        }
        return n;
    }
    if (total == 0) return 0;
    const double exact = static_cast<double>(total) * value_;
    double whole = std::floor(exact);
    // 0.29 * 100 evaluates to 28.999999999999996; snap such products up.
    if (exact - whole > 1.0 - 1e-9) whole += 1.0;
    return std::clamp<std::size_t>(static_cast<std::size_t>(whole), 1, total);
}

std::vector<std::size_t> SelectionResult::sorted_indices() const {
    auto out = selected;
    std::sort(out.begin(), out.end());
    return out;
}

double maxmin_objective(const DistanceMatrix& dist, std::span<const std::size_t> subset) {
    std::vector<bool> seen(dist.size(), false);
    for (const std::size_t i : subset) {
        if (i >= dist.size()) {
            throw Error(ErrorKind::IndexOutOfRange,
                        "index " + std::to_string(i) + " >= " + std::to_string(dist.size()));
        }
        if (seen[i]) throw Error(ErrorKind::DuplicateIndex, "index " + std::to_string(i) + " repeated");
        seen[i] = true;
    }
    double best = kSingletonObjective;
    for (std::size_t a = 0; a < subset.size(); ++a) {
        for (std::size_t b = a + 1; b < subset.size(); ++b) best = std::min(best, dist(subset[a], subset[b]));
    }
    return best;
}

SelectionResult greedy_select(const DistanceMatrix& dist, Budget budget) {
    const std::size_t k = checked_budget(dist, budget);
    const std::size_t n = dist.size();

    SelectionResult result;
    result.strategy = Strategy::greedy;
    result.selected.reserve(k);
    result.trace.reserve(k);

    // First stage: the token whose nearest neighbour is farthest.
    std::size_t first = 0;
    double first_score = -kInf;
    for (std::size_t i = 0; i < n; ++i) {
        double d_min = kInf;
        for (std::size_t j = 0; j < n; ++j) {
            if (i != j && dist(i, j) <= d_min) d_min = dist(i, j);
        }
        if (d_min > first_score) {
            first_score = d_min;
            first = i;
        }
    }
    result.selected.push_back(first);
    result.trace.push_back(first_score);

    // Second stage. nearest[i] caches min over selected j of dist(i, j); it is refreshed
    // with the newest member only, which yields the same minimum as a full rescan.
    std::vector<bool> taken(n, false);
    taken[first] = true;
    std::vector<double> nearest(n, kInf);
    for (std::size_t i = 0; i < n; ++i) nearest[i] = dist(i, first);

    while (result.selected.size() < k) {
        std::size_t pick = n;
        double pick_score = -kInf;
        for (std::size_t i = 0; i < n; ++i) {
            if (!taken[i] && nearest[i] > pick_score) {
                pick_score = nearest[i];
                pick = i;
            }
        }
        taken[pick] = true;
        result.selected.push_back(pick);
        result.trace.push_back(pick_score);
        for (std::size_t i = 0; i < n; ++i) {
            if (dist(i, pick) <= nearest[i]) nearest[i] = dist(i, pick);
        }
    }
    result.objective = maxmin_objective(dist, result.selected);
    return result;
}

std::uint64_t binomial(std::uint64_t n, std::uint64_t k) noexcept {
    if (k > n) return 0;
    k = std::min(k, n - k);
    unsigned __int128 c = 1;
    for (std::uint64_t i = 0; i < k; ++i) {
        // c * (n - i) / (i + 1) stays integral at every step.
        c = c * (n - i) / (i + 1);
        if (c > UINT64_MAX) return UINT64_MAX;
    }
    return static_cast<std::uint64_t>(c);
}

SelectionResult exact_select(const DistanceMatrix& dist, Budget budget, std::uint64_t limit) {
    const std::size_t k = checked_budget(dist, budget);
    const std::size_t n = dist.size();
    const std::uint64_t subsets = binomial(n, k);
    if (subsets > limit) {
        throw Error(ErrorKind::CombinatorialLimitExceeded,
                    "C(" + std::to_string(n) + ", " + std::to_string(k) + ") = " +
                        (subsets == UINT64_MAX ? std::string(">= 2^64") : std::to_string(subsets)) +
                        " subsets exceeds limit " + std::to_string(limit));
    }

    ExactSearch search{dist, n, k, {}, {}};
    search.current.reserve(k);
    search.extend(0, kSingletonObjective);

    SelectionResult result;
    result.strategy = Strategy::exact;
    result.selected = std::move(search.best);
    result.objective = maxmin_objective(dist, result.selected);
    return result;
}

SelectionResult random_select(const DistanceMatrix& dist, Budget budget, std::uint64_t seed) {
    const std::size_t k = checked_budget(dist, budget);
    const std::size_t n = dist.size();

    std::mt19937_64 rng(seed);
    std::vector<std::size_t> pool(n);
    std::iota(pool.begin(), pool.end(), std::size_t{0});
    for (std::size_t t = 0; t < k; ++t) {
        std::uniform_int_distribution<std::size_t> pick(t, n - 1);
        std::swap(pool[t], pool[pick(rng)]);
    }
    pool.resize(k);
    std::sort(pool.begin(), pool.end());

    SelectionResult result;
    result.strategy = Strategy::random;
    result.selected = std::move(pool);
    result.objective = maxmin_objective(dist, result.selected);
    return result;
}

SelectionResult minmax_select(const DistanceMatrix& dist, Budget budget) {
    const std::size_t k = checked_budget(dist, budget);
    const std::size_t n = dist.size();

    SelectionResult result;
    result.strategy = Strategy::minmax;
    result.selected.reserve(k);
    result.trace.reserve(k);

    std::size_t first = 0;
    double first_score = kInf;
    for (std::size_t i = 0; i < n; ++i) {
        double d_max = -kInf;
        for (std::size_t j = 0; j < n; ++j) {
            if (i != j && dist(i, j) >= d_max) d_max = dist(i, j);
        }
        if (d_max < first_score) {
            first_score = d_max;
            first = i;
        }
    }
    result.selected.push_back(first);
    result.trace.push_back(first_score);

    std::vector<bool> taken(n, false);
    taken[first] = true;
    std::vector<double> farthest(n);
    for (std::size_t i = 0; i < n; ++i) farthest[i] = dist(i, first);

    while (result.selected.size() < k) {
        std::size_t pick = n;
        double pick_score = kInf;
        for (std::size_t i = 0; i < n; ++i) {
            if (!taken[i] && farthest[i] < pick_score) {
                pick_score = farthest[i];
                pick = i;
            }
        }
        taken[pick] = true;
        result.selected.push_back(pick);
        result.trace.push_back(pick_score);
        for (std::size_t i = 0; i < n; ++i) farthest[i] = std::max(farthest[i], dist(i, pick));
    }
    result.objective = maxmin_objective(dist, result.selected);
    return result;
}

SelectionResult run_strategy(const DistanceMatrix& dist, const PruneConfig& config) {
    switch (config.strategy) {
        case Strategy::greedy: return greedy_select(dist, config.budget);
        case Strategy::exact: return exact_select(dist, config.budget, config.exact_limit);
        case Strategy::random: return random_select(dist, config.budget, config.seed);
        case Strategy::minmax: return minmax_select(dist, config.budget);
    }
    throw Error(ErrorKind::InvalidConfig, "unknown strategy");
}

SelectionResult select_tokens(const EmbeddingView& emb, const PruneConfig& config) {
    if (emb.rows == 0) {
        validate_embeddings(emb);
        throw Error(ErrorKind::EmptyInput, "no tokens to select from");
    }
    const DistanceMatrix dist = distance_matrix(emb, config.metric, config.zero_policy, config.max_rows);
    return run_strategy(dist, config);
}

PruneOutput prune(const EmbeddingMatrix& emb, const PruneConfig& config) {
    SelectionResult selection = select_tokens(emb.view(), config);
    EmbeddingMatrix kept = emb.gather(selection.sorted_indices());
    return {std::move(kept), std::move(selection)};
}

}  // namespace divprune
