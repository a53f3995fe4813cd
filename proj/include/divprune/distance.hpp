#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "divprune/embeddings.hpp"

namespace divprune {

enum class Metric { cosine, l1, l2 };

/// How cosine distance treats vectors with norm <= kZeroNormEpsilon.
/// `clamp` treats such a token as orthogonal (distance 1) to every other token.
enum class ZeroPolicy { error, clamp };

inline constexpr double kZeroNormEpsilon = 1e-12;
inline constexpr std::size_t kDefaultMaxRows = 16384;

std::string_view to_string(Metric metric) noexcept;
std::string_view to_string(ZeroPolicy policy) noexcept;
/// Throws InvalidConfig on unknown names.
Metric parse_metric(std::string_view name);
ZeroPolicy parse_zero_policy(std::string_view name);

double pair_distance(std::span<const double> a, std::span<const double> b, Metric metric = Metric::cosine,
                     ZeroPolicy zero_policy = ZeroPolicy::error);

class DistanceMatrix;

/// All pairwise distances between rows of `m`. Cosine goes through one product of the
/// row-normalized matrix with its transpose. Throws MatrixTooLarge above `max_rows`.
DistanceMatrix distance_matrix(const EmbeddingView& m, Metric metric = Metric::cosine,
                               ZeroPolicy zero_policy = ZeroPolicy::error, std::size_t max_rows = kDefaultMaxRows);

/**
 * @brief Dense n x n pairwise distance matrix.
 *
 * Always exactly symmetric with an exact zero diagonal; all entries finite and >= 0.
 */
class DistanceMatrix {
public:
    DistanceMatrix() = default;

    /// Wraps precomputed distances (row-major n*n). Validates symmetry, zero diagonal, finiteness
    /// and non-negativity; throws DimensionError / NonFiniteValue otherwise.
    static DistanceMatrix from_values(std::size_t n, std::vector<double> values, Metric metric = Metric::cosine);

    std::size_t size() const noexcept { return n_; }
    Metric metric() const noexcept { return metric_; }
    double operator()(std::size_t i, std::size_t j) const noexcept { return values_[i * n_ + j]; }
    std::span<const double> row(std::size_t i) const { return {values_.data() + i * n_, n_}; }
    std::span<const double> values() const noexcept { return values_; }

private:
    friend DistanceMatrix distance_matrix(const EmbeddingView&, Metric, ZeroPolicy, std::size_t);
    DistanceMatrix(std::size_t n, std::vector<double> values, Metric metric)
        : n_(n), metric_(metric), values_(std::move(values)) {}

    std::size_t n_ = 0;
    Metric metric_ = Metric::cosine;
    std::vector<double> values_;
};

EmbeddingMatrix scale_rows(const EmbeddingMatrix& m, std::span<const double> factors);

}  // namespace divprune
