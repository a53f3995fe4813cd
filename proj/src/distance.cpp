#include "divprune/distance.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "divprune/errors.hpp"

namespace divprune {

namespace {

using RowMajorMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

double norm(std::span<const double> v) {
    return std::sqrt(std::inner_product(v.begin(), v.end(), v.begin(), 0.0));
}

double cosine_from_similarity(double similarity) { return 1.0 - std::clamp(similarity, -1.0, 1.0); }

}  // namespace

std::string_view to_string(Metric metric) noexcept {
    switch (metric) {
        case Metric::cosine: return "cosine";
        case Metric::l1: return "l1";
        case Metric::l2: return "l2";
    }
    return "cosine";
}

std::string_view to_string(ZeroPolicy policy) noexcept {
    return policy == ZeroPolicy::error ? "error" : "clamp";
}

Metric parse_metric(std::string_view name) {
    if (name == "cosine") return Metric::cosine;
    if (name == "l1") return Metric::l1;
    if (name == "l2") return Metric::l2;
    throw Error(ErrorKind::InvalidConfig, "unknown metric '" + std::string(name) + "'");
}

ZeroPolicy parse_zero_policy(std::string_view name) {
    if (name == "error") return ZeroPolicy::error;
    if (name == "clamp") return ZeroPolicy::clamp;
    throw Error(ErrorKind::InvalidConfig, "unknown zero policy '" + std::string(name) + "'");
}

double pair_distance(std::span<const double> a, std::span<const double> b, Metric metric, ZeroPolicy zero_policy) {
    if (a.size() != b.size() || a.empty()) {
        throw Error(ErrorKind::DimensionError,
                    "vector dimensions " + std::to_string(a.size()) + " and " + std::to_string(b.size()));
    }
    switch (metric) {
        case Metric::l1: {
            double s = 0.0;
            for (std::size_t k = 0; k < a.size(); ++k) s += std::abs(a[k] - b[k]);
            return s;
        }
        case Metric::l2: {
            double s = 0.0;
            for (std::size_t k = 0; k < a.size(); ++k) s += (a[k] - b[k]) * (a[k] - b[k]);
            return std::sqrt(s);
        }
        case Metric::cosine: break;
    }
    const double na = norm(a);
    const double nb = norm(b);
    if (na <= kZeroNormEpsilon || nb <= kZeroNormEpsilon) {
        if (zero_policy == ZeroPolicy::error) throw Error(ErrorKind::ZeroNormVector, "cosine of a zero-norm vector");
        return 1.0;
    }
    const double dot = std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
    return cosine_from_similarity(dot / (na * nb));
}

DistanceMatrix DistanceMatrix::from_values(std::size_t n, std::vector<double> values, Metric metric) {
    if (values.size() != n * n) throw Error(ErrorKind::DimensionError, "distance matrix must be n*n");
    for (std::size_t i = 0; i < n; ++i) {
        if (values[i * n + i] != 0.0) {
            throw Error(ErrorKind::DimensionError, "non-zero diagonal at " + std::to_string(i));
        }
        for (std::size_t j = 0; j < n; ++j) {
            const double v = values[i * n + j];
            if (!std::isfinite(v)) {
                throw Error(ErrorKind::NonFiniteValue,
                            "distance (" + std::to_string(i) + ", " + std::to_string(j) + ") not finite");
            }
            if (v < 0.0 || v != values[j * n + i]) {
                throw Error(ErrorKind::DimensionError,
                            "distance (" + std::to_string(i) + ", " + std::to_string(j) + ") negative or asymmetric");
            }
        }
    }
    DistanceMatrix d;
    d.n_ = n;
    d.metric_ = metric;
    d.values_ = std::move(values);
    return d;
}

DistanceMatrix distance_matrix(const EmbeddingView& m, Metric metric, ZeroPolicy zero_policy, std::size_t max_rows) {
    validate_embeddings(m);
    const std::size_t n = m.rows;
    if (n > max_rows) {
        throw Error(ErrorKind::MatrixTooLarge,
                    std::to_string(n) + " rows exceeds the dense-matrix cap of " + std::to_string(max_rows));
    }
    std::vector<double> values(n * n, 0.0);

    if (metric == Metric::cosine) {
        Eigen::Map<const RowMajorMatrix> x(m.data.data(), static_cast<Eigen::Index>(n),
                                           static_cast<Eigen::Index>(m.cols));
        RowMajorMatrix unit = x;
        std::vector<bool> zero_row(n, false);
        for (std::size_t i = 0; i < n; ++i) {
            const double len = unit.row(static_cast<Eigen::Index>(i)).norm();
            if (len <= kZeroNormEpsilon) {
                if (zero_policy == ZeroPolicy::error) {
                    throw Error(ErrorKind::ZeroNormVector, "row " + std::to_string(i) + " has zero norm");
                }
                zero_row[i] = true;
                unit.row(static_cast<Eigen::Index>(i)).setZero();
            } else {
                unit.row(static_cast<Eigen::Index>(i)) /= len;
            }
        }
        const RowMajorMatrix similarity = unit * unit.transpose();
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = i + 1; j < n; ++j) {
                const double d = (zero_row[i] || zero_row[j])
                                     ? 1.0
                                     : cosine_from_similarity(similarity(static_cast<Eigen::Index>(i),
                                                                         static_cast<Eigen::Index>(j)));
                values[i * n + j] = d;
                values[j * n + i] = d;
            }
        }
    } else {
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = i + 1; j < n; ++j) {
                const double d = pair_distance(m.row(i), m.row(j), metric, zero_policy);
                values[i * n + j] = d;
                values[j * n + i] = d;
            }
        }
    }
    return DistanceMatrix(n, std::move(values), metric);
}

EmbeddingMatrix scale_rows(const EmbeddingMatrix& m, std::span<const double> factors) {
    if (factors.size() != m.rows()) {
        throw Error(ErrorKind::DimensionError,
                    std::to_string(factors.size()) + " factors for " + std::to_string(m.rows()) + " rows");
    }
    std::vector<double> data(m.data().begin(), m.data().end());
    for (std::size_t i = 0; i < m.rows(); ++i) {
        if (!(factors[i] > 0.0) || !std::isfinite(factors[i])) {
            throw Error(ErrorKind::NonPositiveFactor, "factor " + std::to_string(i) + " is not a positive number");
        }
        for (std::size_t j = 0; j < m.cols(); ++j) data[i * m.cols() + j] *= factors[i];
    }
    return EmbeddingMatrix(m.rows(), m.cols(), std::move(data));
}

}  // namespace divprune
