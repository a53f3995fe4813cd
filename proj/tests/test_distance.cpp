#include <gtest/gtest.h>

#include <functional>

#include <cmath>
#include <random>

#include "divprune/distance.hpp"
#include "divprune/errors.hpp"
#include "oracles.hpp"

using namespace divprune;
namespace dt = divprune::testing;

namespace {

ErrorKind kind_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.kind();
    }
    ADD_FAILURE() << "expected divprune::Error";
    return ErrorKind::IoError;
}

const std::vector<double> kA = {1, 0};
const std::vector<double> kB = {0, 1};

}  // namespace

TEST(PairDistance, Examples) {
    EXPECT_DOUBLE_EQ(pair_distance(kA, kB, Metric::cosine), 1.0);
    const std::vector<double> anti = {-2, 0};
    EXPECT_DOUBLE_EQ(pair_distance(kA, anti, Metric::cosine), 2.0);
    const std::vector<double> p = {1, 2}, q = {4, -2};
    EXPECT_DOUBLE_EQ(pair_distance(p, q, Metric::l1), 7.0);
    EXPECT_DOUBLE_EQ(pair_distance(p, q, Metric::l2), 5.0);
}

TEST(PairDistance, ZeroNormAndDimensionErrors) {
    const std::vector<double> zero = {0, 0};
    EXPECT_EQ(kind_of([&] { pair_distance(kA, zero, Metric::cosine, ZeroPolicy::error); }),
              ErrorKind::ZeroNormVector);
    EXPECT_DOUBLE_EQ(pair_distance(kA, zero, Metric::cosine, ZeroPolicy::clamp), 1.0);
    // l1/l2 have no zero-norm restriction.
    EXPECT_DOUBLE_EQ(pair_distance(kA, zero, Metric::l2, ZeroPolicy::error), 1.0);

    const std::vector<double> three = {1, 2, 3};
    EXPECT_EQ(kind_of([&] { pair_distance(kA, three); }), ErrorKind::DimensionError);
    const std::vector<double> empty;
    EXPECT_EQ(kind_of([&] { pair_distance(empty, empty); }), ErrorKind::DimensionError);
}

TEST(PairDistance, CosineClampedForParallelVectors) {
    const std::vector<double> a = {0.1, 0.7, 0.3};
    const std::vector<double> b = {0.2, 1.4, 0.6};
    const double d = pair_distance(a, b);
    EXPECT_GE(d, 0.0);
    EXPECT_LE(d, 1e-15);
}

TEST(DistanceMatrix, OrthogonalAntipodalExample) {
    const EmbeddingMatrix m(3, 2, {1, 0, 0, 1, -1, 0});
    const auto d = distance_matrix(m);
    const std::vector<double> expected = {0, 1, 2, 1, 0, 1, 2, 1, 0};
    ASSERT_EQ(d.size(), 3u);
    for (std::size_t k = 0; k < 9; ++k) EXPECT_NEAR(d.values()[k], expected[k], 1e-15) << k;
}

TEST(DistanceMatrix, SingleRowAndEmpty) {
    for (const Metric metric : {Metric::cosine, Metric::l1, Metric::l2}) {
        const auto d = distance_matrix(EmbeddingMatrix(1, 3, {4, 5, 6}), metric);
        ASSERT_EQ(d.size(), 1u);
        EXPECT_EQ(d(0, 0), 0.0);
    }
    EXPECT_EQ(distance_matrix(EmbeddingMatrix(0, 3, {})).size(), 0u);
}

// Oracle: double loop over all pairs in long double straight from the cosine definition.
TEST(DistanceMatrix, MatrixProductMatchesPairLoop) {
    std::mt19937_64 rng(2024);
    const auto m = dt::gaussian_matrix(8, 16, rng);
    const auto d = distance_matrix(m, Metric::cosine);
    const auto oracle = dt::naive_distance_table(m, Metric::cosine);
    for (std::size_t k = 0; k < oracle.size(); ++k) EXPECT_NEAR(d.values()[k], oracle[k], 1e-9) << k;

    for (std::size_t i = 0; i < 8; ++i)
        for (std::size_t j = 0; j < 8; ++j)
            if (i != j) EXPECT_NEAR(d(i, j), pair_distance(m.row(i), m.row(j)), 1e-9);
}

TEST(DistanceMatrix, ZeroRowPolicy) {
    const EmbeddingMatrix m(3, 2, {1, 0, 0, 0, -1, 0});
    try {
        distance_matrix(m, Metric::cosine, ZeroPolicy::error);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::ZeroNormVector);
        EXPECT_NE(std::string(e.what()).find("row 1"), std::string::npos);
    }
    const auto d = distance_matrix(m, Metric::cosine, ZeroPolicy::clamp);
    EXPECT_EQ(d(1, 1), 0.0);
    EXPECT_EQ(d(0, 1), 1.0);
    EXPECT_EQ(d(1, 2), 1.0);
    EXPECT_DOUBLE_EQ(d(0, 2), 2.0);

    const EmbeddingMatrix two_zero(2, 2, {0, 0, 0, 0});
    const auto dz = distance_matrix(two_zero, Metric::cosine, ZeroPolicy::clamp);
    EXPECT_EQ(dz(0, 1), 1.0);
}

TEST(DistanceMatrix, RowCap) {
    const EmbeddingMatrix m(5, 1, {1, 2, 3, 4, 5});
    EXPECT_EQ(kind_of([&] { distance_matrix(m, Metric::l2, ZeroPolicy::error, 4); }), ErrorKind::MatrixTooLarge);
    EXPECT_NO_THROW(distance_matrix(m, Metric::l2, ZeroPolicy::error, 5));
}

TEST(DistanceMatrix, FromValuesValidates) {
    EXPECT_NO_THROW(DistanceMatrix::from_values(2, {0, 1, 1, 0}));
    EXPECT_EQ(kind_of([] { DistanceMatrix::from_values(2, {0, 1, 2, 0}); }), ErrorKind::DimensionError);
    EXPECT_EQ(kind_of([] { DistanceMatrix::from_values(2, {1, 1, 1, 0}); }), ErrorKind::DimensionError);
    EXPECT_EQ(kind_of([] { DistanceMatrix::from_values(2, {0, -1, -1, 0}); }), ErrorKind::DimensionError);
    EXPECT_EQ(kind_of([] { DistanceMatrix::from_values(2, {0, 1, 1}); }), ErrorKind::DimensionError);
    EXPECT_EQ(kind_of([] { DistanceMatrix::from_values(2, {0, NAN, NAN, 0}); }), ErrorKind::NonFiniteValue);
}

TEST(ScaleRows, Examples) {
    const EmbeddingMatrix m(2, 2, {1, 0, 0.5, -2});
    const std::vector<double> ones = {1, 1};
    EXPECT_EQ(scale_rows(m, ones), m);
    const std::vector<double> f = {3, 1};
    EXPECT_EQ(scale_rows(m, f), EmbeddingMatrix(2, 2, {3, 0, 0.5, -2}));

    const std::vector<double> zero = {1, 0};
    EXPECT_EQ(kind_of([&] { scale_rows(m, zero); }), ErrorKind::NonPositiveFactor);
    const std::vector<double> neg = {-1, 1};
    EXPECT_EQ(kind_of([&] { scale_rows(m, neg); }), ErrorKind::NonPositiveFactor);
    const std::vector<double> short_f = {1};
    EXPECT_EQ(kind_of([&] { scale_rows(m, short_f); }), ErrorKind::DimensionError);
}

// Property: cosine distances are unchanged by positive per-row scaling.
TEST(DistanceProperties, CosineScaleInvariance) {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> factor(1e-3, 1e3);
    for (int trial = 0; trial < 50; ++trial) {
        const auto m = dt::gaussian_matrix(2 + rng() % 30, 1 + rng() % 20, rng);
        std::vector<double> f(m.rows());
        for (auto& x : f) x = factor(rng);
        const auto a = distance_matrix(m);
        const auto b = distance_matrix(scale_rows(m, f));
        for (std::size_t k = 0; k < a.values().size(); ++k) ASSERT_NEAR(a.values()[k], b.values()[k], 1e-12);
    }
}

// Property: exact symmetry, zero diagonal, bounds, and closeness to the naive route for every metric.
TEST(DistanceProperties, StructuralInvariants) {
    std::mt19937_64 rng(6);
    for (int trial = 0; trial < 60; ++trial) {
        const Metric metric = static_cast<Metric>(trial % 3);
        const auto m = dt::gaussian_matrix(1 + rng() % 40, 1 + rng() % 12, rng);
        const auto d = distance_matrix(m, metric);
        const auto oracle = dt::naive_distance_table(m, metric);
        const std::size_t n = d.size();
        for (std::size_t i = 0; i < n; ++i) {
            ASSERT_EQ(d(i, i), 0.0);
            for (std::size_t j = 0; j < n; ++j) {
                ASSERT_EQ(d(i, j), d(j, i));
                ASSERT_GE(d(i, j), 0.0);
                ASSERT_TRUE(std::isfinite(d(i, j)));
                if (metric == Metric::cosine) {
                    ASSERT_LE(d(i, j), 2.0);
                    // Unclamped value from the oracle never strays beyond the valid range by more than 1e-9.
                    ASSERT_GE(oracle[i * n + j], -1e-9);
                    ASSERT_LE(oracle[i * n + j], 2.0 + 1e-9);
                }
                ASSERT_NEAR(d(i, j), oracle[i * n + j], 1e-9 * std::max(1.0, oracle[i * n + j]));
            }
        }
    }
}

// Property: l1 and l2 satisfy the triangle inequality on every triple (n <= 32, exhaustive).
TEST(DistanceProperties, TriangleInequalityExhaustive) {
    std::mt19937_64 rng(8);
    for (const Metric metric : {Metric::l1, Metric::l2}) {
        for (int trial = 0; trial < 5; ++trial) {
            const auto m = dt::gaussian_matrix(32, 1 + rng() % 10, rng);
            const auto d = distance_matrix(m, metric);
            for (std::size_t i = 0; i < 32; ++i)
                for (std::size_t j = 0; j < 32; ++j)
                    for (std::size_t k = 0; k < 32; ++k) ASSERT_LE(d(i, k), d(i, j) + d(j, k) + 1e-9);
        }
    }
}

TEST(MetricNames, ParseAndPrint) {
    for (const Metric m : {Metric::cosine, Metric::l1, Metric::l2}) EXPECT_EQ(parse_metric(to_string(m)), m);
    EXPECT_EQ(kind_of([] { parse_metric("manhattan"); }), ErrorKind::InvalidConfig);
    EXPECT_EQ(parse_zero_policy("clamp"), ZeroPolicy::clamp);
    EXPECT_EQ(kind_of([] { parse_zero_policy("ignore"); }), ErrorKind::InvalidConfig);
}
