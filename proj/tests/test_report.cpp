#include <gtest/gtest.h>

#include <functional>

#include <algorithm>
#include <fstream>
#include <nlohmann/json.hpp>
#include <random>

#include "divprune/errors.hpp"
#include "divprune/json_writer.hpp"
#include "divprune/report.hpp"
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

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::vector<std::filesystem::path> write_gaussian_files(const dt::TempDir& dir, std::size_t count, std::size_t rows,
                                                        std::size_t cols, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::vector<std::filesystem::path> paths;
    for (std::size_t i = 0; i < count; ++i) {
        paths.push_back(dir / ("inst" + std::to_string(i) + ".divp"));
        save_embeddings(dt::gaussian_matrix(rows, cols, rng), paths.back());
    }
    return paths;
}

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

TEST(DiversityHistogram, Examples) {
    const std::vector<double> single = {0.5};
    const auto h1 = diversity_histogram(single, 1);
    ASSERT_EQ(h1.size(), 1u);
    EXPECT_EQ(h1[0], (HistogramBin{0.0, 0.5, 1}));

    const std::vector<double> v = {0, 1, 2, 2};
    const auto h2 = diversity_histogram(v, 2);
    ASSERT_EQ(h2.size(), 2u);
    EXPECT_EQ(h2[0], (HistogramBin{0.0, 1.0, 1}));
    EXPECT_EQ(h2[1], (HistogramBin{1.0, 2.0, 3}));

    const std::vector<double> zeros = {0, 0, 0};
    const auto hz = diversity_histogram(zeros, 4);
    EXPECT_EQ(hz.back().count, 3u);
}

TEST(DiversityHistogram, Errors) {
    const std::vector<double> empty;
    EXPECT_EQ(kind_of([&] { diversity_histogram(empty, 3); }), ErrorKind::EmptyInput);
    const std::vector<double> inf = {1.0, kSingletonObjective};
    EXPECT_EQ(kind_of([&] { diversity_histogram(inf, 3); }), ErrorKind::NonFiniteObjective);
    const std::vector<double> neg = {-0.5};
    EXPECT_EQ(kind_of([&] { diversity_histogram(neg, 3); }), ErrorKind::NonFiniteObjective);
    const std::vector<double> ok = {1.0};
    EXPECT_EQ(kind_of([&] { diversity_histogram(ok, 0); }), ErrorKind::InvalidConfig);
}

// Property: counts sum to the input size; bins are contiguous, equal width and cover [0, max].
TEST(DiversityHistogram, ConservationAndCoverage) {
    std::mt19937_64 rng(1);
    std::exponential_distribution<double> expo(3.0);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<double> v(1 + rng() % 300);
        for (auto& x : v) x = expo(rng);
        if (trial % 5 == 0) v.push_back(*std::max_element(v.begin(), v.end()));
        const std::size_t bins = 1 + rng() % 40;
        const auto h = diversity_histogram(v, bins);
        ASSERT_EQ(h.size(), bins);
        std::size_t total = 0;
        for (const auto& b : h) total += b.count;
        ASSERT_EQ(total, v.size());
        ASSERT_EQ(h.front().bin_lower, 0.0);
        ASSERT_EQ(h.back().bin_upper, *std::max_element(v.begin(), v.end()));
        const double width = h.front().bin_upper - h.front().bin_lower;
        for (std::size_t b = 1; b < bins; ++b) {
            ASSERT_EQ(h[b].bin_lower, h[b - 1].bin_upper);
            ASSERT_NEAR(h[b].bin_upper - h[b].bin_lower, width, 1e-12);
        }
        for (const double x : v) {
            const auto it = std::find_if(h.begin(), h.end(), [&](const HistogramBin& b) {
                return x >= b.bin_lower && (x < b.bin_upper || &b == &h.back());
            });
            ASSERT_NE(it, h.end());
        }
    }
}

// Oracle: paired per-instance comparison of the two selectors.
TEST(DiversityHistogram, GreedyMassSitsAboveRandom) {
    std::mt19937_64 rng(2);
    std::vector<double> greedy, random;
    for (int i = 0; i < 1000; ++i) {
        const auto d = distance_matrix(dt::gaussian_matrix(64, 32, rng));
        greedy.push_back(greedy_select(d, Budget::fraction(0.1)).objective);
        random.push_back(random_select(d, Budget::fraction(0.1), i).objective);
    }
    EXPECT_GT(median(greedy), median(random));
    const auto hg = diversity_histogram(greedy, 20);
    const auto hr = diversity_histogram(random, 20);
    std::size_t sum = 0;
    for (const auto& b : hg) sum += b.count;
    EXPECT_EQ(sum, 1000u);
    EXPECT_GT(hg.back().bin_upper, 0.0);
    EXPECT_GT(hr.back().bin_upper, 0.0);
}

TEST(InstanceIds, BasenamesWithCollisionFallback) {
    const std::vector<std::filesystem::path> paths = {"a/x.divp", "b/x.divp", "c/y.divp"};
    EXPECT_EQ(instance_ids(paths), (std::vector<std::string>{"a/x.divp", "b/x.divp", "y.divp"}));
}

TEST(RunDataset, FullFractionGivesGlobalMinimum) {
    dt::TempDir dir;
    const auto paths = write_gaussian_files(dir, 1, 15, 4, 3);
    DatasetConfig cfg;
    cfg.prune.budget = Budget::fraction(1.0);
    const auto report = run_dataset(paths, cfg);
    ASSERT_EQ(report.per_instance.size(), 1u);
    const auto d = distance_matrix(load_embeddings(paths[0]));
    double expected = kSingletonObjective;
    for (std::size_t i = 0; i < d.size(); ++i)
        for (std::size_t j = 0; j < i; ++j) expected = std::min(expected, d(i, j));
    EXPECT_EQ(report.per_instance[0].objective, expected);
    EXPECT_EQ(report.per_instance[0].instance_id, "inst0.divp");
    EXPECT_EQ(report.per_instance[0].M, 15u);
    EXPECT_EQ(report.per_instance[0].M_kept, 15u);
    EXPECT_FALSE(report.per_instance[0].tflop_ratio.has_value());
}

TEST(RunDataset, DeterministicBytes) {
    dt::TempDir dir;
    const auto paths = write_gaussian_files(dir, 5, 30, 6, 4);
    DatasetConfig cfg;
    cfg.prune.budget = Budget::fraction(0.2);
    cfg.prune.seed = 77;
    cfg.strategies = {Strategy::greedy, Strategy::random, Strategy::minmax};
    cfg.flop = FlopModelConfig{};
    emit_report(run_dataset(paths, cfg), ReportFormat::json, dir / "a.json");
    emit_report(run_dataset(paths, cfg), ReportFormat::json, dir / "b.json");
    EXPECT_EQ(slurp(dir / "a.json"), slurp(dir / "b.json"));

    const auto report = run_dataset(paths, cfg);
    EXPECT_EQ(report.per_instance.size(), 15u);
    for (const auto& r : report.per_instance) {
        ASSERT_TRUE(r.tflop_ratio.has_value());
        EXPECT_GT(*r.tflop_ratio, 0.0);
        EXPECT_LT(*r.tflop_ratio, 1.0);
    }
    for (const auto& h : report.histogram) {
        std::size_t total = 0;
        for (const auto& b : h.bins) total += b.count;
        EXPECT_EQ(total, 5u);
    }
}

// Oracle: paired per-instance comparison; mirrors the qualitative ordering of the strategies.
TEST(RunDataset, GreedyBeatsRandomOnGaussianInstances) {
    dt::TempDir dir;
    const auto paths = write_gaussian_files(dir, 100, 64, 32, 5);
    DatasetConfig cfg;
    cfg.prune.budget = Budget::fraction(0.1);
    cfg.strategies = {Strategy::greedy, Strategy::random, Strategy::minmax};
    const auto report = run_dataset(paths, cfg);
    ASSERT_EQ(report.summary.size(), 3u);
    EXPECT_GT(*report.summary[0].mean, *report.summary[1].mean);
    EXPECT_GT(*report.summary[1].mean, *report.summary[2].mean);
    for (std::size_t i = 0; i < report.per_instance.size(); i += 3) {
        EXPECT_GE(report.per_instance[i].objective, report.per_instance[i + 2].objective);
    }
}

TEST(RunDataset, ErrorsCarryInstanceIdOrAreRecorded) {
    dt::TempDir dir;
    auto paths = write_gaussian_files(dir, 2, 10, 3, 6);
    {
        std::ofstream bad(dir / "bad.divp", std::ios::binary);
        bad << "XXXXXXXXXXXXXXXX";
    }
    paths.insert(paths.begin() + 1, dir / "bad.divp");
    DatasetConfig cfg;
    try {
        run_dataset(paths, cfg);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::MalformedHeader);
        EXPECT_NE(std::string(e.what()).find("bad.divp"), std::string::npos);
    }
    cfg.skip_errors = true;
    const auto report = run_dataset(paths, cfg);
    EXPECT_EQ(report.per_instance.size(), 2u);
    ASSERT_EQ(report.errors.size(), 1u);
    EXPECT_EQ(report.errors[0].instance_id, "bad.divp");
    EXPECT_EQ(report.errors[0].error, "MalformedHeader");
}

TEST(EmitReport, EmptyReportWithErrorsIsValidJson) {
    dt::TempDir dir;
    {
        std::ofstream bad(dir / "only.divp", std::ios::binary);
        bad << "nope";
    }
    const std::vector<std::filesystem::path> paths = {dir / "only.divp"};
    DatasetConfig cfg;
    cfg.skip_errors = true;
    const auto report = run_dataset(paths, cfg);
    emit_report(report, ReportFormat::json, dir / "r.json");
    const auto j = nlohmann::json::parse(slurp(dir / "r.json"));
    EXPECT_TRUE(j.at("per_instance").is_array());
    EXPECT_TRUE(j.at("per_instance").empty());
    EXPECT_EQ(j.at("errors").size(), 1u);
    EXPECT_TRUE(j.at("histogram").at(0).at("bins").empty());
    EXPECT_TRUE(j.at("summary").at(0).at("mean").is_null());
}

TEST(EmitReport, JsonRoundTripAndFieldOrder) {
    dt::TempDir dir;
    const auto paths = write_gaussian_files(dir, 4, 12, 5, 7);
    DatasetConfig cfg;
    cfg.prune.budget = Budget::count(3);
    cfg.strategies = {Strategy::greedy, Strategy::random};
    cfg.flop = FlopModelConfig{};
    const auto report = run_dataset(paths, cfg);
    const std::string text = to_json_string(report);
    EXPECT_EQ(parse_diversity_report(text), report);

    const auto j = nlohmann::ordered_json::parse(text);
    std::vector<std::string> keys;
    for (const auto& [k, v] : j.at("per_instance").at(0).items()) keys.push_back(k);
    EXPECT_EQ(keys, (std::vector<std::string>{"instance_id", "strategy", "M", "M_kept", "objective", "tflop_ratio"}));
    keys.clear();
    for (const auto& [k, v] : j.items()) keys.push_back(k);
    EXPECT_EQ(keys, (std::vector<std::string>{"per_instance", "histogram", "summary", "errors"}));

    // Singleton objectives survive as null -> +inf.
    cfg.prune.budget = Budget::count(1);
    const auto singles = run_dataset(paths, cfg);
    EXPECT_EQ(parse_diversity_report(to_json_string(singles)), singles);
}

TEST(EmitReport, CsvHasHeaderPlusOneRowPerInstance) {
    dt::TempDir dir;
    const auto paths = write_gaussian_files(dir, 3, 10, 4, 8);
    DatasetConfig cfg;
    cfg.strategies = {Strategy::greedy, Strategy::minmax};
    const auto report = run_dataset(paths, cfg);
    emit_report(report, ReportFormat::csv, dir / "r.csv");
    const std::string text = slurp(dir / "r.csv");
    EXPECT_EQ(static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n')), report.per_instance.size() + 1);
    EXPECT_EQ(text.substr(0, text.find('\n')), "instance_id,strategy,M,M_kept,objective,tflop_ratio");
}

TEST(RunSweep, PointsSortedWithIncreasingFlopRatio) {
    dt::TempDir dir;
    const auto paths = write_gaussian_files(dir, 6, 100, 8, 9);
    DatasetConfig cfg;
    cfg.strategies = {Strategy::greedy, Strategy::random};
    FlopModelConfig flop;
    flop.text_tokens = 40;
    flop.visual_tokens = 0;
    cfg.flop = flop;
    const std::vector<double> keeps = {0.25, 0.05, 0.1, 0.1};
    const auto sweep = run_sweep(paths, keeps, cfg);
    ASSERT_EQ(sweep.points.size(), 3u);
    EXPECT_EQ(sweep.points[0].keep_fraction, 0.05);
    for (std::size_t i = 1; i < 3; ++i) {
        EXPECT_LT(sweep.points[i - 1].keep_fraction, sweep.points[i].keep_fraction);
        EXPECT_LT(*sweep.points[i - 1].tflop_ratio, *sweep.points[i].tflop_ratio);
    }
    for (const auto& p : sweep.points) EXPECT_GT(*p.objective_mean[0].value, *p.objective_mean[1].value);

    EXPECT_EQ(parse_sweep_report(to_json_string(sweep)), sweep);
    const std::string csv = to_csv_string(sweep);
    EXPECT_EQ(csv.substr(0, csv.find('\n')), "keep_fraction,tflop_ratio,objective_mean_greedy,objective_mean_random");

    const std::vector<double> bad = {0.0};
    EXPECT_EQ(kind_of([&] { run_sweep(paths, bad, cfg); }), ErrorKind::InvalidBudget);
}

TEST(DistanceCsv, WritesFullMatrix) {
    dt::TempDir dir;
    const auto d = DistanceMatrix::from_values(2, {0, 0.25, 0.25, 0});
    write_distance_csv(d, dir / "d.csv");
    EXPECT_EQ(slurp(dir / "d.csv"), "0,0.25\n0.25,0\n");
}

TEST(JsonWriter, SeventeenSignificantDigits) {
    ordered_json j;
    j["x"] = 0.1;
    j["n"] = 3;
    j["inf"] = kSingletonObjective;
    j["s"] = "a\"b";
    EXPECT_EQ(dump_json(j, -1), "{\"x\":0.10000000000000001,\"n\":3,\"inf\":null,\"s\":\"a\\\"b\"}\n");
    EXPECT_EQ(nlohmann::json::parse(dump_json(j)).at("x").get<double>(), 0.1);
}
