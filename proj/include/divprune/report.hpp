#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "divprune/distance.hpp"
#include "divprune/flops.hpp"
#include "divprune/selection.hpp"

namespace divprune {

struct HistogramBin {
    double bin_lower = 0.0;
    double bin_upper = 0.0;
    std::size_t count = 0;

    friend bool operator==(const HistogramBin&, const HistogramBin&) = default;
};

/// Equal-width bins over [0, max]. Bins are left-closed and right-open except the
/// last, which is closed. Throws EmptyInput / NonFiniteObjective.
std::vector<HistogramBin> diversity_histogram(std::span<const double> objectives, std::size_t bins);

struct InstanceRecord {
    std::string instance_id;
    Strategy strategy = Strategy::greedy;
    std::size_t M = 0;
    std::size_t M_kept = 0;
    double objective = kSingletonObjective;
    std::optional<double> tflop_ratio;

    friend bool operator==(const InstanceRecord&, const InstanceRecord&) = default;
};

struct StrategyHistogram {
    Strategy strategy = Strategy::greedy;
    std::vector<HistogramBin> bins;

    friend bool operator==(const StrategyHistogram&, const StrategyHistogram&) = default;
};

/// Statistics over the finite objectives of one strategy; empty when there are none.
struct StrategySummary {
    Strategy strategy = Strategy::greedy;
    std::optional<double> mean;
    std::optional<double> median;
    std::optional<double> min;
    std::optional<double> max;

    friend bool operator==(const StrategySummary&, const StrategySummary&) = default;
};

struct InstanceError {
    std::string instance_id;
    std::string error;
    std::string message;

    friend bool operator==(const InstanceError&, const InstanceError&) = default;
};

struct DiversityReport {
    std::vector<InstanceRecord> per_instance;
    std::vector<StrategyHistogram> histogram;
    std::vector<StrategySummary> summary;
    std::vector<InstanceError> errors;

    friend bool operator==(const DiversityReport&, const DiversityReport&) = default;
};

struct StrategyMean {
    Strategy strategy = Strategy::greedy;
    std::optional<double> value;

    friend bool operator==(const StrategyMean&, const StrategyMean&) = default;
};

struct SweepPoint {
    double keep_fraction = 0.0;
    std::optional<double> tflop_ratio;
    std::vector<StrategyMean> objective_mean;

    friend bool operator==(const SweepPoint&, const SweepPoint&) = default;
};

struct SweepReport {
    std::vector<SweepPoint> points;
    std::vector<InstanceError> errors;

    friend bool operator==(const SweepReport&, const SweepReport&) = default;
};

struct DatasetConfig {
    /// Budget, metric, seed and zero policy; `prune.strategy` is ignored in favour of `strategies`.
    PruneConfig prune;
    std::vector<Strategy> strategies = {Strategy::greedy};
    std::size_t bins = 20;
    /// When set, each instance gets a FLOP ratio with M / M_kept taken from the instance.
    std::optional<FlopModelConfig> flop;
    bool skip_errors = false;
};

/// Instance ids are file names; names shared by several inputs fall back to the full path.
std::vector<std::string> instance_ids(std::span<const std::filesystem::path> paths);

DiversityReport run_dataset(std::span<const std::filesystem::path> paths, const DatasetConfig& config);

/// One point per distinct keep fraction (sorted ascending), each averaging every strategy's
/// objective over all instances. FLOP ratios use `config.flop`, whose visual token count
/// falls back to the first instance's row count when zero.
SweepReport run_sweep(std::span<const std::filesystem::path> paths, std::span<const double> keep_fractions,
                      const DatasetConfig& config);

enum class ReportFormat { json, csv };

std::string to_json_string(const DiversityReport& report);
std::string to_json_string(const SweepReport& report);
std::string to_csv_string(const DiversityReport& report);
std::string to_csv_string(const SweepReport& report);

DiversityReport parse_diversity_report(const std::string& json_text);
SweepReport parse_sweep_report(const std::string& json_text);

void emit_report(const DiversityReport& report, ReportFormat format, const std::filesystem::path& path);
void emit_report(const SweepReport& report, ReportFormat format, const std::filesystem::path& path);

/// n x n matrix as headerless CSV with 17 significant digits.
void write_distance_csv(const DistanceMatrix& dist, const std::filesystem::path& path);

/// Writes `text` to `path`, throwing IoError on failure.
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace divprune
