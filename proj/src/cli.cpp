#include "divprune/cli.hpp"

#include <glob.h>

#include <CLI11.hpp>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <iterator>
#include <optional>
#include <string>
#include <vector>

#include "divprune/distance.hpp"
#include "divprune/embeddings.hpp"
#include "divprune/flops.hpp"
#include "divprune/json_writer.hpp"
#include "divprune/report.hpp"
#include "divprune/selection.hpp"
#include "divprune/version.hpp"

namespace divprune::cli {

namespace {

struct SelectArgs {
    std::string input;
    std::optional<double> keep;
    std::optional<std::size_t> keep_count;
    std::string metric = "cosine";
    std::string strategy = "greedy";
    std::uint64_t seed = 0;
    std::string zero_policy = "error";
    std::string output;
    std::string emit_pruned;
    std::size_t max_rows = kDefaultMaxRows;
};

struct OracleArgs {
    std::string input;
    std::size_t keep_count = 0;
    std::string metric = "cosine";
    std::string zero_policy = "error";
    std::uint64_t limit = kDefaultExactLimit;
    std::string output;
};

struct FlopsArgs {
    FlopModelConfig cfg;
    std::string output;
};

struct SweepArgs {
    std::vector<std::string> inputs;
    std::vector<double> keeps = {kDefaultKeepFraction};
    std::vector<std::string> strategies = {"greedy"};
    std::string metric = "cosine";
    std::string zero_policy = "error";
    std::uint64_t seed = 0;
    std::string output;
    std::string format = "json";
    std::string flop_config;
    std::string diversity_output;
    std::size_t bins = 20;
    bool skip_errors = false;
    std::uint64_t limit = kDefaultExactLimit;
};

struct DistanceArgs {
    std::string input;
    std::string metric = "cosine";
    std::string zero_policy = "error";
    std::string output;
};

/// Thrown for argument combinations CLI11 cannot express.
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

void write_output(const std::string& path, const std::string& text, std::ostream& out) {
    if (path.empty()) {
        out << text;
    } else {
        write_text_file(path, text);
    }
}

ordered_json indices_json(const std::vector<std::size_t>& v) { return ordered_json(v); }

ordered_json doubles_json(const std::vector<double>& v) {
    ordered_json out = ordered_json::array();
    for (const double x : v) out.push_back(x);
    return out;
}

int cmd_select(const SelectArgs& a, std::ostream& out) {
    if (a.keep && a.keep_count) throw UsageError("--keep and --keep-count are mutually exclusive");
    PruneConfig cfg;
    cfg.metric = parse_metric(a.metric);
    cfg.strategy = parse_strategy(a.strategy);
    cfg.zero_policy = parse_zero_policy(a.zero_policy);
    cfg.seed = a.seed;
    cfg.max_rows = a.max_rows;
    cfg.budget = a.keep_count ? Budget::count(*a.keep_count) : Budget::fraction(a.keep.value_or(kDefaultKeepFraction));

    const EmbeddingMatrix emb = load_embeddings(a.input);
    const PruneOutput result = prune(emb, cfg);
    const SelectionResult& sel = result.selection;

    ordered_json j;
    j["M"] = emb.rows();
    j["M_kept"] = sel.selected.size();
    j["metric"] = to_string(cfg.metric);
    j["strategy"] = to_string(cfg.strategy);
    j["zero_policy"] = to_string(cfg.zero_policy);
    j["seed"] = cfg.seed;
    j["rng"] = kRandomAlgorithm;
    j["selected"] = indices_json(sel.sorted_indices());
    j["insertion_order"] = indices_json(sel.selected);
    j["objective"] = sel.objective;
    j["trace"] = doubles_json(sel.trace);
    write_output(a.output, dump_json(j), out);

    if (!a.emit_pruned.empty()) save_embeddings(result.kept, a.emit_pruned, StorageType::f64);
    return kExitOk;
}

int cmd_oracle(const OracleArgs& a, std::ostream& out) {
    const EmbeddingMatrix emb = load_embeddings(a.input);
    if (emb.rows() == 0) throw Error(ErrorKind::EmptyInput, "no tokens to select from");
    const DistanceMatrix dist = distance_matrix(emb, parse_metric(a.metric), parse_zero_policy(a.zero_policy));
    const Budget budget = Budget::count(a.keep_count);
    const SelectionResult exact = exact_select(dist, budget, a.limit);
    const SelectionResult greedy = greedy_select(dist, budget);

    const double ratio = greedy.objective == exact.objective ? 1.0 : greedy.objective / exact.objective;

    ordered_json j;
    j["M"] = emb.rows();
    j["M_kept"] = exact.selected.size();
    j["metric"] = to_string(dist.metric());
    j["exact_objective"] = exact.objective;
    j["greedy_objective"] = greedy.objective;
    j["ratio"] = ratio;
    j["exact_selected"] = indices_json(exact.selected);
    j["greedy_selected"] = indices_json(greedy.selected);
    write_output(a.output, dump_json(j), out);
    return kExitOk;
}

int cmd_flops(const FlopsArgs& a, std::ostream& out) {
    const FlopEstimate est = estimate_flops(a.cfg);
    ordered_json j;
    j["flops_original"] = est.flops_original;
    j["flops_pruned"] = est.flops_pruned;
    j["ratio"] = est.ratio;
    j["ratio_percent"] = est.ratio * 100.0;
    write_output(a.output, dump_json(j), out);
    return kExitOk;
}

std::uint64_t config_field(const ordered_json& j, const char* key, std::uint64_t fallback) {
    if (!j.contains(key)) return fallback;
    const auto& v = j.at(key);
    if (!v.is_number_integer() || v.get<std::int64_t>() < 0) {
        throw Error(ErrorKind::InvalidConfig, std::string("flop config field '") + key + "' must be a non-negative integer");
    }
    return v.get<std::uint64_t>();
}

/// Sidecar keys follow the model's symbols: T, d, m, N, M, M_kept, K. M = 0 (or absent)
/// means "use the token count of the inputs".
FlopModelConfig load_flop_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::IoError, "cannot open " + path);
    ordered_json j;
    try {
        j = ordered_json::parse(in);
    } catch (const ordered_json::exception& e) {
        throw Error(ErrorKind::InvalidConfig, "flop config is not valid JSON: " + std::string(e.what()));
    }
    if (!j.is_object()) throw Error(ErrorKind::InvalidConfig, "flop config must be a JSON object");
    FlopModelConfig cfg;
    cfg.layers = config_field(j, "T", cfg.layers);
    cfg.hidden = config_field(j, "d", cfg.hidden);
    cfg.ffn = config_field(j, "m", cfg.ffn);
    cfg.text_tokens = config_field(j, "N", 0);
    cfg.visual_tokens = config_field(j, "M", 0);
    cfg.kept_tokens = config_field(j, "M_kept", 0);
    cfg.prune_layer = config_field(j, "K", 0);
    return cfg;
}

std::vector<std::filesystem::path> expand_inputs(const std::vector<std::string>& patterns) {
    std::vector<std::filesystem::path> paths;
    for (const auto& pattern : patterns) {
        if (pattern.find_first_of("*?[") == std::string::npos) {
            paths.emplace_back(pattern);
            continue;
        }
        glob_t g{};
        const int rc = ::glob(pattern.c_str(), 0, nullptr, &g);
        if (rc == 0) {
            for (std::size_t i = 0; i < g.gl_pathc; ++i) paths.emplace_back(g.gl_pathv[i]);
        }
        globfree(&g);
        if (rc != 0 && rc != GLOB_NOMATCH) throw Error(ErrorKind::IoError, "cannot expand '" + pattern + "'");
    }
    if (paths.empty()) throw UsageError("no input files matched");
    return paths;
}

int cmd_sweep(const SweepArgs& a, std::ostream& out) {
    DatasetConfig cfg;
    cfg.prune.metric = parse_metric(a.metric);
    cfg.prune.zero_policy = parse_zero_policy(a.zero_policy);
    cfg.prune.seed = a.seed;
    cfg.prune.exact_limit = a.limit;
    cfg.strategies.clear();
    for (const auto& s : a.strategies) cfg.strategies.push_back(parse_strategy(s));
    cfg.bins = a.bins;
    cfg.skip_errors = a.skip_errors;
    if (!a.flop_config.empty()) cfg.flop = load_flop_config(a.flop_config);
    const ReportFormat format = a.format == "csv" ? ReportFormat::csv : ReportFormat::json;

    const auto paths = expand_inputs(a.inputs);
    const SweepReport sweep = run_sweep(paths, a.keeps, cfg);
    write_output(a.output, format == ReportFormat::json ? to_json_string(sweep) : to_csv_string(sweep), out);

    if (!a.diversity_output.empty()) {
        if (sweep.points.size() != 1) throw UsageError("--diversity-output needs exactly one --keeps value");
        cfg.prune.budget = Budget::fraction(sweep.points.front().keep_fraction);
        emit_report(run_dataset(paths, cfg), format, a.diversity_output);
    }
    return kExitOk;
}

int cmd_distance(const DistanceArgs& a) {
    const EmbeddingMatrix emb = load_embeddings(a.input);
    write_distance_csv(distance_matrix(emb, parse_metric(a.metric), parse_zero_policy(a.zero_policy)), a.output);
    return kExitOk;
}

}  // namespace

int exit_code_for(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::IndexOutOfRange:
        case ErrorKind::DuplicateIndex:
        case ErrorKind::InvalidBudget:
        case ErrorKind::BudgetTooLarge:
        case ErrorKind::NonPositiveDimension:
        case ErrorKind::InvalidConfig:
            return kExitUsage;
        case ErrorKind::MalformedHeader:
        case ErrorKind::NonFiniteValue:
        case ErrorKind::DimensionError:
        case ErrorKind::IoError:
        case ErrorKind::ZeroNormVector:
        case ErrorKind::NonPositiveFactor:
        case ErrorKind::EmptyInput:
        case ErrorKind::ModelOutOfRange:
        case ErrorKind::NonFiniteObjective:
            return kExitData;
        case ErrorKind::CombinatorialLimitExceeded:
        case ErrorKind::MatrixTooLarge:
            return kExitLimit;
    }
    return kExitData;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Diversity-based visual token pruning", "divprune"};
    app.set_version_flag("--version", std::string(kVersion));
    app.require_subcommand(1);

    const std::vector<std::string> metrics = {"cosine", "l1", "l2"};
    const std::vector<std::string> policies = {"error", "clamp"};

    SelectArgs sel;
    auto* select = app.add_subcommand("select", "Select a diverse subset of tokens from one embedding file");
    select->add_option("--input", sel.input, "Embedding file (.divp or .csv)")->required();
    auto* keep = select->add_option("--keep", sel.keep, "Fraction of tokens to keep (default 0.098)");
    auto* keep_count = select->add_option("--keep-count", sel.keep_count, "Number of tokens to keep");
    keep->excludes(keep_count);
    select->add_option("--metric", sel.metric)->check(CLI::IsMember(metrics));
    select->add_option("--strategy", sel.strategy)->check(CLI::IsMember({"greedy", "random", "minmax"}));
    select->add_option("--seed", sel.seed, "Seed for the random strategy");
    select->add_option("--zero-policy", sel.zero_policy)->check(CLI::IsMember(policies));
    select->add_option("--max-rows", sel.max_rows, "Largest token count accepted for the dense distance matrix");
    select->add_option("--output", sel.output, "Selection JSON (stdout when omitted)");
    select->add_option("--emit-pruned", sel.emit_pruned, "Write the kept rows as .divp");

    OracleArgs orc;
    auto* oracle = app.add_subcommand("oracle", "Compare the greedy selection with the exhaustive optimum");
    oracle->add_option("--input", orc.input)->required();
    oracle->add_option("--keep-count", orc.keep_count)->required();
    oracle->add_option("--metric", orc.metric)->check(CLI::IsMember(metrics));
    oracle->add_option("--zero-policy", orc.zero_policy)->check(CLI::IsMember(policies));
    oracle->add_option("--limit", orc.limit, "Largest number of subsets to enumerate");
    oracle->add_option("--output", orc.output);

    FlopsArgs fl;
    auto* flops = app.add_subcommand("flops", "Prefill FLOP ratio of a decoder with pruned visual tokens");
    flops->add_option("--layers", fl.cfg.layers, "Decoder layers T");
    flops->add_option("--hidden", fl.cfg.hidden, "Hidden size d");
    flops->add_option("--ffn", fl.cfg.ffn, "Feed-forward intermediate size m");
    flops->add_option("--text-tokens", fl.cfg.text_tokens, "Text tokens N")->required();
    flops->add_option("--visual-tokens", fl.cfg.visual_tokens, "Visual tokens M")->required();
    flops->add_option("--kept-tokens", fl.cfg.kept_tokens, "Visual tokens kept")->required();
    flops->add_option("--prune-layer", fl.cfg.prune_layer, "Layer K after which pruning applies");
    flops->add_option("--output", fl.output);

    SweepArgs sw;
    auto* sweep = app.add_subcommand("sweep", "Diversity of several strategies across keep fractions");
    sweep->add_option("--inputs", sw.inputs, "Embedding files or glob patterns")->required();
    sweep->add_option("--keeps", sw.keeps, "Keep fractions")->delimiter(',');
    sweep->add_option("--strategies", sw.strategies)
        ->delimiter(',')
        ->check(CLI::IsMember({"greedy", "random", "minmax", "exact"}));
    sweep->add_option("--metric", sw.metric)->check(CLI::IsMember(metrics));
    sweep->add_option("--zero-policy", sw.zero_policy)->check(CLI::IsMember(policies));
    sweep->add_option("--seed", sw.seed);
    sweep->add_option("--limit", sw.limit, "Subset limit for the exact strategy");
    sweep->add_option("--output", sw.output);
    sweep->add_option("--format", sw.format)->check(CLI::IsMember({"json", "csv"}));
    sweep->add_option("--flop-config", sw.flop_config, "JSON with keys T, d, m, N, M, K");
    sweep->add_option("--bins", sw.bins, "Histogram bins for --diversity-output")->check(CLI::PositiveNumber);
    sweep->add_option("--diversity-output", sw.diversity_output,
                      "Per-instance report with histograms (single keep value only)");
    sweep->add_flag("--skip-errors", sw.skip_errors, "Record failing files instead of aborting");

    DistanceArgs da;
    auto* distance = app.add_subcommand("distance", "Write the pairwise distance matrix as CSV");
    distance->add_option("--input", da.input)->required();
    distance->add_option("--metric", da.metric)->check(CLI::IsMember(metrics));
    distance->add_option("--zero-policy", da.zero_policy)->check(CLI::IsMember(policies));
    distance->add_option("--output", da.output)->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (select->parsed()) return cmd_select(sel, out);
        if (oracle->parsed()) return cmd_oracle(orc, out);
        if (flops->parsed()) return cmd_flops(fl, out);
        if (sweep->parsed()) return cmd_sweep(sw, out);
        if (distance->parsed()) return cmd_distance(da);
    } catch (const UsageError& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return exit_code_for(e.kind());
    }
    return kExitUsage;
}

}  // namespace divprune::cli
