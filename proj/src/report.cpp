#include "divprune/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

#include "divprune/embeddings.hpp"
#include "divprune/errors.hpp"
#include "divprune/json_writer.hpp"

namespace divprune {

namespace {

/// Per-instance seed so that random selections differ across files but stay reproducible.
std::uint64_t instance_seed(std::uint64_t seed, std::size_t index) {
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (static_cast<std::uint64_t>(index) + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

std::vector<double> finite_only(const std::vector<double>& values) {
    std::vector<double> out;
    std::copy_if(values.begin(), values.end(), std::back_inserter(out), [](double v) { return std::isfinite(v); });
    return out;
}

StrategySummary summarize(Strategy strategy, std::vector<double> values) {
    StrategySummary s;
    s.strategy = strategy;
    if (values.empty()) return s;
    std::sort(values.begin(), values.end());
    const std::size_t n = values.size();
    s.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(n);
    s.median = n % 2 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
    s.min = values.front();
    s.max = values.back();
    return s;
}

std::optional<double> mean_of(const std::vector<double>& values) {
    const auto finite = finite_only(values);
    if (finite.empty()) return std::nullopt;
    return std::accumulate(finite.begin(), finite.end(), 0.0) / static_cast<double>(finite.size());
}

ordered_json optional_number(const std::optional<double>& v) { return v ? ordered_json(*v) : ordered_json(nullptr); }

std::optional<double> optional_from(const ordered_json& v) {
    if (v.is_null()) return std::nullopt;
    return v.get<double>();
}

ordered_json errors_json(const std::vector<InstanceError>& errors) {
    ordered_json out = ordered_json::array();
    for (const auto& e : errors) {
        out.push_back({{"instance_id", e.instance_id}, {"error", e.error}, {"message", e.message}});
    }
    return out;
}

std::vector<InstanceError> errors_from(const ordered_json& j) {
    std::vector<InstanceError> out;
    for (const auto& e : j) {
        out.push_back({e.at("instance_id").get<std::string>(), e.at("error").get<std::string>(),
                       e.at("message").get<std::string>()});
    }
    return out;
}

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (const char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

ordered_json parse_json(const std::string& text) {
    try {
        return ordered_json::parse(text);
    } catch (const ordered_json::exception& e) {
        throw Error(ErrorKind::IoError, std::string("report is not valid JSON: ") + e.what());
    }
}

/// Runs `body` for one instance, converting failures into report errors or rethrowing with the id attached.
template <typename Body>
bool guarded(const std::string& id, bool skip_errors, std::vector<InstanceError>& errors, Body&& body) {
    try {
        body();
        return true;
    } catch (const Error& e) {
        if (!skip_errors) throw Error(e.kind(), id + ": " + e.message());
        errors.push_back({id, std::string(e.name()), e.message()});
        return false;
    }
}

}  // namespace

std::vector<HistogramBin> diversity_histogram(std::span<const double> objectives, std::size_t bins) {
    if (objectives.empty()) throw Error(ErrorKind::EmptyInput, "no objectives to bin");
    if (bins == 0) throw Error(ErrorKind::InvalidConfig, "histogram needs at least one bin");
    for (const double v : objectives) {
        if (!std::isfinite(v) || v < 0.0) {
            throw Error(ErrorKind::NonFiniteObjective, "objective " + format_double(v) + " is not finite and >= 0");
        }
    }
    const double top = *std::max_element(objectives.begin(), objectives.end());
    const double width = top / static_cast<double>(bins);

    std::vector<HistogramBin> out(bins);
    for (std::size_t b = 0; b < bins; ++b) {
        out[b].bin_lower = width * static_cast<double>(b);
        out[b].bin_upper = b + 1 == bins ? top : width * static_cast<double>(b + 1);
    }
    for (const double v : objectives) {
        std::size_t b = width > 0.0 ? static_cast<std::size_t>(v / width) : bins - 1;
        b = std::min(b, bins - 1);
        while (b > 0 && v < out[b].bin_lower) --b;
        while (b + 1 < bins && v >= out[b].bin_upper) ++b;
        ++out[b].count;
    }
    return out;
}

std::vector<std::string> instance_ids(std::span<const std::filesystem::path> paths) {
    std::map<std::string, std::size_t> seen;
    for (const auto& p : paths) ++seen[p.filename().string()];
    std::vector<std::string> ids;
    ids.reserve(paths.size());
    for (const auto& p : paths) {
        const auto name = p.filename().string();
        ids.push_back(seen[name] > 1 ? p.string() : name);
    }
    return ids;
}

DiversityReport run_dataset(std::span<const std::filesystem::path> paths, const DatasetConfig& config) {
    if (config.strategies.empty()) throw Error(ErrorKind::InvalidConfig, "no strategies requested");
    const auto ids = instance_ids(paths);

    DiversityReport report;
    for (std::size_t i = 0; i < paths.size(); ++i) {
        std::vector<InstanceRecord> records;
        const bool ok = guarded(ids[i], config.skip_errors, report.errors, [&] {
            const EmbeddingMatrix emb = load_embeddings(paths[i]);
            if (emb.rows() == 0) throw Error(ErrorKind::EmptyInput, "no tokens to select from");
            const DistanceMatrix dist =
                distance_matrix(emb, config.prune.metric, config.prune.zero_policy, config.prune.max_rows);
            for (const Strategy strategy : config.strategies) {
                PruneConfig cfg = config.prune;
                cfg.strategy = strategy;
                cfg.seed = instance_seed(config.prune.seed, i);
                const SelectionResult sel = run_strategy(dist, cfg);

                InstanceRecord rec;
                rec.instance_id = ids[i];
                rec.strategy = strategy;
                rec.M = emb.rows();
                rec.M_kept = sel.selected.size();
                rec.objective = sel.objective;
                if (config.flop) {
                    FlopModelConfig flop = *config.flop;
                    flop.visual_tokens = rec.M;
                    flop.kept_tokens = rec.M_kept;
                    rec.tflop_ratio = tflop_ratio(flop);
                }
                records.push_back(std::move(rec));
            }
        });
        if (ok) report.per_instance.insert(report.per_instance.end(), records.begin(), records.end());
    }

    for (const Strategy strategy : config.strategies) {
        std::vector<double> objectives;
        for (const auto& rec : report.per_instance) {
            if (rec.strategy == strategy) objectives.push_back(rec.objective);
        }
        const auto finite = finite_only(objectives);
        StrategyHistogram hist{strategy, {}};
        if (!finite.empty()) hist.bins = diversity_histogram(finite, config.bins);
        report.histogram.push_back(std::move(hist));
        report.summary.push_back(summarize(strategy, finite));
    }
    return report;
}

SweepReport run_sweep(std::span<const std::filesystem::path> paths, std::span<const double> keep_fractions,
                      const DatasetConfig& config) {
    if (config.strategies.empty()) throw Error(ErrorKind::InvalidConfig, "no strategies requested");
    std::vector<double> keeps(keep_fractions.begin(), keep_fractions.end());
    std::sort(keeps.begin(), keeps.end());
    keeps.erase(std::unique(keeps.begin(), keeps.end()), keeps.end());
    if (keeps.empty()) throw Error(ErrorKind::InvalidConfig, "no keep fractions given");
    for (const double k : keeps) Budget::fraction(k);

    const auto ids = instance_ids(paths);
    const std::size_t n_strategies = config.strategies.size();
    // objectives[keep][strategy] collects one value per successful instance.
    std::vector<std::vector<std::vector<double>>> objectives(keeps.size(),
                                                             std::vector<std::vector<double>>(n_strategies));
    std::optional<std::size_t> first_rows;

    SweepReport report;
    for (std::size_t i = 0; i < paths.size(); ++i) {
        std::vector<std::vector<double>> local(keeps.size() * n_strategies);
        std::size_t rows = 0;
        const bool ok = guarded(ids[i], config.skip_errors, report.errors, [&] {
            const EmbeddingMatrix emb = load_embeddings(paths[i]);
            if (emb.rows() == 0) throw Error(ErrorKind::EmptyInput, "no tokens to select from");
            rows = emb.rows();
            const DistanceMatrix dist =
                distance_matrix(emb, config.prune.metric, config.prune.zero_policy, config.prune.max_rows);
            for (std::size_t k = 0; k < keeps.size(); ++k) {
                for (std::size_t s = 0; s < n_strategies; ++s) {
                    PruneConfig cfg = config.prune;
                    cfg.strategy = config.strategies[s];
                    cfg.budget = Budget::fraction(keeps[k]);
                    cfg.seed = instance_seed(config.prune.seed, i);
                    local[k * n_strategies + s].push_back(run_strategy(dist, cfg).objective);
                }
            }
        });
        if (!ok) continue;
        if (!first_rows) first_rows = rows;
        for (std::size_t k = 0; k < keeps.size(); ++k) {
            for (std::size_t s = 0; s < n_strategies; ++s) {
                objectives[k][s].push_back(local[k * n_strategies + s].front());
            }
        }
    }

    for (std::size_t k = 0; k < keeps.size(); ++k) {
        SweepPoint point;
        point.keep_fraction = keeps[k];
        if (config.flop) {
            FlopModelConfig flop = *config.flop;
            if (flop.visual_tokens == 0 && first_rows) flop.visual_tokens = *first_rows;
            if (flop.visual_tokens > 0) {
                flop.kept_tokens = Budget::fraction(keeps[k]).resolve(flop.visual_tokens);
                point.tflop_ratio = tflop_ratio(flop);
            }
        }
        for (std::size_t s = 0; s < n_strategies; ++s) {
            point.objective_mean.push_back({config.strategies[s], mean_of(objectives[k][s])});
        }
        report.points.push_back(std::move(point));
    }
    return report;
}

std::string to_json_string(const DiversityReport& report) {
    ordered_json root;
    root["per_instance"] = ordered_json::array();
    for (const auto& r : report.per_instance) {
        ordered_json j;
        j["instance_id"] = r.instance_id;
        j["strategy"] = to_string(r.strategy);
        j["M"] = r.M;
        j["M_kept"] = r.M_kept;
        j["objective"] = r.objective;
        j["tflop_ratio"] = optional_number(r.tflop_ratio);
        root["per_instance"].push_back(std::move(j));
    }
    root["histogram"] = ordered_json::array();
    for (const auto& h : report.histogram) {
        ordered_json bins = ordered_json::array();
        for (const auto& b : h.bins) {
            bins.push_back({{"bin_lower", b.bin_lower}, {"bin_upper", b.bin_upper}, {"count", b.count}});
        }
        root["histogram"].push_back({{"strategy", to_string(h.strategy)}, {"bins", std::move(bins)}});
    }
    root["summary"] = ordered_json::array();
    for (const auto& s : report.summary) {
        ordered_json j;
        j["strategy"] = to_string(s.strategy);
        j["mean"] = optional_number(s.mean);
        j["median"] = optional_number(s.median);
        j["min"] = optional_number(s.min);
        j["max"] = optional_number(s.max);
        root["summary"].push_back(std::move(j));
    }
    root["errors"] = errors_json(report.errors);
    return dump_json(root);
}

std::string to_json_string(const SweepReport& report) {
    ordered_json root;
    root["points"] = ordered_json::array();
    for (const auto& p : report.points) {
        ordered_json j;
        j["keep_fraction"] = p.keep_fraction;
        j["tflop_ratio"] = optional_number(p.tflop_ratio);
        ordered_json means = ordered_json::object();
        for (const auto& m : p.objective_mean) means[std::string(to_string(m.strategy))] = optional_number(m.value);
        j["objective_mean"] = std::move(means);
        root["points"].push_back(std::move(j));
    }
    root["errors"] = errors_json(report.errors);
    return dump_json(root);
}

std::string to_csv_string(const DiversityReport& report) {
    std::ostringstream os;
    os << "instance_id,strategy,M,M_kept,objective,tflop_ratio\n";
    for (const auto& r : report.per_instance) {
        os << csv_field(r.instance_id) << ',' << to_string(r.strategy) << ',' << r.M << ',' << r.M_kept << ','
           << format_double(r.objective) << ',' << (r.tflop_ratio ? format_double(*r.tflop_ratio) : "") << '\n';
    }
    return os.str();
}

std::string to_csv_string(const SweepReport& report) {
    std::ostringstream os;
    os << "keep_fraction,tflop_ratio";
    if (!report.points.empty()) {
        for (const auto& m : report.points.front().objective_mean) os << ",objective_mean_" << to_string(m.strategy);
    }
    os << '\n';
    for (const auto& p : report.points) {
        os << format_double(p.keep_fraction) << ',' << (p.tflop_ratio ? format_double(*p.tflop_ratio) : "");
        for (const auto& m : p.objective_mean) os << ',' << (m.value ? format_double(*m.value) : "");
        os << '\n';
    }
    return os.str();
}

DiversityReport parse_diversity_report(const std::string& json_text) {
    const ordered_json root = parse_json(json_text);
    DiversityReport report;
    try {
        for (const auto& j : root.at("per_instance")) {
            InstanceRecord r;
            r.instance_id = j.at("instance_id").get<std::string>();
            r.strategy = parse_strategy(j.at("strategy").get<std::string>());
            r.M = j.at("M").get<std::size_t>();
            r.M_kept = j.at("M_kept").get<std::size_t>();
            r.objective = number_or_infinity(j.at("objective"));
            r.tflop_ratio = optional_from(j.at("tflop_ratio"));
            report.per_instance.push_back(std::move(r));
        }
        for (const auto& j : root.at("histogram")) {
            StrategyHistogram h;
            h.strategy = parse_strategy(j.at("strategy").get<std::string>());
            for (const auto& b : j.at("bins")) {
                h.bins.push_back({b.at("bin_lower").get<double>(), b.at("bin_upper").get<double>(),
                                  b.at("count").get<std::size_t>()});
            }
            report.histogram.push_back(std::move(h));
        }
        for (const auto& j : root.at("summary")) {
            report.summary.push_back({parse_strategy(j.at("strategy").get<std::string>()), optional_from(j.at("mean")),
                                      optional_from(j.at("median")), optional_from(j.at("min")),
                                      optional_from(j.at("max"))});
        }
        report.errors = errors_from(root.at("errors"));
    } catch (const ordered_json::exception& e) {
        throw Error(ErrorKind::IoError, std::string("malformed diversity report: ") + e.what());
    }
    return report;
}

SweepReport parse_sweep_report(const std::string& json_text) {
    const ordered_json root = parse_json(json_text);
    SweepReport report;
    try {
        for (const auto& j : root.at("points")) {
            SweepPoint p;
            p.keep_fraction = j.at("keep_fraction").get<double>();
            p.tflop_ratio = optional_from(j.at("tflop_ratio"));
            for (const auto& [name, value] : j.at("objective_mean").items()) {
                p.objective_mean.push_back({parse_strategy(name), optional_from(value)});
            }
            report.points.push_back(std::move(p));
        }
        report.errors = errors_from(root.at("errors"));
    } catch (const ordered_json::exception& e) {
        throw Error(ErrorKind::IoError, std::string("malformed sweep report: ") + e.what());
    }
    return report;
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::IoError, "cannot open for writing: " + path.string());
    out << text;
    out.flush();
    if (!out) throw Error(ErrorKind::IoError, "write failed: " + path.string());
}

void emit_report(const DiversityReport& report, ReportFormat format, const std::filesystem::path& path) {
    write_text_file(path, format == ReportFormat::json ? to_json_string(report) : to_csv_string(report));
}

void emit_report(const SweepReport& report, ReportFormat format, const std::filesystem::path& path) {
    write_text_file(path, format == ReportFormat::json ? to_json_string(report) : to_csv_string(report));
}

void write_distance_csv(const DistanceMatrix& dist, const std::filesystem::path& path) {
    std::string out;
    for (std::size_t i = 0; i < dist.size(); ++i) {
        for (std::size_t j = 0; j < dist.size(); ++j) {
            if (j) out += ',';
            out += format_double(dist(i, j));
        }
        out += '\n';
    }
    write_text_file(path, out);
}

}  // namespace divprune
