#include "divprune/flops.hpp"

#include <string>

#include "divprune/errors.hpp"

namespace divprune {

void FlopModelConfig::validate() const {
    if (layers == 0 || hidden == 0 || ffn == 0) {
        throw Error(ErrorKind::NonPositiveDimension, "layers, hidden and ffn sizes must be positive");
    }
    if (prune_layer > layers) {
        throw Error(ErrorKind::InvalidConfig, "prune layer " + std::to_string(prune_layer) + " exceeds " +
                                                  std::to_string(layers) + " layers");
    }
    if (kept_tokens > visual_tokens) {
        throw Error(ErrorKind::InvalidConfig, "kept tokens " + std::to_string(kept_tokens) + " exceed visual tokens " +
                                                  std::to_string(visual_tokens));
    }
    if (pruned_sequence_length() == 0) throw Error(ErrorKind::InvalidConfig, "pruned sequence is empty");
}

double layer_flops(std::uint64_t seq_len, std::uint64_t hidden, std::uint64_t ffn) {
    if (seq_len == 0 || hidden == 0 || ffn == 0) {
        throw Error(ErrorKind::NonPositiveDimension, "sequence length, hidden and ffn sizes must be positive");
    }
    const auto mu = static_cast<double>(seq_len);
    const auto d = static_cast<double>(hidden);
    const auto m = static_cast<double>(ffn);
    return 4.0 * mu * d * d - 2.0 * mu * mu * d + 2.0 * mu * d * m;
}

FlopEstimate estimate_flops(const FlopModelConfig& cfg) {
    cfg.validate();
    const double full = layer_flops(cfg.sequence_length(), cfg.hidden, cfg.ffn);
    const double pruned = layer_flops(cfg.pruned_sequence_length(), cfg.hidden, cfg.ffn);
    if (full <= 0.0 || pruned <= 0.0) {
        throw Error(ErrorKind::ModelOutOfRange,
                    "per-layer cost is not positive at sequence length " + std::to_string(cfg.sequence_length()));
    }
    const auto t = static_cast<double>(cfg.layers);
    const auto k = static_cast<double>(cfg.prune_layer);

    FlopEstimate out;
    out.flops_original = t * full;
    out.flops_pruned = k * full + (t - k) * pruned;
    if (cfg.kept_tokens == cfg.visual_tokens || cfg.prune_layer == cfg.layers) {
        out.flops_pruned = out.flops_original;
        out.ratio = 1.0;
    } else {
        out.ratio = out.flops_pruned / out.flops_original;
    }
    return out;
}

double tflop_ratio(const FlopModelConfig& cfg) { return estimate_flops(cfg).ratio; }

std::vector<std::pair<std::uint64_t, double>> sweep_ratio(const FlopModelConfig& base,
                                                          std::span<const std::uint64_t> kept_values) {
    std::vector<std::pair<std::uint64_t, double>> out;
    out.reserve(kept_values.size());
    for (const std::uint64_t kept : kept_values) {
        FlopModelConfig cfg = base;
        cfg.kept_tokens = kept;
        out.emplace_back(kept, tflop_ratio(cfg));
    }
    return out;
}

}  // namespace divprune
