#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace divprune {

/// Decoder shape and token counts for the prefill cost model.
struct FlopModelConfig {
    std::uint64_t layers = 32;          ///< T, total decoder layers
    std::uint64_t hidden = 4096;        ///< d, hidden size
    std::uint64_t ffn = 11008;          ///< m, feed-forward intermediate size
    std::uint64_t text_tokens = 0;      ///< N
    std::uint64_t visual_tokens = 576;  ///< M
    std::uint64_t kept_tokens = 56;     ///< visual tokens kept after pruning
    std::uint64_t prune_layer = 0;      ///< K, pruning applies after this many layers

    std::uint64_t sequence_length() const noexcept { return text_tokens + visual_tokens; }
    std::uint64_t pruned_sequence_length() const noexcept { return text_tokens + kept_tokens; }

    /// NonPositiveDimension for zero T/d/m, InvalidConfig for K > T, kept > M or empty sequences.
    void validate() const;
};

/// Per-layer prefill cost 4*mu*d^2 - 2*mu^2*d + 2*mu*d*m, evaluated in double.
double layer_flops(std::uint64_t seq_len, std::uint64_t hidden, std::uint64_t ffn);

struct FlopEstimate {
    double flops_original = 0.0;
    double flops_pruned = 0.0;
    double ratio = 1.0;
};

/// Whole-model totals and their ratio. Throws ModelOutOfRange when the per-layer
/// polynomial is not positive at either sequence length.
FlopEstimate estimate_flops(const FlopModelConfig& cfg);

double tflop_ratio(const FlopModelConfig& cfg);

/// tflop_ratio with kept_tokens replaced by each entry of `kept_values`.
std::vector<std::pair<std::uint64_t, double>> sweep_ratio(const FlopModelConfig& base,
                                                          std::span<const std::uint64_t> kept_values);

}  // namespace divprune
