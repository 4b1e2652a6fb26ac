#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace teleoracle {

/// Context-extension parameters: trained window L, neighbor window w_n in
/// which exact relative positions are kept, and group size G_s mapping
/// several distant positions onto one trained index.
struct SelfExtendConfig {
    std::size_t trained_window = 2048;  // L
    std::size_t neighbor_window = 1024; // w_n, 1 <= w_n < L
    std::size_t group_size = 8;         // G_s >= 1
};

void validate(const SelfExtendConfig& cfg);

/// Causal table of remapped relative positions; row q holds entries for
/// keys k = 0..q.
struct PositionMatrix {
    std::size_t seq_len = 0;
    std::vector<std::vector<std::size_t>> rel; // rel[q][k], k <= q

    std::size_t max_entry() const;
};

/// Largest sequence length whose position matrix stays within [0, L-1].
/// Equals the closed form (L - w_n) * G_s + w_n whenever G_s divides w_n
/// (it does in every configuration quoted for this method); otherwise the
/// closed form overshoots by up to one group and this returns the exact
/// bound (L - w_n + floor(w_n / G_s)) * G_s.
std::size_t capacity(const SelfExtendConfig& cfg);

/// For distance d = q - k: neighbor attention keeps rel = d while d <= w_n;
/// beyond that, grouped attention assigns
///   floor(q/G_s) - floor(k/G_s) + (w_n - floor(w_n/G_s)),
/// the shift making the two branches meet at the neighbor-window edge.
/// Entries may reach L and beyond when seq_len exceeds capacity(); that is
/// what detect_ood reports, not an error here.
PositionMatrix build_position_matrix(std::size_t seq_len, const SelfExtendConfig& cfg);

/// All (q, k) cells with rel >= trained_window, sorted by (q, k). Empty
/// exactly when the matrix's sequence length is within capacity().
std::vector<std::pair<std::size_t, std::size_t>> detect_ood(const PositionMatrix& m,
                                                            std::size_t trained_window);

/// Positional logit bias used by the demo: a fixed decay per relative
/// position, so cells sharing a grouped position share a bias.
double positional_bias(std::size_t relative_position);

/// Toy single-head causal attention over seeded unit-norm query/key vectors,
/// each logit biased by positional_bias(rel[q][k]) and rows softmaxed.
/// Returns a seq_len x seq_len row-stochastic matrix (zeros above the
/// diagonal). Throws if seq_len exceeds capacity(cfg).
std::vector<std::vector<double>> attention_weights_demo(std::size_t seq_len,
                                                        const SelfExtendConfig& cfg,
                                                        std::uint64_t seed);

/// Aligned-text rendering of the matrix plus its OOD cells, for the CLI.
std::string format_position_matrix(const PositionMatrix& m, std::size_t trained_window);

} // namespace teleoracle
