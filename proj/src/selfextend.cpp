#include "teleoracle/selfextend.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "teleoracle/errors.hpp"

namespace teleoracle {

void validate(const SelfExtendConfig& cfg) {
    if (cfg.neighbor_window < 1 || cfg.neighbor_window >= cfg.trained_window) {
        throw Error("selfextend: need 1 <= w_n < L");
    }
    if (cfg.group_size < 1) {
        throw Error("selfextend: need G_s >= 1");
    }
}

std::size_t PositionMatrix::max_entry() const {
    std::size_t m = 0;
    for (const auto& row : rel) {
        for (std::size_t v : row) m = std::max(m, v);
    }
    return m;
}

std::size_t capacity(const SelfExtendConfig& cfg) {
    validate(cfg);
    // Largest T with floor((T-1)/G_s) + w_n - floor(w_n/G_s) <= L - 1.
    // When G_s divides w_n this is the usual (L - w_n) * G_s + w_n; otherwise
    // that closed form admits one out-of-distribution group at the far end.
    return (cfg.trained_window - cfg.neighbor_window + cfg.neighbor_window / cfg.group_size) *
           cfg.group_size;
}

PositionMatrix build_position_matrix(std::size_t seq_len, const SelfExtendConfig& cfg) {
    validate(cfg);
    if (seq_len < 1) {
        throw Error("build_position_matrix: seq_len must be >= 1");
    }

    const std::size_t wn = cfg.neighbor_window;
    const std::size_t gs = cfg.group_size;
    const std::size_t shift = wn - wn / gs;

    PositionMatrix m;
    m.seq_len = seq_len;
    m.rel.resize(seq_len);
    for (std::size_t q = 0; q < seq_len; ++q) {
        m.rel[q].resize(q + 1);
        for (std::size_t k = 0; k <= q; ++k) {
            const std::size_t d = q - k;
            m.rel[q][k] = d <= wn ? d : q / gs - k / gs + shift;
        }
    }
    return m;
}

std::vector<std::pair<std::size_t, std::size_t>> detect_ood(const PositionMatrix& m,
                                                            std::size_t trained_window) {
    std::vector<std::pair<std::size_t, std::size_t>> cells;
    for (std::size_t q = 0; q < m.rel.size(); ++q) {
        for (std::size_t k = 0; k < m.rel[q].size(); ++k) {
            if (m.rel[q][k] >= trained_window) {
                cells.emplace_back(q, k);
            }
        }
    }
    return cells; // already sorted by (q, k) by construction
}

double positional_bias(std::size_t relative_position) {
    return -0.1 * static_cast<double>(relative_position);
}

std::vector<std::vector<double>> attention_weights_demo(std::size_t seq_len,
                                                        const SelfExtendConfig& cfg,
                                                        std::uint64_t seed) {
    if (seq_len > capacity(cfg)) {
        throw Error("attention_weights_demo: seq_len " + std::to_string(seq_len) +
                    " exceeds capacity " + std::to_string(capacity(cfg)) +
                    "; see capacity() for the limit this config supports");
    }
    const PositionMatrix positions = build_position_matrix(seq_len, cfg);

    constexpr std::size_t head_dim = 16;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    const auto unit_vec = [&]() {
        std::vector<double> v(head_dim);
        double norm_sq = 0.0;
        for (double& x : v) {
            x = gauss(rng);
            norm_sq += x * x;
        }
        const double norm = std::sqrt(norm_sq);
        for (double& x : v) x /= norm;
        return v;
    };

    std::vector<std::vector<double>> queries(seq_len), keys(seq_len);
    for (std::size_t i = 0; i < seq_len; ++i) queries[i] = unit_vec();
    for (std::size_t i = 0; i < seq_len; ++i) keys[i] = unit_vec();

    std::vector<std::vector<double>> weights(seq_len, std::vector<double>(seq_len, 0.0));
    for (std::size_t q = 0; q < seq_len; ++q) {
        std::vector<double> logits(q + 1);
        double max_logit = -1e300;
        for (std::size_t k = 0; k <= q; ++k) {
            double dot = 0.0;
            for (std::size_t j = 0; j < head_dim; ++j) dot += queries[q][j] * keys[k][j];
            logits[k] = dot + positional_bias(positions.rel[q][k]);
            max_logit = std::max(max_logit, logits[k]);
        }
        double denom = 0.0;
        for (std::size_t k = 0; k <= q; ++k) {
            logits[k] = std::exp(logits[k] - max_logit);
            denom += logits[k];
        }
        for (std::size_t k = 0; k <= q; ++k) {
            weights[q][k] = logits[k] / denom;
        }
    }
    return weights;
}

std::string format_position_matrix(const PositionMatrix& m, std::size_t trained_window) {
    const std::size_t max_val = m.max_entry();
    std::size_t width = 1;
    for (std::size_t v = max_val; v >= 10; v /= 10) ++width;

    std::ostringstream out;
    for (std::size_t q = 0; q < m.rel.size(); ++q) {
        for (std::size_t k = 0; k < m.rel.size(); ++k) {
            if (k) out << ' ';
            if (k < m.rel[q].size()) {
                std::string cell = std::to_string(m.rel[q][k]);
                out << std::string(width - cell.size(), ' ') << cell;
            } else {
                out << std::string(width - 1, ' ') << '.';
            }
        }
        out << '\n';
    }
    const auto ood = detect_ood(m, trained_window);
    if (ood.empty()) {
        out << "no OOD cells (all positions < " << trained_window << ")\n";
    } else {
        out << ood.size() << " OOD cells (positions >= " << trained_window << "):";
        for (const auto& [q, k] : ood) out << " (" << q << "," << k << ")";
        out << '\n';
    }
    return out.str();
}

} // namespace teleoracle
