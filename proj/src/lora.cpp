#include "teleoracle/lora.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>

#include <json.hpp>

#include "teleoracle/errors.hpp"

namespace teleoracle {

Matrix matmul(const Matrix& a, const Matrix& b) {
    if (a.cols != b.rows) {
        throw Error("matmul: inner dimensions disagree");
    }
    Matrix out(a.rows, b.cols);
    for (std::size_t i = 0; i < a.rows; ++i) {
        for (std::size_t k = 0; k < a.cols; ++k) {
            const double aik = a.at(i, k);
            for (std::size_t j = 0; j < b.cols; ++j) {
                out.at(i, j) += aik * b.at(k, j);
            }
        }
    }
    return out;
}

std::vector<double> matvec(const Matrix& m, const std::vector<double>& x) {
    if (m.cols != x.size()) {
        throw Error("matvec: dimension mismatch");
    }
    std::vector<double> out(m.rows, 0.0);
    for (std::size_t i = 0; i < m.rows; ++i) {
        double acc = 0.0;
        for (std::size_t j = 0; j < m.cols; ++j) acc += m.at(i, j) * x[j];
        out[i] = acc;
    }
    return out;
}

void validate(const LoraAdapter& adapter) {
    if (adapter.rank == 0 || adapter.rank > std::min(adapter.base.rows, adapter.base.cols)) {
        throw Error("lora: rank must satisfy 1 <= r <= min(d, k)");
    }
    if (adapter.down.rows != adapter.base.rows || adapter.down.cols != adapter.rank ||
        adapter.up.rows != adapter.rank || adapter.up.cols != adapter.base.cols) {
        throw Error("lora: factor shapes must be B: d x r, A: r x k");
    }
    if (!std::isfinite(adapter.scale())) {
        throw Error("lora: alpha/r must be finite");
    }
}

std::vector<double> apply(const LoraAdapter& adapter, const std::vector<double>& x) {
    validate(adapter);
    if (x.size() != adapter.base.cols) {
        throw Error("lora apply: input length must equal k");
    }
    std::vector<double> out = matvec(adapter.base, x);
    const std::vector<double> low = matvec(adapter.up, x); // r values
    const std::vector<double> delta = matvec(adapter.down, low);
    const double s = adapter.scale();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += s * delta[i];
    return out;
}

Matrix merge(const LoraAdapter& adapter) {
    validate(adapter);
    Matrix out = matmul(adapter.down, adapter.up);
    const double s = adapter.scale();
    for (std::size_t i = 0; i < out.data.size(); ++i) {
        out.data[i] = adapter.base.data[i] + s * out.data[i];
    }
    return out;
}

std::size_t trainable_params(std::size_t d, std::size_t k, std::size_t r) {
    return d * r + r * k;
}

Matrix accumulate_gradients(const std::vector<Matrix>& micro_batch_grads,
                            const std::vector<std::size_t>& batch_sizes) {
    if (micro_batch_grads.empty() || micro_batch_grads.size() != batch_sizes.size()) {
        throw Error("accumulate_gradients: need one batch size per gradient");
    }
    const std::size_t rows = micro_batch_grads.front().rows;
    const std::size_t cols = micro_batch_grads.front().cols;
    double total_weight = 0.0;
    for (std::size_t b = 0; b < micro_batch_grads.size(); ++b) {
        if (micro_batch_grads[b].rows != rows || micro_batch_grads[b].cols != cols) {
            throw Error("accumulate_gradients: gradient shapes disagree");
        }
        if (batch_sizes[b] == 0) {
            throw Error("accumulate_gradients: batch sizes must be positive");
        }
        total_weight += static_cast<double>(batch_sizes[b]);
    }

    Matrix out(rows, cols);
    for (std::size_t b = 0; b < micro_batch_grads.size(); ++b) {
        const double w = static_cast<double>(batch_sizes[b]) / total_weight;
        for (std::size_t i = 0; i < out.data.size(); ++i) {
            out.data[i] += w * micro_batch_grads[b].data[i];
        }
    }
    return out;
}

QuantizedMatrix quantize4(const Matrix& m) {
    for (double v : m.data) {
        if (!std::isfinite(v)) {
            throw Error("quantize4: matrix entries must be finite");
        }
    }
    QuantizedMatrix qm;
    qm.rows = m.rows;
    qm.cols = m.cols;
    qm.codes.resize(m.data.size());

    const std::size_t n_blocks = (m.data.size() + kQuantBlock - 1) / kQuantBlock;
    qm.scales.resize(n_blocks, 0.0);
    for (std::size_t blk = 0; blk < n_blocks; ++blk) {
        const std::size_t begin = blk * kQuantBlock;
        const std::size_t end = std::min(begin + kQuantBlock, m.data.size());
        double blockmax = 0.0;
        for (std::size_t i = begin; i < end; ++i) {
            blockmax = std::max(blockmax, std::fabs(m.data[i]));
        }
        if (blockmax == 0.0) {
            // zero block: scale 0, codes 0
            continue;
        }
        const double scale = blockmax / 7.0;
        qm.scales[blk] = scale;
        for (std::size_t i = begin; i < end; ++i) {
            const long code = std::lround(m.data[i] / scale);
            qm.codes[i] = static_cast<std::int8_t>(std::clamp(code, -8L, 7L));
        }
    }
    return qm;
}

Matrix dequantize(const QuantizedMatrix& qm) {
    Matrix out(qm.rows, qm.cols);
    for (std::size_t i = 0; i < out.data.size(); ++i) {
        out.data[i] = static_cast<double>(qm.codes[i]) * qm.scales[i / kQuantBlock];
    }
    return out;
}

namespace {

void append_f32_le(std::string& out, float v) {
    std::uint32_t bits;
    std::memcpy(&bits, &v, sizeof(bits));
    for (int shift = 0; shift < 32; shift += 8) {
        out.push_back(static_cast<char>((bits >> shift) & 0xff));
    }
}

float read_f32_le(const std::string& bytes, std::size_t offset) {
    std::uint32_t bits = 0;
    for (int i = 3; i >= 0; --i) {
        bits = (bits << 8) | static_cast<std::uint8_t>(bytes[offset + static_cast<std::size_t>(i)]);
    }
    float v;
    std::memcpy(&v, &bits, sizeof(v));
    return v;
}

} // namespace

void save_adapter(const LoraAdapter& adapter, const std::filesystem::path& path) {
    validate(adapter);
    nlohmann::json header;
    header["d"] = adapter.base.rows;
    header["k"] = adapter.base.cols;
    header["r"] = adapter.rank;
    header["alpha"] = adapter.alpha;

    std::string bytes = header.dump();
    bytes += '\n';
    for (double v : adapter.down.data) append_f32_le(bytes, static_cast<float>(v));
    for (double v : adapter.up.data) append_f32_le(bytes, static_cast<float>(v));

    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw Error("cannot write adapter file: " + path.string());
        }
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    }
    std::filesystem::rename(tmp, path);
}

LoraAdapter load_adapter(const std::filesystem::path& path, Matrix base) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error("cannot open adapter file: " + path.string());
    }
    std::string header_line;
    if (!std::getline(in, header_line)) {
        throw Error("adapter file truncated: " + path.string());
    }
    nlohmann::json header;
    try {
        header = nlohmann::json::parse(header_line);
    } catch (const nlohmann::json::parse_error& e) {
        throw Error("adapter header: " + std::string(e.what()));
    }

    LoraAdapter adapter;
    adapter.base = std::move(base);
    const auto d = header.at("d").get<std::size_t>();
    const auto k = header.at("k").get<std::size_t>();
    adapter.rank = header.at("r").get<std::size_t>();
    adapter.alpha = header.at("alpha").get<double>();
    if (d != adapter.base.rows || k != adapter.base.cols) {
        throw Error("adapter shape " + std::to_string(d) + "x" + std::to_string(k) +
                    " does not match base matrix");
    }

    std::string blob((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    const std::size_t expected = (d * adapter.rank + adapter.rank * k) * 4;
    if (blob.size() != expected) {
        throw Error("adapter blob has " + std::to_string(blob.size()) + " bytes, expected " +
                    std::to_string(expected));
    }

    adapter.down = Matrix(d, adapter.rank);
    adapter.up = Matrix(adapter.rank, k);
    std::size_t offset = 0;
    for (double& v : adapter.down.data) {
        v = read_f32_le(blob, offset);
        offset += 4;
    }
    for (double& v : adapter.up.data) {
        v = read_f32_le(blob, offset);
        offset += 4;
    }
    validate(adapter);
    return adapter;
}

} // namespace teleoracle
