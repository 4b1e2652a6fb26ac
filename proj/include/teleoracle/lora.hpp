#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <vector>

namespace teleoracle {

/// Dense row-major matrix of doubles, sized for desk-scale adapter math.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data; // rows * cols, row-major

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

    double& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
    double at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
};

Matrix matmul(const Matrix& a, const Matrix& b);
std::vector<double> matvec(const Matrix& m, const std::vector<double>& x);

/// Low-rank update (alpha/r)·B·A over a frozen base W0 (d x k), with
/// B d x r and A r x k.
struct LoraAdapter {
    Matrix base;  // W0
    Matrix down;  // B, d x r
    Matrix up;    // A, r x k
    std::size_t rank = 0;
    double alpha = 0.0;

    double scale() const { return alpha / static_cast<double>(rank); }
};

void validate(const LoraAdapter& adapter);

/// W0·x + (alpha/r)·B·(A·x), never materializing the dense update.
std::vector<double> apply(const LoraAdapter& adapter, const std::vector<double>& x);

/// W0 + (alpha/r)·B·A, dense.
Matrix merge(const LoraAdapter& adapter);

/// d·r + r·k — the update parameters a rank-r adapter trains.
std::size_t trainable_params(std::size_t d, std::size_t k, std::size_t r);

/// Size-weighted mean of per-micro-batch mean gradients; exactly the
/// full-batch gradient for losses that are means over examples.
Matrix accumulate_gradients(const std::vector<Matrix>& micro_batch_grads,
                            const std::vector<std::size_t>& batch_sizes);

inline constexpr std::size_t kQuantBlock = 64;

/// 4-bit signed codes with one absmax scale per block of 64 values
/// (row-major order; the last block may be short). scale = blockmax/7,
/// code = round(v/scale) clamped to [-8, 7].
struct QuantizedMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<std::int8_t> codes;
    std::vector<double> scales;
};

QuantizedMatrix quantize4(const Matrix& m);
Matrix dequantize(const QuantizedMatrix& qm);

// Adapter file: one JSON header line {"d","k","r","alpha"} followed by
// little-endian f32 blobs for B then A (row-major). The frozen base is not
// stored.
void save_adapter(const LoraAdapter& adapter, const std::filesystem::path& path);
LoraAdapter load_adapter(const std::filesystem::path& path, Matrix base);

} // namespace teleoracle
