#pragma once

#include <cmath>
#include <cstddef>
#include <string>

#include "bevtraj/camera.hpp"
#include "bevtraj/errors.hpp"
#include "bevtraj/tensor.hpp"

namespace bevtraj {

// Sinusoidal position table:
//   PE(pos, 2i)   = sin(pos * 10^(-2i / (dim * log 10000)))
//   PE(pos, 2i+1) = cos(pos * 10^(-2i / (dim * log 10000)))
// with the natural log. Note the exponent differs from the customary
// 10000^(-2i/dim) form; this is the variant implemented here.
struct PositionalEncodingTable {
    std::size_t dim = 0;
    std::size_t max_len = 0;
    Tensor table;   // max_len x dim

    const double* row(std::size_t pos) const { return &table.data[pos * dim]; }
};

inline PositionalEncodingTable positional_encoding(std::size_t dim, std::size_t max_len) {
    if (dim < 2 || dim % 2 != 0) throw config_error("positional_encoding: dim must be even and >= 2, got " + std::to_string(dim));
    if (max_len < 1) throw config_error("positional_encoding: max_len must be >= 1");
    PositionalEncodingTable pe;
    pe.dim = dim;
    pe.max_len = max_len;
    pe.table = Tensor::zeros({max_len, dim});
    const double log10000 = std::log(10000.0);
    for (std::size_t i = 0; i < dim / 2; ++i) {
        const double freq = std::pow(10.0, -2.0 * static_cast<double>(i) / (static_cast<double>(dim) * log10000));
        for (std::size_t pos = 0; pos < max_len; ++pos) {
            const double arg = static_cast<double>(pos) * freq;
            pe.table(pos, 2 * i) = std::sin(arg);
            pe.table(pos, 2 * i + 1) = std::cos(arg);
        }
    }
    return pe;
}

// 2-D position -> one vector: sum of the rows for the quantized x and y
// coordinates. Output length is dim.
inline Tensor encode_node_position(Vec2 center, const PositionalEncodingTable& pe) {
    const auto qx = static_cast<std::size_t>(std::llround(center.x));
    const auto qy = static_cast<std::size_t>(std::llround(center.y));
    if (center.x < 0.0 || center.y < 0.0 || qx >= pe.max_len || qy >= pe.max_len)
        throw config_error("encode_node_position: quantized index out of range for max_len " + std::to_string(pe.max_len));
    Tensor out = Tensor::zeros({pe.dim});
    const double* rx = pe.row(qx);
    const double* ry = pe.row(qy);
    for (std::size_t j = 0; j < pe.dim; ++j) out[j] = rx[j] + ry[j];
    return out;
}

} // namespace bevtraj
