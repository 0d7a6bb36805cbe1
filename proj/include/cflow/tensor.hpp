#pragma once

#include <cstdint>
#include <vector>

namespace cflow {

// Height x width x channels, row-major pixels (n = r*f + c), channels innermost.
struct Tensor3 {
    int height = 0;
    int width = 0;
    int channels = 0;
    std::vector<std::int64_t> data;

    Tensor3() = default;
    Tensor3(int h, int w, int c) : height(h), width(w), channels(c), data(static_cast<std::size_t>(h) * w * c, 0) {}

    std::size_t index(int r, int c, int ch) const {
        return (static_cast<std::size_t>(r) * width + c) * channels + ch;
    }
    std::int64_t& at(int r, int c, int ch) { return data[index(r, c, ch)]; }
    std::int64_t at(int r, int c, int ch) const { return data[index(r, c, ch)]; }

    bool operator==(const Tensor3&) const = default;
};

// Kernel layouts:
//   conv       [d_out][d_in][k][k]
//   depthwise  [d][k][k]
//   pointwise  [d_out][d_in]
//   fc         [d_out][f*f*d_in], input index (r*f + c)*d_in + ch
struct LayerWeights {
    std::vector<std::int64_t> kernel;
    std::vector<std::int64_t> bias;

    bool operator==(const LayerWeights&) const = default;
};

// One entry per lowered layer; weightless layers hold empty vectors.
struct NetworkWeights {
    std::vector<LayerWeights> layers;

    bool operator==(const NetworkWeights&) const = default;
};

} // namespace cflow
