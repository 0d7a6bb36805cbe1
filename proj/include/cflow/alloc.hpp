#pragma once

#include "cflow/netspec.hpp"
#include "cflow/rational.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace cflow {

struct ConvAllocation {
    int n_kpu = 0;
    std::int64_t C = 1;
    int I = 1;
    int n_streams_out = 0;
    int accumulators = 0;
    bool has_bias = false;
    // C hit its min() bound: the layer stalls.
    bool capped = false;
    // Unit slots exceed the work; continuous flow is broken.
    bool rounded = false;
};

struct FcuAllocation {
    std::int64_t j = 1;
    std::int64_t h = 1;
    std::int64_t a = 1;
    std::int64_t j_max = 1;
    std::int64_t h_max = 1;
    int n_fcu = 1;
    std::int64_t C = 1;
};

struct PoolAllocation {
    int n_ppu = 1;
    std::int64_t C = 1;
    bool rounded = false;
};

enum class PointwiseSizing {
    // Plain size_fcu rule.
    General,
    // Aggregates so each FCU computes d_out/d_in neurons.
    Aggregated,
};

struct PlanOptions {
    int min_h = 1;
    PointwiseSizing pointwise = PointwiseSizing::General;
};

ConvAllocation alloc_conv(int d_in, int d_out, Rate r_in);
ConvAllocation alloc_depthwise(int d_in, Rate r_in);
FcuAllocation size_fcu(std::int64_t d_in, int d_out, Rate r_in, int min_h = 1);
FcuAllocation alloc_pointwise(int d_in, int d_out, Rate r_in, PointwiseSizing mode = PointwiseSizing::General,
                              int min_h = 1);
PoolAllocation alloc_pool(int d_in, Rate r_in);

struct UnitAllocation {
    std::optional<ConvAllocation> conv;
    std::optional<PoolAllocation> pool;
    std::optional<FcuAllocation> fcu;
    // Configurations per unit (per pixel for sliding and pointwise layers, per vector for FC).
    std::int64_t C = 1;
    // Parallel input streams after interleaving.
    int lanes = 1;
    std::vector<std::string> warnings;

    int n_kpu() const { return conv ? conv->n_kpu : 0; }
    int n_ppu() const { return pool ? pool->n_ppu : 0; }
    int n_fcu() const { return fcu ? fcu->n_fcu : 0; }
};

UnitAllocation allocate_layer(const LayerSpec& layer, Rate r_in, const PlanOptions& options = {});

struct LayerWidths {
    int input_bits = 0;
    int weight_bits = 0;
    std::int64_t terms = 1;
    int accumulator_bits = 0;
    // Width of the layer result before requantization.
    int result_bits = 0;
    int output_bits = 0;
};

// Applies the requantization rule implied by `w` to a layer result.
std::int64_t finish_output(std::int64_t v, const LayerWidths& w);
// Width of the network input.
int input_bits(const QuantFormat& quant);

int ceil_log2(std::int64_t v);
// input_bits + weight_bits + ceil(log2(terms)).
int accumulator_bits(int input_bits, int weight_bits, std::int64_t terms);
// Widths for one layer given its input width.
LayerWidths layer_widths(const LayerSpec& layer, int input_bits, const QuantFormat& quant);

} // namespace cflow
