#pragma once

#include "cflow/netspec.hpp"
#include "cflow/tensor.hpp"

#include <cstdint>
#include <vector>

namespace cflow {

Tensor3 ref_conv2d(const Tensor3& x, const std::vector<std::int64_t>& w, const std::vector<std::int64_t>& bias, int d_out,
                   int k, int s, int p);
Tensor3 ref_depthwise(const Tensor3& x, const std::vector<std::int64_t>& w, int k, int s, int p);
Tensor3 ref_maxpool(const Tensor3& x, int k, int s);
Tensor3 ref_avgpool(const Tensor3& x, int k, int s);
std::vector<std::int64_t> ref_fc(const std::vector<std::int64_t>& x_flat, const std::vector<std::int64_t>& w,
                                 const std::vector<std::int64_t>& bias, int d_out);
Tensor3 ref_residual_add(const Tensor3& a, const Tensor3& b);

// One layer without requantization.
Tensor3 ref_layer(const LayerSpec& layer, const LayerWeights& weights, const Tensor3& x, const Tensor3* shortcut = nullptr);

// Output of every layer, requantized as the widths dictate.
std::vector<Tensor3> ref_network_all(const NetworkSpec& spec, const NetworkWeights& weights, const Tensor3& x);
Tensor3 ref_network(const NetworkSpec& spec, const NetworkWeights& weights, const Tensor3& x);

// Uniform integers in the `bits`-wide two's-complement range (or [0, 2^bits) unsigned).
std::vector<std::int64_t> gen_random_values(std::size_t n, std::uint64_t seed, int bits, bool is_signed = true);
Tensor3 gen_random_tensor(int h, int w, int c, std::uint64_t seed, int bits, bool is_signed = true);
// Kernels at weight_bits, biases at activation_bits.
NetworkWeights gen_random_weights(const NetworkSpec& spec, std::uint64_t seed);
NetworkWeights zero_weights(const NetworkSpec& spec);
Tensor3 gen_random_input(const NetworkSpec& spec, std::uint64_t seed);

std::size_t kernel_size(const LayerSpec& layer);
std::size_t bias_size(const LayerSpec& layer);

} // namespace cflow
