#pragma once

#include "cflow/rational.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace cflow {

enum class LayerKind {
    Conv,
    DepthwiseSeparableConv,
    DepthwiseConv,
    PointwiseConv,
    MaxPool,
    AvgPool,
    FullyConnected,
    ResidualAdd,
};

std::string_view to_string(LayerKind kind);
LayerKind layer_kind_from_string(std::string_view name);

struct LayerSpec {
    std::string name;
    // Name of the document layer this one was lowered from.
    std::string group;
    LayerKind kind = LayerKind::Conv;
    int f = 1;
    int k = 1;
    int s = 1;
    int p = 0;
    int d_in = 1;
    int d_out = 1;
    std::optional<int> residual_source;
    // Set on depthwise layers lowered from AvgPool.
    bool constant_weights = false;

    int out_f() const;
    // Features entering one unit input vector: f*f*d_in for FC, d_in otherwise.
    std::int64_t flat_in() const;
    bool is_sliding() const;
    bool is_fcu() const;
    bool has_weights() const;
    bool has_bias() const;
    std::int64_t weight_count() const;
    // Terms summed per output value.
    std::int64_t accumulated_terms() const;

    bool operator==(const LayerSpec&) const = default;
};

struct QuantFormat {
    int weight_bits = 8;
    int activation_bits = 8;
    bool is_signed = true;
    // Truncate every layer output to activation_bits.
    bool requantize = false;

    bool operator==(const QuantFormat&) const = default;
};

struct InputShape {
    int height = 1;
    int width = 1;
    int channels = 1;

    bool operator==(const InputShape&) const = default;
};

struct NetworkSpec {
    std::string name;
    InputShape input;
    Rate input_rate{1};
    QuantFormat quant;
    // Lowered layers; indices here are what residual_source refers to.
    std::vector<LayerSpec> layers;

    bool operator==(const NetworkSpec&) const = default;
};

enum class Severity { Warning, Error };

struct Diagnostic {
    Severity severity = Severity::Error;
    int layer = -1;
    std::string message;
};

NetworkSpec parse_network(std::string_view text);
NetworkSpec load_network(const std::string& path);
std::string serialize_network(const NetworkSpec& spec);

// Does not throw; an empty list means every invariant holds.
std::vector<Diagnostic> validate_network(const NetworkSpec& spec);
bool has_errors(const std::vector<Diagnostic>& diags);
std::string format_diagnostic(const NetworkSpec& spec, const Diagnostic& d);

// Windowed output side, ceil((f - k + 2p + 1) / s).
int output_side(int f, int k, int s, int p);

} // namespace cflow
