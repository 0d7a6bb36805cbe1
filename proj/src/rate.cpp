#include "cflow/rate.hpp"

#include <fmt/format.h>

#include <stdexcept>

namespace cflow {

std::string_view to_string(Flow flow) {
    switch (flow) {
    case Flow::Continuous:
        return "continuous";
    case Flow::RestoredByInterleaving:
        return "interleaved";
    case Flow::Stalled:
        return "stalled";
    }
    return "unknown";
}

Rate output_rate(int d_in, int d_out, Rate r_in, int s) {
    if (d_in <= 0 || d_out <= 0 || s <= 0)
        throw std::invalid_argument("output_rate expects positive arguments");
    return r_in * d_out / (std::int64_t{d_in} * s * s);
}

Rate utilization(Rate r_in, std::int64_t C, std::int64_t work) { return min(Rate(1), r_in * C / work); }

Flow flow_of(Rate u, std::int64_t C) {
    if (u < Rate(1))
        return Flow::Stalled;
    return C > 1 ? Flow::RestoredByInterleaving : Flow::Continuous;
}

LayerRateInfo classify_flow(const LayerSpec& layer, Rate r_in, const PlanOptions& options) {
    UnitAllocation u = allocate_layer(layer, r_in, options);
    LayerRateInfo info;
    info.r_in = r_in;
    info.r_out = output_rate(layer.d_in, layer.d_out, r_in, layer.s);
    info.utilization = utilization(r_in, u.C, layer.flat_in());
    info.flow = flow_of(info.utilization, u.C);
    return info;
}

std::vector<LayerRateInfo> propagate_rates(const NetworkSpec& spec, const PlanOptions& options) {
    std::vector<LayerRateInfo> out;
    out.reserve(spec.layers.size());
    Rate r = spec.input_rate;
    for (const auto& l : spec.layers) {
        Rate r_in = r;
        if (l.kind == LayerKind::ResidualAdd && l.residual_source)
            r_in = min(r_in, out.at(static_cast<std::size_t>(*l.residual_source)).r_out);
        out.push_back(classify_flow(l, r_in, options));
        r = out.back().r_out;
    }
    return out;
}

bool output_valid(int n, int f, int k, int s, int p) {
    if (f <= 0 || n < 0 || n >= f * f)
        throw std::domain_error(fmt::format("pixel index {} outside a {}x{} map", n, f, f));
    int r = n / f;
    int c = n % f;
    int last = f - k + 2 * p;
    return r <= last && c <= last && r % s == 0 && c % s == 0;
}

std::int64_t valid_output_count(int f, int k, int s, int p) {
    int last = f - k + 2 * p;
    if (last < 0)
        return 0;
    std::int64_t side = last / s + 1;
    return side * side;
}

int pad_select(int c, int i, int f, int k, int p) {
    if (c >= f - p + i)
        return 0;
    if (c < p - k + i + 1)
        return 0;
    return 1;
}

std::vector<int> pad_tuple(int c, int f, int k, int p) {
    std::vector<int> out(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i)
        out[static_cast<std::size_t>(i)] = pad_select(c, i, f, k, p);
    return out;
}

} // namespace cflow
