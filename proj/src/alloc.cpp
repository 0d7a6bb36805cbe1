#include "cflow/alloc.hpp"

#include "cflow/arith.hpp"
#include "cflow/errors.hpp"

#include <fmt/format.h>

#include <algorithm>

namespace cflow {

namespace {

std::int64_t greatest_divisor_at_most(std::int64_t n, std::int64_t bound) {
    for (std::int64_t d = std::min(n, bound); d > 1; --d)
        if (n % d == 0)
            return d;
    return 1;
}

} // namespace

ConvAllocation alloc_conv(int d_in, int d_out, Rate r_in) {
    if (d_in <= 0 || d_out <= 0 || r_in.is_zero())
        throw AllocationError("alloc_conv expects positive arguments");
    ConvAllocation a;
    std::int64_t work = std::int64_t{d_in} * d_out;
    std::int64_t uncapped = ceil_div(std::int64_t{d_in} * r_in.den(), r_in.num());
    a.capped = uncapped > work;
    a.C = std::min(uncapped, work);
    // Largest interleave whose slots fit in C; equals ceil(C/d_in) whenever d_in divides C.
    a.I = static_cast<int>(std::max<std::int64_t>(1, a.C / d_in));
    a.n_kpu = static_cast<int>(ceil_div(r_in.ceil() * d_out, a.I));
    a.n_streams_out = static_cast<int>(ceil_div(d_out, a.I));
    a.accumulators = a.n_streams_out;
    a.has_bias = true;
    a.rounded = !a.capped && std::int64_t{a.n_kpu} * a.C != work;
    return a;
}

ConvAllocation alloc_depthwise(int d_in, Rate r_in) {
    if (d_in <= 0 || r_in.is_zero())
        throw AllocationError("alloc_depthwise expects positive arguments");
    ConvAllocation a;
    std::int64_t uncapped = ceil_div(std::int64_t{d_in} * r_in.den(), r_in.num());
    a.capped = uncapped > d_in;
    a.C = std::min<std::int64_t>(uncapped, d_in);
    a.I = 1;
    a.n_kpu = static_cast<int>(r_in.ceil());
    a.n_streams_out = a.n_kpu;
    a.accumulators = 0;
    a.has_bias = false;
    a.rounded = !a.capped && std::int64_t{a.n_kpu} * a.C != d_in;
    return a;
}

FcuAllocation size_fcu(std::int64_t d_in, int d_out, Rate r_in, int min_h) {
    if (d_in <= 0 || d_out <= 0 || r_in.is_zero() || min_h <= 0)
        throw AllocationError("size_fcu expects positive arguments");
    if (min_h > d_out)
        throw AllocationError(fmt::format("min_h={} exceeds d_out={}", min_h, d_out));
    FcuAllocation f;
    f.j_max = r_in.num();
    f.h_max = r_in.den();
    for (f.a = 1;; ++f.a) {
        f.h = greatest_divisor_at_most(d_out, f.a * f.h_max);
        if (f.h >= min_h)
            break;
    }
    f.j = f.a * f.j_max;
    if (d_in % f.j != 0)
        throw AllocationError(fmt::format("input vector of {} features is not divisible into batches of j={}", d_in, f.j));
    f.n_fcu = static_cast<int>(d_out / f.h);
    f.C = f.h * d_in / f.j;
    return f;
}

FcuAllocation alloc_pointwise(int d_in, int d_out, Rate r_in, PointwiseSizing mode, int min_h) {
    if (mode == PointwiseSizing::Aggregated && d_out > d_in)
        min_h = std::max<int>(min_h, static_cast<int>(ceil_div(d_out, d_in)));
    return size_fcu(d_in, d_out, r_in, min_h);
}

PoolAllocation alloc_pool(int d_in, Rate r_in) {
    if (d_in <= 0 || r_in.is_zero())
        throw AllocationError("alloc_pool expects positive arguments");
    PoolAllocation p;
    p.n_ppu = static_cast<int>(std::min<std::int64_t>(r_in.ceil(), d_in));
    p.C = ceil_div(d_in, p.n_ppu);
    p.rounded = std::int64_t{p.n_ppu} * p.C != d_in;
    return p;
}

UnitAllocation allocate_layer(const LayerSpec& l, Rate r_in, const PlanOptions& options) {
    UnitAllocation u;
    u.lanes = static_cast<int>(r_in.ceil());
    switch (l.kind) {
    case LayerKind::Conv:
        u.conv = alloc_conv(l.d_in, l.d_out, r_in);
        u.C = u.conv->C;
        break;
    case LayerKind::DepthwiseConv:
        u.conv = alloc_depthwise(l.d_in, r_in);
        u.C = u.conv->C;
        break;
    case LayerKind::MaxPool:
        u.pool = alloc_pool(l.d_in, r_in);
        u.C = u.pool->C;
        u.lanes = u.pool->n_ppu;
        break;
    case LayerKind::PointwiseConv:
        u.fcu = alloc_pointwise(l.d_in, l.d_out, r_in, options.pointwise, options.min_h);
        u.C = u.fcu->C;
        u.lanes = static_cast<int>(u.fcu->j);
        break;
    case LayerKind::FullyConnected:
        u.fcu = size_fcu(l.flat_in(), l.d_out, r_in, options.min_h);
        u.C = u.fcu->C;
        u.lanes = static_cast<int>(u.fcu->j);
        break;
    case LayerKind::ResidualAdd:
        u.lanes = static_cast<int>(std::min<std::int64_t>(r_in.ceil(), l.d_in));
        u.C = ceil_div(l.d_in, u.lanes);
        break;
    case LayerKind::DepthwiseSeparableConv:
    case LayerKind::AvgPool:
        throw AllocationError(fmt::format("layer {} must be lowered before allocation", l.name));
    }
    if (u.conv && u.conv->capped)
        u.warnings.push_back(fmt::format("stall: configuration count capped at C={}, interleaving cannot restore continuous flow", u.C));
    if (u.conv && u.conv->rounded)
        u.warnings.push_back(fmt::format("continuity break: {} KPUs x C={} exceed the {} work items", u.conv->n_kpu, u.C,
                                         l.kind == LayerKind::Conv ? std::int64_t{l.d_in} * l.d_out : l.d_in));
    if (u.pool && u.pool->rounded)
        u.warnings.push_back(fmt::format("continuity break: {} PPUs x C={} exceed {} channels", u.pool->n_ppu, u.C, l.d_in));
    if (u.pool && r_in < Rate(1))
        u.warnings.push_back("stall: pooling input rate below one feature per cycle");
    return u;
}

int ceil_log2(std::int64_t v) {
    int b = 0;
    while ((std::int64_t{1} << b) < v)
        ++b;
    return b;
}

int accumulator_bits(int input_bits, int weight_bits, std::int64_t terms) {
    return input_bits + weight_bits + ceil_log2(terms);
}

LayerWidths layer_widths(const LayerSpec& l, int input_bits, const QuantFormat& quant) {
    LayerWidths w;
    w.input_bits = input_bits;
    w.terms = l.accumulated_terms();
    switch (l.kind) {
    case LayerKind::MaxPool:
        w.weight_bits = 0;
        w.accumulator_bits = input_bits;
        w.output_bits = input_bits;
        break;
    case LayerKind::ResidualAdd:
        w.weight_bits = 0;
        w.accumulator_bits = accumulator_bits(input_bits, 0, w.terms);
        w.output_bits = w.accumulator_bits;
        break;
    default:
        if (l.constant_weights) {
            w.weight_bits = kAvgShift + 1;
            w.accumulator_bits = accumulator_bits(input_bits, w.weight_bits, w.terms);
            w.output_bits = input_bits;
        } else {
            w.weight_bits = quant.weight_bits;
            w.accumulator_bits = accumulator_bits(input_bits, w.weight_bits, w.terms);
            w.output_bits = w.accumulator_bits;
        }
        break;
    }
    w.result_bits = w.output_bits;
    if (quant.requantize)
        w.output_bits = std::min(w.output_bits, quant.activation_bits);
    return w;
}

std::int64_t finish_output(std::int64_t v, const LayerWidths& w) { return requantize(v, w.result_bits, w.output_bits); }

int input_bits(const QuantFormat& quant) { return quant.activation_bits + (quant.is_signed ? 0 : 1); }

} // namespace cflow
