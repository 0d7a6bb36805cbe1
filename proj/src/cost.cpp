#include "cflow/cost.hpp"

#include "cflow/errors.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <stdexcept>

namespace cflow {

ResourceVector& ResourceVector::operator+=(const ResourceVector& o) {
    adders += o.adders;
    multipliers += o.multipliers;
    registers += o.registers;
    mux2 += o.mux2;
    max_units += o.max_units;
    weights += o.weights;
    return *this;
}

ResourceVector operator*(ResourceVector a, std::int64_t n) {
    a.adders *= n;
    a.multipliers *= n;
    a.registers *= n;
    a.mux2 *= n;
    a.max_units *= n;
    a.weights *= n;
    return a;
}

ScopeName scope_from_string(std::string_view name) {
    if (name == "full")
        return ScopeName::Full;
    if (name == "core")
        return ScopeName::Core;
    if (name == "parallel")
        return ScopeName::Parallel;
    throw std::invalid_argument(fmt::format("unknown scope '{}'", name));
}

std::string_view to_string(ScopeName scope) {
    switch (scope) {
    case ScopeName::Full:
        return "full";
    case ScopeName::Core:
        return "core";
    case ScopeName::Parallel:
        return "parallel";
    }
    return "unknown";
}

ResourceVector kpu_cost(int k, int f, std::int64_t C) {
    ResourceVector r;
    std::int64_t k2 = std::int64_t{k} * k;
    r.adders = k2 - 1;
    r.multipliers = k2;
    r.registers = (std::int64_t{k} * (k - 1) + std::int64_t{k - 1} * (f - k + 1)) * C;
    r.mux2 = k2 * (C - 1);
    return r;
}

bool needs_accumulation(int d_in, Rate r_in) { return !(d_in == 1 && r_in == Rate(1)); }

ResourceVector accumulator_cost(int d_out, int I, int n_kpu) {
    ResourceVector r;
    r.registers = d_out;
    r.adders = ceil_div(d_out, I) * ceil_div(n_kpu, d_out);
    return r;
}

ResourceVector bias_cost(int d_out, int I) {
    ResourceVector r;
    r.adders = ceil_div(d_out, I);
    r.mux2 = d_out - r.adders;
    return r;
}

ResourceVector interleaver_cost(int d_in, int I, Rate r_in, int d_out) {
    ResourceVector r;
    r.mux2 = std::max<std::int64_t>(0, ceil_div(d_in, I) - r_in.ceil());
    r.registers = d_out;
    return r;
}

ResourceVector ppu_cost(int k, int f, std::int64_t C) {
    ResourceVector r = kpu_cost(k, f, C);
    r.max_units = std::int64_t{k} * k - 1;
    r.adders = 0;
    r.multipliers = 0;
    r.mux2 = 0;
    return r;
}

ResourceVector fcu_cost(std::int64_t j, std::int64_t h, std::int64_t C, int n_fcu) {
    ResourceVector r;
    r.adders = j;
    r.multipliers = j;
    r.registers = h;
    r.mux2 = j * (C - 1);
    return r * n_fcu;
}

ResourceVector layer_cost(const LayerPlan& lp, const LayerPlan* upstream, const CostScope& scope) {
    const LayerSpec& l = lp.layer;
    const UnitAllocation& u = lp.units;
    ResourceVector r;
    bool has_interleaver = false;
    int I = 1;
    if (u.conv) {
        const ConvAllocation& c = *u.conv;
        I = c.I;
        r += kpu_cost(l.k, l.f, c.C) * c.n_kpu;
        if (l.kind == LayerKind::Conv) {
            if (needs_accumulation(l.d_in, lp.r_in))
                r += accumulator_cost(l.d_out, c.I, c.n_kpu);
            if (scope.include_bias)
                r += bias_cost(l.d_out, c.I);
        }
        if (c.rounded)
            r.registers += l.d_out;
        has_interleaver = true;
    } else if (u.pool) {
        r += ppu_cost(l.k, l.f, u.pool->C) * u.pool->n_ppu;
        if (u.pool->rounded)
            r.registers += l.d_out;
        has_interleaver = true;
    } else if (u.fcu) {
        const FcuAllocation& f = *u.fcu;
        r += fcu_cost(f.j, f.h, f.C, f.n_fcu);
        bool fed_by_own_depthwise = upstream && upstream->layer.kind == LayerKind::DepthwiseConv &&
                                    upstream->layer.group == l.group && l.kind == LayerKind::PointwiseConv;
        if (fed_by_own_depthwise)
            r.registers += l.d_in;
    } else if (l.kind == LayerKind::ResidualAdd) {
        r.adders += u.lanes;
    }
    if (has_interleaver) {
        ResourceVector il = interleaver_cost(l.d_in, I, lp.r_in, l.d_in);
        if (scope.include_interleaver)
            r.mux2 += il.mux2;
        if (scope.include_fifos && upstream && upstream->layer.s > 1)
            r.registers += il.registers;
    }
    r.weights = l.weight_count();
    return r;
}

CostReport network_cost(const ArchitecturePlan& plan, const CostScope& scope) {
    CostReport rep;
    const LayerPlan* up = nullptr;
    for (const auto& lp : plan.layers) {
        LayerCostRow row{&lp, layer_cost(lp, up, scope)};
        rep.total += row.res;
        rep.n_kpu += lp.n_kpu();
        rep.n_fcu += lp.n_fcu();
        rep.n_ppu += lp.n_ppu();
        rep.rows.push_back(row);
        up = &lp;
    }
    return rep;
}

ReferenceCost fully_parallel_reference_cost(const NetworkSpec& spec) {
    ReferenceCost out;
    out.plan = plan_fully_parallel(spec);
    out.report = network_cost(out.plan, CostScope::full());
    return out;
}

std::vector<SweepRow> sweep_rates(const std::vector<LayerSpec>& block, const std::vector<Rate>& rates,
                                  const PlanOptions& options) {
    std::vector<SweepRow> out;
    if (block.empty())
        throw ConfigurationError("sweep needs at least one layer");
    for (const auto& l : block)
        if (l.kind == LayerKind::ResidualAdd)
            throw ConfigurationError("residual layers cannot be swept in isolation");
    NetworkSpec spec;
    spec.input = {block.front().f, block.front().f, block.front().d_in};
    spec.layers = block;
    for (Rate r : rates) {
        spec.input_rate = r;
        ArchitecturePlan plan = plan_network(spec, options);
        CostReport rep = network_cost(plan, CostScope::core());
        SweepRow row;
        row.rate = r;
        row.res = rep.total;
        row.n_kpu = rep.n_kpu;
        row.n_fcu = rep.n_fcu;
        row.n_ppu = rep.n_ppu;
        for (const auto& lp : plan.layers)
            row.stalled = row.stalled || lp.flow == Flow::Stalled;
        out.push_back(row);
    }
    return out;
}

} // namespace cflow
