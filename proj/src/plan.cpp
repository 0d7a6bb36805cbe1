#include "cflow/plan.hpp"

#include "cflow/errors.hpp"

#include <fmt/format.h>
#include <json.hpp>

#include <algorithm>

namespace cflow {

using nlohmann::json;

int LayerPlan::streams_out() const {
    if (units.conv)
        return units.conv->n_streams_out;
    if (units.pool)
        return units.pool->n_ppu;
    if (units.fcu)
        return units.fcu->n_fcu;
    return units.lanes;
}

int ArchitecturePlan::total_kpu() const {
    int n = 0;
    for (const auto& l : layers)
        n += l.n_kpu();
    return n;
}

int ArchitecturePlan::total_ppu() const {
    int n = 0;
    for (const auto& l : layers)
        n += l.n_ppu();
    return n;
}

int ArchitecturePlan::total_fcu() const {
    int n = 0;
    for (const auto& l : layers)
        n += l.n_fcu();
    return n;
}

std::vector<std::string> ArchitecturePlan::warnings() const {
    std::vector<std::string> out;
    for (const auto& l : layers)
        for (const auto& w : l.units.warnings)
            out.push_back(fmt::format("{}: {}", l.layer.name, w));
    return out;
}

namespace {

std::int64_t busy_cycles(const LayerSpec& l, const UnitAllocation& u, std::int64_t pad_positions) {
    std::int64_t f2 = std::int64_t{l.f} * l.f;
    switch (l.kind) {
    case LayerKind::FullyConnected:
        return u.C;
    case LayerKind::PointwiseConv:
    case LayerKind::ResidualAdd:
        return u.C * f2;
    default:
        return u.C * (f2 + pad_positions);
    }
}

ArchitecturePlan assemble(const NetworkSpec& spec, const std::vector<Rate>& r_ins, const PlanOptions& options,
                          bool check_chain) {
    ArchitecturePlan plan;
    plan.spec = spec;
    plan.options = options;
    int in_bits = input_bits(spec.quant);
    for (std::size_t i = 0; i < spec.layers.size(); ++i) {
        const LayerSpec& l = spec.layers[i];
        LayerPlan lp;
        lp.layer = l;
        lp.r_in = r_ins[i];
        lp.r_out = output_rate(l.d_in, l.d_out, lp.r_in, l.s);
        lp.units = allocate_layer(l, lp.r_in, options);
        lp.utilization = utilization(lp.r_in, lp.units.C, l.flat_in());
        lp.flow = flow_of(lp.utilization, lp.units.C);
        lp.widths = layer_widths(l, in_bits, spec.quant);
        in_bits = lp.widths.output_bits;
        lp.pad_positions = l.is_sliding() ? std::int64_t{l.p} * l.f + l.p : 0;
        lp.busy_cycles = busy_cycles(l, lp.units, lp.pad_positions);
        if (lp.flow == Flow::Stalled && l.is_fcu())
            lp.units.warnings.push_back(fmt::format("stall: FCUs idle, utilization {}", lp.utilization.str()));

        if (check_chain && i > 0) {
            const LayerPlan& up = plan.layers.back();
            if (l.kind != LayerKind::ResidualAdd && up.r_out != lp.r_in)
                throw std::logic_error(fmt::format("internal error: rate mismatch between {} and {}", up.layer.name, l.name));
            if (!l.is_fcu() && up.streams_out() < std::min<std::int64_t>(lp.units.lanes, up.r_out.ceil()))
                throw std::logic_error(fmt::format("internal error: {} provides {} streams, {} needs {}", up.layer.name,
                                                   up.streams_out(), l.name, lp.units.lanes));
        }
        plan.layers.push_back(std::move(lp));
    }
    std::int64_t features = std::int64_t{spec.input.height} * spec.input.width * spec.input.channels;
    plan.source_cycles = ceil_div(features * spec.input_rate.den(), spec.input_rate.num());
    plan.cycles_per_inference = plan.source_cycles;
    for (const auto& lp : plan.layers)
        plan.cycles_per_inference = std::max(plan.cycles_per_inference, lp.busy_cycles);
    return plan;
}

} // namespace

ArchitecturePlan plan_network(const NetworkSpec& spec, const std::vector<LayerRateInfo>& rates,
                              const PlanOptions& options) {
    if (rates.size() != spec.layers.size())
        throw ConfigurationError(fmt::format("{} rates for {} layers", rates.size(), spec.layers.size()));
    std::vector<Rate> r_ins;
    for (const auto& r : rates)
        r_ins.push_back(r.r_in);
    return assemble(spec, r_ins, options, true);
}

ArchitecturePlan plan_network(const NetworkSpec& spec, const PlanOptions& options) {
    return plan_network(spec, propagate_rates(spec, options), options);
}

ArchitecturePlan plan_fully_parallel(const NetworkSpec& spec) {
    std::vector<Rate> r_ins;
    for (const auto& l : spec.layers)
        r_ins.emplace_back(l.flat_in());
    // Rates are forced per layer, so they do not chain.
    return assemble(spec, r_ins, {}, false);
}

std::vector<LayerWidths> worst_case_widths(const ArchitecturePlan& plan, const QuantFormat& quant) {
    std::vector<LayerWidths> out;
    int in_bits = input_bits(quant);
    for (const auto& lp : plan.layers) {
        out.push_back(layer_widths(lp.layer, in_bits, quant));
        in_bits = out.back().output_bits;
    }
    return out;
}

std::string plan_to_json(const ArchitecturePlan& plan) {
    json doc;
    doc["network"] = plan.spec.name;
    doc["input_rate"] = plan.spec.input_rate.str();
    doc["source_cycles"] = plan.source_cycles;
    doc["cycles_per_inference"] = plan.cycles_per_inference;
    doc["min_h"] = plan.options.min_h;
    doc["pointwise_sizing"] = plan.options.pointwise == PointwiseSizing::General ? "general" : "aggregated";
    json layers = json::array();
    for (const auto& lp : plan.layers) {
        json jl;
        jl["name"] = lp.layer.name;
        jl["kind"] = lp.layer.constant_weights ? std::string("avgpool") : std::string(to_string(lp.layer.kind));
        jl["r_in"] = lp.r_in.str();
        jl["r_out"] = lp.r_out.str();
        jl["flow"] = to_string(lp.flow);
        jl["utilization"] = lp.utilization.str();
        jl["C"] = lp.units.C;
        jl["lanes"] = lp.units.lanes;
        if (const auto& c = lp.units.conv) {
            jl["kpu"] = {{"n_kpu", c->n_kpu}, {"I", c->I}, {"n_streams_out", c->n_streams_out},
                         {"accumulators", c->accumulators}, {"has_bias", c->has_bias},
                         {"capped", c->capped}, {"rounded", c->rounded}};
        }
        if (const auto& p = lp.units.pool)
            jl["ppu"] = {{"n_ppu", p->n_ppu}, {"rounded", p->rounded}};
        if (const auto& f = lp.units.fcu)
            jl["fcu"] = {{"n_fcu", f->n_fcu}, {"j", f->j}, {"h", f->h}, {"a", f->a}, {"j_max", f->j_max}, {"h_max", f->h_max}};
        jl["widths"] = {{"input_bits", lp.widths.input_bits}, {"weight_bits", lp.widths.weight_bits},
                        {"terms", lp.widths.terms}, {"accumulator_bits", lp.widths.accumulator_bits},
                        {"output_bits", lp.widths.output_bits}};
        jl["busy_cycles"] = lp.busy_cycles;
        jl["warnings"] = lp.units.warnings;
        layers.push_back(std::move(jl));
    }
    doc["layers"] = std::move(layers);
    doc["totals"] = {{"kpu", plan.total_kpu()}, {"ppu", plan.total_ppu()}, {"fcu", plan.total_fcu()}};
    return doc.dump(2) + "\n";
}

} // namespace cflow
