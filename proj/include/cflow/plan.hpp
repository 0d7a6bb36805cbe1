#pragma once

#include "cflow/alloc.hpp"
#include "cflow/netspec.hpp"
#include "cflow/rate.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace cflow {

struct LayerPlan {
    LayerSpec layer;
    Rate r_in;
    Rate r_out;
    Flow flow = Flow::Continuous;
    Rate utilization{1};
    UnitAllocation units;
    LayerWidths widths;
    // Unit-busy cycles needed for one image.
    std::int64_t busy_cycles = 0;
    // Zero positions injected between images (vertical padding).
    std::int64_t pad_positions = 0;

    int n_kpu() const { return units.n_kpu(); }
    int n_ppu() const { return units.n_ppu(); }
    int n_fcu() const { return units.n_fcu(); }
    std::int64_t C() const { return units.C; }
    // Physical output streams of the layer.
    int streams_out() const;
};

struct ArchitecturePlan {
    NetworkSpec spec;
    PlanOptions options;
    std::vector<LayerPlan> layers;
    // ceil(f0^2 * d0 / r0)
    std::int64_t source_cycles = 0;
    // max(source_cycles, busiest layer)
    std::int64_t cycles_per_inference = 0;

    int total_kpu() const;
    int total_ppu() const;
    int total_fcu() const;
    std::vector<std::string> warnings() const;
};

ArchitecturePlan plan_network(const NetworkSpec& spec, const std::vector<LayerRateInfo>& rates,
                              const PlanOptions& options = {});
ArchitecturePlan plan_network(const NetworkSpec& spec, const PlanOptions& options = {});

// Every layer planned at r_in = d_in (one unit per neuron, C = 1).
ArchitecturePlan plan_fully_parallel(const NetworkSpec& spec);

std::vector<LayerWidths> worst_case_widths(const ArchitecturePlan& plan, const QuantFormat& quant);

std::string plan_to_json(const ArchitecturePlan& plan);

} // namespace cflow
