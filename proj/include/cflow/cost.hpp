#pragma once

#include "cflow/plan.hpp"

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace cflow {

struct ResourceVector {
    std::int64_t adders = 0;
    std::int64_t multipliers = 0;
    std::int64_t registers = 0;
    std::int64_t mux2 = 0;
    std::int64_t max_units = 0;
    std::int64_t weights = 0;

    ResourceVector& operator+=(const ResourceVector& o);
    friend ResourceVector operator+(ResourceVector a, const ResourceVector& b) { return a += b; }
    friend ResourceVector operator*(ResourceVector a, std::int64_t n);
    bool operator==(const ResourceVector&) const = default;
};

struct CostScope {
    bool include_bias = true;
    bool include_interleaver = true;
    bool include_fifos = true;

    // Running-example table conventions: everything priced.
    static CostScope full() { return {true, true, true}; }
    // Rate-sweep conventions: no bias, interleaving or FIFOs.
    static CostScope core() { return {false, false, false}; }
};

enum class ScopeName { Full, Core, Parallel };

ScopeName scope_from_string(std::string_view name);
std::string_view to_string(ScopeName scope);

ResourceVector kpu_cost(int k, int f, std::int64_t C);
// False only for single-channel input at one feature per cycle.
bool needs_accumulation(int d_in, Rate r_in);
ResourceVector accumulator_cost(int d_out, int I, int n_kpu);
ResourceVector bias_cost(int d_out, int I);
ResourceVector interleaver_cost(int d_in, int I, Rate r_in, int d_out);
ResourceVector ppu_cost(int k, int f, std::int64_t C);
ResourceVector fcu_cost(std::int64_t j, std::int64_t h, std::int64_t C, int n_fcu);

// `upstream` is the producing layer, or null for the network input.
ResourceVector layer_cost(const LayerPlan& layer, const LayerPlan* upstream, const CostScope& scope);

struct LayerCostRow {
    const LayerPlan* plan = nullptr;
    ResourceVector res;
};

struct CostReport {
    std::vector<LayerCostRow> rows;
    ResourceVector total;
    int n_kpu = 0;
    int n_fcu = 0;
    int n_ppu = 0;
};

CostReport network_cost(const ArchitecturePlan& plan, const CostScope& scope);

struct ReferenceCost {
    ArchitecturePlan plan;
    CostReport report;
};

// Rows of `report` point into `plan`, so both are returned together.
ReferenceCost fully_parallel_reference_cost(const NetworkSpec& spec);

struct SweepRow {
    Rate rate;
    ResourceVector res;
    int n_kpu = 0;
    int n_fcu = 0;
    int n_ppu = 0;
    bool stalled = false;
};

// Prices `block` (one layer, or a lowered depthwise/pointwise pair) at each input rate.
std::vector<SweepRow> sweep_rates(const std::vector<LayerSpec>& block, const std::vector<Rate>& rates,
                                  const PlanOptions& options = {});

} // namespace cflow
