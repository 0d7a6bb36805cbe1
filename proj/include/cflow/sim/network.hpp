#pragma once

#include "cflow/plan.hpp"
#include "cflow/sim/trace.hpp"
#include "cflow/tensor.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace cflow::sim {

struct SimOptions {
    // Signal patterns to record, see CycleTrace.
    std::vector<std::string> trace_signals;
    // Test hook: ignore implicit-padding gates.
    bool disable_pad_gates = false;
    // 0 picks a bound from the plan; exceeding it reports a deadlock.
    std::int64_t max_cycles = 0;
};

struct LayerStats {
    std::string name;
    std::int64_t steps = 0;
    std::int64_t tokens_out = 0;
    std::vector<std::int64_t> tokens_per_image;
    // Steady-state fraction of cycles with a unit step, over the last image.
    Rate utilization{1};
    // Largest number of values waiting at the layer inputs.
    std::int64_t fifo_high_water = 0;
    std::int64_t first_output_cycle = -1;
    // Steps per stream position actually used (S*I for sliding layers).
    std::int64_t steps_per_position = 0;
    std::string note;
};

struct SimStats {
    std::int64_t cycles = 0;
    // Spacing of image starts at the source.
    std::int64_t cycles_per_inference = 0;
    std::int64_t first_output_latency = -1;
    std::vector<std::int64_t> image_done_cycle;
    std::vector<LayerStats> layers;
};

struct SimResult {
    std::vector<Tensor3> outputs;
    CycleTrace trace;
    SimStats stats;
};

SimResult simulate_network(const ArchitecturePlan& plan, const NetworkWeights& weights,
                           const std::vector<Tensor3>& images, const SimOptions& options = {});

std::vector<Rate> measure_utilization(const SimResult& result, const ArchitecturePlan& plan);

} // namespace cflow::sim
