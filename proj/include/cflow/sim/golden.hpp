#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace cflow::sim {

// A traced value with its symbolic name ("z_{5,2}", "x_3"); empty label means invalid.
struct Cell {
    std::string label;
    std::int64_t value = 0;

    bool valid() const { return !label.empty(); }
};

struct KpuTraceRow {
    std::int64_t t = 0;
    Cell x;
    // Gate tuple for data positions, empty for padding positions.
    std::vector<int> pad;
    std::vector<Cell> taps;
    Cell y;
};

struct KpuTrace {
    int f = 0;
    int k = 0;
    int p = 0;
    std::vector<int> tap_indices;
    std::vector<std::string> tap_names;
    std::vector<KpuTraceRow> rows;
};

// Default tap set: a11, a13, a21, a23, a31 for k = 3.
std::vector<int> default_taps(int k);

// Single KPU (stride 1, C = 1) fed a stream of images, each preceded by p*f + p
// zero positions; trailing zeros flush the last image. `cycles` = 0 runs until
// the last output.
KpuTrace trace_kpu(int f, int k, int p, const std::vector<std::int64_t>& weights,
                   const std::vector<std::int64_t>& image, std::int64_t cycles = 0, std::vector<int> taps = {});

struct FcuTraceRow {
    std::int64_t t = 0;
    // Input register contents: one entry per slot, empty label while unfilled.
    std::vector<Cell> x;
    // Index of the first input held, when a batch is loaded.
    std::optional<std::int64_t> n;
    // Weight configuration used this cycle.
    std::optional<std::int64_t> config;
    Cell q;
    Cell y;
};

struct FcuTrace {
    std::int64_t h = 0;
    std::int64_t j = 0;
    std::int64_t d_in = 0;
    std::int64_t a = 1;
    std::vector<FcuTraceRow> rows;
    std::optional<std::int64_t> first_valid_cycle() const;
};

// a = 1: batches of j inputs are presented in parallel every h cycles.
// a > 1: inputs arrive one per cycle into an a-deep aggregator (a = j) whose
// contents are loaded into the FCU once a full batch is registered.
// weights: [neuron][input], h neurons by d_in inputs.
FcuTrace trace_fcu(std::int64_t h, std::int64_t j, std::int64_t d_in, std::int64_t a,
                   const std::vector<std::int64_t>& weights, const std::vector<std::int64_t>& inputs);

std::string render_kpu_trace(const KpuTrace& trace, bool with_values = false);
std::string render_fcu_trace(const FcuTrace& trace, bool with_values = false);

} // namespace cflow::sim
