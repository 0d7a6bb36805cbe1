#pragma once

#include "cflow/alloc.hpp"
#include "cflow/netspec.hpp"
#include "cflow/rational.hpp"

#include <string_view>
#include <vector>

namespace cflow {

enum class Flow { Continuous, RestoredByInterleaving, Stalled };

std::string_view to_string(Flow flow);

struct LayerRateInfo {
    Rate r_in;
    Rate r_out;
    Flow flow = Flow::Continuous;
    Rate utilization{1};
};

// (d_out * r_in) / (d_in * s^2)
Rate output_rate(int d_in, int d_out, Rate r_in, int s);

std::vector<LayerRateInfo> propagate_rates(const NetworkSpec& spec, const PlanOptions& options = {});

// min(1, r_in * C / work), work = values one unit input vector carries.
Rate utilization(Rate r_in, std::int64_t C, std::int64_t work);
Flow flow_of(Rate utilization, std::int64_t C);

LayerRateInfo classify_flow(const LayerSpec& layer, Rate r_in, const PlanOptions& options = {});

// n = r*f + c is a valid output iff r, c are in {0, s, 2s, ..} and <= f-k+2p.
bool output_valid(int n, int f, int k, int s, int p);
std::int64_t valid_output_count(int f, int k, int s, int p);

// Gate for kernel column group i at image column c.
int pad_select(int c, int i, int f, int k, int p);
std::vector<int> pad_tuple(int c, int f, int k, int p);

} // namespace cflow
