#pragma once

#include "cflow/cost.hpp"
#include "cflow/plan.hpp"
#include "cflow/sim/network.hpp"

#include <json.hpp>

#include <string>
#include <vector>

namespace cflow {

enum class Format { Text, Json, Csv };

Format format_from_string(std::string_view name);

// Rows of JSON scalars; text output aligns columns, JSON emits one object per row.
struct Table {
    std::string title;
    std::vector<std::string> header;
    std::vector<std::vector<nlohmann::json>> rows;
    std::vector<std::string> notes;

    std::string render(Format format) const;
};

// Compact count with one significant decimal below 100k: 6680 -> "6.7k", 151000 -> "151k".
std::string format_count(std::int64_t n);

Table analyze_table(const ArchitecturePlan& plan);
Table plan_table(const ArchitecturePlan& plan);
// Per-layer resources plus a "Sum" row; `rounded` adds a compact-count row.
Table cost_table(const CostReport& report, std::string_view scope, bool rounded = true);
Table sweep_table(const std::vector<SweepRow>& rows);
Table sim_stats_table(const sim::SimStats& stats, const ArchitecturePlan& plan);

} // namespace cflow
