#include "cflow/sim/trace.hpp"

#include <fmt/format.h>
#include <json.hpp>

#include <algorithm>
#include <map>
#include <utility>

namespace cflow::sim {

CycleTrace::CycleTrace(std::vector<std::string> patterns) : patterns_(std::move(patterns)) {}

bool CycleTrace::wants(const std::string& signal) const {
    for (const auto& p : patterns_) {
        if (p == signal || p == "*")
            return true;
        if (!p.empty() && p.back() == '*' && signal.compare(0, p.size() - 1, p, 0, p.size() - 1) == 0)
            return true;
        auto dot = signal.rfind('.');
        if (dot != std::string::npos && signal.compare(dot + 1, std::string::npos, p) == 0)
            return true;
    }
    return false;
}

void CycleTrace::record(TraceEvent ev) { events_.push_back(std::move(ev)); }

std::string format_value(const TraceEvent& ev) {
    if (!ev.valid)
        return "-";
    if (ev.tuple_bits > 0) {
        std::string s = "(";
        for (int i = 0; i < ev.tuple_bits; ++i)
            s += fmt::format("{}{}", i ? "," : "", (ev.value >> i) & 1);
        return s + ")";
    }
    return std::to_string(ev.value);
}

std::string CycleTrace::to_columns() const {
    std::vector<std::pair<std::string, int>> columns;
    std::map<std::int64_t, std::map<std::pair<std::string, int>, std::string>> rows;
    for (const auto& ev : events_) {
        auto key = std::make_pair(ev.signal, ev.channel);
        if (std::find(columns.begin(), columns.end(), key) == columns.end())
            columns.push_back(key);
        rows[ev.cycle][key] = format_value(ev);
    }
    std::vector<std::string> heads{"t"};
    for (const auto& [sig, ch] : columns)
        heads.push_back(ch < 0 ? sig : fmt::format("{}[{}]", sig, ch));
    std::vector<std::size_t> widths;
    for (const auto& h : heads)
        widths.push_back(h.size());
    std::vector<std::vector<std::string>> cells;
    for (const auto& [cycle, row] : rows) {
        std::vector<std::string> line{std::to_string(cycle)};
        for (const auto& key : columns) {
            auto it = row.find(key);
            line.push_back(it == row.end() ? "-" : it->second);
        }
        for (std::size_t i = 0; i < line.size(); ++i)
            widths[i] = std::max(widths[i], line[i].size());
        cells.push_back(std::move(line));
    }
    std::string out;
    auto emit = [&](const std::vector<std::string>& line) {
        for (std::size_t i = 0; i < line.size(); ++i)
            out += fmt::format("{}{:>{}}", i ? "  " : "", line[i], widths[i]);
        out += "\n";
    };
    emit(heads);
    for (const auto& line : cells)
        emit(line);
    return out;
}

std::string CycleTrace::to_event_log() const {
    std::string out;
    for (const auto& ev : events_) {
        nlohmann::json j = {{"cycle", ev.cycle}, {"signal", ev.signal}, {"channel", ev.channel},
                            {"value", ev.value}, {"valid", ev.valid}};
        out += j.dump() + "\n";
    }
    return out;
}

} // namespace cflow::sim
