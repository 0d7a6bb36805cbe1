#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace cflow::sim {

struct TraceEvent {
    std::int64_t cycle = 0;
    std::string signal;
    // Channel or lane; -1 when the signal is scalar.
    int channel = -1;
    std::int64_t value = 0;
    bool valid = true;
    // Non-zero for pad tuples: value is a bit mask of this many gates.
    int tuple_bits = 0;

    bool operator==(const TraceEvent&) const = default;
};

class CycleTrace {
public:
    CycleTrace() = default;
    // Patterns: exact signal name, its last dotted component ("y" matches "C1.y"),
    // or a prefix ending in '*'. Empty means record nothing.
    explicit CycleTrace(std::vector<std::string> patterns);

    bool wants(const std::string& signal) const;
    void record(TraceEvent ev);
    bool enabled() const { return !patterns_.empty(); }

    const std::vector<TraceEvent>& events() const { return events_; }

    // One row per cycle with any event, one column per (signal, channel); "-" when absent.
    std::string to_columns() const;
    // One JSON object per line: {cycle, signal, channel, value, valid}.
    std::string to_event_log() const;

private:
    std::vector<std::string> patterns_;
    std::vector<TraceEvent> events_;
};

std::string format_value(const TraceEvent& ev);

} // namespace cflow::sim
