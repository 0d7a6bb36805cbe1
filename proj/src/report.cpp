#include "cflow/report.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <stdexcept>

namespace cflow {

using nlohmann::json;

Format format_from_string(std::string_view name) {
    if (name == "text")
        return Format::Text;
    if (name == "json")
        return Format::Json;
    if (name == "csv")
        return Format::Csv;
    throw std::invalid_argument(fmt::format("unknown format '{}'", name));
}

namespace {

std::string plain(const json& v) {
    if (v.is_string())
        return v.get<std::string>();
    if (v.is_null())
        return "-";
    return v.dump();
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos)
        return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"')
            out += '"';
        out += c;
    }
    return out + "\"";
}

} // namespace

std::string Table::render(Format format) const {
    std::string out;
    switch (format) {
    case Format::Json: {
        json doc = json::object();
        doc["title"] = title;
        json arr = json::array();
        for (const auto& r : rows) {
            json o = json::object();
            for (std::size_t i = 0; i < header.size() && i < r.size(); ++i)
                o[header[i]] = r[i];
            arr.push_back(std::move(o));
        }
        doc["rows"] = std::move(arr);
        doc["notes"] = notes;
        return doc.dump(2) + "\n";
    }
    case Format::Csv: {
        for (std::size_t i = 0; i < header.size(); ++i)
            out += (i ? "," : "") + csv_field(header[i]);
        out += "\n";
        for (const auto& r : rows) {
            for (std::size_t i = 0; i < r.size(); ++i)
                out += (i ? "," : "") + csv_field(plain(r[i]));
            out += "\n";
        }
        return out;
    }
    case Format::Text:
        break;
    }
    std::vector<std::size_t> width(header.size());
    for (std::size_t i = 0; i < header.size(); ++i)
        width[i] = header[i].size();
    for (const auto& r : rows)
        for (std::size_t i = 0; i < r.size() && i < width.size(); ++i)
            width[i] = std::max(width[i], plain(r[i]).size());
    auto line = [&](auto cell) {
        std::string s;
        for (std::size_t i = 0; i < width.size(); ++i) {
            std::string c = cell(i);
            if (i == 0)
                s += fmt::format("{:<{}}", c, width[i]);
            else
                s += fmt::format("  {:>{}}", c, width[i]);
        }
        while (!s.empty() && s.back() == ' ')
            s.pop_back();
        return s + "\n";
    };
    if (!title.empty())
        out += title + "\n";
    out += line([&](std::size_t i) { return header[i]; });
    std::size_t total = 0;
    for (auto w : width)
        total += w + 2;
    out += std::string(total > 2 ? total - 2 : 0, '-') + "\n";
    for (const auto& r : rows)
        out += line([&](std::size_t i) { return i < r.size() ? plain(r[i]) : std::string(); });
    for (const auto& n : notes)
        out += n + "\n";
    return out;
}

std::string format_count(std::int64_t n) {
    std::int64_t a = n < 0 ? -n : n;
    std::string sign = n < 0 ? "-" : "";
    if (a < 1000)
        return fmt::format("{}{}", sign, a);
    bool mega = a >= 1000000;
    const char* suffix = mega ? "M" : "k";
    // Tenths of the unit, rounded half up.
    std::int64_t unit = mega ? 100000 : 100;
    std::int64_t tenths = (a + unit / 2) / unit;
    if (tenths >= 1000)
        return fmt::format("{}{}{}", sign, (tenths + 5) / 10, suffix);
    return fmt::format("{}{}.{}{}", sign, tenths / 10, tenths % 10, suffix);
}

namespace {

json rate_cell(Rate r) { return r.is_integer() ? json(r.num()) : json(r.str()); }

} // namespace

Table analyze_table(const ArchitecturePlan& plan) {
    Table t;
    t.title = fmt::format("{}: input {}x{}x{}, r0 = {}", plan.spec.name.empty() ? "network" : plan.spec.name,
                          plan.spec.input.height, plan.spec.input.width, plan.spec.input.channels,
                          plan.spec.input_rate.str());
    t.header = {"layer", "kind", "f", "k", "s", "p", "d_in", "d_out", "C", "r_in", "r_out", "r_out~", "flow", "util",
                "KPU", "FCU", "PPU"};
    for (const auto& lp : plan.layers) {
        const LayerSpec& l = lp.layer;
        t.rows.push_back({l.name, std::string(to_string(l.kind)), l.f, l.k, l.s, l.p, l.d_in, l.d_out, lp.C(),
                          rate_cell(lp.r_in), rate_cell(lp.r_out), lp.r_out.display(), std::string(to_string(lp.flow)),
                          rate_cell(lp.utilization), lp.n_kpu(), lp.n_fcu(), lp.n_ppu()});
    }
    t.rows.push_back({"Sum", "", "", "", "", "", "", "", "", "", "", "", "", "", plan.total_kpu(), plan.total_fcu(),
                      plan.total_ppu()});
    for (const auto& w : plan.warnings())
        t.notes.push_back("warning: " + w);
    return t;
}

Table plan_table(const ArchitecturePlan& plan) {
    Table t;
    t.title = fmt::format("{}: {} cycles per inference (source {})", plan.spec.name.empty() ? "network" : plan.spec.name,
                          plan.cycles_per_inference, plan.source_cycles);
    t.header = {"layer", "r_in", "units", "C", "I", "j", "h", "a", "lanes", "in_bits", "acc_bits", "out_bits", "busy"};
    for (const auto& lp : plan.layers) {
        const UnitAllocation& u = lp.units;
        std::string units = "-";
        json I = nullptr, j = nullptr, h = nullptr, a = nullptr;
        if (u.conv) {
            units = fmt::format("{} KPU", u.conv->n_kpu);
            I = u.conv->I;
        } else if (u.pool) {
            units = fmt::format("{} PPU", u.pool->n_ppu);
        } else if (u.fcu) {
            units = fmt::format("{} FCU", u.fcu->n_fcu);
            j = u.fcu->j;
            h = u.fcu->h;
            a = u.fcu->a;
        } else {
            units = fmt::format("{} add", u.lanes);
        }
        t.rows.push_back({lp.layer.name, rate_cell(lp.r_in), units, lp.C(), I, j, h, a, u.lanes, lp.widths.input_bits,
                          lp.widths.accumulator_bits, lp.widths.output_bits, lp.busy_cycles});
    }
    for (const auto& w : plan.warnings())
        t.notes.push_back("warning: " + w);
    return t;
}

Table cost_table(const CostReport& report, std::string_view scope, bool rounded) {
    Table t;
    t.title = fmt::format("resources (scope {})", scope);
    t.header = {"layer", "weights", "add", "mul", "reg", "mux2", "max", "KPU", "FCU", "PPU"};
    for (const auto& row : report.rows) {
        const ResourceVector& r = row.res;
        const LayerPlan& lp = *row.plan;
        t.rows.push_back({lp.layer.name, r.weights, r.adders, r.multipliers, r.registers, r.mux2, r.max_units,
                          lp.n_kpu(), lp.n_fcu(), lp.n_ppu()});
    }
    const ResourceVector& s = report.total;
    t.rows.push_back({"Sum", s.weights, s.adders, s.multipliers, s.registers, s.mux2, s.max_units, report.n_kpu,
                      report.n_fcu, report.n_ppu});
    if (rounded)
        t.rows.push_back({"Sum~", format_count(s.weights), format_count(s.adders), format_count(s.multipliers),
                          format_count(s.registers), format_count(s.mux2), format_count(s.max_units),
                          format_count(report.n_kpu), format_count(report.n_fcu), format_count(report.n_ppu)});
    return t;
}

Table sweep_table(const std::vector<SweepRow>& rows) {
    Table t;
    t.title = "resources by input rate (* = stalled)";
    bool any_fcu = std::any_of(rows.begin(), rows.end(), [](const SweepRow& r) { return r.n_fcu > 0; });
    t.header = {"r_in", "add", "mul", "reg", "mux2", "KPUs"};
    if (any_fcu)
        t.header.push_back("FCUs");
    for (const auto& r : rows) {
        std::vector<json> cells{r.rate.str() + (r.stalled ? "*" : ""), r.res.adders, r.res.multipliers,
                                r.res.registers, r.res.mux2, r.n_kpu};
        if (any_fcu)
            cells.push_back(r.n_fcu);
        t.rows.push_back(std::move(cells));
    }
    return t;
}

Table sim_stats_table(const sim::SimStats& stats, const ArchitecturePlan& plan) {
    Table t;
    t.title = fmt::format("{} cycles, {} per inference, first output at {}", stats.cycles, stats.cycles_per_inference,
                          stats.first_output_latency);
    t.header = {"layer", "steps", "outputs", "util", "planned", "fifo_peak", "first_out"};
    for (std::size_t i = 0; i < stats.layers.size(); ++i) {
        const auto& l = stats.layers[i];
        json planned = i < plan.layers.size() ? rate_cell(plan.layers[i].utilization) : json(nullptr);
        t.rows.push_back({l.name, l.steps, l.tokens_out, rate_cell(l.utilization), planned, l.fifo_high_water,
                          l.first_output_cycle});
        if (!l.note.empty())
            t.notes.push_back(fmt::format("{}: {}", l.name, l.note));
    }
    return t;
}

} // namespace cflow
