#include "cflow/cost.hpp"
#include "cflow/errors.hpp"
#include "cflow/io.hpp"
#include "cflow/oracle.hpp"
#include "cflow/report.hpp"
#include "cflow/sim/golden.hpp"
#include "cflow/sim/network.hpp"

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace cflow;

namespace {

NetworkSpec parse_spec(const std::string& text, const std::string& rate) {
    NetworkSpec spec = parse_network(text);
    if (!rate.empty())
        spec.input_rate = Rate::parse(rate);
    return spec;
}

PlanOptions options(int min_h, bool aggregated) {
    PlanOptions o;
    o.min_h = min_h;
    o.pointwise = aggregated ? PointwiseSizing::Aggregated : PointwiseSizing::General;
    return o;
}

// Nested [row][col][channel] lists.
py::list to_lists(const Tensor3& t) {
    py::list rows;
    for (int r = 0; r < t.height; ++r) {
        py::list cols;
        for (int c = 0; c < t.width; ++c) {
            py::list ch;
            for (int k = 0; k < t.channels; ++k)
                ch.append(t.at(r, c, k));
            cols.append(ch);
        }
        rows.append(cols);
    }
    return rows;
}

std::string analyze(const std::string& spec, const std::string& rate, int min_h, bool aggregated) {
    return analyze_table(plan_network(parse_spec(spec, rate), options(min_h, aggregated))).render(Format::Json);
}

std::string plan(const std::string& spec, const std::string& rate, int min_h, bool aggregated) {
    return plan_to_json(plan_network(parse_spec(spec, rate), options(min_h, aggregated)));
}

std::string cost(const std::string& spec, const std::string& scope, const std::string& rate, int min_h, bool aggregated) {
    NetworkSpec s = parse_spec(spec, rate);
    ScopeName sn = scope_from_string(scope);
    if (sn == ScopeName::Parallel)
        return cost_table(fully_parallel_reference_cost(s).report, scope, false).render(Format::Json);
    CostScope cs = sn == ScopeName::Full ? CostScope::full() : CostScope::core();
    return cost_table(network_cost(plan_network(s, options(min_h, aggregated)), cs), scope, false).render(Format::Json);
}

std::string sweep(const std::string& spec, const std::vector<std::string>& rates, const std::string& group) {
    NetworkSpec s = parse_network(spec);
    std::vector<LayerSpec> block;
    for (const auto& l : s.layers)
        if (group.empty() ? l.group == s.layers.front().group : l.group == group)
            block.push_back(l);
    if (block.empty())
        throw ValidationError("no layer named '" + group + "'");
    std::vector<Rate> rs;
    for (const auto& r : rates)
        rs.push_back(Rate::parse(r));
    return sweep_table(sweep_rates(block, rs)).render(Format::Json);
}

py::dict simulate(const std::string& spec, std::uint64_t seed, int images, const std::string& rate,
                  const std::vector<std::string>& trace) {
    NetworkSpec s = parse_spec(spec, rate);
    ArchitecturePlan p = plan_network(s);
    NetworkWeights w = gen_random_weights(s, seed);
    std::vector<Tensor3> xs;
    for (int i = 0; i < images; ++i)
        xs.push_back(gen_random_input(s, seed + 1 + static_cast<std::uint64_t>(i)));
    sim::SimOptions so;
    so.trace_signals = trace;
    sim::SimResult r;
    {
        py::gil_scoped_release release;
        r = sim::simulate_network(p, w, xs, so);
    }
    py::list outputs, reference, layers;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        outputs.append(to_lists(r.outputs[i]));
        reference.append(to_lists(ref_network(s, w, xs[i])));
    }
    auto util = sim::measure_utilization(r, p);
    for (std::size_t i = 0; i < r.stats.layers.size(); ++i) {
        const auto& l = r.stats.layers[i];
        py::dict d;
        d["name"] = l.name;
        d["steps"] = l.steps;
        d["tokens_per_image"] = l.tokens_per_image;
        d["utilization"] = util[i].str();
        d["planned_utilization"] = p.layers[i].utilization.str();
        d["fifo_high_water"] = l.fifo_high_water;
        d["first_output_cycle"] = l.first_output_cycle;
        layers.append(d);
    }
    py::dict out;
    out["outputs"] = outputs;
    out["reference"] = reference;
    out["cycles"] = r.stats.cycles;
    out["cycles_per_inference"] = r.stats.cycles_per_inference;
    out["image_done_cycle"] = r.stats.image_done_cycle;
    out["layers"] = layers;
    out["trace"] = r.trace.to_event_log();
    return out;
}

std::string trace_kpu(int f, int k, int p, const std::vector<std::int64_t>& weights, const std::vector<std::int64_t>& image,
                      bool values) {
    return sim::render_kpu_trace(sim::trace_kpu(f, k, p, weights, image), values);
}

std::string trace_fcu(std::int64_t h, std::int64_t j, std::int64_t d_in, std::int64_t a,
                      const std::vector<std::int64_t>& weights, const std::vector<std::int64_t>& inputs, bool values) {
    return sim::render_fcu_trace(sim::trace_fcu(h, j, d_in, a, weights, inputs), values);
}

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "cflow planner, cost model and simulator";

    py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
    py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
    py::register_exception<AllocationError>(m, "AllocationError", PyExc_ValueError);
    py::register_exception<ConfigurationError>(m, "ConfigurationError", PyExc_ValueError);
    py::register_exception<OverflowError>(m, "OverflowError", PyExc_ArithmeticError);

    m.def("analyze", &analyze, py::arg("spec"), py::arg("rate") = "", py::arg("min_h") = 1, py::arg("aggregated") = false);
    m.def("plan", &plan, py::arg("spec"), py::arg("rate") = "", py::arg("min_h") = 1, py::arg("aggregated") = false);
    m.def("cost", &cost, py::arg("spec"), py::arg("scope") = "full", py::arg("rate") = "", py::arg("min_h") = 1,
          py::arg("aggregated") = false);
    m.def("sweep", &sweep, py::arg("spec"), py::arg("rates"), py::arg("group") = "");
    m.def("simulate", &simulate, py::arg("spec"), py::arg("seed") = 0, py::arg("images") = 1, py::arg("rate") = "",
          py::arg("trace") = std::vector<std::string>{});
    m.def("trace_kpu", &trace_kpu, py::arg("f"), py::arg("k"), py::arg("p"), py::arg("weights"), py::arg("image"),
          py::arg("values") = false);
    m.def("trace_fcu", &trace_fcu, py::arg("h"), py::arg("j"), py::arg("d_in"), py::arg("a"), py::arg("weights"),
          py::arg("inputs"), py::arg("values") = false);
    m.def("format_count", &format_count);
}
