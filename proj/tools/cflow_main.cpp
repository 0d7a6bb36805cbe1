#include "cflow/cost.hpp"
#include "cflow/errors.hpp"
#include "cflow/io.hpp"
#include "cflow/oracle.hpp"
#include "cflow/report.hpp"
#include "cflow/sim/golden.hpp"
#include "cflow/sim/network.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>

#include <atomic>
#include <fstream>
#include <iostream>
#include <thread>

using namespace cflow;

namespace {

constexpr int kExitMismatch = 1;
constexpr int kExitInput = 2;

struct Common {
    std::string spec_path;
    std::string format = "text";
    int min_h = 1;
    std::string pointwise = "general";
    std::string rate;
};

void add_common(CLI::App* cmd, Common& c) {
    cmd->add_option("spec", c.spec_path, "network document")->required();
    cmd->add_option("--format", c.format, "text, json or csv")->check(CLI::IsMember({"text", "json", "csv"}));
    cmd->add_option("--min-h", c.min_h, "smallest FCU neuron count (adder pipeline depth)")->check(CLI::PositiveNumber);
    cmd->add_option("--pointwise", c.pointwise, "pointwise FCU sizing: general or aggregated")
        ->check(CLI::IsMember({"general", "aggregated"}));
    cmd->add_option("--rate", c.rate, "override the input rate, e.g. 1/2");
}

NetworkSpec load_spec(const Common& c) {
    NetworkSpec spec = load_network(c.spec_path);
    if (!c.rate.empty()) {
        spec.input_rate = Rate::parse(c.rate);
        if (spec.input_rate.is_zero())
            throw ValidationError("input rate must be positive");
    }
    return spec;
}

PlanOptions plan_options(const Common& c) {
    PlanOptions o;
    o.min_h = c.min_h;
    o.pointwise = c.pointwise == "aggregated" ? PointwiseSizing::Aggregated : PointwiseSizing::General;
    return o;
}

std::vector<Rate> parse_rates(const std::string& text) {
    std::vector<Rate> out;
    std::size_t start = 0;
    while (start <= text.size()) {
        std::size_t end = text.find(',', start);
        if (end == std::string::npos)
            end = text.size();
        std::string item = text.substr(start, end - start);
        if (!item.empty())
            out.push_back(Rate::parse(item));
        start = end + 1;
    }
    return out;
}

Tensor3 load_input(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    char magic[4] = {};
    in.read(magic, 4);
    if (in && std::string(magic, 4) == "CFT3")
        return read_fixture(path);
    return load_tensor(path);
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::runtime_error(fmt::format("cannot write '{}'", path));
    out << text;
}

struct CompareOutcome {
    bool match = false;
    std::int64_t mismatches = 0;
    std::string error;
};

CompareOutcome compare_trial(const NetworkSpec& spec, const ArchitecturePlan& plan, std::uint64_t seed, int images) {
    CompareOutcome res;
    try {
        NetworkWeights w = gen_random_weights(spec, seed);
        std::vector<Tensor3> xs;
        for (int i = 0; i < images; ++i)
            xs.push_back(gen_random_input(spec, seed * 1000003ULL + static_cast<std::uint64_t>(i)));
        sim::SimResult r = sim::simulate_network(plan, w, xs);
        for (int i = 0; i < images; ++i) {
            Tensor3 ref = ref_network(spec, w, xs[static_cast<std::size_t>(i)]);
            const auto& got = r.outputs[static_cast<std::size_t>(i)].data;
            for (std::size_t e = 0; e < ref.data.size(); ++e)
                res.mismatches += got[e] != ref.data[e];
        }
        res.match = res.mismatches == 0;
    } catch (const std::exception& e) {
        res.error = e.what();
    }
    return res;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Continuous-flow CNN dataflow planner, cost model and simulator"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "cflow 0.1.0");

    Common analyze_opts;
    auto* analyze = app.add_subcommand("analyze", "per-layer rates, configurations and flow");
    add_common(analyze, analyze_opts);

    Common plan_opts;
    auto* plan_cmd = app.add_subcommand("plan", "unit allocation, widths and busy cycles");
    add_common(plan_cmd, plan_opts);

    Common cost_opts;
    std::string scope = "full";
    bool no_rounded = false;
    auto* cost = app.add_subcommand("cost", "resource counts per layer");
    add_common(cost, cost_opts);
    cost->add_option("--scope", scope, "full, core or parallel")
        ->check(CLI::IsMember({"full", "core", "parallel"}));
    cost->add_flag("--no-rounded", no_rounded, "omit the compact-count row");

    Common sweep_opts;
    std::string rates_text;
    std::string sweep_layer;
    auto* sweep = app.add_subcommand("sweep", "price one layer group at several input rates");
    add_common(sweep, sweep_opts);
    sweep->add_option("--rates", rates_text, "comma separated rates, e.g. 8,4,2,1,1/2")->required();
    sweep->add_option("--layer", sweep_layer, "layer name as written in the document (default: the only one)");

    Common sim_opts;
    std::string weights_path, input_path, output_path, trace_format = "columns";
    std::vector<std::string> trace_signals;
    std::uint64_t sim_seed = 0;
    int sim_images = 1;
    auto* simulate = app.add_subcommand("simulate", "cycle-accurate simulation");
    add_common(simulate, sim_opts);
    simulate->add_option("--weights", weights_path, "weights document (default: seeded random)");
    simulate->add_option("--input", input_path, "input tensor, JSON or binary fixture (default: seeded random)");
    simulate->add_option("--images", sim_images, "random images fed back to back")->check(CLI::PositiveNumber);
    simulate->add_option("--seed", sim_seed, "seed for generated weights and inputs");
    simulate->add_option("--trace", trace_signals, "signals to trace (e.g. y, C1.x, input.x, C2.*)")->delimiter(',');
    simulate->add_option("--trace-format", trace_format, "columns or events")
        ->check(CLI::IsMember({"columns", "events"}));
    simulate->add_option("--output", output_path, "write the output tensor(s) as JSON");

    Common cmp_opts;
    std::uint64_t cmp_seed = 0;
    int trials = 10;
    int jobs = 1;
    int cmp_images = 1;
    bool quiet = false;
    auto* compare = app.add_subcommand("compare", "simulate seeded trials against the reference model");
    add_common(compare, cmp_opts);
    compare->add_option("--seed", cmp_seed, "first trial seed");
    compare->add_option("--trials", trials, "number of trials")->check(CLI::PositiveNumber);
    compare->add_option("--jobs", jobs, "trials run concurrently")->check(CLI::PositiveNumber);
    compare->add_option("--images", cmp_images, "images per trial, fed back to back")->check(CLI::PositiveNumber);
    compare->add_flag("--quiet", quiet, "only print the summary");

    auto* trace = app.add_subcommand("trace", "single-unit timing traces");
    trace->require_subcommand(1);
    int tk_f = 5, tk_k = 3, tk_p = 0;
    std::int64_t tk_cycles = 0;
    bool tk_values = false;
    std::int64_t tk_seed = -1;
    auto* trace_kpu = trace->add_subcommand("kpu", "one KPU on one feature map");
    trace_kpu->add_option("--f", tk_f, "feature map side")->check(CLI::PositiveNumber);
    trace_kpu->add_option("--k", tk_k, "kernel side")->check(CLI::PositiveNumber);
    trace_kpu->add_option("--p", tk_p, "padding")->check(CLI::NonNegativeNumber);
    trace_kpu->add_option("--cycles", tk_cycles, "cycles to show (default: until the last output)");
    trace_kpu->add_flag("--values", tk_values, "print values next to labels");
    trace_kpu->add_option("--seed", tk_seed, "random 8-bit weights and pixels (default: ones and x_n = n+1)");
    std::int64_t tf_h = 5, tf_j = 4, tf_d = 8, tf_a = 1;
    bool tf_values = false;
    auto* trace_fcu = trace->add_subcommand("fcu", "one FCU over one input vector");
    trace_fcu->add_option("--neurons", tf_h, "neurons h")->check(CLI::PositiveNumber);
    trace_fcu->add_option("--j", tf_j, "inputs per batch")->check(CLI::PositiveNumber);
    trace_fcu->add_option("--d-in", tf_d, "input features")->check(CLI::PositiveNumber);
    trace_fcu->add_option("--a", tf_a, "aggregation (serial input, a = j)")->check(CLI::PositiveNumber);
    trace_fcu->add_flag("--values", tf_values, "print values next to labels");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : kExitInput;
    }

    try {
        if (*analyze) {
            NetworkSpec spec = load_spec(analyze_opts);
            ArchitecturePlan plan = plan_network(spec, plan_options(analyze_opts));
            std::cout << analyze_table(plan).render(format_from_string(analyze_opts.format));
        } else if (*plan_cmd) {
            NetworkSpec spec = load_spec(plan_opts);
            ArchitecturePlan plan = plan_network(spec, plan_options(plan_opts));
            if (plan_opts.format == "json")
                std::cout << plan_to_json(plan) << "\n";
            else
                std::cout << plan_table(plan).render(format_from_string(plan_opts.format));
        } else if (*cost) {
            NetworkSpec spec = load_spec(cost_opts);
            Format fmt = format_from_string(cost_opts.format);
            ScopeName sn = scope_from_string(scope);
            if (sn == ScopeName::Parallel) {
                ReferenceCost ref = fully_parallel_reference_cost(spec);
                std::cout << cost_table(ref.report, scope, !no_rounded).render(fmt);
            } else {
                ArchitecturePlan plan = plan_network(spec, plan_options(cost_opts));
                CostScope cs = sn == ScopeName::Full ? CostScope::full() : CostScope::core();
                std::cout << cost_table(network_cost(plan, cs), scope, !no_rounded).render(fmt);
            }
        } else if (*sweep) {
            NetworkSpec spec = load_spec(sweep_opts);
            std::vector<LayerSpec> block;
            std::string group = sweep_layer;
            if (group.empty()) {
                for (const auto& l : spec.layers)
                    if (l.group != spec.layers.front().group)
                        throw ValidationError("the network has several layers; choose one with --layer");
                group = spec.layers.front().group;
            }
            for (const auto& l : spec.layers)
                if (l.group == group)
                    block.push_back(l);
            if (block.empty())
                throw ValidationError(fmt::format("no layer named '{}'", group));
            auto rows = sweep_rates(block, parse_rates(rates_text), plan_options(sweep_opts));
            std::cout << sweep_table(rows).render(format_from_string(sweep_opts.format));
        } else if (*simulate) {
            NetworkSpec spec = load_spec(sim_opts);
            ArchitecturePlan plan = plan_network(spec, plan_options(sim_opts));
            NetworkWeights w = weights_path.empty() ? gen_random_weights(spec, sim_seed) : load_weights(spec, weights_path);
            std::vector<Tensor3> xs;
            if (!input_path.empty())
                xs.push_back(load_input(input_path));
            else
                for (int i = 0; i < sim_images; ++i)
                    xs.push_back(gen_random_input(spec, sim_seed * 1000003ULL + static_cast<std::uint64_t>(i)));
            sim::SimOptions so;
            so.trace_signals = trace_signals;
            sim::SimResult r = sim::simulate_network(plan, w, xs, so);
            if (!trace_signals.empty())
                std::cout << (trace_format == "events" ? r.trace.to_event_log() : r.trace.to_columns());
            std::cout << sim_stats_table(r.stats, plan).render(format_from_string(sim_opts.format));
            if (!output_path.empty()) {
                std::string text;
                if (r.outputs.size() == 1) {
                    text = serialize_tensor(r.outputs.front());
                } else {
                    text = "[\n";
                    for (std::size_t i = 0; i < r.outputs.size(); ++i)
                        text += (i ? ",\n" : "") + serialize_tensor(r.outputs[i]);
                    text += "\n]\n";
                }
                write_text(output_path, text);
            }
        } else if (*compare) {
            NetworkSpec spec = load_spec(cmp_opts);
            ArchitecturePlan plan = plan_network(spec, plan_options(cmp_opts));
            std::vector<CompareOutcome> out(static_cast<std::size_t>(trials));
            std::atomic<int> next{0};
            auto worker = [&] {
                for (int i = next++; i < trials; i = next++)
                    out[static_cast<std::size_t>(i)] =
                        compare_trial(spec, plan, cmp_seed + static_cast<std::uint64_t>(i), cmp_images);
            };
            std::vector<std::thread> pool;
            for (int t = 1; t < std::min(jobs, trials); ++t)
                pool.emplace_back(worker);
            worker();
            for (auto& th : pool)
                th.join();
            int passed = 0;
            bool input_error = false;
            for (int i = 0; i < trials; ++i) {
                const auto& o = out[static_cast<std::size_t>(i)];
                std::uint64_t seed = cmp_seed + static_cast<std::uint64_t>(i);
                passed += o.match;
                if (!o.error.empty()) {
                    input_error = true;
                    std::cout << fmt::format("trial {} seed {}: error: {}\n", i, seed, o.error);
                } else if (!quiet || !o.match) {
                    std::cout << fmt::format("trial {} seed {}: {}\n", i, seed,
                                             o.match ? "match" : fmt::format("{} mismatching values", o.mismatches));
                }
            }
            bool ok = passed == trials;
            std::cout << fmt::format("{}: {}/{} trials bit-exact\n", ok ? "PASS" : "FAIL", passed, trials);
            if (input_error)
                return kExitInput;
            return ok ? 0 : kExitMismatch;
        } else if (*trace_kpu) {
            std::vector<std::int64_t> w(static_cast<std::size_t>(tk_k) * tk_k, 1);
            std::vector<std::int64_t> img(static_cast<std::size_t>(tk_f) * tk_f);
            for (std::size_t i = 0; i < img.size(); ++i)
                img[i] = static_cast<std::int64_t>(i) + 1;
            if (tk_seed >= 0) {
                w = gen_random_values(w.size(), static_cast<std::uint64_t>(tk_seed), 8);
                img = gen_random_values(img.size(), static_cast<std::uint64_t>(tk_seed) + 1, 8);
            }
            std::cout << sim::render_kpu_trace(sim::trace_kpu(tk_f, tk_k, tk_p, w, img, tk_cycles), tk_values);
        } else if (*trace_fcu) {
            std::vector<std::int64_t> w(static_cast<std::size_t>(tf_h * tf_d), 1);
            std::vector<std::int64_t> x(static_cast<std::size_t>(tf_d));
            for (std::size_t i = 0; i < x.size(); ++i)
                x[i] = static_cast<std::int64_t>(i) + 1;
            std::cout << sim::render_fcu_trace(sim::trace_fcu(tf_h, tf_j, tf_d, tf_a, w, x), tf_values);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInput;
    }
    return 0;
}
