#include "cflow/cost.hpp"
#include "cflow/sim/units.hpp"
#include "support/paths.hpp"

#include <doctest.h>

using namespace cflow;
using cflow::testing::spec_path;

namespace {

ResourceVector rv(std::int64_t add, std::int64_t mul, std::int64_t reg, std::int64_t mux, std::int64_t max = 0,
                  std::int64_t weights = 0) {
    return {add, mul, reg, mux, max, weights};
}

struct SweepExpect {
    Rate r;
    std::int64_t add, mul, reg, mux;
    int kpu, fcu;
    bool stalled;
};

std::vector<LayerSpec> block(const char* file) { return load_network(spec_path(file)).layers; }

} // namespace

TEST_CASE("unit cost functions") {
    CHECK(interleaver_cost(8, 1, Rate(2), 16).mux2 == 6);
    auto il = interleaver_cost(16, 1, Rate(4), 16);
    CHECK(il.mux2 == 12);
    CHECK(il.registers == 16);
    CHECK(interleaver_cost(8, 1, Rate(8), 8).mux2 == 0);

    auto p1 = ppu_cost(2, 24, 1) * 8;
    CHECK(p1.max_units == 24);
    CHECK(p1.registers == 200);
    auto p2 = ppu_cost(3, 12, 4) * 4;
    CHECK(p2.max_units == 32);
    CHECK(p2.registers == 416);
    CHECK(ppu_cost(1, 5, 3).max_units == 0);

    CHECK(fcu_cost(4, 5, 320, 2) == rv(8, 8, 10, 2552));
    auto fc16 = fcu_cost(8, 1, 1, 16);
    CHECK(fc16.adders == 128);
    CHECK(fc16.multipliers == 128);
    CHECK(fcu_cost(3, 2, 1, 1).mux2 == 0);

    CHECK_FALSE(needs_accumulation(1, Rate(1)));
    CHECK(needs_accumulation(1, Rate(2)));
    CHECK(needs_accumulation(2, Rate(1)));
    CHECK(bias_cost(8, 1).adders == 8);
}

TEST_CASE("KPU registers agree with the simulated delay lines") {
    for (int f : {5, 12, 24, 28})
        for (int k : {1, 2, 3, 5, 7})
            for (std::int64_t C : {1, 4, 16}) {
                if (k > f)
                    continue;
                sim::KpuUnit unit(f, k, C);
                CHECK(kpu_cost(k, f, C).registers == unit.register_count());
            }
}

TEST_CASE("KPU arithmetic scales with the kernel, multiplexers with configurations") {
    auto c = kpu_cost(5, 12, 4);
    CHECK(c.multipliers == 25);
    CHECK(c.adders == 25 - 1);
    CHECK(c.mux2 == 25 * 3);
    CHECK(kpu_cost(5, 12, 1).mux2 == 0);
}

TEST_CASE("running example per-layer resources") {
    NetworkSpec spec = load_network(spec_path("running_example.json"));
    ArchitecturePlan plan = plan_network(spec);
    CostReport rep = network_cost(plan, CostScope::full());
    REQUIRE(rep.rows.size() == 5);
    CHECK(rep.rows[0].res == rv(200, 200, 800, 0, 0, 200));
    CHECK(rep.rows[1].res == rv(0, 0, 200, 0, 24, 0));
    CHECK(rep.rows[2].res == rv(816, 800, 6680, 2406, 0, 3200));
    CHECK(rep.rows[3].res == rv(0, 0, 416, 12, 32, 0));
    CHECK(rep.rows[4].res == rv(8, 8, 10, 2552, 0, 2560));
    CHECK(rep.total == rv(1024, 1008, 8106, 4970, 56, 5960));
    CHECK(rep.n_kpu == 40);
    CHECK(rep.n_fcu == 2);
    CHECK(rep.n_ppu == 12);
}

TEST_CASE("fully parallel reference") {
    auto ref = fully_parallel_reference_cost(load_network(spec_path("running_example.json")));
    CHECK(ref.report.n_kpu == 136);
    CHECK(ref.report.n_fcu == 10);
    CHECK(ref.report.total.adders == 5976);
    CHECK(ref.report.total.multipliers == 5960);
    CHECK(ref.report.total.mux2 == 0);
    for (const auto& lp : ref.plan.layers)
        CHECK(lp.C() == 1);

    auto mb = fully_parallel_reference_cost(load_network(spec_path("mobilenet_v1_1.0.json")));
    CHECK(mb.report.n_kpu == 6080);
    CHECK(mb.report.n_fcu == 6952);

    NetworkSpec one = parse_network(R"({"input": {"height": 1, "channels": 1},
                                        "layers": [{"kind": "conv", "k": 1, "d_out": 1}]})");
    CHECK(fully_parallel_reference_cost(one).report.total.multipliers == 1);
}

TEST_CASE("MobileNet unit counts") {
    auto quarter = network_cost(plan_network(load_network(spec_path("mobilenet_v1_0.25.json"))), CostScope::full());
    CHECK(quarter.n_kpu == 44);
    CHECK(quarter.n_fcu == 632);
    CHECK(quarter.total.adders >= 1050);
    CHECK(quarter.total.adders <= 1149);
    CHECK(quarter.total.multipliers >= 1050);
    CHECK(quarter.total.multipliers <= 1149);

    auto full = network_cost(plan_network(load_network(spec_path("mobilenet_v1_1.0.json"))), CostScope::full());
    CHECK(full.n_kpu == 158);
    CHECK(full.n_fcu == 5465);
    CHECK(full.total.adders >= 12150);
    CHECK(full.total.adders <= 12249);
    CHECK(full.total.multipliers >= 12150);
    CHECK(full.total.multipliers <= 12249);
}

TEST_CASE("convolution rate sweep") {
    const SweepExpect rows[] = {
        {Rate(8), 6272, 6272, 22288, 0, 128, 0, false},      {Rate(4), 3136, 3136, 22288, 3136, 64, 0, false},
        {Rate(2), 1568, 1568, 22288, 4704, 32, 0, false},    {Rate(1), 784, 784, 22288, 5488, 16, 0, false},
        {Rate(1, 2), 392, 392, 22288, 5880, 8, 0, false},    {Rate(1, 4), 196, 196, 22288, 6076, 4, 0, false},
        {Rate(1, 8), 98, 98, 22288, 6174, 2, 0, false},      {Rate(1, 16), 49, 49, 22288, 6223, 1, 0, false},
        {Rate(1, 32), 49, 49, 22288, 6223, 1, 0, true},
    };
    std::vector<Rate> rates;
    for (const auto& r : rows)
        rates.push_back(r.r);
    auto got = sweep_rates(block("conv_block.json"), rates);
    REQUIRE(got.size() == std::size(rows));
    for (std::size_t i = 0; i < got.size(); ++i) {
        CAPTURE(rows[i].r.str());
        CHECK(got[i].res.adders == rows[i].add);
        CHECK(got[i].res.multipliers == rows[i].mul);
        CHECK(got[i].res.registers == rows[i].reg);
        CHECK(got[i].res.mux2 == rows[i].mux);
        CHECK(got[i].n_kpu == rows[i].kpu);
        CHECK(got[i].stalled == rows[i].stalled);
    }
    CHECK(sweep_rates(block("conv_block.json"), {}).empty());
}

TEST_CASE("depthwise-separable rate sweep") {
    const SweepExpect rows[] = {
        {Rate(8), 512, 520, 1416, 0, 8, 16, false},   {Rate(4), 256, 260, 1416, 260, 4, 16, false},
        {Rate(2), 128, 130, 1416, 390, 2, 16, false}, {Rate(1), 64, 65, 1416, 455, 1, 16, false},
        {Rate(1, 2), 56, 57, 1416, 463, 1, 8, true},  {Rate(1, 4), 52, 53, 1416, 467, 1, 4, true},
    };
    std::vector<Rate> rates;
    for (const auto& r : rows)
        rates.push_back(r.r);
    auto got = sweep_rates(block("dwsep_block.json"), rates);
    REQUIRE(got.size() == std::size(rows));
    for (std::size_t i = 0; i < got.size(); ++i) {
        CAPTURE(rows[i].r.str());
        CHECK(got[i].res.adders == rows[i].add);
        CHECK(got[i].res.multipliers == rows[i].mul);
        CHECK(got[i].res.registers == rows[i].reg);
        CHECK(got[i].res.mux2 == rows[i].mux);
        CHECK(got[i].n_kpu == rows[i].kpu);
        CHECK(got[i].n_fcu == rows[i].fcu);
        CHECK(got[i].stalled == rows[i].stalled);
    }
}

TEST_CASE("cost scopes") {
    CHECK(scope_from_string("full") == ScopeName::Full);
    CHECK(scope_from_string("core") == ScopeName::Core);
    CHECK(scope_from_string("parallel") == ScopeName::Parallel);
    CHECK_THROWS(scope_from_string("everything"));
    CHECK(to_string(ScopeName::Parallel) == "parallel");
}
