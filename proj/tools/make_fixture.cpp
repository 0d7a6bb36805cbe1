// Writes the running-example regression fixture: weights, one input, logits.
#include "cflow/io.hpp"
#include "cflow/oracle.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>

#include <fstream>

int main(int argc, char** argv) {
    CLI::App app{"cflow fixture generator"};
    std::string spec_path, out_dir;
    std::uint64_t seed = 0;
    app.add_option("spec", spec_path)->required();
    app.add_option("out", out_dir)->required();
    app.add_option("--seed", seed);
    CLI11_PARSE(app, argc, argv);

    cflow::NetworkSpec spec = cflow::load_network(spec_path);
    cflow::NetworkWeights w = cflow::gen_random_weights(spec, seed);
    cflow::Tensor3 x = cflow::gen_random_input(spec, seed + 1);
    std::ofstream(out_dir + "/running_example_weights.json") << cflow::serialize_weights(spec, w);
    cflow::write_fixture(out_dir + "/running_example_input.cft3", x);
    cflow::write_fixture(out_dir + "/running_example_logits.cft3", cflow::ref_network(spec, w, x), 8);
    fmt::print("wrote fixture for {} (seed {})\n", spec.name, seed);
}
