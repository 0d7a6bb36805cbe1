#include "cflow/sim/golden.hpp"

#include "cflow/rate.hpp"
#include "cflow/sim/units.hpp"

#include <fmt/format.h>

#include <stdexcept>

namespace cflow::sim {

std::vector<int> default_taps(int k) {
    if (k < 2)
        return {0};
    return {0, k - 1, k, 2 * k - 1, 2 * k};
}

namespace {

std::string tap_name(int idx, int k) { return fmt::format("a{}{}", idx / k + 1, idx % k + 1); }

} // namespace

KpuTrace trace_kpu(int f, int k, int p, const std::vector<std::int64_t>& weights,
                   const std::vector<std::int64_t>& image, std::int64_t cycles, std::vector<int> taps) {
    if (image.size() != static_cast<std::size_t>(f) * f || weights.size() != static_cast<std::size_t>(k) * k)
        throw std::invalid_argument("trace_kpu: image must hold f*f values and weights k*k");
    if (2 * p > k - 1)
        throw std::invalid_argument("trace_kpu: padding wider than (k-1)/2");
    if (taps.empty())
        taps = default_taps(k);
    for (int idx : taps)
        if (idx < 0 || idx >= k * k)
            throw std::invalid_argument("trace_kpu: tap index out of range");

    KpuTrace tr;
    tr.f = f;
    tr.k = k;
    tr.p = p;
    tr.tap_indices = taps;
    for (int idx : taps)
        tr.tap_names.push_back(tap_name(idx, k));

    const std::int64_t f2 = std::int64_t{f} * f;
    const std::int64_t Z = std::int64_t{p} * f + p;
    const std::int64_t P = f2 + Z;
    const std::int64_t D = std::int64_t{k - 1} * (f + 1);
    if (cycles <= 0) {
        std::int64_t last = 0;
        for (std::int64_t n = 0; n < f2; ++n)
            if (output_valid(static_cast<int>(n), f, k, 1, p))
                last = n;
        cycles = last + D + 1;
    }

    // Window n is in flight at tap (i, j) when t = n + i*f + j, periodic in P.
    auto window = [&](std::int64_t w) -> std::optional<std::int64_t> {
        if (w < 0)
            return std::nullopt;
        std::int64_t n = w % P;
        if (n >= f2 || !output_valid(static_cast<int>(n), f, k, 1, p))
            return std::nullopt;
        return n;
    };

    KpuUnit unit(f, k, 1);
    unit.set_weights(0, weights);
    for (std::int64_t t = 0; t < cycles; ++t) {
        KpuTraceRow row;
        row.t = t;
        std::int64_t pos = t - Z;
        std::uint32_t mask = 0xffffffffu;
        if (pos >= 0 && pos < f2) {
            row.x = {fmt::format("x_{}", pos), image[static_cast<std::size_t>(pos)]};
            int col = static_cast<int>(pos % f);
            row.pad = pad_tuple(col, f, k, p);
            mask = 0;
            for (int j = 0; j < k; ++j)
                mask |= static_cast<std::uint32_t>(row.pad[static_cast<std::size_t>(j)]) << j;
        } else {
            row.x = {"0", 0};
        }
        std::int64_t y = unit.step(row.x.value, mask, 0);
        for (int idx : taps) {
            std::int64_t off = std::int64_t{idx / k} * f + idx % k;
            Cell c;
            if (auto n = window(t - off))
                c = {fmt::format("z_{{{},{}}}", *n, idx), unit.tap(idx)};
            row.taps.push_back(c);
        }
        if (auto n = window(t - D))
            row.y = {fmt::format("y_{}", *n), y};
        tr.rows.push_back(std::move(row));
    }
    return tr;
}

std::optional<std::int64_t> FcuTrace::first_valid_cycle() const {
    for (const auto& r : rows)
        if (r.y.valid() && r.y.label.starts_with("y"))
            return r.t;
    return std::nullopt;
}

FcuTrace trace_fcu(std::int64_t h, std::int64_t j, std::int64_t d_in, std::int64_t a,
                   const std::vector<std::int64_t>& weights, const std::vector<std::int64_t>& inputs) {
    if (h < 1 || j < 1 || a < 1 || d_in % j != 0)
        throw std::invalid_argument("trace_fcu: need h, j, a >= 1 and j dividing d_in");
    if (a > 1 && a != j)
        throw std::invalid_argument("trace_fcu: the aggregator width must equal j");
    if (weights.size() != static_cast<std::size_t>(h * d_in) || inputs.size() != static_cast<std::size_t>(d_in))
        throw std::invalid_argument("trace_fcu: weights must be h*d_in and inputs d_in");

    const std::int64_t nb = d_in / j;
    FcuUnit unit(j, h, h * nb);
    std::vector<std::int64_t> bank(static_cast<std::size_t>(j));
    for (std::int64_t b = 0; b < nb; ++b)
        for (std::int64_t i = 0; i < h; ++i) {
            for (std::int64_t q = 0; q < j; ++q)
                bank[static_cast<std::size_t>(q)] = weights[static_cast<std::size_t>(i * d_in + b * j + q)];
            unit.set_weights(b * h + i, bank);
        }

    // Cycle at which batch b is loaded into the hold register.
    std::vector<std::int64_t> load(static_cast<std::size_t>(nb));
    for (std::int64_t b = 0; b < nb; ++b) {
        std::int64_t ready = a > 1 ? (b + 1) * a : 0;
        std::int64_t free = b == 0 ? 0 : load[static_cast<std::size_t>(b - 1)] + h;
        load[static_cast<std::size_t>(b)] = std::max(ready, free);
    }

    FcuTrace tr{h, j, d_in, a, {}};
    Aggregator agg(a);
    std::vector<std::int64_t> hold(static_cast<std::size_t>(j), 0);
    std::int64_t batch = -1;
    const std::int64_t end = load.back() + h;
    for (std::int64_t t = 0; t < end; ++t) {
        FcuTraceRow row;
        row.t = t;
        if (batch + 1 < nb && t == load[static_cast<std::size_t>(batch + 1)]) {
            ++batch;
            for (std::int64_t q = 0; q < j; ++q)
                hold[static_cast<std::size_t>(q)] = inputs[static_cast<std::size_t>(batch * j + q)];
        }
        bool active = batch >= 0 && t < load[static_cast<std::size_t>(batch)] + h;
        if (a > 1 && batch < 0) {
            // Registered view of the aggregator: inputs that arrived before t.
            const auto& regs = agg.contents();
            for (std::int64_t s = 0; s < a; ++s) {
                Cell c;
                if (s >= a - agg.filled())
                    c = {fmt::format("{}", t - a + s), regs[static_cast<std::size_t>(s)]};
                row.x.push_back(c);
            }
        } else if (batch >= 0) {
            for (std::int64_t q = 0; q < j; ++q)
                row.x.push_back({fmt::format("{}", batch * j + q), hold[static_cast<std::size_t>(q)]});
        }
        if (active) {
            std::int64_t i = t - load[static_cast<std::size_t>(batch)];
            std::int64_t config = batch * h + i;
            row.n = batch * j;
            row.config = config;
            std::int64_t sum = unit.step(hold, config, 0);
            row.q = {batch == 0 ? "0" : fmt::format("z_{{{},{}}}", config - h, j - 1), unit.q()};
            if (batch == nb - 1)
                row.y = {fmt::format("y_{}", i), sum};
            else
                row.y = {fmt::format("z_{{{},{}}}", config, j - 1), sum};
        } else if (batch < 0) {
            row.q = {"0", 0};
        }
        if (a > 1 && t < d_in)
            agg.push(inputs[static_cast<std::size_t>(t)]);
        tr.rows.push_back(std::move(row));
    }
    return tr;
}

namespace {

std::string cell(const Cell& c, bool with_values) {
    if (!c.valid())
        return "-";
    return with_values ? fmt::format("{}={}", c.label, c.value) : c.label;
}

std::string tuple(const std::vector<int>& v) {
    std::string s = "(";
    for (std::size_t i = 0; i < v.size(); ++i)
        s += fmt::format("{}{}", i ? "," : "", v[i]);
    return s + ")";
}

} // namespace

std::string render_kpu_trace(const KpuTrace& tr, bool with_values) {
    std::string out = fmt::format("{:>4} {:>10} {:>9}", "t", "x", "pad");
    for (const auto& n : tr.tap_names)
        out += fmt::format(" {:>12}", n);
    out += fmt::format(" {:>10}\n", "y");
    for (const auto& r : tr.rows) {
        out += fmt::format("{:>4} {:>10} {:>9}", r.t, cell(r.x, with_values), r.pad.empty() ? "-" : tuple(r.pad));
        for (const auto& c : r.taps)
            out += fmt::format(" {:>12}", cell(c, with_values));
        out += fmt::format(" {:>10}\n", cell(r.y, with_values));
    }
    return out;
}

std::string render_fcu_trace(const FcuTrace& tr, bool with_values) {
    std::string out = fmt::format("{:>4} {:>12}", "t", tr.a > 1 ? "x" : "n");
    for (std::int64_t q = 0; q < tr.j; ++q)
        out += fmt::format(" {:>8}", fmt::format("w_i,{}", q));
    out += fmt::format(" {:>10} {:>10}\n", "q", "y");
    for (const auto& r : tr.rows) {
        std::string x;
        if (tr.a > 1) {
            x = "(";
            for (std::size_t s = 0; s < r.x.size(); ++s)
                x += (s ? "," : "") + (r.x[s].valid() ? r.x[s].label : std::string("-"));
            x += ")";
        } else {
            x = r.n ? fmt::format("{}", *r.n) : "-";
        }
        out += fmt::format("{:>4} {:>12}", r.t, x);
        for (std::int64_t q = 0; q < tr.j; ++q)
            out += fmt::format(" {:>8}", r.config ? fmt::format("w_{{{},{}}}", *r.config, q) : "-");
        out += fmt::format(" {:>10} {:>10}\n", cell(r.q, with_values), cell(r.y, with_values));
    }
    return out;
}

} // namespace cflow::sim
