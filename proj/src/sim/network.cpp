#include "cflow/sim/network.hpp"

#include "cflow/arith.hpp"
#include "cflow/errors.hpp"
#include "cflow/oracle.hpp"
#include "cflow/rate.hpp"
#include "cflow/sim/units.hpp"

#include <fmt/format.h>

#include <deque>
#include <memory>

namespace cflow::sim {

namespace {

// Reorder buffer in front of a layer. The m-th token of a channel belongs to pixel m.
class Port {
public:
    explicit Port(int channels) : d_(channels), next_(static_cast<std::size_t>(channels), 0) {}

    // Visible from the next cycle.
    void stage(int ch, std::int64_t v) { staged_.emplace_back(ch, v); }
    void commit() {
        for (auto [ch, v] : staged_)
            put(ch, v);
        staged_.clear();
    }
    void put(int ch, std::int64_t v) {
        std::int64_t px = next_[static_cast<std::size_t>(ch)]++;
        while (base_ + static_cast<std::int64_t>(values_.size()) <= px) {
            values_.emplace_back(static_cast<std::size_t>(d_), 0);
            have_.emplace_back(static_cast<std::size_t>(d_), 0);
        }
        auto i = static_cast<std::size_t>(px - base_);
        values_[i][static_cast<std::size_t>(ch)] = v;
        have_[i][static_cast<std::size_t>(ch)] = 1;
        high_ = std::max(high_, ++stored_);
    }
    bool has(std::int64_t px, int ch) const {
        if (px < base_ || px >= base_ + static_cast<std::int64_t>(values_.size()))
            return false;
        return have_[static_cast<std::size_t>(px - base_)][static_cast<std::size_t>(ch)] != 0;
    }
    std::int64_t get(std::int64_t px, int ch) const {
        return values_[static_cast<std::size_t>(px - base_)][static_cast<std::size_t>(ch)];
    }
    // Drops every pixel below `px`.
    void release_below(std::int64_t px) {
        while (base_ < px && !values_.empty()) {
            for (char h : have_.front())
                stored_ -= h;
            values_.pop_front();
            have_.pop_front();
            ++base_;
        }
    }
    std::int64_t high_water() const { return high_; }

private:
    int d_;
    std::vector<std::int64_t> next_;
    std::int64_t base_ = 0;
    std::deque<std::vector<std::int64_t>> values_;
    std::deque<std::vector<char>> have_;
    std::vector<std::pair<int, std::int64_t>> staged_;
    std::int64_t stored_ = 0;
    std::int64_t high_ = 0;
};

class Collector {
public:
    Collector(int f, int d, std::size_t images) : f_(f), d_(d), next_(static_cast<std::size_t>(d), 0) {
        for (std::size_t i = 0; i < images; ++i)
            outputs_.emplace_back(f, f, d);
        done_at_.assign(images, -1);
        per_image_.assign(images, 0);
    }
    void put(std::int64_t cycle, int ch, std::int64_t v) {
        std::int64_t px = next_[static_cast<std::size_t>(ch)]++;
        std::int64_t per = std::int64_t{f_} * f_;
        auto img = static_cast<std::size_t>(px / per);
        if (img >= outputs_.size())
            throw ConfigurationError("network produced more outputs than images were fed");
        std::int64_t n = px % per;
        outputs_[img].at(static_cast<int>(n / f_), static_cast<int>(n % f_), ch) = v;
        if (first_ < 0)
            first_ = cycle;
        if (++per_image_[img] == per * d_)
            done_at_[img] = cycle;
        ++total_;
    }
    bool complete() const { return total_ == static_cast<std::int64_t>(outputs_.size()) * f_ * f_ * d_; }

    std::vector<Tensor3> outputs_;
    std::vector<std::int64_t> done_at_;
    std::int64_t first_ = -1;

private:
    int f_;
    int d_;
    std::vector<std::int64_t> next_;
    std::vector<std::int64_t> per_image_;
    std::int64_t total_ = 0;
};

struct Sink {
    Port* port = nullptr;
    Collector* collector = nullptr;
};

// Utilization over the second half of an image's data units (pixels, or FCU
// batches), after any catch-up from padding positions has drained.
struct UtilProbe {
    std::int64_t t_first = -1;
    std::int64_t steps_first = 0;
    Rate last{1};

    void observe(std::int64_t idx, std::int64_t count, std::int64_t t, std::int64_t steps) {
        if (idx == count / 2) {
            t_first = t;
            steps_first = steps;
        }
        if (idx == count - 1 && t_first >= 0 && t > t_first)
            last = Rate(steps - steps_first, t - t_first);
    }
};

class LayerSim {
public:
    LayerSim(const LayerPlan& lp, CycleTrace& trace, std::size_t images)
        : lp_(lp), trace_(trace), y_signal_(lp.layer.name + ".y"), want_y_(trace.wants(y_signal_)) {
        stats.name = lp.layer.name;
        stats.tokens_per_image.assign(images, 0);
        if (lp.widths.accumulator_bits > 63 || lp.widths.result_bits > 63)
            throw ConfigurationError(fmt::format("layer {}: worst-case width {} bits exceeds 64-bit simulation; enable requantization",
                                                 lp.layer.name, lp.widths.accumulator_bits));
    }
    virtual ~LayerSim() = default;
    virtual void step(std::int64_t t) = 0;
    virtual std::int64_t busy_per_image() const = 0;

    std::vector<Port> ports;
    std::vector<Sink> sinks;
    LayerStats stats;

    std::int64_t high_water() const {
        std::int64_t h = 0;
        for (const auto& p : ports)
            h += p.high_water();
        return h;
    }

protected:
    void emit(std::int64_t t, int ch, std::int64_t result) {
        check_width(result, lp_.widths.result_bits, lp_.layer.name);
        std::int64_t v = finish_output(result, lp_.widths);
        for (auto& s : sinks) {
            if (s.port)
                s.port->stage(ch, v);
            else
                s.collector->put(t, ch, v);
        }
        std::int64_t per = std::int64_t{lp_.layer.out_f()} * lp_.layer.out_f() * lp_.layer.d_out;
        auto img = static_cast<std::size_t>(stats.tokens_out / per);
        if (img < stats.tokens_per_image.size())
            ++stats.tokens_per_image[img];
        ++stats.tokens_out;
        if (stats.first_output_cycle < 0)
            stats.first_output_cycle = t;
        if (want_y_)
            trace_.record({t, y_signal_, ch, v, true, 0});
    }
    void record(std::int64_t t, const std::string& sig, int ch, std::int64_t v, int bits = 0) {
        if (trace_.wants(sig))
            trace_.record({t, sig, ch, v, true, bits});
    }

    const LayerPlan& lp_;
    CycleTrace& trace_;
    std::string y_signal_;
    bool want_y_;
    UtilProbe probe_;

    friend SimResult cflow::sim::simulate_network(const ArchitecturePlan&, const NetworkWeights&,
                                                  const std::vector<Tensor3>&, const SimOptions&);
};

// Conv, depthwise (incl. constant-weight average pooling) and max pooling.
class SlidingLayer : public LayerSim {
public:
    SlidingLayer(const LayerPlan& lp, const LayerWeights& w, CycleTrace& trace, std::size_t images, bool no_pads)
        : LayerSim(lp, trace, images), w_(w), no_pads_(no_pads), images_(static_cast<std::int64_t>(images)) {
        const LayerSpec& l = lp.layer;
        ports.emplace_back(l.d_in);
        conv_ = l.kind == LayerKind::Conv;
        pool_ = l.kind == LayerKind::MaxPool;
        lanes_ = lp.units.lanes;
        I_ = lp.units.conv ? lp.units.conv->I : 1;
        std::int64_t C = lp.C();
        if (C % I_ == 0 && lanes_ * (C / I_) >= l.d_in) {
            S_ = C / I_;
        } else {
            S_ = ceil_div(l.d_in, lanes_);
            stats.note = fmt::format("C={} is not realizable with I={} over {} lanes; using {} slots", C, I_, lanes_, S_);
        }
        groups_ = conv_ ? static_cast<int>(ceil_div(l.d_out, I_)) : 1;
        Z_ = std::int64_t{l.p} * l.f + l.p;
        P_ = std::int64_t{l.f} * l.f + Z_;
        zeros_left_ = Z_;
        std::int64_t configs = S_ * I_;
        stats.steps_per_position = configs;
        ChainOp op = pool_ ? ChainOp::Max : ChainOp::MultiplyAdd;
        std::size_t k2 = static_cast<std::size_t>(l.k) * l.k;
        std::vector<std::int64_t> bank(k2);
        for (int lane = 0; lane < lanes_; ++lane)
            for (int g = 0; g < groups_; ++g) {
                KpuUnit u(l.f, l.k, configs, op);
                for (std::int64_t kappa = 0; kappa < configs && !pool_; ++kappa) {
                    std::int64_t ch = lane * S_ + kappa / I_;
                    std::int64_t o = g * I_ + kappa % I_;
                    for (std::size_t idx = 0; idx < k2; ++idx) {
                        if (ch >= l.d_in || (conv_ && o >= l.d_out))
                            bank[idx] = 0;
                        else if (l.constant_weights)
                            bank[idx] = avg_weight(l.k);
                        else if (conv_)
                            bank[idx] = w.kernel[(static_cast<std::size_t>(o) * l.d_in + static_cast<std::size_t>(ch)) * k2 + idx];
                        else
                            bank[idx] = w.kernel[static_cast<std::size_t>(ch) * k2 + idx];
                    }
                    u.set_weights(kappa, bank);
                }
                units_.push_back(std::move(u));
            }
        acc_.assign(static_cast<std::size_t>(groups_ * I_), 0);
        x_.assign(static_cast<std::size_t>(lanes_), 0);
        latency_ = std::int64_t{l.k - 1} * (l.f + 1);
        x_sig_ = l.name + ".x";
        pad_sig_ = l.name + ".pad";
    }

    std::int64_t busy_per_image() const override { return S_ * I_ * P_; }

    void step(std::int64_t t) override {
        const LayerSpec& l = lp_.layer;
        Port& in = ports[0];
        if (pos_ - latency_ >= images_ * P_)
            return;
        if (!in_pos_) {
            // Past the last image the stream is flushed with padding positions.
            is_data_ = zeros_left_ == 0 && pixel_ < images_ * l.f * l.f;
            in_pos_ = true;
            kappa_ = 0;
        }
        std::int64_t m = kappa_ / I_;
        int i = static_cast<int>(kappa_ % I_);
        if (i == 0) {
            for (int lane = 0; lane < lanes_; ++lane) {
                std::int64_t ch = lane * S_ + m;
                if (!is_data_ || ch >= l.d_in) {
                    x_[static_cast<std::size_t>(lane)] = 0;
                    continue;
                }
                if (!in.has(pixel_, static_cast<int>(ch)))
                    return;
                x_[static_cast<std::size_t>(lane)] = in.get(pixel_, static_cast<int>(ch));
            }
        }
        if (is_data_ && kappa_ == 0) {
            probe_.observe(pixel_in_image_, std::int64_t{l.f} * l.f, t, stats.steps);
        }

        std::uint32_t mask = 0xffffffffu;
        if (is_data_ && !no_pads_) {
            int col = static_cast<int>(pixel_in_image_ % l.f);
            mask = 0;
            for (int j = 0; j < l.k; ++j)
                mask |= static_cast<std::uint32_t>(pad_select(col, j, l.f, l.k, l.p)) << j;
        }
        if (trace_.enabled()) {
            for (int lane = 0; lane < lanes_; ++lane)
                record(t, x_sig_, lanes_ > 1 ? lane : -1, x_[static_cast<std::size_t>(lane)]);
            if (is_data_)
                record(t, pad_sig_, -1, mask & ((1u << l.k) - 1u), l.k);
        }

        std::int64_t W = pos_ - latency_;
        bool valid = false;
        if (W >= 0 && W < images_ * P_) {
            std::int64_t mo = W % P_;
            valid = mo < std::int64_t{l.f} * l.f && output_valid(static_cast<int>(mo), l.f, l.k, l.s, l.p);
        }

        for (int lane = 0; lane < lanes_; ++lane)
            for (int g = 0; g < groups_; ++g) {
                std::int64_t y = units_[static_cast<std::size_t>(lane * groups_ + g)].step(x_[static_cast<std::size_t>(lane)], mask, kappa_);
                if (conv_) {
                    std::int64_t& a = acc_[static_cast<std::size_t>(g * I_ + i)];
                    a += y;
                    check_width(a, lp_.widths.accumulator_bits, l.name);
                } else {
                    std::int64_t ch = lane * S_ + m;
                    if (valid && ch < l.d_in) {
                        check_width(y, lp_.widths.accumulator_bits, l.name);
                        emit(t, static_cast<int>(ch), l.constant_weights ? avg_finish(y) : y);
                    }
                }
            }
        if (conv_ && m == S_ - 1) {
            for (int g = 0; g < groups_; ++g) {
                std::int64_t o = g * I_ + i;
                std::int64_t& a = acc_[static_cast<std::size_t>(g * I_ + i)];
                if (o < l.d_out && valid)
                    emit(t, static_cast<int>(o), a + w_.bias[static_cast<std::size_t>(o)]);
                a = 0;
            }
        }
        ++stats.steps;

        if (++kappa_ == S_ * I_) {
            in_pos_ = false;
            ++pos_;
            if (is_data_) {
                ++pixel_;
                in.release_below(pixel_);
                if (++pixel_in_image_ == std::int64_t{l.f} * l.f) {
                    pixel_in_image_ = 0;
                    zeros_left_ = Z_;
                    stats.utilization = probe_.last;
                }
            } else if (zeros_left_ > 0) {
                --zeros_left_;
            }
        }
    }

private:
    const LayerWeights& w_;
    bool no_pads_;
    std::int64_t images_;
    bool conv_ = false;
    bool pool_ = false;
    int lanes_ = 1;
    int I_ = 1;
    std::int64_t S_ = 1;
    int groups_ = 1;
    std::int64_t Z_ = 0;
    std::int64_t P_ = 1;
    std::int64_t latency_ = 0;
    std::vector<KpuUnit> units_;
    std::vector<std::int64_t> acc_;
    std::vector<std::int64_t> x_;
    std::string x_sig_;
    std::string pad_sig_;

    std::int64_t pos_ = 0;
    std::int64_t kappa_ = 0;
    bool in_pos_ = false;
    bool is_data_ = false;
    std::int64_t zeros_left_ = 0;
    std::int64_t pixel_ = 0;
    std::int64_t pixel_in_image_ = 0;
};

// Pointwise and fully connected layers on FCUs.
class FcuLayer : public LayerSim {
public:
    FcuLayer(const LayerPlan& lp, const LayerWeights& w, CycleTrace& trace, std::size_t images)
        : LayerSim(lp, trace, images), w_(w) {
        const LayerSpec& l = lp.layer;
        ports.emplace_back(l.d_in);
        const FcuAllocation& a = *lp.units.fcu;
        fc_ = l.kind == LayerKind::FullyConnected;
        V_ = l.flat_in();
        j_ = a.j;
        h_ = a.h;
        nb_ = V_ / j_;
        vectors_per_image_ = fc_ ? 1 : std::int64_t{l.f} * l.f;
        stats.steps_per_position = h_ * nb_;
        std::vector<std::int64_t> bank(static_cast<std::size_t>(j_));
        for (int u = 0; u < a.n_fcu; ++u) {
            FcuUnit unit(j_, h_, h_ * nb_);
            for (std::int64_t b = 0; b < nb_; ++b)
                for (std::int64_t i = 0; i < h_; ++i) {
                    std::int64_t o = u * h_ + i;
                    for (std::int64_t q = 0; q < j_; ++q)
                        bank[static_cast<std::size_t>(q)] = w.kernel[static_cast<std::size_t>(o * V_ + b * j_ + q)];
                    unit.set_weights(b * h_ + i, bank);
                }
            units_.push_back(std::move(unit));
        }
        hold_.assign(static_cast<std::size_t>(j_), 0);
        x_sig_ = l.name + ".x";
    }

    std::int64_t busy_per_image() const override { return h_ * nb_ * vectors_per_image_; }

    void step(std::int64_t t) override {
        const LayerSpec& l = lp_.layer;
        Port& in = ports[0];
        if (!loaded_) {
            for (std::int64_t q = 0; q < j_; ++q) {
                auto [px, ch] = locate(b_ * j_ + q);
                if (!in.has(px, ch))
                    return;
            }
            for (std::int64_t q = 0; q < j_; ++q) {
                auto [px, ch] = locate(b_ * j_ + q);
                hold_[static_cast<std::size_t>(q)] = in.get(px, ch);
            }
            loaded_ = true;
            probe_.observe((vec_ % vectors_per_image_) * nb_ + b_, vectors_per_image_ * nb_, t, stats.steps);
        }
        if (trace_.enabled())
            for (std::int64_t q = 0; q < j_; ++q)
                record(t, x_sig_, j_ > 1 ? static_cast<int>(q) : -1, hold_[static_cast<std::size_t>(q)]);
        for (std::size_t u = 0; u < units_.size(); ++u) {
            std::int64_t o = static_cast<std::int64_t>(u) * h_ + i_;
            std::int64_t pre = w_.bias.empty() ? 0 : w_.bias[static_cast<std::size_t>(o)];
            std::int64_t sum = units_[u].step(hold_, b_ * h_ + i_, pre);
            check_width(sum, lp_.widths.accumulator_bits, l.name);
            if (b_ == nb_ - 1)
                emit(t, static_cast<int>(o), sum);
        }
        ++stats.steps;
        if (++i_ == h_) {
            i_ = 0;
            loaded_ = false;
            if (++b_ == nb_) {
                b_ = 0;
                ++vec_;
                in.release_below(fc_ ? vec_ * l.f * l.f : vec_);
                if (vec_ % vectors_per_image_ == 0)
                    stats.utilization = probe_.last;
            }
        }
    }

private:
    std::pair<std::int64_t, int> locate(std::int64_t q) const {
        if (!fc_)
            return {vec_, static_cast<int>(q)};
        const LayerSpec& l = lp_.layer;
        return {vec_ * l.f * l.f + q / l.d_in, static_cast<int>(q % l.d_in)};
    }

    const LayerWeights& w_;
    bool fc_ = false;
    std::int64_t V_ = 1;
    std::int64_t j_ = 1;
    std::int64_t h_ = 1;
    std::int64_t nb_ = 1;
    std::int64_t vectors_per_image_ = 1;
    std::vector<FcuUnit> units_;
    std::vector<std::int64_t> hold_;
    std::string x_sig_;

    std::int64_t vec_ = 0;
    std::int64_t b_ = 0;
    std::int64_t i_ = 0;
    bool loaded_ = false;
};

class ResidualLayer : public LayerSim {
public:
    ResidualLayer(const LayerPlan& lp, CycleTrace& trace, std::size_t images) : LayerSim(lp, trace, images) {
        ports.emplace_back(lp.layer.d_in);
        ports.emplace_back(lp.layer.d_in);
        lanes_ = lp.units.lanes;
        S_ = lp.C();
        stats.steps_per_position = S_;
    }

    std::int64_t busy_per_image() const override { return S_ * lp_.layer.f * lp_.layer.f; }

    void step(std::int64_t t) override {
        const LayerSpec& l = lp_.layer;
        for (int lane = 0; lane < lanes_; ++lane) {
            std::int64_t ch = lane * S_ + m_;
            if (ch < l.d_in && (!ports[0].has(pixel_, static_cast<int>(ch)) || !ports[1].has(pixel_, static_cast<int>(ch))))
                return;
        }
        std::int64_t f2 = std::int64_t{l.f} * l.f;
        if (m_ == 0)
            probe_.observe(pixel_ % f2, f2, t, stats.steps);
        for (int lane = 0; lane < lanes_; ++lane) {
            std::int64_t ch = lane * S_ + m_;
            if (ch >= l.d_in)
                continue;
            int c = static_cast<int>(ch);
            emit(t, c, ports[0].get(pixel_, c) + ports[1].get(pixel_, c));
        }
        ++stats.steps;
        if (++m_ == S_) {
            m_ = 0;
            ++pixel_;
            ports[0].release_below(pixel_);
            ports[1].release_below(pixel_);
            if (pixel_ % f2 == 0)
                stats.utilization = probe_.last;
        }
    }

private:
    int lanes_ = 1;
    std::int64_t S_ = 1;
    std::int64_t m_ = 0;
    std::int64_t pixel_ = 0;
};

void check_inputs(const ArchitecturePlan& plan, const NetworkWeights& weights, const std::vector<Tensor3>& images) {
    const NetworkSpec& spec = plan.spec;
    if (plan.layers.size() != spec.layers.size() || spec.layers.empty())
        throw ConfigurationError("plan does not match its network");
    if (weights.layers.size() != spec.layers.size())
        throw ConfigurationError(fmt::format("weights cover {} layers, network has {}", weights.layers.size(), spec.layers.size()));
    for (std::size_t i = 0; i < spec.layers.size(); ++i) {
        const LayerSpec& l = spec.layers[i];
        if (!(plan.layers[i].layer == l))
            throw ConfigurationError(fmt::format("plan layer {} does not match the network", i));
        if (weights.layers[i].kernel.size() != kernel_size(l) || weights.layers[i].bias.size() != bias_size(l))
            throw ConfigurationError(fmt::format("layer {}: weight shape does not match the network", l.name));
    }
    for (const auto& x : images)
        if (x.height != spec.input.height || x.width != spec.input.width || x.channels != spec.input.channels)
            throw ConfigurationError(fmt::format("input tensor {}x{}x{} does not match network input {}x{}x{}", x.height,
                                                 x.width, x.channels, spec.input.height, spec.input.width,
                                                 spec.input.channels));
    if (images.empty())
        throw ConfigurationError("no input images");
    const QuantFormat& q = spec.quant;
    std::int64_t lo = q.is_signed ? min_signed(q.activation_bits) : 0;
    std::int64_t hi = q.is_signed ? max_signed(q.activation_bits) : (std::int64_t{1} << q.activation_bits) - 1;
    for (std::size_t i = 0; i < images.size(); ++i)
        for (auto v : images[i].data)
            if (v < lo || v > hi)
                throw ConfigurationError(fmt::format("image {}: input value {} outside [{}, {}]", i, v, lo, hi));
}

} // namespace

SimResult simulate_network(const ArchitecturePlan& plan, const NetworkWeights& weights,
                           const std::vector<Tensor3>& images, const SimOptions& options) {
    check_inputs(plan, weights, images);
    const NetworkSpec& spec = plan.spec;
    SimResult res;
    res.trace = CycleTrace(options.trace_signals);

    std::vector<std::unique_ptr<LayerSim>> layers;
    for (std::size_t i = 0; i < plan.layers.size(); ++i) {
        const LayerPlan& lp = plan.layers[i];
        const LayerSpec& l = lp.layer;
        if (l.is_sliding())
            layers.push_back(std::make_unique<SlidingLayer>(lp, weights.layers[i], res.trace, images.size(), options.disable_pad_gates));
        else if (l.is_fcu())
            layers.push_back(std::make_unique<FcuLayer>(lp, weights.layers[i], res.trace, images.size()));
        else if (l.kind == LayerKind::ResidualAdd)
            layers.push_back(std::make_unique<ResidualLayer>(lp, res.trace, images.size()));
        else
            throw ConfigurationError(fmt::format("layer {}: kind cannot be simulated", l.name));
    }
    const LayerSpec& last = spec.layers.back();
    Collector collector(last.out_f(), last.d_out, images.size());
    for (std::size_t i = 0; i < layers.size(); ++i) {
        if (i + 1 < layers.size())
            layers[i]->sinks.push_back({&layers[i + 1]->ports[0], nullptr});
        else
            layers[i]->sinks.push_back({nullptr, &collector});
        if (auto src = spec.layers[i].residual_source)
            layers[static_cast<std::size_t>(*src)]->sinks.push_back({&layers[i]->ports[1], nullptr});
    }

    std::int64_t period = plan.cycles_per_inference;
    for (const auto& l : layers)
        period = std::max(period, l->busy_per_image());
    res.stats.cycles_per_inference = period;

    const std::int64_t features = std::int64_t{spec.input.height} * spec.input.width * spec.input.channels;
    const Rate r0 = spec.input_rate;
    const int d0 = spec.input.channels;
    const bool trace_input = res.trace.wants("input.x");
    std::int64_t sent = 0;
    std::int64_t max_cycles = options.max_cycles > 0
                                  ? options.max_cycles
                                  : period * static_cast<std::int64_t>(images.size() + layers.size() + 2) * 2 + 10000;
    Port& first = layers.front()->ports[0];

    std::int64_t t = 0;
    for (;; ++t) {
        for (auto& l : layers)
            for (auto& p : l->ports)
                p.commit();
        std::int64_t img = t / period;
        if (img < static_cast<std::int64_t>(images.size())) {
            std::int64_t local = t - img * period;
            // Bresenham schedule: floor((local+1) * r0) features by the end of this cycle.
            std::int64_t target = std::min(features, (local + 1) * r0.num() / r0.den());
            if (local == 0)
                sent = 0;
            const Tensor3& x = images[static_cast<std::size_t>(img)];
            for (; sent < target; ++sent) {
                int ch = static_cast<int>(sent % d0);
                std::int64_t v = x.data[static_cast<std::size_t>(sent)];
                first.put(ch, v);
                if (trace_input)
                    res.trace.record({t, "input.x", d0 > 1 ? ch : -1, v, true, 0});
            }
        }
        for (auto& l : layers)
            l->step(t);
        if (collector.complete())
            break;
        if (t >= max_cycles)
            throw ConfigurationError(fmt::format("simulation did not complete within {} cycles", max_cycles));
    }

    res.stats.cycles = t + 1;
    res.stats.first_output_latency = collector.first_;
    res.stats.image_done_cycle = collector.done_at_;
    for (auto& l : layers) {
        l->stats.fifo_high_water = l->high_water();
        res.stats.layers.push_back(l->stats);
    }
    res.outputs = std::move(collector.outputs_);
    return res;
}

std::vector<Rate> measure_utilization(const SimResult& result, const ArchitecturePlan& plan) {
    if (result.stats.layers.size() != plan.layers.size())
        throw ConfigurationError("simulation result does not belong to this plan");
    std::vector<Rate> out;
    for (const auto& l : result.stats.layers)
        out.push_back(l.utilization);
    return out;
}

} // namespace cflow::sim
