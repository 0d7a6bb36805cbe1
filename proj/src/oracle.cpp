#include "cflow/oracle.hpp"

#include "cflow/alloc.hpp"
#include "cflow/arith.hpp"
#include "cflow/errors.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <limits>
#include <random>
#include <stdexcept>

namespace cflow {

namespace {

void require(bool ok, const char* what) {
    if (!ok)
        throw std::invalid_argument(what);
}

int out_side(int f, int k, int s, int p) { return (f - k + 2 * p) / s + 1; }

} // namespace

Tensor3 ref_conv2d(const Tensor3& x, const std::vector<std::int64_t>& w, const std::vector<std::int64_t>& bias, int d_out,
                   int k, int s, int p) {
    require(x.height == x.width, "ref_conv2d: square input expected");
    require(w.size() == static_cast<std::size_t>(d_out) * x.channels * k * k, "ref_conv2d: kernel shape mismatch");
    require(bias.empty() || bias.size() == static_cast<std::size_t>(d_out), "ref_conv2d: bias shape mismatch");
    int f = x.height;
    int fo = out_side(f, k, s, p);
    int d_in = x.channels;
    Tensor3 y(fo, fo, d_out);
    for (int r = 0; r < fo; ++r)
        for (int c = 0; c < fo; ++c)
            for (int o = 0; o < d_out; ++o) {
                std::int64_t acc = bias.empty() ? 0 : bias[static_cast<std::size_t>(o)];
                for (int i = 0; i < d_in; ++i)
                    for (int ky = 0; ky < k; ++ky)
                        for (int kx = 0; kx < k; ++kx) {
                            int ir = r * s + ky - p;
                            int ic = c * s + kx - p;
                            if (ir < 0 || ir >= f || ic < 0 || ic >= f)
                                continue;
                            acc += w[((static_cast<std::size_t>(o) * d_in + i) * k + ky) * k + kx] * x.at(ir, ic, i);
                        }
                y.at(r, c, o) = acc;
            }
    return y;
}

Tensor3 ref_depthwise(const Tensor3& x, const std::vector<std::int64_t>& w, int k, int s, int p) {
    require(x.height == x.width, "ref_depthwise: square input expected");
    require(w.size() == static_cast<std::size_t>(x.channels) * k * k, "ref_depthwise: kernel shape mismatch");
    int f = x.height;
    int fo = out_side(f, k, s, p);
    Tensor3 y(fo, fo, x.channels);
    for (int r = 0; r < fo; ++r)
        for (int c = 0; c < fo; ++c)
            for (int ch = 0; ch < x.channels; ++ch) {
                std::int64_t acc = 0;
                for (int ky = 0; ky < k; ++ky)
                    for (int kx = 0; kx < k; ++kx) {
                        int ir = r * s + ky - p;
                        int ic = c * s + kx - p;
                        if (ir >= 0 && ir < f && ic >= 0 && ic < f)
                            acc += w[(static_cast<std::size_t>(ch) * k + ky) * k + kx] * x.at(ir, ic, ch);
                    }
                y.at(r, c, ch) = acc;
            }
    return y;
}

Tensor3 ref_maxpool(const Tensor3& x, int k, int s) {
    require(x.height == x.width && k <= x.height, "ref_maxpool: bad geometry");
    int fo = out_side(x.height, k, s, 0);
    Tensor3 y(fo, fo, x.channels);
    for (int r = 0; r < fo; ++r)
        for (int c = 0; c < fo; ++c)
            for (int ch = 0; ch < x.channels; ++ch) {
                std::int64_t m = std::numeric_limits<std::int64_t>::min();
                for (int ky = 0; ky < k; ++ky)
                    for (int kx = 0; kx < k; ++kx)
                        m = std::max(m, x.at(r * s + ky, c * s + kx, ch));
                y.at(r, c, ch) = m;
            }
    return y;
}

Tensor3 ref_avgpool(const Tensor3& x, int k, int s) {
    require(x.height == x.width && k <= x.height, "ref_avgpool: bad geometry");
    int fo = out_side(x.height, k, s, 0);
    std::int64_t wc = avg_weight(k);
    Tensor3 y(fo, fo, x.channels);
    for (int r = 0; r < fo; ++r)
        for (int c = 0; c < fo; ++c)
            for (int ch = 0; ch < x.channels; ++ch) {
                std::int64_t sum = 0;
                for (int ky = 0; ky < k; ++ky)
                    for (int kx = 0; kx < k; ++kx)
                        sum += x.at(r * s + ky, c * s + kx, ch);
                y.at(r, c, ch) = avg_finish(sum * wc);
            }
    return y;
}

std::vector<std::int64_t> ref_fc(const std::vector<std::int64_t>& x_flat, const std::vector<std::int64_t>& w,
                                 const std::vector<std::int64_t>& bias, int d_out) {
    require(w.size() == x_flat.size() * static_cast<std::size_t>(d_out), "ref_fc: weight shape mismatch");
    require(bias.empty() || bias.size() == static_cast<std::size_t>(d_out), "ref_fc: bias shape mismatch");
    std::vector<std::int64_t> y(static_cast<std::size_t>(d_out));
    for (std::size_t o = 0; o < y.size(); ++o) {
        std::int64_t acc = bias.empty() ? 0 : bias[o];
        for (std::size_t q = 0; q < x_flat.size(); ++q)
            acc += w[o * x_flat.size() + q] * x_flat[q];
        y[o] = acc;
    }
    return y;
}

Tensor3 ref_residual_add(const Tensor3& a, const Tensor3& b) {
    require(a.height == b.height && a.width == b.width && a.channels == b.channels, "ref_residual_add: shape mismatch");
    Tensor3 y = a;
    for (std::size_t i = 0; i < y.data.size(); ++i)
        y.data[i] += b.data[i];
    return y;
}

Tensor3 ref_layer(const LayerSpec& l, const LayerWeights& lw, const Tensor3& x, const Tensor3* shortcut) {
    if (x.height != l.f || x.channels != l.d_in)
        throw std::invalid_argument(fmt::format("layer {}: input shape ({},{}) does not match f={}, d_in={}", l.name,
                                                x.height, x.channels, l.f, l.d_in));
    switch (l.kind) {
    case LayerKind::Conv:
        return ref_conv2d(x, lw.kernel, lw.bias, l.d_out, l.k, l.s, l.p);
    case LayerKind::DepthwiseConv:
        if (l.constant_weights)
            return ref_avgpool(x, l.k, l.s);
        return ref_depthwise(x, lw.kernel, l.k, l.s, l.p);
    case LayerKind::MaxPool:
        return ref_maxpool(x, l.k, l.s);
    case LayerKind::AvgPool:
        return ref_avgpool(x, l.k, l.s);
    case LayerKind::PointwiseConv: {
        Tensor3 y(x.height, x.width, l.d_out);
        std::vector<std::int64_t> pix(static_cast<std::size_t>(l.d_in));
        for (int r = 0; r < x.height; ++r)
            for (int c = 0; c < x.width; ++c) {
                for (int ch = 0; ch < l.d_in; ++ch)
                    pix[static_cast<std::size_t>(ch)] = x.at(r, c, ch);
                auto out = ref_fc(pix, lw.kernel, lw.bias, l.d_out);
                for (int o = 0; o < l.d_out; ++o)
                    y.at(r, c, o) = out[static_cast<std::size_t>(o)];
            }
        return y;
    }
    case LayerKind::FullyConnected: {
        auto out = ref_fc(x.data, lw.kernel, lw.bias, l.d_out);
        Tensor3 y(1, 1, l.d_out);
        y.data = std::move(out);
        return y;
    }
    case LayerKind::ResidualAdd:
        if (!shortcut)
            throw std::invalid_argument(fmt::format("layer {}: residual input missing", l.name));
        return ref_residual_add(x, *shortcut);
    case LayerKind::DepthwiseSeparableConv:
        break;
    }
    throw std::invalid_argument(fmt::format("layer {}: kind must be lowered", l.name));
}

std::vector<Tensor3> ref_network_all(const NetworkSpec& spec, const NetworkWeights& weights, const Tensor3& x) {
    if (weights.layers.size() != spec.layers.size())
        throw std::invalid_argument("weights do not match the network");
    std::vector<Tensor3> outs;
    outs.reserve(spec.layers.size());
    int in_bits = input_bits(spec.quant);
    const Tensor3* cur = &x;
    for (std::size_t i = 0; i < spec.layers.size(); ++i) {
        const LayerSpec& l = spec.layers[i];
        const Tensor3* sc = l.residual_source ? &outs.at(static_cast<std::size_t>(*l.residual_source)) : nullptr;
        Tensor3 y = ref_layer(l, weights.layers[i], *cur, sc);
        LayerWidths w = layer_widths(l, in_bits, spec.quant);
        for (auto& v : y.data)
            v = finish_output(v, w);
        in_bits = w.output_bits;
        outs.push_back(std::move(y));
        cur = &outs.back();
    }
    return outs;
}

Tensor3 ref_network(const NetworkSpec& spec, const NetworkWeights& weights, const Tensor3& x) {
    return ref_network_all(spec, weights, x).back();
}

std::vector<std::int64_t> gen_random_values(std::size_t n, std::uint64_t seed, int bits, bool is_signed) {
    if (bits < 1 || bits > 62)
        throw std::invalid_argument("gen_random_values: bits must be in 1..62");
    std::mt19937_64 rng(seed);
    std::vector<std::int64_t> out(n);
    std::int64_t offset = is_signed ? (std::int64_t{1} << (bits - 1)) : 0;
    for (auto& v : out)
        v = static_cast<std::int64_t>(rng() >> (64 - bits)) - offset;
    return out;
}

Tensor3 gen_random_tensor(int h, int w, int c, std::uint64_t seed, int bits, bool is_signed) {
    Tensor3 t(h, w, c);
    t.data = gen_random_values(t.data.size(), seed, bits, is_signed);
    return t;
}

std::size_t kernel_size(const LayerSpec& l) { return static_cast<std::size_t>(l.weight_count()); }

std::size_t bias_size(const LayerSpec& l) { return l.has_bias() ? static_cast<std::size_t>(l.d_out) : 0; }

NetworkWeights gen_random_weights(const NetworkSpec& spec, std::uint64_t seed) {
    NetworkWeights nw;
    std::mt19937_64 seeder(seed);
    for (const auto& l : spec.layers) {
        LayerWeights lw;
        std::uint64_t ks = seeder();
        std::uint64_t bs = seeder();
        lw.kernel = gen_random_values(kernel_size(l), ks, spec.quant.weight_bits);
        lw.bias = gen_random_values(bias_size(l), bs, spec.quant.activation_bits);
        nw.layers.push_back(std::move(lw));
    }
    return nw;
}

NetworkWeights zero_weights(const NetworkSpec& spec) {
    NetworkWeights nw;
    for (const auto& l : spec.layers)
        nw.layers.push_back({std::vector<std::int64_t>(kernel_size(l), 0), std::vector<std::int64_t>(bias_size(l), 0)});
    return nw;
}

Tensor3 gen_random_input(const NetworkSpec& spec, std::uint64_t seed) {
    return gen_random_tensor(spec.input.height, spec.input.width, spec.input.channels, seed ^ 0x9e3779b97f4a7c15ULL,
                             spec.quant.activation_bits, spec.quant.is_signed);
}

} // namespace cflow
