#include "cflow/netspec.hpp"

#include "cflow/errors.hpp"

#include <fmt/format.h>
#include <json.hpp>

#include <array>
#include <fstream>
#include <set>
#include <sstream>
#include <utility>

namespace cflow {

using nlohmann::json;

namespace {

struct KindName {
    LayerKind kind;
    std::string_view name;
};

constexpr std::array<KindName, 8> kKindNames{{
    {LayerKind::Conv, "conv"},
    {LayerKind::DepthwiseSeparableConv, "dwsep"},
    {LayerKind::DepthwiseConv, "depthwise"},
    {LayerKind::PointwiseConv, "pointwise"},
    {LayerKind::MaxPool, "maxpool"},
    {LayerKind::AvgPool, "avgpool"},
    {LayerKind::FullyConnected, "fc"},
    {LayerKind::ResidualAdd, "residual_add"},
}};

int get_int(const json& obj, const std::string& key, const std::string& path, std::optional<int> fallback) {
    auto it = obj.find(key);
    if (it == obj.end()) {
        if (!fallback)
            throw ParseError(path + "." + key, "required field missing");
        return *fallback;
    }
    if (!it->is_number_integer())
        throw ParseError(path + "." + key, "expected an integer");
    auto v = it->get<std::int64_t>();
    if (v < 0 || v > 1'000'000)
        throw ParseError(path + "." + key, fmt::format("value {} out of range", v));
    return static_cast<int>(v);
}

void reject_unknown(const json& obj, const std::string& path, std::initializer_list<std::string_view> keys) {
    for (const auto& [key, _] : obj.items()) {
        bool known = false;
        for (auto k : keys)
            known = known || key == k;
        if (!known)
            throw ParseError(path + "." + key, "unknown field");
    }
}

std::string layer_label(const NetworkSpec& spec, int idx) {
    if (idx < 0)
        return "the input";
    return fmt::format("layer {} ({})", idx, spec.layers[static_cast<std::size_t>(idx)].name);
}

} // namespace

std::string_view to_string(LayerKind kind) {
    for (const auto& kn : kKindNames)
        if (kn.kind == kind)
            return kn.name;
    return "unknown";
}

LayerKind layer_kind_from_string(std::string_view name) {
    for (const auto& kn : kKindNames)
        if (kn.name == name)
            return kn.kind;
    if (name == "depthwise_separable")
        return LayerKind::DepthwiseSeparableConv;
    if (name == "fully_connected")
        return LayerKind::FullyConnected;
    throw std::invalid_argument(fmt::format("unknown layer kind '{}'", name));
}

int output_side(int f, int k, int s, int p) {
    int span = f - k + 2 * p + 1;
    if (span <= 0 || s <= 0)
        return 0;
    return (span + s - 1) / s;
}

int LayerSpec::out_f() const {
    if (kind == LayerKind::FullyConnected)
        return 1;
    return output_side(f, k, s, p);
}

std::int64_t LayerSpec::flat_in() const {
    if (kind == LayerKind::FullyConnected)
        return std::int64_t{f} * f * d_in;
    return d_in;
}

bool LayerSpec::is_sliding() const {
    return kind == LayerKind::Conv || kind == LayerKind::DepthwiseConv || kind == LayerKind::MaxPool ||
           kind == LayerKind::AvgPool;
}

bool LayerSpec::is_fcu() const { return kind == LayerKind::PointwiseConv || kind == LayerKind::FullyConnected; }

bool LayerSpec::has_weights() const {
    switch (kind) {
    case LayerKind::Conv:
    case LayerKind::PointwiseConv:
    case LayerKind::FullyConnected:
        return true;
    case LayerKind::DepthwiseConv:
        return !constant_weights;
    default:
        return false;
    }
}

bool LayerSpec::has_bias() const {
    return kind == LayerKind::Conv || kind == LayerKind::PointwiseConv || kind == LayerKind::FullyConnected;
}

std::int64_t LayerSpec::weight_count() const {
    if (!has_weights())
        return 0;
    switch (kind) {
    case LayerKind::Conv:
        return std::int64_t{k} * k * d_in * d_out;
    case LayerKind::DepthwiseConv:
        return std::int64_t{k} * k * d_in;
    case LayerKind::PointwiseConv:
        return std::int64_t{d_in} * d_out;
    case LayerKind::FullyConnected:
        return flat_in() * d_out;
    default:
        return 0;
    }
}

std::int64_t LayerSpec::accumulated_terms() const {
    switch (kind) {
    case LayerKind::Conv:
        return std::int64_t{k} * k * d_in;
    case LayerKind::DepthwiseConv:
    case LayerKind::AvgPool:
        return std::int64_t{k} * k;
    case LayerKind::PointwiseConv:
    case LayerKind::FullyConnected:
        return flat_in();
    case LayerKind::ResidualAdd:
        return 2;
    default:
        return 1;
    }
}

NetworkSpec parse_network(std::string_view text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError("", fmt::format("malformed document: {}", e.what()));
    }
    if (!doc.is_object())
        throw ParseError("", "document must be an object");
    reject_unknown(doc, "", {"name", "input", "quant", "layers"});

    NetworkSpec spec;
    if (auto it = doc.find("name"); it != doc.end()) {
        if (!it->is_string())
            throw ParseError(".name", "expected a string");
        spec.name = it->get<std::string>();
    }

    if (!doc.contains("input") || !doc["input"].is_object())
        throw ParseError(".input", "required object missing");
    const json& in = doc["input"];
    reject_unknown(in, ".input", {"height", "width", "channels", "rate"});
    spec.input.height = get_int(in, "height", ".input", std::nullopt);
    spec.input.width = get_int(in, "width", ".input", spec.input.height);
    spec.input.channels = get_int(in, "channels", ".input", std::nullopt);
    if (spec.input.height != spec.input.width)
        throw ParseError(".input.width", "feature maps must be square");
    spec.input_rate = Rate(spec.input.channels);
    if (auto it = in.find("rate"); it != in.end()) {
        try {
            if (it->is_string())
                spec.input_rate = Rate::parse(it->get<std::string>());
            else if (it->is_number_integer())
                spec.input_rate = Rate(it->get<std::int64_t>());
            else
                throw ParseError(".input.rate", "expected a fraction string such as \"1/2\"");
        } catch (const std::invalid_argument& e) {
            throw ParseError(".input.rate", e.what());
        }
    }

    if (auto it = doc.find("quant"); it != doc.end()) {
        if (!it->is_object())
            throw ParseError(".quant", "expected an object");
        reject_unknown(*it, ".quant", {"weight_bits", "activation_bits", "signed", "requantize"});
        spec.quant.weight_bits = get_int(*it, "weight_bits", ".quant", 8);
        spec.quant.activation_bits = get_int(*it, "activation_bits", ".quant", 8);
        for (auto [key, field] : {std::pair{"signed", &spec.quant.is_signed}, std::pair{"requantize", &spec.quant.requantize}}) {
            if (auto f = it->find(key); f != it->end()) {
                if (!f->is_boolean())
                    throw ParseError(fmt::format(".quant.{}", key), "expected a boolean");
                *field = f->get<bool>();
            }
        }
    }

    if (!doc.contains("layers") || !doc["layers"].is_array())
        throw ParseError(".layers", "required array missing");

    // Document index -> index of the last lowered layer it produced.
    std::vector<int> doc_to_lowered;
    int cur_f = spec.input.height;
    int cur_d = spec.input.channels;
    std::set<std::string> names;
    std::size_t doc_idx = 0;
    for (const json& jl : doc["layers"]) {
        std::string path = fmt::format(".layers[{}]", doc_idx);
        if (!jl.is_object())
            throw ParseError(path, "expected an object");
        reject_unknown(jl, path, {"name", "group", "kind", "f", "k", "s", "p", "d_out", "residual_source"});
        if (!jl.contains("kind") || !jl["kind"].is_string())
            throw ParseError(path + ".kind", "required string missing");
        LayerKind kind;
        try {
            kind = layer_kind_from_string(jl["kind"].get<std::string>());
        } catch (const std::invalid_argument& e) {
            throw ParseError(path + ".kind", e.what());
        }

        LayerSpec l;
        l.kind = kind;
        l.name = jl.value("name", fmt::format("L{}", doc_idx));
        l.group = jl.value("group", l.name);
        l.f = get_int(jl, "f", path, cur_f);
        l.d_in = cur_d;
        bool pooling = kind == LayerKind::MaxPool || kind == LayerKind::AvgPool;
        bool unit_kernel = kind == LayerKind::PointwiseConv || kind == LayerKind::ResidualAdd;
        if (kind == LayerKind::FullyConnected) {
            l.k = get_int(jl, "k", path, l.f);
            l.s = get_int(jl, "s", path, l.f);
        } else if (unit_kernel) {
            l.k = get_int(jl, "k", path, 1);
            l.s = get_int(jl, "s", path, 1);
        } else {
            l.k = get_int(jl, "k", path, std::nullopt);
            l.s = get_int(jl, "s", path, pooling ? l.k : 1);
        }
        l.p = get_int(jl, "p", path, 0);
        bool keeps_channels = pooling || kind == LayerKind::DepthwiseConv || kind == LayerKind::ResidualAdd;
        l.d_out = get_int(jl, "d_out", path, keeps_channels ? std::optional<int>(l.d_in) : std::nullopt);
        if (auto it = jl.find("residual_source"); it != jl.end()) {
            if (!it->is_number_integer())
                throw ParseError(path + ".residual_source", "expected an integer");
            auto src = it->get<std::int64_t>();
            if (src < 0 || static_cast<std::size_t>(src) >= doc_idx)
                throw ParseError(path + ".residual_source", "must name an earlier layer");
            l.residual_source = doc_to_lowered[static_cast<std::size_t>(src)];
        } else if (kind == LayerKind::ResidualAdd) {
            throw ParseError(path + ".residual_source", "required for residual_add");
        }

        auto push = [&](LayerSpec ls) {
            if (!names.insert(ls.name).second)
                throw ParseError(path + ".name", fmt::format("duplicate layer name '{}'", ls.name));
            spec.layers.push_back(std::move(ls));
        };
        if (kind == LayerKind::DepthwiseSeparableConv) {
            LayerSpec dw = l;
            dw.kind = LayerKind::DepthwiseConv;
            dw.name = l.name + ".dw";
            dw.d_out = l.d_in;
            LayerSpec pw;
            pw.kind = LayerKind::PointwiseConv;
            pw.name = l.name + ".pw";
            pw.group = l.group;
            pw.f = dw.out_f();
            pw.d_in = l.d_in;
            pw.d_out = l.d_out;
            push(std::move(dw));
            push(std::move(pw));
        } else if (kind == LayerKind::AvgPool) {
            l.kind = LayerKind::DepthwiseConv;
            l.constant_weights = true;
            push(std::move(l));
        } else {
            push(std::move(l));
        }
        const LayerSpec& last = spec.layers.back();
        cur_f = last.out_f();
        cur_d = last.d_out;
        doc_to_lowered.push_back(static_cast<int>(spec.layers.size()) - 1);
        ++doc_idx;
    }

    auto diags = validate_network(spec);
    if (has_errors(diags)) {
        std::ostringstream os;
        bool first = true;
        for (const auto& d : diags) {
            if (d.severity != Severity::Error)
                continue;
            os << (first ? "" : "; ") << format_diagnostic(spec, d);
            first = false;
        }
        throw ValidationError(os.str());
    }
    return spec;
}

NetworkSpec load_network(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw ParseError("", fmt::format("cannot open '{}'", path));
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_network(ss.str());
}

std::string serialize_network(const NetworkSpec& spec) {
    json doc;
    if (!spec.name.empty())
        doc["name"] = spec.name;
    doc["input"] = {{"height", spec.input.height},
                    {"width", spec.input.width},
                    {"channels", spec.input.channels},
                    {"rate", spec.input_rate.str()}};
    doc["quant"] = {{"weight_bits", spec.quant.weight_bits},
                    {"activation_bits", spec.quant.activation_bits},
                    {"signed", spec.quant.is_signed},
                    {"requantize", spec.quant.requantize}};
    json layers = json::array();
    for (const auto& l : spec.layers) {
        json jl;
        jl["name"] = l.name;
        if (l.group != l.name)
            jl["group"] = l.group;
        jl["kind"] = l.constant_weights ? std::string("avgpool") : std::string(to_string(l.kind));
        jl["f"] = l.f;
        jl["k"] = l.k;
        jl["s"] = l.s;
        jl["p"] = l.p;
        jl["d_out"] = l.d_out;
        if (l.residual_source)
            jl["residual_source"] = *l.residual_source;
        layers.push_back(std::move(jl));
    }
    doc["layers"] = std::move(layers);
    return doc.dump(2) + "\n";
}

std::vector<Diagnostic> validate_network(const NetworkSpec& spec) {
    std::vector<Diagnostic> out;
    auto error = [&](int layer, std::string msg) { out.push_back({Severity::Error, layer, std::move(msg)}); };
    auto warn = [&](int layer, std::string msg) { out.push_back({Severity::Warning, layer, std::move(msg)}); };

    if (spec.input.height <= 0 || spec.input.channels <= 0)
        error(-1, "input dimensions must be positive");
    if (spec.input.height != spec.input.width)
        error(-1, "feature maps must be square");
    if (spec.input_rate.is_zero())
        error(-1, "input rate must be positive");
    if (spec.quant.weight_bits < 1 || spec.quant.weight_bits > 32 || spec.quant.activation_bits < 1 ||
        spec.quant.activation_bits > 32)
        error(-1, "quantization widths must be in 1..32 bits");
    if (spec.layers.empty()) {
        error(-1, "network has no layers");
        return out;
    }

    int prev_f = spec.input.height;
    int prev_d = spec.input.channels;
    for (std::size_t li = 0; li < spec.layers.size(); ++li) {
        const LayerSpec& l = spec.layers[li];
        int i = static_cast<int>(li);
        std::string prev = layer_label(spec, i - 1);
        if (l.f < 1 || l.k < 1 || l.s < 1 || l.p < 0 || l.d_in < 1 || l.d_out < 1) {
            error(i, "geometry fields must be positive (p non-negative)");
            prev_f = l.out_f();
            prev_d = l.d_out;
            continue;
        }
        if (l.f != prev_f)
            error(i, fmt::format("{} expects f={} but {} produces f={}", layer_label(spec, i), l.f, prev, prev_f));
        if (l.d_in != prev_d)
            error(i, fmt::format("{} expects d_in={} but {} produces d={}", layer_label(spec, i), l.d_in, prev, prev_d));
        if (l.k > l.f + 2 * l.p)
            error(i, fmt::format("kernel k={} exceeds f+2p={}", l.k, l.f + 2 * l.p));
        if (2 * l.p > l.k - 1)
            error(i, fmt::format("padding p={} exceeds (k-1)/2 for k={}", l.p, l.k));

        bool pooling = l.kind == LayerKind::MaxPool || l.constant_weights;
        switch (l.kind) {
        case LayerKind::DepthwiseSeparableConv:
        case LayerKind::AvgPool:
            error(i, fmt::format("kind '{}' must be lowered before planning", to_string(l.kind)));
            break;
        case LayerKind::Conv:
            if (2 * l.p != l.k - 1)
                warn(i, "output not continuous without padding");
            break;
        case LayerKind::DepthwiseConv:
            if (l.d_out != l.d_in)
                error(i, "depthwise layers require groups = d_in (d_out = d_in)");
            if (!l.constant_weights && 2 * l.p != l.k - 1)
                warn(i, "output not continuous without padding");
            break;
        case LayerKind::PointwiseConv:
            if (l.k != 1 || l.s != 1 || l.p != 0)
                error(i, "pointwise layers require k=1, s=1, p=0");
            break;
        case LayerKind::FullyConnected:
            if (l.k != l.f || l.s != l.f || l.p != 0)
                error(i, "fully connected layers require k=f=s and p=0");
            break;
        case LayerKind::ResidualAdd:
            if (l.k != 1 || l.s != 1 || l.p != 0 || l.d_out != l.d_in)
                error(i, "residual_add requires k=1, s=1, p=0 and d_out=d_in");
            if (!l.residual_source || *l.residual_source < 0 || *l.residual_source >= i) {
                error(i, "residual_add needs an earlier residual_source");
            } else {
                const LayerSpec& src = spec.layers[static_cast<std::size_t>(*l.residual_source)];
                if (src.out_f() != l.f || src.d_out != l.d_in)
                    error(i, fmt::format("{} merges shape ({},{}) with {} of shape ({},{})", layer_label(spec, i), l.f,
                                         l.d_in, layer_label(spec, *l.residual_source), src.out_f(), src.d_out));
            }
            break;
        case LayerKind::MaxPool:
            break;
        }
        if (l.residual_source && l.kind != LayerKind::ResidualAdd)
            error(i, "residual_source is only valid on residual_add layers");
        if (pooling) {
            if (l.s > l.k)
                error(i, fmt::format("pooling stride s={} exceeds k={}", l.s, l.k));
            if (l.p != 0)
                error(i, "pooling layers do not support padding");
            if (l.d_out != l.d_in)
                error(i, fmt::format("pooling preserves channels (d_in={}, d_out={})", l.d_in, l.d_out));
        }
        prev_f = l.out_f();
        prev_d = l.d_out;
    }
    return out;
}

bool has_errors(const std::vector<Diagnostic>& diags) {
    for (const auto& d : diags)
        if (d.severity == Severity::Error)
            return true;
    return false;
}

std::string format_diagnostic(const NetworkSpec& spec, const Diagnostic& d) {
    std::string where = d.layer < 0 || static_cast<std::size_t>(d.layer) >= spec.layers.size()
                            ? std::string("network")
                            : layer_label(spec, d.layer);
    return fmt::format("{}: {}: {}", d.severity == Severity::Error ? "error" : "warning", where, d.message);
}

} // namespace cflow
