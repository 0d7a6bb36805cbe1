#include "cflow/io.hpp"

#include "cflow/errors.hpp"
#include "cflow/oracle.hpp"

#include <fmt/format.h>
#include <json.hpp>

#include <array>
#include <cstring>
#include <fstream>
#include <sstream>

namespace cflow {

using nlohmann::json;

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw ParseError("", fmt::format("cannot open '{}'", path));
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

json parse_doc(std::string_view text) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError("", fmt::format("malformed document: {}", e.what()));
    }
}

// Flattens a nested array whose shape must equal `dims`.
void flatten(const json& j, const std::vector<std::size_t>& dims, std::size_t depth, const std::string& path,
             std::vector<std::int64_t>& out) {
    if (depth == dims.size()) {
        if (!j.is_number_integer())
            throw ParseError(path, "expected an integer");
        out.push_back(j.get<std::int64_t>());
        return;
    }
    if (!j.is_array() || j.size() != dims[depth])
        throw ParseError(path, fmt::format("expected an array of length {}", dims[depth]));
    for (std::size_t i = 0; i < j.size(); ++i)
        flatten(j[i], dims, depth + 1, fmt::format("{}[{}]", path, i), out);
}

json nest(const std::vector<std::int64_t>& flat, const std::vector<std::size_t>& dims, std::size_t depth,
          std::size_t& pos) {
    if (depth == dims.size())
        return flat[pos++];
    json arr = json::array();
    for (std::size_t i = 0; i < dims[depth]; ++i)
        arr.push_back(nest(flat, dims, depth + 1, pos));
    return arr;
}

std::vector<std::size_t> kernel_dims(const LayerSpec& l) {
    auto z = [](auto v) { return static_cast<std::size_t>(v); };
    switch (l.kind) {
    case LayerKind::Conv:
        return {z(l.d_out), z(l.d_in), z(l.k), z(l.k)};
    case LayerKind::DepthwiseConv:
        return {z(l.d_in), z(l.k), z(l.k)};
    case LayerKind::PointwiseConv:
        return {z(l.d_out), z(l.d_in)};
    case LayerKind::FullyConnected:
        return {z(l.d_out), z(l.flat_in())};
    default:
        return {};
    }
}

template <typename T>
void put_le(std::ostream& os, T v) {
    std::array<unsigned char, sizeof(T)> b{};
    auto u = static_cast<std::make_unsigned_t<T>>(v);
    for (std::size_t i = 0; i < sizeof(T); ++i)
        b[i] = static_cast<unsigned char>((u >> (8 * i)) & 0xff);
    os.write(reinterpret_cast<const char*>(b.data()), sizeof(T));
}

template <typename T>
T get_le(const unsigned char* p) {
    std::make_unsigned_t<T> u = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i)
        u |= static_cast<std::make_unsigned_t<T>>(p[i]) << (8 * i);
    return static_cast<T>(u);
}

} // namespace

NetworkWeights parse_weights(const NetworkSpec& spec, std::string_view text) {
    json doc = parse_doc(text);
    if (!doc.is_object())
        throw ParseError("", "weights document must be an object keyed by layer name");
    NetworkWeights nw;
    for (const auto& l : spec.layers) {
        LayerWeights lw;
        std::string path = "." + l.name;
        bool needs = l.has_weights();
        auto it = doc.find(l.name);
        if (!needs) {
            if (it != doc.end())
                throw ParseError(path, "layer has no weights");
            nw.layers.push_back(std::move(lw));
            continue;
        }
        if (it == doc.end() || !it->is_object())
            throw ParseError(path, "weights missing");
        if (!it->contains("kernel"))
            throw ParseError(path + ".kernel", "required array missing");
        flatten((*it)["kernel"], kernel_dims(l), 0, path + ".kernel", lw.kernel);
        if (l.has_bias()) {
            if (it->contains("bias"))
                flatten((*it)["bias"], {static_cast<std::size_t>(l.d_out)}, 0, path + ".bias", lw.bias);
            else
                lw.bias.assign(static_cast<std::size_t>(l.d_out), 0);
        } else if (it->contains("bias")) {
            throw ParseError(path + ".bias", "layer kind has no bias");
        }
        nw.layers.push_back(std::move(lw));
    }
    for (const auto& [key, _] : doc.items()) {
        bool known = false;
        for (const auto& l : spec.layers)
            known = known || l.name == key;
        if (!known)
            throw ParseError("." + key, "no such layer");
    }
    return nw;
}

NetworkWeights load_weights(const NetworkSpec& spec, const std::string& path) {
    return parse_weights(spec, read_file(path));
}

std::string serialize_weights(const NetworkSpec& spec, const NetworkWeights& weights) {
    json doc = json::object();
    for (std::size_t i = 0; i < spec.layers.size(); ++i) {
        const LayerSpec& l = spec.layers[i];
        if (!l.has_weights())
            continue;
        std::size_t pos = 0;
        json jl;
        jl["kernel"] = nest(weights.layers[i].kernel, kernel_dims(l), 0, pos);
        if (l.has_bias())
            jl["bias"] = weights.layers[i].bias;
        doc[l.name] = std::move(jl);
    }
    return doc.dump() + "\n";
}

Tensor3 parse_tensor(std::string_view text) {
    json doc = parse_doc(text);
    if (!doc.is_array() || doc.empty() || !doc[0].is_array() || doc[0].empty() || !doc[0][0].is_array())
        throw ParseError("", "expected a nested [height][width][channels] array");
    Tensor3 t;
    t.height = static_cast<int>(doc.size());
    t.width = static_cast<int>(doc[0].size());
    t.channels = static_cast<int>(doc[0][0].size());
    flatten(doc, {doc.size(), doc[0].size(), doc[0][0].size()}, 0, "", t.data);
    return t;
}

Tensor3 load_tensor(const std::string& path) { return parse_tensor(read_file(path)); }

std::string serialize_tensor(const Tensor3& t) {
    std::size_t pos = 0;
    json doc = nest(t.data,
                    {static_cast<std::size_t>(t.height), static_cast<std::size_t>(t.width),
                     static_cast<std::size_t>(t.channels)},
                    0, pos);
    return doc.dump() + "\n";
}

void write_fixture(const std::string& path, const Tensor3& t, int elem_bytes) {
    if (elem_bytes != 4 && elem_bytes != 8)
        throw std::invalid_argument("fixture element size must be 4 or 8 bytes");
    if (t.height > 0xffff || t.width > 0xffff || t.channels > 0xffff)
        throw std::invalid_argument("tensor too large for fixture header");
    std::ofstream os(path, std::ios::binary);
    if (!os)
        throw std::runtime_error(fmt::format("cannot write '{}'", path));
    os.write("CFT3", 4);
    put_le<std::uint16_t>(os, kFixtureVersion);
    put_le<std::uint16_t>(os, 0);
    put_le<std::uint16_t>(os, static_cast<std::uint16_t>(t.height));
    put_le<std::uint16_t>(os, static_cast<std::uint16_t>(t.width));
    put_le<std::uint16_t>(os, static_cast<std::uint16_t>(t.channels));
    put_le<std::uint16_t>(os, static_cast<std::uint16_t>(elem_bytes));
    for (auto v : t.data) {
        if (elem_bytes == 4) {
            if (v < INT32_MIN || v > INT32_MAX)
                throw std::invalid_argument("value does not fit a 4-byte fixture element");
            put_le<std::int32_t>(os, static_cast<std::int32_t>(v));
        } else {
            put_le<std::int64_t>(os, v);
        }
    }
}

Tensor3 read_fixture(const std::string& path) {
    std::string raw = read_file(path);
    if (raw.size() < 16 || std::memcmp(raw.data(), "CFT3", 4) != 0)
        throw ParseError("", fmt::format("'{}' is not a tensor fixture", path));
    auto p = reinterpret_cast<const unsigned char*>(raw.data());
    if (get_le<std::uint16_t>(p + 4) != kFixtureVersion)
        throw ParseError("", "unsupported fixture version");
    Tensor3 t(get_le<std::uint16_t>(p + 8), get_le<std::uint16_t>(p + 10), get_le<std::uint16_t>(p + 12));
    int eb = get_le<std::uint16_t>(p + 14);
    if (eb != 4 && eb != 8)
        throw ParseError("", "fixture element size must be 4 or 8");
    if (raw.size() != 16 + t.data.size() * static_cast<std::size_t>(eb))
        throw ParseError("", "fixture payload size does not match its header");
    for (std::size_t i = 0; i < t.data.size(); ++i) {
        const unsigned char* q = p + 16 + i * static_cast<std::size_t>(eb);
        t.data[i] = eb == 4 ? get_le<std::int32_t>(q) : get_le<std::int64_t>(q);
    }
    return t;
}

} // namespace cflow
