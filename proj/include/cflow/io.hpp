#pragma once

#include "cflow/netspec.hpp"
#include "cflow/tensor.hpp"

#include <string>
#include <string_view>

namespace cflow {

// {"<layer name>": {"kernel": nested array, "bias": [..]}, ...}
NetworkWeights parse_weights(const NetworkSpec& spec, std::string_view text);
NetworkWeights load_weights(const NetworkSpec& spec, const std::string& path);
std::string serialize_weights(const NetworkSpec& spec, const NetworkWeights& weights);

// Nested [height][width][channels] array.
Tensor3 parse_tensor(std::string_view text);
Tensor3 load_tensor(const std::string& path);
std::string serialize_tensor(const Tensor3& t);

// Binary fixture: 16-byte header then little-endian integers.
//   0  char[4] magic "CFT3"
//   4  u16 version (1)
//   6  u16 reserved
//   8  u16 height, u16 width, u16 channels
//  14  u16 element bytes (4 or 8)
inline constexpr std::uint16_t kFixtureVersion = 1;
void write_fixture(const std::string& path, const Tensor3& t, int elem_bytes = 4);
Tensor3 read_fixture(const std::string& path);

} // namespace cflow
