#pragma once

#include <cstdint>
#include <string_view>

// Integer rules shared by the oracle and the simulator.
namespace cflow {

// Average pooling is a depthwise convolution with weight floor(2^kAvgShift / k^2)
// followed by an arithmetic right shift of kAvgShift.
inline constexpr int kAvgShift = 16;

std::int64_t avg_weight(int k);
std::int64_t avg_finish(std::int64_t acc);

// Truncate a value of `from_bits` to its top `to_bits` (arithmetic shift).
std::int64_t requantize(std::int64_t v, int from_bits, int to_bits);

bool fits_signed(std::int64_t v, int bits);
// Throws OverflowError naming `where`.
void check_width(std::int64_t v, int bits, std::string_view where);

std::int64_t min_signed(int bits);
std::int64_t max_signed(int bits);

} // namespace cflow
