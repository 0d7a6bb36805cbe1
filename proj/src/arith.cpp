#include "cflow/arith.hpp"

#include "cflow/errors.hpp"

#include <fmt/format.h>

namespace cflow {

std::int64_t avg_weight(int k) { return (std::int64_t{1} << kAvgShift) / (std::int64_t{k} * k); }

std::int64_t avg_finish(std::int64_t acc) { return acc >> kAvgShift; }

std::int64_t requantize(std::int64_t v, int from_bits, int to_bits) {
    if (from_bits <= to_bits)
        return v;
    return v >> (from_bits - to_bits);
}

std::int64_t min_signed(int bits) { return bits >= 64 ? INT64_MIN : -(std::int64_t{1} << (bits - 1)); }

std::int64_t max_signed(int bits) { return bits >= 64 ? INT64_MAX : (std::int64_t{1} << (bits - 1)) - 1; }

bool fits_signed(std::int64_t v, int bits) { return v >= min_signed(bits) && v <= max_signed(bits); }

void check_width(std::int64_t v, int bits, std::string_view where) {
    if (!fits_signed(v, bits))
        throw OverflowError(fmt::format("{}: value {} exceeds {}-bit worst-case width", where, v, bits));
}

} // namespace cflow
