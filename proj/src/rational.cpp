#include "cflow/rational.hpp"

#include <charconv>
#include <cmath>
#include <stdexcept>

#include <fmt/format.h>

namespace cflow {

namespace {

std::int64_t parse_int(std::string_view s, std::string_view whole) {
    std::int64_t v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || ec != std::errc() || ptr != s.data() + s.size())
        throw std::invalid_argument(fmt::format("invalid rate '{}'", whole));
    return v;
}

} // namespace

Rate::Rate(int_type num, int_type den) {
    if (den == 0)
        throw std::invalid_argument("rate denominator is zero");
    v_ = boost::rational<int_type>(num, den);
    if (v_ < 0)
        throw std::invalid_argument("rate is negative");
}

Rate Rate::parse(std::string_view text) {
    while (!text.empty() && text.front() == ' ')
        text.remove_prefix(1);
    while (!text.empty() && text.back() == ' ')
        text.remove_suffix(1);
    if (auto slash = text.find('/'); slash != std::string_view::npos)
        return Rate(parse_int(text.substr(0, slash), text), parse_int(text.substr(slash + 1), text));
    if (auto dot = text.find('.'); dot != std::string_view::npos) {
        std::string_view ip = text.substr(0, dot), fp = text.substr(dot + 1);
        if (fp.size() > 15)
            throw std::invalid_argument(fmt::format("invalid rate '{}'", text));
        int_type scale = 1;
        for (std::size_t i = 0; i < fp.size(); ++i)
            scale *= 10;
        int_type whole = ip.empty() ? 0 : parse_int(ip, text);
        int_type frac = fp.empty() ? 0 : parse_int(fp, text);
        return Rate(whole * scale + frac, scale);
    }
    return Rate(parse_int(text, text));
}

Rate::int_type Rate::ceil() const { return ceil_div(num(), den()); }

Rate::int_type Rate::floor() const { return num() / den(); }

Rate Rate::reciprocal() const {
    if (is_zero())
        throw std::domain_error("reciprocal of zero rate");
    return Rate(den(), num());
}

std::string Rate::str() const {
    if (is_integer())
        return std::to_string(num());
    return fmt::format("{}/{}", num(), den());
}

std::string Rate::display() const {
    if (is_integer())
        return std::to_string(num());
    return fmt::format("{:.2f}", to_double());
}

double Rate::to_double() const { return static_cast<double>(num()) / static_cast<double>(den()); }

Rate operator/(Rate a, Rate b) {
    if (b.is_zero())
        throw std::domain_error("division by zero rate");
    return Rate(a.v_ / b.v_);
}

Rate operator/(Rate a, Rate::int_type b) {
    if (b <= 0)
        throw std::domain_error("division by non-positive integer");
    return Rate(a.v_ / b);
}

std::strong_ordering operator<=>(Rate a, Rate b) {
    if (a.v_ < b.v_)
        return std::strong_ordering::less;
    if (b.v_ < a.v_)
        return std::strong_ordering::greater;
    return std::strong_ordering::equal;
}

std::int64_t ceil_div(std::int64_t a, std::int64_t b) {
    if (b <= 0 || a < 0)
        throw std::domain_error("ceil_div expects a >= 0, b > 0");
    return (a + b - 1) / b;
}

} // namespace cflow
