#pragma once

#include <boost/rational.hpp>

#include <compare>
#include <cstdint>
#include <string>
#include <string_view>

namespace cflow {

// Exact non-negative rational, used for data rates and utilizations.
class Rate {
public:
    using int_type = std::int64_t;

    Rate() = default;
    Rate(int_type num, int_type den = 1);

    // Accepts "n", "n/d" or a finite decimal such as "0.25".
    static Rate parse(std::string_view text);

    int_type num() const { return v_.numerator(); }
    int_type den() const { return v_.denominator(); }

    int_type ceil() const;
    int_type floor() const;
    bool is_integer() const { return v_.denominator() == 1; }
    bool is_zero() const { return v_.numerator() == 0; }

    Rate reciprocal() const;

    // "4/9", "8"
    std::string str() const;
    // Two decimals unless integral: "0.44", "0.02", "8".
    std::string display() const;
    // Reports only.
    double to_double() const;

    friend Rate operator+(Rate a, Rate b) { return Rate(a.v_ + b.v_); }
    friend Rate operator*(Rate a, Rate b) { return Rate(a.v_ * b.v_); }
    friend Rate operator/(Rate a, Rate b);
    friend Rate operator*(Rate a, int_type b) { return Rate(a.v_ * b); }
    friend Rate operator/(Rate a, int_type b);

    friend bool operator==(Rate a, Rate b) { return a.v_ == b.v_; }
    friend std::strong_ordering operator<=>(Rate a, Rate b);

private:
    explicit Rate(boost::rational<int_type> v) : v_(v) {}
    boost::rational<int_type> v_{0};
};

inline Rate min(Rate a, Rate b) { return b < a ? b : a; }
inline Rate max(Rate a, Rate b) { return a < b ? b : a; }

std::int64_t ceil_div(std::int64_t a, std::int64_t b);

} // namespace cflow
