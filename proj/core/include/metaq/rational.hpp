#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <compare>
#include <cstdint>
#include <string>

#include "metaq/errors.hpp"

namespace metaq {

using BigInt = boost::multiprecision::cpp_int;

/// 2^k as a BigInt.
BigInt pow2(unsigned k);

/// True for 1, 2, 4, 8, ... (v must be positive).
bool is_power_of_two(const BigInt& v);

/// Exact rational number over arbitrary-precision integers.
///
/// Canonical form is maintained by every constructor and operation:
/// denominator > 0 and gcd(|num|, den) == 1. Values are immutable in spirit;
/// all operations return new values, so sharing across threads is safe.
class Rational {
public:
    Rational() : num_(0), den_(1) {}
    Rational(long long v) : num_(v), den_(1) {}
    Rational(BigInt num, BigInt den = BigInt(1));

    /// Parses "num/den" or a bare integer.
    static Rational parse(const std::string& text);

    const BigInt& num() const { return num_; }
    const BigInt& den() const { return den_; }

    bool is_zero() const { return num_ == 0; }
    bool is_integer() const { return den_ == 1; }
    /// Denominator is a power of two (2^0 counts).
    bool is_dyadic() const { return is_power_of_two(den_); }
    int sign() const { return num_ == 0 ? 0 : (num_ < 0 ? -1 : 1); }

    Rational operator-() const;
    Rational operator+(const Rational& o) const;
    Rational operator-(const Rational& o) const;
    Rational operator*(const Rational& o) const;
    Rational operator/(const Rational& o) const;  // throws DivisionByZeroError
    Rational& operator+=(const Rational& o) { return *this = *this + o; }
    Rational& operator-=(const Rational& o) { return *this = *this - o; }
    Rational& operator*=(const Rational& o) { return *this = *this * o; }
    Rational& operator/=(const Rational& o) { return *this = *this / o; }

    bool operator==(const Rational& o) const { return num_ == o.num_ && den_ == o.den_; }
    std::strong_ordering operator<=>(const Rational& o) const;

    Rational abs() const { return num_ < 0 ? -*this : *this; }

    /// Renders as "num/den"; the denominator is always present ("3/1").
    std::string str() const;
    /// Lossy conversion for reports and statistics only.
    double to_double() const;

private:
    void canonicalize();

    BigInt num_;
    BigInt den_;
};

inline Rational operator*(long long a, const Rational& b) { return Rational(a) * b; }

}  // namespace metaq
