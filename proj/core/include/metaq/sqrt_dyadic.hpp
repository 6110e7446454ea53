#pragma once

#include <string>

#include "metaq/rational.hpp"

namespace metaq {

/// Exact amplitude of a Hadamard+Toffoli circuit: mantissa / sqrt(2)^h.
///
/// Canonical form: zero is (0, 0); otherwise the mantissa is halved and h
/// reduced by 2 while both are possible. Canonicalization is idempotent.
class SqrtDyadic {
public:
    SqrtDyadic() = default;  // zero
    SqrtDyadic(BigInt mantissa, unsigned half_exponent);

    static SqrtDyadic zero() { return SqrtDyadic(); }
    static SqrtDyadic one() { return SqrtDyadic(1, 0); }

    const BigInt& mantissa() const { return mantissa_; }
    unsigned half_exponent() const { return half_exponent_; }
    bool is_zero() const { return mantissa_ == 0; }

    /// Exact sum. Half-exponents must agree modulo 2 unless one operand is
    /// zero; mixed parity cannot arise within one state vector.
    SqrtDyadic operator+(const SqrtDyadic& o) const;
    SqrtDyadic operator-() const;
    SqrtDyadic operator-(const SqrtDyadic& o) const { return *this + (-o); }

    /// |value|^2 = mantissa^2 / 2^h, always a dyadic rational.
    Rational prob() const;

    bool operator==(const SqrtDyadic& o) const = default;

    /// Renders as "m/sqrt2^h".
    std::string str() const;

    /// |value| >= threshold, decided exactly (compares squares).
    bool abs_at_least(const Rational& threshold) const;

private:
    void canonicalize();

    BigInt mantissa_ = 0;
    unsigned half_exponent_ = 0;
};

}  // namespace metaq
