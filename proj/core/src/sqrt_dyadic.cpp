#include "metaq/sqrt_dyadic.hpp"

namespace metaq {

SqrtDyadic::SqrtDyadic(BigInt mantissa, unsigned half_exponent)
    : mantissa_(std::move(mantissa)), half_exponent_(half_exponent) {
    canonicalize();
}

void SqrtDyadic::canonicalize() {
    if (mantissa_ == 0) {
        half_exponent_ = 0;
        return;
    }
    while (half_exponent_ >= 2 && (mantissa_ & 1) == 0) {
        mantissa_ >>= 1;
        half_exponent_ -= 2;
    }
}

SqrtDyadic SqrtDyadic::operator+(const SqrtDyadic& o) const {
    if (is_zero()) return o;
    if (o.is_zero()) return *this;
    if ((half_exponent_ & 1) != (o.half_exponent_ & 1)) {
        throw ParityMismatchError("cannot add sqrt-dyadics with half-exponents " +
                                  std::to_string(half_exponent_) + " and " +
                                  std::to_string(o.half_exponent_));
    }
    unsigned h = std::max(half_exponent_, o.half_exponent_);
    BigInt a = mantissa_ << ((h - half_exponent_) / 2);
    BigInt b = o.mantissa_ << ((h - o.half_exponent_) / 2);
    return SqrtDyadic(a + b, h);
}

SqrtDyadic SqrtDyadic::operator-() const {
    SqrtDyadic r = *this;
    r.mantissa_ = -r.mantissa_;
    return r;
}

Rational SqrtDyadic::prob() const {
    return Rational(mantissa_ * mantissa_, pow2(half_exponent_));
}

std::string SqrtDyadic::str() const {
    return mantissa_.str() + "/sqrt2^" + std::to_string(half_exponent_);
}

bool SqrtDyadic::abs_at_least(const Rational& threshold) const {
    if (threshold.sign() <= 0) return true;
    return prob() >= threshold * threshold;
}

}  // namespace metaq
