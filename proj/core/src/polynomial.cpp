#include "metaq/polynomial.hpp"

#include <bit>
#include <sstream>

namespace metaq {

MultilinearPoly MultilinearPoly::constant(int n, const Rational& c) {
    MultilinearPoly p(n);
    p.set_coeff(0, c);
    return p;
}

MultilinearPoly MultilinearPoly::variable(int n, int i) {
    if (i < 0 || i >= n) throw DomainError("variable index out of range");
    MultilinearPoly p(n);
    p.set_coeff(std::uint32_t{1} << i, Rational(1));
    return p;
}

MultilinearPoly MultilinearPoly::interpolate(int n, const std::vector<Rational>& values) {
    if (n < 0 || n > 24) throw LimitExceeded("interpolation supports up to 24 variables");
    if (values.size() != (std::size_t{1} << n))
        throw DomainError("interpolation needs a complete table over {0,1}^n");
    std::vector<Rational> work = values;
    for (int i = 0; i < n; ++i) {
        std::uint32_t bit = std::uint32_t{1} << i;
        for (std::uint32_t mask = 0; mask < work.size(); ++mask) {
            if (mask & bit) work[mask] -= work[mask ^ bit];
        }
    }
    MultilinearPoly p(n);
    for (std::uint32_t mask = 0; mask < work.size(); ++mask) {
        if (!work[mask].is_zero()) p.coeffs_[mask] = work[mask];
    }
    return p;
}

int MultilinearPoly::degree() const {
    int d = 0;
    for (const auto& [mask, c] : coeffs_) d = std::max(d, std::popcount(mask));
    return d;
}

const Rational& MultilinearPoly::coeff(std::uint32_t subset) const {
    static const Rational zero;
    auto it = coeffs_.find(subset);
    return it == coeffs_.end() ? zero : it->second;
}

void MultilinearPoly::set_coeff(std::uint32_t subset, const Rational& c) {
    if (c.is_zero())
        coeffs_.erase(subset);
    else
        coeffs_[subset] = c;
}

Rational MultilinearPoly::eval(std::uint32_t x) const {
    Rational v;
    for (const auto& [mask, c] : coeffs_) {
        if ((mask & x) == mask) v += c;
    }
    return v;
}

std::vector<Rational> MultilinearPoly::table() const {
    std::vector<Rational> out(std::size_t{1} << n_);
    for (std::uint32_t x = 0; x < out.size(); ++x) out[x] = eval(x);
    return out;
}

MultilinearPoly MultilinearPoly::operator+(const MultilinearPoly& o) const {
    MultilinearPoly out = *this;
    for (const auto& [mask, c] : o.coeffs_) out.set_coeff(mask, out.coeff(mask) + c);
    return out;
}

MultilinearPoly MultilinearPoly::operator-(const MultilinearPoly& o) const {
    MultilinearPoly out = *this;
    for (const auto& [mask, c] : o.coeffs_) out.set_coeff(mask, out.coeff(mask) - c);
    return out;
}

MultilinearPoly MultilinearPoly::operator*(const MultilinearPoly& o) const {
    MultilinearPoly out(n_);
    for (const auto& [m1, c1] : coeffs_) {
        for (const auto& [m2, c2] : o.coeffs_) {
            std::uint32_t m = m1 | m2;
            out.set_coeff(m, out.coeff(m) + c1 * c2);
        }
    }
    return out;
}

MultilinearPoly MultilinearPoly::scaled(const Rational& c) const {
    MultilinearPoly out(n_);
    if (c.is_zero()) return out;
    for (const auto& [mask, v] : coeffs_) out.coeffs_[mask] = v * c;
    return out;
}

MultilinearPoly MultilinearPoly::lifted(int new_n, const std::vector<int>& var_map) const {
    if (static_cast<int>(var_map.size()) != n_) throw DomainError("variable map size mismatch");
    MultilinearPoly out(new_n);
    for (const auto& [mask, c] : coeffs_) {
        std::uint32_t m = 0;
        for (int i = 0; i < n_; ++i) {
            if (mask & (std::uint32_t{1} << i)) {
                if (var_map[i] < 0 || var_map[i] >= new_n)
                    throw DomainError("variable map target out of range");
                m |= std::uint32_t{1} << var_map[i];
            }
        }
        out.set_coeff(m, out.coeff(m) + c);
    }
    return out;
}

std::string MultilinearPoly::str() const {
    if (coeffs_.empty()) return "0/1";
    std::ostringstream out;
    bool first = true;
    for (const auto& [mask, c] : coeffs_) {
        if (!first) out << " + ";
        first = false;
        out << c.str();
        for (int i = 0; i < n_; ++i) {
            if (mask & (std::uint32_t{1} << i)) out << " * x" << i;
        }
    }
    return out.str();
}

MultilinearPoly MultilinearPoly::parse(int n, const std::string& text) {
    MultilinearPoly p(n);
    std::string term;
    std::istringstream in(text);
    std::string tok;
    Rational coeff;
    std::uint32_t mask = 0;
    bool have = false;
    auto flush = [&] {
        if (have) p.set_coeff(mask, p.coeff(mask) + coeff);
        mask = 0;
        have = false;
    };
    while (in >> tok) {
        if (tok == "+") {
            flush();
        } else if (tok == "*") {
            continue;
        } else if (tok.size() > 1 && tok[0] == 'x') {
            int i = std::stoi(tok.substr(1));
            if (i < 0 || i >= n) throw DomainError("variable index out of range in '" + text + "'");
            mask |= std::uint32_t{1} << i;
        } else {
            coeff = Rational::parse(tok);
            have = true;
        }
    }
    flush();
    return p;
}

RationalFunction::RationalFunction(MultilinearPoly p, MultilinearPoly q)
    : p_(std::move(p)), q_(std::move(q)) {
    if (p_.var_count() != q_.var_count())
        throw DomainError("numerator and denominator must share a variable count");
    if (q_.var_count() > 20) throw LimitExceeded("denominator check supports up to 20 variables");
    for (std::uint32_t x = 0; x < (std::uint32_t{1} << q_.var_count()); ++x) {
        if (q_.eval(x).is_zero())
            throw DomainError("denominator vanishes on assignment " + std::to_string(x));
    }
}

RationalFunction RationalFunction::constant(int n, const Rational& c) {
    return RationalFunction(MultilinearPoly::constant(n, c), MultilinearPoly::constant(n, Rational(1)));
}

RationalFunction RationalFunction::from_poly(MultilinearPoly p) {
    int n = p.var_count();
    return RationalFunction(std::move(p), MultilinearPoly::constant(n, Rational(1)));
}

Rational RationalFunction::eval(std::uint32_t x) const {
    return p_.eval(x) / q_.eval(x);
}

Rational RationalFunction::eval_clamped(std::uint32_t x) const {
    return clamp01(eval(x));
}

RationalFunction RationalFunction::lifted(int new_n, const std::vector<int>& var_map) const {
    return RationalFunction(p_.lifted(new_n, var_map), q_.lifted(new_n, var_map));
}

std::string RationalFunction::str() const {
    return "(" + p_.str() + ") / (" + q_.str() + ")";
}

Rational clamp01(const Rational& v) {
    if (v.sign() < 0) return Rational(0);
    if (v > Rational(1)) return Rational(1);
    return v;
}

}  // namespace metaq
