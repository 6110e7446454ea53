#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "metaq/rational.hpp"

namespace metaq {

/// Multilinear polynomial over n Boolean variables, stored as a sparse map
/// from variable subsets (bitmask) to nonzero rational coefficients.
class MultilinearPoly {
public:
    explicit MultilinearPoly(int n = 0) : n_(n) {}

    static MultilinearPoly constant(int n, const Rational& c);
    static MultilinearPoly variable(int n, int i);
    /// The unique multilinear polynomial agreeing with a full table over
    /// {0,1}^n (values indexed by assignment bitmask), via the Moebius
    /// transform.
    static MultilinearPoly interpolate(int n, const std::vector<Rational>& values);

    int var_count() const { return n_; }
    /// Max subset size with nonzero coefficient; 0 for the zero polynomial.
    int degree() const;
    const std::map<std::uint32_t, Rational>& terms() const { return coeffs_; }
    const Rational& coeff(std::uint32_t subset) const;
    void set_coeff(std::uint32_t subset, const Rational& c);

    Rational eval(std::uint32_t x) const;
    std::vector<Rational> table() const;  // values on all 2^n assignments

    MultilinearPoly operator+(const MultilinearPoly& o) const;
    MultilinearPoly operator-(const MultilinearPoly& o) const;
    /// Product reduced over the cube (x_i^2 = x_i), so the result stays
    /// multilinear and agrees pointwise.
    MultilinearPoly operator*(const MultilinearPoly& o) const;
    MultilinearPoly scaled(const Rational& c) const;

    /// Re-embeds into `new_n` variables, variable i becoming var_map[i].
    MultilinearPoly lifted(int new_n, const std::vector<int>& var_map) const;

    bool operator==(const MultilinearPoly& o) const = default;
    bool is_zero() const { return coeffs_.empty(); }

    /// Term list like "1/2 * x0 x2" joined with " + "; "0/1" when zero.
    std::string str() const;
    static MultilinearPoly parse(int n, const std::string& text);

private:
    int n_;
    std::map<std::uint32_t, Rational> coeffs_;
};

/// Ratio of multilinear polynomials with Q nonzero on the whole cube
/// (checked exhaustively at construction).
class RationalFunction {
public:
    RationalFunction(MultilinearPoly p, MultilinearPoly q);
    static RationalFunction constant(int n, const Rational& c);
    static RationalFunction from_poly(MultilinearPoly p);

    const MultilinearPoly& p() const { return p_; }
    const MultilinearPoly& q() const { return q_; }
    int var_count() const { return p_.var_count(); }
    int degree() const { return std::max(p_.degree(), q_.degree()); }

    Rational eval(std::uint32_t x) const;
    /// eval clamped to [0, 1], the coin-bias convention for tree nodes.
    Rational eval_clamped(std::uint32_t x) const;

    RationalFunction lifted(int new_n, const std::vector<int>& var_map) const;

    bool operator==(const RationalFunction& o) const = default;
    std::string str() const;  // "(P) / (Q)"

private:
    MultilinearPoly p_;
    MultilinearPoly q_;
};

Rational clamp01(const Rational& v);

}  // namespace metaq
