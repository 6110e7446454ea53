#include "metaq/lp.hpp"

namespace metaq {

namespace {

// Dense phase-1 simplex tableau over exact rationals.
//
// Free variables are split x = u - v with u, v >= 0; each row gains a slack,
// and rows with negative right-hand side gain an artificial variable whose
// sum is minimized. Bland's rule guarantees termination.
class Phase1Simplex {
public:
    Phase1Simplex(const std::vector<std::vector<Rational>>& A, const std::vector<Rational>& b) {
        rows_ = A.size();
        n_free_ = A.empty() ? 0 : A[0].size();
        cols_ = 2 * n_free_ + rows_;  // u, v, slacks
        std::vector<std::size_t> artificial_rows;
        for (std::size_t r = 0; r < rows_; ++r) {
            if (b[r].sign() < 0) artificial_rows.push_back(r);
        }
        total_cols_ = cols_ + artificial_rows.size();
        tableau_.assign(rows_ + 1, std::vector<Rational>(total_cols_ + 1));
        basis_.assign(rows_, 0);

        for (std::size_t r = 0; r < rows_; ++r) {
            bool flip = b[r].sign() < 0;
            Rational sign(flip ? -1 : 1);
            for (std::size_t c = 0; c < n_free_; ++c) {
                tableau_[r][c] = A[r][c] * sign;
                tableau_[r][n_free_ + c] = -A[r][c] * sign;
            }
            tableau_[r][2 * n_free_ + r] = sign;  // slack (negated on flipped rows)
            tableau_[r][total_cols_] = b[r] * sign;
        }
        std::size_t art = cols_;
        for (std::size_t r : artificial_rows) {
            tableau_[r][art] = Rational(1);
            basis_[r] = art;
            ++art;
        }
        for (std::size_t r = 0; r < rows_; ++r) {
            if (b[r].sign() >= 0) basis_[r] = 2 * n_free_ + r;
        }
        // Objective: minimize sum of artificials. Express in terms of
        // non-basic columns by subtracting the artificial rows.
        for (std::size_t r : artificial_rows) {
            for (std::size_t c = 0; c <= total_cols_; ++c) {
                tableau_[rows_][c] -= tableau_[r][c];
            }
        }
        for (std::size_t a = cols_; a < total_cols_; ++a) tableau_[rows_][a] = Rational(0);
    }

    std::optional<std::vector<Rational>> solve() {
        while (true) {
            // Bland: smallest index with a negative reduced cost.
            std::size_t pivot_col = total_cols_;
            for (std::size_t c = 0; c < total_cols_; ++c) {
                if (tableau_[rows_][c].sign() < 0) {
                    pivot_col = c;
                    break;
                }
            }
            if (pivot_col == total_cols_) break;
            std::size_t pivot_row = rows_;
            Rational best;
            for (std::size_t r = 0; r < rows_; ++r) {
                if (tableau_[r][pivot_col].sign() <= 0) continue;
                Rational ratio = tableau_[r][total_cols_] / tableau_[r][pivot_col];
                if (pivot_row == rows_ || ratio < best ||
                    (ratio == best && basis_[r] < basis_[pivot_row])) {
                    pivot_row = r;
                    best = ratio;
                }
            }
            if (pivot_row == rows_) return std::nullopt;  // unbounded phase-1: cannot happen
            pivot(pivot_row, pivot_col);
        }
        if (!tableau_[rows_][total_cols_].is_zero()) return std::nullopt;  // infeasible

        std::vector<Rational> value(2 * n_free_ + rows_);
        for (std::size_t r = 0; r < rows_; ++r) {
            if (basis_[r] < value.size()) value[basis_[r]] = tableau_[r][total_cols_];
        }
        std::vector<Rational> x(n_free_);
        for (std::size_t c = 0; c < n_free_; ++c) x[c] = value[c] - value[n_free_ + c];
        return x;
    }

private:
    void pivot(std::size_t pr, std::size_t pc) {
        Rational inv = Rational(1) / tableau_[pr][pc];
        for (auto& v : tableau_[pr]) v *= inv;
        for (std::size_t r = 0; r <= rows_; ++r) {
            if (r == pr) continue;
            Rational factor = tableau_[r][pc];
            if (factor.is_zero()) continue;
            for (std::size_t c = 0; c <= total_cols_; ++c) {
                tableau_[r][c] -= factor * tableau_[pr][c];
            }
        }
        basis_[pr] = pc;
    }

    std::size_t rows_ = 0;
    std::size_t n_free_ = 0;
    std::size_t cols_ = 0;
    std::size_t total_cols_ = 0;
    std::vector<std::vector<Rational>> tableau_;
    std::vector<std::size_t> basis_;
};

}  // namespace

std::optional<std::vector<Rational>> solve_linear_feasibility(
    const std::vector<std::vector<Rational>>& A, const std::vector<Rational>& b) {
    if (A.size() != b.size()) throw DomainError("constraint matrix and rhs size mismatch");
    if (A.empty()) return std::vector<Rational>{};
    return Phase1Simplex(A, b).solve();
}

}  // namespace metaq
