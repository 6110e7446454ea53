#pragma once

#include <optional>
#include <vector>

#include "metaq/rational.hpp"

namespace metaq {

/// Decides feasibility of { x : A x <= b } over free rational variables and
/// returns a witness when feasible. Exact phase-1 simplex with Bland's rule;
/// sized for the desk-scale systems of the rational-degree solver.
std::optional<std::vector<Rational>> solve_linear_feasibility(
    const std::vector<std::vector<Rational>>& A, const std::vector<Rational>& b);

}  // namespace metaq
