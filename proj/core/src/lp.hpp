#pragma once

#include "ore/bounds.hpp"

#include <optional>
#include <vector>

namespace ore::detail {

struct LpSolution {
    std::vector<double> point;
    double value = 0.0;
};

/// Minimise `objective` over the box intersected with {x : c(x) >= 0} for
/// every form c in `constraints`. Returns nullopt when the region is empty.
/// Dense two-phase simplex with Bland's rule.
std::optional<LpSolution> minimize(const LinearForm& objective, const Box& box,
                                   const std::vector<LinearForm>& constraints);

} // namespace ore::detail
