#pragma once

#include "ore/cost.hpp"
#include "ore/verifier.hpp"
#include "ore/word_set.hpp"

#include <cstddef>
#include <vector>

namespace ore {

/// Search state of the maximum-universal-subset recursion. `bounded` words
/// are already free; `candidates` may still be freed, tried in list order.
struct MusState {
    WordSet bounded;
    std::vector<std::size_t> candidates;
    double lower_bound = 0.0;
};

struct MsaOptions {
    bool use_shrink = true;
};

/// Candidates ordered by cost descending, higher position first on ties.
std::vector<std::size_t> candidate_order(const CostFunction& cost, const WordSet& words);

/// Candidates that can each be freed on their own on top of `bounded`, in
/// their original order.
std::vector<std::size_t> shrink(EntailmentOracle& oracle, const WordSet& bounded,
                                const std::vector<std::size_t>& candidates);

/// Maximum-cost subset X of the candidates such that the prediction survives
/// freeing bounded ∪ X, or the empty set if no such subset costs more than
/// the state's lower bound. Throws ResourceExhausted.
WordSet mus(EntailmentOracle& oracle, const CostFunction& cost, const MusState& state, const MsaOptions& options = {});

/// Smallest-cost explanation as the complement of a maximum universal subset.
/// Include constraints are never candidates; excluded words start out free.
/// Throws Infeasible when freeing the excluded words already breaks the
/// prediction, ResourceExhausted on a verifier budget.
Explanation ore_msa(EntailmentOracle& oracle, const CostFunction& cost, const ConstraintSpec& constraints = {},
                    const MsaOptions& options = {});

/// Every robust subset whose cost equals `optimum`, lexicographically sorted.
/// Throws InvalidInput when more than 10^6 subsets match the cost.
std::vector<Explanation> enumerate_all_minimal(EntailmentOracle& oracle, const CostFunction& cost, double optimum);

} // namespace ore
