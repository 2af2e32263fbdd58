#pragma once

#include "ore/attacks.hpp"
#include "ore/cost.hpp"
#include "ore/verifier.hpp"
#include "ore/word_set.hpp"

#include <cstddef>
#include <set>
#include <vector>

namespace ore {

/// Counterexample difference sets over positions {0..universe-1}.
class HittingSetFamily {
public:
    explicit HittingSetFamily(std::size_t universe) : universe_(universe) {}

    /// Returns false for a set already present. Throws InvalidInput on an
    /// empty set and InvalidIndex on a position outside the universe.
    bool add(WordSet set);

    std::size_t universe() const noexcept { return universe_; }
    std::size_t size() const noexcept { return sets_.size(); }
    bool empty() const noexcept { return sets_.empty(); }
    const std::vector<WordSet>& sets() const noexcept { return sets_; }
    bool hit_by(const WordSet& candidate) const;

private:
    std::size_t universe_;
    std::vector<WordSet> sets_;
    std::set<WordSet> seen_;
};

/// Exact minimum-cost hitting set containing `required`. Among equal costs
/// (1e-9 relative) the smaller set wins, then the lexicographically smaller.
/// Branch and bound: greedy initial solution, disjoint-set lower bound,
/// include/exclude branching on the element hitting the most open sets.
WordSet minimum_hitting_set(const HittingSetFamily& family, const CostFunction& cost, const WordSet& required = {});

struct HsOptions {
    bool use_attacks = true;
    std::size_t attack_batch = 8;
    AttackConfig attack;
    std::size_t max_iterations = 100000;
    /// When set, receives the final family of counterexample supports.
    HittingSetFamily* record = nullptr;
};

/// Optimal robust explanation by implicit hitting sets: propose the minimum
/// hitting set of all counterexample supports seen so far, verify it, and on
/// failure add the counterexample's support plus a batch of sparse-attack
/// supports. Include constraints are forced into every proposal; exclude
/// constraints lift the cost of excluded words above any feasible solution.
/// Throws Infeasible when the excluded words are needed, ResourceExhausted
/// on a verifier budget or iteration cap.
Explanation ore_hs(EntailmentOracle& oracle, const CostFunction& cost, const ConstraintSpec& constraints = {},
                   const HsOptions& options = {});

} // namespace ore
