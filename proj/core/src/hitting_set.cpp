#include "ore/hitting_set.hpp"

#include "ore/constraints.hpp"
#include "ore/errors.hpp"

#include <algorithm>

namespace ore {

bool HittingSetFamily::add(WordSet set) {
    if (set.empty()) throw InvalidInput("hitting-set family members must be non-empty");
    if (set.indices().back() >= universe_)
        throw InvalidIndex("position " + std::to_string(set.indices().back()) + " outside the universe");
    if (!seen_.insert(set).second) return false;
    sets_.push_back(std::move(set));
    return true;
}

bool HittingSetFamily::hit_by(const WordSet& candidate) const {
    return std::all_of(sets_.begin(), sets_.end(), [&](const WordSet& s) { return s.intersects(candidate); });
}

namespace {

class MhsSearch {
public:
    MhsSearch(const HittingSetFamily& family, const CostFunction& cost)
        : sets_(family.sets()), cost_(cost), chosen_(family.universe(), false), banned_(family.universe(), false) {}

    WordSet run(const WordSet& required) {
        double c = 0.0;
        for (auto i : required) {
            chosen_[i] = true;
            c += cost_(i);
        }
        greedy(required);
        dfs(c, required.size());
        return WordSet(best_);
    }

private:
    bool is_hit(const WordSet& s) const {
        return std::any_of(s.begin(), s.end(), [&](std::size_t i) { return chosen_[i]; });
    }

    bool better(double c, const std::vector<std::size_t>& set) const {
        if (!have_best_) return true;
        if (!cost_equal(c, best_cost_)) return c < best_cost_;
        if (set.size() != best_.size()) return set.size() < best_.size();
        return set < best_;
    }

    void offer(double c) {
        std::vector<std::size_t> set;
        for (std::size_t i = 0; i < chosen_.size(); ++i) {
            if (chosen_[i]) set.push_back(i);
        }
        if (better(c, set)) {
            best_ = std::move(set);
            best_cost_ = c;
            have_best_ = true;
        }
    }

    void greedy(const WordSet& required) {
        std::vector<bool> in(chosen_);
        double c = cost_.total(required);
        while (true) {
            std::vector<std::size_t> degree(in.size(), 0);
            bool open = false;
            for (const auto& s : sets_) {
                if (std::any_of(s.begin(), s.end(), [&](std::size_t i) { return in[i]; })) continue;
                open = true;
                for (auto i : s) ++degree[i];
            }
            if (!open) break;
            std::size_t pick = 0;
            double score = -1.0;
            for (std::size_t i = 0; i < degree.size(); ++i) {
                const double r = static_cast<double>(degree[i]) / cost_(i);
                if (degree[i] > 0 && r > score) {
                    score = r;
                    pick = i;
                }
            }
            in[pick] = true;
            c += cost_(pick);
        }
        std::swap(chosen_, in);
        offer(c);
        std::swap(chosen_, in);
    }

    void dfs(double c, std::size_t card) {
        std::vector<const WordSet*> open;
        for (const auto& s : sets_) {
            if (!is_hit(s)) open.push_back(&s);
        }
        if (open.empty()) {
            offer(c);
            return;
        }

        // Pairwise disjoint open sets each need their own element.
        std::vector<bool> used(chosen_.size(), false);
        double bound = c;
        std::size_t needed = 0;
        for (const auto* s : open) {
            double cheapest = -1.0;
            bool disjoint = true;
            for (auto i : *s) {
                if (banned_[i]) continue;
                if (used[i]) {
                    disjoint = false;
                    break;
                }
                if (cheapest < 0.0 || cost_(i) < cheapest) cheapest = cost_(i);
            }
            if (cheapest < 0.0 && disjoint) return;  // every element banned
            if (!disjoint) continue;
            for (auto i : *s) used[i] = true;
            bound += cheapest;
            ++needed;
        }
        if (have_best_) {
            if (!cost_equal(bound, best_cost_) && bound > best_cost_) return;
            if (cost_equal(bound, best_cost_) && card + needed > best_.size()) return;
        }

        std::vector<std::size_t> degree(chosen_.size(), 0);
        for (const auto* s : open) {
            for (auto i : *s) {
                if (!banned_[i]) ++degree[i];
            }
        }
        const std::size_t pick =
            static_cast<std::size_t>(std::max_element(degree.begin(), degree.end()) - degree.begin());

        chosen_[pick] = true;
        dfs(c + cost_(pick), card + 1);
        chosen_[pick] = false;
        banned_[pick] = true;
        dfs(c, card);
        banned_[pick] = false;
    }

    const std::vector<WordSet>& sets_;
    const CostFunction& cost_;
    std::vector<bool> chosen_;
    std::vector<bool> banned_;
    std::vector<std::size_t> best_;
    double best_cost_ = 0.0;
    bool have_best_ = false;
};

} // namespace

WordSet minimum_hitting_set(const HittingSetFamily& family, const CostFunction& cost, const WordSet& required) {
    if (cost.size() != family.universe()) throw InvalidInput("cost function does not cover the universe");
    if (!required.empty() && required.indices().back() >= family.universe())
        throw InvalidIndex("required position outside the universe");
    return MhsSearch(family, cost).run(required);
}

Explanation ore_hs(EntailmentOracle& oracle, const CostFunction& cost, const ConstraintSpec& constraints,
                   const HsOptions& options) {
    const std::size_t n = oracle.num_words();
    if (cost.size() != n) throw InvalidInput("cost function length differs from the text length");
    constraints.validate(n);
    if (options.use_attacks) options.attack.validate();

    const VerifierStats before = oracle.stats();
    SolverTrace trace;
    trace.solver = "hs";
    std::size_t attack_rounds = 0;
    auto finish = [&](WordSet words) {
        const VerifierStats& now = oracle.stats();
        trace.entailment_queries = now.queries - before.queries;
        trace.splits = now.splits - before.splits;
        trace.attack_calls = now.attack_calls - before.attack_calls + attack_rounds;
        Explanation e;
        e.cost = cost.total(words);
        e.words = std::move(words);
        e.trace = trace;
        return e;
    };

    if (!constraints.exclude.empty()) {
        const auto r = oracle.check(WordSet::all(n).minus(constraints.exclude));
        if (r.is_exhausted()) throw ResourceExhausted("verifier budget exhausted on the exclude check");
        if (r.is_counterexample()) throw Infeasible("the excluded words are needed for a robust explanation");
    }
    const CostFunction work = constraints.exclude.empty() ? cost : lift_exclude_cost(cost, constraints.exclude);

    HittingSetFamily family(n);
    for (std::size_t it = 0; it < options.max_iterations; ++it) {
        ++trace.iterations;
        WordSet candidate = minimum_hitting_set(family, work, constraints.include);
        const auto r = oracle.check(candidate);
        if (r.is_robust()) {
            if (candidate.intersects(constraints.exclude))
                throw Infeasible("the excluded words are needed for a robust explanation");
            if (options.record) *options.record = family;
            return finish(std::move(candidate));
        }
        if (r.is_exhausted())
            throw ResourceExhausted("verifier budget exhausted on candidate " + candidate.to_string());

        ++trace.counterexamples;
        WordSet diff = counterexample_diff(oracle.space().text(), r.counterexample().point);
        if (diff.empty()) diff = candidate.complement(n);
        family.add(std::move(diff));

        if (options.use_attacks && options.attack_batch > 0) {
            AttackConfig cfg = options.attack;
            cfg.seed = options.attack.seed + it;
            ++attack_rounds;
            for (auto& a : sparse_attack_batch(oracle.network(), oracle.space(), candidate, oracle.target(), cfg,
                                               options.attack_batch)) {
                if (family.add(std::move(a.support))) ++trace.attack_supports;
            }
        }
    }
    throw ResourceExhausted("hitting-set iteration cap of " + std::to_string(options.max_iterations) + " reached");
}

} // namespace ore
