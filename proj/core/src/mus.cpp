#include "ore/mus.hpp"

#include "ore/errors.hpp"

#include <algorithm>
#include <numeric>

namespace ore {

namespace {

bool robust(EntailmentOracle& oracle, const WordSet& freed) {
    const auto r = oracle.check(freed.complement(oracle.num_words()));
    if (r.is_exhausted()) throw ResourceExhausted("verifier budget exhausted freeing " + freed.to_string());
    return r.is_robust();
}

double total(const CostFunction& cost, const std::vector<std::size_t>& words) {
    double s = 0.0;
    for (auto w : words) s += cost(w);
    return s;
}

class MusSearch {
public:
    MusSearch(EntailmentOracle& oracle, const CostFunction& cost, const MsaOptions& options)
        : oracle_(oracle), cost_(cost), options_(options) {}

    WordSet run(const WordSet& bounded, const std::vector<std::size_t>& candidates, double lower) {
        if (candidates.empty() || total(cost_, candidates) <= lower) return {};
        WordSet best;
        const std::size_t w = candidates.front();
        const std::vector<std::size_t> rest(candidates.begin() + 1, candidates.end());

        WordSet extended = bounded;
        extended.insert(w);
        if (robust(oracle_, extended)) {
            const auto next = options_.use_shrink ? shrink(oracle_, extended, rest) : rest;
            WordSet y = run(extended, next, lower - cost_(w));
            const double c = cost_.total(y) + cost_(w);
            if (c > lower) {
                y.insert(w);
                best = std::move(y);
                lower = c;
            }
        }
        WordSet y = run(bounded, rest, lower);
        if (cost_.total(y) > lower) best = std::move(y);
        return best;
    }

private:
    EntailmentOracle& oracle_;
    const CostFunction& cost_;
    const MsaOptions& options_;
};

} // namespace

std::vector<std::size_t> candidate_order(const CostFunction& cost, const WordSet& words) {
    std::vector<std::size_t> out(words.begin(), words.end());
    std::sort(out.begin(), out.end(), [&](std::size_t a, std::size_t b) {
        if (cost(a) != cost(b)) return cost(a) > cost(b);
        return a > b;
    });
    return out;
}

std::vector<std::size_t> shrink(EntailmentOracle& oracle, const WordSet& bounded,
                                const std::vector<std::size_t>& candidates) {
    std::vector<std::size_t> out;
    for (auto w : candidates) {
        WordSet trial = bounded;
        trial.insert(w);
        if (robust(oracle, trial)) out.push_back(w);
    }
    return out;
}

WordSet mus(EntailmentOracle& oracle, const CostFunction& cost, const MusState& state, const MsaOptions& options) {
    if (cost.size() != oracle.num_words()) throw InvalidInput("cost function length differs from the text length");
    for (auto w : state.candidates) {
        if (w >= oracle.num_words()) throw InvalidIndex("candidate position out of range");
        if (state.bounded.contains(w)) throw InvalidInput("candidates must be disjoint from the bounded words");
    }
    return MusSearch(oracle, cost, options).run(state.bounded, state.candidates, state.lower_bound);
}

Explanation ore_msa(EntailmentOracle& oracle, const CostFunction& cost, const ConstraintSpec& constraints,
                    const MsaOptions& options) {
    const std::size_t n = oracle.num_words();
    if (cost.size() != n) throw InvalidInput("cost function length differs from the text length");
    constraints.validate(n);
    const VerifierStats before = oracle.stats();

    const WordSet& bounded = constraints.exclude;
    if (!bounded.empty() && !robust(oracle, bounded))
        throw Infeasible("the excluded words are needed for a robust explanation");

    auto candidates = candidate_order(cost, WordSet::all(n).minus(bounded).minus(constraints.include));
    if (options.use_shrink) candidates = shrink(oracle, bounded, candidates);
    const WordSet universal = mus(oracle, cost, {bounded, candidates, 0.0}, options);

    Explanation e;
    e.words = WordSet::all(n).minus(bounded).minus(universal);
    e.cost = cost.total(e.words);
    const VerifierStats& now = oracle.stats();
    e.trace.solver = "msa";
    e.trace.iterations = 1;
    e.trace.entailment_queries = now.queries - before.queries;
    e.trace.splits = now.splits - before.splits;
    e.trace.attack_calls = now.attack_calls - before.attack_calls;
    return e;
}

std::vector<Explanation> enumerate_all_minimal(EntailmentOracle& oracle, const CostFunction& cost, double optimum) {
    constexpr std::size_t kLimit = 1000000;
    const std::size_t n = oracle.num_words();
    if (cost.size() != n) throw InvalidInput("cost function length differs from the text length");

    // Suffix sums let the walk skip branches that can no longer reach the optimum.
    std::vector<double> suffix(n + 1, 0.0);
    for (std::size_t i = n; i-- > 0;) suffix[i] = suffix[i + 1] + cost(i);

    std::vector<WordSet> matches;
    std::vector<std::size_t> current;
    auto walk = [&](auto&& self, std::size_t i, double c) -> void {
        if (cost_equal(c, optimum)) {
            if (matches.size() == kLimit)
                throw InvalidInput("more than " + std::to_string(kLimit) + " subsets match the optimal cost");
            matches.emplace_back(current);
            return;
        }
        if (i == n || c > optimum || (c + suffix[i] < optimum && !cost_equal(c + suffix[i], optimum))) return;
        current.push_back(i);
        self(self, i + 1, c + cost(i));
        current.pop_back();
        self(self, i + 1, c);
    };
    walk(walk, 0, 0.0);

    std::sort(matches.begin(), matches.end());
    const VerifierStats before = oracle.stats();
    std::vector<Explanation> out;
    for (auto& words : matches) {
        const auto r = oracle.check(words);
        if (r.is_exhausted()) throw ResourceExhausted("verifier budget exhausted on " + words.to_string());
        if (!r.is_robust()) continue;
        Explanation e;
        e.cost = cost.total(words);
        e.words = std::move(words);
        e.trace.solver = "enumerate";
        out.push_back(std::move(e));
    }
    const VerifierStats& now = oracle.stats();
    for (auto& e : out) {
        e.trace.entailment_queries = now.queries - before.queries;
        e.trace.splits = now.splits - before.splits;
    }
    return out;
}

} // namespace ore
