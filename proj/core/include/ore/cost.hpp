#pragma once

#include "ore/word_set.hpp"

#include <cstddef>
#include <string>
#include <vector>

namespace ore {

/// Positive cost per word position.
class CostFunction {
public:
    /// Throws InvalidInput unless every value is finite and > 0.
    explicit CostFunction(std::vector<double> values);
    static CostFunction uniform(std::size_t n, double value = 1.0);

    std::size_t size() const noexcept { return values_.size(); }
    double operator()(std::size_t i) const { return values_.at(i); }
    const std::vector<double>& values() const noexcept { return values_; }
    double total(const WordSet& words) const;
    double total() const;

private:
    std::vector<double> values_;
};

/// Cost comparison used by every solver: equal within 1e-9 relative.
bool cost_equal(double a, double b);
bool cost_less(double a, double b);

/// Words that must be in (include) or must stay out of (exclude) an explanation.
struct ConstraintSpec {
    WordSet include;
    WordSet exclude;

    /// Throws InvalidIndex for positions >= n, InvalidInput if the sets overlap.
    void validate(std::size_t n) const;
};

struct SolverTrace {
    std::string solver;
    std::size_t iterations = 0;
    std::size_t counterexamples = 0;
    std::size_t entailment_queries = 0;
    std::size_t splits = 0;
    std::size_t attack_calls = 0;
    std::size_t attack_supports = 0;
};

struct Explanation {
    WordSet words;
    double cost = 0.0;
    SolverTrace trace;
};

} // namespace ore
