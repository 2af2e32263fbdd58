#pragma once

#include "ore/cost.hpp"
#include "ore/hitting_set.hpp"
#include "ore/mus.hpp"
#include "ore/verifier.hpp"

#include <cstdint>
#include <optional>
#include <random>
#include <vector>

namespace ore {

/// Excluded words cost one more than all other words together, so an optimum
/// touches them only when no explanation avoids them.
CostFunction lift_exclude_cost(const CostFunction& cost, const WordSet& exclude);

struct BiasVerdict {
    bool biased = false;
    WordSet protected_words;
    /// Robust explanation avoiding the protected words (unbiased case).
    std::optional<Explanation> witness;
    /// Label-flipping point that moves protected words only (biased case).
    std::optional<EntailmentResult::CounterExample> counterexample;
};

/// Biased iff freeing the protected words alone can flip the prediction.
/// Throws ResourceExhausted instead of guessing a verdict.
BiasVerdict detect_bias(EntailmentOracle& oracle, const WordSet& protected_words, const CostFunction& cost,
                        const HsOptions& options = {});

enum class Solver { HS, MSA };

/// Cheapest robust superset of `seed`.
Explanation repair_explanation(EntailmentOracle& oracle, const WordSet& seed, const CostFunction& cost,
                               Solver solver = Solver::HS, const HsOptions& hs = {}, const MsaOptions& msa = {});

/// Perturbation distribution for precision and coverage estimates: either a
/// finite set of points with probabilities, or uniform over the free blocks
/// of the text-level box. The space must outlive the sampler.
class Sampler {
public:
    /// Throws InvalidInput unless probabilities are non-negative, sum to 1
    /// within 1e-12 and every point lies in the box with no word fixed.
    static Sampler discrete(const PerturbationSpace& space, std::vector<std::vector<double>> points,
                            std::vector<double> probabilities, std::uint64_t seed = 0);
    static Sampler uniform_box(const PerturbationSpace& space, std::uint64_t seed = 0);

    bool is_discrete() const noexcept { return !points_.empty(); }
    const PerturbationSpace& space() const noexcept { return *space_; }

    /// One draw with the words of `fixed` agreeing with the text. Discrete
    /// samplers draw from the distribution conditioned on that agreement and
    /// throw Undefined when it has no mass.
    std::vector<double> draw(const WordSet& fixed = {});
    std::vector<std::vector<double>> draw_batch(std::size_t count, const WordSet& fixed = {});

private:
    Sampler(const PerturbationSpace& space, std::uint64_t seed) : space_(&space), rng_(seed) {}

    const PerturbationSpace* space_;
    std::vector<std::vector<double>> points_;
    std::vector<double> probabilities_;
    std::mt19937_64 rng_;
};

/// True when every block of `fixed` equals the text's block exactly.
bool agrees_on(const TextInput& text, std::span<const double> point, const WordSet& fixed);

/// Fraction of N conditional draws whose prediction equals `target`.
double precision(const WordSet& fixed, const Network& net, Label target, Sampler& sampler, std::size_t n);
/// Fraction of N unconditional draws that agree with the text on `fixed`.
double coverage(const WordSet& fixed, Sampler& sampler, std::size_t n);
/// Coverage over a given batch, so nested sets can share samples.
double coverage_on(const WordSet& fixed, const TextInput& text, const std::vector<std::vector<double>>& samples);

} // namespace ore
