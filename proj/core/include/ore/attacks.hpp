#pragma once

#include "ore/model.hpp"
#include "ore/text.hpp"
#include "ore/word_set.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace ore {

struct AttackConfig {
    std::size_t population = 16;  // perturbations tried per round
    std::size_t budget = 8;        // rounds before giving up
    std::size_t fgsm_iterations = 10;
    double step = 1.0;             // fraction of each coordinate's box half-width
    std::uint64_t seed = 0;

    /// Throws InvalidInput unless population, budget >= 1 and 0 < step <= 1.
    void validate() const;
};

/// A verified label-flipping point and the word positions it actually moves.
struct SparseAttack {
    std::vector<double> point;
    WordSet support;
    Label predicted = 0;
    double gap = 0.0;  // logit_target - max rival logit at point (negative or tie-losing)
};

/// Rival with the highest logit upper bound over the box (ties: smallest index).
Label strongest_rival(const Network& net, const Box& box, Label target);

/// Iterated sign-gradient steps on logit_rival - logit_target, clipped to the
/// box. Coordinates with `mask[k] == false` stay at their start value. Returns
/// the first visited point whose label differs from `target`.
std::optional<std::vector<double>> fgsm_from(const Network& net, std::span<const double> start, const Box& box,
                                             Label target, Label rival, std::size_t iterations, double step,
                                             const std::vector<bool>* mask = nullptr);

/// FGSM from the text's embedding (clipped into the box) against the strongest rival.
std::optional<std::vector<double>> fgsm(const Network& net, const TextInput& text, const Box& box, Label target,
                                        const AttackConfig& config = {});

/// Random-search attacks that perturb few free words, shrinking the number of
/// targeted words after every success. Returns up to `count` attacks with
/// distinct supports, smallest supports first. Deterministic for a fixed seed.
std::vector<SparseAttack> sparse_attack_batch(const Network& net, const PerturbationSpace& space,
                                              const WordSet& fixed, Label target, const AttackConfig& config,
                                              std::size_t count);

std::optional<SparseAttack> sparse_attack(const Network& net, const PerturbationSpace& space, const WordSet& fixed,
                                          Label target, const AttackConfig& config = {});

std::optional<SparseAttack> sparse_attack(const Network& net, const TextInput& text, const WordSet& fixed,
                                          const PerturbationSpec& spec, const EmbeddingTable& table,
                                          const AttackConfig& config = {});

} // namespace ore
