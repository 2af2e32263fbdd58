#pragma once

#include "ore/bounds.hpp"
#include "ore/model.hpp"
#include "ore/text.hpp"
#include "ore/word_set.hpp"

#include <cstddef>
#include <span>
#include <variant>
#include <vector>

namespace ore {

struct VerifierOptions {
    std::size_t max_splits = 100000;
    /// Slack on logit-gap comparisons. A rival with a higher index than the
    /// target is ruled out when the gap lower bound is >= -tolerance; a rival
    /// with a lower index (which wins ties) needs a gap lower bound > tolerance.
    double tolerance = 1e-9;
    /// Run the FGSM attack on undecided subproblems.
    bool use_attacks = true;
    std::size_t fgsm_iterations = 10;
};

struct VerifierStats {
    std::size_t queries = 0;
    std::size_t nodes = 0;
    std::size_t splits = 0;
    std::size_t attack_calls = 0;

    VerifierStats& operator+=(const VerifierStats& o) {
        queries += o.queries;
        nodes += o.nodes;
        splits += o.splits;
        attack_calls += o.attack_calls;
        return *this;
    }
};

class EntailmentResult {
public:
    struct Robust {};
    struct CounterExample {
        std::vector<double> point;
        Label predicted;
    };
    struct Exhausted {
        std::size_t splits_used;
    };
    using Verdict = std::variant<Robust, CounterExample, Exhausted>;

    static EntailmentResult robust() { return EntailmentResult(Robust{}); }
    /// Checks that the point lies in the box and is not classified as
    /// `target`; throws std::logic_error otherwise.
    static EntailmentResult counterexample(const Network& net, const Box& box, Label target,
                                           std::vector<double> point);
    static EntailmentResult exhausted(std::size_t splits) { return EntailmentResult(Exhausted{splits}); }

    const Verdict& verdict() const noexcept { return verdict_; }
    bool is_robust() const noexcept { return std::holds_alternative<Robust>(verdict_); }
    bool is_counterexample() const noexcept { return std::holds_alternative<CounterExample>(verdict_); }
    bool is_exhausted() const noexcept { return std::holds_alternative<Exhausted>(verdict_); }
    const CounterExample& counterexample() const { return std::get<CounterExample>(verdict_); }
    std::size_t splits_used() const { return std::get<Exhausted>(verdict_).splits_used; }

private:
    explicit EntailmentResult(Verdict v) : verdict_(std::move(v)) {}
    Verdict verdict_;
};

/// Sound and complete check that every point of a box keeps the target label.
/// Subproblems are bounded with symbolic interval propagation; undecided ones
/// are attacked, then split on the most influential unstable ReLU or, when
/// none is left, bisected along an input coordinate. Single worker,
/// depth-first, deterministic.
class Verifier {
public:
    explicit Verifier(const Network& net, VerifierOptions options = {});

    EntailmentResult check(const Box& box, Label target);

    const Network& network() const noexcept { return net_; }
    const PiecewiseLinearNet& piecewise_linear() const noexcept { return pl_; }
    const VerifierOptions& options() const noexcept { return options_; }
    const VerifierStats& stats() const noexcept { return stats_; }

private:
    struct Node {
        Box box;
        PhaseAssignment phases;
    };

    Network net_;
    PiecewiseLinearNet pl_;
    VerifierOptions options_;
    VerifierStats stats_;
};

/// Positions whose embedding block in `point` differs from the text by more than `tol`.
WordSet counterexample_diff(const TextInput& text, std::span<const double> point, double tol = 1e-12);

/// Entailment query for one text: fixed words pinned, the rest perturbed.
EntailmentResult entails(const Network& net, const PerturbationSpace& space, const WordSet& fixed, Label target,
                         const VerifierOptions& options = {});
EntailmentResult entails(const Network& net, const TextInput& text, const WordSet& fixed,
                         const PerturbationSpec& spec, const EmbeddingTable& table, Label target,
                         const VerifierOptions& options = {});

/// The explanation solvers' view of the verifier: one text, one spec, one
/// target label, queried by fixed set.
class EntailmentOracle {
public:
    EntailmentOracle(const Network& net, PerturbationSpace space, Label target, VerifierOptions options = {});
    /// Target taken from the network's prediction on the text.
    EntailmentOracle(const Network& net, PerturbationSpace space, VerifierOptions options = {});

    EntailmentResult check(const WordSet& fixed);

    const Network& network() const noexcept { return verifier_.network(); }
    const PerturbationSpace& space() const noexcept { return space_; }
    std::size_t num_words() const noexcept { return space_.num_words(); }
    Label target() const noexcept { return target_; }
    const VerifierStats& stats() const noexcept { return verifier_.stats(); }

private:
    Verifier verifier_;
    PerturbationSpace space_;
    Label target_;
};

} // namespace ore
