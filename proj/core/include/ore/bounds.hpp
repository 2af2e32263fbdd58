#pragma once

#include "ore/model.hpp"
#include "ore/text.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace ore {

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
};

/// Network in verifier form: affine stages, each optionally followed by a ReLU.
/// Convolutions are lowered and ReLUs directly after the input become an
/// identity stage, so every ReLU has a pre-activation row to bound.
class PiecewiseLinearNet {
public:
    struct Stage {
        Matrix weights;
        std::vector<double> bias;
        bool relu = false;
    };

    explicit PiecewiseLinearNet(const Network& net);

    std::size_t input_dim() const noexcept { return input_dim_; }
    std::size_t num_labels() const noexcept { return stages_.back().weights.rows(); }
    const std::vector<Stage>& stages() const noexcept { return stages_; }
    bool has_relu() const;

private:
    std::size_t input_dim_;
    std::vector<Stage> stages_;
};

enum class Phase : signed char { Free, Active, Inactive };

/// Phase per ReLU stage and neuron; empty inner vectors mean "all free".
using PhaseAssignment = std::vector<std::vector<Phase>>;

/// Linear function of the input variables.
struct LinearForm {
    std::vector<double> coeffs;
    double constant = 0.0;

    double min_over(const Box& box) const;
    double max_over(const Box& box) const;
    /// Box corner attaining min_over.
    std::vector<double> argmin_corner(const Box& box) const;
    double eval(std::span<const double> x) const;
};

struct UnstableNeuron {
    std::size_t stage;
    std::size_t neuron;
    double lo;
    double hi;
};

/// Result of one symbolic interval pass over a box under a phase assignment.
/// Each neuron carries a lower and an upper linear form in the inputs; the
/// concrete pre-activation intervals enclose the true values over the part of
/// the box consistent with the phases.
struct SymbolicBounds {
    bool infeasible = false;  // some forced phase is impossible everywhere in the box
    std::vector<std::vector<Interval>> pre_activation;  // per stage with a ReLU
    std::vector<UnstableNeuron> unstable;
    /// One form c per neuron with a forced phase such that c(x) >= 0 wherever
    /// the phase holds: the upper form for Active, the negated lower form for
    /// Inactive. Exact while `unstable` is empty.
    std::vector<LinearForm> phase_constraints;
    // Linear forms of the final stage's input neurons.
    std::vector<LinearForm> final_lower;
    std::vector<LinearForm> final_upper;

    /// Sound lower bound form for logit_target - logit_rival.
    LinearForm gap_lower(const PiecewiseLinearNet& net, Label target, Label rival) const;
    /// Sound upper bound form for logit_label.
    LinearForm logit_upper(const PiecewiseLinearNet& net, Label label) const;
    LinearForm logit_lower(const PiecewiseLinearNet& net, Label label) const;
};

SymbolicBounds propagate(const PiecewiseLinearNet& net, const Box& box, const PhaseAssignment& phases = {});

/// Sound enclosure of every logit over the box; exact for ReLU-free networks.
std::vector<Interval> bounds(const Network& net, const Box& box);
std::vector<Interval> bounds(const PiecewiseLinearNet& net, const Box& box);

} // namespace ore
