#include "ore/verifier.hpp"

#include "ore/attacks.hpp"
#include "ore/errors.hpp"
#include "lp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace ore {

EntailmentResult EntailmentResult::counterexample(const Network& net, const Box& box, Label target,
                                                  std::vector<double> point) {
    if (!box.contains(point)) throw std::logic_error("counterexample lies outside the queried box");
    const Label predicted = forward(net, point).label;
    if (predicted == target) throw std::logic_error("counterexample does not change the prediction");
    return EntailmentResult(CounterExample{std::move(point), predicted});
}

Verifier::Verifier(const Network& net, VerifierOptions options)
    : net_(net.has_conv() ? net.lowered() : net), pl_(net_), options_(options) {}

namespace {

struct GapCheck {
    bool certified = true;
    Label worst_rival = 0;
    double worst_bound = std::numeric_limits<double>::infinity();
    LinearForm worst_form;
};

GapCheck check_gaps(const PiecewiseLinearNet& pl, const SymbolicBounds& sb, const Box& box, Label target,
                    double tol) {
    GapCheck out;
    for (Label r = 0; r < pl.num_labels(); ++r) {
        if (r == target) continue;
        auto form = sb.gap_lower(pl, target, r);
        const double lb = form.min_over(box);
        const bool ruled_out = r > target ? lb >= -tol : lb > tol;
        if (!ruled_out) out.certified = false;
        if (lb < out.worst_bound) {
            out.worst_bound = lb;
            out.worst_rival = r;
            out.worst_form = std::move(form);
        }
    }
    return out;
}

// Magnitude of each hidden neuron's influence on the gap against `rival`,
// pushed backwards through absolute weights.
std::vector<std::vector<double>> influence(const PiecewiseLinearNet& pl, Label target, Label rival) {
    const auto& stages = pl.stages();
    std::vector<std::vector<double>> out(stages.size());
    const auto& last = stages.back();
    std::vector<double> sens(last.weights.cols());
    for (std::size_t i = 0; i < sens.size(); ++i) sens[i] = std::abs(last.weights(target, i) - last.weights(rival, i));
    for (std::size_t s = stages.size() - 1; s-- > 0;) {
        out[s] = sens;
        const auto& w = stages[s].weights;
        std::vector<double> prev(w.cols(), 0.0);
        for (std::size_t j = 0; j < w.rows(); ++j) {
            for (std::size_t i = 0; i < w.cols(); ++i) prev[i] += std::abs(w(j, i)) * sens[j];
        }
        sens = std::move(prev);
    }
    return out;
}

} // namespace

EntailmentResult Verifier::check(const Box& box, Label target) {
    if (box.size() != net_.input_dim())
        throw InvalidInput("box has dimension " + std::to_string(box.size()) + ", network expects " +
                           std::to_string(net_.input_dim()));
    if (target >= net_.num_labels()) throw InvalidInput("target label out of range");
    ++stats_.queries;

    Evaluator ev(net_);
    std::vector<Node> stack;
    stack.push_back({box, {}});
    std::size_t splits = 0;
    const auto& x_hint = box.lo;

    while (!stack.empty()) {
        Node node = std::move(stack.back());
        stack.pop_back();
        ++stats_.nodes;

        if (node.box.degenerate()) {
            if (ev.label(node.box.lo) != target) return EntailmentResult::counterexample(net_, box, target, node.box.lo);
            continue;
        }

        const SymbolicBounds sb = propagate(pl_, node.box, node.phases);
        if (sb.infeasible) continue;
        const GapCheck gaps = check_gaps(pl_, sb, node.box, target, options_.tolerance);
        // Minimiser of the linear lower bound: exact for affine subproblems.
        auto corner = gaps.worst_form.argmin_corner(node.box);
        if (gaps.certified) {
            if (gaps.worst_bound < 0.0 && ev.label(corner) != target)
                return EntailmentResult::counterexample(net_, box, target, std::move(corner));
            continue;
        }
        if (ev.label(corner) != target) return EntailmentResult::counterexample(net_, box, target, std::move(corner));
        const bool leaf = sb.unstable.empty();
        if (leaf || !sb.phase_constraints.empty()) {
            // Minimise each gap's lower form over the box cut down by the
            // forced phases. At a leaf every ReLU is fixed and this is exact.
            bool vacuous = false, settled = true;
            for (Label r = 0; r < pl_.num_labels(); ++r) {
                if (r == target) continue;
                const auto sol = detail::minimize(sb.gap_lower(pl_, target, r), node.box, sb.phase_constraints);
                if (!sol) {
                    vacuous = true;
                    break;
                }
                const bool ruled_out = r > target ? sol->value >= -options_.tolerance : sol->value > options_.tolerance;
                if (ruled_out) continue;
                if (ev.label(sol->point) != target)
                    return EntailmentResult::counterexample(net_, box, target, sol->point);
                // A tie within tolerance that does not flip in floating point.
                if (leaf && sol->value > -options_.tolerance) continue;
                settled = false;
            }
            if (vacuous || settled) continue;
        }
        if (options_.use_attacks) {
            ++stats_.attack_calls;
            std::vector<double> mid(node.box.size());
            for (std::size_t k = 0; k < mid.size(); ++k) mid[k] = 0.5 * (node.box.lo[k] + node.box.hi[k]);
            for (const auto& start : {corner, mid}) {
                auto hit = fgsm_from(net_, start, node.box, target, gaps.worst_rival, options_.fgsm_iterations, 1.0);
                if (hit) return EntailmentResult::counterexample(net_, box, target, std::move(*hit));
            }
        }

        if (splits >= options_.max_splits) return EntailmentResult::exhausted(splits);
        ++splits;
        ++stats_.splits;

        if (!sb.unstable.empty()) {
            const auto sens = influence(pl_, target, gaps.worst_rival);
            const UnstableNeuron* pick = nullptr;
            double best = -1.0;
            for (const auto& u : sb.unstable) {
                const double score = sens[u.stage][u.neuron] * (-u.lo * u.hi) / (u.hi - u.lo);
                if (score > best) {
                    best = score;
                    pick = &u;
                }
            }
            Node active = node;
            Node inactive = std::move(node);
            for (auto* n : {&active, &inactive}) {
                n->phases.resize(pl_.stages().size());
                auto& layer = n->phases[pick->stage];
                if (layer.empty()) layer.assign(pl_.stages()[pick->stage].weights.rows(), Phase::Free);
            }
            active.phases[pick->stage][pick->neuron] = Phase::Active;
            inactive.phases[pick->stage][pick->neuron] = Phase::Inactive;
            stack.push_back(std::move(inactive));
            stack.push_back(std::move(active));
            continue;
        }

        // Bisect the input coordinate with the largest width-weighted slope,
        // falling back to the widest one.
        std::size_t axis = 0;
        double best = -1.0;
        for (std::size_t k = 0; k < node.box.size(); ++k) {
            const double score = node.box.width(k) * std::abs(gaps.worst_form.coeffs[k]);
            if (score > best) {
                best = score;
                axis = k;
            }
        }
        if (best <= 0.0) {
            for (std::size_t k = 0; k < node.box.size(); ++k) {
                if (node.box.width(k) > node.box.width(axis)) axis = k;
            }
        }
        const double lo = node.box.lo[axis];
        const double hi = node.box.hi[axis];
        double mid = lo + 0.5 * (hi - lo);
        Node left = node;
        Node right = std::move(node);
        if (!(mid > lo && mid < hi)) {
            // No representable midpoint: split into the two endpoints.
            left.box.hi[axis] = lo;
            right.box.lo[axis] = hi;
        } else {
            left.box.hi[axis] = mid;
            right.box.lo[axis] = mid;
        }
        // Explore the half nearer the corner hint first.
        const bool left_first = std::abs(x_hint[axis] - lo) <= std::abs(x_hint[axis] - hi);
        if (left_first) {
            stack.push_back(std::move(right));
            stack.push_back(std::move(left));
        } else {
            stack.push_back(std::move(left));
            stack.push_back(std::move(right));
        }
    }
    return EntailmentResult::robust();
}

WordSet counterexample_diff(const TextInput& text, std::span<const double> point, double tol) {
    if (point.size() != text.point.size()) throw InvalidInput("point dimension does not match the text");
    WordSet out;
    for (std::size_t i = 0; i < text.size(); ++i) {
        for (std::size_t c = 0; c < text.dim; ++c) {
            if (std::abs(point[i * text.dim + c] - text.point[i * text.dim + c]) > tol) {
                out.insert(i);
                break;
            }
        }
    }
    return out;
}

EntailmentResult entails(const Network& net, const PerturbationSpace& space, const WordSet& fixed, Label target,
                         const VerifierOptions& options) {
    Verifier v(net, options);
    return v.check(space.box(fixed), target);
}

EntailmentResult entails(const Network& net, const TextInput& text, const WordSet& fixed,
                         const PerturbationSpec& spec, const EmbeddingTable& table, Label target,
                         const VerifierOptions& options) {
    return entails(net, PerturbationSpace::build(text, spec, table), fixed, target, options);
}

EntailmentOracle::EntailmentOracle(const Network& net, PerturbationSpace space, Label target,
                                   VerifierOptions options)
    : verifier_(net, options), space_(std::move(space)), target_(target) {
    if (space_.text().point.size() != net.input_dim())
        throw InvalidInput("text dimension does not match the network input");
    if (target_ >= net.num_labels()) throw InvalidInput("target label out of range");
}

EntailmentOracle::EntailmentOracle(const Network& net, PerturbationSpace space, VerifierOptions options)
    : EntailmentOracle(net, space, forward(net, space.text().point).label, options) {}

EntailmentResult EntailmentOracle::check(const WordSet& fixed) {
    return verifier_.check(space_.box(fixed), target_);
}

} // namespace ore
