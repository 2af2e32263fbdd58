#include "ore/constraints.hpp"

#include "ore/errors.hpp"

#include <algorithm>
#include <cmath>

namespace ore {

CostFunction lift_exclude_cost(const CostFunction& cost, const WordSet& exclude) {
    if (!exclude.empty() && exclude.indices().back() >= cost.size())
        throw InvalidIndex("excluded position " + std::to_string(exclude.indices().back()) + " out of range");
    double rest = 0.0;
    for (std::size_t i = 0; i < cost.size(); ++i) {
        if (!exclude.contains(i)) rest += cost(i);
    }
    std::vector<double> lifted = cost.values();
    for (auto i : exclude) lifted[i] = rest + 1.0;
    return CostFunction(std::move(lifted));
}

BiasVerdict detect_bias(EntailmentOracle& oracle, const WordSet& protected_words, const CostFunction& cost,
                        const HsOptions& options) {
    const std::size_t n = oracle.num_words();
    for (auto i : protected_words) {
        if (i >= n) throw InvalidIndex("protected position " + std::to_string(i) + " out of range");
    }
    BiasVerdict out;
    out.protected_words = protected_words;
    const auto r = oracle.check(protected_words.complement(n));
    if (r.is_exhausted()) throw ResourceExhausted("verifier budget exhausted on the bias check");
    if (r.is_counterexample()) {
        out.biased = true;
        out.counterexample = r.counterexample();
        return out;
    }
    ConstraintSpec c;
    c.exclude = protected_words;
    out.witness = ore_hs(oracle, cost, c, options);
    return out;
}

Explanation repair_explanation(EntailmentOracle& oracle, const WordSet& seed, const CostFunction& cost,
                               Solver solver, const HsOptions& hs, const MsaOptions& msa) {
    ConstraintSpec c;
    c.include = seed;
    return solver == Solver::HS ? ore_hs(oracle, cost, c, hs) : ore_msa(oracle, cost, c, msa);
}

Sampler Sampler::discrete(const PerturbationSpace& space, std::vector<std::vector<double>> points,
                          std::vector<double> probabilities, std::uint64_t seed) {
    if (points.empty()) throw InvalidInput("discrete sampler needs at least one point");
    if (points.size() != probabilities.size()) throw InvalidInput("one probability per point is required");
    double sum = 0.0;
    for (double p : probabilities) {
        if (!(p >= 0.0) || !std::isfinite(p)) throw InvalidInput("probabilities must be finite and non-negative");
        sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-12) throw InvalidInput("probabilities must sum to 1");
    const Box full = space.box({});
    for (const auto& p : points) {
        if (p.size() != full.size() || !full.contains(p, 1e-12))
            throw InvalidInput("sampler support must lie in the perturbation box");
    }
    Sampler s(space, seed);
    s.points_ = std::move(points);
    s.probabilities_ = std::move(probabilities);
    return s;
}

Sampler Sampler::uniform_box(const PerturbationSpace& space, std::uint64_t seed) { return Sampler(space, seed); }

bool agrees_on(const TextInput& text, std::span<const double> point, const WordSet& fixed) {
    for (auto i : fixed) {
        for (std::size_t c = 0; c < text.dim; ++c) {
            if (point[i * text.dim + c] != text.point[i * text.dim + c]) return false;
        }
    }
    return true;
}

std::vector<double> Sampler::draw(const WordSet& fixed) {
    if (is_discrete()) {
        std::vector<double> weights(points_.size(), 0.0);
        bool mass = false;
        for (std::size_t i = 0; i < points_.size(); ++i) {
            if (agrees_on(space_->text(), points_[i], fixed)) {
                weights[i] = probabilities_[i];
                mass = mass || weights[i] > 0.0;
            }
        }
        if (!mass) throw Undefined("no sampler mass agrees with the text on " + fixed.to_string());
        std::discrete_distribution<std::size_t> d(weights.begin(), weights.end());
        return points_[d(rng_)];
    }
    const Box box = space_->box(fixed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> x(box.size());
    for (std::size_t k = 0; k < x.size(); ++k) {
        x[k] = box.lo[k] == box.hi[k] ? box.lo[k] : std::clamp(box.lo[k] + u(rng_) * box.width(k), box.lo[k], box.hi[k]);
    }
    return x;
}

std::vector<std::vector<double>> Sampler::draw_batch(std::size_t count, const WordSet& fixed) {
    std::vector<std::vector<double>> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) out.push_back(draw(fixed));
    return out;
}

double precision(const WordSet& fixed, const Network& net, Label target, Sampler& sampler, std::size_t n) {
    if (n == 0) throw InvalidInput("sample count must be >= 1");
    Evaluator ev(net);
    std::size_t kept = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (ev.label(sampler.draw(fixed)) == target) ++kept;
    }
    return static_cast<double>(kept) / static_cast<double>(n);
}

double coverage(const WordSet& fixed, Sampler& sampler, std::size_t n) {
    if (n == 0) throw InvalidInput("sample count must be >= 1");
    return coverage_on(fixed, sampler.space().text(), sampler.draw_batch(n));
}

double coverage_on(const WordSet& fixed, const TextInput& text, const std::vector<std::vector<double>>& samples) {
    if (samples.empty()) throw InvalidInput("sample batch is empty");
    std::size_t hits = 0;
    for (const auto& s : samples) {
        if (agrees_on(text, s, fixed)) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(samples.size());
}

} // namespace ore
