#include "ore/attacks.hpp"

#include "ore/bounds.hpp"
#include "ore/errors.hpp"
#include "ore/verifier.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <random>
#include <set>

namespace ore {

void AttackConfig::validate() const {
    if (population == 0) throw InvalidInput("attack population must be >= 1");
    if (budget == 0) throw InvalidInput("attack budget must be >= 1");
    if (!(step > 0.0 && step <= 1.0)) throw InvalidInput("attack step must lie in (0, 1]");
}

Label strongest_rival(const Network& net, const Box& box, Label target) {
    const auto b = bounds(net, box);
    Label best = target == 0 ? 1 : 0;
    for (Label r = 0; r < b.size(); ++r) {
        if (r != target && b[r].hi > b[best].hi) best = r;
    }
    return best;
}

std::optional<std::vector<double>> fgsm_from(const Network& net, std::span<const double> start, const Box& box,
                                             Label target, Label rival, std::size_t iterations, double step,
                                             const std::vector<bool>* mask) {
    std::vector<double> x(start.begin(), start.end());
    for (std::size_t k = 0; k < x.size(); ++k) x[k] = std::clamp(x[k], box.lo[k], box.hi[k]);
    Evaluator ev(net);
    if (ev.label(x) != target) return x;
    for (std::size_t it = 0; it < iterations; ++it) {
        const auto g = gradient(net, x, rival, target);
        bool moved = false;
        for (std::size_t k = 0; k < x.size(); ++k) {
            if ((mask && !(*mask)[k]) || g[k] == 0.0) continue;
            const double half = 0.5 * (box.hi[k] - box.lo[k]);
            const double next = std::clamp(x[k] + (g[k] > 0.0 ? step : -step) * half, box.lo[k], box.hi[k]);
            moved = moved || next != x[k];
            x[k] = next;
        }
        if (ev.label(x) != target) return x;
        if (!moved) break;
    }
    return std::nullopt;
}

std::optional<std::vector<double>> fgsm(const Network& net, const TextInput& text, const Box& box, Label target,
                                        const AttackConfig& config) {
    config.validate();
    if (box.size() != net.input_dim() || text.point.size() != net.input_dim())
        throw InvalidInput("attack box and text must match the network input dimension");
    if (box.degenerate()) {
        if (forward(net, box.lo).label != target) return box.lo;
        return std::nullopt;
    }
    const Label rival = strongest_rival(net, box, target);
    return fgsm_from(net, text.point, box, target, rival, config.fgsm_iterations, config.step);
}

namespace {

double gap_at(const Network& net, std::span<const double> x, Label target) {
    const auto p = forward(net, x);
    double best = -std::numeric_limits<double>::infinity();
    for (Label r = 0; r < p.logits.size(); ++r) {
        if (r != target) best = std::max(best, p.logits[r]);
    }
    return p.logits[target] - best;
}

bool better(const SparseAttack& a, const SparseAttack& b) {
    if (a.support.size() != b.support.size()) return a.support.size() < b.support.size();
    if (a.gap != b.gap) return a.gap < b.gap;
    return a.support < b.support;
}

double binomial(std::size_t m, std::size_t k) {
    double c = 1.0;
    for (std::size_t i = 1; i <= k; ++i) c = c * static_cast<double>(m - k + i) / static_cast<double>(i);
    return c;
}

// All k-subsets of ranked positions [0, m), lexicographic in rank order.
std::vector<std::vector<std::size_t>> all_combinations(std::size_t m, std::size_t k) {
    std::vector<std::vector<std::size_t>> out;
    std::vector<std::size_t> c(k);
    for (std::size_t i = 0; i < k; ++i) c[i] = i;
    while (true) {
        out.push_back(c);
        std::size_t i = k;
        while (i > 0 && c[i - 1] == m - k + i - 1) --i;
        if (i == 0) break;
        ++c[i - 1];
        for (std::size_t j = i; j < k; ++j) c[j] = c[j - 1] + 1;
    }
    return out;
}

// k ranked positions drawn without replacement, geometrically favouring top ranks.
std::vector<std::size_t> weighted_draw(std::size_t m, std::size_t k, std::mt19937_64& rng) {
    constexpr double kDecay = 0.7;
    std::vector<double> w(m);
    for (std::size_t i = 0; i < m; ++i) w[i] = std::pow(kDecay, static_cast<double>(i));
    std::vector<std::size_t> picked;
    for (std::size_t n = 0; n < k; ++n) {
        std::discrete_distribution<std::size_t> d(w.begin(), w.end());
        const auto i = d(rng);
        picked.push_back(i);
        w[i] = 0.0;
    }
    std::sort(picked.begin(), picked.end());
    return picked;
}

} // namespace

std::vector<SparseAttack> sparse_attack_batch(const Network& net, const PerturbationSpace& space,
                                              const WordSet& fixed, Label target, const AttackConfig& config,
                                              std::size_t count) {
    config.validate();
    if (count == 0) return {};
    const WordSet free = fixed.complement(space.num_words());
    if (free.empty()) return {};

    const Box box = space.box(fixed);
    const auto& x = space.text().point;
    const std::size_t d = space.dim();
    const Label rival = strongest_rival(net, box, target);

    // Rank free words by the infinity norm of their gradient block at x.
    const auto g = gradient(net, x, rival, target);
    std::vector<std::pair<double, std::size_t>> scored;
    for (auto w : free) {
        double norm = 0.0;
        for (std::size_t c = 0; c < d; ++c) norm = std::max(norm, std::abs(g[w * d + c]));
        scored.emplace_back(-norm, w);
    }
    std::sort(scored.begin(), scored.end());
    std::vector<std::size_t> ranked;
    for (const auto& s : scored) ranked.push_back(s.second);
    const std::size_t m = ranked.size();

    std::mt19937_64 rng(config.seed);
    std::map<WordSet, SparseAttack> found;

    auto try_subset = [&](const std::vector<std::size_t>& positions) -> std::optional<SparseAttack> {
        std::vector<bool> mask(x.size(), false);
        for (auto p : positions) {
            for (std::size_t c = 0; c < d; ++c) mask[ranked[p] * d + c] = true;
        }
        auto point = fgsm_from(net, x, box, target, rival, config.fgsm_iterations, config.step, &mask);
        if (!point) return std::nullopt;
        SparseAttack a;
        a.support = counterexample_diff(space.text(), *point);
        if (a.support.empty()) return std::nullopt;
        a.predicted = forward(net, *point).label;
        a.gap = gap_at(net, *point, target);
        a.point = std::move(*point);
        return a;
    };

    std::size_t k = m;
    std::size_t budget = config.budget;
    while (k > 0 && budget > 0) {
        const bool exhaustive = binomial(m, k) <= static_cast<double>(config.population);
        std::vector<std::vector<std::size_t>> subsets;
        if (exhaustive) {
            subsets = all_combinations(m, k);
        } else {
            std::set<std::vector<std::size_t>> seen;
            for (std::size_t i = 0; i < config.population; ++i) {
                auto s = weighted_draw(m, k, rng);
                if (seen.insert(s).second) subsets.push_back(std::move(s));
            }
        }

        std::optional<SparseAttack> best;
        for (const auto& s : subsets) {
            auto a = try_subset(s);
            if (!a) continue;
            auto it = found.find(a->support);
            if (it == found.end() || better(*a, it->second)) found[a->support] = *a;
            if (!best || better(*a, *best)) best = std::move(a);
        }
        --budget;
        if (!best) {
            if (exhaustive) break;
            continue;
        }
        k = std::min(k, best->support.size()) - 1;
    }

    std::vector<SparseAttack> out;
    for (auto& [support, a] : found) out.push_back(std::move(a));
    std::sort(out.begin(), out.end(), better);
    if (out.size() > count) out.resize(count);
    return out;
}

std::optional<SparseAttack> sparse_attack(const Network& net, const PerturbationSpace& space, const WordSet& fixed,
                                          Label target, const AttackConfig& config) {
    auto batch = sparse_attack_batch(net, space, fixed, target, config, 1);
    if (batch.empty()) return std::nullopt;
    return std::move(batch.front());
}

std::optional<SparseAttack> sparse_attack(const Network& net, const TextInput& text, const WordSet& fixed,
                                          const PerturbationSpec& spec, const EmbeddingTable& table,
                                          const AttackConfig& config) {
    const Label target = forward(net, text.point).label;
    return sparse_attack(net, PerturbationSpace::build(text, spec, table), fixed, target, config);
}

} // namespace ore
