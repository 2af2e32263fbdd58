// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.
// Everything runs single-threaded with fixed seeds.

#include "oracles.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>
#include <string>
#include <vector>

using namespace ore;
namespace ot = ore::testing;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Report {
    int failures = 0;

    void line(const std::string& name, bool pass, const std::string& detail) {
        std::printf("%s %s: %s\n", pass ? "PASS" : "FAIL", name.c_str(), detail.c_str());
        std::fflush(stdout);
        if (!pass) ++failures;
    }
};

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

bool prime(const std::vector<bool>& table, const WordSet& e) {
    for (auto w : e) {
        WordSet smaller = e;
        smaller.erase(w);
        if (table[ot::to_bits(smaller)]) return false;
    }
    return true;
}

std::vector<double> uniform_point(std::mt19937_64& rng, const Box& b) {
    std::vector<double> x(b.size());
    for (std::size_t k = 0; k < x.size(); ++k) {
        x[k] = b.lo[k] == b.hi[k] ? b.lo[k] : std::uniform_real_distribution<double>(b.lo[k], b.hi[k])(rng);
    }
    return x;
}

Network strip_relu(const Network& net) {
    std::vector<Layer> layers;
    for (const auto& l : net.layers()) {
        if (!std::holds_alternative<ReluLayer>(l)) layers.push_back(l);
    }
    return Network(net.input_words(), net.embedding_dim(), net.labels(), std::move(layers));
}

// ---------------------------------------------------------------------------

struct SolverRun {
    std::size_t instances = 0;
    std::size_t optimal_hs = 0, optimal_msa = 0, robust = 0;
    std::size_t cost_agree = 0, unique = 0, unique_sets_agree = 0;
    std::size_t prime_checked = 0, prime_violations = 0;
    std::size_t attack_cost_agree = 0;
    std::size_t queries_on = 0, queries_off = 0, queries_msa = 0;
    double seconds = 0.0;
};

SolverRun solver_suite() {
    SolverRun r;
    std::mt19937_64 rng(20240611);
    const auto start = Clock::now();
    for (int t = 0; t < 60; ++t) {
        const auto inst = ot::random_instance(rng);
        const std::size_t n = inst.text.size();
        auto oracle = inst.oracle();
        const auto table = ot::robust_table(oracle);
        const auto brute = ot::brute_force_ore(table, n, inst.cost);
        ++r.instances;

        HsOptions on;
        on.attack.seed = static_cast<std::uint64_t>(t);
        auto hs_oracle = inst.oracle();
        const auto hs = ore_hs(hs_oracle, inst.cost, {}, on);
        r.queries_on += hs.trace.entailment_queries;

        auto msa_oracle = inst.oracle();
        const auto msa = ore_msa(msa_oracle, inst.cost);
        r.queries_msa += msa.trace.entailment_queries;

        HsOptions off;
        off.use_attacks = false;
        auto off_oracle = inst.oracle();
        const auto plain = ore_hs(off_oracle, inst.cost, {}, off);
        r.queries_off += plain.trace.entailment_queries;

        // Robustness rechecked with a fresh verifier, not the solvers' own.
        const Label target = ot::direct_label(inst.net, inst.text.point);
        const bool hs_ok = entails(inst.net, inst.space(), hs.words, target).is_robust();
        const bool msa_ok = entails(inst.net, inst.space(), msa.words, target).is_robust();
        if (hs_ok && msa_ok) ++r.robust;
        if (hs_ok && cost_equal(hs.cost, brute.cost) && cost_equal(inst.cost.total(hs.words), brute.cost)) ++r.optimal_hs;
        if (msa_ok && cost_equal(msa.cost, brute.cost) && cost_equal(inst.cost.total(msa.words), brute.cost))
            ++r.optimal_msa;
        if (hs.cost == msa.cost || cost_equal(hs.cost, msa.cost)) ++r.cost_agree;
        const auto listed = enumerate_all_minimal(oracle, inst.cost, brute.cost);
        if (listed.size() == 1) {
            ++r.unique;
            if (hs.words == msa.words && hs.words == listed[0].words) ++r.unique_sets_agree;
        }
        for (const auto* e : {&hs, &msa, &plain}) {
            ++r.prime_checked;
            if (!prime(table, e->words)) ++r.prime_violations;
        }
        if (cost_equal(plain.cost, hs.cost) && cost_equal(plain.cost, brute.cost)) ++r.attack_cost_agree;
    }
    r.seconds = seconds_since(start);
    return r;
}

// ---------------------------------------------------------------------------

void soundness_fuzz(Report& report) {
    std::mt19937_64 rng(77001);
    std::size_t queries = 0, robust = 0, cex = 0, exhausted = 0, bad_cex = 0, contradicted = 0, samples = 0;
    const auto start = Clock::now();
    while (queries < 1000) {
        ot::InstanceShape shape;
        shape.allow_conv = true;
        const auto inst = ot::random_instance(rng, shape);
        const auto space = inst.space();
        const Label target = ot::direct_label(inst.net, inst.text.point);
        Verifier v(inst.net);
        const std::size_t n = inst.text.size();
        for (int q = 0; q < 4 && queries < 1000; ++q, ++queries) {
            const WordSet e = ot::from_bits(rng() & ((1u << n) - 1), n);
            const Box box = space.box(e);
            const auto r = v.check(box, target);
            if (r.is_exhausted()) {
                ++exhausted;
            } else if (r.is_counterexample()) {
                ++cex;
                const auto& c = r.counterexample();
                if (!box.contains(c.point) || ot::direct_label(inst.net, c.point) == target ||
                    ot::direct_label(inst.net, c.point) != c.predicted)
                    ++bad_cex;
            } else {
                ++robust;
                for (int s = 0; s < 100000; ++s, ++samples) {
                    if (ot::direct_label(inst.net, uniform_point(rng, box)) != target) {
                        ++contradicted;
                        break;
                    }
                }
            }
        }
    }
    report.line("verifier-soundness-fuzz", bad_cex == 0 && contradicted == 0 && queries >= 1000,
                fmt("%zu queries (%zu robust, %zu counterexamples, %zu exhausted); %zu bad counterexamples, "
                    "%zu robust verdicts contradicted by %zu samples; %.1f s",
                    queries, robust, cex, exhausted, bad_cex, contradicted, samples, seconds_since(start)));
}

void affine_completeness(Report& report) {
    std::mt19937_64 rng(88002);
    std::size_t queries = 0, verdict_mismatch = 0, robust = 0;
    double worst_bound_error = 0.0;
    while (queries < 200) {
        const std::size_t words = 2 + rng() % 4, dim = 1 + rng() % 3;
        const Network net = strip_relu(ot::random_network(rng, words, dim, 2 + rng() % 2, rng() % 3, 2 + rng() % 6,
                                                          rng() % 2 == 0));
        Box box;
        std::uniform_real_distribution<double> c(-1.0, 1.0), w(0.0, 0.8);
        for (std::size_t k = 0; k < net.input_dim(); ++k) {
            const double mid = c(rng), half = rng() % 5 == 0 ? 0.0 : w(rng);
            box.lo.push_back(mid - half);
            box.hi.push_back(mid + half);
        }
        const auto exact = ot::affine_closed_form(net, box);
        const auto got = bounds(net, box);
        for (std::size_t j = 0; j < exact.size(); ++j) {
            worst_bound_error = std::max({worst_bound_error, std::abs(exact[j].lo - got[j].lo),
                                          std::abs(exact[j].hi - got[j].hi)});
        }
        const Label target = ot::direct_label(net, uniform_point(rng, box));
        bool closed_form_robust = true;
        for (Label r = 0; r < net.num_labels(); ++r) {
            if (r == target) continue;
            const double gap = ot::affine_gap_min(net, box, target, r);
            closed_form_robust = closed_form_robust && (r > target ? gap >= 0.0 : gap > 0.0);
        }
        const auto verdict = Verifier(net).check(box, target);
        if (verdict.is_exhausted() || verdict.is_robust() != closed_form_robust) ++verdict_mismatch;
        if (closed_form_robust) ++robust;
        ++queries;
    }
    report.line("affine-completeness", verdict_mismatch == 0 && worst_bound_error <= 1e-9,
                fmt("%zu queries on ReLU-free nets (%zu robust); %zu verdict mismatches; max bound error %.3g",
                    queries, robust, verdict_mismatch, worst_bound_error));
}

void gradient_check(Report& report) {
    std::mt19937_64 rng(99003);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::size_t pairs = 0, violations = 0;
    double worst = 0.0;
    while (pairs < 200) {
        const Network net = ot::random_network(rng, 2 + rng() % 4, 1 + rng() % 3, 2 + rng() % 2, rng() % 3,
                                               2 + rng() % 7, rng() % 3 == 0);
        std::vector<double> x(net.input_dim());
        for (auto& v : x) v = u(rng);
        if (ot::min_kink_distance(net, x) < 1e-3) continue;
        const Label a = rng() % net.num_labels();
        const Label b = (a + 1) % net.num_labels();
        const auto g = gradient(net, x, a, b);
        const auto fd = ot::finite_difference(net, x, a, b);
        double rel = 0.0;
        for (std::size_t k = 0; k < g.size(); ++k)
            rel = std::max(rel, std::abs(g[k] - fd[k]) / std::max(std::abs(fd[k]), 1e-6));
        worst = std::max(worst, rel);
        if (rel >= 1e-4) ++violations;
        ++pairs;
    }
    report.line("gradient-check", violations == 0,
                fmt("%zu (net, point) pairs; max relative error %.3g; %zu above 1e-4", pairs, worst, violations));
}

void monotonicity(Report& report) {
    const auto table = load_embeddings(ot::fixture("lexicon.json"));
    struct Fix {
        const char* model;
        std::vector<std::vector<std::string>> texts;
    };
    const std::vector<Fix> fixtures = {
        {"sum.json", {{"good", "great"}, {"bad", "nice"}, {"okay", "dull"}}},
        {"firstword.json", {{"good", "bad"}, {"fine", "awful"}, {"poor", "superb"}}},
        {"toy_relu.json", {{"good", "bad", "great"}, {"awful", "nice", "fine"}, {"okay", "dull", "superb"}}},
        {"toy_cnn.json", {{"good", "awful", "nice", "dull"}, {"bad", "great", "poor", "okay"}, {"fine", "superb", "dull", "bad"}}},
    };
    const double scale = 1.0;
    std::size_t sequences = 0, violations = 0, solver_mismatch = 0;
    auto solve = [&](const Network& net, const TextInput& text, const PerturbationSpec& spec) {
        EntailmentOracle a(net, PerturbationSpace::build(text, spec, table));
        EntailmentOracle b(net, PerturbationSpace::build(text, spec, table));
        const auto cost = CostFunction::uniform(text.size());
        const double hs = ore_hs(a, cost).cost, msa = ore_msa(b, cost).cost;
        if (!cost_equal(hs, msa)) ++solver_mismatch;
        return hs;
    };
    std::string trail;
    for (const auto& f : fixtures) {
        const Network net = load_model(ot::fixture(f.model));
        for (const auto& words : f.texts) {
            const TextInput text = encode(words, net.input_words(), table);
            std::vector<std::vector<PerturbationSpec>> ladders;
            ladders.emplace_back();
            for (double m : {0.25, 0.5, 1.0, 2.0}) ladders.back().push_back(PerturbationSpec::eps_ball(m * scale));
            for (auto metric : {Metric::Euclidean, Metric::Cosine}) {
                ladders.emplace_back();
                for (std::size_t k : {1, 2, 4, 8}) ladders.back().push_back(PerturbationSpec::knn_box(k, metric));
            }
            for (const auto& ladder : ladders) {
                ++sequences;
                double prev = 0.0;
                std::string costs;
                for (const auto& spec : ladder) {
                    const double c = solve(net, text, spec);
                    costs += fmt("%g ", c);
                    if (cost_less(c, prev)) ++violations;
                    prev = std::max(prev, c);
                }
                if (trail.size() < 200 && &ladder == &ladders.front()) trail += std::string(f.model) + "[" + costs + "] ";
            }
        }
    }
    report.line("monotonicity", violations == 0 && solver_mismatch == 0,
                fmt("%zu eps/k ladders over 4 fixtures x 3 texts; %zu decreases; %zu HS/MSA mismatches; eps costs: %s",
                    sequences, violations, solver_mismatch, trail.c_str()));
}

void bias_suite(Report& report) {
    const auto toy = load_embeddings(ot::fixture("toy.json"));
    const Network first = load_model(ot::fixture("firstword.json"));
    EntailmentOracle o(first, PerturbationSpace::build(encode({"good", "bad"}, 2, toy), PerturbationSpec::eps_ball(1.5), toy));
    const auto cost = CostFunction::uniform(2);
    const auto p0 = detect_bias(o, {0}, cost);
    const auto p1 = detect_bias(o, {1}, cost);
    const bool fixtures_ok = p0.biased && p0.counterexample && !p1.biased && p1.witness && p1.witness->words == WordSet({0});

    std::mt19937_64 rng(11004);
    std::size_t disagreements = 0, biased = 0, bad_witness = 0;
    for (int t = 0; t < 30; ++t) {
        const auto inst = ot::random_instance(rng);
        const std::size_t n = inst.text.size();
        auto oracle = inst.oracle();
        const auto table = ot::robust_table(oracle);
        WordSet prot = ot::from_bits(rng() & ((1u << n) - 1), n);
        if (prot.empty()) prot.insert(rng() % n);
        const bool brute_biased = !ot::brute_force_ore(table, n, inst.cost, {}, prot).feasible;
        const auto v = detect_bias(oracle, prot, inst.cost);
        if (v.biased != brute_biased) ++disagreements;
        if (v.biased) {
            ++biased;
            if (!v.counterexample || !oracle.space().box(prot.complement(n)).contains(v.counterexample->point) ||
                ot::direct_label(inst.net, v.counterexample->point) == oracle.target())
                ++bad_witness;
        } else if (!v.witness || v.witness->words.intersects(prot) || !table[ot::to_bits(v.witness->words)]) {
            ++bad_witness;
        }
    }
    report.line("bias", fixtures_ok && disagreements == 0 && bad_witness == 0,
                fmt("fixture verdicts %s; 30 random instances (%zu biased): %zu disagreements with brute force, "
                    "%zu invalid witnesses",
                    fixtures_ok ? "as expected" : "WRONG", biased, disagreements, bad_witness));
}

void repair_suite(Report& report) {
    std::mt19937_64 rng(12005);
    std::size_t pairs = 0, failures = 0;
    ot::InstanceShape shape;
    shape.max_words = 8;
    while (pairs < 30) {
        const auto inst = ot::random_instance(rng, shape);
        const std::size_t n = inst.text.size();
        auto oracle = inst.oracle();
        const auto table = ot::robust_table(oracle);
        WordSet seed;
        bool found = false;
        for (int tries = 0; tries < 20 && !found; ++tries) {
            seed = ot::from_bits(rng() & ((1u << n) - 1) & rng(), n);
            found = !table[ot::to_bits(seed)];
        }
        if (!found) continue;
        ++pairs;
        const auto brute = ot::brute_force_ore(table, n, inst.cost, seed);
        const double best_extension = brute.cost - inst.cost.total(seed);
        for (auto solver : {Solver::HS, Solver::MSA}) {
            const auto e = repair_explanation(oracle, seed, inst.cost, solver);
            const bool ok = seed.is_subset_of(e.words) && table[ot::to_bits(e.words)] &&
                            cost_equal(inst.cost.total(e.words.minus(seed)), best_extension);
            if (!ok) ++failures;
        }
    }
    report.line("repair-minimality", failures == 0,
                fmt("%zu (instance, non-robust seed) pairs with l <= 8, HS and MSA; %zu failures", pairs, failures));
}

void precision_coverage(Report& report) {
    std::mt19937_64 rng(13006);
    std::size_t explanations = 0, imprecise = 0, pairs = 0, coverage_violations = 0;
    std::size_t samples = 0;
    while (explanations < 20 || pairs < 100) {
        const auto inst = ot::random_instance(rng);
        const auto space = inst.space();
        const std::size_t n = inst.text.size();
        auto oracle = inst.oracle();
        if (explanations < 20) {
            const auto e = ore_hs(oracle, inst.cost);
            auto sampler = Sampler::uniform_box(space, explanations);
            const double p = precision(e.words, inst.net, oracle.target(), sampler, 10000);
            samples += 10000;
            if (p != 1.0) ++imprecise;
            ++explanations;
        }
        // Discrete distribution over points built from vocabulary rows.
        std::vector<std::vector<double>> points;
        const Box all = space.box({});
        for (int p = 0; p < 16; ++p) {
            std::vector<double> x = inst.text.point;
            for (std::size_t i = 0; i < n; ++i) {
                if (rng() % 2) continue;
                const auto row = inst.table.vector(rng() % inst.table.size());
                for (std::size_t c = 0; c < inst.text.dim; ++c) x[i * inst.text.dim + c] = row[c];
            }
            if (all.contains(x)) points.push_back(std::move(x));
        }
        if (points.size() < 2 || pairs >= 100) continue;
        std::vector<double> probs(points.size(), 1.0 / static_cast<double>(points.size()));
        double sum = 0.0;
        for (std::size_t i = 0; i + 1 < probs.size(); ++i) sum += probs[i];
        probs.back() = 1.0 - sum;
        auto sampler = Sampler::discrete(space, points, probs, pairs);
        const auto batch = sampler.draw_batch(2000);
        for (int k = 0; k < 10 && pairs < 100; ++k, ++pairs) {
            const WordSet small = ot::from_bits(rng() & ((1u << n) - 1), n);
            const WordSet big = small.united(ot::from_bits(rng() & ((1u << n) - 1), n));
            if (coverage_on(small, inst.text, batch) < coverage_on(big, inst.text, batch)) ++coverage_violations;
        }
    }
    report.line("precision-coverage", imprecise == 0 && coverage_violations == 0,
                fmt("%zu certified explanations, %zu samples, %zu with precision below 1.0; %zu nested pairs, %zu "
                    "coverage violations",
                    explanations, samples, imprecise, pairs, coverage_violations));
}

} // namespace

int main() {
    Report report;

    const auto s = solver_suite();
    report.line("optimality", s.optimal_hs == s.instances && s.optimal_msa == s.instances && s.robust == s.instances &&
                                  s.instances >= 50 && s.seconds < 120.0,
                fmt("%zu instances; HS optimal %zu, MSA optimal %zu, both robust %zu; %.2f s (limit 120 s)",
                    s.instances, s.optimal_hs, s.optimal_msa, s.robust, s.seconds));
    report.line("cross-solver-agreement", s.cost_agree == s.instances && s.unique_sets_agree == s.unique,
                fmt("costs equal on %zu/%zu; sets equal on %zu/%zu unique optima", s.cost_agree, s.instances,
                    s.unique_sets_agree, s.unique));
    report.line("prime-implicant", s.prime_violations == 0,
                fmt("%zu explanations checked; %zu violations", s.prime_checked, s.prime_violations));

    soundness_fuzz(report);
    affine_completeness(report);
    gradient_check(report);
    monotonicity(report);
    bias_suite(report);
    repair_suite(report);
    precision_coverage(report);

    report.line("sparse-attacks", s.attack_cost_agree == s.instances,
                fmt("same optimal cost with and without attacks on %zu/%zu; entailment queries: HS+attacks %zu, "
                    "HS without attacks %zu, MSA %zu",
                    s.attack_cost_agree, s.instances, s.queries_on, s.queries_off, s.queries_msa));

    std::printf("summary: %d criteria failed\n", report.failures);
    return report.failures == 0 ? 0 : 1;
}
