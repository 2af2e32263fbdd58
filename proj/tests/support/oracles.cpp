#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace ore::testing {

std::filesystem::path fixture(const std::string& name) { return std::filesystem::path(ORE_FIXTURE_DIR) / name; }

namespace {

std::vector<double> conv_direct(const Conv1DLayer& conv, const std::vector<double>& a) {
    const std::size_t n = a.size() / conv.in_channels;
    const std::size_t positions = (n - conv.width) / conv.stride + 1;
    std::vector<double> y(positions * conv.out_channels);
    for (std::size_t p = 0; p < positions; ++p) {
        for (std::size_t o = 0; o < conv.out_channels; ++o) {
            double s = conv.bias[o];
            for (std::size_t j = 0; j < conv.width; ++j) {
                for (std::size_t c = 0; c < conv.in_channels; ++c)
                    s += conv.weight(o, j, c) * a[(p * conv.stride + j) * conv.in_channels + c];
            }
            y[p * conv.out_channels + o] = s;
        }
    }
    return y;
}

std::vector<double> apply_layer(const Layer& layer, const std::vector<double>& a) {
    if (const auto* aff = std::get_if<AffineLayer>(&layer)) {
        std::vector<double> y(aff->weights.rows());
        for (std::size_t r = 0; r < y.size(); ++r) {
            double s = aff->bias[r];
            for (std::size_t c = 0; c < a.size(); ++c) s += aff->weights(r, c) * a[c];
            y[r] = s;
        }
        return y;
    }
    if (const auto* conv = std::get_if<Conv1DLayer>(&layer)) return conv_direct(*conv, a);
    std::vector<double> y(a);
    for (auto& v : y) v = std::max(v, 0.0);
    return y;
}

} // namespace

std::vector<double> direct_logits(const Network& net, std::span<const double> x) {
    std::vector<double> a(x.begin(), x.end());
    for (const auto& layer : net.layers()) a = apply_layer(layer, a);
    return a;
}

Label direct_label(const Network& net, std::span<const double> x) {
    const auto z = direct_logits(net, x);
    Label best = 0;
    for (Label j = 1; j < z.size(); ++j) {
        if (z[j] > z[best]) best = j;
    }
    return best;
}

std::vector<double> finite_difference(const Network& net, std::span<const double> x, Label a, Label b, double h) {
    std::vector<double> g(x.size());
    std::vector<double> p(x.begin(), x.end());
    for (std::size_t k = 0; k < x.size(); ++k) {
        p[k] = x[k] + h;
        const auto up = direct_logits(net, p);
        p[k] = x[k] - h;
        const auto down = direct_logits(net, p);
        p[k] = x[k];
        g[k] = ((up[a] - up[b]) - (down[a] - down[b])) / (2.0 * h);
    }
    return g;
}

double min_kink_distance(const Network& net, std::span<const double> x) {
    double best = std::numeric_limits<double>::infinity();
    std::vector<double> a(x.begin(), x.end());
    for (const auto& layer : net.layers()) {
        if (std::holds_alternative<ReluLayer>(layer)) {
            for (double v : a) best = std::min(best, std::abs(v));
        }
        a = apply_layer(layer, a);
    }
    return best;
}

namespace {

// Columns of the composed map are the images of basis vectors minus the offset.
void compose(const Network& net, std::vector<double>& offset, std::vector<std::vector<double>>& col) {
    const std::size_t n = net.input_dim();
    offset.assign(n, 0.0);
    for (const auto& layer : net.layers()) {
        if (std::holds_alternative<ReluLayer>(layer)) throw std::invalid_argument("network has a relu");
        offset = apply_layer(layer, offset);
    }
    col.assign(n, {});
    for (std::size_t k = 0; k < n; ++k) {
        std::vector<double> e(n, 0.0);
        e[k] = 1.0;
        for (const auto& layer : net.layers()) e = apply_layer(layer, e);
        for (std::size_t j = 0; j < e.size(); ++j) e[j] -= offset[j];
        col[k] = std::move(e);
    }
}

} // namespace

double affine_gap_min(const Network& net, const Box& box, Label target, Label rival) {
    std::vector<double> offset;
    std::vector<std::vector<double>> col;
    compose(net, offset, col);
    double lo = offset[target] - offset[rival];
    for (std::size_t k = 0; k < col.size(); ++k) {
        const double w = col[k][target] - col[k][rival];
        lo += w * (w > 0.0 ? box.lo[k] : box.hi[k]);
    }
    return lo;
}

std::vector<Interval> affine_closed_form(const Network& net, const Box& box) {
    const std::size_t n = net.input_dim();
    std::vector<double> offset;
    std::vector<std::vector<double>> col;
    compose(net, offset, col);
    const std::size_t m = offset.size();
    std::vector<Interval> out(m);
    for (std::size_t j = 0; j < m; ++j) {
        double lo = offset[j];
        double hi = offset[j];
        for (std::size_t k = 0; k < n; ++k) {
            const double w = col[k][j];
            lo += w * (w > 0.0 ? box.lo[k] : box.hi[k]);
            hi += w * (w > 0.0 ? box.hi[k] : box.lo[k]);
        }
        out[j] = {lo, hi};
    }
    return out;
}

std::vector<std::size_t> knn_brute(std::size_t id, std::size_t k, Metric metric, const EmbeddingTable& table) {
    const auto q = table.vector(id);
    std::vector<std::pair<double, std::size_t>> all;
    for (std::size_t i = 0; i < table.size(); ++i) {
        if (i == id) continue;
        const auto v = table.vector(i);
        double d = 0.0;
        if (metric == Metric::Euclidean) {
            for (std::size_t c = 0; c < q.size(); ++c) d += (q[c] - v[c]) * (q[c] - v[c]);
            d = std::sqrt(d);
        } else {
            double dot = 0.0, nq = 0.0, nv = 0.0;
            for (std::size_t c = 0; c < q.size(); ++c) {
                dot += q[c] * v[c];
                nq += q[c] * q[c];
                nv += v[c] * v[c];
            }
            d = (nq == 0.0 || nv == 0.0) ? 2.0 : 1.0 - dot / (std::sqrt(nq) * std::sqrt(nv));
        }
        all.emplace_back(d, i);
    }
    std::sort(all.begin(), all.end());
    std::vector<std::size_t> out{id};
    for (std::size_t i = 0; out.size() < k; ++i) out.push_back(all[i].second);
    return out;
}

WordSet from_bits(std::uint64_t bits, std::size_t n) {
    WordSet s;
    for (std::size_t i = 0; i < n; ++i) {
        if (bits >> i & 1u) s.insert(i);
    }
    return s;
}

std::uint64_t to_bits(const WordSet& s) {
    std::uint64_t b = 0;
    for (auto i : s) b |= std::uint64_t{1} << i;
    return b;
}

std::vector<bool> robust_table(EntailmentOracle& oracle) {
    const std::size_t n = oracle.num_words();
    std::vector<bool> out(std::size_t{1} << n);
    for (std::uint64_t b = 0; b < out.size(); ++b) {
        const auto r = oracle.check(from_bits(b, n));
        if (r.is_exhausted()) throw std::runtime_error("verifier budget exhausted in brute force");
        out[b] = r.is_robust();
    }
    return out;
}

BruteOptimum brute_force_ore(const std::vector<bool>& robust, std::size_t n, const CostFunction& cost,
                             const WordSet& include, const WordSet& exclude) {
    BruteOptimum best;
    const auto inc = to_bits(include);
    const auto exc = to_bits(exclude);
    for (std::uint64_t b = 0; b < robust.size(); ++b) {
        if (!robust[b] || (b & inc) != inc || (b & exc) != 0) continue;
        const WordSet s = from_bits(b, n);
        const double c = cost.total(s);
        if (!best.feasible || cost_less(c, best.cost)) {
            best.feasible = true;
            best.cost = c;
            best.optima = {s};
        } else if (cost_equal(c, best.cost)) {
            best.optima.push_back(s);
        }
    }
    std::sort(best.optima.begin(), best.optima.end());
    return best;
}

Network random_network(std::mt19937_64& rng, std::size_t words, std::size_t dim, std::size_t labels,
                       std::size_t hidden_layers, std::size_t units, bool conv) {
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<Layer> layers;
    std::size_t width = words * dim;
    auto random_affine = [&](std::size_t out, std::size_t in) {
        std::vector<std::vector<double>> rows(out, std::vector<double>(in));
        std::vector<double> bias(out);
        const double scale = 1.0 / std::sqrt(static_cast<double>(in));
        for (auto& row : rows) {
            for (auto& v : row) v = normal(rng) * scale;
        }
        for (auto& v : bias) v = 0.3 * normal(rng);
        return AffineLayer{Matrix::from_rows(rows), bias};
    };
    if (conv && words >= 2) {
        Conv1DLayer c;
        c.out_channels = 2;
        c.width = 2;
        c.in_channels = dim;
        c.stride = 1;
        c.kernel.resize(c.out_channels * c.width * c.in_channels);
        for (auto& v : c.kernel) v = normal(rng) / std::sqrt(static_cast<double>(c.width * dim));
        c.bias.resize(c.out_channels);
        for (auto& v : c.bias) v = 0.3 * normal(rng);
        width = (words - c.width + 1) * c.out_channels;
        layers.emplace_back(std::move(c));
        layers.emplace_back(ReluLayer{});
    }
    for (std::size_t h = 0; h < hidden_layers; ++h) {
        layers.emplace_back(random_affine(units, width));
        layers.emplace_back(ReluLayer{});
        width = units;
    }
    layers.emplace_back(random_affine(labels, width));
    std::vector<std::string> names;
    for (std::size_t j = 0; j < labels; ++j) names.push_back("label" + std::to_string(j));
    return Network(words, dim, names, std::move(layers));
}

Instance random_instance(std::mt19937_64& rng, const InstanceShape& shape) {
    std::uniform_int_distribution<std::size_t> words_d(2, shape.max_words);
    std::uniform_int_distribution<std::size_t> dim_d(1, shape.max_dim);
    std::uniform_int_distribution<std::size_t> hidden_d(0,
                                                         shape.allow_relu ? shape.max_hidden_layers : 0);
    std::uniform_int_distribution<std::size_t> units_d(2, shape.max_units);
    std::uniform_int_distribution<std::size_t> labels_d(2, 3);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    std::bernoulli_distribution coin(0.5);

    const std::size_t l = words_d(rng);
    const std::size_t d = dim_d(rng);
    const std::size_t hidden = hidden_d(rng);
    const bool conv = shape.allow_conv && shape.allow_relu && coin(rng);
    Network net = random_network(rng, l, d, labels_d(rng), hidden, units_d(rng), conv);

    std::vector<std::string> words{std::string(kPadToken)};
    std::vector<double> rows(d, 0.0);
    for (std::size_t i = 0; i + 1 < shape.vocab; ++i) {
        words.push_back("w" + std::to_string(i));
        for (std::size_t c = 0; c < d; ++c) rows.push_back(unit(rng));
    }
    EmbeddingTable table(Vocabulary(words), d, rows);

    std::uniform_int_distribution<std::size_t> word_d(1, shape.vocab - 1);
    std::vector<std::string> tokens;
    for (std::size_t i = 0; i < l; ++i) tokens.push_back(words[word_d(rng)]);
    TextInput text = encode(tokens, l, table);

    std::string description = "l=" + std::to_string(l) + " d=" + std::to_string(d) +
                              " hidden=" + std::to_string(hidden) + (conv ? " conv" : "");
    PerturbationSpec spec = PerturbationSpec::eps_ball(1.0);
    if (coin(rng)) {
        std::uniform_real_distribution<double> eps_d(0.05, 0.6);
        spec = PerturbationSpec::eps_ball(eps_d(rng));
    } else {
        std::uniform_int_distribution<std::size_t> k_d(1, 5);
        spec = PerturbationSpec::knn_box(k_d(rng), coin(rng) ? Metric::Euclidean : Metric::Cosine);
    }
    description += " " + spec.describe();

    std::vector<double> costs(l, 1.0);
    if (shape.random_costs && coin(rng)) {
        std::uniform_int_distribution<int> cost_d(1, 4);
        for (auto& c : costs) c = 0.5 * cost_d(rng);
        description += " weighted";
    }
    return Instance{std::move(net), std::move(table), std::move(text), std::move(spec), CostFunction(costs),
                    std::move(description)};
}

} // namespace ore::testing
