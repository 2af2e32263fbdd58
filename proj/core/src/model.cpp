#include "ore/model.hpp"

#include "ore/errors.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

namespace ore {

namespace {

std::string dim_str(std::size_t n) { return std::to_string(n); }

bool all_finite(const std::vector<double>& v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

void apply_affine(const AffineLayer& layer, std::span<const double> in, std::vector<double>& out) {
    const auto& w = layer.weights;
    out.resize(w.rows());
    for (std::size_t r = 0; r < w.rows(); ++r) {
        auto row = w.row(r);
        double s = layer.bias[r];
        for (std::size_t c = 0; c < row.size(); ++c) s += row[c] * in[c];
        out[r] = s;
    }
}

} // namespace

Matrix Matrix::identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

Matrix Matrix::from_rows(const std::vector<std::vector<double>>& rows) {
    if (rows.empty()) return {};
    Matrix m(rows.size(), rows.front().size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
        if (rows[r].size() != m.cols())
            throw InvalidShape("ragged matrix: row " + dim_str(r) + " has " + dim_str(rows[r].size()) +
                               " entries, expected " + dim_str(m.cols()));
        std::copy(rows[r].begin(), rows[r].end(), m.row(r).begin());
    }
    return m;
}

std::size_t Conv1DLayer::output_positions(std::size_t input_positions) const {
    if (stride == 0) throw InvalidShape("conv1d stride must be >= 1");
    if (width == 0) throw InvalidShape("conv1d kernel width must be >= 1");
    if (width > input_positions)
        throw InvalidShape("conv1d kernel width " + dim_str(width) + " exceeds input length " +
                           dim_str(input_positions));
    return (input_positions - width) / stride + 1;
}

Label argmax_label(std::span<const double> logits) {
    Label best = 0;
    for (Label i = 1; i < logits.size(); ++i) {
        if (logits[i] > logits[best]) best = i;
    }
    return best;
}

Network::Network(std::size_t input_words, std::size_t embedding_dim, std::vector<std::string> labels,
                 std::vector<Layer> layers)
    : input_words_(input_words),
      embedding_dim_(embedding_dim),
      labels_(std::move(labels)),
      layers_(std::move(layers)) {
    if (input_words_ == 0 || embedding_dim_ == 0) throw InvalidShape("input_words and embedding_dim must be >= 1");
    if (labels_.size() < 2) throw InvalidShape("a classifier needs at least 2 labels");
    if (layers_.empty()) throw InvalidShape("network has no layers");
    if (!std::holds_alternative<AffineLayer>(layers_.back()))
        throw InvalidShape("final layer must be affine");

    dims_.reserve(layers_.size() + 1);
    std::size_t dim = input_dim();
    dims_.push_back(dim);
    for (std::size_t i = 0; i < layers_.size(); ++i) {
        const std::string where = "layer " + dim_str(i);
        if (const auto* a = std::get_if<AffineLayer>(&layers_[i])) {
            if (a->weights.cols() != dim)
                throw InvalidShape(where + ": weights have " + dim_str(a->weights.cols()) +
                                   " columns, input is " + dim_str(dim));
            if (a->bias.size() != a->weights.rows())
                throw InvalidShape(where + ": bias length " + dim_str(a->bias.size()) + " does not match " +
                                   dim_str(a->weights.rows()) + " rows");
            if (!all_finite(a->weights.data()) || !all_finite(a->bias))
                throw InvalidInput(where + ": non-finite weight");
            dim = a->weights.rows();
        } else if (const auto* c = std::get_if<Conv1DLayer>(&layers_[i])) {
            if (c->in_channels == 0 || c->out_channels == 0) throw InvalidShape(where + ": zero channels");
            if (dim % c->in_channels != 0)
                throw InvalidShape(where + ": input width " + dim_str(dim) + " is not a multiple of " +
                                   dim_str(c->in_channels) + " channels");
            if (c->kernel.size() != c->out_channels * c->width * c->in_channels)
                throw InvalidShape(where + ": kernel size does not match its shape");
            if (c->bias.size() != c->out_channels)
                throw InvalidShape(where + ": bias length does not match out_channels");
            if (!all_finite(c->kernel) || !all_finite(c->bias))
                throw InvalidInput(where + ": non-finite weight");
            dim = c->output_positions(dim / c->in_channels) * c->out_channels;
        } else if (i + 1 == layers_.size()) {
            throw InvalidShape("relu cannot be the final layer");
        }
        dims_.push_back(dim);
    }
    if (dim != labels_.size())
        throw InvalidShape("final layer produces " + dim_str(dim) + " logits for " + dim_str(labels_.size()) +
                           " labels");
}

bool Network::has_conv() const {
    return std::any_of(layers_.begin(), layers_.end(),
                       [](const Layer& l) { return std::holds_alternative<Conv1DLayer>(l); });
}

Network Network::lowered() const {
    std::vector<Layer> out;
    out.reserve(layers_.size());
    for (std::size_t i = 0; i < layers_.size(); ++i) {
        if (const auto* c = std::get_if<Conv1DLayer>(&layers_[i])) {
            out.emplace_back(lower_conv(*c, dims_[i] / c->in_channels));
        } else {
            out.push_back(layers_[i]);
        }
    }
    Network n(input_words_, embedding_dim_, labels_, std::move(out));
    n.metadata_ = metadata_;
    return n;
}

std::vector<double> apply_conv(const Conv1DLayer& conv, std::span<const double> input) {
    const std::size_t positions = input.size() / conv.in_channels;
    const std::size_t out_positions = conv.output_positions(positions);
    std::vector<double> out(out_positions * conv.out_channels);
    for (std::size_t p = 0; p < out_positions; ++p) {
        for (std::size_t o = 0; o < conv.out_channels; ++o) {
            double s = conv.bias[o];
            for (std::size_t j = 0; j < conv.width; ++j) {
                const std::size_t base = (p * conv.stride + j) * conv.in_channels;
                for (std::size_t c = 0; c < conv.in_channels; ++c) s += conv.weight(o, j, c) * input[base + c];
            }
            out[p * conv.out_channels + o] = s;
        }
    }
    return out;
}

AffineLayer lower_conv(const Conv1DLayer& conv, std::size_t input_positions) {
    const std::size_t out_positions = conv.output_positions(input_positions);
    AffineLayer a{Matrix(out_positions * conv.out_channels, input_positions * conv.in_channels),
                  std::vector<double>(out_positions * conv.out_channels)};
    for (std::size_t p = 0; p < out_positions; ++p) {
        for (std::size_t o = 0; o < conv.out_channels; ++o) {
            const std::size_t r = p * conv.out_channels + o;
            a.bias[r] = conv.bias[o];
            for (std::size_t j = 0; j < conv.width; ++j) {
                const std::size_t base = (p * conv.stride + j) * conv.in_channels;
                for (std::size_t c = 0; c < conv.in_channels; ++c) a.weights(r, base + c) = conv.weight(o, j, c);
            }
        }
    }
    return a;
}

Evaluator::Evaluator(const Network& net) : net_(&net) {
    std::size_t widest = net.input_dim();
    for (std::size_t i = 0; i <= net.layers().size(); ++i) widest = std::max(widest, net.layer_input_dim(i));
    a_.reserve(widest);
    b_.reserve(widest);
}

std::span<const double> Evaluator::logits(std::span<const double> x) {
    if (x.size() != net_->input_dim())
        throw InvalidInput("input has dimension " + dim_str(x.size()) + ", network expects " +
                           dim_str(net_->input_dim()));
    a_.assign(x.begin(), x.end());
    for (const auto& layer : net_->layers()) {
        if (const auto* aff = std::get_if<AffineLayer>(&layer)) {
            apply_affine(*aff, a_, b_);
            std::swap(a_, b_);
        } else if (const auto* conv = std::get_if<Conv1DLayer>(&layer)) {
            a_ = apply_conv(*conv, a_);
        } else {
            for (auto& v : a_) v = v > 0.0 ? v : 0.0;
        }
    }
    return a_;
}

Prediction forward(const Network& net, std::span<const double> x) {
    Evaluator ev(net);
    auto l = ev.logits(x);
    return {argmax_label(l), std::vector<double>(l.begin(), l.end())};
}

std::vector<double> gradient(const Network& net, std::span<const double> x, Label a, Label b) {
    if (net.has_conv()) return gradient(net.lowered(), x, a, b);
    if (x.size() != net.input_dim())
        throw InvalidInput("input has dimension " + dim_str(x.size()) + ", network expects " +
                           dim_str(net.input_dim()));
    if (a >= net.num_labels() || b >= net.num_labels()) throw InvalidInput("label out of range");

    // Forward pass keeping each layer's input.
    const auto& layers = net.layers();
    std::vector<std::vector<double>> inputs;
    inputs.reserve(layers.size());
    std::vector<double> cur(x.begin(), x.end());
    for (const auto& layer : layers) {
        inputs.push_back(cur);
        if (const auto* aff = std::get_if<AffineLayer>(&layer)) {
            std::vector<double> next;
            apply_affine(*aff, cur, next);
            cur = std::move(next);
        } else {
            for (auto& v : cur) v = v > 0.0 ? v : 0.0;
        }
    }

    std::vector<double> g(net.num_labels(), 0.0);
    g[a] += 1.0;
    g[b] -= 1.0;
    for (std::size_t i = layers.size(); i-- > 0;) {
        if (const auto* aff = std::get_if<AffineLayer>(&layers[i])) {
            std::vector<double> prev(aff->weights.cols(), 0.0);
            for (std::size_t r = 0; r < aff->weights.rows(); ++r) {
                if (g[r] == 0.0) continue;
                auto row = aff->weights.row(r);
                for (std::size_t c = 0; c < row.size(); ++c) prev[c] += g[r] * row[c];
            }
            g = std::move(prev);
        } else {
            const auto& pre = inputs[i];
            for (std::size_t k = 0; k < g.size(); ++k) {
                if (pre[k] <= 0.0) g[k] = 0.0;
            }
        }
    }
    return g;
}

} // namespace ore
