#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace ore {

using Label = std::size_t;

/// Dense row-major matrix of doubles.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    static Matrix identity(std::size_t n);
    /// Throws InvalidShape on ragged input.
    static Matrix from_rows(const std::vector<std::vector<double>>& rows);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }

    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }
    std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
    const std::vector<double>& data() const noexcept { return data_; }

    friend bool operator==(const Matrix&, const Matrix&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

struct AffineLayer {
    Matrix weights;            // out x in
    std::vector<double> bias;  // out

    friend bool operator==(const AffineLayer&, const AffineLayer&) = default;
};

struct ReluLayer {
    friend bool operator==(const ReluLayer&, const ReluLayer&) = default;
};

/// 1-D convolution over a position-major input (position p, channel c at p * in_channels + c).
/// Output is position-major as well: out[p * out_channels + o].
struct Conv1DLayer {
    std::size_t out_channels = 1;
    std::size_t width = 1;
    std::size_t in_channels = 1;
    std::size_t stride = 1;
    std::vector<double> kernel;  // [out][width][in]
    std::vector<double> bias;    // out_channels

    double weight(std::size_t o, std::size_t j, std::size_t c) const {
        return kernel[(o * width + j) * in_channels + c];
    }
    /// Throws InvalidShape if the kernel does not fit.
    std::size_t output_positions(std::size_t input_positions) const;

    friend bool operator==(const Conv1DLayer&, const Conv1DLayer&) = default;
};

using Layer = std::variant<AffineLayer, ReluLayer, Conv1DLayer>;

struct Prediction {
    Label label = 0;
    std::vector<double> logits;
};

/// Index of the largest logit; ties go to the smallest index.
Label argmax_label(std::span<const double> logits);

struct LoadMetadata {
    std::size_t dropped_dropout_layers = 0;
};

/// A feed-forward classifier over l*d embedded inputs, ending in an affine
/// layer that produces one logit per label. Immutable after construction.
class Network {
public:
    /// Validates the dimension chain; throws InvalidShape or InvalidInput.
    Network(std::size_t input_words, std::size_t embedding_dim, std::vector<std::string> labels,
            std::vector<Layer> layers);

    std::size_t input_words() const noexcept { return input_words_; }
    std::size_t embedding_dim() const noexcept { return embedding_dim_; }
    std::size_t input_dim() const noexcept { return input_words_ * embedding_dim_; }
    std::size_t num_labels() const noexcept { return labels_.size(); }
    const std::vector<std::string>& labels() const noexcept { return labels_; }
    const std::vector<Layer>& layers() const noexcept { return layers_; }
    /// Input width of layer i; layer_input_dim(layers().size()) is num_labels().
    std::size_t layer_input_dim(std::size_t i) const { return dims_.at(i); }

    bool has_conv() const;
    /// Same function with every Conv1D replaced by its affine lowering.
    Network lowered() const;

    const LoadMetadata& metadata() const noexcept { return metadata_; }
    void set_metadata(LoadMetadata m) { metadata_ = m; }

private:
    std::size_t input_words_;
    std::size_t embedding_dim_;
    std::vector<std::string> labels_;
    std::vector<Layer> layers_;
    std::vector<std::size_t> dims_;
    LoadMetadata metadata_;
};

/// Reusable forward evaluator with preallocated scratch space. Not thread-safe;
/// use one per worker.
class Evaluator {
public:
    explicit Evaluator(const Network& net);

    std::span<const double> logits(std::span<const double> x);
    Label label(std::span<const double> x) { return argmax_label(logits(x)); }

private:
    const Network* net_;
    std::vector<double> a_;
    std::vector<double> b_;
};

Prediction forward(const Network& net, std::span<const double> x);

/// Gradient of (logit_a - logit_b) with respect to the input. ReLUs whose
/// pre-activation is <= 0 contribute slope 0.
std::vector<double> gradient(const Network& net, std::span<const double> x, Label a, Label b);

AffineLayer lower_conv(const Conv1DLayer& conv, std::size_t input_positions);

/// Direct convolution, used by forward on un-lowered networks.
std::vector<double> apply_conv(const Conv1DLayer& conv, std::span<const double> input);

/// Throws ModelFormatError with the JSON location of the first problem.
Network load_model(std::istream& in);
Network load_model(const std::filesystem::path& path);
/// Canonical JSON: sorted keys, shortest round-trip number formatting.
std::string save_model(const Network& net);

} // namespace ore
