#pragma once

#include "ore/word_set.hpp"

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <variant>
#include <vector>

namespace ore {

inline constexpr std::string_view kPadToken = "<PAD>";

class Vocabulary {
public:
    /// Words must be unique and include kPadToken.
    explicit Vocabulary(std::vector<std::string> words);

    std::size_t size() const noexcept { return words_.size(); }
    const std::string& word(std::size_t id) const { return words_.at(id); }
    const std::vector<std::string>& words() const noexcept { return words_; }
    std::optional<std::size_t> find(std::string_view word) const;
    /// Throws UnknownWord.
    std::size_t id(std::string_view word) const;
    std::size_t pad_id() const noexcept { return pad_id_; }

private:
    std::vector<std::string> words_;
    std::unordered_map<std::string, std::size_t> index_;
    std::size_t pad_id_ = 0;
};

/// Word embedding: one d-dimensional row per vocabulary entry.
class EmbeddingTable {
public:
    EmbeddingTable(Vocabulary vocab, std::size_t dim, std::vector<double> rows);

    const Vocabulary& vocab() const noexcept { return vocab_; }
    std::size_t dim() const noexcept { return dim_; }
    std::size_t size() const noexcept { return vocab_.size(); }
    std::span<const double> vector(std::size_t id) const { return {rows_.data() + id * dim_, dim_}; }
    std::span<const double> vector(std::string_view word) const { return vector(vocab_.id(word)); }

private:
    Vocabulary vocab_;
    std::size_t dim_;
    std::vector<double> rows_;
};

EmbeddingTable load_embeddings(std::istream& in);
EmbeddingTable load_embeddings(const std::filesystem::path& path);
std::string save_embeddings(const EmbeddingTable& table);

/// A PAD-padded token sequence and its concatenated embedding.
struct TextInput {
    std::vector<std::string> tokens;
    std::vector<std::size_t> token_ids;
    std::size_t dim = 0;
    std::vector<double> point;

    std::size_t size() const noexcept { return tokens.size(); }
    std::span<const double> block(std::size_t i) const { return {point.data() + i * dim, dim}; }
};

/// Throws UnknownWord or TooLong.
TextInput encode(const std::vector<std::string>& words, std::size_t length, const EmbeddingTable& table);
std::vector<std::string> tokenize(std::string_view text);

enum class Metric { Euclidean, Cosine };

double distance(std::span<const double> a, std::span<const double> b, Metric metric);

/// The k words closest to `id`, the query itself first, then by (distance, vocabulary index).
std::vector<std::size_t> knn(std::size_t id, std::size_t k, Metric metric, const EmbeddingTable& table);
std::vector<std::string> knn(std::string_view word, std::size_t k, Metric metric, const EmbeddingTable& table);

struct EpsBall {
    double eps;
};
struct KnnBox {
    std::size_t k;
    Metric metric = Metric::Euclidean;
};
/// Box closure of an explicit replacement list per text position.
struct ExplicitSets {
    std::vector<std::vector<std::string>> per_position;
};

class PerturbationSpec {
public:
    using Kind = std::variant<EpsBall, KnnBox, ExplicitSets>;

    static PerturbationSpec eps_ball(double eps);
    static PerturbationSpec knn_box(std::size_t k, Metric metric = Metric::Euclidean);
    static PerturbationSpec explicit_sets(std::vector<std::vector<std::string>> per_position);

    const Kind& kind() const noexcept { return kind_; }
    std::string describe() const;

private:
    explicit PerturbationSpec(Kind k) : kind_(std::move(k)) {}
    Kind kind_;
};

struct Box {
    std::vector<double> lo;
    std::vector<double> hi;

    static Box point(std::span<const double> x);

    std::size_t size() const noexcept { return lo.size(); }
    bool contains(std::span<const double> x, double tol = 0.0) const;
    bool contains(const Box& inner) const;
    bool degenerate() const;
    double width(std::size_t i) const { return hi[i] - lo[i]; }
};

/// Box for a single word. ExplicitSets needs the text position (`position`).
Box word_box(std::size_t id, const PerturbationSpec& spec, const EmbeddingTable& table,
             std::size_t position = 0);

/// Per-word boxes of one text, from which the text-level box for any fixed
/// set is assembled without recomputing neighbours.
class PerturbationSpace {
public:
    PerturbationSpace(TextInput text, std::vector<Box> word_boxes);
    static PerturbationSpace build(const TextInput& text, const PerturbationSpec& spec,
                                   const EmbeddingTable& table);

    const TextInput& text() const noexcept { return text_; }
    std::size_t num_words() const noexcept { return text_.size(); }
    std::size_t dim() const noexcept { return text_.dim; }
    const Box& word_box(std::size_t i) const { return boxes_.at(i); }

    /// Fixed words pinned to their embedding, every other word spans its box.
    /// Throws InvalidIndex.
    Box box(const WordSet& fixed) const;

private:
    TextInput text_;
    std::vector<Box> boxes_;
};

Box build_perturbation(const TextInput& text, const WordSet& fixed, const PerturbationSpec& spec,
                       const EmbeddingTable& table);

} // namespace ore
