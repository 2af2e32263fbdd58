#include "ore/text.hpp"

#include "ore/errors.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

namespace ore {

Vocabulary::Vocabulary(std::vector<std::string> words) : words_(std::move(words)) {
    bool has_pad = false;
    for (std::size_t i = 0; i < words_.size(); ++i) {
        if (!index_.emplace(words_[i], i).second) throw InvalidInput("duplicate vocabulary word '" + words_[i] + "'");
        if (words_[i] == kPadToken) {
            has_pad = true;
            pad_id_ = i;
        }
    }
    if (!has_pad) throw InvalidInput("vocabulary lacks the " + std::string(kPadToken) + " token");
}

std::optional<std::size_t> Vocabulary::find(std::string_view word) const {
    auto it = index_.find(std::string(word));
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

std::size_t Vocabulary::id(std::string_view word) const {
    if (auto i = find(word)) return *i;
    throw UnknownWord(std::string(word));
}

EmbeddingTable::EmbeddingTable(Vocabulary vocab, std::size_t dim, std::vector<double> rows)
    : vocab_(std::move(vocab)), dim_(dim), rows_(std::move(rows)) {
    if (dim_ == 0) throw InvalidShape("embedding dimension must be >= 1");
    if (rows_.size() != vocab_.size() * dim_)
        throw InvalidShape("embedding has " + std::to_string(rows_.size()) + " values for " +
                           std::to_string(vocab_.size()) + " words of dimension " + std::to_string(dim_));
    if (!std::all_of(rows_.begin(), rows_.end(), [](double v) { return std::isfinite(v); }))
        throw InvalidInput("non-finite embedding value");
}

EmbeddingTable load_embeddings(std::istream& in) {
    using nlohmann::json;
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ModelFormatError("$", std::string("invalid JSON: ") + e.what());
    }
    if (!doc.is_object()) throw ModelFormatError("$", "expected an object");
    for (const char* key : {"dim", "words", "vectors"}) {
        if (!doc.contains(key)) throw ModelFormatError("$", std::string("missing key '") + key + "'");
    }
    if (!doc["dim"].is_number_unsigned()) throw ModelFormatError("dim", "expected a positive integer");
    const auto dim = doc["dim"].get<std::size_t>();
    if (!doc["words"].is_array()) throw ModelFormatError("words", "expected an array of strings");
    std::vector<std::string> words;
    for (std::size_t i = 0; i < doc["words"].size(); ++i) {
        const auto& w = doc["words"][i];
        if (!w.is_string()) throw ModelFormatError("words[" + std::to_string(i) + "]", "expected a string");
        words.push_back(w.get<std::string>());
    }
    const auto& jv = doc["vectors"];
    if (!jv.is_array()) throw ModelFormatError("vectors", "expected an array");
    std::vector<double> rows;
    auto take = [&](const json& v, const std::string& where) {
        if (!v.is_number()) throw ModelFormatError(where, "expected a number");
        const double x = v.get<double>();
        if (!std::isfinite(x)) throw ModelFormatError(where, "non-finite value");
        rows.push_back(x);
    };
    for (std::size_t r = 0; r < jv.size(); ++r) {
        const std::string where = "vectors[" + std::to_string(r) + "]";
        if (jv[r].is_array()) {
            if (jv[r].size() != dim)
                throw ModelFormatError(where, "row has " + std::to_string(jv[r].size()) + " entries, dim is " +
                                                  std::to_string(dim));
            for (std::size_t c = 0; c < jv[r].size(); ++c) take(jv[r][c], where + "[" + std::to_string(c) + "]");
        } else {
            take(jv[r], where);
        }
    }
    if (rows.size() != words.size() * dim)
        throw ModelFormatError("vectors", std::to_string(rows.size()) + " values for " +
                                              std::to_string(words.size()) + " words");
    try {
        return EmbeddingTable(Vocabulary(std::move(words)), dim, std::move(rows));
    } catch (const Error& e) {
        throw ModelFormatError("words", e.what());
    }
}

EmbeddingTable load_embeddings(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ModelFormatError(path.string(), "cannot open file");
    return load_embeddings(in);
}

std::string save_embeddings(const EmbeddingTable& table) {
    nlohmann::json doc;
    doc["dim"] = table.dim();
    doc["words"] = table.vocab().words();
    auto rows = nlohmann::json::array();
    for (std::size_t i = 0; i < table.size(); ++i) {
        auto v = table.vector(i);
        rows.push_back(std::vector<double>(v.begin(), v.end()));
    }
    doc["vectors"] = std::move(rows);
    return doc.dump() + "\n";
}

TextInput encode(const std::vector<std::string>& words, std::size_t length, const EmbeddingTable& table) {
    if (words.size() > length) throw TooLong(words.size(), length);
    TextInput t;
    t.dim = table.dim();
    t.tokens = words;
    t.tokens.resize(length, std::string(kPadToken));
    t.point.reserve(length * t.dim);
    for (const auto& w : t.tokens) {
        const auto id = table.vocab().id(w);
        t.token_ids.push_back(id);
        auto v = table.vector(id);
        t.point.insert(t.point.end(), v.begin(), v.end());
    }
    return t;
}

std::vector<std::string> tokenize(std::string_view text) {
    std::istringstream in{std::string(text)};
    std::vector<std::string> out;
    for (std::string w; in >> w;) out.push_back(w);
    return out;
}

double distance(std::span<const double> a, std::span<const double> b, Metric metric) {
    if (metric == Metric::Euclidean) {
        double s = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
        return std::sqrt(s);
    }
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    // Zero vectors have no direction: distance 2 to everything but another zero vector.
    if (na == 0.0 && nb == 0.0) return 0.0;
    if (na == 0.0 || nb == 0.0) return 2.0;
    return 1.0 - dot / (std::sqrt(na) * std::sqrt(nb));
}

std::vector<std::size_t> knn(std::size_t id, std::size_t k, Metric metric, const EmbeddingTable& table) {
    if (id >= table.size()) throw InvalidIndex("word id out of range");
    if (k == 0 || k > table.size())
        throw InvalidInput("k must lie in [1, " + std::to_string(table.size()) + "], got " + std::to_string(k));
    std::vector<std::pair<double, std::size_t>> ranked;
    ranked.reserve(table.size() - 1);
    const auto query = table.vector(id);
    auto is_zero = [](std::span<const double> v) { return std::all_of(v.begin(), v.end(), [](double x) { return x == 0.0; }); };
    const bool zero_query = is_zero(query);
    for (std::size_t j = 0; j < table.size(); ++j) {
        if (j == id) continue;
        const auto v = table.vector(j);
        // Under cosine a zero vector is only close to its own word.
        const double d = metric == Metric::Cosine && (zero_query || is_zero(v)) ? 2.0 : distance(query, v, metric);
        ranked.emplace_back(d, j);
    }
    std::partial_sort(ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(k - 1), ranked.end());
    std::vector<std::size_t> out{id};
    for (std::size_t i = 0; i + 1 < k; ++i) out.push_back(ranked[i].second);
    return out;
}

std::vector<std::string> knn(std::string_view word, std::size_t k, Metric metric, const EmbeddingTable& table) {
    std::vector<std::string> out;
    for (auto id : knn(table.vocab().id(word), k, metric, table)) out.push_back(table.vocab().word(id));
    return out;
}

PerturbationSpec PerturbationSpec::eps_ball(double eps) {
    if (!(eps > 0.0) || !std::isfinite(eps)) throw InvalidInput("eps must be finite and positive");
    return PerturbationSpec(EpsBall{eps});
}

PerturbationSpec PerturbationSpec::knn_box(std::size_t k, Metric metric) {
    if (k == 0) throw InvalidInput("k must be >= 1");
    return PerturbationSpec(KnnBox{k, metric});
}

PerturbationSpec PerturbationSpec::explicit_sets(std::vector<std::vector<std::string>> per_position) {
    return PerturbationSpec(ExplicitSets{std::move(per_position)});
}

std::string PerturbationSpec::describe() const {
    if (const auto* e = std::get_if<EpsBall>(&kind_)) {
        char buf[32];
        const auto end = std::to_chars(buf, buf + sizeof buf, e->eps).ptr;
        return "eps=" + std::string(buf, end);
    }
    if (const auto* k = std::get_if<KnnBox>(&kind_))
        return "knn=" + std::to_string(k->k) + (k->metric == Metric::Cosine ? " (cosine)" : " (euclidean)");
    return "explicit";
}

Box Box::point(std::span<const double> x) {
    return {std::vector<double>(x.begin(), x.end()), std::vector<double>(x.begin(), x.end())};
}

bool Box::contains(std::span<const double> x, double tol) const {
    if (x.size() != size()) return false;
    for (std::size_t i = 0; i < size(); ++i) {
        if (x[i] < lo[i] - tol || x[i] > hi[i] + tol) return false;
    }
    return true;
}

bool Box::contains(const Box& inner) const {
    if (inner.size() != size()) return false;
    for (std::size_t i = 0; i < size(); ++i) {
        if (inner.lo[i] < lo[i] || inner.hi[i] > hi[i]) return false;
    }
    return true;
}

bool Box::degenerate() const {
    for (std::size_t i = 0; i < size(); ++i) {
        if (lo[i] != hi[i]) return false;
    }
    return true;
}

namespace {

Box bounding_box(const std::vector<std::size_t>& ids, const EmbeddingTable& table) {
    Box b = Box::point(table.vector(ids.front()));
    for (auto id : ids) {
        auto v = table.vector(id);
        for (std::size_t c = 0; c < v.size(); ++c) {
            b.lo[c] = std::min(b.lo[c], v[c]);
            b.hi[c] = std::max(b.hi[c], v[c]);
        }
    }
    return b;
}

} // namespace

Box word_box(std::size_t id, const PerturbationSpec& spec, const EmbeddingTable& table, std::size_t position) {
    if (id >= table.size()) throw InvalidIndex("word id out of range");
    const auto& kind = spec.kind();
    if (const auto* e = std::get_if<EpsBall>(&kind)) {
        Box b = Box::point(table.vector(id));
        for (std::size_t c = 0; c < b.size(); ++c) {
            b.lo[c] -= e->eps;
            b.hi[c] += e->eps;
        }
        return b;
    }
    if (const auto* k = std::get_if<KnnBox>(&kind)) return bounding_box(knn(id, k->k, k->metric, table), table);
    const auto& sets = std::get<ExplicitSets>(kind).per_position;
    std::vector<std::size_t> ids{id};
    if (position < sets.size()) {
        for (const auto& w : sets[position]) ids.push_back(table.vocab().id(w));
    }
    return bounding_box(ids, table);
}

PerturbationSpace::PerturbationSpace(TextInput text, std::vector<Box> word_boxes)
    : text_(std::move(text)), boxes_(std::move(word_boxes)) {
    if (boxes_.size() != text_.size()) throw InvalidInput("one box per word required");
    for (std::size_t i = 0; i < boxes_.size(); ++i) {
        if (boxes_[i].size() != text_.dim) throw InvalidShape("word box dimension mismatch");
        if (!boxes_[i].contains(text_.block(i))) throw InvalidInput("word box must contain the word embedding");
    }
}

PerturbationSpace PerturbationSpace::build(const TextInput& text, const PerturbationSpec& spec,
                                           const EmbeddingTable& table) {
    std::vector<Box> boxes;
    boxes.reserve(text.size());
    for (std::size_t i = 0; i < text.size(); ++i) boxes.push_back(ore::word_box(text.token_ids[i], spec, table, i));
    return PerturbationSpace(text, std::move(boxes));
}

Box PerturbationSpace::box(const WordSet& fixed) const {
    if (!fixed.empty() && fixed.indices().back() >= num_words())
        throw InvalidIndex("word index " + std::to_string(fixed.indices().back()) + " out of range for " +
                           std::to_string(num_words()) + " words");
    Box out;
    out.lo.reserve(text_.point.size());
    out.hi.reserve(text_.point.size());
    for (std::size_t i = 0; i < num_words(); ++i) {
        if (fixed.contains(i)) {
            auto x = text_.block(i);
            out.lo.insert(out.lo.end(), x.begin(), x.end());
            out.hi.insert(out.hi.end(), x.begin(), x.end());
        } else {
            out.lo.insert(out.lo.end(), boxes_[i].lo.begin(), boxes_[i].lo.end());
            out.hi.insert(out.hi.end(), boxes_[i].hi.begin(), boxes_[i].hi.end());
        }
    }
    return out;
}

Box build_perturbation(const TextInput& text, const WordSet& fixed, const PerturbationSpec& spec,
                       const EmbeddingTable& table) {
    return PerturbationSpace::build(text, spec, table).box(fixed);
}

} // namespace ore
