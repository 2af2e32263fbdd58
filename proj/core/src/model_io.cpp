#include "ore/errors.hpp"
#include "ore/model.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <fstream>
#include <sstream>

namespace ore {

namespace {

using nlohmann::json;

const json& require(const json& obj, const std::string& key, const std::string& where) {
    auto it = obj.find(key);
    if (it == obj.end()) throw ModelFormatError(where, "missing key '" + key + "'");
    return *it;
}

double as_number(const json& j, const std::string& where) {
    if (!j.is_number()) throw ModelFormatError(where, "expected a number");
    const double v = j.get<double>();
    if (!std::isfinite(v)) throw ModelFormatError(where, "non-finite value");
    return v;
}

std::size_t as_count(const json& j, const std::string& where) {
    if (!j.is_number_unsigned() && !(j.is_number_integer() && j.get<long long>() >= 0))
        throw ModelFormatError(where, "expected a non-negative integer");
    return j.get<std::size_t>();
}

std::vector<double> as_vector(const json& j, const std::string& where) {
    if (!j.is_array()) throw ModelFormatError(where, "expected an array");
    std::vector<double> v;
    v.reserve(j.size());
    for (std::size_t i = 0; i < j.size(); ++i) v.push_back(as_number(j[i], where + "[" + std::to_string(i) + "]"));
    return v;
}

Matrix as_matrix(const json& j, const std::string& where) {
    if (!j.is_array() || j.empty()) throw ModelFormatError(where, "expected a non-empty array of rows");
    std::vector<std::vector<double>> rows;
    for (std::size_t r = 0; r < j.size(); ++r) {
        const std::string loc = where + "[" + std::to_string(r) + "]";
        rows.push_back(as_vector(j[r], loc));
        if (rows.back().size() != rows.front().size())
            throw ModelFormatError(loc, "row length " + std::to_string(rows.back().size()) + " differs from " +
                                            std::to_string(rows.front().size()));
    }
    return Matrix::from_rows(rows);
}

Conv1DLayer as_conv(const json& layer, const std::string& where) {
    Conv1DLayer conv;
    const std::string kloc = where + ".kernel";
    const json& k = require(layer, "kernel", where);
    if (!k.is_array() || k.empty()) throw ModelFormatError(kloc, "expected a non-empty array");
    if (k[0].is_number()) {
        // Single channel shorthand: a flat list of taps.
        conv.kernel = as_vector(k, kloc);
        conv.width = conv.kernel.size();
    } else {
        conv.out_channels = k.size();
        for (std::size_t o = 0; o < k.size(); ++o) {
            const std::string oloc = kloc + "[" + std::to_string(o) + "]";
            if (!k[o].is_array() || k[o].empty()) throw ModelFormatError(oloc, "expected [width][in] taps");
            if (o == 0) conv.width = k[o].size();
            if (k[o].size() != conv.width) throw ModelFormatError(oloc, "inconsistent kernel width");
            for (std::size_t j = 0; j < k[o].size(); ++j) {
                const std::string jloc = oloc + "[" + std::to_string(j) + "]";
                auto taps = as_vector(k[o][j], jloc);
                if (o == 0 && j == 0) conv.in_channels = taps.size();
                if (taps.size() != conv.in_channels || taps.empty())
                    throw ModelFormatError(jloc, "inconsistent input channel count");
                conv.kernel.insert(conv.kernel.end(), taps.begin(), taps.end());
            }
        }
    }
    conv.stride = layer.contains("stride") ? as_count(layer["stride"], where + ".stride") : 1;
    if (conv.stride == 0) throw ModelFormatError(where + ".stride", "stride must be >= 1");
    if (layer.contains("bias")) {
        conv.bias = as_vector(layer["bias"], where + ".bias");
        if (conv.bias.size() != conv.out_channels)
            throw ModelFormatError(where + ".bias", "length " + std::to_string(conv.bias.size()) +
                                                        " does not match " + std::to_string(conv.out_channels) +
                                                        " output channels");
    } else {
        conv.bias.assign(conv.out_channels, 0.0);
    }
    return conv;
}

} // namespace

Network load_model(std::istream& in) {
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ModelFormatError("$", std::string("invalid JSON: ") + e.what());
    }
    if (!doc.is_object()) throw ModelFormatError("$", "expected an object");

    const std::size_t words = as_count(require(doc, "input_words", "$"), "input_words");
    const std::size_t dim = as_count(require(doc, "embedding_dim", "$"), "embedding_dim");
    const json& jl = require(doc, "labels", "$");
    if (!jl.is_array()) throw ModelFormatError("labels", "expected an array of strings");
    std::vector<std::string> labels;
    for (std::size_t i = 0; i < jl.size(); ++i) {
        if (!jl[i].is_string()) throw ModelFormatError("labels[" + std::to_string(i) + "]", "expected a string");
        labels.push_back(jl[i].get<std::string>());
    }

    const json& jlayers = require(doc, "layers", "$");
    if (!jlayers.is_array()) throw ModelFormatError("layers", "expected an array");
    std::vector<Layer> layers;
    LoadMetadata meta;
    std::size_t expected_in = words * dim;
    for (std::size_t i = 0; i < jlayers.size(); ++i) {
        const std::string where = "layers[" + std::to_string(i) + "]";
        const json& jlayer = jlayers[i];
        if (!jlayer.is_object()) throw ModelFormatError(where, "expected an object");
        const json& kind = require(jlayer, "kind", where);
        if (!kind.is_string()) throw ModelFormatError(where + ".kind", "expected a string");
        const auto k = kind.get<std::string>();
        if (k == "affine") {
            AffineLayer a{as_matrix(require(jlayer, "weights", where), where + ".weights"),
                          as_vector(require(jlayer, "bias", where), where + ".bias")};
            if (a.weights.cols() != expected_in)
                throw ModelFormatError(where + ".weights", "expects input width " + std::to_string(a.weights.cols()) +
                                                               ", previous layer produces " +
                                                               std::to_string(expected_in));
            if (a.bias.size() != a.weights.rows())
                throw ModelFormatError(where + ".bias", "length " + std::to_string(a.bias.size()) +
                                                            " does not match " + std::to_string(a.weights.rows()) +
                                                            " rows");
            expected_in = a.weights.rows();
            layers.emplace_back(std::move(a));
        } else if (k == "relu") {
            layers.emplace_back(ReluLayer{});
        } else if (k == "conv1d") {
            auto c = as_conv(jlayer, where);
            if (expected_in % c.in_channels != 0 || c.width > expected_in / c.in_channels)
                throw ModelFormatError(where + ".kernel", "kernel does not fit input width " +
                                                              std::to_string(expected_in));
            expected_in = c.output_positions(expected_in / c.in_channels) * c.out_channels;
            layers.emplace_back(std::move(c));
        } else if (k == "dropout") {
            ++meta.dropped_dropout_layers;
        } else {
            throw ModelFormatError(where + ".kind", "unknown layer kind '" + k + "'");
        }
    }

    try {
        Network net(words, dim, std::move(labels), std::move(layers));
        net.set_metadata(meta);
        return net;
    } catch (const ModelFormatError&) {
        throw;
    } catch (const Error& e) {
        throw ModelFormatError("layers", e.what());
    }
}

Network load_model(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ModelFormatError(path.string(), "cannot open file");
    return load_model(in);
}

std::string save_model(const Network& net) {
    json doc;
    doc["input_words"] = net.input_words();
    doc["embedding_dim"] = net.embedding_dim();
    doc["labels"] = net.labels();
    json layers = json::array();
    for (const auto& layer : net.layers()) {
        json jl;
        if (const auto* a = std::get_if<AffineLayer>(&layer)) {
            jl["kind"] = "affine";
            json w = json::array();
            for (std::size_t r = 0; r < a->weights.rows(); ++r) {
                auto row = a->weights.row(r);
                w.push_back(std::vector<double>(row.begin(), row.end()));
            }
            jl["weights"] = std::move(w);
            jl["bias"] = a->bias;
        } else if (const auto* c = std::get_if<Conv1DLayer>(&layer)) {
            jl["kind"] = "conv1d";
            json k = json::array();
            for (std::size_t o = 0; o < c->out_channels; ++o) {
                json taps = json::array();
                for (std::size_t j = 0; j < c->width; ++j) {
                    std::vector<double> t(c->in_channels);
                    for (std::size_t ch = 0; ch < c->in_channels; ++ch) t[ch] = c->weight(o, j, ch);
                    taps.push_back(std::move(t));
                }
                k.push_back(std::move(taps));
            }
            jl["kernel"] = std::move(k);
            jl["stride"] = c->stride;
            jl["bias"] = c->bias;
        } else {
            jl["kind"] = "relu";
        }
        layers.push_back(std::move(jl));
    }
    doc["layers"] = std::move(layers);
    return doc.dump() + "\n";
}

} // namespace ore
