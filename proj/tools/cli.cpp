#include "cli.hpp"

#include "ore/ore.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>

namespace ore::cli {

namespace {

using json = nlohmann::json;

class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Options {
    std::string model;
    std::string emb;
    std::string text;
    std::string text_file;
    std::optional<double> eps;
    std::optional<std::size_t> knn;
    std::string metric = "euclidean";
    std::string cost;
    std::string solver = "hs";
    std::string include;
    std::string exclude;
    std::string protected_words;
    std::string fix;
    std::string seed_explanation;
    std::vector<std::string> words;
    std::uint64_t seed = 0;
    bool deterministic = false;
    bool stats = false;
    bool no_attacks = false;
    bool no_shrink = false;
    std::size_t max_splits = 100000;
    std::size_t max_iterations = 100000;
    std::size_t count = 8;
};

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Metric parse_metric(const std::string& s) {
    if (s == "euclidean") return Metric::Euclidean;
    if (s == "cosine") return Metric::Cosine;
    throw UsageError("unknown metric '" + s + "'");
}

PerturbationSpec make_spec(const Options& o) {
    if (o.eps.has_value() == o.knn.has_value()) throw UsageError("exactly one of --eps and --knn is required");
    if (o.eps) {
        if (!(*o.eps > 0.0) || !std::isfinite(*o.eps)) throw UsageError("--eps must be finite and positive");
        return PerturbationSpec::eps_ball(*o.eps);
    }
    if (*o.knn == 0) throw UsageError("--knn must be >= 1");
    return PerturbationSpec::knn_box(*o.knn, parse_metric(o.metric));
}

std::string trim(std::string s) {
    auto space = [](unsigned char c) { return std::isspace(c); };
    s.erase(s.begin(), std::find_if_not(s.begin(), s.end(), space));
    s.erase(std::find_if_not(s.rbegin(), s.rend(), space).base(), s.end());
    return s;
}

bool all_digits(const std::string& s) {
    return !s.empty() && std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isdigit(c); });
}

void add_item(WordSet& out, const std::string& item, const TextInput& text) {
    if (all_digits(item)) {
        const auto i = std::stoul(item);
        if (i >= text.size()) throw UsageError("position " + item + " is outside the text");
        out.insert(i);
        return;
    }
    bool matched = false;
    for (std::size_t i = 0; i < text.size(); ++i) {
        if (text.tokens[i] == item) {
            out.insert(i);
            matched = true;
        }
    }
    if (!matched) throw UsageError("word '" + item + "' does not occur in the text");
}

// Comma-separated positions or words; a word selects every position holding it.
WordSet parse_positions(const std::string& list, const TextInput& text) {
    WordSet out;
    std::stringstream ss(list);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) add_item(out, item, text);
    }
    return out;
}

// A JSON list of words or positions (inline or in a file), or a comma list.
WordSet parse_seed(const std::string& value, const TextInput& text) {
    std::string body = trim(value);
    if (body.empty() || body.front() != '[') {
        if (!std::filesystem::is_regular_file(body)) return parse_positions(body, text);
        body = read_file(body);
    }
    json doc;
    try {
        doc = json::parse(body);
    } catch (const json::parse_error& e) {
        throw UsageError(std::string("seed explanation is not valid JSON: ") + e.what());
    }
    if (!doc.is_array()) throw UsageError("seed explanation must be a JSON list");
    WordSet out;
    for (const auto& item : doc) {
        if (item.is_number_unsigned()) {
            add_item(out, std::to_string(item.get<std::size_t>()), text);
        } else if (item.is_string()) {
            add_item(out, item.get<std::string>(), text);
        } else {
            throw UsageError("seed explanation entries must be words or positions");
        }
    }
    return out;
}

// A file path or inline JSON: a word-to-cost object or one cost per position.
CostFunction load_cost(const std::string& path, const TextInput& text) {
    std::vector<double> values(text.size(), 1.0);
    if (path.empty()) return CostFunction(std::move(values));
    const std::string body = trim(path);
    const bool inline_json = !body.empty() && (body.front() == '{' || body.front() == '[');
    json doc;
    try {
        doc = json::parse(inline_json ? body : read_file(path));
    } catch (const json::parse_error& e) {
        throw ModelFormatError(path, e.what());
    }
    if (doc.is_array()) {
        if (doc.size() != text.size()) throw ModelFormatError(path, "expected one cost per text position");
        for (std::size_t i = 0; i < values.size(); ++i) {
            if (!doc[i].is_number()) throw ModelFormatError(path + "[" + std::to_string(i) + "]", "expected a number");
            values[i] = doc[i].get<double>();
        }
    } else if (doc.is_object()) {
        for (std::size_t i = 0; i < values.size(); ++i) {
            auto it = doc.find(text.tokens[i]);
            if (it == doc.end()) continue;
            if (!it->is_number()) throw ModelFormatError(path + "." + text.tokens[i], "expected a number");
            values[i] = it->get<double>();
        }
    } else {
        throw ModelFormatError(path, "expected a word-to-cost object or a list of costs");
    }
    return CostFunction(std::move(values));
}

struct Session {
    Network net;
    EmbeddingTable table;
    TextInput text;
    PerturbationSpec spec;
    Label target;
    CostFunction cost;
    VerifierOptions verifier;
    HsOptions hs;
    MsaOptions msa;

    EntailmentOracle oracle() const {
        return EntailmentOracle(net, PerturbationSpace::build(text, spec, table), target, verifier);
    }
};

Session open_session(const Options& o) {
    if (o.text.empty() == o.text_file.empty()) throw UsageError("exactly one of --text and --text-file is required");
    const PerturbationSpec spec = make_spec(o);
    if (!std::filesystem::is_regular_file(o.model)) throw IoError("cannot read " + o.model);
    if (!std::filesystem::is_regular_file(o.emb)) throw IoError("cannot read " + o.emb);
    Network net = load_model(std::filesystem::path(o.model));
    EmbeddingTable table = load_embeddings(std::filesystem::path(o.emb));
    if (table.dim() != net.embedding_dim())
        throw ModelFormatError("dim", "embedding dimension " + std::to_string(table.dim()) +
                                          " does not match the model's " + std::to_string(net.embedding_dim()));
    const std::string raw = o.text.empty() ? read_file(o.text_file) : o.text;
    TextInput text = encode(tokenize(raw), net.input_words(), table);
    const Label target = forward(net, text.point).label;

    VerifierOptions v;
    v.max_splits = o.max_splits;
    HsOptions hs;
    hs.use_attacks = !o.no_attacks;
    hs.attack.seed = o.seed;
    hs.max_iterations = o.max_iterations;
    MsaOptions msa;
    msa.use_shrink = !o.no_shrink;
    CostFunction cost = load_cost(o.cost, text);
    return Session{std::move(net), std::move(table), std::move(text), spec, target, std::move(cost), v, hs, msa};
}

std::string markup(const TextInput& text, const WordSet& words) {
    std::string out;
    for (std::size_t i = 0; i < text.size(); ++i) {
        if (i > 0) out += ' ';
        out += words.contains(i) ? "[" + text.tokens[i] + "]" : text.tokens[i];
    }
    return out;
}

json words_json(const TextInput& text, const WordSet& words) {
    json w = json::array();
    for (auto i : words) w.push_back(text.tokens[i]);
    return w;
}

json stats_json(const SolverTrace& t) {
    return {{"solver", t.solver},
            {"iterations", t.iterations},
            {"counterexamples", t.counterexamples},
            {"entailment_queries", t.entailment_queries},
            {"splits", t.splits},
            {"attack_calls", t.attack_calls},
            {"attack_supports", t.attack_supports}};
}

json explanation_json(const TextInput& text, const Explanation& e, bool stats) {
    json j = {{"indices", e.words.indices()},
              {"words", words_json(text, e.words)},
              {"cost", e.cost},
              {"markup", markup(text, e.words)}};
    if (stats) j["stats"] = stats_json(e.trace);
    return j;
}

json header(const std::string& command, const Session& s) {
    return {{"command", command},
            {"tokens", s.text.tokens},
            {"label", s.net.labels()[s.target]},
            {"spec", s.spec.describe()}};
}

json counterexample_json(const Session& s, const EntailmentResult::CounterExample& c) {
    return {{"point", c.point},
            {"predicted", s.net.labels()[c.predicted]},
            {"changed", counterexample_diff(s.text, c.point).indices()}};
}

void emit(std::ostream& out, const json& doc) { out << doc.dump() << "\n"; }


ConstraintSpec constraints_of(const Options& o, const TextInput& text) {
    ConstraintSpec c;
    c.include = parse_positions(o.include, text);
    c.exclude = parse_positions(o.exclude, text);
    if (c.include.intersects(c.exclude)) throw UsageError("--include and --exclude overlap");
    return c;
}

Explanation solve(const Session& s, const std::string& solver, const ConstraintSpec& c) {
    auto oracle = s.oracle();
    return solver == "msa" ? ore_msa(oracle, s.cost, c, s.msa) : ore_hs(oracle, s.cost, c, s.hs);
}

int cmd_explain(const Options& o, std::ostream& out) {
    const Session s = open_session(o);
    const ConstraintSpec c = constraints_of(o, s.text);
    json doc = header("explain", s);
    doc["solver"] = o.solver;
    if (o.solver != "both") {
        doc["explanation"] = explanation_json(s.text, solve(s, o.solver, c), o.stats);
        emit(out, doc);
        return kOk;
    }
    const Explanation hs = solve(s, "hs", c);
    const Explanation msa = solve(s, "msa", c);
    const bool costs_agree = cost_equal(hs.cost, msa.cost);
    doc["explanation"] = explanation_json(s.text, hs, o.stats);
    doc["hs"] = explanation_json(s.text, hs, o.stats);
    doc["msa"] = explanation_json(s.text, msa, o.stats);
    doc["agreement"] = costs_agree;
    doc["sets_agree"] = hs.words == msa.words;
    emit(out, doc);
    return costs_agree ? kOk : kSolverMismatch;
}

int cmd_enumerate(const Options& o, std::ostream& out) {
    const Session s = open_session(o);
    const Explanation best = solve(s, o.solver == "hs" ? "hs" : "msa", {});
    auto oracle = s.oracle();
    const auto all = enumerate_all_minimal(oracle, s.cost, best.cost);
    json list = json::array();
    for (const auto& e : all) list.push_back(explanation_json(s.text, e, false));
    json doc = header("enumerate", s);
    doc["cost"] = best.cost;
    doc["count"] = all.size();
    doc["explanations"] = std::move(list);
    if (o.stats) doc["stats"] = stats_json(best.trace);
    emit(out, doc);
    return kOk;
}

int cmd_verify(const Options& o, std::ostream& out) {
    const Session s = open_session(o);
    const WordSet fixed = parse_positions(o.fix, s.text);
    Verifier verifier(s.net, s.verifier);
    const auto r = verifier.check(PerturbationSpace::build(s.text, s.spec, s.table).box(fixed), s.target);
    json doc = header("verify", s);
    doc["fixed"] = fixed.indices();
    if (r.is_robust()) {
        doc["verdict"] = "robust";
    } else if (r.is_counterexample()) {
        doc["verdict"] = "counterexample";
        doc["counterexample"] = counterexample_json(s, r.counterexample());
    } else {
        doc["verdict"] = "resource_exhausted";
        doc["splits_used"] = r.splits_used();
    }
    if (o.stats) {
        const auto& st = verifier.stats();
        doc["stats"] = {{"entailment_queries", st.queries},
                        {"nodes", st.nodes},
                        {"splits", st.splits},
                        {"attack_calls", st.attack_calls}};
    }
    emit(out, doc);
    return r.is_exhausted() ? kExhausted : kOk;
}

int cmd_bias(const Options& o, std::ostream& out) {
    const Session s = open_session(o);
    const WordSet protected_words = parse_positions(o.protected_words, s.text);
    auto oracle = s.oracle();
    const BiasVerdict v = detect_bias(oracle, protected_words, s.cost, s.hs);
    json doc = header("bias", s);
    doc["protected"] = protected_words.indices();
    doc["biased"] = v.biased;
    if (v.counterexample) doc["counterexample"] = counterexample_json(s, *v.counterexample);
    if (v.witness) doc["witness"] = explanation_json(s.text, *v.witness, o.stats);
    emit(out, doc);
    return v.biased ? kInfeasible : kOk;
}

int cmd_repair(const Options& o, std::ostream& out) {
    const Session s = open_session(o);
    const WordSet seed = parse_seed(o.seed_explanation, s.text);
    auto oracle = s.oracle();
    const Explanation e =
        repair_explanation(oracle, seed, s.cost, o.solver == "msa" ? Solver::MSA : Solver::HS, s.hs, s.msa);
    const WordSet extension = e.words.minus(seed);
    json doc = header("repair", s);
    doc["seed"] = {{"indices", seed.indices()}, {"words", words_json(s.text, seed)}, {"cost", s.cost.total(seed)}};
    doc["extension"] = {
        {"indices", extension.indices()}, {"words", words_json(s.text, extension)}, {"cost", s.cost.total(extension)}};
    doc["explanation"] = explanation_json(s.text, e, o.stats);
    emit(out, doc);
    return kOk;
}

int cmd_attack(const Options& o, std::ostream& out) {
    const Session s = open_session(o);
    const WordSet fixed = parse_positions(o.fix, s.text);
    const auto space = PerturbationSpace::build(s.text, s.spec, s.table);
    AttackConfig cfg;
    cfg.seed = o.seed;
    const auto attacks = sparse_attack_batch(s.net, space, fixed, s.target, cfg, std::max<std::size_t>(o.count, 1));
    json doc = header("attack", s);
    doc["fixed"] = fixed.indices();
    if (attacks.empty()) {
        doc["attack"] = nullptr;
        doc["result"] = "none found";
    } else {
        const auto& a = attacks.front();
        doc["result"] = "found";
        doc["attack"] = {{"support", a.support.indices()},
                         {"words", words_json(s.text, a.support)},
                         {"point", a.point},
                         {"predicted", s.net.labels()[a.predicted]},
                         {"gap", a.gap}};
        json supports = json::array();
        for (const auto& b : attacks) supports.push_back(b.support.indices());
        doc["supports"] = std::move(supports);
    }
    emit(out, doc);
    return kOk;
}

int cmd_knn(const Options& o, std::ostream& out) {
    if (!o.knn) throw UsageError("knn needs --knn K");
    if (o.eps) throw UsageError("knn does not take --eps");
    if (*o.knn == 0) throw UsageError("--knn must be >= 1");
    if (!std::filesystem::is_regular_file(o.emb)) throw IoError("cannot read " + o.emb);
    const EmbeddingTable table = load_embeddings(std::filesystem::path(o.emb));
    const Metric metric = parse_metric(o.metric);
    std::vector<std::string> words = o.words;
    if (!o.text.empty()) {
        for (auto& w : tokenize(o.text)) words.push_back(std::move(w));
    }
    if (words.empty()) throw UsageError("knn needs --word or --text");
    const auto spec = PerturbationSpec::knn_box(*o.knn, metric);
    json list = json::array();
    for (const auto& w : words) {
        const auto id = table.vocab().id(w);
        if (*o.knn > table.size()) throw UsageError("--knn exceeds the vocabulary size");
        json neighbors = json::array();
        for (auto n : knn(id, *o.knn, metric, table)) {
            neighbors.push_back({{"word", table.vocab().word(n)},
                                 {"distance", distance(table.vector(id), table.vector(n), metric)}});
        }
        const Box b = word_box(id, spec, table);
        list.push_back({{"word", w}, {"neighbors", std::move(neighbors)}, {"box", {{"lo", b.lo}, {"hi", b.hi}}}});
    }
    emit(out, {{"command", "knn"}, {"k", *o.knn}, {"metric", o.metric}, {"results", std::move(list)}});
    return kOk;
}

enum Needs : unsigned {
    kText = 1u << 0,
    kSpec = 1u << 1,
    kCost = 1u << 2,
    kSolver = 1u << 3,
    kBudgets = 1u << 4,
};

void add_inputs(CLI::App* sub, Options& o, unsigned needs) {
    if (needs & kText) {
        sub->add_option("--model", o.model, "Model JSON file")->required();
        sub->add_option("--emb", o.emb, "Embedding JSON file")->required();
        auto* text = sub->add_option("--text", o.text, "Input text (whitespace separated)");
        auto* file = sub->add_option("--text-file", o.text_file, "File holding the input text");
        text->excludes(file);
    }
    if (needs & kSpec) {
        auto* eps = sub->add_option("--eps", o.eps, "Radius of the per-word infinity-norm box");
        auto* k = sub->add_option("--knn", o.knn, "Bounding box of the K nearest neighbours");
        eps->excludes(k);
        sub->add_option("--metric", o.metric, "k-NN metric")->check(CLI::IsMember({"euclidean", "cosine"}));
    }
    if (needs & kCost) sub->add_option("--cost", o.cost, "Word-to-cost JSON object or list of per-position costs");
    if (needs & kSolver)
        sub->add_option("--solver", o.solver, "Explanation solver")->check(CLI::IsMember({"hs", "msa", "both"}));
    if (needs & kBudgets) {
        sub->add_option("--max-splits", o.max_splits, "Verifier split budget per query");
        sub->add_option("--max-iterations", o.max_iterations, "Hitting-set iteration cap");
        sub->add_flag("--no-attacks", o.no_attacks, "Disable sparse attacks in the hitting-set loop");
        sub->add_flag("--no-shrink", o.no_shrink, "Disable candidate shrinking in the MUS search");
        sub->add_flag("--stats", o.stats, "Report entailment, split and attack counts");
    }
    sub->add_option("--seed", o.seed, "Attack RNG seed");
    sub->add_flag("--deterministic", o.deterministic, "Single-worker deterministic mode");
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    Options o;
    CLI::App app{"Optimal robust explanations for small text classifiers", "ore"};
    app.require_subcommand(1, 1);
    const unsigned solve_needs = kText | kSpec | kCost | kSolver | kBudgets;

    auto* explain = app.add_subcommand("explain", "Compute an optimal robust explanation");
    add_inputs(explain, o, solve_needs);
    explain->add_option("--include", o.include, "Words or positions that must be in the explanation");
    explain->add_option("--exclude", o.exclude, "Words or positions that must stay out of the explanation");

    auto* enumerate = app.add_subcommand("enumerate", "List every minimum-cost robust explanation");
    add_inputs(enumerate, o, solve_needs);

    auto* verify = app.add_subcommand("verify", "Run one entailment query");
    add_inputs(verify, o, kText | kSpec | kBudgets);
    verify->add_option("--fix", o.fix, "Fixed words or positions");

    auto* bias = app.add_subcommand("bias", "Check whether protected words alone can flip the decision");
    add_inputs(bias, o, kText | kSpec | kCost | kBudgets);
    bias->add_option("--protected", o.protected_words, "Protected words or positions")->required();

    auto* repair = app.add_subcommand("repair", "Extend a seed explanation to a cheapest robust one");
    add_inputs(repair, o, solve_needs);
    repair->add_option("--seed-explanation", o.seed_explanation, "JSON list or comma list of words or positions")
        ->required();

    auto* attack = app.add_subcommand("attack", "Search for a sparse label-flipping perturbation");
    add_inputs(attack, o, kText | kSpec);
    attack->add_option("--fix", o.fix, "Fixed words or positions");
    attack->add_option("--count", o.count, "Number of distinct supports to report");

    auto* knn_cmd = app.add_subcommand("knn", "Show nearest neighbours and k-NN boxes");
    knn_cmd->add_option("--emb", o.emb, "Embedding JSON file")->required();
    knn_cmd->add_option("--word", o.words, "Query word (repeatable)");
    knn_cmd->add_option("--text", o.text, "Query every word of a text");
    knn_cmd->add_option("--knn", o.knn, "Number of neighbours")->required();
    knn_cmd->add_option("--eps", o.eps, "Not accepted")->group("");
    knn_cmd->add_option("--metric", o.metric, "k-NN metric")->check(CLI::IsMember({"euclidean", "cosine"}));

    std::vector<std::string> storage{"ore"};
    storage.insert(storage.end(), args.begin(), args.end());
    std::vector<char*> argv;
    for (auto& a : storage) argv.push_back(a.data());

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return kUsage;
    }

    try {
        if (explain->parsed()) return cmd_explain(o, out);
        if (enumerate->parsed()) return cmd_enumerate(o, out);
        if (verify->parsed()) return cmd_verify(o, out);
        if (bias->parsed()) return cmd_bias(o, out);
        if (repair->parsed()) return cmd_repair(o, out);
        if (attack->parsed()) return cmd_attack(o, out);
        return cmd_knn(o, out);
    } catch (const UsageError& e) {
        err << "error: " << e.what() << "\n";
        return kUsage;
    } catch (const Infeasible& e) {
        err << "infeasible: " << e.what() << "\n";
        return kInfeasible;
    } catch (const ResourceExhausted& e) {
        err << "resource exhausted: " << e.what() << "\n";
        return kExhausted;
    } catch (const IoError& e) {
        err << "error: " << e.what() << "\n";
        return kIoError;
    } catch (const ModelFormatError& e) {
        err << "format error: " << e.what() << "\n";
        return kIoError;
    } catch (const UnknownWord& e) {
        err << "error: " << e.what() << "\n";
        return kIoError;
    } catch (const TooLong& e) {
        err << "error: " << e.what() << "\n";
        return kIoError;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return kUsage;
    }
}

} // namespace ore::cli
