#pragma once

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "dirbn/corpus.hpp"
#include "dirbn/errors.hpp"
#include "dirbn/eval.hpp"
#include "dirbn/model.hpp"
#include "dirbn/parallel.hpp"
#include "dirbn/snapshot.hpp"
#include "dirbn/topic_model.hpp"

// Run configuration and the four subcommands behind the `dirbn` binary.
//
// Every setting is a flat key. Values come from a command-line flag, a
// config file ("key = value" per line, '#' starts a comment) or a built-in
// default, in that order of precedence. Each command writes the resolved
// settings with their source to <out-dir>/resolved_config.txt.

namespace dirbn::cli {

namespace fs = std::filesystem;

enum class Command { Train, Eval, ExportHierarchy, Synth };

inline const char* command_name(Command c) {
    switch (c) {
    case Command::Train: return "train";
    case Command::Eval: return "eval";
    case Command::ExportHierarchy: return "export-hierarchy";
    case Command::Synth: return "synth";
    }
    return "?";
}

struct KeySpec {
    std::string key;
    std::string default_value;  ///< empty means "unset"
    std::string help;
    bool is_flag = false;       ///< boolean switch without a value
};

/// Keys accepted by a command, with defaults that follow the reference protocol.
inline std::vector<KeySpec> command_keys(Command c) {
    std::vector<KeySpec> keys{
        {"seed", "0", "master random seed"},
        {"threads", "0", "worker threads (0 = all cores)"},
        {"out-dir", ".", "output directory"},
    };
    auto add = [&](std::initializer_list<KeySpec> more) { keys.insert(keys.end(), more); };
    const std::initializer_list<KeySpec> hypers{
        {"a0", "1.0", "shape of the eta prior"},
        {"b0", "1.0", "rate of the eta prior"},
        {"e0", "0.01", "shape of the gamma0 prior"},
        {"f0", "0.01", "rate of the gamma0 prior"},
        {"g0", "1.0", "shape of the c and c0 priors"},
        {"h0", "1.0", "rate of the c and c0 priors"},
        {"fix-top-hypers", "false", "hold gamma0 and c0 fixed", true},
        {"gamma0", "1.0", "gamma0 value when fixed"},
        {"c0", "1.0", "c0 value when fixed"},
    };
    switch (c) {
    case Command::Train:
        add({{"docword", "", "docword file (D V NNZ header, 1-based triples)"},
             {"vocab", "", "vocabulary file, one word per line"},
             {"labels", "", "optional label file, one integer per document"},
             {"depth", "1", "number of layers T"},
             {"widths", "100", "layer widths, bottom first (one value applies to every layer)"},
             {"iters", "3000", "Gibbs iterations"},
             {"burnin", "1500", "burn-in iterations"},
             {"thin", "10", "keep every thin-th post-burn-in sample"},
             {"subsample", "1.0", "proportion of training words kept"},
             {"doc-split", "0.8", "fraction of documents used for training"},
             {"alpha-theta", "0.1", "symmetric Dirichlet parameter on document proportions"},
             {"active-threshold", "0.001", "mass above which a topic counts as active"}});
        add(hypers);
        break;
    case Command::Eval:
        add({{"run-dir", "", "directory written by train (defaults to out-dir)"},
             {"heldout-iters", "100", "Gibbs iterations per sample when inferring test proportions"},
             {"max-samples", "0", "use at most this many posterior samples (0 = all)"},
             {"alpha-theta", "0.1", "symmetric Dirichlet parameter on document proportions"},
             {"top-n", "10", "top words per topic for coherence"},
             {"npmi-topics", "50", "number of best topics averaged into the coherence score"},
             {"active-threshold", "0.001", "mass above which a topic counts as active"}});
        break;
    case Command::ExportHierarchy:
        add({{"run-dir", "", "directory written by train (defaults to out-dir)"},
             {"top-n", "10", "top words per topic"},
             {"link-threshold", "0.0", "drop links with smaller normalized weight"},
             {"parents", "3", "parents listed per topic in the text table"}});
        break;
    case Command::Synth:
        add({{"vocab-size", "20", "vocabulary size V"},
             {"widths", "5,3", "layer widths of the generating network, bottom first"},
             {"docs", "2000", "number of documents"},
             {"doc-length", "100", "tokens per document"},
             {"theta-conc", "0.5", "symmetric Dirichlet parameter of document proportions"},
             {"eta", "", "override the top-layer Dirichlet parameter"}});
        add(hypers);
        break;
    }
    return keys;
}

struct Setting {
    std::string value;
    std::string source;  ///< "flag", "config" or "default"
};

class RunConfig {
  public:
    RunConfig() = default;
    RunConfig(Command command, std::map<std::string, Setting> values)
        : command_(command), values_(std::move(values)) {}

    Command command() const noexcept { return command_; }
    const std::map<std::string, Setting>& values() const noexcept { return values_; }

    bool has(const std::string& key) const {
        auto it = values_.find(key);
        return it != values_.end() && !it->second.value.empty();
    }
    const Setting& setting(const std::string& key) const {
        auto it = values_.find(key);
        if (it == values_.end()) throw DomainError("unknown setting '" + key + "'");
        return it->second;
    }
    std::string str(const std::string& key) const { return setting(key).value; }
    std::string required(const std::string& key) const {
        if (!has(key)) throw DomainError("--" + key + " is required");
        return str(key);
    }

    double real(const std::string& key) const {
        const std::string v = str(key);
        std::size_t used = 0;
        double out = 0.0;
        try {
            out = std::stod(v, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used == 0 || used != v.size() || !std::isfinite(out))
            throw DomainError("--" + key + " expects a number, got '" + v + "'");
        return out;
    }

    std::uint64_t count(const std::string& key) const {
        const std::string v = str(key);
        std::size_t used = 0;
        unsigned long long out = 0;
        try {
            if (!v.empty() && v[0] != '-') out = std::stoull(v, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used == 0 || used != v.size())
            throw DomainError("--" + key + " expects a nonnegative integer, got '" + v + "'");
        return out;
    }

    bool flag(const std::string& key) const {
        const std::string v = str(key);
        if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
        if (v == "false" || v == "0" || v == "no" || v == "off" || v.empty()) return false;
        throw DomainError("--" + key + " expects true or false, got '" + v + "'");
    }

    std::vector<std::size_t> widths(const std::string& key = "widths") const {
        std::vector<std::size_t> out;
        std::stringstream in(str(key));
        std::string item;
        while (std::getline(in, item, ',')) {
            std::size_t used = 0;
            unsigned long long w = 0;
            try {
                if (!item.empty() && item[0] != '-') w = std::stoull(item, &used);
            } catch (const std::exception&) {
                used = 0;
            }
            if (used == 0 || used != item.size() || w == 0)
                throw DomainError("--" + key + " expects comma-separated positive integers, got '" + str(key) + "'");
            out.push_back(w);
        }
        if (out.empty()) throw DomainError("--" + key + " is empty");
        return out;
    }

    fs::path out_dir() const { return fs::path(str("out-dir")); }
    fs::path run_dir() const { return has("run-dir") ? fs::path(str("run-dir")) : out_dir(); }

    /// "key = value  # source" per line, sorted by key.
    std::string render() const {
        std::ostringstream out;
        out << "# dirbn " << command_name(command_) << " resolved configuration\n";
        for (const auto& [key, s] : values_) out << key << " = " << s.value << "  # " << s.source << '\n';
        return out.str();
    }

  private:
    Command command_ = Command::Train;
    std::map<std::string, Setting> values_;
};

inline std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

/// Parses "key = value" lines; blank lines and '#' comments are skipped.
inline std::map<std::string, std::string> parse_config_text(const std::string& text) {
    std::map<std::string, std::string> out;
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ParseError("expected 'key = value'", line_no);
        std::string key = trim(line.substr(0, eq));
        if (key.rfind("--", 0) == 0) key.erase(0, 2);
        if (key.empty()) throw ParseError("empty key", line_no);
        out[key] = trim(line.substr(eq + 1));
    }
    return out;
}

inline std::map<std::string, std::string> load_config_file(const fs::path& path) {
    return parse_config_text(detail::read_file(path, false));
}

/**
 * Merges flags over the config file over the defaults. Unknown keys in
 * either source are validation errors.
 */
inline RunConfig resolve_config(Command command, const std::map<std::string, std::string>& flags,
                                const std::map<std::string, std::string>& file = {}) {
    std::map<std::string, Setting> values;
    for (const auto& spec : command_keys(command)) values[spec.key] = {spec.default_value, "default"};
    auto apply = [&](const std::map<std::string, std::string>& source, const char* name) {
        for (const auto& [key, value] : source) {
            auto it = values.find(key);
            if (it == values.end())
                throw DomainError(std::string("unknown ") + (std::string(name) == "flag" ? "option --" : "config key '") +
                                  key + (std::string(name) == "flag" ? "" : "'") + " for " + command_name(command));
            it->second = {value, name};
        }
    };
    apply(file, "config");
    apply(flags, "flag");
    return RunConfig(command, std::move(values));
}

namespace detail {

inline void ensure_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create directory " + dir.string() + ": " + ec.message());
}

inline void write_text(const fs::path& path, const std::string& text) { dirbn::detail::write_file(path, text, false); }

inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag) { return dirbn::detail::mix(seed, tag); }

inline DirBNConfig network_config(const RunConfig& cfg, std::vector<std::size_t> widths, std::size_t vocab_size) {
    DirBNConfig net;
    net.layer_widths = std::move(widths);
    net.vocab_size = vocab_size;
    net.a0 = cfg.real("a0");
    net.b0 = cfg.real("b0");
    net.e0 = cfg.real("e0");
    net.f0 = cfg.real("f0");
    net.g0 = cfg.real("g0");
    net.h0 = cfg.real("h0");
    net.sample_top_hypers = !cfg.flag("fix-top-hypers");
    net.gamma0_fixed = cfg.real("gamma0");
    net.c0_fixed = cfg.real("c0");
    return net;
}

inline void apply_threads(const RunConfig& cfg) { set_threads(static_cast<int>(cfg.count("threads"))); }

inline std::string vocab_text(const std::vector<std::string>& vocab) {
    std::string out;
    for (const auto& w : vocab) out += w + '\n';
    return out;
}

} // namespace detail

/// Layer widths for a train run: one value is repeated over depth layers.
inline std::vector<std::size_t> train_widths(const RunConfig& cfg) {
    const auto depth = cfg.count("depth");
    if (depth == 0) throw DomainError("--depth must be >= 1");
    auto widths = cfg.widths();
    if (widths.size() == 1) widths.assign(depth, widths.front());
    if (widths.size() != depth)
        throw DomainError("--widths lists " + std::to_string(widths.size()) + " layers but --depth is " +
                          std::to_string(depth));
    return widths;
}

/// Artifacts of a training run, relative to out-dir.
struct TrainFiles {
    static constexpr const char* train_docword = "train.docword";
    static constexpr const char* test_docword = "test.docword";
    static constexpr const char* vocab = "vocab.txt";
    static constexpr const char* state = "state.json";
    static constexpr const char* samples = "samples.cbor";
    static constexpr const char* log = "train.log";
    static constexpr const char* resolved = "resolved_config.txt";
};

/**
 * Splits the corpus, subsamples training words, runs the sampler and writes
 * the split corpora, snapshot, posterior samples, log and resolved config.
 */
inline TrainResult cmd_train(const RunConfig& cfg, std::ostream& progress) {
    detail::apply_threads(cfg);
    const auto seed = cfg.count("seed");
    const fs::path out = cfg.out_dir();

    TrainConfig train_cfg;
    train_cfg.iterations = cfg.count("iters");
    train_cfg.burnin = cfg.count("burnin");
    train_cfg.thin = cfg.count("thin");
    train_cfg.alpha_theta = cfg.real("alpha-theta");
    train_cfg.active_threshold = cfg.real("active-threshold");
    train_cfg.seed = seed;
    const double fraction = cfg.real("doc-split");
    const double proportion = cfg.real("subsample");
    if (!(fraction > 0.0 && fraction < 1.0)) throw DomainError("--doc-split must lie in (0, 1)");
    if (!(proportion > 0.0 && proportion <= 1.0)) throw DomainError("--subsample must lie in (0, 1]");
    if (train_cfg.thin == 0) throw DomainError("--thin must be >= 1");
    if (train_cfg.burnin > train_cfg.iterations) throw DomainError("--burnin exceeds --iters");

    std::optional<fs::path> labels;
    if (cfg.has("labels")) labels = cfg.str("labels");
    const Corpus corpus = load_corpus(cfg.required("docword"), cfg.required("vocab"), labels);
    train_cfg.network = detail::network_config(cfg, train_widths(cfg), corpus.vocab_size());
    train_cfg.network.validate();

    auto [train_docs, test_docs] = split_documents(corpus, fraction, detail::derive_seed(seed, 1));
    const Corpus train_corpus = subsample_words(train_docs, proportion, detail::derive_seed(seed, 2));

    detail::ensure_dir(out);
    detail::write_text(out / TrainFiles::resolved, cfg.render());
    save_corpus(train_corpus, out / TrainFiles::train_docword, out / TrainFiles::vocab);
    save_corpus(test_docs, out / TrainFiles::test_docword, out / TrainFiles::vocab);

    std::ofstream log(out / TrainFiles::log);
    if (!log) throw IoError("cannot write " + (out / TrainFiles::log).string());
    log << "iter\tloglik\tactive_topics_per_layer\tseconds\n";
    const std::size_t every = std::max<std::size_t>(1, train_cfg.iterations / 20);
    TrainResult result = train(train_corpus, train_cfg, [&](const IterationRecord& r) {
        log << format_log_line(r) << '\n';
        if (r.iteration % every == 0 || r.iteration == train_cfg.iterations)
            progress << "iter " << r.iteration << "/" << train_cfg.iterations << "  loglik " << std::fixed
                     << std::setprecision(2) << r.log_likelihood << std::defaultfloat << std::endl;
    });
    if (!log.flush()) throw IoError("failed writing " + (out / TrainFiles::log).string());

    Snapshot snap{result.state, result.sweeps, seed, result.topic_mass};
    save_snapshot(snap, out / TrainFiles::state);
    save_samples(result.phi1_samples, out / TrainFiles::samples);
    return result;
}

struct Metrics {
    double perplexity = 0.0;
    CoherenceResult coherence;
    std::vector<std::size_t> active_topics;
};

inline nlohmann::json metrics_to_json(const Metrics& m) {
    return {{"perplexity", m.perplexity},
            {"npmi_aggregate", m.coherence.aggregate},
            {"npmi_per_topic", m.coherence.per_topic},
            {"npmi_aggregated_topics", m.coherence.aggregated_topics},
            {"active_topics_per_layer", m.active_topics},
            {"note",
             "coherence uses document co-occurrence in the training split; the aggregate averages the "
             "best-scoring topics in place of filtering low-quality topics"}};
}

/**
 * Heldout evaluation of a training run: half of each test document infers
 * its proportions, the other half is scored. Writes metrics.json.
 */
inline Metrics cmd_eval(const RunConfig& cfg, std::ostream& progress) {
    detail::apply_threads(cfg);
    const auto seed = cfg.count("seed");
    const fs::path run = cfg.run_dir();
    const fs::path out = cfg.out_dir();
    const std::size_t top_n = cfg.count("top-n");
    if (top_n == 0) throw DomainError("--top-n must be >= 1");

    const Snapshot snap = load_snapshot(run / TrainFiles::state);
    std::vector<Matrix> phis = load_samples(run / TrainFiles::samples);
    if (phis.empty()) phis.push_back(snap.state.phi[0]);
    if (const auto cap = cfg.count("max-samples"); cap > 0 && phis.size() > cap) {
        // evenly spaced subset, always including the last sample
        std::vector<Matrix> kept;
        for (std::size_t i = 0; i < cap; ++i) kept.push_back(phis[(i + 1) * phis.size() / cap - 1]);
        phis = std::move(kept);
    }
    const Corpus test = load_corpus(run / TrainFiles::test_docword, run / TrainFiles::vocab);
    const Corpus reference = load_corpus(run / TrainFiles::train_docword, run / TrainFiles::vocab);
    for (const auto& phi : phis)
        if (phi.rows() != static_cast<Eigen::Index>(test.vocab_size()))
            throw DomainError("posterior samples do not match the vocabulary");

    const HeldoutSplit split = split_words(test, detail::derive_seed(seed, 3));
    progress << "inferring test proportions with " << phis.size() << " samples" << std::endl;
    const auto thetas = infer_theta_heldout(phis, split.observed, cfg.count("heldout-iters"),
                                            cfg.real("alpha-theta"), RngStream(seed, 0x7E57));

    Metrics m;
    m.perplexity = perplexity(phis, thetas, split.heldout);

    Matrix phi_mean = Matrix::Zero(phis.front().rows(), phis.front().cols());
    for (const auto& phi : phis) phi_mean += phi;
    phi_mean /= static_cast<double>(phis.size());
    std::vector<std::vector<std::uint32_t>> topics;
    for (Eigen::Index k = 0; k < phi_mean.cols(); ++k) topics.push_back(top_words(column(phi_mean, k), top_n));
    m.coherence = npmi_coherence(topics, Cooccurrence(reference), cfg.count("npmi-topics"));

    const double threshold = cfg.real("active-threshold");
    for (const auto& mass : snap.topic_mass) m.active_topics.push_back(count_active(mass, threshold));

    detail::ensure_dir(out);
    detail::write_text(out / "eval_resolved_config.txt", cfg.render());
    detail::write_text(out / "metrics.json", metrics_to_json(m).dump(2) + "\n");
    return m;
}

/// One JSON object per topic and per link.
inline std::string hierarchy_jsonl(const TopicHierarchy& h) {
    std::string out;
    for (const auto& layer : h.layers)
        for (const auto& t : layer) {
            nlohmann::json j{{"type", "topic"},   {"layer", t.layer},     {"topic_id", t.topic},
                             {"top_words", t.words}, {"weights", t.weights}, {"mass", t.mass}};
            out += j.dump() + '\n';
        }
    for (const auto& l : h.links) {
        nlohmann::json j{{"type", "link"}, {"t", l.layer}, {"parent", l.parent}, {"child", l.child},
                         {"normalized_weight", l.weight}};
        out += j.dump() + '\n';
    }
    return out;
}

/// Each lower-layer topic followed by its strongest parents and their link weights.
inline std::string hierarchy_table(const TopicHierarchy& h, std::size_t parents_per_topic) {
    std::ostringstream out;
    auto words = [](const HierarchyTopic& t) {
        std::string s;
        for (const auto& w : t.words) s += (s.empty() ? "" : " ") + w;
        return s;
    };
    for (std::size_t t = 0; t + 1 < h.layers.size(); ++t) {
        out << "== layer " << t + 1 << " topics and their layer " << t + 2 << " parents ==\n";
        for (const auto& child : h.layers[t]) {
            out << "L" << t + 1 << "-" << child.topic << "  (mass " << std::fixed << std::setprecision(4) << child.mass
                << ")  " << words(child) << '\n';
            for (const auto& link : strongest_parents(h, t, child.topic, parents_per_topic))
                out << "    " << std::fixed << std::setprecision(2) << link.weight << "  L" << t + 2 << "-" << link.parent
                    << "  " << words(h.layers[t + 1][link.parent]) << '\n';
        }
    }
    if (h.layers.size() == 1) {
        out << "== layer 1 topics ==\n";
        for (const auto& topic : h.layers[0]) out << "L1-" << topic.topic << "  " << words(topic) << '\n';
    }
    return out.str();
}

inline TopicHierarchy cmd_export_hierarchy(const RunConfig& cfg) {
    const fs::path run = cfg.run_dir();
    const fs::path out = cfg.out_dir();
    const std::size_t top_n = cfg.count("top-n");
    if (top_n == 0) throw DomainError("--top-n must be >= 1");
    const Snapshot snap = load_snapshot(run / TrainFiles::state);
    const auto vocab = load_vocab(run / TrainFiles::vocab);
    TopicHierarchy h = extract_hierarchy(snap.state, vocab, top_n, cfg.real("link-threshold"), snap.topic_mass);
    detail::ensure_dir(out);
    detail::write_text(out / "export_resolved_config.txt", cfg.render());
    detail::write_text(out / "hierarchy.jsonl", hierarchy_jsonl(h));
    detail::write_text(out / "hierarchy.txt", hierarchy_table(h, cfg.count("parents")));
    return h;
}

/**
 * Draws a network from the prior and documents from its bottom layer.
 * Writes corpus.docword, vocab.txt and ground_truth.json (the generating
 * state in snapshot form plus the document proportions and true counts).
 */
inline SyntheticCorpus cmd_synth(const RunConfig& cfg) {
    detail::apply_threads(cfg);
    const auto seed = cfg.count("seed");
    const fs::path out = cfg.out_dir();
    DirBNConfig net = detail::network_config(cfg, cfg.widths(), cfg.count("vocab-size"));
    DirBNState state = init_state(net, RngStream(seed, 0x5EED));
    if (cfg.has("eta")) {
        state.eta = cfg.real("eta");
        dirbn::detail::require_positive(state.eta, "eta");
        // redraw the top layer, and everything below it, under the requested eta
        const std::size_t top = state.depth() - 1;
        RngStream draw(seed, 0xE7A);
        const std::vector<double> alpha(net.vocab_size, state.eta);
        for (Eigen::Index k = 0; k < state.phi[top].cols(); ++k) sample_dirichlet(alpha, draw, column(state.phi[top], k));
        for (std::size_t t = top; t-- > 0;) {
            const Matrix psi = compute_psi(state, t);
            for (Eigen::Index k = 0; k < state.phi[t].cols(); ++k)
                sample_dirichlet(column(psi, k), draw, column(state.phi[t], k));
        }
    }
    SyntheticCorpus synth = generate_corpus(state, cfg.count("docs"), cfg.count("doc-length"), cfg.real("theta-conc"),
                                            RngStream(seed, 0xD0C5));

    detail::ensure_dir(out);
    detail::write_text(out / "resolved_config.txt", cfg.render());
    save_corpus(synth.corpus, out / "corpus.docword", out / "vocab.txt");
    nlohmann::json truth = snapshot_to_json(Snapshot{state, 0, seed, {}});
    truth["theta"] = dirbn::detail::matrix_to_json(synth.theta);
    nlohmann::json counts = nlohmann::json::array();
    for (Eigen::Index v = 0; v < synth.word_topic.rows(); ++v) {
        std::vector<Count> row(synth.word_topic.cols());
        for (Eigen::Index k = 0; k < synth.word_topic.cols(); ++k) row[static_cast<std::size_t>(k)] = synth.word_topic(v, k);
        counts.push_back(row);
    }
    truth["word_topic_counts"] = std::move(counts);
    detail::write_text(out / "ground_truth.json", truth.dump(1) + "\n");
    return synth;
}

/// Exit status for an exception escaping a command: 2 for I/O, 1 otherwise.
inline int exit_code_for(const std::exception& e) { return dynamic_cast<const IoError*>(&e) ? 2 : 1; }

} // namespace dirbn::cli
