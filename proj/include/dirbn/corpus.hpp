#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "dirbn/distributions.hpp"
#include "dirbn/errors.hpp"
#include "dirbn/rng.hpp"

namespace dirbn {

/// One (word id, count) entry of a bag-of-words document. Count is >= 1.
struct WordCount {
    std::uint32_t word;
    Count count;

    friend bool operator==(const WordCount&, const WordCount&) = default;
};

/// A document is its nonzero word counts, sorted by ascending word id.
using Document = std::vector<WordCount>;

/**
 * Sparse document-word count matrix plus vocabulary.
 *
 * Zero counts are never stored and every word id is below vocab_size().
 */
class Corpus {
  public:
    Corpus() = default;

    Corpus(std::vector<std::string> vocab, std::vector<Document> docs,
           std::optional<std::vector<int>> labels = std::nullopt)
        : vocab_(std::move(vocab)), docs_(std::move(docs)), labels_(std::move(labels)) {
        for (auto& doc : docs_) normalize(doc);
        if (labels_ && labels_->size() != docs_.size())
            throw DomainError("labels must align with documents");
    }

    std::size_t num_docs() const noexcept { return docs_.size(); }
    std::size_t vocab_size() const noexcept { return vocab_.size(); }
    const std::vector<std::string>& vocab() const noexcept { return vocab_; }
    const std::vector<Document>& docs() const noexcept { return docs_; }
    const Document& doc(std::size_t d) const { return docs_.at(d); }
    const std::optional<std::vector<int>>& labels() const noexcept { return labels_; }

    Count doc_length(std::size_t d) const {
        Count n = 0;
        for (const auto& wc : docs_.at(d)) n += wc.count;
        return n;
    }

    Count total_tokens() const {
        Count n = 0;
        for (std::size_t d = 0; d < docs_.size(); ++d) n += doc_length(d);
        return n;
    }

    /// Count of word w in document d (0 when absent).
    Count count(std::size_t d, std::uint32_t w) const {
        const auto& doc = docs_.at(d);
        auto it = std::lower_bound(doc.begin(), doc.end(), w,
                                   [](const WordCount& wc, std::uint32_t id) { return wc.word < id; });
        return (it != doc.end() && it->word == w) ? it->count : 0;
    }

    /// Corpus over the same vocabulary holding the listed documents in order.
    Corpus subset(const std::vector<std::size_t>& doc_ids) const {
        std::vector<Document> docs;
        docs.reserve(doc_ids.size());
        std::optional<std::vector<int>> labels;
        if (labels_) labels.emplace();
        for (auto d : doc_ids) {
            docs.push_back(docs_.at(d));
            if (labels_) labels->push_back((*labels_)[d]);
        }
        return Corpus(vocab_, std::move(docs), std::move(labels));
    }

    friend bool operator==(const Corpus&, const Corpus&) = default;

  private:
    void normalize(Document& doc) const {
        std::sort(doc.begin(), doc.end(),
                  [](const WordCount& a, const WordCount& b) { return a.word < b.word; });
        Document merged;
        for (const auto& wc : doc) {
            if (wc.count <= 0) throw DomainError("stored counts must be >= 1");
            if (wc.word >= vocab_.size())
                throw BoundsError("word id " + std::to_string(wc.word) +
                                  " out of range for vocabulary of size " +
                                  std::to_string(vocab_.size()));
            if (!merged.empty() && merged.back().word == wc.word)
                merged.back().count += wc.count;
            else
                merged.push_back(wc);
        }
        doc = std::move(merged);
    }

    std::vector<std::string> vocab_;
    std::vector<Document> docs_;
    std::optional<std::vector<int>> labels_;
};

/// Observed / heldout halves of the same documents.
struct HeldoutSplit {
    Corpus observed;
    Corpus heldout;
    std::uint64_t seed = 0;
};

namespace detail {

inline std::ifstream open_input(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    return in;
}

/// Expands a document into one word id per token, in word-id order.
inline std::vector<std::uint32_t> expand_tokens(const Document& doc) {
    std::vector<std::uint32_t> tokens;
    for (const auto& wc : doc) tokens.insert(tokens.end(), static_cast<std::size_t>(wc.count), wc.word);
    return tokens;
}

inline Document collapse_tokens(std::vector<std::uint32_t> tokens) {
    std::sort(tokens.begin(), tokens.end());
    Document doc;
    for (auto w : tokens) {
        if (!doc.empty() && doc.back().word == w)
            ++doc.back().count;
        else
            doc.push_back({w, 1});
    }
    return doc;
}

/// Fisher-Yates shuffle of the first `keep` positions (partial shuffle).
template <typename T> void partial_shuffle(std::vector<T>& items, std::size_t keep, RngStream& rng) {
    const std::size_t n = items.size();
    for (std::size_t i = 0; i < std::min(keep, n); ++i) {
        const auto j = i + static_cast<std::size_t>(rng.index(n - i));
        std::swap(items[i], items[j]);
    }
}

} // namespace detail

inline std::vector<std::string> load_vocab(const std::filesystem::path& vocab_path) {
    auto in = detail::open_input(vocab_path);
    std::vector<std::string> vocab;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        vocab.push_back(line);
    }
    return vocab;
}

inline std::vector<int> load_labels(const std::filesystem::path& labels_path) {
    auto in = detail::open_input(labels_path);
    std::vector<int> labels;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::istringstream fields(line);
        int label;
        if (!(fields >> label)) throw ParseError("expected an integer label", line_no);
        labels.push_back(label);
    }
    return labels;
}

/**
 * Reads a UCI-style docword file ("D V NNZ" header, then "doc word count"
 * triples with 1-based ids) and a one-word-per-line vocabulary.
 */
inline Corpus load_corpus(const std::filesystem::path& docword_path,
                          const std::filesystem::path& vocab_path,
                          const std::optional<std::filesystem::path>& labels_path = std::nullopt) {
    auto vocab = load_vocab(vocab_path);
    auto in = detail::open_input(docword_path);

    std::string line;
    std::size_t line_no = 0;
    auto next_line = [&]() -> bool {
        while (std::getline(in, line)) {
            ++line_no;
            if (line.find_first_not_of(" \t\r") != std::string::npos) return true;
        }
        return false;
    };

    if (!next_line()) throw ParseError("empty docword file", 1);
    long long num_docs = 0, header_vocab = 0, nnz = 0;
    {
        std::istringstream header(line);
        std::string extra;
        if (!(header >> num_docs >> header_vocab >> nnz) || (header >> extra) || num_docs < 0 ||
            header_vocab < 0 || nnz < 0)
            throw ParseError("header must be three nonnegative integers \"D V NNZ\"", line_no);
    }

    std::vector<Document> docs(static_cast<std::size_t>(num_docs));
    long long triples = 0;
    while (next_line()) {
        std::istringstream fields(line);
        long long d = 0, w = 0, c = 0;
        std::string extra;
        if (!(fields >> d >> w >> c) || (fields >> extra))
            throw ParseError("expected \"doc_id word_id count\"", line_no);
        if (c <= 0) throw ParseError("count must be >= 1", line_no);
        if (d < 1 || d > num_docs)
            throw BoundsError("line " + std::to_string(line_no) + ": doc id " + std::to_string(d) +
                              " out of range [1, " + std::to_string(num_docs) + "]");
        if (w < 1 || w > static_cast<long long>(vocab.size()))
            throw BoundsError("line " + std::to_string(line_no) + ": word id " + std::to_string(w) +
                              " out of range [1, " + std::to_string(vocab.size()) + "]");
        docs[static_cast<std::size_t>(d - 1)].push_back(
            {static_cast<std::uint32_t>(w - 1), static_cast<Count>(c)});
        ++triples;
    }
    if (triples != nnz)
        throw ParseError("header declares " + std::to_string(nnz) + " entries but file has " +
                         std::to_string(triples));

    std::optional<std::vector<int>> labels;
    if (labels_path) labels = load_labels(*labels_path);
    return Corpus(std::move(vocab), std::move(docs), std::move(labels));
}

inline void save_corpus(const Corpus& corpus, const std::filesystem::path& docword_path,
                        const std::optional<std::filesystem::path>& vocab_path = std::nullopt) {
    std::ofstream out(docword_path);
    if (!out) throw IoError("cannot write " + docword_path.string());
    std::size_t nnz = 0;
    for (const auto& doc : corpus.docs()) nnz += doc.size();
    out << corpus.num_docs() << ' ' << corpus.vocab_size() << ' ' << nnz << '\n';
    for (std::size_t d = 0; d < corpus.num_docs(); ++d)
        for (const auto& wc : corpus.doc(d)) out << d + 1 << ' ' << wc.word + 1 << ' ' << wc.count << '\n';
    if (!out) throw IoError("failed writing " + docword_path.string());

    if (vocab_path) {
        std::ofstream vout(*vocab_path);
        if (!vout) throw IoError("cannot write " + vocab_path->string());
        for (const auto& w : corpus.vocab()) vout << w << '\n';
    }
}

/// Seeded document partition; train gets round(train_fraction * D) documents.
inline std::pair<Corpus, Corpus> split_documents(const Corpus& corpus, double train_fraction,
                                                 std::uint64_t seed) {
    if (!(train_fraction > 0.0 && train_fraction < 1.0))
        throw DomainError("train fraction must lie in (0, 1)");
    if (corpus.num_docs() == 0) throw DomainError("cannot split an empty corpus");

    std::vector<std::size_t> order(corpus.num_docs());
    for (std::size_t d = 0; d < order.size(); ++d) order[d] = d;
    auto n_train = static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(order.size())));
    RngStream rng(seed, 0x5D0C);
    detail::partial_shuffle(order, order.size(), rng);

    std::vector<std::size_t> train(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
    std::vector<std::size_t> test(order.begin() + static_cast<std::ptrdiff_t>(n_train), order.end());
    std::sort(train.begin(), train.end());
    std::sort(test.begin(), test.end());
    return {corpus.subset(train), corpus.subset(test)};
}

/**
 * Per document, tokens are randomly split ceil(n/2) observed / floor(n/2)
 * heldout. A single-token document keeps its token in the observed half.
 */
inline HeldoutSplit split_words(const Corpus& corpus, std::uint64_t seed) {
    if (corpus.num_docs() == 0) throw DomainError("cannot split an empty corpus");
    std::vector<Document> observed(corpus.num_docs()), heldout(corpus.num_docs());
    RngStream base(seed, 0x5B0D);
    for (std::size_t d = 0; d < corpus.num_docs(); ++d) {
        auto tokens = detail::expand_tokens(corpus.doc(d));
        const std::size_t keep = (tokens.size() + 1) / 2;
        auto rng = base.substream(d);
        detail::partial_shuffle(tokens, keep, rng);
        observed[d] = detail::collapse_tokens({tokens.begin(), tokens.begin() + static_cast<std::ptrdiff_t>(keep)});
        heldout[d] = detail::collapse_tokens({tokens.begin() + static_cast<std::ptrdiff_t>(keep), tokens.end()});
    }
    return {Corpus(corpus.vocab(), std::move(observed), corpus.labels()),
            Corpus(corpus.vocab(), std::move(heldout), corpus.labels()), seed};
}

/// Keeps a uniform random subset of round(proportion * n_d) tokens per document.
inline Corpus subsample_words(const Corpus& corpus, double proportion, std::uint64_t seed) {
    if (!(proportion > 0.0 && proportion <= 1.0))
        throw DomainError("subsample proportion must lie in (0, 1]");
    if (proportion == 1.0) return corpus;
    std::vector<Document> docs(corpus.num_docs());
    RngStream base(seed, 0x5AB5);
    for (std::size_t d = 0; d < corpus.num_docs(); ++d) {
        auto tokens = detail::expand_tokens(corpus.doc(d));
        const auto keep = static_cast<std::size_t>(std::llround(proportion * static_cast<double>(tokens.size())));
        auto rng = base.substream(d);
        detail::partial_shuffle(tokens, keep, rng);
        tokens.resize(keep);
        docs[d] = detail::collapse_tokens(std::move(tokens));
    }
    return Corpus(corpus.vocab(), std::move(docs), corpus.labels());
}

} // namespace dirbn
