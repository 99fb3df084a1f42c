#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "dirbn/corpus.hpp"
#include "dirbn/errors.hpp"
#include "dirbn/model.hpp"
#include "dirbn/topic_model.hpp"

namespace dirbn {

/**
 * Per-heldout-word perplexity with the Rao-Blackwellized predictive
 * p_dv = (1/S) sum_s sum_k theta^s_dk phi^s_vk.
 */
inline double perplexity(const std::vector<Matrix>& phi_samples, const std::vector<Matrix>& theta_samples,
                         const Corpus& heldout) {
    if (phi_samples.empty() || phi_samples.size() != theta_samples.size())
        throw DomainError("need matching, non-empty phi and theta sample sets");
    const Count total = heldout.total_tokens();
    if (total == 0) throw DomainError("heldout corpus has no tokens");
    const auto S = static_cast<double>(phi_samples.size());
    for (std::size_t s = 0; s < phi_samples.size(); ++s)
        if (theta_samples[s].rows() != static_cast<Eigen::Index>(heldout.num_docs()) ||
            theta_samples[s].cols() != phi_samples[s].cols() ||
            phi_samples[s].rows() != static_cast<Eigen::Index>(heldout.vocab_size()))
            throw DomainError("sample shapes do not match the heldout corpus");

    double log_sum = 0.0;
    for (std::size_t d = 0; d < heldout.num_docs(); ++d) {
        const auto row = static_cast<Eigen::Index>(d);
        for (const auto& wc : heldout.doc(d)) {
            double p = 0.0;
            for (std::size_t s = 0; s < phi_samples.size(); ++s)
                p += theta_samples[s].row(row).dot(phi_samples[s].row(wc.word));
            p /= S;
            if (!(p > 0.0))
                throw DegeneracyError("zero predictive probability for word " + std::to_string(wc.word) +
                                      " in document " + std::to_string(d));
            log_sum += static_cast<double>(wc.count) * std::log(p);
        }
    }
    return std::exp(-log_sum / static_cast<double>(total));
}

/// Document-level word occurrence statistics of a reference corpus.
class Cooccurrence {
  public:
    static constexpr double kEpsilon = 1e-12;

    explicit Cooccurrence(const Corpus& reference)
        : num_docs_(reference.num_docs()), docs_of_word_(reference.vocab_size()) {
        if (num_docs_ == 0) throw DomainError("reference corpus is empty");
        for (std::size_t d = 0; d < num_docs_; ++d)
            for (const auto& wc : reference.doc(d)) docs_of_word_[wc.word].push_back(static_cast<std::uint32_t>(d));
    }

    std::size_t num_docs() const noexcept { return num_docs_; }
    std::size_t doc_count(std::uint32_t w) const { return docs_of_word_.at(w).size(); }

    std::size_t doc_count(std::uint32_t a, std::uint32_t b) const {
        const auto& da = docs_of_word_.at(a);
        const auto& db = docs_of_word_.at(b);
        std::size_t n = 0;
        for (std::size_t i = 0, j = 0; i < da.size() && j < db.size();) {
            if (da[i] < db[j])
                ++i;
            else if (db[j] < da[i])
                ++j;
            else
                ++n, ++i, ++j;
        }
        return n;
    }

    double p(std::uint32_t w) const { return static_cast<double>(doc_count(w)) / static_cast<double>(num_docs_); }
    double p(std::uint32_t a, std::uint32_t b) const {
        return static_cast<double>(doc_count(a, b)) / static_cast<double>(num_docs_);
    }

    /// log[p(a,b) / (p(a) p(b))] / -log p(a,b); -1 when the pair never co-occurs.
    double npmi(std::uint32_t a, std::uint32_t b) const {
        const std::size_t joint = doc_count(a, b);
        if (joint == 0) return -1.0;
        const double pab = std::log(p(a, b) + kEpsilon);
        const double pmi = pab - std::log(p(a) + kEpsilon) - std::log(p(b) + kEpsilon);
        return pmi / -pab;
    }

  private:
    std::size_t num_docs_;
    std::vector<std::vector<std::uint32_t>> docs_of_word_;
};

inline Cooccurrence build_cooccurrence(const Corpus& reference) { return Cooccurrence(reference); }

struct CoherenceResult {
    std::vector<double> per_topic;
    double aggregate = 0.0;
    std::size_t aggregated_topics = 0;
};

/**
 * Mean pairwise NPMI per topic; the aggregate is the mean over the
 * `top_topics` best-scoring topics (all topics when there are fewer).
 */
inline CoherenceResult npmi_coherence(const std::vector<std::vector<std::uint32_t>>& topics,
                                      const Cooccurrence& cooc, std::size_t top_topics = 50) {
    CoherenceResult result;
    for (const auto& words : topics) {
        if (words.empty()) throw DomainError("top-word list is empty");
        double sum = 0.0;
        std::size_t pairs = 0;
        for (std::size_t i = 0; i < words.size(); ++i)
            for (std::size_t j = i + 1; j < words.size(); ++j, ++pairs) sum += cooc.npmi(words[i], words[j]);
        result.per_topic.push_back(pairs ? sum / static_cast<double>(pairs) : 0.0);
    }
    std::vector<double> sorted = result.per_topic;
    std::sort(sorted.begin(), sorted.end(), std::greater<>());
    result.aggregated_topics = std::min(top_topics, sorted.size());
    if (result.aggregated_topics > 0)
        result.aggregate = std::accumulate(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(result.aggregated_topics), 0.0) /
                           static_cast<double>(result.aggregated_topics);
    return result;
}

/// Ids of the n heaviest words, descending weight, ties by ascending id.
inline std::vector<std::uint32_t> top_words(std::span<const double> weights, std::size_t n) {
    if (n == 0) throw DomainError("top-word count must be >= 1");
    std::vector<std::uint32_t> ids(weights.size());
    std::iota(ids.begin(), ids.end(), 0u);
    n = std::min(n, ids.size());
    std::partial_sort(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(n), ids.end(),
                      [&](std::uint32_t a, std::uint32_t b) {
                          return weights[a] != weights[b] ? weights[a] > weights[b] : a < b;
                      });
    ids.resize(n);
    return ids;
}

inline std::vector<std::string> top_words(std::span<const double> weights, const std::vector<std::string>& vocab,
                                          std::size_t n) {
    std::vector<std::string> words;
    for (auto id : top_words(weights, n)) words.push_back(vocab.at(id));
    return words;
}

struct HierarchyTopic {
    std::size_t layer = 0;
    std::size_t topic = 0;
    std::vector<std::uint32_t> word_ids;
    std::vector<std::string> words;
    std::vector<double> weights;
    double mass = 0.0;
};

struct HierarchyLink {
    std::size_t layer = 0;  ///< child layer t; parent lives in t+1
    std::size_t parent = 0;
    std::size_t child = 0;
    double weight = 0.0;    ///< beta(parent, child) / sum_parent' beta(parent', child)
};

struct TopicHierarchy {
    std::vector<std::vector<HierarchyTopic>> layers;
    std::vector<HierarchyLink> links;
};

/// Column-normalized link weights of beta[t]: each child column sums to 1.
inline Matrix normalized_links(const DirBNState& state, std::size_t t) {
    detail::check_layer(state, t, true);
    Matrix w = state.beta[t];
    for (Eigen::Index k = 0; k < w.cols(); ++k) w.col(k) /= w.col(k).sum();
    return w;
}

/**
 * Topics of every layer with their top words, plus every cross-layer link
 * whose normalized weight is at least link_threshold. `mass` (optional,
 * per layer) annotates each topic with its share of latent counts.
 */
inline TopicHierarchy extract_hierarchy(const DirBNState& state, const std::vector<std::string>& vocab,
                                        std::size_t top_n, double link_threshold,
                                        const std::vector<Vector>& mass = {}) {
    if (static_cast<Eigen::Index>(vocab.size()) != state.config.vocab())
        throw DomainError("vocabulary size does not match the state");
    TopicHierarchy h;
    for (std::size_t t = 0; t < state.depth(); ++t) {
        std::vector<HierarchyTopic> topics;
        for (Eigen::Index k = 0; k < state.phi[t].cols(); ++k) {
            HierarchyTopic topic;
            topic.layer = t;
            topic.topic = static_cast<std::size_t>(k);
            topic.word_ids = top_words(column(state.phi[t], k), top_n);
            for (auto id : topic.word_ids) {
                topic.words.push_back(vocab[id]);
                topic.weights.push_back(state.phi[t](id, k));
            }
            if (t < mass.size() && k < mass[t].size()) topic.mass = mass[t][k];
            topics.push_back(std::move(topic));
        }
        h.layers.push_back(std::move(topics));
    }
    for (std::size_t t = 0; t + 1 < state.depth(); ++t) {
        const Matrix w = normalized_links(state, t);
        for (Eigen::Index k = 0; k < w.cols(); ++k)
            for (Eigen::Index j = 0; j < w.rows(); ++j)
                if (w(j, k) >= link_threshold)
                    h.links.push_back({t, static_cast<std::size_t>(j), static_cast<std::size_t>(k), w(j, k)});
    }
    return h;
}

/// Up to `n` strongest parents of child topic k in layer t, strongest first.
inline std::vector<HierarchyLink> strongest_parents(const TopicHierarchy& h, std::size_t t, std::size_t k,
                                                    std::size_t n = 3) {
    std::vector<HierarchyLink> parents;
    for (const auto& l : h.links)
        if (l.layer == t && l.child == k) parents.push_back(l);
    std::stable_sort(parents.begin(), parents.end(),
                     [](const HierarchyLink& a, const HierarchyLink& b) { return a.weight > b.weight; });
    if (parents.size() > n) parents.resize(n);
    return parents;
}

struct ShrinkageStats {
    Vector mass;                     ///< per topic share of layer counts, sums to 1
    std::vector<std::size_t> histogram;
    double bin_width = 0.0;          ///< bins cover [0, max mass]
    std::size_t active = 0;
};

/// Normalized per-topic latent count mass of layer t and its histogram.
inline ShrinkageStats shrinkage_stats(const LatentCounts& counts, std::size_t t, double active_threshold = 0.001,
                                      std::size_t bins = 20) {
    if (t >= counts.x.size())
        throw BoundsError("layer index " + std::to_string(t) + " out of range (" + std::to_string(counts.x.size()) +
                          " layers)");
    if (bins == 0) throw DomainError("histogram needs at least one bin");
    ShrinkageStats s;
    s.mass = topic_mass(counts.x[t]);
    s.active = count_active(s.mass, active_threshold);
    s.histogram.assign(bins, 0);
    const double top = s.mass.size() ? s.mass.maxCoeff() : 0.0;
    s.bin_width = top > 0.0 ? top / static_cast<double>(bins) : 1.0;
    for (Eigen::Index k = 0; k < s.mass.size(); ++k) {
        auto b = static_cast<std::size_t>(s.mass[k] / s.bin_width);
        ++s.histogram[std::min(b, bins - 1)];
    }
    return s;
}

/// Fraction of normalized link weights of beta[t] strictly below `threshold`.
inline double link_sparsity(const DirBNState& state, std::size_t t, double threshold) {
    const Matrix w = normalized_links(state, t);
    return static_cast<double>((w.array() < threshold).count()) / static_cast<double>(w.size());
}

} // namespace dirbn
