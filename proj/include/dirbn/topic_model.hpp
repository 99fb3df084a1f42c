#pragma once

#include <chrono>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "dirbn/corpus.hpp"
#include "dirbn/distributions.hpp"
#include "dirbn/model.hpp"
#include "dirbn/parallel.hpp"

namespace dirbn {

/**
 * Finite mixed-membership base model feeding the network: explicit
 * per-document topic proportions and per-token topic assignments.
 */
struct BaseModelState {
    Matrix theta;                                  ///< D x K, rows on the simplex
    std::vector<std::vector<std::uint32_t>> assignments;  ///< per doc, per token (word-id order)
    CountMatrix word_topic;                        ///< V x K
    CountMatrix doc_topic;                         ///< D x K
    double alpha_theta = 0.1;
};

namespace detail {

enum ModelPhase : std::uint64_t {
    kAssignInit = 101,
    kAssign,
    kTheta,
};

inline void rebuild_word_topic(BaseModelState& model, const Corpus& corpus) {
    model.word_topic.setZero(static_cast<Eigen::Index>(corpus.vocab_size()), model.theta.cols());
    for (std::size_t d = 0; d < corpus.num_docs(); ++d) {
        const auto& z = model.assignments[d];
        std::size_t n = 0;
        for (const auto& wc : corpus.doc(d))
            for (Count i = 0; i < wc.count; ++i) ++model.word_topic(wc.word, z[n++]);
    }
}

inline void draw_theta_row(BaseModelState& model, std::size_t d, RngStream& rng) {
    const Eigen::Index K = model.theta.cols();
    const auto row = static_cast<Eigen::Index>(d);
    if (K == 1) {
        model.theta(row, 0) = 1.0;
        return;
    }
    std::vector<double> alpha(static_cast<std::size_t>(K)), theta(static_cast<std::size_t>(K));
    for (Eigen::Index k = 0; k < K; ++k)
        alpha[static_cast<std::size_t>(k)] = model.alpha_theta + static_cast<double>(model.doc_topic(row, k));
    sample_dirichlet(alpha, rng, theta);
    for (Eigen::Index k = 0; k < K; ++k) model.theta(row, k) = theta[static_cast<std::size_t>(k)];
}

} // namespace detail

/// theta_d ~ Dir(alpha_theta + doc_topic_d) for every document.
inline void update_theta(BaseModelState& model, const RngStream& rng) {
    parallel_for(static_cast<std::size_t>(model.theta.rows()), [&](std::size_t d) {
        auto draw = rng.substream(detail::kTheta, d);
        detail::draw_theta_row(model, d, draw);
    });
}

/// Uniformly random assignments, consistent counts, theta from its conditional.
inline BaseModelState init_model(const Corpus& corpus, std::size_t num_topics, double alpha_theta,
                                 const RngStream& rng) {
    if (num_topics == 0) throw DomainError("number of topics must be >= 1");
    detail::require_positive(alpha_theta, "alpha_theta");
    const auto D = static_cast<Eigen::Index>(corpus.num_docs());
    const auto K = static_cast<Eigen::Index>(num_topics);
    BaseModelState model;
    model.alpha_theta = alpha_theta;
    model.theta = Matrix::Zero(D, K);
    model.doc_topic = CountMatrix::Zero(D, K);
    model.assignments.resize(corpus.num_docs());
    parallel_for(corpus.num_docs(), [&](std::size_t d) {
        auto draw = rng.substream(detail::kAssignInit, d);
        auto& z = model.assignments[d];
        z.resize(static_cast<std::size_t>(corpus.doc_length(d)));
        for (auto& topic : z) {
            topic = static_cast<std::uint32_t>(draw.index(num_topics));
            ++model.doc_topic(static_cast<Eigen::Index>(d), topic);
        }
    });
    detail::rebuild_word_topic(model, corpus);
    update_theta(model, rng);
    return model;
}

/**
 * Resamples every token's topic from p_k proportional to theta_dk * phi1_vk
 * and recomputes both count matrices from the new assignments.
 */
inline void sample_assignments(BaseModelState& model, const Corpus& corpus, const Matrix& phi1,
                               const RngStream& rng) {
    const Eigen::Index K = model.theta.cols();
    if (phi1.cols() != K || phi1.rows() != static_cast<Eigen::Index>(corpus.vocab_size()))
        throw DomainError("phi1 shape does not match the base model");
    parallel_for(corpus.num_docs(), [&](std::size_t d) {
        auto draw = rng.substream(detail::kAssign, d);
        const auto row = static_cast<Eigen::Index>(d);
        auto& z = model.assignments[d];
        std::vector<double> weights(static_cast<std::size_t>(K));
        model.doc_topic.row(row).setZero();
        std::size_t n = 0;
        for (const auto& wc : corpus.doc(d)) {
            double total = 0.0;
            for (Eigen::Index k = 0; k < K; ++k)
                total += weights[static_cast<std::size_t>(k)] = model.theta(row, k) * phi1(wc.word, k);
            if (!(total > 0.0)) {
                double top = -std::numeric_limits<double>::infinity();
                for (Eigen::Index k = 0; k < K; ++k) {
                    weights[static_cast<std::size_t>(k)] = std::log(model.theta(row, k)) + std::log(phi1(wc.word, k));
                    top = std::max(top, weights[static_cast<std::size_t>(k)]);
                }
                if (!std::isfinite(top))
                    throw DegeneracyError("all topic weights vanish for document " + std::to_string(d));
                total = 0.0;
                for (auto& w : weights) total += w = std::exp(w - top);
            }
            for (Count i = 0; i < wc.count; ++i) {
                const auto k = static_cast<std::uint32_t>(sample_categorical(weights, total, draw));
                z[n++] = k;
                ++model.doc_topic(row, k);
            }
        }
    });
    detail::rebuild_word_topic(model, corpus);
}

/// Recomputes counts from raw assignments; throws DomainError on any mismatch.
inline void audit_counts(const BaseModelState& model, const Corpus& corpus, double tol = 1e-9) {
    const Eigen::Index K = model.theta.cols();
    CountMatrix doc_topic = CountMatrix::Zero(static_cast<Eigen::Index>(corpus.num_docs()), K);
    CountMatrix word_topic = CountMatrix::Zero(static_cast<Eigen::Index>(corpus.vocab_size()), K);
    for (std::size_t d = 0; d < corpus.num_docs(); ++d) {
        const auto& z = model.assignments.at(d);
        if (static_cast<Count>(z.size()) != corpus.doc_length(d)) throw DomainError("assignment length mismatch");
        std::size_t n = 0;
        for (const auto& wc : corpus.doc(d))
            for (Count i = 0; i < wc.count; ++i, ++n) {
                if (z[n] >= K) throw DomainError("assignment out of range");
                ++doc_topic(static_cast<Eigen::Index>(d), z[n]);
                ++word_topic(wc.word, z[n]);
            }
    }
    if (doc_topic != model.doc_topic) throw DomainError("doc-topic counts disagree with assignments");
    if (word_topic != model.word_topic) throw DomainError("word-topic counts disagree with assignments");
    for (Eigen::Index d = 0; d < model.theta.rows(); ++d)
        if (std::abs(model.theta.row(d).sum() - 1.0) > tol) throw DomainError("theta row off the simplex");
}

/// sum_{d,v} n_dv log sum_k theta_dk phi_vk
inline double token_log_likelihood(const Corpus& corpus, const Matrix& theta, const Matrix& phi1) {
    double ll = 0.0;
    for (std::size_t d = 0; d < corpus.num_docs(); ++d)
        for (const auto& wc : corpus.doc(d))
            ll += static_cast<double>(wc.count) *
                  std::log(theta.row(static_cast<Eigen::Index>(d)).dot(phi1.row(wc.word)));
    return ll;
}

/// Share of layer-t input counts held by each topic.
inline Vector topic_mass(const CountMatrix& x) {
    Vector mass = detail::column_sums(x);
    const double total = mass.sum();
    if (total > 0.0) mass /= total;
    return mass;
}

inline std::size_t count_active(const Vector& mass, double threshold) {
    std::size_t n = 0;
    for (Eigen::Index k = 0; k < mass.size(); ++k)
        if (mass[k] > threshold) ++n;
    return n;
}

struct TrainConfig {
    DirBNConfig network;  ///< vocab_size is filled from the corpus
    std::size_t iterations = 3000;
    std::size_t burnin = 1500;
    std::size_t thin = 10;
    double alpha_theta = 0.1;
    double active_threshold = 0.001;
    std::uint64_t seed = 0;
};

struct IterationRecord {
    std::size_t iteration = 0;
    double log_likelihood = 0.0;
    std::vector<std::size_t> active_topics;
    double seconds = 0.0;
    Count degenerate_allocations = 0;
};

/// "iter \t loglik \t active,per,layer \t seconds"
inline std::string format_log_line(const IterationRecord& r) {
    std::string active;
    for (std::size_t t = 0; t < r.active_topics.size(); ++t)
        active += (t ? "," : "") + std::to_string(r.active_topics[t]);
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", r.log_likelihood);
    std::string line = std::to_string(r.iteration) + '\t' + buf + '\t' + active + '\t';
    std::snprintf(buf, sizeof buf, "%.3f", r.seconds);
    return line + buf;
}

struct TrainResult {
    DirBNState state;
    BaseModelState base;
    LatentCounts last_counts;
    std::vector<Matrix> phi1_samples;
    std::vector<Matrix> theta_samples;
    std::vector<Vector> topic_mass;  ///< per layer, from the final sweep
    std::size_t sweeps = 0;
};

namespace detail {

enum TrainPhase : std::uint64_t {
    kTrainInitNet = 201,
    kTrainInitModel,
    kTrainIter,
};

} // namespace detail

/// One full sweep: assignments, theta, upward pass, downward pass.
inline LatentCounts sweep(DirBNState& state, PsiCache& psi, BaseModelState& model, const Corpus& corpus,
                          const RngStream& rng) {
    sample_assignments(model, corpus, state.phi[0], rng.substream(1));
    update_theta(model, rng.substream(2));
    LatentCounts counts = upward_pass(state, psi, model.word_topic, rng.substream(3));
    psi = downward_pass(state, counts, rng.substream(4));
    return counts;
}

/**
 * Gibbs sampler over the base model and the network. Samples of (theta,
 * phi1) are kept after burn-in at every `thin`-th iteration.
 */
inline TrainResult train(const Corpus& corpus, TrainConfig config,
                         const std::function<void(const IterationRecord&)>& on_iteration = {}) {
    if (config.thin == 0) throw DomainError("thinning interval must be >= 1");
    if (config.burnin > config.iterations) throw DomainError("burn-in exceeds iteration count");
    config.network.vocab_size = corpus.vocab_size();
    config.network.validate();

    const RngStream master(config.seed, 0);
    TrainResult result;
    result.state = init_state(config.network, master.substream(detail::kTrainInitNet));
    result.base = init_model(corpus, config.network.layer_widths.front(), config.alpha_theta,
                             master.substream(detail::kTrainInitModel));
    PsiCache psi = compute_psi_cache(result.state);

    const auto start = std::chrono::steady_clock::now();
    for (std::size_t iter = 1; iter <= config.iterations; ++iter) {
        result.last_counts =
            sweep(result.state, psi, result.base, corpus, master.substream(detail::kTrainIter, iter));
        result.sweeps = iter;

        if (iter > config.burnin && (iter - config.burnin) % config.thin == 0) {
            result.phi1_samples.push_back(result.state.phi[0]);
            result.theta_samples.push_back(result.base.theta);
        }
        if (on_iteration) {
            IterationRecord record;
            record.iteration = iter;
            record.log_likelihood = token_log_likelihood(corpus, result.base.theta, result.state.phi[0]);
            for (const auto& x : result.last_counts.x)
                record.active_topics.push_back(count_active(topic_mass(x), config.active_threshold));
            record.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
            record.degenerate_allocations = result.last_counts.degenerate_allocations;
            on_iteration(record);
        }
    }
    result.topic_mass.clear();
    for (const auto& x : result.last_counts.x) result.topic_mass.push_back(topic_mass(x));
    if (config.iterations == 0) {
        for (std::size_t t = 0; t < result.state.depth(); ++t)
            result.topic_mass.push_back(Vector::Zero(result.state.config.width(t)));
    }
    return result;
}

/**
 * Per phi1 sample, runs the base-model sampler on the observed halves with
 * phi1 frozen and returns the posterior-mean topic proportions averaged over
 * the second half of the inner iterations.
 */
inline std::vector<Matrix> infer_theta_heldout(const std::vector<Matrix>& phi1_samples, const Corpus& observed,
                                               std::size_t inner_iterations, double alpha_theta,
                                               const RngStream& rng) {
    std::vector<Matrix> estimates;
    estimates.reserve(phi1_samples.size());
    for (std::size_t s = 0; s < phi1_samples.size(); ++s) {
        const Matrix& phi1 = phi1_samples[s];
        const auto K = static_cast<std::size_t>(phi1.cols());
        const RngStream sample_rng = rng.substream(s);
        BaseModelState model = init_model(observed, K, alpha_theta, sample_rng.substream(0));

        auto posterior_mean = [&] {
            Matrix mean(model.doc_topic.rows(), model.doc_topic.cols());
            for (Eigen::Index d = 0; d < mean.rows(); ++d) {
                const double n = static_cast<double>(model.doc_topic.row(d).sum());
                for (Eigen::Index k = 0; k < mean.cols(); ++k)
                    mean(d, k) = (alpha_theta + static_cast<double>(model.doc_topic(d, k))) /
                                 (static_cast<double>(K) * alpha_theta + n);
            }
            return mean;
        };

        Matrix acc = Matrix::Zero(model.theta.rows(), model.theta.cols());
        std::size_t kept = 0;
        for (std::size_t it = 1; it <= inner_iterations; ++it) {
            const RngStream it_rng = sample_rng.substream(it);
            sample_assignments(model, observed, phi1, it_rng.substream(1));
            update_theta(model, it_rng.substream(2));
            if (2 * it > inner_iterations) {
                acc += posterior_mean();
                ++kept;
            }
        }
        estimates.push_back(kept ? Matrix(acc / static_cast<double>(kept)) : posterior_mean());
    }
    return estimates;
}

} // namespace dirbn
