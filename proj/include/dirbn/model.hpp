#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "dirbn/corpus.hpp"
#include "dirbn/distributions.hpp"
#include "dirbn/errors.hpp"
#include "dirbn/parallel.hpp"
#include "dirbn/rng.hpp"

namespace dirbn {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using CountMatrix = Eigen::Matrix<Count, Eigen::Dynamic, Eigen::Dynamic>;

inline std::span<double> column(Matrix& m, Eigen::Index k) { return {m.col(k).data(), static_cast<std::size_t>(m.rows())}; }
inline std::span<const double> column(const Matrix& m, Eigen::Index k) {
    return {m.col(k).data(), static_cast<std::size_t>(m.rows())};
}

/**
 * Shape and hyperparameters of a Dirichlet belief network.
 *
 * Layers are indexed from the bottom: layer 0 holds the topics that generate
 * words, layer depth()-1 is the top layer with a symmetric Dirichlet prior.
 */
struct DirBNConfig {
    std::vector<std::size_t> layer_widths{100};
    std::size_t vocab_size = 0;
    double a0 = 1.0;
    double b0 = 1.0;
    double e0 = 0.01;
    double f0 = 0.01;
    double g0 = 1.0;
    double h0 = 1.0;
    /// When false, gamma0 and c0 stay at the fixed values below.
    bool sample_top_hypers = true;
    double gamma0_fixed = 1.0;
    double c0_fixed = 1.0;

    std::size_t depth() const noexcept { return layer_widths.size(); }
    Eigen::Index width(std::size_t t) const { return static_cast<Eigen::Index>(layer_widths.at(t)); }
    Eigen::Index vocab() const noexcept { return static_cast<Eigen::Index>(vocab_size); }

    void validate() const {
        if (layer_widths.empty()) throw DomainError("DirBN needs at least one layer");
        for (auto k : layer_widths)
            if (k == 0) throw DomainError("layer widths must be >= 1");
        if (vocab_size < 2) throw DomainError("vocabulary size must be >= 2");
        for (double h : {a0, b0, e0, f0, g0, h0, gamma0_fixed, c0_fixed})
            if (!(h > 0.0) || !std::isfinite(h)) throw DomainError("hyperparameters must be positive");
    }

    friend bool operator==(const DirBNConfig&, const DirBNConfig&) = default;
};

/**
 * Network parameters.
 *
 * phi[t] is V x K_t with columns on the simplex. For t < depth()-1,
 * beta[t] is K_{t+1} x K_t (row = parent topic, column = child topic),
 * gamma_shape[t] has K_{t+1} entries and c, gamma0, c0 are per-layer scalars.
 */
struct DirBNState {
    DirBNConfig config;
    std::vector<Matrix> phi;
    std::vector<Matrix> beta;
    std::vector<Vector> gamma_shape;
    std::vector<double> c;
    std::vector<double> gamma0;
    std::vector<double> c0;
    double eta = 1.0;

    std::size_t depth() const noexcept { return config.depth(); }

    /// Throws DomainError naming the first violated invariant.
    void check_invariants(double tol = 1e-9) const {
        const std::size_t T = depth();
        auto fail = [](const std::string& what) { throw DomainError("state invariant violated: " + what); };
        if (phi.size() != T || beta.size() + 1 != T || gamma_shape.size() + 1 != T || c.size() + 1 != T ||
            gamma0.size() + 1 != T || c0.size() + 1 != T)
            fail("layer count mismatch");
        if (!(eta > 0.0)) fail("eta must be positive");
        for (std::size_t t = 0; t < T; ++t) {
            if (phi[t].rows() != config.vocab() || phi[t].cols() != config.width(t)) fail("phi shape");
            for (Eigen::Index k = 0; k < phi[t].cols(); ++k) {
                if (phi[t].col(k).minCoeff() < 0.0) fail("negative phi entry");
                if (std::abs(phi[t].col(k).sum() - 1.0) > tol) fail("phi column off the simplex");
            }
        }
        for (std::size_t t = 0; t + 1 < T; ++t) {
            if (beta[t].rows() != config.width(t + 1) || beta[t].cols() != config.width(t)) fail("beta shape");
            if (!(beta[t].minCoeff() > 0.0)) fail("beta entries must be positive");
            if (!(gamma_shape[t].minCoeff() > 0.0) || !(c[t] > 0.0) || !(gamma0[t] > 0.0) || !(c0[t] > 0.0))
                fail("layer hyperparameters must be positive");
        }
    }

    friend bool operator==(const DirBNState&, const DirBNState&) = default;
};

/// psi[t] = phi[t+1] * beta[t] (floored); colsum[t] holds its column sums.
struct PsiCache {
    std::vector<Matrix> psi;
    std::vector<Vector> colsum;
};

/**
 * Augmented counts of one sweep.
 *
 * x[t] (t < depth) are the input counts of layer t; x[0] comes from the base
 * model. For t < depth-1: q[t] / neg_log_q[t] are the per-topic beta
 * auxiliaries, y[t] the CRT table counts and z_sum[t](k', k) = sum_v z.
 */
struct LatentCounts {
    std::vector<Vector> q;
    std::vector<Vector> neg_log_q;
    std::vector<CountMatrix> y;
    std::vector<CountMatrix> z_sum;
    std::vector<CountMatrix> x;
    /// Cells whose allocation mass underflowed and were spread uniformly.
    Count degenerate_allocations = 0;
};

namespace detail {

// Sub-stream tags, one per sampling phase.
enum Phase : std::uint64_t {
    kInitHyper = 1,
    kInitBeta,
    kInitPhi,
    kUpward,
    kEta,
    kLayerHyper,
    kGammaCrt,
    kGammaDraw,
    kBeta,
    kPhi,
    kGenerate,
};

inline void check_layer(const DirBNState& state, std::size_t t, bool needs_parent) {
    const std::size_t limit = needs_parent ? state.depth() - 1 : state.depth();
    if (t >= limit)
        throw BoundsError("layer index " + std::to_string(t) + " out of range (depth " +
                          std::to_string(state.depth()) + ")");
}

inline Vector column_sums(const CountMatrix& m) { return m.cast<double>().colwise().sum().transpose(); }

} // namespace detail

/// Phi[t+1] * B[t], floored at kPositiveFloor so every entry stays a valid concentration.
inline Matrix compute_psi(const DirBNState& state, std::size_t t) {
    detail::check_layer(state, t, true);
    Matrix psi = state.phi[t + 1] * state.beta[t];
    psi = psi.cwiseMax(kPositiveFloor);
    return psi;
}

inline PsiCache compute_psi_cache(const DirBNState& state) {
    PsiCache cache;
    for (std::size_t t = 0; t + 1 < state.depth(); ++t) {
        cache.psi.push_back(compute_psi(state, t));
        cache.colsum.push_back(cache.psi.back().colwise().sum().transpose());
    }
    return cache;
}

/// Draws a complete network from the prior, top layer first.
inline DirBNState init_state(const DirBNConfig& config, const RngStream& rng) {
    config.validate();
    const std::size_t T = config.depth();
    const Eigen::Index V = config.vocab();
    DirBNState state;
    state.config = config;
    state.phi.resize(T);

    auto hyper = rng.substream(detail::kInitHyper);
    state.eta = sample_gamma(config.a0, 1.0 / config.b0, hyper);
    for (std::size_t t = 0; t + 1 < T; ++t) {
        const Eigen::Index K = config.width(t), K_up = config.width(t + 1);
        state.c.push_back(sample_gamma(config.g0, 1.0 / config.h0, hyper));
        if (config.sample_top_hypers) {
            state.c0.push_back(sample_gamma(config.g0, 1.0 / config.h0, hyper));
            state.gamma0.push_back(sample_gamma(config.e0, 1.0 / config.f0, hyper));
        } else {
            state.c0.push_back(config.c0_fixed);
            state.gamma0.push_back(config.gamma0_fixed);
        }
        Vector gamma(K_up);
        for (Eigen::Index k = 0; k < K_up; ++k)
            gamma[k] = sample_gamma(state.gamma0[t] / static_cast<double>(K), 1.0 / state.c0[t], hyper);
        state.gamma_shape.push_back(gamma);

        Matrix beta(K_up, K);
        auto draws = rng.substream(detail::kInitBeta, t);
        for (Eigen::Index k = 0; k < K; ++k)
            for (Eigen::Index j = 0; j < K_up; ++j) beta(j, k) = sample_gamma(gamma[j], 1.0 / state.c[t], draws);
        state.beta.push_back(std::move(beta));
    }

    for (std::size_t layer = T; layer-- > 0;) {
        Matrix alpha = layer + 1 == T ? Matrix::Constant(V, config.width(layer), state.eta)
                                      : compute_psi(state, layer);
        Matrix& phi = state.phi[layer];
        phi.resize(V, config.width(layer));
        for (Eigen::Index k = 0; k < phi.cols(); ++k) {
            auto draw = rng.substream(detail::kInitPhi, layer, k);
            sample_dirichlet(column(alpha, k), draw, column(phi, k));
        }
    }
    return state;
}

/// q ~ Beta(psi_colsum, x_colsum); exactly 1 when the topic holds no counts.
inline double sample_q(double psi_colsum, Count x_colsum, RngStream& rng) {
    return sample_beta(psi_colsum, static_cast<double>(x_colsum), rng);
}

/// y ~ CRT(x, psi).
inline Count sample_y(Count x, double psi, RngStream& rng) { return sample_crt(x, psi, rng); }

/**
 * Splits y latent counts over the parent topics with probabilities
 * proportional to phi_row[k'] * beta_col[k'].
 */
inline std::vector<Count> allocate_z(Count y, std::span<const double> phi_row, std::span<const double> beta_col,
                                     RngStream& rng) {
    if (phi_row.size() != beta_col.size()) throw DomainError("allocation weight size mismatch");
    std::vector<double> weights(phi_row.size());
    double total = 0.0;
    for (std::size_t j = 0; j < weights.size(); ++j) total += weights[j] = phi_row[j] * beta_col[j];
    std::vector<Count> out(weights.size(), 0);
    if (y == 0) return out;
    if (!(total > 0.0) || !std::isfinite(total))
        throw DegeneracyError("allocation weights have zero total mass");
    sample_multinomial(y, weights, rng, out);
    return out;
}

namespace detail {

struct Allocation {
    std::uint32_t word;
    std::uint32_t parent;
    Count count;
};

/// Allocation weights for one cell; falls back to log-domain scaling on underflow.
inline bool allocation_weights(const Matrix& phi_up_t, Eigen::Index v, const Matrix& beta, Eigen::Index k,
                               std::vector<double>& weights) {
    const Eigen::Index K_up = beta.rows();
    double total = 0.0;
    for (Eigen::Index j = 0; j < K_up; ++j) total += weights[j] = phi_up_t(j, v) * beta(j, k);
    if (total > 0.0 && std::isfinite(total)) return true;
    double top = -std::numeric_limits<double>::infinity();
    for (Eigen::Index j = 0; j < K_up; ++j) {
        weights[j] = std::log(phi_up_t(j, v)) + std::log(beta(j, k));
        top = std::max(top, weights[j]);
    }
    if (!std::isfinite(top)) return false;
    for (auto& w : weights) w = std::exp(w - top);
    return true;
}

} // namespace detail

/**
 * Propagates the base model's word-topic counts x1 (V x K_1) to the top
 * layer: per child topic draw q, per cell draw the CRT count y and split it
 * over the parent topics; parent inputs are the summed allocations.
 */
inline LatentCounts upward_pass(const DirBNState& state, const PsiCache& cache, const CountMatrix& x1,
                                const RngStream& rng) {
    const std::size_t T = state.depth();
    const Eigen::Index V = state.config.vocab();
    if (x1.rows() != V || x1.cols() != state.config.width(0)) throw DomainError("input count matrix has wrong shape");
    if (x1.size() > 0 && x1.minCoeff() < 0) throw DomainError("input counts must be nonnegative");

    LatentCounts counts;
    counts.x.push_back(x1);
    for (std::size_t t = 0; t + 1 < T; ++t) {
        const CountMatrix& x = counts.x[t];
        const Matrix& psi = cache.psi[t];
        const Matrix& beta = state.beta[t];
        const Matrix phi_up_t = state.phi[t + 1].transpose();
        const Eigen::Index K = x.cols(), K_up = beta.rows();
        const Vector x_colsum = detail::column_sums(x);

        Vector q(K), neg_log_q(K);
        CountMatrix y = CountMatrix::Zero(V, K);
        CountMatrix z_sum = CountMatrix::Zero(K_up, K);
        std::vector<std::vector<detail::Allocation>> allocations(static_cast<std::size_t>(K));
        std::vector<Count> degenerate(static_cast<std::size_t>(K), 0);

        parallel_for(static_cast<std::size_t>(K), [&](std::size_t kk) {
            const auto k = static_cast<Eigen::Index>(kk);
            auto draw = rng.substream(detail::kUpward, t, kk);
            neg_log_q[k] = -log_beta_variate(cache.colsum[t][k], x_colsum[k], draw);
            q[k] = std::max(std::exp(-neg_log_q[k]), kPositiveFloor);
            std::vector<double> weights(static_cast<std::size_t>(K_up));
            std::vector<Count> split(static_cast<std::size_t>(K_up));
            auto& out = allocations[kk];
            for (Eigen::Index v = 0; v < V; ++v) {
                if (x(v, k) == 0) continue;
                const Count tables = sample_y(x(v, k), psi(v, k), draw);
                y(v, k) = tables;
                if (detail::allocation_weights(phi_up_t, v, beta, k, weights)) {
                    sample_multinomial(tables, weights, draw, split);
                } else {
                    ++degenerate[kk];
                    std::fill(split.begin(), split.end(), tables / K_up);
                    for (Count r = 0; r < tables % K_up; ++r) ++split[static_cast<std::size_t>(r)];
                }
                for (Eigen::Index j = 0; j < K_up; ++j) {
                    const Count n = split[static_cast<std::size_t>(j)];
                    if (n == 0) continue;
                    z_sum(j, k) += n;
                    out.push_back({static_cast<std::uint32_t>(v), static_cast<std::uint32_t>(j), n});
                }
            }
        });

        CountMatrix x_up = CountMatrix::Zero(V, K_up);
        for (std::size_t kk = 0; kk < allocations.size(); ++kk) {
            for (const auto& a : allocations[kk]) x_up(a.word, a.parent) += a.count;
            counts.degenerate_allocations += degenerate[kk];
        }
        counts.q.push_back(std::move(q));
        counts.neg_log_q.push_back(std::move(neg_log_q));
        counts.y.push_back(std::move(y));
        counts.z_sum.push_back(std::move(z_sum));
        counts.x.push_back(std::move(x_up));
    }
    return counts;
}

/// beta[t](k', k) ~ Ga(gamma_k' + z_sum(k', k), 1 / (c - log q_k)).
inline void sample_beta_weights(DirBNState& state, const LatentCounts& counts, std::size_t t, const RngStream& rng) {
    detail::check_layer(state, t, true);
    Matrix& beta = state.beta[t];
    const Vector& gamma = state.gamma_shape[t];
    const double c = state.c[t];
    parallel_for(static_cast<std::size_t>(beta.cols()), [&](std::size_t kk) {
        const auto k = static_cast<Eigen::Index>(kk);
        auto draw = rng.substream(detail::kBeta, t, kk);
        const double scale = 1.0 / (c + counts.neg_log_q[t][k]);
        for (Eigen::Index j = 0; j < beta.rows(); ++j)
            beta(j, k) = sample_gamma(gamma[j] + static_cast<double>(counts.z_sum[t](j, k)), scale, draw);
    });
}

/**
 * Dirichlet posterior draw for every topic of layer t: concentration
 * psi[t] + x[t] below the top, eta + x[top] at the top.
 */
inline void sample_phi(DirBNState& state, const PsiCache& cache, const LatentCounts& counts, std::size_t t,
                       const RngStream& rng) {
    detail::check_layer(state, t, false);
    const bool top = t + 1 == state.depth();
    Matrix& phi = state.phi[t];
    const CountMatrix& x = counts.x[t];
    parallel_for(static_cast<std::size_t>(phi.cols()), [&](std::size_t kk) {
        const auto k = static_cast<Eigen::Index>(kk);
        auto draw = rng.substream(detail::kPhi, t, kk);
        Vector alpha = x.col(k).cast<double>();
        if (top)
            alpha.array() += state.eta;
        else
            alpha += cache.psi[t].col(k);
        sample_dirichlet(std::span<const double>(alpha.data(), static_cast<std::size_t>(alpha.size())), draw,
                         column(phi, k));
    });
}

/**
 * eta | x[top] with the top-layer topics integrated out:
 * q_k ~ Beta(V eta, x_.k), y_vk ~ CRT(x_vk, eta),
 * eta ~ Ga(a0 + sum y, 1 / (b0 - V sum_k log q_k)).
 */
inline void update_eta(DirBNState& state, const LatentCounts& counts, const RngStream& rng) {
    const std::size_t top = state.depth() - 1;
    const CountMatrix& x = counts.x.at(top);
    const auto V = static_cast<double>(state.config.vocab_size);
    const Eigen::Index K = x.cols();
    std::vector<double> neg_log_q(static_cast<std::size_t>(K));
    std::vector<Count> tables(static_cast<std::size_t>(K));
    parallel_for(static_cast<std::size_t>(K), [&](std::size_t kk) {
        const auto k = static_cast<Eigen::Index>(kk);
        auto draw = rng.substream(detail::kEta, kk);
        const Count total = x.col(k).sum();
        neg_log_q[kk] = -log_beta_variate(V * state.eta, static_cast<double>(total), draw);
        Count y = 0;
        for (Eigen::Index v = 0; v < x.rows(); ++v)
            if (x(v, k) > 0) y += sample_crt(x(v, k), state.eta, draw);
        tables[kk] = y;
    });
    double rate = state.config.b0;
    double shape = state.config.a0;
    for (std::size_t k = 0; k < neg_log_q.size(); ++k) {
        rate += V * neg_log_q[k];
        shape += static_cast<double>(tables[k]);
    }
    auto draw = rng.substream(detail::kEta, static_cast<std::uint64_t>(-1));
    state.eta = sample_gamma(shape, 1.0 / rate, draw);
}

/**
 * Resamples c, (c0, gamma0 when enabled) and gamma for the links between
 * layer t and t+1, given z_sum[t], q[t] and the current beta[t].
 *
 * c | beta, gamma is conjugate. gamma is drawn with beta integrated out via
 * l ~ CRT(z_sum, gamma), and gamma0 additionally with gamma integrated out
 * via m ~ CRT(l_k', gamma0 / K_t). beta[t] must be redrawn afterwards.
 */
inline void update_layer_hypers(DirBNState& state, const LatentCounts& counts, std::size_t t, const RngStream& rng) {
    detail::check_layer(state, t, true);
    const DirBNConfig& cfg = state.config;
    const Matrix& beta = state.beta[t];
    Vector& gamma = state.gamma_shape[t];
    const Eigen::Index K = beta.cols(), K_up = beta.rows();
    const auto Kd = static_cast<double>(K), K_up_d = static_cast<double>(K_up);
    auto draw = rng.substream(detail::kLayerHyper, t);

    state.c[t] = sample_gamma(cfg.g0 + Kd * gamma.sum(), 1.0 / (cfg.h0 + beta.sum()), draw);
    const double c = state.c[t];

    std::vector<Count> l(static_cast<std::size_t>(K_up));
    parallel_for(static_cast<std::size_t>(K_up), [&](std::size_t jj) {
        const auto j = static_cast<Eigen::Index>(jj);
        auto crt = rng.substream(detail::kGammaCrt, t, jj);
        Count sum = 0;
        for (Eigen::Index k = 0; k < K; ++k) sum += sample_crt(counts.z_sum[t](j, k), gamma[j], crt);
        l[jj] = sum;
    });

    double p = 0.0;
    for (Eigen::Index k = 0; k < K; ++k) p += std::log1p(counts.neg_log_q[t][k] / c);

    if (cfg.sample_top_hypers) {
        state.c0[t] = sample_gamma(cfg.g0 + K_up_d * state.gamma0[t] / Kd, 1.0 / (cfg.h0 + gamma.sum()), draw);
        const double r = state.gamma0[t] / Kd;
        Count m = 0;
        for (Count lj : l) m += sample_crt(lj, r, draw);
        const double rate = cfg.f0 + (K_up_d / Kd) * std::log1p(p / state.c0[t]);
        state.gamma0[t] = sample_gamma(cfg.e0 + static_cast<double>(m), 1.0 / rate, draw);
    }

    const double shape0 = state.gamma0[t] / Kd;
    const double scale = 1.0 / (state.c0[t] + p);
    parallel_for(static_cast<std::size_t>(K_up), [&](std::size_t jj) {
        auto g = rng.substream(detail::kGammaDraw, t, jj);
        gamma[static_cast<Eigen::Index>(jj)] = sample_gamma(shape0 + static_cast<double>(l[jj]), scale, g);
    });
}

/**
 * Top-down conjugate updates: eta and the top topics, then for each lower
 * layer the link hyperparameters, link weights, psi and topics.
 */
inline PsiCache downward_pass(DirBNState& state, const LatentCounts& counts, const RngStream& rng) {
    const std::size_t T = state.depth();
    PsiCache cache;
    cache.psi.resize(T - 1);
    cache.colsum.resize(T - 1);
    update_eta(state, counts, rng);
    sample_phi(state, cache, counts, T - 1, rng);
    for (std::size_t t = T - 1; t-- > 0;) {
        update_layer_hypers(state, counts, t, rng);
        sample_beta_weights(state, counts, t, rng);
        cache.psi[t] = compute_psi(state, t);
        cache.colsum[t] = cache.psi[t].colwise().sum().transpose();
        sample_phi(state, cache, counts, t, rng);
    }
    return cache;
}

/// Synthetic corpus plus the parameters that generated it.
struct SyntheticCorpus {
    Corpus corpus;
    Matrix theta;            ///< D x K_1
    Matrix phi1;             ///< V x K_1
    CountMatrix word_topic;  ///< V x K_1 true topic counts
};

inline std::vector<std::string> synthetic_vocab(std::size_t V) {
    std::vector<std::string> vocab;
    vocab.reserve(V);
    for (std::size_t v = 0; v < V; ++v) vocab.push_back("w" + std::to_string(v + 1));
    return vocab;
}

/**
 * Generates documents from the bottom-layer topics: theta_d ~ Dir(conc),
 * then per token a topic from theta_d and a word from that topic.
 */
inline SyntheticCorpus generate_corpus(const DirBNState& state, std::size_t num_docs, std::size_t doc_length,
                                       double theta_concentration, const RngStream& rng,
                                       std::vector<std::string> vocab = {}) {
    detail::require_positive(theta_concentration, "theta concentration");
    const Matrix& phi = state.phi.at(0);
    const Eigen::Index V = phi.rows(), K = phi.cols();
    if (vocab.empty()) vocab = synthetic_vocab(static_cast<std::size_t>(V));
    if (static_cast<Eigen::Index>(vocab.size()) != V) throw DomainError("vocabulary size mismatch");

    SyntheticCorpus out;
    out.theta.resize(static_cast<Eigen::Index>(num_docs), K);
    out.phi1 = phi;
    std::vector<Document> docs(num_docs);
    std::vector<std::vector<std::pair<std::uint32_t, std::uint32_t>>> doc_pairs(num_docs);
    const std::vector<double> prior(static_cast<std::size_t>(K), theta_concentration);

    parallel_for(num_docs, [&](std::size_t d) {
        auto draw = rng.substream(detail::kGenerate, d);
        std::vector<double> theta(static_cast<std::size_t>(K), 1.0);
        if (K > 1) sample_dirichlet(prior, draw, theta);
        for (Eigen::Index k = 0; k < K; ++k) out.theta(static_cast<Eigen::Index>(d), k) = theta[static_cast<std::size_t>(k)];
        std::vector<std::uint32_t> tokens;
        tokens.reserve(doc_length);
        std::vector<std::pair<std::uint32_t, std::uint32_t>> pairs;
        for (std::size_t n = 0; n < doc_length; ++n) {
            const auto k = static_cast<Eigen::Index>(sample_categorical(theta, 1.0, draw));
            const auto v = static_cast<std::uint32_t>(sample_categorical(column(phi, k), phi.col(k).sum(), draw));
            tokens.push_back(v);
            pairs.emplace_back(v, static_cast<std::uint32_t>(k));
        }
        docs[d] = detail::collapse_tokens(std::move(tokens));
        doc_pairs[d] = std::move(pairs);
    });
    out.word_topic = CountMatrix::Zero(V, K);
    for (const auto& pairs : doc_pairs)
        for (auto [v, k] : pairs) ++out.word_topic(v, k);
    out.corpus = Corpus(std::move(vocab), std::move(docs));
    return out;
}

} // namespace dirbn
