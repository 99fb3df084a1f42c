#include <gtest/gtest.h>

#include <numeric>

#include "dirbn/distributions.hpp"
#include "support.hpp"

using namespace dirbn;
using dirbn::testing::moments;
using dirbn::testing::three_se;

TEST(Gamma, ExponentialMean) {
    RngStream rng(1, 0);
    std::vector<double> xs(1'000'000);
    for (auto& x : xs) x = sample_gamma(1.0, 1.0, rng);
    EXPECT_NEAR(moments(xs).mean, 1.0, 3e-3);
}

TEST(Gamma, TinyShapeStaysPositive) {
    RngStream rng(2, 0);
    for (int i = 0; i < 100'000; ++i) ASSERT_GT(sample_gamma(0.01, 1.0, rng), 0.0);
    for (int i = 0; i < 10'000; ++i) ASSERT_GE(sample_gamma(1e-200, 1.0, rng), kPositiveFloor);
}

TEST(Gamma, VarianceMatchesShapeTimesScaleSquared) {
    const double k = 2.5, theta = 0.4, n = 1e6;
    RngStream rng(3, 0);
    std::vector<double> xs(static_cast<std::size_t>(n));
    for (auto& x : xs) x = sample_gamma(k, theta, rng);
    const double sigma2 = k * theta * theta;
    // Var(s^2) ~ sigma^4 (2 + excess kurtosis) / n, excess kurtosis 6/k
    const double sd_s2 = sigma2 * std::sqrt((2.0 + 6.0 / k) / n);
    EXPECT_NEAR(moments(xs).variance, 0.4, 3.0 * sd_s2);
}

TEST(Gamma, RejectsNonPositiveParameters) {
    RngStream rng(4, 0);
    EXPECT_THROW(sample_gamma(0.0, 1.0, rng), DomainError);
    EXPECT_THROW(sample_gamma(1.0, -1.0, rng), DomainError);
    EXPECT_THROW(sample_gamma(std::nan(""), 1.0, rng), DomainError);
}

TEST(Dirichlet, ConcentrationLimit) {
    RngStream rng(5, 0);
    const std::vector<double> alpha{1e6, 1e6};
    // sd of each entry is 3.5e-4, so a single draw sits within 1e-3 w.p. 0.995
    auto p = sample_dirichlet(alpha, rng);
    EXPECT_NEAR(p[0], 0.5, 1e-3);
    EXPECT_NEAR(p[1], 0.5, 1e-3);
}

namespace {

double dirichlet_var(const std::vector<double>& a, std::size_t i) {
    const double a0 = std::accumulate(a.begin(), a.end(), 0.0);
    return a[i] * (a0 - a[i]) / (a0 * a0 * (a0 + 1.0));
}

} // namespace

TEST(Dirichlet, SymmetricMeans) {
    const std::vector<double> alpha{0.7, 0.7, 0.7};
    const std::size_t n = 100'000;
    RngStream rng(6, 0);
    std::vector<std::vector<double>> coords(3, std::vector<double>(n));
    for (std::size_t i = 0; i < n; ++i) {
        auto p = sample_dirichlet(alpha, rng);
        for (std::size_t v = 0; v < 3; ++v) coords[v][i] = p[v];
    }
    for (std::size_t v = 0; v < 3; ++v)
        EXPECT_NEAR(moments(coords[v]).mean, 1.0 / 3.0, three_se(dirichlet_var(alpha, v), n));
}

TEST(Dirichlet, AsymmetricMean) {
    const std::vector<double> alpha{2.0, 1.0, 1.0};
    const std::size_t n = 100'000;
    RngStream rng(7, 0);
    std::vector<double> first(n);
    for (auto& x : first) x = sample_dirichlet(alpha, rng)[0];
    EXPECT_NEAR(moments(first).mean, 0.5, three_se(dirichlet_var(alpha, 0), n));
}

TEST(Dirichlet, SimplexProperty) {
    RngStream rng(8, 0);
    for (int trial = 0; trial < 2000; ++trial) {
        std::vector<double> alpha(2 + rng.index(30));
        for (auto& a : alpha) a = std::exp(-40.0 + 45.0 * rng.uniform());  // 4e-18 .. 148
        auto p = sample_dirichlet(alpha, rng);
        double sum = 0.0;
        for (double x : p) {
            ASSERT_GT(x, 0.0);
            sum += x;
        }
        ASSERT_NEAR(sum, 1.0, 1e-12);
    }
}

TEST(Dirichlet, TinyConcentrationConcentratesOnOneCoordinate) {
    RngStream rng(9, 0);
    const std::vector<double> alpha(10, 1e-8);
    for (int i = 0; i < 100; ++i) {
        auto p = sample_dirichlet(alpha, rng);
        EXPECT_GT(*std::max_element(p.begin(), p.end()), 0.999);
    }
}

TEST(Dirichlet, RejectsBadInput) {
    RngStream rng(10, 0);
    EXPECT_THROW(sample_dirichlet(std::vector<double>{1.0, 0.0}, rng), DomainError);
    EXPECT_THROW(sample_dirichlet(std::vector<double>{1.0}, rng), DomainError);
}

TEST(Beta, DegenerateZeroB) {
    RngStream rng(11, 0);
    EXPECT_EQ(sample_beta(3.0, 0.0, rng), 1.0);
    EXPECT_EQ(log_beta_variate(3.0, 0.0, rng), 0.0);
}

TEST(Beta, Means) {
    const std::size_t n = 200'000;
    RngStream rng(12, 0);
    for (auto [a, b, mean] : {std::tuple{1.0, 1.0, 0.5}, std::tuple{2.0, 6.0, 0.25}}) {
        std::vector<double> xs(n);
        for (auto& x : xs) x = sample_beta(a, b, rng);
        const double var = a * b / ((a + b) * (a + b) * (a + b + 1.0));
        EXPECT_NEAR(moments(xs).mean, mean, three_se(var, n)) << a << "," << b;
        EXPECT_GT(*std::min_element(xs.begin(), xs.end()), 0.0);
        EXPECT_LE(*std::max_element(xs.begin(), xs.end()), 1.0);
    }
}

TEST(Beta, RejectsBadParameters) {
    RngStream rng(13, 0);
    EXPECT_THROW(sample_beta(0.0, 1.0, rng), DomainError);
    EXPECT_THROW(sample_beta(1.0, -1.0, rng), DomainError);
}

TEST(Crt, EdgeCounts) {
    RngStream rng(14, 0);
    for (double r : {1e-300, 0.1, 1.0, 1e6}) {
        EXPECT_EQ(sample_crt(0, r, rng), 0);
        EXPECT_EQ(sample_crt(1, r, rng), 1);
    }
    EXPECT_THROW(sample_crt(3, 0.0, rng), DomainError);
}

TEST(Crt, ExpectationByDirectSum) {
    EXPECT_EQ(crt_expectation(0, 2.0), 0.0);
    EXPECT_EQ(crt_expectation(1, 2.0), 1.0);
    EXPECT_NEAR(crt_expectation(3, 1.0), 1.0 + 0.5 + 1.0 / 3.0, 1e-15);
    EXPECT_THROW(crt_expectation(3, -1.0), DomainError);
}

TEST(Crt, MeanMatchesOracleN50) {
    const std::size_t draws = 100'000;
    RngStream rng(15, 0);
    std::vector<Count> ys(draws);
    for (auto& y : ys) y = sample_crt(50, 2.0, rng);
    // Var = sum p(1-p) over the independent Bernoulli terms
    double var = 0.0;
    for (int i = 0; i < 50; ++i) var += (2.0 / (2.0 + i)) * (1.0 - 2.0 / (2.0 + i));
    EXPECT_NEAR(moments(ys).mean, crt_expectation(50, 2.0), three_se(var, draws));
}

TEST(Crt, SupportProperty) {
    RngStream rng(16, 0);
    for (int trial = 0; trial < 20'000; ++trial) {
        const auto n = static_cast<Count>(rng.index(200));
        const double r = std::exp(-10.0 + 20.0 * rng.uniform());
        const Count y = sample_crt(n, r, rng);
        if (n == 0)
            ASSERT_EQ(y, 0);
        else {
            ASSERT_GE(y, 1);
            ASSERT_LE(y, n);
        }
    }
}

TEST(Multinomial, Degenerate) {
    RngStream rng(17, 0);
    EXPECT_EQ(sample_multinomial(0, std::vector<double>{0.2, 0.8}, rng), (std::vector<Count>{0, 0}));
    EXPECT_EQ(sample_multinomial(7, std::vector<double>{1, 0, 0}, rng), (std::vector<Count>{7, 0, 0}));
    EXPECT_EQ(sample_multinomial(7, std::vector<double>{0, 0, 3}, rng), (std::vector<Count>{0, 0, 7}));
    EXPECT_THROW(sample_multinomial(3, std::vector<double>{0.5, -0.1}, rng), DomainError);
    EXPECT_THROW(sample_multinomial(3, std::vector<double>{0.0, 0.0}, rng), DegeneracyError);
}

TEST(Multinomial, BinomialMarginals) {
    const Count n = 100'000;
    const std::vector<double> p{0.2, 0.3, 0.5};
    RngStream rng(18, 0);
    std::vector<std::vector<double>> slots(3);
    for (int rep = 0; rep < 100; ++rep) {
        auto c = sample_multinomial(n, p, rng);
        for (std::size_t k = 0; k < 3; ++k) slots[k].push_back(static_cast<double>(c[k]));
    }
    for (std::size_t k = 0; k < 3; ++k)
        EXPECT_NEAR(moments(slots[k]).mean, p[k] * n, three_se(n * p[k] * (1 - p[k]), 100));
}

TEST(Multinomial, SumsExactly) {
    RngStream rng(19, 0);
    for (int trial = 0; trial < 5000; ++trial) {
        std::vector<double> w(1 + rng.index(20));
        for (auto& x : w) x = rng.uniform() < 0.3 ? 0.0 : rng.uniform() * 1e3;
        w[rng.index(w.size())] = 1.0;
        const auto n = static_cast<Count>(rng.index(10'000));
        auto c = sample_multinomial(n, w, rng);
        ASSERT_EQ(std::accumulate(c.begin(), c.end(), Count{0}), n);
        for (std::size_t k = 0; k < w.size(); ++k)
            if (w[k] == 0.0) ASSERT_EQ(c[k], 0);
    }
}

TEST(RngStream, DeterministicAndDistinct) {
    RngStream a(42, 7), b(42, 7), c(42, 8);
    std::vector<std::uint64_t> xa, xb, xc;
    for (int i = 0; i < 100; ++i) {
        xa.push_back(a());
        xb.push_back(b());
        xc.push_back(c());
    }
    EXPECT_EQ(xa, xb);
    EXPECT_NE(xa, xc);

    auto s1 = a.substream(1, 2, 3), s2 = b.substream(1, 2, 3), s3 = a.substream(1, 3, 2);
    EXPECT_EQ(s1(), s2());
    EXPECT_NE(s1.stream_id(), s3.stream_id());
}

TEST(RngStream, SubstreamsLookIndependent) {
    // Correlation of uniforms drawn from neighbouring sub-streams.
    const RngStream base(99, 0);
    const int n = 20'000;
    double sxy = 0, sx = 0, sy = 0, sxx = 0, syy = 0;
    for (int i = 0; i < n; ++i) {
        auto s = base.substream(i), t = base.substream(i + 1);
        const double x = s.uniform(), y = t.uniform();
        sxy += x * y, sx += x, sy += y, sxx += x * x, syy += y * y;
    }
    const double cov = sxy / n - (sx / n) * (sy / n);
    const double corr = cov / std::sqrt((sxx / n - sx * sx / n / n) * (syy / n - sy * sy / n / n));
    EXPECT_LT(std::abs(corr), 4.0 / std::sqrt(n));
}
