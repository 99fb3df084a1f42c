#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <random>

namespace dirbn {

namespace detail {

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

constexpr std::uint64_t mix(std::uint64_t h, std::uint64_t v) noexcept {
    return splitmix64(h ^ splitmix64(v + 0x632BE59BD9B4E019ULL));
}

} // namespace detail

/**
 * Seeded pseudo-random stream.
 *
 * A stream is identified by (seed, stream_id); the same pair always replays
 * the same sequence. Sub-streams are addressed by a path of integers, e.g.
 * `rng.substream(phase, layer, topic)`, and never advance the parent, so a
 * loop body that owns a sub-stream draws the same numbers regardless of which
 * worker runs it or in which order.
 */
class RngStream {
  public:
    using result_type = std::uint64_t;

    RngStream() : RngStream(0, 0) {}
    RngStream(std::uint64_t seed, std::uint64_t stream_id)
        : seed_(seed), stream_id_(stream_id), engine_(detail::mix(detail::splitmix64(seed), stream_id)) {}

    std::uint64_t seed() const noexcept { return seed_; }
    std::uint64_t stream_id() const noexcept { return stream_id_; }

    template <typename... Ix> RngStream substream(Ix... path) const {
        std::uint64_t id = stream_id_;
        ((id = detail::mix(id, static_cast<std::uint64_t>(path))), ...);
        return RngStream(seed_, id);
    }

    static constexpr result_type min() { return std::mt19937_64::min(); }
    static constexpr result_type max() { return std::mt19937_64::max(); }
    result_type operator()() { return engine_(); }

    /// Uniform double on the open interval (0, 1).
    double uniform() {
        return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
    }

    /// Uniform integer in [0, n). Requires n > 0.
    std::uint64_t index(std::uint64_t n) {
        // Lemire's nearly-divisionless bounded draw
        __uint128_t m = static_cast<__uint128_t>(engine_()) * n;
        auto low = static_cast<std::uint64_t>(m);
        if (low < n) {
            const std::uint64_t threshold = (0 - n) % n;
            while (low < threshold) {
                m = static_cast<__uint128_t>(engine_()) * n;
                low = static_cast<std::uint64_t>(m);
            }
        }
        return static_cast<std::uint64_t>(m >> 64);
    }

    /// Standard normal draw (Marsaglia polar method, no cached pair).
    double normal() {
        double u, v, s;
        do {
            u = 2.0 * uniform() - 1.0;
            v = 2.0 * uniform() - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        return u * std::sqrt(-2.0 * std::log(s) / s);
    }

  private:
    std::uint64_t seed_;
    std::uint64_t stream_id_;
    std::mt19937_64 engine_;
};

} // namespace dirbn
