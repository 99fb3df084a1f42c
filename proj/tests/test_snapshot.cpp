#include <gtest/gtest.h>

#include <filesystem>

#include "dirbn/snapshot.hpp"

using namespace dirbn;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const auto dir = fs::temp_directory_path() / "dirbn_snapshot_tests";
    fs::create_directories(dir);
    return dir / name;
}

Snapshot make_snapshot(std::uint64_t seed) {
    DirBNConfig cfg;
    cfg.layer_widths = {6, 4, 3};
    cfg.vocab_size = 25;
    cfg.sample_top_hypers = seed % 2 == 0;
    Snapshot snap;
    snap.state = init_state(cfg, RngStream(seed, 0));
    snap.sweep = 1234;
    snap.master_seed = seed;
    snap.topic_mass = {Vector::Constant(6, 1.0 / 6), Vector::Constant(4, 0.25), Vector::Constant(3, 1.0 / 3)};
    return snap;
}

} // namespace

TEST(Snapshot, RoundTripIsBitExact) {
    for (std::uint64_t seed = 0; seed < 6; ++seed) {
        const Snapshot snap = make_snapshot(seed);
        const auto path = scratch("state_" + std::to_string(seed) + ".json");
        save_snapshot(snap, path);
        const Snapshot back = load_snapshot(path);
        EXPECT_EQ(back, snap);
        // saving the reloaded snapshot reproduces the same bytes
        const auto again = scratch("again_" + std::to_string(seed) + ".json");
        save_snapshot(back, again);
        EXPECT_EQ(detail::read_file(path, false), detail::read_file(again, false));
    }
}

TEST(Snapshot, RejectsWrongVersionAndMalformedInput) {
    auto j = snapshot_to_json(make_snapshot(1));
    j["version"] = "dirbn-state-v0";
    EXPECT_THROW(snapshot_from_json(j), ParseError);

    auto missing = snapshot_to_json(make_snapshot(1));
    missing.erase("eta");
    EXPECT_THROW(snapshot_from_json(missing), ParseError);

    auto broken = snapshot_to_json(make_snapshot(1));
    broken["phi"][0]["data"][0] = -0.5;
    EXPECT_THROW(snapshot_from_json(broken), DomainError);

    const auto path = scratch("garbage.json");
    detail::write_file(path, "{not json", false);
    EXPECT_THROW(load_snapshot(path), ParseError);
    EXPECT_THROW(load_snapshot(scratch("does_not_exist.json")), IoError);
}

TEST(Samples, RoundTripIsBitExact) {
    RngStream rng(3, 0);
    std::vector<Matrix> samples;
    for (int s = 0; s < 4; ++s) {
        Matrix m(9, 5);
        for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.uniform() * std::pow(10.0, -300.0 * rng.uniform());
        samples.push_back(m);
    }
    const auto path = scratch("samples.cbor");
    save_samples(samples, path);
    EXPECT_EQ(load_samples(path), samples);

    save_samples({}, path);
    EXPECT_TRUE(load_samples(path).empty());

    detail::write_file(path, "\x01\x02", true);
    EXPECT_THROW(load_samples(path), ParseError);
}

TEST(ConfigJson, RoundTrip) {
    DirBNConfig cfg;
    cfg.layer_widths = {100, 50};
    cfg.vocab_size = 999;
    cfg.e0 = 0.3;
    cfg.sample_top_hypers = false;
    cfg.gamma0_fixed = 2.0;
    EXPECT_EQ(config_from_json(config_to_json(cfg)), cfg);
}
