#pragma once

#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include <json.hpp>

#include "dirbn/errors.hpp"
#include "dirbn/model.hpp"

// State snapshot layout ("dirbn-state-v1", JSON):
//   version, sweep, master_seed,
//   config     {layer_widths, vocab_size, a0, b0, e0, f0, g0, h0,
//               sample_top_hypers, gamma0_fixed, c0_fixed}
//   eta
//   phi        [ {rows, cols, data (row-major)} ]            one per layer
//   links      [ {beta {rows, cols, data}, gamma_shape, c, gamma0, c0} ]
//   topic_mass [ [..] ]                                      optional, per layer
// Doubles are written in shortest round-trip form, so load(save(s)) == s bit for bit.
//
// Posterior samples ("dirbn-samples-v1") are CBOR with the same matrix records
// under "phi1".

namespace dirbn {

inline constexpr const char* kStateVersion = "dirbn-state-v1";
inline constexpr const char* kSamplesVersion = "dirbn-samples-v1";

struct Snapshot {
    DirBNState state;
    std::uint64_t sweep = 0;
    std::uint64_t master_seed = 0;
    std::vector<Vector> topic_mass;

    friend bool operator==(const Snapshot&, const Snapshot&) = default;
};

namespace detail {

using nlohmann::json;

inline json matrix_to_json(const Matrix& m) {
    std::vector<double> data;
    data.reserve(static_cast<std::size_t>(m.size()));
    for (Eigen::Index r = 0; r < m.rows(); ++r)
        for (Eigen::Index c = 0; c < m.cols(); ++c) data.push_back(m(r, c));
    return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::move(data)}};
}

inline Matrix matrix_from_json(const json& j) {
    const auto rows = j.at("rows").get<Eigen::Index>();
    const auto cols = j.at("cols").get<Eigen::Index>();
    const auto& data = j.at("data");
    if (rows < 0 || cols < 0 || static_cast<Eigen::Index>(data.size()) != rows * cols)
        throw ParseError("matrix record has inconsistent dimensions");
    Matrix m(rows, cols);
    std::size_t i = 0;
    for (Eigen::Index r = 0; r < rows; ++r)
        for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = data[i++].get<double>();
    return m;
}

inline json vector_to_json(const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

inline Vector vector_from_json(const json& j) {
    const auto values = j.get<std::vector<double>>();
    return Eigen::Map<const Vector>(values.data(), static_cast<Eigen::Index>(values.size()));
}

inline std::string read_file(const std::filesystem::path& path, bool binary) {
    std::ifstream in(path, binary ? std::ios::binary : std::ios::in);
    if (!in) throw IoError("cannot open " + path.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void write_file(const std::filesystem::path& path, const std::string& bytes, bool binary) {
    std::ofstream out(path, binary ? std::ios::binary : std::ios::out);
    if (!out) throw IoError("cannot write " + path.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("failed writing " + path.string());
}

} // namespace detail

inline nlohmann::json config_to_json(const DirBNConfig& c) {
    return {{"layer_widths", c.layer_widths},
            {"vocab_size", c.vocab_size},
            {"a0", c.a0},
            {"b0", c.b0},
            {"e0", c.e0},
            {"f0", c.f0},
            {"g0", c.g0},
            {"h0", c.h0},
            {"sample_top_hypers", c.sample_top_hypers},
            {"gamma0_fixed", c.gamma0_fixed},
            {"c0_fixed", c.c0_fixed}};
}

inline DirBNConfig config_from_json(const nlohmann::json& j) {
    DirBNConfig c;
    c.layer_widths = j.at("layer_widths").get<std::vector<std::size_t>>();
    c.vocab_size = j.at("vocab_size").get<std::size_t>();
    c.a0 = j.at("a0").get<double>();
    c.b0 = j.at("b0").get<double>();
    c.e0 = j.at("e0").get<double>();
    c.f0 = j.at("f0").get<double>();
    c.g0 = j.at("g0").get<double>();
    c.h0 = j.at("h0").get<double>();
    c.sample_top_hypers = j.at("sample_top_hypers").get<bool>();
    c.gamma0_fixed = j.at("gamma0_fixed").get<double>();
    c.c0_fixed = j.at("c0_fixed").get<double>();
    return c;
}

inline nlohmann::json snapshot_to_json(const Snapshot& snap) {
    const DirBNState& s = snap.state;
    nlohmann::json j;
    j["version"] = kStateVersion;
    j["sweep"] = snap.sweep;
    j["master_seed"] = snap.master_seed;
    j["config"] = config_to_json(s.config);
    j["eta"] = s.eta;
    j["phi"] = nlohmann::json::array();
    for (const auto& phi : s.phi) j["phi"].push_back(detail::matrix_to_json(phi));
    j["links"] = nlohmann::json::array();
    for (std::size_t t = 0; t < s.beta.size(); ++t)
        j["links"].push_back({{"beta", detail::matrix_to_json(s.beta[t])},
                              {"gamma_shape", detail::vector_to_json(s.gamma_shape[t])},
                              {"c", s.c[t]},
                              {"gamma0", s.gamma0[t]},
                              {"c0", s.c0[t]}});
    j["topic_mass"] = nlohmann::json::array();
    for (const auto& m : snap.topic_mass) j["topic_mass"].push_back(detail::vector_to_json(m));
    return j;
}

inline Snapshot snapshot_from_json(const nlohmann::json& j) {
    try {
        if (j.at("version").get<std::string>() != kStateVersion)
            throw ParseError("unsupported snapshot version " + j.at("version").dump());
        Snapshot snap;
        snap.sweep = j.at("sweep").get<std::uint64_t>();
        snap.master_seed = j.at("master_seed").get<std::uint64_t>();
        DirBNState& s = snap.state;
        s.config = config_from_json(j.at("config"));
        s.eta = j.at("eta").get<double>();
        for (const auto& phi : j.at("phi")) s.phi.push_back(detail::matrix_from_json(phi));
        for (const auto& link : j.at("links")) {
            s.beta.push_back(detail::matrix_from_json(link.at("beta")));
            s.gamma_shape.push_back(detail::vector_from_json(link.at("gamma_shape")));
            s.c.push_back(link.at("c").get<double>());
            s.gamma0.push_back(link.at("gamma0").get<double>());
            s.c0.push_back(link.at("c0").get<double>());
        }
        if (j.contains("topic_mass"))
            for (const auto& m : j.at("topic_mass")) snap.topic_mass.push_back(detail::vector_from_json(m));
        s.check_invariants();
        return snap;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("malformed snapshot: ") + e.what());
    }
}

inline void save_snapshot(const Snapshot& snap, const std::filesystem::path& path) {
    detail::write_file(path, snapshot_to_json(snap).dump(1) + "\n", false);
}

inline Snapshot load_snapshot(const std::filesystem::path& path) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(detail::read_file(path, false));
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
    return snapshot_from_json(j);
}

inline void save_samples(const std::vector<Matrix>& phi1_samples, const std::filesystem::path& path) {
    nlohmann::json j;
    j["version"] = kSamplesVersion;
    j["phi1"] = nlohmann::json::array();
    for (const auto& m : phi1_samples) j["phi1"].push_back(detail::matrix_to_json(m));
    const auto bytes = nlohmann::json::to_cbor(j);
    detail::write_file(path, std::string(bytes.begin(), bytes.end()), true);
}

inline std::vector<Matrix> load_samples(const std::filesystem::path& path) {
    const std::string bytes = detail::read_file(path, true);
    try {
        const auto j = nlohmann::json::from_cbor(bytes);
        if (j.at("version").get<std::string>() != kSamplesVersion)
            throw ParseError("unsupported samples version " + j.at("version").dump());
        std::vector<Matrix> samples;
        for (const auto& m : j.at("phi1")) samples.push_back(detail::matrix_from_json(m));
        return samples;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(path.string() + ": malformed samples file: " + e.what());
    }
}

} // namespace dirbn
