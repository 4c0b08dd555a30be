#include "cran/channel.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "cran/errors.hpp"
#include "cran/rng.hpp"

namespace cran {

void TopologyConfig::validate() const {
    if (n_cells < 1) throw ConfigError("topology: n_cells must be >= 1");
    if (cell_radius <= 0.0) throw ConfigError("topology: cell_radius must be positive");
    if (n_hbs_per_cell < 0 || n_ms_per_cell < 0) throw ConfigError("topology: negative node count");
    if (pathloss_exponent <= 2.0) throw ConfigError("topology: pathloss exponent must exceed 2");
    if (d0() <= 0.0) throw ConfigError("topology: reference distance must be positive");
    if (hot_spot) {
        if (hot_spot->radius_ratio <= 0.0 || hot_spot->radius_ratio > 1.0)
            throw ConfigError("topology: hot-spot radius ratio must be in (0, 1]");
        if (hot_spot->n_hbs_group2 < 0 || hot_spot->n_ms_group2 < 0)
            throw ConfigError("topology: negative hot-spot node count");
    }
}

namespace {

// Cell centers on a circle of radius R around the origin: adjacent centers
// then sit center_spacing_factor * R apart for the default factor sqrt(3).
std::vector<std::pair<double, double>> cell_centers(const TopologyConfig& cfg) {
    std::vector<std::pair<double, double>> centers;
    if (cfg.n_cells == 1) {
        centers.emplace_back(0.0, 0.0);
        return centers;
    }
    const double ring = cfg.center_spacing_factor * cfg.cell_radius / std::numbers::sqrt3;
    for (int c = 0; c < cfg.n_cells; ++c) {
        const double a = 2.0 * std::numbers::pi * c / cfg.n_cells + std::numbers::pi / 2.0;
        centers.emplace_back(ring * std::cos(a), ring * std::sin(a));
    }
    return centers;
}

}  // namespace

Topology generate_topology(const TopologyConfig& cfg, std::uint64_t seed) {
    cfg.validate();
    Rng rng(mix_seed(seed, {0x746f706fULL}));
    Topology topo;
    const auto centers = cell_centers(cfg);

    for (int c = 0; c < cfg.n_cells; ++c) {
        const auto [cx, cy] = centers[c];
        topo.bs.push_back({cx, cy, BsRole::MBS, c, 1});
        for (int i = 0; i < cfg.n_hbs_per_cell; ++i) {
            const auto [x, y] = rng.in_disc(cx, cy, cfg.cell_radius);
            topo.bs.push_back({x, y, BsRole::HBS, c, 1});
        }
        for (int i = 0; i < cfg.n_ms_per_cell; ++i) {
            const auto [x, y] = rng.in_disc(cx, cy, cfg.cell_radius);
            topo.ms.push_back({x, y, c, 1});
        }
    }

    if (cfg.hot_spot) {
        // Hot-spot center lands uniformly in the shrunk disc so the overlay
        // cell stays inside the first cell.
        const auto& hs = *cfg.hot_spot;
        const auto [cx, cy] = centers[0];
        const double r_spot = hs.radius_ratio * cfg.cell_radius;
        const auto [hx, hy] = rng.in_disc(cx, cy, cfg.cell_radius - r_spot);
        topo.hot_spot_center = {hx, hy};
        for (int i = 0; i < hs.n_hbs_group2; ++i) {
            const auto [x, y] = rng.in_disc(hx, hy, r_spot);
            topo.bs.push_back({x, y, BsRole::HBS, 0, 2});
        }
        for (int i = 0; i < hs.n_ms_group2; ++i) {
            const auto [x, y] = rng.in_disc(hx, hy, r_spot);
            topo.ms.push_back({x, y, 0, 2});
        }
    }
    return topo;
}

double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

ChannelSet generate_channels(const Topology& topo, const TopologyConfig& cfg,
                             const AntennaConfig& antennas, double p_tx, std::uint64_t seed) {
    if (antennas.per_bs < 1 || antennas.per_ms < 1)
        throw ConfigError("channels: antenna counts must be >= 1");
    if (p_tx <= 0.0) throw ConfigError("channels: transmit power must be positive");

    Rng rng(mix_seed(seed, {0x6368616eULL}));
    const int n_bs = topo.n_bs();
    const int n_ms = topo.n_ms();
    const int n_tx = n_ms * antennas.per_ms;
    const double d_floor = 1e-6 * cfg.cell_radius;

    ChannelSet ch;
    ch.bs_antennas.assign(n_bs, antennas.per_bs);
    ch.ms_antennas.assign(n_ms, antennas.per_ms);
    ch.p_tx = p_tx;
    ch.sigma_x = HermitianMatrix::scaled_identity(n_tx, p_tx);
    ch.h.reserve(n_bs);

    for (int i = 0; i < n_bs; ++i) {
        ch.bs_roles.push_back(topo.bs[i].role);
        Matrix hi(antennas.per_bs, n_tx);
        for (int j = 0; j < n_ms; ++j) {
            const double dx = topo.bs[i].x - topo.ms[j].x;
            const double dy = topo.bs[i].y - topo.ms[j].y;
            const double d = std::max(std::sqrt(dx * dx + dy * dy), d_floor);
            const double sd = std::sqrt(std::pow(cfg.d0() / d, cfg.pathloss_exponent));
            for (int a = 0; a < antennas.per_bs; ++a)
                for (int b = 0; b < antennas.per_ms; ++b)
                    hi(a, j * antennas.per_ms + b) = sd * rng.cgauss();
        }
        ch.h.push_back(std::move(hi));
    }
    return ch;
}

namespace {

nlohmann::json complex_matrix_to_json(const Matrix& m) {
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        nlohmann::json row = nlohmann::json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c)
            row.push_back({m(r, c).real(), m(r, c).imag()});
        rows.push_back(std::move(row));
    }
    return rows;
}

Matrix complex_matrix_from_json(const nlohmann::json& j) {
    const auto rows = j.size();
    const auto cols = rows ? j.at(0).size() : 0;
    Matrix m(rows, cols);
    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < cols; ++c)
            m(r, c) = Cplx(j.at(r).at(c).at(0).get<double>(), j.at(r).at(c).at(1).get<double>());
    return m;
}

}  // namespace

nlohmann::json topology_to_json(const Topology& topo) {
    nlohmann::json j;
    j["bs"] = nlohmann::json::array();
    for (const auto& b : topo.bs)
        j["bs"].push_back({{"x", b.x},
                           {"y", b.y},
                           {"role", b.role == BsRole::MBS ? "mbs" : "hbs"},
                           {"cell", b.cell},
                           {"group", b.group}});
    j["ms"] = nlohmann::json::array();
    for (const auto& m : topo.ms)
        j["ms"].push_back({{"x", m.x}, {"y", m.y}, {"cell", m.cell}, {"group", m.group}});
    if (topo.hot_spot_center)
        j["hot_spot_center"] = {topo.hot_spot_center->first, topo.hot_spot_center->second};
    return j;
}

Topology topology_from_json(const nlohmann::json& j) {
    Topology topo;
    for (const auto& b : j.at("bs"))
        topo.bs.push_back({b.at("x").get<double>(), b.at("y").get<double>(),
                           b.at("role").get<std::string>() == "mbs" ? BsRole::MBS : BsRole::HBS,
                           b.at("cell").get<int>(), b.at("group").get<int>()});
    for (const auto& m : j.at("ms"))
        topo.ms.push_back({m.at("x").get<double>(), m.at("y").get<double>(),
                           m.at("cell").get<int>(), m.at("group").get<int>()});
    if (j.contains("hot_spot_center"))
        topo.hot_spot_center = {j["hot_spot_center"].at(0).get<double>(),
                                j["hot_spot_center"].at(1).get<double>()};
    return topo;
}

nlohmann::json channel_set_to_json(const ChannelSet& ch) {
    nlohmann::json j;
    j["p_tx"] = ch.p_tx;
    j["bs_antennas"] = ch.bs_antennas;
    j["ms_antennas"] = ch.ms_antennas;
    j["bs_roles"] = nlohmann::json::array();
    for (BsRole r : ch.bs_roles) j["bs_roles"].push_back(r == BsRole::MBS ? "mbs" : "hbs");
    j["h"] = nlohmann::json::array();
    for (const auto& hi : ch.h) j["h"].push_back(complex_matrix_to_json(hi));
    return j;
}

ChannelSet channel_set_from_json(const nlohmann::json& j) {
    ChannelSet ch;
    ch.p_tx = j.at("p_tx").get<double>();
    ch.bs_antennas = j.at("bs_antennas").get<std::vector<int>>();
    ch.ms_antennas = j.at("ms_antennas").get<std::vector<int>>();
    for (const auto& r : j.at("bs_roles"))
        ch.bs_roles.push_back(r.get<std::string>() == "mbs" ? BsRole::MBS : BsRole::HBS);
    for (const auto& hj : j.at("h")) ch.h.push_back(complex_matrix_from_json(hj));
    int n_tx = 0;
    for (int a : ch.ms_antennas) n_tx += a;
    ch.sigma_x = HermitianMatrix::scaled_identity(n_tx, ch.p_tx);
    for (const auto& hi : ch.h)
        if (hi.cols() != n_tx) throw ConfigError("channel set: H width mismatch");
    return ch;
}

}  // namespace cran
