#include <doctest.h>

#include <cmath>

#include <nlohmann/json.hpp>

#include "cran/channel.hpp"
#include "cran/errors.hpp"

using namespace cran;

namespace {

TopologyConfig three_cell_config() {
    TopologyConfig cfg;
    cfg.n_cells = 3;
    cfg.cell_radius = 1.0;
    cfg.n_hbs_per_cell = 2;
    cfg.n_ms_per_cell = 3;
    return cfg;
}

// Single BS at the origin, one MS at an exact distance: isolates the
// path-loss law for the empirical variance checks.
std::pair<Topology, TopologyConfig> probe_topology(double distance) {
    TopologyConfig cfg;
    cfg.n_cells = 1;
    cfg.cell_radius = 1.0;  // D0 = 0.5
    Topology topo;
    topo.bs.push_back({0.0, 0.0, BsRole::MBS, 0, 1});
    topo.ms.push_back({distance, 0.0, 0, 1});
    return {topo, cfg};
}

}  // namespace

TEST_CASE("topology: determinism, structure, hot spot containment") {
    auto cfg = three_cell_config();
    const auto a = generate_topology(cfg, 42);
    const auto b = generate_topology(cfg, 42);
    const auto c = generate_topology(cfg, 43);

    REQUIRE(a.n_bs() == 9);
    REQUIRE(a.n_ms() == 9);
    for (int i = 0; i < a.n_bs(); ++i) {
        CHECK(a.bs[i].x == b.bs[i].x);
        CHECK(a.bs[i].y == b.bs[i].y);
    }
    bool differs = false;
    for (int i = 0; i < a.n_bs(); ++i) differs |= a.bs[i].x != c.bs[i].x;
    CHECK(differs);

    // One MBS per cell, all nodes within their cell disc.
    int mbs_count = 0;
    for (const auto& bs : a.bs) mbs_count += bs.role == BsRole::MBS;
    CHECK(mbs_count == 3);

    SUBCASE("hot spot keeps group-2 nodes inside the overlay disc") {
        cfg.n_cells = 1;
        cfg.hot_spot = HotSpotConfig{0.3, 4, 4};
        const auto topo = generate_topology(cfg, 7);
        REQUIRE(topo.hot_spot_center.has_value());
        const auto [hx, hy] = *topo.hot_spot_center;
        std::vector<std::pair<double, double>> group2;
        for (const auto& bs : topo.bs)
            if (bs.group == 2) group2.emplace_back(bs.x, bs.y);
        for (const auto& ms : topo.ms)
            if (ms.group == 2) group2.emplace_back(ms.x, ms.y);
        REQUIRE(group2.size() == 8);
        for (const auto& [x, y] : group2) {
            CHECK(std::hypot(x - hx, y - hy) <= 0.3 + 1e-12);
            // The overlay disc itself stays inside the cell.
            CHECK(std::hypot(x, y) <= 1.0 + 1e-12);
        }
    }
    SUBCASE("no HBSs yields MBS-only layout") {
        TopologyConfig mini;
        mini.n_cells = 2;
        mini.n_ms_per_cell = 1;
        const auto topo = generate_topology(mini, 9);
        CHECK(topo.n_bs() == 2);
        for (const auto& bs : topo.bs) CHECK(bs.role == BsRole::MBS);
    }
    SUBCASE("single cell: every node lands inside the cell disc") {
        TopologyConfig one;
        one.n_cells = 1;
        one.cell_radius = 2.0;
        one.n_hbs_per_cell = 5;
        one.n_ms_per_cell = 5;
        const auto topo = generate_topology(one, 31);
        CHECK(topo.bs[0].x == 0.0);  // MBS at the cell center
        CHECK(topo.bs[0].y == 0.0);
        for (const auto& bs : topo.bs) CHECK(std::hypot(bs.x, bs.y) <= 2.0 + 1e-12);
        for (const auto& ms : topo.ms) CHECK(std::hypot(ms.x, ms.y) <= 2.0 + 1e-12);
    }
}

TEST_CASE("channel variance follows the path-loss law") {
    // 1e5 complex entries via one BS antenna and repeated drops.
    auto sample_variance = [](double distance, int draws) {
        auto [topo, cfg] = probe_topology(distance);
        AntennaConfig ant{4, 1};
        double acc = 0.0;
        int count = 0;
        for (int d = 0; d < draws; ++d) {
            const auto ch = generate_channels(topo, cfg, ant, 1.0, 5000 + d);
            acc += ch.h[0].squaredNorm();
            count += static_cast<int>(ch.h[0].size());
        }
        return acc / count;
    };

    SUBCASE("unit variance at the reference distance") {
        const double v = sample_variance(0.5, 25000);
        CHECK(v == doctest::Approx(1.0).epsilon(0.03));
    }
    SUBCASE("2^-3.5 at twice the reference distance") {
        const double v = sample_variance(1.0, 25000);
        CHECK(v == doctest::Approx(std::pow(2.0, -3.5)).epsilon(0.03));
    }
}

TEST_CASE("circular symmetry: real and imaginary parts split the variance") {
    auto [topo, cfg] = probe_topology(0.5);
    AntennaConfig ant{4, 1};
    double re2 = 0.0, im2 = 0.0;
    int count = 0;
    for (int d = 0; d < 25000; ++d) {
        const auto ch = generate_channels(topo, cfg, ant, 1.0, 9000 + d);
        for (Eigen::Index i = 0; i < ch.h[0].size(); ++i) {
            re2 += ch.h[0](i).real() * ch.h[0](i).real();
            im2 += ch.h[0](i).imag() * ch.h[0](i).imag();
            ++count;
        }
    }
    CHECK(re2 / count == doctest::Approx(0.5).epsilon(0.05));
    CHECK(im2 / count == doctest::Approx(0.5).epsilon(0.05));
}

TEST_CASE("path loss is monotone in distance") {
    auto [topo_near, cfg] = probe_topology(0.4);
    auto [topo_far, cfg2] = probe_topology(0.9);
    AntennaConfig ant{2, 1};
    double near_power = 0.0, far_power = 0.0;
    for (int d = 0; d < 4000; ++d) {
        near_power += generate_channels(topo_near, cfg, ant, 1.0, d).h[0].squaredNorm();
        far_power += generate_channels(topo_far, cfg2, ant, 1.0, d).h[0].squaredNorm();
    }
    CHECK(near_power > far_power);
}

TEST_CASE("channel generation: determinism and sigma_x") {
    auto cfg = three_cell_config();
    const auto topo = generate_topology(cfg, 11);
    AntennaConfig ant{2, 1};
    const auto a = generate_channels(topo, cfg, ant, db_to_linear(-5.0), 21);
    const auto b = generate_channels(topo, cfg, ant, db_to_linear(-5.0), 21);
    for (int i = 0; i < a.n_bs(); ++i) CHECK((a.h[i] - b.h[i]).norm() == 0.0);

    CHECK(a.n_tx() == 9);
    CHECK(a.sigma_x.mat()(0, 0).real() == doctest::Approx(std::pow(10.0, -0.5)));
    CHECK(a.p_tx == doctest::Approx(std::pow(10.0, -0.5)));
}

TEST_CASE("topology and channel sets round-trip through JSON") {
    auto cfg = three_cell_config();
    cfg.hot_spot = HotSpotConfig{0.4, 1, 1};
    const auto topo = generate_topology(cfg, 99);
    const auto back = topology_from_json(topology_to_json(topo));
    REQUIRE(back.n_bs() == topo.n_bs());
    REQUIRE(back.n_ms() == topo.n_ms());
    for (int i = 0; i < topo.n_bs(); ++i) {
        CHECK(back.bs[i].x == topo.bs[i].x);
        CHECK(back.bs[i].role == topo.bs[i].role);
        CHECK(back.bs[i].group == topo.bs[i].group);
    }

    const auto ch = generate_channels(topo, cfg, AntennaConfig{2, 1}, 2.5, 123);
    const auto ch_back = channel_set_from_json(channel_set_to_json(ch));
    REQUIRE(ch_back.n_bs() == ch.n_bs());
    for (int i = 0; i < ch.n_bs(); ++i) CHECK((ch_back.h[i] - ch.h[i]).norm() == 0.0);
    CHECK(ch_back.p_tx == ch.p_tx);
    CHECK((ch_back.sigma_x.mat() - ch.sigma_x.mat()).norm() == 0.0);
}

TEST_CASE("config validation") {
    TopologyConfig bad;
    bad.n_cells = 0;
    CHECK_THROWS_AS(generate_topology(bad, 1), ConfigError);
    TopologyConfig bad_spot;
    bad_spot.hot_spot = HotSpotConfig{1.5, 1, 1};
    CHECK_THROWS_AS(generate_topology(bad_spot, 1), ConfigError);
    CHECK(db_to_linear(0.0) == doctest::Approx(1.0));
    CHECK(db_to_linear(10.0) == doctest::Approx(10.0));
}
