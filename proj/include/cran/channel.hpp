#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "cran/hermitian.hpp"

namespace cran {

enum class BsRole { MBS, HBS };

/// Overlay cell ("hot spot") holding the group-2 nodes.
struct HotSpotConfig {
    double radius_ratio = 0.5;  // R_spot / R_cell, in (0, 1]
    int n_hbs_group2 = 0;
    int n_ms_group2 = 0;
};

struct TopologyConfig {
    int n_cells = 1;
    double cell_radius = 1.0;
    int n_hbs_per_cell = 0;  // group-1 HBSs, uniform in the cell disc
    int n_ms_per_cell = 0;   // group-1 MSs
    std::optional<HotSpotConfig> hot_spot;
    double pathloss_exponent = 3.5;
    /// Reference distance D0 of the path-loss law; <= 0 selects the default
    /// cell_radius / 2.
    double reference_distance = 0.0;
    /// Distance between adjacent cell centers as a multiple of cell_radius.
    /// Default sqrt(3) = 2 cos(30 deg), adjacent hexagon centers.
    double center_spacing_factor = 1.7320508075688772;

    double d0() const { return reference_distance > 0.0 ? reference_distance : cell_radius / 2.0; }

    void validate() const;
};

struct BsNode {
    double x = 0.0, y = 0.0;
    BsRole role = BsRole::MBS;
    int cell = 0;
    int group = 1;  // 2 = hot-spot node
};

struct MsNode {
    double x = 0.0, y = 0.0;
    int cell = 0;
    int group = 1;
};

struct Topology {
    std::vector<BsNode> bs;
    std::vector<MsNode> ms;
    std::optional<std::pair<double, double>> hot_spot_center;

    int n_bs() const { return static_cast<int>(bs.size()); }
    int n_ms() const { return static_cast<int>(ms.size()); }
};

struct AntennaConfig {
    int per_bs = 1;
    int per_ms = 1;
};

/// Per-BS channel matrices H_i (n_{B,i} x n_M, MS blocks concatenated) plus
/// the transmit covariance P_tx * I shared by all MSs.
struct ChannelSet {
    std::vector<Matrix> h;
    std::vector<int> bs_antennas;
    std::vector<int> ms_antennas;
    std::vector<BsRole> bs_roles;
    HermitianMatrix sigma_x;
    double p_tx = 1.0;

    int n_bs() const { return static_cast<int>(h.size()); }
    int n_ms() const { return static_cast<int>(ms_antennas.size()); }
    int n_tx() const { return static_cast<int>(sigma_x.dim()); }
};

/// Drops MBSs at cell centers and HBSs/MSs uniformly in each cell disc;
/// hot-spot (group-2) nodes land uniformly in an overlay disc placed inside
/// the first cell. Deterministic given (cfg, seed).
Topology generate_topology(const TopologyConfig& cfg, std::uint64_t seed);

/// i.i.d. circularly-symmetric complex Gaussian fading with per-entry
/// variance (D0 / d)^nu toward each MS. Deterministic given seed. MSs closer
/// than 1e-6 * cell_radius to a BS are nudged to that distance.
ChannelSet generate_channels(const Topology& topo, const TopologyConfig& cfg,
                             const AntennaConfig& antennas, double p_tx, std::uint64_t seed);

/// dB -> linear transmit power (SNR is P_tx directly; unit noise).
double db_to_linear(double db);

nlohmann::json topology_to_json(const Topology& topo);
Topology topology_from_json(const nlohmann::json& j);
nlohmann::json channel_set_to_json(const ChannelSet& ch);
ChannelSet channel_set_from_json(const nlohmann::json& j);

}  // namespace cran
