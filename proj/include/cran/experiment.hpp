#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "cran/channel.hpp"
#include "cran/greedy.hpp"
#include "cran/robust.hpp"
#include "cran/selection.hpp"

namespace cran {

enum class Scenario { compare_schemes, robustness, selection };

std::string scenario_name(Scenario s);
Scenario scenario_from_name(const std::string& name);

/// Monte-Carlo study description. The MBS backhaul is `mbs_backhaul` bits;
/// every HBS gets the fraction `hbs_fraction` of it except in the selection
/// scenario where the HBSs share `selection.shared_backhaul`.
struct ExperimentConfig {
    Scenario scenario = Scenario::compare_schemes;
    TopologyConfig topology;
    AntennaConfig antennas;
    double p_tx_db = 0.0;
    double mbs_backhaul = 10.0;  // C, bits per channel use
    double hbs_fraction = 0.5;   // omega in (0, 1]
    int n_drops = 50;
    std::uint64_t base_seed = 1;
    std::vector<std::string> schemes;  // empty selects the scenario defaults
    /// When false the robustness schemes see exact statistics (the robust and
    /// imperfect pipelines degenerate to the perfect-SI one).
    bool uncertainty = true;
    SelectionConfig selection;
    std::string sweep_axis;  // omega | p_tx_db | c_mbs | n_hbs | r_spot_ratio
    std::vector<double> sweep_values;
    int threads = 0;  // 0 = hardware concurrency

    void validate() const;
    std::vector<std::string> scheme_list() const;
    /// Value of the configured sweep axis at the config's own scalars
    /// (0 when no axis is set); fills the CSV sweep_value column for `run`.
    double current_axis_value() const;
};

struct ResultRow {
    double sweep_value = 0.0;
    std::string scheme;
    double per_ms_rate_mean = 0.0;
    double per_ms_rate_stderr = 0.0;
    int n_drops = 0;
};

/// Evaluates every configured scheme at the config's own scalar parameters.
/// Drops run concurrently on derived seeds; aggregation is ordered by drop
/// index, so results are deterministic for a given config.
std::vector<ResultRow> run_experiment(const ExperimentConfig& cfg);

/// Applies each sweep value to the configured axis and concatenates the
/// per-point results.
std::vector<ResultRow> run_sweep(const ExperimentConfig& cfg);

/// Header `sweep_value,scheme,per_ms_rate_mean,per_ms_rate_stderr,n_drops`.
std::string results_to_csv(const std::vector<ResultRow>& rows);

/// Decoder-side check of designs built from mismatched statistics: walking
/// the order, a BS whose true conditional description rate exceeds its
/// backhaul is dropped and later side-information states are rebuilt without
/// it. Returns the sum-rate over the surviving descriptions.
struct ImperfectSiEvaluation {
    double sum_rate_bits = 0.0;
    std::vector<int> failed;
    std::vector<int> survivors;
};
ImperfectSiEvaluation evaluate_imperfect_si(const ChannelSet& ch, const std::vector<int>& order,
                                            const CompressionSolution& designs,
                                            const std::vector<double>& capacities);

/// Sequential pipeline where each step designs against sampled statistics:
/// non-robust uses the perturbed form as if exact, robust solves the
/// worst-case problem with the sampled bounds. The first step carries no
/// uncertainty (the unconditioned covariance is a system constant).
GreedyResult mismatched_greedy(const ChannelSet& ch, const std::vector<double>& capacities,
                               std::uint64_t uncertainty_seed, bool robust);

/// Per-BS backhaul: `mbs_bits` for MBS roles, `fraction * mbs_bits` for HBSs.
std::vector<double> role_capacities(const ChannelSet& ch, double mbs_bits, double fraction);

ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const ExperimentConfig& cfg);
/// FNV-1a over the canonical JSON serialization; recorded in the output
/// metadata sidecar for reproducibility.
std::uint64_t config_hash(const ExperimentConfig& cfg);

}  // namespace cran
