#include "cran/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>
#include <thread>

#include <nlohmann/json.hpp>

#include "cran/errors.hpp"
#include "cran/rng.hpp"

namespace cran {

std::string scenario_name(Scenario s) {
    switch (s) {
        case Scenario::compare_schemes: return "compare_schemes";
        case Scenario::robustness: return "robustness";
        case Scenario::selection: return "selection";
    }
    return "?";
}

Scenario scenario_from_name(const std::string& name) {
    if (name == "compare_schemes") return Scenario::compare_schemes;
    if (name == "robustness") return Scenario::robustness;
    if (name == "selection") return Scenario::selection;
    throw ConfigError("unknown scenario: " + name);
}

namespace {

const std::vector<std::string> kCompareSchemes = {"maxrate_si",      "maxrate_nsi",
                                                  "mmse_direct_si",  "mmse_direct_nsi",
                                                  "mmse_indirect_si", "mmse_indirect_nsi"};
const std::vector<std::string> kRobustnessSchemes = {"perfect_si", "robust", "imperfect_si",
                                                     "no_si"};
const std::vector<std::string> kSelectionSchemes = {"two_phase", "exhaustive", "local", "random"};

const std::vector<std::string>& scenario_schemes(Scenario s) {
    switch (s) {
        case Scenario::compare_schemes: return kCompareSchemes;
        case Scenario::robustness: return kRobustnessSchemes;
        case Scenario::selection: return kSelectionSchemes;
    }
    return kCompareSchemes;
}

}  // namespace

void ExperimentConfig::validate() const {
    topology.validate();
    selection.validate();
    if (n_drops < 1) throw ConfigError("experiment: n_drops must be >= 1");
    if (hbs_fraction <= 0.0 || hbs_fraction > 1.0)
        throw ConfigError("experiment: hbs fraction must be in (0, 1]");
    if (mbs_backhaul < 0.0) throw ConfigError("experiment: negative backhaul");
    const auto& known = scenario_schemes(scenario);
    for (const auto& s : schemes)
        if (std::find(known.begin(), known.end(), s) == known.end())
            throw ConfigError("experiment: scheme '" + s + "' is not valid for scenario " +
                              scenario_name(scenario));
    if (!sweep_axis.empty() && sweep_axis != "omega" && sweep_axis != "p_tx_db" &&
        sweep_axis != "c_mbs" && sweep_axis != "n_hbs" && sweep_axis != "r_spot_ratio")
        throw ConfigError("experiment: unknown sweep axis '" + sweep_axis + "'");
}

std::vector<std::string> ExperimentConfig::scheme_list() const {
    return schemes.empty() ? scenario_schemes(scenario) : schemes;
}

double ExperimentConfig::current_axis_value() const {
    if (sweep_axis == "omega") return hbs_fraction;
    if (sweep_axis == "p_tx_db") return p_tx_db;
    if (sweep_axis == "c_mbs") return mbs_backhaul;
    if (sweep_axis == "n_hbs") return topology.n_hbs_per_cell;
    if (sweep_axis == "r_spot_ratio")
        return topology.hot_spot ? topology.hot_spot->radius_ratio : 0.0;
    return 0.0;
}

std::vector<double> role_capacities(const ChannelSet& ch, double mbs_bits, double fraction) {
    std::vector<double> caps(ch.n_bs());
    for (int i = 0; i < ch.n_bs(); ++i)
        caps[i] = ch.bs_roles[i] == BsRole::MBS ? mbs_bits : fraction * mbs_bits;
    return caps;
}

ImperfectSiEvaluation evaluate_imperfect_si(const ChannelSet& ch, const std::vector<int>& order,
                                            const CompressionSolution& designs,
                                            const std::vector<double>& capacities) {
    ImperfectSiEvaluation ev;
    SideInfoState state(ch.sigma_x);
    for (int bs : order) {
        const double need = side_rate_f(designs.entries[bs].omega, ch.h[bs], state.sigma_cond());
        if (need > capacities[bs] + 1e-9) {
            ev.failed.push_back(bs);
            continue;
        }
        ev.survivors.push_back(bs);
        state.push(bs, designs.entries[bs].gain, ch.h[bs]);
    }
    ev.sum_rate_bits = sum_rate(ch, designs, ev.survivors);
    return ev;
}

GreedyResult mismatched_greedy(const ChannelSet& ch, const std::vector<double>& capacities,
                               std::uint64_t uncertainty_seed, bool robust) {
    const int n = ch.n_bs();
    GreedyResult res;
    res.solution.entries.reserve(n);
    for (int i = 0; i < n; ++i) res.solution.entries.push_back(BsDesign::zero(ch.h[i].rows()));

    std::vector<int> live, dead;
    for (int i = 0; i < n; ++i) (ch.h[i].norm() > 0.0 ? live : dead).push_back(i);

    SideInfoState state(ch.sigma_x);
    int step = 0;
    while (!live.empty()) {
        int best = -1;
        double best_phi = 0.0;
        BsDesign best_design;
        for (int bs : live) {
            BsDesign cand;
            double phi = 0.0;
            if (state.selected().empty()) {
                // No side information yet: the unconditioned covariance is a
                // known system constant, so nothing is uncertain.
                cand = max_rate_compress(ch.h[bs], state.sigma_cond(), capacities[bs]);
                phi = net_rate(cand.omega, ch.h[bs], state.sigma_cond());
            } else {
                const auto sample = sample_uncertainty(
                    ch.h[bs], state.sigma_cond(),
                    mix_seed(uncertainty_seed, {static_cast<std::uint64_t>(step),
                                                static_cast<std::uint64_t>(bs)}));
                if (robust) {
                    const auto bounds = sample.bounds.clamped_for(sample.nominal_form);
                    auto rd = robust_compress_form(sample.nominal_form, capacities[bs], bounds);
                    cand = std::move(rd.entry);
                    phi = rd.worst_case_rate;
                } else {
                    cand = max_rate_compress_form(sample.nominal_form, capacities[bs]);
                    phi = net_rate_form(cand.omega, sample.nominal_form);
                }
            }
            if (best < 0 || phi > best_phi + 1e-9) {
                best = bs;
                best_phi = phi;
                best_design = std::move(cand);
            }
        }
        state.push(best, best_design.gain, ch.h[best]);
        res.solution.entries[best] = std::move(best_design);
        res.solution.order.push_back(best);
        res.step_objectives.push_back(best_phi);
        live.erase(std::remove(live.begin(), live.end(), best), live.end());
        ++step;
    }
    for (int bs : dead) {
        res.solution.order.push_back(bs);
        res.step_objectives.push_back(0.0);
    }
    return res;
}

namespace {

double compare_scheme_rate(const ChannelSet& ch, const std::vector<double>& caps,
                           const std::string& scheme) {
    StepSolver solver;
    if (scheme == "maxrate_si")
        solver = make_max_rate_solver(true);
    else if (scheme == "maxrate_nsi")
        solver = make_max_rate_solver(false);
    else if (scheme == "mmse_direct_si")
        solver = make_mmse_solver(MmseVariant::direct_si());
    else if (scheme == "mmse_direct_nsi")
        solver = make_mmse_solver(MmseVariant::direct_nsi());
    else if (scheme == "mmse_indirect_si")
        solver = make_mmse_solver(MmseVariant::indirect_si());
    else if (scheme == "mmse_indirect_nsi")
        solver = make_mmse_solver(MmseVariant::indirect_nsi());
    else
        throw ConfigError("unknown compare scheme: " + scheme);
    const auto res = greedy_compress(ch, caps, solver);
    return sum_rate(ch, res.solution);
}

double robustness_scheme_rate(const ChannelSet& ch, const std::vector<double>& caps,
                              const std::string& scheme, std::uint64_t unc_seed,
                              bool uncertainty) {
    if (scheme == "perfect_si" || (!uncertainty && (scheme == "imperfect_si" || scheme == "robust"))) {
        const auto res = greedy_compress(ch, caps, make_max_rate_solver(true));
        return sum_rate(ch, res.solution);
    }
    if (scheme == "no_si") {
        const auto res = greedy_compress(ch, caps, make_max_rate_solver(false));
        return sum_rate(ch, res.solution);
    }
    if (scheme == "imperfect_si" || scheme == "robust") {
        const auto res = mismatched_greedy(ch, caps, unc_seed, scheme == "robust");
        return evaluate_imperfect_si(ch, res.solution.order, res.solution, caps).sum_rate_bits;
    }
    throw ConfigError("unknown robustness scheme: " + scheme);
}

struct SelectionRates {
    double two_phase = 0.0, exhaustive = 0.0, local = 0.0, random_pick = 0.0;
};

SelectionRates selection_drop_rates(const ChannelSet& ch, const SelectionConfig& sel,
                                    std::uint64_t rand_seed) {
    const BsDesign mbs = max_rate_compress(ch.h[0], ch.sigma_x, sel.mbs_backhaul);
    const auto two = two_phase_select(ch, sel, mbs);
    SelectionRates rates;
    rates.two_phase = sum_rate(ch, two.solution);

    const int k = static_cast<int>(two.selected.size());
    auto subset_rate = [&](const std::vector<int>& subset) {
        const auto opt = optimize_subset(ch, sel, subset, mbs);
        return sum_rate(ch, opt.solution);
    };
    if (k == 0) {
        CompressionSolution mbs_only;
        mbs_only.entries.push_back(mbs);
        for (int i = 1; i < ch.n_bs(); ++i) mbs_only.entries.push_back(BsDesign::zero(ch.h[i].rows()));
        mbs_only.order = {0};
        const double base = sum_rate(ch, mbs_only);
        rates.exhaustive = rates.local = rates.random_pick = base;
        return rates;
    }
    rates.exhaustive =
        subset_rate(baseline_select(ch, sel, k, BaselineMode::exhaustive, 0, mbs));
    rates.local = subset_rate(baseline_select(ch, sel, k, BaselineMode::local, 0, mbs));
    rates.random_pick =
        subset_rate(baseline_select(ch, sel, k, BaselineMode::random_pick, rand_seed, mbs));
    return rates;
}

/// Per-drop rates for every scheme, bits per MS.
std::vector<double> run_drop(const ExperimentConfig& cfg, const std::vector<std::string>& schemes,
                             int drop) {
    const std::uint64_t topo_seed = mix_seed(cfg.base_seed, {static_cast<std::uint64_t>(drop), 1});
    const std::uint64_t chan_seed = mix_seed(cfg.base_seed, {static_cast<std::uint64_t>(drop), 2});
    const std::uint64_t unc_seed = mix_seed(cfg.base_seed, {static_cast<std::uint64_t>(drop), 3});
    const std::uint64_t rand_seed = mix_seed(cfg.base_seed, {static_cast<std::uint64_t>(drop), 4});

    const Topology topo = generate_topology(cfg.topology, topo_seed);
    const ChannelSet ch =
        generate_channels(topo, cfg.topology, cfg.antennas, db_to_linear(cfg.p_tx_db), chan_seed);
    const double n_ms = std::max(1, ch.n_ms());

    std::vector<double> rates;
    rates.reserve(schemes.size());
    if (cfg.scenario == Scenario::selection) {
        const auto sr = selection_drop_rates(ch, cfg.selection, rand_seed);
        for (const auto& s : schemes) {
            double r = 0.0;
            if (s == "two_phase") r = sr.two_phase;
            else if (s == "exhaustive") r = sr.exhaustive;
            else if (s == "local") r = sr.local;
            else if (s == "random") r = sr.random_pick;
            else throw ConfigError("unknown selection scheme: " + s);
            rates.push_back(r / n_ms);
        }
        return rates;
    }

    const auto caps = role_capacities(ch, cfg.mbs_backhaul, cfg.hbs_fraction);
    for (const auto& s : schemes) {
        const double r = cfg.scenario == Scenario::compare_schemes
                             ? compare_scheme_rate(ch, caps, s)
                             : robustness_scheme_rate(ch, caps, s, unc_seed, cfg.uncertainty);
        rates.push_back(r / n_ms);
    }
    return rates;
}

}  // namespace

std::vector<ResultRow> run_experiment(const ExperimentConfig& cfg) {
    cfg.validate();
    const auto schemes = cfg.scheme_list();
    const int n_drops = cfg.n_drops;

    std::vector<std::vector<double>> per_drop(n_drops);
    unsigned n_workers = cfg.threads > 0 ? static_cast<unsigned>(cfg.threads)
                                         : std::max(1u, std::thread::hardware_concurrency());
    n_workers = std::min<unsigned>(n_workers, static_cast<unsigned>(n_drops));

    if (n_workers <= 1) {
        for (int d = 0; d < n_drops; ++d) per_drop[d] = run_drop(cfg, schemes, d);
    } else {
        std::vector<std::thread> pool;
        std::atomic<int> next{0};
        std::vector<std::exception_ptr> errors(n_workers);
        for (unsigned w = 0; w < n_workers; ++w) {
            pool.emplace_back([&, w] {
                try {
                    int d;
                    while ((d = next.fetch_add(1)) < n_drops)
                        per_drop[d] = run_drop(cfg, schemes, d);
                } catch (...) {
                    errors[w] = std::current_exception();
                }
            });
        }
        for (auto& t : pool) t.join();
        for (auto& e : errors)
            if (e) std::rethrow_exception(e);
    }

    // Deterministic reduction ordered by drop index.
    std::vector<ResultRow> rows;
    const double sweep_value = cfg.current_axis_value();
    for (std::size_t s = 0; s < schemes.size(); ++s) {
        double mean = 0.0;
        for (int d = 0; d < n_drops; ++d) mean += per_drop[d][s];
        mean /= n_drops;
        double var = 0.0;
        for (int d = 0; d < n_drops; ++d) {
            const double e = per_drop[d][s] - mean;
            var += e * e;
        }
        const double stderr_v =
            n_drops > 1 ? std::sqrt(var / (n_drops - 1)) / std::sqrt(double(n_drops)) : 0.0;
        rows.push_back({sweep_value, schemes[s], mean, stderr_v, n_drops});
    }
    return rows;
}

std::vector<ResultRow> run_sweep(const ExperimentConfig& cfg) {
    cfg.validate();
    if (cfg.sweep_axis.empty()) throw ConfigError("sweep: no axis configured");
    if (cfg.sweep_values.empty()) throw ConfigError("sweep: no values configured");

    std::vector<ResultRow> rows;
    for (double v : cfg.sweep_values) {
        ExperimentConfig point = cfg;
        if (cfg.sweep_axis == "omega") {
            point.hbs_fraction = v;
        } else if (cfg.sweep_axis == "p_tx_db") {
            point.p_tx_db = v;
        } else if (cfg.sweep_axis == "c_mbs") {
            point.mbs_backhaul = v;
            point.selection.mbs_backhaul = v;
        } else if (cfg.sweep_axis == "n_hbs") {
            point.topology.n_hbs_per_cell = static_cast<int>(std::lround(v));
        } else if (cfg.sweep_axis == "r_spot_ratio") {
            if (!point.topology.hot_spot)
                throw ConfigError("sweep: r_spot_ratio needs a hot_spot in the topology");
            point.topology.hot_spot->radius_ratio = v;
        }
        auto point_rows = run_experiment(point);
        rows.insert(rows.end(), point_rows.begin(), point_rows.end());
    }
    return rows;
}

std::string results_to_csv(const std::vector<ResultRow>& rows) {
    std::string out = "sweep_value,scheme,per_ms_rate_mean,per_ms_rate_stderr,n_drops\n";
    char buf[256];
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof(buf), "%.12g,%s,%.12g,%.12g,%d\n", r.sweep_value,
                      r.scheme.c_str(), r.per_ms_rate_mean, r.per_ms_rate_stderr, r.n_drops);
        out += buf;
    }
    return out;
}

namespace {

nlohmann::json topology_config_to_json(const TopologyConfig& t) {
    nlohmann::json j{{"n_cells", t.n_cells},
                     {"cell_radius", t.cell_radius},
                     {"n_hbs_per_cell", t.n_hbs_per_cell},
                     {"n_ms_per_cell", t.n_ms_per_cell},
                     {"pathloss_exponent", t.pathloss_exponent},
                     {"reference_distance", t.reference_distance},
                     {"center_spacing_factor", t.center_spacing_factor}};
    if (t.hot_spot)
        j["hot_spot"] = {{"radius_ratio", t.hot_spot->radius_ratio},
                         {"n_hbs_group2", t.hot_spot->n_hbs_group2},
                         {"n_ms_group2", t.hot_spot->n_ms_group2}};
    return j;
}

TopologyConfig topology_config_from_json(const nlohmann::json& j) {
    TopologyConfig t;
    t.n_cells = j.value("n_cells", t.n_cells);
    t.cell_radius = j.value("cell_radius", t.cell_radius);
    t.n_hbs_per_cell = j.value("n_hbs_per_cell", t.n_hbs_per_cell);
    t.n_ms_per_cell = j.value("n_ms_per_cell", t.n_ms_per_cell);
    t.pathloss_exponent = j.value("pathloss_exponent", t.pathloss_exponent);
    t.reference_distance = j.value("reference_distance", t.reference_distance);
    t.center_spacing_factor = j.value("center_spacing_factor", t.center_spacing_factor);
    if (j.contains("hot_spot")) {
        HotSpotConfig hs;
        hs.radius_ratio = j["hot_spot"].value("radius_ratio", hs.radius_ratio);
        hs.n_hbs_group2 = j["hot_spot"].value("n_hbs_group2", hs.n_hbs_group2);
        hs.n_ms_group2 = j["hot_spot"].value("n_ms_group2", hs.n_ms_group2);
        t.hot_spot = hs;
    }
    return t;
}

}  // namespace

nlohmann::json config_to_json(const ExperimentConfig& cfg) {
    nlohmann::json j;
    j["scenario"] = scenario_name(cfg.scenario);
    j["topology"] = topology_config_to_json(cfg.topology);
    j["antennas"] = {{"per_bs", cfg.antennas.per_bs}, {"per_ms", cfg.antennas.per_ms}};
    j["p_tx_db"] = cfg.p_tx_db;
    j["mbs_backhaul_bits"] = cfg.mbs_backhaul;
    j["hbs_backhaul_fraction"] = cfg.hbs_fraction;
    j["n_drops"] = cfg.n_drops;
    j["base_seed"] = cfg.base_seed;
    j["schemes"] = cfg.schemes;
    j["uncertainty"] = cfg.uncertainty;
    j["selection"] = {{"activation_cost", cfg.selection.activation_cost},
                      {"shared_backhaul_bits", cfg.selection.shared_backhaul},
                      {"mbs_backhaul_bits", cfg.selection.mbs_backhaul},
                      {"activation_threshold", cfg.selection.activation_threshold},
                      {"max_sweeps", cfg.selection.max_sweeps},
                      {"convergence_tol", cfg.selection.convergence_tol}};
    if (!cfg.sweep_axis.empty())
        j["sweep"] = {{"axis", cfg.sweep_axis}, {"values", cfg.sweep_values}};
    j["threads"] = cfg.threads;
    return j;
}

ExperimentConfig config_from_json(const nlohmann::json& j) {
    ExperimentConfig cfg;
    cfg.scenario = scenario_from_name(j.value("scenario", std::string("compare_schemes")));
    if (j.contains("topology")) cfg.topology = topology_config_from_json(j["topology"]);
    if (j.contains("antennas")) {
        cfg.antennas.per_bs = j["antennas"].value("per_bs", 1);
        cfg.antennas.per_ms = j["antennas"].value("per_ms", 1);
    }
    cfg.p_tx_db = j.value("p_tx_db", cfg.p_tx_db);
    cfg.mbs_backhaul = j.value("mbs_backhaul_bits", cfg.mbs_backhaul);
    cfg.hbs_fraction = j.value("hbs_backhaul_fraction", cfg.hbs_fraction);
    cfg.n_drops = j.value("n_drops", cfg.n_drops);
    cfg.base_seed = j.value("base_seed", cfg.base_seed);
    cfg.schemes = j.value("schemes", cfg.schemes);
    cfg.uncertainty = j.value("uncertainty", cfg.uncertainty);
    if (j.contains("selection")) {
        const auto& s = j["selection"];
        cfg.selection.activation_cost = s.value("activation_cost", 0.0);
        cfg.selection.shared_backhaul = s.value("shared_backhaul_bits", 0.0);
        cfg.selection.mbs_backhaul = s.value("mbs_backhaul_bits", 0.0);
        cfg.selection.activation_threshold = s.value("activation_threshold", 1e-6);
        cfg.selection.max_sweeps = s.value("max_sweeps", 200);
        cfg.selection.convergence_tol = s.value("convergence_tol", 1e-6);
    }
    if (j.contains("sweep")) {
        cfg.sweep_axis = j["sweep"].value("axis", std::string());
        cfg.sweep_values = j["sweep"].value("values", std::vector<double>());
    }
    cfg.threads = j.value("threads", 0);
    cfg.validate();
    return cfg;
}

std::uint64_t config_hash(const ExperimentConfig& cfg) {
    const std::string dump = config_to_json(cfg).dump();
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : dump) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

}  // namespace cran
