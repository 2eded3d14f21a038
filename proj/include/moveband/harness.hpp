#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "moveband/hst.hpp"
#include "moveband/metric.hpp"
#include "moveband/oracle.hpp"
#include "moveband/policy.hpp"

namespace moveband {

// Per-round record of a single run. Movement cost at t=1 is 0.
struct RunTrace {
    std::vector<int> actions;
    std::vector<double> losses;
    std::vector<double> move_costs;
    std::uint64_t seed = 0;

    long long rounds() const { return static_cast<long long>(actions.size()); }
    double total_loss() const;
    double total_move() const;
};

// Plays T rounds with bandit feedback; fully deterministic given the seed.
RunTrace run(BanditPolicy& policy, const LossOracle& oracle, const MetricSpace& metric,
             long long horizon, std::uint64_t seed);

// min over arms of the total loss, computed exactly from the oracle.
double comparator_loss(const LossOracle& oracle, long long horizon);

// total loss + total movement - comparator.
double movement_regret(const RunTrace& trace, const LossOracle& oracle, const MetricSpace& metric);

struct GeneralRunReport {
    HstTree tree;
    double dim = 0.0;
    double eta = 0.0;
    int depth = 0;
    bool dominance_held_on_switches = true; // Delta <= 4 Delta_T for every executed switch
};

// The general-metric pipeline: build_hst -> reshape for the horizon ->
// default eta -> SMB fed quarter-scaled losses; the trace records unscaled
// losses and true-metric movement costs.
std::pair<RunTrace, GeneralRunReport> run_general(const MetricSpace& metric,
                                                  const LossOracle& oracle, long long horizon,
                                                  std::uint64_t seed,
                                                  std::optional<double> eta_override = std::nullopt,
                                                  double eta_multiplier = 1.0);

struct DiscretizationReport {
    double eps = 0.0;
    int cover_size = 0;
    std::vector<std::vector<double>> centers;
    MetricSpace metric; // induced finite metric over the centers
};

// Continuous pipeline: eps = T^{-1/(d+2)}, regular grid with spacing 4*eps
// per axis (cell midpoints cover [0,1]^d at radius 2*eps in the max norm),
// then run_general on the induced finite metric. d <= 3.
std::tuple<RunTrace, GeneralRunReport, DiscretizationReport>
discretize_and_run(int dims, const ContinuousDriftOracle& oracle, long long horizon,
                   std::uint64_t seed, std::optional<double> eta_override = std::nullopt);

// grid centers for the 2*eps cover (exposed for tests)
std::vector<std::vector<double>> discretization_centers(int dims, double eps);

struct MomentsReport {
    std::vector<double> expected_tilde; // per arm
    double expected_p_tilde_sq = 0.0;
    double truncation_prob = 0.0;
    double second_moment_bound = 0.0; // 2 H 2^H dim
    // per node with positive mass: E[1{i_t in A} / p(A)]
    std::vector<std::pair<int, double>> importance_weights;
    double max_identity_gap = 0.0; // direct vs identity form of tilde
    double min_tilde = 0.0;
    long long outcomes = 0;
};

// Exact enumeration of all (i_t, sigma) outcomes for a single SMB round with
// sampling distribution p and losses `loss`; verification oracle for the
// estimator's bias, second moment, and importance weights.
MomentsReport enumerate_estimator_moments(const HstTree& tree, const std::vector<double>& p,
                                          double eta, const std::vector<double>& loss);

struct MovementCheckReport {
    std::vector<double> switch_prob; // empirical, per level h = 0..H-1
    std::vector<double> bound;       // 2^{-(h+1)}
    std::vector<double> margin;      // 3-sigma binomial at the bound
    bool levels_ok = true;
    double mean_tree_move = 0.0; // empirical per-round Delta_T movement
    double move_bound = 0.0;     // H * 2^{-(H+1)}
    double move_margin = 0.0;    // 3-sigma from the empirical variance
    bool move_ok = true;
    long long samples = 0;
};

// Monte Carlo check of the per-level switching probabilities and the
// expected per-round tree movement under SMB dynamics with random losses.
MovementCheckReport mc_movement_check(const HstTree& tree, std::uint64_t seed, long long samples,
                                      std::optional<double> eta = std::nullopt);

// Trace CSV: header t,action,loss,move_cost.
void write_trace_csv(const RunTrace& trace, const std::vector<std::string>& labels,
                     const std::string& path);
RunTrace read_trace_csv(const std::string& path, const std::vector<std::string>& labels);

nlohmann::ordered_json make_summary(const nlohmann::ordered_json& config, std::uint64_t seed,
                                    const RunTrace& trace, const LossOracle& oracle,
                                    const MetricSpace& metric,
                                    const GeneralRunReport* tree_report);

// least-squares slope of log(y) against log(x); regret trend fitting
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

} // namespace moveband
