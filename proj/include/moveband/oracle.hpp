#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "moveband/metric.hpp"

namespace moveband {

// An oblivious adversary: a deterministic mapping (round, action) -> loss in
// [0,1], fixed before play. t is 1-based.
class LossOracle {
public:
    virtual ~LossOracle() = default;
    virtual double loss(long long t, int arm) const = 0;
    virtual int num_arms() const = 0;
    virtual long long horizon() const = 0;
    virtual nlohmann::ordered_json config() const = 0;
};

// i.i.d. Bernoulli losses: one hashed best arm with mean mu_star, all others
// mu_star + gap.
std::unique_ptr<LossOracle> make_stochastic_gap(int k, long long horizon, std::uint64_t seed,
                                                double mu_star = 0.2, double gap = 0.3);

// 1-Lipschitz losses l_t(i) = min(1, dist(i, target_t)) for a slowly moving
// target: every `period` rounds the target jumps to a uniformly chosen point
// within `step` of its current position.
std::unique_ptr<LossOracle> make_drift_target(const MetricSpace& metric, long long horizon,
                                              std::uint64_t seed, long long period = 8,
                                              double step = 0.25);

// Piecewise-constant best arm, switching every epoch_len rounds; the best arm
// gets base - gap, everyone else base.
std::unique_ptr<LossOracle> make_epoch_adversary(int k, long long horizon, std::uint64_t seed,
                                                 long long epoch_len, double base = 0.5,
                                                 double gap = 0.3);

// Explicit T x k loss matrix (CSV, T rows of k values).
std::unique_ptr<LossOracle> make_from_file(const std::string& path, int expected_arms = -1);
std::unique_ptr<LossOracle> make_from_matrix(std::vector<std::vector<double>> losses);

// Spec strings: "stochasticGap:mu=0.2,gap=0.3", "driftTarget:period=8,step=0.25",
// "epochAdversary:L=1024,base=0.5,gap=0.3", "fromFile:losses.csv".
// epochAdversary accepts L=auto for L = ceil(T^{2/3}). driftTarget needs the metric.
std::unique_ptr<LossOracle> make_loss_oracle(const std::string& spec, std::uint64_t seed,
                                             const MetricSpace* metric, long long horizon);

// Continuous-space drift target on [0,1]^d under the max norm: reflected
// random walk with per-round step `step`; loss(x) = min(1, |x - target_t|_inf).
class ContinuousDriftOracle {
public:
    ContinuousDriftOracle(int dims, long long horizon, std::uint64_t seed, double step = 0.01);
    double loss(long long t, const std::vector<double>& x) const;
    int dims() const { return dims_; }
    long long horizon() const { return horizon_; }
    nlohmann::ordered_json config() const;

private:
    int dims_;
    long long horizon_;
    std::uint64_t seed_;
    double step_;
    std::vector<std::vector<double>> path_; // target per round, path_[t-1]
};

} // namespace moveband
