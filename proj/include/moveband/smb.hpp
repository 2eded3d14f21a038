#pragma once

#include <vector>

#include "moveband/hst.hpp"
#include "moveband/policy.hpp"

namespace moveband {

// Per-round loss estimates along the played leaf's ancestor path. bar[h] is
// the (constant) value of the level-h estimate on the leaves sharing the
// played leaf's level-h ancestor; bar[0] applies to the played leaf only.
struct LevelEstimates {
    std::vector<double> bar;   // h = 0..H-1
    std::vector<int> sigma;    // h = 0..H-1, each +1 or -1 (sigma_H = -1 implicit)
    int chosen_level = 0;      // h_t = min{h : sigma_h < 0}
    bool truncated = false;    // played leaf fell in the low-mass set E_t
    int played = -1;
    double played_prob = 0.0;

    // final estimator value at an action, given its ring level
    // ring = level of LCA(action, played); tilde = bar_0 + sum_h sigma_h bar_h
    double tilde(int ring) const;
    // same value through the identity tilde = bar_0 - bar_{h_t} + sum_{j<h_t} bar_j
    double tilde_via_identity(int ring) const;
};

// Pure estimator computation shared by the policy and the enumeration
// oracle: given the sampling distribution, the played leaf and the sign
// draws, produce the level estimates and the truncation decision.
LevelEstimates compute_estimates(const HstTree& tree, const std::vector<double>& p,
                                 double eta, int played, const std::vector<int>& sigma,
                                 double loss);

// Normalized exponential-weights update p(i) <- p(i) e^{-eta c(i)} / Z,
// computed with a max shift before exponentiation. Requires c(i) >= -1/eta.
std::vector<double> mw_update(const std::vector<double>& p, const std::vector<double>& c,
                              double eta);

// eta = sqrt(2^-H * ln(max(dim,2)) / (dim * T)), times a free multiplier.
double default_eta(int depth, double dim, long long horizon, double multiplier = 1.0);

// The slowly-moving bandit policy over an HST.
class SmbPolicy final : public BanditPolicy {
public:
    SmbPolicy(const HstTree& tree, double eta);

    int num_actions() const override { return tree_->num_actions(); }
    int select(Rng& rng) override;
    void observe(double loss, Rng& rng) override;

    const std::vector<double>& probs() const { return p_; }
    double subtree_mass(int node) const { return mass_[node]; }
    int prev_level() const { return prev_level_; }
    int prev_action() const { return prev_action_; }
    long long round() const { return round_; }
    double eta() const { return eta_; }
    const HstTree& tree() const { return *tree_; }
    const LevelEstimates& last_estimates() const { return last_; }
    long long zero_mass_fallbacks() const { return zero_mass_fallbacks_; }

    // test hook: deterministic observe with externally fixed sign draws
    void observe_with_sigma(double loss, const std::vector<int>& sigma);
    void set_probs(const std::vector<double>& p); // test hook, renormalizes masses

private:
    void refresh_masses();

    const HstTree* tree_;
    double eta_;
    std::vector<double> p_;
    std::vector<double> mass_; // per node id
    int prev_action_ = -1;
    int prev_level_;
    int cur_action_ = -1;
    bool awaiting_observe_ = false;
    long long round_ = 1;
    long long rounds_since_refresh_ = 0;
    long long zero_mass_fallbacks_ = 0;
    LevelEstimates last_;
};

} // namespace moveband
