#pragma once

#include <vector>

#include "moveband/policy.hpp"

namespace moveband {

// Importance-weighted Exp3 with a uniform exploration mix, behind the same
// select/observe contract as SMB.
class Exp3Policy final : public BanditPolicy {
public:
    Exp3Policy(int k, double eta, double gamma = 0.01);

    int num_actions() const override { return k_; }
    int select(Rng& rng) override;
    void observe(double loss, Rng& rng) override;

    std::vector<double> probs() const;

private:
    int k_;
    double eta_;
    double gamma_;
    std::vector<double> log_w_;
    int cur_action_ = -1;
    double cur_prob_ = 0.0;
    bool awaiting_observe_ = false;
};

} // namespace moveband
