#include "moveband/exp3.hpp"

#include <algorithm>
#include <cmath>

#include "moveband/errors.hpp"

namespace moveband {

Exp3Policy::Exp3Policy(int k, double eta, double gamma) : k_(k), eta_(eta), gamma_(gamma) {
    if (k < 1) throw BadSpec("Exp3 requires k >= 1");
    if (!(eta > 0.0)) throw BadEta("Exp3 requires eta > 0");
    if (gamma < 0.0 || gamma > 1.0) throw BadSpec("Exp3 gamma must be in [0,1]");
    log_w_.assign(k, 0.0);
}

std::vector<double> Exp3Policy::probs() const {
    double max_lw = *std::max_element(log_w_.begin(), log_w_.end());
    std::vector<double> p(k_);
    double z = 0.0;
    for (int i = 0; i < k_; ++i) {
        p[i] = std::exp(log_w_[i] - max_lw);
        z += p[i];
    }
    for (int i = 0; i < k_; ++i) p[i] = (1.0 - gamma_) * p[i] / z + gamma_ / k_;
    return p;
}

int Exp3Policy::select(Rng& rng) {
    if (awaiting_observe_) throw NotSelected("select called twice without observe");
    auto p = probs();
    double u = rng.uniform01();
    double acc = 0.0;
    cur_action_ = k_ - 1;
    for (int i = 0; i < k_; ++i) {
        acc += p[i];
        if (u < acc) {
            cur_action_ = i;
            break;
        }
    }
    cur_prob_ = p[cur_action_];
    awaiting_observe_ = true;
    return cur_action_;
}

void Exp3Policy::observe(double loss, Rng& /*rng*/) {
    if (!awaiting_observe_) throw NotSelected("observe called before select");
    if (loss < 0.0 || loss > 1.0) throw OutOfRangeLoss("loss outside [0,1]");
    log_w_[cur_action_] -= eta_ * loss / cur_prob_;
    awaiting_observe_ = false;
}

} // namespace moveband
