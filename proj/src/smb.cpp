#include "moveband/smb.hpp"

#include <algorithm>
#include <cmath>

#include "moveband/errors.hpp"

namespace moveband {

namespace {
constexpr double kMassFloor = 1e-300;
}

double LevelEstimates::tilde(int ring) const {
    if (truncated) return 0.0;
    const int H = static_cast<int>(bar.size());
    double v = 0.0;
    if (ring == 0) v += (1.0 + sigma[0]) * bar[0];
    for (int h = std::max(ring, 1); h < H; ++h) v += sigma[h] * bar[h];
    return v;
}

double LevelEstimates::tilde_via_identity(int ring) const {
    if (truncated) return 0.0;
    const int H = static_cast<int>(bar.size());
    double v = 0.0;
    if (ring == 0) v += bar[0];
    // minus bar_{h_t}, reading bar_H as 0
    if (chosen_level < H) {
        bool in_support = (chosen_level == 0) ? (ring == 0) : (ring <= chosen_level);
        if (in_support) v -= bar[chosen_level];
    }
    // plus sum_{j < h_t} bar_j
    if (chosen_level >= 1 && ring == 0) v += bar[0];
    for (int j = std::max(ring, 1); j < chosen_level && j < H; ++j) v += bar[j];
    return v;
}

LevelEstimates compute_estimates(const HstTree& tree, const std::vector<double>& p,
                                 double eta, int played, const std::vector<int>& sigma,
                                 double loss) {
    const int H = tree.depth();
    LevelEstimates est;
    est.sigma = sigma;
    est.played = played;
    est.bar.assign(H, 0.0);

    est.chosen_level = H; // sigma_H = -1
    for (int h = 0; h < H; ++h)
        if (sigma[h] < 0) {
            est.chosen_level = h;
            break;
        }

    // subtree masses along the played leaf's ancestor path
    std::vector<double> mass(H + 1, 0.0);
    for (int h = 0; h <= H; ++h) {
        int node = tree.ancestor(played, h);
        double s = 0.0;
        for (int a : tree.actions_under(node)) s += p[a];
        mass[h] = std::max(s, kMassFloor);
    }
    est.played_prob = mass[0];

    for (int h = 0; h < H; ++h)
        if (mass[h] < std::ldexp(eta, h)) {
            est.truncated = true;
            break;
        }

    est.bar[0] = loss / mass[0];
    for (int h = 1; h < H; ++h) {
        double inner = (mass[h - 1] / mass[h]) *
                       std::expm1(-eta * (1.0 + est.sigma[h - 1]) * est.bar[h - 1]);
        est.bar[h] = -std::log1p(inner) / eta;
        if (est.bar[h] < 0.0 && est.bar[h] > -1e-12) est.bar[h] = 0.0; // kill rounding noise
    }
    return est;
}

std::vector<double> mw_update(const std::vector<double>& p, const std::vector<double>& c,
                              double eta) {
    if (eta <= 0.0) throw BadEta("eta must be positive");
    const std::size_t k = p.size();
    if (c.size() != k) throw BadSpec("mw_update: size mismatch");
    double max_exp = -INFINITY;
    for (std::size_t i = 0; i < k; ++i) {
        if (c[i] < -1.0 / eta - 1e-12)
            throw EstimateTooNegative("estimate below -1/eta at index " + std::to_string(i));
        max_exp = std::max(max_exp, -eta * c[i]);
    }
    std::vector<double> out(k);
    double z = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
        out[i] = p[i] * std::exp(-eta * c[i] - max_exp);
        z += out[i];
    }
    for (double& v : out) v /= z;
    return out;
}

double default_eta(int depth, double dim, long long horizon, double multiplier) {
    if (depth < 1 || dim <= 0.0 || horizon < 1) throw BadSpec("default_eta: bad arguments");
    double val = std::sqrt(std::ldexp(1.0, -depth) * std::log(std::max(dim, 2.0)) /
                           (dim * static_cast<double>(horizon)));
    return multiplier * val;
}

SmbPolicy::SmbPolicy(const HstTree& tree, double eta) : tree_(&tree), eta_(eta) {
    if (!(eta > 0.0)) throw BadEta("SMB requires eta > 0");
    const int k = tree.num_actions();
    p_.assign(k, 1.0 / k);
    prev_level_ = tree.depth();
    mass_.assign(tree.num_nodes(), 0.0);
    refresh_masses();
}

void SmbPolicy::refresh_masses() {
    std::fill(mass_.begin(), mass_.end(), 0.0);
    for (int a = 0; a < tree_->num_actions(); ++a) {
        int v = tree_->leaf_of_action(a);
        while (v >= 0) {
            mass_[v] += p_[a];
            v = tree_->nodes()[v].parent;
        }
    }
}

int SmbPolicy::select(Rng& rng) {
    if (awaiting_observe_) throw NotSelected("select called twice without observe");
    int top = (prev_action_ < 0) ? tree_->root() : tree_->ancestor(prev_action_, prev_level_);
    const std::vector<int>* pool = &tree_->actions_under(top);
    double total = mass_[top];
    if (!(total > 0.0)) {
        // cannot occur while truncation is active; sample unconditioned
        ++zero_mass_fallbacks_;
        top = tree_->root();
        pool = &tree_->actions_under(top);
        total = mass_[top];
    }
    double u = rng.uniform01() * total;
    int picked = pool->back();
    double acc = 0.0;
    for (int a : *pool) {
        acc += p_[a];
        if (u < acc) {
            picked = a;
            break;
        }
    }
    cur_action_ = picked;
    awaiting_observe_ = true;
    return picked;
}

void SmbPolicy::observe(double loss, Rng& rng) {
    std::vector<int> sigma(tree_->depth());
    for (int& s : sigma) s = rng.sign();
    observe_with_sigma(loss, sigma);
}

void SmbPolicy::observe_with_sigma(double loss, const std::vector<int>& sigma) {
    if (!awaiting_observe_) throw NotSelected("observe called before select");
    if (loss < 0.0 || loss > 1.0) throw OutOfRangeLoss("loss outside [0,1]");
    if (static_cast<int>(sigma.size()) != tree_->depth())
        throw BadSpec("sigma vector must have one entry per level 0..H-1");

    last_ = compute_estimates(*tree_, p_, eta_, cur_action_, sigma, loss);

    if (!last_.truncated && last_.chosen_level > 0) {
        const int H = tree_->depth();
        int support_level = std::min(last_.chosen_level, H - 1);
        int top = tree_->ancestor(cur_action_, support_level);
        double sum_q = 0.0;
        std::vector<std::pair<int, double>> updated;
        for (int a : tree_->actions_under(top)) {
            int ring = 0;
            while (tree_->ancestor(a, ring) != tree_->ancestor(cur_action_, ring)) ++ring;
            double q = std::max(p_[a], kMassFloor) * std::exp(-eta_ * last_.tilde(ring));
            updated.emplace_back(a, q);
            sum_q += q;
        }
        if (last_.chosen_level < H) {
            // the estimator preserves the mass of each level-h_t subtree;
            // only the played one changes pointwise, so rescaling it to its
            // old mass pins the preserved marginals to machine precision
            double scale = mass_[top] / sum_q;
            for (auto [a, q] : updated) p_[a] = q * scale;
        } else {
            // h_t = H: only the total is preserved, normalize globally
            double z = 1.0 - mass_[top] + sum_q;
            for (auto [a, q] : updated) p_[a] = q;
            for (double& v : p_) v /= z;
        }
        refresh_masses();
    }

    prev_action_ = cur_action_;
    prev_level_ = last_.chosen_level;
    awaiting_observe_ = false;
    ++round_;
}

void SmbPolicy::set_probs(const std::vector<double>& p) {
    if (static_cast<int>(p.size()) != tree_->num_actions())
        throw BadSpec("set_probs: size mismatch");
    p_ = p;
    double s = 0.0;
    for (double v : p_) s += v;
    for (double& v : p_) v /= s;
    refresh_masses();
}

} // namespace moveband
