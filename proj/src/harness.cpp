#include "moveband/harness.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "moveband/errors.hpp"
#include "moveband/smb.hpp"

namespace moveband {

double RunTrace::total_loss() const { return std::accumulate(losses.begin(), losses.end(), 0.0); }
double RunTrace::total_move() const {
    return std::accumulate(move_costs.begin(), move_costs.end(), 0.0);
}

RunTrace run(BanditPolicy& policy, const LossOracle& oracle, const MetricSpace& metric,
             long long horizon, std::uint64_t seed) {
    if (policy.num_actions() != metric.size() || oracle.num_arms() != metric.size())
        throw ActionMismatch("policy, oracle and metric must agree on the action set");
    if (oracle.horizon() < horizon) throw HorizonMismatch("oracle horizon shorter than requested run");
    RunTrace trace;
    trace.seed = seed;
    trace.actions.reserve(horizon);
    Rng rng = Rng::derive(seed, "policy");
    int prev = -1;
    for (long long t = 1; t <= horizon; ++t) {
        int a = policy.select(rng);
        double loss = oracle.loss(t, a);
        policy.observe(loss, rng);
        trace.actions.push_back(a);
        trace.losses.push_back(loss);
        trace.move_costs.push_back(prev < 0 ? 0.0 : metric.dist(prev, a));
        prev = a;
    }
    return trace;
}

double comparator_loss(const LossOracle& oracle, long long horizon) {
    double best = INFINITY;
    for (int i = 0; i < oracle.num_arms(); ++i) {
        double total = 0.0;
        for (long long t = 1; t <= horizon; ++t) total += oracle.loss(t, i);
        best = std::min(best, total);
    }
    return best;
}

double movement_regret(const RunTrace& trace, const LossOracle& oracle, const MetricSpace& metric) {
    (void)metric;
    return trace.total_loss() + trace.total_move() - comparator_loss(oracle, trace.rounds());
}

std::pair<RunTrace, GeneralRunReport> run_general(const MetricSpace& metric,
                                                  const LossOracle& oracle, long long horizon,
                                                  std::uint64_t seed,
                                                  std::optional<double> eta_override,
                                                  double eta_multiplier) {
    if (oracle.num_arms() != metric.size())
        throw ActionMismatch("oracle and metric must agree on the action set");
    if (oracle.horizon() < horizon) throw HorizonMismatch("oracle horizon shorter than requested run");

    HstTree tree = reshape_well_behaved(build_hst(metric), horizon);
    double dim = tree_complexity(tree).value;
    double eta = eta_override ? *eta_override
                              : default_eta(tree.depth(), dim, horizon, eta_multiplier);
    GeneralRunReport report{tree, dim, eta, tree.depth(), true};

    SmbPolicy policy(report.tree, eta);
    RunTrace trace;
    trace.seed = seed;
    Rng rng = Rng::derive(seed, "policy");
    int prev = -1;
    for (long long t = 1; t <= horizon; ++t) {
        int a = policy.select(rng);
        double loss = oracle.loss(t, a);
        policy.observe(loss / 4.0, rng); // SMB plays the quarter-scaled losses
        trace.actions.push_back(a);
        trace.losses.push_back(loss);
        double move = prev < 0 ? 0.0 : metric.dist(prev, a);
        trace.move_costs.push_back(move);
        if (prev >= 0 && prev != a && move > 4.0 * report.tree.distance(prev, a))
            report.dominance_held_on_switches = false;
        prev = a;
    }
    return {std::move(trace), std::move(report)};
}

std::vector<std::vector<double>> discretization_centers(int dims, double eps) {
    if (dims < 1 || dims > 3) throw DimensionUnsupported("discretization supports d in 1..3");
    double spacing = 4.0 * eps;
    int per_axis = std::max(1, static_cast<int>(std::ceil(1.0 / spacing - 1e-12)));
    std::vector<double> axis(per_axis);
    for (int j = 0; j < per_axis; ++j) axis[j] = std::min((j + 0.5) * spacing, 1.0);
    std::vector<std::vector<double>> centers;
    int total = 1;
    for (int a = 0; a < dims; ++a) total *= per_axis;
    centers.reserve(total);
    for (int idx = 0; idx < total; ++idx) {
        std::vector<double> c(dims);
        int rem = idx;
        for (int a = 0; a < dims; ++a) {
            c[a] = axis[rem % per_axis];
            rem /= per_axis;
        }
        centers.push_back(std::move(c));
    }
    return centers;
}

std::tuple<RunTrace, GeneralRunReport, DiscretizationReport>
discretize_and_run(int dims, const ContinuousDriftOracle& oracle, long long horizon,
                   std::uint64_t seed, std::optional<double> eta_override) {
    if (oracle.dims() != dims) throw BadSpec("oracle dimension mismatch");
    double eps = std::pow(static_cast<double>(horizon), -1.0 / (dims + 2));
    auto centers = discretization_centers(dims, eps);
    const int m = static_cast<int>(centers.size());

    std::vector<std::vector<double>> dist(m, std::vector<double>(m, 0.0));
    std::vector<std::string> labels;
    for (int i = 0; i < m; ++i) {
        labels.push_back("c" + std::to_string(i));
        for (int j = 0; j < m; ++j) {
            double d = 0.0;
            for (int a = 0; a < dims; ++a) d = std::max(d, std::abs(centers[i][a] - centers[j][a]));
            dist[i][j] = d;
        }
    }
    DiscretizationReport disc{eps, m, centers, validate_metric(dist, labels)};

    std::vector<std::vector<double>> losses(horizon, std::vector<double>(m));
    for (long long t = 1; t <= horizon; ++t)
        for (int i = 0; i < m; ++i) losses[t - 1][i] = oracle.loss(t, centers[i]);
    auto finite_oracle = make_from_matrix(std::move(losses));

    auto [trace, report] = run_general(disc.metric, *finite_oracle, horizon, seed, eta_override);
    return {std::move(trace), std::move(report), std::move(disc)};
}

MomentsReport enumerate_estimator_moments(const HstTree& tree, const std::vector<double>& p,
                                          double eta, const std::vector<double>& loss) {
    const int k = tree.num_actions();
    const int H = tree.depth();
    if (static_cast<int>(p.size()) != k || static_cast<int>(loss.size()) != k)
        throw BadSpec("enumerate_estimator_moments: size mismatch");
    if (static_cast<long long>(k) << H > (1ll << 20))
        throw EnumerationTooLarge("k * 2^H exceeds the enumeration bound");

    // ring[i][j] = level of LCA(i, j)
    std::vector<std::vector<int>> ring(k, std::vector<int>(k, 0));
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j) {
            int h = 0;
            while (tree.ancestor(i, h) != tree.ancestor(j, h)) ++h;
            ring[i][j] = h;
        }

    MomentsReport rep;
    rep.expected_tilde.assign(k, 0.0);
    double dim = tree_complexity(tree).value;
    rep.second_moment_bound = 2.0 * H * std::ldexp(dim, H);
    std::vector<long double> acc_tilde(k, 0.0L);
    long double acc_sq = 0.0L, acc_trunc = 0.0L;
    const double sigma_prob = std::ldexp(1.0, -H);
    std::vector<int> sigma(H);

    for (int played = 0; played < k; ++played) {
        if (p[played] <= 0.0) continue;
        for (int bits = 0; bits < (1 << H); ++bits) {
            for (int h = 0; h < H; ++h) sigma[h] = (bits >> h) & 1 ? +1 : -1;
            auto est = compute_estimates(tree, p, eta, played, sigma, loss[played]);
            long double prob = static_cast<long double>(p[played]) * sigma_prob;
            if (est.truncated) {
                acc_trunc += prob;
                continue;
            }
            long double sq = 0.0L;
            for (int i = 0; i < k; ++i) {
                double tv = est.tilde(ring[played][i]);
                double tv2 = est.tilde_via_identity(ring[played][i]);
                rep.max_identity_gap = std::max(rep.max_identity_gap, std::abs(tv - tv2));
                rep.min_tilde = std::min(rep.min_tilde, tv);
                acc_tilde[i] += prob * tv;
                sq += static_cast<long double>(p[i]) * tv * tv;
            }
            acc_sq += prob * sq;
            ++rep.outcomes;
        }
    }
    for (int i = 0; i < k; ++i) rep.expected_tilde[i] = static_cast<double>(acc_tilde[i]);
    rep.expected_p_tilde_sq = static_cast<double>(acc_sq);
    rep.truncation_prob = static_cast<double>(acc_trunc);

    for (int v = 0; v < tree.num_nodes(); ++v) {
        long double mass = 0.0L;
        for (int a : tree.actions_under(v)) mass += p[a];
        if (mass <= 0.0L) continue;
        long double acc = 0.0L; // sum over i_t in A of p(i_t)/p(A)
        for (int a : tree.actions_under(v)) acc += static_cast<long double>(p[a]) / mass;
        rep.importance_weights.emplace_back(v, static_cast<double>(acc));
    }
    return rep;
}

MovementCheckReport mc_movement_check(const HstTree& tree, std::uint64_t seed, long long samples,
                                      std::optional<double> eta) {
    const int H = tree.depth();
    MovementCheckReport rep;
    rep.samples = samples;
    double dim = tree_complexity(tree).value;
    double use_eta = eta ? *eta : default_eta(H, dim, samples);
    SmbPolicy policy(tree, use_eta);
    Rng rng = Rng::derive(seed, "mc_movement");
    std::vector<long long> switches(H, 0);
    double move_sum = 0.0, move_sq = 0.0;
    int prev = -1;
    for (long long t = 1; t <= samples + 1; ++t) {
        int a = policy.select(rng);
        double loss = Rng::hash01(seed ^ 0xfeedull, static_cast<std::uint64_t>(t),
                                  static_cast<std::uint64_t>(a));
        policy.observe(loss, rng);
        if (prev >= 0) {
            for (int h = 0; h < H; ++h)
                if (tree.ancestor(a, h) != tree.ancestor(prev, h)) ++switches[h];
            double mv = tree.distance(prev, a);
            move_sum += mv;
            move_sq += mv * mv;
        }
        prev = a;
    }
    const double n = static_cast<double>(samples);
    for (int h = 0; h < H; ++h) {
        double b = std::ldexp(1.0, -(h + 1));
        double phat = switches[h] / n;
        double margin = 3.0 * std::sqrt(b * (1.0 - b) / n);
        rep.switch_prob.push_back(phat);
        rep.bound.push_back(b);
        rep.margin.push_back(margin);
        if (phat > b + margin) rep.levels_ok = false;
    }
    rep.mean_tree_move = move_sum / n;
    rep.move_bound = H * std::ldexp(1.0, -(H + 1));
    double var = std::max(0.0, move_sq / n - rep.mean_tree_move * rep.mean_tree_move);
    rep.move_margin = 3.0 * std::sqrt(var / n);
    rep.move_ok = rep.mean_tree_move <= rep.move_bound + rep.move_margin;
    return rep;
}

void write_trace_csv(const RunTrace& trace, const std::vector<std::string>& labels,
                     const std::string& path) {
    std::ofstream out(path);
    if (!out) throw BadSpec("cannot write trace file: " + path);
    out << "t,action,loss,move_cost\n";
    char buf[64];
    for (long long t = 1; t <= trace.rounds(); ++t) {
        std::snprintf(buf, sizeof(buf), "%.17g,%.17g", trace.losses[t - 1],
                      trace.move_costs[t - 1]);
        out << t << "," << labels[trace.actions[t - 1]] << "," << buf << "\n";
    }
}

RunTrace read_trace_csv(const std::string& path, const std::vector<std::string>& labels) {
    std::ifstream in(path);
    if (!in) throw BadSpec("cannot open trace file: " + path);
    std::string line;
    std::getline(in, line);
    if (line != "t,action,loss,move_cost") throw FileShapeMismatch("unexpected trace header");
    RunTrace trace;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string t_str, action, loss_str, move_str;
        std::getline(ss, t_str, ',');
        std::getline(ss, action, ',');
        std::getline(ss, loss_str, ',');
        std::getline(ss, move_str, ',');
        auto it = std::find(labels.begin(), labels.end(), action);
        if (it == labels.end()) throw FileShapeMismatch("unknown action label in trace: " + action);
        trace.actions.push_back(static_cast<int>(it - labels.begin()));
        trace.losses.push_back(std::stod(loss_str));
        trace.move_costs.push_back(std::stod(move_str));
    }
    return trace;
}

nlohmann::ordered_json make_summary(const nlohmann::ordered_json& config, std::uint64_t seed,
                                    const RunTrace& trace, const LossOracle& oracle,
                                    const MetricSpace& metric,
                                    const GeneralRunReport* tree_report) {
    nlohmann::ordered_json j;
    j["config"] = config;
    j["seed"] = seed;
    j["total_loss"] = trace.total_loss();
    j["total_move"] = trace.total_move();
    j["comparator_loss"] = comparator_loss(oracle, trace.rounds());
    j["movement_regret"] = movement_regret(trace, oracle, metric);
    if (tree_report) {
        j["tree"] = {{"H", tree_report->depth},
                     {"dim", tree_report->dim},
                     {"eta", tree_report->eta}};
    } else {
        j["tree"] = nullptr;
    }
    return j;
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) throw BadSpec("loglog_slope needs >= 2 points");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (x[i] <= 0.0 || y[i] <= 0.0) throw BadSpec("loglog_slope needs positive data");
        double lx = std::log(x[i]), ly = std::log(y[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

} // namespace moveband
