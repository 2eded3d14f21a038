#include <atomic>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "moveband/errors.hpp"
#include "moveband/exp3.hpp"
#include "moveband/harness.hpp"
#include "moveband/hst.hpp"
#include "moveband/metric.hpp"
#include "moveband/smb.hpp"

using nlohmann::ordered_json;
using namespace moveband;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitViolation = 1;
constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

MetricSpace load_metric_arg(const std::string& arg) {
    if (arg.find(".csv") != std::string::npos) return load_metric_csv(arg);
    return make_metric(arg);
}

std::optional<std::uint64_t> env_seed() {
    const char* s = std::getenv("MOVEBANDIT_SEED");
    if (!s || !*s) return std::nullopt;
    return std::strtoull(s, nullptr, 10);
}

struct RunConfig {
    std::string metric = "uniform:8";
    std::string algorithm = "smb";
    std::string adversary = "stochasticGap:mu=0.2,gap=0.3";
    long long horizon = 4096;
    std::optional<std::uint64_t> seed;
    std::optional<double> eta;
    double eta_multiplier = 1.0;
    std::string trace_out;
    std::string summary_out;
};

void apply_config_file(RunConfig& cfg, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw BadSpec("cannot open config file: " + path);
    ordered_json j = ordered_json::parse(in);
    if (j.contains("metric")) cfg.metric = j["metric"].get<std::string>();
    if (j.contains("algorithm")) cfg.algorithm = j["algorithm"].get<std::string>();
    if (j.contains("adversary")) cfg.adversary = j["adversary"].get<std::string>();
    if (j.contains("horizon")) cfg.horizon = j["horizon"].get<long long>();
    if (j.contains("seed")) cfg.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("eta")) cfg.eta = j["eta"].get<double>();
    if (j.contains("etaMultiplier")) cfg.eta_multiplier = j["etaMultiplier"].get<double>();
    if (j.contains("traceOut")) cfg.trace_out = j["traceOut"].get<std::string>();
    if (j.contains("summaryOut")) cfg.summary_out = j["summaryOut"].get<std::string>();
}

struct CellResult {
    double regret = 0.0;
    double total_move = 0.0;
    bool failed = false;
    std::string error;
};

CellResult run_cell(const RunConfig& cfg, long long horizon, std::uint64_t seed) {
    CellResult res;
    try {
        MetricSpace metric = load_metric_arg(cfg.metric);
        auto oracle =
            make_loss_oracle(cfg.adversary, Rng::split_seed(seed, "losses"), &metric, horizon);
        RunTrace trace;
        if (cfg.algorithm == "smb") {
            auto [tr, rep] = run_general(metric, *oracle, horizon, seed, cfg.eta,
                                         cfg.eta_multiplier);
            trace = std::move(tr);
        } else if (cfg.algorithm == "exp3") {
            int k = metric.size();
            double eta = cfg.eta ? *cfg.eta
                                 : std::sqrt(2.0 * std::log(std::max(k, 2)) /
                                             (static_cast<double>(k) * horizon));
            Exp3Policy policy(k, eta);
            trace = run(policy, *oracle, metric, horizon, seed);
        } else {
            throw BadSpec("unknown algorithm: " + cfg.algorithm);
        }
        res.regret = movement_regret(trace, *oracle, metric);
        res.total_move = trace.total_move();
    } catch (const std::exception& e) {
        res.failed = true;
        res.error = e.what();
    }
    return res;
}

int cmd_metric_analyze(const std::string& metric_arg, const std::string& csv_out) {
    MetricSpace m = load_metric_arg(metric_arg);
    CountMode mode = m.size() <= kExactModeMaxPoints ? CountMode::Exact : CountMode::Greedy;
    ComplexityReport rep = complexity_report(m, mode);

    ordered_json out;
    out["k"] = m.size();
    out["diameter"] = m.diameter();
    out["mode"] = mode == CountMode::Exact ? "exact" : "greedy";
    out["coverComplexity"] = rep.cover_complexity;
    out["packComplexity"] = rep.pack_complexity;
    out["breakpoints"] = rep.breakpoints;
    out["coverNums"] = rep.cover_nums;
    out["packNums"] = rep.pack_nums;
    std::cout << out.dump(2) << "\n";

    if (!csv_out.empty()) {
        std::ofstream f(csv_out);
        if (!f) throw BadSpec("cannot write " + csv_out);
        f << "eps,cover,pack\n";
        char buf[64];
        for (std::size_t i = 0; i < rep.breakpoints.size(); ++i) {
            std::snprintf(buf, sizeof(buf), "%.17g", rep.breakpoints[i]);
            f << buf << "," << rep.cover_nums[i] << "," << rep.pack_nums[i] << "\n";
        }
    }
    return kExitOk;
}

int cmd_hst_build(const std::string& metric_arg, const std::string& out) {
    MetricSpace m = load_metric_arg(metric_arg);
    HstTree t = build_hst(m);
    DominanceReport dom = verify_dominance(m, t);
    if (!dom.violations.empty()) throw DominanceViolation("construction failed dominance");
    if (!out.empty()) save_tree_json(t, out);
    TreeComplexity tc = tree_complexity(t);
    ordered_json j{{"depth", t.depth()}, {"k", t.num_actions()}, {"dim", tc.value},
                   {"maxRatio", dom.max_ratio}};
    std::cout << j.dump(2) << "\n";
    return kExitOk;
}

int cmd_hst_reshape(const std::string& tree_path, long long horizon, const std::string& out) {
    HstTree t = load_tree_json(tree_path);
    HstTree r = reshape_well_behaved(t, horizon);
    if (!out.empty()) save_tree_json(r, out);
    ordered_json j{{"depthIn", t.depth()},
                   {"depthOut", r.depth()},
                   {"dim", tree_complexity(r).value},
                   {"wellBehaved", check_conditions(r, horizon).well_behaved}};
    std::cout << j.dump(2) << "\n";
    return kExitOk;
}

int cmd_hst_check(const std::string& tree_path, long long horizon) {
    HstTree t = load_tree_json(tree_path);
    ConditionReport rep = check_conditions(t, horizon);
    ordered_json j{{"depth", t.depth()},     {"dim", rep.dim},   {"cond1", rep.cond1},
                   {"cond2a", rep.cond2a},   {"cond2b", rep.cond2b},
                   {"wellBehaved", rep.well_behaved}};
    std::cout << j.dump(2) << "\n";
    return kExitOk;
}

int cmd_run(const RunConfig& cfg) {
    if (!cfg.seed) throw BadSpec("no seed given (flag, config field, or MOVEBANDIT_SEED)");
    if (cfg.horizon < 1) throw BadSpec("horizon must be >= 1");
    std::uint64_t seed = *cfg.seed;

    MetricSpace metric = load_metric_arg(cfg.metric);
    auto oracle =
        make_loss_oracle(cfg.adversary, Rng::split_seed(seed, "losses"), &metric, cfg.horizon);

    ordered_json effective{{"metric", cfg.metric},
                           {"algorithm", cfg.algorithm},
                           {"adversary", cfg.adversary},
                           {"horizon", cfg.horizon}};
    if (cfg.eta) effective["eta"] = *cfg.eta;
    effective["etaMultiplier"] = cfg.eta_multiplier;

    RunTrace trace;
    std::optional<GeneralRunReport> report;
    if (cfg.algorithm == "smb") {
        auto [tr, rep] = run_general(metric, *oracle, cfg.horizon, seed, cfg.eta,
                                     cfg.eta_multiplier);
        trace = std::move(tr);
        report = std::move(rep);
    } else if (cfg.algorithm == "exp3") {
        int k = metric.size();
        double eta = cfg.eta ? *cfg.eta
                             : std::sqrt(2.0 * std::log(std::max(k, 2)) /
                                         (static_cast<double>(k) * cfg.horizon));
        Exp3Policy policy(k, eta);
        trace = run(policy, *oracle, metric, cfg.horizon, seed);
    } else {
        throw BadSpec("unknown algorithm: " + cfg.algorithm);
    }

    if (!cfg.trace_out.empty()) write_trace_csv(trace, metric.labels(), cfg.trace_out);
    ordered_json summary = make_summary(effective, seed, trace, *oracle, metric,
                                        report ? &*report : nullptr);
    if (!cfg.summary_out.empty()) {
        std::ofstream f(cfg.summary_out);
        if (!f) throw BadSpec("cannot write " + cfg.summary_out);
        f << summary.dump(2) << "\n";
    }
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", summary["movement_regret"].get<double>());
    std::cout << "movement_regret " << buf << "\n";
    return kExitOk;
}

int cmd_sweep(RunConfig cfg, std::vector<long long> horizons, std::vector<std::uint64_t> seeds,
              const std::string& out, int jobs, bool print_slope) {
    if (horizons.empty() || seeds.empty()) throw BadSpec("sweep needs --T and --seeds");
    if (!cfg.seed) cfg.seed = 0; // per-cell seeds come from --seeds

    struct Cell {
        long long horizon;
        std::uint64_t seed;
        CellResult result;
    };
    std::vector<Cell> cells;
    for (long long h : horizons)
        for (std::uint64_t s : seeds) cells.push_back({h, s, {}});

    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (;;) {
            std::size_t i = next.fetch_add(1);
            if (i >= cells.size()) return;
            cells[i].result = run_cell(cfg, cells[i].horizon, cells[i].seed);
        }
    };
    int n = std::max(1, std::min<int>(jobs, static_cast<int>(cells.size())));
    std::vector<std::thread> pool;
    for (int i = 0; i < n; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();

    std::ostream* os = &std::cout;
    std::ofstream file;
    if (!out.empty()) {
        file.open(out);
        if (!file) throw BadSpec("cannot write " + out);
        os = &file;
    }
    bool any_failed = false;
    char buf[64];
    *os << "T,seed,movement_regret,total_move,status\n";
    for (const auto& c : cells) {
        if (c.result.failed) {
            any_failed = true;
            *os << c.horizon << "," << c.seed << ",,,failed:" << c.result.error << "\n";
            continue;
        }
        *os << c.horizon << "," << c.seed << ",";
        std::snprintf(buf, sizeof(buf), "%.17g", c.result.regret);
        *os << buf << ",";
        std::snprintf(buf, sizeof(buf), "%.17g", c.result.total_move);
        *os << buf << ",ok\n";
    }

    if (print_slope && !any_failed) {
        std::vector<double> xs, ys;
        for (long long h : horizons) {
            double mean = 0.0;
            int cnt = 0;
            for (const auto& c : cells)
                if (c.horizon == h) {
                    mean += c.result.regret;
                    ++cnt;
                }
            mean /= cnt;
            if (mean > 0.0) {
                xs.push_back(static_cast<double>(h));
                ys.push_back(mean);
            }
        }
        if (xs.size() >= 2) {
            std::snprintf(buf, sizeof(buf), "%.6g", loglog_slope(xs, ys));
            std::cout << "slope " << buf << "\n";
        } else {
            std::cout << "slope undefined (need >= 2 positive mean-regret points)\n";
        }
    }
    return any_failed ? kExitRuntime : kExitOk;
}

// ---- verification suite -------------------------------------------------

struct CheckOutcome {
    bool passed = true;
    ordered_json details;
};

CheckOutcome verify_moments(std::uint64_t seed) {
    CheckOutcome out;
    int violations = 0;
    for (int rep = 0; rep < 50; ++rep) {
        std::uint64_t s = Rng::split_seed(seed, "moments", rep);
        int k = 2 + static_cast<int>(s % 15);
        MetricSpace m = make_random(k, s);
        HstTree t = build_hst(m);
        Rng rng = Rng::derive(s, "inst");
        std::vector<double> p(k), loss(k);
        double sum = 0.0;
        for (double& v : p) {
            v = 0.05 + rng.uniform01();
            sum += v;
        }
        for (double& v : p) v /= sum;
        for (double& l : loss) l = rng.uniform01();
        double eta = (rep % 2 == 0) ? 1e-4 : 1e-2;

        MomentsReport mr = enumerate_estimator_moments(t, p, eta, loss);
        for (int i = 0; i < k; ++i)
            if (mr.expected_tilde[i] > loss[i] + 1e-9) ++violations;
        if (mr.expected_p_tilde_sq > mr.second_moment_bound + 1e-9) ++violations;
        for (const auto& [node, w] : mr.importance_weights)
            if (std::abs(w - 1.0) > 1e-12) ++violations;
        if (mr.max_identity_gap > 1e-9) ++violations;
    }
    out.passed = violations == 0;
    out.details = {{"instances", 50}, {"violations", violations}};
    return out;
}

CheckOutcome verify_marginals(std::uint64_t seed) {
    CheckOutcome out;
    MetricSpace m = make_uniform(8);
    HstTree t = build_hst(m);
    for (int i = 0; i < 2; ++i) t = deepen(t); // depth 3
    SmbPolicy pol(t, default_eta(t.depth(), tree_complexity(t).value, 10000));
    Rng rng = Rng::derive(seed, "marginals");
    int checked = 0, bad = 0;
    for (int round = 0; round < 10000; ++round) {
        pol.select(rng);
        std::vector<double> before(t.num_nodes());
        for (int n = 0; n < t.num_nodes(); ++n) before[n] = pol.subtree_mass(n);
        pol.observe(rng.uniform01(), rng);
        const LevelEstimates& est = pol.last_estimates();
        if (est.truncated || est.chosen_level == 0) continue;
        ++checked;
        int level = std::min(est.chosen_level, t.depth());
        for (const auto& node : t.nodes())
            if (node.level == level && std::abs(pol.subtree_mass(node.id) - before[node.id]) > 1e-10)
                ++bad;
    }
    out.passed = bad == 0 && checked > 0;
    out.details = {{"roundsChecked", checked}, {"violations", bad}};
    return out;
}

CheckOutcome verify_movement(std::uint64_t seed, long long samples) {
    CheckOutcome out;
    MovementCheckReport rep = mc_movement_check(build_hst(make_grid1d(9)), seed, samples);
    out.passed = rep.levels_ok && rep.move_ok;
    out.details = {{"switchProb", rep.switch_prob},
                   {"bound", rep.bound},
                   {"meanTreeMove", rep.mean_tree_move},
                   {"moveBound", rep.move_bound},
                   {"samples", rep.samples}};
    return out;
}

CheckOutcome verify_dominance_suite(std::uint64_t seed, bool inject_fault) {
    CheckOutcome out;
    int bad_pairs = 0;
    double max_c = 0.0;
    for (int rep = 0; rep < 50; ++rep) {
        std::uint64_t s = Rng::split_seed(seed, "dominance", rep);
        int k = 2 + static_cast<int>(s % 31);
        MetricSpace m = make_random(k, s);
        HstTree t = build_hst(m);
        DominanceReport dr = verify_dominance(m, t);
        bad_pairs += static_cast<int>(dr.violations.size());
        double cc = covering_complexity(m, k <= kExactModeMaxPoints ? CountMode::Exact
                                                                    : CountMode::Greedy);
        max_c = std::max(max_c, tree_complexity(t).value / (cc * std::log(std::max(k, 2))));
    }
    for (int k : {2, 5, 8, 16}) {
        bad_pairs += static_cast<int>(verify_dominance(make_uniform(k), build_hst(make_uniform(k)))
                                          .violations.size());
        bad_pairs += static_cast<int>(verify_dominance(make_grid1d(k), build_hst(make_grid1d(k)))
                                          .violations.size());
    }
    if (inject_fault) {
        // a deliberately flattened tree must be caught
        MetricSpace m = make_uniform(2);
        HstTree flat(4,
                     {{0, 4, -1}, {1, 3, 0}, {2, 2, 1}, {3, 1, 2}, {4, 0, 3}, {5, 0, 3}},
                     {4, 5}, {"a0", "a1"});
        DominanceReport dr = verify_dominance(m, flat);
        if (dr.violations.empty())
            ++bad_pairs; // the checker itself is broken
        else {
            out.passed = false;
            out.details["injectedViolation"] = {{"pair", {dr.violations[0].first,
                                                          dr.violations[0].second}},
                                                {"ratio", dr.max_ratio}};
        }
    }
    if (bad_pairs > 0) out.passed = false;
    out.details["violatingPairs"] = bad_pairs;
    out.details["maxDimOverCcLogK"] = max_c;
    return out;
}

CheckOutcome verify_reshape(std::uint64_t seed) {
    CheckOutcome out;
    int bad = 0;
    for (int rep = 0; rep < 100; ++rep) {
        std::uint64_t s = Rng::split_seed(seed, "reshape", rep);
        int k = 2 + static_cast<int>(s % 15);
        HstTree t = build_hst(make_random(k, s));
        long long horizon = (rep % 2 == 0) ? 1000 : 1000000;
        HstTree r = reshape_well_behaved(t, horizon);
        if (!check_conditions(r, horizon).well_behaved) ++bad;
        if (std::abs(tree_complexity(r).value - tree_complexity(t).value) > 1e-12) ++bad;
        for (int i = 0; i < k; ++i)
            for (int j = 0; j < k; ++j)
                if (r.distance(i, j) < t.distance(i, j) - 1e-15) ++bad;
    }
    out.passed = bad == 0;
    out.details = {{"trees", 100}, {"violations", bad}};
    return out;
}

CheckOutcome verify_complexity(std::uint64_t seed) {
    CheckOutcome out;
    int bad = 0;
    for (int rep = 0; rep < 25; ++rep) {
        std::uint64_t s = Rng::split_seed(seed, "complexity", rep);
        int k = 3 + static_cast<int>(s % 10);
        MetricSpace m = make_random(k, s);
        ComplexityReport cr = complexity_report(m, CountMode::Exact);
        for (std::size_t b = 0; b < cr.breakpoints.size(); ++b) {
            if (cr.pack_nums[b] > cr.cover_nums[b]) ++bad;
            if (cr.cover_nums[b] > packing_number(m, cr.breakpoints[b] / 2, CountMode::Exact))
                ++bad;
        }
        if (cr.pack_complexity > cr.cover_complexity + 1e-12) ++bad;
        if (cr.cover_complexity > 2 * cr.pack_complexity + 1e-12) ++bad;
    }
    out.passed = bad == 0;
    out.details = {{"metrics", 25}, {"violations", bad}};
    return out;
}

int cmd_verify(const std::string& only, std::uint64_t seed, long long samples, bool inject_fault) {
    std::map<std::string, CheckOutcome> results;
    auto want = [&](const std::string& name) { return only.empty() || only == name; };

    if (want("moments")) results["moments"] = verify_moments(seed);
    if (want("marginals")) results["marginals"] = verify_marginals(seed);
    if (want("movement")) results["movement"] = verify_movement(seed, samples);
    if (want("dominance")) results["dominance"] = verify_dominance_suite(seed, inject_fault);
    if (want("reshape")) results["reshape"] = verify_reshape(seed);
    if (want("complexity")) results["complexity"] = verify_complexity(seed);
    if (results.empty()) throw BadSpec("unknown check name: " + only);

    ordered_json report;
    bool all_passed = true;
    for (const auto& [name, res] : results) {
        report[name] = {{"passed", res.passed}, {"details", res.details}};
        all_passed = all_passed && res.passed;
    }
    report["allPassed"] = all_passed;
    std::cout << report.dump(2) << "\n";
    return all_passed ? kExitOk : kExitViolation;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"slowly-moving bandit experiments over tree metrics"};
    app.require_subcommand(1);

    // metric analyze
    auto* metric_cmd = app.add_subcommand("metric", "metric-space analysis");
    metric_cmd->require_subcommand(1);
    auto* analyze = metric_cmd->add_subcommand("analyze", "covering/packing complexity report");
    std::string analyze_metric, analyze_csv;
    analyze->add_option("--spec", analyze_metric, "metric spec or .csv path");
    analyze->add_option("--file", analyze_metric, "metric csv file");
    analyze->add_option("--csv", analyze_csv, "write per-radius table to this csv");

    // hst build / reshape / check
    auto* hst_cmd = app.add_subcommand("hst", "tree construction and reshaping");
    hst_cmd->require_subcommand(1);
    auto* hbuild = hst_cmd->add_subcommand("build", "dominating tree from a metric");
    std::string hb_metric, hb_out;
    hbuild->add_option("--metric", hb_metric, "metric spec or .csv path")->required();
    hbuild->add_option("--out", hb_out, "output tree json");
    auto* hreshape = hst_cmd->add_subcommand("reshape", "reshape a tree for a horizon");
    std::string hr_tree, hr_out;
    long long hr_horizon = 0;
    hreshape->add_option("--tree", hr_tree, "tree json")->required();
    hreshape->add_option("--horizon", hr_horizon, "horizon T")->required();
    hreshape->add_option("--out", hr_out, "output tree json");
    auto* hcheck = hst_cmd->add_subcommand("check", "evaluate the balance conditions");
    std::string hc_tree;
    long long hc_horizon = 0;
    hcheck->add_option("--tree", hc_tree, "tree json")->required();
    hcheck->add_option("--horizon", hc_horizon, "horizon T")->required();

    // run
    auto* run_cmd = app.add_subcommand("run", "single experiment run");
    std::string run_config;
    RunConfig rc;
    std::uint64_t rc_seed = 0;
    double rc_eta = 0.0;
    run_cmd->add_option("--config", run_config, "json config file");
    auto* o_metric = run_cmd->add_option("--metric", rc.metric, "metric spec or .csv path");
    auto* o_algo = run_cmd->add_option("--algorithm", rc.algorithm, "smb | exp3");
    auto* o_adv = run_cmd->add_option("--adversary", rc.adversary, "loss oracle spec");
    auto* o_T = run_cmd->add_option("--horizon,-T", rc.horizon, "rounds");
    auto* o_seed = run_cmd->add_option("--seed", rc_seed, "root seed");
    auto* o_eta = run_cmd->add_option("--eta", rc_eta, "learning-rate override");
    auto* o_etam = run_cmd->add_option("--eta-multiplier", rc.eta_multiplier, "scale default eta");
    auto* o_trace = run_cmd->add_option("--trace-out", rc.trace_out, "trace csv path");
    auto* o_summary = run_cmd->add_option("--summary-out", rc.summary_out, "summary json path");

    // sweep
    auto* sweep_cmd = app.add_subcommand("sweep", "grid of runs over T and seeds");
    RunConfig sc;
    std::vector<long long> sw_T;
    std::vector<std::uint64_t> sw_seeds;
    std::string sw_out;
    int sw_jobs = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    bool sw_slope = false;
    double sc_eta = 0.0;
    sweep_cmd->add_option("--metric", sc.metric, "metric spec or .csv path");
    sweep_cmd->add_option("--algorithm", sc.algorithm, "smb | exp3");
    sweep_cmd->add_option("--adversary", sc.adversary, "loss oracle spec");
    sweep_cmd->add_option("--T", sw_T, "horizon grid")->delimiter(',');
    sweep_cmd->add_option("--seeds", sw_seeds, "seed list")->delimiter(',');
    sweep_cmd->add_option("--out", sw_out, "aggregate csv path (default stdout)");
    sweep_cmd->add_option("--jobs", sw_jobs, "parallel workers");
    auto* so_eta = sweep_cmd->add_option("--eta", sc_eta, "learning-rate override");
    sweep_cmd->add_option("--eta-multiplier", sc.eta_multiplier, "scale default eta");
    sweep_cmd->add_flag("--slope", sw_slope, "fit log-log slope of mean regret vs T");

    // verify
    auto* verify_cmd = app.add_subcommand("verify", "invariant suite");
    std::string v_only;
    std::uint64_t v_seed = 1;
    long long v_samples = 100000;
    bool v_fault = false;
    verify_cmd->add_option("--only", v_only,
                           "moments | marginals | movement | dominance | reshape | complexity");
    verify_cmd->add_option("--seed", v_seed, "suite seed");
    verify_cmd->add_option("--samples", v_samples, "monte carlo samples");
    verify_cmd->add_flag("--inject-fault", v_fault, "feed a known-bad tree to the checker");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (analyze->parsed()) {
            if (analyze_metric.empty()) throw BadSpec("metric analyze needs --spec or --file");
            return cmd_metric_analyze(analyze_metric, analyze_csv);
        }
        if (hbuild->parsed()) return cmd_hst_build(hb_metric, hb_out);
        if (hreshape->parsed()) return cmd_hst_reshape(hr_tree, hr_horizon, hr_out);
        if (hcheck->parsed()) return cmd_hst_check(hc_tree, hc_horizon);
        if (run_cmd->parsed()) {
            RunConfig cfg;
            if (!run_config.empty()) apply_config_file(cfg, run_config);
            // flags override config-file fields
            if (o_metric->count()) cfg.metric = rc.metric;
            if (o_algo->count()) cfg.algorithm = rc.algorithm;
            if (o_adv->count()) cfg.adversary = rc.adversary;
            if (o_T->count()) cfg.horizon = rc.horizon;
            if (o_seed->count()) cfg.seed = rc_seed;
            if (o_eta->count()) cfg.eta = rc_eta;
            if (o_etam->count()) cfg.eta_multiplier = rc.eta_multiplier;
            if (o_trace->count()) cfg.trace_out = rc.trace_out;
            if (o_summary->count()) cfg.summary_out = rc.summary_out;
            if (!cfg.seed) cfg.seed = env_seed();
            return cmd_run(cfg);
        }
        if (sweep_cmd->parsed()) {
            if (so_eta->count()) sc.eta = sc_eta;
            return cmd_sweep(sc, sw_T, sw_seeds, sw_out, sw_jobs, sw_slope);
        }
        if (verify_cmd->parsed()) return cmd_verify(v_only, v_seed, v_samples, v_fault);
    } catch (const BadSpec& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const AsymmetricMatrix& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const NonzeroDiagonal& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const TriangleViolation& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const EntryOutOfRange& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const BadTreeFile& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const FileShapeMismatch& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const DominanceViolation& e) {
        std::cerr << "invariant violation: " << e.what() << "\n";
        return kExitViolation;
    } catch (const std::exception& e) {
        std::cerr << "runtime error: " << e.what() << "\n";
        return kExitRuntime;
    }
    return kExitConfig;
}
