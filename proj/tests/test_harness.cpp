#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <vector>

#include "moveband/errors.hpp"
#include "moveband/exp3.hpp"
#include "moveband/harness.hpp"
#include "moveband/smb.hpp"
#include "test_util.hpp"

using namespace moveband;

TEST_CASE("movement regret worked values") {
    MetricSpace m = make_uniform(2);

    // zero losses, alternating arms at distance 1 over 4 rounds: 3 movements
    auto zero = make_from_matrix({{0, 0}, {0, 0}, {0, 0}, {0, 0}});
    RunTrace alt;
    alt.actions = {0, 1, 0, 1};
    alt.losses = {0, 0, 0, 0};
    alt.move_costs = {0, 1, 1, 1};
    CHECK(movement_regret(alt, *zero, m) == doctest::Approx(3.0));

    // constant equal losses, static play: regret 0
    auto flat = make_from_matrix({{0.5, 0.5}, {0.5, 0.5}, {0.5, 0.5}});
    RunTrace stay;
    stay.actions = {0, 0, 0};
    stay.losses = {0.5, 0.5, 0.5};
    stay.move_costs = {0, 0, 0};
    CHECK(movement_regret(stay, *flat, m) == doctest::Approx(0.0));

    // single arm: no movement, no gap to the comparator
    MetricSpace one = validate_metric({{0}}, {"p"});
    auto single = make_from_matrix({{0.3}, {0.7}});
    RunTrace tr;
    tr.actions = {0, 0};
    tr.losses = {0.3, 0.7};
    tr.move_costs = {0, 0};
    CHECK(movement_regret(tr, *single, one) == doctest::Approx(0.0));
}

TEST_CASE("run is deterministic and respects the bandit protocol") {
    MetricSpace m = make_uniform(4);
    auto oracle = make_stochastic_gap(4, 2000, 9);
    HstTree t1 = testutil::binary_tree(2);
    HstTree t2 = testutil::binary_tree(2);
    SmbPolicy p1(t1, 0.02);
    SmbPolicy p2(t2, 0.02);
    RunTrace a = run(p1, *oracle, m, 2000, 123);
    RunTrace b = run(p2, *oracle, m, 2000, 123);
    CHECK(a.actions == b.actions);
    CHECK(a.losses == b.losses);
    CHECK(a.move_costs == b.move_costs);
    CHECK(a.move_costs[0] == 0.0);
    for (std::size_t t = 0; t < a.losses.size(); ++t) {
        CHECK(a.losses[t] >= 0.0);
        CHECK(a.losses[t] <= 1.0);
        CHECK(a.losses[t] == oracle->loss(static_cast<long long>(t) + 1, a.actions[t]));
    }
}

TEST_CASE("stochastic gap oracle separates the best arm") {
    auto oracle = make_stochastic_gap(4, 20000, 3, 0.2, 0.3);
    std::vector<double> means(4, 0.0);
    for (long long t = 1; t <= 20000; ++t)
        for (int i = 0; i < 4; ++i) means[i] += oracle->loss(t, i) / 20000.0;
    int best = static_cast<int>(std::min_element(means.begin(), means.end()) - means.begin());
    CHECK(means[best] == doctest::Approx(0.2).epsilon(0.1));
    for (int i = 0; i < 4; ++i)
        if (i != best) CHECK(means[i] == doctest::Approx(0.5).epsilon(0.1));
}

TEST_CASE("drift target oracle is Lipschitz and hits a static target") {
    MetricSpace m = make_grid1d(5);
    auto oracle = make_drift_target(m, 500, 11, 8, 0.25);
    for (long long t = 1; t <= 500; ++t)
        for (int i = 0; i < 5; ++i)
            for (int j = 0; j < 5; ++j)
                CHECK(std::abs(oracle->loss(t, i) - oracle->loss(t, j)) <= m.dist(i, j) + 1e-12);

    // zero step freezes the target: some arm has loss 0 every round
    auto frozen = make_drift_target(m, 100, 11, 8, 0.0);
    int target = -1;
    for (int i = 0; i < 5; ++i)
        if (frozen->loss(1, i) == 0.0) target = i;
    REQUIRE(target >= 0);
    for (long long t = 1; t <= 100; ++t) CHECK(frozen->loss(t, target) == 0.0);
}

TEST_CASE("epoch adversary is piecewise constant with one cheap arm") {
    auto oracle = make_epoch_adversary(4, 1000, 5, 100, 0.5, 0.3);
    for (long long t = 1; t <= 1000; ++t) {
        int cheap = 0;
        for (int i = 0; i < 4; ++i) {
            double l = oracle->loss(t, i);
            CHECK((l == doctest::Approx(0.2) || l == doctest::Approx(0.5)));
            if (l < 0.35) ++cheap;
        }
        CHECK(cheap == 1);
        // constant within the epoch
        long long epoch_start = ((t - 1) / 100) * 100 + 1;
        for (int i = 0; i < 4; ++i) CHECK(oracle->loss(t, i) == oracle->loss(epoch_start, i));
    }
}

TEST_CASE("oracle spec parsing") {
    MetricSpace m = make_grid1d(5);
    auto drift = make_loss_oracle("driftTarget:period=4,step=0.5", 3, &m, 200);
    CHECK(drift->num_arms() == 5);
    CHECK(drift->horizon() == 200);

    auto epoch = make_loss_oracle("epochAdversary:L=auto,base=0.5,gap=0.3", 3, &m, 1000);
    CHECK(epoch->config()["L"].get<long long>() == 100); // ceil(1000^{2/3})

    CHECK_THROWS_AS(make_loss_oracle("bogus:1", 3, &m, 100), BadSpec);
    CHECK_THROWS_AS(make_loss_oracle("driftTarget:period=4", 3, nullptr, 100), BadSpec);
}

TEST_CASE("loss matrix files") {
    namespace fs = std::filesystem;
    fs::path dir = fs::temp_directory_path() / "moveband_harness_test";
    fs::create_directories(dir);
    fs::path file = dir / "losses.csv";
    {
        std::FILE* f = std::fopen(file.string().c_str(), "w");
        std::fputs("0.1,0.9\n0.2,0.8\n0.3,0.7\n", f);
        std::fclose(f);
    }
    auto oracle = make_from_file(file.string());
    CHECK(oracle->num_arms() == 2);
    CHECK(oracle->horizon() == 3);
    CHECK(oracle->loss(2, 1) == doctest::Approx(0.8));
    CHECK_THROWS_AS(make_from_file(file.string(), 4), FileShapeMismatch);
    fs::remove_all(dir);
}

TEST_CASE("enumeration oracle worked example") {
    HstTree t = testutil::star_tree(2);
    MomentsReport rep = enumerate_estimator_moments(t, {0.5, 0.5}, 0.01, {1.0, 0.0});
    CHECK(rep.truncation_prob == 0.0);
    CHECK(rep.expected_tilde[0] == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(rep.expected_tilde[1] == doctest::Approx(0.0));
    CHECK(rep.outcomes == 4);

    // eta so large every arm is truncated: all moments vanish
    MomentsReport zero = enumerate_estimator_moments(t, {0.5, 0.5}, 0.9, {1.0, 0.5});
    CHECK(zero.truncation_prob == doctest::Approx(1.0));
    CHECK(zero.expected_tilde[0] == 0.0);
    CHECK(zero.expected_p_tilde_sq == 0.0);
}

TEST_CASE("enumeration oracle lemma inequalities on random instances") {
    Rng gen(2024);
    for (int rep = 0; rep < 50; ++rep) {
        HstTree t = testutil::random_tree(gen, 4, 16);
        std::vector<double> p = testutil::random_probs(gen, t.num_actions());
        std::vector<double> loss(t.num_actions());
        for (double& l : loss) l = gen.uniform01();
        double eta = (rep % 2 == 0) ? 1e-4 : 1e-2;

        MomentsReport rep_out = enumerate_estimator_moments(t, p, eta, loss);
        CAPTURE(rep);
        for (int i = 0; i < t.num_actions(); ++i)
            CHECK(rep_out.expected_tilde[i] <= loss[i] + 1e-9);
        CHECK(rep_out.expected_p_tilde_sq <= rep_out.second_moment_bound + 1e-9);
        for (const auto& [node, w] : rep_out.importance_weights)
            CHECK(w == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(rep_out.max_identity_gap <= 1e-9);
        CHECK(rep_out.min_tilde >= -1.0 / eta - 1e-9);
    }
}

TEST_CASE("monte carlo movement check on the binary tree") {
    MovementCheckReport rep = mc_movement_check(testutil::binary_tree(3), 31, 20000);
    REQUIRE(rep.switch_prob.size() == 3);
    CHECK(rep.levels_ok);
    CHECK(rep.move_ok);
    for (std::size_t h = 0; h < rep.bound.size(); ++h)
        CHECK(rep.bound[h] == doctest::Approx(std::ldexp(1.0, -static_cast<int>(h) - 1)));
    CHECK(rep.move_bound == doctest::Approx(3.0 / 16.0));
}

TEST_CASE("run_general pipeline on a uniform metric") {
    MetricSpace m = make_uniform(8);
    auto oracle = make_stochastic_gap(8, 4096, 17);
    auto [trace, report] = run_general(m, *oracle, 4096, 17);
    CHECK(trace.rounds() == 4096);
    CHECK(report.dominance_held_on_switches);
    CHECK(report.dim == doctest::Approx(4.0)); // star over 8 leaves
    CHECK(report.eta == doctest::Approx(default_eta(report.depth, report.dim, 4096)));
    // trace records unscaled losses
    for (std::size_t t = 0; t < trace.losses.size(); ++t)
        CHECK(trace.losses[t] == oracle->loss(static_cast<long long>(t) + 1, trace.actions[t]));
    // movement stays near the tree bound
    double per_round = trace.total_move() / 4096.0;
    double h = report.depth;
    CHECK(per_round <= h * std::ldexp(1.0, -report.depth - 1) * 1.1);
}

TEST_CASE("run_general on a single point") {
    MetricSpace one = validate_metric({{0}}, {"p"});
    auto oracle = make_from_matrix({{0.4}, {0.6}});
    auto [trace, report] = run_general(one, *oracle, 2, 1);
    CHECK(trace.total_move() == 0.0);
    CHECK(movement_regret(trace, *oracle, one) == doctest::Approx(0.0));
}

TEST_CASE("discretization grid worked values") {
    auto c1 = discretization_centers(1, 0.1);
    REQUIRE(c1.size() == 3);
    CHECK(c1[0][0] == doctest::Approx(0.2));
    CHECK(c1[1][0] == doctest::Approx(0.6));
    CHECK(c1[2][0] == doctest::Approx(1.0));

    CHECK(discretization_centers(2, 0.1).size() == 9);
    CHECK(discretization_centers(1, 1.0).size() == 1);
}

TEST_CASE("continuous pipeline") {
    ContinuousDriftOracle oracle(1, 1000, 21);
    auto [trace, report, disc] = discretize_and_run(1, oracle, 1000, 21);
    CHECK(disc.eps == doctest::Approx(std::pow(1000.0, -1.0 / 3.0)));
    CHECK(disc.cover_size == 3);
    CHECK(trace.rounds() == 1000);
    CHECK(report.dominance_held_on_switches);

    ContinuousDriftOracle tiny(1, 1, 4);
    auto [t1, r1, d1] = discretize_and_run(1, tiny, 1, 4);
    CHECK(d1.cover_size == 1);
    CHECK(t1.rounds() == 1);
    CHECK(t1.total_loss() <= 1.0);

    ContinuousDriftOracle big(4, 10, 4);
    CHECK_THROWS_AS(discretize_and_run(4, big, 10, 4), DimensionUnsupported);
}

TEST_CASE("trace csv round-trip") {
    namespace fs = std::filesystem;
    fs::path dir = fs::temp_directory_path() / "moveband_trace_test";
    fs::create_directories(dir);
    fs::path file = dir / "trace.csv";

    MetricSpace m = make_uniform(3);
    auto oracle = make_stochastic_gap(3, 50, 2);
    Exp3Policy pol(3, 0.1);
    RunTrace trace = run(pol, *oracle, m, 50, 7);
    write_trace_csv(trace, m.labels(), file.string());
    RunTrace back = read_trace_csv(file.string(), m.labels());
    CHECK(back.actions == trace.actions);
    CHECK(back.losses == trace.losses);
    CHECK(back.move_costs == trace.move_costs);
    fs::remove_all(dir);
}

TEST_CASE("summary json carries the regret decomposition") {
    MetricSpace m = make_uniform(4);
    auto oracle = make_stochastic_gap(4, 200, 2);
    auto [trace, report] = run_general(m, *oracle, 200, 5);
    nlohmann::ordered_json cfg{{"metric", "uniform:4"}};
    nlohmann::ordered_json summary = make_summary(cfg, 5, trace, *oracle, m, &report);
    CHECK(summary["seed"].get<std::uint64_t>() == 5);
    CHECK(summary["total_loss"].get<double>() == doctest::Approx(trace.total_loss()));
    CHECK(summary["total_move"].get<double>() == doctest::Approx(trace.total_move()));
    CHECK(summary["movement_regret"].get<double>() ==
          doctest::Approx(movement_regret(trace, *oracle, m)));
    CHECK(summary["tree"]["H"].get<int>() == report.depth);
    CHECK(summary["tree"]["eta"].get<double>() == doctest::Approx(report.eta));
}

TEST_CASE("loglog slope recovers exact power laws") {
    std::vector<double> x{1024, 2048, 4096, 8192};
    std::vector<double> y;
    for (double v : x) y.push_back(3.0 * std::pow(v, 2.0 / 3.0));
    CHECK(loglog_slope(x, y) == doctest::Approx(2.0 / 3.0));
    CHECK_THROWS_AS(loglog_slope({1, 2}, {0, 1}), BadSpec);
}
