#include "moveband/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "moveband/errors.hpp"
#include "moveband/rng.hpp"

namespace moveband {

namespace {

class StochasticGapOracle final : public LossOracle {
public:
    StochasticGapOracle(int k, long long horizon, std::uint64_t seed, double mu_star, double gap)
        : k_(k), horizon_(horizon), seed_(seed), mu_star_(mu_star), gap_(gap) {
        if (k < 1 || horizon < 1) throw BadSpec("stochasticGap: bad k or horizon");
        if (mu_star < 0.0 || mu_star + gap > 1.0 || gap < 0.0)
            throw BadSpec("stochasticGap: means must stay in [0,1]");
        best_ = static_cast<int>(Rng::derive(seed, "stochastic_gap_best").uniform_below(k));
    }
    double loss(long long t, int arm) const override {
        double mu = (arm == best_) ? mu_star_ : mu_star_ + gap_;
        return Rng::hash01(seed_, static_cast<std::uint64_t>(t), static_cast<std::uint64_t>(arm)) < mu
                   ? 1.0
                   : 0.0;
    }
    int num_arms() const override { return k_; }
    long long horizon() const override { return horizon_; }
    nlohmann::ordered_json config() const override {
        return {{"kind", "stochasticGap"}, {"mu", mu_star_}, {"gap", gap_}, {"best", best_}};
    }

private:
    int k_;
    long long horizon_;
    std::uint64_t seed_;
    double mu_star_, gap_;
    int best_;
};

class DriftTargetOracle final : public LossOracle {
public:
    DriftTargetOracle(const MetricSpace& metric, long long horizon, std::uint64_t seed,
                      long long period, double step)
        : metric_(&metric), horizon_(horizon), period_(period), step_(step) {
        if (horizon < 1 || period < 1 || step < 0.0) throw BadSpec("driftTarget: bad parameters");
        Rng rng = Rng::derive(seed, "drift_target");
        int target = static_cast<int>(rng.uniform_below(metric.size()));
        path_.reserve(horizon);
        for (long long t = 1; t <= horizon; ++t) {
            if (t > 1 && (t - 1) % period_ == 0) {
                std::vector<int> candidates;
                for (int j = 0; j < metric.size(); ++j)
                    if (metric.dist(target, j) <= step_) candidates.push_back(j);
                target = candidates[rng.uniform_below(candidates.size())];
            }
            path_.push_back(target);
        }
    }
    double loss(long long t, int arm) const override {
        return std::min(1.0, metric_->dist(arm, path_[t - 1]));
    }
    int num_arms() const override { return metric_->size(); }
    long long horizon() const override { return horizon_; }
    nlohmann::ordered_json config() const override {
        return {{"kind", "driftTarget"}, {"period", period_}, {"step", step_}};
    }

private:
    const MetricSpace* metric_;
    long long horizon_;
    long long period_;
    double step_;
    std::vector<int> path_;
};

class EpochAdversaryOracle final : public LossOracle {
public:
    EpochAdversaryOracle(int k, long long horizon, std::uint64_t seed, long long epoch_len,
                         double base, double gap)
        : k_(k), horizon_(horizon), seed_(seed), epoch_len_(epoch_len), base_(base), gap_(gap) {
        if (k < 1 || horizon < 1 || epoch_len < 1) throw BadSpec("epochAdversary: bad parameters");
        if (base - gap < 0.0 || base > 1.0 || gap < 0.0)
            throw BadSpec("epochAdversary: losses must stay in [0,1]");
    }
    double loss(long long t, int arm) const override {
        std::uint64_t epoch = static_cast<std::uint64_t>((t - 1) / epoch_len_);
        int best = static_cast<int>(
            Rng::splitmix64(Rng::splitmix64(seed_ ^ 0x1905ull) ^ epoch) % static_cast<std::uint64_t>(k_));
        return (arm == best) ? base_ - gap_ : base_;
    }
    int num_arms() const override { return k_; }
    long long horizon() const override { return horizon_; }
    nlohmann::ordered_json config() const override {
        return {{"kind", "epochAdversary"}, {"L", epoch_len_}, {"base", base_}, {"gap", gap_}};
    }

private:
    int k_;
    long long horizon_;
    std::uint64_t seed_;
    long long epoch_len_;
    double base_, gap_;
};

class MatrixOracle final : public LossOracle {
public:
    explicit MatrixOracle(std::vector<std::vector<double>> losses) : losses_(std::move(losses)) {
        if (losses_.empty() || losses_.front().empty()) throw FileShapeMismatch("empty loss matrix");
        for (const auto& row : losses_) {
            if (row.size() != losses_.front().size())
                throw FileShapeMismatch("ragged loss matrix");
            for (double v : row)
                if (v < 0.0 || v > 1.0) throw OutOfRangeLoss("loss matrix entry outside [0,1]");
        }
    }
    double loss(long long t, int arm) const override {
        if (t < 1 || t > horizon()) throw HorizonMismatch("round outside loss matrix");
        return losses_[t - 1][arm];
    }
    int num_arms() const override { return static_cast<int>(losses_.front().size()); }
    long long horizon() const override { return static_cast<long long>(losses_.size()); }
    nlohmann::ordered_json config() const override { return {{"kind", "fromFile"}}; }

private:
    std::vector<std::vector<double>> losses_;
};

std::vector<std::pair<std::string, std::string>> parse_params(const std::string& args) {
    std::vector<std::pair<std::string, std::string>> out;
    std::stringstream ss(args);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        auto eq = tok.find('=');
        if (eq == std::string::npos)
            out.emplace_back(tok, "");
        else
            out.emplace_back(tok.substr(0, eq), tok.substr(eq + 1));
    }
    return out;
}

} // namespace

std::unique_ptr<LossOracle> make_stochastic_gap(int k, long long horizon, std::uint64_t seed,
                                                double mu_star, double gap) {
    return std::make_unique<StochasticGapOracle>(k, horizon, seed, mu_star, gap);
}

std::unique_ptr<LossOracle> make_drift_target(const MetricSpace& metric, long long horizon,
                                              std::uint64_t seed, long long period, double step) {
    return std::make_unique<DriftTargetOracle>(metric, horizon, seed, period, step);
}

std::unique_ptr<LossOracle> make_epoch_adversary(int k, long long horizon, std::uint64_t seed,
                                                 long long epoch_len, double base, double gap) {
    return std::make_unique<EpochAdversaryOracle>(k, horizon, seed, epoch_len, base, gap);
}

std::unique_ptr<LossOracle> make_from_matrix(std::vector<std::vector<double>> losses) {
    return std::make_unique<MatrixOracle>(std::move(losses));
}

std::unique_ptr<LossOracle> make_from_file(const std::string& path, int expected_arms) {
    std::ifstream in(path);
    if (!in) throw BadSpec("cannot open loss file: " + path);
    std::vector<std::vector<double>> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<double> row;
        std::stringstream ss(line);
        std::string tok;
        while (std::getline(ss, tok, ',')) row.push_back(std::stod(tok));
        rows.push_back(std::move(row));
    }
    auto oracle = make_from_matrix(std::move(rows));
    if (expected_arms >= 0 && oracle->num_arms() != expected_arms)
        throw FileShapeMismatch("loss matrix has " + std::to_string(oracle->num_arms()) +
                                " columns, expected " + std::to_string(expected_arms));
    return oracle;
}

std::unique_ptr<LossOracle> make_loss_oracle(const std::string& spec, std::uint64_t seed,
                                             const MetricSpace* metric, long long horizon) {
    auto colon = spec.find(':');
    std::string name = spec.substr(0, colon);
    std::string args = (colon == std::string::npos) ? "" : spec.substr(colon + 1);
    auto params = parse_params(args);
    auto get = [&](const std::string& key, const std::string& fallback) {
        for (auto& [k, v] : params)
            if (k == key) return v;
        return fallback;
    };
    if (!metric && name != "fromFile") throw BadSpec("loss oracle requires a metric");
    if (name == "stochasticGap") {
        return make_stochastic_gap(metric->size(), horizon, seed, std::stod(get("mu", "0.2")),
                                   std::stod(get("gap", "0.3")));
    }
    if (name == "driftTarget") {
        return make_drift_target(*metric, horizon, seed, std::stoll(get("period", "8")),
                                 std::stod(get("step", "0.25")));
    }
    if (name == "epochAdversary") {
        std::string raw = get("L", "auto");
        long long L = (raw == "auto")
                          ? static_cast<long long>(std::ceil(std::pow(static_cast<double>(horizon), 2.0 / 3.0)))
                          : std::stoll(raw);
        return make_epoch_adversary(metric->size(), horizon, seed, L, std::stod(get("base", "0.5")),
                                    std::stod(get("gap", "0.3")));
    }
    if (name == "fromFile") {
        return make_from_file(args, metric ? metric->size() : -1);
    }
    throw BadSpec("unknown adversary spec: " + spec);
}

ContinuousDriftOracle::ContinuousDriftOracle(int dims, long long horizon, std::uint64_t seed,
                                             double step)
    : dims_(dims), horizon_(horizon), seed_(seed), step_(step) {
    if (dims < 1 || horizon < 1 || step < 0.0) throw BadSpec("continuous drift: bad parameters");
    Rng rng = Rng::derive(seed, "continuous_drift");
    std::vector<double> x(dims);
    for (double& c : x) c = rng.uniform01();
    path_.reserve(horizon);
    for (long long t = 1; t <= horizon; ++t) {
        path_.push_back(x);
        for (double& c : x) {
            c += step_ * (2.0 * rng.uniform01() - 1.0);
            if (c < 0.0) c = -c; // reflect at the walls
            if (c > 1.0) c = 2.0 - c;
        }
    }
}

double ContinuousDriftOracle::loss(long long t, const std::vector<double>& x) const {
    if (t < 1 || t > horizon_) throw HorizonMismatch("round outside continuous oracle horizon");
    if (static_cast<int>(x.size()) != dims_) throw BadSpec("continuous drift: wrong dimension");
    double d = 0.0;
    for (int a = 0; a < dims_; ++a) d = std::max(d, std::abs(x[a] - path_[t - 1][a]));
    return std::min(1.0, d);
}

nlohmann::ordered_json ContinuousDriftOracle::config() const {
    return {{"kind", "continuousDrift"}, {"d", dims_}, {"step", step_}};
}

} // namespace moveband
