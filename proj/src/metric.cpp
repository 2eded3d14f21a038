#include "moveband/metric.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>

#include "moveband/errors.hpp"
#include "moveband/rng.hpp"

namespace moveband {

MetricSpace::MetricSpace(std::vector<std::string> labels, std::vector<double> dist_flat)
    : k_(static_cast<int>(labels.size())), labels_(std::move(labels)), dist_(std::move(dist_flat)) {
    min_pos_dist_ = 2.0;
    for (int i = 0; i < k_; ++i) {
        for (int j = i + 1; j < k_; ++j) {
            double d = dist(i, j);
            diameter_ = std::max(diameter_, d);
            if (d > 0.0) min_pos_dist_ = std::min(min_pos_dist_, d);
            distinct_.push_back(d);
        }
    }
    if (min_pos_dist_ > 1.5) min_pos_dist_ = 0.0;
    std::sort(distinct_.begin(), distinct_.end());
    distinct_.erase(std::unique(distinct_.begin(), distinct_.end(),
                                [](double a, double b) { return std::abs(a - b) < 1e-12; }),
                    distinct_.end());
    while (!distinct_.empty() && distinct_.front() <= 0.0) distinct_.erase(distinct_.begin());
}

MetricSpace validate_metric(const std::vector<std::vector<double>>& matrix,
                            std::vector<std::string> labels, bool normalize) {
    const int k = static_cast<int>(matrix.size());
    if (k == 0) throw BadSpec("empty distance matrix");
    for (const auto& row : matrix) {
        if (static_cast<int>(row.size()) != k) throw BadSpec("distance matrix is not square");
    }
    if (labels.empty()) {
        for (int i = 0; i < k; ++i) labels.push_back("p" + std::to_string(i));
    }
    if (static_cast<int>(labels.size()) != k) throw BadSpec("label count does not match matrix size");

    std::vector<double> flat(static_cast<std::size_t>(k) * k);
    double diam = 0.0;
    for (int i = 0; i < k; ++i) {
        for (int j = 0; j < k; ++j) {
            double d = matrix[i][j];
            if (!std::isfinite(d)) throw EntryOutOfRange("non-finite entry at (" + std::to_string(i) + "," + std::to_string(j) + ")");
            diam = std::max(diam, d);
        }
    }
    double scale = (normalize && diam > 0.0) ? 1.0 / diam : 1.0;
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j) flat[static_cast<std::size_t>(i) * k + j] = matrix[i][j] * scale;

    auto at = [&](int i, int j) { return flat[static_cast<std::size_t>(i) * k + j]; };
    for (int i = 0; i < k; ++i) {
        if (at(i, i) != 0.0)
            throw NonzeroDiagonal("dist(" + std::to_string(i) + "," + std::to_string(i) + ") = " +
                                  std::to_string(at(i, i)));
        for (int j = 0; j < k; ++j) {
            double d = at(i, j);
            if (d < 0.0 || d > 1.0 + 1e-12)
                throw EntryOutOfRange("dist(" + std::to_string(i) + "," + std::to_string(j) +
                                      ") = " + std::to_string(d) + " outside [0,1]");
            if (std::abs(d - at(j, i)) > 1e-12)
                throw AsymmetricMatrix("dist(" + std::to_string(i) + "," + std::to_string(j) +
                                       ") != dist(" + std::to_string(j) + "," + std::to_string(i) + ")");
        }
    }
    for (int i = 0; i < k; ++i) {
        for (int j = 0; j < k; ++j) {
            for (int l = 0; l < k; ++l) {
                if (at(i, j) > at(i, l) + at(l, j) + kTriangleTol) {
                    std::ostringstream os;
                    os << "triangle violation on (" << i << "," << j << ") via " << l << ": "
                       << at(i, j) << " > " << at(i, l) + at(l, j);
                    throw TriangleViolation(os.str());
                }
            }
        }
    }
    return MetricSpace(std::move(labels), std::move(flat));
}

namespace {

std::vector<std::uint32_t> ball_masks(const MetricSpace& m, double eps) {
    const int k = m.size();
    std::vector<std::uint32_t> balls(k, 0);
    for (int c = 0; c < k; ++c)
        for (int j = 0; j < k; ++j)
            if (m.dist(c, j) <= eps) balls[c] |= 1u << j;
    return balls;
}

int greedy_cover(const MetricSpace& m, double eps) {
    const int k = m.size();
    std::vector<char> covered(k, 0);
    int num_covered = 0, count = 0;
    while (num_covered < k) {
        int best_c = -1, best_gain = 0;
        for (int c = 0; c < k; ++c) {
            int gain = 0;
            for (int j = 0; j < k; ++j)
                if (!covered[j] && m.dist(c, j) <= eps) ++gain;
            if (gain > best_gain) {
                best_gain = gain;
                best_c = c;
            }
        }
        for (int j = 0; j < k; ++j)
            if (!covered[j] && m.dist(best_c, j) <= eps) {
                covered[j] = 1;
                ++num_covered;
            }
        ++count;
    }
    return count;
}

void exact_cover_rec(const std::vector<std::uint32_t>& balls, std::uint32_t full,
                     std::uint32_t covered, int count, int& best) {
    if (covered == full) {
        best = std::min(best, count);
        return;
    }
    if (count + 1 >= best) return;
    // branch on the uncovered point with the fewest candidate balls
    int k = static_cast<int>(balls.size());
    int pivot = -1, pivot_options = k + 1;
    for (int j = 0; j < k; ++j) {
        if (covered & (1u << j)) continue;
        int options = 0;
        for (int c = 0; c < k; ++c)
            if (balls[c] & (1u << j)) ++options;
        if (options < pivot_options) {
            pivot_options = options;
            pivot = j;
        }
    }
    for (int c = 0; c < k; ++c)
        if (balls[c] & (1u << pivot)) exact_cover_rec(balls, full, covered | balls[c], count + 1, best);
}

void max_clique_rec(const std::vector<std::uint32_t>& adj, std::uint32_t cand, int size, int& best) {
    best = std::max(best, size);
    while (cand) {
        if (size + std::popcount(cand) <= best) return;
        int v = std::countr_zero(cand);
        cand &= cand - 1;
        max_clique_rec(adj, cand & adj[v], size + 1, best);
    }
}

} // namespace

int covering_number(const MetricSpace& m, double eps, CountMode mode) {
    if (eps <= 0.0) throw BadSpec("covering_number requires eps > 0");
    if (m.size() == 1) return 1;
    if (eps >= m.diameter()) return 1;
    if (mode == CountMode::Greedy) return greedy_cover(m, eps);
    if (m.size() > kExactModeMaxPoints)
        throw ExactTooLarge("exact covering limited to k <= " + std::to_string(kExactModeMaxPoints));
    auto balls = ball_masks(m, eps);
    std::uint32_t full = (m.size() == 32) ? ~0u : ((1u << m.size()) - 1);
    int best = greedy_cover(m, eps);
    exact_cover_rec(balls, full, 0, 0, best);
    return best;
}

int packing_number(const MetricSpace& m, double eps, CountMode mode) {
    if (eps <= 0.0) throw BadSpec("packing_number requires eps > 0");
    const int k = m.size();
    if (k == 1) return 1;
    if (mode == CountMode::Greedy) {
        // maximal packing, scanning in index order
        std::vector<int> chosen;
        for (int c = 0; c < k; ++c) {
            bool ok = true;
            for (int p : chosen) {
                for (int x = 0; x < k && ok; ++x)
                    if (m.dist(c, x) <= eps && m.dist(p, x) <= eps) ok = false;
                if (!ok) break;
            }
            if (ok) chosen.push_back(c);
        }
        return static_cast<int>(chosen.size());
    }
    if (k > kExactModeMaxPoints)
        throw ExactTooLarge("exact packing limited to k <= " + std::to_string(kExactModeMaxPoints));
    auto balls = ball_masks(m, eps);
    std::vector<std::uint32_t> adj(k, 0); // disjoint-ball compatibility graph
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j)
            if (i != j && (balls[i] & balls[j]) == 0) adj[i] |= 1u << j;
    std::uint32_t all = (k == 32) ? ~0u : ((1u << k) - 1);
    int best = 0;
    max_clique_rec(adj, all, 0, best);
    return best;
}

std::vector<double> complexity_breakpoints(const MetricSpace& m) {
    std::vector<double> bp = m.distinct_dists();
    double min_pos = m.min_positive_dist();
    if (min_pos > 0.0) {
        for (double r = 0.5;; r *= 0.5) {
            bp.push_back(r);
            if (r < min_pos) break;
        }
    }
    std::sort(bp.begin(), bp.end());
    bp.erase(std::unique(bp.begin(), bp.end(),
                         [](double a, double b) { return std::abs(a - b) < 1e-12; }),
             bp.end());
    return bp;
}

ComplexityReport complexity_report(const MetricSpace& m, CountMode mode) {
    ComplexityReport rep;
    rep.mode = mode;
    rep.breakpoints = complexity_breakpoints(m);
    const int k = m.size();
    if (k == 1) {
        // single point: N^c = N^p = 1, sup of eps * 1 as eps -> 1
        rep.cover_complexity = 1.0;
        rep.pack_complexity = 1.0;
        return rep;
    }
    for (double eps : rep.breakpoints) {
        rep.cover_nums.push_back(covering_number(m, eps, mode));
        rep.pack_nums.push_back(packing_number(m, eps, mode));
    }
    // interval rule: on [a,b) the counting function is constant at its value
    // at a, so the per-interval supremum of eps*N is b*N_a; the first interval
    // (0, bp[0]) has N = k, and the last is capped at eps -> 1.
    auto interval_sup = [&](const std::vector<int>& nums) {
        double sup = 0.0;
        double first_right = std::min(rep.breakpoints.front(), 1.0);
        sup = std::max(sup, first_right * k);
        for (std::size_t i = 0; i < rep.breakpoints.size(); ++i) {
            double a = rep.breakpoints[i];
            if (a >= 1.0) break;
            double b = (i + 1 < rep.breakpoints.size()) ? std::min(rep.breakpoints[i + 1], 1.0) : 1.0;
            sup = std::max(sup, b * nums[i]);
        }
        return sup;
    };
    rep.cover_complexity = interval_sup(rep.cover_nums);
    rep.pack_complexity = interval_sup(rep.pack_nums);
    return rep;
}

double covering_complexity(const MetricSpace& m, CountMode mode) {
    return complexity_report(m, mode).cover_complexity;
}

double packing_complexity(const MetricSpace& m, CountMode mode) {
    return complexity_report(m, mode).pack_complexity;
}

MetricSpace make_uniform(int k) {
    if (k < 1) throw BadSpec("uniform(k) requires k >= 1");
    std::vector<std::vector<double>> d(k, std::vector<double>(k, 1.0));
    std::vector<std::string> labels;
    for (int i = 0; i < k; ++i) {
        d[i][i] = 0.0;
        labels.push_back("a" + std::to_string(i));
    }
    return validate_metric(d, std::move(labels));
}

MetricSpace make_grid1d(int k) {
    if (k < 1) throw BadSpec("grid1d(k) requires k >= 1");
    std::vector<double> xs(k, 0.0);
    for (int i = 0; i < k; ++i) xs[i] = (k == 1) ? 0.0 : static_cast<double>(i) / (k - 1);
    std::vector<std::vector<double>> d(k, std::vector<double>(k, 0.0));
    std::vector<std::string> labels;
    for (int i = 0; i < k; ++i) {
        for (int j = 0; j < k; ++j) d[i][j] = std::abs(xs[i] - xs[j]);
        std::ostringstream os;
        os << "x" << xs[i];
        labels.push_back(os.str());
    }
    return validate_metric(d, std::move(labels));
}

MetricSpace make_grid_linf(int dims, int per_axis) {
    if (dims < 1 || per_axis < 2) throw BadSpec("gridLinf requires d >= 1 and m >= 2");
    int k = 1;
    for (int i = 0; i < dims; ++i) {
        k *= per_axis;
        if (k > 4096) throw BadSpec("gridLinf too large");
    }
    std::vector<std::vector<double>> pts(k, std::vector<double>(dims));
    std::vector<std::string> labels;
    for (int idx = 0; idx < k; ++idx) {
        int rem = idx;
        std::ostringstream os;
        for (int a = 0; a < dims; ++a) {
            int coord = rem % per_axis;
            rem /= per_axis;
            pts[idx][a] = static_cast<double>(coord) / (per_axis - 1);
            os << (a ? "_" : "g") << coord;
        }
        labels.push_back(os.str());
    }
    std::vector<std::vector<double>> d(k, std::vector<double>(k, 0.0));
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j) {
            double md = 0.0;
            for (int a = 0; a < dims; ++a) md = std::max(md, std::abs(pts[i][a] - pts[j][a]));
            d[i][j] = md;
        }
    return validate_metric(d, std::move(labels));
}

MetricSpace make_random(int k, std::uint64_t seed) {
    if (k < 1) throw BadSpec("random(k) requires k >= 1");
    Rng rng = Rng::derive(seed, "make_random");
    std::vector<std::vector<double>> d(k, std::vector<double>(k, 0.0));
    for (int i = 0; i < k; ++i)
        for (int j = i + 1; j < k; ++j) d[i][j] = d[j][i] = 0.1 + 0.9 * rng.uniform01();
    // all-pairs-shortest-path closure restores the triangle inequality
    for (int l = 0; l < k; ++l)
        for (int i = 0; i < k; ++i)
            for (int j = 0; j < k; ++j) d[i][j] = std::min(d[i][j], d[i][l] + d[l][j]);
    std::vector<std::string> labels;
    for (int i = 0; i < k; ++i) labels.push_back("r" + std::to_string(i));
    return validate_metric(d, std::move(labels));
}

MetricSpace make_metric(const std::string& spec) {
    auto colon = spec.find(':');
    std::string name = spec.substr(0, colon);
    std::string args = (colon == std::string::npos) ? "" : spec.substr(colon + 1);
    auto parse_ints = [&]() {
        std::vector<long long> vals;
        std::stringstream ss(args);
        std::string tok;
        while (std::getline(ss, tok, ',')) vals.push_back(std::stoll(tok));
        return vals;
    };
    if (name == "uniform") {
        auto v = parse_ints();
        if (v.size() != 1) throw BadSpec("uniform:k");
        return make_uniform(static_cast<int>(v[0]));
    }
    if (name == "grid1d") {
        auto v = parse_ints();
        if (v.size() != 1) throw BadSpec("grid1d:k");
        return make_grid1d(static_cast<int>(v[0]));
    }
    if (name == "gridlinf") {
        auto v = parse_ints();
        if (v.size() != 2) throw BadSpec("gridlinf:d,m");
        return make_grid_linf(static_cast<int>(v[0]), static_cast<int>(v[1]));
    }
    if (name == "random") {
        auto v = parse_ints();
        if (v.size() != 2) throw BadSpec("random:k,seed");
        return make_random(static_cast<int>(v[0]), static_cast<std::uint64_t>(v[1]));
    }
    throw BadSpec("unknown metric spec: " + spec);
}

MetricSpace load_metric_csv(const std::string& path, bool normalize) {
    std::ifstream in(path);
    if (!in) throw BadSpec("cannot open metric file: " + path);
    std::string line;
    if (!std::getline(in, line)) throw BadSpec("empty metric file: " + path);
    std::vector<std::string> labels;
    {
        std::stringstream ss(line);
        std::string tok;
        while (std::getline(ss, tok, ',')) labels.push_back(tok);
    }
    std::vector<std::vector<double>> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<double> row;
        std::stringstream ss(line);
        std::string tok;
        while (std::getline(ss, tok, ',')) row.push_back(std::stod(tok));
        rows.push_back(std::move(row));
    }
    if (rows.size() != labels.size()) throw BadSpec("metric CSV row count does not match label count");
    return validate_metric(rows, std::move(labels), normalize);
}

void save_metric_csv(const MetricSpace& m, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw BadSpec("cannot write metric file: " + path);
    for (int i = 0; i < m.size(); ++i) out << (i ? "," : "") << m.labels()[i];
    out << "\n";
    char buf[32];
    for (int i = 0; i < m.size(); ++i) {
        for (int j = 0; j < m.size(); ++j) {
            std::snprintf(buf, sizeof(buf), "%.17g", m.dist(i, j));
            out << (j ? "," : "") << buf;
        }
        out << "\n";
    }
}

} // namespace moveband
