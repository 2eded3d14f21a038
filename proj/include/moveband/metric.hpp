#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace moveband {

// A finite metric space: k labeled points with a validated distance matrix,
// diameter <= 1. Immutable after construction; all operations are pure.
class MetricSpace {
public:
    MetricSpace(std::vector<std::string> labels, std::vector<double> dist_flat);

    int size() const { return k_; }
    const std::vector<std::string>& labels() const { return labels_; }
    double dist(int i, int j) const { return dist_[static_cast<std::size_t>(i) * k_ + j]; }
    double diameter() const { return diameter_; }
    // minimum positive pairwise distance; 0 if k == 1
    double min_positive_dist() const { return min_pos_dist_; }
    // sorted distinct positive pairwise distances
    const std::vector<double>& distinct_dists() const { return distinct_; }

private:
    int k_;
    std::vector<std::string> labels_;
    std::vector<double> dist_;
    double diameter_ = 0.0;
    double min_pos_dist_ = 0.0;
    std::vector<double> distinct_;
};

enum class CountMode { Exact, Greedy };

struct ComplexityReport {
    std::vector<double> breakpoints; // sorted candidate radii
    std::vector<int> cover_nums;     // N^c at each breakpoint
    std::vector<int> pack_nums;      // N^p at each breakpoint
    double cover_complexity = 0.0;
    double pack_complexity = 0.0;
    CountMode mode = CountMode::Exact;
};

inline constexpr int kExactModeMaxPoints = 20;
inline constexpr double kTriangleTol = 1e-9;

// Validates a k x k matrix (symmetry, zero diagonal, triangle inequality up
// to 1e-9, entries in [0,1]). If normalize is set, divides by the diameter
// first. Throws AsymmetricMatrix / NonzeroDiagonal / TriangleViolation /
// EntryOutOfRange with a witness in the message.
MetricSpace validate_metric(const std::vector<std::vector<double>>& matrix,
                            std::vector<std::string> labels, bool normalize = false);

// Minimum number of closed eps-balls (centers restricted to points of the
// space) covering all points. Exact mode is branch-and-bound, k <= 20.
int covering_number(const MetricSpace& m, double eps, CountMode mode);

// Maximum number of points whose closed eps-balls are pairwise disjoint.
// Exact mode is branch-and-bound max clique, k <= 20; greedy returns a
// maximal (not maximum) packing.
int packing_number(const MetricSpace& m, double eps, CountMode mode);

// Candidate radii where the counting functions can jump: all distinct
// positive pairwise distances plus dyadic values 2^-1 ... down to below the
// minimum positive distance.
std::vector<double> complexity_breakpoints(const MetricSpace& m);

// Per-radius counts plus sup over eps in (0,1) of eps * N_eps, evaluated by
// the step-function interval rule: on each interval of constancy [a,b) the
// supremum is b * N_a, with the last interval capped at eps -> 1.
ComplexityReport complexity_report(const MetricSpace& m, CountMode mode);

double covering_complexity(const MetricSpace& m, CountMode mode = CountMode::Exact);
double packing_complexity(const MetricSpace& m, CountMode mode = CountMode::Exact);

// Metric families: uniform(k), grid1d(k), gridLinf(d,m), random(k,seed).
MetricSpace make_uniform(int k);
MetricSpace make_grid1d(int k);
MetricSpace make_grid_linf(int dims, int per_axis);
MetricSpace make_random(int k, std::uint64_t seed);

// Spec strings: "uniform:8", "grid1d:5", "gridlinf:2,3", "random:6,7".
MetricSpace make_metric(const std::string& spec);

// CSV: first row labels, then k rows of k decimal values.
MetricSpace load_metric_csv(const std::string& path, bool normalize = false);
void save_metric_csv(const MetricSpace& m, const std::string& path);

} // namespace moveband
