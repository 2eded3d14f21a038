#pragma once

#include <string>
#include <vector>

#include "moveband/metric.hpp"

namespace moveband {

struct HstNode {
    int id = -1;
    int level = 0;
    int parent = -1; // -1 for the root
};

// A leveled rooted tree: leaves at level 0, single root at level depth(),
// parent(v).level == v.level + 1 for every non-root node. Leaves are in
// bijection with actions. Immutable after construction; deepen/collapse
// return new trees.
class HstTree {
public:
    HstTree(int depth, std::vector<HstNode> nodes, std::vector<int> leaf_of_action,
            std::vector<std::string> action_labels);

    int depth() const { return depth_; }
    int num_actions() const { return static_cast<int>(leaf_of_action_.size()); }
    int num_nodes() const { return static_cast<int>(nodes_.size()); }
    const std::vector<HstNode>& nodes() const { return nodes_; }
    const std::vector<std::string>& action_labels() const { return action_labels_; }
    int leaf_of_action(int action) const { return leaf_of_action_[action]; }
    int action_of_leaf(int node) const { return action_of_node_[node]; }
    int root() const { return root_; }

    // node id of the level-h ancestor of an action's leaf, 0 <= h <= depth
    int ancestor(int action, int h) const;
    // actions under a node's subtree (A_h(i) when node = ancestor(i, h))
    const std::vector<int>& actions_under(int node) const { return actions_under_[node]; }
    int level_node_count(int level) const { return level_counts_[level]; }

    // 2^{level(LCA)} / 2^{depth} for distinct actions, 0 on the diagonal
    double distance(int a, int b) const;

    MetricSpace induced_metric() const;

private:
    int depth_;
    std::vector<HstNode> nodes_;
    std::vector<int> leaf_of_action_;
    std::vector<int> action_of_node_;
    std::vector<std::string> action_labels_;
    int root_ = -1;
    std::vector<std::vector<int>> anc_;           // [action][level] -> node id
    std::vector<std::vector<int>> actions_under_; // [node] -> action ids
    std::vector<int> level_counts_;
};

struct TreeComplexity {
    std::vector<int> per_level_counts;  // n_h for h = 0..H-1
    std::vector<double> per_level_term; // 2^{h-H} * n_h
    double value = 0.0;                 // dim = max over h of the terms
};

TreeComplexity tree_complexity(const HstTree& t);

// Greedy set-cover construction of a dominating tree: 4 * Delta_T >= Delta.
HstTree build_hst(const MetricSpace& m);

struct DominanceReport {
    std::vector<std::pair<int, int>> violations; // pairs with Delta > 4 * Delta_T
    double max_ratio = 0.0;                      // max over pairs of Delta / Delta_T
};

DominanceReport verify_dominance(const MetricSpace& m, const HstTree& t);

// Adds one child below every leaf; distances and complexity are unchanged.
HstTree deepen(const HstTree& t);
// Reconnects leaves to their grandparents; never decreases any distance.
HstTree collapse(const HstTree& t);

struct ConditionReport {
    bool cond1 = false;      // 2^-H * T <= sqrt(2^H * dim * T)
    bool cond2a = false;     // 2^{H-1} * dim <= k
    bool cond2b = false;     // 2^{-(H-1)} * T >= sqrt(2^{H-1} * dim * T)
    bool well_behaved = false;
    double dim = 0.0;
    int depth = 0;
};

enum class ConditionVariant { Appendix, MainText };

ConditionReport check_conditions(const HstTree& t, long long horizon,
                                 ConditionVariant variant = ConditionVariant::Appendix);

// Deepen until cond1 holds, then collapse while the result stays balanced.
// Output is well behaved, dominates the input metric pairwise, and has the
// same complexity value.
HstTree reshape_well_behaved(const HstTree& t, long long horizon);

// JSON tree file: {depth, nodes: [{id, level, parent}], leafAction: {...}}
HstTree load_tree_json(const std::string& path);
void save_tree_json(const HstTree& t, const std::string& path);

} // namespace moveband
