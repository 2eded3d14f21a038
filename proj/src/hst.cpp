#include "moveband/hst.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>

#include <json.hpp>

#include "moveband/errors.hpp"

namespace moveband {

HstTree::HstTree(int depth, std::vector<HstNode> nodes, std::vector<int> leaf_of_action,
                 std::vector<std::string> action_labels)
    : depth_(depth), nodes_(std::move(nodes)), leaf_of_action_(std::move(leaf_of_action)),
      action_labels_(std::move(action_labels)) {
    const int n = static_cast<int>(nodes_.size());
    const int k = static_cast<int>(leaf_of_action_.size());
    if (depth_ < 1) throw BadTreeFile("tree depth must be >= 1");
    if (static_cast<int>(action_labels_.size()) != k)
        throw BadTreeFile("leaf/action label count mismatch");

    std::vector<int> child_count(n, 0);
    level_counts_.assign(depth_ + 1, 0);
    for (int v = 0; v < n; ++v) {
        if (nodes_[v].id != v) throw BadTreeFile("node ids must be dense 0..n-1");
        if (nodes_[v].level < 0 || nodes_[v].level > depth_) throw BadTreeFile("node level out of range");
        ++level_counts_[nodes_[v].level];
        if (nodes_[v].parent < 0) {
            if (nodes_[v].level != depth_) throw BadTreeFile("parentless node is not at root level");
            if (root_ >= 0) throw BadTreeFile("multiple roots");
            root_ = v;
        } else {
            const HstNode& p = nodes_[nodes_[v].parent];
            if (p.level != nodes_[v].level + 1) throw BadTreeFile("parent level must be child level + 1");
            ++child_count[nodes_[v].parent];
        }
    }
    if (root_ < 0) throw BadTreeFile("no root");
    if (level_counts_[0] != k) throw BadTreeFile("leaf count does not match action count");

    action_of_node_.assign(n, -1);
    for (int a = 0; a < k; ++a) {
        int leaf = leaf_of_action_[a];
        if (leaf < 0 || leaf >= n || nodes_[leaf].level != 0)
            throw BadTreeFile("action is not mapped to a level-0 node");
        if (action_of_node_[leaf] >= 0) throw BadTreeFile("two actions share a leaf");
        action_of_node_[leaf] = a;
    }
    for (int v = 0; v < n; ++v) {
        if (nodes_[v].level > 0 && child_count[v] == 0)
            throw BadTreeFile("internal node without children");
    }

    anc_.assign(k, std::vector<int>(depth_ + 1));
    for (int a = 0; a < k; ++a) {
        int v = leaf_of_action_[a];
        for (int h = 0; h <= depth_; ++h) {
            anc_[a][h] = v;
            if (h < depth_) v = nodes_[v].parent;
        }
    }
    actions_under_.assign(n, {});
    for (int a = 0; a < k; ++a)
        for (int h = 0; h <= depth_; ++h) actions_under_[anc_[a][h]].push_back(a);
}

int HstTree::ancestor(int action, int h) const {
    if (action < 0 || action >= num_actions()) throw UnknownAction("action index " + std::to_string(action));
    return anc_[action][h];
}

double HstTree::distance(int a, int b) const {
    if (a < 0 || a >= num_actions() || b < 0 || b >= num_actions())
        throw UnknownAction("action index out of range");
    if (a == b) return 0.0;
    for (int h = 1; h <= depth_; ++h)
        if (anc_[a][h] == anc_[b][h]) return std::ldexp(1.0, h - depth_);
    throw BadTreeFile("disconnected leaves");
}

MetricSpace HstTree::induced_metric() const {
    const int k = num_actions();
    std::vector<double> flat(static_cast<std::size_t>(k) * k, 0.0);
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j) flat[static_cast<std::size_t>(i) * k + j] = distance(i, j);
    return MetricSpace(action_labels_, std::move(flat));
}

TreeComplexity tree_complexity(const HstTree& t) {
    TreeComplexity c;
    const int H = t.depth();
    for (int h = 0; h < H; ++h) {
        int n_h = t.level_node_count(h);
        c.per_level_counts.push_back(n_h);
        c.per_level_term.push_back(std::ldexp(static_cast<double>(n_h), h - H));
    }
    c.value = *std::max_element(c.per_level_term.begin(), c.per_level_term.end());
    return c;
}

namespace {

// greedy set cover at radius r; tie-break: largest gain, then lowest index
std::vector<int> greedy_cover_centers(const MetricSpace& m, double r) {
    const int k = m.size();
    std::vector<char> covered(k, 0);
    std::vector<int> centers;
    int num_covered = 0;
    while (num_covered < k) {
        int best_c = -1, best_gain = 0;
        for (int c = 0; c < k; ++c) {
            int gain = 0;
            for (int j = 0; j < k; ++j)
                if (!covered[j] && m.dist(c, j) <= r) ++gain;
            if (gain > best_gain) {
                best_gain = gain;
                best_c = c;
            }
        }
        centers.push_back(best_c);
        for (int j = 0; j < k; ++j)
            if (!covered[j] && m.dist(best_c, j) <= r) {
                covered[j] = 1;
                ++num_covered;
            }
    }
    std::sort(centers.begin(), centers.end());
    return centers;
}

} // namespace

HstTree build_hst(const MetricSpace& m) {
    const int k = m.size();
    if (k == 1) {
        std::vector<HstNode> nodes{{0, 0, 1}, {1, 1, -1}};
        return HstTree(1, std::move(nodes), {0}, m.labels());
    }
    double min_dist = m.min_positive_dist();
    if (min_dist <= 0.0) throw BadSpec("build_hst requires distinct points at positive distance");
    int H = 1;
    while (std::ldexp(1.0, -H) >= min_dist) ++H;

    // covers at radii 2^{-H+l} for l = 1..H-1; level-l nodes are cover balls
    std::vector<std::vector<int>> covers(H); // covers[l], l >= 1
    for (int l = 1; l < H; ++l) covers[l] = greedy_cover_centers(m, std::ldexp(1.0, -H + l));

    auto chosen = [&](int point, int l) {
        double r = std::ldexp(1.0, -H + l);
        for (int c : covers[l])
            if (m.dist(point, c) <= r) return c;
        throw DominanceViolation("cover at level " + std::to_string(l) + " misses a point");
    };

    // attachment chains a_l(i); a_l depends only on a_{l-1}
    std::vector<std::vector<int>> chain(k, std::vector<int>(H));
    for (int i = 0; i < k; ++i) {
        chain[i][0] = i;
        for (int l = 1; l < H; ++l) chain[i][l] = chosen(chain[i][l - 1], l);
    }

    std::vector<HstNode> nodes;
    std::vector<int> leaf_of_action(k);
    std::vector<std::map<int, int>> node_of_center(H); // level -> center -> node id
    for (int i = 0; i < k; ++i) {
        nodes.push_back({static_cast<int>(nodes.size()), 0, -1});
        leaf_of_action[i] = nodes.back().id;
    }
    for (int l = 1; l < H; ++l)
        for (int i = 0; i < k; ++i) {
            int c = chain[i][l];
            if (!node_of_center[l].count(c)) {
                node_of_center[l][c] = static_cast<int>(nodes.size());
                nodes.push_back({static_cast<int>(nodes.size()), l, -1});
            }
        }
    int root = static_cast<int>(nodes.size());
    nodes.push_back({root, H, -1});

    for (int i = 0; i < k; ++i)
        nodes[leaf_of_action[i]].parent = (H == 1) ? root : node_of_center[1][chain[i][1]];
    for (int l = 1; l < H; ++l)
        for (auto [c, id] : node_of_center[l])
            nodes[id].parent = (l == H - 1) ? root : node_of_center[l + 1][chosen(c, l + 1)];

    HstTree t(H, std::move(nodes), std::move(leaf_of_action), m.labels());
    auto rep = verify_dominance(m, t);
    if (!rep.violations.empty())
        throw DominanceViolation("build_hst produced a non-dominating tree");
    return t;
}

DominanceReport verify_dominance(const MetricSpace& m, const HstTree& t) {
    if (m.size() != t.num_actions()) throw ActionMismatch("metric and tree differ in action count");
    DominanceReport rep;
    for (int i = 0; i < m.size(); ++i)
        for (int j = i + 1; j < m.size(); ++j) {
            double dt = t.distance(i, j);
            double d = m.dist(i, j);
            if (d > 4.0 * dt) rep.violations.emplace_back(i, j);
            if (dt > 0.0) rep.max_ratio = std::max(rep.max_ratio, d / dt);
        }
    return rep;
}

HstTree deepen(const HstTree& t) {
    const int n = t.num_nodes();
    const int k = t.num_actions();
    std::vector<HstNode> nodes;
    nodes.reserve(n + k);
    for (const HstNode& v : t.nodes()) nodes.push_back({v.id, v.level + 1, v.parent});
    std::vector<int> leaf_of_action(k);
    for (int a = 0; a < k; ++a) {
        int id = static_cast<int>(nodes.size());
        nodes.push_back({id, 0, t.leaf_of_action(a)});
        leaf_of_action[a] = id;
    }
    return HstTree(t.depth() + 1, std::move(nodes), std::move(leaf_of_action), t.action_labels());
}

HstTree collapse(const HstTree& t) {
    if (t.depth() < 2) throw TooShallow("collapse requires depth >= 2");
    const int k = t.num_actions();
    // drop level-1 nodes; leaves reattach to their grandparents
    std::vector<int> new_id(t.num_nodes(), -1);
    std::vector<HstNode> nodes;
    for (const HstNode& v : t.nodes()) {
        if (v.level == 1) continue;
        new_id[v.id] = static_cast<int>(nodes.size());
        nodes.push_back({new_id[v.id], v.level == 0 ? 0 : v.level - 1, v.parent});
    }
    for (HstNode& v : nodes) {
        if (v.parent < 0) continue;
        int old_parent = v.parent;
        if (v.level == 0 && t.nodes()[old_parent].level == 1)
            old_parent = t.nodes()[old_parent].parent; // grandparent
        v.parent = new_id[old_parent];
    }
    std::vector<int> leaf_of_action(k);
    for (int a = 0; a < k; ++a) leaf_of_action[a] = new_id[t.leaf_of_action(a)];
    return HstTree(t.depth() - 1, std::move(nodes), std::move(leaf_of_action), t.action_labels());
}

ConditionReport check_conditions(const HstTree& t, long long horizon, ConditionVariant variant) {
    if (horizon < 1) throw BadSpec("horizon must be >= 1");
    ConditionReport rep;
    const int H = t.depth();
    const double dim = tree_complexity(t).value;
    const double k = t.num_actions();
    const double T = static_cast<double>(horizon);
    rep.dim = dim;
    rep.depth = H;
    if (variant == ConditionVariant::Appendix) {
        rep.cond1 = std::ldexp(T, -H) <= std::sqrt(std::ldexp(1.0, H) * dim * T);
        rep.cond2a = std::ldexp(dim, H - 1) <= k;
        rep.cond2b = std::ldexp(T, -(H - 1)) >= std::sqrt(std::ldexp(1.0, H - 1) * dim * T);
    } else {
        rep.cond1 = std::ldexp(T, -H) * H <= std::sqrt(std::ldexp(1.0, H) * H * dim * T);
        rep.cond2a = std::ldexp(dim, H) <= k;
        rep.cond2b = std::ldexp(T, -(H - 1)) * (H - 1) >= std::sqrt(std::ldexp(1.0, H - 1) * (H - 1) * dim * T);
    }
    rep.well_behaved = rep.cond1 && (rep.cond2a || rep.cond2b);
    return rep;
}

HstTree reshape_well_behaved(const HstTree& t, long long horizon) {
    const long long cap = 64 + static_cast<long long>(std::ceil(std::log2(static_cast<double>(horizon) + 1)));
    HstTree cur = t;
    long long iters = 0;
    while (!check_conditions(cur, horizon).cond1) {
        cur = deepen(cur);
        if (++iters > cap) throw Error("reshape_well_behaved: deepen loop failed to terminate");
    }
    iters = 0;
    while (!check_conditions(cur, horizon).well_behaved) {
        HstTree next = collapse(cur);
        if (!check_conditions(next, horizon).cond1) break; // cond2b holds for cur
        cur = std::move(next);
        if (++iters > cap) throw Error("reshape_well_behaved: collapse loop failed to terminate");
    }
    return cur;
}

HstTree load_tree_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw BadTreeFile("cannot open tree file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw BadTreeFile(std::string("bad tree JSON: ") + e.what());
    }
    int depth = j.at("depth").get<int>();
    std::vector<HstNode> nodes;
    for (const auto& jn : j.at("nodes"))
        nodes.push_back({jn.at("id").get<int>(), jn.at("level").get<int>(), jn.at("parent").get<int>()});
    std::vector<std::pair<std::string, int>> actions; // label -> leaf node
    for (const auto& [label, leaf] : j.at("leafAction").items())
        actions.emplace_back(label, leaf.get<int>());
    std::sort(actions.begin(), actions.end(),
              [](const auto& a, const auto& b) { return a.second < b.second; });
    std::vector<int> leaf_of_action;
    std::vector<std::string> labels;
    for (auto& [label, leaf] : actions) {
        labels.push_back(label);
        leaf_of_action.push_back(leaf);
    }
    return HstTree(depth, std::move(nodes), std::move(leaf_of_action), std::move(labels));
}

void save_tree_json(const HstTree& t, const std::string& path) {
    nlohmann::ordered_json j;
    j["depth"] = t.depth();
    j["nodes"] = nlohmann::ordered_json::array();
    for (const HstNode& v : t.nodes())
        j["nodes"].push_back({{"id", v.id}, {"level", v.level}, {"parent", v.parent}});
    nlohmann::ordered_json la = nlohmann::ordered_json::object();
    for (int a = 0; a < t.num_actions(); ++a) la[t.action_labels()[a]] = t.leaf_of_action(a);
    j["leafAction"] = la;
    std::ofstream out(path);
    if (!out) throw BadTreeFile("cannot write tree file: " + path);
    out << j.dump(2) << "\n";
}

} // namespace moveband
