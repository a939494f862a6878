#include "edastress/errors.hpp"
#include "edastress/prng.hpp"
#include "learner_impls.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace edastress::detail {

namespace {

struct SampleRef {
    double value = 0.0;
    std::uint8_t label = 0;
};

struct BuildContext {
    const Matrix& x;
    std::span<const std::uint8_t> y;
    double w0; // class weights from the full training set
    double w1;
    int min_samples_split;
    int min_samples_leaf;
    std::size_t mtry;
    Rng* rng;
    std::vector<TreeNode>* nodes;
};

double weighted_gini(double c0, double c1) {
    const double tot = c0 + c1;
    if (tot == 0.0) return 0.0;
    const double p0 = c0 / tot;
    const double p1 = c1 / tot;
    return 1.0 - p0 * p0 - p1 * p1;
}

// Builds one node from the (bootstrap) index list; returns its node id.
int build_node(BuildContext& ctx, std::vector<std::size_t>& idx) {
    auto& nodes = *ctx.nodes;
    const int node_id = static_cast<int>(nodes.size());
    nodes.emplace_back();

    double c0 = 0.0, c1 = 0.0;
    for (std::size_t i : idx) (ctx.y[i] ? c1 : c0) += ctx.y[i] ? ctx.w1 : ctx.w0;
    const double leaf_p1 = (c0 + c1) > 0.0 ? c1 / (c0 + c1) : 0.0;

    const bool pure = c0 == 0.0 || c1 == 0.0;
    if (pure || idx.size() < static_cast<std::size_t>(ctx.min_samples_split)) {
        nodes[node_id].p1 = leaf_p1;
        return node_id;
    }

    // Feature subset: mtry distinct features, order fixed by the tree RNG.
    const std::size_t d = ctx.x.cols;
    std::vector<std::size_t> features(d);
    std::iota(features.begin(), features.end(), 0);
    for (std::size_t k = 0; k < ctx.mtry; ++k) {
        const std::size_t j = k + ctx.rng->index(d - k);
        std::swap(features[k], features[j]);
    }

    const double parent_impurity = weighted_gini(c0, c1);
    int best_feature = -1;
    double best_threshold = 0.0;
    double best_score = parent_impurity - 1e-12; // require a real improvement

    std::vector<SampleRef> refs(idx.size());
    const auto msl = static_cast<std::size_t>(ctx.min_samples_leaf);

    for (std::size_t k = 0; k < ctx.mtry; ++k) {
        const std::size_t f = features[k];
        for (std::size_t i = 0; i < idx.size(); ++i) {
            refs[i] = {ctx.x.at(idx[i], f), ctx.y[idx[i]]};
        }
        std::sort(refs.begin(), refs.end(),
                  [](const SampleRef& a, const SampleRef& b) { return a.value < b.value; });

        double lc0 = 0.0, lc1 = 0.0, rc0 = c0, rc1 = c1;
        for (std::size_t i = 0; i + 1 < refs.size(); ++i) {
            const double w = refs[i].label ? ctx.w1 : ctx.w0;
            if (refs[i].label) { lc1 += w; rc1 -= w; } else { lc0 += w; rc0 -= w; }
            if (i + 1 < msl || refs.size() - (i + 1) < msl) continue;
            if (refs[i].value == refs[i + 1].value) continue;
            const double lt = lc0 + lc1, rt = rc0 + rc1;
            const double score = (lt * weighted_gini(lc0, lc1) + rt * weighted_gini(rc0, rc1)) / (lt + rt);
            if (score < best_score) {
                best_score = score;
                best_feature = static_cast<int>(f);
                best_threshold = 0.5 * (refs[i].value + refs[i + 1].value);
            }
        }
    }

    if (best_feature < 0) {
        nodes[node_id].p1 = leaf_p1;
        return node_id;
    }

    std::vector<std::size_t> left_idx, right_idx;
    for (std::size_t i : idx) {
        (ctx.x.at(i, static_cast<std::size_t>(best_feature)) <= best_threshold ? left_idx : right_idx)
            .push_back(i);
    }
    if (left_idx.empty() || right_idx.empty()) {
        nodes[node_id].p1 = leaf_p1;
        return node_id;
    }

    idx.clear();
    idx.shrink_to_fit();

    nodes[node_id].feature = best_feature;
    nodes[node_id].threshold = best_threshold;
    const int left_id = build_node(ctx, left_idx);
    const int right_id = build_node(ctx, right_idx);
    nodes[node_id].left = left_id;
    nodes[node_id].right = right_id;
    return node_id;
}

} // namespace

std::unique_ptr<ModelImpl> train_forest(const Matrix& x, std::span<const std::uint8_t> y,
                                        const ClassWeights& cw, const ModelSpec& spec,
                                        std::uint64_t seed) {
    const std::size_t n = x.rows;
    const auto mtry = static_cast<std::size_t>(
        std::max(1.0, std::floor(std::sqrt(static_cast<double>(x.cols)))));

    std::vector<std::vector<TreeNode>> trees;
    trees.reserve(static_cast<std::size_t>(spec.n_estimators));

    for (int t = 0; t < spec.n_estimators; ++t) {
        // Per-tree stream derived from (seed, tree index): tree order and
        // parallel scheduling cannot change the forest.
        Rng rng(derive_seed(seed, fnv1a64("rf-tree"), static_cast<std::uint64_t>(t)));

        std::vector<std::size_t> bootstrap(n);
        for (std::size_t i = 0; i < n; ++i) bootstrap[i] = rng.index(n);

        std::vector<TreeNode> nodes;
        BuildContext ctx{x, y, cw.w0, cw.w1, spec.min_samples_split,
                         spec.min_samples_leaf, mtry, &rng, &nodes};
        build_node(ctx, bootstrap);
        trees.push_back(std::move(nodes));
    }
    return std::make_unique<ForestModel>(std::move(trees));
}

std::vector<std::uint8_t> ForestModel::predict(const Matrix& x) const {
    std::vector<std::uint8_t> out(x.rows);
    for (std::size_t i = 0; i < x.rows; ++i) {
        const double* xi = x.row(i);
        double p1 = 0.0;
        for (const auto& tree : trees_) {
            int node = 0;
            while (tree[static_cast<std::size_t>(node)].feature >= 0) {
                const TreeNode& nd = tree[static_cast<std::size_t>(node)];
                node = xi[nd.feature] <= nd.threshold ? nd.left : nd.right;
            }
            p1 += tree[static_cast<std::size_t>(node)].p1;
        }
        p1 /= static_cast<double>(trees_.size());
        out[i] = p1 > 0.5 ? 1 : 0;
    }
    return out;
}

nlohmann::ordered_json ForestModel::params_json() const {
    nlohmann::ordered_json j;
    j["kind"] = "forest";
    nlohmann::ordered_json jtrees = nlohmann::ordered_json::array();
    for (const auto& tree : trees_) {
        nlohmann::ordered_json jnodes = nlohmann::ordered_json::array();
        for (const TreeNode& nd : tree) {
            jnodes.push_back({nd.feature, nd.threshold, nd.left, nd.right, nd.p1});
        }
        jtrees.push_back(std::move(jnodes));
    }
    j["trees"] = std::move(jtrees);
    return j;
}

std::unique_ptr<ModelImpl> forest_from_json(const nlohmann::json& j) {
    std::vector<std::vector<TreeNode>> trees;
    for (const auto& jtree : j.at("trees")) {
        std::vector<TreeNode> nodes;
        nodes.reserve(jtree.size());
        for (const auto& jn : jtree) {
            TreeNode nd;
            nd.feature = jn.at(0).get<int>();
            nd.threshold = jn.at(1).get<double>();
            nd.left = jn.at(2).get<int>();
            nd.right = jn.at(3).get<int>();
            nd.p1 = jn.at(4).get<double>();
            nodes.push_back(nd);
        }
        trees.push_back(std::move(nodes));
    }
    return std::make_unique<ForestModel>(std::move(trees));
}

} // namespace edastress::detail
