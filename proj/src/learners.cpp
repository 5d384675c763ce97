#include "tdac/learners.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include <fmt/format.h>

#include "tdac/errors.hpp"
#include "tdac/parallel.hpp"
#include "tdac/random.hpp"

namespace tdac {

// ---------------------------------------------------------------------------
// Dataset

void Dataset::add(std::span<const double> x, int label) {
    if (labels.empty() && features.empty() && n_features == 0) n_features = x.size();
    if (x.size() != n_features) throw ShapeError(fmt::format("dataset: row has {} features, expected {}", x.size(), n_features));
    features.insert(features.end(), x.begin(), x.end());
    labels.push_back(label);
}

Dataset Dataset::empty_like() const {
    Dataset out;
    out.n_features = n_features;
    out.columns = columns;
    return out;
}

Dataset Dataset::subset(std::span<const std::size_t> indices) const {
    Dataset out = empty_like();
    out.features.reserve(indices.size() * n_features);
    out.labels.reserve(indices.size());
    for (std::size_t i : indices) {
        auto r = row(i);
        out.features.insert(out.features.end(), r.begin(), r.end());
        out.labels.push_back(labels[i]);
    }
    return out;
}

void Dataset::validate() const {
    if (features.size() != labels.size() * n_features) throw DataError("dataset: feature matrix does not match label count");
    if (!columns.empty() && columns.size() != n_features) throw DataError("dataset: column names do not match feature count");
    for (double v : features)
        if (!std::isfinite(v)) throw DataError("dataset: non-finite feature value");
    for (int l : labels)
        if (l != 0 && l != 1) throw DataError(fmt::format("dataset: label {} is not 0/1", l));
}

Dataset Dataset::from_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw FormatError("csv: missing header");
    auto split = [](const std::string& s) {
        std::vector<std::string> out;
        std::string cur;
        std::istringstream ls(s);
        while (std::getline(ls, cur, ',')) out.push_back(cur);
        if (!s.empty() && s.back() == ',') out.emplace_back();
        return out;
    };
    auto header = split(line);
    if (header.empty() || header.back() != "label") throw FormatError("csv: last header column must be 'label'");
    Dataset ds;
    ds.n_features = header.size() - 1;
    ds.columns.assign(header.begin(), header.end() - 1);
    std::size_t line_no = 1;
    std::vector<double> row(ds.n_features);
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        auto cells = split(line);
        if (cells.size() != header.size())
            throw FormatError(fmt::format("csv: line {} has {} fields, expected {}", line_no, cells.size(), header.size()));
        for (std::size_t c = 0; c < ds.n_features; ++c) {
            char* end = nullptr;
            row[c] = std::strtod(cells[c].c_str(), &end);
            if (cells[c].empty() || *end != '\0')
                throw FormatError(fmt::format("csv: line {} field {} is not a number", line_no, c + 1));
        }
        const auto& lab = cells.back();
        if (lab != "0" && lab != "1") throw FormatError(fmt::format("csv: line {} label '{}' is not 0/1", line_no, lab));
        ds.add(row, lab == "1" ? 1 : 0);
    }
    return ds;
}

double gini(std::size_t zeros, std::size_t ones) {
    std::size_t n = zeros + ones;
    if (n == 0) return 0.0;
    double p0 = static_cast<double>(zeros) / static_cast<double>(n);
    double p1 = static_cast<double>(ones) / static_cast<double>(n);
    return 1.0 - p0 * p0 - p1 * p1;
}

std::pair<std::vector<std::size_t>, std::vector<std::size_t>> stratified_split_indices(std::span<const int> labels,
                                                                                         double train_frac,
                                                                                         std::uint64_t seed) {
    if (!(train_frac > 0.0 && train_frac < 1.0)) throw ParameterError("stratified_split: train_frac must be in (0, 1)");
    std::array<std::vector<std::size_t>, 2> by_class;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] != 0 && labels[i] != 1) throw DataError(fmt::format("stratified_split: label {} is not 0/1", labels[i]));
        by_class[static_cast<std::size_t>(labels[i])].push_back(i);
    }
    std::vector<std::size_t> train, test;
    for (std::size_t c = 0; c < 2; ++c) {
        auto& idx = by_class[c];
        if (idx.empty()) continue;
        if (idx.size() < 2)
            throw DataError(fmt::format("stratified_split: class {} has {} sample(s), need at least 2", c, idx.size()));
        Rng rng = derive_rng(seed, c, /*domain=*/10);
        std::shuffle(idx.begin(), idx.end(), rng);
        auto n_train = static_cast<std::size_t>(std::llround(train_frac * static_cast<double>(idx.size())));
        n_train = std::clamp<std::size_t>(n_train, 1, idx.size() - 1);
        train.insert(train.end(), idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_train));
        test.insert(test.end(), idx.begin() + static_cast<std::ptrdiff_t>(n_train), idx.end());
    }
    std::sort(train.begin(), train.end());
    std::sort(test.begin(), test.end());
    return {train, test};
}

std::pair<Dataset, Dataset> stratified_split(const Dataset& ds, double train_frac, std::uint64_t seed) {
    auto [train, test] = stratified_split_indices(ds.labels, train_frac, seed);
    return {ds.subset(train), ds.subset(test)};
}

// ---------------------------------------------------------------------------
// CART

namespace {

using u128 = unsigned __int128;

// Weighted Gini impurity of a split is 1 - S / n with
// S = (l0^2 + l1^2) / nl + (r0^2 + r1^2) / nr, so minimizing impurity is
// maximizing S. S is kept as an exact fraction to make ties reproducible.
struct SplitScore {
    u128 num = 0;
    u128 den = 1;

    static SplitScore of(std::size_t l0, std::size_t l1, std::size_t r0, std::size_t r1) {
        u128 nl = l0 + l1, nr = r0 + r1;
        u128 a = u128(l0) * l0 + u128(l1) * l1;
        u128 b = u128(r0) * r0 + u128(r1) * r1;
        return {a * nr + b * nl, nl * nr};
    }
    bool better_than(const SplitScore& o) const { return num * o.den > o.num * den; }
};

struct Builder {
    const Dataset& ds;
    TreeOptions options;
    Rng* rng;  // null: all features at every split
    std::vector<TreeNode> nodes;
    std::vector<std::size_t> order;  // scratch

    int grow(std::vector<std::size_t>& idx, std::size_t depth) {
        TreeNode node;
        for (std::size_t i : idx) ++node.counts[static_cast<std::size_t>(ds.labels[i])];
        node.label = node.counts[1] > node.counts[0] ? 1 : 0;
        int id = static_cast<int>(nodes.size());
        nodes.push_back(node);

        bool pure = node.counts[0] == 0 || node.counts[1] == 0;
        if (pure || depth >= options.max_depth || idx.size() < options.min_samples_split || idx.size() < 2) return id;

        auto features = candidate_features();
        bool found = false;
        int best_feature = -1;
        double best_threshold = 0.0;
        SplitScore best;
        for (std::size_t f : features) {
            order = idx;
            std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
                return ds.row(a)[f] < ds.row(b)[f];
            });
            std::size_t l0 = 0, l1 = 0;
            const std::size_t t0 = node.counts[0], t1 = node.counts[1];
            for (std::size_t k = 0; k + 1 < order.size(); ++k) {
                (ds.labels[order[k]] ? l1 : l0) += 1;
                double a = ds.row(order[k])[f];
                double b = ds.row(order[k + 1])[f];
                if (!(a < b)) continue;
                auto score = SplitScore::of(l0, l1, t0 - l0, t1 - l1);
                if (!found || score.better_than(best)) {
                    double thr = a + (b - a) / 2.0;
                    if (!(thr < b)) thr = a;
                    found = true;
                    best = score;
                    best_feature = static_cast<int>(f);
                    best_threshold = thr;
                }
            }
        }
        if (!found) return id;

        std::vector<std::size_t> left, right;
        for (std::size_t i : idx) (ds.row(i)[static_cast<std::size_t>(best_feature)] <= best_threshold ? left : right).push_back(i);
        idx.clear();
        idx.shrink_to_fit();
        int l = grow(left, depth + 1);
        int r = grow(right, depth + 1);
        nodes[static_cast<std::size_t>(id)].feature = best_feature;
        nodes[static_cast<std::size_t>(id)].threshold = best_threshold;
        nodes[static_cast<std::size_t>(id)].left = l;
        nodes[static_cast<std::size_t>(id)].right = r;
        return id;
    }

    std::vector<std::size_t> candidate_features() {
        std::vector<std::size_t> all(ds.n_features);
        std::iota(all.begin(), all.end(), 0);
        std::size_t k = options.max_features;
        if (rng == nullptr || k == 0 || k >= all.size()) return all;
        // Partial Fisher-Yates, then ascending order for the tie-break rule.
        for (std::size_t i = 0; i < k; ++i) {
            std::uniform_int_distribution<std::size_t> pick(i, all.size() - 1);
            std::swap(all[i], all[pick(*rng)]);
        }
        all.resize(k);
        std::sort(all.begin(), all.end());
        return all;
    }
};

TreeModel build_tree(const Dataset& ds, std::vector<std::size_t> idx, const TreeOptions& options, Rng* rng,
                     std::uint64_t seed) {
    Builder b{ds, options, rng, {}, {}};
    b.grow(idx, 0);
    TreeModel model;
    model.n_features = ds.n_features;
    model.options = options;
    model.seed = seed;
    model.nodes = std::move(b.nodes);
    return model;
}

void check_row(std::size_t expected, std::span<const double> x) {
    if (x.size() != expected) throw ShapeError(fmt::format("predict: {} features given, model expects {}", x.size(), expected));
}

}  // namespace

TreeModel fit_tree(const Dataset& train, const TreeOptions& options, std::uint64_t seed) {
    if (train.size() == 0) throw DataError("fit_tree: empty training set");
    train.validate();
    std::vector<std::size_t> idx(train.size());
    std::iota(idx.begin(), idx.end(), 0);
    if (options.max_features == 0 || options.max_features >= train.n_features) return build_tree(train, idx, options, nullptr, seed);
    Rng rng = derive_rng(seed, 0, /*domain=*/20);
    return build_tree(train, idx, options, &rng, seed);
}

TreeModel fit_tree(const Dataset& train, std::size_t max_depth, std::size_t min_samples_split, std::uint64_t seed) {
    return fit_tree(train, TreeOptions{max_depth, min_samples_split, 0}, seed);
}

int TreeModel::predict(std::span<const double> x) const {
    check_row(n_features, x);
    std::size_t at = 0;
    while (!nodes[at].leaf()) {
        const auto& nd = nodes[at];
        at = static_cast<std::size_t>(x[static_cast<std::size_t>(nd.feature)] <= nd.threshold ? nd.left : nd.right);
    }
    return nodes[at].label;
}

std::size_t TreeModel::depth() const {
    std::vector<std::pair<std::size_t, std::size_t>> stack{{0, 0}};
    std::size_t best = 0;
    while (!stack.empty()) {
        auto [i, d] = stack.back();
        stack.pop_back();
        best = std::max(best, d);
        if (!nodes[i].leaf()) {
            stack.push_back({static_cast<std::size_t>(nodes[i].left), d + 1});
            stack.push_back({static_cast<std::size_t>(nodes[i].right), d + 1});
        }
    }
    return best;
}

nlohmann::ordered_json TreeModel::to_json() const {
    nlohmann::ordered_json j;
    j["type"] = "decision_tree";
    j["n_features"] = n_features;
    j["max_depth"] = options.max_depth;
    j["min_samples_split"] = options.min_samples_split;
    j["max_features"] = options.max_features;
    j["seed"] = seed;
    auto& arr = j["nodes"] = nlohmann::ordered_json::array();
    for (const auto& nd : nodes) {
        nlohmann::ordered_json e;
        if (nd.leaf()) {
            e["label"] = nd.label;
        } else {
            e["feature"] = nd.feature;
            e["threshold"] = nd.threshold;
            e["left"] = nd.left;
            e["right"] = nd.right;
            e["label"] = nd.label;
        }
        e["counts"] = {nd.counts[0], nd.counts[1]};
        arr.push_back(std::move(e));
    }
    return j;
}

TreeModel TreeModel::from_json(const nlohmann::json& j) {
    try {
        TreeModel m;
        m.n_features = j.at("n_features").get<std::size_t>();
        m.options.max_depth = j.at("max_depth").get<std::size_t>();
        m.options.min_samples_split = j.at("min_samples_split").get<std::size_t>();
        m.options.max_features = j.value("max_features", std::size_t{0});
        m.seed = j.value("seed", std::uint64_t{0});
        for (const auto& e : j.at("nodes")) {
            TreeNode nd;
            nd.label = e.at("label").get<int>();
            if (e.contains("feature")) {
                nd.feature = e.at("feature").get<int>();
                nd.threshold = e.at("threshold").get<double>();
                nd.left = e.at("left").get<int>();
                nd.right = e.at("right").get<int>();
            }
            auto c = e.at("counts").get<std::vector<std::size_t>>();
            if (c.size() != 2) throw FormatError("tree json: counts must have 2 entries");
            nd.counts = {c[0], c[1]};
            m.nodes.push_back(nd);
        }
        const auto n = static_cast<int>(m.nodes.size());
        if (n == 0) throw FormatError("tree json: no nodes");
        for (const auto& nd : m.nodes)
            if (!nd.leaf() && (nd.left <= 0 || nd.left >= n || nd.right <= 0 || nd.right >= n ||
                               nd.feature >= static_cast<int>(m.n_features)))
                throw FormatError("tree json: node references out of range");
        return m;
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(fmt::format("tree json: {}", e.what()));
    }
}

// ---------------------------------------------------------------------------
// Forest

ForestModel fit_forest(const Dataset& train, const ForestOptions& options, std::uint64_t seed) {
    if (options.n_trees < 1) throw ParameterError("fit_forest: n_trees must be >= 1");
    if (train.size() == 0) throw DataError("fit_forest: empty training set");
    train.validate();
    ForestModel forest;
    forest.n_features = train.n_features;
    forest.bootstrap = options.bootstrap;
    forest.max_features = options.max_features != 0
                              ? std::min(options.max_features, train.n_features)
                              : static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(train.n_features))));
    forest.tree_seeds.resize(options.n_trees);
    for (std::size_t t = 0; t < options.n_trees; ++t) forest.tree_seeds[t] = derive_rng(seed, t, /*domain=*/21)();
    forest.trees.resize(options.n_trees);

    TreeOptions topt{options.max_depth, options.min_samples_split, forest.max_features};
    parallel_for(options.n_trees, options.jobs, [&](std::size_t t) {
        Rng rng = derive_rng(forest.tree_seeds[t], 0, /*domain=*/22);
        std::vector<std::size_t> idx(train.size());
        if (options.bootstrap) {
            std::uniform_int_distribution<std::size_t> pick(0, train.size() - 1);
            for (auto& i : idx) i = pick(rng);
            std::sort(idx.begin(), idx.end());
        } else {
            std::iota(idx.begin(), idx.end(), 0);
        }
        bool all_features = forest.max_features >= train.n_features;
        forest.trees[t] = build_tree(train, idx, topt, all_features ? nullptr : &rng, forest.tree_seeds[t]);
    });
    return forest;
}

int ForestModel::predict(std::span<const double> x) const {
    check_row(n_features, x);
    std::size_t ones = 0;
    for (const auto& t : trees) ones += static_cast<std::size_t>(t.predict(x));
    return 2 * ones > trees.size() ? 1 : 0;
}

nlohmann::ordered_json ForestModel::to_json() const {
    nlohmann::ordered_json j;
    j["type"] = "random_forest";
    j["n_features"] = n_features;
    j["max_features"] = max_features;
    j["bootstrap"] = bootstrap;
    j["tree_seeds"] = tree_seeds;
    auto& arr = j["trees"] = nlohmann::ordered_json::array();
    for (const auto& t : trees) arr.push_back(t.to_json());
    return j;
}

ForestModel ForestModel::from_json(const nlohmann::json& j) {
    try {
        ForestModel f;
        f.n_features = j.at("n_features").get<std::size_t>();
        f.max_features = j.at("max_features").get<std::size_t>();
        f.bootstrap = j.at("bootstrap").get<bool>();
        f.tree_seeds = j.at("tree_seeds").get<std::vector<std::uint64_t>>();
        for (const auto& t : j.at("trees")) f.trees.push_back(TreeModel::from_json(t));
        if (f.trees.empty()) throw FormatError("forest json: no trees");
        return f;
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(fmt::format("forest json: {}", e.what()));
    }
}

template <typename Model>
std::vector<int> predict_rows(const Model& model, const Dataset& ds) {
    if (ds.n_features != model.n_features)
        throw ShapeError(fmt::format("dataset has {} features, model expects {}", ds.n_features, model.n_features));
    std::vector<int> out(ds.size());
    for (std::size_t i = 0; i < ds.size(); ++i) out[i] = model.predict(ds.row(i));
    return out;
}

std::vector<int> predict_all(const TreeModel& model, const Dataset& ds) { return predict_rows(model, ds); }
std::vector<int> predict_all(const ForestModel& model, const Dataset& ds) { return predict_rows(model, ds); }

template <typename Model>
double accuracy(const Model& model, const Dataset& test) {
    if (test.size() == 0) throw DataError("accuracy: empty test set");
    auto pred = predict_rows(model, test);
    std::size_t correct = 0;
    for (std::size_t i = 0; i < pred.size(); ++i) correct += pred[i] == test.labels[i];
    return static_cast<double>(correct) / static_cast<double>(test.size());
}

template double accuracy<TreeModel>(const TreeModel&, const Dataset&);
template double accuracy<ForestModel>(const ForestModel&, const Dataset&);

}  // namespace tdac
