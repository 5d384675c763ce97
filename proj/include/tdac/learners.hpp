#pragma once

// CART decision trees and random forests for binary labels.

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace tdac {

struct Dataset {
    std::size_t n_features = 0;
    std::vector<double> features;  // row-major, size() * n_features
    std::vector<int> labels;       // {0,1}
    std::vector<std::string> columns;

    std::size_t size() const { return labels.size(); }
    std::span<const double> row(std::size_t i) const { return {features.data() + i * n_features, n_features}; }
    void add(std::span<const double> x, int label);
    Dataset subset(std::span<const std::size_t> indices) const;
    Dataset empty_like() const;
    // Throws DataError for ragged rows, non-finite values or labels outside {0,1}.
    void validate() const;

    // Parses the feature CSV written by features_csv (last column "label").
    static Dataset from_csv(const std::string& text);
};

double gini(std::size_t zeros, std::size_t ones);

// Per-class shuffle and cut; each side gets at least one sample of every
// class. Indices inside each side keep their original order.
std::pair<Dataset, Dataset> stratified_split(const Dataset& ds, double train_frac, std::uint64_t seed);
std::pair<std::vector<std::size_t>, std::vector<std::size_t>> stratified_split_indices(std::span<const int> labels,
                                                                                         double train_frac,
                                                                                         std::uint64_t seed);

struct TreeNode {
    int feature = -1;  // -1 for leaves
    double threshold = 0.0;
    int left = -1;   // x[feature] <= threshold
    int right = -1;
    int label = 0;
    std::array<std::size_t, 2> counts{0, 0};

    bool leaf() const { return feature < 0; }
    friend bool operator==(const TreeNode&, const TreeNode&) = default;
};

struct TreeOptions {
    std::size_t max_depth = 10;
    std::size_t min_samples_split = 2;
    // Features examined per split; 0 means all of them.
    std::size_t max_features = 0;

    friend bool operator==(const TreeOptions&, const TreeOptions&) = default;
};

struct TreeModel {
    std::size_t n_features = 0;
    TreeOptions options;
    std::uint64_t seed = 0;
    std::vector<TreeNode> nodes;  // nodes[0] is the root

    int predict(std::span<const double> x) const;
    std::size_t depth() const;

    nlohmann::ordered_json to_json() const;
    static TreeModel from_json(const nlohmann::json& j);
    friend bool operator==(const TreeModel&, const TreeModel&) = default;
};

TreeModel fit_tree(const Dataset& train, std::size_t max_depth = 10, std::size_t min_samples_split = 2,
                   std::uint64_t seed = 0);
TreeModel fit_tree(const Dataset& train, const TreeOptions& options, std::uint64_t seed);

struct ForestOptions {
    std::size_t n_trees = 100;
    std::size_t max_depth = 10;
    std::size_t min_samples_split = 2;
    bool bootstrap = true;
    // 0 selects ceil(sqrt(n_features)).
    std::size_t max_features = 0;
    unsigned jobs = 1;
};

struct ForestModel {
    std::size_t n_features = 0;
    std::size_t max_features = 0;
    bool bootstrap = true;
    std::vector<std::uint64_t> tree_seeds;
    std::vector<TreeModel> trees;

    // Majority vote, ties go to class 0.
    int predict(std::span<const double> x) const;

    nlohmann::ordered_json to_json() const;
    static ForestModel from_json(const nlohmann::json& j);
    friend bool operator==(const ForestModel&, const ForestModel&) = default;
};

ForestModel fit_forest(const Dataset& train, const ForestOptions& options, std::uint64_t seed);

// Throws ShapeError on a feature-count mismatch and DataError on an empty set.
template <typename Model>
double accuracy(const Model& model, const Dataset& test);

std::vector<int> predict_all(const TreeModel& model, const Dataset& ds);
std::vector<int> predict_all(const ForestModel& model, const Dataset& ds);

}  // namespace tdac
