#pragma once

// End-to-end orchestration: ciphertext generation, filtration grid search,
// feature extraction, classifier training/evaluation and reporting. Every
// artifact is a function of the configuration and its seeds; wall-clock
// timings are kept out of the deterministic files.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "tdac/dataset_io.hpp"
#include "tdac/gsw.hpp"
#include "tdac/imaging.hpp"
#include "tdac/learners.hpp"
#include "tdac/vectorizers.hpp"

namespace tdac {

enum ExitCode : int { kExitOk = 0, kExitConfig = 2, kExitData = 3, kExitCheck = 4 };

// Maps a caught exception to the CLI exit code.
int exit_code_for(const std::exception& e);

struct RunSpec {
    std::string label;
    std::optional<std::size_t> n;
    std::optional<Residue> q;  // default 2^n (honest mode)
    std::optional<std::size_t> side;
    std::size_t m = 0;  // 0: 2N
    std::int64_t error_bound = 1;
    bool leaky = false;

    GswParams params(std::uint64_t seed) const;
    std::string name() const;  // label, or derived from the parameters
};

struct GridSpace {
    std::vector<std::pair<double, double>> directions;
    // Empty: a 3x3 lattice over the image plus its middle pixel.
    std::vector<Center> centers;

    static GridSpace default_grid();
    std::vector<Center> centers_for(std::size_t width, std::size_t height) const;
};

struct ExperimentConfig {
    std::uint64_t seed = 1;
    std::size_t count_per_class = 200;
    std::vector<RunSpec> runs;
    // With grid search on, the filtrations of the schema are replaced by the
    // selected (height, radial) pair; dims and vectorizers are kept.
    FeatureSchema schema = FeatureSchema::default_schema();
    bool grid_search = true;
    GridSpace grid = GridSpace::default_grid();
    double train_fraction = 0.7;
    double validation_fraction = 0.2;
    TreeOptions tree;
    ForestOptions forest;
    unsigned jobs = 1;
    std::filesystem::path out = "tdac_out";

    static ExperimentConfig defaults();
    // Throws ConfigError on unknown keys or invalid values.
    static ExperimentConfig from_json(const nlohmann::json& j);
    static ExperimentConfig load(const std::filesystem::path& path);
    nlohmann::ordered_json to_json() const;
    std::string hash() const;  // FNV-1a over the canonical JSON
    void validate() const;

    std::filesystem::path run_dir(std::size_t run) const;
    std::uint64_t stage_seed(std::size_t run, std::uint64_t stage) const;
};

// ---------------------------------------------------------------------------
// Library-level building blocks

// Entropy (or other vectorizer) blocks per sample for every direction and
// center of a grid, so each grid point is a column concatenation.
struct FilterBank {
    std::vector<std::pair<double, double>> directions;
    std::vector<Center> centers;
    std::vector<std::vector<std::vector<double>>> height;  // [direction][sample]
    std::vector<std::vector<std::vector<double>>> radial;  // [center][sample]
    std::vector<std::string> height_columns;               // per direction block, without filtration prefix
    std::vector<std::string> radial_columns;
};

FilterBank compute_filter_bank(const std::vector<BinaryImage>& images, const std::vector<std::pair<double, double>>& directions,
                               const std::vector<Center>& centers, const std::vector<int>& dims,
                               const std::vector<VectorizerSpec>& vectorizers, unsigned jobs);

Dataset assemble(const FilterBank& bank, std::size_t direction, std::size_t center, const std::vector<int>& labels);

struct GridRow {
    std::pair<double, double> direction;
    Center center;
    double validation_accuracy = 0.0;
};

struct GridSearchResult {
    std::vector<GridRow> rows;  // sorted by (direction, center)
    std::size_t best = 0;
    std::vector<std::string> warnings;
};

// Fits a decision tree per grid point on a stratified carve-out of the
// training indices and scores it on the held-out remainder.
GridSearchResult grid_search(const FilterBank& bank, const std::vector<int>& labels,
                             const std::vector<std::size_t>& train_indices, double validation_fraction,
                             const TreeOptions& tree, std::uint64_t seed, std::size_t width, std::size_t height);

struct ClassificationResult {
    TreeModel tree;
    ForestModel forest;
    double tree_accuracy = 0.0;
    double forest_accuracy = 0.0;
};

ClassificationResult train_and_evaluate(const Dataset& train, const Dataset& test, const TreeOptions& tree,
                                        const ForestOptions& forest, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Report

struct RunRow {
    std::string name;
    std::size_t n = 0;
    Residue q = 0;
    std::size_t side = 0;
    bool leaky = false;
    double forest_accuracy = 0.0;
    double tree_accuracy = 0.0;
    std::string direction;
    std::string center;
    std::size_t train_size = 0;
    std::size_t test_size = 0;

    double higher() const { return std::max(forest_accuracy, tree_accuracy); }
    nlohmann::ordered_json to_json() const;
    static RunRow from_json(const nlohmann::json& j);
};

struct PaperRow {
    std::size_t n;
    double forest;
    double tree;
};

// Reference accuracies (random forest, decision tree) per n.
const std::vector<PaperRow>& paper_reference();

struct ReportFiles {
    std::string markdown;
    std::string table_csv;
    std::string plot_csv;
};

ReportFiles render_report(const ExperimentConfig& config, const std::vector<std::optional<RunRow>>& rows);

// ---------------------------------------------------------------------------
// Subcommands. Each reads and writes under config.out / run_dir(i).

struct CommandLog {
    std::vector<std::string> lines;
    void info(std::string s);
};

void cmd_gen(const ExperimentConfig& config, std::size_t run, CommandLog& log);
void cmd_features(const std::filesystem::path& dataset, const FeatureSchema& schema, const std::filesystem::path& csv,
                  unsigned jobs, CommandLog& log);
void cmd_features(const ExperimentConfig& config, std::size_t run, CommandLog& log);
GridSearchResult cmd_gridsearch(const ExperimentConfig& config, std::size_t run, CommandLog& log);
void cmd_train(const ExperimentConfig& config, std::size_t run, CommandLog& log);
RunRow cmd_evaluate(const ExperimentConfig& config, std::size_t run, CommandLog& log);
// Returns false when some configured run has no results (listed as gaps).
bool cmd_report(const ExperimentConfig& config, CommandLog& log);

struct PipelineOutcome {
    std::vector<RunRow> rows;
    bool report_complete = false;
    bool check_passed = false;
    std::vector<std::string> check_messages;
};

// Beat the majority baseline of 0.5 by this margin on some leaky run.
inline constexpr double kCheckMargin = 0.2;

PipelineOutcome cmd_pipeline(const ExperimentConfig& config, CommandLog& log);

}  // namespace tdac
