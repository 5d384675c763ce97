// tdac: generate GSW ciphertext datasets, extract persistent-homology
// features and classify the encrypted bits.

#include <cstdio>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "tdac/errors.hpp"
#include "tdac/experiment.hpp"

namespace {

struct Options {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::string out;
    bool leaky = false;
    std::optional<std::size_t> n;
    std::optional<std::size_t> side;
    std::optional<std::size_t> count;
    unsigned jobs = 0;
    bool check = false;
    std::string dataset;
    std::string schema;
};

void add_common(CLI::App* cmd, Options& o) {
    cmd->add_option("--config", o.config_path, "Experiment configuration (JSON)");
    cmd->add_option("--seed", o.seed, "Master seed");
    cmd->add_option("--out", o.out, "Output directory");
    cmd->add_flag("--leaky", o.leaky, "Use the noise-free leaky oracle");
    cmd->add_option("--n", o.n, "Lattice dimension n (single run)");
    cmd->add_option("--side", o.side, "Target ciphertext side; solves for (n, q)");
    cmd->add_option("--count", o.count, "Samples per class");
    cmd->add_option("--jobs", o.jobs, "Worker threads");
}

tdac::ExperimentConfig build_config(const Options& o) {
    auto config = o.config_path.empty() ? tdac::ExperimentConfig::defaults() : tdac::ExperimentConfig::load(o.config_path);
    if (o.seed) config.seed = *o.seed;
    if (!o.out.empty()) config.out = o.out;
    if (o.count) config.count_per_class = *o.count;
    if (o.jobs) config.jobs = o.jobs;
    if (o.n || o.side) {
        tdac::RunSpec r;
        r.n = o.n;
        r.side = o.side;
        r.leaky = o.leaky;
        config.runs = {r};
    } else if (o.leaky) {
        for (auto& r : config.runs) r.leaky = true;
    }
    config.validate();
    return config;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Topological classification of GSW-encrypted bits"};
    app.require_subcommand(1);
    Options o;

    auto* gen = app.add_subcommand("gen", "Generate labeled ciphertext datasets");
    auto* features = app.add_subcommand("features", "Extract persistence features to CSV");
    auto* grid = app.add_subcommand("gridsearch", "Select the height direction and radial center");
    auto* train = app.add_subcommand("train", "Fit decision tree and random forest");
    auto* evaluate = app.add_subcommand("evaluate", "Score the fitted models on the test split");
    auto* report = app.add_subcommand("report", "Write the accuracy report");
    auto* pipeline = app.add_subcommand("pipeline", "Run every stage for every configured run");
    for (auto* cmd : {gen, features, grid, train, evaluate, report, pipeline}) add_common(cmd, o);
    features->add_option("--dataset", o.dataset, "Single TDAC file to featurize (writes <out>/features.csv)");
    features->add_option("--schema", o.schema, "Feature schema JSON (default: entropy of height and radial)");
    pipeline->add_flag("--check", o.check, "Exit 4 unless some run beats the 0.5 baseline by 0.2");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : tdac::kExitConfig;
    }

    try {
        tdac::CommandLog log;
        if (features->parsed() && !o.dataset.empty()) {
            auto schema = o.schema.empty() ? tdac::FeatureSchema::default_schema()
                                           : tdac::FeatureSchema::from_json(nlohmann::json::parse(tdac::read_text(o.schema)));
            std::filesystem::path out = o.out.empty() ? std::filesystem::path(".") : std::filesystem::path(o.out);
            tdac::cmd_features(o.dataset, schema, out / "features.csv", o.jobs ? o.jobs : 1, log);
            return tdac::kExitOk;
        }

        auto config = build_config(o);
        if (features->parsed() && !o.schema.empty())
            config.schema = tdac::FeatureSchema::from_json(nlohmann::json::parse(tdac::read_text(o.schema)));
        const std::size_t runs = config.runs.size();
        if (gen->parsed()) {
            for (std::size_t i = 0; i < runs; ++i) tdac::cmd_gen(config, i, log);
        } else if (features->parsed()) {
            for (std::size_t i = 0; i < runs; ++i) tdac::cmd_features(config, i, log);
        } else if (grid->parsed()) {
            for (std::size_t i = 0; i < runs; ++i) tdac::cmd_gridsearch(config, i, log);
        } else if (train->parsed()) {
            for (std::size_t i = 0; i < runs; ++i) tdac::cmd_train(config, i, log);
        } else if (evaluate->parsed()) {
            for (std::size_t i = 0; i < runs; ++i) tdac::cmd_evaluate(config, i, log);
        } else if (report->parsed()) {
            if (!tdac::cmd_report(config, log)) return tdac::kExitData;
        } else if (pipeline->parsed()) {
            auto outcome = tdac::cmd_pipeline(config, log);
            if (!outcome.report_complete) return tdac::kExitData;
            if (o.check) {
                for (const auto& m : outcome.check_messages) fmt::print("{}\n", m);
                fmt::print("check: {}\n", outcome.check_passed ? "PASS" : "FAIL");
                if (!outcome.check_passed) return tdac::kExitCheck;
            }
        }
        return tdac::kExitOk;
    } catch (const nlohmann::json::exception& e) {
        fmt::print(stderr, "error: {}\n", e.what());
        return tdac::kExitConfig;
    } catch (const tdac::Error& e) {
        fmt::print(stderr, "error: {}\n", e.what());
        return tdac::exit_code_for(e);
    } catch (const std::exception& e) {
        fmt::print(stderr, "error: {}\n", e.what());
        return tdac::kExitData;
    }
}
