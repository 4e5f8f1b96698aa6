#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "fgpl/dataset.hpp"
#include "fgpl/metrics.hpp"
#include "fgpl/trainer.hpp"

namespace fgpl::cli {

inline constexpr const char* kToolVersion = "fgpl 0.1.0";

/// Resolved configuration text and the hashed inputs of one command run,
/// written at the top of every report.
struct Provenance {
    std::string command;
    std::string resolved_config;
    std::vector<std::pair<std::string, std::filesystem::path>> inputs;

    std::string render() const;
};

struct GenOptions {
    GeneratorSpec spec = default_generator_spec();
    std::filesystem::path out = ".";
};

struct TrainBaselineOptions {
    std::filesystem::path train;
    TrainConfig config;
    std::filesystem::path out = ".";
};

struct BuildLatticeOptions {
    std::filesystem::path model;
    std::filesystem::path train;
    int max_neighbors = 5;
    std::filesystem::path out = ".";
};

struct TrainFgplOptions {
    std::filesystem::path train;
    std::filesystem::path lattice;  ///< optional for ce / reweight
    TrainConfig config;
    std::string model_name = "fgpl";
    std::filesystem::path out = ".";
};

struct EvalCommandOptions {
    std::filesystem::path model;
    std::filesystem::path test;
    std::filesystem::path train;
    std::vector<int> ks;  ///< nominal budgets; empty = {20, 50, 100}
    std::vector<int> dp_ks{1, 5, 10};
    int ring_neighbors = 2;
    std::filesystem::path out = ".";
};

struct CompareOptions {
    std::filesystem::path train;
    std::filesystem::path test;
    TrainConfig baseline;
    TrainConfig method;
    std::vector<int> dp_ks{1, 5, 10};
    std::filesystem::path out = ".";
};

// Each command writes its artifacts under `out` and returns the primary output path.
std::filesystem::path cmd_gen(const GenOptions& options, const Provenance& provenance);
std::filesystem::path cmd_train_baseline(const TrainBaselineOptions& options, const Provenance& provenance);
std::filesystem::path cmd_build_lattice(const BuildLatticeOptions& options, const Provenance& provenance);
std::filesystem::path cmd_train_fgpl(const TrainFgplOptions& options, const Provenance& provenance);
std::filesystem::path cmd_eval(const EvalCommandOptions& options, const Provenance& provenance);
std::filesystem::path cmd_compare(const CompareOptions& options, const Provenance& provenance);

/// Loads a corpus for training: all classes must have at least one sample.
Corpus load_training_corpus(const std::filesystem::path& path);

/// Parses `argv`, dispatches, and maps errors to exit codes. Errors are
/// reported on `err` as one JSON record.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace fgpl::cli
