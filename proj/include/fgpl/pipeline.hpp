#pragma once

#include <string>
#include <vector>

#include "fgpl/dataset.hpp"
#include "fgpl/lattice.hpp"
#include "fgpl/metrics.hpp"
#include "fgpl/trainer.hpp"

namespace fgpl {

/// A named training objective: loss kind plus ablation switches.
struct Method {
    std::string name;
    LossKind kind = LossKind::kCrossEntropy;
    LossSwitches switches;
};

/// CE baseline, frequency-only re-weighting, and CDL + EDL.
std::vector<Method> comparison_methods();

/// EDL on top of cross-entropy with each PC/BF combination.
std::vector<Method> edl_ablation_methods();

/// CDL with and without predicate correlation.
std::vector<Method> cdl_ablation_methods();

/// The biased CE baseline and the lattice extracted from its training-set predictions.
struct LatticeBuild {
    Classifier baseline;
    ClassFrequencies frequencies;
    ConfusionCounts confusion;
    PredicateLattice lattice;
};

LatticeBuild build_lattice(const Corpus& train, const TrainConfig& baseline_config, int max_neighbors);

/// Trains `method` with `config` (its loss kind and switches are overridden).
Classifier train_method(const Corpus& train, TrainConfig config, const Method& method,
                        const PredicateLattice& lattice);

struct MethodResult {
    Method method;
    EvalReport report;
};

std::vector<MethodResult> compare_methods(const Corpus& train, const Corpus& test, const TrainConfig& baseline_config,
                                          const TrainConfig& method_config, const std::vector<Method>& methods,
                                          const EvalOptions& eval_options = {});

/// Side-by-side CSV: one row per method.
std::string format_comparison(const std::vector<MethodResult>& results);

}  // namespace fgpl
