#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fgpl/dataset.hpp"
#include "fgpl/lattice.hpp"
#include "fgpl/model.hpp"

namespace fgpl {

/// One ground-truth triplet together with the model's top-1 predicate for it.
struct ScoredPrediction {
    std::int64_t scene_id = 0;
    int subject_id = 0;
    int object_id = 0;
    int label = 0;
    int predicted = 0;
    double confidence = 0.0;  ///< top-1 softmax probability
};

std::vector<ScoredPrediction> score_samples(const Classifier& model, std::span<const TripletSample> samples);

/// Pooled fraction of ground-truth triplets whose own prediction is among the
/// scene's K most confident and names the right predicate.
double recall_at_k(std::span<const ScoredPrediction> predictions, int k);

struct MeanRecall {
    double mean = 0.0;                ///< macro average over present classes
    std::vector<double> per_class;    ///< 0 for absent classes
    std::vector<bool> present;
};

MeanRecall mean_recall_at_k(std::span<const ScoredPrediction> predictions, int k, int num_classes);

struct GroupSplit {
    std::vector<int> head;
    std::vector<int> body;
    std::vector<int> tail;
};

/// Head/body/tail sizes: (16,17,17) for C = 50, else (ceil(C/3), ceil((C-ceil(C/3))/2), rest).
std::array<int, 3> default_group_sizes(int num_classes);

/// Partition by descending n_i, lowest index first on ties.
GroupSplit make_group_split(const ClassFrequencies& n, std::optional<std::array<int, 3>> sizes = std::nullopt);

struct GroupRecall {
    double head = 0.0;
    double body = 0.0;
    double tail = 0.0;
};

/// Macro average within each group over present classes; 0 for a group with none.
GroupRecall group_mean_recall(const MeanRecall& recalls, const GroupSplit& split);

/// Discriminatory power in percent: mean over present classes of
/// s'_ii - mean_{j in V'_i} s'_ij, with V'_i the k most confused classes.
double dp_at_k(const NormalizedConfusion& confusion, int k);

struct RingSlice {
    std::string label;  ///< "self", "class_<j>" or "other"
    int class_id = -1;  ///< -1 for "other"
    double proportion = 0.0;
};

struct RingRecord {
    int gt_class = 0;
    std::vector<RingSlice> slices;
};

RingRecord prediction_distribution(const NormalizedConfusion& confusion, int i, int k);

/// A per-scene budget K together with the nominal label it is reported under.
struct RecallBudget {
    int nominal = 0;
    int per_scene = 0;
};

/// Nominal {20, 50, 100} scaled by scene_size / 50 (at least 1).
std::vector<RecallBudget> default_budgets(int scene_size);

struct EvalOptions {
    std::vector<RecallBudget> budgets;  ///< empty: default_budgets(largest scene)
    std::vector<int> dp_ks{1, 5, 10};
    int ring_neighbors = 2;
    std::optional<std::array<int, 3>> group_sizes;
};

struct EvalReport {
    std::vector<RecallBudget> budgets;
    std::vector<double> r_at_k;
    std::vector<double> mr_at_k;
    std::vector<GroupRecall> group_mr;
    std::vector<MeanRecall> per_class;
    std::vector<int> dp_ks;
    std::vector<double> dp_at_k;
    NormalizedConfusion confusion_prime;
    std::vector<RingRecord> rings;
    GroupSplit split;

    double mr_at(int nominal) const;
    double dp_at(int k) const;
};

/// `train_freqs` defines the head/body/tail split.
EvalReport evaluate(const Classifier& model, const Corpus& test, const ClassFrequencies& train_freqs,
                    const EvalOptions& options = {});

/// Key-value text with matrices.
std::string format_report(const EvalReport& report);
/// CSV: metric,k,value
std::string format_metric_table(const EvalReport& report);
/// CSV: gt_class,slice_label,proportion
std::string format_ring_table(const EvalReport& report);

}  // namespace fgpl
