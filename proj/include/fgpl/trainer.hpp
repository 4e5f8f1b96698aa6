#pragma once

#include <cstdint>

#include "fgpl/dataset.hpp"
#include "fgpl/losses.hpp"
#include "fgpl/model.hpp"

namespace fgpl {

struct TrainConfig {
    double learning_rate = 0.01;
    int batch_size = 16;
    int epochs = 20;
    std::uint64_t seed = 0;
    LossKind loss_kind = LossKind::kCrossEntropy;
    LossConfig loss;
    bool use_prior = true;
    double prior_smoothing = 1.0;

    void validate() const;
};

/// Zero bias, weights uniform in [-0.01, 0.01] drawn from `seed`.
Classifier initial_classifier(const CorpusShape& shape, std::uint64_t seed);

/// Shuffled mini-batch SGD with the analytic gradients of `loss`. The log-prior
/// table (built from `train` when config.use_prior) is held fixed.
Classifier train_with(const Corpus& train, const TrainConfig& config, const LossEvaluator& loss);

/// Binds config.loss_kind to `lattice` and trains. Correlation-aware kinds
/// throw ConfigError when `lattice` is null.
Classifier train(const Corpus& train, const TrainConfig& config, const PredicateLattice* lattice);

}  // namespace fgpl
