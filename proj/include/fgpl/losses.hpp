#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "fgpl/lattice.hpp"

namespace fgpl {

enum class LossKind {
    kCrossEntropy,  ///< plain softmax cross-entropy
    kReweight,      ///< frequency-only (seesaw) re-weighting
    kCdl,           ///< category discriminating loss
    kCdlEdl,        ///< CDL + lambda * entity discriminating loss
};

std::string to_string(LossKind kind);
LossKind parse_loss_kind(std::string_view name);

/// Ablation switches: PC = predicate correlation, RF = re-weighting factor,
/// BF = balancing factor.
struct LossSwitches {
    bool cdl_pc = true;
    bool cdl_rf = true;
    bool edl_pc = true;
    bool edl_bf = true;
};

struct LossConfig {
    double alpha = 1.5;
    double beta = 2.0;
    double xi = 0.9;  ///< -1 forces every pair onto the strongly-correlated branch
    double delta = 0.5;
    double lambda = 0.1;
    int max_neighbors = 5;  ///< M
    LossSwitches switches;

    void validate() const;
};

struct LossOutput {
    double value = 0.0;
    std::vector<double> grad;  ///< d loss / d logits
};

/// Re-weighting factor w_ij for positive class i and negative class j.
double cdl_weight(int i, int j, const PredicateLattice& lattice, const LossConfig& config);

/// log w_ij for every j; stays finite when w_ij itself would overflow.
std::vector<double> cdl_log_weights(int i, const PredicateLattice& lattice, const LossConfig& config);

/// Re-weighted softmax cross-entropy given precomputed log w_{i,.} (log w_ii must be 0).
LossOutput reweighted_ce_loss_grad(std::span<const double> logits, int label, std::span<const double> log_weights);

LossOutput cdl_loss_grad(std::span<const double> logits, int label, const PredicateLattice& lattice,
                         const LossConfig& config);
LossOutput edl_loss_grad(std::span<const double> logits, int label, const PredicateLattice& lattice,
                         const LossConfig& config);
LossOutput fgpl_loss_grad(std::span<const double> logits, int label, const PredicateLattice& lattice,
                          const LossConfig& config);
LossOutput ce_loss_grad(std::span<const double> logits, int label);

using LossEvaluator = std::function<LossOutput(std::span<const double> logits, int label)>;

/// Binds a loss kind to its configuration. Every kind except cross-entropy
/// needs `lattice`; kReweight only reads its class counts. The returned
/// evaluator references `lattice`, which must outlive it.
LossEvaluator make_loss_evaluator(LossKind kind, const LossConfig& config, const PredicateLattice* lattice);

}  // namespace fgpl
