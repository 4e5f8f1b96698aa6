#include "fgpl/losses.hpp"

#include <cmath>
#include <limits>
#include <memory>

#include "fgpl/errors.hpp"
#include "fgpl/softmax.hpp"

namespace fgpl {

namespace {

void check_label(int label, std::size_t num_classes) {
    if (label < 0 || static_cast<std::size_t>(label) >= num_classes) {
        throw ValidationError("label " + std::to_string(label) + " outside [0, " + std::to_string(num_classes) + ")");
    }
}

void check_lattice(const PredicateLattice& lattice, std::size_t num_classes) {
    if (static_cast<std::size_t>(lattice.num_classes) != num_classes) {
        throw ValidationError("lattice has C=" + std::to_string(lattice.num_classes) + ", logits have " +
                              std::to_string(num_classes) + " entries");
    }
}

// Exponent applied to mu_ij, or 0 when w_ij = 1.
double weight_exponent(int i, int j, const PredicateLattice& lattice, const LossConfig& config) {
    if (i == j || !config.switches.cdl_rf) return 0.0;
    const double mu = lattice.count(j) / lattice.count(i);
    if (!config.switches.cdl_pc) return mu > 1.0 ? config.alpha : 0.0;
    const bool strong = correlation_ratio(lattice, i, j) > config.xi;
    if (mu >= 1.0) return strong ? config.beta : 0.0;
    return strong ? 0.0 : config.alpha;
}

LossOutput combine(LossOutput cdl, const LossOutput& edl, double lambda) {
    cdl.value += lambda * edl.value;
    for (std::size_t k = 0; k < cdl.grad.size(); ++k) cdl.grad[k] += lambda * edl.grad[k];
    return cdl;
}

}  // namespace

std::string to_string(LossKind kind) {
    switch (kind) {
        case LossKind::kCrossEntropy: return "ce";
        case LossKind::kReweight: return "reweight";
        case LossKind::kCdl: return "cdl";
        case LossKind::kCdlEdl: return "cdl_edl";
    }
    return "unknown";
}

LossKind parse_loss_kind(std::string_view name) {
    if (name == "ce") return LossKind::kCrossEntropy;
    if (name == "reweight") return LossKind::kReweight;
    if (name == "cdl") return LossKind::kCdl;
    if (name == "cdl_edl" || name == "fgpl") return LossKind::kCdlEdl;
    throw ValidationError("unknown loss kind '" + std::string(name) + "' (expected ce, reweight, cdl, cdl_edl)");
}

void LossConfig::validate() const {
    std::vector<std::string> problems;
    if (!(alpha > 0.0) || !std::isfinite(alpha)) problems.push_back("alpha must be > 0");
    if (!(beta > 0.0) || !std::isfinite(beta)) problems.push_back("beta must be > 0");
    if (!(xi == -1.0 || (xi >= 0.0 && xi <= 1.0))) problems.push_back("xi must lie in [0,1] or equal -1");
    if (!(delta >= 0.0) || !std::isfinite(delta)) problems.push_back("delta must be >= 0");
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) problems.push_back("lambda must be >= 0");
    if (max_neighbors < 1) problems.push_back("M must be >= 1");
    if (!problems.empty()) {
        std::string msg = "invalid loss config:";
        for (const auto& p : problems) msg += " " + p + ";";
        throw ValidationError(msg);
    }
}

double cdl_weight(int i, int j, const PredicateLattice& lattice, const LossConfig& config) {
    check_label(i, static_cast<std::size_t>(lattice.num_classes));
    check_label(j, static_cast<std::size_t>(lattice.num_classes));
    const double exponent = weight_exponent(i, j, lattice, config);
    if (exponent == 0.0) return 1.0;
    return std::pow(lattice.count(j) / lattice.count(i), exponent);
}

std::vector<double> cdl_log_weights(int i, const PredicateLattice& lattice, const LossConfig& config) {
    check_label(i, static_cast<std::size_t>(lattice.num_classes));
    std::vector<double> log_w(static_cast<std::size_t>(lattice.num_classes), 0.0);
    for (int j = 0; j < lattice.num_classes; ++j) {
        const double exponent = weight_exponent(i, j, lattice, config);
        if (exponent == 0.0) continue;
        const double w = std::pow(lattice.count(j) / lattice.count(i), exponent);
        log_w[static_cast<std::size_t>(j)] =
            std::isfinite(w) ? std::log(w) : exponent * (std::log(lattice.count(j)) - std::log(lattice.count(i)));
    }
    return log_w;
}

LossOutput reweighted_ce_loss_grad(std::span<const double> logits, int label, std::span<const double> log_weights) {
    check_label(label, logits.size());
    require_finite(logits, "logits");
    if (log_weights.size() != logits.size()) throw ValidationError("weight row length does not match logits");
    const auto c = logits.size();
    std::vector<double> z(c);
    for (std::size_t k = 0; k < c; ++k) z[k] = logits[k] + log_weights[k];
    const double lse = log_sum_exp(z);

    LossOutput out;
    out.value = lse - logits[static_cast<std::size_t>(label)];
    out.grad.resize(c);
    for (std::size_t k = 0; k < c; ++k) out.grad[k] = std::exp(z[k] - lse);
    out.grad[static_cast<std::size_t>(label)] -= 1.0;
    return out;
}

LossOutput cdl_loss_grad(std::span<const double> logits, int label, const PredicateLattice& lattice,
                         const LossConfig& config) {
    check_lattice(lattice, logits.size());
    check_label(label, logits.size());
    return reweighted_ce_loss_grad(logits, label, cdl_log_weights(label, lattice, config));
}

LossOutput ce_loss_grad(std::span<const double> logits, int label) {
    const std::vector<double> unit(logits.size(), 0.0);
    return reweighted_ce_loss_grad(logits, label, unit);
}

LossOutput edl_loss_grad(std::span<const double> logits, int label, const PredicateLattice& lattice,
                         const LossConfig& config) {
    check_lattice(lattice, logits.size());
    check_label(label, logits.size());
    require_finite(logits, "logits");
    const auto c = logits.size();
    const auto i = static_cast<std::size_t>(label);

    std::vector<int> all_others;
    const std::vector<int>* group = &lattice.neighbors[i];
    if (config.switches.edl_pc) {
        if (group->empty()) throw ConfigError("empty neighbor set for class " + std::to_string(label));
    } else {
        for (int j = 0; j < static_cast<int>(c); ++j) {
            if (j != label) all_others.push_back(j);
        }
        group = &all_others;
    }

    const auto phi = softmax(logits);
    const double inv_size = 1.0 / static_cast<double>(group->size());

    // dL/dphi, then chain through the softmax Jacobian.
    std::vector<double> d_phi(c, 0.0);
    LossOutput out;
    for (int j : *group) {
        const auto ju = static_cast<std::size_t>(j);
        const double margin = phi[ju] - phi[i] + config.delta;
        if (!(margin > 0.0)) continue;
        const double balance = config.switches.edl_bf ? lattice.count(j) / lattice.count(label) : 1.0;
        out.value += margin * balance * inv_size;
        d_phi[ju] += balance * inv_size;
        d_phi[i] -= balance * inv_size;
    }
    double mean = 0.0;
    for (std::size_t k = 0; k < c; ++k) mean += d_phi[k] * phi[k];
    out.grad.resize(c);
    for (std::size_t k = 0; k < c; ++k) out.grad[k] = phi[k] * (d_phi[k] - mean);
    return out;
}

LossOutput fgpl_loss_grad(std::span<const double> logits, int label, const PredicateLattice& lattice,
                          const LossConfig& config) {
    auto cdl = cdl_loss_grad(logits, label, lattice, config);
    if (config.lambda == 0.0) return cdl;
    return combine(std::move(cdl), edl_loss_grad(logits, label, lattice, config), config.lambda);
}

LossEvaluator make_loss_evaluator(LossKind kind, const LossConfig& config, const PredicateLattice* lattice) {
    config.validate();
    if (kind == LossKind::kCrossEntropy) {
        return [](std::span<const double> logits, int label) { return ce_loss_grad(logits, label); };
    }
    if (lattice == nullptr) {
        throw ConfigError("loss '" + to_string(kind) + "' requires a predicate lattice");
    }
    LossConfig resolved = config;
    if (kind == LossKind::kReweight) {
        resolved.switches.cdl_pc = false;
        resolved.switches.cdl_rf = true;
    }
    // Weights depend only on (label, lattice, config); tabulate them once.
    auto table = std::make_shared<std::vector<std::vector<double>>>();
    for (int i = 0; i < lattice->num_classes; ++i) table->push_back(cdl_log_weights(i, *lattice, resolved));

    if (kind == LossKind::kCdlEdl) {
        if (resolved.switches.edl_pc) {
            for (int i = 0; i < lattice->num_classes; ++i) {
                if (lattice->neighbors[static_cast<std::size_t>(i)].empty()) {
                    throw ConfigError("empty neighbor set for class " + std::to_string(i));
                }
            }
        }
        return [table, resolved, lattice](std::span<const double> logits, int label) {
            check_label(label, table->size());
            auto cdl = reweighted_ce_loss_grad(logits, label, (*table)[static_cast<std::size_t>(label)]);
            if (resolved.lambda == 0.0) return cdl;
            return combine(std::move(cdl), edl_loss_grad(logits, label, *lattice, resolved), resolved.lambda);
        };
    }
    return [table](std::span<const double> logits, int label) {
        check_label(label, table->size());
        return reweighted_ce_loss_grad(logits, label, (*table)[static_cast<std::size_t>(label)]);
    };
}

}  // namespace fgpl
