#include "fgpl/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "fgpl/errors.hpp"
#include "fgpl/softmax.hpp"

namespace fgpl {

void TrainConfig::validate() const {
    std::vector<std::string> problems;
    if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) problems.push_back("learning_rate must be > 0");
    if (batch_size < 1) problems.push_back("batch_size must be >= 1");
    if (epochs < 0) problems.push_back("epochs must be >= 0");
    if (use_prior && (!(prior_smoothing > 0.0) || !std::isfinite(prior_smoothing))) {
        problems.push_back("prior_smoothing must be > 0");
    }
    if (!problems.empty()) {
        std::string msg = "invalid train config:";
        for (const auto& p : problems) msg += " " + p + ";";
        throw ValidationError(msg);
    }
    loss.validate();
}

Classifier initial_classifier(const CorpusShape& shape, std::uint64_t seed) {
    auto model = Classifier::zeros(shape);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> init(-0.01, 0.01);
    for (auto& w : model.weights) w = init(rng);
    return model;
}

Classifier train_with(const Corpus& train, const TrainConfig& config, const LossEvaluator& loss) {
    config.validate();
    if (train.samples.empty()) throw ValidationError("training set is empty");
    validate_samples(train.samples, train.shape);

    auto model = initial_classifier(train.shape, config.seed);
    if (config.use_prior) {
        model.attach_prior(build_frequency_prior(train.samples, train.shape, config.prior_smoothing));
    }

    const auto c = static_cast<std::size_t>(train.shape.num_classes);
    const auto d = static_cast<std::size_t>(train.shape.feature_dim);
    std::vector<std::size_t> order(train.samples.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::mt19937_64 rng(config.seed ^ 0x5eed5eed5eed5eedULL);

    std::vector<double> grad_w(c * d);
    std::vector<double> grad_b(c);
    const auto batch = static_cast<std::size_t>(config.batch_size);
    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        for (std::size_t start = 0; start < order.size(); start += batch) {
            const auto stop = std::min(order.size(), start + batch);
            std::fill(grad_w.begin(), grad_w.end(), 0.0);
            std::fill(grad_b.begin(), grad_b.end(), 0.0);
            for (std::size_t k = start; k < stop; ++k) {
                const auto& sample = train.samples[order[k]];
                const auto eta = forward_logits(model, sample);
                const auto out = loss(eta, sample.label);
                for (std::size_t r = 0; r < c; ++r) {
                    const double g = out.grad[r];
                    grad_b[r] += g;
                    if (g == 0.0) continue;
                    double* gw = grad_w.data() + r * d;
                    for (std::size_t j = 0; j < d; ++j) gw[j] += g * sample.features[j];
                }
            }
            const double step = config.learning_rate / static_cast<double>(stop - start);
            for (std::size_t k = 0; k < grad_w.size(); ++k) model.weights[k] -= step * grad_w[k];
            for (std::size_t r = 0; r < c; ++r) model.bias[r] -= step * grad_b[r];
        }
        require_finite(model.weights, "classifier weights");
        require_finite(model.bias, "classifier bias");
    }
    return model;
}

Classifier train(const Corpus& train, const TrainConfig& config, const PredicateLattice* lattice) {
    if (lattice != nullptr && lattice->num_classes != train.shape.num_classes) {
        throw ValidationError("lattice has C=" + std::to_string(lattice->num_classes) + ", corpus has C=" +
                              std::to_string(train.shape.num_classes));
    }
    return train_with(train, config, make_loss_evaluator(config.loss_kind, config.loss, lattice));
}

}  // namespace fgpl
