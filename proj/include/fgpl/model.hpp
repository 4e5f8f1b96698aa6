#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "fgpl/dataset.hpp"

namespace fgpl {

/// Smoothed Pr(predicate | subject, object) over every (subject, object) context.
struct FrequencyPrior {
    int num_objects = 0;
    int num_classes = 0;
    std::vector<double> probabilities;  ///< O x O x C, row-major

    std::span<const double> row(int subject, int object) const;
};

/// prior(r|s,o) = (count(s,r,o) + eps) / (sum_r count(s,r,o) + C eps).
FrequencyPrior build_frequency_prior(std::span<const TripletSample> samples, const CorpusShape& shape,
                                     double smoothing);

/// Linear predicate classifier; an optional fixed log-prior table offsets the logits.
struct Classifier {
    CorpusShape shape;
    std::vector<double> weights;    ///< C x D, row-major
    std::vector<double> bias;       ///< C
    std::vector<double> log_prior;  ///< O x O x C or empty

    bool has_prior() const { return !log_prior.empty(); }
    std::span<const double> log_prior_row(int subject, int object) const;

    static Classifier zeros(const CorpusShape& shape);
    void attach_prior(const FrequencyPrior& prior);

    friend bool operator==(const Classifier&, const Classifier&) = default;
};

/// Throws ValidationError if the sample does not fit the classifier's dimensions.
void check_compatible(const Classifier& model, const TripletSample& sample);
void check_compatible(const Classifier& model, const CorpusShape& shape);

std::vector<double> forward_logits(const Classifier& model, const TripletSample& sample);

struct ScoredClass {
    int top1 = 0;
    std::vector<double> probabilities;
};

ScoredClass predict_scores(const Classifier& model, const TripletSample& sample);

std::string serialize_model(const Classifier& model);
Classifier parse_model(std::string_view text);
void save_model(const Classifier& model, const std::filesystem::path& path);
Classifier load_model(const std::filesystem::path& path);

}  // namespace fgpl
