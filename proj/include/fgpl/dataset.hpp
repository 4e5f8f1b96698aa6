#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace fgpl {

/// One subject-predicate-object instance. `subject_id`/`object_id` are object
/// category ids; `features` stand in for the visual evidence of the pair.
struct TripletSample {
    std::int64_t scene_id = 0;
    int subject_id = 0;
    int object_id = 0;
    int label = 0;
    std::vector<double> features;

    friend bool operator==(const TripletSample&, const TripletSample&) = default;
};

/// Dimensions shared by every sample of a corpus.
struct CorpusShape {
    int num_classes = 0;
    int num_objects = 0;
    int feature_dim = 0;

    friend bool operator==(const CorpusShape&, const CorpusShape&) = default;
};

struct Corpus {
    CorpusShape shape;
    std::vector<TripletSample> samples;

    friend bool operator==(const Corpus&, const Corpus&) = default;
};

struct ConfusablePair {
    int first = 0;
    int second = 0;
    double overlap = 0.0;  ///< 0: untouched means, 1: identical means.
};

struct GeneratorSpec {
    int num_classes = 50;
    int num_objects = 30;
    int feature_dim = 24;
    int num_scenes = 600;
    int scene_size = 50;
    double zipf_exponent = 1.5;
    std::vector<ConfusablePair> confusable_pairs;
    std::uint64_t seed = 0;

    double test_fraction = 0.3;       ///< share of scenes held out for testing
    double mean_scale = 5.0;          ///< expected norm of a class mean
    int contexts_per_class = 2;       ///< preferred (subject, object) pairs per class
    double context_noise = 0.1;       ///< probability of drawing a uniformly random context

    /// Throws ValidationError listing every violated field.
    void validate() const;
};

/// The desk-scale default: 50 classes, Zipf 1.5, ten planted head/tail pairs.
GeneratorSpec default_generator_spec(std::uint64_t seed = 0);

/// Zipf class probabilities p_i proportional to (i+1)^-s; class 0 is the most frequent.
std::vector<double> zipf_probabilities(int num_classes, double exponent);

struct SplitCorpus {
    Corpus train;
    Corpus test;
};

SplitCorpus generate_corpus(const GeneratorSpec& spec);

/// Class-conditional Gaussian means after pair interpolation (row-major C x D).
/// Exposed so tests can build analytically optimal boundaries.
std::vector<double> class_means(const GeneratorSpec& spec);

void save_corpus(const Corpus& corpus, const std::filesystem::path& path);
Corpus load_corpus(const std::filesystem::path& path);
std::string serialize_corpus(const Corpus& corpus);
Corpus parse_corpus(std::string_view text);

/// Checks ids and feature dimensions against `shape`; throws ValidationError.
void validate_samples(std::span<const TripletSample> samples, const CorpusShape& shape);

struct ClassFrequencies {
    std::vector<std::int64_t> counts;

    std::int64_t total() const;
    int num_classes() const { return static_cast<int>(counts.size()); }
    friend bool operator==(const ClassFrequencies&, const ClassFrequencies&) = default;
};

ClassFrequencies class_frequencies(std::span<const TripletSample> samples, int num_classes);

/// Rejects frequency vectors with a zero entry; loss weighting divides by n_i.
void require_all_classes_present(const ClassFrequencies& freqs);

}  // namespace fgpl
