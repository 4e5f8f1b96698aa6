#include <doctest.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <map>
#include <set>

#include "fgpl/dataset.hpp"
#include "fgpl/errors.hpp"
#include "fgpl/lattice.hpp"
#include "fgpl/trainer.hpp"
#include "test_util.hpp"

using namespace fgpl;

namespace {

GeneratorSpec two_class_spec(double overlap) {
    GeneratorSpec spec;
    spec.num_classes = 2;
    spec.num_objects = 3;
    spec.feature_dim = 8;
    spec.num_scenes = 200;
    spec.scene_size = 50;
    spec.confusable_pairs = {{0, 1, overlap}};
    spec.seed = 11;
    return spec;
}

// Bayes rule for unit-covariance Gaussians: argmax_c log p_c - |x - mu_c|^2 / 2.
int bayes_label(const std::vector<double>& means, const std::vector<double>& priors, const TripletSample& s) {
    const auto d = s.features.size();
    int best = 0;
    double best_score = -INFINITY;
    for (std::size_t c = 0; c < priors.size(); ++c) {
        double dist = 0.0;
        for (std::size_t k = 0; k < d; ++k) dist += std::pow(s.features[k] - means[c * d + k], 2);
        const double score = std::log(priors[c]) - 0.5 * dist;
        if (score > best_score) {
            best_score = score;
            best = static_cast<int>(c);
        }
    }
    return best;
}

}  // namespace

TEST_CASE("separated two-class corpus: Bayes-optimal linear boundary exceeds 99%") {
    const auto spec = two_class_spec(0.0);
    const auto data = generate_corpus(spec);
    const auto means = class_means(spec);
    const auto priors = zipf_probabilities(2, spec.zipf_exponent);
    std::size_t correct = 0;
    std::size_t total = 0;
    for (const auto* split : {&data.train, &data.test}) {
        for (const auto& s : split->samples) {
            correct += bayes_label(means, priors, s) == s.label;
            ++total;
        }
    }
    CHECK(total >= 10000);
    CHECK(static_cast<double>(correct) / static_cast<double>(total) > 0.99);
}

TEST_CASE("overlap 1 makes the class-conditional distributions identical") {
    const auto spec = two_class_spec(1.0);
    const auto means = class_means(spec);
    const auto d = static_cast<std::size_t>(spec.feature_dim);
    for (std::size_t k = 0; k < d; ++k) CHECK(means[k] == doctest::Approx(means[d + k]).epsilon(1e-12));

    // A trained classifier without context information cannot beat chance on balanced accuracy.
    auto data = generate_corpus(spec);
    TrainConfig config;
    config.use_prior = false;
    config.epochs = 3;
    const auto model = train(data.train, config, nullptr);
    std::array<std::size_t, 2> hits{};
    std::array<std::size_t, 2> totals{};
    for (const auto& s : data.test.samples) {
        ++totals[static_cast<std::size_t>(s.label)];
        hits[static_cast<std::size_t>(s.label)] += predict_scores(model, s).top1 == s.label;
    }
    const double balanced = 0.5 * (static_cast<double>(hits[0]) / static_cast<double>(totals[0]) +
                                   static_cast<double>(hits[1]) / static_cast<double>(totals[1]));
    CHECK(balanced == doctest::Approx(0.5).epsilon(0.06));
}

TEST_CASE("generation is deterministic and partitioned into scenes") {
    const auto spec = testing::small_spec();
    const auto a = generate_corpus(spec);
    const auto b = generate_corpus(spec);
    CHECK(a.train == b.train);
    CHECK(a.test == b.test);

    auto other = spec;
    other.seed = spec.seed + 1;
    CHECK_FALSE(generate_corpus(other).train == a.train);

    std::map<std::int64_t, int> sizes;
    for (const auto& s : a.train.samples) ++sizes[s.scene_id];
    for (const auto& s : a.test.samples) ++sizes[s.scene_id];
    CHECK(static_cast<int>(sizes.size()) == spec.num_scenes);
    for (const auto& [scene, size] : sizes) CHECK(size == spec.scene_size);
    validate_samples(a.train.samples, a.train.shape);
    validate_samples(a.test.samples, a.test.shape);
}

TEST_CASE("confusable pairs share preferred contexts") {
    auto spec = testing::small_spec();
    spec.context_noise = 0.0;
    const auto data = generate_corpus(spec);
    std::set<std::pair<int, int>> first;
    std::set<std::pair<int, int>> second;
    for (const auto& s : data.train.samples) {
        if (s.label == 4) first.insert({s.subject_id, s.object_id});
        if (s.label == 1) second.insert({s.subject_id, s.object_id});
    }
    for (const auto& ctx : first) CHECK(second.count(ctx) == 1);
}

TEST_CASE("generator spec validation lists every violated field") {
    GeneratorSpec spec = testing::small_spec();
    spec.num_classes = 1;
    spec.zipf_exponent = -1.0;
    spec.confusable_pairs = {{0, 0, 0.5}};
    try {
        spec.validate();
        FAIL("expected a validation error");
    } catch (const ValidationError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("num_classes") != std::string::npos);
        CHECK(msg.find("zipf_exponent") != std::string::npos);
        CHECK(msg.find("distinct") != std::string::npos);
    }
    spec = testing::small_spec();
    spec.confusable_pairs = {{0, 9, 0.5}};
    CHECK_THROWS_AS(generate_corpus(spec), ValidationError);
}

TEST_CASE("corpus save/load round trip is lossless") {
    const auto dir = testing::scratch_dir("corpus_roundtrip");
    const auto data = generate_corpus(testing::small_spec());
    save_corpus(data.train, dir / "train.csv");
    CHECK(load_corpus(dir / "train.csv") == data.train);

    const auto text = serialize_corpus(data.test);
    CHECK(text.rfind("# C=6 O=5 D=4\n", 0) == 0);
    CHECK(serialize_corpus(parse_corpus(text)) == text);
}

TEST_CASE("corpus parsing errors") {
    SUBCASE("negative label names the line") {
        try {
            parse_corpus("# C=2 O=2 D=1\n0,0,1,1,0.5\n0,1,0,-1,0.25\n");
            FAIL("expected a parse error");
        } catch (const ParseError& e) {
            CHECK(e.line() == 3);
        }
    }
    SUBCASE("class id >= C") { CHECK_THROWS_AS(parse_corpus("# C=2 O=2 D=1\n0,0,1,2,0.5\n"), ValidationError); }
    SUBCASE("wrong field count") { CHECK_THROWS_AS(parse_corpus("# C=2 O=2 D=2\n0,0,1,1,0.5\n"), ParseError); }
    SUBCASE("garbage real") { CHECK_THROWS_AS(parse_corpus("# C=2 O=2 D=1\n0,0,1,1,abc\n"), ParseError); }
    SUBCASE("missing header") { CHECK_THROWS_AS(parse_corpus("0,0,1,1,0.5\n"), ParseError); }
    SUBCASE("empty file is an empty corpus") {
        const auto dir = testing::scratch_dir("corpus_empty");
        std::ofstream(dir / "empty.csv").close();
        CHECK(load_corpus(dir / "empty.csv").samples.empty());
    }
    SUBCASE("missing file is an I/O error") { CHECK_THROWS_AS(load_corpus("/nonexistent/corpus.csv"), IoError); }
}

TEST_CASE("class frequencies") {
    std::vector<TripletSample> samples(3);
    samples[0].label = 0;
    samples[1].label = 0;
    samples[2].label = 1;
    CHECK(class_frequencies(samples, 2).counts == std::vector<std::int64_t>{2, 1});

    for (auto& s : samples) s.label = 1;
    CHECK(class_frequencies(samples, 3).counts == std::vector<std::int64_t>{0, 3, 0});
    CHECK_THROWS_AS(require_all_classes_present(class_frequencies(samples, 3)), ValidationError);

    auto spec = default_generator_spec(3);
    const auto data = generate_corpus(spec);
    const auto n = class_frequencies(data.train.samples, spec.num_classes);
    CHECK(n.total() == static_cast<std::int64_t>(data.train.samples.size()));
    CHECK(std::is_sorted(n.counts.rbegin(), n.counts.rend()));
    CHECK(n.counts.back() >= 1);
}

TEST_CASE("larger planted overlap yields more confusion between the pair") {
    auto confusion_rate = [](double overlap) {
        GeneratorSpec spec;
        spec.num_classes = 4;
        spec.num_objects = 4;
        spec.feature_dim = 6;
        spec.num_scenes = 60;
        spec.scene_size = 40;
        spec.zipf_exponent = 0.5;
        spec.mean_scale = 4.0;
        spec.confusable_pairs = {{1, 0, overlap}};
        spec.seed = 5;
        const auto data = generate_corpus(spec);
        TrainConfig config;
        config.epochs = 10;
        const auto model = train(data.train, config, nullptr);
        const auto counts = collect_biased_predictions(model, data.test.samples);
        const auto n = class_frequencies(data.test.samples, 4);
        return static_cast<double>(counts.at(0, 1) + counts.at(1, 0)) / static_cast<double>(n.counts[0] + n.counts[1]);
    };
    CHECK(confusion_rate(0.8) > confusion_rate(0.2));
}
