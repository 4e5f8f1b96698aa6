#include <doctest.h>

#include <cmath>
#include <random>

#include "fgpl/errors.hpp"
#include "fgpl/metrics.hpp"
#include "fgpl/trainer.hpp"
#include "test_util.hpp"

using namespace fgpl;

namespace {

ScoredPrediction pred(std::int64_t scene, int label, int predicted, double confidence) {
    ScoredPrediction p;
    p.scene_id = scene;
    p.label = label;
    p.predicted = predicted;
    p.confidence = confidence;
    return p;
}

NormalizedConfusion confusion_of(int c, std::vector<double> s) {
    return NormalizedConfusion{c, std::move(s), std::vector<bool>(static_cast<std::size_t>(c), true)};
}

std::vector<ScoredPrediction> random_predictions(int c, int scenes, std::mt19937_64& rng) {
    std::uniform_int_distribution<int> cls(0, c - 1);
    std::uniform_int_distribution<int> size(1, 12);
    std::uniform_real_distribution<double> conf(0.0, 1.0);
    std::vector<ScoredPrediction> out;
    for (int scene = 0; scene < scenes; ++scene) {
        const int g = size(rng);
        for (int k = 0; k < g; ++k) {
            const int label = cls(rng);
            out.push_back(pred(scene, label, conf(rng) < 0.5 ? label : cls(rng), conf(rng)));
        }
    }
    return out;
}

}  // namespace

TEST_CASE("recall at K") {
    SUBCASE("constructed scene") {
        const std::vector<ScoredPrediction> scene{pred(0, 1, 1, 0.9), pred(0, 2, 2, 0.8), pred(0, 0, 3, 0.7),
                                                  pred(0, 0, 3, 0.6)};
        CHECK(recall_at_k(scene, 2) == 0.5);
        CHECK(recall_at_k(scene, 1) == 0.25);
        CHECK(recall_at_k(scene, 10) == 0.5);
    }
    SUBCASE("perfect and all wrong") {
        std::vector<ScoredPrediction> right;
        std::vector<ScoredPrediction> wrong;
        for (int k = 0; k < 6; ++k) {
            right.push_back(pred(k % 2, k % 3, k % 3, 0.5));
            wrong.push_back(pred(k % 2, k % 3, (k + 1) % 3, 0.5));
        }
        CHECK(recall_at_k(right, 3) == 1.0);
        CHECK(recall_at_k(wrong, 3) == 0.0);
    }
    SUBCASE("correct predictions outside the budget miss") {
        const std::vector<ScoredPrediction> scene{pred(3, 0, 1, 0.9), pred(3, 1, 1, 0.1)};
        CHECK(recall_at_k(scene, 1) == 0.0);
    }
    SUBCASE("ties keep input order") {
        const std::vector<ScoredPrediction> first{pred(0, 0, 0, 0.5), pred(0, 1, 2, 0.5)};
        const std::vector<ScoredPrediction> second{pred(0, 1, 2, 0.5), pred(0, 0, 0, 0.5)};
        CHECK(recall_at_k(first, 1) == 0.5);
        CHECK(recall_at_k(second, 1) == 0.0);
    }
    CHECK_THROWS_AS(recall_at_k({}, 0), ValidationError);
    CHECK(recall_at_k({}, 1) == 0.0);
}

TEST_CASE("recall is monotone in K") {
    std::mt19937_64 rng(1);
    for (int trial = 0; trial < 30; ++trial) {
        const auto predictions = random_predictions(5, 20, rng);
        double prev = 0.0;
        double prev_mean = 0.0;
        for (int k = 1; k <= 13; ++k) {
            const double r = recall_at_k(predictions, k);
            const double m = mean_recall_at_k(predictions, k, 5).mean;
            CHECK(r >= prev);
            CHECK(m >= prev_mean);
            prev = r;
            prev_mean = m;
        }
    }
}

TEST_CASE("mean recall") {
    SUBCASE("per-class recalls 1, 0.5, 0") {
        const std::vector<ScoredPrediction> p{pred(0, 0, 0, 0.9), pred(0, 1, 1, 0.9), pred(1, 1, 0, 0.9),
                                              pred(1, 2, 0, 0.9), pred(2, 2, 1, 0.9)};
        const auto mr = mean_recall_at_k(p, 5, 3);
        CHECK(mr.mean == doctest::Approx(0.5));
        CHECK(mr.per_class == std::vector<double>{1.0, 0.5, 0.0});
    }
    SUBCASE("macro average ignores class sizes and absent classes") {
        std::vector<ScoredPrediction> p{pred(0, 0, 0, 0.9)};
        for (int k = 0; k < 9; ++k) p.push_back(pred(k + 1, 1, 0, 0.9));
        const auto mr = mean_recall_at_k(p, 1, 4);
        CHECK(mr.mean == 0.5);
        CHECK(mr.present == std::vector<bool>{true, true, false, false});
    }
    SUBCASE("duplicating one class leaves the others unchanged") {
        std::mt19937_64 rng(2);
        const auto base = random_predictions(4, 15, rng);
        auto doubled = base;
        for (const auto& p : base) {
            if (p.label == 2) {
                auto copy = p;
                copy.scene_id += 1000;
                doubled.push_back(copy);
            }
        }
        const auto a = mean_recall_at_k(base, 3, 4);
        const auto b = mean_recall_at_k(doubled, 3, 4);
        for (int i : {0, 1, 3}) CHECK(a.per_class[static_cast<std::size_t>(i)] == b.per_class[static_cast<std::size_t>(i)]);
    }
}

TEST_CASE("group split and group recall") {
    std::vector<std::int64_t> counts;
    for (int i = 0; i < 50; ++i) counts.push_back(1000 - 10 * i);
    const auto split = make_group_split(ClassFrequencies{counts});
    CHECK(split.head.size() == 16);
    CHECK(split.body.size() == 17);
    CHECK(split.tail.size() == 17);
    CHECK(split.head.front() == 0);
    CHECK(split.tail.back() == 49);

    CHECK(default_group_sizes(6) == std::array<int, 3>{2, 2, 2});
    CHECK(default_group_sizes(7) == std::array<int, 3>{3, 2, 2});
    CHECK(default_group_sizes(8) == std::array<int, 3>{3, 3, 2});
    CHECK_THROWS_AS(make_group_split(ClassFrequencies{{1, 2, 3}}, std::array<int, 3>{1, 1, 2}), ValidationError);

    const auto tied = make_group_split(ClassFrequencies{{5, 9, 5, 5}}, std::array<int, 3>{1, 2, 1});
    CHECK(tied.head == std::vector<int>{1});
    CHECK(tied.body == std::vector<int>{0, 2});
    CHECK(tied.tail == std::vector<int>{3});

    MeanRecall equal;
    equal.per_class.assign(50, 0.3);
    equal.present.assign(50, true);
    const auto g = group_mean_recall(equal, split);
    CHECK(g.head == doctest::Approx(0.3));
    CHECK(g.body == doctest::Approx(0.3));
    CHECK(g.tail == doctest::Approx(0.3));

    MeanRecall head_only = equal;
    for (int i = 0; i < 50; ++i) head_only.per_class[static_cast<std::size_t>(i)] = i < 16 ? 1.0 : 0.0;
    const auto h = group_mean_recall(head_only, split);
    CHECK(h.head == 1.0);
    CHECK(h.body == 0.0);
    CHECK(h.tail == 0.0);
}

TEST_CASE("discriminatory power") {
    CHECK(dp_at_k(confusion_of(3, {1, 0, 0, 0, 1, 0, 0, 0, 1}), 1) == 100.0);
    CHECK(dp_at_k(confusion_of(3, {1, 0, 0, 0, 1, 0, 0, 0, 1}), 2) == 100.0);
    const double third = 1.0 / 3.0;
    CHECK(dp_at_k(confusion_of(3, std::vector<double>(9, third)), 2) == 0.0);
    const auto rows = confusion_of(3, {0.6, 0.3, 0.1, 0.1, 0.6, 0.3, 0.3, 0.1, 0.6});
    CHECK(dp_at_k(rows, 1) == doctest::Approx(30.0));
    CHECK(dp_at_k(rows, 2) == doctest::Approx(40.0));

    auto absent = confusion_of(3, {1, 0, 0, 0, 0, 0, 0, 0, 1});
    absent.present[1] = false;
    CHECK(dp_at_k(absent, 1) == 100.0);

    CHECK(dp_at_k(confusion_of(2, {0, 1, 1, 0}), 1) == -100.0);
    CHECK_THROWS_AS(dp_at_k(rows, 0), ValidationError);
    CHECK_THROWS_AS(dp_at_k(rows, 3), ValidationError);

    auto moved = rows;
    moved.s[0] -= 0.05;
    moved.s[1] += 0.05;
    CHECK(dp_at_k(moved, 2) < dp_at_k(rows, 2));
}

TEST_CASE("ring records") {
    const auto identity = confusion_of(3, {1, 0, 0, 0, 1, 0, 0, 0, 1});
    const auto ring = prediction_distribution(identity, 1, 2);
    REQUIRE(ring.slices.size() == 4);
    CHECK(ring.slices[0].label == "self");
    CHECK(ring.slices[0].proportion == 1.0);
    CHECK(ring.slices[1].label == "class_0");
    CHECK(ring.slices[1].proportion == 0.0);
    CHECK(ring.slices[2].label == "class_2");
    CHECK(ring.slices[3].label == "other");
    CHECK(ring.slices[3].proportion == 0.0);

    const auto row = confusion_of(5, {0.39, 0.01, 0.3, 0.2, 0.1,  //
                                      0, 1, 0, 0, 0, 0, 0, 1, 0, 0, 0, 0, 0, 1, 0, 0, 0, 0, 0, 1});
    const auto named = prediction_distribution(row, 0, 2);
    CHECK(named.slices[1].class_id == 2);
    CHECK(named.slices[1].proportion == 0.3);
    CHECK(named.slices[2].class_id == 3);
    CHECK(named.slices[2].proportion == 0.2);
    CHECK(named.slices[3].proportion == doctest::Approx(0.11));
    double total = 0.0;
    for (const auto& slice : named.slices) total += slice.proportion;
    CHECK(std::abs(total - 1.0) < 1e-9);
    CHECK_THROWS_AS(prediction_distribution(row, 5, 1), ValidationError);
}

TEST_CASE("budgets scale with scene size") {
    const auto full = default_budgets(50);
    CHECK(full[0].per_scene == 20);
    CHECK(full[1].per_scene == 50);
    CHECK(full[2].per_scene == 100);
    const auto small = default_budgets(10);
    CHECK(small[0].nominal == 20);
    CHECK(small[0].per_scene == 4);
    CHECK(small[2].per_scene == 20);
    CHECK(default_budgets(1)[0].per_scene == 1);
}

TEST_CASE("evaluation report") {
    const auto data = generate_corpus(testing::small_spec(3));
    TrainConfig config;
    config.epochs = 5;
    const auto model = train(data.train, config, nullptr);
    const auto n = class_frequencies(data.train.samples, data.train.shape.num_classes);
    EvalOptions options;
    options.dp_ks = {1, 5};
    const auto report = evaluate(model, data.test, n, options);
    CHECK_THROWS_AS(evaluate(model, data.test, n), ValidationError);

    SUBCASE("confusion matches a brute-force recount") {
        const int c = data.test.shape.num_classes;
        std::vector<double> hits(static_cast<std::size_t>(c * c), 0.0);
        std::vector<double> totals(static_cast<std::size_t>(c), 0.0);
        for (const auto& s : data.test.samples) {
            const auto logits = forward_logits(model, s);
            int best = 0;
            for (int j = 1; j < c; ++j) {
                if (logits[static_cast<std::size_t>(j)] > logits[static_cast<std::size_t>(best)]) best = j;
            }
            hits[static_cast<std::size_t>(s.label * c + best)] += 1.0;
            totals[static_cast<std::size_t>(s.label)] += 1.0;
        }
        for (int i = 0; i < c; ++i) {
            for (int j = 0; j < c; ++j) {
                const double expected = totals[static_cast<std::size_t>(i)] > 0
                                            ? hits[static_cast<std::size_t>(i * c + j)] / totals[static_cast<std::size_t>(i)]
                                            : 0.0;
                CHECK(report.confusion_prime.at(i, j) == expected);
            }
        }
    }
    SUBCASE("tables and ranges") {
        CHECK(report.budgets[0].per_scene == 4);
        for (double r : report.r_at_k) CHECK((r >= 0.0 && r <= 1.0));
        CHECK(report.r_at_k[0] <= report.r_at_k[2]);
        CHECK(report.mr_at(50) == report.mr_at_k[1]);
        CHECK(report.dp_at(1) == report.dp_at_k[0]);
        CHECK_THROWS_AS((void)report.mr_at(30), ValidationError);
        CHECK(format_metric_table(report).rfind("metric,k,value\nR,20,", 0) == 0);
        CHECK(format_ring_table(report).rfind("gt_class,slice_label,proportion\n0,self,", 0) == 0);
        CHECK(format_report(report).find("DP@10 = ") == std::string::npos);
        CHECK(format_report(report).find("DP@5 = ") != std::string::npos);
    }
}
