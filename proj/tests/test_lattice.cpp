#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "fgpl/errors.hpp"
#include "fgpl/lattice.hpp"
#include "fgpl/pipeline.hpp"
#include "test_util.hpp"

using namespace fgpl;

namespace {

// C one-hot clusters at distance 10; an identity classifier is perfect.
Corpus one_hot_corpus(int c, int per_class) {
    Corpus corpus{{c, 1, c}, {}};
    for (int label = 0; label < c; ++label) {
        for (int k = 0; k < per_class + label; ++k) {
            TripletSample s;
            s.label = label;
            s.features.assign(static_cast<std::size_t>(c), 0.0);
            s.features[static_cast<std::size_t>(label)] = 10.0;
            corpus.samples.push_back(s);
        }
    }
    return corpus;
}

ConfusionCounts random_counts(int c, std::mt19937_64& rng) {
    std::uniform_int_distribution<int> value(0, 6);
    ConfusionCounts counts(c);
    for (auto& v : counts.counts) v = value(rng);
    for (int i = 0; i < c; ++i) counts.at(i, i) += 1;
    return counts;
}

ClassFrequencies row_sums(const ConfusionCounts& counts) {
    ClassFrequencies n;
    for (int i = 0; i < counts.num_classes; ++i) {
        std::int64_t sum = 0;
        for (int j = 0; j < counts.num_classes; ++j) sum += counts.at(i, j);
        n.counts.push_back(sum);
    }
    return n;
}

}  // namespace

TEST_CASE("biased prediction collection") {
    const auto corpus = one_hot_corpus(3, 4);
    const auto n = class_frequencies(corpus.samples, 3);

    auto perfect = Classifier::zeros(corpus.shape);
    for (int i = 0; i < 3; ++i) perfect.weights[static_cast<std::size_t>(i * 3 + i)] = 1.0;
    const auto diag = collect_biased_predictions(perfect, corpus.samples);
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) CHECK(diag.at(i, j) == (i == j ? n.counts[static_cast<std::size_t>(i)] : 0));
    }

    auto constant = Classifier::zeros(corpus.shape);
    constant.bias = {100.0, 0.0, 0.0};
    const auto col = collect_biased_predictions(constant, corpus.samples);
    for (int i = 0; i < 3; ++i) {
        CHECK(col.at(i, 0) == n.counts[static_cast<std::size_t>(i)]);
        CHECK(col.at(i, 1) + col.at(i, 2) == 0);
    }

    auto wrong_dim = corpus;
    wrong_dim.samples[0].features.pop_back();
    CHECK_THROWS_AS(collect_biased_predictions(perfect, wrong_dim.samples), ValidationError);
}

TEST_CASE("planted overlap dominates the baseline's confusion") {
    auto spec = testing::small_spec(21);
    spec.num_scenes = 120;
    const auto data = generate_corpus(spec);
    TrainConfig config;
    config.epochs = 10;
    const auto built = build_lattice(data.train, config, 2);
    const int a = 4;
    const int b = 1;
    const auto planted = built.confusion.at(a, b) + built.confusion.at(b, a);
    for (int x : {a, b}) {
        for (int y = 0; y < spec.num_classes; ++y) {
            if (y == a || y == b) continue;
            CHECK(planted > built.confusion.at(x, y) + built.confusion.at(y, x));
        }
    }
    CHECK(built.lattice.neighbors[a][0] == b);
}

TEST_CASE("normalize_confusion") {
    SUBCASE("hand division") {
        ConfusionCounts counts(2);
        counts.at(0, 0) = 90;
        counts.at(0, 1) = 10;
        counts.at(1, 1) = 5;
        const auto lattice = normalize_confusion(counts, ClassFrequencies{{100, 5}}, 5);
        CHECK(lattice.at(0, 0) == 0.9);
        CHECK(lattice.at(0, 1) == 0.1);
        CHECK(lattice.neighbors[0] == std::vector<int>{1});
    }
    SUBCASE("identity counts give identity s and index-ordered neighbors") {
        ConfusionCounts counts(4);
        for (int i = 0; i < 4; ++i) counts.at(i, i) = 3 + i;
        const auto lattice = normalize_confusion(counts, row_sums(counts), 2);
        for (int i = 0; i < 4; ++i) {
            for (int j = 0; j < 4; ++j) CHECK(lattice.at(i, j) == (i == j ? 1.0 : 0.0));
        }
        CHECK(lattice.neighbors[0] == std::vector<int>{1, 2});
        CHECK(lattice.neighbors[1] == std::vector<int>{0, 2});
        CHECK(lattice.neighbors[3] == std::vector<int>{0, 1});
    }
    SUBCASE("errors") {
        ConfusionCounts counts(2);
        counts.at(0, 0) = 1;
        CHECK_THROWS_AS(normalize_confusion(counts, ClassFrequencies{{1, 0}}, 1), ValidationError);
        CHECK_THROWS_AS(normalize_confusion(counts, ClassFrequencies{{2, 1}}, 1), ValidationError);
        CHECK_THROWS_AS(normalize_confusion(counts, ClassFrequencies{{1}}, 1), ValidationError);
    }
}

TEST_CASE("lattice invariants on random confusion counts") {
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 200; ++trial) {
        const int c = 2 + trial % 9;
        const int m = 1 + trial % 6;
        const auto counts = random_counts(c, rng);
        const auto lattice = normalize_confusion(counts, row_sums(counts), m);
        for (int i = 0; i < c; ++i) {
            double sum = 0.0;
            for (int j = 0; j < c; ++j) {
                CHECK(lattice.at(i, j) >= 0.0);
                CHECK(lattice.at(i, j) <= 1.0);
                sum += lattice.at(i, j);
            }
            CHECK(std::abs(sum - 1.0) < 1e-9);

            const auto& v = lattice.neighbors[static_cast<std::size_t>(i)];
            CHECK(v.size() == static_cast<std::size_t>(std::min(m, c - 1)));
            std::vector<bool> in(static_cast<std::size_t>(c), false);
            for (std::size_t k = 0; k < v.size(); ++k) {
                CHECK(v[k] != i);
                in[static_cast<std::size_t>(v[k])] = true;
                if (k > 0) {
                    const double prev = lattice.at(i, v[k - 1]);
                    const double cur = lattice.at(i, v[k]);
                    CHECK((prev > cur || (prev == cur && v[k - 1] < v[k])));
                }
            }
            for (int j : v) {
                for (int k = 0; k < c; ++k) {
                    if (k != i && !in[static_cast<std::size_t>(k)]) CHECK(lattice.at(i, j) >= lattice.at(i, k));
                }
            }
        }
    }
}

TEST_CASE("confusion merge is commutative") {
    std::mt19937_64 rng(5);
    const auto a = random_counts(5, rng);
    const auto b = random_counts(5, rng);
    auto ab = a;
    ab += b;
    auto ba = b;
    ba += a;
    CHECK(ab == ba);
    CHECK_THROWS_AS(ab += ConfusionCounts(3), ValidationError);
}

TEST_CASE("correlation ratio") {
    PredicateLattice lattice;
    lattice.num_classes = 3;
    lattice.max_neighbors = 2;
    lattice.s = {0.9, 0.1, 0.0,  //
                 0.0, 0.0, 1.0,  //
                 0.0, 0.0, 1.0};
    lattice.n = ClassFrequencies{{10, 10, 10}};
    CHECK(correlation_ratio(lattice, 0, 1) == doctest::Approx(0.1 / 0.9).epsilon(1e-15));
    CHECK(correlation_ratio(lattice, 0, 1) == doctest::Approx(0.1111).epsilon(1e-4));
    CHECK(correlation_ratio(lattice, 0, 2) == 0.0);
    CHECK(correlation_ratio(lattice, 1, 2) == std::numeric_limits<double>::infinity());
    CHECK(correlation_ratio(lattice, 1, 0) == 0.0);
    CHECK_THROWS_AS(correlation_ratio(lattice, 2, 2), ValidationError);
}

TEST_CASE("lattice files are byte-reproducible and lossless") {
    std::mt19937_64 rng(9);
    const auto counts = random_counts(7, rng);
    const auto lattice = normalize_confusion(counts, row_sums(counts), 3);
    const auto dir = testing::scratch_dir("lattice_file");
    save_lattice(lattice, dir / "a.txt");
    save_lattice(normalize_confusion(counts, row_sums(counts), 3), dir / "b.txt");
    CHECK(testing::text_of(dir / "a.txt") == testing::text_of(dir / "b.txt"));
    CHECK(load_lattice(dir / "a.txt") == lattice);
    CHECK(serialize_lattice(lattice).rfind("# C=7 M=3\n", 0) == 0);

    CHECK_THROWS_AS(parse_lattice("# C=2 M=1\ns\n1,0\n0,1\nn\n1,1\nneighbors\n0:1\n1:1\n"), ParseError);
    CHECK_THROWS_AS(parse_lattice("# C=2 M=1\ns\n1,0\n0,1\nn\n1,0\nneighbors\n0:1\n1:0\n"), ParseError);
}
