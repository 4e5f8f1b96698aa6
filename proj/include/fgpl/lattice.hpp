#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "fgpl/dataset.hpp"
#include "fgpl/model.hpp"

namespace fgpl {

/// counts(i, j): samples labeled i and predicted j.
struct ConfusionCounts {
    int num_classes = 0;
    std::vector<std::int64_t> counts;  ///< C x C, row-major

    explicit ConfusionCounts(int c = 0)
        : num_classes(c), counts(static_cast<std::size_t>(c) * static_cast<std::size_t>(c), 0) {}
    std::int64_t at(int i, int j) const {
        return counts[static_cast<std::size_t>(i) * static_cast<std::size_t>(num_classes) + static_cast<std::size_t>(j)];
    }
    std::int64_t& at(int i, int j) {
        return counts[static_cast<std::size_t>(i) * static_cast<std::size_t>(num_classes) + static_cast<std::size_t>(j)];
    }
    /// Commutative merge for partial counts.
    ConfusionCounts& operator+=(const ConfusionCounts& other);

    friend bool operator==(const ConfusionCounts&, const ConfusionCounts&) = default;
};

ConfusionCounts count_confusion(std::span<const int> labels, std::span<const int> predicted, int num_classes);

/// Top-1 predictions of `baseline` over every training sample, all contexts included.
ConfusionCounts collect_biased_predictions(const Classifier& baseline, std::span<const TripletSample> samples);

/// Row-normalized confusion matrix. Rows of classes with n_i = 0 stay zero and
/// are flagged absent.
struct NormalizedConfusion {
    int num_classes = 0;
    std::vector<double> s;      ///< C x C, row-major
    std::vector<bool> present;  ///< n_i >= 1

    double at(int i, int j) const {
        return s[static_cast<std::size_t>(i) * static_cast<std::size_t>(num_classes) + static_cast<std::size_t>(j)];
    }
    std::span<const double> row(int i) const {
        return {s.data() + static_cast<std::size_t>(i) * static_cast<std::size_t>(num_classes),
                static_cast<std::size_t>(num_classes)};
    }
};

/// s_ij = counts(i, j) / n_i. Rejects n that disagrees with the row sums.
NormalizedConfusion normalize_rows(const ConfusionCounts& counts, const ClassFrequencies& n);

/// The k off-diagonal column indices of `row` with the highest values,
/// descending, lowest index first on ties.
std::vector<int> top_off_diagonal(std::span<const double> row, int self, int k);

struct PredicateLattice {
    int num_classes = 0;
    int max_neighbors = 0;                 ///< M
    std::vector<double> s;                 ///< C x C correlations, rows sum to 1
    ClassFrequencies n;                    ///< training class counts
    std::vector<std::vector<int>> neighbors;  ///< V_i, |V_i| = min(M, C-1)

    double at(int i, int j) const {
        return s[static_cast<std::size_t>(i) * static_cast<std::size_t>(num_classes) + static_cast<std::size_t>(j)];
    }
    double count(int i) const { return static_cast<double>(n.counts[static_cast<std::size_t>(i)]); }

    friend bool operator==(const PredicateLattice&, const PredicateLattice&) = default;
};

/// Builds s, V_i from confusion counts; every class must have n_i >= 1.
PredicateLattice normalize_confusion(const ConfusionCounts& counts, const ClassFrequencies& n, int max_neighbors);

/// Lattice carrying only class frequencies (s = identity). Enough for
/// frequency-only re-weighting, which never reads s.
PredicateLattice frequency_only_lattice(const ClassFrequencies& n, int max_neighbors);

/// s_ij / s_ii; 0 when s_ij = 0, +inf when s_ii = 0 < s_ij. Throws for i == j.
double correlation_ratio(const PredicateLattice& lattice, int i, int j);

std::string serialize_lattice(const PredicateLattice& lattice);
PredicateLattice parse_lattice(std::string_view text);
void save_lattice(const PredicateLattice& lattice, const std::filesystem::path& path);
PredicateLattice load_lattice(const std::filesystem::path& path);

}  // namespace fgpl
