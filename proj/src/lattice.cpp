#include "fgpl/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "fgpl/errors.hpp"
#include "fgpl/text_io.hpp"

namespace fgpl {

namespace {

void check_class(int id, int num_classes, const char* what) {
    if (id < 0 || id >= num_classes) {
        throw ValidationError(std::string(what) + " " + std::to_string(id) + " outside [0, " +
                              std::to_string(num_classes) + ")");
    }
}

}  // namespace

ConfusionCounts& ConfusionCounts::operator+=(const ConfusionCounts& other) {
    if (other.num_classes != num_classes) throw ValidationError("cannot merge confusion counts of different sizes");
    for (std::size_t k = 0; k < counts.size(); ++k) counts[k] += other.counts[k];
    return *this;
}

ConfusionCounts count_confusion(std::span<const int> labels, std::span<const int> predicted, int num_classes) {
    if (labels.size() != predicted.size()) {
        throw ValidationError("label/prediction length mismatch: " + std::to_string(labels.size()) + " vs " +
                              std::to_string(predicted.size()));
    }
    ConfusionCounts out(num_classes);
    for (std::size_t k = 0; k < labels.size(); ++k) {
        check_class(labels[k], num_classes, "label");
        check_class(predicted[k], num_classes, "prediction");
        ++out.at(labels[k], predicted[k]);
    }
    return out;
}

ConfusionCounts collect_biased_predictions(const Classifier& baseline, std::span<const TripletSample> samples) {
    std::vector<int> labels;
    std::vector<int> predicted;
    labels.reserve(samples.size());
    predicted.reserve(samples.size());
    for (const auto& s : samples) {
        labels.push_back(s.label);
        predicted.push_back(predict_scores(baseline, s).top1);
    }
    return count_confusion(labels, predicted, baseline.shape.num_classes);
}

NormalizedConfusion normalize_rows(const ConfusionCounts& counts, const ClassFrequencies& n) {
    const int c = counts.num_classes;
    if (n.num_classes() != c) {
        throw ValidationError("frequency vector has " + std::to_string(n.num_classes()) + " classes, confusion has " +
                              std::to_string(c));
    }
    NormalizedConfusion out{c, std::vector<double>(counts.counts.size(), 0.0), std::vector<bool>(static_cast<std::size_t>(c))};
    for (int i = 0; i < c; ++i) {
        std::int64_t row_sum = 0;
        for (int j = 0; j < c; ++j) row_sum += counts.at(i, j);
        const auto ni = n.counts[static_cast<std::size_t>(i)];
        if (row_sum != ni) {
            throw ValidationError("confusion row " + std::to_string(i) + " sums to " + std::to_string(row_sum) +
                                  " but n_" + std::to_string(i) + " = " + std::to_string(ni));
        }
        out.present[static_cast<std::size_t>(i)] = ni > 0;
        if (ni == 0) continue;
        for (int j = 0; j < c; ++j) {
            out.s[static_cast<std::size_t>(i) * static_cast<std::size_t>(c) + static_cast<std::size_t>(j)] =
                static_cast<double>(counts.at(i, j)) / static_cast<double>(ni);
        }
    }
    return out;
}

std::vector<int> top_off_diagonal(std::span<const double> row, int self, int k) {
    std::vector<int> order;
    order.reserve(row.size());
    for (int j = 0; j < static_cast<int>(row.size()); ++j) {
        if (j != self) order.push_back(j);
    }
    const auto take = std::min<std::size_t>(static_cast<std::size_t>(std::max(k, 0)), order.size());
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(take), order.end(),
                      [&](int a, int b) {
                          const double va = row[static_cast<std::size_t>(a)];
                          const double vb = row[static_cast<std::size_t>(b)];
                          return va != vb ? va > vb : a < b;
                      });
    order.resize(take);
    return order;
}

PredicateLattice normalize_confusion(const ConfusionCounts& counts, const ClassFrequencies& n, int max_neighbors) {
    if (max_neighbors < 1) throw ValidationError("M must be >= 1");
    require_all_classes_present(n);
    auto normalized = normalize_rows(counts, n);

    PredicateLattice lattice;
    lattice.num_classes = counts.num_classes;
    lattice.max_neighbors = max_neighbors;
    lattice.s = std::move(normalized.s);
    lattice.n = n;
    lattice.neighbors.reserve(static_cast<std::size_t>(lattice.num_classes));
    const auto c = static_cast<std::size_t>(lattice.num_classes);
    for (int i = 0; i < lattice.num_classes; ++i) {
        lattice.neighbors.push_back(
            top_off_diagonal(std::span<const double>(lattice.s).subspan(static_cast<std::size_t>(i) * c, c), i,
                             max_neighbors));
    }
    return lattice;
}

PredicateLattice frequency_only_lattice(const ClassFrequencies& n, int max_neighbors) {
    ConfusionCounts identity(n.num_classes());
    for (int i = 0; i < n.num_classes(); ++i) identity.at(i, i) = n.counts[static_cast<std::size_t>(i)];
    return normalize_confusion(identity, n, max_neighbors);
}

double correlation_ratio(const PredicateLattice& lattice, int i, int j) {
    check_class(i, lattice.num_classes, "class");
    check_class(j, lattice.num_classes, "class");
    if (i == j) throw ValidationError("correlation ratio is undefined for i == j (" + std::to_string(i) + ")");
    const double sij = lattice.at(i, j);
    if (sij == 0.0) return 0.0;
    const double sii = lattice.at(i, i);
    if (sii == 0.0) return std::numeric_limits<double>::infinity();
    return sij / sii;
}

std::string serialize_lattice(const PredicateLattice& lattice) {
    const auto c = static_cast<std::size_t>(lattice.num_classes);
    std::string out = "# C=" + std::to_string(lattice.num_classes) + " M=" + std::to_string(lattice.max_neighbors) + "\n";
    out += "s\n";
    for (std::size_t i = 0; i < c; ++i) {
        for (std::size_t j = 0; j < c; ++j) {
            if (j) out += ',';
            out += text::format_g17(lattice.s[i * c + j]);
        }
        out += '\n';
    }
    out += "n\n";
    for (std::size_t i = 0; i < c; ++i) {
        if (i) out += ',';
        out += std::to_string(lattice.n.counts[i]);
    }
    out += "\nneighbors\n";
    for (std::size_t i = 0; i < c; ++i) {
        out += std::to_string(i) + ':';
        for (std::size_t k = 0; k < lattice.neighbors[i].size(); ++k) {
            if (k) out += ',';
            out += std::to_string(lattice.neighbors[i][k]);
        }
        out += '\n';
    }
    return out;
}

PredicateLattice parse_lattice(std::string_view contents) {
    text::LineReader reader(contents);
    const auto v = text::parse_header(reader.require("lattice header"), {"C", "M"}, reader.line_number());
    if (v[0] < 1 || v[1] < 1) throw ParseError("lattice header values must be positive", reader.line_number());
    PredicateLattice lattice;
    lattice.num_classes = static_cast<int>(v[0]);
    lattice.max_neighbors = static_cast<int>(v[1]);
    const auto c = static_cast<std::size_t>(v[0]);

    auto expect_section = [&](std::string_view name) {
        if (reader.require(std::string(name)) != name) {
            throw ParseError("expected section '" + std::string(name) + "'", reader.line_number());
        }
    };
    expect_section("s");
    lattice.s.reserve(c * c);
    for (std::size_t i = 0; i < c; ++i) {
        const auto row = text::parse_real_row(reader.require("s row"), c, reader.line_number());
        for (double x : row) {
            if (x < 0.0 || x > 1.0) throw ParseError("correlation outside [0,1]", reader.line_number());
        }
        lattice.s.insert(lattice.s.end(), row.begin(), row.end());
    }
    expect_section("n");
    const auto counts_line = reader.require("class counts");
    const auto fields = text::split(counts_line, ',');
    if (fields.size() != c) throw ParseError("expected " + std::to_string(c) + " class counts", reader.line_number());
    for (auto f : fields) {
        const auto count = text::parse_int(f, reader.line_number());
        if (count < 1) throw ParseError("class counts must be >= 1", reader.line_number());
        lattice.n.counts.push_back(count);
    }
    expect_section("neighbors");
    const auto expected_len = std::min<std::size_t>(static_cast<std::size_t>(v[1]), c - 1);
    for (std::size_t i = 0; i < c; ++i) {
        const auto line = reader.require("neighbor list");
        const auto colon = line.find(':');
        if (colon == std::string_view::npos || text::parse_int(line.substr(0, colon), reader.line_number()) !=
                                                   static_cast<long long>(i)) {
            throw ParseError("expected neighbor list for class " + std::to_string(i), reader.line_number());
        }
        std::vector<int> list;
        const auto rest = text::trim(line.substr(colon + 1));
        if (!rest.empty()) {
            for (auto f : text::split(rest, ',')) {
                const auto j = text::parse_int(f, reader.line_number());
                if (j < 0 || j >= static_cast<long long>(c) || j == static_cast<long long>(i)) {
                    throw ParseError("invalid neighbor id " + std::to_string(j), reader.line_number());
                }
                list.push_back(static_cast<int>(j));
            }
        }
        if (list.size() != expected_len) {
            throw ParseError("neighbor list must have " + std::to_string(expected_len) + " entries",
                             reader.line_number());
        }
        lattice.neighbors.push_back(std::move(list));
    }
    std::string_view extra;
    if (reader.next(extra)) throw ParseError("unexpected trailing content", reader.line_number());
    return lattice;
}

void save_lattice(const PredicateLattice& lattice, const std::filesystem::path& path) {
    text::write_file(path, serialize_lattice(lattice));
}

PredicateLattice load_lattice(const std::filesystem::path& path) {
    const auto contents = text::read_file(path);
    try {
        return parse_lattice(contents);
    } catch (const ParseError& e) {
        throw e.with_source(path.string());
    }
}

}  // namespace fgpl
