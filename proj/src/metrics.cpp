#include "fgpl/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <numeric>

#include "fgpl/errors.hpp"
#include "fgpl/text_io.hpp"

namespace fgpl {

namespace {

void check_k(int k) {
    if (k < 1) throw ValidationError("K must be >= 1, got " + std::to_string(k));
}

// Marks predictions kept within their scene's top-k by confidence (stable on ties).
std::vector<bool> kept_in_top_k(std::span<const ScoredPrediction> predictions, int k) {
    std::map<std::int64_t, std::vector<std::size_t>> scenes;
    for (std::size_t idx = 0; idx < predictions.size(); ++idx) scenes[predictions[idx].scene_id].push_back(idx);
    std::vector<bool> kept(predictions.size(), false);
    for (auto& [scene, members] : scenes) {
        std::stable_sort(members.begin(), members.end(), [&](std::size_t a, std::size_t b) {
            return predictions[a].confidence > predictions[b].confidence;
        });
        const auto take = std::min(members.size(), static_cast<std::size_t>(k));
        for (std::size_t m = 0; m < take; ++m) kept[members[m]] = true;
    }
    return kept;
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    return buf;
}

}  // namespace

std::vector<ScoredPrediction> score_samples(const Classifier& model, std::span<const TripletSample> samples) {
    std::vector<ScoredPrediction> out;
    out.reserve(samples.size());
    for (const auto& s : samples) {
        const auto scored = predict_scores(model, s);
        out.push_back({s.scene_id, s.subject_id, s.object_id, s.label, scored.top1,
                       scored.probabilities[static_cast<std::size_t>(scored.top1)]});
    }
    return out;
}

double recall_at_k(std::span<const ScoredPrediction> predictions, int k) {
    check_k(k);
    if (predictions.empty()) return 0.0;
    const auto kept = kept_in_top_k(predictions, k);
    std::size_t hits = 0;
    for (std::size_t idx = 0; idx < predictions.size(); ++idx) {
        if (kept[idx] && predictions[idx].predicted == predictions[idx].label) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(predictions.size());
}

MeanRecall mean_recall_at_k(std::span<const ScoredPrediction> predictions, int k, int num_classes) {
    check_k(k);
    const auto c = static_cast<std::size_t>(num_classes);
    const auto kept = kept_in_top_k(predictions, k);
    std::vector<std::size_t> hits(c, 0);
    std::vector<std::size_t> totals(c, 0);
    for (std::size_t idx = 0; idx < predictions.size(); ++idx) {
        const auto& p = predictions[idx];
        if (p.label < 0 || p.label >= num_classes) throw ValidationError("label outside [0, C)");
        const auto l = static_cast<std::size_t>(p.label);
        ++totals[l];
        if (kept[idx] && p.predicted == p.label) ++hits[l];
    }
    MeanRecall out;
    out.per_class.assign(c, 0.0);
    out.present.assign(c, false);
    double sum = 0.0;
    std::size_t present = 0;
    for (std::size_t i = 0; i < c; ++i) {
        if (totals[i] == 0) continue;
        out.present[i] = true;
        out.per_class[i] = static_cast<double>(hits[i]) / static_cast<double>(totals[i]);
        sum += out.per_class[i];
        ++present;
    }
    out.mean = present ? sum / static_cast<double>(present) : 0.0;
    return out;
}

std::array<int, 3> default_group_sizes(int num_classes) {
    if (num_classes == 50) return {16, 17, 17};
    const int head = (num_classes + 2) / 3;
    const int body = (num_classes - head + 1) / 2;
    return {head, body, num_classes - head - body};
}

GroupSplit make_group_split(const ClassFrequencies& n, std::optional<std::array<int, 3>> sizes) {
    const int c = n.num_classes();
    const auto s = sizes.value_or(default_group_sizes(c));
    if (s[0] < 0 || s[1] < 0 || s[2] < 0 || s[0] + s[1] + s[2] != c) {
        throw ValidationError("group sizes must be non-negative and sum to C=" + std::to_string(c));
    }
    std::vector<int> order(static_cast<std::size_t>(c));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        return n.counts[static_cast<std::size_t>(a)] > n.counts[static_cast<std::size_t>(b)];
    });
    GroupSplit split;
    const auto head_end = order.begin() + s[0];
    const auto body_end = head_end + s[1];
    split.head.assign(order.begin(), head_end);
    split.body.assign(head_end, body_end);
    split.tail.assign(body_end, order.end());
    return split;
}

GroupRecall group_mean_recall(const MeanRecall& recalls, const GroupSplit& split) {
    auto average = [&](const std::vector<int>& group) {
        double sum = 0.0;
        std::size_t count = 0;
        for (int i : group) {
            const auto iu = static_cast<std::size_t>(i);
            if (iu >= recalls.per_class.size()) throw ValidationError("group references unknown class");
            if (!recalls.present[iu]) continue;
            sum += recalls.per_class[iu];
            ++count;
        }
        return count ? sum / static_cast<double>(count) : 0.0;
    };
    return {average(split.head), average(split.body), average(split.tail)};
}

double dp_at_k(const NormalizedConfusion& confusion, int k) {
    const int c = confusion.num_classes;
    if (k < 1 || k > c - 1) {
        throw ValidationError("DP@k requires 1 <= k <= C-1 = " + std::to_string(c - 1) + ", got " + std::to_string(k));
    }
    double sum = 0.0;
    std::size_t present = 0;
    for (int i = 0; i < c; ++i) {
        if (!confusion.present[static_cast<std::size_t>(i)]) continue;
        const auto row = confusion.row(i);
        double gap = 0.0;
        for (int j : top_off_diagonal(row, i, k)) gap += row[static_cast<std::size_t>(i)] - row[static_cast<std::size_t>(j)];
        sum += gap / static_cast<double>(k);
        ++present;
    }
    if (present == 0) return 0.0;
    return 100.0 * std::clamp(sum / static_cast<double>(present), -1.0, 1.0);
}

RingRecord prediction_distribution(const NormalizedConfusion& confusion, int i, int k) {
    if (i < 0 || i >= confusion.num_classes) throw ValidationError("class outside [0, C)");
    if (k < 0 || k > confusion.num_classes - 1) throw ValidationError("ring neighbor count outside [0, C-1]");
    const auto row = confusion.row(i);
    RingRecord ring{i, {}};
    double used = row[static_cast<std::size_t>(i)];
    ring.slices.push_back({"self", i, used});
    for (int j : top_off_diagonal(row, i, k)) {
        const double p = row[static_cast<std::size_t>(j)];
        ring.slices.push_back({"class_" + std::to_string(j), j, p});
        used += p;
    }
    ring.slices.push_back({"other", -1, confusion.present[static_cast<std::size_t>(i)] ? std::max(0.0, 1.0 - used) : 0.0});
    return ring;
}

std::vector<RecallBudget> default_budgets(int scene_size) {
    std::vector<RecallBudget> out;
    for (int nominal : {20, 50, 100}) {
        const long scaled = std::lround(static_cast<double>(nominal) * scene_size / 50.0);
        out.push_back({nominal, static_cast<int>(std::max(1L, scaled))});
    }
    return out;
}

double EvalReport::mr_at(int nominal) const {
    for (std::size_t k = 0; k < budgets.size(); ++k) {
        if (budgets[k].nominal == nominal) return mr_at_k[k];
    }
    throw ValidationError("report has no mR@" + std::to_string(nominal));
}

double EvalReport::dp_at(int k) const {
    for (std::size_t idx = 0; idx < dp_ks.size(); ++idx) {
        if (dp_ks[idx] == k) return dp_at_k[idx];
    }
    throw ValidationError("report has no DP@" + std::to_string(k));
}

EvalReport evaluate(const Classifier& model, const Corpus& test, const ClassFrequencies& train_freqs,
                    const EvalOptions& options) {
    check_compatible(model, test.shape);
    validate_samples(test.samples, test.shape);
    if (train_freqs.num_classes() != test.shape.num_classes) {
        throw ValidationError("training frequencies have C=" + std::to_string(train_freqs.num_classes()) +
                              ", test corpus has C=" + std::to_string(test.shape.num_classes));
    }
    const int c = test.shape.num_classes;

    EvalReport report;
    report.budgets = options.budgets;
    if (report.budgets.empty()) {
        std::map<std::int64_t, int> sizes;
        for (const auto& s : test.samples) ++sizes[s.scene_id];
        int largest = 1;
        for (const auto& [scene, size] : sizes) largest = std::max(largest, size);
        report.budgets = default_budgets(largest);
    }
    const auto predictions = score_samples(model, test.samples);
    report.split = make_group_split(train_freqs, options.group_sizes);
    for (const auto& budget : report.budgets) {
        report.r_at_k.push_back(recall_at_k(predictions, budget.per_scene));
        auto mr = mean_recall_at_k(predictions, budget.per_scene, c);
        report.mr_at_k.push_back(mr.mean);
        report.group_mr.push_back(group_mean_recall(mr, report.split));
        report.per_class.push_back(std::move(mr));
    }

    std::vector<int> labels;
    std::vector<int> predicted;
    for (const auto& p : predictions) {
        labels.push_back(p.label);
        predicted.push_back(p.predicted);
    }
    const auto counts = count_confusion(labels, predicted, c);
    report.confusion_prime = normalize_rows(counts, class_frequencies(test.samples, c));
    report.dp_ks = options.dp_ks;
    for (int k : options.dp_ks) report.dp_at_k.push_back(dp_at_k(report.confusion_prime, k));
    for (int i = 0; i < c; ++i) {
        if (report.confusion_prime.present[static_cast<std::size_t>(i)]) {
            report.rings.push_back(prediction_distribution(report.confusion_prime, i, std::min(options.ring_neighbors, c - 1)));
        }
    }
    return report;
}

std::string format_report(const EvalReport& report) {
    std::string out;
    for (std::size_t k = 0; k < report.budgets.size(); ++k) {
        const auto tag = std::to_string(report.budgets[k].nominal);
        out += "R@" + tag + " = " + fmt(report.r_at_k[k]) + "\n";
        out += "mR@" + tag + " = " + fmt(report.mr_at_k[k]) + "\n";
        out += "mR@" + tag + ".head = " + fmt(report.group_mr[k].head) + "\n";
        out += "mR@" + tag + ".body = " + fmt(report.group_mr[k].body) + "\n";
        out += "mR@" + tag + ".tail = " + fmt(report.group_mr[k].tail) + "\n";
        out += "K@" + tag + ".per_scene = " + std::to_string(report.budgets[k].per_scene) + "\n";
    }
    for (std::size_t k = 0; k < report.dp_ks.size(); ++k) {
        out += "DP@" + std::to_string(report.dp_ks[k]) + " = " + fmt(report.dp_at_k[k]) + "\n";
    }
    auto list = [](const std::vector<int>& ids) {
        std::string s;
        for (std::size_t k = 0; k < ids.size(); ++k) s += (k ? "," : "") + std::to_string(ids[k]);
        return s;
    };
    out += "split.head = " + list(report.split.head) + "\n";
    out += "split.body = " + list(report.split.body) + "\n";
    out += "split.tail = " + list(report.split.tail) + "\n";
    if (!report.per_class.empty()) {
        const auto& last = report.per_class.back();
        out += "per_class_recall@" + std::to_string(report.budgets.back().nominal) + "\n";
        for (std::size_t i = 0; i < last.per_class.size(); ++i) {
            out += std::to_string(i) + "," + (last.present[i] ? fmt(last.per_class[i]) : std::string("absent")) + "\n";
        }
    }
    const int c = report.confusion_prime.num_classes;
    out += "confusion_prime C=" + std::to_string(c) + "\n";
    for (int i = 0; i < c; ++i) {
        const auto row = report.confusion_prime.row(i);
        for (int j = 0; j < c; ++j) out += (j ? "," : "") + fmt(row[static_cast<std::size_t>(j)]);
        out += "\n";
    }
    return out;
}

std::string format_metric_table(const EvalReport& report) {
    std::string out = "metric,k,value\n";
    for (std::size_t k = 0; k < report.budgets.size(); ++k) {
        const auto tag = std::to_string(report.budgets[k].nominal);
        out += "R," + tag + "," + fmt(report.r_at_k[k]) + "\n";
        out += "mR," + tag + "," + fmt(report.mr_at_k[k]) + "\n";
        out += "mR_head," + tag + "," + fmt(report.group_mr[k].head) + "\n";
        out += "mR_body," + tag + "," + fmt(report.group_mr[k].body) + "\n";
        out += "mR_tail," + tag + "," + fmt(report.group_mr[k].tail) + "\n";
    }
    for (std::size_t k = 0; k < report.dp_ks.size(); ++k) {
        out += "DP," + std::to_string(report.dp_ks[k]) + "," + fmt(report.dp_at_k[k]) + "\n";
    }
    return out;
}

std::string format_ring_table(const EvalReport& report) {
    std::string out = "gt_class,slice_label,proportion\n";
    for (const auto& ring : report.rings) {
        for (const auto& slice : ring.slices) {
            out += std::to_string(ring.gt_class) + "," + slice.label + "," + fmt(slice.proportion) + "\n";
        }
    }
    return out;
}

}  // namespace fgpl
