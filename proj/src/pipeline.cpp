#include "fgpl/pipeline.hpp"

#include <cstdio>

namespace fgpl {

std::vector<Method> comparison_methods() {
    return {
        {"CE", LossKind::kCrossEntropy, {}},
        {"Re-weight", LossKind::kReweight, {}},
        {"FGPL", LossKind::kCdlEdl, {}},
    };
}

std::vector<Method> edl_ablation_methods() {
    std::vector<Method> out;
    for (const bool pc : {false, true}) {
        for (const bool bf : {false, true}) {
            LossSwitches sw;
            sw.cdl_rf = false;  // CDL without RF is plain CE
            sw.edl_pc = pc;
            sw.edl_bf = bf;
            out.push_back({std::string("EDL") + (pc ? "+PC" : "") + (bf ? "+BF" : ""), LossKind::kCdlEdl, sw});
        }
    }
    return out;
}

std::vector<Method> cdl_ablation_methods() {
    LossSwitches no_pc;
    no_pc.cdl_pc = false;
    return {{"CDL-RF", LossKind::kCdl, no_pc}, {"CDL-RF+PC", LossKind::kCdl, {}}};
}

LatticeBuild build_lattice(const Corpus& train, const TrainConfig& baseline_config, int max_neighbors) {
    TrainConfig config = baseline_config;
    config.loss_kind = LossKind::kCrossEntropy;
    LatticeBuild out{train_method(train, config, {"CE", LossKind::kCrossEntropy, {}}, PredicateLattice{}),
                     class_frequencies(train.samples, train.shape.num_classes), ConfusionCounts{}, PredicateLattice{}};
    require_all_classes_present(out.frequencies);
    out.confusion = collect_biased_predictions(out.baseline, train.samples);
    out.lattice = normalize_confusion(out.confusion, out.frequencies, max_neighbors);
    return out;
}

Classifier train_method(const Corpus& corpus, TrainConfig config, const Method& method,
                        const PredicateLattice& lattice) {
    config.loss_kind = method.kind;
    config.loss.switches = method.switches;
    return train(corpus, config, method.kind == LossKind::kCrossEntropy ? nullptr : &lattice);
}

std::vector<MethodResult> compare_methods(const Corpus& train, const Corpus& test, const TrainConfig& baseline_config,
                                          const TrainConfig& method_config, const std::vector<Method>& methods,
                                          const EvalOptions& eval_options) {
    const auto built = build_lattice(train, baseline_config, method_config.loss.max_neighbors);
    std::vector<MethodResult> results;
    for (const auto& method : methods) {
        const auto model = train_method(train, method_config, method, built.lattice);
        results.push_back({method, evaluate(model, test, built.frequencies, eval_options)});
    }
    return results;
}

std::string format_comparison(const std::vector<MethodResult>& results) {
    if (results.empty()) return "";
    auto fmt = [](double v) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.2f", v);
        return std::string(buf);
    };
    const auto& first = results.front().report;
    std::string out = "method";
    for (const auto& b : first.budgets) out += ",mR@" + std::to_string(b.nominal);
    out += ",head,body,tail";
    for (int k : first.dp_ks) out += ",DP@" + std::to_string(k);
    out += "\n";
    for (const auto& r : results) {
        out += r.method.name;
        for (double v : r.report.mr_at_k) out += "," + fmt(100.0 * v);
        // Group recall at the middle budget (mR@50 by default).
        const auto& g = r.report.group_mr[r.report.group_mr.size() / 2];
        out += "," + fmt(100.0 * g.head) + "," + fmt(100.0 * g.body) + "," + fmt(100.0 * g.tail);
        for (double v : r.report.dp_at_k) out += "," + fmt(v);
        out += "\n";
    }
    return out;
}

}  // namespace fgpl
