#include "fgpl/commands.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>

#include "fgpl/errors.hpp"
#include "fgpl/lattice.hpp"
#include "fgpl/model.hpp"
#include "fgpl/pipeline.hpp"
#include "fgpl/text_io.hpp"

namespace fgpl::cli {

namespace fs = std::filesystem;

namespace {

std::string counts_line(const ClassFrequencies& f) {
    std::string s;
    for (std::size_t i = 0; i < f.counts.size(); ++i) s += (i ? "," : "") + std::to_string(f.counts[i]);
    return s;
}

void write_report(const fs::path& path, const Provenance& provenance, const std::string& body) {
    text::write_file(path, provenance.render() + body);
}

ConfusablePair parse_pair(const std::string& text) {
    const auto parts = text::split(text, ':');
    if (parts.size() != 3) throw ValidationError("pair '" + text + "' must have the form first:second:overlap");
    return {static_cast<int>(text::parse_int(parts[0], 0)), static_cast<int>(text::parse_int(parts[1], 0)),
            text::parse_double(parts[2], 0)};
}

void add_train_flags(CLI::App* cmd, TrainConfig& config) {
    cmd->add_option("--epochs", config.epochs, "SGD epochs")->capture_default_str();
    cmd->add_option("--lr", config.learning_rate, "learning rate")->capture_default_str();
    cmd->add_option("--batch", config.batch_size, "mini-batch size")->capture_default_str();
    cmd->add_option("--smoothing", config.prior_smoothing, "Laplace smoothing of the frequency prior")
        ->capture_default_str();
    cmd->add_flag("!--no-prior", config.use_prior, "disable the frequency-prior logit bias");
}

void add_loss_flags(CLI::App* cmd, TrainConfig& config) {
    auto& loss = config.loss;
    cmd->add_option("--alpha", loss.alpha, "exponent for weakly correlated / seesaw weights")->capture_default_str();
    cmd->add_option("--beta", loss.beta, "exponent for strongly correlated weights")->capture_default_str();
    cmd->add_option("--xi", loss.xi, "correlation-ratio threshold (-1 forces the strong branch)")
        ->capture_default_str();
    cmd->add_option("--delta", loss.delta, "EDL margin")->capture_default_str();
    cmd->add_option("--lambda", loss.lambda, "EDL weight")->capture_default_str();
    cmd->add_option("-M,--max-neighbors", loss.max_neighbors, "neighbors per class")->capture_default_str();
    cmd->add_flag("!--no-cdl-pc", loss.switches.cdl_pc, "CDL without predicate correlation");
    cmd->add_flag("!--no-cdl-rf", loss.switches.cdl_rf, "CDL without re-weighting factor");
    cmd->add_flag("!--no-edl-pc", loss.switches.edl_pc, "EDL over all classes instead of V_i");
    cmd->add_flag("!--no-edl-bf", loss.switches.edl_bf, "EDL without balancing factor");
}

CLI::Option* add_path(CLI::App* cmd, const std::string& name, fs::path& target, const std::string& help) {
    return cmd->add_option(name, target, help);
}

void emit_error(std::ostream& err, const std::string& kind, const std::string& message, int code) {
    nlohmann::json record{{"error", kind}, {"message", message}, {"exit_code", code}};
    err << record.dump() << "\n";
}

}  // namespace

std::string Provenance::render() const {
    std::string out = "# tool = " + std::string(kToolVersion) + "\n# command = " + command + "\n";
    for (const auto& [name, path] : inputs) {
        out += "# input." + name + " = " + path.string() + " fnv1a64=" + text::fnv1a_hex(text::read_file(path)) + "\n";
    }
    out += "# config begin\n";
    std::size_t pos = 0;
    while (pos < resolved_config.size()) {
        auto end = resolved_config.find('\n', pos);
        if (end == std::string::npos) end = resolved_config.size();
        out += "#   " + resolved_config.substr(pos, end - pos) + "\n";
        pos = end + 1;
    }
    out += "# config end\n";
    return out;
}

Corpus load_training_corpus(const fs::path& path) {
    auto corpus = load_corpus(path);
    if (corpus.samples.empty()) throw ValidationError(path.string() + ": training corpus is empty");
    try {
        require_all_classes_present(class_frequencies(corpus.samples, corpus.shape.num_classes));
    } catch (const ValidationError& e) {
        throw ValidationError(path.string() + ": " + e.what());
    }
    return corpus;
}

fs::path cmd_gen(const GenOptions& options, const Provenance& provenance) {
    const auto split = generate_corpus(options.spec);
    const auto train_path = options.out / "train.csv";
    save_corpus(split.train, train_path);
    save_corpus(split.test, options.out / "test.csv");
    const auto n_train = class_frequencies(split.train.samples, split.train.shape.num_classes);
    const auto n_test = class_frequencies(split.test.samples, split.test.shape.num_classes);
    write_report(options.out / "gen_report.txt", provenance,
                 "train.samples = " + std::to_string(split.train.samples.size()) + "\ntrain.counts = " +
                     counts_line(n_train) + "\ntest.samples = " + std::to_string(split.test.samples.size()) +
                     "\ntest.counts = " + counts_line(n_test) + "\n");
    return train_path;
}

fs::path cmd_train_baseline(const TrainBaselineOptions& options, const Provenance& provenance) {
    const auto corpus = load_training_corpus(options.train);
    TrainConfig config = options.config;
    config.loss_kind = LossKind::kCrossEntropy;
    const auto model = train(corpus, config, nullptr);
    const auto path = options.out / "baseline.model";
    save_model(model, path);
    write_report(options.out / "baseline_report.txt", provenance, "loss = ce\n");
    return path;
}

fs::path cmd_build_lattice(const BuildLatticeOptions& options, const Provenance& provenance) {
    const auto corpus = load_training_corpus(options.train);
    const auto model = load_model(options.model);
    check_compatible(model, corpus.shape);
    const auto confusion = collect_biased_predictions(model, corpus.samples);
    const auto lattice = normalize_confusion(
        confusion, class_frequencies(corpus.samples, corpus.shape.num_classes), options.max_neighbors);
    const auto path = options.out / "lattice.txt";
    save_lattice(lattice, path);
    std::string body = "baseline_loss = ce (caller-asserted)\nconfusion_counts C=" +
                       std::to_string(confusion.num_classes) + "\n";
    for (int i = 0; i < confusion.num_classes; ++i) {
        for (int j = 0; j < confusion.num_classes; ++j) body += (j ? "," : "") + std::to_string(confusion.at(i, j));
        body += "\n";
    }
    write_report(options.out / "lattice_report.txt", provenance, body);
    return path;
}

fs::path cmd_train_fgpl(const TrainFgplOptions& options, const Provenance& provenance) {
    const auto corpus = load_training_corpus(options.train);
    PredicateLattice lattice;
    const PredicateLattice* lattice_ptr = nullptr;
    if (!options.lattice.empty()) {
        lattice = load_lattice(options.lattice);
        lattice_ptr = &lattice;
        const auto n = class_frequencies(corpus.samples, corpus.shape.num_classes);
        if (lattice.n != n) {
            throw ValidationError(options.lattice.string() + ": class counts do not match " + options.train.string());
        }
    } else if (options.config.loss_kind == LossKind::kReweight) {
        lattice = frequency_only_lattice(class_frequencies(corpus.samples, corpus.shape.num_classes),
                                         options.config.loss.max_neighbors);
        lattice_ptr = &lattice;
    }
    const auto model = train(corpus, options.config, lattice_ptr);
    const auto path = options.out / (options.model_name + ".model");
    save_model(model, path);
    write_report(options.out / (options.model_name + "_report.txt"), provenance,
                 "loss = " + to_string(options.config.loss_kind) + "\n");
    return path;
}

fs::path cmd_eval(const EvalCommandOptions& options, const Provenance& provenance) {
    const auto model = load_model(options.model);
    const auto test = load_corpus(options.test);
    const auto train_corpus = load_corpus(options.train);
    if (train_corpus.shape.num_classes != test.shape.num_classes) {
        throw ValidationError("train corpus has C=" + std::to_string(train_corpus.shape.num_classes) +
                              ", test corpus has C=" + std::to_string(test.shape.num_classes));
    }
    EvalOptions eval_options;
    eval_options.dp_ks = options.dp_ks;
    eval_options.ring_neighbors = options.ring_neighbors;
    if (!options.ks.empty()) {
        int largest = 1;
        std::map<std::int64_t, int> sizes;
        for (const auto& s : test.samples) largest = std::max(largest, ++sizes[s.scene_id]);
        for (int k : options.ks) {
            if (k < 1) throw ValidationError("K must be >= 1, got " + std::to_string(k));
            eval_options.budgets.push_back(
                {k, std::max(1, static_cast<int>(std::lround(static_cast<double>(k) * largest / 50.0)))});
        }
    }
    const auto report = evaluate(model, test, class_frequencies(train_corpus.samples, train_corpus.shape.num_classes),
                                 eval_options);
    const auto path = options.out / "report.txt";
    write_report(path, provenance, format_report(report));
    text::write_file(options.out / "metrics.csv", format_metric_table(report));
    text::write_file(options.out / "rings.csv", format_ring_table(report));
    return path;
}

fs::path cmd_compare(const CompareOptions& options, const Provenance& provenance) {
    const auto train_corpus = load_training_corpus(options.train);
    const auto test = load_corpus(options.test);
    if (train_corpus.shape != test.shape) throw ValidationError("train and test corpora have different headers");
    EvalOptions eval_options;
    eval_options.dp_ks = options.dp_ks;
    const auto results =
        compare_methods(train_corpus, test, options.baseline, options.method, comparison_methods(), eval_options);
    const auto table = format_comparison(results);
    const auto path = options.out / "compare.csv";
    text::write_file(path, table);
    std::string body = table;
    for (const auto& r : results) body += "\n[" + r.method.name + "]\n" + format_metric_table(r.report);
    write_report(options.out / "compare_report.txt", provenance, body);
    return path;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Fine-grained predicate learning: lattice construction, discriminating losses, metrics", "fgpl"};
    app.set_config("--config", "", "TOML/INI config file; command-line flags override its values");
    app.require_subcommand(1);
    app.fallthrough();
    app.set_version_flag("--version", kToolVersion);

    std::uint64_t seed = 0;
    fs::path out_dir = ".";

    GenOptions gen;
    std::vector<std::string> pairs;
    auto* gen_cmd = app.add_subcommand("gen", "generate synthetic long-tailed train/test corpora");
    gen_cmd->add_option("--classes", gen.spec.num_classes)->capture_default_str();
    gen_cmd->add_option("--objects", gen.spec.num_objects)->capture_default_str();
    gen_cmd->add_option("--dim", gen.spec.feature_dim)->capture_default_str();
    gen_cmd->add_option("--scenes", gen.spec.num_scenes)->capture_default_str();
    gen_cmd->add_option("--scene-size", gen.spec.scene_size)->capture_default_str();
    gen_cmd->add_option("--zipf", gen.spec.zipf_exponent)->capture_default_str();
    gen_cmd->add_option("--test-fraction", gen.spec.test_fraction)->capture_default_str();
    gen_cmd->add_option("--mean-scale", gen.spec.mean_scale)->capture_default_str();
    gen_cmd->add_option("--contexts-per-class", gen.spec.contexts_per_class)->capture_default_str();
    gen_cmd->add_option("--context-noise", gen.spec.context_noise)->capture_default_str();
    gen_cmd->add_option("--pair", pairs, "confusable pair first:second:overlap (repeatable; replaces defaults)");

    TrainBaselineOptions baseline;
    auto* base_cmd = app.add_subcommand("train-baseline", "train the cross-entropy baseline");
    add_path(base_cmd, "--train", baseline.train, "training corpus")->required();
    add_train_flags(base_cmd, baseline.config);

    BuildLatticeOptions lattice;
    auto* lat_cmd = app.add_subcommand("build-lattice", "extract the predicate lattice from baseline predictions");
    add_path(lat_cmd, "--model", lattice.model, "baseline model")->required();
    add_path(lat_cmd, "--train", lattice.train, "training corpus")->required();
    lat_cmd->add_option("-M,--max-neighbors", lattice.max_neighbors, "neighbors per class")->capture_default_str();

    TrainFgplOptions fgpl;
    fgpl.config.loss_kind = LossKind::kCdlEdl;
    std::string loss_name = "cdl_edl";
    auto* fgpl_cmd = app.add_subcommand("train-fgpl", "train with CDL/EDL (or a comparison loss)");
    add_path(fgpl_cmd, "--train", fgpl.train, "training corpus")->required();
    add_path(fgpl_cmd, "--lattice", fgpl.lattice, "predicate lattice");
    fgpl_cmd->add_option("--loss", loss_name, "ce | reweight | cdl | cdl_edl")->capture_default_str();
    fgpl_cmd->add_option("--name", fgpl.model_name, "output model name")->capture_default_str();
    add_train_flags(fgpl_cmd, fgpl.config);
    add_loss_flags(fgpl_cmd, fgpl.config);

    EvalCommandOptions eval;
    auto* eval_cmd = app.add_subcommand("eval", "evaluate a model on a test corpus");
    add_path(eval_cmd, "--model", eval.model, "model file")->required();
    add_path(eval_cmd, "--test", eval.test, "test corpus")->required();
    add_path(eval_cmd, "--train", eval.train, "training corpus (defines head/body/tail)")->required();
    eval_cmd->add_option("--ks", eval.ks, "nominal recall budgets (scaled by scene size / 50)");
    eval_cmd->add_option("--dp-ks", eval.dp_ks, "DP@k values")->capture_default_str();
    eval_cmd->add_option("--ring-neighbors", eval.ring_neighbors)->capture_default_str();

    CompareOptions compare;
    int baseline_epochs = compare.baseline.epochs;
    auto* cmp_cmd = app.add_subcommand("compare", "CE vs re-weighting vs FGPL side by side");
    add_path(cmp_cmd, "--train", compare.train, "training corpus")->required();
    add_path(cmp_cmd, "--test", compare.test, "test corpus")->required();
    cmp_cmd->add_option("--baseline-epochs", baseline_epochs, "epochs of the lattice baseline")->capture_default_str();
    cmp_cmd->add_option("--dp-ks", compare.dp_ks, "DP@k values")->capture_default_str();
    add_train_flags(cmp_cmd, compare.method);
    add_loss_flags(cmp_cmd, compare.method);

    for (auto* cmd : {gen_cmd, base_cmd, lat_cmd, fgpl_cmd, eval_cmd, cmp_cmd}) {
        cmd->add_option("--seed", seed, "random seed")->capture_default_str();
        cmd->add_option("--out", out_dir, "output directory")->capture_default_str();
    }

    try {
        try {
            app.parse(argc, argv);
        } catch (const CLI::Success& e) {
            return app.exit(e, out, err);
        } catch (const CLI::ParseError& e) {
            emit_error(err, "usage", e.what(), static_cast<int>(ExitCode::kValidation));
            return static_cast<int>(ExitCode::kValidation);
        }

        auto* chosen = app.get_subcommands().front();
        Provenance provenance{chosen->get_name(), chosen->config_to_str(true, false), {}};

        if (chosen == gen_cmd) {
            gen.spec.seed = seed;
            gen.out = out_dir;
            if (!pairs.empty()) {
                gen.spec.confusable_pairs.clear();
                for (const auto& p : pairs) gen.spec.confusable_pairs.push_back(parse_pair(p));
            }
            out << cmd_gen(gen, provenance).string() << "\n";
        } else if (chosen == base_cmd) {
            baseline.config.seed = seed;
            baseline.out = out_dir;
            provenance.inputs = {{"train", baseline.train}};
            out << cmd_train_baseline(baseline, provenance).string() << "\n";
        } else if (chosen == lat_cmd) {
            lattice.out = out_dir;
            provenance.inputs = {{"model", lattice.model}, {"train", lattice.train}};
            out << cmd_build_lattice(lattice, provenance).string() << "\n";
        } else if (chosen == fgpl_cmd) {
            fgpl.config.seed = seed;
            fgpl.config.loss_kind = parse_loss_kind(loss_name);
            fgpl.out = out_dir;
            provenance.inputs = {{"train", fgpl.train}};
            if (!fgpl.lattice.empty()) provenance.inputs.emplace_back("lattice", fgpl.lattice);
            out << cmd_train_fgpl(fgpl, provenance).string() << "\n";
        } else if (chosen == eval_cmd) {
            eval.out = out_dir;
            provenance.inputs = {{"model", eval.model}, {"test", eval.test}, {"train", eval.train}};
            out << cmd_eval(eval, provenance).string() << "\n";
        } else if (chosen == cmp_cmd) {
            compare.method.seed = seed;
            compare.baseline = compare.method;
            compare.baseline.epochs = baseline_epochs;
            compare.out = out_dir;
            provenance.inputs = {{"train", compare.train}, {"test", compare.test}};
            out << cmd_compare(compare, provenance).string() << "\n";
        }
    } catch (const Error& e) {
        const int code = static_cast<int>(e.exit_code());
        emit_error(err, e.kind(), e.what(), code);
        return code;
    } catch (const std::exception& e) {
        emit_error(err, "internal", e.what(), 1);
        return 1;
    }
    return 0;
}

}  // namespace fgpl::cli
