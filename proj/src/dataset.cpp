#include "fgpl/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "fgpl/errors.hpp"
#include "fgpl/text_io.hpp"

namespace fgpl {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t scene_seed(std::uint64_t seed, std::int64_t scene_id) {
    return splitmix64(splitmix64(seed) ^ static_cast<std::uint64_t>(scene_id));
}

// Largest-remainder apportionment of `total` items to probabilities `p`,
// then at least one item per class (taken from the largest classes).
std::vector<std::int64_t> apportion(const std::vector<double>& p, std::int64_t total) {
    const auto c = p.size();
    std::vector<std::int64_t> counts(c);
    std::vector<std::pair<double, std::size_t>> remainders;
    std::int64_t assigned = 0;
    for (std::size_t i = 0; i < c; ++i) {
        const double exact = p[i] * static_cast<double>(total);
        counts[i] = static_cast<std::int64_t>(std::floor(exact));
        assigned += counts[i];
        remainders.emplace_back(exact - std::floor(exact), i);
    }
    std::stable_sort(remainders.begin(), remainders.end(),
                     [](const auto& a, const auto& b) { return a.first > b.first; });
    for (std::size_t k = 0; assigned < total; ++k, ++assigned) {
        ++counts[remainders[k % c].second];
    }
    for (std::size_t i = 0; i < c; ++i) {
        while (counts[i] == 0) {
            const auto donor = static_cast<std::size_t>(
                std::max_element(counts.begin(), counts.end()) - counts.begin());
            if (counts[donor] <= 1) break;
            --counts[donor];
            ++counts[i];
        }
    }
    return counts;
}

using Context = std::pair<int, int>;

std::vector<std::vector<Context>> preferred_contexts(const GeneratorSpec& spec, std::mt19937_64& rng) {
    std::uniform_int_distribution<int> object(0, spec.num_objects - 1);
    std::vector<std::vector<Context>> contexts(spec.num_classes);
    for (auto& list : contexts) {
        for (int k = 0; k < spec.contexts_per_class; ++k) {
            const int s = object(rng);
            const int o = object(rng);
            list.emplace_back(s, o);
        }
    }
    // Confusable predicates describe the same subject-object pairs.
    for (const auto& pair : spec.confusable_pairs) {
        contexts[pair.second] = contexts[pair.first];
    }
    return contexts;
}

std::vector<double> draw_means(const GeneratorSpec& spec, std::mt19937_64& rng) {
    const auto c = static_cast<std::size_t>(spec.num_classes);
    const auto d = static_cast<std::size_t>(spec.feature_dim);
    std::normal_distribution<double> gauss(0.0, spec.mean_scale / std::sqrt(static_cast<double>(d)));
    std::vector<double> means(c * d);
    for (auto& m : means) m = gauss(rng);
    for (const auto& pair : spec.confusable_pairs) {
        double* a = &means[static_cast<std::size_t>(pair.first) * d];
        double* b = &means[static_cast<std::size_t>(pair.second) * d];
        const double t = 0.5 * pair.overlap;
        for (std::size_t k = 0; k < d; ++k) {
            const double gap = b[k] - a[k];
            a[k] += t * gap;
            b[k] -= t * gap;
        }
    }
    return means;
}

std::vector<TripletSample> generate_split(const GeneratorSpec& spec,
                                          const std::vector<double>& means,
                                          const std::vector<std::vector<Context>>& contexts,
                                          std::int64_t first_scene, int num_scenes,
                                          std::mt19937_64& label_rng) {
    const auto total = static_cast<std::int64_t>(num_scenes) * spec.scene_size;
    const auto counts = apportion(zipf_probabilities(spec.num_classes, spec.zipf_exponent), total);
    std::vector<int> labels;
    labels.reserve(static_cast<std::size_t>(total));
    for (int c = 0; c < spec.num_classes; ++c) {
        labels.insert(labels.end(), static_cast<std::size_t>(counts[static_cast<std::size_t>(c)]), c);
    }
    std::shuffle(labels.begin(), labels.end(), label_rng);

    const auto d = static_cast<std::size_t>(spec.feature_dim);
    std::vector<TripletSample> samples(labels.size());
    for (int s = 0; s < num_scenes; ++s) {
        const std::int64_t scene_id = first_scene + s;
        std::mt19937_64 rng(scene_seed(spec.seed, scene_id));
        std::normal_distribution<double> noise(0.0, 1.0);
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        std::uniform_int_distribution<int> object(0, spec.num_objects - 1);
        for (int g = 0; g < spec.scene_size; ++g) {
            const auto idx = static_cast<std::size_t>(s) * static_cast<std::size_t>(spec.scene_size) +
                             static_cast<std::size_t>(g);
            auto& sample = samples[idx];
            sample.scene_id = scene_id;
            sample.label = labels[idx];
            const auto& prefs = contexts[static_cast<std::size_t>(sample.label)];
            if (unit(rng) < spec.context_noise || prefs.empty()) {
                sample.subject_id = object(rng);
                sample.object_id = object(rng);
            } else {
                std::uniform_int_distribution<std::size_t> pick(0, prefs.size() - 1);
                const auto [subj, obj] = prefs[pick(rng)];
                sample.subject_id = subj;
                sample.object_id = obj;
            }
            sample.features.resize(d);
            const double* mean = &means[static_cast<std::size_t>(sample.label) * d];
            for (std::size_t k = 0; k < d; ++k) sample.features[k] = mean[k] + noise(rng);
        }
    }
    return samples;
}

}  // namespace

void GeneratorSpec::validate() const {
    std::vector<std::string> problems;
    if (num_classes < 2) problems.push_back("num_classes must be >= 2");
    if (num_objects < 1) problems.push_back("num_objects must be >= 1");
    if (feature_dim < 1) problems.push_back("feature_dim must be >= 1");
    if (num_scenes < 2) problems.push_back("num_scenes must be >= 2");
    if (scene_size < 1) problems.push_back("scene_size must be >= 1");
    if (!(zipf_exponent > 0.0) || !std::isfinite(zipf_exponent)) {
        problems.push_back("zipf_exponent must be a positive real");
    }
    if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
        problems.push_back("test_fraction must lie in (0, 1)");
    }
    if (!(mean_scale >= 0.0) || !std::isfinite(mean_scale)) problems.push_back("mean_scale must be >= 0");
    if (contexts_per_class < 1) problems.push_back("contexts_per_class must be >= 1");
    if (!(context_noise >= 0.0 && context_noise <= 1.0)) {
        problems.push_back("context_noise must lie in [0, 1]");
    }
    for (const auto& p : confusable_pairs) {
        const std::string tag =
            "confusable pair (" + std::to_string(p.first) + "," + std::to_string(p.second) + ")";
        if (p.first < 0 || p.first >= num_classes || p.second < 0 || p.second >= num_classes) {
            problems.push_back(tag + " references a class id outside [0, num_classes)");
        } else if (p.first == p.second) {
            problems.push_back(tag + " must reference two distinct classes");
        }
        if (!(p.overlap >= 0.0 && p.overlap <= 1.0)) problems.push_back(tag + " overlap must lie in [0, 1]");
    }
    if (problems.empty() && num_scenes >= 2) {
        const int test_scenes = static_cast<int>(std::lround(test_fraction * num_scenes));
        const int train_scenes = num_scenes - test_scenes;
        if (test_scenes < 1 || train_scenes < 1) {
            problems.push_back("test_fraction leaves an empty split");
        } else if (static_cast<std::int64_t>(train_scenes) * scene_size < num_classes) {
            problems.push_back("training split has fewer samples than classes");
        }
    }
    if (!problems.empty()) {
        std::string msg = "invalid generator spec:";
        for (const auto& p : problems) msg += " " + p + ";";
        throw ValidationError(msg);
    }
}

GeneratorSpec default_generator_spec(std::uint64_t seed) {
    GeneratorSpec spec;
    spec.seed = seed;
    // Head predicates paired with body/tail predicates that share their contexts.
    for (int k = 0; k < 10; ++k) {
        spec.confusable_pairs.push_back({12 + 4 * k, k, 0.9});
    }
    return spec;
}

std::vector<double> zipf_probabilities(int num_classes, double exponent) {
    std::vector<double> p(static_cast<std::size_t>(num_classes));
    double norm = 0.0;
    for (int i = 0; i < num_classes; ++i) {
        p[static_cast<std::size_t>(i)] = std::pow(static_cast<double>(i + 1), -exponent);
        norm += p[static_cast<std::size_t>(i)];
    }
    for (auto& v : p) v /= norm;
    return p;
}

std::vector<double> class_means(const GeneratorSpec& spec) {
    spec.validate();
    std::mt19937_64 rng(spec.seed);
    auto contexts = preferred_contexts(spec, rng);
    (void)contexts;
    return draw_means(spec, rng);
}

SplitCorpus generate_corpus(const GeneratorSpec& spec) {
    spec.validate();
    std::mt19937_64 rng(spec.seed);
    const auto contexts = preferred_contexts(spec, rng);
    const auto means = draw_means(spec, rng);

    const int test_scenes = static_cast<int>(std::lround(spec.test_fraction * spec.num_scenes));
    const int train_scenes = spec.num_scenes - test_scenes;
    const CorpusShape shape{spec.num_classes, spec.num_objects, spec.feature_dim};

    SplitCorpus out;
    out.train.shape = shape;
    out.test.shape = shape;
    out.train.samples = generate_split(spec, means, contexts, 0, train_scenes, rng);
    out.test.samples = generate_split(spec, means, contexts, train_scenes, test_scenes, rng);
    return out;
}

void validate_samples(std::span<const TripletSample> samples, const CorpusShape& shape) {
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const auto& s = samples[i];
        const auto where = "sample " + std::to_string(i) + ": ";
        if (s.label < 0 || s.label >= shape.num_classes) {
            throw ValidationError(where + "label " + std::to_string(s.label) + " outside [0, " +
                                  std::to_string(shape.num_classes) + ")");
        }
        if (s.subject_id < 0 || s.subject_id >= shape.num_objects || s.object_id < 0 ||
            s.object_id >= shape.num_objects) {
            throw ValidationError(where + "object id outside [0, " + std::to_string(shape.num_objects) + ")");
        }
        if (static_cast<int>(s.features.size()) != shape.feature_dim) {
            throw ValidationError(where + "feature dimension " + std::to_string(s.features.size()) +
                                  " != " + std::to_string(shape.feature_dim));
        }
        for (double f : s.features) {
            if (!std::isfinite(f)) throw ValidationError(where + "non-finite feature");
        }
    }
}

std::string serialize_corpus(const Corpus& corpus) {
    std::string out = "# C=" + std::to_string(corpus.shape.num_classes) +
                      " O=" + std::to_string(corpus.shape.num_objects) +
                      " D=" + std::to_string(corpus.shape.feature_dim) + "\n";
    for (const auto& s : corpus.samples) {
        out += std::to_string(s.scene_id);
        out += ',';
        out += std::to_string(s.subject_id);
        out += ',';
        out += std::to_string(s.object_id);
        out += ',';
        out += std::to_string(s.label);
        for (double f : s.features) {
            out += ',';
            out += text::format_exact(f);
        }
        out += '\n';
    }
    return out;
}

Corpus parse_corpus(std::string_view contents) {
    Corpus corpus;
    bool have_header = false;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos < contents.size()) {
        auto end = contents.find('\n', pos);
        if (end == std::string_view::npos) end = contents.size();
        const auto line = text::trim(contents.substr(pos, end - pos));
        pos = end + 1;
        ++line_no;
        if (line.empty()) continue;
        if (!have_header) {
            const auto v = text::parse_header(line, {"C", "O", "D"}, line_no);
            if (v[0] < 1 || v[1] < 1 || v[2] < 1) throw ParseError("header dimensions must be positive", line_no);
            corpus.shape = {static_cast<int>(v[0]), static_cast<int>(v[1]), static_cast<int>(v[2])};
            have_header = true;
            continue;
        }
        const auto fields = text::split(line, ',');
        const auto d = static_cast<std::size_t>(corpus.shape.feature_dim);
        if (fields.size() != 4 + d) {
            throw ParseError("expected " + std::to_string(4 + d) + " fields, found " +
                                 std::to_string(fields.size()),
                             line_no);
        }
        TripletSample s;
        s.scene_id = text::parse_int(fields[0], line_no);
        const auto subject = text::parse_int(fields[1], line_no);
        const auto object = text::parse_int(fields[2], line_no);
        const auto label = text::parse_int(fields[3], line_no);
        if (s.scene_id < 0) throw ParseError("negative scene id", line_no);
        if (subject < 0 || object < 0) throw ParseError("negative object id", line_no);
        if (label < 0) throw ParseError("negative label " + std::to_string(label), line_no);
        if (label >= corpus.shape.num_classes) {
            throw ValidationError("line " + std::to_string(line_no) + ": class id " + std::to_string(label) +
                                  " >= C=" + std::to_string(corpus.shape.num_classes));
        }
        if (subject >= corpus.shape.num_objects || object >= corpus.shape.num_objects) {
            throw ValidationError("line " + std::to_string(line_no) + ": object id >= O=" +
                                  std::to_string(corpus.shape.num_objects));
        }
        s.subject_id = static_cast<int>(subject);
        s.object_id = static_cast<int>(object);
        s.label = static_cast<int>(label);
        s.features.reserve(d);
        for (std::size_t k = 0; k < d; ++k) s.features.push_back(text::parse_double(fields[4 + k], line_no));
        corpus.samples.push_back(std::move(s));
    }
    return corpus;
}

void save_corpus(const Corpus& corpus, const std::filesystem::path& path) {
    text::write_file(path, serialize_corpus(corpus));
}

Corpus load_corpus(const std::filesystem::path& path) {
    const auto contents = text::read_file(path);
    try {
        return parse_corpus(contents);
    } catch (const ParseError& e) {
        throw e.with_source(path.string());
    }
}

std::int64_t ClassFrequencies::total() const {
    return std::accumulate(counts.begin(), counts.end(), std::int64_t{0});
}

ClassFrequencies class_frequencies(std::span<const TripletSample> samples, int num_classes) {
    ClassFrequencies f;
    f.counts.assign(static_cast<std::size_t>(num_classes), 0);
    for (const auto& s : samples) {
        if (s.label < 0 || s.label >= num_classes) {
            throw ValidationError("label " + std::to_string(s.label) + " outside [0, " +
                                  std::to_string(num_classes) + ")");
        }
        ++f.counts[static_cast<std::size_t>(s.label)];
    }
    return f;
}

void require_all_classes_present(const ClassFrequencies& freqs) {
    std::string missing;
    for (std::size_t i = 0; i < freqs.counts.size(); ++i) {
        if (freqs.counts[i] < 1) missing += (missing.empty() ? "" : ",") + std::to_string(i);
    }
    if (!missing.empty()) throw ValidationError("classes without training samples: " + missing);
}

}  // namespace fgpl
