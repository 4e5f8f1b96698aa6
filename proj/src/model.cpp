#include "fgpl/model.hpp"

#include <cmath>

#include "fgpl/errors.hpp"
#include "fgpl/softmax.hpp"
#include "fgpl/text_io.hpp"

namespace fgpl {

namespace {

std::size_t context_offset(const CorpusShape& shape, int subject, int object) {
    return (static_cast<std::size_t>(subject) * static_cast<std::size_t>(shape.num_objects) +
            static_cast<std::size_t>(object)) *
           static_cast<std::size_t>(shape.num_classes);
}

void append_row(std::string& out, std::span<const double> row) {
    for (std::size_t k = 0; k < row.size(); ++k) {
        if (k) out += ',';
        out += text::format_g17(row[k]);
    }
    out += '\n';
}

}  // namespace

std::span<const double> FrequencyPrior::row(int subject, int object) const {
    const auto c = static_cast<std::size_t>(num_classes);
    const auto off = (static_cast<std::size_t>(subject) * static_cast<std::size_t>(num_objects) +
                      static_cast<std::size_t>(object)) *
                     c;
    return {probabilities.data() + off, c};
}

FrequencyPrior build_frequency_prior(std::span<const TripletSample> samples, const CorpusShape& shape,
                                     double smoothing) {
    if (!(smoothing > 0.0) || !std::isfinite(smoothing)) {
        throw ValidationError("prior smoothing must be a positive real, got " + text::format_g17(smoothing));
    }
    if (samples.empty()) throw ValidationError("cannot build a frequency prior from an empty training set");
    validate_samples(samples, shape);

    const auto c = static_cast<std::size_t>(shape.num_classes);
    const auto contexts = static_cast<std::size_t>(shape.num_objects) * static_cast<std::size_t>(shape.num_objects);
    std::vector<double> counts(contexts * c, 0.0);
    for (const auto& s : samples) {
        counts[context_offset(shape, s.subject_id, s.object_id) + static_cast<std::size_t>(s.label)] += 1.0;
    }

    FrequencyPrior prior{shape.num_objects, shape.num_classes, std::vector<double>(contexts * c)};
    for (std::size_t ctx = 0; ctx < contexts; ++ctx) {
        double total = 0.0;
        for (std::size_t r = 0; r < c; ++r) total += counts[ctx * c + r];
        const double denom = total + static_cast<double>(c) * smoothing;
        for (std::size_t r = 0; r < c; ++r) {
            prior.probabilities[ctx * c + r] = (counts[ctx * c + r] + smoothing) / denom;
        }
    }
    return prior;
}

std::span<const double> Classifier::log_prior_row(int subject, int object) const {
    return {log_prior.data() + context_offset(shape, subject, object), static_cast<std::size_t>(shape.num_classes)};
}

Classifier Classifier::zeros(const CorpusShape& shape) {
    Classifier m;
    m.shape = shape;
    m.weights.assign(static_cast<std::size_t>(shape.num_classes) * static_cast<std::size_t>(shape.feature_dim), 0.0);
    m.bias.assign(static_cast<std::size_t>(shape.num_classes), 0.0);
    return m;
}

void Classifier::attach_prior(const FrequencyPrior& prior) {
    if (prior.num_classes != shape.num_classes || prior.num_objects != shape.num_objects) {
        throw ValidationError("prior dimensions (C=" + std::to_string(prior.num_classes) +
                              ", O=" + std::to_string(prior.num_objects) + ") do not match classifier (C=" +
                              std::to_string(shape.num_classes) + ", O=" + std::to_string(shape.num_objects) + ")");
    }
    log_prior.resize(prior.probabilities.size());
    for (std::size_t k = 0; k < log_prior.size(); ++k) log_prior[k] = std::log(prior.probabilities[k]);
}

void check_compatible(const Classifier& model, const CorpusShape& shape) {
    if (model.shape.num_classes != shape.num_classes || model.shape.feature_dim != shape.feature_dim ||
        (model.has_prior() && model.shape.num_objects != shape.num_objects)) {
        throw ValidationError(
            "dimension mismatch: model has C=" + std::to_string(model.shape.num_classes) +
            " D=" + std::to_string(model.shape.feature_dim) + " O=" + std::to_string(model.shape.num_objects) +
            ", corpus has C=" + std::to_string(shape.num_classes) + " D=" + std::to_string(shape.feature_dim) +
            " O=" + std::to_string(shape.num_objects));
    }
}

void check_compatible(const Classifier& model, const TripletSample& sample) {
    if (static_cast<int>(sample.features.size()) != model.shape.feature_dim) {
        throw ValidationError("dimension mismatch: model expects D=" + std::to_string(model.shape.feature_dim) +
                              ", sample has D=" + std::to_string(sample.features.size()));
    }
    if (model.has_prior() && (sample.subject_id < 0 || sample.subject_id >= model.shape.num_objects ||
                              sample.object_id < 0 || sample.object_id >= model.shape.num_objects)) {
        throw ValidationError("object id outside the model's O=" + std::to_string(model.shape.num_objects));
    }
}

std::vector<double> forward_logits(const Classifier& model, const TripletSample& sample) {
    check_compatible(model, sample);
    const auto c = static_cast<std::size_t>(model.shape.num_classes);
    const auto d = static_cast<std::size_t>(model.shape.feature_dim);
    std::vector<double> eta(model.bias);
    for (std::size_t r = 0; r < c; ++r) {
        const double* w = model.weights.data() + r * d;
        double acc = 0.0;
        for (std::size_t k = 0; k < d; ++k) acc += w[k] * sample.features[k];
        eta[r] += acc;
    }
    if (model.has_prior()) {
        const auto lp = model.log_prior_row(sample.subject_id, sample.object_id);
        for (std::size_t r = 0; r < c; ++r) eta[r] += lp[r];
    }
    return eta;
}

ScoredClass predict_scores(const Classifier& model, const TripletSample& sample) {
    const auto eta = forward_logits(model, sample);
    return {argmax(eta), softmax(eta)};
}

std::string serialize_model(const Classifier& model) {
    const auto c = static_cast<std::size_t>(model.shape.num_classes);
    const auto d = static_cast<std::size_t>(model.shape.feature_dim);
    std::string out = "# C=" + std::to_string(model.shape.num_classes) +
                      " D=" + std::to_string(model.shape.feature_dim) +
                      " O=" + std::to_string(model.shape.num_objects) +
                      " has_prior=" + (model.has_prior() ? "1" : "0") + "\n";
    out += "weights\n";
    for (std::size_t r = 0; r < c; ++r) append_row(out, std::span(model.weights).subspan(r * d, d));
    out += "bias\n";
    append_row(out, model.bias);
    if (model.has_prior()) {
        out += "log_prior\n";
        for (std::size_t off = 0; off < model.log_prior.size(); off += c) {
            append_row(out, std::span(model.log_prior).subspan(off, c));
        }
    }
    return out;
}

Classifier parse_model(std::string_view contents) {
    text::LineReader reader(contents);
    const auto header = reader.require("model header");
    const auto v = text::parse_header(header, {"C", "D", "O", "has_prior"}, reader.line_number());
    if (v[0] < 1 || v[1] < 1 || v[2] < 1 || (v[3] != 0 && v[3] != 1)) {
        throw ParseError("invalid model header values", reader.line_number());
    }
    Classifier m = Classifier::zeros({static_cast<int>(v[0]), static_cast<int>(v[2]), static_cast<int>(v[1])});
    const auto c = static_cast<std::size_t>(v[0]);
    const auto d = static_cast<std::size_t>(v[1]);

    auto expect_section = [&](std::string_view name) {
        const auto line = reader.require(std::string(name));
        if (line != name) throw ParseError("expected section '" + std::string(name) + "'", reader.line_number());
    };
    expect_section("weights");
    for (std::size_t r = 0; r < c; ++r) {
        const auto row = text::parse_real_row(reader.require("weight row"), d, reader.line_number());
        std::copy(row.begin(), row.end(), m.weights.begin() + static_cast<std::ptrdiff_t>(r * d));
    }
    expect_section("bias");
    m.bias = text::parse_real_row(reader.require("bias row"), c, reader.line_number());
    if (v[3] == 1) {
        expect_section("log_prior");
        const auto contexts = static_cast<std::size_t>(v[2]) * static_cast<std::size_t>(v[2]);
        m.log_prior.reserve(contexts * c);
        for (std::size_t ctx = 0; ctx < contexts; ++ctx) {
            const auto row = text::parse_real_row(reader.require("log_prior row"), c, reader.line_number());
            m.log_prior.insert(m.log_prior.end(), row.begin(), row.end());
        }
    }
    std::string_view extra;
    if (reader.next(extra)) throw ParseError("unexpected trailing content", reader.line_number());
    return m;
}

void save_model(const Classifier& model, const std::filesystem::path& path) {
    text::write_file(path, serialize_model(model));
}

Classifier load_model(const std::filesystem::path& path) {
    const auto contents = text::read_file(path);
    try {
        return parse_model(contents);
    } catch (const ParseError& e) {
        throw e.with_source(path.string());
    }
}

}  // namespace fgpl
