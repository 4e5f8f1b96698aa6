#include "fgpl/softmax.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "fgpl/errors.hpp"

namespace fgpl {

double log_sum_exp(std::span<const double> x) {
    const double m = *std::max_element(x.begin(), x.end());
    double sum = 0.0;
    for (double v : x) sum += std::exp(v - m);
    return m + std::log(sum);
}

std::vector<double> softmax(std::span<const double> logits) {
    const double m = *std::max_element(logits.begin(), logits.end());
    std::vector<double> out(logits.size());
    double sum = 0.0;
    for (std::size_t k = 0; k < logits.size(); ++k) {
        out[k] = std::exp(logits[k] - m);
        sum += out[k];
    }
    for (auto& v : out) v /= sum;
    return out;
}

int argmax(std::span<const double> x) {
    int best = 0;
    for (std::size_t k = 1; k < x.size(); ++k) {
        if (x[k] > x[static_cast<std::size_t>(best)]) best = static_cast<int>(k);
    }
    return best;
}

void require_finite(std::span<const double> x, const char* what) {
    for (double v : x) {
        if (!std::isfinite(v)) throw NumericError(std::string("non-finite value in ") + what);
    }
}

}  // namespace fgpl
