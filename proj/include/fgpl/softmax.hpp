#pragma once

#include <span>
#include <vector>

namespace fgpl {

/// Max-shifted log(sum(exp(x))). Requires a non-empty input.
double log_sum_exp(std::span<const double> x);

/// Max-shifted softmax; entries lie in [0,1] and sum to 1.
std::vector<double> softmax(std::span<const double> logits);

/// Index of the largest entry, lowest index on ties.
int argmax(std::span<const double> x);

/// Throws NumericError if any entry is NaN or infinite.
void require_finite(std::span<const double> x, const char* what);

}  // namespace fgpl
