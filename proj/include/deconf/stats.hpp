#pragma once

#include <span>
#include <vector>

namespace deconf {

// 1-based fractional ranks; ties receive the average of their positions.
std::vector<double> average_ranks(std::span<const double> xs);

// Product-moment correlation. Centered two-pass computation with a single
// square root, so r(x, x) is exactly 1.0 and r(x, -x) exactly -1.0.
// Throws UncomputableError for length < 2, mismatched lengths, or constant
// input on either side.
double pearson(std::span<const double> xs, std::span<const double> ys);

// Pearson over average ranks.
double spearman(std::span<const double> xs, std::span<const double> ys);

} // namespace deconf
