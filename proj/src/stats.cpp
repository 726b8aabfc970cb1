#include "deconf/stats.hpp"
#include "deconf/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace deconf {

std::vector<double> average_ranks(std::span<const double> xs) {
  const std::size_t n = xs.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return xs[a] < xs[b]; });
  std::vector<double> ranks(n, 0.0);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && xs[order[j + 1]] == xs[order[i]])
      ++j;
    // positions i..j (0-based) tie; average 1-based rank
    double r = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k)
      ranks[order[k]] = r;
    i = j + 1;
  }
  return ranks;
}

double pearson(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size())
    throw UncomputableError("correlation: length mismatch");
  const std::size_t n = xs.size();
  if (n < 2)
    throw UncomputableError("correlation needs at least 2 points");
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double a = xs[i] - mx;
    double b = ys[i] - my;
    sxy += a * b;
    sxx += a * a;
    syy += b * b;
  }
  if (sxx == 0.0 || syy == 0.0)
    throw UncomputableError("correlation undefined for constant input");
  return sxy / std::sqrt(sxx * syy);
}

double spearman(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size())
    throw UncomputableError("correlation: length mismatch");
  auto rx = average_ranks(xs);
  auto ry = average_ranks(ys);
  return pearson(rx, ry);
}

} // namespace deconf
