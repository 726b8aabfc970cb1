#include "deconf/ppr.hpp"
#include "deconf/errors.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>
#include <thread>

namespace deconf {

void PprConfig::validate() const {
  if (!(damping > 0.0 && damping < 1.0))
    throw std::invalid_argument("damping must be in (0,1)");
  if (max_iterations < 1)
    throw std::invalid_argument("max_iterations must be positive");
  if (!(tolerance >= 0.0))
    throw std::invalid_argument("tolerance must be non-negative");
}

TransitionMatrix::TransitionMatrix(const SemanticGraph &graph)
    : graph_(&graph), inv_degree_(graph.node_count(), 0.0) {
  if (graph.node_count() == 0)
    throw std::invalid_argument("empty graph");
  for (std::uint32_t i = 0; i < graph.node_count(); ++i)
    if (graph.degree(i) > 0)
      inv_degree_[i] = 1.0 / graph.degree(i);
}

double TransitionMatrix::entry(std::uint32_t i, std::uint32_t j) const {
  return graph_->has_edge(i, j) ? inv_degree_[i] : 0.0;
}

double TransitionMatrix::max_row_sum_error() const {
  double worst = 0.0;
  for (std::uint32_t i = 0; i < node_count(); ++i) {
    if (isolated(i))
      continue;
    double sum = static_cast<double>(graph_->degree(i)) * inv_degree_[i];
    worst = std::max(worst, std::abs(sum - 1.0));
  }
  return worst;
}

TransitionMatrix build_transition(const SemanticGraph &graph) {
  return TransitionMatrix(graph);
}

PprVector personalized_pagerank(const TransitionMatrix &matrix,
                                std::uint32_t target, const PprConfig &config,
                                const std::string &label) {
  config.validate();
  const auto m = matrix.node_count();
  if (target >= m)
    throw UncomputableError("PPR target out of range");
  if (matrix.isolated(target))
    throw UncomputableError(
        "PPR target is isolated: " +
        (label.empty() ? "node " + std::to_string(target) : label));

  const SemanticGraph &g = matrix.graph();
  const double sigma = config.damping;
  const double teleport = 1.0 - sigma;

  PprVector out;
  out.target = target;
  std::vector<double> cur(m, 0.0), next(m, 0.0);
  cur[target] = 1.0; // one-hot start

  for (int it = 0; it < config.max_iterations; ++it) {
    for (std::uint32_t i = 0; i < m; ++i) {
      double acc = 0.0;
      const std::uint32_t *nb = g.neighbors_begin(i);
      const std::uint32_t *nbe = g.neighbors_end(i);
      for (; nb != nbe; ++nb)
        acc += cur[*nb] * matrix.inverse_degree(*nb);
      next[i] = sigma * acc;
    }
    next[target] += teleport;

    double delta = 0.0;
    for (std::uint32_t i = 0; i < m; ++i)
      delta += std::abs(next[i] - cur[i]);
    cur.swap(next);
    out.l1_deltas.push_back(delta);
    out.iterations = it + 1;
    if (delta < config.tolerance)
      break;
  }

  double sum = 0.0;
  for (double v : cur)
    sum += v;
  if (std::abs(sum - 1.0) > 1e-6)
    throw IntegrityError("PPR mass not conserved: sum=" +
                         std::to_string(sum));
  out.scores = std::move(cur);
  return out;
}

std::vector<BatchFailure>
batch_ppr(const TransitionMatrix &matrix,
          const std::vector<std::uint32_t> &targets, const PprConfig &config,
          unsigned threads,
          const std::function<void(std::size_t, PprVector &&)> &emit) {
  config.validate();
  if (threads == 0)
    threads = 1;
  threads = static_cast<unsigned>(std::min<std::size_t>(
      threads, std::max<std::size_t>(targets.size(), 1)));

  std::vector<BatchFailure> failures;
  std::atomic<std::size_t> next_job{0};
  std::mutex mu;
  std::map<std::size_t, PprVector> ready; // holds out-of-order results
  std::size_t emit_cursor = 0;
  std::vector<bool> failed(targets.size(), false);

  auto drain = [&]() { // caller holds mu
    while (true) {
      if (emit_cursor >= targets.size())
        break;
      if (failed[emit_cursor]) {
        ++emit_cursor;
        continue;
      }
      auto it = ready.find(emit_cursor);
      if (it == ready.end())
        break;
      emit(emit_cursor, std::move(it->second));
      ready.erase(it);
      ++emit_cursor;
    }
  };

  auto worker = [&]() {
    while (true) {
      std::size_t j = next_job.fetch_add(1);
      if (j >= targets.size())
        break;
      try {
        PprVector v = personalized_pagerank(matrix, targets[j], config);
        std::lock_guard<std::mutex> lock(mu);
        ready.emplace(j, std::move(v));
        drain();
      } catch (const std::exception &e) {
        std::lock_guard<std::mutex> lock(mu);
        failures.push_back(BatchFailure{j, targets[j], e.what()});
        failed[j] = true;
        drain();
      }
    }
  };

  std::vector<std::thread> pool;
  for (unsigned t = 1; t < threads; ++t)
    pool.emplace_back(worker);
  worker();
  for (auto &t : pool)
    t.join();

  std::sort(failures.begin(), failures.end(),
            [](const BatchFailure &a, const BatchFailure &b) {
              return a.input_index < b.input_index;
            });
  return failures;
}

} // namespace deconf
