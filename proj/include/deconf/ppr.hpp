#pragma once

#include "deconf/wordnet.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace deconf {

struct PprConfig {
  double damping = 0.85;   // sigma
  int max_iterations = 30;
  double tolerance = 1e-9; // L1 change threshold

  void validate() const; // throws std::invalid_argument
};

struct PprVector {
  std::uint32_t target = 0;      // dense node index
  std::vector<double> scores;    // length = node count, sums to 1
  int iterations = 0;
  std::vector<double> l1_deltas; // per-iteration L1 change, for diagnostics
};

// Row-stochastic transition matrix of the undirected graph, kept implicitly
// as the CSR adjacency plus inverse degrees. Row i is all zeros when node i
// is isolated.
class TransitionMatrix {
public:
  explicit TransitionMatrix(const SemanticGraph &graph);

  std::uint32_t node_count() const { return graph_->node_count(); }
  bool isolated(std::uint32_t i) const { return graph_->degree(i) == 0; }
  double inverse_degree(std::uint32_t i) const { return inv_degree_[i]; }
  const SemanticGraph &graph() const { return *graph_; }

  // M[i][j] as defined: 1/degree(i) if {i,j} is an edge, else 0.
  double entry(std::uint32_t i, std::uint32_t j) const;

  // max over non-isolated rows of |rowsum - 1|.
  double max_row_sum_error() const;

private:
  const SemanticGraph *graph_;
  std::vector<double> inv_degree_;
};

TransitionMatrix build_transition(const SemanticGraph &graph);

// Power iteration for the teleport-to-one-node PageRank. The update gathers
// score/degree from each neighbor, i.e. multiplies by the transpose of the
// row-stochastic matrix, which keeps the iterate a probability distribution
// on an undirected graph. Deterministic: fixed CSR summation order.
// Throws UncomputableError when the target is isolated; `label` names it.
PprVector personalized_pagerank(const TransitionMatrix &matrix,
                                std::uint32_t target, const PprConfig &config,
                                const std::string &label = {});

struct BatchFailure {
  std::size_t input_index = 0;
  std::uint32_t target = 0;
  std::string message;
};

// Runs personalized_pagerank for each target, fanning out over `threads`
// workers. Results are emitted strictly in input order; per-target failures
// are collected, not fatal. Output is independent of the thread count.
std::vector<BatchFailure>
batch_ppr(const TransitionMatrix &matrix,
          const std::vector<std::uint32_t> &targets, const PprConfig &config,
          unsigned threads,
          const std::function<void(std::size_t, PprVector &&)> &emit);

} // namespace deconf
