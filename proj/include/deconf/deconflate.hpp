#pragma once

#include "deconf/bias.hpp"
#include "deconf/vectors.hpp"
#include "deconf/wordnet.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace deconf {

struct DeconfConfig {
  double alpha = 1.0;   // pull toward the lemma's own word vector
  double lambda = 0.2;  // exponential decay rate over bias ranks
  std::uint32_t k = 25; // bias-list truncation

  void validate() const;
};

// exp(-lambda * rank) / list_len: weight of the rank-th biasing word.
double decay_weight(std::uint32_t rank, std::size_t list_len, double lambda);

// Closed-form minimizer of
//   alpha * |v - v_lemma|^2  +  sum_j delta_j * |v - v_bias_j|^2
// restricted to the bias words found in the store. `exclude_word` removes
// one entry from the bias sum (the sense's own lemma, which is already the
// alpha term). Throws UncomputableError when no term is available.
std::vector<double>
deconflate_sense(const std::optional<std::vector<double>> &lemma_vec,
                 const BiasList &bias, const VectorStore &store,
                 const LookupPolicy &policy, const DeconfConfig &config,
                 const std::string &exclude_word = {});

// The objective above, evaluated at `candidate`. Testing/diagnostics only.
double objective_value(
    std::span<const double> candidate,
    const std::optional<std::vector<double>> &lemma_vec,
    const std::vector<std::pair<std::vector<double>, double>> &weighted_bias,
    double alpha);

// Normalized centroid of normalized inputs. Errors on zero-norm input or a
// zero-norm sum (antipodal senses).
std::vector<double>
synset_vector(const std::vector<std::vector<double>> &sense_vectors);

struct SenseSpace {
  std::uint32_t dim = 0;
  // sense key "lemma#pos#offset" -> vector, synsets in (pos, offset) order,
  // senses in lexicon file order within each synset
  std::vector<std::pair<std::string, std::vector<double>>> senses;
  // synset id -> unit vector, in (pos, offset) order
  std::vector<std::pair<SynsetId, std::vector<double>>> synsets;
};

struct CoverageEntry {
  std::string key;
  std::string reason;
};

struct TrainResult {
  SenseSpace space;
  std::vector<CoverageEntry> uncovered;
  std::size_t total_senses = 0;
  std::size_t total_synsets = 0;
};

std::string sense_key(const std::string &lemma, const SynsetId &id);

// One closed-form evaluation per word sense; synset vectors from the
// computed senses. Parallel across synsets, output order deterministic.
TrainResult train_all(const Database &db, const std::vector<BiasList> &lists,
                      const VectorStore &store, const LookupPolicy &policy,
                      const DeconfConfig &config, unsigned threads);

// senses.txt / synsets.txt: word2vec text format, 6 significant digits.
void export_sense_space(const SenseSpace &space,
                        const std::filesystem::path &senses_path,
                        const std::filesystem::path &synsets_path);
void write_coverage_report(const std::filesystem::path &path,
                           const std::vector<CoverageEntry> &uncovered);

} // namespace deconf
