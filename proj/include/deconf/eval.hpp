#pragma once

#include "deconf/stats.hpp"
#include "deconf/vectors.hpp"
#include "deconf/wordnet.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace deconf {

enum class Strategy { MaxSim, AvgSim, AvgSimC, S2W, S2A };

std::optional<Strategy> strategy_from_name(const std::string &name);
std::string strategy_name(Strategy s);

struct SimilarityPair {
  std::string left;  // word, or sense key for word-to-sense datasets
  std::string right;
  double gold = 0.0;
  std::vector<std::string> left_context, right_context; // SCWS only
};

enum class DatasetFormat { Pairs, RG65, YP130, MEN3K, SimLex999, SCWS, CLSS };

std::optional<DatasetFormat> format_from_name(const std::string &name);

struct Dataset {
  std::string name;
  DatasetFormat format = DatasetFormat::Pairs;
  bool has_contexts = false;
  bool word_to_sense = false;
  std::vector<SimilarityPair> pairs;
};

Dataset load_dataset(const std::filesystem::path &path, DatasetFormat format);

// lemma -> rows of the sense store, via the "lemma#pos#offset" key scheme.
class SenseIndex {
public:
  explicit SenseIndex(const VectorStore &senses);

  // Exact lemma match first, then case-folded. Zero-norm rows are skipped.
  std::vector<std::uint32_t> senses_of(const std::string &word) const;

  static std::optional<std::pair<std::string, SynsetId>>
  parse_key(const std::string &key);

private:
  std::unordered_map<std::string, std::vector<std::uint32_t>> exact_;
  std::unordered_map<std::string, std::vector<std::uint32_t>> folded_;
};

struct EvalResources {
  const VectorStore *words = nullptr;  // pre-trained word space
  const VectorStore *senses = nullptr; // trained sense space
  const SenseIndex *sense_index = nullptr;
  const Database *db = nullptr; // needed for antonym adjustment
  LookupPolicy policy;
};

// Similarity between the most similar sense pair of the two words.
double max_sim(const std::string &w1, const std::string &w2,
               const EvalResources &res);
// Mean over all sense pairs.
double avg_sim(const std::string &w1, const std::string &w2,
               const EvalResources &res);

struct AvgSimCResult {
  double score = 0.0;
  bool uniform_fallback = false; // some side had no usable context tokens
};
// Sense-pair similarities weighted by each sense's relevance to its side's
// context: w(s|c) proportional to exp(cos(v_s, mean of context word
// vectors)), normalized per side. Uniform weights when a context has no
// in-vocabulary tokens.
AvgSimCResult avg_sim_c(const SimilarityPair &pair, const EvalResources &res);

// Sense against the word's original vector.
double s2w(const std::string &sense_key, const std::string &word,
           const EvalResources &res);
// Sense against the normalized centroid of the word's sense vectors.
double s2a(const std::string &sense_key, const std::string &word,
           const EvalResources &res);

// score / 5 when some synset of w1 is antonym-linked to some synset of w2.
double antonym_adjust(double score, const std::string &w1,
                      const std::string &w2, const Database &db,
                      const LookupPolicy &policy);

struct EvalOptions {
  bool antonym_adjust = false;
  unsigned threads = 1; // pair scoring fans out; report independent of N
};

struct EvalReport {
  std::string dataset;
  std::string strategy;
  double pearson = 0.0;
  double spearman = 0.0;
  std::uint32_t covered = 0;
  std::uint32_t total = 0;
  std::uint32_t word_backoffs = 0;     // pairs scored from word vectors
  std::uint32_t uniform_fallbacks = 0; // AvgSimC pairs with uniform weights
  std::uint32_t adjusted = 0;          // pairs hit by antonym adjustment
  std::vector<std::string> uncovered_pairs;
};

EvalReport run_benchmark(const Dataset &dataset, Strategy strategy,
                         const EvalResources &res, const EvalOptions &options);

// "dataset strategy pearson spearman covered total"
std::string machine_line(const EvalReport &report);
void print_report(std::ostream &os, const EvalReport &report);

} // namespace deconf
