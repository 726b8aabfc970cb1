#pragma once

#include "deconf/ppr.hpp"
#include "deconf/wordnet.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace deconf {

struct BiasEntry {
  std::string word;
  std::uint32_t rank = 0;  // 0-based, consecutive
  SynsetId origin;         // synset the word was taken from
};

// Ordered sense-biasing word list for one synset: the synset's own lemmas
// first, then lemmas of other synsets in descending PPR-score order,
// de-duplicated (first occurrence wins), truncated to k entries.
struct BiasList {
  SynsetId target;
  std::vector<BiasEntry> entries;
};

// Build the list from a computed PPR vector. Ties in score break by
// ascending dense index. k counts all entries including the target lemmas.
BiasList extract_bias_list(const Database &db, const PprVector &ppr,
                           std::uint32_t k);

struct BiasBatch {
  std::vector<BiasList> lists; // dense (pos, offset) order, isolated skipped
  std::vector<BatchFailure> failures;
};

// One list per non-isolated synset; per-synset failures are collected.
BiasBatch materialize_all(const Database &db, const TransitionMatrix &matrix,
                          const PprConfig &config, std::uint32_t k,
                          unsigned threads);

// Text export, one line per synset: "pos offset<TAB>word:rank,word:rank,...".
// Lines ordered by (pos, offset).
void write_bias_lists(const std::filesystem::path &path,
                      const std::vector<BiasList> &lists);

// Reads the text export back. Origin synsets are not stored in the file, so
// each entry's origin is set to the list's target.
std::vector<BiasList> read_bias_lists(const std::filesystem::path &path);

} // namespace deconf
