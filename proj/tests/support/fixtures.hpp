#pragma once

#include "deconf/vectors.hpp"
#include "deconf/wordnet.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace fixtures {

// Synthetic noun synsets w0..w{n-1} with offset i == dense index i, wired by
// the given undirected edge list.
std::vector<deconf::Synset>
graph_synsets(std::uint32_t n,
              const std::vector<std::pair<std::uint32_t, std::uint32_t>> &edges);

std::vector<std::pair<std::uint32_t, std::uint32_t>> path3_edges();
std::vector<std::pair<std::uint32_t, std::uint32_t>> triangle_edges();
std::vector<std::pair<std::uint32_t, std::uint32_t>> star5_edges();
// Seeded Erdos-Renyi-ish graph on 10 nodes, isolation fixed up. Stable
// across runs and platforms (raw mt19937 draws, no distributions).
std::vector<std::pair<std::uint32_t, std::uint32_t>> random10_edges();

struct NamedGraph {
  std::string name;
  std::uint32_t nodes;
  std::vector<std::pair<std::uint32_t, std::uint32_t>> edges;
};
std::vector<NamedGraph> oracle_graphs();

// A 14-synset lexicon written in the WordNet 3.0 data-file format, split
// over data.noun/verb/adj/adv with correct byte offsets, license-style
// headers, an antonym pair (sunrise/sunset), a polysemous lemma (digit), a
// multiword lemma (cardinal_number), a satellite adjective with a syntactic
// marker, verb frames, a cross-POS derivation link and one isolated synset
// (hermit).
void write_mini_wordnet(const std::filesystem::path &dir);

// Dimension-3 vectors covering the mini lexicon's lemmas except
// hermit/recluse (left out on purpose to exercise coverage reporting).
deconf::VectorStore mini_vectors();
void write_mini_vectors(const std::filesystem::path &path); // text format

// Scratch directory removed on destruction.
class TempDir {
public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir &) = delete;
  TempDir &operator=(const TempDir &) = delete;
  const std::filesystem::path &path() const { return path_; }

private:
  std::filesystem::path path_;
};

} // namespace fixtures
