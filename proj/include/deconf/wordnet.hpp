#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

namespace deconf {

// Part of speech. Adjective satellites are folded into Adj.
enum class Pos : std::uint8_t { Noun = 0, Verb = 1, Adj = 2, Adv = 3 };

char pos_char(Pos p);                 // 'n', 'v', 'a', 'r'
std::optional<Pos> pos_from_char(char c); // accepts 's' as Adj

struct SynsetId {
  Pos pos = Pos::Noun;
  std::uint32_t offset = 0; // byte offset of the line in data.<pos>

  friend bool operator==(const SynsetId &, const SynsetId &) = default;
  friend auto operator<=>(const SynsetId &, const SynsetId &) = default;
};

std::string to_string(const SynsetId &id); // "n#02800213"

struct SynsetIdHash {
  std::size_t operator()(const SynsetId &id) const {
    return (static_cast<std::size_t>(id.pos) << 32) ^ id.offset;
  }
};

struct Pointer {
  std::string symbol;  // WordNet pointer symbol ("@", "~", "!", "+", ...)
  SynsetId target;
  bool lexical = false; // true when source/target field was nonzero
};

struct Synset {
  SynsetId id;
  std::vector<std::string> lemmas; // file order, syntactic markers stripped
  std::vector<Pointer> pointers;   // relationTargets; self-loops dropped
  std::set<SynsetId> antonyms;     // antonymy pointers lifted to synset level
  std::string gloss;               // stored opaque, unused by the method
};

// All parsed synsets plus the id -> dense index bijection. Dense indices
// follow (pos, offset) order and are shared with SemanticGraph.
class Database {
public:
  explicit Database(std::vector<Synset> synsets);

  std::size_t size() const { return synsets_.size(); }
  const std::vector<Synset> &synsets() const { return synsets_; }
  const Synset &synset(std::size_t dense) const { return synsets_[dense]; }

  std::optional<std::uint32_t> index_of(const SynsetId &id) const;
  std::uint32_t require_index(const SynsetId &id) const; // IntegrityError

  // Lemma list of a synset, in file order.
  const std::vector<std::string> &lemmas_of(const SynsetId &id) const;

  // True iff an antonymy pointer connects a and b in either direction.
  bool antonym_linked(const SynsetId &a, const SynsetId &b) const;

  // Dense indices of synsets containing the lemma (exact string match).
  std::vector<std::uint32_t> synsets_with_lemma(const std::string &lemma) const;

  std::size_t total_senses() const; // sum of |lemmas| over synsets

  // Content hash over ids, lemmas and pointers; identifies a parse.
  std::uint64_t fingerprint() const { return fingerprint_; }

private:
  std::vector<Synset> synsets_; // sorted by (pos, offset)
  std::unordered_map<SynsetId, std::uint32_t, SynsetIdHash> index_;
  std::unordered_map<std::string, std::vector<std::uint32_t>> lemma_index_;
  std::uint64_t fingerprint_ = 0;
};

// Undirected graph over the dense indexing of a Database, in CSR form.
class SemanticGraph {
public:
  SemanticGraph() = default;
  SemanticGraph(std::uint32_t node_count, std::vector<std::uint64_t> offsets,
                std::vector<std::uint32_t> neighbors);

  std::uint32_t node_count() const { return node_count_; }
  std::uint64_t edge_count() const { return neighbors_.size() / 2; }

  std::uint32_t degree(std::uint32_t i) const {
    return static_cast<std::uint32_t>(offsets_[i + 1] - offsets_[i]);
  }
  const std::uint32_t *neighbors_begin(std::uint32_t i) const {
    return neighbors_.data() + offsets_[i];
  }
  const std::uint32_t *neighbors_end(std::uint32_t i) const {
    return neighbors_.data() + offsets_[i + 1];
  }
  bool has_edge(std::uint32_t i, std::uint32_t j) const;

  std::uint32_t isolated_count() const;
  // Size of the largest connected component.
  std::uint32_t largest_component_size() const;

  const std::vector<std::uint64_t> &offsets() const { return offsets_; }
  const std::vector<std::uint32_t> &neighbors() const { return neighbors_; }

private:
  std::uint32_t node_count_ = 0;
  std::vector<std::uint64_t> offsets_;   // size node_count + 1
  std::vector<std::uint32_t> neighbors_; // sorted per node, no dups/self-loops
};

// Relation filter for build_graph. Empty include_all=false set keeps nothing.
struct RelationFilter {
  bool include_all = true;
  std::set<std::string> symbols; // consulted when include_all is false

  bool keeps(const std::string &symbol) const {
    return include_all || symbols.count(symbol) > 0;
  }
  static RelationFilter all() { return RelationFilter{}; }
  static RelationFilter only(std::set<std::string> syms) {
    return RelationFilter{false, std::move(syms)};
  }
};

// Parse the four WordNet 3.0 data files under data_dir. Fatal on missing
// files, malformed lines, or dangling pointer targets.
std::vector<Synset> parse_wordnet(const std::filesystem::path &data_dir);

// Parse one data.<pos> stream; file_name only labels errors. Performs the
// line-offset integrity check but not cross-file pointer resolution.
std::vector<Synset> parse_data_file(std::istream &in, Pos pos,
                                    const std::string &file_name);

// Verify that every pointer target exists. Throws IntegrityError.
void check_pointer_integrity(const std::vector<Synset> &synsets);

// Build the undirected graph: an edge {i,j} exists iff any retained pointer
// connects i and j in either direction. Duplicates collapse.
SemanticGraph build_graph(const Database &db,
                          const RelationFilter &filter = RelationFilter::all());

// Binary graph file: database + built graph + fingerprint.
void save_graph(const std::filesystem::path &path, const Database &db,
                const SemanticGraph &graph);
struct LoadedGraph {
  Database db;
  SemanticGraph graph;
};
LoadedGraph load_graph(const std::filesystem::path &path);

} // namespace deconf
