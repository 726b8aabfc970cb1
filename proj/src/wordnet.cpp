#include "deconf/wordnet.hpp"
#include "deconf/errors.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>
#include <numeric>
#include <sstream>

namespace deconf {

char pos_char(Pos p) {
  switch (p) {
  case Pos::Noun: return 'n';
  case Pos::Verb: return 'v';
  case Pos::Adj: return 'a';
  case Pos::Adv: return 'r';
  }
  return '?';
}

std::optional<Pos> pos_from_char(char c) {
  switch (c) {
  case 'n': return Pos::Noun;
  case 'v': return Pos::Verb;
  case 'a': return Pos::Adj;
  case 's': return Pos::Adj; // satellites fold into adj
  case 'r': return Pos::Adv;
  default: return std::nullopt;
  }
}

std::string to_string(const SynsetId &id) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%c#%08u", pos_char(id.pos), id.offset);
  return buf;
}

namespace {

// Whitespace tokenizer that remembers its position so the gloss can be
// taken as the raw remainder of the line.
struct LineScanner {
  const std::string &line;
  std::size_t pos = 0;

  explicit LineScanner(const std::string &l) : line(l) {}

  std::optional<std::string> next() {
    while (pos < line.size() && line[pos] == ' ')
      ++pos;
    if (pos >= line.size())
      return std::nullopt;
    std::size_t start = pos;
    while (pos < line.size() && line[pos] != ' ')
      ++pos;
    return line.substr(start, pos - start);
  }

  std::string remainder() {
    while (pos < line.size() && line[pos] == ' ')
      ++pos;
    return line.substr(pos);
  }
};

[[noreturn]] void fail_parse(const std::string &file, std::uint64_t byte,
                             const std::string &what) {
  std::ostringstream os;
  os << file << ": byte " << byte << ": " << what;
  throw ParseError(os.str());
}

std::uint32_t parse_uint(const std::string &tok, int base,
                         const std::string &file, std::uint64_t byte,
                         const char *what) {
  std::size_t used = 0;
  unsigned long v = 0;
  try {
    v = std::stoul(tok, &used, base);
  } catch (const std::exception &) {
    used = 0;
  }
  if (used != tok.size())
    fail_parse(file, byte, std::string("bad ") + what + " field '" + tok + "'");
  return static_cast<std::uint32_t>(v);
}

// Adjective words may carry a syntactic marker: able(p), front(a), ...
std::string strip_marker(const std::string &word) {
  if (!word.empty() && word.back() == ')') {
    auto open = word.rfind('(');
    if (open != std::string::npos && open > 0)
      return word.substr(0, open);
  }
  return word;
}

} // namespace

std::vector<Synset> parse_data_file(std::istream &in, Pos pos,
                                    const std::string &file_name) {
  std::vector<Synset> out;
  std::string line;
  std::uint64_t line_start = 0;
  while (std::getline(in, line)) {
    std::uint64_t here = line_start;
    line_start += line.size() + 1;
    if (!line.empty() && line.back() == '\r')
      line.pop_back();
    if (line.empty() || line[0] == ' ')
      continue; // license header

    LineScanner sc(line);
    auto need = [&](const char *what) -> std::string {
      auto t = sc.next();
      if (!t)
        fail_parse(file_name, here, std::string("missing ") + what);
      return *t;
    };

    Synset syn;
    syn.id.pos = pos;
    syn.id.offset = parse_uint(need("synset_offset"), 10, file_name, here,
                               "synset_offset");
    if (syn.id.offset != here)
      fail_parse(file_name, here,
                 "synset_offset " + std::to_string(syn.id.offset) +
                     " does not match line position");

    need("lex_filenum");
    std::string ss_type = need("ss_type");
    auto parsed_pos = ss_type.size() == 1 ? pos_from_char(ss_type[0])
                                          : std::nullopt;
    if (!parsed_pos || *parsed_pos != pos)
      fail_parse(file_name, here, "unexpected ss_type '" + ss_type + "'");

    std::uint32_t w_cnt = parse_uint(need("w_cnt"), 16, file_name, here,
                                     "w_cnt");
    if (w_cnt == 0)
      fail_parse(file_name, here, "synset with zero words");
    for (std::uint32_t w = 0; w < w_cnt; ++w) {
      std::string word = strip_marker(need("word"));
      parse_uint(need("lex_id"), 16, file_name, here, "lex_id");
      if (std::find(syn.lemmas.begin(), syn.lemmas.end(), word) !=
          syn.lemmas.end())
        fail_parse(file_name, here, "duplicate lemma '" + word + "'");
      syn.lemmas.push_back(std::move(word));
    }

    std::uint32_t p_cnt = parse_uint(need("p_cnt"), 10, file_name, here,
                                     "p_cnt");
    for (std::uint32_t p = 0; p < p_cnt; ++p) {
      Pointer ptr;
      ptr.symbol = need("pointer_symbol");
      ptr.target.offset = parse_uint(need("pointer_offset"), 10, file_name,
                                     here, "pointer_offset");
      std::string pc = need("pointer_pos");
      auto tpos = pc.size() == 1 ? pos_from_char(pc[0]) : std::nullopt;
      if (!tpos)
        fail_parse(file_name, here, "bad pointer pos '" + pc + "'");
      ptr.target.pos = *tpos;
      std::uint32_t st = parse_uint(need("source/target"), 16, file_name,
                                    here, "source/target");
      ptr.lexical = st != 0;
      if (ptr.target == syn.id)
        continue; // self-loops are dropped
      if (ptr.symbol == "!")
        syn.antonyms.insert(ptr.target);
      syn.pointers.push_back(std::move(ptr));
    }

    if (pos == Pos::Verb) {
      std::uint32_t f_cnt = parse_uint(need("f_cnt"), 10, file_name, here,
                                       "f_cnt");
      for (std::uint32_t f = 0; f < f_cnt; ++f) {
        if (need("frame marker") != "+")
          fail_parse(file_name, here, "expected '+' before frame");
        need("f_num");
        need("w_num");
      }
    }

    std::string bar = need("gloss separator");
    if (bar != "|")
      fail_parse(file_name, here, "expected '|', got '" + bar + "'");
    syn.gloss = sc.remainder();

    out.push_back(std::move(syn));
  }
  return out;
}

std::vector<Synset> parse_wordnet(const std::filesystem::path &data_dir) {
  static const std::pair<const char *, Pos> kFiles[] = {
      {"data.noun", Pos::Noun},
      {"data.verb", Pos::Verb},
      {"data.adj", Pos::Adj},
      {"data.adv", Pos::Adv},
  };
  std::vector<Synset> all;
  for (const auto &[name, pos] : kFiles) {
    std::filesystem::path path = data_dir / name;
    std::ifstream in(path, std::ios::binary);
    if (!in)
      throw ParseError("cannot open WordNet data file: " + path.string());
    auto part = parse_data_file(in, pos, name);
    all.insert(all.end(), std::make_move_iterator(part.begin()),
               std::make_move_iterator(part.end()));
  }
  check_pointer_integrity(all);
  return all;
}

void check_pointer_integrity(const std::vector<Synset> &synsets) {
  std::unordered_map<SynsetId, bool, SynsetIdHash> known;
  known.reserve(synsets.size() * 2);
  for (const auto &s : synsets)
    known.emplace(s.id, true);
  for (const auto &s : synsets) {
    for (const auto &p : s.pointers)
      if (!known.count(p.target))
        throw IntegrityError("dangling pointer " + p.symbol + " from " +
                             to_string(s.id) + " to " + to_string(p.target));
    for (const auto &a : s.antonyms)
      if (!known.count(a))
        throw IntegrityError("dangling antonym from " + to_string(s.id) +
                             " to " + to_string(a));
  }
}

namespace {

struct Fnv1a {
  std::uint64_t h = 1469598103934665603ULL;
  void bytes(const void *p, std::size_t n) {
    const auto *b = static_cast<const unsigned char *>(p);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= b[i];
      h *= 1099511628211ULL;
    }
  }
  void str(const std::string &s) {
    bytes(s.data(), s.size());
    unsigned char z = 0;
    bytes(&z, 1);
  }
  void u32(std::uint32_t v) { bytes(&v, 4); }
  void u8(std::uint8_t v) { bytes(&v, 1); }
};

std::uint64_t content_fingerprint(const std::vector<Synset> &synsets) {
  Fnv1a f;
  f.u32(static_cast<std::uint32_t>(synsets.size()));
  for (const auto &s : synsets) {
    f.u8(static_cast<std::uint8_t>(s.id.pos));
    f.u32(s.id.offset);
    f.u32(static_cast<std::uint32_t>(s.lemmas.size()));
    for (const auto &l : s.lemmas)
      f.str(l);
    f.u32(static_cast<std::uint32_t>(s.pointers.size()));
    for (const auto &p : s.pointers) {
      f.str(p.symbol);
      f.u8(static_cast<std::uint8_t>(p.target.pos));
      f.u32(p.target.offset);
      f.u8(p.lexical ? 1 : 0);
    }
    f.u32(static_cast<std::uint32_t>(s.antonyms.size()));
    for (const auto &a : s.antonyms) {
      f.u8(static_cast<std::uint8_t>(a.pos));
      f.u32(a.offset);
    }
  }
  return f.h;
}

} // namespace

Database::Database(std::vector<Synset> synsets) : synsets_(std::move(synsets)) {
  std::sort(synsets_.begin(), synsets_.end(),
            [](const Synset &a, const Synset &b) { return a.id < b.id; });
  index_.reserve(synsets_.size() * 2);
  for (std::uint32_t i = 0; i < synsets_.size(); ++i) {
    if (!index_.emplace(synsets_[i].id, i).second)
      throw IntegrityError("duplicate synset id " + to_string(synsets_[i].id));
    for (const auto &l : synsets_[i].lemmas)
      lemma_index_[l].push_back(i);
  }
  fingerprint_ = content_fingerprint(synsets_);
}

std::optional<std::uint32_t> Database::index_of(const SynsetId &id) const {
  auto it = index_.find(id);
  if (it == index_.end())
    return std::nullopt;
  return it->second;
}

std::uint32_t Database::require_index(const SynsetId &id) const {
  auto i = index_of(id);
  if (!i)
    throw IntegrityError("unknown synset id " + to_string(id));
  return *i;
}

const std::vector<std::string> &Database::lemmas_of(const SynsetId &id) const {
  auto i = index_of(id);
  if (!i)
    throw UncomputableError("unknown synset id " + to_string(id));
  return synsets_[*i].lemmas;
}

bool Database::antonym_linked(const SynsetId &a, const SynsetId &b) const {
  auto ia = index_of(a), ib = index_of(b);
  if (!ia || !ib)
    throw UncomputableError("unknown synset id " +
                            to_string(ia ? b : a));
  if (a == b)
    return false;
  return synsets_[*ia].antonyms.count(b) > 0 ||
         synsets_[*ib].antonyms.count(a) > 0;
}

std::vector<std::uint32_t>
Database::synsets_with_lemma(const std::string &lemma) const {
  auto it = lemma_index_.find(lemma);
  if (it == lemma_index_.end())
    return {};
  return it->second;
}

std::size_t Database::total_senses() const {
  std::size_t n = 0;
  for (const auto &s : synsets_)
    n += s.lemmas.size();
  return n;
}

SemanticGraph::SemanticGraph(std::uint32_t node_count,
                             std::vector<std::uint64_t> offsets,
                             std::vector<std::uint32_t> neighbors)
    : node_count_(node_count), offsets_(std::move(offsets)),
      neighbors_(std::move(neighbors)) {
  if (offsets_.size() != node_count_ + 1)
    throw IntegrityError("graph offsets array has wrong size");
}

bool SemanticGraph::has_edge(std::uint32_t i, std::uint32_t j) const {
  return std::binary_search(neighbors_begin(i), neighbors_end(i), j);
}

std::uint32_t SemanticGraph::isolated_count() const {
  std::uint32_t n = 0;
  for (std::uint32_t i = 0; i < node_count_; ++i)
    if (degree(i) == 0)
      ++n;
  return n;
}

std::uint32_t SemanticGraph::largest_component_size() const {
  std::vector<std::uint32_t> comp(node_count_, UINT32_MAX);
  std::vector<std::uint32_t> stack;
  std::uint32_t best = 0;
  for (std::uint32_t s = 0; s < node_count_; ++s) {
    if (comp[s] != UINT32_MAX)
      continue;
    std::uint32_t size = 0;
    comp[s] = s;
    stack.push_back(s);
    while (!stack.empty()) {
      std::uint32_t v = stack.back();
      stack.pop_back();
      ++size;
      for (const auto *it = neighbors_begin(v); it != neighbors_end(v); ++it)
        if (comp[*it] == UINT32_MAX) {
          comp[*it] = s;
          stack.push_back(*it);
        }
    }
    best = std::max(best, size);
  }
  return best;
}

SemanticGraph build_graph(const Database &db, const RelationFilter &filter) {
  const auto m = static_cast<std::uint32_t>(db.size());
  std::vector<std::uint64_t> pairs;
  for (std::uint32_t i = 0; i < m; ++i) {
    for (const auto &p : db.synset(i).pointers) {
      if (!filter.keeps(p.symbol))
        continue;
      std::uint32_t j = db.require_index(p.target);
      if (i == j)
        continue;
      pairs.push_back((static_cast<std::uint64_t>(i) << 32) | j);
      pairs.push_back((static_cast<std::uint64_t>(j) << 32) | i);
    }
  }
  std::sort(pairs.begin(), pairs.end());
  pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());

  std::vector<std::uint64_t> offsets(m + 1, 0);
  for (auto pr : pairs)
    ++offsets[(pr >> 32) + 1];
  for (std::uint32_t i = 0; i < m; ++i)
    offsets[i + 1] += offsets[i];
  std::vector<std::uint32_t> neighbors(pairs.size());
  for (std::size_t k = 0; k < pairs.size(); ++k)
    neighbors[k] = static_cast<std::uint32_t>(pairs[k] & 0xffffffffu);
  return SemanticGraph(m, std::move(offsets), std::move(neighbors));
}

// ---------------------------------------------------------------------------
// Graph file: magic, fingerprint, synsets (with pointers and glosses so the
// database round-trips), then CSR adjacency.

namespace {

constexpr char kGraphMagic[8] = {'D', 'C', 'G', 'R', '0', '0', '0', '2'};

template <typename T> void put(std::ostream &os, T v) {
  os.write(reinterpret_cast<const char *>(&v), sizeof(T));
}
template <typename T> T get(std::istream &is, const std::string &path) {
  T v{};
  is.read(reinterpret_cast<char *>(&v), sizeof(T));
  if (!is)
    throw ParseError(path + ": truncated graph file");
  return v;
}
void put_str(std::ostream &os, const std::string &s) {
  put<std::uint32_t>(os, static_cast<std::uint32_t>(s.size()));
  os.write(s.data(), static_cast<std::streamsize>(s.size()));
}
std::string get_str(std::istream &is, const std::string &path) {
  auto n = get<std::uint32_t>(is, path);
  std::string s(n, '\0');
  is.read(s.data(), n);
  if (!is)
    throw ParseError(path + ": truncated graph file");
  return s;
}

} // namespace

void save_graph(const std::filesystem::path &path, const Database &db,
                const SemanticGraph &graph) {
  std::ofstream os(path, std::ios::binary);
  if (!os)
    throw ParseError("cannot write graph file: " + path.string());
  os.write(kGraphMagic, sizeof(kGraphMagic));
  put<std::uint64_t>(os, db.fingerprint());
  put<std::uint32_t>(os, static_cast<std::uint32_t>(db.size()));
  for (const auto &s : db.synsets()) {
    put<std::uint8_t>(os, static_cast<std::uint8_t>(s.id.pos));
    put<std::uint32_t>(os, s.id.offset);
    put<std::uint32_t>(os, static_cast<std::uint32_t>(s.lemmas.size()));
    for (const auto &l : s.lemmas)
      put_str(os, l);
    put<std::uint32_t>(os, static_cast<std::uint32_t>(s.pointers.size()));
    for (const auto &p : s.pointers) {
      put_str(os, p.symbol);
      put<std::uint8_t>(os, static_cast<std::uint8_t>(p.target.pos));
      put<std::uint32_t>(os, p.target.offset);
      put<std::uint8_t>(os, p.lexical ? 1 : 0);
    }
    put<std::uint32_t>(os, static_cast<std::uint32_t>(s.antonyms.size()));
    for (const auto &a : s.antonyms) {
      put<std::uint8_t>(os, static_cast<std::uint8_t>(a.pos));
      put<std::uint32_t>(os, a.offset);
    }
    put_str(os, s.gloss);
  }
  put<std::uint64_t>(os, graph.neighbors().size());
  for (auto off : graph.offsets())
    put<std::uint64_t>(os, off);
  os.write(reinterpret_cast<const char *>(graph.neighbors().data()),
           static_cast<std::streamsize>(graph.neighbors().size() * 4));
  if (!os)
    throw ParseError("write failed: " + path.string());
}

LoadedGraph load_graph(const std::filesystem::path &path) {
  std::ifstream is(path, std::ios::binary);
  if (!is)
    throw ParseError("cannot open graph file: " + path.string());
  const std::string p = path.string();
  char magic[8];
  is.read(magic, sizeof(magic));
  if (!is || std::memcmp(magic, kGraphMagic, sizeof(magic)) != 0)
    throw ParseError(p + ": not a graph file (bad magic)");
  auto stored_fp = get<std::uint64_t>(is, p);

  auto m = get<std::uint32_t>(is, p);
  std::vector<Synset> synsets;
  synsets.reserve(m);
  for (std::uint32_t i = 0; i < m; ++i) {
    Synset s;
    s.id.pos = static_cast<Pos>(get<std::uint8_t>(is, p));
    s.id.offset = get<std::uint32_t>(is, p);
    auto nl = get<std::uint32_t>(is, p);
    for (std::uint32_t k = 0; k < nl; ++k)
      s.lemmas.push_back(get_str(is, p));
    auto np = get<std::uint32_t>(is, p);
    for (std::uint32_t k = 0; k < np; ++k) {
      Pointer ptr;
      ptr.symbol = get_str(is, p);
      ptr.target.pos = static_cast<Pos>(get<std::uint8_t>(is, p));
      ptr.target.offset = get<std::uint32_t>(is, p);
      ptr.lexical = get<std::uint8_t>(is, p) != 0;
      s.pointers.push_back(std::move(ptr));
    }
    auto na = get<std::uint32_t>(is, p);
    for (std::uint32_t k = 0; k < na; ++k) {
      SynsetId a;
      a.pos = static_cast<Pos>(get<std::uint8_t>(is, p));
      a.offset = get<std::uint32_t>(is, p);
      s.antonyms.insert(a);
    }
    s.gloss = get_str(is, p);
    synsets.push_back(std::move(s));
  }

  auto total = get<std::uint64_t>(is, p);
  std::vector<std::uint64_t> offsets(m + 1);
  for (auto &off : offsets)
    off = get<std::uint64_t>(is, p);
  std::vector<std::uint32_t> neighbors(total);
  is.read(reinterpret_cast<char *>(neighbors.data()),
          static_cast<std::streamsize>(total * 4));
  if (!is)
    throw ParseError(p + ": truncated graph file");

  Database db(std::move(synsets));
  if (db.fingerprint() != stored_fp)
    throw IntegrityError(p + ": stored fingerprint does not match content");
  return LoadedGraph{std::move(db),
                     SemanticGraph(m, std::move(offsets),
                                   std::move(neighbors))};
}

} // namespace deconf
