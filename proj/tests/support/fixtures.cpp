#include "fixtures.hpp"

#include <array>
#include <atomic>
#include <cstdio>
#include <fstream>
#include <random>
#include <stdexcept>

#include <unistd.h>

namespace fixtures {

using deconf::Pos;
using deconf::Pointer;
using deconf::Synset;
using deconf::SynsetId;

std::vector<Synset>
graph_synsets(std::uint32_t n,
              const std::vector<std::pair<std::uint32_t, std::uint32_t>>
                  &edges) {
  std::vector<Synset> out(n);
  for (std::uint32_t i = 0; i < n; ++i) {
    out[i].id = SynsetId{Pos::Noun, i};
    out[i].lemmas = {"w" + std::to_string(i)};
  }
  for (const auto &[a, b] : edges) {
    if (a >= n || b >= n || a == b)
      throw std::invalid_argument("bad fixture edge");
    out[a].pointers.push_back(Pointer{"@", SynsetId{Pos::Noun, b}, false});
  }
  return out;
}

std::vector<std::pair<std::uint32_t, std::uint32_t>> path3_edges() {
  return {{0, 1}, {1, 2}};
}

std::vector<std::pair<std::uint32_t, std::uint32_t>> triangle_edges() {
  return {{0, 1}, {1, 2}, {0, 2}};
}

std::vector<std::pair<std::uint32_t, std::uint32_t>> star5_edges() {
  return {{0, 1}, {0, 2}, {0, 3}, {0, 4}};
}

std::vector<std::pair<std::uint32_t, std::uint32_t>> random10_edges() {
  std::mt19937 rng(202406u);
  std::vector<std::pair<std::uint32_t, std::uint32_t>> edges;
  for (std::uint32_t i = 0; i < 10; ++i)
    for (std::uint32_t j = i + 1; j < 10; ++j)
      if (rng() % 100 < 30)
        edges.emplace_back(i, j);
  std::vector<int> degree(10, 0);
  for (const auto &[a, b] : edges) {
    ++degree[a];
    ++degree[b];
  }
  for (std::uint32_t i = 0; i < 10; ++i)
    if (degree[i] == 0)
      edges.emplace_back(i, (i + 1) % 10);
  return edges;
}

std::vector<NamedGraph> oracle_graphs() {
  return {
      {"path-3", 3, path3_edges()},
      {"triangle", 3, triangle_edges()},
      {"star-5", 5, star5_edges()},
      {"random-10", 10, random10_edges()},
  };
}

// --------------------------------------------------------------- mini WordNet

namespace {

struct FxPointer {
  const char *symbol;
  int target;          // index into the fixture table
  const char *st;      // source/target hex field
};

struct FxSynset {
  char pos;            // n v a s r; 's' is written into data.adj
  const char *lexf;
  std::vector<const char *> words; // raw tokens, markers included
  std::vector<FxPointer> pointers;
  std::vector<std::pair<int, int>> frames; // verb (f_num, w_num) pairs
  const char *gloss;
};

std::vector<FxSynset> fixture_table() {
  return {
      /*0*/ {'n', "03", {"entity"},
             {{"~", 1, "0000"}, {"~", 2, "0000"}, {"~", 3, "0000"},
              {"~", 5, "0000"}},
             {}, "that which is perceived or known or inferred"},
      /*1*/ {'n', "28", {"sunrise", "sunup", "dawning"},
             {{"@", 0, "0000"}, {"!", 2, "0101"}},
             {}, "the daily appearance of the sun on the eastern horizon"},
      /*2*/ {'n', "28", {"sunset", "sundown"},
             {{"@", 0, "0000"}, {"!", 1, "0101"}},
             {}, "the daily disappearance of the sun below the western horizon"},
      /*3*/ {'n', "08", {"extremity", "appendage", "member"},
             {{"@", 0, "0000"}, {"~", 4, "0000"}},
             {}, "an external body part that projects from the body"},
      /*4*/ {'n', "08", {"digit", "dactyl"},
             {{"@", 3, "0000"}},
             {}, "a finger or toe in human beings or corresponding body part"},
      /*5*/ {'n', "23", {"number"},
             {{"@", 0, "0000"}, {"~", 6, "0000"}},
             {}, "a concept of quantity involving zero and units"},
      /*6*/ {'n', "23", {"digit", "figure"},
             {{"@", 5, "0000"}, {"~", 7, "0000"}},
             {}, "one of the elements that collectively form a system of numeration"},
      /*7*/ {'n', "23", {"cardinal_number", "cardinal"},
             {{"@", 6, "0000"}},
             {}, "the number of elements in a mathematical set"},
      /*8*/ {'n', "18", {"hermit", "recluse"},
             {},
             {}, "one who lives in solitude"},
      /*9*/ {'v', "38", {"rise", "go_up"},
             {{"@", 10, "0000"}, {"+", 1, "0101"}},
             {{1, 0}, {2, 0}}, "move upward"},
      /*10*/ {'v', "38", {"move", "displace"},
              {{"~", 9, "0000"}},
              {{8, 0}}, "cause to move or shift into a new position"},
      /*11*/ {'a', "00", {"bright"},
              {{"&", 12, "0000"}},
              {}, "emitting or reflecting light readily or in large amounts"},
      /*12*/ {'s', "00", {"brilliant(ip)", "vivid"},
              {{"&", 11, "0000"}},
              {}, "having striking color"},
      /*13*/ {'r', "02", {"brightly"},
              {{"\\", 11, "0101"}},
              {}, "with brightness"},
  };
}

int file_of(char pos) {
  switch (pos) {
  case 'n': return 0;
  case 'v': return 1;
  case 'a':
  case 's': return 2;
  default: return 3;
  }
}

char pointer_pos_char(char pos) { return pos == 's' ? 'a' : pos; }

std::string render_line(const FxSynset &fx, std::uint32_t self_offset,
                        const std::vector<FxSynset> &table,
                        const std::vector<std::uint32_t> &offsets) {
  char buf[64];
  std::string line;
  std::snprintf(buf, sizeof(buf), "%08u %s %c %02zx", self_offset, fx.lexf,
                fx.pos, fx.words.size());
  line += buf;
  for (std::size_t w = 0; w < fx.words.size(); ++w) {
    std::snprintf(buf, sizeof(buf), " %s %zx", fx.words[w], w);
    line += buf;
  }
  std::snprintf(buf, sizeof(buf), " %03zu", fx.pointers.size());
  line += buf;
  for (const auto &p : fx.pointers) {
    std::snprintf(buf, sizeof(buf), " %s %08u %c %s", p.symbol,
                  offsets[p.target], pointer_pos_char(table[p.target].pos),
                  p.st);
    line += buf;
  }
  if (fx.pos == 'v') {
    std::snprintf(buf, sizeof(buf), " %02zu", fx.frames.size());
    line += buf;
    for (const auto &[f_num, w_num] : fx.frames) {
      std::snprintf(buf, sizeof(buf), " + %02d %02d", f_num, w_num);
      line += buf;
    }
  }
  line += " | ";
  line += fx.gloss;
  return line;
}

} // namespace

void write_mini_wordnet(const std::filesystem::path &dir) {
  const auto table = fixture_table();
  static const char *kFiles[4] = {"data.noun", "data.verb", "data.adj",
                                  "data.adv"};
  const std::string header =
      "  1 This file is a synthetic lexicon used by the test suite.\n"
      "  2 Lines beginning with two spaces mimic the license block of\n"
      "  3 the real distribution and must be skipped by parsers.\n";

  // Line lengths do not depend on offset values (offsets always render as
  // 8 digits), so a first pass with zeros pins down every byte position.
  std::vector<std::uint32_t> offsets(table.size(), 0);
  const std::vector<std::uint32_t> zeros(table.size(), 0);
  for (int f = 0; f < 4; ++f) {
    std::uint64_t at = header.size();
    for (std::size_t i = 0; i < table.size(); ++i) {
      if (file_of(table[i].pos) != f)
        continue;
      offsets[i] = static_cast<std::uint32_t>(at);
      at += render_line(table[i], 0, table, zeros).size() + 1;
    }
  }

  std::filesystem::create_directories(dir);
  for (int f = 0; f < 4; ++f) {
    std::ofstream os(dir / kFiles[f], std::ios::binary);
    if (!os)
      throw std::runtime_error("cannot write fixture file");
    os << header;
    for (std::size_t i = 0; i < table.size(); ++i)
      if (file_of(table[i].pos) == f)
        os << render_line(table[i], offsets[i], table, offsets) << '\n';
  }
}

// -------------------------------------------------------------- mini vectors

deconf::VectorStore mini_vectors() {
  static const std::pair<const char *, std::array<float, 3>> kRows[] = {
      {"entity", {0.1f, 0.2f, 0.3f}},
      {"sunrise", {0.9f, 0.1f, 0.0f}},
      {"sunup", {0.8f, 0.2f, 0.1f}},
      {"dawning", {0.7f, 0.3f, 0.0f}},
      {"sunset", {-0.9f, 0.1f, 0.0f}},
      {"sundown", {-0.8f, 0.2f, 0.1f}},
      {"extremity", {0.0f, 0.9f, 0.2f}},
      {"appendage", {0.1f, 0.8f, 0.3f}},
      {"member", {0.2f, 0.7f, 0.1f}},
      {"digit", {0.3f, 0.5f, 0.5f}},
      {"dactyl", {0.1f, 0.7f, 0.4f}},
      {"number", {0.2f, 0.1f, 0.9f}},
      {"figure", {0.3f, 0.2f, 0.8f}},
      {"cardinal_number", {0.1f, 0.2f, 0.9f}},
      {"cardinal", {0.2f, 0.3f, 0.7f}},
      {"rise", {0.6f, 0.4f, 0.2f}},
      {"go_up", {0.5f, 0.5f, 0.3f}},
      {"move", {0.4f, 0.4f, 0.4f}},
      {"displace", {0.3f, 0.4f, 0.5f}},
      {"bright", {0.7f, 0.0f, 0.6f}},
      {"brilliant", {0.6f, 0.1f, 0.7f}},
      {"vivid", {0.5f, 0.2f, 0.8f}},
      {"brightly", {0.8f, 0.1f, 0.5f}},
  };
  deconf::VectorStore store(3);
  for (const auto &[word, values] : kRows)
    store.add(word, values);
  return store;
}

void write_mini_vectors(const std::filesystem::path &path) {
  deconf::save_word2vec(path, mini_vectors(), deconf::VecFormat::Text);
}

// ------------------------------------------------------------------- TempDir

TempDir::TempDir() {
  static std::atomic<unsigned> counter{0};
  path_ = std::filesystem::temp_directory_path() /
          ("deconf-test-" + std::to_string(::getpid()) + "-" +
           std::to_string(counter.fetch_add(1)));
  std::filesystem::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ec;
  std::filesystem::remove_all(path_, ec);
}

} // namespace fixtures
