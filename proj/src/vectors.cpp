#include "deconf/vectors.hpp"
#include "deconf/errors.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

namespace deconf {

void VectorStore::add(const std::string &word, std::span<const float> values) {
  if (values.size() != dim_)
    throw IntegrityError("vector for '" + word + "' has length " +
                         std::to_string(values.size()) + ", expected " +
                         std::to_string(dim_));
  if (!index_.emplace(word, static_cast<std::uint32_t>(words_.size())).second)
    throw ParseError("duplicate vocabulary entry '" + word + "'");
  words_.push_back(word);
  data_.insert(data_.end(), values.begin(), values.end());
  double s = 0.0;
  for (float v : values)
    s += static_cast<double>(v) * v;
  norms_.push_back(std::sqrt(s));
}

std::optional<std::uint32_t> VectorStore::find(const std::string &word) const {
  auto it = index_.find(word);
  if (it == index_.end())
    return std::nullopt;
  return it->second;
}

namespace {

[[noreturn]] void fail_at(const std::filesystem::path &path,
                          std::uint64_t byte, const std::string &what) {
  throw ParseError(path.string() + ": byte " + std::to_string(byte) + ": " +
                   what);
}

constexpr std::size_t kMaxWordLen = 4096;

VectorStore load_binary(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw ParseError("cannot open vector file: " + path.string());
  std::uint64_t pos = 0;
  auto get_byte = [&]() -> int {
    int c = in.get();
    if (c != EOF)
      ++pos;
    return c;
  };

  // header: "<count> <dim>\n" in ASCII
  std::string header;
  for (int c = get_byte(); c != '\n'; c = get_byte()) {
    if (c == EOF)
      fail_at(path, pos, "unterminated header");
    header.push_back(static_cast<char>(c));
    if (header.size() > 64)
      fail_at(path, pos, "header too long, not a word2vec binary file");
  }
  std::uint64_t count = 0;
  std::uint32_t dim = 0;
  {
    std::istringstream hs(header);
    if (!(hs >> count >> dim) || count == 0 || dim == 0)
      fail_at(path, 0, "bad header '" + header + "'");
    std::string extra;
    if (hs >> extra)
      fail_at(path, 0, "bad header '" + header + "'");
  }

  VectorStore store(dim);
  std::vector<float> row(dim);
  for (std::uint64_t e = 0; e < count; ++e) {
    int c = get_byte();
    while (c == '\n' || c == ' ' || c == '\r' || c == '\t')
      c = get_byte();
    if (c == EOF)
      fail_at(path, pos, "expected entry " + std::to_string(e) + " of " +
                             std::to_string(count) + ", found end of file");
    std::string word;
    while (c != ' ') {
      if (c == EOF)
        fail_at(path, pos, "unterminated word");
      word.push_back(static_cast<char>(c));
      if (word.size() > kMaxWordLen)
        fail_at(path, pos, "word longer than " + std::to_string(kMaxWordLen) +
                               " bytes, file is likely corrupt");
      c = get_byte();
    }
    in.read(reinterpret_cast<char *>(row.data()),
            static_cast<std::streamsize>(dim * sizeof(float)));
    if (in.gcount() != static_cast<std::streamsize>(dim * sizeof(float)))
      fail_at(path, pos + static_cast<std::uint64_t>(in.gcount()),
              "truncated vector payload for '" + word + "'");
    pos += dim * sizeof(float);
    for (float v : row)
      if (!std::isfinite(v))
        fail_at(path, pos, "non-finite value in vector for '" + word + "'");
    store.add(word, row);
  }
  return store;
}

VectorStore load_text(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw ParseError("cannot open vector file: " + path.string());
  std::string line;
  if (!std::getline(in, line))
    throw ParseError(path.string() + ": empty file");
  std::uint64_t count = 0;
  std::uint32_t dim = 0;
  {
    std::istringstream hs(line);
    if (!(hs >> count >> dim) || count == 0 || dim == 0)
      throw ParseError(path.string() + ": bad header '" + line + "'");
  }
  VectorStore store(dim);
  std::vector<float> row(dim);
  std::uint64_t loaded = 0;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r")
      continue;
    std::istringstream ls(line);
    std::string word;
    ls >> word;
    for (std::uint32_t d = 0; d < dim; ++d) {
      if (!(ls >> row[d]))
        throw ParseError(path.string() + ":" + std::to_string(lineno) +
                         ": expected " + std::to_string(dim) +
                         " values for '" + word + "'");
      if (!std::isfinite(row[d]))
        throw ParseError(path.string() + ":" + std::to_string(lineno) +
                         ": non-finite value for '" + word + "'");
    }
    std::string extra;
    if (ls >> extra)
      throw ParseError(path.string() + ":" + std::to_string(lineno) +
                       ": trailing data '" + extra + "'");
    store.add(word, row);
    ++loaded;
  }
  if (loaded != count)
    throw ParseError(path.string() + ": header promises " +
                     std::to_string(count) + " entries, file has " +
                     std::to_string(loaded));
  return store;
}

} // namespace

VectorStore load_word2vec(const std::filesystem::path &path,
                          VecFormat format) {
  return format == VecFormat::Binary ? load_binary(path) : load_text(path);
}

void save_word2vec(const std::filesystem::path &path, const VectorStore &store,
                   VecFormat format) {
  std::ofstream os(path, std::ios::binary);
  if (!os)
    throw ParseError("cannot write vector file: " + path.string());
  os << store.size() << ' ' << store.dim() << '\n';
  char buf[32];
  for (std::uint32_t r = 0; r < store.size(); ++r) {
    auto v = store.vec(r);
    if (format == VecFormat::Binary) {
      os << store.word(r) << ' ';
      os.write(reinterpret_cast<const char *>(v.data()),
               static_cast<std::streamsize>(v.size() * sizeof(float)));
      os << '\n';
    } else {
      os << store.word(r);
      for (float x : v) {
        std::snprintf(buf, sizeof(buf), " %.6g", static_cast<double>(x));
        os << buf;
      }
      os << '\n';
    }
  }
  if (!os)
    throw ParseError("write failed: " + path.string());
}

std::optional<std::uint32_t> lookup(const VectorStore &store,
                                    const std::string &word,
                                    const LookupPolicy &policy) {
  std::string key = word;
  std::replace(key.begin(), key.end(), ' ', policy.multiword_joiner);
  if (auto row = store.find(key))
    return row;
  if (policy.case_fallback) {
    std::string lower = key;
    std::transform(lower.begin(), lower.end(), lower.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    if (lower != key)
      if (auto row = store.find(lower))
        return row;
  }
  return std::nullopt;
}

double cosine(std::span<const float> a, std::span<const float> b) {
  if (a.size() != b.size())
    throw std::invalid_argument("cosine: dimension mismatch");
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += static_cast<double>(a[i]) * b[i];
    na += static_cast<double>(a[i]) * a[i];
    nb += static_cast<double>(b[i]) * b[i];
  }
  if (na == 0.0 || nb == 0.0)
    throw UncomputableError("cosine undefined for zero vector");
  return dot / std::sqrt(na * nb);
}

double cosine(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size())
    throw std::invalid_argument("cosine: dimension mismatch");
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0)
    throw UncomputableError("cosine undefined for zero vector");
  return dot / std::sqrt(na * nb);
}

std::vector<Neighbor> nearest(const VectorStore &store,
                              std::span<const double> query,
                              std::size_t top_n,
                              const std::set<std::string> &exclude) {
  if (query.size() != store.dim())
    throw std::invalid_argument("nearest: query dimension mismatch");
  double qn = 0.0;
  for (double v : query)
    qn += v * v;
  if (qn == 0.0)
    throw UncomputableError("cosine undefined for zero query vector");
  qn = std::sqrt(qn);

  const auto ahead = [](const Neighbor &a, const Neighbor &b) {
    if (a.cosine != b.cosine)
      return a.cosine > b.cosine;
    return a.key < b.key;
  };
  std::vector<Neighbor> best; // kept sorted, size <= top_n
  for (std::uint32_t r = 0; r < store.size(); ++r) {
    if (store.norm(r) == 0.0)
      continue;
    if (exclude.count(store.word(r)))
      continue;
    auto v = store.vec(r);
    double dot = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i)
      dot += query[i] * v[i];
    Neighbor cand{store.word(r), dot / (qn * store.norm(r))};
    if (best.size() < top_n) {
      best.insert(std::upper_bound(best.begin(), best.end(), cand, ahead),
                  std::move(cand));
    } else if (!best.empty() && ahead(cand, best.back())) {
      best.insert(std::upper_bound(best.begin(), best.end(), cand, ahead),
                  std::move(cand));
      best.pop_back();
    }
  }
  return best;
}

} // namespace deconf
