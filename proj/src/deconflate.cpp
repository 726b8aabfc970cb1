#include "deconf/deconflate.hpp"
#include "deconf/errors.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <stdexcept>
#include <thread>

namespace deconf {

void DeconfConfig::validate() const {
  if (!(alpha >= 0.0))
    throw std::invalid_argument("alpha must be non-negative");
  if (!(lambda > 0.0))
    throw std::invalid_argument("lambda must be positive");
  if (k < 1)
    throw std::invalid_argument("k must be positive");
}

double decay_weight(std::uint32_t rank, std::size_t list_len, double lambda) {
  if (list_len == 0 || rank >= list_len)
    throw std::invalid_argument("decay_weight: rank out of range");
  return std::exp(-lambda * static_cast<double>(rank)) /
         static_cast<double>(list_len);
}

std::vector<double>
deconflate_sense(const std::optional<std::vector<double>> &lemma_vec,
                 const BiasList &bias, const VectorStore &store,
                 const LookupPolicy &policy, const DeconfConfig &config,
                 const std::string &exclude_word) {
  config.validate();
  const std::uint32_t dim = store.dim();
  if (lemma_vec && lemma_vec->size() != dim)
    throw std::invalid_argument("lemma vector dimension mismatch");

  std::vector<double> num(dim, 0.0);
  double den = 0.0;
  if (lemma_vec) {
    for (std::uint32_t d = 0; d < dim; ++d)
      num[d] = config.alpha * (*lemma_vec)[d];
    den = config.alpha;
  }

  const std::size_t len = bias.entries.size();
  for (const auto &e : bias.entries) {
    if (!exclude_word.empty() && e.word == exclude_word)
      continue;
    auto row = lookup(store, e.word, policy);
    if (!row)
      continue; // OOV biasing word: its delta term vanishes from both sums
    double w = decay_weight(e.rank, len, config.lambda);
    auto v = store.vec(*row);
    for (std::uint32_t d = 0; d < dim; ++d)
      num[d] += w * v[d];
    den += w;
  }

  if (den == 0.0)
    throw UncomputableError(
        "sense has no lemma vector and no in-vocabulary biasing words");
  for (auto &x : num)
    x /= den;
  return num;
}

double objective_value(
    std::span<const double> candidate,
    const std::optional<std::vector<double>> &lemma_vec,
    const std::vector<std::pair<std::vector<double>, double>> &weighted_bias,
    double alpha) {
  auto sq_dist = [&](std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size())
      throw std::invalid_argument("objective_value: dimension mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
      double d = a[i] - b[i];
      s += d * d;
    }
    return s;
  };
  double obj = 0.0;
  if (lemma_vec)
    obj += alpha * sq_dist(candidate, *lemma_vec);
  for (const auto &[vec, w] : weighted_bias)
    obj += w * sq_dist(candidate, vec);
  return obj;
}

std::vector<double>
synset_vector(const std::vector<std::vector<double>> &sense_vectors) {
  if (sense_vectors.empty())
    throw std::invalid_argument("synset_vector: no sense vectors");
  const std::size_t dim = sense_vectors.front().size();
  std::vector<double> sum(dim, 0.0);
  for (const auto &v : sense_vectors) {
    if (v.size() != dim)
      throw std::invalid_argument("synset_vector: dimension mismatch");
    double n = 0.0;
    for (double x : v)
      n += x * x;
    n = std::sqrt(n);
    if (n == 0.0)
      throw UncomputableError("synset_vector: zero-norm sense vector");
    for (std::size_t d = 0; d < dim; ++d)
      sum[d] += v[d] / n;
  }
  double n = 0.0;
  for (double x : sum)
    n += x * x;
  n = std::sqrt(n);
  if (n == 0.0)
    throw UncomputableError("synset_vector: senses cancel to a zero centroid");
  for (auto &x : sum)
    x /= n;
  return sum;
}

std::string sense_key(const std::string &lemma, const SynsetId &id) {
  char tail[16];
  std::snprintf(tail, sizeof(tail), "#%c#%08u", pos_char(id.pos), id.offset);
  return lemma + tail;
}

TrainResult train_all(const Database &db, const std::vector<BiasList> &lists,
                      const VectorStore &store, const LookupPolicy &policy,
                      const DeconfConfig &config, unsigned threads) {
  config.validate();
  if (threads == 0)
    threads = 1;
  const std::uint32_t m = static_cast<std::uint32_t>(db.size());

  // bias list per dense synset index; synsets without one (isolated nodes)
  // fall back to an empty list, i.e. the sense keeps its lemma vector
  std::vector<const BiasList *> by_index(m, nullptr);
  for (const auto &l : lists) {
    auto idx = db.index_of(l.target);
    if (!idx)
      throw IntegrityError("bias list for unknown synset " +
                           to_string(l.target));
    by_index[*idx] = &l;
  }

  struct SynsetOut {
    std::vector<std::pair<std::string, std::vector<double>>> senses;
    std::vector<std::vector<double>> sense_vecs;
    std::optional<std::vector<double>> centroid;
    std::vector<CoverageEntry> uncovered;
  };
  std::vector<SynsetOut> outs(m);

  std::atomic<std::uint32_t> next_job{0};
  auto worker = [&]() {
    while (true) {
      std::uint32_t i = next_job.fetch_add(1);
      if (i >= m)
        break;
      const Synset &syn = db.synset(i);
      BiasList local;
      const BiasList *bias = by_index[i];
      if (!bias) {
        local.target = syn.id;
        bias = &local;
      }
      SynsetOut &out = outs[i];
      for (const auto &lemma : syn.lemmas) {
        std::string key = sense_key(lemma, syn.id);
        std::optional<std::vector<double>> lemma_vec;
        if (auto row = lookup(store, lemma, policy)) {
          auto v = store.vec(*row);
          lemma_vec = std::vector<double>(v.begin(), v.end());
        }
        try {
          auto vec = deconflate_sense(lemma_vec, *bias, store, policy, config,
                                      lemma);
          out.sense_vecs.push_back(vec);
          out.senses.emplace_back(std::move(key), std::move(vec));
        } catch (const UncomputableError &e) {
          out.uncovered.push_back(CoverageEntry{std::move(key), e.what()});
        }
      }
      if (!out.sense_vecs.empty()) {
        try {
          out.centroid = synset_vector(out.sense_vecs);
        } catch (const UncomputableError &e) {
          out.uncovered.push_back(
              CoverageEntry{to_string(syn.id), e.what()});
        }
      } else {
        out.uncovered.push_back(CoverageEntry{
            to_string(syn.id), "no computable senses in synset"});
      }
    }
  };

  std::vector<std::thread> pool;
  unsigned n = static_cast<unsigned>(
      std::min<std::size_t>(threads, std::max<std::uint32_t>(m, 1)));
  for (unsigned t = 1; t < n; ++t)
    pool.emplace_back(worker);
  worker();
  for (auto &t : pool)
    t.join();

  TrainResult res;
  res.space.dim = store.dim();
  res.total_senses = db.total_senses();
  res.total_synsets = m;
  for (std::uint32_t i = 0; i < m; ++i) {
    auto &out = outs[i];
    for (auto &s : out.senses)
      res.space.senses.push_back(std::move(s));
    if (out.centroid)
      res.space.synsets.emplace_back(db.synset(i).id,
                                     std::move(*out.centroid));
    for (auto &u : out.uncovered)
      res.uncovered.push_back(std::move(u));
  }
  if (res.space.senses.empty())
    throw UncomputableError("no sense vector could be computed; is the "
                            "vector vocabulary disjoint from the lemmas?");
  return res;
}

namespace {

void write_rows(std::ofstream &os, const std::string &key,
                std::span<const double> vec) {
  char buf[32];
  os << key;
  for (double x : vec) {
    std::snprintf(buf, sizeof(buf), " %.6g", x);
    os << buf;
  }
  os << '\n';
}

} // namespace

void export_sense_space(const SenseSpace &space,
                        const std::filesystem::path &senses_path,
                        const std::filesystem::path &synsets_path) {
  {
    std::ofstream os(senses_path, std::ios::binary);
    if (!os)
      throw ParseError("cannot write " + senses_path.string());
    os << space.senses.size() << ' ' << space.dim << '\n';
    for (const auto &[key, vec] : space.senses)
      write_rows(os, key, vec);
    if (!os)
      throw ParseError("write failed: " + senses_path.string());
  }
  {
    std::ofstream os(synsets_path, std::ios::binary);
    if (!os)
      throw ParseError("cannot write " + synsets_path.string());
    os << space.synsets.size() << ' ' << space.dim << '\n';
    for (const auto &[id, vec] : space.synsets)
      write_rows(os, to_string(id), vec);
    if (!os)
      throw ParseError("write failed: " + synsets_path.string());
  }
}

void write_coverage_report(const std::filesystem::path &path,
                           const std::vector<CoverageEntry> &uncovered) {
  std::ofstream os(path, std::ios::binary);
  if (!os)
    throw ParseError("cannot write " + path.string());
  for (const auto &e : uncovered)
    os << e.key << '\t' << e.reason << '\n';
  if (!os)
    throw ParseError("write failed: " + path.string());
}

} // namespace deconf
