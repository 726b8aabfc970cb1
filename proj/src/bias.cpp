#include "deconf/bias.hpp"
#include "deconf/errors.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <numeric>
#include <thread>
#include <unordered_set>

namespace deconf {

BiasList extract_bias_list(const Database &db, const PprVector &ppr,
                           std::uint32_t k) {
  if (k < 1)
    throw std::invalid_argument("k must be positive");
  if (ppr.scores.empty())
    throw UncomputableError("empty PPR vector");
  if (ppr.scores.size() != db.size())
    throw IntegrityError("PPR vector length does not match database");

  const std::uint32_t m = static_cast<std::uint32_t>(db.size());
  const std::uint32_t t = ppr.target;
  const Synset &target = db.synset(t);

  BiasList out;
  out.target = target.id;
  std::unordered_set<std::string> seen;

  // Returns false once the list is full.
  auto append = [&](const std::string &word, const SynsetId &origin) {
    if (!seen.insert(word).second)
      return true; // duplicate, skip
    out.entries.push_back(
        BiasEntry{word, static_cast<std::uint32_t>(out.entries.size()),
                  origin});
    return out.entries.size() < k;
  };

  // Ranking of the remaining synsets by descending score. Only a window of
  // the top candidates is materialized; the window grows in the rare case
  // de-duplication eats too many words.
  const auto better = [&](std::uint32_t a, std::uint32_t b) {
    if (ppr.scores[a] != ppr.scores[b])
      return ppr.scores[a] > ppr.scores[b];
    return a < b;
  };
  std::vector<std::uint32_t> order;
  order.reserve(m > 0 ? m - 1 : 0);
  for (std::uint32_t i = 0; i < m; ++i)
    if (i != t)
      order.push_back(i);

  std::size_t window = std::max<std::size_t>(2 * k, 64);
  while (true) {
    window = std::min(window, order.size());
    bool whole = window == order.size();
    if (whole) {
      std::sort(order.begin(), order.end(), better);
    } else {
      std::nth_element(order.begin(), order.begin() + window, order.end(),
                       better);
      std::sort(order.begin(), order.begin() + window, better);
    }

    out.entries.clear();
    seen.clear();
    bool full = false;
    for (const auto &w : target.lemmas)
      if (!append(w, target.id)) {
        full = true;
        break;
      }
    for (std::size_t h = 0; h < window && !full; ++h) {
      const Synset &syn = db.synset(order[h]);
      for (const auto &w : syn.lemmas)
        if (!append(w, syn.id)) {
          full = true;
          break;
        }
    }
    if (full || whole)
      return out;
    window *= 4;
  }
}

BiasBatch materialize_all(const Database &db, const TransitionMatrix &matrix,
                          const PprConfig &config, std::uint32_t k,
                          unsigned threads) {
  config.validate();
  const std::uint32_t m = static_cast<std::uint32_t>(db.size());
  if (threads == 0)
    threads = 1;

  std::vector<std::uint32_t> targets;
  targets.reserve(m);
  for (std::uint32_t i = 0; i < m; ++i)
    if (!matrix.isolated(i))
      targets.push_back(i);

  BiasBatch batch;
  batch.lists.resize(targets.size());
  std::atomic<std::size_t> next_job{0};
  std::mutex mu;

  auto worker = [&]() {
    while (true) {
      std::size_t j = next_job.fetch_add(1);
      if (j >= targets.size())
        break;
      std::uint32_t t = targets[j];
      try {
        PprVector ppr = personalized_pagerank(matrix, t, config,
                                              to_string(db.synset(t).id));
        batch.lists[j] = extract_bias_list(db, ppr, k);
      } catch (const std::exception &e) {
        std::lock_guard<std::mutex> lock(mu);
        batch.failures.push_back(BatchFailure{j, t, e.what()});
      }
    }
  };

  std::vector<std::thread> pool;
  unsigned n = static_cast<unsigned>(
      std::min<std::size_t>(threads, std::max<std::size_t>(targets.size(), 1)));
  for (unsigned t = 1; t < n; ++t)
    pool.emplace_back(worker);
  worker();
  for (auto &t : pool)
    t.join();

  // drop slots of failed targets, keep dense order
  if (!batch.failures.empty()) {
    std::sort(batch.failures.begin(), batch.failures.end(),
              [](const BatchFailure &a, const BatchFailure &b) {
                return a.input_index < b.input_index;
              });
    std::vector<BiasList> kept;
    kept.reserve(batch.lists.size() - batch.failures.size());
    std::size_t f = 0;
    for (std::size_t j = 0; j < batch.lists.size(); ++j) {
      if (f < batch.failures.size() && batch.failures[f].input_index == j) {
        ++f;
        continue;
      }
      kept.push_back(std::move(batch.lists[j]));
    }
    batch.lists = std::move(kept);
  }
  return batch;
}

void write_bias_lists(const std::filesystem::path &path,
                      const std::vector<BiasList> &lists) {
  std::vector<const BiasList *> ordered;
  ordered.reserve(lists.size());
  for (const auto &l : lists)
    ordered.push_back(&l);
  std::sort(ordered.begin(), ordered.end(),
            [](const BiasList *a, const BiasList *b) {
              return a->target < b->target;
            });

  std::ofstream os(path, std::ios::binary);
  if (!os)
    throw ParseError("cannot write bias file: " + path.string());
  for (const auto *l : ordered) {
    char head[16];
    std::snprintf(head, sizeof(head), "%c %08u",
                  pos_char(l->target.pos), l->target.offset);
    os << head << '\t';
    for (std::size_t i = 0; i < l->entries.size(); ++i) {
      if (i)
        os << ',';
      os << l->entries[i].word << ':' << l->entries[i].rank;
    }
    os << '\n';
  }
  if (!os)
    throw ParseError("write failed: " + path.string());
}

std::vector<BiasList> read_bias_lists(const std::filesystem::path &path) {
  std::ifstream is(path, std::ios::binary);
  if (!is)
    throw ParseError("cannot open bias file: " + path.string());
  std::vector<BiasList> lists;
  std::string line;
  std::size_t lineno = 0;
  auto fail = [&](const std::string &what) {
    throw ParseError(path.string() + ":" + std::to_string(lineno) + ": " +
                     what);
  };
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r')
      line.pop_back();
    if (line.empty())
      continue;
    auto tab = line.find('\t');
    if (tab == std::string::npos)
      fail("missing tab separator");
    std::string head = line.substr(0, tab);
    if (head.size() < 3 || head[1] != ' ')
      fail("bad synset header '" + head + "'");
    auto pos = pos_from_char(head[0]);
    if (!pos)
      fail("bad pos '" + std::string(1, head[0]) + "'");
    BiasList l;
    l.target.pos = *pos;
    try {
      std::size_t used = 0;
      l.target.offset =
          static_cast<std::uint32_t>(std::stoul(head.substr(2), &used, 10));
      if (used != head.size() - 2)
        fail("bad offset in '" + head + "'");
    } catch (const std::exception &) {
      fail("bad offset in '" + head + "'");
    }

    std::string body = line.substr(tab + 1);
    std::size_t start = 0;
    while (start <= body.size() && !body.empty()) {
      auto comma = body.find(',', start);
      std::string item = body.substr(
          start, comma == std::string::npos ? std::string::npos
                                            : comma - start);
      auto colon = item.rfind(':');
      if (colon == std::string::npos || colon == 0)
        fail("bad entry '" + item + "'");
      BiasEntry e;
      e.word = item.substr(0, colon);
      try {
        std::size_t used = 0;
        e.rank = static_cast<std::uint32_t>(
            std::stoul(item.substr(colon + 1), &used, 10));
        if (used != item.size() - colon - 1)
          fail("bad rank in '" + item + "'");
      } catch (const std::exception &) {
        fail("bad rank in '" + item + "'");
      }
      if (e.rank != l.entries.size())
        fail("ranks not consecutive at '" + item + "'");
      e.origin = l.target;
      l.entries.push_back(std::move(e));
      if (comma == std::string::npos)
        break;
      start = comma + 1;
    }
    lists.push_back(std::move(l));
  }
  return lists;
}

} // namespace deconf
