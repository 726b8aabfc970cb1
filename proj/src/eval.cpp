#include "deconf/eval.hpp"
#include "deconf/deconflate.hpp"
#include "deconf/errors.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>
#include <unordered_set>

namespace deconf {

std::optional<Strategy> strategy_from_name(const std::string &name) {
  std::string n = name;
  std::transform(n.begin(), n.end(), n.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  if (n == "maxsim")
    return Strategy::MaxSim;
  if (n == "avgsim")
    return Strategy::AvgSim;
  if (n == "avgsimc")
    return Strategy::AvgSimC;
  if (n == "s2w")
    return Strategy::S2W;
  if (n == "s2a")
    return Strategy::S2A;
  return std::nullopt;
}

std::string strategy_name(Strategy s) {
  switch (s) {
  case Strategy::MaxSim: return "maxsim";
  case Strategy::AvgSim: return "avgsim";
  case Strategy::AvgSimC: return "avgsimc";
  case Strategy::S2W: return "s2w";
  case Strategy::S2A: return "s2a";
  }
  return "?";
}

std::optional<DatasetFormat> format_from_name(const std::string &name) {
  std::string n = name;
  std::transform(n.begin(), n.end(), n.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  n.erase(std::remove_if(n.begin(), n.end(),
                         [](char c) { return c == '-' || c == '_'; }),
          n.end());
  if (n == "pairs")
    return DatasetFormat::Pairs;
  if (n == "rg65")
    return DatasetFormat::RG65;
  if (n == "yp130")
    return DatasetFormat::YP130;
  if (n == "men3k" || n == "men")
    return DatasetFormat::MEN3K;
  if (n == "simlex999" || n == "simlex")
    return DatasetFormat::SimLex999;
  if (n == "scws")
    return DatasetFormat::SCWS;
  if (n == "clss")
    return DatasetFormat::CLSS;
  return std::nullopt;
}

namespace {

std::vector<std::string> split(const std::string &line, char delim) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    auto p = line.find(delim, start);
    if (p == std::string::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, p - start));
    start = p + 1;
  }
  return out;
}

std::vector<std::string> split_ws(const std::string &line) {
  std::vector<std::string> out;
  std::istringstream is(line);
  std::string tok;
  while (is >> tok)
    out.push_back(tok);
  return out;
}

// tab, then semicolon, then whitespace
std::vector<std::string> split_auto(const std::string &line) {
  if (line.find('\t') != std::string::npos) {
    auto f = split(line, '\t');
    f.erase(std::remove_if(f.begin(), f.end(),
                           [](const std::string &s) { return s.empty(); }),
            f.end());
    return f;
  }
  if (line.find(';') != std::string::npos)
    return split(line, ';');
  return split_ws(line);
}

double parse_score(const std::string &tok, const std::string &where) {
  try {
    std::size_t used = 0;
    double v = std::stod(tok, &used);
    if (used != tok.size() || !std::isfinite(v))
      throw std::invalid_argument(tok);
    return v;
  } catch (const std::exception &) {
    throw ParseError(where + ": bad score '" + tok + "'");
  }
}

std::string strip_men_pos(const std::string &w) {
  if (w.size() > 2 && w[w.size() - 2] == '-') {
    char c = w.back();
    if (c == 'n' || c == 'v' || c == 'j')
      return w.substr(0, w.size() - 2);
  }
  return w;
}

std::string trim(const std::string &s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b])))
    ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1])))
    --e;
  return s.substr(b, e - b);
}

// context string -> tokens, with the <b>...</b> target span removed and
// punctuation stripped from token edges
std::vector<std::string> context_tokens(std::string ctx) {
  while (true) {
    auto open = ctx.find("<b>");
    if (open == std::string::npos)
      break;
    auto close = ctx.find("</b>", open);
    if (close == std::string::npos) {
      ctx.erase(open, 3);
      break;
    }
    ctx.erase(open, close + 4 - open);
  }
  std::vector<std::string> out;
  for (auto &tok : split_ws(ctx)) {
    std::size_t b = 0, e = tok.size();
    auto is_word_char = [](unsigned char c) {
      return std::isalnum(c) || c == '_' || c == '-' || c == '\'';
    };
    while (b < e && !is_word_char(static_cast<unsigned char>(tok[b])))
      ++b;
    while (e > b && !is_word_char(static_cast<unsigned char>(tok[e - 1])))
      --e;
    if (e > b)
      out.push_back(tok.substr(b, e - b));
  }
  return out;
}

Dataset load_three_column(const std::filesystem::path &path,
                          DatasetFormat format) {
  std::ifstream is(path, std::ios::binary);
  if (!is)
    throw ParseError("cannot open dataset: " + path.string());
  Dataset ds;
  ds.format = format;
  std::string line;
  std::size_t lineno = 0;
  const bool simlex = format == DatasetFormat::SimLex999;
  const bool men = format == DatasetFormat::MEN3K;
  const bool clss = format == DatasetFormat::CLSS;
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r')
      line.pop_back();
    std::string t = trim(line);
    if (t.empty() || t[0] == '#')
      continue;
    if (lineno == 1 && simlex && t.rfind("word1", 0) == 0)
      continue; // SimLex header row
    auto fields = clss ? split(line, '\t') : split_auto(line);
    const std::string where = path.string() + ":" + std::to_string(lineno);
    SimilarityPair p;
    if (simlex) {
      if (fields.size() < 4)
        throw ParseError(where + ": expected word1 word2 POS score columns");
      p.left = fields[0];
      p.right = fields[1];
      p.gold = parse_score(fields[3], where);
    } else {
      if (fields.size() < 3)
        throw ParseError(where + ": expected 3 columns, got " +
                         std::to_string(fields.size()));
      p.left = trim(fields[0]);
      p.right = trim(fields[1]);
      p.gold = parse_score(trim(fields[2]), where);
    }
    if (men) {
      p.left = strip_men_pos(p.left);
      p.right = strip_men_pos(p.right);
    }
    if (p.left.empty() || p.right.empty())
      throw ParseError(where + ": empty word");
    ds.pairs.push_back(std::move(p));
  }
  ds.word_to_sense = clss;
  return ds;
}

Dataset load_scws(const std::filesystem::path &path) {
  std::ifstream is(path, std::ios::binary);
  if (!is)
    throw ParseError("cannot open dataset: " + path.string());
  Dataset ds;
  ds.format = DatasetFormat::SCWS;
  ds.has_contexts = true;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r')
      line.pop_back();
    if (trim(line).empty())
      continue;
    auto fields = split(line, '\t');
    const std::string where = path.string() + ":" + std::to_string(lineno);
    if (fields.size() < 8)
      throw ParseError(where + ": expected at least 8 tab-separated fields, "
                               "got " +
                       std::to_string(fields.size()));
    SimilarityPair p;
    p.left = trim(fields[1]);
    p.right = trim(fields[3]);
    p.left_context = context_tokens(fields[5]);
    p.right_context = context_tokens(fields[6]);
    p.gold = parse_score(trim(fields[7]), where);
    if (p.left.empty() || p.right.empty())
      throw ParseError(where + ": empty word");
    ds.pairs.push_back(std::move(p));
  }
  return ds;
}

} // namespace

Dataset load_dataset(const std::filesystem::path &path, DatasetFormat format) {
  Dataset ds = format == DatasetFormat::SCWS ? load_scws(path)
                                             : load_three_column(path, format);
  ds.name = path.stem().string();
  ds.format = format;
  return ds;
}

std::optional<std::pair<std::string, SynsetId>>
SenseIndex::parse_key(const std::string &key) {
  auto h2 = key.rfind('#');
  if (h2 == std::string::npos || h2 + 1 >= key.size())
    return std::nullopt;
  auto h1 = key.rfind('#', h2 - 1);
  if (h1 == std::string::npos || h1 == 0 || h2 != h1 + 2)
    return std::nullopt;
  auto pos = pos_from_char(key[h1 + 1]);
  if (!pos)
    return std::nullopt;
  const std::string off = key.substr(h2 + 1);
  if (off.size() != 8 ||
      !std::all_of(off.begin(), off.end(),
                   [](unsigned char c) { return std::isdigit(c); }))
    return std::nullopt;
  SynsetId id{*pos, static_cast<std::uint32_t>(std::stoul(off))};
  return std::make_pair(key.substr(0, h1), id);
}

SenseIndex::SenseIndex(const VectorStore &senses) {
  for (std::uint32_t r = 0; r < senses.size(); ++r) {
    if (senses.norm(r) == 0.0)
      continue;
    auto parsed = parse_key(senses.word(r));
    std::string lemma = parsed ? parsed->first : senses.word(r);
    exact_[lemma].push_back(r);
    std::string lower = lemma;
    std::transform(lower.begin(), lower.end(), lower.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    folded_[lower].push_back(r);
  }
}

std::vector<std::uint32_t>
SenseIndex::senses_of(const std::string &word) const {
  auto it = exact_.find(word);
  if (it != exact_.end())
    return it->second;
  std::string lower = word;
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  auto fit = folded_.find(lower);
  if (fit != folded_.end())
    return fit->second;
  return {};
}

namespace {

void require(const void *p, const char *what) {
  if (!p)
    throw IntegrityError(std::string("eval resources missing: ") + what);
}

std::vector<std::uint32_t> require_senses(const EvalResources &res,
                                          const std::string &word) {
  require(res.senses, "sense space");
  require(res.sense_index, "sense index");
  auto rows = res.sense_index->senses_of(word);
  if (rows.empty())
    throw UncomputableError("no sense vectors for '" + word + "'");
  return rows;
}

const std::unordered_set<std::string> &stopwords() {
  static const std::unordered_set<std::string> kStop = {
      "a",    "an",   "and",  "are",  "as",   "at",    "be",    "been",
      "but",  "by",   "can",  "did",  "do",   "does",  "for",   "from",
      "had",  "has",  "have", "he",   "her",  "his",   "i",     "in",
      "is",   "it",   "its",  "not",  "of",   "on",    "or",    "she",
      "that", "the",  "their", "them", "they", "this",  "to",    "was",
      "we",   "were", "what", "when", "which", "who",   "will",  "with",
      "would", "you"};
  return kStop;
}

// mean of in-vocabulary, non-stopword context token vectors
std::optional<std::vector<double>>
context_centroid(const std::vector<std::string> &tokens,
                 const EvalResources &res) {
  require(res.words, "word vectors");
  std::vector<double> sum(res.words->dim(), 0.0);
  std::size_t found = 0;
  for (const auto &tok : tokens) {
    std::string lower = tok;
    std::transform(lower.begin(), lower.end(), lower.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    if (stopwords().count(lower))
      continue;
    auto row = lookup(*res.words, tok, res.policy);
    if (!row)
      continue;
    auto v = res.words->vec(*row);
    for (std::size_t d = 0; d < sum.size(); ++d)
      sum[d] += v[d];
    ++found;
  }
  if (found == 0)
    return std::nullopt;
  for (auto &x : sum)
    x /= static_cast<double>(found);
  return sum;
}

std::vector<double> sense_weights(const std::vector<std::uint32_t> &rows,
                                  const std::optional<std::vector<double>> &ctx,
                                  const EvalResources &res, bool &uniform) {
  std::vector<double> w(rows.size(), 1.0 / static_cast<double>(rows.size()));
  if (!ctx) {
    uniform = true;
    return w;
  }
  double ctx_norm = 0.0;
  for (double x : *ctx)
    ctx_norm += x * x;
  if (ctx_norm == 0.0) {
    uniform = true;
    return w;
  }
  ctx_norm = std::sqrt(ctx_norm);
  double total = 0.0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    auto v = res.senses->vec(rows[i]);
    double dot = 0.0;
    for (std::size_t d = 0; d < v.size(); ++d)
      dot += (*ctx)[d] * v[d];
    double cos = dot / (ctx_norm * res.senses->norm(rows[i]));
    w[i] = std::exp(cos);
    total += w[i];
  }
  for (auto &x : w)
    x /= total;
  return w;
}

std::vector<double> word_sense_centroid(const std::string &word,
                                        const EvalResources &res) {
  auto rows = require_senses(res, word);
  std::vector<std::vector<double>> vecs;
  vecs.reserve(rows.size());
  for (auto r : rows) {
    auto v = res.senses->vec(r);
    vecs.emplace_back(v.begin(), v.end());
  }
  return synset_vector(vecs); // same normalize-sum-normalize rule
}

} // namespace

double max_sim(const std::string &w1, const std::string &w2,
               const EvalResources &res) {
  auto r1 = require_senses(res, w1);
  auto r2 = require_senses(res, w2);
  double best = -2.0;
  for (auto a : r1)
    for (auto b : r2)
      best = std::max(best, cosine(res.senses->vec(a), res.senses->vec(b)));
  return best;
}

double avg_sim(const std::string &w1, const std::string &w2,
               const EvalResources &res) {
  auto r1 = require_senses(res, w1);
  auto r2 = require_senses(res, w2);
  double sum = 0.0;
  for (auto a : r1)
    for (auto b : r2)
      sum += cosine(res.senses->vec(a), res.senses->vec(b));
  return sum / (static_cast<double>(r1.size()) * static_cast<double>(r2.size()));
}

AvgSimCResult avg_sim_c(const SimilarityPair &pair, const EvalResources &res) {
  auto r1 = require_senses(res, pair.left);
  auto r2 = require_senses(res, pair.right);
  bool uniform = false;
  auto w1 = sense_weights(r1, context_centroid(pair.left_context, res), res,
                          uniform);
  auto w2 = sense_weights(r2, context_centroid(pair.right_context, res), res,
                          uniform);
  double score = 0.0;
  for (std::size_t i = 0; i < r1.size(); ++i)
    for (std::size_t j = 0; j < r2.size(); ++j)
      score += w1[i] * w2[j] *
               cosine(res.senses->vec(r1[i]), res.senses->vec(r2[j]));
  return AvgSimCResult{score, uniform};
}

double s2w(const std::string &sense_key, const std::string &word,
           const EvalResources &res) {
  require(res.senses, "sense space");
  require(res.words, "word vectors");
  auto srow = res.senses->find(sense_key);
  if (!srow)
    throw UncomputableError("unknown sense key '" + sense_key + "'");
  auto wrow = lookup(*res.words, word, res.policy);
  if (!wrow)
    throw UncomputableError("no word vector for '" + word + "'");
  return cosine(res.senses->vec(*srow), res.words->vec(*wrow));
}

double s2a(const std::string &sense_key, const std::string &word,
           const EvalResources &res) {
  require(res.senses, "sense space");
  auto srow = res.senses->find(sense_key);
  if (!srow)
    throw UncomputableError("unknown sense key '" + sense_key + "'");
  auto centroid = word_sense_centroid(word, res);
  auto sv = res.senses->vec(*srow);
  std::vector<double> s(sv.begin(), sv.end());
  return cosine(std::span<const double>(s), std::span<const double>(centroid));
}

namespace {

std::vector<std::uint32_t> word_synsets(const Database &db,
                                        const std::string &word,
                                        const LookupPolicy &policy) {
  std::string key = word;
  std::replace(key.begin(), key.end(), ' ', policy.multiword_joiner);
  auto rows = db.synsets_with_lemma(key);
  if (rows.empty() && policy.case_fallback) {
    std::string lower = key;
    std::transform(lower.begin(), lower.end(), lower.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    if (lower != key)
      rows = db.synsets_with_lemma(lower);
  }
  return rows;
}

} // namespace

double antonym_adjust(double score, const std::string &w1,
                      const std::string &w2, const Database &db,
                      const LookupPolicy &policy) {
  auto s1 = word_synsets(db, w1, policy);
  auto s2 = word_synsets(db, w2, policy);
  for (auto a : s1)
    for (auto b : s2)
      if (db.antonym_linked(db.synset(a).id, db.synset(b).id))
        return score / 5.0;
  return score;
}

EvalReport run_benchmark(const Dataset &dataset, Strategy strategy,
                         const EvalResources &res, const EvalOptions &options) {
  EvalReport rep;
  rep.dataset = dataset.name;
  rep.strategy = strategy_name(strategy);
  rep.total = static_cast<std::uint32_t>(dataset.pairs.size());

  const bool sense_strategies = strategy == Strategy::S2W ||
                                strategy == Strategy::S2A;
  if (sense_strategies && !dataset.word_to_sense)
    throw UncomputableError(strategy_name(strategy) +
                            " requires a word-to-sense dataset");
  if (strategy == Strategy::AvgSimC && !dataset.has_contexts)
    throw UncomputableError("avgsimc requires a dataset with contexts");
  if (options.antonym_adjust) {
    if (dataset.word_to_sense)
      throw UncomputableError(
          "antonym adjustment applies to word-pair datasets only");
    require(res.db, "graph (needed for antonym adjustment)");
  }
  if (res.words && res.senses && res.words->dim() != res.senses->dim())
    throw IntegrityError("word and sense spaces have different dimensions");

  struct Outcome {
    std::optional<double> score;
    bool uniform = false;
    bool backoff = false;
    bool adjusted = false;
  };
  const std::size_t n = dataset.pairs.size();
  std::vector<Outcome> outcomes(n);

  auto score_pair = [&](std::size_t idx) {
    const SimilarityPair &pair = dataset.pairs[idx];
    Outcome &out = outcomes[idx];
    try {
      if (dataset.word_to_sense) {
        switch (strategy) {
        case Strategy::S2W:
          out.score = s2w(pair.left, pair.right, res);
          break;
        case Strategy::S2A:
          out.score = s2a(pair.left, pair.right, res);
          break;
        case Strategy::MaxSim:
        case Strategy::AvgSim: {
          require(res.senses, "sense space");
          auto srow = res.senses->find(pair.left);
          if (!srow)
            throw UncomputableError("unknown sense key '" + pair.left + "'");
          auto rows = require_senses(res, pair.right);
          double best = -2.0, sum = 0.0;
          for (auto r : rows) {
            double c = cosine(res.senses->vec(*srow), res.senses->vec(r));
            best = std::max(best, c);
            sum += c;
          }
          out.score = strategy == Strategy::MaxSim
                          ? best
                          : sum / static_cast<double>(rows.size());
          break;
        }
        case Strategy::AvgSimC:
          throw UncomputableError(
              "avgsimc is undefined for word-to-sense datasets");
        }
      } else {
        switch (strategy) {
        case Strategy::MaxSim:
          out.score = max_sim(pair.left, pair.right, res);
          break;
        case Strategy::AvgSim:
          out.score = avg_sim(pair.left, pair.right, res);
          break;
        case Strategy::AvgSimC: {
          auto r = avg_sim_c(pair, res);
          out.score = r.score;
          out.uniform = r.uniform_fallback;
          break;
        }
        default:
          break;
        }
      }
    } catch (const UncomputableError &) {
      out.score.reset();
    }

    // either word without senses: fall back to the word-vector cosine
    if (!out.score && !dataset.word_to_sense && res.words) {
      auto a = lookup(*res.words, pair.left, res.policy);
      auto b = lookup(*res.words, pair.right, res.policy);
      if (a && b && res.words->norm(*a) > 0.0 && res.words->norm(*b) > 0.0) {
        out.score = cosine(res.words->vec(*a), res.words->vec(*b));
        out.backoff = true;
      }
    }

    if (out.score && options.antonym_adjust) {
      double adj = antonym_adjust(*out.score, pair.left, pair.right, *res.db,
                                  res.policy);
      out.adjusted = adj != *out.score;
      out.score = adj;
    }
  };

  // scoring is stateless over the immutable resources; fan out, then
  // aggregate in pair order so the report is independent of thread count
  unsigned workers = options.threads == 0 ? 1 : options.threads;
  workers = static_cast<unsigned>(
      std::min<std::size_t>(workers, std::max<std::size_t>(n, 1)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i)
      score_pair(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::exception_ptr first_error;
    std::mutex mu;
    auto loop = [&]() {
      while (true) {
        std::size_t i = next.fetch_add(1);
        if (i >= n)
          break;
        try {
          score_pair(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(mu);
          if (!first_error)
            first_error = std::current_exception();
        }
      }
    };
    std::vector<std::thread> pool;
    for (unsigned t = 1; t < workers; ++t)
      pool.emplace_back(loop);
    loop();
    for (auto &t : pool)
      t.join();
    if (first_error)
      std::rethrow_exception(first_error);
  }

  std::vector<double> gold, system;
  for (std::size_t i = 0; i < n; ++i) {
    const Outcome &out = outcomes[i];
    if (!out.score) {
      rep.uncovered_pairs.push_back(dataset.pairs[i].left + ":" +
                                    dataset.pairs[i].right);
      continue;
    }
    rep.uniform_fallbacks += out.uniform;
    rep.word_backoffs += out.backoff;
    rep.adjusted += out.adjusted;
    gold.push_back(dataset.pairs[i].gold);
    system.push_back(*out.score);
    ++rep.covered;
  }

  if (rep.covered < 2)
    throw UncomputableError("fewer than 2 covered pairs in " + dataset.name);
  rep.pearson = pearson(system, gold);
  rep.spearman = spearman(system, gold);
  return rep;
}

std::string machine_line(const EvalReport &rep) {
  char buf[160];
  std::snprintf(buf, sizeof(buf), "%s %s %.6f %.6f %u %u",
                rep.dataset.c_str(), rep.strategy.c_str(), rep.pearson,
                rep.spearman, rep.covered, rep.total);
  return buf;
}

void print_report(std::ostream &os, const EvalReport &rep) {
  char num[32];
  os << "dataset:   " << rep.dataset << '\n';
  os << "strategy:  " << rep.strategy << '\n';
  os << "covered:   " << rep.covered << '/' << rep.total;
  if (rep.word_backoffs)
    os << "  (" << rep.word_backoffs << " via word vectors)";
  os << '\n';
  if (rep.uniform_fallbacks)
    os << "uniform-context fallbacks: " << rep.uniform_fallbacks << '\n';
  if (rep.adjusted)
    os << "antonym-adjusted pairs: " << rep.adjusted << '\n';
  std::snprintf(num, sizeof(num), "%.4f", rep.pearson);
  os << "pearson:   " << num << '\n';
  std::snprintf(num, sizeof(num), "%.4f", rep.spearman);
  os << "spearman:  " << num << '\n';
  for (const auto &p : rep.uncovered_pairs)
    os << "uncovered: " << p << '\n';
}

} // namespace deconf
