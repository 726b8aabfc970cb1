#include "deconf/bias.hpp"
#include "deconf/deconflate.hpp"
#include "deconf/errors.hpp"
#include "deconf/eval.hpp"
#include "deconf/manifest.hpp"
#include "deconf/ppr.hpp"
#include "deconf/vectors.hpp"
#include "deconf/wordnet.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <vector>

namespace {

using namespace deconf;

struct StageTimer {
  std::vector<std::pair<std::string, double>> stages;
  std::chrono::steady_clock::time_point last =
      std::chrono::steady_clock::now();

  void mark(const std::string &stage) {
    auto now = std::chrono::steady_clock::now();
    stages.emplace_back(stage,
                        std::chrono::duration<double>(now - last).count());
    last = now;
  }
};

SynsetId parse_synset_arg(const std::string &arg) {
  auto bad = [&]() -> ParseError {
    return ParseError("bad synset id '" + arg + "' (expected pos#offset, "
                      "e.g. n#02800213)");
  };
  if (arg.size() < 3 || arg[1] != '#')
    throw bad();
  auto pos = pos_from_char(arg[0]);
  if (!pos)
    throw bad();
  const std::string off = arg.substr(2);
  std::size_t used = 0;
  unsigned long v = 0;
  try {
    v = std::stoul(off, &used, 10);
  } catch (const std::exception &) {
    throw bad();
  }
  if (used != off.size())
    throw bad();
  return SynsetId{*pos, static_cast<std::uint32_t>(v)};
}

VecFormat parse_vec_format(const std::string &name) {
  if (name == "binary")
    return VecFormat::Binary;
  if (name == "text")
    return VecFormat::Text;
  throw std::invalid_argument("vector format must be 'binary' or 'text'");
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

unsigned default_threads() {
  unsigned n = std::thread::hardware_concurrency();
  return n == 0 ? 1 : n;
}

// ---------------------------------------------------------------- build-graph

struct BuildGraphOpts {
  std::string wordnet, out, relations;
};

void run_build_graph(const BuildGraphOpts &o) {
  StageTimer timer;
  Database db(parse_wordnet(o.wordnet));
  timer.mark("parse");

  RelationFilter filter = RelationFilter::all();
  if (!o.relations.empty()) {
    std::set<std::string> syms;
    std::size_t start = 0;
    while (start <= o.relations.size()) {
      auto comma = o.relations.find(',', start);
      std::string sym = o.relations.substr(
          start, comma == std::string::npos ? std::string::npos
                                            : comma - start);
      if (!sym.empty())
        syms.insert(sym);
      if (comma == std::string::npos)
        break;
      start = comma + 1;
    }
    if (syms.empty())
      throw std::invalid_argument("--relations given but empty");
    filter = RelationFilter::only(std::move(syms));
  }
  SemanticGraph graph = build_graph(db, filter);
  timer.mark("build");
  save_graph(o.out, db, graph);
  timer.mark("save");

  RunManifest m;
  m.command = "build-graph";
  m.graph_fingerprint = db.fingerprint();
  m.config["wordnet"] = o.wordnet;
  m.config["relations"] = o.relations.empty() ? "all" : o.relations;
  m.timings_s = timer.stages;
  write_manifest(o.out, m);

  char fp[20];
  std::snprintf(fp, sizeof(fp), "%016llx",
                static_cast<unsigned long long>(db.fingerprint()));
  std::cout << "synsets:     " << db.size() << '\n'
            << "senses:      " << db.total_senses() << '\n'
            << "edges:       " << graph.edge_count() << '\n'
            << "isolated:    " << graph.isolated_count() << '\n'
            << "largest component: " << graph.largest_component_size() << '\n'
            << "fingerprint: " << fp << '\n';
}

// ----------------------------------------------------------------------- bias

struct BiasOpts {
  std::string graph, out;
  std::vector<std::string> synsets;
  bool all = false;
  std::uint32_t k = 25;
  double damping = 0.85;
  int max_iters = 30;
  double tolerance = 1e-9;
  unsigned threads = default_threads();
};

void run_bias(const BiasOpts &o) {
  if (!o.all && o.synsets.empty())
    throw std::invalid_argument("need --synset ID (repeatable) or --all");

  StageTimer timer;
  LoadedGraph lg = load_graph(o.graph);
  timer.mark("load");

  TransitionMatrix matrix(lg.graph);
  PprConfig cfg{o.damping, o.max_iters, o.tolerance};
  cfg.validate();

  std::vector<BiasList> lists;
  std::size_t failed = 0;
  if (o.all) {
    BiasBatch batch = materialize_all(lg.db, matrix, cfg, o.k, o.threads);
    for (const auto &f : batch.failures)
      std::cerr << "skipped " << to_string(lg.db.synset(f.target).id) << ": "
                << f.message << '\n';
    failed = batch.failures.size();
    lists = std::move(batch.lists);
  } else {
    for (const auto &arg : o.synsets) {
      SynsetId id = parse_synset_arg(arg);
      std::uint32_t idx = lg.db.require_index(id);
      PprVector ppr = personalized_pagerank(matrix, idx, cfg, to_string(id));
      lists.push_back(extract_bias_list(lg.db, ppr, o.k));
    }
  }
  timer.mark("ppr");
  write_bias_lists(o.out, lists);
  timer.mark("write");

  RunManifest m;
  m.command = "bias";
  m.graph_fingerprint = lg.db.fingerprint();
  m.config["damping"] = fmt(o.damping);
  m.config["maxIterations"] = std::to_string(o.max_iters);
  m.config["tolerance"] = fmt(o.tolerance);
  m.config["k"] = std::to_string(o.k);
  m.config["targets"] = o.all ? "all" : std::to_string(o.synsets.size());
  m.timings_s = timer.stages;
  write_manifest(o.out, m);

  std::cout << "lists:   " << lists.size() << '\n';
  if (failed)
    std::cout << "skipped: " << failed << '\n';
}

// ---------------------------------------------------------------------- train

struct TrainOpts {
  std::string graph, bias, vectors, out_senses, out_synsets, coverage;
  std::string vec_format = "binary";
  double alpha = 1.0;
  double lambda = 0.2;
  std::uint32_t k = 25;
  unsigned threads = default_threads();
};

void run_train(const TrainOpts &o) {
  StageTimer timer;
  LoadedGraph lg = load_graph(o.graph);
  timer.mark("load-graph");

  // refuse bias lists produced from a different graph build
  if (auto bm = read_manifest(o.bias)) {
    if (bm->graph_fingerprint != lg.db.fingerprint())
      throw IntegrityError(
          "bias file " + o.bias +
          " was produced from a different graph (fingerprint mismatch)");
  } else {
    std::cerr << "warning: no manifest beside " << o.bias
              << "; provenance not checked\n";
  }

  std::vector<BiasList> lists = read_bias_lists(o.bias);
  // stored lists may be longer than k; re-truncation keeps the prefix rule
  for (auto &l : lists)
    if (l.entries.size() > o.k)
      l.entries.resize(o.k);
  timer.mark("load-bias");

  VectorStore store = load_word2vec(o.vectors, parse_vec_format(o.vec_format));
  timer.mark("load-vectors");

  DeconfConfig cfg{o.alpha, o.lambda, o.k};
  LookupPolicy policy;
  TrainResult result = train_all(lg.db, lists, store, policy, cfg, o.threads);
  timer.mark("train");

  export_sense_space(result.space, o.out_senses, o.out_synsets);
  if (!o.coverage.empty())
    write_coverage_report(o.coverage, result.uncovered);
  timer.mark("export");

  RunManifest m;
  m.command = "train";
  m.graph_fingerprint = lg.db.fingerprint();
  m.config["alpha"] = fmt(o.alpha);
  m.config["lambda"] = fmt(o.lambda);
  m.config["k"] = std::to_string(o.k);
  m.config["vectors"] = o.vectors;
  m.config["bias"] = o.bias;
  m.timings_s = timer.stages;
  write_manifest(o.out_senses, m);
  write_manifest(o.out_synsets, m);

  std::cout << "senses:    " << result.space.senses.size() << " / "
            << result.total_senses << '\n'
            << "synsets:   " << result.space.synsets.size() << " / "
            << result.total_synsets << '\n'
            << "uncovered: " << result.uncovered.size() << '\n';
}

// ------------------------------------------------------------------------- nn

struct NnOpts {
  std::string senses, vectors, query;
  std::string vec_format = "binary";
  std::size_t top = 10;
  bool words_only = false;
};

void run_nn(const NnOpts &o) {
  VectorStore senses = load_word2vec(o.senses, VecFormat::Text);
  std::optional<VectorStore> words;
  if (!o.vectors.empty()) {
    words = load_word2vec(o.vectors, parse_vec_format(o.vec_format));
    if (words->dim() != senses.dim())
      throw IntegrityError("sense and word spaces have different dimensions");
  }
  if (o.words_only && !words)
    throw std::invalid_argument("--words-only needs --vectors");

  LookupPolicy policy;
  std::set<std::string> exclude{o.query};
  std::vector<double> query;
  if (auto row = senses.find(o.query)) {
    auto v = senses.vec(*row);
    query.assign(v.begin(), v.end());
  } else if (words) {
    auto wrow = lookup(*words, o.query, policy);
    if (!wrow)
      throw UncomputableError("unknown query key '" + o.query + "'");
    auto v = words->vec(*wrow);
    query.assign(v.begin(), v.end());
    exclude.insert(words->word(*wrow));
  } else {
    throw UncomputableError("unknown query key '" + o.query + "'");
  }

  std::vector<Neighbor> merged;
  if (!o.words_only) {
    auto a = nearest(senses, query, o.top, exclude);
    merged.insert(merged.end(), a.begin(), a.end());
  }
  if (words) {
    auto b = nearest(*words, query, o.top, exclude);
    merged.insert(merged.end(), b.begin(), b.end());
  }
  std::sort(merged.begin(), merged.end(),
            [](const Neighbor &a, const Neighbor &b) {
              if (a.cosine != b.cosine)
                return a.cosine > b.cosine;
              return a.key < b.key;
            });
  if (merged.size() > o.top)
    merged.resize(o.top);

  for (std::size_t i = 0; i < merged.size(); ++i) {
    char line[64];
    std::snprintf(line, sizeof(line), "%3zu  %.4f  ", i + 1,
                  merged[i].cosine);
    std::cout << line << merged[i].key << '\n';
  }
}

// ----------------------------------------------------------------------- eval

struct EvalCliOpts {
  std::string senses, vectors, graph, dataset, format, strategy, out;
  std::string vec_format = "binary";
  bool antonym = false;
  unsigned threads = default_threads();
};

void run_eval(const EvalCliOpts &o) {
  auto format = format_from_name(o.format);
  if (!format)
    throw std::invalid_argument("unknown dataset format '" + o.format + "'");
  auto strategy = strategy_from_name(o.strategy);
  if (!strategy)
    throw std::invalid_argument("unknown strategy '" + o.strategy + "'");
  if (o.antonym && o.graph.empty())
    throw std::invalid_argument("--antonym-adjust needs --graph");

  Dataset dataset = load_dataset(o.dataset, *format);

  VectorStore senses = load_word2vec(o.senses, VecFormat::Text);
  SenseIndex index(senses);
  std::optional<VectorStore> words;
  std::optional<LoadedGraph> lg;

  EvalResources res;
  res.senses = &senses;
  res.sense_index = &index;
  if (!o.vectors.empty()) {
    words = load_word2vec(o.vectors, parse_vec_format(o.vec_format));
    res.words = &*words;
  }
  if (!o.graph.empty()) {
    lg = load_graph(o.graph);
    res.db = &lg->db;
  }

  EvalOptions options;
  options.antonym_adjust = o.antonym;
  options.threads = o.threads;
  EvalReport report = run_benchmark(dataset, *strategy, res, options);

  print_report(std::cout, report);
  const std::string line = machine_line(report);
  std::cout << line << '\n';
  if (!o.out.empty()) {
    std::ofstream os(o.out, std::ios::binary);
    if (!os)
      throw ParseError("cannot write " + o.out);
    os << line << '\n';
  }
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"de-conflated sense vectors over the WordNet graph"};
  app.require_subcommand(1);

  BuildGraphOpts bg;
  auto *cmd_bg = app.add_subcommand(
      "build-graph", "parse a WordNet dict directory into a graph file");
  cmd_bg->add_option("--wordnet", bg.wordnet,
                     "directory holding data.noun/verb/adj/adv")
      ->required();
  cmd_bg->add_option("--out", bg.out, "output graph file")->required();
  cmd_bg->add_option("--relations", bg.relations,
                     "comma-separated pointer symbols to keep (default all)");
  cmd_bg->callback([&] { run_build_graph(bg); });

  BiasOpts bias;
  auto *cmd_bias = app.add_subcommand(
      "bias", "rank sense-biasing words per synset via personalized PageRank");
  cmd_bias->add_option("--graph", bias.graph, "graph file from build-graph")
      ->required();
  cmd_bias->add_option("--out", bias.out, "output bias-list file")->required();
  cmd_bias->add_option("--synset", bias.synsets,
                       "target synset id like n#02800213 (repeatable)");
  cmd_bias->add_flag("--all", bias.all, "all non-isolated synsets");
  cmd_bias->add_option("--k", bias.k, "list length (default 25)");
  cmd_bias->add_option("--damping", bias.damping, "damping factor");
  cmd_bias->add_option("--max-iters", bias.max_iters, "iteration cap");
  cmd_bias->add_option("--tolerance", bias.tolerance, "L1 stop threshold");
  cmd_bias->add_option("--threads", bias.threads, "worker count");
  cmd_bias->callback([&] { run_bias(bias); });

  TrainOpts train;
  auto *cmd_train = app.add_subcommand(
      "train", "compute sense and synset vectors from bias lists");
  cmd_train->add_option("--graph", train.graph, "graph file")->required();
  cmd_train->add_option("--bias", train.bias, "bias-list file")->required();
  cmd_train->add_option("--vectors", train.vectors, "pre-trained word vectors")
      ->required();
  cmd_train->add_option("--out-senses", train.out_senses, "sense vector file")
      ->required();
  cmd_train
      ->add_option("--out-synsets", train.out_synsets, "synset vector file")
      ->required();
  cmd_train->add_option("--coverage", train.coverage,
                        "write uncovered senses here");
  cmd_train->add_option("--vec-format", train.vec_format,
                        "word vector format: binary|text");
  cmd_train->add_option("--alpha", train.alpha, "pull toward lemma vector");
  cmd_train->add_option("--lambda", train.lambda, "bias rank decay");
  cmd_train->add_option("--k", train.k, "bias list truncation");
  cmd_train->add_option("--threads", train.threads, "worker count");
  cmd_train->callback([&] { run_train(train); });

  NnOpts nn;
  auto *cmd_nn = app.add_subcommand(
      "nn", "nearest neighbors of a word or sense in the unified space");
  cmd_nn->add_option("--senses", nn.senses, "sense vector file")->required();
  cmd_nn->add_option("--vectors", nn.vectors, "word vector file");
  cmd_nn->add_option("--query", nn.query, "word or sense key")->required();
  cmd_nn->add_option("--top", nn.top, "neighbor count (default 10)");
  cmd_nn->add_option("--vec-format", nn.vec_format,
                     "word vector format: binary|text");
  cmd_nn->add_flag("--words-only", nn.words_only,
                   "restrict neighbors to the word space");
  cmd_nn->callback([&] { run_nn(nn); });

  EvalCliOpts ev;
  auto *cmd_eval = app.add_subcommand(
      "eval", "score a similarity benchmark and report correlations");
  cmd_eval->add_option("--senses", ev.senses, "sense vector file")->required();
  cmd_eval->add_option("--vectors", ev.vectors,
                       "word vectors (contexts, S2W, coverage backoff)");
  cmd_eval->add_option("--graph", ev.graph,
                       "graph file (needed for --antonym-adjust)");
  cmd_eval->add_option("--dataset", ev.dataset, "benchmark file")->required();
  cmd_eval
      ->add_option("--format", ev.format,
                   "pairs|rg65|yp130|men3k|simlex999|scws|clss")
      ->required();
  cmd_eval
      ->add_option("--strategy", ev.strategy,
                   "maxsim|avgsim|avgsimc|s2w|s2a")
      ->required();
  cmd_eval->add_flag("--antonym-adjust", ev.antonym,
                     "divide antonym-linked pair scores by 5");
  cmd_eval->add_option("--out", ev.out, "also write the machine line here");
  cmd_eval->add_option("--vec-format", ev.vec_format,
                       "word vector format: binary|text");
  cmd_eval->add_option("--threads", ev.threads, "worker count");
  cmd_eval->callback([&] { run_eval(ev); });

  try {
    app.parse(argc, argv);
    return EXIT_OK;
  } catch (const CLI::ParseError &e) {
    int code = app.exit(e);
    return code == 0 ? EXIT_OK : EXIT_USAGE;
  } catch (const ParseError &e) {
    std::cerr << "error: " << e.what() << '\n';
    return EXIT_PARSE;
  } catch (const IntegrityError &e) {
    std::cerr << "error: " << e.what() << '\n';
    return EXIT_INTEGRITY;
  } catch (const UncomputableError &e) {
    std::cerr << "error: " << e.what() << '\n';
    return EXIT_UNCOMPUTABLE;
  } catch (const std::invalid_argument &e) {
    std::cerr << "error: " << e.what() << '\n';
    return EXIT_USAGE;
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
