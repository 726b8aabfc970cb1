#include "deconf/eval.hpp"
#include "deconf/bias.hpp"
#include "deconf/deconflate.hpp"
#include "deconf/errors.hpp"
#include "deconf/ppr.hpp"

#include "support/fixtures.hpp"
#include "support/oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

using namespace deconf;

namespace {

std::filesystem::path write_file(const std::filesystem::path &dir,
                                 const std::string &name,
                                 const std::string &content) {
  auto p = dir / name;
  std::ofstream os(p, std::ios::binary);
  os << content;
  return p;
}

} // namespace

TEST_CASE("strategy and format names round-trip") {
  CHECK(*strategy_from_name("MaxSim") == Strategy::MaxSim);
  CHECK(*strategy_from_name("avgsimc") == Strategy::AvgSimC);
  CHECK(*strategy_from_name("S2A") == Strategy::S2A);
  CHECK(!strategy_from_name("bogus"));
  CHECK(strategy_name(Strategy::S2W) == "s2w");

  CHECK(*format_from_name("rg-65") == DatasetFormat::RG65);
  CHECK(*format_from_name("SimLex_999") == DatasetFormat::SimLex999);
  CHECK(*format_from_name("men") == DatasetFormat::MEN3K);
  CHECK(!format_from_name("unknown"));
}

TEST_CASE("plain pair files split on whitespace") {
  fixtures::TempDir tmp;
  auto p = write_file(tmp.path(), "toy.txt",
                      "# comment line\n"
                      "car auto 3.92\n"
                      "\n"
                      "gem   jewel   3.84\n");
  Dataset ds = load_dataset(p, DatasetFormat::Pairs);
  CHECK(ds.name == "toy");
  CHECK(!ds.word_to_sense);
  CHECK(!ds.has_contexts);
  REQUIRE(ds.pairs.size() == 2);
  CHECK(ds.pairs[0].left == "car");
  CHECK(ds.pairs[0].right == "auto");
  CHECK(ds.pairs[0].gold == 3.92);
  CHECK(ds.pairs[1].left == "gem");
}

TEST_CASE("semicolon and tab layouts both parse") {
  fixtures::TempDir tmp;
  auto semi = write_file(tmp.path(), "rg.txt", "cord;smile;0.02\n");
  auto tab = write_file(tmp.path(), "rg2.txt", "cord\tsmile\t0.02\n");
  for (const auto &p : {semi, tab}) {
    Dataset ds = load_dataset(p, DatasetFormat::RG65);
    REQUIRE(ds.pairs.size() == 1);
    CHECK(ds.pairs[0].left == "cord");
    CHECK(ds.pairs[0].right == "smile");
    CHECK(ds.pairs[0].gold == 0.02);
  }
}

TEST_CASE("part-of-speech suffixes are stripped in the MEN layout") {
  fixtures::TempDir tmp;
  auto p = write_file(tmp.path(), "men.txt",
                      "automobile-n car-n 6.8\n"
                      "rain-v pour-v 7.2\n"
                      "shiny-j bright-j 8.1\n"
                      "e-mail inbox 5.0\n"); // '-l' is not a POS tag
  Dataset ds = load_dataset(p, DatasetFormat::MEN3K);
  REQUIRE(ds.pairs.size() == 4);
  CHECK(ds.pairs[0].left == "automobile");
  CHECK(ds.pairs[1].left == "rain");
  CHECK(ds.pairs[2].right == "bright");
  CHECK(ds.pairs[3].left == "e-mail");
}

TEST_CASE("the similarity column of the SimLex layout is the fourth") {
  fixtures::TempDir tmp;
  auto p = write_file(tmp.path(), "sl.txt",
                      "word1\tword2\tPOS\tSimLex999\tconc(w1)\n"
                      "old\tnew\tA\t1.58\t2.72\n"
                      "smart\tintelligent\tA\t9.2\t1.75\n");
  Dataset ds = load_dataset(p, DatasetFormat::SimLex999);
  REQUIRE(ds.pairs.size() == 2);
  CHECK(ds.pairs[0].left == "old");
  CHECK(ds.pairs[0].gold == 1.58);
  CHECK(ds.pairs[1].gold == 9.2);
}

TEST_CASE("contextual pairs carry their cleaned token lists") {
  fixtures::TempDir tmp;
  auto p = write_file(
      tmp.path(), "ctx.txt",
      "1\tbank\tn\tmoney\tn\tthe <b>bank</b> by the river!\tkept his "
      "<b>money</b> (safe).\t7.50\t8\t9\n");
  Dataset ds = load_dataset(p, DatasetFormat::SCWS);
  CHECK(ds.has_contexts);
  REQUIRE(ds.pairs.size() == 1);
  const auto &pr = ds.pairs[0];
  CHECK(pr.left == "bank");
  CHECK(pr.right == "money");
  CHECK(pr.gold == 7.5);
  // the <b>...</b> span is gone and punctuation is trimmed off the edges
  CHECK(pr.left_context == std::vector<std::string>{"the", "by", "the",
                                                    "river"});
  CHECK(pr.right_context ==
        std::vector<std::string>{"kept", "his", "safe"});
}

TEST_CASE("word-to-sense files keep the sense key intact") {
  fixtures::TempDir tmp;
  auto p = write_file(tmp.path(), "ws.txt",
                      "bass#n#02800213\tguitar\t6.5\n");
  Dataset ds = load_dataset(p, DatasetFormat::CLSS);
  CHECK(ds.word_to_sense);
  REQUIRE(ds.pairs.size() == 1);
  CHECK(ds.pairs[0].left == "bass#n#02800213");
  CHECK(ds.pairs[0].right == "guitar");
}

TEST_CASE("malformed dataset rows are rejected with the line number") {
  fixtures::TempDir tmp;
  auto two_cols = write_file(tmp.path(), "a.txt", "car auto\n");
  CHECK_THROWS_WITH_AS((void)load_dataset(two_cols, DatasetFormat::Pairs),
                       doctest::Contains("expected 3 columns"), ParseError);

  auto bad_score = write_file(tmp.path(), "b.txt", "car auto high\n");
  CHECK_THROWS_WITH_AS((void)load_dataset(bad_score, DatasetFormat::Pairs),
                       doctest::Contains("bad score 'high'"), ParseError);
  CHECK_THROWS_WITH_AS((void)load_dataset(bad_score, DatasetFormat::Pairs),
                       doctest::Contains(":1"), ParseError);

  auto short_scws = write_file(tmp.path(), "c.txt", "1\tw1\tn\tw2\n");
  CHECK_THROWS_WITH_AS((void)load_dataset(short_scws, DatasetFormat::SCWS),
                       doctest::Contains("8 tab-separated"), ParseError);

  auto empty_word = write_file(tmp.path(), "d.txt", ";smile;0.5\n");
  CHECK_THROWS_AS((void)load_dataset(empty_word, DatasetFormat::RG65),
                  ParseError);

  CHECK_THROWS_WITH_AS(
      (void)load_dataset(tmp.path() / "missing.txt", DatasetFormat::Pairs),
      doctest::Contains("cannot open"), ParseError);
}

TEST_CASE("sense keys decompose into lemma and synset") {
  auto parsed = SenseIndex::parse_key("bass#n#02800213");
  REQUIRE(parsed.has_value());
  CHECK(parsed->first == "bass");
  CHECK(parsed->second.pos == Pos::Noun);
  CHECK(parsed->second.offset == 2800213);

  auto multi = SenseIndex::parse_key("sea#w#ee#d#v#00000007");
  REQUIRE(multi.has_value());
  CHECK(multi->first == "sea#w#ee#d"); // only the tail is structure

  CHECK(!SenseIndex::parse_key("bass"));
  CHECK(!SenseIndex::parse_key("bass#x#02800213"));
  CHECK(!SenseIndex::parse_key("bass#n#123"));
  CHECK(!SenseIndex::parse_key("bass#n#0280021x"));
  CHECK(!SenseIndex::parse_key("#n#02800213"));
  CHECK(!SenseIndex::parse_key("bass#noun#02800213"));
}

TEST_CASE("the sense index groups rows by lemma") {
  VectorStore senses(2);
  senses.add("bass#n#00000001", std::vector<float>{1.0f, 0.0f});
  senses.add("bass#n#00000002", std::vector<float>{0.0f, 1.0f});
  senses.add("Bass#n#00000003", std::vector<float>{1.0f, 1.0f});
  senses.add("dead#n#00000004", std::vector<float>{0.0f, 0.0f}); // zero norm
  SenseIndex idx(senses);

  CHECK(idx.senses_of("bass") == std::vector<std::uint32_t>{0, 1});
  CHECK(idx.senses_of("Bass") == std::vector<std::uint32_t>{2});
  CHECK(idx.senses_of("BASS") ==
        std::vector<std::uint32_t>{0, 1, 2}); // case-folded fallback
  CHECK(idx.senses_of("dead").empty());
  CHECK(idx.senses_of("nothing").empty());
}

// --------------------------------------------------------------- strategies

namespace {

struct Toy {
  VectorStore words{2};
  VectorStore senses{2};
  SenseIndex idx;
  EvalResources res;

  Toy() : idx((fill(), senses)) {
    res.words = &words;
    res.senses = &senses;
    res.sense_index = &idx;
  }

  void fill() {
    words.add("l", std::vector<float>{1.0f, 0.0f});
    words.add("r", std::vector<float>{1.0f, 0.0f});
    words.add("alpha", std::vector<float>{1.0f, 0.0f});
    senses.add("l#n#00000001", std::vector<float>{1.0f, 0.0f});
    senses.add("l#n#00000002", std::vector<float>{0.0f, 1.0f});
    senses.add("r#n#00000003", std::vector<float>{1.0f, 0.0f});
  }
};

} // namespace

TEST_CASE("pairwise strategies on a two-sense toy space") {
  Toy t;
  CHECK(max_sim("l", "r", t.res) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(avg_sim("l", "r", t.res) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(avg_sim("l", "r", t.res) <= max_sim("l", "r", t.res));

  CHECK(s2w("l#n#00000001", "l", t.res) ==
        doctest::Approx(1.0).epsilon(1e-15));
  // centroid of l's senses is (1,1)/sqrt(2)
  CHECK(s2a("l#n#00000001", "l", t.res) ==
        doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-12));

  CHECK_THROWS_AS((void)max_sim("l", "nothing", t.res), UncomputableError);
  CHECK_THROWS_AS((void)s2w("ghost#n#00000009", "l", t.res),
                  UncomputableError);
  CHECK_THROWS_AS((void)s2w("l#n#00000001", "ghost", t.res),
                  UncomputableError);
}

TEST_CASE("context weighting follows the softmax of sense-context cosines") {
  Toy t;
  SimilarityPair pair;
  pair.left = "l";
  pair.right = "r";
  pair.left_context = {"alpha"};
  pair.right_context = {}; // no usable context: uniform over one sense

  auto out = avg_sim_c(pair, t.res);
  CHECK(out.uniform_fallback); // the empty right side
  const double e = std::exp(1.0);
  // left weights: e/(e+1) for the aligned sense, 1/(e+1) for the orthogonal
  CHECK(out.score == doctest::Approx(e / (e + 1.0)).epsilon(1e-12));
}

TEST_CASE("stopword-only contexts behave exactly like no context") {
  Toy t;
  SimilarityPair pair;
  pair.left = "l";
  pair.right = "r";
  pair.left_context = {"the", "of", "unknownword"};
  pair.right_context = {"and", "with"};
  auto out = avg_sim_c(pair, t.res);
  CHECK(out.uniform_fallback);
  CHECK(out.score == doctest::Approx(avg_sim("l", "r", t.res)).epsilon(1e-12));

  // stopwords are dropped before averaging, so adding them changes nothing
  SimilarityPair clean = pair;
  clean.left_context = {"alpha"};
  SimilarityPair noisy = pair;
  noisy.left_context = {"the", "alpha", "of"};
  CHECK(avg_sim_c(clean, t.res).score ==
        doctest::Approx(avg_sim_c(noisy, t.res).score).epsilon(1e-15));
}

// ------------------------------------------------------- antonym adjustment

TEST_CASE("antonym-linked word pairs are scaled down by five") {
  fixtures::TempDir tmp;
  fixtures::write_mini_wordnet(tmp.path());
  Database db(parse_wordnet(tmp.path()));
  LookupPolicy policy;

  CHECK(antonym_adjust(0.8, "sunrise", "sunset", db, policy) == 0.8 / 5.0);
  CHECK(antonym_adjust(0.8, "sundown", "dawning", db, policy) == 0.8 / 5.0);
  CHECK(antonym_adjust(0.8, "Sunrise", "sunset", db, policy) ==
        0.8 / 5.0); // case fallback
  CHECK(antonym_adjust(0.8, "sunrise", "entity", db, policy) == 0.8);
  CHECK(antonym_adjust(0.8, "nowhere", "sunset", db, policy) == 0.8);
  // multiword handling goes through the joiner
  CHECK(antonym_adjust(0.5, "go up", "rise", db, policy) == 0.5);
}

// ----------------------------------------------------------- run_benchmark

namespace {

struct MiniEval {
  fixtures::TempDir tmp;
  Database db;
  VectorStore words;
  VectorStore senses{1};
  std::optional<SenseIndex> idx;
  EvalResources res;

  MiniEval()
      : db((fixtures::write_mini_wordnet(tmp.path()),
            parse_wordnet(tmp.path()))),
        words(fixtures::mini_vectors()) {
    SemanticGraph graph = build_graph(db);
    TransitionMatrix matrix(graph);
    BiasBatch batch =
        materialize_all(db, matrix, PprConfig{0.85, 2000, 1e-15}, 10, 1);
    TrainResult trained = train_all(db, batch.lists, words, LookupPolicy{},
                                    DeconfConfig{}, 1);
    auto senses_path = tmp.path() / "senses.txt";
    auto synsets_path = tmp.path() / "synsets.txt";
    export_sense_space(trained.space, senses_path, synsets_path);
    senses = load_word2vec(senses_path, VecFormat::Text);
    // words without senses, for the backoff path
    words.add("rock", std::vector<float>{0.5f, 0.5f, 0.0f});
    words.add("stone", std::vector<float>{0.4f, 0.6f, 0.1f});
    idx.emplace(senses);
    res.words = &words;
    res.senses = &senses;
    res.sense_index = &*idx;
    res.db = &db;
  }

  Dataset dataset(const std::string &text,
                  DatasetFormat format = DatasetFormat::Pairs) {
    static int n = 0;
    auto p = write_file(tmp.path(), "ds" + std::to_string(n++) + ".txt",
                        text);
    return load_dataset(p, format);
  }
};

} // namespace

TEST_CASE("benchmark reports match a brute-force recomputation") {
  MiniEval m;
  Dataset ds = m.dataset("sunrise sunset 1.1\n"
                         "digit number 8.0\n"
                         "bright brilliant 9.0\n"
                         "rock stone 6.0\n"     // word-vector backoff
                         "hermit ghost 2.0\n"); // nothing known: uncovered
  EvalReport rep = run_benchmark(ds, Strategy::MaxSim, m.res, EvalOptions{});

  CHECK(rep.total == 5);
  CHECK(rep.covered == 4);
  CHECK(rep.word_backoffs == 1);
  REQUIRE(rep.uncovered_pairs.size() == 1);
  CHECK(rep.uncovered_pairs[0] == "hermit:ghost");
  CHECK(rep.covered + rep.uncovered_pairs.size() == rep.total);

  // recompute the four covered scores independently
  std::vector<double> system = {
      max_sim("sunrise", "sunset", m.res), max_sim("digit", "number", m.res),
      max_sim("bright", "brilliant", m.res), 0.0};
  {
    auto a = *lookup(m.words, "rock", m.res.policy);
    auto b = *lookup(m.words, "stone", m.res.policy);
    system[3] = cosine(m.words.vec(a), m.words.vec(b));
  }
  std::vector<double> gold = {1.1, 8.0, 9.0, 6.0};
  CHECK(rep.pearson ==
        doctest::Approx(oracles::brute_pearson(system, gold)).epsilon(1e-12));
  CHECK(rep.spearman ==
        doctest::Approx(oracles::brute_spearman(system, gold))
            .epsilon(1e-12));
}

TEST_CASE("benchmark output does not depend on the thread count") {
  MiniEval m;
  Dataset ds = m.dataset("sunrise sunset 1.1\n"
                         "digit number 8.0\n"
                         "digit dactyl 7.5\n"
                         "bright brilliant 9.0\n"
                         "move rise 4.0\n"
                         "rock stone 6.0\n");
  EvalOptions one;
  EvalOptions four;
  four.threads = 4;
  EvalReport a = run_benchmark(ds, Strategy::AvgSim, m.res, one);
  EvalReport b = run_benchmark(ds, Strategy::AvgSim, m.res, four);
  CHECK(a.pearson == b.pearson); // bitwise
  CHECK(a.spearman == b.spearman);
  CHECK(a.covered == b.covered);
  CHECK(a.word_backoffs == b.word_backoffs);
  CHECK(a.uncovered_pairs == b.uncovered_pairs);
}

TEST_CASE("antonym adjustment counts the pairs it changed") {
  MiniEval m;
  Dataset ds = m.dataset("sunrise sunset 1.1\n"
                         "digit number 8.0\n"
                         "bright brilliant 9.0\n");
  EvalOptions opt;
  opt.antonym_adjust = true;
  EvalReport adj = run_benchmark(ds, Strategy::MaxSim, m.res, opt);
  EvalReport raw = run_benchmark(ds, Strategy::MaxSim, m.res, EvalOptions{});
  CHECK(adj.adjusted == 1);
  CHECK(raw.adjusted == 0);
  // only the antonym pair moved, by exactly /5
  double plain = max_sim("sunrise", "sunset", m.res);
  CHECK(antonym_adjust(plain, "sunrise", "sunset", *m.res.db, m.res.policy) ==
        plain / 5.0);
  CHECK(adj.pearson != raw.pearson);
}

TEST_CASE("word-to-sense scoring works for every sense-capable strategy") {
  MiniEval m;
  std::string sunrise_key, sunset_key;
  for (std::uint32_t r = 0; r < m.senses.size(); ++r) {
    const auto &w = m.senses.word(r);
    if (w.rfind("sunrise#", 0) == 0)
      sunrise_key = w;
    if (w.rfind("sunset#", 0) == 0)
      sunset_key = w;
  }
  REQUIRE(!sunrise_key.empty());
  REQUIRE(!sunset_key.empty());

  Dataset ds = m.dataset(sunrise_key + "\tsunup\t9.0\n" + sunset_key +
                             "\tsunup\t2.0\n" + sunrise_key +
                             "\tdigit\t1.0\n",
                         DatasetFormat::CLSS);
  for (Strategy s :
       {Strategy::S2W, Strategy::S2A, Strategy::MaxSim, Strategy::AvgSim}) {
    EvalReport rep = run_benchmark(ds, s, m.res, EvalOptions{});
    CHECK(rep.covered == 3);
    CHECK(rep.total == 3);
  }
  // directly check one s2w value
  auto srow = *m.senses.find(sunrise_key);
  auto wrow = *lookup(m.words, "sunup", m.res.policy);
  CHECK(s2w(sunrise_key, "sunup", m.res) ==
        cosine(m.senses.vec(srow), m.words.vec(wrow)));
}

TEST_CASE("strategy and dataset shapes must agree") {
  MiniEval m;
  Dataset words_only = m.dataset("sunrise sunset 1.1\ndigit number 8.0\n");
  CHECK_THROWS_AS(
      (void)run_benchmark(words_only, Strategy::S2W, m.res, EvalOptions{}),
      UncomputableError);
  CHECK_THROWS_AS(
      (void)run_benchmark(words_only, Strategy::AvgSimC, m.res,
                          EvalOptions{}),
      UncomputableError);

  Dataset ws = m.dataset("sunrise#n#00000001\tsunup\t9.0\n",
                         DatasetFormat::CLSS);
  EvalOptions anti;
  anti.antonym_adjust = true;
  CHECK_THROWS_AS((void)run_benchmark(ws, Strategy::S2W, m.res, anti),
                  UncomputableError);

  EvalResources no_db = m.res;
  no_db.db = nullptr;
  Dataset plain = m.dataset("sunrise sunset 1.1\ndigit number 8.0\n");
  CHECK_THROWS_AS((void)run_benchmark(plain, Strategy::MaxSim, no_db, anti),
                  IntegrityError);

  Dataset sparse = m.dataset("ghost demon 5.0\nsunrise sunset 1.1\n");
  CHECK_THROWS_AS(
      (void)run_benchmark(sparse, Strategy::MaxSim, m.res, EvalOptions{}),
      UncomputableError); // fewer than 2 covered pairs

  VectorStore other_words(2);
  other_words.add("sunrise", std::vector<float>{1.0f, 0.0f});
  EvalResources mismatched = m.res;
  mismatched.words = &other_words;
  CHECK_THROWS_AS(
      (void)run_benchmark(plain, Strategy::MaxSim, mismatched, EvalOptions{}),
      IntegrityError); // dim 2 words against dim 3 senses
}

TEST_CASE("machine line prints the five summary fields") {
  EvalReport rep;
  rep.dataset = "toy";
  rep.strategy = "maxsim";
  rep.pearson = 0.912345678;
  rep.spearman = -0.25;
  rep.covered = 63;
  rep.total = 65;
  CHECK(machine_line(rep) == "toy maxsim 0.912346 -0.250000 63 65");

  std::ostringstream os;
  rep.word_backoffs = 2;
  rep.uncovered_pairs = {"a:b"};
  print_report(os, rep);
  auto text = os.str();
  CHECK(text.find("dataset:   toy") != std::string::npos);
  CHECK(text.find("covered:   63/65") != std::string::npos);
  CHECK(text.find("2 via word vectors") != std::string::npos);
  CHECK(text.find("uncovered: a:b") != std::string::npos);
}
