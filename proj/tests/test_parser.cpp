#include <doctest.h>

#include <cmath>
#include <functional>
#include <memory>
#include <sstream>

#include <json.hpp>

#include "almsp/error.hpp"
#include "almsp/features.hpp"
#include "almsp/parser.hpp"
#include "fixtures.hpp"

using namespace almsp;

namespace {

using Factory = std::function<std::unique_ptr<ParserAdapter>()>;

std::vector<std::pair<const char*, Factory>> adapters() {
  return {
      {"surrogate", [] { return std::make_unique<SurrogateParser>(); }},
      {"external", [] { return std::make_unique<ExternalParser>(std::vector<std::string>{ALMSP_BRIDGE_PATH}); }},
  };
}

// Cosine over padded character trigram counts, computed without hashing.
double trigram_cosine(const std::string& a, const std::string& b) {
  auto grams = [](const std::string& s) {
    std::map<std::string, double> g;
    const std::string p = "#" + s + "#";
    for (std::size_t i = 0; i + 3 <= p.size(); ++i) g[p.substr(i, 3)] += 1;
    return g;
  };
  const auto ga = grams(a), gb = grams(b);
  double dot = 0, na = 0, nb = 0;
  for (const auto& [k, v] : ga) {
    na += v * v;
    auto it = gb.find(k);
    if (it != gb.end()) dot += v * it->second;
  }
  for (const auto& [k, v] : gb) nb += v * v;
  return dot / std::sqrt(na * nb);
}

} // namespace

TEST_CASE("parser adapter contract") {
  const auto toy = fixtures::toy4();
  const auto en = fixtures::pairs(toy, "en");
  for (const auto& [name, make] : adapters()) {
    SUBCASE(name) {
      auto p = make();
      p->train(en);

      // memorized training set
      for (const auto& x : en) CHECK(p->predict(x.text) == x.lf);
      CHECK(p->evaluate(en) == 1.0);

      // scores are log-probabilities, and the prediction is the most likely LF
      const std::vector<std::string> probes{"what states border texas", "rivers in austin", "capital texas", "zzz"};
      for (const auto& u : probes) {
        const auto pred = p->predict(u);
        const double top = p->score(u, pred);
        for (const auto& x : en) {
          const double s = p->score(u, x.lf);
          CHECK(s <= 0.0);
          CHECK(top >= s);
        }
      }
      CHECK(p->score("where is austin", "( answer ( loc austin ) )") == doctest::Approx(0.0).epsilon(1e-9));
      CHECK(p->score("where is austin", "( never seen )") < p->score("where is austin", "( answer ( loc austin ) )"));

      // evaluate follows predict
      std::vector<LabeledUtterance> test{{"t1", "en", "where is austin", "( answer ( loc austin ) )"},
                                         {"t2", "en", "where is austin", "( answer ( capital texas ) )"}};
      CHECK(p->evaluate(test) == doctest::Approx(0.5));

      // held-out paraphrase
      std::vector<LabeledUtterance> no_e2;
      for (const auto& x : en)
        if (x.id != "E2") no_e2.push_back(x);
      p->train(no_e2);
      std::string oracle_id;
      double best = -1;
      for (const auto& x : no_e2) {
        const double s = trigram_cosine("which states neighbor texas", x.text);
        if (s > best) {
          best = s;
          oracle_id = x.id;
        }
      }
      CHECK(oracle_id == "E1");
      CHECK(p->predict("which states neighbor texas") == toy.find("E1")->lf);

      // ties go to the smaller id
      p->train(std::vector<LabeledUtterance>{{"b", "en", "same words", "( b )"}, {"a", "en", "same words", "( a )"}});
      CHECK(p->predict("same words") == "( a )");

      // multilingual training data
      auto both = en;
      const auto de = fixtures::pairs(toy, "de");
      both.insert(both.end(), de.begin(), de.end());
      p->train(both);
      for (const auto& x : de) CHECK(p->predict(x.text) == x.lf);
    }
  }
}

TEST_CASE("surrogate model") {
  const auto en = fixtures::pairs(fixtures::toy4(), "en");
  const auto m = surrogate_train(en);
  CHECK(m->pair_count() == 4);
  CHECK_THROWS_AS(surrogate_train(std::vector<LabeledUtterance>{}), AdapterError);
  SurrogateParser p;
  CHECK_THROWS_AS(p.predict("x"), AdapterError);

  // score = ln(max cosine + eps) - ln(1 + eps)
  const double cos = embed_utterance("where is texas").dot(embed_utterance("where is austin"));
  const double want = std::log(cos + SurrogateModel::kEpsilon) - std::log(1 + SurrogateModel::kEpsilon);
  CHECK(m->score("where is texas", "( answer ( loc austin ) )") == doctest::Approx(want).epsilon(1e-12));
  CHECK(m->score("where is texas", "(answer (loc   austin))") == doctest::Approx(want).epsilon(1e-12));
}

TEST_CASE("exact match accuracy") {
  const std::vector<std::string> a{"( a )", "( b c )"}, b{"(  a )", "( b\tc )"}, c{"( x )", "( y )"};
  CHECK(exact_match_accuracy(a, b) == 1.0);
  CHECK(exact_match_accuracy(a, c) == 0.0);
  CHECK(exact_match_accuracy(a, std::vector<std::string>{"( a )", "( z )"}) == 0.5);
  CHECK_THROWS(exact_match_accuracy(a, std::vector<std::string>{"( a )"}));
}

TEST_CASE("wire protocol served in-process") {
  fixtures::TempDir dir;
  write_labeled_corpus(fixtures::pairs(fixtures::toy4(), "en"), dir.file("train.jsonl"));
  std::stringstream in, out;
  in << nlohmann::json{{"cmd", "predict"}, {"utterance", "x"}}.dump() << "\n"
     << nlohmann::json{{"cmd", "train"}, {"corpus", dir.file("train.jsonl")}}.dump() << "\n"
     << nlohmann::json{{"cmd", "predict"}, {"utterance", "where is austin"}}.dump() << "\n"
     << nlohmann::json{{"cmd", "score"}, {"utterance", "where is austin"}, {"lf", "( answer ( loc austin ) )"}}.dump()
     << "\n"
     << nlohmann::json{{"cmd", "evaluate"}, {"corpus", dir.file("train.jsonl")}}.dump() << "\n"
     << "{not json\n"
     << nlohmann::json{{"cmd", "fly"}}.dump() << "\n";
  serve_surrogate_protocol(in, out);
  std::vector<nlohmann::json> r;
  std::string line;
  while (std::getline(out, line)) r.push_back(nlohmann::json::parse(line));
  REQUIRE(r.size() == 7);
  CHECK(r[0]["ok"] == false);
  CHECK(r[1]["ok"] == true);
  CHECK(r[2]["result"] == "( answer ( loc austin ) )");
  CHECK(r[3]["result"].get<double>() == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(r[4]["result"].get<double>() == 1.0);
  CHECK(r[5]["ok"] == false);
  CHECK(r[6]["ok"] == false);
}

TEST_CASE("labeled corpus files keep ids and languages") {
  fixtures::TempDir dir;
  std::vector<LabeledUtterance> data{{"E1", "en", "a b", "( a )"}, {"E1", "de", "c d", "( a )"}};
  write_labeled_corpus(data, dir.file("x.jsonl"));
  const auto back = read_labeled_corpus(dir.file("x.jsonl"));
  REQUIRE(back.size() == 2);
  CHECK(back[0].id == "E1");
  CHECK(back[0].lang == "en");
  CHECK(back[1].id == "E1");
  CHECK(back[1].text == "c d");
}

TEST_CASE("external parser failures surface as adapter errors") {
  ExternalParser p({ALMSP_BRIDGE_PATH});
  CHECK_THROWS_AS(p.predict("untrained"), AdapterError);
  CHECK_THROWS_AS(ExternalParser({}), AdapterError);
  ExternalParser missing({"/nonexistent/parser-binary"});
  CHECK_THROWS_AS(missing.predict("x"), AdapterError);
}
