#include <doctest.h>

#include <atomic>
#include <cmath>
#include <thread>

#include "almsp/error.hpp"
#include "almsp/translation.hpp"
#include "fixtures.hpp"

using namespace almsp;

TEST_CASE("gold reveal oracle") {
  const auto toy = fixtures::toy4();
  GoldRevealOracle oracle(toy);
  std::vector<Example> batch{Example("E3", "( answer ( loc austin ) )"), Example("E1", "x")};
  const auto out = oracle.translate(batch, "en", "de", 1);
  CHECK(out.size() == 2);
  CHECK(out.at("E3") == "wo liegt austin");
  CHECK(out.at("E1") == "welche staaten grenzen an texas");
  std::vector<Example> bad{Example("E9", "( x )")};
  CHECK_THROWS_AS(oracle.translate(bad, "en", "de", 1), OracleError);
  CHECK_THROWS_AS(oracle.translate(batch, "en", "fr", 1), OracleError);
}

TEST_CASE("target distribution counts") {
  std::vector<LabeledUtterance> data{{"a", "de", "u1", "( y )"}, {"b", "de", "u1", "(y)"}, {"c", "de", "u2", "( y )"}};
  const auto d = fit_target_distribution(data);
  CHECK(d.lf_count() == 1);
  const auto& r = d.row("( y )");
  REQUIRE(r.size() == 2);
  CHECK(r[0].utterance == "u1");
  CHECK(r[0].probability == doctest::Approx(2.0 / 3.0));
  CHECK(r[1].probability == doctest::Approx(1.0 / 3.0));
  CHECK(d.max_probability("( y )") == doctest::Approx(2.0 / 3.0));
  CHECK_FALSE(d.contains("( z )"));
  CHECK_THROWS(d.row("( z )"));
  CHECK_THROWS(fit_target_distribution(std::vector<LabeledUtterance>{}));
}

TEST_CASE("target distribution on toy corpus") {
  const auto d = fit_target_distribution(fixtures::pairs(fixtures::toy4(), "de"));
  CHECK(d.lf_count() == 3);
  const auto p = d.probabilities("( answer ( state ( next_to texas ) ) )");
  const double h = -(p.array() * p.array().log()).sum();
  CHECK(h == doctest::Approx(std::log(2.0)));
  CHECK(d.max_probability("( answer ( loc austin ) )") == 1.0);
}

TEST_CASE("n-best rows are renormalized") {
  std::vector<LabeledUtterance> data;
  for (int i = 0; i < 5; ++i) data.push_back({"a" + std::to_string(i), "de", "a", "( y )"});
  for (int i = 0; i < 3; ++i) data.push_back({"b" + std::to_string(i), "de", "b", "( y )"});
  for (int i = 0; i < 2; ++i) data.push_back({"c" + std::to_string(i), "de", "c", "( y )"});
  const auto d = fit_target_distribution(data);
  const auto top = d.nbest("( y )", 2);
  REQUIRE(top.size() == 2);
  CHECK(top[0].utterance == "a");
  CHECK(top[0].probability == doctest::Approx(0.625));
  CHECK(top[1].probability == doctest::Approx(0.375));
  CHECK(d.nbest("( y )", 10).size() == 3);
  CHECK_THROWS_AS(d.nbest("( y )", 0), ConfigError);
}

TEST_CASE("machine translation stub") {
  const std::map<std::string, std::string> lex{{"states", "staaten"}, {"texas", "texas"}, {"border", "grenzen"}};
  NoisyLexiconTranslator none("en", "de", 1, 0.0, lex);
  CHECK(none.translate("What states border Texas", "en", "de") == "what staaten grenzen texas");
  CHECK(none.translate("staaten grenzen", "de", "en") == "states border");
  CHECK_THROWS_AS(none.translate("x", "en", "fr"), OracleError);
  CHECK_THROWS_AS(none.translate("   ", "en", "de"), OracleError);

  NoisyLexiconTranslator a("en", "de", 7, 0.5), b("en", "de", 7, 0.5), c("en", "de", 8, 0.5);
  const std::string text = "one two three four five six seven eight nine ten eleven twelve";
  CHECK(a.translate(text, "en", "de") == b.translate(text, "en", "de"));
  int dropped = 0, differs = 0;
  for (int i = 0; i < 50; ++i) {
    const std::string t = text + " n" + std::to_string(i);
    const auto out = a.translate(t, "en", "de");
    CHECK_FALSE(out.empty());
    dropped += static_cast<int>(tokenize_utterance(t).size() - tokenize_utterance(out).size());
    differs += out != c.translate(t, "en", "de");
  }
  // 650 tokens at p = 0.5
  CHECK(dropped > 250);
  CHECK(dropped < 400);
  CHECK(differs > 40);

  NoisyLexiconTranslator heavy("en", "de", 3, 0.99);
  for (int i = 0; i < 20; ++i) CHECK(tokenize_utterance(heavy.translate("a b c " + std::to_string(i), "en", "de")).size() >= 1);
  CHECK_THROWS_AS(NoisyLexiconTranslator("en", "de", 1, 1.0), ConfigError);
}

TEST_CASE("lexicon parsing") {
  const auto lex = parse_lexicon("a\tb\r\n\nc\td e\n");
  CHECK(lex.size() == 2);
  CHECK(lex.at("c") == "d e");
  CHECK_THROWS_AS(parse_lexicon("nocolumn\n"), CorpusError);
  CHECK_THROWS_AS(load_lexicon("/nonexistent/lexicon.tsv"), CorpusError);
}

TEST_CASE("translation channel") {
  auto ch = std::make_shared<TranslationChannel>();
  std::vector<Example> batch{Example("E1", "( a )"), Example("E2", "( b )")};
  batch[0].set_utterance("en", "first");
  batch[1].set_utterance("en", "second");

  SUBCASE("no attached service") {
    HumanSessionOracle o(ch);
    CHECK_THROWS_AS(o.translate(batch, "en", "de", 1), OracleError);
    HumanSessionOracle none(nullptr);
    CHECK_THROWS_AS(none.translate(batch, "en", "de", 1), OracleError);
  }

  SUBCASE("rendezvous") {
    ch->attach();
    CHECK(ch->submit("E1", "x") == SubmitOutcome::NoBatch);
    ch->preload("E2", "zweite");
    HumanSessionOracle o(ch, true);
    TranslationMap result;
    std::thread worker([&] { result = o.translate(batch, "en", "de", 4); });
    REQUIRE(ch->wait_for_batch(std::chrono::seconds(5)));
    CHECK(ch->round() == 4);
    const auto items = ch->batch();
    REQUIRE(items.size() == 2);
    CHECK(items[0].source == "first");
    CHECK(items[0].lf == "( a )");
    const auto pending = ch->pending();
    REQUIRE(pending.size() == 1);
    CHECK(pending[0].id == "E1");
    CHECK(ch->submit("E9", "x") == SubmitOutcome::UnknownId);
    CHECK(ch->submit("E1", "") == SubmitOutcome::Empty);
    CHECK(ch->submit("E2", "other") == SubmitOutcome::Duplicate);
    CHECK(ch->submit("E1", "erste") == SubmitOutcome::Accepted);
    worker.join();
    CHECK(result == TranslationMap{{"E1", "erste"}, {"E2", "zweite"}});
    CHECK_FALSE(ch->has_batch());
    CHECK(ch->submit("E1", "again") == SubmitOutcome::NoBatch);
  }

  SUBCASE("cancel releases the waiter") {
    ch->attach();
    HumanSessionOracle o(ch);
    std::atomic<bool> threw{false};
    std::thread worker([&] {
      try {
        o.translate(batch, "en", "de", 1);
      } catch (const OracleError&) {
        threw = true;
      }
    });
    REQUIRE(ch->wait_for_batch(std::chrono::seconds(5)));
    ch->cancel();
    worker.join();
    CHECK(threw);
  }
}
