#include <doctest.h>

#include <cmath>
#include <set>

#include "almsp/error.hpp"
#include "almsp/features.hpp"
#include "fixtures.hpp"

using namespace almsp;

namespace {

Example lf_only(const std::string& id, const std::string& lf, const std::string& en = "x") {
  Example e(id, lf);
  e.set_utterance("en", en);
  return e;
}

double weight(const TfidfModel& m, const SparseVector& v, const std::string& unit) {
  auto it = m.vocabulary.find(unit);
  REQUIRE(it != m.vocabulary.end());
  return v.coeff(it->second);
}

// Independent FNV-1a over the padded trigram, for the embedding oracle.
std::uint64_t fnv(const std::string& s) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

} // namespace

TEST_CASE("tf-idf on a single document has zero idf") {
  const std::vector<Example> xs{lf_only("a", fixtures::kBorderLf)};
  const TfidfModel m = fit_tfidf(xs);
  CHECK(m.dimension() == 11);
  CHECK(m.doc_count == 1);
  for (Eigen::Index i = 0; i < m.idf.size(); ++i) CHECK(m.idf(i) == 0.0);
  CHECK(featurize_lf(m, xs[0]).nonZeros() == 0);
}

TEST_CASE("tf-idf on disjoint documents") {
  const std::vector<Example> xs{lf_only("a", "( f x )"), lf_only("b", "( g y )")};
  const TfidfModel m = fit_tfidf(xs);
  CHECK(m.dimension() == 6);
  for (Eigen::Index i = 0; i < m.idf.size(); ++i) CHECK(m.idf(i) == doctest::Approx(std::log(2.0)).epsilon(1e-15));
}

TEST_CASE("tf-idf on toy4") {
  const auto c = fixtures::toy4();
  const TfidfModel m = fit_tfidf(c.examples);
  CHECK(m.idf(m.vocabulary.at("answer")) == 0.0);
  // "( loc austin )" is in 1 of 4 documents, texas in 3 of 4.
  CHECK(m.idf(m.vocabulary.at("( loc austin )")) == doctest::Approx(std::log(4.0)));
  CHECK(m.idf(m.vocabulary.at("texas")) == doctest::Approx(std::log(4.0 / 3.0)));
  CHECK(m.idf(m.vocabulary.at("( state next_to )")) == doctest::Approx(std::log(2.0)));
}

TEST_CASE("featurize weights are tf times idf") {
  const std::vector<Example> xs{lf_only("a", fixtures::kBorderLf), lf_only("b", "( lambda $0 e ( city:t $0 ) )"),
                                lf_only("c", "( count $0 ( river:t $0 ) )"),
                                lf_only("d", "( lambda $0 e ( loc:t $0 s0 ) )")};
  const TfidfModel m = fit_tfidf(xs);
  const SparseVector v = featurize_lf(m, xs[0]);
  CHECK(weight(m, v, "( state:t $0 )") == doctest::Approx(std::log(4.0)));
  CHECK(weight(m, v, "$0") == 0.0);
  // "e" occurs once in the LF and in 3 of 4 documents.
  CHECK(weight(m, v, "e") == doctest::Approx(std::log(4.0 / 3.0)));
  for (SparseVector::InnerIterator it(v); it; ++it) CHECK(it.value() > 0.0);

  const SparseVector none = featurize_lf(m, parse_lf("( zzz qqq )"));
  CHECK(none.nonZeros() == 0);
  CHECK_THROWS(fit_tfidf(std::vector<Example>{}));
}

TEST_CASE("term frequency is a raw count") {
  const std::vector<Example> xs{lf_only("a", "( f x x )"), lf_only("b", "( g )")};
  const TfidfModel m = fit_tfidf(xs);
  CHECK(weight(m, featurize_lf(m, xs[0]), "x") == doctest::Approx(2 * std::log(2.0)));
}

TEST_CASE("co-occurrence single example") {
  const std::vector<Example> xs{lf_only("E1", "( f )", "a b")};
  const auto m = fit_cooccurrence(xs, "en", UnitKind::Atoms);
  const auto row = m.conditional("f");
  REQUIRE(row.size() == 2);
  CHECK(row[0].second == doctest::Approx(0.5));
  CHECK(row[1].second == doctest::Approx(0.5));
}

TEST_CASE("co-occurrence across two examples sharing an LF") {
  const std::vector<Example> xs{lf_only("E1", "( f )", "a"), lf_only("E2", "( f )", "b")};
  const auto m = fit_cooccurrence(xs, "en", UnitKind::Atoms);
  CHECK(m.count("f", "a") == 1);
  CHECK(m.count("f", "b") == 1);
  CHECK(m.row_total("f") == 2);
  CHECK(m.row_entropy("f") == doctest::Approx(std::log(2.0)));
}

TEST_CASE("co-occurrence counts per-example presence") {
  const std::vector<Example> xs{lf_only("E1", "( f x x )", "a a a b")};
  const auto m = fit_cooccurrence(xs, "en", UnitKind::Atoms);
  CHECK(m.count("x", "a") == 1);
  CHECK(m.row_total("x") == 2);
}

TEST_CASE("co-occurrence on toy4") {
  const auto c = fixtures::toy4();
  const auto m = fit_cooccurrence(c.examples, "en", UnitKind::Both);
  // next_to: {what, states, border, texas} + {which, states, neighbor, texas}
  const double h_next = -(4 * (1.0 / 8) * std::log(1.0 / 8) + 2 * (2.0 / 8) * std::log(2.0 / 8));
  CHECK(m.row_entropy("next_to") == doctest::Approx(h_next).epsilon(1e-12));
  CHECK(m.row_entropy("loc") == doctest::Approx(std::log(3.0)).epsilon(1e-12));
  CHECK(m.row_entropy("next_to") > m.row_entropy("loc"));
  std::set<std::string> support;
  for (const auto& [tok, p] : m.conditional("next_to")) support.insert(tok);
  CHECK(support == std::set<std::string>{"what", "states", "border", "texas", "which", "neighbor"});
  for (const auto& unit : {"answer", "texas", "( answer state )", "( next_to texas )"}) {
    CHECK(m.conditional_probabilities(unit).sum() == doctest::Approx(1.0).epsilon(1e-12));
  }
  CHECK_FALSE(m.has_row("nonexistent"));

  Corpus missing = c;
  missing.examples[0].erase_utterance("en");
  CHECK_THROWS(fit_cooccurrence(missing.examples, "en", UnitKind::Both));
}

TEST_CASE("utterance tokens") {
  CHECK(tokenize_utterance("Capital of  Texas?") == std::vector<std::string>{"capital", "of", "texas"});
  CHECK(tokenize_utterance("") .empty());
}

TEST_CASE("unit kinds") {
  const LfTree t = parse_lf("( f ( g x ) )");
  CHECK(distinct_units(t, UnitKind::Atoms) == std::vector<std::string>{"f", "g", "x"});
  CHECK(distinct_units(t, UnitKind::Compounds) == std::vector<std::string>{"( f g )", "( g x )"});
  CHECK(distinct_units(t, UnitKind::Both).size() == 5);
  CHECK(parse_unit_kind("compounds") == UnitKind::Compounds);
  CHECK_THROWS(parse_unit_kind("leaves"));
}

TEST_CASE("hashed trigram embedding") {
  const HashedNgramEmbedder emb;
  CHECK(emb.grams("abc") == std::vector<std::string>{"#ab", "abc", "bc#"});
  const SparseVector v = emb.embed("abc");
  std::set<std::uint64_t> buckets;
  for (const char* g : {"#ab", "abc", "bc#"}) buckets.insert(fnv(g) & 0xFFFF);
  REQUIRE(buckets.size() == 3);
  CHECK(v.nonZeros() == 3);
  for (auto b : buckets) CHECK(v.coeff(static_cast<Eigen::Index>(b)) == doctest::Approx(1.0 / std::sqrt(3.0)));
  CHECK(v.norm() == doctest::Approx(1.0));

  CHECK(emb.embed("What  States") .isApprox(emb.embed("what states")));
  CHECK(emb.embed("abc").dot(emb.embed("xyz")) == 0.0);
  CHECK_THROWS(emb.embed("   "));
}

TEST_CASE("embedding cosine properties") {
  const HashedNgramEmbedder emb;
  const char* texts[] = {"what states border texas", "which states neighbor texas", "where is austin", "a"};
  for (const char* a : texts) {
    CHECK(emb.embed(a).dot(emb.embed(a)) == doctest::Approx(1.0));
    for (const char* b : texts) {
      const double s = emb.embed(a).dot(emb.embed(b));
      CHECK(s >= 0.0);
      CHECK(s <= 1.0 + 1e-12);
      CHECK(s == doctest::Approx(emb.embed(b).dot(emb.embed(a))));
    }
  }
}

TEST_CASE("precomputed embeddings") {
  const auto e = PrecomputedEmbedder::parse("{\"id\":\"a\",\"vector\":[3,4]}\n{\"id\":\"b\",\"vector\":[0,1]}\n");
  CHECK(e.dimension() == 2);
  const SparseVector v = e.embed("a", "ignored");
  CHECK(v.coeff(0) == doctest::Approx(3.0));
  CHECK(v.coeff(1) == doctest::Approx(4.0));
  CHECK_THROWS(e.embed("zz", "x"));
  CHECK_THROWS(PrecomputedEmbedder::parse("{\"id\":\"a\",\"vector\":[1]}\n{\"id\":\"b\",\"vector\":[0,1]}\n"));
}

TEST_CASE("dense compaction round trip") {
  SparseVector a(100), b(100);
  a.insert(3) = 1.5;
  a.insert(70) = -2.0;
  b.insert(70) = 4.0;
  const std::vector<SparseVector> vs{a, b};
  const DenseColumns d = to_dense_columns(vs);
  CHECK(d.matrix.rows() == 2);
  CHECK(d.to_sparse(d.matrix.col(0)).isApprox(a));
  CHECK(d.to_sparse(d.matrix.col(1)).isApprox(b));
}
