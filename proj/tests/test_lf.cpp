#include <doctest.h>

#include <set>

#include "almsp/error.hpp"
#include "almsp/lf.hpp"
#include "fixtures.hpp"

using namespace almsp;

TEST_CASE("parse the figure-1 logical form") {
  const LfTree t = parse_lf(fixtures::kBorderLf);
  CHECK(t.root.label == "lambda");
  REQUIRE(t.root.children.size() == 3);
  CHECK(t.root.children[0].label == "$0");
  CHECK(t.root.children[1].label == "e");
  const LfNode& a = t.root.children[2];
  CHECK(a.label == "and");
  REQUIRE(a.children.size() == 2);
  CHECK(a.children[0].label == "state:t");
  REQUIRE(a.children[0].children.size() == 1);
  CHECK(a.children[0].children[0].label == "$0");
  CHECK(a.children[1].label == "next_to:t");
  REQUIRE(a.children[1].children.size() == 2);
  CHECK(a.children[1].children[0].label == "$0");
  CHECK(a.children[1].children[1].label == "s0");
  CHECK(render_lf(t) == fixtures::kBorderLf);
}

TEST_CASE("single node") {
  const LfTree t = parse_lf("( a )");
  CHECK(t.root.label == "a");
  CHECK(t.root.is_leaf());
  CHECK(render_lf(t) == "( a )");
  CHECK(extract_atoms(t) == std::vector<Atom>{"a"});
  CHECK(extract_compounds(t).empty());
}

TEST_CASE("malformed input is rejected") {
  for (const char* bad : {"", "   ", "( a ( b )", "( )", "( ( a ) )", "a", "( a ) )", "( a ) b", ")", "( a b"}) {
    CAPTURE(bad);
    CHECK_THROWS_AS(parse_lf(bad), ParseError);
  }
}

TEST_CASE("tokenizer separates parentheses") {
  CHECK(tokenize_lf("(a (b c))") == std::vector<std::string>{"(", "a", "(", "b", "c", ")", ")"});
  CHECK(tokenize_lf("  ( a\t)\n") == std::vector<std::string>{"(", "a", ")"});
  CHECK(normalize_lf("(a  (b c))") == "( a ( b c ) )");
}

TEST_CASE("compact spacing parses like the canonical form") {
  CHECK(parse_lf("(f(g x)y)") == parse_lf("( f ( g x ) y )"));
}

TEST_CASE("atoms keep multiplicity in pre-order") {
  const auto atoms = extract_atoms(parse_lf(fixtures::kBorderLf));
  CHECK(atoms == std::vector<Atom>{"lambda", "$0", "e", "and", "state:t", "$0", "next_to:t", "$0", "s0"});
  CHECK(std::set<Atom>(atoms.begin(), atoms.end()).size() == 7);
  CHECK(std::count(atoms.begin(), atoms.end(), "$0") == 3);
  CHECK(extract_atoms(parse_lf("( f x x )")) == std::vector<Atom>{"f", "x", "x"});
}

TEST_CASE("compounds are node plus child heads") {
  std::vector<std::string> got;
  for (const auto& c : extract_compounds(parse_lf(fixtures::kBorderLf))) got.push_back(c.str());
  CHECK(got == std::vector<std::string>{"( lambda $0 e and )", "( and state:t next_to:t )", "( state:t $0 )",
                                        "( next_to:t $0 s0 )"});
  got.clear();
  for (const auto& c : extract_compounds(parse_lf("( f ( g x ) )"))) got.push_back(c.str());
  CHECK(got == std::vector<std::string>{"( f g )", "( g x )"});
}

TEST_CASE("compound multiplicity is preserved") {
  const auto cs = extract_compounds(parse_lf("( and ( p x ) ( p x ) )"));
  REQUIRE(cs.size() == 3);
  CHECK(cs[1] == cs[2]);
}

TEST_CASE("property: round trip and counting identities on random trees") {
  Rng rng(11);
  for (int i = 0; i < 300; ++i) {
    const LfTree t = fixtures::random_tree(rng);
    const std::string s = render_lf(t);
    CAPTURE(s);
    REQUIRE(parse_lf(s) == t);
    const auto atoms = extract_atoms(t);
    const auto comps = extract_compounds(t);
    CHECK(atoms.size() == t.node_count());
    CHECK(comps.size() == t.internal_count());
    const std::set<std::string> atom_set(atoms.begin(), atoms.end());
    for (const auto& c : comps) {
      CHECK(atom_set.count(c.head) == 1);
      CHECK(!c.child_heads.empty());
      for (const auto& h : c.child_heads) CHECK(atom_set.count(h) == 1);
    }
  }
}
