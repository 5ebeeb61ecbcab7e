#pragma once

#include <cmath>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "almsp/corpus.hpp"
#include "almsp/lf.hpp"
#include "almsp/parser.hpp"
#include "almsp/rng.hpp"

namespace fixtures {

inline const char* kBorderLf = "( lambda $0 e ( and ( state:t $0 ) ( next_to:t $0 s0 ) ) )";

// E1/E2 share an LF and differ lexically; E4 is short on purpose.
inline almsp::Corpus toy4() {
  using almsp::Example;
  struct Row {
    const char *id, *lf, *en, *de;
  };
  const Row rows[] = {
      {"E1", "( answer ( state ( next_to texas ) ) )", "what states border texas", "welche staaten grenzen an texas"},
      {"E2", "( answer ( state ( next_to texas ) ) )", "which states neighbor texas",
       "welche staaten sind nachbarn von texas"},
      {"E3", "( answer ( loc austin ) )", "where is austin", "wo liegt austin"},
      {"E4", "( answer ( capital texas ) )", "capital of texas", "hauptstadt von texas"},
  };
  almsp::Corpus c;
  for (const auto& r : rows) {
    Example e(r.id, r.lf);
    e.set_utterance("en", r.en);
    e.set_utterance("de", r.de);
    c.examples.push_back(std::move(e));
  }
  return c;
}

inline std::vector<almsp::LabeledUtterance> pairs(const almsp::Corpus& c, const std::string& lang) {
  std::vector<almsp::LabeledUtterance> out;
  for (const auto& e : c.examples) {
    if (e.has_utterance(lang)) out.push_back({e.id, lang, e.utterance(lang), e.lf});
  }
  return out;
}

inline almsp::LfNode random_node(almsp::Rng& rng, int depth) {
  static const std::vector<std::string> labels{"answer", "state",  "next_to:t", "$0", "$1",   "e",
                                               "lambda", "and",    "count",     "s0", "x.y", "<=",
                                               "loc_1",  "\"tx\"", "a-b",       "0",  "river"};
  almsp::LfNode n;
  n.label = labels[rng.index(labels.size())];
  if (depth > 0) {
    const auto kids = rng.index(4);
    for (std::uint64_t i = 0; i < kids; ++i) n.children.push_back(random_node(rng, depth - 1));
  }
  return n;
}

inline almsp::LfTree random_tree(almsp::Rng& rng) {
  return almsp::LfTree{random_node(rng, 1 + static_cast<int>(rng.index(5)))};
}

struct TempDir {
  std::filesystem::path path;
  TempDir() {
    std::string tmpl = (std::filesystem::temp_directory_path() / "almsp-test-XXXXXX").string();
    path = mkdtemp(tmpl.data());
  }
  ~TempDir() { std::filesystem::remove_all(path); }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

} // namespace fixtures
