#include "almsp/synthetic.hpp"

#include <array>
#include <cstdio>
#include <set>
#include <sstream>

#include "almsp/error.hpp"
#include "almsp/lf.hpp"
#include "almsp/rng.hpp"

namespace almsp {

namespace {

struct Template {
  const char* lf;  // "$E" is the entity slot
  std::array<const char*, 3> phrasings;
};

// clang-format off
const std::array<Template, 30> kTemplates{{
  {"( answer ( capital $E ) )",
   {"what is the capital of $E", "name the capital of $E", "which city is the capital of $E"}},
  {"( answer ( population $E ) )",
   {"how many people live in $E", "what is the population of $E", "how many citizens does $E have"}},
  {"( answer ( area $E ) )",
   {"how big is $E", "what is the area of $E", "how large is $E in square miles"}},
  {"( answer ( state ( next_to $E ) ) )",
   {"which states border $E", "what states are next to $E", "name the neighbors of $E"}},
  {"( answer ( count ( state ( next_to $E ) ) ) )",
   {"how many states border $E", "count the states next to $E", "how many neighbors does $E have"}},
  {"( answer ( river ( loc $E ) ) )",
   {"which rivers are in $E", "what rivers flow in $E", "name the rivers of $E"}},
  {"( answer ( count ( river ( loc $E ) ) ) )",
   {"how many rivers are in $E", "count the rivers of $E", "how many rivers does $E have"}},
  {"( answer ( city ( loc $E ) ) )",
   {"which cities are in $E", "what cities does $E have", "name the cities of $E"}},
  {"( answer ( count ( city ( loc $E ) ) ) )",
   {"how many cities are in $E", "count the cities of $E", "how many cities does $E have"}},
  {"( answer ( largest ( city ( loc $E ) ) ) )",
   {"what is the largest city in $E", "which city in $E is biggest", "name the biggest city of $E"}},
  {"( answer ( smallest ( city ( loc $E ) ) ) )",
   {"what is the smallest city in $E", "which city in $E is tiniest", "name the smallest town of $E"}},
  {"( answer ( longest ( river ( loc $E ) ) ) )",
   {"what is the longest river in $E", "which river in $E is longest", "name the longest river of $E"}},
  {"( answer ( shortest ( river ( loc $E ) ) ) )",
   {"what is the shortest river in $E", "which river in $E is shortest", "name the shortest river of $E"}},
  {"( answer ( high_point $E ) )",
   {"what is the highest point of $E", "where is the top of $E", "name the high point in $E"}},
  {"( answer ( low_point $E ) )",
   {"what is the lowest point of $E", "where is the bottom of $E", "name the low point in $E"}},
  {"( answer ( elevation ( high_point $E ) ) )",
   {"how high is the highest point of $E", "what is the elevation of the top of $E", "how tall is the high point in $E"}},
  {"( answer ( elevation ( low_point $E ) ) )",
   {"how high is the lowest point of $E", "what is the elevation of the bottom of $E", "how deep is the low point in $E"}},
  {"( answer ( lake ( loc $E ) ) )",
   {"which lakes are in $E", "what lakes does $E have", "name the lakes of $E"}},
  {"( answer ( mountain ( loc $E ) ) )",
   {"which mountains are in $E", "what mountains does $E have", "name the mountains of $E"}},
  {"( answer ( highest ( mountain ( loc $E ) ) ) )",
   {"what is the highest mountain in $E", "which mountain in $E is tallest", "name the tallest peak of $E"}},
  {"( answer ( population ( capital $E ) ) )",
   {"how many people live in the capital of $E", "what is the population of the capital of $E",
    "how big is the capital city of $E"}},
  {"( answer ( density $E ) )",
   {"what is the population density of $E", "how dense is $E", "how crowded is $E"}},
  {"( answer ( largest ( state ( next_to $E ) ) ) )",
   {"what is the largest state next to $E", "which neighbor of $E is biggest", "name the biggest state bordering $E"}},
  {"( answer ( population ( largest ( city ( loc $E ) ) ) ) )",
   {"how many people live in the largest city of $E", "what is the population of the biggest city in $E",
    "how big is the largest city in $E"}},
  {"( answer ( river ( traverse $E ) ) )",
   {"which rivers run through $E", "what rivers cross $E", "name the rivers traversing $E"}},
  {"( answer ( count ( river ( traverse $E ) ) ) )",
   {"how many rivers run through $E", "count the rivers crossing $E", "how many rivers traverse $E"}},
  {"( answer ( state ( next_to ( state ( next_to $E ) ) ) ) )",
   {"which states border the neighbors of $E", "what states are next to the states bordering $E",
    "name the states adjacent to the neighbors of $E"}},
  {"( answer ( area ( state ( next_to $E ) ) ) )",
   {"how big are the states next to $E", "what is the area of the states bordering $E",
    "how large are the neighbors of $E"}},
  {"( answer ( capital ( state ( next_to $E ) ) ) )",
   {"what are the capitals of the states next to $E", "which capitals border $E",
    "name the capitals of the neighbors of $E"}},
  {"( answer ( population ( state ( next_to $E ) ) ) )",
   {"how many people live in the states next to $E", "what is the population of the neighbors of $E",
    "how populous are the states bordering $E"}},
}};
// clang-format on

const std::array<const char*, 2> kClosers{"", "please"};

std::string fill(std::string_view pattern, const std::string& entity) {
  std::string out;
  for (std::size_t i = 0; i < pattern.size(); ++i) {
    if (pattern.compare(i, 2, "$E") == 0) {
      out += entity;
      ++i;
    } else {
      out += pattern[i];
    }
  }
  return out;
}

std::string pseudo_word(const std::string& w, std::size_t attempt) {
  static constexpr std::string_view kOnsets = "bdfgklmnprstvwz";
  static constexpr std::string_view kVowels = "aeiou";
  std::uint64_t h = fnv1a(w, fnv1a(std::to_string(attempt)));
  const std::size_t syllables = 1 + (w.size() + 1) / 3;
  std::string out;
  for (std::size_t s = 0; s < syllables; ++s) {
    out += kOnsets[h % kOnsets.size()];
    h /= kOnsets.size();
    out += kVowels[h % kVowels.size()];
    h /= kVowels.size();
    if (h == 0) h = fnv1a(out);
  }
  if (h % 3 == 0) out += 'n';
  return out;
}

void check_spec(const SyntheticSpec& spec) {
  if (spec.templates == 0 || spec.templates > kTemplates.size()) {
    throw ConfigError("synthetic corpus: templates must lie in [1, " + std::to_string(kTemplates.size()) + "]");
  }
  if (spec.per_template == 0) throw ConfigError("synthetic corpus: per_template must be positive");
  if (spec.entities.empty()) throw ConfigError("synthetic corpus: no entities");
}

} // namespace

std::map<std::string, std::string> synthetic_lexicon(const SyntheticSpec& spec) {
  check_spec(spec);
  const std::set<std::string> entities(spec.entities.begin(), spec.entities.end());
  std::set<std::string> words;
  auto add_words = [&](std::string_view text) {
    std::istringstream in{std::string(text)};
    std::string w;
    while (in >> w) {
      if (w != "$E") words.insert(w);
    }
  };
  for (const auto& t : kTemplates) {
    for (const char* p : t.phrasings) add_words(p);
  }
  for (const char* o : kClosers) add_words(o);

  std::map<std::string, std::string> lex;
  std::set<std::string> used(entities.begin(), entities.end());
  for (const auto& w : words) {
    if (entities.count(w)) continue;
    std::size_t attempt = 0;
    std::string p = pseudo_word(w, attempt);
    while (used.count(p) || words.count(p)) p = pseudo_word(w, ++attempt);
    used.insert(p);
    lex.emplace(w, p);
  }
  for (const auto& e : entities) lex.emplace(e, e);
  return lex;
}

std::string lexicon_translate(const std::string& text, const std::map<std::string, std::string>& lexicon) {
  std::istringstream in(text);
  std::string w, out;
  while (in >> w) {
    auto it = lexicon.find(w);
    if (!out.empty()) out += ' ';
    out += it == lexicon.end() ? w : it->second;
  }
  return out;
}

Corpus synthetic_corpus(const SyntheticSpec& spec) {
  check_spec(spec);
  const auto lex = synthetic_lexicon(spec);
  Corpus c;
  c.source_lang = spec.source_lang;
  c.target_lang = spec.target_lang;
  const std::size_t ne = spec.entities.size();
  for (std::size_t t = 0; t < spec.templates; ++t) {
    const Template& tpl = kTemplates[t];
    for (std::size_t i = 0; i < spec.per_template; ++i) {
      const std::string& entity = spec.entities[i % ne];
      // Repeats of one (template, entity) pair keep the phrasing and differ
      // by a closing word; every further pair of repeats moves to the next phrasing.
      const std::size_t repeat = i / ne;
      const std::size_t phr = (t + i % ne + repeat / kClosers.size()) % 3;
      std::string text = fill(tpl.phrasings[phr], entity);
      const char* closer = kClosers[repeat % kClosers.size()];
      if (*closer) text += std::string(" ") + closer;

      char id[32];
      std::snprintf(id, sizeof id, "t%02zu-%02zu", t, i);
      Example ex(id, normalize_lf(fill(tpl.lf, entity)));
      ex.set_utterance(spec.source_lang, text);
      ex.set_utterance(spec.target_lang, lexicon_translate(text, lex));
      c.examples.push_back(std::move(ex));
    }
  }
  return c;
}

} // namespace almsp
