#pragma once

#include <map>
#include <string>
#include <vector>

#include "almsp/corpus.hpp"

namespace almsp {

/// Bilingual toy geography corpus: every template is an LF pattern over one
/// state entity with three English paraphrases. The target side is a
/// token-by-token rendering through synthetic_lexicon().
struct SyntheticSpec {
  std::size_t templates = 30;        // at most 30
  std::size_t per_template = 20;
  std::vector<std::string> entities{"texas", "ohio",  "utah",   "iowa",   "maine",
                                    "idaho", "kansas", "nevada", "oregon", "alaska"};
  std::string source_lang = "en";
  std::string target_lang = "de";
};

Corpus synthetic_corpus(const SyntheticSpec& spec = {});

/// English word -> pseudo-word. Entities map to themselves.
std::map<std::string, std::string> synthetic_lexicon(const SyntheticSpec& spec = {});

std::string lexicon_translate(const std::string& text, const std::map<std::string, std::string>& lexicon);

} // namespace almsp
