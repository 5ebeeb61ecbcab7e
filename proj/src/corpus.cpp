#include "almsp/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "almsp/error.hpp"
#include "almsp/lf.hpp"
#include "almsp/rng.hpp"

namespace almsp {

using nlohmann::json;

void AccessAudit::record(std::string_view lang) {
  std::lock_guard lock(mu_);
  auto it = reads_.find(lang);
  if (it == reads_.end()) {
    reads_.emplace(std::string(lang), 1);
  } else {
    ++it->second;
  }
}

std::size_t AccessAudit::reads(std::string_view lang) const {
  std::lock_guard lock(mu_);
  auto it = reads_.find(lang);
  return it == reads_.end() ? 0 : it->second;
}

void AccessAudit::reset() {
  std::lock_guard lock(mu_);
  reads_.clear();
}

bool Example::has_utterance(std::string_view lang) const { return utterances_.find(lang) != utterances_.end(); }

const std::string* Example::find_utterance(std::string_view lang) const {
  auto it = utterances_.find(lang);
  if (it == utterances_.end()) return nullptr;
  if (audit_) audit_->record(lang);
  return &it->second;
}

const std::string& Example::utterance(std::string_view lang) const {
  const auto* u = find_utterance(lang);
  if (!u) throw CorpusError("example '" + id + "' has no utterance for language '" + std::string(lang) + "'");
  return *u;
}

void Example::set_utterance(std::string lang, std::string text) {
  utterances_.insert_or_assign(std::move(lang), std::move(text));
}

void Example::erase_utterance(std::string_view lang) {
  auto it = utterances_.find(lang);
  if (it != utterances_.end()) utterances_.erase(it);
}

std::vector<std::string> Example::languages() const {
  std::vector<std::string> out;
  for (const auto& [k, v] : utterances_) out.push_back(k);
  return out;
}

const Example* Corpus::find(std::string_view id) const {
  for (const auto& e : examples) {
    if (e.id == id) return &e;
  }
  return nullptr;
}

void Corpus::attach_audit(const std::shared_ptr<AccessAudit>& audit) {
  for (auto& e : examples) e.attach_audit(audit);
}

std::unordered_map<std::string, std::size_t> Corpus::index() const {
  std::unordered_map<std::string, std::size_t> idx;
  for (std::size_t i = 0; i < examples.size(); ++i) {
    if (!idx.emplace(examples[i].id, i).second) {
      throw CorpusError("duplicate id '" + examples[i].id + "'");
    }
  }
  return idx;
}

Corpus parse_corpus(std::string_view text, std::string source_lang, std::string target_lang) {
  Corpus corpus;
  corpus.source_lang = std::move(source_lang);
  corpus.target_lang = std::move(target_lang);
  std::unordered_map<std::string, std::size_t> seen;

  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (std::all_of(line.begin(), line.end(), [](unsigned char c) { return std::isspace(c); })) continue;
    const std::string where = "line " + std::to_string(lineno);
    json rec;
    try {
      rec = json::parse(line);
    } catch (const json::parse_error& e) {
      throw CorpusError(where + ": malformed record: " + e.what());
    }
    if (!rec.is_object()) throw CorpusError(where + ": record is not an object");
    for (const char* field : {"id", "lf", "utterances"}) {
      if (!rec.contains(field)) throw CorpusError(where + ": missing required field '" + field + "'");
    }
    for (const auto& [k, v] : rec.items()) {
      if (k != "id" && k != "lf" && k != "utterances") {
        throw CorpusError(where + ": unexpected field '" + k + "'");
      }
    }
    if (!rec["id"].is_string() || !rec["lf"].is_string() || !rec["utterances"].is_object()) {
      throw CorpusError(where + ": field of the wrong type");
    }
    Example ex(rec["id"].get<std::string>(), rec["lf"].get<std::string>());
    if (ex.id.empty()) throw CorpusError(where + ": empty id");
    if (!seen.emplace(ex.id, lineno).second) {
      throw CorpusError(where + ": duplicate id '" + ex.id + "' (first seen on line " +
                        std::to_string(seen[ex.id]) + ")");
    }
    try {
      parse_lf(ex.lf);
    } catch (const ParseError& e) {
      throw CorpusError(where + ": example '" + ex.id + "': unparseable LF: " + e.what());
    }
    for (const auto& [lang, u] : rec["utterances"].items()) {
      if (!u.is_string()) throw CorpusError(where + ": utterance for '" + lang + "' is not a string");
      ex.set_utterance(lang, u.get<std::string>());
    }
    if (!corpus.source_lang.empty() && !ex.has_utterance(corpus.source_lang)) {
      throw CorpusError(where + ": example '" + ex.id + "' lacks a '" + corpus.source_lang + "' utterance");
    }
    corpus.examples.push_back(std::move(ex));
  }
  return corpus;
}

Corpus load_corpus(const std::string& path, CorpusFormat format, std::string source_lang,
                   std::string target_lang) {
  if (format != CorpusFormat::Jsonl) throw CorpusError("unsupported corpus format");
  std::ifstream in(path);
  if (!in) throw CorpusError("cannot open corpus file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_corpus(buf.str(), std::move(source_lang), std::move(target_lang));
}

std::string serialize_corpus(const Corpus& corpus) {
  std::string out;
  for (const auto& ex : corpus.examples) {
    json utts = json::object();
    for (const auto& lang : ex.languages()) utts[lang] = ex.utterance(lang);
    json rec = {{"id", ex.id}, {"lf", ex.lf}, {"utterances", utts}};
    out += rec.dump();
    out += '\n';
  }
  return out;
}

void save_corpus(const Corpus& corpus, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw CorpusError("cannot write corpus file '" + path + "'");
  out << serialize_corpus(corpus);
}

std::pair<Corpus, Corpus> split(const Corpus& corpus, const SplitSpec& spec) {
  if (corpus.empty()) throw CorpusError("cannot split an empty corpus");
  if (!(spec.dev_fraction >= 0.0 && spec.dev_fraction < 1.0)) {
    throw CorpusError("dev fraction must lie in [0, 1)");
  }
  const std::size_t n = corpus.size();
  std::size_t n_dev = static_cast<std::size_t>(round_half_up(spec.dev_fraction * static_cast<double>(n)));
  if (spec.dev_fraction > 0.0) n_dev = std::max<std::size_t>(n_dev, 1);
  if (n_dev >= n) throw CorpusError("dev fraction leaves the training split empty");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(spec.seed);
  rng.shuffle(order);
  std::vector<bool> in_dev(n, false);
  for (std::size_t i = 0; i < n_dev; ++i) in_dev[order[i]] = true;

  Corpus train, dev;
  for (Corpus* c : {&train, &dev}) {
    c->source_lang = corpus.source_lang;
    c->target_lang = corpus.target_lang;
  }
  for (std::size_t i = 0; i < n; ++i) {
    (in_dev[i] ? dev : train).examples.push_back(corpus.examples[i]);
  }
  return {std::move(train), std::move(dev)};
}

std::vector<std::string> read_id_list(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw CorpusError("cannot open id list '" + path + "'");
  std::vector<std::string> ids;
  std::string line;
  while (std::getline(in, line)) {
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
    if (!line.empty()) ids.push_back(line);
  }
  return ids;
}

void write_id_list(const std::vector<std::string>& ids, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw CorpusError("cannot write id list '" + path + "'");
  for (const auto& id : ids) out << id << '\n';
}

} // namespace almsp
