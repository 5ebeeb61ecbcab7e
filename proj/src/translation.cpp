#include "almsp/translation.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "almsp/error.hpp"
#include "almsp/features.hpp"
#include "almsp/lf.hpp"
#include "almsp/rng.hpp"

namespace almsp {

GoldRevealOracle::GoldRevealOracle(Corpus gold) : gold_(std::move(gold)), index_(gold_.index()) {}

TranslationMap GoldRevealOracle::translate(std::span<const Example> batch, std::string_view,
                                           std::string_view target_lang, int) {
  TranslationMap out;
  for (const auto& ex : batch) {
    auto it = index_.find(ex.id);
    if (it == index_.end()) throw OracleError("gold corpus has no example '" + ex.id + "'");
    const auto* t = gold_.examples[it->second].find_utterance(target_lang);
    if (!t || t->empty()) {
      throw OracleError("gold corpus has no '" + std::string(target_lang) + "' translation for '" + ex.id + "'");
    }
    out.emplace(ex.id, *t);
  }
  return out;
}

TranslationMap TranslationChannel::request(int round, std::vector<PendingItem> items) {
  std::unique_lock lock(mu_);
  if (!attached_) throw OracleError("no annotation service is attached to this campaign");
  if (cancelled_) throw OracleError("translation channel cancelled");
  round_ = round;
  items_ = std::move(items);
  submitted_.clear();
  open_ = true;
  apply_preloaded_locked();
  cv_.notify_all();
  cv_.wait(lock, [&] { return cancelled_ || submitted_.size() == items_.size(); });
  open_ = false;
  if (cancelled_) throw OracleError("translation channel cancelled");
  cv_.notify_all();
  return submitted_;
}

void TranslationChannel::apply_preloaded_locked() {
  for (const auto& item : items_) {
    auto it = preloaded_.find(item.id);
    if (it != preloaded_.end()) {
      submitted_.emplace(item.id, it->second);
      preloaded_.erase(it);
    }
  }
}

void TranslationChannel::attach() {
  std::lock_guard lock(mu_);
  attached_ = true;
}

void TranslationChannel::detach() {
  std::lock_guard lock(mu_);
  attached_ = false;
}

bool TranslationChannel::attached() const {
  std::lock_guard lock(mu_);
  return attached_;
}

void TranslationChannel::cancel() {
  std::lock_guard lock(mu_);
  cancelled_ = true;
  cv_.notify_all();
}

SubmitOutcome TranslationChannel::submit(const std::string& id, const std::string& text) {
  std::lock_guard lock(mu_);
  if (!open_) return SubmitOutcome::NoBatch;
  const bool known = std::any_of(items_.begin(), items_.end(), [&](const PendingItem& p) { return p.id == id; });
  if (!known) return SubmitOutcome::UnknownId;
  if (text.empty()) return SubmitOutcome::Empty;
  if (!submitted_.emplace(id, text).second) return SubmitOutcome::Duplicate;
  cv_.notify_all();
  return SubmitOutcome::Accepted;
}

void TranslationChannel::preload(const std::string& id, const std::string& text) {
  std::lock_guard lock(mu_);
  preloaded_.emplace(id, text);
}

bool TranslationChannel::has_batch() const {
  std::lock_guard lock(mu_);
  return open_;
}

int TranslationChannel::round() const {
  std::lock_guard lock(mu_);
  return round_;
}

std::vector<PendingItem> TranslationChannel::batch() const {
  std::lock_guard lock(mu_);
  return open_ ? items_ : std::vector<PendingItem>{};
}

std::vector<PendingItem> TranslationChannel::pending() const {
  std::lock_guard lock(mu_);
  std::vector<PendingItem> out;
  if (!open_) return out;
  for (const auto& item : items_) {
    if (!submitted_.count(item.id)) out.push_back(item);
  }
  return out;
}

TranslationMap TranslationChannel::submitted() const {
  std::lock_guard lock(mu_);
  return submitted_;
}

bool TranslationChannel::wait_for_batch(std::chrono::milliseconds timeout) const {
  std::unique_lock lock(mu_);
  return cv_.wait_for(lock, timeout, [&] { return open_ || cancelled_; }) && open_;
}

TranslationMap HumanSessionOracle::translate(std::span<const Example> batch, std::string_view source_lang,
                                             std::string_view, int round) {
  if (!channel_) throw OracleError("no annotation service is attached to this campaign");
  std::vector<PendingItem> items;
  for (const auto& ex : batch) {
    items.push_back({ex.id, ex.utterance(source_lang), show_lf_ ? ex.lf : std::string()});
  }
  return channel_->request(round, std::move(items));
}

NoisyLexiconTranslator::NoisyLexiconTranslator(std::string source_lang, std::string target_lang, std::uint64_t seed,
                                               double dropout, std::map<std::string, std::string> lexicon)
    : source_lang_(std::move(source_lang)), target_lang_(std::move(target_lang)), seed_(seed), dropout_(dropout) {
  if (!(dropout >= 0.0 && dropout < 1.0)) throw ConfigError("MT dropout must lie in [0, 1)");
  for (const auto& [s, t] : lexicon) {
    forward_.emplace(s, t);
    backward_.emplace(t, s);
  }
}

std::string NoisyLexiconTranslator::translate(std::string_view text, std::string_view from,
                                              std::string_view to) const {
  const std::map<std::string, std::string, std::less<>>* table = nullptr;
  if (from == source_lang_ && to == target_lang_) {
    table = &forward_;
  } else if (from == target_lang_ && to == source_lang_) {
    table = &backward_;
  } else {
    throw OracleError("MT stub does not translate " + std::string(from) + " -> " + std::string(to));
  }
  const auto tokens = tokenize_utterance(text);
  if (tokens.empty()) throw OracleError("MT stub: empty input");
  std::string key(from);
  key += '>';
  key += to;
  key += '|';
  key += text;
  Rng rng(derive_seed(seed_, key));
  std::vector<std::string> kept;
  for (const auto& tok : tokens) {
    const bool drop = rng.uniform() < dropout_;
    if (drop) continue;
    auto it = table->find(tok);
    kept.push_back(it == table->end() ? tok : it->second);
  }
  if (kept.empty()) {
    auto it = table->find(tokens.front());
    kept.push_back(it == table->end() ? tokens.front() : it->second);
  }
  std::string out;
  for (const auto& k : kept) {
    if (!out.empty()) out += ' ';
    out += k;
  }
  return out;
}

std::map<std::string, std::string> parse_lexicon(std::string_view text) {
  std::map<std::string, std::string> lex;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos || tab == 0 || tab + 1 == line.size()) {
      throw CorpusError("lexicon line " + std::to_string(lineno) + ": expected source<TAB>target");
    }
    lex.emplace(line.substr(0, tab), line.substr(tab + 1));
  }
  return lex;
}

std::map<std::string, std::string> load_lexicon(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw CorpusError("cannot open lexicon '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_lexicon(buf.str());
}

bool TargetDistribution::contains(std::string_view lf) const { return rows_.count(normalize_lf(lf)) > 0; }

const std::vector<TargetDistribution::Entry>& TargetDistribution::row(std::string_view lf) const {
  auto it = rows_.find(normalize_lf(lf));
  if (it == rows_.end()) throw Error("target distribution has no row for LF '" + std::string(lf) + "'");
  return it->second;
}

Eigen::VectorXd TargetDistribution::probabilities(std::string_view lf) const {
  const auto& r = row(lf);
  Eigen::VectorXd p(static_cast<Eigen::Index>(r.size()));
  for (std::size_t i = 0; i < r.size(); ++i) p(static_cast<Eigen::Index>(i)) = r[i].probability;
  return p;
}

std::vector<TargetDistribution::Entry> TargetDistribution::nbest(std::string_view lf, std::size_t n) const {
  if (n == 0) throw ConfigError("n-best size must be >= 1");
  auto r = row(lf);
  std::stable_sort(r.begin(), r.end(), [](const Entry& a, const Entry& b) {
    return a.probability > b.probability || (a.probability == b.probability && a.utterance < b.utterance);
  });
  if (r.size() > n) r.resize(n);
  double mass = 0;
  for (const auto& e : r) mass += e.probability;
  for (auto& e : r) e.probability /= mass;
  return r;
}

double TargetDistribution::max_probability(std::string_view lf) const {
  double m = 0;
  for (const auto& e : row(lf)) m = std::max(m, e.probability);
  return m;
}

TargetDistribution fit_target_distribution(std::span<const LabeledUtterance> target_data) {
  if (target_data.empty()) throw Error("target distribution: no target-language data");
  std::unordered_map<std::string, std::map<std::string, std::size_t>> counts;
  for (const auto& d : target_data) ++counts[normalize_lf(d.lf)][d.text];
  TargetDistribution dist;
  for (const auto& [lf, row] : counts) {
    std::size_t total = 0;
    for (const auto& [u, c] : row) total += c;
    auto& out = dist.rows_[lf];
    for (const auto& [u, c] : row) out.push_back({u, static_cast<double>(c) / static_cast<double>(total)});
  }
  return dist;
}

} // namespace almsp
