#include "almsp/parser.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>

#include <json.hpp>

#include "almsp/error.hpp"
#include "almsp/lf.hpp"

namespace almsp {

using nlohmann::json;

double exact_match_accuracy(std::span<const std::string> predictions, std::span<const std::string> golds) {
  if (predictions.size() != golds.size()) throw Error("exact_match_accuracy: length mismatch");
  if (predictions.empty()) return 0.0;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    if (tokenize_lf(predictions[i]) == tokenize_lf(golds[i])) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(predictions.size());
}

double ParserAdapter::evaluate(std::span<const LabeledUtterance> test) {
  std::vector<std::string> pred, gold;
  pred.reserve(test.size());
  gold.reserve(test.size());
  for (const auto& t : test) {
    pred.push_back(predict(t.text));
    gold.push_back(t.lf);
  }
  return exact_match_accuracy(pred, gold);
}

SurrogateModel::SurrogateModel(std::span<const LabeledUtterance> data, double temperature)
    : pairs_(data.begin(), data.end()), temperature_(temperature) {
  if (pairs_.empty()) throw AdapterError("surrogate parser: empty training set");
  if (!(temperature > 0.0)) throw AdapterError("surrogate parser: temperature must be positive");
  embeddings_.resize(static_cast<Eigen::Index>(pairs_.size()), embedder_.dimension());
  std::vector<Eigen::Triplet<double>> trips;
  for (std::size_t r = 0; r < pairs_.size(); ++r) {
    const auto v = embedder_.embed(pairs_[r].text);
    for (SparseVector::InnerIterator it(v); it; ++it) {
      trips.emplace_back(static_cast<Eigen::Index>(r), it.index(), it.value());
    }
    normalized_lfs_.push_back(normalize_lf(pairs_[r].lf));
    rows_by_lf_[normalized_lfs_.back()].push_back(static_cast<Eigen::Index>(r));
  }
  embeddings_.setFromTriplets(trips.begin(), trips.end());
}

Eigen::VectorXd SurrogateModel::similarities(std::string_view utterance) const {
  const SparseVector q = embedder_.embed(utterance);
  return embeddings_ * q;
}

std::string SurrogateModel::predict(std::string_view utterance) const {
  const Eigen::VectorXd sim = similarities(utterance);
  Eigen::Index best = 0;
  for (Eigen::Index r = 1; r < sim.size(); ++r) {
    const auto& cand = pairs_[static_cast<std::size_t>(r)].id;
    const auto& cur = pairs_[static_cast<std::size_t>(best)].id;
    if (sim(r) > sim(best) || (sim(r) == sim(best) && cand < cur)) best = r;
  }
  return pairs_[static_cast<std::size_t>(best)].lf;
}

double SurrogateModel::score(std::string_view utterance, std::string_view lf) const {
  double max_sim = 0.0;
  auto it = rows_by_lf_.find(normalize_lf(lf));
  if (it != rows_by_lf_.end()) {
    const Eigen::VectorXd sim = similarities(utterance);
    for (auto r : it->second) max_sim = std::max(max_sim, sim(r));
  }
  const double s = (std::log(max_sim + kEpsilon) - std::log(1.0 + kEpsilon)) / temperature_;
  return std::min(s, 0.0);
}

std::shared_ptr<const SurrogateModel> surrogate_train(std::span<const LabeledUtterance> data, double temperature) {
  return std::make_shared<const SurrogateModel>(data, temperature);
}

const SurrogateModel& SurrogateParser::require_model() const {
  if (!model_) throw AdapterError("surrogate parser used before training");
  return *model_;
}

void SurrogateParser::train(std::span<const LabeledUtterance> data) { model_ = surrogate_train(data, temperature_); }

std::string SurrogateParser::predict(std::string_view utterance) { return require_model().predict(utterance); }

double SurrogateParser::score(std::string_view utterance, std::string_view lf) {
  return require_model().score(utterance, lf);
}

void write_labeled_corpus(std::span<const LabeledUtterance> data, const std::string& path) {
  Corpus c;
  c.source_lang.clear();
  for (const auto& d : data) {
    Example ex(d.id + "@" + d.lang, d.lf);
    ex.set_utterance(d.lang, d.text);
    c.examples.push_back(std::move(ex));
  }
  save_corpus(c, path);
}

std::vector<LabeledUtterance> read_labeled_corpus(const std::string& path) {
  const Corpus c = load_corpus(path, CorpusFormat::Jsonl, "", "");
  std::vector<LabeledUtterance> out;
  for (const auto& ex : c.examples) {
    const auto langs = ex.languages();
    for (const auto& lang : langs) {
      std::string id = ex.id;
      const std::string suffix = "@" + lang;
      if (langs.size() == 1 && id.size() > suffix.size() && id.ends_with(suffix)) {
        id.resize(id.size() - suffix.size());
      }
      out.push_back({id, lang, ex.utterance(lang), ex.lf});
    }
  }
  return out;
}

void serve_surrogate_protocol(std::istream& in, std::ostream& out) {
  SurrogateParser parser;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    json resp;
    try {
      const json req = json::parse(line);
      const std::string cmd = req.at("cmd").get<std::string>();
      if (cmd == "train") {
        const auto data = read_labeled_corpus(req.at("corpus").get<std::string>());
        parser.train(data);
        resp = {{"ok", true}, {"result", {{"pairs", data.size()}}}};
      } else if (cmd == "predict") {
        resp = {{"ok", true}, {"result", parser.predict(req.at("utterance").get<std::string>())}};
      } else if (cmd == "score") {
        resp = {{"ok", true},
                {"result", parser.score(req.at("utterance").get<std::string>(), req.at("lf").get<std::string>())}};
      } else if (cmd == "evaluate") {
        const auto data = read_labeled_corpus(req.at("corpus").get<std::string>());
        resp = {{"ok", true}, {"result", parser.evaluate(data)}};
      } else {
        resp = {{"ok", false}, {"error", "unknown command '" + cmd + "'"}};
      }
    } catch (const std::exception& e) {
      resp = {{"ok", false}, {"error", e.what()}};
    }
    out << resp.dump() << '\n' << std::flush;
  }
}

} // namespace almsp
