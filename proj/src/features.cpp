#include "almsp/features.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "almsp/error.hpp"
#include "almsp/numerics.hpp"
#include "almsp/rng.hpp"

namespace almsp {

UnitKind parse_unit_kind(std::string_view s) {
  if (s == "atoms") return UnitKind::Atoms;
  if (s == "compounds") return UnitKind::Compounds;
  if (s == "both") return UnitKind::Both;
  throw ConfigError("unknown unit kind '" + std::string(s) + "' (expected atoms, compounds or both)");
}

std::string_view to_string(UnitKind u) {
  switch (u) {
    case UnitKind::Atoms: return "atoms";
    case UnitKind::Compounds: return "compounds";
    case UnitKind::Both: return "both";
  }
  return "both";
}

std::vector<std::string> lf_units(const LfTree& tree, UnitKind kind) {
  std::vector<std::string> out;
  if (kind != UnitKind::Compounds) out = extract_atoms(tree);
  if (kind != UnitKind::Atoms) {
    for (const auto& c : extract_compounds(tree)) out.push_back(c.str());
  }
  return out;
}

std::vector<std::string> distinct_units(const LfTree& tree, UnitKind kind) {
  auto u = lf_units(tree, kind);
  std::sort(u.begin(), u.end());
  u.erase(std::unique(u.begin(), u.end()), u.end());
  return u;
}

std::vector<std::string> tokenize_utterance(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if (std::isspace(c)) {
      if (!cur.empty()) out.push_back(std::move(cur));
      cur.clear();
    } else if (c < 0x80 && std::ispunct(c)) {
      continue;
    } else {
      cur += static_cast<char>(c < 0x80 ? std::tolower(c) : c);
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

TfidfModel fit_tfidf(std::span<const Example> examples) {
  if (examples.empty()) throw Error("fit_tfidf: no examples");
  TfidfModel m;
  std::vector<std::size_t> df;
  for (const auto& ex : examples) {
    for (const auto& u : distinct_units(parse_lf(ex.lf))) {
      auto [it, inserted] = m.vocabulary.emplace(u, static_cast<Eigen::Index>(m.names.size()));
      if (inserted) {
        m.names.push_back(u);
        df.push_back(0);
      }
      ++df[static_cast<std::size_t>(it->second)];
    }
  }
  m.doc_count = examples.size();
  m.idf.resize(m.dimension());
  for (Eigen::Index i = 0; i < m.dimension(); ++i) {
    m.idf(i) = std::log(static_cast<double>(m.doc_count) / static_cast<double>(df[static_cast<std::size_t>(i)]));
  }
  return m;
}

SparseVector featurize_lf(const TfidfModel& model, const LfTree& tree) {
  std::map<Eigen::Index, double> tf;
  for (const auto& u : lf_units(tree)) {
    auto it = model.vocabulary.find(u);
    if (it != model.vocabulary.end()) tf[it->second] += 1.0;
  }
  SparseVector v(model.dimension());
  for (const auto& [id, count] : tf) {
    const double w = count * model.idf(id);
    if (w != 0.0) v.insert(id) = w;
  }
  return v;
}

SparseVector featurize_lf(const TfidfModel& model, const Example& example) {
  return featurize_lf(model, parse_lf(example.lf));
}

std::size_t CooccurrenceModel::count(std::string_view unit, std::string_view token) const {
  auto r = rows_.find(unit);
  if (r == rows_.end()) return 0;
  auto c = r->second.find(token);
  return c == r->second.end() ? 0 : c->second;
}

std::size_t CooccurrenceModel::row_total(std::string_view unit) const {
  auto it = totals_.find(unit);
  return it == totals_.end() ? 0 : it->second;
}

std::vector<std::pair<std::string, double>> CooccurrenceModel::conditional(std::string_view unit) const {
  std::vector<std::pair<std::string, double>> out;
  auto r = rows_.find(unit);
  if (r == rows_.end()) return out;
  const double total = static_cast<double>(row_total(unit));
  for (const auto& [tok, c] : r->second) out.emplace_back(tok, static_cast<double>(c) / total);
  return out;
}

Eigen::VectorXd CooccurrenceModel::conditional_probabilities(std::string_view unit) const {
  const auto cond = conditional(unit);
  Eigen::VectorXd p(static_cast<Eigen::Index>(cond.size()));
  for (std::size_t i = 0; i < cond.size(); ++i) p(static_cast<Eigen::Index>(i)) = cond[i].second;
  return p;
}

double CooccurrenceModel::row_entropy(std::string_view unit) const {
  auto it = entropies_.find(unit);
  return it == entropies_.end() ? 0.0 : it->second;
}

CooccurrenceModel fit_cooccurrence(std::span<const Example> examples, std::string_view lang, UnitKind kind) {
  CooccurrenceModel m;
  m.kind_ = kind;
  for (const auto& ex : examples) {
    const auto* utt = ex.find_utterance(lang);
    if (!utt) {
      throw CorpusError("fit_cooccurrence: example '" + ex.id + "' has no '" + std::string(lang) + "' utterance");
    }
    auto tokens = tokenize_utterance(*utt);
    std::sort(tokens.begin(), tokens.end());
    tokens.erase(std::unique(tokens.begin(), tokens.end()), tokens.end());
    for (const auto& t : tokens) ++m.vocab_[t];
    for (const auto& u : distinct_units(parse_lf(ex.lf), kind)) {
      auto& row = m.rows_[u];
      for (const auto& t : tokens) ++row[t];
      m.totals_[u] += tokens.size();
    }
  }
  for (const auto& [u, row] : m.rows_) {
    const Eigen::VectorXd p = m.conditional_probabilities(u);
    m.entropies_[u] = p.size() == 0 ? 0.0 : entropy(p);
  }
  return m;
}

HashedNgramEmbedder::HashedNgramEmbedder(int n, int bits) : n_(n), bits_(bits) {
  if (n < 1 || bits < 1 || bits > 30) throw ConfigError("invalid hashed embedder parameters");
}

std::vector<std::string> HashedNgramEmbedder::grams(std::string_view text) const {
  std::string norm;
  for (char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if (std::isspace(c)) {
      if (!norm.empty() && norm.back() != ' ') norm += ' ';
    } else {
      norm += static_cast<char>(c < 0x80 ? std::tolower(c) : c);
    }
  }
  while (!norm.empty() && norm.back() == ' ') norm.pop_back();
  if (norm.empty()) throw Error("cannot embed an empty utterance");
  const std::string padded = "#" + norm + "#";
  std::vector<std::string> out;
  const auto n = static_cast<std::size_t>(n_);
  if (padded.size() <= n) {
    out.push_back(padded);
    return out;
  }
  for (std::size_t i = 0; i + n <= padded.size(); ++i) out.push_back(padded.substr(i, n));
  return out;
}

Eigen::Index HashedNgramEmbedder::bucket(std::string_view gram) const {
  return static_cast<Eigen::Index>(fnv1a(gram) & ((std::uint64_t{1} << bits_) - 1));
}

SparseVector HashedNgramEmbedder::embed(std::string_view, std::string_view text) const {
  std::map<Eigen::Index, double> counts;
  for (const auto& g : grams(text)) counts[bucket(g)] += 1.0;
  double norm = 0.0;
  for (const auto& [k, c] : counts) norm += c * c;
  norm = std::sqrt(norm);
  SparseVector v(dimension());
  for (const auto& [k, c] : counts) v.insert(k) = c / norm;
  return v;
}

PrecomputedEmbedder PrecomputedEmbedder::parse(std::string_view text) {
  PrecomputedEmbedder e;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json rec;
    try {
      rec = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& err) {
      throw CorpusError("embedding line " + std::to_string(lineno) + ": " + err.what());
    }
    if (!rec.contains("id") || !rec.contains("vector") || !rec["vector"].is_array()) {
      throw CorpusError("embedding line " + std::to_string(lineno) + ": expected id and vector");
    }
    const auto vals = rec["vector"].get<std::vector<double>>();
    const auto dim = static_cast<Eigen::Index>(vals.size());
    if (e.dim_ == 0) e.dim_ = dim;
    if (dim != e.dim_ || dim == 0) {
      throw CorpusError("embedding line " + std::to_string(lineno) + ": inconsistent dimension");
    }
    SparseVector v(dim);
    for (Eigen::Index i = 0; i < dim; ++i) {
      if (vals[static_cast<std::size_t>(i)] != 0.0) v.insert(i) = vals[static_cast<std::size_t>(i)];
    }
    e.vectors_.insert_or_assign(rec["id"].get<std::string>(), std::move(v));
  }
  return e;
}

PrecomputedEmbedder PrecomputedEmbedder::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw CorpusError("cannot open embedding file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

SparseVector PrecomputedEmbedder::embed(std::string_view id, std::string_view) const {
  auto it = vectors_.find(std::string(id));
  if (it == vectors_.end()) throw CorpusError("no precomputed embedding for id '" + std::string(id) + "'");
  return it->second;
}

SparseVector embed_utterance(std::string_view text) {
  static const HashedNgramEmbedder embedder;
  return embedder.embed(text);
}

SparseVector DenseColumns::to_sparse(const Eigen::Ref<const Eigen::VectorXd>& column) const {
  SparseVector v(sparse_dim);
  for (Eigen::Index r = 0; r < column.size(); ++r) {
    if (column(r) != 0.0) v.insert(features[static_cast<std::size_t>(r)]) = column(r);
  }
  return v;
}

DenseColumns to_dense_columns(std::span<const SparseVector> vectors) {
  DenseColumns d;
  std::set<Eigen::Index> support;
  for (const auto& v : vectors) {
    if (d.sparse_dim == 0) d.sparse_dim = v.size();
    if (v.size() != d.sparse_dim) throw NumericError("vectors live in different spaces");
    for (SparseVector::InnerIterator it(v); it; ++it) support.insert(it.index());
  }
  d.features.assign(support.begin(), support.end());
  std::unordered_map<Eigen::Index, Eigen::Index> row_of;
  for (std::size_t r = 0; r < d.features.size(); ++r) row_of[d.features[r]] = static_cast<Eigen::Index>(r);
  d.matrix = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(d.features.size()),
                                   static_cast<Eigen::Index>(vectors.size()));
  for (std::size_t c = 0; c < vectors.size(); ++c) {
    for (SparseVector::InnerIterator it(vectors[c]); it; ++it) {
      d.matrix(row_of[it.index()], static_cast<Eigen::Index>(c)) = it.value();
    }
  }
  return d;
}

} // namespace almsp
