#pragma once

#include <map>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include "almsp/corpus.hpp"
#include "almsp/lf.hpp"

namespace almsp {

using SparseVector = Eigen::SparseVector<double>;

enum class UnitKind { Atoms, Compounds, Both };

UnitKind parse_unit_kind(std::string_view s);
std::string_view to_string(UnitKind u);

/// Atom labels and/or serialized compounds of a tree, with multiplicity.
std::vector<std::string> lf_units(const LfTree& tree, UnitKind kind = UnitKind::Both);
/// Sorted distinct units.
std::vector<std::string> distinct_units(const LfTree& tree, UnitKind kind = UnitKind::Both);

/// Lowercased (ASCII) whitespace tokens with ASCII punctuation stripped.
std::vector<std::string> tokenize_utterance(std::string_view text);

struct TfidfModel {
  std::unordered_map<std::string, Eigen::Index> vocabulary;
  std::vector<std::string> names;  // feature id -> unit
  Eigen::VectorXd idf;
  std::size_t doc_count = 0;

  Eigen::Index dimension() const { return static_cast<Eigen::Index>(names.size()); }
};

/// Vocabulary over every atom and compound; idf = ln(docs / df).
TfidfModel fit_tfidf(std::span<const Example> examples);
/// weight = raw count * idf; unseen units are dropped, zero weights are not stored.
SparseVector featurize_lf(const TfidfModel& model, const Example& example);
SparseVector featurize_lf(const TfidfModel& model, const LfTree& tree);

/// Per-example co-presence counts of (unit, source token).
class CooccurrenceModel {
public:
  std::size_t count(std::string_view unit, std::string_view token) const;
  std::size_t row_total(std::string_view unit) const;
  bool has_row(std::string_view unit) const { return rows_.find(std::string(unit)) != rows_.end(); }
  /// p(token | unit) over the tokens seen with the unit, sorted by token.
  std::vector<std::pair<std::string, double>> conditional(std::string_view unit) const;
  Eigen::VectorXd conditional_probabilities(std::string_view unit) const;
  /// H(p(. | unit)); 0 for an unseen unit.
  double row_entropy(std::string_view unit) const;
  const std::map<std::string, std::size_t, std::less<>>& source_vocab() const { return vocab_; }
  UnitKind unit_kind() const { return kind_; }

private:
  friend CooccurrenceModel fit_cooccurrence(std::span<const Example>, std::string_view, UnitKind);
  std::map<std::string, std::map<std::string, std::size_t, std::less<>>, std::less<>> rows_;
  std::map<std::string, std::size_t, std::less<>> totals_;
  std::map<std::string, double, std::less<>> entropies_;
  std::map<std::string, std::size_t, std::less<>> vocab_;
  UnitKind kind_ = UnitKind::Both;
};

CooccurrenceModel fit_cooccurrence(std::span<const Example> examples, std::string_view lang,
                                   UnitKind kind = UnitKind::Both);

class UtteranceEmbedder {
public:
  virtual ~UtteranceEmbedder() = default;
  virtual SparseVector embed(std::string_view id, std::string_view text) const = 0;
  virtual Eigen::Index dimension() const = 0;
};

/// Character n-gram counts hashed into 2^bits buckets, L2-normalized.
///
/// The text is lowercased (ASCII), whitespace runs collapse to one space,
/// and the result is padded with '#' on both sides; every window of n
/// bytes of the padded string is one gram. A gram lands in bucket
/// fnv1a64(gram) mod 2^bits.
class HashedNgramEmbedder final : public UtteranceEmbedder {
public:
  explicit HashedNgramEmbedder(int n = 3, int bits = 16);
  SparseVector embed(std::string_view id, std::string_view text) const override;
  SparseVector embed(std::string_view text) const { return embed({}, text); }
  Eigen::Index dimension() const override { return Eigen::Index{1} << bits_; }
  std::vector<std::string> grams(std::string_view text) const;
  Eigen::Index bucket(std::string_view gram) const;

private:
  int n_;
  int bits_;
};

/// Vectors read from newline-delimited {"id": ..., "vector": [...]} records.
class PrecomputedEmbedder final : public UtteranceEmbedder {
public:
  static PrecomputedEmbedder load(const std::string& path);
  static PrecomputedEmbedder parse(std::string_view text);
  SparseVector embed(std::string_view id, std::string_view text) const override;
  Eigen::Index dimension() const override { return dim_; }

private:
  std::unordered_map<std::string, SparseVector> vectors_;
  Eigen::Index dim_ = 0;
};

SparseVector embed_utterance(std::string_view text);

/// Sparse vectors gathered into a dense matrix over the union of their
/// non-zero coordinates; column i is vector i.
struct DenseColumns {
  Eigen::MatrixXd matrix;
  std::vector<Eigen::Index> features;  // dense row -> sparse coordinate
  Eigen::Index sparse_dim = 0;

  SparseVector to_sparse(const Eigen::Ref<const Eigen::VectorXd>& column) const;
};

DenseColumns to_dense_columns(std::span<const SparseVector> vectors);

} // namespace almsp
