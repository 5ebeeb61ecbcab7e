#pragma once

#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <Eigen/SparseCore>

#include "almsp/features.hpp"

namespace almsp {

/// One (utterance, LF) training or test pair.
struct LabeledUtterance {
  std::string id;
  std::string lang;
  std::string text;
  std::string lf;
};

/// Fraction of pairs whose LF token sequences agree.
double exact_match_accuracy(std::span<const std::string> predictions, std::span<const std::string> golds);

/// The semantic parser P(y | x) seen through train / predict / score /
/// evaluate. score() is a log-probability and never positive.
class ParserAdapter {
public:
  virtual ~ParserAdapter() = default;
  virtual void train(std::span<const LabeledUtterance> data) = 0;
  virtual std::string predict(std::string_view utterance) = 0;
  virtual double score(std::string_view utterance, std::string_view lf) = 0;
  virtual double evaluate(std::span<const LabeledUtterance> test);
};

/// Nearest-neighbour parser over hashed trigram embeddings.
class SurrogateModel {
public:
  static constexpr double kEpsilon = 1e-6;

  explicit SurrogateModel(std::span<const LabeledUtterance> data, double temperature = 1.0);

  std::size_t pair_count() const { return pairs_.size(); }
  const std::vector<LabeledUtterance>& pairs() const { return pairs_; }
  std::string predict(std::string_view utterance) const;
  /// (ln(max cosine to a pair labeled lf + eps) - ln(1 + eps)) / temperature, capped at 0.
  double score(std::string_view utterance, std::string_view lf) const;

private:
  Eigen::VectorXd similarities(std::string_view utterance) const;

  std::vector<LabeledUtterance> pairs_;
  std::vector<std::string> normalized_lfs_;
  std::unordered_map<std::string, std::vector<Eigen::Index>> rows_by_lf_;
  Eigen::SparseMatrix<double, Eigen::RowMajor> embeddings_;
  HashedNgramEmbedder embedder_;
  double temperature_;
};

std::shared_ptr<const SurrogateModel> surrogate_train(std::span<const LabeledUtterance> data,
                                                      double temperature = 1.0);

class SurrogateParser final : public ParserAdapter {
public:
  explicit SurrogateParser(double temperature = 1.0) : temperature_(temperature) {}

  void train(std::span<const LabeledUtterance> data) override;
  std::string predict(std::string_view utterance) override;
  double score(std::string_view utterance, std::string_view lf) override;

  std::shared_ptr<const SurrogateModel> model() const { return model_; }

private:
  const SurrogateModel& require_model() const;

  std::shared_ptr<const SurrogateModel> model_;
  double temperature_;
};

/// Child process speaking newline-delimited JSON on stdin/stdout:
///   {"cmd":"train","corpus":path} {"cmd":"predict","utterance":s}
///   {"cmd":"score","utterance":s,"lf":s} {"cmd":"evaluate","corpus":path}
/// answered by {"ok":true,"result":...} or {"ok":false,"error":s}.
class ExternalParser final : public ParserAdapter {
public:
  explicit ExternalParser(std::vector<std::string> argv);
  ~ExternalParser() override;
  ExternalParser(const ExternalParser&) = delete;
  ExternalParser& operator=(const ExternalParser&) = delete;

  void train(std::span<const LabeledUtterance> data) override;
  std::string predict(std::string_view utterance) override;
  double score(std::string_view utterance, std::string_view lf) override;
  double evaluate(std::span<const LabeledUtterance> test) override;

private:
  std::string request(const std::string& line);
  std::string scratch_file();

  std::mutex mu_;
  int pid_ = -1;
  int to_child_ = -1;
  int from_child_ = -1;
  std::string read_buffer_;
  std::string scratch_dir_;
  int scratch_counter_ = 0;
};

/// Corpus-format file with one record per pair; the record id is
/// "<id>@<lang>" so repeated example ids stay unique.
void write_labeled_corpus(std::span<const LabeledUtterance> data, const std::string& path);
/// Every (record, language) pair of a corpus file.
std::vector<LabeledUtterance> read_labeled_corpus(const std::string& path);

/// Serves the wire protocol with a SurrogateParser until EOF on `in`.
void serve_surrogate_protocol(std::istream& in, std::ostream& out);

} // namespace almsp
