#pragma once

#include <chrono>
#include <condition_variable>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

#include "almsp/corpus.hpp"
#include "almsp/parser.hpp"

namespace almsp {

using TranslationMap = std::map<std::string, std::string>;

/// Human translator g^ht: exactly one non-empty utterance per requested id.
class TranslationOracle {
public:
  virtual ~TranslationOracle() = default;
  virtual TranslationMap translate(std::span<const Example> batch, std::string_view source_lang,
                                   std::string_view target_lang, int round) = 0;
};

/// Reveals translations already present in a gold corpus.
class GoldRevealOracle final : public TranslationOracle {
public:
  explicit GoldRevealOracle(Corpus gold);
  TranslationMap translate(std::span<const Example> batch, std::string_view source_lang,
                           std::string_view target_lang, int round) override;

private:
  Corpus gold_;
  std::unordered_map<std::string, std::size_t> index_;
};

struct PendingItem {
  std::string id;
  std::string source;
  std::string lf;
};

enum class SubmitOutcome { Accepted, UnknownId, Duplicate, Empty, NoBatch };

/// Rendezvous between a campaign waiting on human translations and the
/// service that collects them.
class TranslationChannel {
public:
  /// Blocks until every item has a submission. Throws OracleError when no
  /// service is attached or the channel is cancelled.
  TranslationMap request(int round, std::vector<PendingItem> items);

  void attach();
  void detach();
  bool attached() const;
  void cancel();

  /// First write wins.
  SubmitOutcome submit(const std::string& id, const std::string& text);
  /// Submissions applied as soon as a batch containing their ids is posted.
  void preload(const std::string& id, const std::string& text);

  bool has_batch() const;
  int round() const;
  std::vector<PendingItem> batch() const;
  std::vector<PendingItem> pending() const;
  TranslationMap submitted() const;
  /// Waits until a batch is open; false on timeout or cancel.
  bool wait_for_batch(std::chrono::milliseconds timeout) const;

private:
  void apply_preloaded_locked();

  mutable std::mutex mu_;
  mutable std::condition_variable cv_;
  bool attached_ = false;
  bool cancelled_ = false;
  bool open_ = false;
  int round_ = 0;
  std::vector<PendingItem> items_;
  TranslationMap submitted_;
  TranslationMap preloaded_;
};

class HumanSessionOracle final : public TranslationOracle {
public:
  explicit HumanSessionOracle(std::shared_ptr<TranslationChannel> channel, bool show_lf = false)
      : channel_(std::move(channel)), show_lf_(show_lf) {}
  TranslationMap translate(std::span<const Example> batch, std::string_view source_lang,
                           std::string_view target_lang, int round) override;

private:
  std::shared_ptr<TranslationChannel> channel_;
  bool show_lf_;
};

/// Black-box MT system g^mt.
class MachineTranslator {
public:
  virtual ~MachineTranslator() = default;
  virtual std::string translate(std::string_view text, std::string_view from, std::string_view to) const = 0;
};

/// Token dropout plus optional lexicon substitution.
///
/// Tokens come from tokenize_utterance. Going source -> target, a token
/// with a lexicon entry is replaced by it; going target -> source, the
/// inverted lexicon is used (first entry wins). Each token is then dropped
/// with probability `dropout`, drawn from a stream keyed on (seed, text,
/// direction, position); at least one token always survives.
class NoisyLexiconTranslator final : public MachineTranslator {
public:
  NoisyLexiconTranslator(std::string source_lang, std::string target_lang, std::uint64_t seed,
                         double dropout = 0.1, std::map<std::string, std::string> lexicon = {});
  std::string translate(std::string_view text, std::string_view from, std::string_view to) const override;

private:
  std::string source_lang_;
  std::string target_lang_;
  std::uint64_t seed_;
  double dropout_;
  std::map<std::string, std::string, std::less<>> forward_;
  std::map<std::string, std::string, std::less<>> backward_;
};

/// Tab-separated "source<TAB>target" lines.
std::map<std::string, std::string> load_lexicon(const std::string& path);
std::map<std::string, std::string> parse_lexicon(std::string_view text);

/// Empirical P(x_t | y) per LF.
class TargetDistribution {
public:
  struct Entry {
    std::string utterance;
    double probability;
  };

  bool contains(std::string_view lf) const;
  /// Row sorted by utterance.
  const std::vector<Entry>& row(std::string_view lf) const;
  Eigen::VectorXd probabilities(std::string_view lf) const;
  /// Top n by probability (ties by utterance), renormalized.
  std::vector<Entry> nbest(std::string_view lf, std::size_t n) const;
  double max_probability(std::string_view lf) const;
  std::size_t lf_count() const { return rows_.size(); }

private:
  friend TargetDistribution fit_target_distribution(std::span<const LabeledUtterance>);
  std::unordered_map<std::string, std::vector<Entry>> rows_;
};

/// Rows keyed by the whitespace-normalized LF.
TargetDistribution fit_target_distribution(std::span<const LabeledUtterance> target_data);

} // namespace almsp
