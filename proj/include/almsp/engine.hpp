#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "almsp/acquisition.hpp"
#include "almsp/corpus.hpp"
#include "almsp/parser.hpp"
#include "almsp/translation.hpp"

namespace almsp {

enum class CampaignMode { AlMsp, Amsp };
enum class OracleKind { GoldReveal, HumanSession };

struct CampaignConfig {
  std::string corpus_path;
  std::string source_lang = "en";
  std::string target_lang = "de";
  CampaignMode mode = CampaignMode::AlMsp;
  OracleKind oracle = OracleKind::GoldReveal;
  /// Accumulative percentages of the training pool, one per round.
  std::vector<double> budget_percents{1, 2, 4, 8, 16, 32};
  AcquisitionConfig acquisition;
  std::string parser = "surrogate";  // or "external"
  std::vector<std::string> parser_command;
  double test_fraction = 0.2;
  std::string lexicon_path;
  std::string embeddings_path;
  double mt_dropout = 0.1;
  std::uint64_t seed = 0;
  std::string output_dir;

  std::size_t rounds() const { return budget_percents.size(); }
  void validate() const;
};

/// Parses "key = value" lines; '#' starts a comment. Keys:
///   corpus source_lang target_lang mode(al-msp|amsp) oracle(gold|human)
///   strategy budget_percents(comma list) alpha beta coef_bias coef_error
///   coef_density coef_semdiv nbest unit(atoms|compounds|both) seed
///   parser(surrogate|external) parser_command test_fraction lexicon
///   embeddings mt_dropout max_error_back_translated kde_bandwidth output_dir
CampaignConfig parse_config(std::string_view text);
CampaignConfig load_config(const std::string& path);
/// Same keys as parse_config, given as a JSON object.
CampaignConfig config_from_json(const nlohmann::json& j);
std::map<std::string, std::string> config_to_map(const CampaignConfig& c);

/// K_q per round: cumulative c_q = max(1, round_half_up(p_q N / 100)),
/// K_q = c_q - c_{q-1}.
std::vector<std::size_t> budget_sizes(std::size_t n, std::span<const double> percents);
std::vector<std::size_t> cumulative_budgets(std::size_t n, std::span<const double> percents);

struct MetricsRecord {
  int round = 0;
  std::size_t cumulative_budget = 0;
  double source_accuracy = 0.0;
  std::optional<double> target_accuracy;
  double compound_coverage = 0.0;
  std::string strategy;
  std::uint64_t seed = 0;

  nlohmann::json to_json() const;
  static MetricsRecord from_json(const nlohmann::json& j);
  friend bool operator==(const MetricsRecord&, const MetricsRecord&) = default;
};

std::string format_metrics(std::span<const MetricsRecord> records);
std::vector<MetricsRecord> parse_metrics(std::string_view text);

/// Distinct compound types among `selected` over those of `pool`.
double compound_coverage(std::span<const Example> selected, std::span<const Example> pool);

struct CampaignState {
  int round = 0;
  std::vector<Example> untranslated;  // source side only
  std::vector<Example> translated;    // with the revealed target utterance
  std::vector<std::vector<std::string>> selections;
  std::vector<std::size_t> budgets;     // K_q
  std::vector<MetricsRecord> metrics;   // round 0 first
  /// Per round: cluster index of every id selected so far, in that round's clustering.
  std::vector<std::map<std::string, Eigen::Index>> selected_clusters;
  std::size_t target_fits = 0;
  std::size_t parser_trainings = 0;
};

enum class Phase { Training, Selecting, AwaitingTranslations, Finished };

/// Algorithm: train on D^0, then per round refresh models, select K_q,
/// obtain translations, merge, exclude, retrain and evaluate.
class Campaign {
public:
  Campaign(const Corpus& train_pool, Corpus test_set, CampaignConfig config, ParserAdapter& parser,
           TranslationOracle& oracle, const MachineTranslator* mt, const UtteranceEmbedder* embedder);

  /// Builds D^0, trains, records the zero-shot metrics.
  void start();
  /// One select-translate-retrain round. State changes only after the
  /// oracle returned a complete batch.
  void run_round();
  void run_all();
  bool finished() const { return started_ && static_cast<std::size_t>(state_.round) >= config_.rounds(); }
  const CampaignState& state() const { return state_; }
  const CampaignConfig& config() const { return config_; }
  std::vector<LabeledUtterance> training_data() const;

  void set_phase_observer(std::function<void(Phase, int)> obs) { observer_ = std::move(obs); }

private:
  void notify(Phase p, int round) const;
  void train_and_evaluate();

  CampaignConfig config_;
  Corpus pool_;  // whole source training set, source side only
  Corpus test_;
  ParserAdapter& parser_;
  TranslationOracle& oracle_;
  const MachineTranslator* mt_;
  const UtteranceEmbedder* embedder_;
  std::vector<LabeledUtterance> machine_pairs_;
  CampaignState state_;
  bool started_ = false;
  std::function<void(Phase, int)> observer_;
};

/// Copy with every non-source utterance removed.
Corpus source_view(const Corpus& corpus);

std::unique_ptr<ParserAdapter> make_parser(const CampaignConfig& config);
std::unique_ptr<MachineTranslator> make_machine_translator(const CampaignConfig& config);
std::unique_ptr<UtteranceEmbedder> make_embedder(const CampaignConfig& config);

struct CampaignResult {
  CampaignState state;
  std::string metrics;  // newline-delimited records
};

/// Train/test split used by campaigns: test_fraction of the corpus with a
/// seed derived from config.seed. test_fraction = 0 gives an empty test set.
std::pair<Corpus, Corpus> campaign_split(const Corpus& corpus, const CampaignConfig& config);

/// Gold-reveal simulation: holds out test_fraction of the corpus as the test
/// set and reveals hidden target utterances as rounds select them.
CampaignResult run_campaign(const Corpus& corpus, const CampaignConfig& config);

/// One batch of k ids from the examples not in `already_selected`. The
/// already selected examples contribute their target utterances when the
/// corpus has them.
std::vector<std::string> select_next(const Corpus& corpus, std::span<const std::string> already_selected,
                                     const CampaignConfig& config, std::size_t k);

struct TuningGrid {
  std::vector<double> alphas{0.25, 0.5, 0.75, 1.0};
  std::vector<double> betas{0.0, 0.25, 0.5, 0.75};
  double tuning_rate = 16.0;
};

TuningGrid parse_grid(std::string_view text);
TuningGrid load_grid(const std::string& path);

struct TuningCell {
  double alpha = 0;
  double beta = 0;
  double dev_accuracy = 0;
  std::size_t selected = 0;
};

struct TuningResult {
  double alpha = 0;
  double beta = 0;
  std::vector<TuningCell> table;
  std::size_t cycles = 0;
};

/// For every (alpha, beta): select tuning_rate% of the source training split
/// with LFS-LC-D along the budget schedule, train on the selection's source
/// side alone and score on the source dev split. Only source-language text
/// is read. Ties prefer larger alpha, then larger beta.
TuningResult tune_hyperparameters(const Corpus& source_corpus, const TuningGrid& grid, const CampaignConfig& config,
                                  ParserAdapter& parser);

} // namespace almsp
