#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "almsp/clustering.hpp"
#include "almsp/corpus.hpp"
#include "almsp/features.hpp"
#include "almsp/parser.hpp"
#include "almsp/translation.hpp"

namespace almsp {

/// Per-example scores; -inf marks an example that must not be selected.
struct ScoreVector {
  std::vector<std::string> ids;
  Eigen::VectorXd values;

  std::size_t size() const { return ids.size(); }
  Eigen::Index index_of(std::string_view id) const;
  double at(std::string_view id) const { return values(index_of(id)); }
  /// Values reordered to follow `order`; throws if the id sets differ.
  Eigen::VectorXd aligned_to(std::span<const std::string> order) const;
  ScoreVector without(const std::set<std::string>& drop) const;
};

enum class Strategy { Lfsd, Lcd, LfsLcD, AmspNbest, AmspMax, Random, S2sFw, MaxCompound };

Strategy parse_strategy(std::string_view s);
std::string_view to_string(Strategy s);
bool is_amsp(Strategy s);

enum class Variant { Nbest, Max };

struct AcquisitionConfig {
  Strategy strategy = Strategy::LfsLcD;
  double alpha = 0.75;
  double beta = 0.75;
  std::map<std::string, double> amsp_coefficients{{"bias", 1.0}, {"error", 1.0}, {"density", 1.0}, {"semdiv", 1.0}};
  std::size_t nbest = 5;
  UnitKind unit = UnitKind::Both;
  std::uint64_t seed = 0;
  /// Maximum Error on the back-translation of the modal target utterance
  /// instead of the source utterance itself.
  bool max_error_back_translated = false;
  /// <= 0 selects the median pairwise distance.
  double kde_bandwidth = 0.0;

  void validate() const;
};

struct ScoredExample {
  std::string id;
  std::map<std::string, double> components;
  double aggregate = 0.0;
};

// ---- LF structure diversity ------------------------------------------------

struct LfsdResult {
  Clustering clustering;
  /// -|f(y) - c|^2, or -inf when the cluster already holds a translated example.
  ScoreVector scores;
};

LfsdResult lfsd_scores(std::span<const Point> untranslated, std::span<const Point> translated, std::size_t k_new,
                       std::uint64_t seed);

/// Sets every clustermate of a picked id to -inf (the picked ids included).
void exclude_clustermates(ScoreVector& scores, const Clustering& clustering, std::span<const std::string> picked);

// ---- Lexical choice diversity ----------------------------------------------

std::set<std::string> covered_units(std::span<const Example> selected, UnitKind unit);

/// (1/|A_y|) sum_a lambda_a H(p(. | a)), lambda_a = beta for covered units, else 1.
ScoreVector lcd_scores(std::span<const Example> candidates, const CooccurrenceModel& cooccurrence,
                       const std::set<std::string>& covered, double beta, UnitKind unit);

/// alpha * qn(lfsd) + qn(lcd).
ScoreVector lfs_lc_d(const ScoreVector& lfsd, const ScoreVector& lcd, double alpha);

// ---- AMSP components -------------------------------------------------------

/// NBEST: -H(n-best row); MAX: ln max_x P(x | y).
ScoreVector bias_scores(const TargetDistribution& target, std::span<const Example> candidates, Variant variant,
                        std::size_t nbest);

struct ErrorContext {
  const TargetDistribution* target = nullptr;
  const MachineTranslator* back_translator = nullptr;
  ParserAdapter* parser = nullptr;
  std::string source_lang;
  std::string target_lang;
  bool max_back_translated = false;
};

/// NBEST: -sum_{x_t in n-best} P(x_t | y) ln P(y | bt(x_t)); MAX: -ln P(y | x_s).
ScoreVector error_scores(const ErrorContext& ctx, std::span<const Example> candidates, Variant variant,
                         std::size_t nbest);

/// ln KDE density of each embedding among all of them.
ScoreVector density_scores(std::span<const std::string> ids, std::span<const SparseVector> embeddings,
                           double bandwidth, std::uint64_t seed = 0);

/// 0 when the candidate's cluster has no selected member, else -inf.
ScoreVector semdiv_scores(const Clustering& clustering, std::span<const std::string> candidates,
                          std::span<const std::string> selected, std::size_t accumulated_budget);

/// sum_k alpha_k qn(phi_k); any -inf component forces -inf.
ScoreVector amsp_aggregate(const std::map<std::string, ScoreVector>& components,
                           const std::map<std::string, double>& coefficients);

// ---- Baselines -------------------------------------------------------------

ScoreVector random_scores(std::span<const std::string> ids, std::uint64_t seed);
/// -score(x_s, y): least confident first.
ScoreVector s2s_fw_scores(ParserAdapter& parser, std::span<const Example> candidates, std::string_view source_lang);
/// Number of distinct atom/compound types not yet covered.
ScoreVector max_compound_scores(std::span<const Example> candidates, const std::set<std::string>& covered);

// ---- Selection -------------------------------------------------------------

/// Top-k by score, ties by id; -inf is never selected.
std::vector<std::string> select_batch(const ScoreVector& scores, std::size_t k);

/// Picks one id at a time, rescoring the remaining candidates after each pick.
std::vector<std::string> select_greedy(std::size_t k,
                                       const std::function<ScoreVector(std::span<const std::string>)>& rescore);

/// Everything a round's acquisition may look at. Models are frozen for the
/// round.
struct RoundContext {
  std::span<const Example> candidates;       // untranslated pool
  std::span<const Example> selected;         // translated in earlier rounds
  std::span<const Example> source_training;  // whole source training set
  std::string source_lang;
  std::string target_lang;
  std::size_t budget = 0;
  std::size_t accumulated_budget = 0;  // including this round
  int round = 1;
  ParserAdapter* parser = nullptr;
  const TargetDistribution* target = nullptr;
  const MachineTranslator* back_translator = nullptr;
  const UtteranceEmbedder* embedder = nullptr;
};

struct RoundSelection {
  std::vector<std::string> ids;
  std::optional<Clustering> clustering;  // LFSD / LFS-LC-D / AMSP
  std::vector<ScoredExample> initial;    // scores before the first pick
};

RoundSelection select_for_round(const RoundContext& ctx, const AcquisitionConfig& config);

} // namespace almsp
