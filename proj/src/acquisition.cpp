#include "almsp/acquisition.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <unordered_map>
#include <unordered_set>

#include "almsp/error.hpp"
#include "almsp/lf.hpp"
#include "almsp/numerics.hpp"
#include "almsp/rng.hpp"

namespace almsp {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

std::vector<std::string> ids_of(std::span<const Example> xs) {
  std::vector<std::string> ids;
  ids.reserve(xs.size());
  for (const auto& x : xs) ids.push_back(x.id);
  return ids;
}

ScoreVector make_scores(std::vector<std::string> ids) {
  ScoreVector s;
  s.values = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(ids.size()));
  s.ids = std::move(ids);
  return s;
}

std::string canonical_strategy(std::string_view s) {
  std::string out;
  for (char c : s) out += (c == '-') ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return out;
}

} // namespace

Eigen::Index ScoreVector::index_of(std::string_view id) const {
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] == id) return static_cast<Eigen::Index>(i);
  }
  throw Error("score vector has no id '" + std::string(id) + "'");
}

Eigen::VectorXd ScoreVector::aligned_to(std::span<const std::string> order) const {
  if (order.size() != ids.size()) throw Error("score vectors cover different id sets");
  std::unordered_map<std::string_view, Eigen::Index> pos;
  for (std::size_t i = 0; i < ids.size(); ++i) pos.emplace(ids[i], static_cast<Eigen::Index>(i));
  Eigen::VectorXd out(static_cast<Eigen::Index>(order.size()));
  for (std::size_t i = 0; i < order.size(); ++i) {
    auto it = pos.find(order[i]);
    if (it == pos.end()) throw Error("score vectors cover different id sets (missing '" + order[i] + "')");
    out(static_cast<Eigen::Index>(i)) = values(it->second);
  }
  return out;
}

ScoreVector ScoreVector::without(const std::set<std::string>& drop) const {
  ScoreVector out;
  std::vector<double> vals;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (drop.count(ids[i])) continue;
    out.ids.push_back(ids[i]);
    vals.push_back(values(static_cast<Eigen::Index>(i)));
  }
  out.values = Eigen::Map<Eigen::VectorXd>(vals.data(), static_cast<Eigen::Index>(vals.size()));
  return out;
}

Strategy parse_strategy(std::string_view s) {
  const auto c = canonical_strategy(s);
  if (c == "LFSD") return Strategy::Lfsd;
  if (c == "LCD") return Strategy::Lcd;
  if (c == "LFS_LC_D") return Strategy::LfsLcD;
  if (c == "AMSP_NBEST" || c == "AMSP_N_BEST") return Strategy::AmspNbest;
  if (c == "AMSP_MAX") return Strategy::AmspMax;
  if (c == "RANDOM") return Strategy::Random;
  if (c == "S2S_FW" || c == "S2S(FW)") return Strategy::S2sFw;
  if (c == "MAX_COMPOUND") return Strategy::MaxCompound;
  throw ConfigError("unknown strategy '" + std::string(s) + "'");
}

std::string_view to_string(Strategy s) {
  switch (s) {
    case Strategy::Lfsd: return "LFSD";
    case Strategy::Lcd: return "LCD";
    case Strategy::LfsLcD: return "LFS-LC-D";
    case Strategy::AmspNbest: return "AMSP_NBEST";
    case Strategy::AmspMax: return "AMSP_MAX";
    case Strategy::Random: return "RANDOM";
    case Strategy::S2sFw: return "S2S_FW";
    case Strategy::MaxCompound: return "MAX_COMPOUND";
  }
  return "?";
}

bool is_amsp(Strategy s) { return s == Strategy::AmspNbest || s == Strategy::AmspMax; }

void AcquisitionConfig::validate() const {
  if (!(alpha >= 0.0)) throw ConfigError("alpha must be >= 0");
  if (!(beta >= 0.0 && beta < 1.0)) throw ConfigError("beta must lie in [0, 1)");
  if (nbest < 1) throw ConfigError("nbest must be >= 1");
  for (const auto& [k, v] : amsp_coefficients) {
    if (k != "bias" && k != "error" && k != "density" && k != "semdiv") {
      throw ConfigError("unknown AMSP component '" + k + "'");
    }
    if (!(v >= 0.0)) throw ConfigError("AMSP coefficient for '" + k + "' must be >= 0");
  }
}

// ---- LFSD ------------------------------------------------------------------

LfsdResult lfsd_scores(std::span<const Point> untranslated, std::span<const Point> translated, std::size_t k_new,
                       std::uint64_t seed) {
  if (k_new == 0) throw ConfigError("LFSD: budget must be >= 1");
  std::vector<Point> all(untranslated.begin(), untranslated.end());
  all.insert(all.end(), translated.begin(), translated.end());
  std::vector<SparseVector> fixed;
  for (const auto& t : translated) fixed.push_back(t.vector);

  KmeansOptions opts;
  opts.seed = seed;
  LfsdResult r{incremental_kmeans(all, fixed, k_new, opts), {}};

  std::vector<bool> taken(r.clustering.size(), false);
  for (std::size_t c = 0; c < r.clustering.fixed_count; ++c) taken[c] = true;
  for (std::size_t i = untranslated.size(); i < all.size(); ++i) {
    taken[static_cast<std::size_t>(r.clustering.assignment[i])] = true;
  }
  std::vector<std::string> ids;
  for (const auto& p : untranslated) ids.push_back(p.id);
  r.scores = make_scores(ids);
  for (std::size_t i = 0; i < untranslated.size(); ++i) {
    const auto c = static_cast<std::size_t>(r.clustering.assignment[i]);
    r.scores.values(static_cast<Eigen::Index>(i)) = taken[c] ? kNegInf : -r.clustering.sq_distance[i];
  }
  return r;
}

void exclude_clustermates(ScoreVector& scores, const Clustering& clustering, std::span<const std::string> picked) {
  if (picked.empty()) return;
  std::unordered_map<std::string_view, Eigen::Index> cluster;
  for (std::size_t i = 0; i < clustering.ids.size(); ++i) cluster.emplace(clustering.ids[i], clustering.assignment[i]);
  std::unordered_set<Eigen::Index> blocked;
  for (const auto& p : picked) {
    auto it = cluster.find(p);
    if (it == cluster.end()) throw Error("picked id '" + p + "' is not in the clustering");
    blocked.insert(it->second);
  }
  for (std::size_t i = 0; i < scores.ids.size(); ++i) {
    auto it = cluster.find(scores.ids[i]);
    if (it != cluster.end() && blocked.count(it->second)) scores.values(static_cast<Eigen::Index>(i)) = kNegInf;
  }
}

// ---- LCD -------------------------------------------------------------------

std::set<std::string> covered_units(std::span<const Example> selected, UnitKind unit) {
  std::set<std::string> out;
  for (const auto& ex : selected) {
    for (auto& u : distinct_units(parse_lf(ex.lf), unit)) out.insert(std::move(u));
  }
  return out;
}

ScoreVector lcd_scores(std::span<const Example> candidates, const CooccurrenceModel& cooccurrence,
                       const std::set<std::string>& covered, double beta, UnitKind unit) {
  if (!(beta >= 0.0 && beta < 1.0)) throw ConfigError("beta must lie in [0, 1)");
  ScoreVector s = make_scores(ids_of(candidates));
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const auto units = distinct_units(parse_lf(candidates[i].lf), unit);
    if (units.empty()) throw Error("LCD: example '" + candidates[i].id + "' has no units of the configured kind");
    double sum = 0.0;
    for (const auto& a : units) sum += (covered.count(a) ? beta : 1.0) * cooccurrence.row_entropy(a);
    s.values(static_cast<Eigen::Index>(i)) = sum / static_cast<double>(units.size());
  }
  return s;
}

ScoreVector lfs_lc_d(const ScoreVector& lfsd, const ScoreVector& lcd, double alpha) {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(lfsd.size()), 2);
  m.col(0) = lfsd.values;
  m.col(1) = lcd.aligned_to(lfsd.ids);
  const Eigen::MatrixXd q = quantile_normalize(m);
  ScoreVector out{lfsd.ids, Eigen::VectorXd(q.rows())};
  for (Eigen::Index i = 0; i < q.rows(); ++i) {
    out.values(i) = (q(i, 0) == kNegInf || q(i, 1) == kNegInf) ? kNegInf : alpha * q(i, 0) + q(i, 1);
  }
  return out;
}

// ---- AMSP components -------------------------------------------------------

ScoreVector bias_scores(const TargetDistribution& target, std::span<const Example> candidates, Variant variant,
                        std::size_t nbest) {
  ScoreVector s = make_scores(ids_of(candidates));
  std::unordered_map<std::string, double> cache;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const auto key = normalize_lf(candidates[i].lf);
    auto it = cache.find(key);
    if (it == cache.end()) {
      if (!target.contains(key)) {
        throw Error("bias: no target-language row for the LF of '" + candidates[i].id + "'");
      }
      double v = 0.0;
      if (variant == Variant::Nbest) {
        const auto row = target.nbest(key, nbest);
        Eigen::VectorXd p(static_cast<Eigen::Index>(row.size()));
        for (std::size_t k = 0; k < row.size(); ++k) p(static_cast<Eigen::Index>(k)) = row[k].probability;
        v = -entropy(p);
      } else {
        v = std::log(target.max_probability(key));
      }
      it = cache.emplace(key, v).first;
    }
    s.values(static_cast<Eigen::Index>(i)) = it->second;
  }
  return s;
}

ScoreVector error_scores(const ErrorContext& ctx, std::span<const Example> candidates, Variant variant,
                         std::size_t nbest) {
  if (!ctx.parser) throw Error("error acquisition needs a trained parser");
  ScoreVector s = make_scores(ids_of(candidates));
  auto back_translate = [&](const std::string& text, const std::string& id) {
    if (!ctx.back_translator) throw OracleError("error acquisition needs a back-translator");
    try {
      return ctx.back_translator->translate(text, ctx.target_lang, ctx.source_lang);
    } catch (const std::exception& e) {
      throw OracleError("back-translation failed for '" + id + "': " + e.what());
    }
  };
  std::unordered_map<std::string, double> cache;  // per LF (NBEST / back-translated MAX)
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const auto& ex = candidates[i];
    double v = 0.0;
    if (variant == Variant::Max && !ctx.max_back_translated) {
      v = -ctx.parser->score(ex.utterance(ctx.source_lang), ex.lf);
    } else {
      if (!ctx.target) throw Error("error acquisition needs the target distribution");
      const auto key = normalize_lf(ex.lf);
      auto it = cache.find(key);
      if (it == cache.end()) {
        if (!ctx.target->contains(key)) throw Error("error: no target-language row for the LF of '" + ex.id + "'");
        double acc = 0.0;
        for (const auto& e : ctx.target->nbest(key, variant == Variant::Max ? 1 : nbest)) {
          const double lp = ctx.parser->score(back_translate(e.utterance, ex.id), ex.lf);
          acc -= (variant == Variant::Max ? 1.0 : e.probability) * lp;
        }
        it = cache.emplace(key, acc).first;
      }
      v = it->second;
    }
    s.values(static_cast<Eigen::Index>(i)) = v;
  }
  return s;
}

ScoreVector density_scores(std::span<const std::string> ids, std::span<const SparseVector> embeddings,
                           double bandwidth, std::uint64_t seed) {
  if (ids.size() != embeddings.size()) throw Error("density: ids and embeddings differ in length");
  if (ids.empty()) throw NumericError("kde: empty data");
  const DenseColumns dense = to_dense_columns(embeddings);
  const double h = bandwidth > 0.0 ? bandwidth : median_bandwidth(dense.matrix, 256, seed);
  ScoreVector s{std::vector<std::string>(ids.begin(), ids.end()), kde_log_densities(dense.matrix, dense.matrix, h)};
  return s;
}

ScoreVector semdiv_scores(const Clustering& clustering, std::span<const std::string> candidates,
                          std::span<const std::string> selected, std::size_t accumulated_budget) {
  if (clustering.size() < accumulated_budget) {
    throw ConfigError("semantic diversity needs at least as many clusters (" + std::to_string(clustering.size()) +
                      ") as the accumulated budget (" + std::to_string(accumulated_budget) + ")");
  }
  ScoreVector s = make_scores(std::vector<std::string>(candidates.begin(), candidates.end()));
  exclude_clustermates(s, clustering, selected);
  return s;
}

ScoreVector amsp_aggregate(const std::map<std::string, ScoreVector>& components,
                           const std::map<std::string, double>& coefficients) {
  if (components.empty()) throw Error("AMSP aggregate needs at least one component");
  for (const auto& [name, c] : coefficients) {
    if (!components.count(name)) throw Error("AMSP aggregate: coefficient for missing component '" + name + "'");
  }
  const auto& order = components.begin()->second.ids;
  Eigen::MatrixXd m(static_cast<Eigen::Index>(order.size()), static_cast<Eigen::Index>(components.size()));
  Eigen::VectorXd w(m.cols());
  Eigen::Index col = 0;
  for (const auto& [name, vec] : components) {
    if (name != "bias" && name != "error" && name != "density" && name != "semdiv") {
      throw Error("AMSP aggregate: unknown component '" + name + "'");
    }
    auto it = coefficients.find(name);
    if (it == coefficients.end()) throw Error("AMSP aggregate: no coefficient for '" + name + "'");
    m.col(col) = vec.aligned_to(order);
    w(col) = it->second;
    ++col;
  }
  const Eigen::MatrixXd q = quantile_normalize(m);
  ScoreVector out{order, Eigen::VectorXd(q.rows())};
  for (Eigen::Index i = 0; i < q.rows(); ++i) {
    out.values(i) = (q.row(i).array() == kNegInf).any() ? kNegInf : q.row(i).dot(w);
  }
  return out;
}

// ---- Baselines -------------------------------------------------------------

ScoreVector random_scores(std::span<const std::string> ids, std::uint64_t seed) {
  ScoreVector s = make_scores(std::vector<std::string>(ids.begin(), ids.end()));
  Rng rng(seed);
  for (Eigen::Index i = 0; i < s.values.size(); ++i) s.values(i) = rng.uniform();
  return s;
}

ScoreVector s2s_fw_scores(ParserAdapter& parser, std::span<const Example> candidates, std::string_view source_lang) {
  ScoreVector s = make_scores(ids_of(candidates));
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    s.values(static_cast<Eigen::Index>(i)) = -parser.score(candidates[i].utterance(source_lang), candidates[i].lf);
  }
  return s;
}

ScoreVector max_compound_scores(std::span<const Example> candidates, const std::set<std::string>& covered) {
  ScoreVector s = make_scores(ids_of(candidates));
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    std::size_t fresh = 0;
    for (const auto& u : distinct_units(parse_lf(candidates[i].lf), UnitKind::Both)) fresh += covered.count(u) ? 0 : 1;
    s.values(static_cast<Eigen::Index>(i)) = static_cast<double>(fresh);
  }
  return s;
}

// ---- Selection -------------------------------------------------------------

std::vector<std::string> select_batch(const ScoreVector& scores, std::size_t k) {
  std::vector<std::size_t> finite;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const double v = scores.values(static_cast<Eigen::Index>(i));
    if (std::isnan(v)) throw NumericError("NaN score for '" + scores.ids[i] + "'");
    if (v != kNegInf) finite.push_back(i);
  }
  if (finite.size() < k) {
    throw Error("insufficient candidates: " + std::to_string(finite.size()) + " selectable, " + std::to_string(k) +
                " requested");
  }
  std::sort(finite.begin(), finite.end(), [&](std::size_t a, std::size_t b) {
    const double va = scores.values(static_cast<Eigen::Index>(a));
    const double vb = scores.values(static_cast<Eigen::Index>(b));
    return va > vb || (va == vb && scores.ids[a] < scores.ids[b]);
  });
  std::vector<std::string> out;
  for (std::size_t i = 0; i < k; ++i) out.push_back(scores.ids[finite[i]]);
  return out;
}

std::vector<std::string> select_greedy(std::size_t k,
                                       const std::function<ScoreVector(std::span<const std::string>)>& rescore) {
  std::vector<std::string> picked;
  std::set<std::string> done;
  while (picked.size() < k) {
    const ScoreVector s = rescore(picked).without(done);
    try {
      picked.push_back(select_batch(s, 1).front());
    } catch (const Error&) {
      throw Error("insufficient candidates: only " + std::to_string(picked.size()) + " of " + std::to_string(k) +
                  " could be selected");
    }
    done.insert(picked.back());
  }
  return picked;
}

// ---- Round driver ----------------------------------------------------------

namespace {

std::vector<Example> pick_examples(std::span<const Example> pool, std::span<const std::string> ids) {
  std::unordered_map<std::string_view, const Example*> by_id;
  for (const auto& e : pool) by_id.emplace(e.id, &e);
  std::vector<Example> out;
  for (const auto& id : ids) out.push_back(*by_id.at(id));
  return out;
}

std::vector<ScoredExample> tabulate(const std::map<std::string, ScoreVector>& components, const ScoreVector& agg) {
  std::vector<ScoredExample> out;
  for (std::size_t i = 0; i < agg.size(); ++i) {
    ScoredExample s{agg.ids[i], {}, agg.values(static_cast<Eigen::Index>(i))};
    for (const auto& [name, vec] : components) s.components[name] = vec.at(agg.ids[i]);
    out.push_back(std::move(s));
  }
  return out;
}

} // namespace

RoundSelection select_for_round(const RoundContext& ctx, const AcquisitionConfig& config) {
  config.validate();
  if (ctx.budget == 0) return {};
  const std::string round_tag = "round" + std::to_string(ctx.round);
  const auto candidate_ids = ids_of(ctx.candidates);
  RoundSelection sel;

  switch (config.strategy) {
    case Strategy::Random: {
      const auto s = random_scores(candidate_ids, derive_seed(config.seed, "random/" + round_tag));
      sel.initial = tabulate({{"random", s}}, s);
      sel.ids = select_batch(s, ctx.budget);
      break;
    }
    case Strategy::S2sFw: {
      if (!ctx.parser) throw Error("S2S_FW needs a trained parser");
      const auto s = s2s_fw_scores(*ctx.parser, ctx.candidates, ctx.source_lang);
      sel.initial = tabulate({{"confidence", s}}, s);
      sel.ids = select_batch(s, ctx.budget);
      break;
    }
    case Strategy::MaxCompound: {
      const auto base = covered_units(ctx.selected, UnitKind::Both);
      sel.ids = select_greedy(ctx.budget, [&](std::span<const std::string> picked) {
        auto covered = base;
        const auto more = covered_units(pick_examples(ctx.candidates, picked), UnitKind::Both);
        covered.insert(more.begin(), more.end());
        auto s = max_compound_scores(ctx.candidates, covered);
        if (picked.empty()) sel.initial = tabulate({{"new_units", s}}, s);
        return s;
      });
      break;
    }
    case Strategy::Lfsd:
    case Strategy::Lcd:
    case Strategy::LfsLcD: {
      std::optional<LfsdResult> lfsd;
      if (config.strategy != Strategy::Lcd) {
        const TfidfModel tfidf = fit_tfidf(ctx.source_training);
        std::vector<Point> untranslated, translated;
        for (const auto& e : ctx.candidates) untranslated.push_back({e.id, featurize_lf(tfidf, e)});
        for (const auto& e : ctx.selected) translated.push_back({e.id, featurize_lf(tfidf, e)});
        lfsd = lfsd_scores(untranslated, translated, ctx.budget, derive_seed(config.seed, "lfsd/" + round_tag));
        sel.clustering = lfsd->clustering;
      }
      std::optional<CooccurrenceModel> cooc;
      std::set<std::string> base;
      if (config.strategy != Strategy::Lfsd) {
        cooc = fit_cooccurrence(ctx.source_training, ctx.source_lang, config.unit);
        base = covered_units(ctx.selected, config.unit);
      }
      sel.ids = select_greedy(ctx.budget, [&](std::span<const std::string> picked) {
        std::map<std::string, ScoreVector> parts;
        if (lfsd) {
          ScoreVector s = lfsd->scores;
          exclude_clustermates(s, lfsd->clustering, picked);
          parts.emplace("lfsd", std::move(s));
        }
        if (cooc) {
          auto covered = base;
          const auto more = covered_units(pick_examples(ctx.candidates, picked), config.unit);
          covered.insert(more.begin(), more.end());
          parts.emplace("lcd", lcd_scores(ctx.candidates, *cooc, covered, config.beta, config.unit));
        }
        ScoreVector agg = (lfsd && cooc) ? lfs_lc_d(parts.at("lfsd"), parts.at("lcd"), config.alpha)
                                         : parts.begin()->second;
        if (picked.empty()) sel.initial = tabulate(parts, agg);
        return agg;
      });
      break;
    }
    case Strategy::AmspNbest:
    case Strategy::AmspMax: {
      if (!ctx.target) throw Error("AMSP needs the round's target distribution");
      if (!ctx.embedder) throw Error("AMSP needs an utterance embedder");
      const Variant variant = config.strategy == Strategy::AmspNbest ? Variant::Nbest : Variant::Max;
      std::map<std::string, ScoreVector> fixed_parts;
      fixed_parts.emplace("bias", bias_scores(*ctx.target, ctx.candidates, variant, config.nbest));
      ErrorContext ectx{ctx.target,      ctx.back_translator, ctx.parser, ctx.source_lang, ctx.target_lang,
                        config.max_error_back_translated};
      fixed_parts.emplace("error", error_scores(ectx, ctx.candidates, variant, config.nbest));

      std::vector<SparseVector> cand_emb;
      for (const auto& e : ctx.candidates) cand_emb.push_back(ctx.embedder->embed(e.id, e.utterance(ctx.source_lang)));
      fixed_parts.emplace("density", density_scores(candidate_ids, cand_emb, config.kde_bandwidth,
                                                    derive_seed(config.seed, "kde/" + round_tag)));

      std::vector<Point> pts, fixed_pts;
      for (std::size_t i = 0; i < ctx.candidates.size(); ++i) pts.push_back({candidate_ids[i], cand_emb[i]});
      std::vector<SparseVector> fixed;
      std::vector<std::string> prior_ids;
      for (const auto& e : ctx.selected) {
        auto v = ctx.embedder->embed(e.id, e.utterance(ctx.source_lang));
        pts.push_back({e.id, v});
        fixed.push_back(std::move(v));
        prior_ids.push_back(e.id);
      }
      KmeansOptions opts;
      opts.seed = derive_seed(config.seed, "semdiv/" + round_tag);
      sel.clustering = incremental_kmeans(pts, fixed, ctx.budget, opts);

      std::map<std::string, double> coeffs;
      for (const auto& [k, v] : config.amsp_coefficients) coeffs[k] = v;
      sel.ids = select_greedy(ctx.budget, [&](std::span<const std::string> picked) {
        auto parts = fixed_parts;
        std::vector<std::string> chosen = prior_ids;
        chosen.insert(chosen.end(), picked.begin(), picked.end());
        parts.emplace("semdiv", semdiv_scores(*sel.clustering, candidate_ids, chosen, ctx.accumulated_budget));
        for (const auto& [name, vec] : parts) {
          if (!coeffs.count(name)) coeffs[name] = 0.0;
        }
        ScoreVector agg = amsp_aggregate(parts, coeffs);
        if (picked.empty()) sel.initial = tabulate(parts, agg);
        return agg;
      });
      break;
    }
  }
  return sel;
}

} // namespace almsp
