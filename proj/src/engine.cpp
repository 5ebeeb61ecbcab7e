#include "almsp/engine.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "almsp/error.hpp"
#include "almsp/lf.hpp"
#include "almsp/rng.hpp"

namespace almsp {

using nlohmann::json;

// ---- configuration ---------------------------------------------------------

namespace {

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double d = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw ConfigError("'" + key + "' expects a number, got '" + v + "'");
  }
}

std::uint64_t to_u64(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const auto x = std::stoull(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw ConfigError("'" + key + "' expects a non-negative integer, got '" + v + "'");
  }
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError("'" + key + "' expects true or false, got '" + v + "'");
}

std::vector<double> to_list(const std::string& key, const std::string& v) {
  std::vector<double> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(to_double(key, item));
  }
  return out;
}

std::vector<std::string> split_words(const std::string& v) {
  std::vector<std::string> out;
  std::istringstream ss(v);
  std::string w;
  while (ss >> w) out.push_back(w);
  return out;
}

CampaignConfig config_from_map(const std::vector<std::pair<std::string, std::string>>& kv) {
  CampaignConfig c;
  for (const auto& [key, v] : kv) {
    if (key == "corpus") c.corpus_path = v;
    else if (key == "source_lang") c.source_lang = v;
    else if (key == "target_lang") c.target_lang = v;
    else if (key == "mode") {
      if (v == "al-msp") c.mode = CampaignMode::AlMsp;
      else if (v == "amsp") c.mode = CampaignMode::Amsp;
      else throw ConfigError("mode must be al-msp or amsp, got '" + v + "'");
    } else if (key == "oracle") {
      if (v == "gold") c.oracle = OracleKind::GoldReveal;
      else if (v == "human") c.oracle = OracleKind::HumanSession;
      else throw ConfigError("oracle must be gold or human, got '" + v + "'");
    } else if (key == "strategy") c.acquisition.strategy = parse_strategy(v);
    else if (key == "budget_percents") c.budget_percents = to_list(key, v);
    else if (key == "alpha") c.acquisition.alpha = to_double(key, v);
    else if (key == "beta") c.acquisition.beta = to_double(key, v);
    else if (key.rfind("coef_", 0) == 0) c.acquisition.amsp_coefficients[key.substr(5)] = to_double(key, v);
    else if (key == "nbest") c.acquisition.nbest = static_cast<std::size_t>(to_u64(key, v));
    else if (key == "unit") c.acquisition.unit = parse_unit_kind(v);
    else if (key == "seed") c.seed = c.acquisition.seed = to_u64(key, v);
    else if (key == "parser") c.parser = v;
    else if (key == "parser_command") c.parser_command = split_words(v);
    else if (key == "test_fraction") c.test_fraction = to_double(key, v);
    else if (key == "lexicon") c.lexicon_path = v;
    else if (key == "embeddings") c.embeddings_path = v;
    else if (key == "mt_dropout") c.mt_dropout = to_double(key, v);
    else if (key == "max_error_back_translated") c.acquisition.max_error_back_translated = to_bool(key, v);
    else if (key == "kde_bandwidth") c.acquisition.kde_bandwidth = to_double(key, v);
    else if (key == "output_dir") c.output_dir = v;
    else throw ConfigError("unknown configuration key '" + key + "'");
  }
  c.validate();
  return c;
}

std::string format_number(double d) {
  std::ostringstream os;
  os.precision(17);
  os << d;
  return os.str();
}

} // namespace

void CampaignConfig::validate() const {
  acquisition.validate();
  for (std::size_t i = 0; i < budget_percents.size(); ++i) {
    const double p = budget_percents[i];
    if (!(p > 0.0 && p <= 100.0)) throw ConfigError("budget percentages must lie in (0, 100]");
    if (i > 0 && !(p > budget_percents[i - 1])) throw ConfigError("budget percentages must be strictly increasing");
  }
  if (source_lang.empty() || target_lang.empty() || source_lang == target_lang) {
    throw ConfigError("a campaign needs two distinct languages");
  }
  if (is_amsp(acquisition.strategy) && mode != CampaignMode::Amsp) {
    throw ConfigError("AMSP strategies need mode = amsp (machine-translated pool)");
  }
  if (parser != "surrogate" && parser != "external") throw ConfigError("parser must be surrogate or external");
  if (parser == "external" && parser_command.empty()) throw ConfigError("external parser needs parser_command");
  if (!(test_fraction >= 0.0 && test_fraction < 1.0)) throw ConfigError("test_fraction must lie in [0, 1)");
  if (!(mt_dropout >= 0.0 && mt_dropout < 1.0)) throw ConfigError("mt_dropout must lie in [0, 1)");
}

CampaignConfig parse_config(std::string_view text) {
  std::vector<std::pair<std::string, std::string>> kv;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    if (trim(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
    kv.emplace_back(trim(std::string_view(line).substr(0, eq)), trim(std::string_view(line).substr(eq + 1)));
  }
  return config_from_map(kv);
}

CampaignConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

CampaignConfig config_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("config must be an object");
  std::vector<std::pair<std::string, std::string>> kv;
  for (const auto& [k, v] : j.items()) {
    if (v.is_string()) {
      kv.emplace_back(k, v.get<std::string>());
    } else if (v.is_boolean()) {
      kv.emplace_back(k, v.get<bool>() ? "true" : "false");
    } else if (v.is_number_integer() || v.is_number_unsigned()) {
      kv.emplace_back(k, v.dump());
    } else if (v.is_number()) {
      kv.emplace_back(k, format_number(v.get<double>()));
    } else if (v.is_array()) {
      std::string joined;
      for (const auto& x : v) {
        if (!joined.empty()) joined += (k == "parser_command") ? " " : ",";
        joined += x.is_string() ? x.get<std::string>() : x.dump();
      }
      kv.emplace_back(k, joined);
    } else {
      throw ConfigError("unsupported value for '" + k + "'");
    }
  }
  return config_from_map(kv);
}

std::map<std::string, std::string> config_to_map(const CampaignConfig& c) {
  std::map<std::string, std::string> m;
  m["corpus"] = c.corpus_path;
  m["source_lang"] = c.source_lang;
  m["target_lang"] = c.target_lang;
  m["mode"] = c.mode == CampaignMode::Amsp ? "amsp" : "al-msp";
  m["oracle"] = c.oracle == OracleKind::HumanSession ? "human" : "gold";
  m["strategy"] = std::string(to_string(c.acquisition.strategy));
  std::string pct;
  for (double p : c.budget_percents) pct += (pct.empty() ? "" : ",") + format_number(p);
  m["budget_percents"] = pct;
  m["alpha"] = format_number(c.acquisition.alpha);
  m["beta"] = format_number(c.acquisition.beta);
  for (const auto& [k, v] : c.acquisition.amsp_coefficients) m["coef_" + k] = format_number(v);
  m["nbest"] = std::to_string(c.acquisition.nbest);
  m["unit"] = std::string(to_string(c.acquisition.unit));
  m["seed"] = std::to_string(c.seed);
  m["parser"] = c.parser;
  std::string cmd;
  for (const auto& w : c.parser_command) cmd += (cmd.empty() ? "" : " ") + w;
  if (!cmd.empty()) m["parser_command"] = cmd;
  m["test_fraction"] = format_number(c.test_fraction);
  if (!c.lexicon_path.empty()) m["lexicon"] = c.lexicon_path;
  if (!c.embeddings_path.empty()) m["embeddings"] = c.embeddings_path;
  m["mt_dropout"] = format_number(c.mt_dropout);
  m["max_error_back_translated"] = c.acquisition.max_error_back_translated ? "true" : "false";
  m["kde_bandwidth"] = format_number(c.acquisition.kde_bandwidth);
  if (!c.output_dir.empty()) m["output_dir"] = c.output_dir;
  return m;
}

// ---- budgets and metrics ---------------------------------------------------

std::vector<std::size_t> cumulative_budgets(std::size_t n, std::span<const double> percents) {
  if (n == 0) throw ConfigError("budget: empty pool");
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < percents.size(); ++i) {
    if (i > 0 && !(percents[i] > percents[i - 1])) throw ConfigError("budget percentages must be strictly increasing");
    const auto c = round_half_up(percents[i] * static_cast<double>(n) / 100.0);
    out.push_back(static_cast<std::size_t>(std::max<std::int64_t>(1, c)));
  }
  return out;
}

std::vector<std::size_t> budget_sizes(std::size_t n, std::span<const double> percents) {
  const auto cum = cumulative_budgets(n, percents);
  std::vector<std::size_t> out;
  std::size_t prev = 0;
  for (auto c : cum) {
    out.push_back(c - prev);
    prev = c;
  }
  return out;
}

json MetricsRecord::to_json() const {
  json j;
  j["round"] = round;
  j["cumulative_budget"] = cumulative_budget;
  j["source_accuracy"] = source_accuracy;
  j["target_accuracy"] = target_accuracy ? json(*target_accuracy) : json(nullptr);
  j["compound_coverage"] = compound_coverage;
  j["strategy"] = strategy;
  j["seed"] = seed;
  return j;
}

MetricsRecord MetricsRecord::from_json(const json& j) {
  MetricsRecord r;
  r.round = j.at("round").get<int>();
  r.cumulative_budget = j.at("cumulative_budget").get<std::size_t>();
  r.source_accuracy = j.at("source_accuracy").get<double>();
  if (!j.at("target_accuracy").is_null()) r.target_accuracy = j.at("target_accuracy").get<double>();
  r.compound_coverage = j.at("compound_coverage").get<double>();
  r.strategy = j.at("strategy").get<std::string>();
  r.seed = j.at("seed").get<std::uint64_t>();
  return r;
}

std::string format_metrics(std::span<const MetricsRecord> records) {
  std::string out;
  for (const auto& r : records) out += r.to_json().dump() + "\n";
  return out;
}

std::vector<MetricsRecord> parse_metrics(std::string_view text) {
  std::vector<MetricsRecord> out;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    if (!trim(line).empty()) out.push_back(MetricsRecord::from_json(json::parse(line)));
  }
  return out;
}

double compound_coverage(std::span<const Example> selected, std::span<const Example> pool) {
  const auto total = covered_units(pool, UnitKind::Compounds);
  if (total.empty()) return 0.0;
  const auto have = covered_units(selected, UnitKind::Compounds);
  std::size_t hit = 0;
  for (const auto& c : have) hit += total.count(c);
  return static_cast<double>(hit) / static_cast<double>(total.size());
}

// ---- campaign --------------------------------------------------------------

Corpus source_view(const Corpus& corpus) {
  Corpus out;
  out.source_lang = corpus.source_lang;
  out.target_lang = corpus.target_lang;
  for (const auto& ex : corpus.examples) {
    Example e(ex.id, ex.lf);
    e.set_utterance(corpus.source_lang, ex.utterance(corpus.source_lang));
    out.examples.push_back(std::move(e));
  }
  return out;
}

namespace {

std::vector<LabeledUtterance> pairs_for(std::span<const Example> xs, const std::string& lang) {
  std::vector<LabeledUtterance> out;
  for (const auto& ex : xs) {
    if (const auto* u = ex.find_utterance(lang)) out.push_back({ex.id, lang, *u, ex.lf});
  }
  return out;
}

std::vector<LabeledUtterance> machine_translate_all(std::span<const Example> xs, const MachineTranslator& mt,
                                                    const std::string& src, const std::string& tgt) {
  std::vector<LabeledUtterance> out;
  for (const auto& ex : xs) out.push_back({ex.id, tgt, mt.translate(ex.utterance(src), src, tgt), ex.lf});
  return out;
}

} // namespace

Campaign::Campaign(const Corpus& train_pool, Corpus test_set, CampaignConfig config, ParserAdapter& parser,
                   TranslationOracle& oracle, const MachineTranslator* mt, const UtteranceEmbedder* embedder)
    : config_(std::move(config)),
      pool_(source_view(train_pool)),
      test_(std::move(test_set)),
      parser_(parser),
      oracle_(oracle),
      mt_(mt),
      embedder_(embedder) {
  config_.validate();
  pool_.source_lang = config_.source_lang;
  pool_.target_lang = config_.target_lang;
  pool_.index();
  if (pool_.empty()) throw ConfigError("campaign: empty training pool");
  state_.untranslated = pool_.examples;
  state_.budgets = budget_sizes(pool_.size(), config_.budget_percents);
}

void Campaign::notify(Phase p, int round) const {
  if (observer_) observer_(p, round);
}

std::vector<LabeledUtterance> Campaign::training_data() const {
  auto data = pairs_for(pool_.examples, config_.source_lang);
  data.insert(data.end(), machine_pairs_.begin(), machine_pairs_.end());
  const auto human = pairs_for(state_.translated, config_.target_lang);
  data.insert(data.end(), human.begin(), human.end());
  return data;
}

void Campaign::train_and_evaluate() {
  notify(Phase::Training, state_.round);
  parser_.train(training_data());
  ++state_.parser_trainings;

  MetricsRecord rec;
  rec.round = state_.round;
  rec.cumulative_budget = state_.translated.size();
  const auto src = pairs_for(test_.examples, config_.source_lang);
  const auto tgt = pairs_for(test_.examples, config_.target_lang);
  rec.source_accuracy = src.empty() ? 0.0 : parser_.evaluate(src);
  if (!tgt.empty()) rec.target_accuracy = parser_.evaluate(tgt);
  rec.compound_coverage = compound_coverage(state_.translated, pool_.examples);
  rec.strategy = std::string(to_string(config_.acquisition.strategy));
  rec.seed = config_.seed;
  state_.metrics.push_back(rec);
}

void Campaign::start() {
  if (started_) throw Error("campaign already started");
  if (config_.mode == CampaignMode::Amsp) {
    if (!mt_) throw ConfigError("amsp mode needs a machine translator");
    machine_pairs_ = machine_translate_all(pool_.examples, *mt_, config_.source_lang, config_.target_lang);
  }
  started_ = true;
  train_and_evaluate();
  if (finished()) notify(Phase::Finished, state_.round);
}

void Campaign::run_round() {
  if (!started_) throw Error("campaign not started");
  if (finished()) throw Error("campaign already finished");
  const int q = state_.round + 1;
  const std::size_t k = state_.budgets[static_cast<std::size_t>(q - 1)];
  notify(Phase::Selecting, q);

  std::optional<TargetDistribution> target;
  if (config_.mode == CampaignMode::Amsp) {
    auto pairs = machine_pairs_;
    const auto human = pairs_for(state_.translated, config_.target_lang);
    pairs.insert(pairs.end(), human.begin(), human.end());
    target = fit_target_distribution(pairs);
    ++state_.target_fits;
  }

  RoundContext ctx;
  ctx.candidates = state_.untranslated;
  ctx.selected = state_.translated;
  ctx.source_training = pool_.examples;
  ctx.source_lang = config_.source_lang;
  ctx.target_lang = config_.target_lang;
  ctx.budget = k;
  ctx.accumulated_budget = state_.translated.size() + k;
  ctx.round = q;
  ctx.parser = &parser_;
  ctx.target = target ? &*target : nullptr;
  ctx.back_translator = mt_;
  ctx.embedder = embedder_;
  AcquisitionConfig acq = config_.acquisition;
  acq.seed = config_.seed;
  const RoundSelection sel = select_for_round(ctx, acq);

  std::unordered_map<std::string, std::size_t> pos;
  for (std::size_t i = 0; i < state_.untranslated.size(); ++i) pos.emplace(state_.untranslated[i].id, i);
  std::vector<Example> batch;
  for (const auto& id : sel.ids) batch.push_back(state_.untranslated[pos.at(id)]);

  TranslationMap translations;
  if (!batch.empty()) {
    notify(Phase::AwaitingTranslations, q);
    translations = oracle_.translate(batch, config_.source_lang, config_.target_lang, q);
    for (const auto& ex : batch) {
      auto it = translations.find(ex.id);
      if (it == translations.end() || it->second.empty()) {
        throw OracleError("translator returned no utterance for '" + ex.id + "'");
      }
    }
  }

  // Commit.
  std::unordered_set<std::string> chosen(sel.ids.begin(), sel.ids.end());
  std::vector<Example> remaining;
  for (auto& ex : state_.untranslated) {
    if (!chosen.count(ex.id)) remaining.push_back(std::move(ex));
  }
  state_.untranslated = std::move(remaining);
  for (auto& ex : batch) {
    ex.set_utterance(config_.target_lang, translations.at(ex.id));
    state_.translated.push_back(std::move(ex));
  }
  state_.selections.push_back(sel.ids);
  std::map<std::string, Eigen::Index> clusters;
  if (sel.clustering) {
    for (const auto& ex : state_.translated) clusters[ex.id] = sel.clustering->cluster_of(ex.id);
  }
  state_.selected_clusters.push_back(std::move(clusters));
  state_.round = q;

  train_and_evaluate();
  if (finished()) notify(Phase::Finished, q);
}

void Campaign::run_all() {
  if (!started_) start();
  while (!finished()) run_round();
}

std::unique_ptr<ParserAdapter> make_parser(const CampaignConfig& config) {
  if (config.parser == "external") return std::make_unique<ExternalParser>(config.parser_command);
  return std::make_unique<SurrogateParser>();
}

std::unique_ptr<MachineTranslator> make_machine_translator(const CampaignConfig& config) {
  std::map<std::string, std::string> lex;
  if (!config.lexicon_path.empty()) lex = load_lexicon(config.lexicon_path);
  return std::make_unique<NoisyLexiconTranslator>(config.source_lang, config.target_lang,
                                                  derive_seed(config.seed, "mt"), config.mt_dropout, std::move(lex));
}

std::unique_ptr<UtteranceEmbedder> make_embedder(const CampaignConfig& config) {
  if (!config.embeddings_path.empty()) {
    return std::make_unique<PrecomputedEmbedder>(PrecomputedEmbedder::load(config.embeddings_path));
  }
  return std::make_unique<HashedNgramEmbedder>();
}

std::pair<Corpus, Corpus> campaign_split(const Corpus& corpus, const CampaignConfig& config) {
  Corpus c = corpus;
  c.source_lang = config.source_lang;
  c.target_lang = config.target_lang;
  if (config.test_fraction > 0.0) {
    return split(c, SplitSpec{config.test_fraction, derive_seed(config.seed, "test-split")});
  }
  Corpus test;
  test.source_lang = c.source_lang;
  test.target_lang = c.target_lang;
  return {std::move(c), std::move(test)};
}

CampaignResult run_campaign(const Corpus& corpus, const CampaignConfig& config) {
  config.validate();
  const auto [train, test] = campaign_split(corpus, config);
  auto parser = make_parser(config);
  auto mt = make_machine_translator(config);
  auto embedder = make_embedder(config);
  std::unique_ptr<TranslationOracle> oracle;
  if (config.oracle == OracleKind::GoldReveal) {
    oracle = std::make_unique<GoldRevealOracle>(train);
  } else {
    oracle = std::make_unique<HumanSessionOracle>(nullptr);
  }
  Campaign campaign(train, test, config, *parser, *oracle, mt.get(), embedder.get());
  campaign.run_all();
  CampaignResult r{campaign.state(), {}};
  r.metrics = format_metrics(r.state.metrics);
  return r;
}

std::vector<std::string> select_next(const Corpus& corpus, std::span<const std::string> already_selected,
                                     const CampaignConfig& config, std::size_t k) {
  config.validate();
  Corpus c = corpus;
  c.source_lang = config.source_lang;
  c.target_lang = config.target_lang;
  const auto idx = c.index();
  std::unordered_set<std::string> done;
  std::vector<Example> selected, candidates;
  for (const auto& id : already_selected) {
    auto it = idx.find(id);
    if (it == idx.end()) throw CorpusError("selected id '" + id + "' is not in the corpus");
    if (!done.insert(id).second) throw CorpusError("selected id '" + id + "' listed twice");
    selected.push_back(c.examples[it->second]);
  }
  const Corpus pool = source_view(c);
  for (const auto& ex : pool.examples) {
    if (!done.count(ex.id)) candidates.push_back(ex);
  }

  const Strategy s = config.acquisition.strategy;
  std::unique_ptr<ParserAdapter> parser;
  std::unique_ptr<MachineTranslator> mt;
  std::optional<TargetDistribution> target;
  std::vector<LabeledUtterance> machine;
  if (config.mode == CampaignMode::Amsp) {
    mt = make_machine_translator(config);
    machine = machine_translate_all(pool.examples, *mt, config.source_lang, config.target_lang);
  }
  const auto human = pairs_for(selected, config.target_lang);
  if (s == Strategy::S2sFw || is_amsp(s)) {
    auto data = pairs_for(pool.examples, config.source_lang);
    data.insert(data.end(), machine.begin(), machine.end());
    data.insert(data.end(), human.begin(), human.end());
    parser = make_parser(config);
    parser->train(data);
  }
  if (is_amsp(s)) {
    auto pairs = machine;
    pairs.insert(pairs.end(), human.begin(), human.end());
    target = fit_target_distribution(pairs);
  }
  auto embedder = make_embedder(config);

  RoundContext ctx;
  ctx.candidates = candidates;
  ctx.selected = selected;
  ctx.source_training = pool.examples;
  ctx.source_lang = config.source_lang;
  ctx.target_lang = config.target_lang;
  ctx.budget = k;
  ctx.accumulated_budget = selected.size() + k;
  ctx.round = 1;
  ctx.parser = parser.get();
  ctx.target = target ? &*target : nullptr;
  ctx.back_translator = mt.get();
  ctx.embedder = embedder.get();
  AcquisitionConfig acq = config.acquisition;
  acq.seed = config.seed;
  return select_for_round(ctx, acq).ids;
}

// ---- tuning ----------------------------------------------------------------

TuningGrid parse_grid(std::string_view text) {
  TuningGrid g;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    if (trim(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("grid line: expected key = value");
    const auto key = trim(std::string_view(line).substr(0, eq));
    const auto val = trim(std::string_view(line).substr(eq + 1));
    if (key == "alphas") g.alphas = to_list(key, val);
    else if (key == "betas") g.betas = to_list(key, val);
    else if (key == "tuning_rate") g.tuning_rate = to_double(key, val);
    else throw ConfigError("unknown grid key '" + key + "'");
  }
  return g;
}

TuningGrid load_grid(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open grid file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_grid(buf.str());
}

TuningResult tune_hyperparameters(const Corpus& source_corpus, const TuningGrid& grid, const CampaignConfig& config,
                                  ParserAdapter& parser) {
  if (grid.alphas.empty() || grid.betas.empty()) throw ConfigError("tuning grid is empty");
  if (!(grid.tuning_rate > 0.0 && grid.tuning_rate <= 100.0)) throw ConfigError("tuning rate must lie in (0, 100]");
  const std::string& src = config.source_lang;

  Corpus c = source_corpus;
  c.source_lang = src;
  const auto [train, dev] = split(c, SplitSpec{0.20, derive_seed(config.seed, "dev-split")});
  const auto dev_pairs = pairs_for(dev.examples, src);

  std::vector<double> schedule;
  for (double p : config.budget_percents) {
    if (p < grid.tuning_rate) schedule.push_back(p);
  }
  schedule.push_back(grid.tuning_rate);
  const auto budgets = budget_sizes(train.size(), schedule);

  TuningResult result;
  bool have_best = false;
  double best_acc = 0;
  for (double alpha : grid.alphas) {
    for (double beta : grid.betas) {
      AcquisitionConfig acq = config.acquisition;
      acq.strategy = Strategy::LfsLcD;
      acq.alpha = alpha;
      acq.beta = beta;
      acq.seed = config.seed;

      std::vector<Example> candidates = train.examples;
      std::vector<Example> selected;
      for (std::size_t r = 0; r < budgets.size(); ++r) {
        RoundContext ctx;
        ctx.candidates = candidates;
        ctx.selected = selected;
        ctx.source_training = train.examples;
        ctx.source_lang = src;
        ctx.target_lang = config.target_lang;
        ctx.budget = budgets[r];
        ctx.accumulated_budget = selected.size() + budgets[r];
        ctx.round = static_cast<int>(r + 1);
        const auto ids = select_for_round(ctx, acq).ids;
        const std::set<std::string> picked(ids.begin(), ids.end());
        std::vector<Example> rest;
        for (auto& ex : candidates) (picked.count(ex.id) ? selected : rest).push_back(std::move(ex));
        candidates = std::move(rest);
      }

      parser.train(pairs_for(selected, src));
      const double acc = parser.evaluate(dev_pairs);
      ++result.cycles;
      result.table.push_back({alpha, beta, acc, selected.size()});
      const bool better = !have_best || acc > best_acc ||
                          (acc == best_acc && (alpha > result.alpha || (alpha == result.alpha && beta > result.beta)));
      if (better) {
        have_best = true;
        best_acc = acc;
        result.alpha = alpha;
        result.beta = beta;
      }
    }
  }
  return result;
}

} // namespace almsp
